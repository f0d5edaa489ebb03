// Copyright 2026 The qcfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QCFA_QKERNEL_HPP
#define QCFA_QKERNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "qcfa/error.hpp"

namespace qcfa::qk {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kTolerance = 1e-9;

struct Branch {
    std::string label;
    Matrix op;
};

/// A selective quantum operation: one operator per outcome label.  The
/// constructor rejects empty channels, mismatched shapes, non-finite
/// entries and repeated labels; completeness is checked by
/// check_channel / require_complete.
class QuantumChannel {
   public:
    QuantumChannel() = default;
    QuantumChannel(std::string name, std::vector<Branch> branches);

    const std::string &name() const { return name_; }
    int dim() const { return dim_; }
    const std::vector<Branch> &branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    int find_label(const std::string &label) const;  // -1 when absent

    /// Every branch is a scalar multiple of the identity (coin-like).
    bool is_scalar() const { return scalar_; }
    bool is_identity() const;

   private:
    std::string name_;
    int dim_ = 0;
    std::vector<Branch> branches_;
    bool scalar_ = false;
};

class QuantumState {
   public:
    QuantumState() = default;
    explicit QuantumState(Vector amplitudes);
    static QuantumState basis(int dim, int k);

    const Vector &amplitudes() const { return amp_; }
    int dim() const { return static_cast<int>(amp_.size()); }
    double norm_sq() const { return amp_.squaredNorm(); }

   private:
    Vector amp_;
};

struct Outcome {
    std::string label;
    double probability = 0.0;
    QuantumState post;  // normalized; zero vector when probability is 0
};

struct ChannelReport {
    double residual = 0.0;             // spectral norm of sum E^dag E - I
    std::vector<double> branch_norms;  // spectral norms
    bool pass = false;
};

ChannelReport check_channel(const QuantumChannel &ch);
void require_complete(const QuantumChannel &ch);

std::vector<Outcome> apply_channel(const QuantumChannel &ch, const QuantumState &psi);

/// Two-branch channel {go: M/c, restart: sqrt(I - (M/c)^dag (M/c))}.
QuantumChannel dilate_contraction(const Eigen::MatrixXd &m, double c, const std::string &name = "dilation");

QuantumChannel identity_channel(int dim);
QuantumChannel coin_channel(int dim);
QuantumChannel unitary_channel(const std::string &name, const Matrix &u);
QuantumChannel rotation_channel(const std::string &name, double theta);
/// Projective measurement with one projector per label.
QuantumChannel projective_channel(const std::string &name, const std::vector<std::string> &labels,
                                  const std::vector<Matrix> &projectors);
/// Maps every state to `target` (normalized); branch k is |target><k|.
QuantumChannel reset_channel(const std::string &name, const Vector &target);

double spectral_norm(const Matrix &m);
bool is_unitary(const Matrix &u, double tol = 1e-12);

}  // namespace qcfa::qk

#endif
