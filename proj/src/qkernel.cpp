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

#include "qcfa/qkernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>

namespace qcfa::qk {

QuantumChannel::QuantumChannel(std::string name, std::vector<Branch> branches)
    : name_(std::move(name)), branches_(std::move(branches)) {
    if (branches_.empty()) throw Error(ErrorKind::IncompleteChannel, "channel '" + name_ + "' has no branches");
    dim_ = static_cast<int>(branches_.front().op.rows());
    if (dim_ < 1) throw Error(ErrorKind::DimensionMismatch, "channel '" + name_ + "' has dimension 0");
    std::set<std::string> seen;
    scalar_ = true;
    for (const auto &b : branches_) {
        if (b.op.rows() != dim_ || b.op.cols() != dim_) {
            throw Error(ErrorKind::DimensionMismatch, "channel '" + name_ + "' branch '" + b.label + "' is not " +
                                                          std::to_string(dim_) + "x" + std::to_string(dim_));
        }
        if (!b.op.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite entry in branch '" + b.label + "'");
        if (!seen.insert(b.label).second) {
            throw Error(ErrorKind::InvalidArgument,
                        "label '" + b.label + "' repeated in channel '" + name_ +
                            "'; only one operator per outcome is supported");
        }
        cplx s = b.op(0, 0);
        if ((b.op - s * Matrix::Identity(dim_, dim_)).norm() > 1e-14) scalar_ = false;
    }
}

int QuantumChannel::find_label(const std::string &label) const {
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        if (branches_[k].label == label) return static_cast<int>(k);
    }
    return -1;
}

bool QuantumChannel::is_identity() const {
    return branches_.size() == 1 && (branches_[0].op - Matrix::Identity(dim_, dim_)).norm() < 1e-14;
}

QuantumState::QuantumState(Vector amplitudes) : amp_(std::move(amplitudes)) {
    if (amp_.size() < 1) throw Error(ErrorKind::DimensionMismatch, "empty state vector");
    if (!amp_.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite amplitude");
}

QuantumState QuantumState::basis(int dim, int k) {
    if (k < 0 || k >= dim) throw Error(ErrorKind::DimensionMismatch, "basis index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return QuantumState(v);
}

double spectral_norm(const Matrix &m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

bool is_unitary(const Matrix &u, double tol) {
    return u.rows() == u.cols() && (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm() <= tol;
}

ChannelReport check_channel(const QuantumChannel &ch) {
    ChannelReport r;
    Matrix sum = Matrix::Zero(ch.dim(), ch.dim());
    for (const auto &b : ch.branches()) {
        sum += b.op.adjoint() * b.op;
        r.branch_norms.push_back(spectral_norm(b.op));
    }
    r.residual = spectral_norm(sum - Matrix::Identity(ch.dim(), ch.dim()));
    r.pass = r.residual <= kTolerance;
    return r;
}

void require_complete(const QuantumChannel &ch) {
    ChannelReport r = check_channel(ch);
    if (!r.pass) {
        throw Error(ErrorKind::IncompleteChannel,
                    "channel '" + ch.name() + "' completeness residual " + std::to_string(r.residual));
    }
}

std::vector<Outcome> apply_channel(const QuantumChannel &ch, const QuantumState &psi) {
    if (psi.dim() != ch.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state dimension " + std::to_string(psi.dim()) +
                                                      " vs channel dimension " + std::to_string(ch.dim()));
    }
    require_complete(ch);
    double n2 = psi.norm_sq();
    if (n2 <= 0.0) throw Error(ErrorKind::InvalidArgument, "zero state");
    std::vector<Outcome> out;
    out.reserve(ch.size());
    for (const auto &b : ch.branches()) {
        Vector v = b.op * psi.amplitudes();
        double p = v.squaredNorm() / n2;
        Outcome o;
        o.label = b.label;
        o.probability = p;
        o.post = p > 0.0 ? QuantumState(v / v.norm()) : QuantumState(Vector::Zero(ch.dim()));
        out.push_back(std::move(o));
    }
    return out;
}

namespace {

// Principal square root of a Hermitian positive semidefinite matrix.
Matrix psd_sqrt(const Matrix &h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) ev(k) = ev(k) > 0.0 ? std::sqrt(ev(k)) : 0.0;
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

QuantumChannel dilate_contraction(const Eigen::MatrixXd &m, double c, const std::string &name) {
    if (m.rows() != m.cols() || m.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "dilation needs a square matrix");
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "dilation constant must be positive");
    Matrix a = m.cast<cplx>() / c;
    double norm = spectral_norm(a);
    if (norm > 1.0 + kTolerance) {
        throw Error(ErrorKind::Contraction, "spectral norm of M/c is " + std::to_string(norm) +
                                                " > 1; use a larger constant (c >= " +
                                                std::to_string(norm * c) + ")");
    }
    auto n = a.rows();
    Matrix rest = psd_sqrt(Matrix::Identity(n, n) - a.adjoint() * a);
    QuantumChannel ch(name, {{"go", a}, {"restart", rest}});
    require_complete(ch);
    return ch;
}

QuantumChannel identity_channel(int dim) { return QuantumChannel("id", {{"id", Matrix::Identity(dim, dim)}}); }

QuantumChannel coin_channel(int dim) {
    Matrix h = Matrix::Identity(dim, dim) * std::sqrt(0.5);
    return QuantumChannel("coin", {{"h", h}, {"t", h}});
}

QuantumChannel unitary_channel(const std::string &name, const Matrix &u) {
    if (!is_unitary(u, 1e-10)) throw Error(ErrorKind::IncompleteChannel, "'" + name + "' is not unitary");
    return QuantumChannel(name, {{"u", u}});
}

QuantumChannel rotation_channel(const std::string &name, double theta) {
    Matrix u(2, 2);
    u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return unitary_channel(name, u);
}

QuantumChannel projective_channel(const std::string &name, const std::vector<std::string> &labels,
                                  const std::vector<Matrix> &projectors) {
    if (labels.size() != projectors.size()) throw Error(ErrorKind::InvalidArgument, "label/projector count mismatch");
    std::vector<Branch> b;
    for (std::size_t k = 0; k < labels.size(); ++k) b.push_back({labels[k], projectors[k]});
    QuantumChannel ch(name, std::move(b));
    require_complete(ch);
    return ch;
}

QuantumChannel reset_channel(const std::string &name, const Vector &target) {
    double n = target.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "reset target is zero");
    Vector t = target / n;
    int d = static_cast<int>(t.size());
    std::vector<Branch> b;
    for (int k = 0; k < d; ++k) {
        Matrix op = Matrix::Zero(d, d);
        op.col(k) = t;
        b.push_back({"r" + std::to_string(k), op});
    }
    return QuantumChannel(name, std::move(b));
}

}  // namespace qcfa::qk
