# Copyright 2026 The qcfa Authors
# SPDX-License-Identifier: Apache-2.0
"""Two-way quantum finite automata toolkit."""

from qcfa._core import (
    MachineSpec,
    QcfaError,
    build_pppal,
    build_rl,
    cli,
    compile_pppal,
    compile_rpal,
    eq_core,
    estimate,
    interpret_exact,
    is_member,
    pal_core,
    run,
    rw_gate,
    solve_exact,
    total_length,
)

__all__ = [
    "MachineSpec",
    "QcfaError",
    "build_pppal",
    "build_rl",
    "cli",
    "compile_pppal",
    "compile_rpal",
    "eq_core",
    "estimate",
    "interpret_exact",
    "is_member",
    "pal_core",
    "run",
    "rw_gate",
    "solve_exact",
    "total_length",
]
