"""Scarred constrained spin chains: exact diagonalization, revivals and coupling optimization."""

import os
import subprocess
import sys


def _select_blas_core():
    # Some OpenBLAS builds pick a faulty kernel on newer CPUs. The kernel is
    # fixed at load time, so probe in a child process and pin a known-good
    # core type before the extension loads.
    if "OPENBLAS_CORETYPE" in os.environ or os.environ.get("PXPSCAR_SKIP_BLAS_PROBE"):
        return
    probe = "import sys, pxpscar._core as c; sys.exit(0 if c.dense_backend_ok() else 1)"
    env = dict(os.environ, PXPSCAR_SKIP_BLAS_PROBE="1")
    result = subprocess.run([sys.executable, "-c", probe], env=env, capture_output=True)
    if result.returncode == 1:
        os.environ["OPENBLAS_CORETYPE"] = "Haswell"


_select_blas_core()

from ._core import (  # noqa: E402
    NumericError,
    TooLargeError,
    ansatz_couplings,
    basis_states,
    basis_summary,
    cost,
    dense_backend_ok,
    optimal_h2_analytic,
    optimize,
    quench,
    r_statistic,
    range4_residual_error,
    revival_peaks,
    solve_constraint,
    spectrum,
    su2_report,
    toy,
    version,
)

__version__ = version()

__all__ = [
    "NumericError",
    "TooLargeError",
    "ansatz_couplings",
    "basis_states",
    "basis_summary",
    "cost",
    "dense_backend_ok",
    "optimal_h2_analytic",
    "optimize",
    "quench",
    "r_statistic",
    "range4_residual_error",
    "revival_peaks",
    "solve_constraint",
    "spectrum",
    "su2_report",
    "toy",
    "version",
]
