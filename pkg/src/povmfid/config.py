"""Numerical tolerances used across the package.

Every threshold lives here so that tests and the acceptance suite can
reference a single record.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian_flag: float = 1e-12
    hermitian_check: float = 1e-10
    psd_input: float = 1e-9
    eigen_reconstruction: float = 1e-9
    jacobi_offdiag: float = 1e-13
    jacobi_max_sweeps: int = 60
    projector_idempotence: float = 1e-10
    swap_identity: float = 1e-12
    psd_margin: float = 1e-9
    completeness: float = 1e-9
    zero_element: float = 1e-9
    stochastic_column: float = 1e-12
    proportional: float = 1e-10
    matching: float = 1e-8
    rank_eigenvalue: float = 1e-8
    overlap: float = 1e-8
    unbiased: float = 1e-9
    commute: float = 1e-9
    reducible_overlap: float = 1e-9
    ket_norm: float = 1e-12
    weight_sum: float = 1e-10
    design: float = 1e-8
    saturation: float = 1e-8
    degenerate_top: float = 1e-8
    witness_margin: float = 1e-9
    moment_sum: float = 1e-12
    max_tensor_dim: int = 4096


TOL = Tolerances()
