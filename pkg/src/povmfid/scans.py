"""Parameter scans and figure datasets.

Scans are evaluated in chunks; when ``POVMFID_THREADS`` is set above one the
chunks run on a thread pool and are merged back in grid order, so output is
identical for every thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .builders import _hadamards_d4, sic_d3
from .designs import haar_frame_potential, phi_half_cmub, phi_half_upper
from .errors import DomainError
from .fidelity import FidelityConstants, _q3, rising_factorial
from .numkernel import operator_norms
from .qubit import commutator_trace_norm, fab, h_mes

__all__ = [
    "MUB_ANCHORS",
    "f_mub",
    "f_mub_batch",
    "f_sic",
    "f_sic_batch",
    "ScanTable",
    "scan_mub4",
    "scan_sic3",
    "SicDiagnostics",
    "sic_diagnostics",
    "FIGURES",
    "figure_dataset",
    "thread_count",
]

MUB_ANCHORS = ((math.pi / 2, 0.0, 0.0), (math.pi / 2, math.pi / 2, math.pi / 2))
SIC_PERIOD = 2 * math.pi / 9
_CHUNK = 128


def thread_count() -> int:
    raw = os.environ.get("POVMFID_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _chunked_map(fn: Callable[[np.ndarray], np.ndarray], params: np.ndarray) -> np.ndarray:
    chunks = [params[i : i + _CHUNK] for i in range(0, len(params), _CHUNK)]
    n = thread_count()
    if n == 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(fn, chunks))  # map preserves chunk order
    return np.concatenate(parts) if parts else np.empty(0)


def _projectors_from_columns(U: np.ndarray) -> np.ndarray:
    # U: (..., d, d) unitaries -> (..., d, d, d) column projectors
    cols = np.swapaxes(U, -1, -2)
    return cols[..., :, None] * np.conj(cols[..., None, :])


def f_mub_batch(xyz: np.ndarray) -> np.ndarray:
    """Three-copy fidelity of the d=4 MUB triple for each row ``(x, y, z)``."""
    xyz = np.atleast_2d(np.asarray(xyz, dtype=float))
    H1, H2 = _hadamards_d4(xyz[:, 0], xyz[:, 1], xyz[:, 2])
    A = np.broadcast_to(_projectors_from_columns(np.eye(4, dtype=complex)), (len(xyz), 4, 4, 4))
    B = _projectors_from_columns(H1)
    C = _projectors_from_columns(H2)
    Q = _q3(A[:, :, None, None], B[:, None, :, None], C[:, None, None, :])
    norms = operator_norms(Q).reshape(len(xyz), -1)
    return norms.sum(axis=1) / rising_factorial(4, 3)


def f_mub(x: float, y: float, z: float) -> float:
    return float(f_mub_batch([[x, y, z]])[0])


def f_sic_batch(phis: Sequence[float]) -> np.ndarray:
    """``F(A_sic(phi)^{(x)3})`` for each phase."""
    out = np.empty(len(phis))
    for n, phi in enumerate(phis):
        S = sic_d3(float(phi)).stack()
        Q = _q3(S[:, None, None], S[None, :, None], S[None, None, :])
        out[n] = operator_norms(Q).sum() / rising_factorial(3, 3)
    return out


def f_sic(phi: float) -> float:
    return float(f_sic_batch([phi])[0])


@dataclass(frozen=True, eq=False)
class ScanTable:
    header: tuple
    rows: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]


def _on_grid(value: float, n: int) -> bool:
    k = value * n / math.pi
    return abs(k - round(k)) < 1e-9 and 0 <= round(k) < n


def scan_mub4(n: int) -> ScanTable:
    """``n^3`` points of ``[0, pi)^3`` in lexicographic order, then any missing anchors."""
    if n < 2:
        raise DomainError("grid needs at least two points per axis")
    axis = np.arange(n) * math.pi / n
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    params = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    extra = [a for a in MUB_ANCHORS if not all(_on_grid(v, n) for v in a)]
    if extra:
        params = np.vstack([params, np.array(extra)])
    values = _chunked_map(f_mub_batch, params)
    return ScanTable(("x", "y", "z", "fidelity"), np.column_stack([params, values]))


def scan_sic3(n: int) -> ScanTable:
    if n < 9:
        raise DomainError("SIC scan needs at least 9 samples")
    phis = np.arange(n) * SIC_PERIOD / n
    values = _chunked_map(f_sic_batch, phis)
    return ScanTable(("phi", "fidelity"), np.column_stack([phis, values]))


@dataclass(frozen=True)
class SicDiagnostics:
    samples: int
    period_max_deviation: float
    argmin_phi: float
    argmax_phi: float
    min_rise_step: float
    min_fall_step: float
    increasing_first_half: bool
    decreasing_second_half: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def sic_diagnostics(table: ScanTable, step_tol: float = 1e-10) -> SicDiagnostics:
    """Periodicity and unimodality of the SIC scan.

    Periodicity compares each sample with its shift by one period.  The
    monotonicity flags require every discrete step on ``[0, pi/9]`` to rise
    and every step on ``[pi/9, 2 pi/9]`` to fall by more than ``-step_tol``.
    """
    phis = table.column("phi")
    F = table.column("fidelity")
    shifted = f_sic_batch(phis + SIC_PERIOD)
    # close the period so both halves include their endpoints
    ph_ext = np.append(phis, SIC_PERIOD)
    F_ext = np.append(F, F[0])
    mid = math.pi / 9
    rise_mask = ph_ext[1:] <= mid + 1e-12
    fall_mask = ph_ext[:-1] >= mid - 1e-12
    steps = np.diff(F_ext)
    rise = steps[rise_mask]
    fall = -steps[fall_mask]
    return SicDiagnostics(
        samples=len(F),
        period_max_deviation=float(np.max(np.abs(shifted - F))),
        argmin_phi=float(phis[int(np.argmin(F))]),
        argmax_phi=float(phis[int(np.argmax(F))]),
        min_rise_step=float(rise.min()) if rise.size else math.nan,
        min_fall_step=float(fall.min()) if fall.size else math.nan,
        increasing_first_half=bool(rise.size and rise.min() > -step_tol),
        decreasing_second_half=bool(fall.size and fall.min() > -step_tol),
    )


# -- figure datasets -------------------------------------------------------


def _two_copy_rank1(d: int, phi_half: float) -> float:
    return (2 * d * (d + 1) + 2 * phi_half) / (d * (d + 1) * (d + 2))


def _fig_fp_half(dmax: int) -> ScanTable:
    rows = [
        (d, float(d), phi_half_upper(d), phi_half_cmub(d), haar_frame_potential(d, 0.5))
        for d in range(2, dmax + 1)
    ]
    return ScanTable(("d", "basis", "sic", "cmub", "haar"), np.array(rows, dtype=float))


def _fig_fid_iid(dmax: int) -> ScanTable:
    rows = []
    for d in range(2, dmax + 1):
        f1 = 2.0 / (d + 1)
        vals = [_two_copy_rank1(d, v) - f1 for v in (d, phi_half_upper(d), phi_half_cmub(d), haar_frame_potential(d, 0.5))]
        rows.append([d] + vals)
    return ScanTable(("d", "projective", "sic", "cmub", "isotropic"), np.array(rows, dtype=float))


def _fig_fid_settings(dmax: int) -> ScanTable:
    rows = []
    for d in range(2, dmax + 1):
        K = FidelityConstants.for_dim(d)
        rows.append([d, K.n_copy_ub(2), K.f2_sep, K.f2_iid, K.f1])
    return ScanTable(("d", "collective", "product_mub", "iid_sic", "iid_projective"), np.array(rows, dtype=float))


def _fig_qubit_commutator(n: int) -> ScanTable:
    phis = np.linspace(0.0, math.pi / 2, n)
    rows = np.column_stack([phis, commutator_trace_norm(phis), fab(phis), np.full(n, 2.0 / 3.0)])
    return ScanTable(("phi", "commutator_norm", "fidelity", "f1"), rows)


def _fig_mes_curve(n: int) -> ScanTable:
    phis = np.linspace(0.0, math.pi / 2, n)
    rows = np.column_stack([phis, fab(phis), [h_mes(p).h_mes for p in phis]])
    return ScanTable(("phi", "fidelity", "h_mes"), rows)


FIGURES = ("fp_half", "fid_iid", "fid_settings", "qubit_commutator", "mes_curve")


def figure_dataset(which: str, dmax: int = 16, samples: int = 101) -> ScanTable:
    if which not in FIGURES:
        raise DomainError(f"unknown figure {which!r}")
    if which in ("fp_half", "fid_iid", "fid_settings"):
        if not 2 <= dmax <= 16:
            raise DomainError("dmax must lie in 2..16")
        return {"fp_half": _fig_fp_half, "fid_iid": _fig_fid_iid, "fid_settings": _fig_fid_settings}[which](dmax)
    if samples < 2:
        raise DomainError("need at least two samples")
    return {"qubit_commutator": _fig_qubit_commutator, "mes_curve": _fig_mes_curve}[which](samples)
