"""Dense complex linear algebra for small single-copy and tensor-power spaces.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The module
provides a cyclic complex Jacobi eigensolver, Kronecker products, partial
traces over leading tensor factors, and permutation operators on
``H^{\\otimes t}`` (symmetric projector and swap).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DimMismatch, NoConvergence, NotHermitian, TooLarge

__all__ = [
    "as_matrix",
    "is_hermitian",
    "hermitian_eigen",
    "operator_norm",
    "operator_norms",
    "kron",
    "partial_trace_first_n",
    "permutation_operator",
    "symmetric_projector",
    "SymmetricProjector",
    "swap_operator",
    "sym_dim",
    "random_unitary",
    "inv_sqrt_psd",
    "ket_to_projector",
    "PAULI",
]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a square complex128 array, raising on bad shapes."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def is_hermitian(M, tol: float = TOL.hermitian_flag) -> bool:
    M = as_matrix(M)
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def _check_hermitian(M: np.ndarray, tol: float) -> None:
    dev = float(np.max(np.abs(M - M.conj().T), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if dev > tol * scale:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")


def hermitian_eigen(
    M,
    tol: float = TOL.jacobi_offdiag,
    max_sweeps: int = TOL.jacobi_max_sweeps,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns ``(eigenvalues, V)`` with eigenvalues sorted in descending order
    and the matching orthonormal eigenvectors as the columns of ``V``.

    Each rotation first removes the phase of the pivot ``M[p, q]`` and then
    applies the real symmetric Jacobi rotation.  Iteration stops once the
    off-diagonal Frobenius mass drops below ``tol * ||M||_F``.
    """
    A = as_matrix(M).copy()
    _check_hermitian(A, TOL.hermitian_check)
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    norm_f = float(np.linalg.norm(A))
    if n == 1 or norm_f == 0.0:
        return np.real(np.diag(A)).copy(), V

    threshold = tol * norm_f
    for _ in range(max_sweeps + 1):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                g_pp = c
                g_pq = s
                g_qp = -s * np.conj(phase)
                g_qq = c * np.conj(phase)
                # columns update: A <- A G
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = col_p * g_pp + col_q * g_qp
                A[:, q] = col_p * g_pq + col_q * g_qq
                # rows update: A <- G^dagger A
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = np.conj(g_pp) * row_p + np.conj(g_qp) * row_q
                A[q, :] = np.conj(g_pq) * row_p + np.conj(g_qq) * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = vp * g_pp + vq * g_qp
                V[:, q] = vp * g_pq + vq * g_qq
    else:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(A))
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def operator_norm(M) -> float:
    """Largest eigenvalue of a positive semidefinite Hermitian matrix."""
    w, _ = hermitian_eigen(M)
    if w[-1] < -TOL.psd_input * max(1.0, abs(w[0])):
        raise NotHermitian(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
    return float(w[0])


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Largest eigenvalues of a batch of Hermitian matrices (last two axes).

    Uses the LAPACK batched solver; the fidelity engine evaluates thousands
    of small matrices per call and the per-matrix Jacobi loop is too slow
    for the parameter scans.
    """
    stack = np.asarray(stack, dtype=complex)
    herm = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
    return np.linalg.eigvalsh(herm)[..., -1]


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (or kets)."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def _tensor_power_dim(d: int, n: int) -> int:
    dim = d**n
    if dim > TOL.max_tensor_dim:
        raise TooLarge(f"d^{n} = {dim} exceeds the resource guard {TOL.max_tensor_dim}")
    return dim


def partial_trace_first_n(M, d: int, n_traced: int) -> np.ndarray:
    """Trace out the first ``n_traced`` factors of an operator on ``H^{n_traced+1}``."""
    M = as_matrix(M)
    dim = d ** (n_traced + 1)
    if M.shape[0] != dim:
        raise DimMismatch(f"operator has dimension {M.shape[0]}, expected d^{n_traced + 1} = {dim}")
    rest = d**n_traced
    T = M.reshape(rest, d, rest, d)
    return np.einsum("iaib->ab", T)


def permutation_operator(d: int, perm) -> np.ndarray:
    """Matrix of ``U_pi`` on ``H^{\\otimes t}``, sending tensor factor ``k`` to slot ``perm[k]``."""
    perm = tuple(perm)
    t = len(perm)
    dim = _tensor_power_dim(d, t)
    eye = np.eye(dim, dtype=complex).reshape((d,) * t + (dim,))
    # output factor perm[k] carries input factor k
    axes = [0] * t
    for k, target in enumerate(perm):
        axes[target] = k
    return np.transpose(eye, axes + [t]).reshape(dim, dim)


def sym_dim(d: int, t: int) -> int:
    """Dimension of the t-partite symmetric subspace, binom(d+t-1, t)."""
    return math.comb(d + t - 1, t)


@dataclass(frozen=True)
class SymmetricProjector:
    single_dim: int
    copies: int
    matrix: np.ndarray

    @property
    def rank(self) -> int:
        return sym_dim(self.single_dim, self.copies)


def symmetric_projector(d: int, t: int) -> SymmetricProjector:
    """Projector onto the symmetric subspace of ``H^{\\otimes t}`` as an average of permutations."""
    dim = _tensor_power_dim(d, t)
    P = np.zeros((dim, dim), dtype=complex)
    for perm in itertools.permutations(range(t)):
        P += permutation_operator(d, perm)
    P /= math.factorial(t)
    P.setflags(write=False)
    return SymmetricProjector(single_dim=d, copies=t, matrix=P)


def swap_operator(d: int) -> np.ndarray:
    W = permutation_operator(d, (1, 0))
    W.setflags(write=False)
    return W


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def inv_sqrt_psd(S) -> np.ndarray:
    """``S^{-1/2}`` for a positive definite Hermitian matrix."""
    S = as_matrix(S)
    w, V = np.linalg.eigh(0.5 * (S + S.conj().T))
    if w[0] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return (V / np.sqrt(w)) @ V.conj().T


def ket_to_projector(ket) -> np.ndarray:
    v = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
