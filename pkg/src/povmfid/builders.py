"""Constructors for the measurement families used throughout the package."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .designs import WeightedStateSet, design_to_povm, random_one_design
from .errors import BadCount, DomainError, NotRank1
from .numkernel import PAULI, inv_sqrt_psd, ket_to_projector, random_unitary
from .povm import Povm, is_rank1

__all__ = [
    "computational_basis",
    "fourier_basis",
    "basis_povm",
    "HeisenbergWeylPair",
    "heisenberg_weyl",
    "sic_d3",
    "sic_d2_tetrahedron",
    "cmub",
    "PLATONIC_SOLIDS",
    "platonic_design",
    "MubTripleParams",
    "mub_triple_d4",
    "triple_products",
    "random_rank1_povm",
    "random_povm",
    "qubit_binary_povm",
    "BUILDERS",
]


def basis_povm(U: np.ndarray, prefix: str = "e") -> Povm:
    """Rank-1 projective POVM onto the columns of a unitary."""
    U = np.asarray(U, dtype=complex)
    return Povm([ket_to_projector(U[:, k]) for k in range(U.shape[1])], [f"{prefix}{k}" for k in range(U.shape[1])])


def computational_basis(d: int) -> Povm:
    if d < 2:
        raise BadCount("basis requires d >= 2")
    return basis_povm(np.eye(d), "z")


def _fourier_matrix(d: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)


def fourier_basis(d: int) -> Povm:
    if d < 2:
        raise BadCount("basis requires d >= 2")
    return basis_povm(_fourier_matrix(d), "f")


@dataclass(frozen=True, eq=False)
class HeisenbergWeylPair:
    d: int
    X: np.ndarray
    Z: np.ndarray

    @property
    def omega(self) -> complex:
        return np.exp(2j * np.pi / self.d)

    def displacement(self, j: int, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.X, j) @ np.linalg.matrix_power(self.Z, k)


def heisenberg_weyl(d: int) -> HeisenbergWeylPair:
    X = np.roll(np.eye(d, dtype=complex), 1, axis=0)  # X|k> = |k+1>
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    X.setflags(write=False)
    Z.setflags(write=False)
    return HeisenbergWeylPair(d=d, X=X, Z=Z)


def sic_d3(phi: float) -> Povm:
    """Qutrit SIC from the Heisenberg-Weyl orbit of ``(0, 1, -e^{i phi})/sqrt 2``."""
    hw = heisenberg_weyl(3)
    fid = np.array([0.0, 1.0, -np.exp(1j * phi)]) / math.sqrt(2.0)
    elements, labels = [], []
    for j in range(3):
        for k in range(3):
            psi = hw.displacement(j, k) @ fid
            elements.append(ket_to_projector(psi) / 3.0)
            labels.append(f"s{j}{k}")
    return Povm(elements, labels)


def sic_d2_tetrahedron() -> Povm:
    """Qubit SIC whose Bloch vectors form a regular tetrahedron."""
    vecs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3.0)
    return Povm([_bloch_state(r) / 2.0 for r in vecs], [f"t{k}" for k in range(4)])


def _bloch_state(r) -> np.ndarray:
    return 0.5 * (np.eye(2) + sum(c * s for c, s in zip(r, PAULI)))


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, math.isqrt(n) + 1))


def cmub(d: int) -> list[Povm]:
    """Complete set of ``d+1`` mutually unbiased bases for prime ``d``."""
    if not _is_prime(d):
        raise DomainError(f"complete MUB construction implemented for prime d only, got {d}")
    if d == 2:
        bases = []
        for name, P in zip("xyz", PAULI):
            _, V = np.linalg.eigh(P)
            bases.append(basis_povm(V[:, ::-1], name))
        return bases
    out = [computational_basis(d)]
    j = np.arange(d)
    w = np.exp(2j * np.pi / d)
    for a in range(d):
        U = np.array([[w ** ((a * jj * jj + k * jj) % d) for k in range(d)] for jj in j]) / math.sqrt(d)
        out.append(basis_povm(U, f"m{a}_"))
    return out


_GOLDEN = (1 + math.sqrt(5)) / 2


def _cyclic(v):
    a, b, c = v
    return [(a, b, c), (b, c, a), (c, a, b)]


def _signed(pattern):
    out = set()
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                out.add((s0 * pattern[0] + 0.0, s1 * pattern[1] + 0.0, s2 * pattern[2] + 0.0))
    return sorted(out)


def _solid_vertices(solid: str) -> np.ndarray:
    if solid == "tetrahedron":
        v = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif solid == "octahedron":
        v = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif solid == "cube":
        v = _signed((1, 1, 1))
    elif solid == "icosahedron":
        v = [c for s in _signed((0, 1, _GOLDEN)) for c in _cyclic(s)]
    elif solid == "dodecahedron":
        v = _signed((1, 1, 1)) + [c for s in _signed((0, 1 / _GOLDEN, _GOLDEN)) for c in _cyclic(s)]
    else:
        raise DomainError(f"unknown solid {solid!r}")
    V = np.array(sorted(set(v)), dtype=float)
    return V / np.linalg.norm(V, axis=1, keepdims=True)


PLATONIC_SOLIDS = {"tetrahedron": 2, "octahedron": 3, "cube": 3, "icosahedron": 5, "dodecahedron": 5}


def _bloch_ket(r) -> np.ndarray:
    w, V = np.linalg.eigh(_bloch_state(r))
    return V[:, -1]


def platonic_design(solid: str) -> WeightedStateSet:
    """Qubit design from the vertices of a Platonic solid (uniform weights)."""
    V = _solid_vertices(solid)
    states = np.array([_bloch_ket(r) for r in V])
    return WeightedStateSet(states, np.full(len(V), 2.0 / len(V)))


@dataclass(frozen=True)
class MubTripleParams:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not (0.0 <= v < math.pi) or not math.isfinite(v):
                raise DomainError(f"{name}={v} outside [0, pi)")


def _hadamards_d4(x, y, z) -> tuple[np.ndarray, np.ndarray]:
    """Both Hadamard matrices; parameters may be arrays, giving shape ``(..., 4, 4)``."""
    ex, ey, ez = (np.exp(1j * np.asarray(v, dtype=float)) for v in (x, y, z))
    shape = np.broadcast(ex, ey, ez).shape
    H1 = np.empty(shape + (4, 4), dtype=complex)
    H2 = np.empty(shape + (4, 4), dtype=complex)
    H1[..., :2, :] = H2[..., :2, :] = [[1, 1, 1, 1], [1, 1, -1, -1]]
    H1[..., 2:, :2] = [[1, -1], [1, -1]]
    ie = (1j * ex)[..., None]
    H1[..., 2, 2:] = np.concatenate([ie, -ie], axis=-1)
    H1[..., 3, 2:] = np.concatenate([-ie, ie], axis=-1)
    ey, ez = ey[..., None] * np.ones(shape + (1,)), ez[..., None] * np.ones(shape + (1,))
    H2[..., 2, :] = np.concatenate([-ey, ey, ez, -ez], axis=-1)
    H2[..., 3, :] = np.concatenate([ey, -ey, ez, -ez], axis=-1)
    return 0.5 * H1, 0.5 * H2


def mub_triple_d4(params: MubTripleParams) -> tuple[Povm, Povm, Povm]:
    """Computational basis plus the column bases of the two parametrized Hadamard matrices."""
    H1, H2 = _hadamards_d4(params.x, params.y, params.z)
    return computational_basis(4), basis_povm(H1, "b"), basis_povm(H2, "c")


def triple_products(a: Povm, b: Povm, c: Povm) -> np.ndarray:
    """``f_jkl = tr(A_j B_k C_l)`` for the unit-trace projectors underlying rank-1 POVMs."""
    for p in (a, b, c):
        if not is_rank1(p):
            raise NotRank1("triple products need rank-1 POVMs")
    P = [p.stack() / p.traces()[:, None, None] for p in (a, b, c)]
    return np.einsum("jab,kbc,lca->jkl", P[0], P[1], P[2])


def random_rank1_povm(d: int, m: int, seed) -> Povm:
    """Random rank-1 POVM with ``m`` outcomes, conditioned to be complete exactly."""
    if m < d:
        raise BadCount(f"a rank-1 POVM needs at least d={d} elements, got {m}")
    rng = np.random.default_rng(seed)
    if m == d:
        return basis_povm(random_unitary(d, rng), "r")
    return design_to_povm(random_one_design(d, m, rng))


def random_povm(d: int, m: int, seed, max_rank: int | None = None) -> Povm:
    """Random POVM from PSD blocks ``G_j`` normalized as ``S^{-1/2} G_j S^{-1/2}``."""
    if m < 1:
        raise BadCount("need at least one element")
    rng = np.random.default_rng(seed)
    r = max_rank or d
    G = []
    for _ in range(m):
        k = int(rng.integers(1, r + 1))
        M = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
        G.append(M @ M.conj().T)
    S = sum(G)
    if np.linalg.eigvalsh(S)[0] <= 1e-10:
        S = S + 1e-3 * np.eye(d)
        G[0] = G[0] + 1e-3 * np.eye(d)
    R = inv_sqrt_psd(S)
    return Povm([R @ g @ R for g in G], [f"g{j}" for j in range(m)])


def qubit_binary_povm(alpha: float, a) -> Povm:
    """Two-outcome qubit POVM ``A_pm = (1 pm alpha pm a.sigma)/2``."""
    a = np.asarray(a, dtype=float).reshape(3)
    na = float(np.linalg.norm(a))
    if not (0.0 <= alpha < 1.0):
        raise DomainError(f"bias alpha={alpha} outside [0, 1)")
    if na > 1.0 - alpha + TOL.psd_margin:
        raise DomainError(f"|a|={na} exceeds 1 - alpha = {1 - alpha}")
    S = sum(c * s for c, s in zip(a, PAULI))
    I = np.eye(2)
    return Povm([0.5 * ((1 + alpha) * I + S), 0.5 * ((1 - alpha) * I - S)], ["+", "-"])


BUILDERS = {
    "computational": lambda d=2: computational_basis(int(d)),
    "fourier": lambda d=2: fourier_basis(int(d)),
    "sic3": lambda phi=0.0: sic_d3(float(phi)),
    "tetrahedron": lambda: sic_d2_tetrahedron(),
    "random-rank1": lambda d=2, m=4, seed=0: random_rank1_povm(int(d), int(m), int(seed)),
    "random": lambda d=2, m=3, seed=0: random_povm(int(d), int(m), int(seed)),
    "qubit-binary": lambda alpha=0.0, ax=0.0, ay=0.0, az=1.0: qubit_binary_povm(
        float(alpha), [float(ax), float(ay), float(az)]
    ),
}
