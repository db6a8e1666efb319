"""Dense operator helpers shared by the rest of the package.

Matrices are plain numpy arrays, complex128 and 2-D. Multipartite structure
is carried separately as a tuple of local dimensions with party 1 first, so
party 1 occupies the most significant part of the row index and
``kron([a, b])`` puts ``a`` on party 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Callable, Iterable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-9
FACTOR_TOL = 1e-10


@dataclass(frozen=True)
class PartyDims:
    """Local dimensions of a multipartite space, party 1 first.

    Party indices are 1-based everywhere in this package.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid party dimensions {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, party: int) -> int:
        """Dimension of the given 1-based party."""
        if not 1 <= party <= len(self.dims):
            raise IndexError(f"party {party} out of range 1..{len(self.dims)}")
        return self.dims[party - 1]


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    return a


def _dims_tuple(dims) -> tuple[int, ...]:
    if isinstance(dims, PartyDims):
        return dims.dims
    return tuple(int(d) for d in dims)


def kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product of the factors, first factor most significant."""
    mats = [as_matrix(f) for f in factors]
    if not mats:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, mats)


def partial_trace(m, dims, keep: Iterable[int]) -> np.ndarray:
    """Trace out all parties not listed in ``keep`` (1-based indices).

    The kept parties stay in their original relative order.
    """
    a = as_matrix(m)
    d = _dims_tuple(dims)
    n = len(d)
    total = int(np.prod(d))
    if a.shape != (total, total):
        raise ValueError(f"shape {a.shape} does not match dims {d}")
    kept = sorted(set(int(k) for k in keep))
    if any(k < 1 or k > n for k in kept):
        raise ValueError(f"keep indices {kept} out of range 1..{n}")

    t = a.reshape(d + d)
    # Traced parties get the same einsum letter on row and column axes.
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValueError("too many parties")
    row_sub = list(letters[:n])
    col_sub = list(letters[n : 2 * n])
    for p in range(1, n + 1):
        if p not in kept:
            col_sub[p - 1] = row_sub[p - 1]
    out_sub = "".join(row_sub[p - 1] for p in kept) + "".join(
        col_sub[p - 1] for p in kept
    )
    res = np.einsum("".join(row_sub) + "".join(col_sub) + "->" + out_sub, t)
    dk = int(np.prod([d[p - 1] for p in kept])) if kept else 1
    return res.reshape(dk, dk)


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def trace_norm(m) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(as_matrix(m), compute_uv=False).sum())


def operator_norm(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).max())


def frobenius(m) -> float:
    return float(np.linalg.norm(as_matrix(m)))


def is_hermitian(m, tol: float = HERMITICITY_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + float(np.abs(a).max(initial=0.0))
    return float(np.abs(a - a.conj().T).max(initial=0.0)) <= tol * scale


@dataclass(frozen=True)
class PsdReport:
    ok: bool
    min_eigenvalue: float


def psd_check(m, tol: float = PSD_TOL) -> PsdReport:
    """Check positive semidefiniteness up to ``tol`` times the spectral scale.

    Raises ValueError if the input is not Hermitian to 1e-12; positivity is
    only meaningful for Hermitian operators.
    """
    a = as_matrix(m)
    if not is_hermitian(a):
        raise ValueError("psd_check requires a Hermitian matrix")
    w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    scale = 1.0 + float(np.abs(w).max(initial=0.0))
    lo = float(w.min(initial=0.0))
    return PsdReport(ok=lo >= -tol * scale, min_eigenvalue=lo)


def sqrt_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian square root of a PSD matrix. Small negative eigenvalues

    (within ``tol`` of zero, relative to the spectral scale) are clipped.
    """
    a = as_matrix(m)
    if not is_hermitian(a):
        raise ValueError("sqrt_psd requires a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    scale = 1.0 + float(np.abs(w).max(initial=0.0))
    if w.min(initial=0.0) < -tol * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@lru_cache(maxsize=8)
def _leggauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def gauss_legendre(f: Callable[[float], np.ndarray], a: float, b: float,
                   nodes: int = 64):
    """Fixed-order Gauss-Legendre quadrature of ``f`` over [a, b].

    Exact for polynomial integrands up to degree 2*nodes - 1. ``f`` may
    return scalars or arrays; the result has the same shape.
    """
    if nodes < 1:
        raise ValueError("need at least one node")
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integration limits must be finite")
    x, w = _leggauss(int(nodes))
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    total = None
    for xi, wi in zip(x, w):
        val = f(mid + half * xi)
        term = wi * np.asarray(val)
        total = term if total is None else total + term
    out = half * total
    if out.ndim == 0:
        return out[()]
    return out


def integrate_sqrt_smooth(f: Callable[[float], np.ndarray], nodes: int = 64):
    """Integrate f(sigma) over [0, 1] when f is smooth in sqrt(sigma).

    Substitutes sigma = u^2 so integrands polynomial in sqrt(sigma) become
    polynomial in u and the fixed-order rule is exact. Plain Gauss-Legendre
    on such integrands stalls around 1e-6.
    """
    return gauss_legendre(lambda u: 2.0 * u * np.asarray(f(u * u)), 0.0, 1.0,
                          nodes)


def _unit_trace_factor(f: np.ndarray) -> np.ndarray:
    tr = np.trace(f)
    if abs(tr) > 1e-12 * (1.0 + float(np.abs(f).max(initial=0.0))) * f.shape[0]:
        return f / tr
    nrm = np.linalg.norm(f)
    if nrm == 0.0:
        return f
    # Traceless factor: normalize in Frobenius norm and pin the phase of the
    # largest entry so the representative is unique.
    g = f / nrm
    idx = np.unravel_index(np.argmax(np.abs(g)), g.shape)
    ph = g[idx] / abs(g[idx])
    return g / ph


def product_factor_check(m, dims, tol: float = FACTOR_TOL):
    """Decide whether ``m`` factors as a tensor product over the parties.

    Returns the list of factors (party 1 first) when
    ``||m - kron(factors)||_F <= tol * max(1, ||m||_F)``, else None. Factors
    after the first are normalized (unit trace when possible) with all scale
    pushed into party 1's factor.
    """
    a = as_matrix(m)
    d = _dims_tuple(dims)
    total = int(np.prod(d))
    if a.shape != (total, total):
        raise ValueError(f"shape {a.shape} does not match dims {d}")
    if len(d) == 1:
        return [a]

    norm_a = np.linalg.norm(a)
    if norm_a == 0.0:
        return [np.zeros((d[0], d[0]), dtype=np.complex128)] + [
            np.eye(dd, dtype=np.complex128) / dd for dd in d[1:]
        ]

    factors: list[np.ndarray] = []
    rest = a
    rest_dims = list(d)
    while len(rest_dims) > 1:
        d1 = rest_dims[0]
        d2 = int(np.prod(rest_dims[1:]))
        # Realign so a product becomes a rank-1 matrix of vectorized factors.
        r = rest.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(
            d1 * d1, d2 * d2
        )
        u, s, vh = np.linalg.svd(r, full_matrices=False)
        if s.size > 1 and s[1] > tol * max(1.0, s[0]):
            return None
        # The realignment of F (x) G is vec(F) vec(G)^T, no conjugation.
        f1 = (u[:, 0] * s[0]).reshape(d1, d1)
        f2 = vh[0].reshape(d2, d2)
        g2 = _unit_trace_factor(f2)
        # Rescale so f1 (x) g2 still reproduces the slab.
        inner = np.vdot(g2, f2)
        f1 = f1 * inner / max(np.linalg.norm(g2) ** 2, 1e-300)
        factors.append(f1)
        rest = g2
        rest_dims = rest_dims[1:]
    factors.append(rest)

    # Scales sit on intermediate factors; sweep them all into party 1.
    cleaned = [factors[0]]
    for f in factors[1:]:
        g = _unit_trace_factor(f)
        c = np.vdot(g, f) / max(np.linalg.norm(g) ** 2, 1e-300)
        cleaned[0] = cleaned[0] * c
        cleaned.append(g)
    recon = kron(cleaned)
    if np.linalg.norm(a - recon) > tol * max(1.0, norm_a):
        return None
    return cleaned


def product_defect(m, dims) -> float:
    """Relative distance from the nearest single-cut product structure.

    Zero (to rounding) on exact tensor products; used as a continuous
    companion to product_factor_check.
    """
    a = as_matrix(m)
    d = _dims_tuple(dims)
    if len(d) == 1:
        return 0.0
    norm_a = np.linalg.norm(a)
    if norm_a == 0.0:
        return 0.0
    worst = 0.0
    for cut in range(1, len(d)):
        d1 = int(np.prod(d[:cut]))
        d2 = int(np.prod(d[cut:]))
        r = a.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(
            d1 * d1, d2 * d2
        )
        s = np.linalg.svd(r, compute_uv=False)
        if s.size > 1:
            worst = max(worst, float(s[1] / max(s[0], 1e-300)))
    return worst
