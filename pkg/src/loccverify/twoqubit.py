"""Worked two-qubit example: the channel reachable by LOCC only in the limit.

The channel splits into three CP maps (an all-ones projection and one
coarse-grained halt map per party). Everything here is built from two
competing descriptions of it: the five product Kraus operators grouped by
outcome, and the four-operator reduced set spanning the same channel. The
continuum limit of the halting protocol supplies a third description as a
one-parameter family, and the functions below cross-check all three.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    PartyDims,
    as_matrix,
    gauss_legendre,
    integrate_sqrt_smooth,
    kron,
    partial_trace,
    sqrt_psd,
)
from .channels import (
    ChoiOperator,
    Instrument,
    KrausSet,
    choi,
    choi_distance,
    channel_from_leaf_povm,
    kraus_from_operators,
)
from .protocols import (
    CheckedPath,
    EndpointFamily,
    c_matrix_family,
    limit_path,
    protocol_leaf_diagonals,
)
from .zonoid import CoefficientMatrix, ZonoidSpec

DIMS_2Q = PartyDims((2, 2))

# Single-party pieces of the outcome grouping.
T1 = np.diag([1.0, 1.0]).astype(np.complex128) / np.sqrt(3.0)
T2 = np.diag([1.0, 2.0]).astype(np.complex128) / np.sqrt(6.0)


def _diag4(a, b, c, d) -> np.ndarray:
    return np.diag([a, b, c, d]).astype(np.complex128)


# Five product Kraus operators, grouped (0,), (1, 2), (3, 4) by outcome.
K_GROUPED = np.stack([
    _diag4(0.0, 0.0, 0.0, 1.0),
    _diag4(1.0, 0.0, 1.0, 0.0) / np.sqrt(3.0),
    _diag4(1.0, 0.0, 2.0, 0.0) / np.sqrt(6.0),
    _diag4(1.0, 1.0, 0.0, 0.0) / np.sqrt(3.0),
    _diag4(1.0, 2.0, 0.0, 0.0) / np.sqrt(6.0),
])

# Reduced four-operator set spanning the same channel.
K_REDUCED = np.stack([
    _diag4(0.0, 0.0, 0.0, 1.0),
    _diag4(2.0 / 3.0, 0.0, 1.0, 0.0),
    _diag4(2.0 / 3.0, 1.0, 0.0, 0.0),
    _diag4(1.0 / 3.0, 0.0, 0.0, 0.0),
])

# Isometry taking the reduced set to the grouped one, row j giving the
# expansion of grouped operator j.
W_GROUPING = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, np.sqrt(1.0 / 3.0), 0.0, np.sqrt(1.0 / 3.0)],
    [0.0, np.sqrt(2.0 / 3.0), 0.0, -np.sqrt(1.0 / 6.0)],
    [0.0, 0.0, np.sqrt(1.0 / 3.0), np.sqrt(1.0 / 3.0)],
    [0.0, 0.0, np.sqrt(2.0 / 3.0), -np.sqrt(1.0 / 6.0)],
], dtype=np.complex128)


@dataclass(frozen=True)
class TwoQubitExample:
    """The worked instrument plus its reduced channel description."""

    instrument: Instrument
    minimal: KrausSet
    w_iso: np.ndarray


def two_qubit_instrument() -> TwoQubitExample:
    grouped = kraus_from_operators(list(K_GROUPED), (2, 2))
    inst = Instrument(grouped, ((0,), (1, 2), (3, 4)))
    minimal = kraus_from_operators(list(K_REDUCED), (2, 2))
    return TwoQubitExample(inst, minimal, W_GROUPING.copy())


def _m_factor(s: float) -> np.ndarray:
    return np.diag([np.sqrt(s) - 1.0, 1.0]).astype(np.complex128)


def limiting_povm(s: float):
    """Limit outcomes at trace parameter s in [1, 4].

    Returns the all-ones projector and the two halt densities with respect
    to d sigma, sigma = sqrt(s) - 1. Their square roots are the limiting
    measurement operators.
    """
    if not 1.0 - 1e-12 <= s <= 4.0 + 1e-12:
        raise ValueError("s must lie in [1, 4]")
    s = min(max(s, 1.0), 4.0)
    m = _m_factor(s)
    zero = _diag4(1.0, 0.0, 0.0, 0.0)[:2, :2]
    e1 = _diag4(0.0, 0.0, 0.0, 1.0)
    return e1, kron([m, zero]), kron([zero, m])


def limiting_kraus(s: float):
    """Square roots of the halt densities, plus the main-branch endpoint."""
    e1, d2, d3 = limiting_povm(s)
    return e1, sqrt_psd(d2), sqrt_psd(d3)


def limiting_choi_2q(nodes: int = 64) -> ChoiOperator:
    """Unnormalized Choi operator assembled from the limit outcomes.

    The two halt continua contribute rank-1 integrands that are smooth in
    sqrt(sigma), so the substituted quadrature rule is exact to rounding.
    """
    d = 4

    def ket(op: np.ndarray) -> np.ndarray:
        # Input-major vectorization: component (i, a) holds op[a, i].
        return op.T.reshape(d * d)

    e1 = _diag4(0.0, 0.0, 0.0, 1.0)
    v1 = ket(e1)
    mat = np.outer(v1, v1.conj())

    def halt_term(sigma: float) -> np.ndarray:
        k2 = _diag4(np.sqrt(sigma), 0.0, 1.0, 0.0)
        k3 = _diag4(np.sqrt(sigma), 1.0, 0.0, 0.0)
        v2, v3 = ket(k2), ket(k3)
        return np.outer(v2, v2.conj()) + np.outer(v3, v3.conj())

    mat = mat + integrate_sqrt_smooth(halt_term, nodes=nodes)
    return ChoiOperator(mat, d, d, normalized=False)


@dataclass(frozen=True)
class IntegralCheck:
    last_column_norm: float
    cross_overlap: float
    weight: float
    passed: bool


def continuous_isometry_check(nodes: int = 64,
                              tol: float = 1e-10) -> IntegralCheck:
    """Column orthonormality of the continuum-to-reduced expansion.

    The halt operators expand over the reduced set with weights
    (1, 3 sqrt(sigma) - 2) against operators 2 or 3 and 4. Orthonormality
    of the stacked columns reduces to three scalar integrals, all smooth
    in sqrt(sigma), so the substituted rule evaluates them exactly.
    """
    norm_last = 2.0 * integrate_sqrt_smooth(
        lambda t: 9.0 * t - 12.0 * np.sqrt(t) + 4.0, nodes=nodes)
    cross = integrate_sqrt_smooth(lambda t: 3.0 * np.sqrt(t) - 2.0,
                                  nodes=nodes)
    weight = gauss_legendre(lambda t: 1.0, 0.0, 1.0, nodes=nodes)
    ok = (abs(norm_last - 1.0) <= tol and abs(cross) <= tol
          and abs(weight - 1.0) <= tol)
    return IntegralCheck(float(norm_last), float(cross), float(weight), ok)


@dataclass(frozen=True)
class BlockedIsometryCheck:
    max_row_residual: float
    coefficient_defect: float
    passed: bool


def blocked_isometry_check(sigma_samples: int = 101,
                           tol: float = 1e-10) -> BlockedIsometryCheck:
    """Expansion of the halt continua over the grouped operators.

    Each halt operator recombines within a single outcome group, with
    coefficients sqrt(3) (2 sqrt(sigma) - 1) on the first group member and
    sqrt(6) (1 - sqrt(sigma)) on the second. Rows are fit by least squares
    against their own group (the full five-operator set is linearly
    dependent, so a global fit cannot localize blocks); the fitted
    coefficients are also compared against the closed form.
    """
    worst_res = 0.0
    worst_coef = 0.0
    for sigma in np.linspace(0.0, 1.0, sigma_samples):
        rt = np.sqrt(sigma)
        k2 = _diag4(rt, 0.0, 1.0, 0.0)
        k3 = _diag4(rt, 1.0, 0.0, 0.0)
        want = np.array([np.sqrt(3.0) * (2.0 * rt - 1.0),
                         np.sqrt(6.0) * (1.0 - rt)])
        for vec, block in ((k2, (1, 2)), (k3, (3, 4))):
            a = K_GROUPED[list(block)].reshape(2, 16).T
            coef, *_ = np.linalg.lstsq(a, vec.reshape(16), rcond=None)
            recon = (a @ coef).reshape(4, 4)
            worst_res = max(worst_res,
                            float(np.linalg.norm(recon - vec)))
            worst_coef = max(worst_coef, float(np.abs(coef - want).max()))
    ok = worst_res <= tol and worst_coef <= tol
    return BlockedIsometryCheck(worst_res, worst_coef, ok)


@dataclass(frozen=True)
class CoarseGrainCheck:
    max_defect: float
    passed: bool


def coarse_grain_check(nodes: int = 64, tol: float = 1e-9) -> CoarseGrainCheck:
    """Integrated halt continua against the grouped CP maps.

    On every matrix unit, integrating k(sigma) rho k(sigma) over the halt
    parameter must reproduce the corresponding two-operator CP map.
    """
    ex = two_qubit_instrument()
    worst = 0.0
    for i in range(4):
        for j in range(4):
            unit = np.zeros((4, 4), dtype=np.complex128)
            unit[i, j] = 1.0

            def integrand(sigma: float, unit=unit) -> np.ndarray:
                k2 = _diag4(np.sqrt(sigma), 0.0, 1.0, 0.0)
                k3 = _diag4(np.sqrt(sigma), 1.0, 0.0, 0.0)
                top = k2 @ unit @ k2.conj().T
                bot = k3 @ unit @ k3.conj().T
                return np.stack([top, bot])

            got = integrate_sqrt_smooth(integrand, nodes=nodes)
            want2 = sum(k @ unit @ k.conj().T
                        for k in ex.instrument.branch(1).operators)
            want3 = sum(k @ unit @ k.conj().T
                        for k in ex.instrument.branch(2).operators)
            worst = max(worst,
                        float(np.linalg.norm(got[0] - want2)),
                        float(np.linalg.norm(got[1] - want3)))
    return CoarseGrainCheck(worst, worst <= tol)


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit entanglement monotone max(0, l1 - l2 - l3 - l4)."""
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit density matrix")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"density matrix must have unit trace, got {tr}")
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    eigs = np.linalg.eigvals(r).real
    lam = np.sqrt(np.clip(np.sort(eigs)[::-1], 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True)
class WStateReport:
    """Action of the limit measurement on the three-party W state."""

    k1_image_norm: float
    probability: float
    ac_state: np.ndarray
    bc_state: np.ndarray
    concurrence: float


def wstate_analysis(nodes: int = 64) -> WStateReport:
    """Halt outcomes of the limit measurement applied to the W state.

    The all-ones outcome annihilates the state. Each halt continuum fires
    with total probability one half and leaves the two parties that kept
    measuring in an entangled two-qubit state; its concurrence certifies
    that entanglement was created between parties that never interacted.
    """
    w = np.zeros(8, dtype=np.complex128)
    w[[1, 2, 4]] = 1.0 / np.sqrt(3.0)
    eye2 = np.eye(2, dtype=np.complex128)

    e1 = _diag4(0.0, 0.0, 0.0, 1.0)
    k1_norm = float(np.linalg.norm(kron([e1, eye2]) @ w))

    def outcome(sigma: float, which: int) -> np.ndarray:
        if which == 2:
            k = _diag4(np.sqrt(sigma), 0.0, 1.0, 0.0)
        else:
            k = _diag4(np.sqrt(sigma), 1.0, 0.0, 0.0)
        v = kron([k, eye2]) @ w
        return np.outer(v, v.conj())

    rho2 = integrate_sqrt_smooth(lambda sg: outcome(sg, 2), nodes=nodes)
    rho3 = integrate_sqrt_smooth(lambda sg: outcome(sg, 3), nodes=nodes)
    prob = float(np.real(np.trace(rho2)))

    dims3 = PartyDims((2, 2, 2))
    # Outcome 2 halts party B, leaving A and C entangled; outcome 3 is the
    # mirror image.
    ac = partial_trace(rho2 / np.trace(rho2), dims3, keep=(1, 3))
    bc = partial_trace(rho3 / np.trace(rho3), dims3, keep=(2, 3))
    return WStateReport(k1_norm, prob, ac, bc, concurrence(ac))


def prelimit_channel(rounds: int, exponent: float) -> KrausSet:
    """Channel implemented by the halting protocol stopped after ``rounds``."""
    diags = protocol_leaf_diagonals(2, rounds, exponent)
    return channel_from_leaf_povm(diags, (2, 2))


def prelimit_choi_distance(rounds_list, exponent: float = 0.5) -> list[float]:
    """Normalized Choi distances from the stopped protocol to the limit."""
    target = two_qubit_instrument().minimal
    out = []
    for nu in rounds_list:
        approx = prelimit_channel(int(nu), exponent)
        out.append(choi_distance(choi(approx), choi(target)))
    return out


def channel_zonoid() -> ZonoidSpec:
    """Zonoid over the reduced four-operator basis."""
    return ZonoidSpec(kraus_from_operators(list(K_REDUCED), (2, 2)))


def limiting_family(spec: ZonoidSpec | None = None):
    """Main path and halt families of the limit, ready for verification.

    Returns (paths, families) over the reduced basis: the main path with
    its closed-form witness family, and the two halt continua whose
    coefficient densities integrate into the identity resolution.
    """
    if spec is None:
        spec = channel_zonoid()
    main = CheckedPath(
        label="main",
        op_at=lambda s: limit_path(2, s),
        s_top=4.0,
        s_bottom=1.0,
        dims=DIMS_2Q,
        cmatrix_at=lambda s: c_matrix_family("C1", s),
        endpoint_c=c_matrix_family("C1", 1.0),
    )

    def density(which: int):
        def f(sigma: float) -> np.ndarray:
            if which == 2:
                return _diag4(sigma, 0.0, 1.0, 0.0)
            return _diag4(sigma, 1.0, 0.0, 0.0)
        return f

    fams = []
    for which, name in ((2, "C2"), (3, "C3")):
        fams.append(EndpointFamily(
            label=f"halt-{'B' if which == 2 else 'A'}",
            parent=main,
            density_at=density(which),
            cdensity_at=lambda sg, nm=name: c_matrix_family(
                nm, (1.0 + sg) ** 2),
            attach_s=lambda sg: (1.0 + sg) ** 2,
        ))
    return [main], fams


def instrument_zonoid() -> ZonoidSpec:
    """Blocked zonoid over the per-outcome minimal bases (sizes 1, 2, 2)."""
    from .zonoid import zonoid_spec_for_instrument

    return zonoid_spec_for_instrument(two_qubit_instrument().instrument)


def blocked_limiting_family(spec: ZonoidSpec | None = None):
    """Limit paths over the blocked instrument basis.

    Same geometry as :func:`limiting_family`, but coefficient densities are
    expanded block by block so the per-outcome identity resolutions can be
    checked. The halt density at each sigma stays inside its own block; the
    coefficients are recovered by least squares against that block.
    """
    if spec is None:
        spec = instrument_zonoid()
    blocks = spec.block_list()
    ops = spec.basis.operators

    main = CheckedPath(
        label="main",
        op_at=lambda s: limit_path(2, s),
        s_top=4.0,
        s_bottom=1.0,
        dims=DIMS_2Q,
        block=0,
    )

    def blocked_density(which: int):
        block = blocks[which - 1]
        a = np.linalg.pinv(
            np.stack([ops[j] for j in block]).reshape(len(block), 16).T)

        def f(sigma: float) -> CoefficientMatrix:
            rt = np.sqrt(sigma)
            k = (_diag4(rt, 0.0, 1.0, 0.0) if which == 2
                 else _diag4(rt, 1.0, 0.0, 0.0))
            w = np.zeros(spec.kappa, dtype=np.complex128)
            w[list(block)] = a @ k.reshape(16)
            return CoefficientMatrix(np.outer(w, w.conj()))
        return f

    def density(which: int):
        def f(sigma: float) -> np.ndarray:
            if which == 2:
                return _diag4(sigma, 0.0, 1.0, 0.0)
            return _diag4(sigma, 1.0, 0.0, 0.0)
        return f

    fams = [
        EndpointFamily(
            label=f"halt-{'B' if which == 2 else 'A'}",
            parent=main,
            density_at=density(which),
            cdensity_at=blocked_density(which),
            attach_s=lambda sg: (1.0 + sg) ** 2,
            block=which - 1,
        )
        for which in (2, 3)
    ]
    return [main], fams
