"""Measure-and-halt protocol trees and the operator paths they induce.

The protocol on P qubits runs in cycles. In each cycle every party in turn
applies the two-outcome measurement {(1-eps)|0><0| + |1><1|, eps|0><0|};
on the second outcome the protocol halts at a leaf, on the first it
continues. After ``rounds`` full cycles the survivor is the main leaf. All
POVM elements are diagonal products, so a node is determined by one local
diagonal per party.

Walking from the root to a leaf and interpolating linearly between
consecutive node elements gives a piecewise local operator path whose
parameter is the trace. As eps -> 0 the main branch converges to the path
s |-> M(s)^(x P) with M(s) = (s^(1/P) - 1)|0><0| + |1><1|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import (
    PartyDims,
    as_matrix,
    integrate_sqrt_smooth,
    kron,
    partial_trace,
    product_defect,
    sqrt_psd,
    trace_norm,
)
from .zonoid import (
    CoefficientMatrix,
    ZonoidSpec,
    cmatrix_resolution_check,
    endpoint_cmatrix,
    membership,
)

NODE_SUM_TOL = 1e-9
LOCALITY_TOL = 1e-10
COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class ProtocolParams:
    parties: int
    rounds: int
    exponent: float

    def __post_init__(self):
        if self.parties < 2:
            raise ValueError("need at least two parties")
        if self.rounds < 1:
            raise ValueError("need at least one round")
        if not 0.0 < self.exponent < 1.0:
            raise ValueError("decay exponent must lie in (0, 1)")

    @property
    def epsilon(self) -> float:
        return float(self.rounds) ** (-self.exponent)


@dataclass(eq=False)
class ProtocolNode:
    """One node of a protocol tree.

    ``acting_party`` names the party measuring at this node (children are
    its outcomes); leaves carry None. ``path`` is the tuple of child
    indices from the root: index 0 is the halt outcome, index 1 continues.
    """

    povm_element: np.ndarray
    acting_party: int | None
    children: list["ProtocolNode"] = field(default_factory=list)
    path: tuple[int, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.povm_element)))


@dataclass(eq=False)
class ProtocolTree:
    root: ProtocolNode
    dims: PartyDims
    params: ProtocolParams

    def iter_nodes(self):
        """Preorder traversal, iterative: trees get deep for large rounds."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list[ProtocolNode]:
        return [n for n in self.iter_nodes() if n.is_leaf]

    def node_at(self, path: Sequence[int]) -> ProtocolNode:
        node = self.root
        for i in path:
            node = node.children[i]
        return node

    def main_leaf(self) -> ProtocolNode:
        node = self.root
        while node.children:
            node = node.children[-1]
        return node

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self.iter_nodes())


def _advanced_factor(eta: float, n: int) -> np.ndarray:
    # Local POVM diagonal after n passed rounds.
    return np.array([eta ** n, 1.0])


def _leaf_and_node_diagonals(params: ProtocolParams):
    """Yield (kind, n, party, diagonal) in protocol order.

    kind is "halt" for side leaves and "cont" for the node reached when the
    acting party continues; the main leaf is the last "cont" entry.
    """
    p = params.parties
    eps = params.epsilon
    eta = 1.0 - eps
    for n in range(params.rounds):
        for l in range(1, p + 1):
            ahead = [_advanced_factor(eta, n + 1)] * (l - 1)
            behind = [_advanced_factor(eta, n)] * (p - l)
            halt = np.array([eps * eta ** n, 0.0])
            halt_diag = ahead + [halt] + behind
            cont_diag = ahead + [_advanced_factor(eta, n + 1)] + behind
            yield "halt", n, l, _kron_vectors(halt_diag)
            yield "cont", n, l, _kron_vectors(cont_diag)


def _kron_vectors(vecs: Sequence[np.ndarray]) -> np.ndarray:
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return out


def build_protocol_pq(parties: int, rounds: int, exponent: float
                      ) -> ProtocolTree:
    """Full protocol tree for the P-party halt-or-continue protocol."""
    params = ProtocolParams(parties, rounds, exponent)
    dims = PartyDims((2,) * parties)
    d = dims.total
    root = ProtocolNode(np.eye(d, dtype=np.complex128), acting_party=1)
    current = root
    for kind, n, l, diag in _leaf_and_node_diagonals(params):
        mat = np.diag(diag.astype(np.complex128))
        if kind == "halt":
            current.children.append(
                ProtocolNode(mat, None, path=current.path + (0,))
            )
        else:
            last = n == rounds - 1 and l == parties
            nxt = None if last else (l % parties) + 1
            child = ProtocolNode(mat, nxt, path=current.path + (1,))
            current.children.append(child)
            current = child
    return ProtocolTree(root, dims, params)


def build_protocol_2q(rounds: int, exponent: float) -> ProtocolTree:
    return build_protocol_pq(2, rounds, exponent)


def protocol_leaf_diagonals(parties: int, rounds: int, exponent: float
                            ) -> np.ndarray:
    """POVM diagonals of all leaves, halt leaves in protocol order first,

    the main leaf last. Shape (parties * rounds + 1, 2**parties). This skips
    tree construction entirely, which matters for large round counts.
    """
    params = ProtocolParams(parties, rounds, exponent)
    rows = []
    last_cont = None
    for kind, _, _, diag in _leaf_and_node_diagonals(params):
        if kind == "halt":
            rows.append(diag)
        else:
            last_cont = diag
    rows.append(last_cont)
    return np.array(rows)


@dataclass(frozen=True)
class TreeFailure:
    node_path: tuple[int, ...]
    kind: str
    defect: float


@dataclass(frozen=True)
class TreeReport:
    ok: bool
    n_nodes: int
    n_leaves: int
    max_node_sum_defect: float
    max_locality_defect: float
    max_product_defect: float
    completeness_defect: float
    failures: tuple[TreeFailure, ...]


def _unit_trace_factors(m: np.ndarray, dims: PartyDims):
    """Per-party unit-trace factors of a product operator, or None.

    Also returns the relative reconstruction defect so callers can treat
    near-products quantitatively.
    """
    tr = np.trace(m)
    scale = max(float(np.linalg.norm(m)), 1e-300)
    if abs(tr) < 1e-13 * scale:
        return None, 1.0
    facs = []
    for p in range(1, dims.n_parties + 1):
        facs.append(partial_trace(m, dims, [p]) / tr)
    recon = tr * kron(facs)
    defect = float(np.linalg.norm(m - recon)) / max(1.0, float(np.linalg.norm(m)))
    return facs, defect


def verify_tree(tree: ProtocolTree, sum_tol: float = NODE_SUM_TOL,
                locality_tol: float = LOCALITY_TOL,
                completeness_tol: float = COMPLETENESS_TOL) -> TreeReport:
    """Structural verification of a protocol tree.

    Checks, with the defect localized to a node path on failure:
    every node element equals the sum of its descendant leaves; every node
    element is a tensor product over the parties; along each edge only the
    parent's acting party changes its factor; the leaves form a complete
    measurement.
    """
    order = list(tree.iter_nodes())
    dims = tree.dims
    leaf_sum: dict[int, np.ndarray] = {}
    failures: list[TreeFailure] = []
    max_sum = 0.0
    for node in reversed(order):
        if node.is_leaf:
            leaf_sum[id(node)] = node.povm_element
            continue
        acc = leaf_sum[id(node.children[0])].copy()
        for ch in node.children[1:]:
            acc = acc + leaf_sum[id(ch)]
        leaf_sum[id(node)] = acc
        defect = float(np.abs(node.povm_element - acc).max())
        max_sum = max(max_sum, defect)
        if defect > sum_tol:
            failures.append(TreeFailure(node.path, "leaf-sum", defect))

    max_prod = 0.0
    max_loc = 0.0
    factors: dict[int, list[np.ndarray] | None] = {}
    for node in order:
        facs, pdef = _unit_trace_factors(node.povm_element, dims)
        factors[id(node)] = facs
        max_prod = max(max_prod, pdef if facs is not None else 1.0)
        if facs is None or pdef > locality_tol:
            failures.append(TreeFailure(node.path, "product", pdef))
    for node in order:
        if node.is_leaf:
            continue
        pf = factors[id(node)]
        for ch in node.children:
            cf = factors[id(ch)]
            if pf is None or cf is None:
                continue
            for p in range(1, dims.n_parties + 1):
                if p == node.acting_party:
                    continue
                d = float(np.linalg.norm(pf[p - 1] - cf[p - 1]))
                max_loc = max(max_loc, d)
                if d > locality_tol:
                    failures.append(
                        TreeFailure(ch.path, f"locality-party-{p}", d)
                    )

    total = leaf_sum[id(tree.root)]
    comp = float(np.abs(total - np.eye(dims.total)).max())
    if comp > completeness_tol:
        failures.append(TreeFailure((), "completeness", comp))
    n_leaves = sum(1 for n in order if n.is_leaf)
    ok = not failures
    return TreeReport(ok, len(order), n_leaves, max_sum, max_loc, max_prod,
                      comp, tuple(failures))


@dataclass
class PiecewisePath:
    """Piecewise linear operator path, parametrized by trace.

    ``s_values`` decrease from the top of the path; ``operators[k]`` is the
    node at ``s_values[k]``. Between breakpoints the operator interpolates
    linearly, so the trace of ``at(s)`` is exactly s.
    """

    s_values: np.ndarray
    operators: list[np.ndarray]

    def __post_init__(self):
        self.s_values = np.asarray(self.s_values, dtype=np.float64)
        if self.s_values.ndim != 1 or self.s_values.size < 2:
            raise ValueError("a path needs at least two breakpoints")
        if len(self.operators) != self.s_values.size:
            raise ValueError("one operator per breakpoint required")
        if not np.all(np.diff(self.s_values) < 0.0):
            raise ValueError("breakpoint traces must strictly decrease")

    @property
    def s_top(self) -> float:
        return float(self.s_values[0])

    @property
    def s_bottom(self) -> float:
        return float(self.s_values[-1])

    @property
    def n_segments(self) -> int:
        return self.s_values.size - 1

    def at(self, s: float, clamp: bool = False) -> np.ndarray:
        """Operator at trace value s; clamp=True pins s into the domain."""
        sv = self.s_values
        if clamp:
            s = min(max(s, float(sv[-1])), float(sv[0]))
        elif not sv[-1] - 1e-12 <= s <= sv[0] + 1e-12:
            raise ValueError(
                f"s={s} outside path domain [{sv[-1]}, {sv[0]}]"
            )
        k = int(np.searchsorted(-sv, -s, side="right")) - 1
        k = min(max(k, 0), sv.size - 2)
        hi, lo = sv[k], sv[k + 1]
        lam = 0.0 if hi == lo else (s - lo) / (hi - lo)
        return lam * self.operators[k] + (1.0 - lam) * self.operators[k + 1]


def branch_path(tree: ProtocolTree, leaf) -> PiecewisePath:
    """Path from the root to ``leaf`` (a node or a child-index tuple)."""
    if isinstance(leaf, ProtocolNode):
        steps = leaf.path
    else:
        steps = tuple(int(i) for i in leaf)
    nodes = [tree.root]
    for i in steps:
        nodes.append(nodes[-1].children[i])
    if isinstance(leaf, ProtocolNode) and nodes[-1] is not leaf:
        raise ValueError("leaf does not belong to this tree")
    if not nodes[-1].is_leaf:
        raise ValueError("path does not end at a leaf")
    s = np.array([n.trace for n in nodes])
    return PiecewisePath(s, [n.povm_element for n in nodes])


def main_branch_path(parties: int, rounds: int, exponent: float
                     ) -> PiecewisePath:
    """Main-branch path built directly, without the tree.

    Deep in a long protocol consecutive node traces coincide to rounding;
    those zero-length segments are dropped (their operators agree to the
    same precision).
    """
    params = ProtocolParams(parties, rounds, exponent)
    diags = [np.ones(2 ** parties)]
    for kind, _, _, diag in _leaf_and_node_diagonals(params):
        if kind == "cont":
            diags.append(diag)
    s_list: list[float] = []
    ops: list[np.ndarray] = []
    for d in diags:
        s = float(d.sum())
        if s_list and not s < s_list[-1] * (1.0 - 1e-15):
            continue
        s_list.append(s)
        ops.append(np.diag(d.astype(np.complex128)))
    return PiecewisePath(np.array(s_list), ops)


def limit_path(parties: int, s: float) -> np.ndarray:
    """Limiting main path M(s)^(x P), M(s) = (s^(1/P)-1)|0><0| + |1><1|."""
    top = float(2 ** parties)
    if not 1.0 - 1e-12 <= s <= top + 1e-12:
        raise ValueError(f"s={s} outside [1, {top}]")
    s = min(max(s, 1.0), top)
    m = np.diag([s ** (1.0 / parties) - 1.0, 1.0]).astype(np.complex128)
    return kron([m] * parties)


@dataclass(frozen=True)
class PathDistanceReport:
    parties: int
    rounds: int
    exponent: float
    epsilon: float
    max_distance: float
    bound: float
    grid_points: int
    passed: bool


def path_distance_bound(parties: int, rounds: int, exponent: float,
                        s_grid: Sequence[float] | None = None,
                        grid_points: int = 401) -> PathDistanceReport:
    """Trace-norm gap between the finite main branch and its limit.

    The gap is maximized over ``s_grid`` (default: a uniform grid of
    ``grid_points`` values on [1, 2^P]; the finite path is clamped below
    its own domain floor, which costs at most the floor offset). The bound
    is sqrt(3) * eps for two parties and P * 2^(P/2) * eps in general.
    """
    params = ProtocolParams(parties, rounds, exponent)
    pre = main_branch_path(parties, rounds, exponent)
    top = float(2 ** parties)
    if s_grid is None:
        grid = np.linspace(1.0, top, grid_points)
    else:
        grid = np.asarray(list(s_grid), dtype=float)
        if grid.size == 0 or grid.min() < 1.0 - 1e-12 or grid.max() > top + 1e-12:
            raise ValueError(f"s grid must be nonempty inside [1, {top}]")
    worst = 0.0
    for s in grid:
        gap = trace_norm(pre.at(float(s), clamp=True) - limit_path(parties, s))
        worst = max(worst, gap)
    eps = params.epsilon
    if parties == 2:
        bound = np.sqrt(3.0) * eps
    else:
        bound = parties * 2.0 ** (parties / 2.0) * eps
    return PathDistanceReport(parties, rounds, exponent, eps, worst,
                              float(bound), len(grid),
                              worst <= bound + 1e-12)


def derivative_outcomes(parties: int, s: float) -> list[np.ndarray]:
    """Halt densities peeling off the limiting main path at s.

    Outcome alpha replaces party alpha's factor by |0><0|; the densities
    are taken with respect to d(s^(1/P)), so with sigma = s^(1/P) - 1 the
    all-ones projector plus the integral of their sum over sigma in [0, 1]
    resolves the identity.
    """
    if not 1.0 <= s <= float(2 ** parties):
        raise ValueError("s outside the path domain")
    m = np.diag([s ** (1.0 / parties) - 1.0, 1.0]).astype(np.complex128)
    zero = np.diag([1.0, 0.0]).astype(np.complex128)
    out = []
    for alpha in range(1, parties + 1):
        facs = [m] * (alpha - 1) + [zero] + [m] * (parties - alpha)
        out.append(kron(facs))
    return out


def _c1_matrix(s: float) -> np.ndarray:
    if not 1.0 - 1e-12 <= s <= 4.0 + 1e-12:
        raise ValueError("main-path coefficients need s in [1, 4]")
    s = min(max(s, 1.0), 4.0)
    sigma = np.sqrt(s) - 1.0
    beta = 2.0 * (np.sqrt(sigma) - 1.0)
    gamma = 9.0 * sigma + 8.0 - 16.0 * np.sqrt(sigma)
    c = np.zeros((4, 4))
    c[0, 0] = 1.0
    c[1, 1] = c[2, 2] = sigma
    c[1, 3] = c[3, 1] = c[2, 3] = c[3, 2] = sigma * beta
    c[3, 3] = sigma * gamma
    return c.astype(np.complex128)


def _side_weight(sigma: float, which: int) -> np.ndarray:
    w = np.zeros(4)
    w[which] = 1.0
    w[3] = 3.0 * np.sqrt(sigma) - 2.0
    return w


def c_matrix_family(name: str, s: float, x: float | None = None
                    ) -> CoefficientMatrix:
    """Closed-form coefficient families of the worked two-qubit channel.

    All three families are parametrized by s in [1, 4] (internally
    sigma = sqrt(s) - 1). "C1" is the main-path witness. "C2" and "C3"
    are the rank-1 halt densities with respect to d sigma; for these an
    optional ``x`` returns the segment mixture (1 - x) C1(s) + x C_r(s).
    The densities themselves may leave the unit box; only assembled
    witnesses are box constrained.
    """
    if name == "C1":
        if x is not None:
            raise ValueError("x only applies to the halt families")
        return CoefficientMatrix(_c1_matrix(s))
    if name not in ("C2", "C3"):
        raise ValueError(f"unknown family {name!r}")
    if not 1.0 - 1e-12 <= s <= 4.0 + 1e-12:
        raise ValueError("halt families need s in [1, 4]")
    sigma = np.sqrt(min(max(s, 1.0), 4.0)) - 1.0
    w = _side_weight(sigma, 1 if name == "C2" else 2)
    c = np.outer(w, w).astype(np.complex128)
    if x is None:
        return CoefficientMatrix(c)
    if not 0.0 <= x <= 1.0:
        raise ValueError("mixture weight x must lie in [0, 1]")
    return CoefficientMatrix((1.0 - x) * _c1_matrix(s) + x * c)


@dataclass
class CheckedPath:
    """A path handed to the condition verifier.

    ``op_at`` evaluates the operator at trace parameter s on
    [s_bottom, s_top]. ``cmatrix_at`` optionally supplies a closed-form
    witness family; ``endpoint_c`` optionally overrides the endpoint
    coefficient matrix otherwise derived from the endpoint operator.
    ``block`` ties the path to one block of a blocked basis for the
    resolution bookkeeping.
    """

    label: str
    op_at: Callable[[float], np.ndarray]
    s_top: float
    s_bottom: float
    dims: PartyDims
    cmatrix_at: Callable[[float], CoefficientMatrix] | None = None
    endpoint_c: CoefficientMatrix | None = None
    block: int | None = None
    joints: tuple[float, ...] = ()

    @classmethod
    def from_piecewise(cls, label: str, path: PiecewisePath, dims: PartyDims,
                       **kw) -> "CheckedPath":
        kw.setdefault("joints", tuple(float(s) for s in path.s_values))
        return cls(label, lambda s: path.at(s, clamp=True), path.s_top,
                   path.s_bottom, dims, **kw)

    def sample_grid(self, s_samples: int | None) -> np.ndarray:
        """Uniform s grid; None means 101 points per unit plus all joints."""
        if s_samples is not None:
            return np.linspace(self.s_top, self.s_bottom, s_samples)
        span = self.s_top - self.s_bottom
        n = max(2, int(round(100.0 * span)) + 1)
        grid = np.linspace(self.s_bottom, self.s_top, n)
        if self.joints:
            grid = np.union1d(grid, np.clip(self.joints, self.s_bottom,
                                            self.s_top))
        return grid[::-1]


@dataclass
class EndpointFamily:
    """Continuum of halt outcomes peeling off a parent path.

    ``density_at`` gives the operator density at sigma in [0, 1] and
    ``cdensity_at`` its coefficient density; ``attach_s`` maps sigma to the
    parent path parameter where the outcome branches off.
    """

    label: str
    parent: CheckedPath
    density_at: Callable[[float], np.ndarray]
    cdensity_at: Callable[[float], CoefficientMatrix]
    attach_s: Callable[[float], float]
    block: int | None = None


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    defect: float
    tol: float
    passed: bool
    where: str = ""


@dataclass(frozen=True)
class PathConditionReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _endpoint_check(path: CheckedPath, spec: ZonoidSpec):
    op = as_matrix(path.op_at(path.s_bottom))
    if path.endpoint_c is not None:
        c = path.endpoint_c
    else:
        c = endpoint_cmatrix(sqrt_psd(op), spec)
    solver = spec.solver()
    recon = float(np.linalg.norm(solver.image(c.matrix) - op))
    w = np.sort(c.eigenvalues())[::-1]
    rank_excess = float(np.abs(w[1:]).max(initial=0.0))
    box_excess = max(0.0, float(w[0]) - 1.0, -float(w.min(initial=0.0)))
    return c, max(recon, rank_excess, box_excess)


def verify_theorem_conditions(spec: ZonoidSpec, paths: Sequence[CheckedPath],
                              families: Sequence[EndpointFamily] = (),
                              partition: Sequence[int | None] | None = None,
                              s_samples: int | None = None,
                              sigma_samples: int = 101,
                              x_samples: int = 11,
                              membership_tol: float = 1e-7,
                              product_tol: float = 1e-10,
                              trace_tol: float = 1e-10,
                              psd_tol: float = 1e-10,
                              recon_tol: float = 1e-8,
                              resolution_tol: float = 1e-7,
                              quad_nodes: int = 64) -> PathConditionReport:
    """Check the zonoid-path conditions for an implementable instrument.

    For each path: trace linearity, tensor-product structure, zonoid
    membership at sampled parameters, and a valid rank-one endpoint witness.
    For each halt family: positivity of the segment mixtures, product
    structure and basis reconstruction of the densities. Finally the
    endpoint matrices and integrated halt densities must resolve the
    identity (per block for a blocked basis). ``partition`` optionally
    overrides the paths' block assignments positionally. Family densities
    are assumed smooth in sqrt(sigma); integrals substitute accordingly.
    """
    if partition is not None and len(partition) != len(paths):
        raise ValueError("partition must assign a block per path")
    checks: list[ConditionCheck] = []
    resolution_parts: dict[int | None, list[np.ndarray]] = {}

    for i, path in enumerate(paths):
        block = partition[i] if partition is not None else path.block
        svals = path.sample_grid(s_samples)
        trace_defect = 0.0
        prod_defect = 0.0
        mem_worst = 0.0
        mem_where = ""
        for s in svals:
            op = as_matrix(path.op_at(float(s)))
            trace_defect = max(trace_defect,
                               abs(float(np.real(np.trace(op))) - float(s)))
            prod_defect = max(prod_defect, product_defect(op, path.dims))
            rep = membership(op, spec, tol=membership_tol)
            if rep.residual > mem_worst:
                mem_worst = rep.residual
                mem_where = f"s={float(s):.6g}"
        lbl = path.label
        checks.append(ConditionCheck(f"{lbl}:trace", trace_defect, trace_tol,
                                     trace_defect <= trace_tol))
        checks.append(ConditionCheck(f"{lbl}:product", prod_defect,
                                     product_tol, prod_defect <= product_tol))
        checks.append(ConditionCheck(f"{lbl}:membership", mem_worst,
                                     membership_tol,
                                     mem_worst <= membership_tol, mem_where))
        c_end, end_defect = _endpoint_check(path, spec)
        checks.append(ConditionCheck(f"{lbl}:endpoint", end_defect, recon_tol,
                                     end_defect <= recon_tol))
        resolution_parts.setdefault(block, []).append(c_end.matrix)
        if path.cmatrix_at is not None:
            fam_defect = 0.0
            for s in svals:
                c = path.cmatrix_at(float(s))
                solver = spec.solver()
                fam_defect = max(fam_defect, float(np.linalg.norm(
                    solver.image(c.matrix) - as_matrix(path.op_at(float(s)))
                )))
            checks.append(ConditionCheck(f"{lbl}:witness-family", fam_defect,
                                         recon_tol, fam_defect <= recon_tol))

    for fam in families:
        sig = np.linspace(0.0, 1.0, sigma_samples)
        xs = np.linspace(0.0, 1.0, x_samples)
        min_eig = np.inf
        prod_defect = 0.0
        recon_defect = 0.0
        solver = spec.solver()
        for sv in sig:
            dens = as_matrix(fam.density_at(float(sv)))
            cd = fam.cdensity_at(float(sv))
            prod_defect = max(prod_defect,
                              product_defect(dens, fam.parent.dims))
            recon_defect = max(recon_defect, float(np.linalg.norm(
                solver.image(cd.matrix) - dens
            )))
            if fam.parent.cmatrix_at is not None:
                base = fam.parent.cmatrix_at(fam.attach_s(float(sv))).matrix
                for xv in xs:
                    mix = (1.0 - xv) * base + xv * cd.matrix
                    min_eig = min(min_eig, float(
                        np.linalg.eigvalsh(mix).min()
                    ))
            else:
                min_eig = min(min_eig, float(cd.eigenvalues().min()))
        lbl = fam.label
        psd_defect = max(0.0, -float(min_eig))
        checks.append(ConditionCheck(f"{lbl}:psd", psd_defect, psd_tol,
                                     psd_defect <= psd_tol))
        checks.append(ConditionCheck(f"{lbl}:product", prod_defect,
                                     product_tol, prod_defect <= product_tol))
        checks.append(ConditionCheck(f"{lbl}:reconstruction", recon_defect,
                                     recon_tol, recon_defect <= recon_tol))
        integral = integrate_sqrt_smooth(
            lambda u: fam.cdensity_at(float(u)).matrix, nodes=quad_nodes
        )
        resolution_parts.setdefault(fam.block, []).append(integral)

    blocks = spec.block_list()
    for key, parts in sorted(resolution_parts.items(),
                             key=lambda kv: (kv[0] is not None, kv[0] or 0)):
        if key is None:
            target = np.eye(spec.kappa, dtype=np.complex128)
            name = "resolution"
        else:
            target = np.zeros((spec.kappa, spec.kappa), dtype=np.complex128)
            idx = list(blocks[key])
            target[idx, idx] = 1.0
            name = f"resolution[{key}]"
        ok, defect = cmatrix_resolution_check(parts, target, resolution_tol)
        checks.append(ConditionCheck(name, defect, resolution_tol, ok))

    return PathConditionReport(tuple(checks))
