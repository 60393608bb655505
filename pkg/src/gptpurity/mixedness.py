"""The mixedness relation: convex feasibility over group orbits.

A state sigma is *more mixed* than rho when sigma is a convex combination of
group images of rho, i.e. when some random-reversible channel degrades rho
to sigma.  Deciding the relation is a small linear feasibility problem over
the orbit, solved by the in-repo simplex; every feasible verdict comes with
an explicit weight witness.

The classical case reduces to majorization, and the witness can be built
constructively: a doubly stochastic matrix from a T-transform chain, then a
Birkhoff decomposition into permutation matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .core import (ATOL, CapacityError, GptState, StructuralError, TheorySystem,
                   make_classical, permutation_matrix)

#: maximum reconstruction error accepted for a feasible certificate
RESIDUAL_TOL = 1e-8


class IllConditionedError(ValueError):
    """Input too badly scaled for a trustworthy feasibility verdict."""


@dataclass(frozen=True)
class RaReChannel:
    """Random reversible channel: weights over indices into the system group."""

    system: TheorySystem
    entries: tuple[tuple[float, int], ...]

    def __post_init__(self):
        weights = np.array([w for w, _ in self.entries])
        if weights.size == 0:
            raise StructuralError("RaRe channel needs at least one entry")
        if weights.min() < -1e-12 or abs(weights.sum() - 1.0) > 1e-12:
            raise StructuralError("RaRe weights must be nonnegative and sum to 1")
        for _, k in self.entries:
            if not 0 <= k < len(self.system.group):
                raise StructuralError(f"group index {k} out of range")

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.system.dim, self.system.dim))
        for w, k in self.entries:
            out += w * self.system.group[k]
        return out

    def apply(self, rho: GptState) -> GptState:
        return GptState(self.system, self.matrix() @ rho.vec)

    def to_dict(self) -> dict:
        return {"weights": [w for w, _ in self.entries],
                "group_indices": [k for _, k in self.entries]}


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Outcome of a convex-combination feasibility query, with witness."""

    status: str                      # "feasible" | "infeasible"
    weights: np.ndarray | None
    residual: float

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def __bool__(self) -> bool:
        return self.feasible

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "weights": None if self.weights is None else [float(w) for w in self.weights],
            "residual": float(self.residual),
        }

    @staticmethod
    def from_dict(data: dict) -> "FeasibilityCertificate":
        w = data.get("weights")
        return FeasibilityCertificate(
            status=data["status"],
            weights=None if w is None else np.asarray(w, dtype=float),
            residual=float(data["residual"]),
        )


def feasible_convex_combination(generators, target) -> FeasibilityCertificate:
    """Is ``target`` a convex combination of the ``generators``?

    Phase-1 LP on the equality system sum_i w_i g_i = target, sum_i w_i = 1,
    w >= 0.  A feasible certificate always carries weights whose max-norm
    reconstruction error is below RESIDUAL_TOL; a verdict that cannot be
    backed by such a witness raises instead of being reported.
    """
    gens = [np.asarray(g, dtype=float).reshape(-1) for g in generators]
    if not gens:
        raise StructuralError("generator list must be non-empty")
    dim = gens[0].shape[0]
    tgt = np.asarray(target, dtype=float).reshape(-1)
    if tgt.shape[0] != dim or any(g.shape[0] != dim for g in gens):
        raise StructuralError("generators and target must share a dimension")

    g = np.column_stack(gens)
    scale = max(np.abs(g).max(), np.abs(tgt).max(), 1.0)
    if scale > 1e12:
        raise IllConditionedError(f"input scale {scale:.2e} beyond 1e12")

    a = np.vstack([g, np.ones(len(gens))]) / scale
    b = np.concatenate([tgt, [1.0]]) / scale
    feasible, weights, farkas = simplex.phase1(a, b)
    if not feasible:
        # the verdict must be backed by a separating (Farkas) certificate:
        # y.col <= 0 for every generator column while y.rhs > 0
        norm = np.max(np.abs(farkas))
        if norm <= 0:
            raise IllConditionedError("infeasibility certificate is degenerate")
        y = farkas / norm
        violation = float(np.max(y @ a))
        gain = float(y @ b)
        if violation > 1e-7 or gain < 1e-9:
            raise IllConditionedError(
                f"infeasibility certificate too weak (violation {violation:.2e}, "
                f"separation {gain:.2e}); input is numerically marginal")
        return FeasibilityCertificate("infeasible", None, float("inf"))
    weights = np.maximum(weights, 0.0)
    weights /= weights.sum()
    residual = float(np.max(np.abs(g @ weights - tgt)))
    if residual > RESIDUAL_TOL:
        raise IllConditionedError(
            f"feasible basis reconstructs target only to {residual:.2e}")
    return FeasibilityCertificate("feasible", weights, residual)


def _require_normalized(rho: GptState, name: str) -> None:
    if not rho.is_normalized():
        raise StructuralError(f"{name} is not normalized (norm {rho.norm:.6f})")


def more_mixed(rho: GptState, sigma: GptState) -> FeasibilityCertificate:
    """Certificate that sigma is more mixed than rho (Def.-3 relation).

    Feasible iff sigma lies in the convex hull of the group orbit of rho;
    the weights index the system group in order.
    """
    if rho.system is not sigma.system:
        raise StructuralError("states must belong to the same system")
    _require_normalized(rho, "rho")
    _require_normalized(sigma, "sigma")
    orbit = [u @ rho.vec for u in rho.system.group]
    return feasible_convex_combination(orbit, sigma.vec)


def rare_channel_from_certificate(system: TheorySystem,
                                  cert: FeasibilityCertificate,
                                  prune: float = 1e-12) -> RaReChannel:
    """Turn a feasible more_mixed certificate into an explicit RaRe channel."""
    if not cert.feasible or cert.weights is None:
        raise StructuralError("certificate is not feasible")
    entries = [(float(w), k) for k, w in enumerate(cert.weights) if w > prune]
    total = sum(w for w, _ in entries)
    entries = [(w / total, k) for w, k in entries]
    return RaReChannel(system, tuple(entries))


def equally_mixed(rho: GptState, sigma: GptState) -> tuple[bool, np.ndarray | None]:
    """Two-way mixedness comparison, with a reversible witness when found.

    Returns (flag, U) where flag is True iff each state is more mixed than
    the other; U is a group element with U rho = sigma if the finite search
    finds one, else None ("equally mixed, no group witness found").
    """
    if rho.system is not sigma.system:
        raise StructuralError("states must belong to the same system")
    if not (more_mixed(rho, sigma).feasible and more_mixed(sigma, rho).feasible):
        return False, None
    for u in rho.system.group:
        if np.max(np.abs(u @ rho.vec - sigma.vec)) <= ATOL:
            return True, u
    return True, None


def invariant_state(sys: TheorySystem) -> GptState:
    """The maximally mixed state: the group average of any pure state.

    Verifies invariance under every group element, independence from the
    seed vertex, and maximality (every vertex is more controllable than the
    average), so the returned state is the maximum of the mixedness order.
    """
    averages = [np.mean([u @ v for u in sys.group], axis=0) for v in sys.pure_states]
    chi = averages[0]
    for j, avg in enumerate(averages[1:], start=1):
        if np.max(np.abs(avg - chi)) > ATOL:
            raise StructuralError(
                f"group average depends on the seed pure state (vertex {j}); "
                "the invariant state is not unique")
    for k, u in enumerate(sys.group):
        if np.max(np.abs(u @ chi - chi)) > ATOL:
            raise StructuralError(f"group[{k}] does not fix the group average")
    state = GptState(sys, chi)
    for j, v in enumerate(sys.pure_states):
        if not more_mixed(GptState(sys, v), state).feasible:
            raise StructuralError(
                f"invariant state is not reachable from vertex {j}; "
                "it is maximal but not the maximum")
    return state


def orbit_hull(rho: GptState, atol: float = ATOL) -> list[np.ndarray]:
    """Vertices of the convex hull of the group orbit of rho.

    The hull is exactly the set of states more mixed than rho, so the
    returned list generates that set.  Duplicates (within tolerance) are
    removed, then non-extreme orbit points are discarded via the
    feasibility solver.
    """
    distinct: list[np.ndarray] = []
    for u in rho.system.group:
        w = u @ rho.vec
        if all(np.max(np.abs(w - v)) > atol for v in distinct):
            distinct.append(w)
    if len(distinct) == 1:
        return distinct
    vertices = []
    for i, v in enumerate(distinct):
        others = distinct[:i] + distinct[i + 1:]
        if not feasible_convex_combination(others, v).feasible:
            vertices.append(v)
    return vertices


def majorizes(p, q, atol: float = 1e-10) -> bool:
    """Partial-sum majorization test: p majorizes q.

    Vectors are sorted descending (ties broken by index); both must be
    probability vectors within tolerance.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.shape != q.shape:
        raise StructuralError("majorization needs equal-length vectors")
    for name, v in (("p", p), ("q", q)):
        if v.min() < -atol or abs(v.sum() - 1.0) > atol:
            raise StructuralError(f"{name} is not a probability vector")
    ps = np.cumsum(np.sort(p)[::-1])
    qs = np.cumsum(np.sort(q)[::-1])
    return bool(np.all(ps >= qs - atol))


def _t_transform_chain(p_sorted: np.ndarray, q_sorted: np.ndarray,
                       atol: float = 1e-12) -> np.ndarray:
    """Doubly stochastic D with D p_sorted = q_sorted, as a T-transform product.

    Standard Hardy-Littlewood-Polya construction on descending-sorted
    vectors: at each step take the largest index j where the current vector
    still exceeds the target and transfer weight to the first deficient
    index after it.  Terminates in at most n-1 steps.
    """
    n = p_sorted.shape[0]
    x = p_sorted.copy()
    d = np.eye(n)
    for _ in range(6 * n):
        if np.max(np.abs(x - q_sorted)) <= atol:
            return d
        # indices in genuine excess/deficiency; sub-tolerance dust is treated
        # as converged (the 1e-9 backstop below covers the residue)
        over = [j for j in range(n) if x[j] > q_sorted[j] + atol]
        if not over:
            break
        j = max(over)
        under = [k for k in range(j + 1, n) if x[k] < q_sorted[k] - atol]
        if not under:
            break
        k = min(under)
        delta = min(x[j] - q_sorted[j], q_sorted[k] - x[k])
        lam = 1.0 - delta / (x[j] - x[k])
        t = np.eye(n)
        t[j, j] = t[k, k] = lam
        t[j, k] = t[k, j] = 1.0 - lam
        x = t @ x
        d = t @ d
    if np.max(np.abs(x - q_sorted)) <= 1e-9:
        return d
    raise RuntimeError("T-transform chain failed to converge in n-1 steps")


def _birkhoff_decompose(d: np.ndarray, atol: float = 1e-12) -> list[tuple[float, tuple[int, ...]]]:
    """Decompose a doubly stochastic matrix into permutations.

    At every step, among the permutations supported on the positive entries
    of the residual, remove the one with the largest bottleneck weight
    (lexicographically smallest on ties) -- deterministic output, at most
    (n-1)^2 + 1 terms.
    """
    n = d.shape[0]
    residual = d.copy()
    terms: list[tuple[float, tuple[int, ...]]] = []
    for _ in range(n * n):
        if residual.max() <= atol:
            break
        best_perm: tuple[int, ...] | None = None
        best_w = -1.0
        for perm in itertools.permutations(range(n)):
            w = min(residual[i, perm[i]] for i in range(n))
            if w > atol and w > best_w + atol:
                best_w, best_perm = w, perm
        if best_perm is None:
            raise RuntimeError("no permutation fits the residual support; "
                               "matrix is not doubly stochastic")
        terms.append((best_w, best_perm))
        for i in range(n):
            residual[i, best_perm[i]] -= best_w
        residual[residual < 0] = 0.0
    total = sum(w for w, _ in terms)
    return [(w / total, perm) for w, perm in terms]


def birkhoff_rare_synthesis(p, q, system: TheorySystem | None = None) -> RaReChannel:
    """Explicit RaRe channel over the permutation group mapping p to q.

    Requires that p majorizes q.  Builds a doubly stochastic matrix via a
    T-transform chain on the sorted vectors, decomposes it by Birkhoff's
    algorithm, and returns weights over the permutation matrices of
    make_classical(n) (or of the supplied classical system).
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    n = p.shape[0]
    if n > 6:
        raise CapacityError("birkhoff_rare_synthesis supports n <= 6")
    if not majorizes(p, q):
        raise StructuralError("precondition failed: p does not majorize q")
    sys = system if system is not None else make_classical(n)

    order_p = np.argsort(-p, kind="stable")
    order_q = np.argsort(-q, kind="stable")
    sp = permutation_matrix(order_p)        # (sp p)[i] = p[order_p[i]], sorted desc
    sq = permutation_matrix(order_q)
    d_sorted = _t_transform_chain(p[order_p], q[order_q])
    d = sq.T @ d_sorted @ sp                # doubly stochastic, d @ p = q

    terms = _birkhoff_decompose(d)
    max_support = (n - 1) ** 2 + 1
    if len(terms) > max_support:
        # reduce to a basic solution of sum w_i P_i = d; its support cannot
        # exceed the affine rank of the doubly stochastic polytope
        mats = [permutation_matrix(perm).reshape(-1) for _, perm in terms]
        cert = feasible_convex_combination(mats, d.reshape(-1))
        kept = [(float(w), terms[i][1]) for i, w in enumerate(cert.weights) if w > 1e-12]
        total = sum(w for w, _ in kept)
        terms = [(w / total, perm) for w, perm in kept]

    group_index = {perm: k for k, perm in enumerate(itertools.permutations(range(n)))}
    entries = tuple(sorted((w, group_index[perm]) for w, perm in terms))
    channel = RaReChannel(sys, entries)
    residual = np.max(np.abs(channel.matrix() @ p - q))
    if residual > 1e-9:
        raise RuntimeError(f"synthesized channel misses target by {residual:.2e}")
    return channel


def validate_state(rho: GptState) -> FeasibilityCertificate:
    """Certificate that a normalized state lies in the pure-state hull."""
    _require_normalized(rho, "state")
    return feasible_convex_combination([v for v in rho.system.pure_states], rho.vec)


def validate_channel(ch) -> list[str]:
    """Channel invariants: unit-effect preservation plus polytope mapping.

    Every pure input state must land inside the output state polytope; the
    membership certificates come from the feasibility solver.
    """
    report: list[str] = []
    if not ch.preserves_unit():
        residual = np.max(np.abs(ch.output_system.unit_effect @ ch.matrix
                                 - ch.input_system.unit_effect))
        report.append(f"unit effect not preserved (residual {residual:.3e})")
    targets = [v for v in ch.output_system.pure_states]
    for j, v in enumerate(ch.input_system.pure_states):
        image = ch.matrix @ v
        if not feasible_convex_combination(targets, image).feasible:
            report.append(f"image of pure_states[{j}] leaves the output polytope")
    return report


def validate_instrument(inst) -> list[str]:
    """Instrument invariants: the branch sum is a channel, branches subnormalize."""
    report = validate_channel(inst.coarse_grained())
    u_out = inst.output_system.unit_effect
    for i, branch in enumerate(inst.branches):
        for j, v in enumerate(inst.input_system.pure_states):
            norm = float(u_out @ (branch @ v))
            if not -ATOL <= norm <= 1.0 + ATOL:
                report.append(f"branch {i} gives norm {norm:.6f} on pure_states[{j}]")
    return report
