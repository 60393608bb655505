"""Purity monotones: f-purities, measurement entropy, norm-based measures.

An f-purity is the supremum of sum_x f(p_x) over pure measurements, where
p_x are the outcome probabilities.  For generic polytope systems the
supremum is approximated by enumerating measurements assembled from scaled
extremal effects (rational weights, denominators up to 4); the classical
and quantum cases are exact because the optimizing measurement is known
there (fine-grained, respectively projective in the eigenbasis).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import simplex
from .core import (Effect, GptState, Measurement, StructuralError, TheorySystem,
                   is_classical_structure)
from .mixedness import RaReChannel, invariant_state
from .quantum import DensityMatrix, _eig_desc, _entropy_bits


class UnsupportedSystemError(ValueError):
    """The system lacks the structure the monotone needs."""


class EnumerationBoundExceeded(RuntimeError):
    """Measurement enumeration hit its budget; carries the best lower bound."""

    def __init__(self, report: "MonotoneReport"):
        super().__init__("measurement enumeration bound exceeded; "
                         f"best value found {report.value}")
        self.report = report
        self.lower_bound = True


@dataclass(frozen=True)
class ConvexScalarFn:
    """A convex function on [0, 1] used to build an f-purity.

    By convention the evaluator is finite at 0 (x log x is extended by 0);
    enumeration shortcuts additionally require f(0) = 0.
    """

    tag: str
    evaluator: Callable[[float], float]
    convex: bool = True

    def __call__(self, x: float) -> float:
        return self.evaluator(x)

    @staticmethod
    def xlogx() -> "ConvexScalarFn":
        def f(x: float) -> float:
            return 0.0 if x <= 0.0 else x * np.log2(x)
        return ConvexScalarFn("xlogx", f)

    @staticmethod
    def square() -> "ConvexScalarFn":
        return ConvexScalarFn("square", lambda x: x * x)

    @staticmethod
    def custom(evaluator: Callable[[float], float], check: bool = True,
               tag: str = "custom") -> "ConvexScalarFn":
        convex = True
        if check:
            xs = np.linspace(0.0, 1.0, 41)
            for a, b in itertools.combinations(xs, 2):
                mid = evaluator((a + b) / 2)
                if mid > (evaluator(a) + evaluator(b)) / 2 + 1e-12:
                    convex = False
                    break
        return ConvexScalarFn(tag, evaluator, convex)


@dataclass(frozen=True)
class MonotoneReport:
    """A monotone value with the measurement (or effect pair) attaining it."""

    name: str
    value: float
    witness: object
    lower_bound: bool = False

    def to_dict(self) -> dict:
        witness = self.witness
        if isinstance(witness, Measurement):
            witness = {"type": "measurement",
                       "effects": [a.covec.tolist() for a in witness.effects]}
        return {"name": self.name, "value": float(self.value), "witness": witness,
                "lower_bound": self.lower_bound}


# ---------------------------------------------------------------------------
# pure-measurement enumeration
# ---------------------------------------------------------------------------

#: rational weights with denominator at most 4
WEIGHT_GRID = tuple(sorted({Fraction(p, q) for q in (1, 2, 3, 4)
                            for p in range(1, q + 1)}))


def pure_effects(system: TheorySystem, atol: float = 1e-9) -> list[np.ndarray]:
    """The supplied extremal effects, minus the zero and unit effects."""
    out = []
    for a in system.extremal_effects:
        if np.max(np.abs(a)) <= atol:
            continue
        if np.max(np.abs(a - system.unit_effect)) <= atol:
            continue
        out.append(a)
    return out


def enumerate_pure_measurements(system: TheorySystem,
                                weights: Sequence[Fraction] = WEIGHT_GRID,
                                max_outcomes: int = 8,
                                limit: int = 50000,
                                atol: float = 1e-9
                                ) -> tuple[list[Measurement], bool]:
    """All measurements assembled from scaled pure effects, up to the budget.

    Depth-first search over multisets of (effect, weight) pairs whose
    weighted sum is exactly the unit effect.  Returns the measurement list
    and a completeness flag (False when the node budget was exhausted).
    """
    effects = pure_effects(system, atol)
    if not effects:
        return [], True
    vertices = np.column_stack(system.pure_states)      # dim x V
    options = [(i, float(w)) for i in range(len(effects)) for w in weights]
    values = np.array([a @ vertices for a in effects])  # effect values on vertices

    found: list[list[tuple[int, float]]] = []
    nodes = 0
    complete = True

    def dfs(start: int, res_cov: np.ndarray, res_vals: np.ndarray,
            chosen: list[tuple[int, float]]) -> None:
        nonlocal nodes, complete
        if not complete:
            return
        if np.max(np.abs(res_cov)) <= atol:
            found.append(list(chosen))
            return
        if len(chosen) >= max_outcomes:
            return
        for k in range(start, len(options)):
            i, w = options[k]
            new_vals = res_vals - w * values[i]
            if new_vals.min() < -atol:
                continue
            nodes += 1
            if nodes > limit:
                complete = False
                return
            chosen.append((i, w))
            dfs(k, res_cov - w * effects[i], new_vals, chosen)
            chosen.pop()

    unit_vals = system.unit_effect @ vertices
    dfs(0, system.unit_effect.copy(), unit_vals.copy(), [])

    measurements = []
    for combo in found:
        effs = tuple(Effect(system, w * effects[i]) for i, w in combo)
        measurements.append(Measurement(effs))
    return measurements, complete


def fine_grained_measurement(system: TheorySystem) -> Measurement:
    return Measurement(tuple(Effect(system, a) for a in system.pure_states))


# ---------------------------------------------------------------------------
# monotones
# ---------------------------------------------------------------------------

def f_purity(rho: GptState, f: ConvexScalarFn,
             measurements: Sequence[Measurement] | None = None,
             limit: int = 50000) -> MonotoneReport:
    """Maximize sum_x f(p_x) over pure measurements.

    Classical systems short-circuit to the fine-grained measurement (the
    optimum for convex f with f(0) = 0); other systems search the supplied
    or enumerated measurement list.  If the enumeration budget trips, an
    EnumerationBoundExceeded carrying the best lower bound is raised.
    """
    if not rho.is_normalized():
        raise StructuralError("f_purity requires a normalized state")
    system = rho.system
    name = f"{f.tag}-purity"
    if measurements is None and is_classical_structure(system) and abs(f(0.0)) < 1e-12:
        meas = fine_grained_measurement(system)
        probs = meas.outcome_probs(rho)
        return MonotoneReport(name, float(sum(f(p) for p in probs)), meas)
    complete = True
    if measurements is None:
        measurements, complete = enumerate_pure_measurements(system, limit=limit)
    best_val, best_meas = -np.inf, None
    for meas in measurements:
        val = float(sum(f(p) for p in meas.outcome_probs(rho)))
        if val > best_val:
            best_val, best_meas = val, meas
    report = MonotoneReport(name, best_val, best_meas, lower_bound=not complete)
    if not complete:
        raise EnumerationBoundExceeded(report)
    if best_meas is None:
        raise UnsupportedSystemError("no pure measurements available for this system")
    return report


def measurement_entropy(rho) -> MonotoneReport:
    """Minimum Shannon entropy (bits) over pure measurements.

    Quantum states use the eigenvalue spectrum with the eigenbasis
    projective measurement as witness; GPT states minimize over the
    enumerated measurements (classical systems reduce to the fine-grained
    distribution).
    """
    if isinstance(rho, DensityMatrix):
        if abs(rho.trace - 1.0) > 1e-10:
            raise StructuralError("measurement_entropy requires a normalized state")
        vals, vecs = _eig_desc(rho.matrix)
        witness = {"type": "projective-eigenbasis",
                   "basis": [vecs[:, k].tolist() for k in range(vecs.shape[1])]}
        return MonotoneReport("measurement-entropy", _entropy_bits(vals), witness)
    report = f_purity(rho, ConvexScalarFn.xlogx())
    return MonotoneReport("measurement-entropy", -report.value, report.witness,
                          lower_bound=report.lower_bound)


_effect_lp_cache: dict[TheorySystem, tuple[np.ndarray, np.ndarray, list[int]]] = {}
_invariant_cache: dict[TheorySystem, GptState] = {}


def _cached_invariant(system: TheorySystem) -> GptState:
    if system not in _invariant_cache:
        _invariant_cache[system] = invariant_state(system)
    return _invariant_cache[system]


def _effect_lp(system: TheorySystem):
    """Equality form of the effect-polytope constraints 0 <= a(v) <= 1.

    Variables are [a+, a-, s, t] with a = a+ - a-; the slack columns give a
    feasible starting basis for phase-2 directly.
    """
    if system in _effect_lp_cache:
        return _effect_lp_cache[system]
    d = system.dim
    verts = np.column_stack(system.pure_states)   # d x V
    nv = verts.shape[1]
    a = np.zeros((2 * nv, 2 * d + 2 * nv))
    a[:nv, :d] = verts.T
    a[:nv, d:2 * d] = -verts.T
    a[:nv, 2 * d:2 * d + nv] = np.eye(nv)
    a[nv:, :d] = -verts.T
    a[nv:, d:2 * d] = verts.T
    a[nv:, 2 * d + nv:] = np.eye(nv)
    b = np.concatenate([np.ones(nv), np.zeros(nv)])
    basis = list(range(2 * d, 2 * d + 2 * nv))
    _effect_lp_cache[system] = (a, b, basis)
    return a, b, basis


def _optimize_effect(system: TheorySystem, delta: np.ndarray, maximize: bool
                     ) -> tuple[float, np.ndarray]:
    a, b, basis = _effect_lp(system)
    d = system.dim
    c = np.zeros(a.shape[1])
    c[:d] = -delta if maximize else delta
    c[d:2 * d] = delta if maximize else -delta
    try:
        x, objective = simplex.solve(a, b, c, basis)
    except simplex.UnboundedError as exc:
        raise UnsupportedSystemError(
            "effect polytope is unbounded; pure states do not span the state space"
        ) from exc
    covec = x[:d] - x[d:2 * d]
    value = float(delta @ covec)
    return value, covec


def op_norm_distance(rho: GptState) -> float:
    """Half the operational-norm distance from the invariant state.

    The norm of delta is sup (a|delta) - inf (a|delta) with a ranging over
    the effect polytope; both bounds are linear programs over the effect
    constraints on the pure states.
    """
    if not rho.is_normalized():
        raise StructuralError("op_norm_distance requires a normalized state")
    chi = _cached_invariant(rho.system)
    delta = rho.vec - chi.vec
    hi, _ = _optimize_effect(rho.system, delta, maximize=True)
    lo, _ = _optimize_effect(rho.system, delta, maximize=False)
    return 0.5 * (hi - lo)


def op_norm_report(rho: GptState) -> MonotoneReport:
    """op_norm_distance together with the optimizing effect pair."""
    chi = _cached_invariant(rho.system)
    delta = rho.vec - chi.vec
    hi, top = _optimize_effect(rho.system, delta, maximize=True)
    lo, bottom = _optimize_effect(rho.system, delta, maximize=False)
    witness = {"type": "effect-pair", "sup_effect": top.tolist(),
               "inf_effect": bottom.tolist()}
    return MonotoneReport("op-norm-distance", 0.5 * (hi - lo), witness)


_gram_cache: dict[TheorySystem, np.ndarray] = {}


def _group_gram(system: TheorySystem) -> np.ndarray:
    """Quadratic form averaging g^T g over the group.

    In the basis where this form is the identity, every group element is
    orthogonal, so the associated 2-norm is invariant.
    """
    if system not in _gram_cache:
        q = np.mean([u.T @ u for u in system.group], axis=0)
        _gram_cache[system] = q
    return _gram_cache[system]


def purity_2norm(rho) -> float:
    """Squared invariant 2-norm of the state.

    Quantum: Tr(rho^2).  Classical: sum p_i^2.  Other systems: v^T Q v with
    Q the group-averaged Gram form, provided Q is well conditioned.
    """
    if isinstance(rho, DensityMatrix):
        return rho.purity()
    q = _group_gram(rho.system)
    if np.linalg.cond(q) > 1e10:
        raise UnsupportedSystemError(
            "group-averaged quadratic form is degenerate; 2-norm purity unsupported")
    return float(rho.vec @ q @ rho.vec)


@dataclass
class SchurCheckReport:
    """Outcome of randomized monotonicity checking for a candidate monotone."""

    monotone: str
    trials: int
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"monotone": self.monotone, "trials": self.trials,
                "violations": self.violations}


def _as_value(p_out) -> float:
    return p_out.value if isinstance(p_out, MonotoneReport) else float(p_out)


def schur_convexity_check(monotone: Callable[[GptState], float],
                          system: TheorySystem, trials: int, seed: int,
                          name: str = "monotone",
                          atol: float = 1e-9) -> SchurCheckReport:
    """Sample RaRe degradations and test P(rho) >= P(sigma).

    Each trial draws a random mixture of vertices and a random reversible
    mixture, and compares the monotone before and after.  Violations are
    reported with full witnesses, not raised.
    """
    rng = np.random.default_rng(seed)
    report = SchurCheckReport(name, trials)
    vertices = list(system.pure_states)
    n_group = len(system.group)
    for _ in range(trials):
        mix = rng.dirichlet(np.ones(len(vertices)))
        rho = GptState(system, sum(w * v for w, v in zip(mix, vertices)))
        weights = rng.dirichlet(np.ones(min(n_group, 4)))
        picks = rng.choice(n_group, size=weights.size, replace=False)
        channel = RaReChannel(system, tuple((float(w), int(k))
                                            for w, k in zip(weights, picks)))
        sigma = channel.apply(rho)
        p_rho = _as_value(monotone(rho))
        p_sigma = _as_value(monotone(sigma))
        if p_rho < p_sigma - atol:
            report.violations.append({
                "rho": rho.vec.tolist(),
                "weights": weights.tolist(),
                "group_indices": [int(k) for k in picks],
                "value_before": p_rho,
                "value_after": p_sigma,
            })
    return report


def builtin_monotones(system: TheorySystem,
                      measurements: Sequence[Measurement] | None = None
                      ) -> dict[str, Callable[[GptState], float]]:
    """The four built-in purity monotones as plain callables.

    A shared measurement list may be supplied so the enumeration runs once
    per system instead of once per evaluation.
    """
    if measurements is None and not is_classical_structure(system):
        measurements, complete = enumerate_pure_measurements(system)
        if not complete:
            raise EnumerationBoundExceeded(
                MonotoneReport("builtin-monotones", float("nan"), None, True))
    f2, flog = ConvexScalarFn.square(), ConvexScalarFn.xlogx()
    return {
        "x2-purity": lambda s: f_purity(s, f2, measurements).value,
        "xlogx-purity": lambda s: f_purity(s, flog, measurements).value,
        "op-norm-distance": op_norm_distance,
        "2-norm-purity": purity_2norm,
    }
