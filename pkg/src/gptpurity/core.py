"""Finite linear-algebra model of single GPT systems.

A system is described by a real vector space of dimension ``dim`` holding
state vectors, together with the unit (deterministic) effect, the vertices
of the normalized state polytope, a list of extremal effects, and a finite
group of reversible transformations given as explicit matrices.  Channels,
effects, and measurements all act linearly on state vectors, so composition
is plain matrix algebra.

States carry an explicit normalization coordinate (the value of the unit
effect), which keeps channels linear instead of affine.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: absolute tolerance for polytope / group identities in floating point
ATOL = 1e-9


class StructuralError(ValueError):
    """Field dimensions of a system or operation input do not line up."""


class CapacityError(ValueError):
    """Requested construction exceeds the supported finite size."""


def _as_vector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and v.shape[0] != n:
        raise StructuralError(f"{name} has length {v.shape[0]}, expected {n}")
    v.flags.writeable = False
    return v


def _as_matrix(x, shape: tuple[int, int] | None = None, name: str = "matrix") -> np.ndarray:
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise StructuralError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if shape is not None and m.shape != shape:
        raise StructuralError(f"{name} has shape {m.shape}, expected {shape}")
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class TheorySystem:
    """A finite GPT system: state space, effects and reversible group.

    ``pure_states`` are the vertices of the normalized state polytope,
    ``extremal_effects`` the normalized ray-extremal effects (pure effects)
    possibly padded with the zero and unit effects, and ``group`` the finite
    set of reversible transformations as ``dim x dim`` matrices.
    """

    dim: int
    unit_effect: np.ndarray
    pure_states: tuple[np.ndarray, ...]
    extremal_effects: tuple[np.ndarray, ...]
    group: tuple[np.ndarray, ...]
    name: str = "custom"

    def __post_init__(self):
        if self.dim <= 0:
            raise StructuralError("dim must be a positive integer")
        object.__setattr__(self, "unit_effect", _as_vector(self.unit_effect, self.dim, "unit_effect"))
        object.__setattr__(
            self, "pure_states",
            tuple(_as_vector(v, self.dim, f"pure_states[{i}]") for i, v in enumerate(self.pure_states)))
        object.__setattr__(
            self, "extremal_effects",
            tuple(_as_vector(a, self.dim, f"extremal_effects[{i}]") for i, a in enumerate(self.extremal_effects)))
        object.__setattr__(
            self, "group",
            tuple(_as_matrix(u, (self.dim, self.dim), f"group[{i}]") for i, u in enumerate(self.group)))
        if not self.pure_states:
            raise StructuralError("pure_states must be non-empty")
        if not self.group:
            raise StructuralError("group must be non-empty")

    def state(self, vec) -> "GptState":
        return GptState(self, vec)

    def effect(self, covec) -> "Effect":
        return Effect(self, covec)

    def norm(self, vec) -> float:
        return float(self.unit_effect @ np.asarray(vec, dtype=float))


@dataclass(frozen=True, eq=False)
class GptState:
    """A state of a system, as coefficients against the system basis."""

    system: TheorySystem
    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vec", _as_vector(self.vec, self.system.dim, "state vec"))

    @property
    def norm(self) -> float:
        return float(self.system.unit_effect @ self.vec)

    def is_normalized(self, atol: float = ATOL) -> bool:
        return abs(self.norm - 1.0) <= atol


@dataclass(frozen=True, eq=False)
class Effect:
    """A linear functional with values in [0, 1] on normalized states."""

    system: TheorySystem
    covec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "covec", _as_vector(self.covec, self.system.dim, "effect covec"))

    def __call__(self, state) -> float:
        vec = state.vec if isinstance(state, GptState) else np.asarray(state, dtype=float)
        return float(self.covec @ vec)

    def is_valid(self, atol: float = ATOL) -> bool:
        values = [self(v) for v in self.system.pure_states]
        return min(values) >= -atol and max(values) <= 1.0 + atol


@dataclass(frozen=True, eq=False)
class Measurement:
    """A collection of effects summing to the unit effect."""

    effects: tuple[Effect, ...]

    def __post_init__(self):
        if not self.effects:
            raise StructuralError("measurement needs at least one effect")
        sys0 = self.effects[0].system
        total = np.zeros(sys0.dim)
        for a in self.effects:
            if a.system is not sys0:
                raise StructuralError("all effects of a measurement must share a system")
            total = total + a.covec
        if not np.allclose(total, sys0.unit_effect, atol=1e-10):
            raise StructuralError("measurement effects do not sum to the unit effect")

    @property
    def system(self) -> TheorySystem:
        return self.effects[0].system

    def outcome_probs(self, state: GptState) -> np.ndarray:
        return np.array([a(state) for a in self.effects])


@dataclass(frozen=True, eq=False)
class GptChannel:
    """A deterministic transformation between systems, as a matrix."""

    input_system: TheorySystem
    output_system: TheorySystem
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "matrix",
            _as_matrix(self.matrix, (self.output_system.dim, self.input_system.dim), "channel matrix"))

    def preserves_unit(self, atol: float = ATOL) -> bool:
        # deterministic transformations are exactly those with u_out . M = u_in
        return bool(np.allclose(self.output_system.unit_effect @ self.matrix,
                                self.input_system.unit_effect, atol=atol))


@dataclass(frozen=True, eq=False)
class Instrument:
    """The branches of a test: matrices whose sum is a channel."""

    input_system: TheorySystem
    output_system: TheorySystem
    branches: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "branches",
            tuple(_as_matrix(b, (self.output_system.dim, self.input_system.dim), f"branches[{i}]")
                  for i, b in enumerate(self.branches)))
        if not self.branches:
            raise StructuralError("instrument needs at least one branch")

    def coarse_grained(self) -> GptChannel:
        total = np.sum(self.branches, axis=0)
        return GptChannel(self.input_system, self.output_system, total)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _match_vertex(sys: TheorySystem, vec: np.ndarray, atol: float) -> int | None:
    """Index of the pure state equal to ``vec`` within tolerance, else None."""
    for j, w in enumerate(sys.pure_states):
        if np.max(np.abs(vec - w)) <= atol:
            return j
    return None


def _group_lookup(sys: TheorySystem, mat: np.ndarray, atol: float) -> int | None:
    for k, u in enumerate(sys.group):
        if np.max(np.abs(mat - u)) <= atol:
            return k
    return None


def validate_system(sys: TheorySystem, atol: float = ATOL) -> list[str]:
    """Check every TheorySystem invariant; return the list of violations.

    An empty report means the system is valid within tolerance.  Structural
    problems (mismatched dimensions) raise ``StructuralError`` instead of
    being reported, since no further check is meaningful.
    """
    report: list[str] = []
    n_vertices = len(sys.pure_states)

    for i, u in enumerate(sys.group):
        if abs(np.linalg.det(u)) < 1e-12:
            report.append(f"group[{i}] is singular (det ~ 0)")
            continue
        # every group element must permute the vertex list
        hit = [_match_vertex(sys, u @ v, atol) for v in sys.pure_states]
        if None in hit:
            j = hit.index(None)
            residual = min(np.max(np.abs(u @ sys.pure_states[j] - w)) for w in sys.pure_states)
            report.append(f"group[{i}] maps pure_states[{j}] outside the vertex list "
                          f"(residual {residual:.3e})")
        elif len(set(hit)) != n_vertices:
            report.append(f"group[{i}] does not act injectively on the vertex list")
        # unit-effect invariance
        residual = np.max(np.abs(sys.unit_effect @ u - sys.unit_effect))
        if residual > atol:
            report.append(f"group[{i}] does not preserve the unit effect (residual {residual:.3e})")

    # closure under composition and inverses, by table lookup; keyed on
    # rounded bytes first, with a tolerance scan as fallback
    stacked = np.stack(sys.group)
    key_of = {np.round(u, 6).tobytes(): k for k, u in enumerate(sys.group)}

    def lookup(mat: np.ndarray) -> int | None:
        hit = key_of.get(np.round(mat, 6).tobytes())
        if hit is not None:
            return hit
        return _group_lookup(sys, mat, atol)

    for i, u in enumerate(sys.group):
        products = np.matmul(u, stacked)
        for j in range(len(sys.group)):
            if lookup(products[j]) is None:
                report.append(f"group is not closed: group[{i}] @ group[{j}] not in list")
        try:
            inv = np.linalg.inv(u)
        except np.linalg.LinAlgError:
            continue
        if lookup(inv) is None:
            report.append(f"group[{i}] has no inverse in the list")

    for i, a in enumerate(sys.extremal_effects):
        values = np.array([a @ v for v in sys.pure_states])
        if values.min() < -atol or values.max() > 1.0 + atol:
            report.append(f"extremal_effects[{i}] leaves [0,1] on the vertices "
                          f"(range [{values.min():.3e}, {values.max():.3e}])")
    return report


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Matrix P with (P x)[i] = x[perm[i]]."""
    n = len(perm)
    p = np.zeros((n, n))
    for i, j in enumerate(perm):
        p[i, j] = 1.0
    return p


def make_classical(n: int) -> TheorySystem:
    """Classical system on n outcomes: simplex vertices, permutation group."""
    if n < 1:
        raise StructuralError("n must be >= 1")
    if n > 6:
        raise CapacityError(f"classical systems are limited to n <= 6 (n! group), got n={n}")
    basis = [np.eye(n)[i] for i in range(n)]
    group = [permutation_matrix(p) for p in itertools.permutations(range(n))]
    return TheorySystem(
        dim=n,
        unit_effect=np.ones(n),
        pure_states=tuple(basis),
        extremal_effects=tuple(basis),
        group=tuple(group),
        name=f"classical-{n}",
    )


def make_square_bit() -> TheorySystem:
    """Square-state-space system with the dihedral symmetry group of order 8.

    Coordinates are (x, y, t) where t is the normalization component; the
    normalized states are the square [-1, 1]^2 at t = 1.  The extremal
    effects are the four facet effects (value 1 on one edge, 0 on the
    opposite edge) together with the zero and unit effects.
    """
    unit = np.array([0.0, 0.0, 1.0])
    vertices = [np.array([sx, sy, 1.0]) for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    facets = [
        np.array([0.5, 0.0, 0.5]),    # x = +1 edge
        np.array([0.0, 0.5, 0.5]),    # y = +1 edge
        np.array([-0.5, 0.0, 0.5]),   # x = -1 edge
        np.array([0.0, -0.5, 0.5]),   # y = -1 edge
    ]
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    planar = [np.linalg.matrix_power(rot, k) for k in range(4)]
    planar += [np.diag([1.0, -1.0]) @ r for r in planar]  # reflections
    group = []
    for r in planar:
        u = np.eye(3)
        u[:2, :2] = r
        group.append(u)
    return TheorySystem(
        dim=3,
        unit_effect=unit,
        pure_states=tuple(vertices),
        extremal_effects=tuple(facets) + (np.zeros(3), unit),
        group=tuple(group),
        name="square-bit",
    )


def is_classical_structure(sys: TheorySystem, atol: float = ATOL) -> bool:
    """True when the system is the standard classical simplex with full S_n."""
    n = sys.dim
    if len(sys.pure_states) != n or len(sys.group) != math.factorial(n):
        return False
    if not np.allclose(sys.unit_effect, np.ones(n), atol=atol):
        return False
    eye = np.eye(n)
    hit = [_match_vertex(sys, eye[i], atol) for i in range(n)]
    return None not in hit and len(set(hit)) == n


def apply_channel(ch: GptChannel, rho: GptState) -> GptState:
    """Apply a channel matrix to a state; linearity does the rest."""
    if rho.system is not ch.input_system and rho.system.dim != ch.input_system.dim:
        raise StructuralError("state dimension does not match channel input")
    return GptState(ch.output_system, ch.matrix @ rho.vec)


def group_channel(sys: TheorySystem, index: int) -> GptChannel:
    return GptChannel(sys, sys, sys.group[index])


# ---------------------------------------------------------------------------
# theory-definition files
# ---------------------------------------------------------------------------

def system_to_dict(sys: TheorySystem) -> dict:
    return {
        "dim": sys.dim,
        "unit_effect": sys.unit_effect.tolist(),
        "pure_states": [v.tolist() for v in sys.pure_states],
        "extremal_effects": [a.tolist() for a in sys.extremal_effects],
        "group": [u.tolist() for u in sys.group],
        "name": sys.name,
    }


def system_from_dict(data: dict, validate: bool = True) -> TheorySystem:
    try:
        sys = TheorySystem(
            dim=int(data["dim"]),
            unit_effect=data["unit_effect"],
            pure_states=tuple(data["pure_states"]),
            extremal_effects=tuple(data["extremal_effects"]),
            group=tuple(data["group"]),
            name=str(data.get("name", "custom")),
        )
    except KeyError as exc:
        raise StructuralError(f"theory definition is missing field {exc}") from exc
    if validate:
        report = validate_system(sys)
        if report:
            raise StructuralError("invalid theory definition: " + "; ".join(report))
    return sys


def load_system(path: str, validate: bool = True) -> TheorySystem:
    with open(path) as fh:
        data = json.load(fh)
    return system_from_dict(data, validate=validate)


def save_system(sys: TheorySystem, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(system_to_dict(sys), fh, indent=2)
