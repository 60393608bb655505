"""Bipartite no-signalling boxes in exact rational arithmetic.

Boxes are conditional probability tables p(ab|xy) with Fraction entries;
normalization, no-signalling, extremality, and the relabeling searches are
all exact identities, so equality is never tolerance-based here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import CapacityError, StructuralError

#: search bounds for the relabeling search
MAX_SETTINGS = 3
MAX_OUTCOMES = 5


class BoxInvariantError(ValueError):
    """The table violates normalization or no-signalling."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    raise StructuralError(f"box entries must be exact rationals, got {type(value).__name__}")


@dataclass(frozen=True)
class BoxState:
    """Conditional probability table, indexed table[a][b][x][y]."""

    n_x: int
    n_y: int
    d_a: int
    d_b: int
    table: tuple

    def prob(self, a: int, b: int, x: int, y: int) -> Fraction:
        return self.table[a][b][x][y]

    def sector(self, x: int, y: int) -> tuple:
        """The d_a x d_b matrix of outcome probabilities at settings (x, y)."""
        return tuple(tuple(self.table[a][b][x][y] for b in range(self.d_b))
                     for a in range(self.d_a))

    @staticmethod
    def from_function(n_x: int, n_y: int, d_a: int, d_b: int, fn) -> "BoxState":
        table = tuple(tuple(tuple(tuple(_frac(fn(a, b, x, y)) for y in range(n_y))
                                  for x in range(n_x))
                            for b in range(d_b))
                      for a in range(d_a))
        return BoxState(n_x, n_y, d_a, d_b, table)

    def validate(self) -> list[str]:
        """Exact normalization and no-signalling check; empty list when valid."""
        report = []
        for a in range(self.d_a):
            for b in range(self.d_b):
                for x in range(self.n_x):
                    for y in range(self.n_y):
                        if self.table[a][b][x][y] < 0:
                            report.append(f"negative entry p({a}{b}|{x}{y})")
        for x in range(self.n_x):
            for y in range(self.n_y):
                total = sum(self.table[a][b][x][y]
                            for a in range(self.d_a) for b in range(self.d_b))
                if total != 1:
                    report.append(f"sector ({x},{y}) sums to {total}, not 1")
        for a in range(self.d_a):
            for x in range(self.n_x):
                margs = [sum(self.table[a][b][x][y] for b in range(self.d_b))
                         for y in range(self.n_y)]
                if any(m != margs[0] for m in margs):
                    report.append(f"A-marginal p({a}|{x}) depends on y")
        for b in range(self.d_b):
            for y in range(self.n_y):
                margs = [sum(self.table[a][b][x][y] for a in range(self.d_a))
                         for x in range(self.n_x)]
                if any(m != margs[0] for m in margs):
                    report.append(f"B-marginal p({b}|{y}) depends on x")
        return report

    def require_valid(self) -> None:
        report = self.validate()
        if report:
            raise BoxInvariantError("; ".join(report))

    def to_dict(self) -> dict:
        return {
            "settings": [self.n_x, self.n_y],
            "outcomes": [self.d_a, self.d_b],
            "table": [[[[str(self.table[a][b][x][y]) for y in range(self.n_y)]
                        for x in range(self.n_x)]
                       for b in range(self.d_b)]
                      for a in range(self.d_a)],
        }

    @staticmethod
    def from_dict(data: dict, validate: bool = True) -> "BoxState":
        n_x, n_y = (int(v) for v in data["settings"])
        d_a, d_b = (int(v) for v in data["outcomes"])
        raw = data["table"]
        box = BoxState.from_function(
            n_x, n_y, d_a, d_b, lambda a, b, x, y: Fraction(raw[a][b][x][y]))
        if validate:
            box.require_valid()
        return box


@dataclass(frozen=True)
class LocalRelabeling:
    """Reversible local operation: permute settings and, per setting, outcomes.

    ``outcome_perms[x]`` applies to outcomes measured at the *original*
    setting x; the new setting label is ``setting_perm[x]``.
    """

    side: str
    setting_perm: tuple[int, ...]
    outcome_perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise StructuralError("side must be 'A' or 'B'")
        if sorted(self.setting_perm) != list(range(len(self.setting_perm))):
            raise StructuralError("setting_perm is not a permutation")
        if len(self.outcome_perms) != len(self.setting_perm):
            raise StructuralError("need one outcome permutation per setting")
        for perm in self.outcome_perms:
            if sorted(perm) != list(range(len(perm))):
                raise StructuralError("outcome permutation is not a bijection")

    @property
    def is_identity(self) -> bool:
        return (self.setting_perm == tuple(range(len(self.setting_perm)))
                and all(p == tuple(range(len(p))) for p in self.outcome_perms))

    def to_dict(self) -> dict:
        return {"side": self.side, "setting_perm": list(self.setting_perm),
                "outcome_perms": [list(p) for p in self.outcome_perms]}


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def standard_pr_box() -> BoxState:
    """The 2-setting/2-outcome box with a+b = xy mod 2, weight 1/2."""
    return BoxState.from_function(
        2, 2, 2, 2,
        lambda a, b, x, y: Fraction(1, 2) if (a + b) % 2 == x * y else Fraction(0))


def pr_box_k(k: int, d_a: int, d_b: int) -> BoxState:
    """The extremal-box family b - a = xy mod k on 2 settings.

    Outcomes at or above k never occur; entries are 1/k on the supported
    congruence class.
    """
    if not 2 <= k <= min(d_a, d_b):
        raise StructuralError(f"need 2 <= k <= min(d_a, d_b), got k={k}")

    def fn(a, b, x, y):
        if a < k and b < k and (b - a) % k == (x * y) % k:
            return Fraction(1, k)
        return Fraction(0)

    return BoxState.from_function(2, 2, d_a, d_b, fn)


# ---------------------------------------------------------------------------
# relabelings and party swap
# ---------------------------------------------------------------------------

def apply_relabeling(box: BoxState, r: LocalRelabeling) -> BoxState:
    """Relabel one side's settings and outcomes; no-signalling is preserved."""
    if r.side == "A":
        if len(r.setting_perm) != box.n_x or any(len(p) != box.d_a for p in r.outcome_perms):
            raise StructuralError("relabeling shape does not match the box")
    else:
        if len(r.setting_perm) != box.n_y or any(len(p) != box.d_b for p in r.outcome_perms):
            raise StructuralError("relabeling shape does not match the box")

    entries = {}
    for a in range(box.d_a):
        for b in range(box.d_b):
            for x in range(box.n_x):
                for y in range(box.n_y):
                    if r.side == "A":
                        key = (r.outcome_perms[x][a], b, r.setting_perm[x], y)
                    else:
                        key = (a, r.outcome_perms[y][b], x, r.setting_perm[y])
                    entries[key] = box.table[a][b][x][y]
    out = BoxState.from_function(box.n_x, box.n_y, box.d_a, box.d_b,
                                 lambda a, b, x, y: entries[(a, b, x, y)])
    out.require_valid()
    return out


def swap_parties(box: BoxState) -> BoxState:
    """Exchange the roles of the parties: x <-> y together with a <-> b."""
    out = BoxState.from_function(box.n_y, box.n_x, box.d_b, box.d_a,
                                 lambda a, b, x, y: box.table[b][a][y][x])
    out.require_valid()
    return out


# ---------------------------------------------------------------------------
# extremality
# ---------------------------------------------------------------------------

def _int_rank(rows: list[list[int]]) -> int:
    """Exact rank of an integer matrix (fraction-free Gaussian elimination)."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    n_cols = len(m[0])
    rank = 0
    row = 0
    prev = 1
    for col in range(n_cols):
        pivot = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        for i in range(row + 1, len(m)):
            for j in range(col + 1, n_cols):
                m[i][j] = (m[row][col] * m[i][j] - m[i][col] * m[row][j]) // prev
            m[i][col] = 0
        prev = m[row][col]
        rank += 1
        row += 1
        if row == len(m):
            break
    return rank


def is_extreme(box: BoxState) -> bool:
    """Vertex test for the no-signalling polytope, exactly.

    The box is extreme iff the constraints active at it (zero entries,
    sector normalization, and the no-signalling equalities) pin it down
    uniquely, i.e. their normals span the full table space.
    """
    box.require_valid()
    index = {}
    free = []
    for a in range(box.d_a):
        for b in range(box.d_b):
            for x in range(box.n_x):
                for y in range(box.n_y):
                    if box.table[a][b][x][y] != 0:
                        index[(a, b, x, y)] = len(free)
                        free.append((a, b, x, y))
    n_free = len(free)
    if n_free == 0:
        return True

    rows: list[list[int]] = []

    def add_row(coeffs: dict) -> None:
        row = [0] * n_free
        nonzero = False
        for key, c in coeffs.items():
            if key in index:
                row[index[key]] = c
                nonzero = True
        if nonzero:
            rows.append(row)

    for x in range(box.n_x):
        for y in range(box.n_y):
            add_row({(a, b, x, y): 1 for a in range(box.d_a) for b in range(box.d_b)})
    for a in range(box.d_a):
        for x in range(box.n_x):
            for y in range(box.n_y - 1):
                coeffs = {(a, b, x, y): 1 for b in range(box.d_b)}
                for b in range(box.d_b):
                    coeffs[(a, b, x, y + 1)] = coeffs.get((a, b, x, y + 1), 0) - 1
                add_row(coeffs)
    for b in range(box.d_b):
        for y in range(box.n_y):
            for x in range(box.n_x - 1):
                coeffs = {(a, b, x, y): 1 for a in range(box.d_a)}
                for a in range(box.d_a):
                    coeffs[(a, b, x + 1, y)] = coeffs.get((a, b, x + 1, y), 0) - 1
                add_row(coeffs)

    return _int_rank(rows) == n_free


# ---------------------------------------------------------------------------
# local exchangeability
# ---------------------------------------------------------------------------

def _row_multiset_bijections(src, tgt):
    """Row bijections sigma with sorted(tgt[sigma(a)]) = sorted(src[a])."""
    n = len(src)
    src_keys = [tuple(sorted(row)) for row in src]
    tgt_keys = [tuple(sorted(row)) for row in tgt]
    candidates = [[a2 for a2 in range(n) if tgt_keys[a2] == src_keys[a]] for a in range(n)]

    def backtrack(a, used, acc):
        if a == n:
            yield tuple(acc)
            return
        for a2 in candidates[a]:
            if a2 not in used:
                used.add(a2)
                acc.append(a2)
                yield from backtrack(a + 1, used, acc)
                acc.pop()
                used.remove(a2)

    yield from backtrack(0, set(), [])


def _col_matchings(src, tgt, row_perm):
    """Column bijections tau with tgt[row_perm[a]][tau(b)] = src[a][b]."""
    n_rows, n_cols = len(src), len(src[0])
    src_cols = [tuple(src[a][b] for a in range(n_rows)) for b in range(n_cols)]
    tgt_cols = [tuple(tgt[row_perm[a]][b] for a in range(n_rows)) for b in range(n_cols)]
    candidates = [[b2 for b2 in range(n_cols) if tgt_cols[b2] == src_cols[b]]
                  for b in range(n_cols)]

    def backtrack(b, used, acc):
        if b == n_cols:
            yield tuple(acc)
            return
        for b2 in candidates[b]:
            if b2 not in used:
                used.add(b2)
                acc.append(b2)
                yield from backtrack(b + 1, used, acc)
                acc.pop()
                used.remove(b2)

    yield from backtrack(0, set(), [])


def _row_matchings(src, tgt, col_perm):
    """Row bijections sigma with tgt[sigma(a)][col_perm[b]] = src[a][b]."""
    n_rows = len(src)
    src_rows = [tuple(src[a]) for a in range(n_rows)]
    tgt_rows = [tuple(tgt[a2][col_perm[b]] for b in range(len(src[0])))
                for a2 in range(n_rows)]
    candidates = [[a2 for a2 in range(n_rows) if tgt_rows[a2] == src_rows[a]]
                  for a in range(n_rows)]

    def backtrack(a, used, acc):
        if a == n_rows:
            yield tuple(acc)
            return
        for a2 in candidates[a]:
            if a2 not in used:
                used.add(a2)
                acc.append(a2)
                yield from backtrack(a + 1, used, acc)
                acc.pop()
                used.remove(a2)

    yield from backtrack(0, set(), [])


def check_local_exchangeability(box: BoxState, require_extreme: bool = True
                                ) -> tuple[LocalRelabeling, LocalRelabeling] | None:
    """Search for local relabelings realizing the party swap on this box.

    Returns a pair (r_A, r_B) with (r_A x r_B)(box) = swap_parties(box)
    exactly, or None when no such pair exists.  The search is identity-first
    and exact; setting permutations are enumerated, outcome permutations are
    derived sector by sector from the first column/row of settings.
    """
    box.require_valid()
    if box.n_x > MAX_SETTINGS or box.n_y > MAX_SETTINGS \
            or box.d_a > MAX_OUTCOMES or box.d_b > MAX_OUTCOMES:
        raise CapacityError("relabeling search is bounded to settings <= 3, outcomes <= 5")
    if require_extreme and not is_extreme(box):
        raise StructuralError("box is not an extreme point; pass require_extreme=False to waive")

    target = swap_parties(box)
    if (box.n_x, box.n_y, box.d_a, box.d_b) != (target.n_x, target.n_y, target.d_a, target.d_b):
        return None

    sectors = {(x, y): box.sector(x, y) for x in range(box.n_x) for y in range(box.n_y)}

    for pi_x in itertools.permutations(range(box.n_x)):
        for pi_y in itertools.permutations(range(box.n_y)):
            tgt = {(x, y): target.sector(pi_x[x], pi_y[y])
                   for x in range(box.n_x) for y in range(box.n_y)}
            for sigma0 in _row_multiset_bijections(sectors[(0, 0)], tgt[(0, 0)]):
                tau_options = []
                for y in range(box.n_y):
                    opts = list(_col_matchings(sectors[(0, y)], tgt[(0, y)], sigma0))
                    if not opts:
                        tau_options = None
                        break
                    tau_options.append(opts)
                if tau_options is None:
                    continue
                for taus in itertools.product(*tau_options):
                    sigma_options = [[sigma0]]
                    for x in range(1, box.n_x):
                        opts = list(_row_matchings(sectors[(x, 0)], tgt[(x, 0)], taus[0]))
                        if not opts:
                            sigma_options = None
                            break
                        sigma_options.append(opts)
                    if sigma_options is None:
                        continue
                    for sigmas in itertools.product(*sigma_options):
                        ok = all(
                            tgt[(x, y)][sigmas[x][a]][taus[y][b]] == sectors[(x, y)][a][b]
                            for x in range(box.n_x) for y in range(box.n_y)
                            for a in range(box.d_a) for b in range(box.d_b))
                        if ok:
                            r_a = LocalRelabeling("A", pi_x, tuple(sigmas))
                            r_b = LocalRelabeling("B", pi_y, tuple(taus))
                            check = apply_relabeling(apply_relabeling(box, r_a), r_b)
                            if check == target:
                                return r_a, r_b
    return None
