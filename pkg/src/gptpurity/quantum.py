"""Finite-dimensional quantum backend.

Density matrices, purifications (plain and symmetric), Schmidt data, the
majorization convertibility test for pure bipartite states, swap-realizing
local channel pairs, random-unitary mixing synthesis, the steering-based
one-way protocol construction, and the convex-roof entanglement measure
for two qubits.

Conventions: a pure bipartite vector is stored against the product basis
|i>|j> with the B index fastest, so its coefficient matrix is the d_A x d_B
reshape.  Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import StructuralError
from .mixedness import birkhoff_rare_synthesis, majorizes

HERM_TOL = 1e-10
RANK_TOL = 1e-12


def _entropy_bits(p: np.ndarray) -> float:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    nz = p[p > 1e-15]
    return float(-np.sum(nz * np.log2(nz)))


def _h2(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    out[m] = -x[m] * np.log2(x[m]) - (1.0 - x[m]) * np.log2(1.0 - x[m])
    return out


def _eig_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition sorted by descending eigenvalue, deterministically.

    Ties are broken by the lexicographic order of the rounded eigenvector
    components; every eigenvector's first significant component is made
    real positive.
    """
    vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-9)
        if idx.size:
            phase = col[idx[0]] / abs(col[idx[0]])
            vecs[:, k] = col / phase
    # order degenerate blocks by rounded components
    start = 0
    while start < vals.size:
        stop = start + 1
        while stop < vals.size and abs(vals[stop] - vals[start]) < 1e-10:
            stop += 1
        if stop - start > 1:
            keys = [tuple(np.round(vecs[:, k], 8).view(float)) for k in range(start, stop)]
            perm = sorted(range(stop - start), key=lambda i: keys[i])
            vecs[:, start:stop] = vecs[:, [start + i for i in perm]]
        start = stop
    return vals, vecs


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD matrix with trace at most one."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError(f"density matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise StructuralError("matrix is not Hermitian within 1e-10")
        vals = np.linalg.eigvalsh(m)
        if vals.min() < -1e-10:
            raise StructuralError(f"matrix has negative eigenvalue {vals.min():.3e}")
        tr = float(np.trace(m).real)
        if not -1e-10 <= tr <= 1.0 + 1e-10:
            raise StructuralError(f"trace {tr:.6f} outside [0, 1]")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, descending, clipped to be nonnegative."""
        vals = np.linalg.eigvalsh(self.matrix)[::-1]
        return np.clip(vals, 0.0, None)

    @staticmethod
    def pure(vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))

    @staticmethod
    def diagonal(p) -> "DensityMatrix":
        return DensityMatrix(np.diag(np.asarray(p, dtype=complex)))

    @staticmethod
    def maximally_mixed(d: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(d, dtype=complex) / d)


@dataclass(frozen=True, eq=False)
class PureBipartiteState:
    """Unit vector on a d_A x d_B tensor product."""

    dims: tuple[int, int]
    vec: np.ndarray

    def __post_init__(self):
        da, db = self.dims
        v = np.asarray(self.vec, dtype=complex).reshape(-1)
        if v.shape[0] != da * db:
            raise StructuralError(f"vector length {v.shape[0]} != {da}*{db}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise StructuralError("state vector is not normalized within 1e-10")
        v.flags.writeable = False
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "dims", (int(da), int(db)))

    def coefficient_matrix(self) -> np.ndarray:
        return self.vec.reshape(self.dims)

    @staticmethod
    def from_matrix(m) -> "PureBipartiteState":
        m = np.asarray(m, dtype=complex)
        return PureBipartiteState(m.shape, m.reshape(-1))


def maximally_entangled(d: int) -> PureBipartiteState:
    """Uniform-Schmidt state on d x d."""
    return PureBipartiteState.from_matrix(np.eye(d, dtype=complex) / np.sqrt(d))


@dataclass(frozen=True, eq=False)
class SchmidtData:
    """Schmidt form: coefficients and the biorthogonal bases, as columns."""

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if np.any(np.diff(c) > 1e-12) or c.min() < -1e-12:
            raise StructuralError("Schmidt coefficients must be nonnegative descending")
        if abs(np.sum(c ** 2) - 1.0) > 1e-9:
            raise StructuralError("squared Schmidt coefficients must sum to 1")
        for name, b in (("left_basis", self.left_basis), ("right_basis", self.right_basis)):
            gram = np.asarray(b).conj().T @ np.asarray(b)
            if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
                raise StructuralError(f"{name} is not orthonormal within 1e-10")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "left_basis", np.asarray(self.left_basis, dtype=complex))
        object.__setattr__(self, "right_basis", np.asarray(self.right_basis, dtype=complex))

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > RANK_TOL))

    def squared(self) -> np.ndarray:
        return self.coefficients ** 2

    def reconstruct(self) -> np.ndarray:
        m = (self.left_basis * self.coefficients) @ self.right_basis.T
        return m.reshape(-1)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving channel given by Kraus operators."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise StructuralError("channel needs at least one Kraus operator")
        din = ops[0].shape[1]
        total = np.zeros((din, din), dtype=complex)
        for k in ops:
            if k.shape[1] != din:
                raise StructuralError("Kraus operators disagree on input dimension")
            total += k.conj().T @ k
        if np.max(np.abs(total - np.eye(din))) > 1e-9:
            raise StructuralError("Kraus operators do not preserve the trace within 1e-9")
        object.__setattr__(self, "operators", ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ k.conj().T for k in self.operators)


@dataclass(frozen=True, eq=False)
class OneWayProtocol:
    """Bob's instrument plus Alice's conditional unitary corrections."""

    bob_instrument: tuple[np.ndarray, ...]
    alice_corrections: tuple[np.ndarray, ...]
    outcome_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bob_instrument",
                           tuple(np.asarray(b, dtype=complex) for b in self.bob_instrument))
        object.__setattr__(self, "alice_corrections",
                           tuple(np.asarray(a, dtype=complex) for a in self.alice_corrections))
        object.__setattr__(self, "outcome_probs",
                           np.asarray(self.outcome_probs, dtype=float))
        if not (len(self.bob_instrument) == len(self.alice_corrections)
                == self.outcome_probs.size):
            raise StructuralError("protocol branch counts disagree")

    def completeness_residual(self) -> float:
        db = self.bob_instrument[0].shape[1]
        total = sum(b.conj().T @ b for b in self.bob_instrument)
        return float(np.max(np.abs(total - np.eye(db))))

    def outcome_residuals(self, psi: "PureBipartiteState",
                          target: "PureBipartiteState") -> np.ndarray:
        """Per-outcome norm of (A_i x B_i)|psi> - sqrt(p_i) * phase * |target>."""
        m = psi.coefficient_matrix()
        out = []
        for a, b, p in zip(self.alice_corrections, self.bob_instrument, self.outcome_probs):
            branch = (a @ m @ b.T).reshape(-1)
            overlap = np.vdot(target.vec, branch)
            phase = overlap / abs(overlap) if abs(overlap) > 1e-14 else 1.0
            out.append(np.linalg.norm(branch - np.sqrt(p) * phase * target.vec))
        return np.array(out)

    def verify(self, psi: "PureBipartiteState", target: "PureBipartiteState",
               atol: float = 1e-8) -> bool:
        if self.completeness_residual() > 1e-9:
            return False
        return bool(np.all(self.outcome_residuals(psi, target) <= atol))


# ---------------------------------------------------------------------------
# basic operations
# ---------------------------------------------------------------------------

def schmidt_decompose(psi: PureBipartiteState) -> SchmidtData:
    """SVD of the coefficient matrix, with a deterministic phase convention.

    The first significant component of every left vector is made real
    positive; the compensating phase is pushed into the right vector.
    """
    m = psi.coefficient_matrix()
    u, s, vh = np.linalg.svd(m)
    r = min(psi.dims)
    u, s, vh = u[:, :r], s[:r], vh[:r, :]
    right = vh.T  # kets, as columns: psi = sum_k s_k u[:,k] (x) right[:,k]
    for k in range(r):
        col = u[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-9)
        if idx.size:
            phase = col[idx[0]] / abs(col[idx[0]])
            u[:, k] = col / phase
            right[:, k] = right[:, k] * phase
    return SchmidtData(s, u, right)


def marginals(psi: PureBipartiteState) -> tuple[DensityMatrix, DensityMatrix]:
    """Partial traces over B and over A.

    The nonzero parts of the two spectra always agree for a pure state,
    and this is asserted within 1e-9.
    """
    m = psi.coefficient_matrix()
    rho_a = m @ m.conj().T
    rho_b = (m.conj().T @ m).T
    da, db = psi.dims
    r = min(da, db)
    sa = np.sort(np.linalg.eigvalsh(rho_a))[::-1][:r]
    sb = np.sort(np.linalg.eigvalsh(rho_b))[::-1][:r]
    if np.max(np.abs(sa - sb)) > 1e-9:
        raise RuntimeError("marginal spectra of a pure state disagree; numerical failure")
    return DensityMatrix(rho_a), DensityMatrix(rho_b)


def purify(rho: DensityMatrix) -> PureBipartiteState:
    """Standard purification sum_i sqrt(p_i) |e_i>|i> on a twin-dimension system."""
    if abs(rho.trace - 1.0) > 1e-10:
        raise StructuralError("purify requires a normalized density matrix")
    vals, vecs = _eig_desc(rho.matrix)
    m = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return PureBipartiteState.from_matrix(m)


def symmetric_purify(rho: DensityMatrix) -> PureBipartiteState:
    """Purification on a twin system with *both* marginals equal to rho.

    Written in the eigenbasis, sum_i sqrt(p_i) |e_i>|e_i> with the second
    factor carried as coordinates, so the coefficient matrix is the
    symmetric matrix E sqrt(diag p) E^T.
    """
    if abs(rho.trace - 1.0) > 1e-10:
        raise StructuralError("symmetric_purify requires a normalized density matrix")
    vals, vecs = _eig_desc(rho.matrix)
    m = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return PureBipartiteState.from_matrix(m)


def schmidt_squared(psi: PureBipartiteState) -> np.ndarray:
    s = np.linalg.svd(psi.coefficient_matrix(), compute_uv=False)
    return s ** 2


def nielsen_convertible(psi: PureBipartiteState, target: PureBipartiteState) -> bool:
    """LOCC convertibility test for pure states: majorization of Schmidt weights.

    True iff the squared-Schmidt vector of ``psi`` is majorized by that of
    ``target`` (vectors zero-padded to a common length).
    """
    p = schmidt_squared(psi)
    q = schmidt_squared(target)
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size))
    q = np.pad(q, (0, n - q.size))
    p, q = p / p.sum(), q / q.sum()
    return majorizes(q, p)


def lu_equivalent(psi: PureBipartiteState, other: PureBipartiteState,
                  atol: float = 1e-9) -> bool:
    """Equivalence under local reversible transformations: equal Schmidt weights."""
    if psi.dims != other.dims:
        raise StructuralError("lu_equivalent requires equal dims")
    p = np.sort(schmidt_squared(psi))[::-1]
    q = np.sort(schmidt_squared(other))[::-1]
    return bool(np.max(np.abs(p - q)) <= atol)


def local_exchange_channels(psi: PureBipartiteState) -> tuple[KrausChannel, KrausChannel]:
    """Channel pair (C: A->B, D: B->A) realizing the swap on |psi><psi|.

    Built from the Schmidt bases: the partial isometry mapping each left
    vector to its right partner, completed with the projector onto the
    orthocomplement of its support.  Only the square case d_A = d_B is
    supported; rectangular systems would need an isometric embedding.
    """
    da, db = psi.dims
    if da != db:
        raise StructuralError("local_exchange_channels supports d_A = d_B only")
    sd = schmidt_decompose(psi)
    r = sd.rank
    alpha = sd.left_basis[:, :r]
    beta = sd.right_basis[:, :r]
    c = beta @ alpha.conj().T
    d = alpha @ beta.conj().T
    proj_a = np.eye(da) - alpha @ alpha.conj().T
    proj_b = np.eye(db) - beta @ beta.conj().T
    chan_c = KrausChannel((c, proj_a))
    chan_d = KrausChannel((d, proj_b))
    return chan_c, chan_d


def swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def product_channel_apply(chan_a: KrausChannel, chan_b: KrausChannel,
                          rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for ka in chan_a.operators:
        for kb in chan_b.operators:
            k = np.kron(ka, kb)
            out = out + k @ rho @ k.conj().T
    return out


# ---------------------------------------------------------------------------
# RaRe synthesis and the one-way protocol
# ---------------------------------------------------------------------------

def rare_synthesis_quantum(rho: DensityMatrix, source: DensityMatrix
                           ) -> list[tuple[float, np.ndarray]]:
    """Weights and unitaries with sum_i w_i U_i source U_i^dag = rho.

    Requires the spectrum of ``source`` to majorize the spectrum of ``rho``.
    The classical core runs on the two spectra; each permutation is then
    conjugated by the pair of eigenbases.
    """
    if rho.dim != source.dim:
        raise StructuralError("dimension mismatch")
    p = np.clip(rho.spectrum(), 0.0, None)
    q = np.clip(source.spectrum(), 0.0, None)
    if not majorizes(q, p):
        raise StructuralError("precondition failed: spectrum of source must majorize target")
    _, v = _eig_desc(rho.matrix)
    _, w = _eig_desc(source.matrix)
    channel = birkhoff_rare_synthesis(q, p)
    out = []
    for weight, k in channel.entries:
        perm = channel.system.group[k]
        out.append((weight, v @ perm @ w.conj().T))
    mix = sum(wt * u @ source.matrix @ u.conj().T for wt, u in out)
    if np.max(np.abs(mix - rho.matrix)) > 1e-9:
        raise RuntimeError("synthesized mixture misses the target density matrix")
    return out


def _connecting_unitary(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Unitary T with M1 T = M2, for matrices with equal row Gram M M^dag.

    The partial isometry pinv(M1) M2 does the job on the row space; it is
    completed by any isometry between the kernels.
    """
    x0 = np.linalg.pinv(m1, rcond=1e-12) @ m2
    def kernel(m):
        _, s, vh = np.linalg.svd(m)
        r = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
        return vh[r:].conj().T
    k1, k2 = kernel(m1), kernel(m2)
    t = x0 + k1 @ k2.conj().T
    if np.max(np.abs(t.conj().T @ t - np.eye(t.shape[0]))) > 1e-8:
        raise RuntimeError("connecting map failed to complete to a unitary; "
                           "row Grams probably differ")
    return t


def connecting_local_unitary(psi: PureBipartiteState,
                             other: PureBipartiteState) -> np.ndarray:
    """Unitary W on B with (I x W) psi = other, for equal-marginal purifications."""
    if psi.dims != other.dims:
        raise StructuralError("purifications must share dims")
    t = _connecting_unitary(psi.coefficient_matrix(), other.coefficient_matrix())
    return t.T


def one_way_locc_from_rare(psi: PureBipartiteState, target: PureBipartiteState,
                           rare: list[tuple[float, np.ndarray]],
                           atol: float = 1e-8) -> OneWayProtocol:
    """One-way protocol converting psi into target, from a RaRe witness.

    ``rare`` must satisfy sum_i w_i U_i rho' U_i^dag = rho, where rho and
    rho' are the A-marginals of psi and target.  The construction purifies
    the mixture sum_i w_i (U_i x I)|target> with a register of one dimension
    per branch, connects it to psi x |0> by a unitary on B x register, and
    reads Bob's instrument off the register index; Alice's corrections are
    the inverses of the mixing unitaries.
    """
    if psi.dims != target.dims:
        raise StructuralError("states must share dims")
    da, db = psi.dims
    rho = marginals(psi)[0].matrix
    rho_p = marginals(target)[0].matrix
    weights = np.array([w for w, _ in rare])
    if weights.min() < -1e-12 or abs(weights.sum() - 1.0) > 1e-9:
        raise StructuralError("rare weights must be a probability distribution")
    mix = sum(w * u @ rho_p @ u.conj().T for w, u in rare)
    if np.max(np.abs(mix - rho)) > atol:
        raise StructuralError("rare decomposition does not map target marginal "
                              "to source marginal within tolerance")

    n = len(rare)
    m_psi = psi.coefficient_matrix()
    m_tgt = target.coefficient_matrix()
    # coefficient matrices on A x (B x C), register index fastest
    m1 = np.zeros((da, db * n), dtype=complex)
    m1[:, 0::n] = m_psi
    m2 = np.zeros((da, db * n), dtype=complex)
    for i, (w, u) in enumerate(rare):
        m2[:, i::n] = np.sqrt(w) * (u @ m_tgt)
    t = _connecting_unitary(m1, m2)
    w_unitary = t.T  # acts on the B x C factor
    bob = []
    for i in range(n):
        # B_i = (I_B x <i|_C) W (I_B x |0>_C)
        bob.append(w_unitary[i::n, 0::n].copy())
    alice = [u.conj().T for _, u in rare]
    return OneWayProtocol(tuple(bob), tuple(alice), weights)


# ---------------------------------------------------------------------------
# entanglement measures
# ---------------------------------------------------------------------------

def entanglement_entropy(psi: PureBipartiteState) -> float:
    """Entropy of entanglement in bits: Shannon entropy of Schmidt weights."""
    return _entropy_bits(schmidt_squared(psi))


def _member_cost(q: np.ndarray, det2: np.ndarray) -> np.ndarray:
    # weight times marginal entropy of each subnormalized two-qubit member,
    # with the marginal eigenvalues in closed form from |det| and the norm
    out = np.zeros_like(q)
    good = q > 1e-14
    disc = np.sqrt(np.clip(1.0 - 4.0 * det2[good] / q[good] ** 2, 0.0, 1.0))
    out[good] = q[good] * _h2((1.0 - disc) / 2.0)
    return out


def _ensemble_cost(phi: np.ndarray) -> float:
    q = (np.abs(phi) ** 2).sum(axis=1)
    m = phi.reshape(-1, 2, 2)
    det2 = np.abs(m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]) ** 2
    return float(np.sum(_member_cost(q, det2)))


def _pair_costs(phi_i, phi_j, cs, ss, ea):
    # cost of rows (i, j) after the 2x2 mixing [[c, s e^{ia}], [-s e^{-ia}, c]],
    # evaluated on whole grids at once via the pair invariants
    di = phi_i[0] * phi_i[3] - phi_i[1] * phi_i[2]
    dj = phi_j[0] * phi_j[3] - phi_j[1] * phi_j[2]
    mix = (phi_i[0] * phi_j[3] + phi_j[0] * phi_i[3]
           - phi_i[1] * phi_j[2] - phi_j[1] * phi_i[2])
    qi = float(np.vdot(phi_i, phi_i).real)
    qj = float(np.vdot(phi_j, phi_j).real)
    h = np.vdot(phi_i, phi_j)
    det1 = cs ** 2 * di + ss ** 2 * ea ** 2 * dj + cs * ss * ea * mix
    q1 = cs ** 2 * qi + ss ** 2 * qj + 2 * cs * ss * (ea * h).real
    det2 = ss ** 2 * np.conj(ea) ** 2 * di + cs ** 2 * dj - cs * ss * np.conj(ea) * mix
    q2 = ss ** 2 * qi + cs ** 2 * qj - 2 * cs * ss * (ea * h).real
    return (_member_cost(q1.ravel(), np.abs(det1.ravel()) ** 2)
            + _member_cost(q2.ravel(), np.abs(det2.ravel()) ** 2))


def _orthonormalize(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r).copy()
    d = np.where(np.abs(d) > 1e-14, d / np.abs(d), 1.0)
    return q * d


def entanglement_of_formation(rho: DensityMatrix, members: int = 6,
                              starts: int = 3, seed: int = 11,
                              sweeps: int = 60) -> float:
    """Convex-roof entanglement of formation for a two-qubit state, in ebits.

    Minimizes the ensemble-average marginal entropy over decompositions of
    rho, parameterized by isometries applied to the eigen-ensemble.  The
    search runs Jacobi-style sweeps of pairwise two-member mixings (grid
    searched, using closed-form pair invariants), then polishes each start
    with L-BFGS over the isometry parameters.  Multi-start with a fixed
    seed schedule keeps the result deterministic.
    """
    if rho.dim != 4:
        raise StructuralError("entanglement_of_formation supports 2x2 systems only")
    if abs(rho.trace - 1.0) > 1e-10:
        raise StructuralError("state must be normalized")
    vals, vecs = _eig_desc(rho.matrix)
    keep = vals > RANK_TOL
    lam, v = vals[keep], vecs[:, keep]
    r = int(lam.size)
    roots = (v * np.sqrt(lam)).T            # (r, 4) subnormalized eigen-members
    if r == 1:
        return _ensemble_cost(roots)
    m = max(members, r)
    rng = np.random.default_rng(seed)
    thetas = np.linspace(0.0, np.pi / 2, 19)
    alphas = np.linspace(0.0, 2 * np.pi, 19, endpoint=False)
    th, al = np.meshgrid(thetas, alphas, indexing="ij")
    cs, ss, ea = np.cos(th), np.sin(th), np.exp(1j * al)

    best = np.inf
    for s in range(starts):
        phi = np.zeros((m, 4), dtype=complex)
        phi[:r] = roots
        if s > 0:
            w = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))[0]
            phi = w @ phi
        for _ in range(sweeps):
            improved = False
            for i in range(m):
                for j in range(i + 1, m):
                    base = _ensemble_cost(phi[[i, j]])
                    grid = _pair_costs(phi[i], phi[j], cs, ss, ea)
                    k = int(np.argmin(grid))
                    if grid[k] < base - 1e-10:
                        t0, a0 = th.ravel()[k], al.ravel()[k]
                        c0, s0, e0 = np.cos(t0), np.sin(t0), np.exp(1j * a0)
                        phi[i], phi[j] = (c0 * phi[i] + s0 * e0 * phi[j],
                                          -s0 * np.conj(e0) * phi[i] + c0 * phi[j])
                        improved = True
            if not improved:
                break
        best = min(best, _ensemble_cost(phi))
        # polish: smooth local descent over the recovered isometry
        v_iso = phi @ np.linalg.pinv(roots)

        def objective(params):
            z = (params[:m * r] + 1j * params[m * r:]).reshape(m, r)
            return _ensemble_cost(_orthonormalize(z) @ roots)

        p0 = np.concatenate([v_iso.real.ravel(), v_iso.imag.ravel()])
        res = minimize(objective, p0, method="L-BFGS-B",
                       options={"maxiter": 300, "ftol": 1e-14, "gtol": 1e-11})
        best = min(best, float(res.fun))
    return float(best)


@dataclass(frozen=True)
class ErasureCertificate:
    """2-norm witness for (im)possibility of catalytic erasure."""

    possible: bool
    purity: float
    margin: float

    def __bool__(self) -> bool:
        return self.possible

    def to_dict(self) -> dict:
        return {"possible": self.possible, "purity": self.purity, "margin": self.margin}


def catalytic_erasure_possible(rho: DensityMatrix) -> ErasureCertificate:
    """Erasure with any catalyst is possible iff the state is already pure.

    Random-unitary mixing cannot increase Tr(rho^2) while erasure of a mixed
    state would; the certificate reports Tr(rho^2) and the strict-inequality
    margin 1 - Tr(rho^2).
    """
    if abs(rho.trace - 1.0) > 1e-10:
        raise StructuralError("state must be normalized")
    purity = rho.purity()
    margin = max(0.0, 1.0 - purity)
    return ErasureCertificate(possible=purity >= 1.0 - 1e-9, purity=purity, margin=margin)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def random_pure_state(dims: tuple[int, int], rng: np.random.Generator) -> PureBipartiteState:
    da, db = dims
    v = rng.normal(size=da * db) + 1j * rng.normal(size=da * db)
    return PureBipartiteState(dims, v / np.linalg.norm(v))


def random_density_matrix(d: int, rng: np.random.Generator,
                          rank: int | None = None) -> DensityMatrix:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
