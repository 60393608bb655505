import numpy as np
import pytest

from gptpurity import quantum
from gptpurity.core import StructuralError
from gptpurity.quantum import (DensityMatrix, PureBipartiteState,
                               catalytic_erasure_possible, connecting_local_unitary,
                               entanglement_entropy, entanglement_of_formation,
                               local_exchange_channels, lu_equivalent, marginals,
                               maximally_entangled, nielsen_convertible,
                               one_way_locc_from_rare, product_channel_apply, purify,
                               random_density_matrix, random_pure_state, random_unitary,
                               rare_synthesis_quantum, schmidt_decompose, swap_operator,
                               symmetric_purify)

from oracles import wootters_eof


def bell() -> PureBipartiteState:
    return PureBipartiteState((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def two_qubit(a: float, b: float) -> PureBipartiteState:
    return PureBipartiteState((2, 2), np.array([np.sqrt(a), 0, 0, np.sqrt(b)]))


# -- Schmidt ------------------------------------------------------------------

def test_schmidt_bell():
    sd = schmidt_decompose(bell())
    np.testing.assert_allclose(sd.coefficients, [1 / np.sqrt(2)] * 2, atol=1e-12)


def test_schmidt_product_state():
    psi = PureBipartiteState((2, 2), [0, 1, 0, 0])  # |0> x |1>
    sd = schmidt_decompose(psi)
    np.testing.assert_allclose(sd.coefficients, [1.0, 0.0], atol=1e-12)


def test_schmidt_prepared_coefficients():
    sd = schmidt_decompose(two_qubit(0.8, 0.2))
    np.testing.assert_allclose(sd.coefficients, [np.sqrt(0.8), np.sqrt(0.2)], atol=1e-12)


def test_schmidt_reconstruction_and_phase_convention():
    rng = np.random.default_rng(4)
    for da, db in ((2, 2), (3, 3), (2, 4), (4, 3)):
        psi = random_pure_state((da, db), rng)
        sd = schmidt_decompose(psi)
        np.testing.assert_allclose(sd.reconstruct(), psi.vec, atol=1e-9)
        for k in range(sd.rank):
            first = sd.left_basis[np.flatnonzero(np.abs(sd.left_basis[:, k]) > 1e-9)[0], k]
            assert abs(first.imag) < 1e-9 and first.real > 0


# -- marginals and purifications -----------------------------------------------

def test_bell_marginals_maximally_mixed():
    rho_a, rho_b = marginals(bell())
    np.testing.assert_allclose(rho_a.matrix, np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(rho_b.matrix, np.eye(2) / 2, atol=1e-12)


def test_product_state_marginals_pure():
    rho_a, _ = marginals(PureBipartiteState((2, 2), [0, 1, 0, 0]))
    assert abs(rho_a.purity() - 1.0) < 1e-12


def test_prepared_state_marginals_diagonal():
    rho_a, rho_b = marginals(two_qubit(0.8, 0.2))
    np.testing.assert_allclose(rho_a.matrix, np.diag([0.8, 0.2]), atol=1e-12)
    np.testing.assert_allclose(rho_b.matrix, np.diag([0.8, 0.2]), atol=1e-12)


def test_marginal_spectra_agree_on_random_states():
    rng = np.random.default_rng(6)
    for _ in range(50):
        da, db = rng.integers(2, 5, size=2)
        psi = random_pure_state((int(da), int(db)), rng)
        rho_a, rho_b = marginals(psi)
        r = min(int(da), int(db))
        sa = np.sort(np.linalg.eigvalsh(rho_a.matrix))[::-1][:r]
        sb = np.sort(np.linalg.eigvalsh(rho_b.matrix))[::-1][:r]
        np.testing.assert_allclose(sa, sb, atol=1e-9)


def test_purify_marginal():
    rng = np.random.default_rng(7)
    for d in (2, 3, 4):
        rho = random_density_matrix(d, rng)
        psi = purify(rho)
        np.testing.assert_allclose(marginals(psi)[0].matrix, rho.matrix, atol=1e-10)


def test_purify_pure_state_gives_product():
    psi = purify(DensityMatrix.pure([0.6, 0.8j]))
    assert abs(entanglement_entropy(psi)) < 1e-12


def test_symmetric_purify_both_marginals():
    rng = np.random.default_rng(8)
    for d in (2, 3, 4):
        rho = random_density_matrix(d, rng)
        psi = symmetric_purify(rho)
        rho_a, rho_b = marginals(psi)
        np.testing.assert_allclose(rho_a.matrix, rho.matrix, atol=1e-10)
        np.testing.assert_allclose(rho_b.matrix, rho.matrix, atol=1e-10)


def test_symmetric_purify_diagonal_example():
    psi = symmetric_purify(DensityMatrix.diagonal([0.8, 0.2]))
    expected = np.array([np.sqrt(0.8), 0, 0, np.sqrt(0.2)])
    assert min(np.linalg.norm(psi.vec - expected),
               np.linalg.norm(psi.vec + expected)) < 1e-9


def test_purify_maximally_mixed_is_bell_like():
    psi = purify(DensityMatrix.maximally_mixed(2))
    assert abs(entanglement_entropy(psi) - 1.0) < 1e-12


def test_purification_uniqueness_witness():
    rng = np.random.default_rng(9)
    for d in (2, 3):
        rho = random_density_matrix(d, rng)
        psi1 = purify(rho)
        v = random_unitary(d, rng)
        psi2 = PureBipartiteState.from_matrix(psi1.coefficient_matrix() @ v.T)
        w = connecting_local_unitary(psi1, psi2)
        np.testing.assert_allclose(w @ w.conj().T, np.eye(d), atol=1e-9)
        moved = psi1.coefficient_matrix() @ w.T
        np.testing.assert_allclose(moved, psi2.coefficient_matrix(), atol=1e-9)


# -- convertibility -------------------------------------------------------------

def test_nielsen_examples():
    assert nielsen_convertible(two_qubit(0.6, 0.4), two_qubit(0.8, 0.2))
    assert not nielsen_convertible(two_qubit(0.8, 0.2), two_qubit(0.6, 0.4))
    product = PureBipartiteState((2, 2), [1, 0, 0, 0])
    assert nielsen_convertible(bell(), product)
    assert not nielsen_convertible(product, bell())


def test_degenerate_pair_convertible_both_ways_and_lu():
    rng = np.random.default_rng(19)
    psi = random_pure_state((3, 3), rng)
    assert nielsen_convertible(psi, psi)
    assert lu_equivalent(psi, psi)


def test_bell_converts_to_everything():
    rng = np.random.default_rng(10)
    for _ in range(50):
        assert nielsen_convertible(bell(), random_pure_state((2, 2), rng))


def test_lu_equivalence():
    flipped = PureBipartiteState((2, 2), np.array([0, 1, 1, 0]) / np.sqrt(2))
    assert lu_equivalent(bell(), flipped)
    assert not lu_equivalent(two_qubit(0.8, 0.2), two_qubit(0.6, 0.4))
    assert lu_equivalent(bell(), bell())


# -- local exchange --------------------------------------------------------------

def _swap_residual(psi: PureBipartiteState) -> float:
    chan_c, chan_d = local_exchange_channels(psi)
    rho = np.outer(psi.vec, psi.vec.conj())
    s = swap_operator(psi.dims[0])
    out = product_channel_apply(chan_c, chan_d, rho)
    return float(np.max(np.abs(out - s @ rho @ s)))


def test_local_exchange_bell_invariant():
    chan_c, chan_d = local_exchange_channels(bell())
    assert _swap_residual(bell()) < 1e-12
    rho = np.outer(bell().vec, bell().vec.conj())
    out = product_channel_apply(chan_c, chan_d, rho)
    np.testing.assert_allclose(out, rho, atol=1e-12)


def test_local_exchange_product_state():
    psi = PureBipartiteState((2, 2), [0, 1, 0, 0])  # |0> x |1>
    chan_c, chan_d = local_exchange_channels(psi)
    # the isometry part maps the A support |0> onto the B vector |1>
    np.testing.assert_allclose(chan_c.operators[0] @ np.array([1, 0]),
                               np.array([0, 1]), atol=1e-12)
    np.testing.assert_allclose(chan_d.operators[0] @ np.array([0, 1]),
                               np.array([1, 0]), atol=1e-12)
    assert _swap_residual(psi) < 1e-12


def test_local_exchange_random_states():
    rng = np.random.default_rng(11)
    for d in (2, 3, 4):
        for _ in range(100):
            assert _swap_residual(random_pure_state((d, d), rng)) <= 1e-9


def test_local_exchange_rejects_rectangular():
    rng = np.random.default_rng(12)
    with pytest.raises(StructuralError):
        local_exchange_channels(random_pure_state((2, 3), rng))


# -- RaRe synthesis ---------------------------------------------------------------

def test_rare_synthesis_diagonal_example():
    rare = rare_synthesis_quantum(DensityMatrix.diagonal([0.5, 0.5]),
                                  DensityMatrix.diagonal([0.7, 0.3]))
    weights = sorted(w for w, _ in rare)
    np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-9)


def test_rare_synthesis_pure_to_rotated():
    rng = np.random.default_rng(13)
    u = random_unitary(3, rng)
    source = DensityMatrix.pure([1, 0, 0])
    target = DensityMatrix(u @ source.matrix @ u.conj().T)
    rare = rare_synthesis_quantum(target, source)
    assert len(rare) == 1
    w, v = rare[0]
    assert abs(w - 1.0) < 1e-12
    np.testing.assert_allclose(v @ source.matrix @ v.conj().T, target.matrix, atol=1e-9)


def test_rare_synthesis_to_maximally_mixed():
    source = DensityMatrix.diagonal([0.5, 0.3, 0.2])
    rare = rare_synthesis_quantum(DensityMatrix.maximally_mixed(3), source)
    mix = sum(w * u @ source.matrix @ u.conj().T for w, u in rare)
    np.testing.assert_allclose(mix, np.eye(3) / 3, atol=1e-9)


def test_rare_synthesis_requires_majorization():
    with pytest.raises(StructuralError):
        rare_synthesis_quantum(DensityMatrix.diagonal([0.7, 0.3]),
                               DensityMatrix.diagonal([0.5, 0.5]))


def test_rare_preserves_2norm():
    rng = np.random.default_rng(14)
    for _ in range(40):
        d = int(rng.integers(2, 5))
        spec_hi = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        mixed = spec_hi * 0.5 + np.full(d, 0.5 / d)
        rare = rare_synthesis_quantum(DensityMatrix.diagonal(np.sort(mixed)[::-1]),
                                      DensityMatrix.diagonal(spec_hi))
        sigma = random_density_matrix(d, rng)
        out = sum(w * u @ sigma.matrix @ u.conj().T for w, u in rare)
        assert np.trace(out @ out).real <= sigma.purity() + 1e-9


# -- one-way protocol ---------------------------------------------------------------

def test_one_way_trivial_identity():
    psi = bell()
    rare = [(1.0, np.eye(2, dtype=complex))]
    protocol = one_way_locc_from_rare(psi, psi, rare)
    assert len(protocol.bob_instrument) == 1
    np.testing.assert_allclose(protocol.bob_instrument[0], np.eye(2), atol=1e-9)
    np.testing.assert_allclose(protocol.alice_corrections[0], np.eye(2), atol=1e-12)
    assert protocol.verify(psi, psi)


def test_one_way_mixed_to_sharper():
    psi = purify(DensityMatrix.maximally_mixed(2))
    target = purify(DensityMatrix.diagonal([0.7, 0.3]))
    rare = rare_synthesis_quantum(DensityMatrix.maximally_mixed(2),
                                  DensityMatrix.diagonal([0.7, 0.3]))
    protocol = one_way_locc_from_rare(psi, target, rare)
    assert len(protocol.bob_instrument) == 2
    assert protocol.completeness_residual() <= 1e-9
    assert np.max(protocol.outcome_residuals(psi, target)) <= 1e-8


def test_one_way_random_d3_instances():
    rng = np.random.default_rng(15)
    done = 0
    while done < 10:
        psi = random_pure_state((3, 3), rng)
        target = random_pure_state((3, 3), rng)
        if not nielsen_convertible(psi, target):
            continue
        rho, rho_t = marginals(psi)[0], marginals(target)[0]
        rare = rare_synthesis_quantum(rho, rho_t)
        protocol = one_way_locc_from_rare(psi, target, rare)
        assert protocol.completeness_residual() <= 1e-9
        assert np.max(protocol.outcome_residuals(psi, target)) <= 1e-8
        done += 1


def test_one_way_rejects_wrong_rare():
    psi = purify(DensityMatrix.maximally_mixed(2))
    target = purify(DensityMatrix.diagonal([0.7, 0.3]))
    with pytest.raises(StructuralError):
        one_way_locc_from_rare(psi, target, [(1.0, np.eye(2, dtype=complex))])


# -- entanglement measures -----------------------------------------------------------

def test_eof_bell_is_one():
    rho = DensityMatrix.pure(bell().vec)
    assert abs(entanglement_of_formation(rho) - 1.0) < 1e-6


def test_eof_product_is_zero():
    rho = DensityMatrix.pure([1, 0, 0, 0])
    assert abs(entanglement_of_formation(rho)) < 1e-9


def test_eof_matches_wootters_on_rank2():
    rng = np.random.default_rng(16)
    for _ in range(15):
        rho = random_density_matrix(4, rng, rank=2)
        ours = entanglement_of_formation(rho)
        assert abs(ours - wootters_eof(rho.matrix)) < 1e-3


def test_eof_matches_wootters_on_full_rank():
    rng = np.random.default_rng(17)
    for _ in range(10):
        rho = random_density_matrix(4, rng)
        assert abs(entanglement_of_formation(rho) - wootters_eof(rho.matrix)) < 1e-3


def test_eof_rejects_other_dims():
    with pytest.raises(StructuralError):
        entanglement_of_formation(DensityMatrix.maximally_mixed(3))


def test_catalytic_erasure_examples():
    verdict = catalytic_erasure_possible(DensityMatrix.diagonal([0.7, 0.3]))
    assert not verdict.possible
    assert abs(verdict.margin - 0.42) < 1e-12
    pure = catalytic_erasure_possible(DensityMatrix.pure([1, 0]))
    assert pure.possible and abs(pure.margin) < 1e-12
    qutrit = catalytic_erasure_possible(DensityMatrix.maximally_mixed(3))
    assert not qutrit.possible
    assert abs(qutrit.margin - 2.0 / 3.0) < 1e-12


def test_entanglement_entropy_values():
    assert abs(entanglement_entropy(bell()) - 1.0) < 1e-12
    assert abs(entanglement_entropy(two_qubit(1.0, 0.0))) < 1e-12
    assert abs(entanglement_entropy(maximally_entangled(4)) - 2.0) < 1e-12


def test_duality_boolean_agreement_small_sample():
    from gptpurity.mixedness import majorizes
    rng = np.random.default_rng(18)
    for d in (2, 3, 4):
        for _ in range(60):
            psi = random_pure_state((d, d), rng)
            phi = random_pure_state((d, d), rng)
            left = nielsen_convertible(psi, phi)
            right = majorizes(marginals(phi)[0].spectrum(),
                              marginals(psi)[0].spectrum())
            assert left == right
