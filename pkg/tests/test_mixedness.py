import numpy as np
import pytest

from gptpurity import core, mixedness

from oracles import hull_membership_scipy


@pytest.fixture(scope="module")
def bit():
    return core.make_classical(2)


@pytest.fixture(scope="module")
def trit():
    return core.make_classical(3)


@pytest.fixture(scope="module")
def square_bit():
    return core.make_square_bit()


# -- feasible_convex_combination --------------------------------------------

def test_midpoint_is_feasible():
    cert = mixedness.feasible_convex_combination([(1, 0), (0, 1)], (0.5, 0.5))
    assert cert.feasible
    np.testing.assert_allclose(cert.weights, [0.5, 0.5], atol=1e-10)


def test_point_off_segment_is_infeasible():
    cert = mixedness.feasible_convex_combination([(1, 0), (0, 1)], (0.7, 0.5))
    assert not cert.feasible


def test_center_in_orbit_hull(square_bit):
    rho = np.array([0.5, 0.2, 1.0])
    orbit = [u @ rho for u in square_bit.group]
    cert = mixedness.feasible_convex_combination(orbit, np.array([0.0, 0.0, 1.0]))
    assert cert.feasible
    assert cert.residual <= 1e-8


def test_bad_scale_raises():
    with pytest.raises(mixedness.IllConditionedError):
        mixedness.feasible_convex_combination([(1e13, 0), (0, 1)], (1.0, 0.0))


def test_certificate_roundtrip():
    cert = mixedness.feasible_convex_combination([(1, 0), (0, 1)], (0.25, 0.75))
    back = mixedness.FeasibilityCertificate.from_dict(cert.to_dict())
    assert back.status == cert.status
    np.testing.assert_allclose(back.weights, cert.weights)


# -- more_mixed / equally_mixed ---------------------------------------------

def test_bit_mixing_witness(bit):
    cert = mixedness.more_mixed(bit.state([0.7, 0.3]), bit.state([0.5, 0.5]))
    assert cert.feasible
    # the unique witness solves 0.7 t + 0.3 (1 - t) = 0.5, so t = 0.5
    np.testing.assert_allclose(cert.weights, [0.5, 0.5], atol=1e-9)


def test_uniform_cannot_sharpen(bit):
    assert not mixedness.more_mixed(bit.state([0.5, 0.5]), bit.state([0.7, 0.3])).feasible


def test_square_vertex_reaches_everything(square_bit):
    rng = np.random.default_rng(3)
    vertex = square_bit.state([1.0, 1.0, 1.0])
    for _ in range(25):
        mix = rng.dirichlet(np.ones(4))
        sigma = square_bit.state(sum(w * v for w, v in zip(mix, square_bit.pure_states)))
        assert mixedness.more_mixed(vertex, sigma).feasible


def test_equally_mixed_square_reflection(square_bit):
    rho = square_bit.state([0.5, 0.2, 1.0])
    sigma = square_bit.state([-0.5, 0.2, 1.0])
    flag, witness = mixedness.equally_mixed(rho, sigma)
    assert flag
    np.testing.assert_allclose(witness @ rho.vec, sigma.vec, atol=1e-9)


def test_equally_mixed_bit_swap(bit):
    flag, witness = mixedness.equally_mixed(bit.state([0.7, 0.3]), bit.state([0.3, 0.7]))
    assert flag
    np.testing.assert_allclose(witness, [[0, 1], [1, 0]], atol=1e-12)


def test_not_equally_mixed(bit):
    flag, witness = mixedness.equally_mixed(bit.state([0.7, 0.3]), bit.state([0.6, 0.4]))
    assert not flag
    assert witness is None


# -- invariant_state ----------------------------------------------------------

def test_invariant_state_square_center(square_bit):
    chi = mixedness.invariant_state(square_bit)
    np.testing.assert_allclose(chi.vec, [0.0, 0.0, 1.0], atol=1e-10)


def test_invariant_state_classical_uniform():
    for n in (2, 3, 4):
        chi = mixedness.invariant_state(core.make_classical(n))
        np.testing.assert_allclose(chi.vec, np.full(n, 1.0 / n), atol=1e-12)


def test_invariant_state_is_maximum(bit):
    chi = mixedness.invariant_state(bit)
    assert mixedness.more_mixed(bit.state([1.0, 0.0]), chi).feasible


def test_invariant_state_nonunique_group_rejected(square_bit):
    # identity-only group: every state is invariant, averages differ per seed
    broken = core.TheorySystem(dim=3, unit_effect=square_bit.unit_effect,
                               pure_states=square_bit.pure_states,
                               extremal_effects=square_bit.extremal_effects,
                               group=(np.eye(3),))
    with pytest.raises(core.StructuralError):
        mixedness.invariant_state(broken)


# -- orbit_hull ---------------------------------------------------------------

def test_orbit_hull_octagon(square_bit):
    hull = mixedness.orbit_hull(square_bit.state([0.5, 0.2, 1.0]))
    assert len(hull) == 8


def test_orbit_hull_center_single_point(square_bit):
    hull = mixedness.orbit_hull(square_bit.state([0.0, 0.0, 1.0]))
    assert len(hull) == 1


def test_orbit_hull_trit_vertex(trit):
    hull = mixedness.orbit_hull(trit.state([1.0, 0.0, 0.0]))
    assert len(hull) == 3


def test_orbit_hull_generates_reachable_set(square_bit):
    # cross-check: sigma reachable iff sigma in conv(hull vertices)
    rng = np.random.default_rng(11)
    rho = square_bit.state([0.5, 0.2, 1.0])
    hull = mixedness.orbit_hull(rho)
    for _ in range(30):
        mix = rng.dirichlet(np.ones(4))
        sigma = square_bit.state(sum(w * v for w, v in zip(mix, square_bit.pure_states)))
        reachable = mixedness.more_mixed(rho, sigma).feasible
        in_hull = hull_membership_scipy(hull, sigma.vec)
        assert reachable == in_hull


# -- majorizes ---------------------------------------------------------------

def test_majorizes_examples():
    assert mixedness.majorizes([0.7, 0.3], [0.6, 0.4])
    assert mixedness.majorizes([0.5, 0.3, 0.2], [0.5, 0.3, 0.2])
    assert not mixedness.majorizes([0.5, 0.5], [0.7, 0.3])


def test_majorizes_rejects_unnormalized():
    with pytest.raises(core.StructuralError):
        mixedness.majorizes([0.7, 0.7], [0.5, 0.5])


# -- birkhoff_rare_synthesis --------------------------------------------------

def test_birkhoff_bit_example(bit):
    channel = mixedness.birkhoff_rare_synthesis([0.7, 0.3], [0.6, 0.4])
    entries = dict((k, w) for w, k in channel.entries)
    assert abs(entries[0] - 0.75) < 1e-9   # identity
    assert abs(entries[1] - 0.25) < 1e-9   # swap


def test_birkhoff_vertex_to_uniform():
    p = np.array([1.0, 0.0, 0.0])
    q = np.full(3, 1.0 / 3.0)
    channel = mixedness.birkhoff_rare_synthesis(p, q)
    np.testing.assert_allclose(channel.matrix() @ p, q, atol=1e-9)


def test_birkhoff_noop():
    channel = mixedness.birkhoff_rare_synthesis([0.5, 0.3, 0.2], [0.5, 0.3, 0.2])
    assert len(channel.entries) == 1
    assert channel.entries[0][1] == 0  # identity permutation


def test_birkhoff_requires_majorization():
    with pytest.raises(core.StructuralError):
        mixedness.birkhoff_rare_synthesis([0.5, 0.5], [0.7, 0.3])


def test_birkhoff_random_instances_support_and_residual():
    rng = np.random.default_rng(8)
    for _ in range(150):
        n = int(rng.integers(2, 7))
        q = rng.dirichlet(np.ones(n))
        # build p majorizing q by pushing weight upward
        channel_free = np.sort(rng.dirichlet(np.ones(n)))[::-1]
        p = np.sort(q)[::-1]
        for _ in range(int(rng.integers(0, 3))):
            p = np.sort(p * 0.5 + channel_free * 0.5)[::-1]
            p[0] += 1.0 - p.sum()
        if not mixedness.majorizes(p, q):
            continue
        channel = mixedness.birkhoff_rare_synthesis(p, q)
        np.testing.assert_allclose(channel.matrix() @ np.asarray(p), q, atol=1e-9)
        assert len(channel.entries) <= (n - 1) ** 2 + 1


# -- preorder properties ------------------------------------------------------

def test_more_mixed_reflexive(square_bit, trit):
    rng = np.random.default_rng(5)
    for sys in (square_bit, trit):
        for _ in range(10):
            mix = rng.dirichlet(np.ones(len(sys.pure_states)))
            rho = sys.state(sum(w * v for w, v in zip(mix, sys.pure_states)))
            assert mixedness.more_mixed(rho, rho).feasible


def test_more_mixed_transitive(trit):
    rng = np.random.default_rng(6)
    hits = 0
    for _ in range(200):
        p = rng.dirichlet(np.ones(3))
        rho = trit.state(p)
        chan1 = mixedness.RaReChannel(trit, ((0.6, 0), (0.4, int(rng.integers(1, 6)))))
        sigma = chan1.apply(rho)
        chan2 = mixedness.RaReChannel(trit, ((0.7, 0), (0.3, int(rng.integers(1, 6)))))
        tau = chan2.apply(sigma)
        if mixedness.more_mixed(rho, sigma).feasible and \
                mixedness.more_mixed(sigma, tau).feasible:
            hits += 1
            assert mixedness.more_mixed(rho, tau).feasible
    assert hits > 100


def test_verdict_invariant_under_group_conjugation(square_bit):
    rng = np.random.default_rng(7)
    for _ in range(25):
        mix = rng.dirichlet(np.ones(4))
        rho = square_bit.state(sum(w * v for w, v in zip(mix, square_bit.pure_states)))
        mix2 = rng.dirichlet(np.ones(4))
        sigma = square_bit.state(sum(w * v for w, v in zip(mix2, square_bit.pure_states)))
        base = mixedness.more_mixed(rho, sigma).feasible
        for u in square_bit.group:
            moved = mixedness.more_mixed(
                square_bit.state(u @ rho.vec), square_bit.state(u @ sigma.vec)).feasible
            assert moved == base


def test_rare_channel_from_certificate(square_bit):
    rho = square_bit.state([1.0, 1.0, 1.0])
    sigma = square_bit.state([0.25, 0.1, 1.0])
    cert = mixedness.more_mixed(rho, sigma)
    channel = mixedness.rare_channel_from_certificate(square_bit, cert)
    np.testing.assert_allclose(channel.apply(rho).vec, sigma.vec, atol=1e-8)


def test_validate_state_inside_and_outside(square_bit):
    assert mixedness.validate_state(square_bit.state([0.3, -0.4, 1.0])).feasible
    assert not mixedness.validate_state(square_bit.state([1.5, 0.0, 1.0])).feasible


def test_validate_channel(square_bit, bit):
    good = core.GptChannel(square_bit, square_bit, square_bit.group[1])
    assert mixedness.validate_channel(good) == []
    # contraction toward a vertex stays a channel; expansion does not
    vertex = square_bit.pure_states[0]
    contract = 0.5 * np.eye(3)
    contract[:, 2] += 0.5 * vertex  # rho -> (rho + vertex)/2 on normalized states
    assert mixedness.validate_channel(core.GptChannel(square_bit, square_bit, contract)) == []
    stretch = np.diag([1.6, 1.0, 1.0])
    report = mixedness.validate_channel(core.GptChannel(square_bit, square_bit, stretch))
    assert any("output polytope" in line for line in report)
    # dimension-changing channel: collapse the square bit onto a classical bit
    onto_bit = np.array([[0.5, 0.0, 0.5], [-0.5, 0.0, 0.5]])
    assert mixedness.validate_channel(core.GptChannel(square_bit, bit, onto_bit)) == []


def test_validate_instrument(square_bit):
    halves = (0.5 * np.eye(3), 0.5 * np.eye(3))
    inst = core.Instrument(square_bit, square_bit, halves)
    assert mixedness.validate_instrument(inst) == []
    bad = core.Instrument(square_bit, square_bit, (1.5 * np.eye(3), -0.5 * np.eye(3)))
    assert mixedness.validate_instrument(bad) != []
