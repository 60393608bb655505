"""Seeded cross-validation suites tying the backends together.

Each suite samples instances with a counter-based generator (Philox), so a
given TrialConfig reproduces its report byte for byte (wall time aside) on
any platform.  Counterexamples carry their full inputs and can be replayed
standalone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import StructuralError, make_classical
from .mixedness import birkhoff_rare_synthesis, majorizes, more_mixed
from .quantum import (DensityMatrix, PureBipartiteState, lu_equivalent, marginals,
                      maximally_entangled, nielsen_convertible, one_way_locc_from_rare,
                      random_density_matrix, random_pure_state, random_unitary,
                      rare_synthesis_quantum)
from .serialize import complex_to_pairs, pairs_to_complex


@dataclass(frozen=True)
class TrialConfig:
    """Seed, sizes, trial counts and tolerances for one suite run."""

    seed: int = 0
    trials: int = 100
    dims: tuple[int, ...] = (2, 3, 4)
    sizes: tuple[int, ...] = (2, 3, 4, 5)
    reconstruction_tol: float = 1e-9
    protocol_tol: float = 1e-8
    counterexample_budget: int = 10

    def __post_init__(self):
        if self.trials < 1:
            raise StructuralError("trial count must be >= 1")
        if self.reconstruction_tol <= 0 or self.protocol_tol <= 0:
            raise StructuralError("tolerances must be positive")


@dataclass
class SuiteReport:
    suite: str
    trials: int
    agreements: int
    counterexamples: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def __post_init__(self):
        if self.agreements + len(self.counterexamples) != self.trials:
            raise StructuralError("agreements + counterexamples must equal trials")

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {"suite": self.suite, "trials": self.trials,
               "agreements": self.agreements, "counterexamples": self.counterexamples}
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    @staticmethod
    def from_dict(data: dict) -> "SuiteReport":
        return SuiteReport(suite=data["suite"], trials=int(data["trials"]),
                           agreements=int(data["agreements"]),
                           counterexamples=list(data["counterexamples"]),
                           wall_time=float(data.get("wall_time", 0.0)))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


class _Collector:
    """Counts agreements and stops after the counterexample budget."""

    def __init__(self, budget: int):
        self.budget = budget
        self.agreements = 0
        self.counterexamples: list[dict] = []

    def record(self, ok: bool, detail: dict) -> bool:
        if ok:
            self.agreements += 1
        else:
            self.counterexamples.append(detail)
        return len(self.counterexamples) < self.budget

    def report(self, suite: str, started: float) -> SuiteReport:
        return SuiteReport(suite, self.agreements + len(self.counterexamples),
                           self.agreements, self.counterexamples,
                           wall_time=time.perf_counter() - started)


# ---------------------------------------------------------------------------
# duality suite
# ---------------------------------------------------------------------------

def _check_direction(psi: PureBipartiteState, target: PureBipartiteState,
                     cfg: TrialConfig) -> dict:
    """Compare the two sides of the duality on one ordered pair.

    Returns residual data; 'agree' is False when the convertibility verdict
    and the marginal-spectrum majorization verdict differ, or when a
    constructed witness misses its tolerance.
    """
    rho = marginals(psi)[0]
    rho_t = marginals(target)[0]
    convertible = nielsen_convertible(psi, target)
    spectra_majorize = majorizes(rho_t.spectrum(), rho.spectrum())
    out = {"convertible": convertible, "spectra_majorize": spectra_majorize,
           "agree": convertible == spectra_majorize}
    if convertible and out["agree"]:
        try:
            rare = rare_synthesis_quantum(rho, rho_t)
            mix = sum(w * u @ rho_t.matrix @ u.conj().T for w, u in rare)
            out["rare_residual"] = float(np.max(np.abs(mix - rho.matrix)))
            protocol = one_way_locc_from_rare(psi, target, rare)
            out["completeness_residual"] = protocol.completeness_residual()
            out["outcome_residual"] = float(np.max(protocol.outcome_residuals(psi, target)))
            out["agree"] = (out["rare_residual"] <= cfg.reconstruction_tol
                            and out["completeness_residual"] <= cfg.protocol_tol
                            and out["outcome_residual"] <= cfg.protocol_tol)
        except (StructuralError, RuntimeError) as exc:
            out["agree"] = False
            out["witness_error"] = str(exc)
    return out


def run_duality_suite(cfg: TrialConfig) -> SuiteReport:
    """Duality check: convertibility iff marginal-spectrum majorization.

    For every sampled ordered pair that is convertible, the RaRe witness
    and the one-way protocol are constructed explicitly and verified at
    the configured tolerances.
    """
    started = time.perf_counter()
    rng = _rng(cfg.seed)
    collector = _Collector(cfg.counterexample_budget)
    for d in cfg.dims:
        for trial in range(cfg.trials):
            psi = random_pure_state((d, d), rng)
            phi = random_pure_state((d, d), rng)
            forward = _check_direction(psi, phi, cfg)
            backward = _check_direction(phi, psi, cfg)
            ok = forward["agree"] and backward["agree"]
            detail = {}
            if not ok:
                detail = {"dim": d, "trial": trial,
                          "psi": complex_to_pairs(psi.vec),
                          "phi": complex_to_pairs(phi.vec),
                          "forward": forward, "backward": backward}
            if not collector.record(ok, detail):
                return collector.report("duality", started)
    return collector.report("duality", started)


def replay_duality_counterexample(detail: dict, cfg: TrialConfig | None = None) -> bool:
    """Recompute a serialized duality counterexample; True iff it still fails."""
    cfg = cfg or TrialConfig()
    d = int(detail["dim"])
    psi = PureBipartiteState((d, d), pairs_to_complex(detail["psi"]))
    phi = PureBipartiteState((d, d), pairs_to_complex(detail["phi"]))
    forward = _check_direction(psi, phi, cfg)
    backward = _check_direction(phi, psi, cfg)
    return not (forward["agree"] and backward["agree"])


# ---------------------------------------------------------------------------
# classical agreement suite
# ---------------------------------------------------------------------------

def run_classical_agreement_suite(cfg: TrialConfig) -> SuiteReport:
    """LP-based more_mixed against partial-sum majorization, on random pairs.

    Whenever the pair is comparable, the Birkhoff witness is synthesized and
    its defining equation checked to the reconstruction tolerance.
    """
    started = time.perf_counter()
    rng = _rng(cfg.seed)
    collector = _Collector(cfg.counterexample_budget)
    systems = {n: make_classical(n) for n in cfg.sizes}
    for n in cfg.sizes:
        sys_n = systems[n]
        for trial in range(cfg.trials):
            p = rng.dirichlet(np.ones(n))
            q = rng.dirichlet(np.ones(n))
            lp_verdict = more_mixed(sys_n.state(p), sys_n.state(q)).feasible
            maj_verdict = majorizes(p, q)
            ok = lp_verdict == maj_verdict
            residual = None
            if ok and maj_verdict:
                channel = birkhoff_rare_synthesis(p, q, system=sys_n)
                residual = float(np.max(np.abs(channel.matrix() @ p - q)))
                ok = residual <= cfg.reconstruction_tol
            detail = {}
            if not ok:
                detail = {"n": n, "trial": trial, "p": p.tolist(), "q": q.tolist(),
                          "lp_verdict": lp_verdict, "majorizes": maj_verdict,
                          "witness_residual": residual}
            if not collector.record(ok, detail):
                return collector.report("classical-agreement", started)
    return collector.report("classical-agreement", started)


def replay_classical_counterexample(detail: dict,
                                    cfg: TrialConfig | None = None) -> bool:
    cfg = cfg or TrialConfig()
    n = int(detail["n"])
    sys_n = make_classical(n)
    p = np.asarray(detail["p"], dtype=float)
    q = np.asarray(detail["q"], dtype=float)
    lp_verdict = more_mixed(sys_n.state(p), sys_n.state(q)).feasible
    maj_verdict = majorizes(p, q)
    if lp_verdict != maj_verdict:
        return True
    if maj_verdict:
        channel = birkhoff_rare_synthesis(p, q, system=sys_n)
        residual = float(np.max(np.abs(channel.matrix() @ p - q)))
        return residual > cfg.reconstruction_tol
    return False


# ---------------------------------------------------------------------------
# maximal entanglement suite
# ---------------------------------------------------------------------------

def run_maximal_entanglement_suite(cfg: TrialConfig) -> SuiteReport:
    """Uniform-Schmidt states are maximally entangled, and reach every state.

    Per trial: the uniform state converts to the sample; the sample converts
    to the uniform state only when it is itself uniform-spectrum (checked
    via local-unitary equivalence).
    """
    started = time.perf_counter()
    rng = _rng(cfg.seed)
    collector = _Collector(cfg.counterexample_budget)
    for d in cfg.dims:
        phi = maximally_entangled(d)
        for trial in range(cfg.trials):
            psi = random_pure_state((d, d), rng)
            reaches_everything = nielsen_convertible(phi, psi)
            back = nielsen_convertible(psi, phi)
            back_ok = (not back) or lu_equivalent(psi, phi)
            ok = reaches_everything and back_ok
            detail = {}
            if not ok:
                detail = {"dim": d, "trial": trial, "psi": complex_to_pairs(psi.vec),
                          "maximal_reaches_sample": reaches_everything,
                          "sample_reaches_maximal": back}
            if not collector.record(ok, detail):
                return collector.report("maximal-entanglement", started)
    return collector.report("maximal-entanglement", started)


# ---------------------------------------------------------------------------
# catalyst suite
# ---------------------------------------------------------------------------

def run_catalyst_suite(cfg: TrialConfig) -> SuiteReport:
    """Catalytic erasure is blocked by the multiplicative 2-norm margin.

    Per trial: random mixed rho and random catalyst gamma; check the margin
    Tr(gamma^2) - Tr((rho x gamma)^2) is positive, and that sampled
    random-unitary mixings never increase the 2-norm (so the erasure target
    stays out of reach).
    """
    started = time.perf_counter()
    rng = _rng(cfg.seed)
    collector = _Collector(cfg.counterexample_budget)
    dims = [d for d in cfg.dims if d <= 4]
    for trial in range(cfg.trials):
        d_a = int(rng.choice(dims))
        d_c = int(rng.choice(dims))
        rho = random_density_matrix(d_a, rng, rank=int(rng.integers(2, d_a + 1)))
        gamma = random_density_matrix(d_c, rng)
        joint = np.kron(rho.matrix, gamma.matrix)
        joint_purity = float(np.trace(joint @ joint).real)
        product_ok = abs(joint_purity - rho.purity() * gamma.purity()) <= 1e-10
        margin = gamma.purity() - joint_purity
        margin_ok = margin > 1e-12
        monotone_ok, erased = True, False
        for _ in range(4):
            k = int(rng.integers(2, 5))
            weights = rng.dirichlet(np.ones(k))
            unitaries = [random_unitary(d_a * d_c, rng) for _ in range(k)]
            mixed = sum(w * u @ joint @ u.conj().T for w, u in zip(weights, unitaries))
            out_purity = float(np.trace(mixed @ mixed).real)
            if out_purity > joint_purity + 1e-9:
                monotone_ok = False
            if out_purity >= gamma.purity() - 1e-9:
                erased = True
        ok = product_ok and margin_ok and monotone_ok and not erased
        detail = {}
        if not ok:
            detail = {"trial": trial, "rho": complex_to_pairs(rho.matrix),
                      "gamma": complex_to_pairs(gamma.matrix), "margin": margin,
                      "product_ok": product_ok, "monotone_ok": monotone_ok,
                      "erased": erased}
        if not collector.record(ok, detail):
            return collector.report("catalyst", started)
    return collector.report("catalyst", started)


SUITES = {
    "duality": run_duality_suite,
    "classical-agreement": run_classical_agreement_suite,
    "maximal-entanglement": run_maximal_entanglement_suite,
    "catalyst": run_catalyst_suite,
}
