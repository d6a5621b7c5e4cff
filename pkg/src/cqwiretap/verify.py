"""Randomized verification suites for the divergence and protocol layers.

Each suite draws its instances from ``rng_for(seed, i)`` and returns one
:class:`Check` per property with pass counts and the worst observed margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import divergences as dv
from . import protocol as pr
from .linalg import partial_trace, purified_distance, trace_norm
from .oracles import classical_dh
from .sampling import (
    random_channel,
    random_cq_state,
    random_density,
    random_ensemble,
    random_probabilities,
    random_unitary,
    rng_for,
)
from .states import ensemble_to_cq, reduce_wiretap


@dataclass
class Check:
    name: str
    passed: int = 0
    total: int = 0
    worst: float = -math.inf
    tolerance: float = 0.0

    def record(self, violation: float):
        """``violation`` <= tolerance counts as a pass; the largest is kept."""
        self.total += 1
        self.worst = max(self.worst, violation)
        if violation <= self.tolerance:
            self.passed += 1

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.passed}/{self.total} (worst {self.worst:.3e}, tol {self.tolerance:.0e})"


@dataclass
class SuiteResult:
    suite: str
    seed: int
    trials: int
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def lines(self) -> list[str]:
        head = f"suite {self.suite} seed={self.seed} trials={self.trials}"
        return [head] + [c.line() for c in self.checks]


def _diag(p):
    return np.diag(np.asarray(p, dtype=complex))


def suite_np(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("np", seed, trials)
    oracle = Check("d_h_epsilon matches classical brute force (bits)", tolerance=1e-6)
    dual = Check("primal beta minus dual certificate", tolerance=1e-8)
    mono = Check("d_h_epsilon nondecreasing in eps", tolerance=1e-9)
    for i in range(trials):
        rng = rng_for(seed, i)
        d = int(rng.integers(2, 7))
        p, q = random_probabilities(d, rng), random_probabilities(d, rng)
        for eps in (0.1, 0.25, 0.5):
            r = dv.d_h_epsilon(_diag(p), _diag(q), eps)
            oracle.record(abs(r.value_bits - classical_dh(p, q, eps)))
            dual.record(r.beta - r.dual_beta)
        rho, sigma = random_density(d, rng), random_density(d, rng)
        vals = [dv.d_h_epsilon(rho, sigma, e).value_bits for e in (0.1, 0.3, 0.5, 0.7)]
        mono.record(max(a - b for a, b in zip(vals, vals[1:])))
    res.checks = [oracle, dual, mono]
    return res


def random_hn_triple(rng):
    d = int(rng.integers(2, 7))
    u = random_unitary(d, rng)
    s = (u * rng.random(d)) @ u.conj().T
    t = random_density(d, rng, rank=int(rng.integers(1, d + 1))) * float(rng.exponential())
    return s, t


def suite_hn(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("hn", seed, trials)
    chk = Check("Hayashi-Nagaoka residual >= 0 (negated min eigenvalue)", tolerance=1e-9)
    for i in range(trials):
        rng = rng_for(seed, i)
        s, t = random_hn_triple(rng)
        c = (0.1, 1.0, 10.0)[i % 3]
        chk.record(-pr.hn_residual(s, t, c))
    res.checks = [chk]
    return res


def suite_convex_split(seed: int, trials: int, ks=(2, 4, 8, 16)) -> SuiteResult:
    res = SuiteResult("convex-split", seed, trials)
    fid = Check("F(tau, product) >= 1/(1+(2^Dmax-1)/K)", tolerance=1e-9)
    pd = Check("P(tau, product) <= sqrt(2^Dmax/K)", tolerance=1e-9)
    for i in range(trials):
        cq = random_cq_state(2, 2, rng_for(seed, i))
        dmax = dv.i_max_upper(cq)
        for k in ks:
            f = pr.convex_split_fidelity(cq, k)
            fid.record(pr.convex_split_fidelity_bound(dmax, k) - f)
            pd.record(math.sqrt(max(1.0 - f, 0.0)) - math.sqrt(2.0**dmax / k))
    res.checks = [fid, pd]
    return res


def suite_prop1(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("prop1", seed, trials)
    var = Check("|V(X;B) - V(rho_B)|", tolerance=1e-9)
    info = Check("|I(X;B) - H(rho_B)|", tolerance=1e-9)
    for i in range(trials):
        rng = rng_for(seed, i)
        ens = random_ensemble(int(rng.integers(2, 5)), int(rng.integers(2, 5)), rng)
        cq = ensemble_to_cq(ens)
        i_xb, v_xb = dv.mutual_info(cq)
        rb = cq.marginal()
        var.record(abs(v_xb - dv.entropy_variance(rb)))
        info.record(abs(i_xb - dv.entropy(rb)))
    res.checks = [var, info]
    return res


def suite_protocol(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("protocol", seed, trials)
    complete = Check("decoder elements sum to I", tolerance=1e-8)
    positive = Check("decoder elements PSD (negated min eigenvalue)", tolerance=1e-9)
    in_range = Check("decode errors in [0, 1]", tolerance=1e-9)
    perm = Check("relabeling messages permutes errors", tolerance=1e-12)
    priv = Check("privacy error in [0, 1]", tolerance=0.0)
    for i in range(trials):
        rng = rng_for(seed, i)
        n_sym = int(rng.integers(2, 4))
        ch = random_channel(n_sym, 2, 2, rng)
        p_x = random_probabilities(n_sym, rng, floor=0.05)
        rho_xb = reduce_wiretap(ch, p_x)[0]
        test = dv.hypothesis_testing_mi(rho_xb, 0.1)
        m, k = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        cb = pr.sample_codebook(p_x, m, k, seed, i)
        dec = pr.build_decoder(cb, test)
        complete.record(dec.completeness_error())
        lows = [float(np.linalg.eigvalsh(e)[0]) for e in dec.flat() + [dec.completion]]
        positive.record(-min(lows))
        errs = np.array([[pr.decode_error(rho_xb, cb, dec, a, b) for b in range(k)] for a in range(m)])
        in_range.record(max(-errs.min(), errs.max() - 1.0))
        order = rng.permutation(m)
        cb2 = pr.CodebookSample(cb.codewords[order], cb.seed, m, k)
        dec2 = pr.build_decoder(cb2, test)
        errs2 = np.array([[pr.decode_error(rho_xb, cb2, dec2, a, b) for b in range(k)] for a in range(m)])
        perm.record(float(np.max(np.abs(errs2 - errs[order]))))
        pe = pr.privacy_error(ch, cb, dec, p_x=p_x)
        priv.record(max(-pe, pe - 1.0))
    res.checks = [complete, positive, in_range, perm, priv]
    return res


def _random_subnormalized(d, rng):
    return random_density(d, rng) * float(rng.uniform(0.3, 1.0))


def suite_metrics(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("metrics", seed, trials)
    tri = Check("purified distance triangle inequality", tolerance=1e-8)
    td_pd = Check("trace distance <= purified distance", tolerance=1e-8)
    d_dmax = Check("D <= D_max", tolerance=1e-8)
    dpi = Check("data processing under partial trace", tolerance=1e-8)
    for i in range(trials):
        rng = rng_for(seed, i)
        d = int(rng.integers(2, 5))
        a, b, c = (_random_subnormalized(d, rng) for _ in range(3))
        tri.record(purified_distance(a, c) - purified_distance(a, b) - purified_distance(b, c))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        td_pd.record(0.5 * trace_norm(rho - sigma) - purified_distance(rho, sigma))
        d_dmax.record(float(dv.rel_entropy(rho, sigma)) - float(dv.d_max(rho, sigma)))
        dims = [2, int(rng.integers(2, 4))]
        w, t = random_density(dims[0] * dims[1], rng), random_density(dims[0] * dims[1], rng)
        reduced = dv.rel_entropy(partial_trace(w, dims, [0]), partial_trace(t, dims, [0]))
        dpi.record(float(reduced) - float(dv.rel_entropy(w, t)))
    res.checks = [tri, td_pd, d_dmax, dpi]
    return res


SUITES = {
    "np": (suite_np, 50),
    "hn": (suite_hn, 1000),
    "convex-split": (suite_convex_split, 100),
    "prop1": (suite_prop1, 100),
    "protocol": (suite_protocol, 20),
    "metrics": (suite_metrics, 200),
}


def run_suite(name: str, seed: int = 0, trials: int | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    fn, default = SUITES[name]
    return fn(int(seed), default if trials is None else int(trials))
