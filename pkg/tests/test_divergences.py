import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqwiretap import divergences as dv
from cqwiretap.linalg import ValidationError, partial_trace
from cqwiretap.oracles import classical_dh
from cqwiretap.sampling import random_cq_state, random_density, random_ensemble, random_probabilities, rng_for
from cqwiretap.states import CqState, ensemble_to_cq

from conftest import diag

KL_HALF_QUARTER = 0.2075187496394219  # 0.5 log2 2 + 0.5 log2(2/3)
LOG2_8_5 = 0.6780719051126377


def test_infinite_marker():
    assert dv.INFINITE > 1e308
    assert float(dv.INFINITE) == math.inf
    assert dv.is_infinite(dv.INFINITE) and not dv.is_infinite(math.inf)
    assert repr(dv.INFINITE) != repr(math.inf)


def test_rel_entropy_examples(rng):
    rho = random_density(3, rng)
    assert dv.rel_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert dv.rel_entropy(diag(0.5, 0.5), diag(0.25, 0.75)) == pytest.approx(KL_HALF_QUARTER, abs=1e-14)
    assert dv.rel_entropy(diag(1, 0), diag(0, 1)) is dv.INFINITE


def test_rel_entropy_variance():
    rho = diag(0.2, 0.8)
    assert dv.rel_entropy_variance(rho, rho) == pytest.approx(0.0, abs=1e-14)
    corr = diag(0.5, 0, 0, 0.5)
    prod = np.eye(4) / 4
    assert dv.rel_entropy_variance(corr, prod) == pytest.approx(0.0, abs=1e-14)
    p, q = np.array([0.1, 0.3, 0.6]), np.array([0.4, 0.4, 0.2])
    llr = np.log2(p / q)
    d = float(np.sum(p * llr))
    expected = float(np.sum(p * (llr - d) ** 2))
    assert dv.rel_entropy_variance(np.diag(p), np.diag(q)) == pytest.approx(expected, abs=1e-13)
    with pytest.raises(ValidationError):
        dv.rel_entropy_variance(diag(1, 0), diag(0, 1))


def test_d_max_examples(rng):
    rho = random_density(3, rng)
    assert dv.d_max(rho, rho) == pytest.approx(0.0, abs=1e-10)
    assert dv.d_max(diag(0.5, 0.5), diag(0.25, 0.75)) == pytest.approx(1.0, abs=1e-14)
    assert dv.d_max(diag(1, 0), diag(0, 1)) is dv.INFINITE


def test_d_max_is_tight(rng):
    for _ in range(10):
        w, t = random_density(3, rng), random_density(3, rng)
        lam = dv.d_max(w, t)
        assert np.linalg.eigvalsh(2.0**lam * t - w)[0] >= -1e-9
        assert np.linalg.eigvalsh(2.0 ** (lam - 0.01) * t - w)[0] < 0


def test_d_h_of_identical_states(rng):
    rho = random_density(3, rng)
    for eps in (0.1, 0.5, 0.9):
        r = dv.d_h_epsilon(rho, rho, eps)
        assert r.value_bits == pytest.approx(-math.log2(1 - eps), abs=1e-9)
    assert dv.d_h_epsilon(rho, rho, 0.5).value_bits == pytest.approx(1.0, abs=1e-9)


def test_d_h_classical_worked_example():
    r = dv.d_h_epsilon(diag(0.5, 0.5), diag(0.75, 0.25), 0.25)
    assert r.beta == pytest.approx(0.625, abs=1e-12)
    assert r.value_bits == pytest.approx(LOG2_8_5, abs=1e-12)
    assert classical_dh([0.5, 0.5], [0.75, 0.25], 0.25) == pytest.approx(LOG2_8_5, abs=1e-15)


def test_d_h_perfect_distinguishability():
    r = dv.d_h_epsilon(diag(1, 0), diag(0, 1), 0.1)
    assert r.perfect_distinguishability
    assert r.value_bits == pytest.approx(math.log2(1e10), abs=1e-12)


def test_d_h_rejects_bad_eps(rng):
    rho = random_density(2, rng)
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(ValidationError):
            dv.d_h_epsilon(rho, rho, eps)


def test_np_result_invariants(rng):
    for _ in range(10):
        d = int(rng.integers(2, 6))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        for eps in (0.05, 0.3, 0.6):
            r = dv.d_h_epsilon(rho, sigma, eps)
            w = np.linalg.eigvalsh(r.test)
            assert w[0] >= -1e-9 and w[-1] <= 1 + 1e-9
            assert np.trace(r.test @ rho).real >= 1 - eps - 1e-8
            assert r.achieved_alpha == pytest.approx(1 - eps, abs=1e-8)
            assert r.value_bits == pytest.approx(-math.log2(np.trace(r.test @ sigma).real), abs=1e-9)
            assert 0.0 <= r.mix_weight <= 1.0
            # weak duality certificate closes
            assert r.beta >= r.dual_beta - 1e-12
            assert r.beta - r.dual_beta <= 1e-8


def test_d_h_monotone_in_eps(rng):
    for _ in range(10):
        rho, sigma = random_density(4, rng), random_density(4, rng)
        vals = [dv.d_h_epsilon(rho, sigma, e).value_bits for e in (0.1, 0.3, 0.5, 0.7)]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6), st.sampled_from([0.05, 0.1, 0.25, 0.5, 0.8]))
def test_d_h_commuting_matches_brute_force(seed, d, eps):
    rng = rng_for(seed)
    p, q = random_probabilities(d, rng), random_probabilities(d, rng)
    r = dv.d_h_epsilon(np.diag(p), np.diag(q), eps)
    assert r.value_bits == pytest.approx(classical_dh(p, q, eps), abs=1e-6)


def test_d_h_on_degenerate_likelihood_plateau():
    # every outcome has the same likelihood ratio; the test must mix on the tie
    r = dv.d_h_epsilon(diag(0.25, 0.25, 0.5), diag(0.25, 0.25, 0.5), 0.3)
    assert r.value_bits == pytest.approx(-math.log2(0.7), abs=1e-9)


def test_cq_hypothesis_test_blocks():
    cq = CqState.from_blocks([0.5, 0.5], [diag(1, 0), diag(0, 1)])
    r = dv.hypothesis_testing_mi(cq, 0.05)
    # derived: classical NP on diag(1/2,0,0,1/2) vs I/4
    assert r.value_bits == pytest.approx(classical_dh([0.5, 0, 0, 0.5], [0.25] * 4, 0.05), abs=1e-9)
    assert r.value_bits == pytest.approx(-math.log2(0.475), abs=1e-12)
    assert len(r.blocks) == 2 and r.blocks[0].shape == (2, 2)
    joint = dv.d_h_epsilon(cq.joint(), cq.product(), 0.05)
    assert r.value_bits == pytest.approx(joint.value_bits, abs=1e-9)


def test_cq_hypothesis_test_matches_dense(rng):
    for _ in range(5):
        cq = random_cq_state(3, 2, rng)
        a = dv.hypothesis_testing_mi(cq, 0.2).value_bits
        b = dv.d_h_epsilon(cq.joint(), cq.product(), 0.2).value_bits
        assert a == pytest.approx(b, abs=1e-8)


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_iid_bernoulli_matches_explicit_product(n):
    p1, q1, eps = 0.5, 0.75, 0.1
    strings = list(itertools.product([0, 1], repeat=n))
    p = np.array([math.prod(p1 if b else 1 - p1 for b in s) for s in strings])
    q = np.array([math.prod(q1 if b else 1 - q1 for b in s) for s in strings])
    explicit = dv.d_h_epsilon(np.diag(p), np.diag(q), eps).value_bits
    assert dv.dh_epsilon_iid_bernoulli(p1, q1, n, eps) == pytest.approx(explicit, abs=1e-9)


def test_entropy_examples():
    assert dv.entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-15)
    assert dv.entropy_variance(np.eye(2) / 2) == pytest.approx(0.0, abs=1e-15)
    psi = np.array([0.6, 0.8j])
    assert dv.entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)
    assert dv.entropy_variance(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)
    p = 0.25
    h = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
    v = p * (math.log2(p) + h) ** 2 + (1 - p) * (math.log2(1 - p) + h) ** 2
    assert dv.entropy(diag(p, 1 - p)) == pytest.approx(h, abs=1e-14)
    assert dv.entropy_variance(diag(p, 1 - p)) == pytest.approx(v, abs=1e-14)


def test_mutual_info_examples(rng):
    rho = random_density(2, rng)
    i, v = dv.mutual_info(CqState.from_blocks([0.3, 0.7], [rho, rho]))
    assert i == pytest.approx(0.0, abs=1e-12) and v == pytest.approx(0.0, abs=1e-12)
    i, v = dv.mutual_info(CqState.from_blocks([0.5, 0.5], [diag(1, 0), diag(0, 1)]))
    assert i == pytest.approx(1.0, abs=1e-12) and v == pytest.approx(0.0, abs=1e-12)


def test_mutual_info_matches_dense_divergence(rng):
    cq = random_cq_state(3, 3, rng)
    i, v = dv.mutual_info(cq)
    assert i == pytest.approx(dv.rel_entropy(cq.joint(), cq.product()), abs=1e-10)
    assert v == pytest.approx(dv.rel_entropy_variance(cq.joint(), cq.product()), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4))
def test_pure_ensemble_information_equals_entropy(seed, n_sym, d):
    ens = random_ensemble(n_sym, d, rng_for(seed))
    cq = ensemble_to_cq(ens)
    i, v = dv.mutual_info(cq)
    rb = cq.marginal()
    assert abs(i - dv.entropy(rb)) <= 1e-9
    assert abs(v - dv.entropy_variance(rb)) <= 1e-9


def test_i_max_upper_examples(rng):
    rho = random_density(2, rng)
    assert dv.i_max_upper(CqState.from_blocks([0.4, 0.6], [rho, rho])) == pytest.approx(0.0, abs=1e-10)
    corr = diag(0.5, 0, 0, 0.5)
    assert dv.i_max_upper(corr, dims=(2, 2)) == pytest.approx(1.0, abs=1e-12)
    cq = CqState.from_blocks([0.5, 0.5], [diag(1, 0), diag(0, 1)])
    assert dv.i_max_upper(cq) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        dv.i_max_upper(corr)


def test_i_max_upper_operator_inequality_and_order(rng):
    for _ in range(20):
        cq = random_cq_state(2, 2, rng)
        val = dv.i_max_upper(cq)
        assert val >= dv.mutual_info(cq)[0] - 1e-9
        assert val == pytest.approx(dv.d_max(cq.joint(), cq.product()), abs=1e-9)
        if np.linalg.eigvalsh(2 * cq.product() - cq.joint())[0] >= 0:
            assert val <= 1 + 1e-12


def test_lemma1_gap():
    assert dv.lemma1_gap(0.5, 0.1) == pytest.approx(math.log2(300), abs=1e-12)
    assert dv.lemma1_gap(0.5, 1 / math.sqrt(100)) == pytest.approx(8.228818690495881, abs=1e-12)
    with pytest.raises(ValidationError):
        dv.lemma1_gap(0.5, math.sqrt(3))
    # gamma = 1 would give log2 3 but lies outside (0, eps) for every eps < 1
    with pytest.raises(ValidationError):
        dv.lemma1_gap(0.9, 1.0)
    with pytest.raises(ValidationError):
        dv.lemma1_gap(1.0, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_relative_entropy_below_dmax(seed):
    rng = rng_for(seed)
    w, t = random_density(3, rng), random_density(3, rng)
    assert float(dv.rel_entropy(w, t)) <= float(dv.d_max(w, t)) + 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 3))
def test_data_processing_partial_trace(seed, d_b):
    rng = rng_for(seed)
    dims = [2, d_b]
    w, t = random_density(2 * d_b, rng), random_density(2 * d_b, rng)
    for keep in ([0], [1]):
        reduced = dv.rel_entropy(partial_trace(w, dims, keep), partial_trace(t, dims, keep))
        assert float(reduced) <= float(dv.rel_entropy(w, t)) + 1e-9
