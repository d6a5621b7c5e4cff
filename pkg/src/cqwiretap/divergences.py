"""Entropies, relative entropies and hypothesis-testing quantities (bits).

Divergences that can be infinite return the :data:`INFINITE` marker rather
than ``math.inf`` so that a support violation is never mistaken for a large
finite answer.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammaln, logsumexp

from .linalg import (
    KERNEL_TOL,
    ValidationError,
    check_density,
    check_hermitian,
    eig_hermitian,
    log2m,
    partial_trace,
    support_cutoff,
)
from .states import CqState

log = logging.getLogger(__name__)

NP_MAX_STEPS = 200
NP_REL_WIDTH = 1e-13
PERFECT_CAP_BITS = math.log2(1.0 / KERNEL_TOL)


class _Infinite:
    """Marker for +infinity (support condition violated)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __float__(self):
        return math.inf

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self


INFINITE = _Infinite()


def is_infinite(x) -> bool:
    return x is INFINITE


class NPSearchError(RuntimeError):
    def __init__(self, msg, bracket):
        super().__init__(f"{msg}; bracket={bracket}")
        self.bracket = bracket


def _spectrum(h):
    w, v = eig_hermitian(h)
    return w, v


def _kernel_weight(omega: np.ndarray, tau: np.ndarray) -> float:
    """Tr{Pi_ker(tau) omega}."""
    w, v = _spectrum(tau)
    ker = v[:, np.abs(w) <= support_cutoff(w)]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(ker.conj().T @ omega @ ker)))


def rel_entropy(omega, tau):
    """D(omega || tau) = Tr omega (log omega - log tau)."""
    omega = check_hermitian(omega)
    tau = check_hermitian(tau)
    if _kernel_weight(omega, tau) > KERNEL_TOL:
        return INFINITE
    val = np.trace(omega @ (log2m(omega) - log2m(tau))).real
    return float(val)


def rel_entropy_variance(omega, tau) -> float:
    omega = check_hermitian(omega)
    tau = check_hermitian(tau)
    if _kernel_weight(omega, tau) > KERNEL_TOL:
        raise ValidationError("support of omega is not contained in the support of tau")
    x = log2m(omega) - log2m(tau)
    d = float(np.trace(omega @ x).real)
    x = x - d * np.eye(x.shape[0])
    return max(float(np.trace(omega @ x @ x).real), 0.0)


def _dmax_ratio(omega: np.ndarray, tau: np.ndarray):
    """Largest eigenvalue of tau^{-1/2} omega tau^{-1/2} on supp(tau), or INFINITE."""
    w, v = _spectrum(tau)
    keep = np.abs(w) > support_cutoff(w)
    ker = v[:, ~keep]
    if ker.shape[1] and float(np.real(np.trace(ker.conj().T @ omega @ ker))) > KERNEL_TOL:
        return INFINITE
    s = v[:, keep] / np.sqrt(w[keep])
    m = s.conj().T @ omega @ s
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[-1])


def d_max(omega, tau):
    """D_max(omega || tau) = log2 of the smallest c with omega <= c tau."""
    r = _dmax_ratio(check_hermitian(omega), check_hermitian(tau))
    if r is INFINITE:
        return INFINITE
    return math.log2(r)


# -- hypothesis testing ------------------------------------------------------


@dataclass
class NpTestResult:
    """Optimal Neyman-Pearson test for D_H^eps(rho || sigma).

    ``blocks`` holds the test restricted to each diagonal block (a single
    block for dense inputs); ``test`` is the assembled operator.
    """

    value_bits: float
    test: np.ndarray
    threshold: float
    mix_weight: float
    achieved_alpha: float
    beta: float
    dual_beta: float
    perfect_distinguishability: bool = False
    blocks: tuple = field(default_factory=tuple)


def _positive_projector(h: np.ndarray) -> np.ndarray:
    w, v = _spectrum(h)
    p = v[:, w > 0.0]
    return p @ p.conj().T


def _np_solve(rho_blocks, sigma_blocks, eps: float, smax: float | None) -> NpTestResult:
    target = 1.0 - eps

    def tests(s):
        projs = [_positive_projector(r - s * g) for r, g in zip(rho_blocks, sigma_blocks)]
        a = math.fsum(float(np.trace(p @ r).real) for p, r in zip(projs, rho_blocks))
        b = math.fsum(float(np.trace(p @ g).real) for p, g in zip(projs, sigma_blocks))
        return projs, a, b

    s_lo = 0.0
    lo = tests(s_lo)
    if lo[1] < target:
        raise NPSearchError("constraint infeasible at threshold 0", (0.0, 0.0))

    s_hi = smax if smax is not None else 1.0
    hi = tests(s_hi)
    while hi[1] >= target and s_hi < 1e300:
        s_lo, lo = s_hi, hi
        s_hi *= 2.0
        hi = tests(s_hi)
    if hi[1] >= target:
        # every threshold test meets the constraint: sigma can be excluded entirely
        projs, a, b = hi
        return _assemble(projs, a, b, s_hi, 1.0, math.nan, perfect=True)

    for _ in range(NP_MAX_STEPS):
        if s_hi - s_lo <= NP_REL_WIDTH * s_hi:
            break
        mid = 0.5 * (s_lo + s_hi)
        cur = tests(mid)
        if cur[1] >= target:
            s_lo, lo = mid, cur
        else:
            s_hi, hi = mid, cur
    else:
        raise NPSearchError(f"threshold search did not converge in {NP_MAX_STEPS} steps", (s_lo, s_hi))

    (p_lo, a_lo, b_lo), (p_hi, a_hi, b_hi) = lo, hi
    c = (target - a_hi) / (a_lo - a_hi)
    if not (-1e-12 <= c <= 1.0 + 1e-12):
        raise NPSearchError(f"mixing weight {c} outside [0, 1]", (s_lo, s_hi))
    c = min(max(c, 0.0), 1.0)
    projs = [c * pl + (1.0 - c) * ph for pl, ph in zip(p_lo, p_hi)]
    alpha = c * a_lo + (1.0 - c) * a_hi
    beta = c * b_lo + (1.0 - c) * b_hi
    s_star = 0.5 * (s_lo + s_hi)
    # weak duality: beta >= [(1-eps) - Tr(rho - s sigma)_+] / s for every s > 0
    pos = math.fsum(
        float(np.sum(np.clip(np.linalg.eigvalsh(r - s_star * g), 0.0, None)))
        for r, g in zip(rho_blocks, sigma_blocks)
    )
    dual = (target - pos) / s_star if s_star > 0 else 0.0
    return _assemble(projs, alpha, beta, s_star, c, dual)


def _assemble(projs, alpha, beta, s, c, dual, perfect=False) -> NpTestResult:
    if beta <= KERNEL_TOL:
        perfect = True
    value = PERFECT_CAP_BITS if perfect else -math.log2(beta)
    projs = [(p + p.conj().T) / 2 for p in projs]
    return NpTestResult(
        value_bits=value,
        test=scipy.linalg.block_diag(*projs),
        threshold=s,
        mix_weight=c,
        achieved_alpha=alpha,
        beta=beta,
        dual_beta=dual,
        perfect_distinguishability=perfect,
        blocks=tuple(projs),
    )


def _check_eps(eps: float):
    if not (0.0 < eps < 1.0):
        raise ValidationError(f"epsilon={eps!r} must lie in (0, 1)")


def d_h_epsilon(rho, sigma, eps: float) -> NpTestResult:
    """Hypothesis testing relative entropy with its optimal test.

    The test is a threshold projector P_+(rho - s sigma) mixed with its
    neighbour across the jump at the optimal threshold, so that the type-I
    constraint Tr{Lambda rho} = 1 - eps holds with equality.
    """
    _check_eps(eps)
    rho = check_density(rho)
    sigma = check_density(sigma)
    dm = d_max(rho, sigma)
    smax = None if dm is INFINITE else 2.0 ** (dm + 1.0)
    return _np_solve([rho], [sigma], eps, smax)


def hypothesis_testing_mi(cq: CqState, eps: float) -> NpTestResult:
    """I_H^eps(X;B) = D_H^eps(rho_XB || rho_X (x) rho_B), solved block by block.

    ``result.blocks[x]`` is the operator Q_B^x = <x| Lambda |x>.
    """
    _check_eps(eps)
    rb = cq.marginal()
    rho_blocks = [p * b for p, b in zip(cq.p_x, cq.blocks)]
    sigma_blocks = [p * rb for p in cq.p_x]
    ratio = _cq_dmax_ratio(cq)
    smax = None if ratio is INFINITE else 2.0 * ratio
    return _np_solve(rho_blocks, sigma_blocks, eps, smax)


def dh_epsilon_iid_bernoulli(p1: float, q1: float, n: int, eps: float) -> float:
    """Exact D_H^eps(rho^n || sigma^n) in bits for rho = Bern(p1), sigma = Bern(q1).

    Strings with equal numbers of ones share a likelihood ratio, so the
    Neyman-Pearson test acts on the n + 1 binomial types.
    """
    _check_eps(eps)
    if not (0.0 < p1 < 1.0 and 0.0 < q1 < 1.0):
        raise ValidationError("Bernoulli parameters must lie in (0, 1)")
    k = np.arange(n + 1)
    logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    log_a = logc + k * math.log(p1) + (n - k) * math.log1p(-p1)
    log_b = logc + k * math.log(q1) + (n - k) * math.log1p(-q1)
    order = np.argsort(-(log_a - log_b), kind="stable")
    target = 1.0 - eps
    acc = 0.0
    included = []
    for idx in order:
        a_k = math.exp(log_a[idx])
        if acc + a_k >= target:
            frac = (target - acc) / a_k
            terms = [log_b[j] for j in included] + [math.log(frac) + log_b[idx]]
            return float(-logsumexp(terms) / math.log(2.0))
        acc += a_k
        included.append(idx)
    raise NPSearchError("type-I target not reached over all types", (acc, target))


# -- entropies and informations ---------------------------------------------


def _eigs(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(check_hermitian(rho))
    return w[w > support_cutoff(w)]


def entropy(rho) -> float:
    """H(rho) = -Tr rho log2 rho."""
    w = _eigs(check_density(rho))
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def entropy_variance(rho) -> float:
    w = _eigs(check_density(rho))
    h = -np.sum(w * np.log2(w))
    return float(max(np.sum(w * (-np.log2(w) - h) ** 2), 0.0))


def mutual_info(cq: CqState) -> tuple[float, float]:
    """Holevo information I(X;B) and information variance V(X;B), blockwise.

    Uses D(rho_XB || rho_X (x) rho_B) = sum_x p(x) D(rho^x || rho_B), which
    avoids forming the |X| d dimensional joint operator.
    """
    rb = cq.marginal()
    lb = log2m(rb)
    terms = []
    for p, b in zip(cq.p_x, cq.blocks):
        if p == 0.0:
            continue
        x = log2m(b) - lb
        terms.append((p, b, x, float(np.trace(b @ x).real)))
    info = math.fsum(p * d for p, _, _, d in terms)
    var = 0.0
    for p, b, x, _ in terms:
        y = x - info * np.eye(x.shape[0])
        var += p * float(np.trace(b @ y @ y).real)
    holevo = entropy(rb) - math.fsum(p * entropy(b) for p, b in zip(cq.p_x, cq.blocks) if p > 0)
    if abs(holevo - info) > 1e-8:
        log.warning("Holevo cross-check mismatch: %r vs %r", info, holevo)
    return max(info, 0.0), max(var, 0.0)


def _cq_dmax_ratio(cq: CqState):
    rb = cq.marginal()
    ratios = [_dmax_ratio(b, rb) for p, b in zip(cq.p_x, cq.blocks) if p > 0]
    if any(r is INFINITE for r in ratios):
        return INFINITE
    return max(ratios)


def i_max_upper(state, dims=None):
    """Unsmoothed D_max(rho_AB || rho_A (x) rho_B).

    It upper-bounds the alternate smooth max-information for every smoothing
    parameter. Accepts a :class:`CqState` or a dense operator with ``dims``
    giving (d_A, d_B).
    """
    if isinstance(state, CqState):
        r = _cq_dmax_ratio(state)
        return INFINITE if r is INFINITE else max(math.log2(r), 0.0)
    if dims is None or len(dims) != 2:
        raise ValidationError("a dense state needs dims=(d_A, d_B)")
    rho = check_density(state)
    ra = partial_trace(rho, dims, [0])
    rb = partial_trace(rho, dims, [1])
    return d_max(rho, np.kron(ra, rb))


def lemma1_gap(eps: float, gamma: float) -> float:
    """Additive gap log2(3 / gamma^2) between the two max-information quantities."""
    _check_eps(eps)
    if not (0.0 < gamma < eps):
        raise ValidationError(f"gamma={gamma!r} must lie in (0, eps={eps!r})")
    return math.log2(3.0 / gamma**2)
