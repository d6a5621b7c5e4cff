"""Achievable-rate formulas: one-shot public/private bounds and normal approximations."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .divergences import (
    INFINITE,
    entropy,
    entropy_variance,
    hypothesis_testing_mi,
    i_max_upper,
    lemma1_gap,
)
from .linalg import ValidationError
from .states import BpskParams, CqState, WiretapChannel, bpsk_eigenvalue, reduce_wiretap

# -- scalar functions -------------------------------------------------------

_SQRT2PI = math.sqrt(2.0 * math.pi)

# rational approximation coefficients for the normal quantile (Acklam)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _quantile_guess(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def phi_inv(eps: float) -> float:
    """Inverse standard normal CDF on the open unit interval.

    Rational initial guess refined by two Halley steps. The upper half is
    obtained by odd symmetry so tail accuracy does not depend on 1 - eps.
    """
    if not (0.0 < eps < 1.0):
        raise ValidationError(f"phi_inv argument {eps!r} must lie in (0, 1)")
    if eps > 0.5:
        return -phi_inv(1.0 - eps)
    x = _quantile_guess(eps)
    for _ in range(2):
        err = phi(x) - eps
        u = err * _SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def h2(gamma: float) -> float:
    """Binary entropy in bits, with 0 log 0 = 0."""
    if not (0.0 <= gamma <= 1.0):
        raise ValidationError(f"h2 argument {gamma!r} outside [0, 1]")
    return sum(-t * math.log2(t) for t in (gamma, 1.0 - gamma) if t > 0.0)


def v2(gamma: float) -> float:
    """Binary entropy variance in bits^2."""
    h = h2(gamma)
    return sum(t * (math.log2(t) + h) ** 2 for t in (gamma, 1.0 - gamma) if t > 0.0)


def g_fn(x: float) -> float:
    """g(x) = (x+1) log2(x+1) - x log2 x, the entropy of a thermal state with mean x."""
    if x < 0:
        raise ValidationError(f"g argument {x!r} must be >= 0")
    if x == 0:
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


# -- reports ----------------------------------------------------------------


class Term(NamedTuple):
    name: str
    value_bits: float

    @classmethod
    def of(cls, name: str, value: float) -> "Term":
        return cls(name, value + 0.0)  # drop the sign of a negative zero


@dataclass
class BoundReport:
    """A rate bound itemized into signed terms; ``rate_bits`` is their sum."""

    kind: str
    rate_bits: float
    terms: list[Term] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    valid: bool = True
    reason: str = ""
    vacuous: bool = False
    derived: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def invalid(cls, kind: str, params: dict, reason: str) -> "BoundReport":
        return cls(kind, math.nan, [], params, valid=False, reason=reason)

    @classmethod
    def from_terms(cls, kind: str, terms: list[Term], params: dict, **kw) -> "BoundReport":
        rate = math.fsum(t.value_bits for t in terms)
        return cls(kind, rate, terms, params, vacuous=rate < 0, **kw)

    def term(self, name: str) -> float:
        for t in self.terms:
            if t.name == name:
                return t.value_bits
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["terms"] = [{"name": t.name, "value_bits": t.value_bits} for t in self.terms]
        if not self.valid:
            d["rate_bits"] = None
        return d


@dataclass
class NormalApproxPoint:
    n: int
    rate_per_use_bits: float
    total_bits: float = math.nan
    terms: list[Term] = field(default_factory=list)


def default_slack(n: int) -> float:
    """Slack parameter 1/sqrt(n) used for eta_1, eta_2 and gamma in the n-use regime."""
    return 1.0 / math.sqrt(n)


# -- one-shot bounds ------------------------------------------------------------


def _public_terms(rho_xb: CqState, eps: float, eta: float):
    res = hypothesis_testing_mi(rho_xb, eps - eta)
    terms = [
        Term.of("hypothesis_testing_mi", res.value_bits),
        Term.of("decoding_penalty", -math.log2(4.0 * eps / eta**2)),
    ]
    notes = ["hypothesis test separates perfectly; value capped"] if res.perfect_distinguishability else []
    return terms, notes, res


def oneshot_public_lower(rho_xb: CqState, eps: float, eta: float, maximal_error: bool = False) -> BoundReport:
    """I_H^{eps-eta}(X;B) - log2(4 eps / eta^2), optionally one bit lower for maximal error."""
    params = {"eps": eps, "eta": eta, "maximal_error": maximal_error}
    if not (0.0 < eps < 1.0):
        return BoundReport.invalid("public", params, "eps must lie in (0, 1)")
    if not (0.0 < eta < eps):
        return BoundReport.invalid("public", params, "eta must lie in (0, eps)")
    terms, notes, _ = _public_terms(rho_xb, eps, eta)
    if maximal_error:
        terms.append(Term.of("maximal_error_expurgation", -1.0))
    return BoundReport.from_terms("public", terms, params, notes=notes)


def private_slack_problem(eps1, eps2, eta1, eta2) -> str:
    """Empty string if the slack parameters are admissible, else the reason."""
    if not (0.0 < eps1 < 1.0 and 0.0 < eps2 < 1.0):
        return "eps1 and eps2 must lie in (0, 1)"
    if not (eps1 + math.sqrt(eps2) < 1.0):
        return "eps1 + sqrt(eps2) must lie in (0, 1)"
    if not (0.0 < eta1 < eps1):
        return "eta1 must lie in (0, eps1)"
    if not (0.0 < eta2 < math.sqrt(eps2)):
        return "eta2 must lie in (0, sqrt(eps2))"
    return ""


def oneshot_private_lower(
    ch: WiretapChannel,
    p_x,
    eps1: float,
    eps2: float,
    eta1: float,
    eta2: float,
    eve_dmax_smooth: float | None = None,
    gamma: float | None = None,
) -> BoundReport:
    """One-shot private rate at privacy error eps1 + sqrt(eps2).

    Eve's smooth max-information is replaced by the unsmoothed
    D_max(rho_XE || rho_X (x) rho_E), which upper-bounds it, so the rate
    stays achievable. If a smoothed ``eve_dmax_smooth`` value at smoothing
    sqrt(eps2) - eta2 - gamma is supplied, the converted value
    ``eve_dmax_smooth + log2(3 / gamma^2)`` is used when smaller.
    """
    params = {"eps1": eps1, "eps2": eps2, "eta1": eta1, "eta2": eta2}
    problem = private_slack_problem(eps1, eps2, eta1, eta2)
    if problem:
        return BoundReport.invalid("private", params, problem)
    rho_xb, rho_xe, _, _ = reduce_wiretap(ch, p_x)
    bob_terms, notes, _ = _public_terms(rho_xb, eps1, eta1)
    i_h, decoding_penalty = bob_terms[0].value_bits, bob_terms[1].value_bits

    eve = i_max_upper(rho_xe)
    if eve is INFINITE:
        return BoundReport.invalid("private", params, "Eve's max-information is infinite")
    eve_source = "unsmoothed_dmax"
    if eve_dmax_smooth is not None:
        if gamma is None:
            return BoundReport.invalid("private", params, "gamma required with eve_dmax_smooth")
        params["gamma"] = gamma
        try:
            alt = eve_dmax_smooth + lemma1_gap(math.sqrt(eps2) - eta2, gamma)
        except ValidationError as exc:
            return BoundReport.invalid("private", params, str(exc))
        if alt < eve:
            eve, eve_source = alt, "smoothed_dmax_plus_gap"
    amp_penalty = -2.0 * math.log2(1.0 / eta2)
    terms = [
        Term.of("hypothesis_testing_mi", i_h),
        Term.of("eve_max_information", -eve),
        Term.of("decoding_penalty", decoding_penalty),
        Term.of("privacy_amplification_penalty", amp_penalty),
    ]
    derived = {
        "log2_MK": i_h + decoding_penalty,
        "log2_K": eve - amp_penalty,
        "privacy_error": eps1 + math.sqrt(eps2),
        "eve_term_source": eve_source,
    }
    return BoundReport.from_terms("private", terms, params, derived=derived, notes=notes)


# -- second order -----------------------------------------------------------------


def second_order_private(i_b: float, v_b: float, i_e: float, v_e: float, n: int, eps1: float, eps2: float) -> NormalApproxPoint:
    """Normal approximation n[I_B - I_E] + sqrt(n V_B) Phi^-1(eps1) + sqrt(n V_E) Phi^-1(eps2).

    The O(log n) remainder is omitted.
    """
    if v_b < 0 or v_e < 0:
        raise ValidationError("information variances must be non-negative")
    if n < 1:
        raise ValidationError("n must be >= 1")
    terms = [
        Term.of("first_order", n * (i_b - i_e)),
        Term.of("bob_dispersion", math.sqrt(n * v_b) * phi_inv(eps1)),
        Term.of("eve_dispersion", math.sqrt(n * v_e) * phi_inv(eps2)),
    ]
    total = math.fsum(t.value_bits for t in terms)
    return NormalApproxPoint(n, total / n, total, terms)


def purestate_second_order(rho_b, rho_e, n: int, eps1: float, eps2: float) -> NormalApproxPoint:
    """Second-order rate of a pure-state wiretap channel from the averaged output states."""
    return second_order_private(
        entropy(rho_b), entropy_variance(rho_b), entropy(rho_e), entropy_variance(rho_e), n, eps1, eps2
    )


def bpsk_eigenvalues(p: BpskParams) -> tuple[float, float]:
    return bpsk_eigenvalue(p.eta * p.nbar), bpsk_eigenvalue((1.0 - p.eta) * p.nbar)


def bpsk_asymptote(p: BpskParams) -> float:
    pb, pe = bpsk_eigenvalues(p)
    return h2(pb) - h2(pe)


def bpsk_normal_approx(p: BpskParams, n: int, eps1: float, eps2: float) -> NormalApproxPoint:
    pb, pe = bpsk_eigenvalues(p)
    return second_order_private(h2(pb), v2(pb), h2(pe), v2(pe), n, eps1, eps2)


def ec_private_capacity(p: BpskParams) -> float:
    """Energy-constrained private capacity of the pure-loss channel (bits/use)."""
    return g_fn(p.eta * p.nbar) - g_fn((1.0 - p.eta) * p.nbar)


@dataclass
class Curve:
    """Normal-approximation curve with its two constant reference lines."""

    params: BpskParams
    eps1: float
    eps2: float
    points: list[NormalApproxPoint]
    asymptote: float
    capacity: float


def curve(p: BpskParams, n_grid: Sequence[int], eps1: float, eps2: float) -> Curve:
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("n grid must be non-empty and strictly increasing")
    points = [bpsk_normal_approx(p, n, eps1, eps2) for n in grid]
    return Curve(p, eps1, eps2, points, bpsk_asymptote(p), ec_private_capacity(p))


def log_grid(n_min: int, n_max: int, points: int) -> list[int]:
    """Logarithmically spaced integers, deduplicated, strictly increasing."""
    if n_min < 1 or n_max < n_min or points < 1:
        raise ValidationError("need 1 <= n_min <= n_max and points >= 1")
    if points == 1:
        return [int(n_min)]
    raw = np.unique(np.rint(np.geomspace(n_min, n_max, points)).astype(np.int64))
    return [int(n) for n in raw]
