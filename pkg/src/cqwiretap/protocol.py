"""Desk-scale simulation of the coding scheme.

Covers the Hayashi-Nagaoka operator inequality, the square-root
measurement built from a hypothesis test, Monte-Carlo codebook averages,
convex splitting for classical A, and the exact privacy error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    PSD_TOL,
    ValidationError,
    check_hermitian,
    check_psd,
    inv_sqrtm,
    root_fidelity,
    support_projector,
    trace_norm,
)
from .divergences import NpTestResult
from .sampling import rng_for
from .states import CqState, WiretapChannel, normalize_probabilities, reduce_wiretap

COMPLETENESS_TOL = 1e-8
MAX_STRINGS = 2**20
MAX_PRIVACY_WORK = 2**22  # M * K * (d_B d_E)^2 budget for exact privacy errors
DEFAULT_TRIALS = 1000


class ResourceLimitError(RuntimeError):
    """The requested desk-scale object is too large to build exactly."""


# -- Hayashi-Nagaoka ------------------------------------------------------------


def hn_residual(s, t, c: float) -> float:
    """Smallest eigenvalue of (1+c)(I-S) + (2+c+1/c)T - [I - (S+T)^-1/2 S (S+T)^-1/2].

    The inequality predicts a non-negative value for 0 <= S <= I, T >= 0, c > 0.
    """
    if not c > 0:
        raise ValidationError(f"c={c!r} must be positive")
    s = check_hermitian(s)
    w = np.linalg.eigvalsh(s)
    if w[0] < -PSD_TOL or w[-1] > 1.0 + PSD_TOL:
        raise ValidationError(f"S must satisfy 0 <= S <= I (spectrum [{w[0]:.3e}, {w[-1]:.3e}])")
    t = check_psd(t)
    if t.shape != s.shape:
        raise ValidationError("S and T must have the same shape")
    eye = np.eye(s.shape[0])
    x = inv_sqrtm(s + t)
    lhs = (1.0 + c) * (eye - s) + (2.0 + c + 1.0 / c) * t
    resid = lhs - (eye - x @ s @ x)
    return float(np.linalg.eigvalsh((resid + resid.conj().T) / 2)[0])


# -- codebooks and decoding ---------------------------------------------------------


@dataclass(frozen=True)
class CodebookSample:
    """Codewords x_{m,k} as an M x K array of symbol indices."""

    codewords: np.ndarray
    seed: int
    M: int
    K: int

    def __post_init__(self):
        if self.codewords.shape != (self.M, self.K):
            raise ValidationError(f"codeword array has shape {self.codewords.shape}, expected {(self.M, self.K)}")


def sample_codebook(p_x, M: int, K: int, seed: int, index: int = 0) -> CodebookSample:
    """Draw M*K i.i.d. symbols by inverse CDF from the generator for (seed, index)."""
    if M < 1 or K < 1:
        raise ValidationError("M and K must be positive")
    p = normalize_probabilities(p_x)
    cdf = np.cumsum(p)
    u = rng_for(seed, index).random(M * K)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), p.size - 1)
    return CodebookSample(idx.reshape(M, K), int(seed) + int(index), M, K)


@dataclass
class SrmDecoder:
    """Square-root measurement; ``elements[m][k]`` decodes codeword (m, k)."""

    elements: list
    completion: np.ndarray

    def flat(self) -> list[np.ndarray]:
        return [e for row in self.elements for e in row]

    def completeness_error(self) -> float:
        total = sum(self.flat()) + self.completion
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def _test_blocks(test) -> list[np.ndarray]:
    blocks = test.blocks if isinstance(test, NpTestResult) else test
    return [np.asarray(b, dtype=complex) for b in blocks]


def build_decoder(codebook: CodebookSample, test) -> SrmDecoder:
    """Omega^{x_{m,k}} = S Q^{x_{m,k}} S with S the inverse root of sum Q on its support.

    ``test`` is an :class:`NpTestResult` from a cq state (its blocks are
    the operators Q^x) or the list of blocks itself. The completion element
    is the projector onto the kernel of sum Q, which makes the elements
    sum to the identity.
    """
    q = _test_blocks(test)
    chosen = [[q[x] for x in row] for row in codebook.codewords]
    total = sum(op for row in chosen for op in row)
    if trace_norm(total) <= PSD_TOL:
        raise ValidationError("test operators sum to zero; decoder undefined")
    s = inv_sqrtm(total)
    elements = [[s @ op @ s for op in row] for row in chosen]
    completion = np.eye(total.shape[0]) - support_projector(total)
    dec = SrmDecoder(elements, completion)
    err = dec.completeness_error()
    if err > COMPLETENESS_TOL:
        raise ValidationError(f"decoder elements sum to identity only within {err:.3e}")
    return dec


def _bob_blocks(source) -> list[np.ndarray]:
    if isinstance(source, WiretapChannel):
        return source.bob_blocks()
    if isinstance(source, CqState):
        return list(source.blocks)
    return [np.asarray(b, dtype=complex) for b in source]


def decode_error(bob, codebook: CodebookSample, decoder: SrmDecoder, m: int, k: int) -> float:
    """1 - Tr{Omega^{x_{m,k}} rho_B^{x_{m,k}}}."""
    if not (0 <= m < codebook.M and 0 <= k < codebook.K):
        raise IndexError(f"codeword index ({m}, {k}) out of range")
    rho = _bob_blocks(bob)[codebook.codewords[m, k]]
    return 1.0 - float(np.trace(decoder.elements[m][k] @ rho).real)


def average_decode_error(bob, codebook: CodebookSample, decoder: SrmDecoder) -> float:
    blocks = _bob_blocks(bob)
    errs = [
        1.0 - float(np.trace(decoder.elements[m][k] @ blocks[codebook.codewords[m, k]]).real)
        for m in range(codebook.M)
        for k in range(codebook.K)
    ]
    return math.fsum(errs) / len(errs)


@dataclass
class ExperimentConfig:
    M: int
    K: int
    trials: int
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MonteCarloResult:
    mean: float
    ci95: float
    std: float
    samples: np.ndarray
    config: ExperimentConfig
    within_budget: bool = True

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "ci95": self.ci95,
            "std": self.std,
            "within_budget": self.within_budget,
            "config": self.config.to_dict(),
        }


def summarize(samples: Sequence[float], config: ExperimentConfig, within_budget: bool = True) -> MonteCarloResult:
    x = np.asarray(samples, dtype=float)
    mean = math.fsum(x) / x.size
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return MonteCarloResult(mean, 1.96 * std / math.sqrt(x.size), std, x, config, within_budget)


def mc_average_error(
    bob,
    p_x,
    M: int,
    K: int,
    test,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    log2_mk_budget: float | None = None,
) -> MonteCarloResult:
    """Monte-Carlo estimate of the codebook-averaged decoding error.

    Trial i draws its codebook from the generator seeded with seed + i.
    ``within_budget`` is false when log2(MK) exceeds ``log2_mk_budget``.
    """
    if trials < 1:
        raise ValidationError("trials must be positive")
    blocks = _bob_blocks(bob)
    samples = []
    for i in range(trials):
        cb = sample_codebook(p_x, M, K, seed, i)
        samples.append(average_decode_error(blocks, cb, build_decoder(cb, test)))
    ok = log2_mk_budget is None or math.log2(M * K) <= log2_mk_budget + 1e-12
    cfg = ExperimentConfig(M, K, trials, int(seed), {"log2_mk_budget": log2_mk_budget})
    return summarize(samples, cfg, ok)


# -- convex splitting ------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexSplitState:
    """tau_{A_1..A_K B} for classical A: ``blocks[a] = (weight, rho_B block)``."""

    K: int
    d_a: int
    blocks: dict

    def marginal(self, k: int) -> list[np.ndarray]:
        """Unnormalized B blocks of tau_{A_k B}, one per value of A_k."""
        d = next(iter(self.blocks.values()))[1].shape[0]
        out = [np.zeros((d, d), dtype=complex) for _ in range(self.d_a)]
        for a, (w, b) in self.blocks.items():
            out[a[k]] += w * b
        return out


def _guard_strings(d_a: int, K: int):
    if K < 1:
        raise ValidationError("K must be >= 1")
    if d_a**K > MAX_STRINGS:
        raise ResourceLimitError(f"d_A^K = {d_a}^{K} exceeds the limit of 2^20 strings")


def convex_split_state(cq: CqState, K: int) -> ConvexSplitState:
    """Uniform mixture over the K placements of rho_AB among K - 1 copies of rho_A.

    For string a = (a_1..a_K) the weight is prod p(a_i) and the B block is
    (1/K) sum_k rho_B^{a_k}.
    """
    d_a = len(cq.p_x)
    _guard_strings(d_a, K)
    blocks = {}
    for a in itertools.product(range(d_a), repeat=K):
        w = math.prod(cq.p_x[i] for i in a)
        blocks[a] = (w, sum(cq.blocks[i] for i in a) / K)
    return ConvexSplitState(K, d_a, blocks)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def convex_split_fidelity(cq: CqState, K: int, method: str = "types") -> float:
    """F(tau_{A^K B}, rho_A^{(x)K} (x) rho_B) for classical A.

    Both operators are block diagonal on A^K with equal weights, so the
    root fidelity is sum_a w(a) sqrt F(tau_B^a, rho_B). Blocks depend on a
    only through its type, which ``method="types"`` exploits.
    """
    rb = cq.marginal()
    d_a = len(cq.p_x)
    if method == "strings":
        tau = convex_split_state(cq, K)
        root = math.fsum(w * root_fidelity(b, rb) for w, b in tau.blocks.values())
    elif method == "types":
        if K < 1:
            raise ValidationError("K must be >= 1")
        if math.comb(K + d_a - 1, d_a - 1) > MAX_STRINGS:
            raise ResourceLimitError("number of types exceeds the limit of 2^20")
        terms = []
        for counts in _compositions(K, d_a):
            mult = math.factorial(K) // math.prod(math.factorial(c) for c in counts)
            w = mult * math.prod(p**c for p, c in zip(cq.p_x, counts))
            if w == 0.0:
                continue
            block = sum(c * b for c, b in zip(counts, cq.blocks) if c) / K
            terms.append(w * root_fidelity(block, rb))
        root = math.fsum(terms)
    else:
        raise ValueError(f"unknown method {method!r}")
    return min(root, 1.0) ** 2


def convex_split_fidelity_bound(d_max_bits: float, K: int) -> float:
    """1 / (1 + (2^Dmax - 1)/K)."""
    return 1.0 / (1.0 + (2.0**d_max_bits - 1.0) / K)


# -- privacy error ---------------------------------------------------------------------


def _apply_on_b(omega: np.ndarray, rho_be: np.ndarray, d_b: int, d_e: int) -> np.ndarray:
    """Tr_B[(Omega (x) I_E) rho_BE]."""
    r = rho_be.reshape(d_b, d_e, d_b, d_e)
    return np.einsum("ij,jeif->ef", omega, r)


def privacy_error(ch: WiretapChannel, codebook: CodebookSample, decoder: SrmDecoder, reference_e=None, p_x=None) -> float:
    """(1/M) sum_m 1/2 || M_{B->M'}((1/K) sum_k rho_BE^{x_{m,k}}) - |m><m| (x) sigma_E ||_1.

    The measurement map sends outcome (m', k) to m' and the completion
    outcome to an extra erasure symbol. ``reference_e`` defaults to the
    channel marginal rho_E under ``p_x`` (or the channel's own / uniform).
    """
    d_b, d_e = ch.d_b, ch.d_e
    M, K = codebook.M, codebook.K
    if M * K * (d_b * d_e) ** 2 > MAX_PRIVACY_WORK:
        raise ResourceLimitError("privacy error computation exceeds the desk-scale budget")
    if reference_e is None:
        reference_e = reduce_wiretap(ch, p_x)[3]
    sigma = check_psd(reference_e)
    per_message_povm = [sum(row) for row in decoder.elements]
    errs = []
    for m in range(M):
        omega = sum(ch.outputs[x] for x in codebook.codewords[m]) / K
        wrong = math.fsum(
            float(np.trace(_apply_on_b(per_message_povm[j], omega, d_b, d_e)).real) for j in range(M) if j != m
        )
        erased = float(np.trace(_apply_on_b(decoder.completion, omega, d_b, d_e)).real)
        right = _apply_on_b(per_message_povm[m], omega, d_b, d_e)
        errs.append(0.5 * (wrong + erased + trace_norm(right - sigma)))
    return min(max(math.fsum(errs) / M, 0.0), 1.0)
