"""Classical-quantum states, wiretap channels and the BPSK pure-loss channel."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import (
    TRACE_TOL,
    ValidationError,
    check_density,
    partial_trace,
    sqrtm_psd,
)

PROB_TOL = 1e-10


def normalize_probabilities(p) -> np.ndarray:
    """Validate a probability vector to 1e-10 and renormalize it exactly."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise ValidationError("empty probability vector")
    if np.any(~np.isfinite(p)) or np.any(p < 0):
        raise ValidationError(f"probability vector has negative or non-finite entries: {p}")
    total = float(math.fsum(p))
    if abs(total - 1.0) > PROB_TOL:
        raise ValidationError(f"probabilities sum to {total!r}, expected 1")
    return p / total


@dataclass(frozen=True)
class CqState:
    """rho_XB = sum_x p(x) |x><x| (x) rho_B^x, stored block by block."""

    symbols: tuple
    p_x: np.ndarray
    blocks: tuple

    def __post_init__(self):
        if len(self.symbols) != len(self.blocks) or len(self.symbols) != len(self.p_x):
            raise ValidationError("symbols, p_x and blocks must have equal length")
        object.__setattr__(self, "p_x", normalize_probabilities(self.p_x))
        dims = {np.shape(b)[0] for b in self.blocks}
        if len(dims) != 1:
            raise ValidationError(f"blocks have inconsistent dimensions {sorted(dims)}")
        checked = []
        for sym, b in zip(self.symbols, self.blocks):
            try:
                checked.append(check_density(b))
            except ValidationError as exc:
                raise ValidationError(f"block for symbol {sym!r}: {exc}") from None
        object.__setattr__(self, "blocks", tuple(checked))

    @classmethod
    def from_blocks(cls, p_x, blocks, symbols=None) -> "CqState":
        if symbols is None:
            symbols = tuple(range(len(blocks)))
        return cls(tuple(symbols), np.asarray(p_x, dtype=float), tuple(blocks))

    @property
    def d(self) -> int:
        return self.blocks[0].shape[0]

    def marginal(self) -> np.ndarray:
        """rho_B = sum_x p(x) rho_B^x."""
        out = np.zeros((self.d, self.d), dtype=complex)
        for p, b in zip(self.p_x, self.blocks):
            out += p * b
        return out

    def joint(self) -> np.ndarray:
        return scipy.linalg.block_diag(*[p * b for p, b in zip(self.p_x, self.blocks)])

    def product(self) -> np.ndarray:
        """rho_X (x) rho_B as a dense block-diagonal operator."""
        rb = self.marginal()
        return scipy.linalg.block_diag(*[p * rb for p in self.p_x])


@dataclass(frozen=True)
class WiretapChannel:
    """x -> rho_BE^x with the B factor first in the tensor ordering."""

    symbols: tuple
    d_b: int
    d_e: int
    outputs: tuple
    p_x: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.d_b < 1 or self.d_e < 1:
            raise ValidationError("d_b and d_e must be positive")
        if len(self.symbols) != len(self.outputs) or not self.symbols:
            raise ValidationError("need one output operator per symbol")
        dim = self.d_b * self.d_e
        checked = []
        for sym, out in zip(self.symbols, self.outputs):
            out = np.asarray(out, dtype=complex)
            if out.shape != (dim, dim):
                raise ValidationError(f"output for symbol {sym!r} has shape {out.shape}, expected {(dim, dim)}")
            try:
                checked.append(check_density(out))
            except ValidationError as exc:
                raise ValidationError(f"output for symbol {sym!r}: {exc}") from None
        object.__setattr__(self, "outputs", tuple(checked))
        if self.p_x is not None:
            p = normalize_probabilities(self.p_x)
            if p.size != len(self.symbols):
                raise ValidationError("p_x length does not match symbol count")
            object.__setattr__(self, "p_x", p)

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)

    def bob_blocks(self) -> list[np.ndarray]:
        return [partial_trace(o, [self.d_b, self.d_e], [0]) for o in self.outputs]

    def eve_blocks(self) -> list[np.ndarray]:
        return [partial_trace(o, [self.d_b, self.d_e], [1]) for o in self.outputs]


@dataclass(frozen=True)
class PureStateEnsemble:
    p_x: np.ndarray
    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "p_x", normalize_probabilities(self.p_x))
        vecs = []
        for i, v in enumerate(self.vectors):
            v = np.asarray(v, dtype=complex).ravel()
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > PROB_TOL:
                raise ValidationError(f"vector {i} has norm {norm!r}, expected 1")
            vecs.append(v)
        if len({v.size for v in vecs}) != 1 or len(vecs) != self.p_x.size:
            raise ValidationError("vectors must share one dimension and match p_x")
        object.__setattr__(self, "vectors", tuple(vecs))


@dataclass(frozen=True)
class BpskParams:
    eta: float
    nbar: float

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise ValidationError(f"transmissivity eta={self.eta!r} must lie in (0, 1)")
        if not (self.nbar >= 0.0 and math.isfinite(self.nbar)):
            raise ValidationError(f"mean photon number nbar={self.nbar!r} must be >= 0")


def reduce_wiretap(ch: WiretapChannel, p_x=None) -> tuple[CqState, CqState, np.ndarray, np.ndarray]:
    """Marginalize a wiretap channel to rho_XB, rho_XE and the receivers' averages."""
    if p_x is None:
        p_x = ch.p_x if ch.p_x is not None else np.full(ch.n_symbols, 1.0 / ch.n_symbols)
    p_x = normalize_probabilities(p_x)
    if p_x.size != ch.n_symbols:
        raise ValidationError(f"p_x has {p_x.size} entries, channel has {ch.n_symbols} symbols")
    rho_xb = CqState(tuple(ch.symbols), p_x, tuple(ch.bob_blocks()))
    rho_xe = CqState(tuple(ch.symbols), p_x, tuple(ch.eve_blocks()))
    return rho_xb, rho_xe, rho_xb.marginal(), rho_xe.marginal()


def ensemble_to_cq(ens: PureStateEnsemble) -> CqState:
    blocks = [np.outer(v, v.conj()) for v in ens.vectors]
    return CqState.from_blocks(ens.p_x, blocks)


def gram_vectors(overlap: float) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors in C^2 with real inner product ``overlap``.

    Columns of the symmetric square root of the Gram matrix [[1, o], [o, 1]].
    """
    g = np.array([[1.0, overlap], [overlap, 1.0]])
    root = sqrtm_psd(g).real
    v0, v1 = root[:, 0], root[:, 1]
    # renormalize against rounding in the square root
    return v0 / np.linalg.norm(v0), v1 / np.linalg.norm(v1)


def bpsk_eigenvalue(transmitted_photons: float) -> float:
    """Larger eigenvalue of the equal mixture of |beta>, |-beta> with |beta|^2 given."""
    return 0.5 * (1.0 + math.exp(-2.0 * transmitted_photons))


def bpsk_channel(p: BpskParams) -> tuple[WiretapChannel, float, float]:
    """Pure-state wiretap channel induced by BPSK over a pure-loss channel.

    Each arm is represented exactly in the span of its two coherent states.
    Returns the channel and the larger eigenvalues (pB, pE) of Bob's and
    Eve's average states.
    """
    bob = gram_vectors(math.exp(-2.0 * p.eta * p.nbar))
    eve = gram_vectors(math.exp(-2.0 * (1.0 - p.eta) * p.nbar))
    outputs = []
    for b, e in zip(bob, eve):
        psi = np.kron(b, e)
        outputs.append(np.outer(psi, psi.conj()))
    ch = WiretapChannel(("+alpha", "-alpha"), 2, 2, tuple(outputs), p_x=np.array([0.5, 0.5]))
    return ch, bpsk_eigenvalue(p.eta * p.nbar), bpsk_eigenvalue((1.0 - p.eta) * p.nbar)


# -- channel files ---------------------------------------------------------

CHANNEL_SUFFIX = ".wtc.json"


class ChannelFormatError(ValueError):
    """A channel file is malformed; the message names the offending field path."""


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(obj, path: str, dim: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ChannelFormatError(f"{path}: expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ChannelFormatError(f"{path}[{i}]: expected {dim} entries")
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)
            ):
                raise ChannelFormatError(f"{path}[{i}][{j}]: expected a [re, im] pair of numbers")
            out[i, j] = complex(z[0], z[1])
    return out


def channel_to_dict(ch: WiretapChannel) -> dict:
    doc = {
        "symbols": [str(s) for s in ch.symbols],
        "d_b": ch.d_b,
        "d_e": ch.d_e,
        "outputs": [_matrix_to_json(o) for o in ch.outputs],
    }
    if ch.p_x is not None:
        doc["p_x"] = [float(p) for p in ch.p_x]
    return doc


def channel_from_dict(doc) -> WiretapChannel:
    if not isinstance(doc, dict):
        raise ChannelFormatError("<root>: expected a JSON object")
    for key in ("symbols", "d_b", "d_e", "outputs"):
        if key not in doc:
            raise ChannelFormatError(f"{key}: missing required field")
    symbols = doc["symbols"]
    if not isinstance(symbols, list) or not symbols:
        raise ChannelFormatError("symbols: expected a non-empty list")
    for key in ("d_b", "d_e"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool) or doc[key] < 1:
            raise ChannelFormatError(f"{key}: expected a positive integer")
    dim = doc["d_b"] * doc["d_e"]
    outputs = doc["outputs"]
    if not isinstance(outputs, list) or len(outputs) != len(symbols):
        raise ChannelFormatError(f"outputs: expected {len(symbols)} matrices, one per symbol")
    mats = [_matrix_from_json(o, f"outputs[{i}]", dim) for i, o in enumerate(outputs)]
    p_x = doc.get("p_x")
    if p_x is not None:
        if not isinstance(p_x, list) or len(p_x) != len(symbols):
            raise ChannelFormatError(f"p_x: expected {len(symbols)} probabilities")
        p_x = np.asarray(p_x, dtype=float)
    for i, m in enumerate(mats):
        try:
            check_density(m, tol=TRACE_TOL)
        except ValidationError as exc:
            raise ChannelFormatError(f"outputs[{i}] (symbol {symbols[i]!r}): {exc}") from None
    try:
        return WiretapChannel(tuple(symbols), doc["d_b"], doc["d_e"], tuple(mats), p_x=p_x)
    except ValidationError as exc:
        raise ChannelFormatError(str(exc)) from None


def save_channel(ch: WiretapChannel, path) -> None:
    # json writes floats with repr, i.e. the shortest string that round-trips exactly
    Path(path).write_text(json.dumps(channel_to_dict(ch), indent=1) + "\n", encoding="utf-8")


def load_channel(path) -> WiretapChannel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"<root>: not valid JSON ({exc})") from None
    return channel_from_dict(doc)


def product_channel(bob_blocks: Sequence[np.ndarray], eve_blocks: Sequence[np.ndarray], symbols=None, p_x=None) -> WiretapChannel:
    """Channel with rho_BE^x = rho_B^x (x) rho_E^x."""
    bob_blocks = [np.asarray(b, dtype=complex) for b in bob_blocks]
    eve_blocks = [np.asarray(e, dtype=complex) for e in eve_blocks]
    if symbols is None:
        symbols = tuple(range(len(bob_blocks)))
    outs = tuple(np.kron(b, e) for b, e in zip(bob_blocks, eve_blocks))
    return WiretapChannel(tuple(symbols), bob_blocks[0].shape[0], eve_blocks[0].shape[0], outs, p_x=p_x)

