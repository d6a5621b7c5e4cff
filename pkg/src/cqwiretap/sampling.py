"""Seeded random instances: unitaries, density operators, cq states, channels."""

from __future__ import annotations

import numpy as np

from .states import CqState, PureStateEnsemble, WiretapChannel


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for trial ``index`` of an experiment seeded with ``seed``."""
    return np.random.default_rng(int(seed) + int(index))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with phase correction."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt-style random state of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_probabilities(n: int, rng: np.random.Generator, floor: float = 0.0) -> np.ndarray:
    p = rng.dirichlet(np.ones(n)) + floor
    return p / p.sum()


def random_cq_state(n_symbols: int, d: int, rng: np.random.Generator, rank: int | None = None) -> CqState:
    blocks = [random_density(d, rng, rank) for _ in range(n_symbols)]
    return CqState.from_blocks(random_probabilities(n_symbols, rng, floor=0.02), blocks)


def random_ensemble(n_symbols: int, d: int, rng: np.random.Generator) -> PureStateEnsemble:
    vecs = [random_pure(d, rng) for _ in range(n_symbols)]
    return PureStateEnsemble(random_probabilities(n_symbols, rng, floor=0.02), tuple(vecs))


def random_channel(n_symbols: int, d_b: int, d_e: int, rng: np.random.Generator) -> WiretapChannel:
    outs = tuple(random_density(d_b * d_e, rng) for _ in range(n_symbols))
    return WiretapChannel(tuple(range(n_symbols)), d_b, d_e, outs)


def random_non_leaking_channel(n_symbols: int, d_b: int, d_e: int, rng: np.random.Generator) -> WiretapChannel:
    """rho_BE^x = rho_B^x (x) sigma_E with one Eve state for every symbol."""
    sigma = random_density(d_e, rng)
    outs = tuple(np.kron(random_density(d_b, rng), sigma) for _ in range(n_symbols))
    return WiretapChannel(tuple(range(n_symbols)), d_b, d_e, outs)
