"""Dense Hermitian linear algebra and state metrics.

Operators are plain complex ``numpy`` arrays. Functions validate their
inputs (Hermiticity, positivity, trace) and raise :class:`ValidationError`
on violation. All logarithms are base 2.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12
KERNEL_TOL = 1e-10
JACOBI_TOL = 1e-13


class ValidationError(ValueError):
    """An operator failed a structural check (Hermitian, PSD, trace, dims)."""


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns, orthonormal


def as_operator(a) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValidationError(f"expected a non-empty square matrix, got shape {arr.shape}")
    return arr


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``a`` as a complex array with its Hermitian part restored exactly.

    Raises if the largest entry of ``a - a^dagger`` exceeds ``tol``.
    """
    a = as_operator(a)
    asym = np.max(np.abs(a - a.conj().T))
    if asym > tol:
        raise ValidationError(f"operator is not Hermitian (max asymmetry {asym:.3e})")
    return (a + a.conj().T) / 2


def check_psd(a, tol: float = PSD_TOL) -> np.ndarray:
    a = check_hermitian(a)
    lam_min = float(np.linalg.eigvalsh(a)[0])
    if lam_min < -tol:
        raise ValidationError(f"operator is not positive semidefinite (eigenvalue {lam_min:.3e})")
    return a


def check_density(rho, normalized: bool = True, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate a (sub)normalized density operator."""
    rho = check_psd(rho)
    tr = float(np.trace(rho).real)
    if normalized:
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"density operator has trace {tr!r}, expected 1")
    elif not (0.0 < tr <= 1.0 + tol):
        raise ValidationError(f"subnormalized state has trace {tr!r} outside (0, 1]")
    return rho


def _jacobi_eigh(h: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic Jacobi sweeps for a complex Hermitian matrix."""
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # unitary acting on the (p, q) plane; zeroes a[p, q]
                g = np.array([[c, s], [-s, c]], dtype=complex)
                g[1, :] *= np.conj(phase)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eig_hermitian(h, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` runs a self-contained cyclic Jacobi iteration;
    the default delegates to LAPACK (``numpy.linalg.eigh``).
    """
    h = check_hermitian(h)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = _jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return EigenDecomposition(w, v)


def support_cutoff(eigenvalues: np.ndarray) -> float:
    return SUPPORT_CUTOFF * max(float(np.max(np.abs(eigenvalues))), 1.0e-300)


def matrix_fn(h, f: Callable[[np.ndarray], np.ndarray], support_only: bool = False) -> np.ndarray:
    """Apply ``f`` to the spectrum of ``h``.

    With ``support_only`` the eigenvalues at or below the support cutoff are
    mapped to zero instead of being passed to ``f``.
    """
    w, v = eig_hermitian(h)
    if support_only:
        keep = np.abs(w) > support_cutoff(w)
        w, v = w[keep], v[:, keep]
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        raise ValueError(f"function undefined at eigenvalue {w[bad][0]!r}")
    return (v * fw) @ v.conj().T


def log2m(h) -> np.ndarray:
    """Matrix log2 on the support."""
    return matrix_fn(h, np.log2, support_only=True)


def sqrtm_psd(h) -> np.ndarray:
    return matrix_fn(h, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def inv_sqrtm(h) -> np.ndarray:
    """Inverse square root on the support (kernel annihilated)."""
    return matrix_fn(h, lambda w: 1.0 / np.sqrt(w), support_only=True)


def tensor(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(h, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    h = as_operator(h)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != h.shape[0]:
        raise ValidationError(f"subsystem dims {dims} do not multiply to {h.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = h.reshape(dims + dims)
    # trace from the highest index down so axis positions stay valid
    for ax in reversed(range(n)):
        if ax in keep:
            continue
        nleft = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ax + nleft)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def trace_norm(a) -> float:
    a = check_hermitian(a)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def fidelity(p, q) -> float:
    """F(P, Q) = ||sqrt(P) sqrt(Q)||_1^2 for PSD operators."""
    p = check_psd(p)
    q = check_psd(q)
    sp = sqrtm_psd(p)
    mu = np.linalg.eigvalsh((sp @ q @ sp + (sp @ q @ sp).conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(mu, 0.0, None))) ** 2)


def root_fidelity(p, q) -> float:
    return math.sqrt(fidelity(p, q))


def purified_distance(rho, sigma) -> float:
    """Purified distance between subnormalized states via a one-dimensional direct sum."""
    rho = check_density(rho, normalized=False)
    sigma = check_density(sigma, normalized=False)
    r_pad = max(1.0 - float(np.trace(rho).real), 0.0)
    s_pad = max(1.0 - float(np.trace(sigma).real), 0.0)
    rho_ext = scipy.linalg.block_diag(rho, [[r_pad]])
    sigma_ext = scipy.linalg.block_diag(sigma, [[s_pad]])
    f = min(fidelity(rho_ext, sigma_ext), 1.0)
    return math.sqrt(max(1.0 - f, 0.0))


def positive_part_projector(h, tol: float = KERNEL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the strictly positive eigenspace and the (near-)kernel of ``h``."""
    w, v = eig_hermitian(h)
    pos = v[:, w > tol]
    ker = v[:, np.abs(w) <= tol]
    return pos @ pos.conj().T, ker @ ker.conj().T


def support_projector(h) -> np.ndarray:
    w, v = eig_hermitian(h)
    s = v[:, np.abs(w) > support_cutoff(w)]
    return s @ s.conj().T
