"""Hermitian operator helpers: spectra, spectral projectors, positive parts.

Functions accept a single ``(d, d)`` matrix or a stack ``(..., d, d)``.
Two eigensolvers are available: LAPACK (``method="lapack"``, the default)
and a cyclic complex Jacobi iteration (``method="jacobi"``) that shares no
code with LAPACK and is used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidStateError, NonHermitianError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
BAND_REL = 1e-12
JACOBI_REL = 1e-13


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Symmetrize ``(A + A^dagger)/2`` when the relative asymmetry is below ``tol``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {a.shape}")
    ah = np.conj(np.swapaxes(a, -1, -2))
    asym = np.linalg.norm(a - ah, axis=(-2, -1))
    # relative to ||A||, absolute for near-zero matrices
    scale = np.maximum(np.linalg.norm(a, axis=(-2, -1)), 1.0)
    rel = asym / scale
    if np.any(rel > tol):
        idx = np.unravel_index(np.argmax(rel), rel.shape) if rel.ndim else ()
        raise NonHermitianError(f"matrix {tuple(int(i) for i in idx)} is not Hermitian (relative asymmetry {np.max(rel):.3e})")
    return (a + ah) / 2


def _jacobi_eigh_single(a: np.ndarray, max_sweeps: int = 100):
    a = np.array(a, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0 or d == 1:
        return np.real(np.diag(a)).copy(), v
    thresh = JACOBI_REL * norm
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= thresh:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # phase-align the (p, q) entry, then a real plane rotation
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = np.conj(g.T) @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
    return np.real(np.diag(a)).copy(), v


def hermitian_eig(a, method: str = "lapack"):
    """Eigenvalues in descending order and orthonormal eigenvector columns."""
    a = as_hermitian(a)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
    elif method == "jacobi":
        flat = a.reshape(-1, *a.shape[-2:])
        pairs = [_jacobi_eigh_single(m) for m in flat]
        w = np.stack([p[0] for p in pairs]).reshape(a.shape[:-1])
        v = np.stack([p[1] for p in pairs]).reshape(a.shape)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def eigvalsh(a) -> np.ndarray:
    return np.linalg.eigvalsh(as_hermitian(a))


def _band(w: np.ndarray) -> np.ndarray:
    return BAND_REL * np.max(np.abs(w), axis=-1, keepdims=True)


def projector_leq(a, b, return_band_hits: bool = False, method: str = "lapack"):
    """Projector onto the span of eigenvectors of ``A - B`` with eigenvalue <= 0.

    Eigenvalues within ``1e-12 * ||A - B||`` of zero count as ``<= 0``;
    ``return_band_hits`` also returns how many did so.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionError(f"operator dimensions differ: {a.shape} vs {b.shape}")
    w, v = hermitian_eig(a - b, method=method)
    band = _band(w)
    keep = w <= band
    vk = v * keep[..., None, :]
    proj = vk @ np.conj(np.swapaxes(v, -1, -2))
    if return_band_hits:
        hits = np.sum(np.abs(w) <= band, axis=-1)
        return proj, hits
    return proj


def projector_gt(a, b, method: str = "lapack"):
    """Complement of :func:`projector_leq`: eigenvalues of ``A - B`` strictly positive."""
    a = np.asarray(a)
    eye = np.eye(a.shape[-1])
    return eye - projector_leq(a, b, method=method)


def projector_geq(a, method: str = "lapack"):
    """``{A >= 0}``: eigenvectors of ``A`` with eigenvalue >= 0, zero band included."""
    w, v = hermitian_eig(a, method=method)
    keep = w >= -_band(w)
    vk = v * keep[..., None, :]
    return vk @ np.conj(np.swapaxes(v, -1, -2))


def positive_part_trace(a):
    """``Tr[A_+]``, the sum of the positive eigenvalues."""
    w = eigvalsh(a)
    out = np.maximum(w, 0.0).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def psd_order_holds(s, t, tol: float = PSD_TOL) -> bool:
    """``S >= T`` in the PSD order, up to ``tol`` on the smallest eigenvalue."""
    s = np.asarray(s)
    t = np.asarray(t)
    if s.shape[-2:] != t.shape[-2:]:
        raise DimensionError(f"operator dimensions differ: {s.shape} vs {t.shape}")
    return bool(np.all(eigvalsh(s - t)[..., 0] >= -tol))


def min_order_gap(s, t) -> np.ndarray:
    """Smallest eigenvalue of ``S - T`` (per stacked pair)."""
    return eigvalsh(np.asarray(s) - np.asarray(t))[..., 0]


def diag_embed(d) -> np.ndarray:
    """Diagonal density operator carrying the probabilities ``d``."""
    probs = getattr(d, "probs", d)
    return np.diag(np.asarray(probs, dtype=float).ravel()).astype(complex)


def check_density(rho, what: str = "state") -> np.ndarray:
    """Validate PSD (eigenvalues >= -1e-10) and unit trace (within 1e-10)."""
    try:
        rho = as_hermitian(rho)
    except NonHermitianError as exc:
        raise InvalidStateError(f"{what}: {exc}") from None
    w = np.linalg.eigvalsh(rho)
    if np.any(w[..., 0] < -PSD_TOL):
        idx = np.unravel_index(np.argmin(w[..., 0]), w.shape[:-1]) if w.ndim > 1 else ()
        raise InvalidStateError(
            f"{what} {tuple(int(i) for i in idx)} is not positive semidefinite (min eigenvalue {w[..., 0].min():.3e})",
        )
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(np.abs(tr - 1) > TRACE_TOL):
        idx = np.unravel_index(np.argmax(np.abs(tr - 1)), tr.shape) if tr.ndim else ()
        raise InvalidStateError(f"{what} {tuple(int(i) for i in idx)} has trace {tr[idx]!r}, not 1")
    return rho


def check_psd(a, what: str = "operator") -> np.ndarray:
    a = as_hermitian(a)
    w = np.linalg.eigvalsh(a)
    if np.any(w[..., 0] < -PSD_TOL):
        raise InvalidStateError(f"{what} is not positive semidefinite (min eigenvalue {w[..., 0].min():.3e})")
    return a


@dataclass(frozen=True)
class POVM:
    """Measurement elements ``elements[i, j]`` indexed by a decision pair (or any index shape)."""

    elements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.elements)
        if e.ndim < 3 or e.shape[-1] != e.shape[-2]:
            raise DimensionError(f"POVM elements must have shape (..., d, d), got {e.shape}")
        try:
            e = check_psd(e, "POVM element")
        except NonHermitianError as exc:
            raise InvalidStateError(f"POVM element: {exc}") from None
        d = e.shape[-1]
        total = e.reshape(-1, d, d).sum(axis=0)
        resid = np.linalg.norm(total - np.eye(d))
        if resid > COMPLETENESS_TOL:
            raise InvalidStateError(f"POVM elements sum to identity only within {resid:.3e}")
        e = np.array(e)
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)

    @property
    def index_shape(self) -> tuple[int, ...]:
        return self.elements.shape[:-2]

    @property
    def dim(self) -> int:
        return self.elements.shape[-1]


def inv_sqrt_psd(s, cutoff_rel: float = 1e-10):
    """Pseudo-inverse square root on the support and the kernel projector."""
    w, v = np.linalg.eigh(as_hermitian(s))
    cut = cutoff_rel * max(w.max(), 0.0)
    keep = w > cut
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    root = (v * inv) @ np.conj(v.T)
    kernel = (v * ~keep) @ np.conj(v.T)
    return root, kernel


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + np.conj(g.T)) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix."""
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ np.conj(g.T)
    return rho / np.real(np.trace(rho))


def is_projector(p, tol: float = 1e-10) -> bool:
    p = np.asarray(p)
    return bool(np.linalg.norm(p @ p - p) <= tol and np.linalg.norm(p - np.conj(p.T)) <= tol)
