"""Classical-quantum MACs: error probability under POVMs and operator lower bounds.

States are stored as ``states[x1, x2]`` (shape ``(n1, n2, d, d)``). The
operator bounds mirror the classical ones in :mod:`macbounds.classical`; on
diagonal embeddings they reduce to them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import AlphaTriple, BoundReport, DominatedFamily
from .errors import DimensionError, DominanceError, MacBoundsError
from .linalg import (
    POVM,
    PSD_TOL,
    check_density,
    check_psd,
    inv_sqrt_psd,
    min_order_gap,
    positive_part_trace,
    projector_leq,
)
from .model import ClassicalMAC, Distribution, EncoderPair, induced_input


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CqMAC:
    """Map ``(x1, x2) -> W_{x1,x2}``, a density operator on ``C^dim``."""

    states: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states)
        if s.ndim != 4 or s.shape[-1] != s.shape[-2] or 0 in s.shape:
            raise DimensionError(f"states must have shape (n1, n2, d, d), got {s.shape}")
        object.__setattr__(self, "states", _frozen(check_density(s, "channel state")))

    @property
    def n1(self) -> int:
        return self.states.shape[0]

    @property
    def n2(self) -> int:
        return self.states.shape[1]

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    @classmethod
    def from_classical(cls, W: ClassicalMAC) -> "CqMAC":
        """Diagonal embedding: ``W_{x1,x2} = diag(W(.|x1,x2))``."""
        n1, n2, m = W.shape
        s = np.zeros((n1, n2, m, m), dtype=complex)
        idx = np.arange(m)
        s[:, :, idx, idx] = W.w
        return cls(s)


def cq_product_extend(Wq: CqMAC, n: int, size_cap: int = 10**6) -> CqMAC:
    """Memoryless ``n``-fold extension; input strings in row-major order."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    n1, n2, d = Wq.n1, Wq.n2, Wq.dim
    if (n1 * n2 * d * d) ** n > size_cap:
        raise MacBoundsError(f"{n}-fold extension exceeds size cap {size_cap}")
    s = Wq.states
    for _ in range(n - 1):
        a1, a2, da = s.shape[0], s.shape[1], s.shape[2]
        s = np.einsum("ikpr,jlqs->ijklpqrs", s, Wq.states).reshape(a1 * n1, a2 * n2, da * d, da * d)
    return CqMAC(s)


def diag_family(fam: DominatedFamily) -> "SigmaFamily":
    """Diagonal operator family carrying a classical dominated family."""
    return SigmaFamily(
        np.diag(fam.q).astype(complex),
        _diag_stack(fam.q1),
        _diag_stack(fam.q2),
    )


def _diag_stack(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    k, m = rows.shape
    out = np.zeros((k, m, m), dtype=complex)
    out[:, np.arange(m), np.arange(m)] = rows
    return out


@dataclass(frozen=True)
class SigmaFamily:
    """Density operator ``sigma`` and PSD operators ``sigma1[x1]``, ``sigma2[x2]``.

    With ``require_order`` (the default) ``sigma >= sigma1[x1]`` and
    ``sigma >= sigma2[x2]`` are enforced; the message-level bound (cor7) only
    needs the weaker averaged condition and checks that itself.
    """

    sigma: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    require_order: bool = True

    def __post_init__(self):
        sigma = check_density(self.sigma, "sigma")
        s1 = check_psd(np.asarray(self.sigma1), "sigma1")
        s2 = check_psd(np.asarray(self.sigma2), "sigma2")
        d = sigma.shape[-1]
        if sigma.ndim != 2 or s1.ndim != 3 or s2.ndim != 3 or s1.shape[1:] != (d, d) or s2.shape[1:] != (d, d):
            raise DimensionError(f"family shapes sigma{sigma.shape}, sigma1{s1.shape}, sigma2{s2.shape} are inconsistent")
        if self.require_order:
            for name, sk in (("sigma1", s1), ("sigma2", s2)):
                gaps = min_order_gap(sigma[None], sk)
                if np.any(gaps < -PSD_TOL):
                    worst = int(np.argmin(gaps))
                    raise DominanceError(
                        f"sigma >= {name}[{worst}] fails (min eigenvalue of difference {gaps[worst]:.3e})",
                        worst,
                        float(-gaps[worst]),
                    )
        object.__setattr__(self, "sigma", _frozen(sigma))
        object.__setattr__(self, "sigma1", _frozen(s1))
        object.__setattr__(self, "sigma2", _frozen(s2))

    @property
    def unit_trace(self) -> bool:
        tr1 = np.real(np.trace(self.sigma1, axis1=-2, axis2=-1))
        tr2 = np.real(np.trace(self.sigma2, axis1=-2, axis2=-1))
        return bool(np.allclose(tr1, 1.0, atol=1e-10) and np.allclose(tr2, 1.0, atol=1e-10))

    def check_shape(self, Wq: CqMAC):
        if (
            self.sigma.shape[-1] != Wq.dim
            or self.sigma1.shape[0] != Wq.n1
            or self.sigma2.shape[0] != Wq.n2
        ):
            raise DimensionError("sigma family does not fit the channel")


def _input_matrix(p: Distribution, Wq: CqMAC) -> np.ndarray:
    if p.size != Wq.n1 * Wq.n2:
        raise DimensionError(f"input distribution has {p.size} entries, channel expects {Wq.n1}x{Wq.n2}")
    return p.probs.reshape(Wq.n1, Wq.n2)


def _tr_prod(a, b) -> np.ndarray:
    """``Tr[A B]`` over stacked pairs (real part)."""
    return np.real(np.einsum("...ij,...ji->...", a, b))


def pe_q1(p: Distribution, Wq: CqMAC, Y: POVM) -> float:
    px = _input_matrix(p, Wq)
    if Y.index_shape != (Wq.n1, Wq.n2) or Y.dim != Wq.dim:
        raise DimensionError(f"POVM indexed {Y.index_shape} (dim {Y.dim}) does not fit channel {Wq.n1}x{Wq.n2} (dim {Wq.dim})")
    return float(1.0 - np.sum(px * _tr_prod(Wq.states, Y.elements)))


def pe_q2(Wq: CqMAC, enc: EncoderPair, Y: POVM) -> float:
    if enc.n1 != Wq.n1 or enc.n2 != Wq.n2:
        raise DimensionError("encoder output alphabets do not match channel inputs")
    if Y.index_shape != (enc.M1, enc.M2) or Y.dim != Wq.dim:
        raise DimensionError(f"POVM indexed {Y.index_shape} does not fit messages ({enc.M1}, {enc.M2})")
    V = message_states(Wq, enc)
    return float(1.0 - np.sum(_tr_prod(V, Y.elements)) / enc.M3)


def message_states(Wq: CqMAC, enc: EncoderPair) -> np.ndarray:
    """``V_{m1,m2} = sum f1(x1|m1) f2(x2|m2) W_{x1,x2}``."""
    return np.einsum("ai,bj,ijrs->abrs", enc.f1, enc.f2, Wq.states)


def sigma_alpha(fam: SigmaFamily, alpha: AlphaTriple) -> np.ndarray:
    """``a1 sigma2[x2] + a2 sigma1[x1] + a3 sigma`` for every pair, shape ``(n1, n2, d, d)``."""
    return (
        alpha.a1 * fam.sigma2[None, :, :, :]
        + alpha.a2 * fam.sigma1[:, None, :, :]
        + alpha.a3 * fam.sigma[None, None, :, :]
    )


def theorem2_positive_part_sum(p: Distribution, Wq: CqMAC, fam: SigmaFamily, alpha) -> float:
    alpha = AlphaTriple.of(alpha)
    if not fam.require_order:
        fam = SigmaFamily(fam.sigma, fam.sigma1, fam.sigma2)
    fam.check_shape(Wq)
    px = _input_matrix(p, Wq)
    diff = px[:, :, None, None] * Wq.states - sigma_alpha(fam, alpha)
    return float(np.sum(positive_part_trace(diff)))


def theorem2_positive_part_sums(p: Distribution, Wq: CqMAC, fam: SigmaFamily, alphas) -> np.ndarray:
    """Vectorized :func:`theorem2_positive_part_sum` over rows of ``alphas``."""
    if not fam.require_order:
        fam = SigmaFamily(fam.sigma, fam.sigma1, fam.sigma2)
    fam.check_shape(Wq)
    px = _input_matrix(p, Wq)
    a = np.asarray(alphas, dtype=float)
    pw = px[:, :, None, None] * Wq.states
    sa = (
        a[:, 0, None, None, None, None] * fam.sigma2[None, None, :, :, :]
        + a[:, 1, None, None, None, None] * fam.sigma1[None, :, None, :, :]
        + a[:, 2, None, None, None, None] * fam.sigma[None, None, None, :, :]
    )
    diff = pw[None] - sa
    w = np.linalg.eigvalsh(diff)
    return np.maximum(w, 0.0).sum(axis=(-1, -2, -3))


def theorem2_bound(p: Distribution, Wq: CqMAC, fam: SigmaFamily, alpha) -> BoundReport:
    alpha = AlphaTriple.of(alpha)
    s = theorem2_positive_part_sum(p, Wq, fam, alpha)
    return BoundReport(
        name="theorem2",
        bound=1.0 - alpha.total - s,
        probability_term=1.0 - s,
        penalty_term=alpha.total,
        params={"alpha": alpha.as_tuple()},
        positive_part_sum=s,
    )


def _spectral_probability(px: np.ndarray, states: np.ndarray, threshold: np.ndarray):
    """``sum p Tr[W {pW <= T}]`` and the number of zero-band eigenvalues met."""
    pw = px[:, :, None, None] * states
    proj, hits = projector_leq(pw, threshold, return_band_hits=True)
    return float(np.sum(px * _tr_prod(states, proj))), int(np.sum(hits))


def cor5_bound(p: Distribution, Wq: CqMAC, fam: SigmaFamily, alpha) -> BoundReport:
    """``sum p Tr[W {pW <= sigma_alpha}] - sum(alpha)``."""
    alpha = AlphaTriple.of(alpha)
    if not fam.require_order:
        fam = SigmaFamily(fam.sigma, fam.sigma1, fam.sigma2)
    fam.check_shape(Wq)
    px = _input_matrix(p, Wq)
    prob, hits = _spectral_probability(px, Wq.states, sigma_alpha(fam, alpha))
    return BoundReport(
        name="cor5",
        bound=prob - alpha.total,
        probability_term=prob,
        penalty_term=alpha.total,
        params={"alpha": alpha.as_tuple()},
        details={"band_hits": hits},
    )


def averaged_states(p: Distribution, Wq: CqMAC):
    """``(W_p, W_{x1,p}, W_{p,x2})``: the p-weighted total and the two partial sums."""
    px = _input_matrix(p, Wq)
    pw = px[:, :, None, None] * Wq.states
    return pw.sum(axis=(0, 1)), pw.sum(axis=1), pw.sum(axis=0)


def cor6_bound(p: Distribution, Wq: CqMAC, alpha) -> BoundReport:
    """``(1 - sum(alpha)) sum p Tr[W {pW <= W_alpha}]`` with ``W_alpha`` from p-averages."""
    alpha = AlphaTriple.of(alpha)
    px = _input_matrix(p, Wq)
    wp, wx1p, wpx2 = averaged_states(p, Wq)
    w_alpha = (
        alpha.a1 * wpx2[None, :, :, :] + alpha.a2 * wx1p[:, None, :, :] + alpha.a3 * wp[None, None, :, :]
    )
    prob, hits = _spectral_probability(px, Wq.states, w_alpha)
    return BoundReport(
        name="cor6",
        bound=(1.0 - alpha.total) * prob,
        probability_term=prob,
        penalty_term=alpha.total * prob,
        params={"alpha": alpha.as_tuple()},
        details={"vacuous": alpha.total > 1.0, "band_hits": hits},
    )


def cor7_check_dominance(enc: EncoderPair, fam: SigmaFamily):
    """``sigma >= (1/M_k) sum_x f_k(x|m) sigma_k[x]`` for every message, as written."""
    for k, f, sk, M in ((1, enc.f1, fam.sigma1, enc.M1), (2, enc.f2, fam.sigma2, enc.M2)):
        mix = np.einsum("ax,xrs->ars", f, sk) / M
        gaps = min_order_gap(fam.sigma[None], mix)
        if np.any(gaps < -PSD_TOL):
            worst = int(np.argmin(gaps))
            raise DominanceError(
                f"sigma >= sigma'_{k}(m{k}={worst}) fails (min eigenvalue {gaps[worst]:.3e})",
                worst,
                float(-gaps[worst]),
            )


def _cor7_inputs(Wq, enc, fam):
    if enc.n1 != Wq.n1 or enc.n2 != Wq.n2:
        raise DimensionError("encoder output alphabets do not match channel inputs")
    fam.check_shape(Wq)
    cor7_check_dominance(enc, fam)


def cor7_positive_part_sum(Wq: CqMAC, enc: EncoderPair, fam: SigmaFamily, gammas) -> float:
    """``sum p1 p2 Tr[(W - sigma~)_+]``; upper-bounds ``1 - Pe - sum_i g_i / M_i``."""
    gammas = AlphaTriple.of(gammas)
    _cor7_inputs(Wq, enc, fam)
    p1, p2 = induced_input(enc)
    diff = Wq.states - sigma_alpha(fam, gammas)
    return float(np.einsum("i,j,ij->", p1.probs, p2.probs, positive_part_trace(diff)))


def cor7_bound(Wq: CqMAC, enc: EncoderPair, fam: SigmaFamily, gammas) -> BoundReport:
    gammas = AlphaTriple.of(gammas)
    s = cor7_positive_part_sum(Wq, enc, fam, gammas)
    penalty = gammas.a1 / enc.M1 + gammas.a2 / enc.M2 + gammas.a3 / enc.M3
    return BoundReport(
        name="cor7",
        bound=1.0 - penalty - s,
        probability_term=1.0 - s,
        penalty_term=penalty,
        params={"gammas": gammas.as_tuple(), "M1": enc.M1, "M2": enc.M2},
        positive_part_sum=s,
        details={"sigma_unit_trace": fam.unit_trace},
    )


def cor7_message_level_sum(Wq: CqMAC, enc: EncoderPair, fam: SigmaFamily, gammas) -> float:
    """Positive-part sum on the message channel, before the convexity step."""
    gammas = AlphaTriple.of(gammas)
    _cor7_inputs(Wq, enc, fam)
    V = message_states(Wq, enc)
    s1p = np.einsum("ax,xrs->ars", enc.f1, fam.sigma1) / enc.M1
    s2p = np.einsum("bx,xrs->brs", enc.f2, fam.sigma2) / enc.M2
    st = (
        gammas.a1 / enc.M1 * s2p[None, :, :, :]
        + gammas.a2 / enc.M2 * s1p[:, None, :, :]
        + gammas.a3 / enc.M3 * fam.sigma[None, None, :, :]
    )
    return float(np.sum(positive_part_trace(V / enc.M3 - st)))


def pgm_decoder(p: Distribution, Wq: CqMAC, cutoff_rel: float = 1e-10) -> POVM:
    """Square-root measurement ``S^{-1/2} p W S^{-1/2}``, ``S = sum p W``.

    The projector onto the kernel of ``S`` is added to decision ``(0, 0)``.
    """
    px = _input_matrix(p, Wq)
    pw = px[:, :, None, None] * Wq.states
    S = pw.sum(axis=(0, 1))
    root, kernel = inv_sqrt_psd(S, cutoff_rel)
    el = root @ pw @ root
    el = (el + np.conj(np.swapaxes(el, -1, -2))) / 2
    el[0, 0] = el[0, 0] + kernel
    return POVM(el)


def pgm_message_decoder(Wq: CqMAC, enc: EncoderPair, cutoff_rel: float = 1e-10) -> POVM:
    """Square-root measurement for the uniform message ensemble."""
    V = message_states(Wq, enc)
    S = V.sum(axis=(0, 1))
    root, kernel = inv_sqrt_psd(S, cutoff_rel)
    el = root @ V @ root
    el = (el + np.conj(np.swapaxes(el, -1, -2))) / 2
    el[0, 0] = el[0, 0] + kernel
    return POVM(el)


def random_povm(dim: int, k, seed) -> POVM:
    """``k`` Wishart-distributed PSD elements renormalized to sum to the identity.

    ``k`` is an element count or an index shape such as ``(n1, n2)``.
    """
    shape = (k,) if np.isscalar(k) else tuple(k)
    count = int(np.prod(shape))
    if count < 1:
        raise MacBoundsError("a POVM needs at least one element")
    if count == 1:
        return POVM(np.eye(dim, dtype=complex).reshape(*shape, dim, dim))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.normal(size=(count, dim, dim)) + 1j * rng.normal(size=(count, dim, dim))
    P = g @ np.conj(np.swapaxes(g, -1, -2))
    root, _ = inv_sqrt_psd(P.sum(axis=0), cutoff_rel=0.0)
    el = root @ P @ root
    el = (el + np.conj(np.swapaxes(el, -1, -2))) / 2
    return POVM(el.reshape(*shape, dim, dim))


def classical_povm(decoder_g: np.ndarray) -> POVM:
    """Diagonal POVM ``Y_{x1,x2} = diag(g(x1,x2|.))`` from a classical decoder."""
    g = np.asarray(decoder_g, dtype=float)
    n1, n2, m = g.shape
    el = np.zeros((n1, n2, m, m), dtype=complex)
    el[:, :, np.arange(m), np.arange(m)] = g
    return POVM(el)


def _largest_scale(sigma: np.ndarray, a: np.ndarray, iters: int = 60) -> float:
    """Largest ``c`` in ``[0, 1]`` with ``sigma >= c a`` (bisection)."""
    if min_order_gap(sigma, a) >= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if min_order_gap(sigma, mid * a) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def constructive_family(p: Distribution, Wq: CqMAC, mix: float = 0.1) -> SigmaFamily:
    """A family satisfying the operator order by construction.

    ``sigma`` is the average output mixed with ``I/d``; each ``sigma_x`` is
    the normalized conditional average state scaled down by bisection until
    it sits below ``sigma``.
    """
    px = _input_matrix(p, Wq)
    d = Wq.dim
    wp, wx1p, wpx2 = averaged_states(p, Wq)
    sigma = (1 - mix) * wp + mix * np.eye(d) / d
    out = []
    for partial, marg, full in ((wx1p, px.sum(axis=1), Wq.states.mean(axis=1)), (wpx2, px.sum(axis=0), Wq.states.mean(axis=0))):
        ops = []
        for x in range(partial.shape[0]):
            avg = partial[x] / marg[x] if marg[x] > 0 else full[x]
            ops.append(_largest_scale(sigma, avg) * avg)
        out.append(np.array(ops))
    return SigmaFamily(sigma, out[0], out[1])

