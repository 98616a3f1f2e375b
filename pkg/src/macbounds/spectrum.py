"""Finite-blocklength spectrum quantities for classical-quantum MACs.

Everything here is evaluated at a fixed blocklength ``n`` on an explicit
``n``-fold channel. Limits over ``n`` are not computable; the windowed
estimates in :func:`k_window` are labelled as such and certify nothing about
the asymptotic regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, MacBoundsError
from .linalg import POVM, projector_leq
from .model import Distribution, EncoderPair, induced_input
from .quantum import CqMAC, _tr_prod, pe_q2

TRIPLE_TOL = 1e-10
DEFAULT_GRID = (0.0, 2.0, 41)
DEFAULT_GAMMA = 0.1
LIMIT_NOTE = "finite-window estimate; membership in the asymptotic regions is not certified"


@dataclass(frozen=True)
class RatePair:
    R1: float
    R2: float

    def __post_init__(self):
        for name in ("R1", "R2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise MacBoundsError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class SigmaTriple:
    """``(sigma, sigma1[x1], sigma2[x2])`` averaging back to ``sigma`` under ``p1`` and ``p2``."""

    sigma: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    p1: Distribution
    p2: Distribution

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=complex)
        s1 = np.asarray(self.sigma1, dtype=complex)
        s2 = np.asarray(self.sigma2, dtype=complex)
        p1 = self.p1.probs.ravel()
        p2 = self.p2.probs.ravel()
        if s1.shape != (p1.size, *s.shape) or s2.shape != (p2.size, *s.shape):
            raise DimensionError(f"triple shapes sigma{s.shape}, sigma1{s1.shape}, sigma2{s2.shape} do not fit p1, p2")
        r1 = np.linalg.norm(s - np.einsum("x,xrs->rs", p1, s1))
        r2 = np.linalg.norm(s - np.einsum("x,xrs->rs", p2, s2))
        if r1 > TRIPLE_TOL or r2 > TRIPLE_TOL:
            raise MacBoundsError(f"sigma is not the p-average of its components (residuals {r1:.3e}, {r2:.3e})")
        for name, a in (("sigma", s), ("sigma1", s1), ("sigma2", s2)):
            a = np.array(a)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def residuals(self) -> tuple[float, float]:
        p1 = self.p1.probs.ravel()
        p2 = self.p2.probs.ravel()
        return (
            float(np.linalg.norm(self.sigma - np.einsum("x,xrs->rs", p1, self.sigma1))),
            float(np.linalg.norm(self.sigma - np.einsum("x,xrs->rs", p2, self.sigma2))),
        )


@dataclass(frozen=True)
class CodeInstance:
    n: int
    enc: EncoderPair
    Y: POVM

    def __post_init__(self):
        if self.n < 1:
            raise MacBoundsError("blocklength must be >= 1")
        if self.Y.index_shape != (self.enc.M1, self.enc.M2):
            raise DimensionError(f"POVM indexed {self.Y.index_shape}, messages are ({self.enc.M1}, {self.enc.M2})")


def wp_triple(p1: Distribution, p2: Distribution, Wq: CqMAC) -> SigmaTriple:
    """Average output and the two one-sided averages of the channel."""
    a = p1.probs.ravel()
    b = p2.probs.ravel()
    if a.size != Wq.n1 or b.size != Wq.n2:
        raise DimensionError("input distributions do not fit the channel")
    s1 = np.einsum("j,ijrs->irs", b, Wq.states)
    s2 = np.einsum("i,ijrs->jrs", a, Wq.states)
    s = np.einsum("i,irs->rs", a, s1)
    return SigmaTriple(s, s1, s2, p1, p2)


def _check_fit(Wn: CqMAC, p1: Distribution, p2: Distribution, st: SigmaTriple):
    if p1.size != Wn.n1 or p2.size != Wn.n2:
        raise DimensionError("input distributions do not fit the channel")
    if st.sigma.shape[-1] != Wn.dim or st.sigma1.shape[0] != Wn.n1 or st.sigma2.shape[0] != Wn.n2:
        raise DimensionError("sigma triple does not fit the channel")
    if not (np.allclose(st.p1.probs.ravel(), p1.probs.ravel(), atol=1e-12)
            and np.allclose(st.p2.probs.ravel(), p2.probs.ravel(), atol=1e-12)):
        raise MacBoundsError("sigma triple was built for different input distributions")


def threshold_ops(st: SigmaTriple, c1: float, c2: float, c3: float) -> np.ndarray:
    """``c1 sigma2[x2] + c2 sigma1[x1] + c3 sigma`` for every pair."""
    return c1 * st.sigma2[None, :, :, :] + c2 * st.sigma1[:, None, :, :] + c3 * st.sigma[None, None, :, :]


def spectrum_term(Wn: CqMAC, p1: Distribution, p2: Distribution, threshold: np.ndarray) -> float:
    """``sum p1 p2 Tr[W {W <= T}]``."""
    proj = projector_leq(Wn.states, threshold)
    traces = _tr_prod(Wn.states, proj)
    return float(np.einsum("i,j,ij->", p1.probs.ravel(), p2.probs.ravel(), traces))


def k_term(Wn: CqMAC, p1: Distribution, p2: Distribution, st: SigmaTriple, rates: RatePair, n: int) -> float:
    """The threshold ``e^{nR1} sigma2[x2] + e^{nR2} sigma1[x1] + e^{n(R1+R2)} sigma``.

    The user-1 rate multiplies the operator conditioned on ``x2``.
    """
    _check_fit(Wn, p1, p2, st)
    T = threshold_ops(st, math.exp(n * rates.R1), math.exp(n * rates.R2), math.exp(n * (rates.R1 + rates.R2)))
    return spectrum_term(Wn, p1, p2, T)


def k_window(values) -> dict:
    """Max/min over a computed window of ``k_term(n)`` standing in for limsup/liminf."""
    v = [float(x) for x in values]
    return {"limsup_estimate": max(v), "liminf_estimate": min(v), "window": len(v), "label": LIMIT_NOTE}


@dataclass
class ConverseReport:
    n: int
    gamma: float
    rates: tuple[float, float]
    M1: int
    M2: int
    epsilon: float
    rhs: float
    spectrum_B: float
    spectrum_A: float
    rate_precondition: bool
    holds: bool
    slack: float
    notes: list[str] = field(default_factory=list)


def finite_n_converse_check(
    Wn: CqMAC, code: CodeInstance, st: SigmaTriple, gamma: float = DEFAULT_GAMMA, rates: RatePair | None = None
) -> ConverseReport:
    """Compare a code's error with ``sum p1 p2 Tr[W {W <= B}] - 3 e^{-n gamma}``.

    ``B`` uses the exponents ``(R1 - 2g, R2 - 2g, R1 + R2 - 4g)``; the
    intermediate threshold ``A`` (last exponent ``R1 + R2 - 3g``) is reported
    too. The inequality is only guaranteed when ``M_k >= e^{n(R_k - g)}``;
    a failed rate precondition is reported, not hidden.
    """
    if not gamma > 0:
        raise MacBoundsError(f"gamma must be positive, got {gamma}")
    rates = rates or RatePair(0.0, 0.0)
    n = code.n
    p1, p2 = induced_input(code.enc)
    _check_fit(Wn, p1, p2, st)
    R1, R2 = rates.R1, rates.R2
    pre = (
        code.enc.M1 >= math.exp(n * (R1 - gamma)) * (1 - 1e-12)
        and code.enc.M2 >= math.exp(n * (R2 - gamma)) * (1 - 1e-12)
    )
    eps = pe_q2(Wn, code.enc, code.Y)
    c1, c2 = math.exp(n * (R1 - 2 * gamma)), math.exp(n * (R2 - 2 * gamma))
    B = threshold_ops(st, c1, c2, math.exp(n * (R1 + R2 - 4 * gamma)))
    A = threshold_ops(st, c1, c2, math.exp(n * (R1 + R2 - 3 * gamma)))
    kb = spectrum_term(Wn, p1, p2, B)
    ka = spectrum_term(Wn, p1, p2, A)
    rhs = kb - 3 * math.exp(-n * gamma)
    slack = eps - rhs
    notes = [] if pre else ["rate precondition M_k >= exp(n(R_k - gamma)) violated; inequality not guaranteed"]
    return ConverseReport(
        n=n, gamma=float(gamma), rates=(R1, R2), M1=code.enc.M1, M2=code.enc.M2,
        epsilon=eps, rhs=rhs, spectrum_B=kb, spectrum_A=ka,
        rate_precondition=pre, holds=slack >= -1e-8, slack=slack, notes=notes,
    )


def rate_axis(spec=DEFAULT_GRID) -> np.ndarray:
    lo, hi, steps = spec
    steps = int(steps)
    if steps < 1 or hi < lo:
        raise MacBoundsError(f"bad grid axis {spec}")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([float(lo)])


@dataclass
class RegionGrid:
    r1: np.ndarray
    r2: np.ndarray
    k: np.ndarray
    member: np.ndarray
    eps: float
    n: int
    monotonicity_violations: list = field(default_factory=list)
    note: str = LIMIT_NOTE

    def rows(self):
        for i, a in enumerate(self.r1):
            for j, b in enumerate(self.r2):
                yield float(a), float(b), float(self.k[i, j]), int(self.member[i, j])


def region_grid(
    Wq: CqMAC, n: int, p1: Distribution, p2: Distribution, triple=None, eps: float = 0.0,
    grid=(DEFAULT_GRID, DEFAULT_GRID), mono_tol: float = 1e-12,
) -> RegionGrid:
    """Rate pairs on a lattice with ``k_term <= eps`` at blocklength ``n``.

    ``Wq``, ``p1`` and ``p2`` are single-letter; they are extended
    memorylessly to ``n`` letters. ``triple`` is ``None`` (the W_p triple of
    the extended channel) or a :class:`SigmaTriple` already on ``n`` letters.
    Decreases of ``k_term`` along either rate axis are collected in
    ``monotonicity_violations``.
    """
    from .model import product_distribution
    from .quantum import cq_product_extend

    Wn = cq_product_extend(Wq, n) if n > 1 else Wq
    q1 = product_distribution(p1, n)
    q2 = product_distribution(p2, n)
    st = wp_triple(q1, q2, Wn) if triple is None else triple
    _check_fit(Wn, q1, q2, st)
    r1 = rate_axis(grid[0])
    r2 = rate_axis(grid[1])
    k = np.empty((r1.size, r2.size))
    for i, a in enumerate(r1):
        for j, b in enumerate(r2):
            k[i, j] = k_term(Wn, q1, q2, st, RatePair(a, b), n)
    viol = []
    for i in range(r1.size):
        for j in range(r2.size):
            if i > 0 and k[i, j] < k[i - 1, j] - mono_tol:
                viol.append(("R1", float(r1[i - 1]), float(r1[i]), float(r2[j]), float(k[i - 1, j] - k[i, j])))
            if j > 0 and k[i, j] < k[i, j - 1] - mono_tol:
                viol.append(("R2", float(r2[j - 1]), float(r2[j]), float(r1[i]), float(k[i, j - 1] - k[i, j])))
    return RegionGrid(r1, r2, k, k <= eps, float(eps), n, viol)
