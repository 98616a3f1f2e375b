"""Converse lower bounds on the decoding error of classical MACs.

Two families of results live here:

* positive-part bounds, where ``1 - Pe - penalty`` is upper-bounded by a sum
  of positive parts (``theorem1_*``, ``cor3_*``), reported as
  ``bound = 1 - penalty - positive_part_sum``;
* event-probability bounds (Han, Yagi-Oohama, ``cor1``/``cor2``/``cor4``)
  of the form ``Pr{event} - penalty``.

Event membership uses a non-strict ``<=``: a point is a member when the two
sides agree to within ``TIE_TOL`` relative to their magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, DominanceError, MacBoundsError, UndefinedConditionalError
from .model import (
    ClassicalMAC,
    CodebookPair,
    Distribution,
    EncoderPair,
    JointPMF,
    _check_encoders,
    induced_input,
    joint_from_setting1,
    joint_from_setting2,
    setting3_embed,
)

TIE_TOL = 1e-14
DOMINANCE_TOL = 1e-12
ALPHA_GRID = (0.0, 1e-3, 0.1, 0.25, 0.5, 1.0)


def leq(lhs, rhs, tol: float = TIE_TOL):
    """Elementwise ``lhs <= rhs`` with near-equality counted as a tie (member)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return lhs - rhs <= tol * scale


def require_defined(values: np.ndarray, weight: np.ndarray, what: str) -> np.ndarray:
    """Replace undefined (NaN) cells by 0 after checking they carry no weight."""
    values, weight = np.broadcast_arrays(values, weight)
    bad = np.isnan(values) & (weight > 0)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise UndefinedConditionalError(f"{what}: undefined conditional used with weight {weight[idx]!r} at {idx}")
    return np.where(np.isnan(values), 0.0, values)


@dataclass(frozen=True)
class AlphaTriple:
    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        vals = tuple(float(v) for v in (self.a1, self.a2, self.a3))
        if any(not np.isfinite(v) or v < 0 for v in vals):
            raise MacBoundsError(f"weights must be finite and nonnegative, got {vals}")
        for name, v in zip(("a1", "a2", "a3"), vals):
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, a) -> "AlphaTriple":
        if isinstance(a, AlphaTriple):
            return a
        a1, a2, a3 = a
        return cls(a1, a2, a3)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    @property
    def total(self) -> float:
        return self.a1 + self.a2 + self.a3


def alpha_grid(values=ALPHA_GRID) -> np.ndarray:
    """All triples over ``values``, shape ``(len(values)**3, 3)``."""
    v = np.asarray(values, dtype=float)
    return np.array(np.meshgrid(v, v, v, indexing="ij")).reshape(3, -1).T


def _worst_violation(small: np.ndarray, big: np.ndarray):
    gap = small - big
    idx = np.unravel_index(np.argmax(gap), gap.shape)
    return tuple(int(i) for i in idx), float(gap[idx])


@dataclass(frozen=True)
class DominatedFamily:
    """Output distribution ``q(y)`` and functions ``q1(x1,y)``, ``q2(x2,y)`` below it."""

    q: np.ndarray
    q1: np.ndarray
    q2: np.ndarray

    def __post_init__(self):
        q = Distribution(np.asarray(self.q, dtype=float)).probs
        q1 = np.array(self.q1, dtype=float)
        q2 = np.array(self.q2, dtype=float)
        if q.ndim != 1 or q1.ndim != 2 or q2.ndim != 2 or q1.shape[1] != q.size or q2.shape[1] != q.size:
            raise DimensionError(f"family shapes q{q.shape}, q1{q1.shape}, q2{q2.shape} are inconsistent")
        if q1.min() < 0 or q2.min() < 0:
            raise MacBoundsError("q1 and q2 must be nonnegative")
        for name, qi in (("q1", q1), ("q2", q2)):
            if np.any(qi > q[None, :] + DOMINANCE_TOL):
                where, amount = _worst_violation(qi, np.broadcast_to(q, qi.shape))
                raise DominanceError(
                    f"q(y) >= {name} fails: worst entry {where} exceeds q by {amount:.3e}", where, amount
                )
        q1.setflags(write=False)
        q2.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q2", q2)

    @classmethod
    def output_only(cls, joint: JointPMF) -> "DominatedFamily":
        """``q = q1 = q2 = p(y)``."""
        n1, n2, _ = joint.shape
        py = joint.p_y
        return cls(py, np.tile(py, (n1, 1)), np.tile(py, (n2, 1)))

    @classmethod
    def marginals(cls, joint: JointPMF) -> "DominatedFamily":
        """``q = p(y)``, ``q1 = p(x1, y)``, ``q2 = p(x2, y)``."""
        return cls(joint.p_y, joint.p_x1y, joint.p_x2y)

    def check_shape(self, n1: int, n2: int, m: int):
        if self.q.size != m or self.q1.shape != (n1, m) or self.q2.shape != (n2, m):
            raise DimensionError(
                f"family shapes q1{self.q1.shape}, q2{self.q2.shape}, q({self.q.size}) do not fit ({n1}, {n2}, {m})"
            )


@dataclass
class BoundReport:
    """A computed lower bound on the error probability and its ingredients.

    For event-probability bounds ``bound == probability_term - penalty_term``.
    For positive-part bounds ``positive_part_sum`` is set and
    ``bound == 1 - penalty_term - positive_part_sum``.
    """

    name: str
    bound: float
    probability_term: float
    penalty_term: float
    params: dict[str, Any] = field(default_factory=dict)
    positive_part_sum: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def clamped(self) -> float:
        return max(self.bound, 0.0)


def q_alpha(fam: DominatedFamily, alpha: AlphaTriple) -> np.ndarray:
    """``a1 q2(x2,y) + a2 q1(x1,y) + a3 q(y)`` as an ``(n1, n2, m)`` tensor."""
    return alpha.a1 * fam.q2[None, :, :] + alpha.a2 * fam.q1[:, None, :] + alpha.a3 * fam.q[None, None, :]


def theorem1_positive_part_sum(joint: JointPMF, fam: DominatedFamily, alpha) -> float:
    alpha = AlphaTriple.of(alpha)
    fam.check_shape(*joint.shape)
    return float(np.maximum(joint.p - q_alpha(fam, alpha), 0.0).sum())


def theorem1_positive_part_sums(joint: JointPMF, fam: DominatedFamily, alphas: np.ndarray) -> np.ndarray:
    """Vectorized :func:`theorem1_positive_part_sum` over rows of ``alphas``."""
    fam.check_shape(*joint.shape)
    a = np.asarray(alphas, dtype=float)
    qa = (
        a[:, 0, None, None, None] * fam.q2[None, None, :, :]
        + a[:, 1, None, None, None] * fam.q1[None, :, None, :]
        + a[:, 2, None, None, None] * fam.q[None, None, None, :]
    )
    return np.maximum(joint.p[None] - qa, 0.0).sum(axis=(1, 2, 3))


def theorem1_bound(joint: JointPMF, fam: DominatedFamily, alpha) -> BoundReport:
    alpha = AlphaTriple.of(alpha)
    s = theorem1_positive_part_sum(joint, fam, alpha)
    return BoundReport(
        name="theorem1",
        bound=1.0 - alpha.total - s,
        probability_term=1.0 - s,
        penalty_term=alpha.total,
        params={"alpha": alpha.as_tuple()},
        positive_part_sum=s,
    )


def cor1_bound(joint: JointPMF, fam: DominatedFamily, alpha) -> BoundReport:
    """``Pr{p <= q_alpha} - sum(alpha)``."""
    alpha = AlphaTriple.of(alpha)
    fam.check_shape(*joint.shape)
    member = leq(joint.p, q_alpha(fam, alpha))
    prob = float(joint.p[member].sum())
    return BoundReport(
        name="cor1",
        bound=prob - alpha.total,
        probability_term=prob,
        penalty_term=alpha.total,
        params={"alpha": alpha.as_tuple()},
    )


def p_alpha(joint: JointPMF, alpha: AlphaTriple) -> np.ndarray:
    return (
        alpha.a1 * joint.p_x2y[None, :, :]
        + alpha.a2 * joint.p_x1y[:, None, :]
        + alpha.a3 * joint.p_y[None, None, :]
    )


def cor2_bound(joint: JointPMF, alpha) -> BoundReport:
    """``(1 - sum(alpha)) Pr{p <= p_alpha}``, with the family taken from the joint itself."""
    alpha = AlphaTriple.of(alpha)
    member = leq(joint.p, p_alpha(joint, alpha))
    prob = float(joint.p[member].sum())
    factor = 1.0 - alpha.total
    return BoundReport(
        name="cor2",
        bound=factor * prob,
        probability_term=prob,
        penalty_term=alpha.total * prob,
        params={"alpha": alpha.as_tuple()},
        details={"vacuous": alpha.total > 1.0},
    )


def _setting3_joint(W: ClassicalMAC, cb: CodebookPair) -> tuple[JointPMF, ClassicalMAC]:
    p, sub = setting3_embed(cb, W)
    return joint_from_setting1(p, sub), sub


def han_bound(W: ClassicalMAC, cb: CodebookPair, gamma: float) -> BoundReport:
    """``Pr{L1 u L2 u L3} - 3 gamma`` under the uniform codebook joint."""
    if not gamma > 0:
        raise MacBoundsError(f"gamma must be positive, got {gamma}")
    joint, sub = _setting3_joint(W, cb)
    w = sub.w
    weight = joint.p
    py_x2 = require_defined(joint.p_y_given_x2[None, :, :], weight, "p(y|x2)")
    py_x1 = require_defined(joint.p_y_given_x1[:, None, :], weight, "p(y|x1)")
    L1 = leq(w, gamma * cb.M1 * py_x2)
    L2 = leq(w, gamma * cb.M2 * py_x1)
    L3 = leq(w, gamma * cb.M3 * joint.p_y[None, None, :])
    union = L1 | L2 | L3
    prob = float(weight[union].sum())
    return BoundReport(
        name="han",
        bound=prob - 3.0 * gamma,
        probability_term=prob,
        penalty_term=3.0 * gamma,
        params={"gamma": float(gamma), "M1": cb.M1, "M2": cb.M2},
        details={
            "pr_L1": float(weight[L1].sum()),
            "pr_L2": float(weight[L2].sum()),
            "pr_L3": float(weight[L3].sum()),
        },
    )


def _q_tilde(qjoint: JointPMF, pi: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """``pi1 q(y|x2) + pi2 q(y|x1) + pi3 q(y)``."""
    qy_x2 = require_defined(qjoint.p_y_given_x2[None, :, :], weight, "q(y|x2)")
    qy_x1 = require_defined(qjoint.p_y_given_x1[:, None, :], weight, "q(y|x1)")
    return pi[0] * qy_x2 + pi[1] * qy_x1 + pi[2] * qjoint.p_y[None, None, :]


def _restrict_qcond(qcond: ClassicalMAC, W: ClassicalMAC, cb: CodebookPair) -> ClassicalMAC:
    if qcond.m != W.m:
        raise DimensionError(f"auxiliary channel has {qcond.m} outputs, W has {W.m}")
    if qcond.shape == W.shape:
        return ClassicalMAC(qcond.w[np.ix_(cb.c1, cb.c2)])
    if qcond.shape == (cb.M1, cb.M2, W.m):
        return qcond
    raise DimensionError(f"auxiliary channel shape {qcond.shape} fits neither W {W.shape} nor the codebooks")


def yagi_oohama_bound(
    W: ClassicalMAC, cb: CodebookPair, qcond: ClassicalMAC, pi, gammap: float
) -> BoundReport:
    """``Pr{W <= gamma' q~} - gamma' sum_i pi_i / M_i`` in the codebook setting.

    ``qcond`` is either dimensioned like ``W`` (it is restricted to the
    codebooks) or already indexed by codeword pairs.
    """
    if not gammap > 0:
        raise MacBoundsError(f"gamma' must be positive, got {gammap}")
    pi = Distribution(np.asarray(pi, dtype=float)).probs
    if pi.size != 3:
        raise DimensionError("pi must be a distribution on {1, 2, 3}")
    joint, sub = _setting3_joint(W, cb)
    q_sub = _restrict_qcond(qcond, W, cb)
    qjoint = joint_from_setting1(Distribution.uniform(cb.M1, cb.M2), q_sub)
    qt = _q_tilde(qjoint, pi, joint.p)
    member = leq(sub.w, gammap * qt)
    prob = float(joint.p[member].sum())
    Ms = np.array([cb.M1, cb.M2, cb.M3], dtype=float)
    penalty = float(gammap * (pi / Ms).sum())
    return BoundReport(
        name="yagi_oohama",
        bound=prob - penalty,
        probability_term=prob,
        penalty_term=penalty,
        params={"gammap": float(gammap), "pi": tuple(float(v) for v in pi), "M1": cb.M1, "M2": cb.M2},
    )


def yo_specialized(W: ClassicalMAC, cb: CodebookPair, gamma: float) -> BoundReport:
    """``Pr{W <= gamma (M1 p(y|x2) + M2 p(y|x1) + M3 p(y))} - 3 gamma``."""
    if not gamma > 0:
        raise MacBoundsError(f"gamma must be positive, got {gamma}")
    joint, sub = _setting3_joint(W, cb)
    weight = joint.p
    py_x2 = require_defined(joint.p_y_given_x2[None, :, :], weight, "p(y|x2)")
    py_x1 = require_defined(joint.p_y_given_x1[:, None, :], weight, "p(y|x1)")
    rhs = gamma * (cb.M1 * py_x2 + cb.M2 * py_x1 + cb.M3 * joint.p_y[None, None, :])
    member = leq(sub.w, rhs)
    prob = float(weight[member].sum())
    return BoundReport(
        name="yo",
        bound=prob - 3.0 * gamma,
        probability_term=prob,
        penalty_term=3.0 * gamma,
        params={"gamma": float(gamma), "M1": cb.M1, "M2": cb.M2},
    )


def yo_substitution(cb: CodebookPair, gamma: float) -> tuple[np.ndarray, float]:
    """``(pi, gamma')`` that turn the general bound into :func:`yo_specialized`."""
    Ms = np.array([cb.M1, cb.M2, cb.M3], dtype=float)
    return Ms / Ms.sum(), float(gamma * Ms.sum())


def cor3_check_dominance(enc: EncoderPair, q: np.ndarray, q1c: np.ndarray, q2c: np.ndarray):
    """``q(y) >= (1/M_k) sum_x f_k(x|m) q_k(y|x)`` for every message and output, as written."""
    for k, f, qc, M in ((1, enc.f1, q1c, enc.M1), (2, enc.f2, q2c, enc.M2)):
        mix = f @ qc / M
        if np.any(mix > q[None, :] + DOMINANCE_TOL):
            where, amount = _worst_violation(mix, np.broadcast_to(q, mix.shape))
            raise DominanceError(
                f"q(y) >= q'_{k}(m{k}, y) fails at (m{k}, y)={where} by {amount:.3e}", where, amount
            )


def _cor3_inputs(W, enc, q, q1c, q2c):
    _check_encoders(enc, W.n1, W.n2)
    q = Distribution(np.asarray(q, dtype=float)).probs
    q1c = np.asarray(q1c, dtype=float)
    q2c = np.asarray(q2c, dtype=float)
    if q.shape != (W.m,) or q1c.shape != (W.n1, W.m) or q2c.shape != (W.n2, W.m):
        raise DimensionError(f"q{q.shape}, q1c{q1c.shape}, q2c{q2c.shape} do not fit channel {W.shape}")
    if q1c.min() < 0 or q2c.min() < 0:
        raise MacBoundsError("q1c and q2c must be nonnegative")
    cor3_check_dominance(enc, q, q1c, q2c)
    return q, q1c, q2c


def cor3_positive_part_sum(W: ClassicalMAC, enc: EncoderPair, q, q1c, q2c, gammas) -> float:
    """``sum p1 p2 [W - (g1 q2c(y|x2) + g2 q1c(y|x1) + g3 q(y))]_+``.

    Upper-bounds ``1 - Pe - sum_i g_i / M_i`` for every message decoder.
    """
    gammas = AlphaTriple.of(gammas)
    q, q1c, q2c = _cor3_inputs(W, enc, q, q1c, q2c)
    p1, p2 = induced_input(enc)
    qt = gammas.a1 * q2c[None, :, :] + gammas.a2 * q1c[:, None, :] + gammas.a3 * q[None, None, :]
    pos = np.maximum(W.w - qt, 0.0)
    return float(np.einsum("i,j,ijy->", p1.probs, p2.probs, pos))


def cor3_bound(W: ClassicalMAC, enc: EncoderPair, q, q1c, q2c, gammas) -> BoundReport:
    gammas = AlphaTriple.of(gammas)
    s = cor3_positive_part_sum(W, enc, q, q1c, q2c, gammas)
    penalty = gammas.a1 / enc.M1 + gammas.a2 / enc.M2 + gammas.a3 / enc.M3
    q1c = np.asarray(q1c, dtype=float)
    q2c = np.asarray(q2c, dtype=float)
    normalized = bool(np.allclose(q1c.sum(axis=1), 1.0, atol=1e-12) and np.allclose(q2c.sum(axis=1), 1.0, atol=1e-12))
    return BoundReport(
        name="cor3",
        bound=1.0 - penalty - s,
        probability_term=1.0 - s,
        penalty_term=penalty,
        params={"gammas": gammas.as_tuple(), "M1": enc.M1, "M2": enc.M2},
        positive_part_sum=s,
        details={"conditionals_normalized": normalized},
    )


def cor3_message_level_sum(W: ClassicalMAC, enc: EncoderPair, q, q1c, q2c, gammas) -> float:
    """The positive-part sum on the lifted message channel, before the convexity step."""
    gammas = AlphaTriple.of(gammas)
    q, q1c, q2c = _cor3_inputs(W, enc, q, q1c, q2c)
    V = np.einsum("ai,bj,ijy->aby", enc.f1, enc.f2, W.w)
    q1p = enc.f1 @ q1c / enc.M1
    q2p = enc.f2 @ q2c / enc.M2
    qt = (
        gammas.a1 / enc.M1 * q2p[None, :, :]
        + gammas.a2 / enc.M2 * q1p[:, None, :]
        + gammas.a3 / enc.M3 * q[None, None, :]
    )
    return float(np.maximum(V / enc.M3 - qt, 0.0).sum())


def cor4_bound(W: ClassicalMAC, enc: EncoderPair, qcond: ClassicalMAC, pi, gamma: float) -> BoundReport:
    """``Pr{W <= gamma q~} - gamma sum_i pi_i / M_i`` with stochastic encoders."""
    if gamma < 0:
        raise MacBoundsError(f"gamma must be nonnegative, got {gamma}")
    pi = Distribution(np.asarray(pi, dtype=float)).probs
    if pi.size != 3:
        raise DimensionError("pi must be a distribution on {1, 2, 3}")
    if qcond.shape != W.shape:
        raise DimensionError(f"auxiliary channel shape {qcond.shape} differs from W {W.shape}")
    joint = joint_from_setting2(enc, W)
    qjoint = JointPMF(joint.p_x1x2[:, :, None] * qcond.w)
    qt = _q_tilde(qjoint, pi, joint.p)
    member = leq(W.w, gamma * qt)
    prob = float(joint.p[member].sum())
    Ms = np.array([enc.M1, enc.M2, enc.M3], dtype=float)
    penalty = float(gamma * (pi / Ms).sum())
    return BoundReport(
        name="cor4",
        bound=prob - penalty,
        probability_term=prob,
        penalty_term=penalty,
        params={"gamma": float(gamma), "pi": tuple(float(v) for v in pi), "M1": enc.M1, "M2": enc.M2},
    )
