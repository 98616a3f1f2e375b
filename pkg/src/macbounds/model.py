"""Distributions, channels, encoders and codebooks for two-user MACs.

Alphabets are the index sets ``0..k-1``. A channel is stored as a tensor
``w[x1, x2, y]`` whose last axis is a probability vector. All objects are
immutable after construction: arrays are copied and marked read-only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidDistributionError, SizeCapError

SUM_TOL = 1e-12
CLAMP_TOL = 1e-15
DEFAULT_SIZE_CAP = 10**6


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _validate_pmf_rows(a: np.ndarray, what: str) -> np.ndarray:
    """Clamp tiny negatives and check that the last axis sums to one."""
    if not np.all(np.isfinite(a)):
        raise InvalidDistributionError(f"{what}: non-finite entry")
    if a.size and a.min() < -CLAMP_TOL:
        idx = np.unravel_index(np.argmin(a), a.shape)
        raise InvalidDistributionError(f"{what}: negative entry {a[idx]!r} at {tuple(int(i) for i in idx)}")
    a = np.where(a < 0, 0.0, a)
    sums = a.sum(axis=-1)
    err = np.abs(sums - 1.0)
    if err.size and err.max() > SUM_TOL:
        idx = np.unravel_index(np.argmax(err), err.shape)
        raise InvalidDistributionError(
            f"{what}: row {tuple(int(i) for i in idx)} sums to {sums[idx]!r}, not 1"
        )
    return a


@dataclass(frozen=True)
class Distribution:
    """Probability mass function on a finite set.

    ``probs`` may be a vector or a matrix (e.g. ``p(x1, x2)``); the
    normalization is over all entries.
    """

    probs: np.ndarray

    def __post_init__(self):
        a = np.array(self.probs, dtype=float)
        if a.ndim == 0 or a.size == 0:
            raise InvalidDistributionError("distribution must be a non-empty array")
        a = _validate_pmf_rows(a.reshape(-1), "distribution").reshape(a.shape)
        object.__setattr__(self, "probs", _frozen(a))

    @property
    def size(self) -> int:
        return int(self.probs.size)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    @classmethod
    def uniform(cls, *shape: int) -> "Distribution":
        return cls(np.full(shape, 1.0 / int(np.prod(shape))))

    @classmethod
    def point(cls, index, shape) -> "Distribution":
        a = np.zeros(shape)
        a[index] = 1.0
        return cls(a)


def product(d1: Distribution, d2: Distribution) -> Distribution:
    """Independent product ``p1(x1) p2(x2)`` as an ``(n1, n2)`` matrix."""
    return Distribution(np.multiply.outer(d1.probs.ravel(), d2.probs.ravel()))


@dataclass(frozen=True)
class ClassicalMAC:
    """Two-input channel ``W(y|x1,x2)`` stored as ``w[x1, x2, y]``."""

    w: np.ndarray

    def __post_init__(self):
        a = np.array(self.w, dtype=float)
        if a.ndim != 3 or 0 in a.shape:
            raise DimensionError(f"channel tensor must have shape (n1, n2, m), got {a.shape}")
        a = _validate_pmf_rows(a, "channel")
        object.__setattr__(self, "w", _frozen(a))

    @property
    def n1(self) -> int:
        return self.w.shape[0]

    @property
    def n2(self) -> int:
        return self.w.shape[1]

    @property
    def m(self) -> int:
        return self.w.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.w.shape


@dataclass(frozen=True)
class EncoderPair:
    """Stochastic encoders ``f1[m1, x1]`` and ``f2[m2, x2]``."""

    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        for name in ("f1", "f2"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 2 or 0 in a.shape:
                raise DimensionError(f"{name} must be a (messages, inputs) matrix, got {a.shape}")
            object.__setattr__(self, name, _frozen(_validate_pmf_rows(a, f"encoder {name}")))

    @property
    def M1(self) -> int:
        return self.f1.shape[0]

    @property
    def M2(self) -> int:
        return self.f2.shape[0]

    @property
    def M3(self) -> int:
        return self.M1 * self.M2

    @property
    def n1(self) -> int:
        return self.f1.shape[1]

    @property
    def n2(self) -> int:
        return self.f2.shape[1]

    @classmethod
    def deterministic(cls, c1, c2, n1: int, n2: int) -> "EncoderPair":
        """Encoders sending message ``i`` to codeword ``c[i]`` with probability one."""
        f1 = np.zeros((len(c1), n1))
        f1[np.arange(len(c1)), list(c1)] = 1.0
        f2 = np.zeros((len(c2), n2))
        f2[np.arange(len(c2)), list(c2)] = 1.0
        return cls(f1, f2)


@dataclass(frozen=True)
class CodebookPair:
    c1: tuple[int, ...]
    c2: tuple[int, ...]

    def __post_init__(self):
        for name in ("c1", "c2"):
            c = tuple(int(v) for v in getattr(self, name))
            if not c:
                raise DimensionError(f"codebook {name} is empty")
            if len(set(c)) != len(c):
                raise DimensionError(f"codebook {name} has duplicate codewords: {c}")
            if min(c) < 0:
                raise DimensionError(f"codebook {name} has a negative codeword")
            object.__setattr__(self, name, c)

    @property
    def M1(self) -> int:
        return len(self.c1)

    @property
    def M2(self) -> int:
        return len(self.c2)

    @property
    def M3(self) -> int:
        return self.M1 * self.M2

    def check_against(self, W: ClassicalMAC | None = None, n1: int | None = None, n2: int | None = None):
        if W is not None:
            n1, n2 = W.n1, W.n2
        if max(self.c1) >= n1 or max(self.c2) >= n2:
            raise DimensionError(
                f"codeword out of range: c1={self.c1} (n1={n1}), c2={self.c2} (n2={n2})"
            )

    def encoders(self, n1: int, n2: int) -> EncoderPair:
        self.check_against(n1=n1, n2=n2)
        return EncoderPair.deterministic(self.c1, self.c2, n1, n2)


def _conditional(joint_xy: np.ndarray, marg_x: np.ndarray) -> np.ndarray:
    """``p(y|x)`` with NaN marking rows whose condition has zero probability."""
    out = np.full(joint_xy.shape, np.nan)
    ok = marg_x > 0
    out[ok] = joint_xy[ok] / marg_x[ok, None]
    return out


@dataclass(frozen=True)
class JointPMF:
    """Joint ``p(x1, x2, y)`` with cached marginals and conditionals.

    Conditionals at zero-probability conditions are NaN; see
    :func:`macbounds.classical.require_defined` for how they are guarded.
    """

    p: np.ndarray
    p_y: np.ndarray = field(init=False, repr=False)
    p_x1y: np.ndarray = field(init=False, repr=False)
    p_x2y: np.ndarray = field(init=False, repr=False)
    p_x1x2: np.ndarray = field(init=False, repr=False)
    p_x1: np.ndarray = field(init=False, repr=False)
    p_x2: np.ndarray = field(init=False, repr=False)
    p_y_given_x1: np.ndarray = field(init=False, repr=False)
    p_y_given_x2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.p, dtype=float)
        if a.ndim != 3:
            raise DimensionError(f"joint must have shape (n1, n2, m), got {a.shape}")
        a = _validate_pmf_rows(a.reshape(-1), "joint").reshape(a.shape)
        object.__setattr__(self, "p", _frozen(a))
        x1y = a.sum(axis=1)
        x2y = a.sum(axis=0)
        x1 = x1y.sum(axis=1)
        x2 = x2y.sum(axis=1)
        for name, v in (
            ("p_y", a.sum(axis=(0, 1))),
            ("p_x1y", x1y),
            ("p_x2y", x2y),
            ("p_x1x2", a.sum(axis=2)),
            ("p_x1", x1),
            ("p_x2", x2),
            ("p_y_given_x1", _conditional(x1y, x1)),
            ("p_y_given_x2", _conditional(x2y, x2)),
        ):
            object.__setattr__(self, name, _frozen(v))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p.shape


def _as_input_matrix(p: Distribution, n1: int, n2: int) -> np.ndarray:
    if p.size != n1 * n2:
        raise DimensionError(f"input distribution has {p.size} entries, channel expects {n1}x{n2}")
    return p.probs.reshape(n1, n2)


def joint_from_setting1(p: Distribution, W: ClassicalMAC) -> JointPMF:
    """``p(x1,x2) W(y|x1,x2)``."""
    px = _as_input_matrix(p, W.n1, W.n2)
    return JointPMF(px[:, :, None] * W.w)


def induced_input(enc: EncoderPair) -> tuple[Distribution, Distribution]:
    """Uniform mixtures of the encoder rows, one per user."""
    return Distribution(enc.f1.mean(axis=0)), Distribution(enc.f2.mean(axis=0))


def _check_encoders(enc: EncoderPair, W_n1: int, W_n2: int):
    if enc.n1 != W_n1 or enc.n2 != W_n2:
        raise DimensionError(
            f"encoder output alphabets ({enc.n1}, {enc.n2}) do not match channel inputs ({W_n1}, {W_n2})"
        )


def joint_from_setting2(enc: EncoderPair, W: ClassicalMAC) -> JointPMF:
    """Average over uniform messages of ``f1 f2 W``."""
    _check_encoders(enc, W.n1, W.n2)
    px = np.einsum("ai,bj->ij", enc.f1, enc.f2) / enc.M3
    return JointPMF(px[:, :, None] * W.w)


def setting3_embed(cb: CodebookPair, W: ClassicalMAC) -> tuple[Distribution, ClassicalMAC]:
    """Uniform product input on ``c1 x c2`` and the channel restricted to codeword rows.

    Decisions and inputs of the returned instance are codeword indices
    ``(i, j)`` standing for ``(c1[i], c2[j])``.
    """
    cb.check_against(W)
    sub = W.w[np.ix_(cb.c1, cb.c2)]
    return Distribution.uniform(cb.M1, cb.M2), ClassicalMAC(sub)


def lifted_channel(W: ClassicalMAC, enc: EncoderPair) -> ClassicalMAC:
    """Message-level channel ``V(y|m1,m2) = sum f1 f2 W``."""
    _check_encoders(enc, W.n1, W.n2)
    return ClassicalMAC(np.einsum("ai,bj,ijy->aby", enc.f1, enc.f2, W.w))


def product_extend(W: ClassicalMAC, n: int, size_cap: int = DEFAULT_SIZE_CAP) -> ClassicalMAC:
    """Memoryless ``n``-fold extension.

    Input and output strings are indexed in row-major (lexicographic) order,
    first letter most significant, matching :func:`string_index`.
    """
    if n < 1:
        raise DimensionError("n must be >= 1")
    n1, n2, m = W.shape
    total = (n1 * n2 * m) ** n
    if total > size_cap:
        raise SizeCapError(f"{n}-fold extension has {total} entries, cap is {size_cap}")
    w = W.w
    for _ in range(n - 1):
        # (a1,a2,ay) x (b1,b2,by) -> ((a1 b1), (a2 b2), (ay by))
        w = np.einsum("ikp,jlq->ijklpq", w, W.w).reshape(
            w.shape[0] * n1, w.shape[1] * n2, w.shape[2] * m
        )
    return ClassicalMAC(w)


def product_distribution(d: Distribution, n: int) -> Distribution:
    """``d`` applied independently to each of ``n`` letters (vector form)."""
    v = d.probs.ravel()
    out = v
    for _ in range(n - 1):
        out = np.multiply.outer(out, v).ravel()
    return Distribution(out)


def string_index(letters, alphabet_size: int) -> int:
    """Row-major index of a letter string over ``0..alphabet_size-1``."""
    idx = 0
    for a in letters:
        idx = idx * alphabet_size + int(a)
    return idx


def all_strings(alphabet_size: int, n: int):
    return list(itertools.product(range(alphabet_size), repeat=n))
