"""Error probability of classical MAC decoders, plus the optimal-decoder oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SizeCapError
from .model import (
    ClassicalMAC,
    CodebookPair,
    Distribution,
    EncoderPair,
    JointPMF,
    _as_input_matrix,
    _check_encoders,
    _frozen,
    _validate_pmf_rows,
)

EXHAUSTIVE_CAP = 10**6


@dataclass(frozen=True)
class Decoder:
    """Reversed channel ``g[d1, d2, y]``; each ``g[:, :, y]`` sums to one."""

    g: np.ndarray

    def __post_init__(self):
        a = np.array(self.g, dtype=float)
        if a.ndim != 3 or 0 in a.shape:
            raise DimensionError(f"decoder must have shape (d1, d2, m), got {a.shape}")
        cols = np.moveaxis(a, 2, 0).reshape(a.shape[2], -1)
        cols = _validate_pmf_rows(cols, "decoder column")
        a = np.moveaxis(cols.reshape(a.shape[2], a.shape[0], a.shape[1]), 0, 2)
        object.__setattr__(self, "g", _frozen(a))

    @property
    def shape(self):
        return self.g.shape

    @classmethod
    def from_choices(cls, choices, d1: int, d2: int) -> "Decoder":
        """Deterministic decoder; ``choices[y]`` is a decision pair."""
        g = np.zeros((d1, d2, len(choices)))
        for y, (a, b) in enumerate(choices):
            g[a, b, y] = 1.0
        return cls(g)


def _check_decoder(g: Decoder, d1: int, d2: int, m: int):
    if g.shape != (d1, d2, m):
        raise DimensionError(f"decoder shape {g.shape} does not match decisions ({d1}, {d2}) x outputs {m}")


def pe_setting1(p: Distribution, W: ClassicalMAC, g: Decoder) -> float:
    px = _as_input_matrix(p, W.n1, W.n2)
    _check_decoder(g, W.n1, W.n2, W.m)
    return float(1.0 - np.einsum("ij,ijy,ijy->", px, W.w, g.g))


def pe_setting2(W: ClassicalMAC, enc: EncoderPair, g: Decoder) -> float:
    _check_encoders(enc, W.n1, W.n2)
    _check_decoder(g, enc.M1, enc.M2, W.m)
    s = np.einsum("ai,bj,ijy,aby->", enc.f1, enc.f2, W.w, g.g)
    return float(1.0 - s / enc.M3)


def pe_setting3(W: ClassicalMAC, cb: CodebookPair, g: Decoder) -> float:
    """Decisions are codeword index pairs ``(i, j)`` for ``(c1[i], c2[j])``."""
    cb.check_against(W)
    _check_decoder(g, cb.M1, cb.M2, W.m)
    sub = W.w[np.ix_(cb.c1, cb.c2)]
    return float(1.0 - np.einsum("ijy,ijy->", sub, g.g) / cb.M3)


def map_decoder(joint: JointPMF) -> Decoder:
    """Argmax of ``p(x1, x2, y)`` per output; ties go to the lowest ``(x1, x2)``."""
    n1, n2, m = joint.shape
    flat = joint.p.reshape(n1 * n2, m)
    best = np.argmax(flat, axis=0)  # first maximum = lexicographically lowest pair
    g = np.zeros((n1 * n2, m))
    g[best, np.arange(m)] = 1.0
    return Decoder(g.reshape(n1, n2, m))


def min_error(joint: JointPMF) -> float:
    """Smallest achievable error: ``1 - sum_y max_{x1,x2} p(x1, x2, y)``."""
    n1, n2, m = joint.shape
    return float(1.0 - joint.p.reshape(n1 * n2, m).max(axis=0).sum())


def random_decoder(dims, seed) -> Decoder:
    """Columns drawn from a flat Dirichlet; ``dims = (d1, d2, m)``."""
    d1, d2, m = dims
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cols = rng.dirichlet(np.ones(d1 * d2), size=m)
    cols /= cols.sum(axis=1, keepdims=True)
    return Decoder(cols.T.reshape(d1, d2, m))


def exhaustive_min_error(joint: JointPMF, cap: int = EXHAUSTIVE_CAP) -> tuple[float, tuple]:
    """Brute-force search over every deterministic decoder.

    Independent of :func:`min_error`: it never uses the per-output argmax,
    it evaluates each of the ``(n1 n2)^m`` decision tables in full.
    """
    n1, n2, m = joint.shape
    k = n1 * n2
    if k**m > cap:
        raise SizeCapError(f"{k}^{m} deterministic decoders exceeds cap {cap}")
    flat = joint.p.reshape(k, m)
    best_val, best_choice = np.inf, None
    for choice in itertools.product(range(k), repeat=m):
        correct = 0.0
        for y, c in enumerate(choice):
            correct += flat[c, y]
        val = 1.0 - correct
        if val < best_val - 1e-15:
            best_val, best_choice = val, choice
    pairs = tuple(divmod(c, n2) for c in best_choice)
    return float(best_val), pairs
