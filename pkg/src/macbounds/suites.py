"""Randomized verification suites: every bound checked against brute-force oracles.

Each suite is deterministic given ``(seed, count)`` and returns a
:class:`SuiteResult` whose ``body()`` contains no timing information, so two
runs with the same seed serialize identically. Failures carry the full
instance for replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import classical as cb
from . import quantum as qb
from .decoders import map_decoder, min_error, pe_setting1, random_decoder
from .linalg import (
    hermitian_eig,
    is_projector,
    positive_part_trace,
    projector_geq,
    projector_gt,
    projector_leq,
    random_density,
    random_hermitian,
    random_unitary,
)
from .model import (
    ClassicalMAC,
    CodebookPair,
    Distribution,
    EncoderPair,
    joint_from_setting1,
)
from .spectrum import CodeInstance, RatePair, finite_n_converse_check, wp_triple

SUITES = ("theorem1", "theorem2", "yo-vs-han", "quantum-classical", "eq74", "linalg")
GAMMA_GRID = (1e-3, 0.1, 0.25, 0.5, 1.0)
RANDOM_DECODERS = 50
MAX_FAILURES_KEPT = 20


@dataclass
class SuiteResult:
    name: str
    seed: int
    count: int
    checks: int = 0
    failures: list = field(default_factory=list)
    n_failed: int = 0
    min_slack: float = math.inf

    def check(self, slack: float, tol: float, instance=None, what: str = ""):
        """Record one inequality ``slack >= -tol``."""
        self.checks += 1
        self.min_slack = min(self.min_slack, float(slack))
        if slack < -tol:
            self.n_failed += 1
            if len(self.failures) < MAX_FAILURES_KEPT:
                self.failures.append({"what": what, "slack": float(slack), "instance": instance})

    def check_many(self, slacks, tol: float, instance=None, what: str = ""):
        slacks = np.asarray(slacks, dtype=float).ravel()
        if slacks.size == 0:
            return
        self.checks += slacks.size
        self.min_slack = min(self.min_slack, float(slacks.min()))
        bad = slacks < -tol
        if bad.any():
            self.n_failed += int(bad.sum())
            if len(self.failures) < MAX_FAILURES_KEPT:
                self.failures.append({"what": what, "slack": float(slacks.min()), "instance": instance})

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    def body(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "instances": self.count,
            "checks": self.checks,
            "failed": self.n_failed,
            "passed": self.passed,
            "min_slack": None if math.isinf(self.min_slack) else float(f"{self.min_slack:.17g}"),
            "failures": self.failures,
        }


def _tolist(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.tolist()


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_pmf(k: int, rng: np.random.Generator, zero_prob: float = 0.2) -> np.ndarray:
    """Flat Dirichlet draw; with probability ``zero_prob`` some entries are zeroed."""
    v = rng.dirichlet(np.ones(k))
    if k > 1 and rng.random() < zero_prob:
        mask = rng.random(k) < 0.3
        mask[rng.integers(k)] = False
        v = np.where(mask, 0.0, v)
        v /= v.sum()
    return v


def random_classical_mac(n1: int, n2: int, m: int, rng: np.random.Generator) -> ClassicalMAC:
    kind = rng.random()
    w = np.empty((n1, n2, m))
    for i in range(n1):
        for j in range(n2):
            if kind < 0.15:
                w[i, j] = np.eye(m)[rng.integers(m)]
            else:
                w[i, j] = random_pmf(m, rng)
    return ClassicalMAC(w)


def random_encoders(M1: int, M2: int, n1: int, n2: int, rng: np.random.Generator) -> EncoderPair:
    if rng.random() < 0.3:
        f1 = np.eye(n1)[rng.integers(n1, size=M1)]
        f2 = np.eye(n2)[rng.integers(n2, size=M2)]
    else:
        f1 = np.array([random_pmf(n1, rng) for _ in range(M1)])
        f2 = np.array([random_pmf(n2, rng) for _ in range(M2)])
    return EncoderPair(f1, f2)


def random_codebooks(n1: int, n2: int, rng: np.random.Generator) -> CodebookPair:
    M1 = int(rng.integers(1, n1 + 1))
    M2 = int(rng.integers(1, n2 + 1))
    return CodebookPair(tuple(sorted(rng.choice(n1, M1, replace=False))), tuple(sorted(rng.choice(n2, M2, replace=False))))


def random_dominated_family(n1: int, n2: int, m: int, rng: np.random.Generator) -> cb.DominatedFamily:
    q = rng.dirichlet(np.ones(m))
    q1 = rng.random((n1, m)) * q[None, :]
    q2 = rng.random((n2, m)) * q[None, :]
    return cb.DominatedFamily(q, q1, q2)


def classical_families(joint, rng) -> list:
    n1, n2, m = joint.shape
    fams = [
        ("q=p(y)", cb.DominatedFamily.output_only(joint)),
        ("q=p(y),marginals", cb.DominatedFamily.marginals(joint)),
        ("q=p(y),scaled", cb.DominatedFamily(joint.p_y, rng.random((n1, m)) * joint.p_y, rng.random((n2, m)) * joint.p_y)),
        ("uniform q", cb.DominatedFamily(np.full(m, 1.0 / m), np.full((n1, m), 1.0 / m), np.zeros((n2, m)))),
    ]
    for k in range(2):
        fams.append((f"random{k}", random_dominated_family(n1, n2, m, rng)))
    return fams


def random_cq_mac(n1: int, n2: int, d: int, rng: np.random.Generator) -> qb.CqMAC:
    s = np.empty((n1, n2, d, d), dtype=complex)
    for i in range(n1):
        for j in range(n2):
            s[i, j] = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    return qb.CqMAC(s)


def quantum_families(p: Distribution, Wq: qb.CqMAC, rng) -> list:
    wp, wx1p, wpx2 = qb.averaged_states(p, Wq)
    d = Wq.dim
    fams = [
        ("constructive mix=0.1", qb.constructive_family(p, Wq, 0.1)),
        ("constructive mix=0.5", qb.constructive_family(p, Wq, float(rng.uniform(0.2, 0.9)))),
        ("W_p partial sums", qb.SigmaFamily(wp, wx1p, wpx2)),
        ("maximally mixed", qb.SigmaFamily(np.eye(d) / d, np.tile(np.eye(d) / (2 * d), (Wq.n1, 1, 1)), np.zeros((Wq.n2, d, d)))),
    ]
    return fams


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_theorem1(seed: int = 42, count: int = 500) -> SuiteResult:
    """Positive-part inequality for every decoder tested, plus floor checks of the event bounds."""
    res = SuiteResult("theorem1", seed, count)
    rng = np.random.default_rng(seed)
    alphas = cb.alpha_grid()
    atot = alphas.sum(axis=1)
    for t in range(count):
        n1, n2, m = (int(v) for v in rng.integers(1, [4, 4, 5]))
        W = random_classical_mac(n1, n2, m, rng)
        p = Distribution(random_pmf(n1 * n2, rng).reshape(n1, n2))
        joint = joint_from_setting1(p, W)
        pes = [pe_setting1(p, W, map_decoder(joint))]
        pes += [pe_setting1(p, W, random_decoder((n1, n2, m), rng)) for _ in range(RANDOM_DECODERS)]
        pes = np.array(pes)
        floor = min_error(joint)
        inst = {"t": t, "p": _tolist(p.probs), "w": _tolist(W.w)}
        res.check(pes.min() - floor, 1e-12, inst, "decoder below min_error")
        for name, fam in classical_families(joint, rng):
            sums = cb.theorem1_positive_part_sums(joint, fam, alphas)
            # rhs - lhs for every (alpha, decoder)
            slack = sums[:, None] - (1.0 - pes[None, :] - atot[:, None])
            res.check_many(slack, 1e-9, {**inst, "family": name}, "theorem1")
            for a in alphas[:: 7]:
                r1 = cb.cor1_bound(joint, fam, a)
                implied = 1.0 - a.sum() - sums[np.flatnonzero((alphas == a).all(axis=1))[0]]
                res.check(implied - r1.bound, 1e-12, {**inst, "family": name, "alpha": a.tolist()}, "theorem1 >= cor1")
                res.check(floor - r1.bound, 1e-9, {**inst, "family": name, "alpha": a.tolist()}, "cor1 floor")
        for a in alphas[atot <= 1.0]:
            r2 = cb.cor2_bound(joint, a)
            res.check(floor - r2.bound, 1e-9, {**inst, "alpha": a.tolist()}, "cor2 floor")
    return res


def suite_yo_vs_han(seed: int = 42, count: int = 200) -> SuiteResult:
    """Yagi-Oohama dominates Han; positive-part bound dominates its event form; all are floors."""
    res = SuiteResult("yo-vs-han", seed, count)
    rng = np.random.default_rng(seed)
    for t in range(count):
        n1, n2, m = (int(v) for v in rng.integers(1, [5, 5, 5]))
        W = random_classical_mac(n1, n2, m, rng)
        code = random_codebooks(n1, n2, rng)
        p, sub = cb.setting3_embed(code, W)
        joint = joint_from_setting1(p, sub)
        floor = min_error(joint)
        inst = {"t": t, "w": _tolist(W.w), "c1": list(code.c1), "c2": list(code.c2)}
        for g in GAMMA_GRID:
            yo = cb.yo_specialized(W, code, g)
            han = cb.han_bound(W, code, g)
            res.check(yo.bound - han.bound, 1e-12, {**inst, "gamma": g}, "yo >= han")
            res.check(floor - yo.bound, 1e-9, {**inst, "gamma": g}, "yo floor")
            res.check(floor - han.bound, 1e-9, {**inst, "gamma": g}, "han floor")
        qcond = random_classical_mac(n1, n2, m, rng)
        q_sub = ClassicalMAC(qcond.w[np.ix_(code.c1, code.c2)])
        qjoint = joint_from_setting1(p, q_sub)
        fam = cb.DominatedFamily.marginals(qjoint)
        pi = rng.dirichlet(np.ones(3))
        Ms = np.array([code.M1, code.M2, code.M3], dtype=float)
        for gp in (0.1, 0.5, 1.0, 2.0, 5.0):
            alpha = gp * pi / Ms
            c1r = cb.cor1_bound(joint, fam, alpha)
            implied = 1.0 - alpha.sum() - cb.theorem1_positive_part_sum(joint, fam, alpha)
            res.check(implied - c1r.bound, 1e-12, {**inst, "gammap": gp, "pi": pi.tolist()}, "theorem1 >= cor1")
            yo = cb.yagi_oohama_bound(W, code, qcond, pi, gp)
            res.check(floor - yo.bound, 1e-9, {**inst, "gammap": gp, "pi": pi.tolist()}, "yagi-oohama floor")
    return res


def _scale_to_dominate(q: np.ndarray, f: np.ndarray, qc: np.ndarray) -> np.ndarray:
    """Shrink ``qc`` until ``q >= f @ qc / M`` holds entrywise."""
    mix = f @ qc / f.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mix > 0, q[None, :] / mix, np.inf)
    s = min(1.0, float(ratio.min()))
    return qc * s


def random_cor3_inputs(W: ClassicalMAC, enc: EncoderPair, rng):
    m = W.m
    q = rng.dirichlet(np.ones(m))
    q1c = np.array([rng.dirichlet(np.ones(m)) for _ in range(W.n1)])
    q2c = np.array([rng.dirichlet(np.ones(m)) for _ in range(W.n2)])
    return q, _scale_to_dominate(q, enc.f1, q1c), _scale_to_dominate(q, enc.f2, q2c)


def suite_quantum_classical(seed: int = 42, count: int = 200) -> SuiteResult:
    """Diagonal embeddings reproduce every classical quantity."""
    res = SuiteResult("quantum-classical", seed, count)
    rng = np.random.default_rng(seed)
    alphas = cb.alpha_grid()
    sub_alphas = alphas[::5]
    for t in range(count):
        n1, n2, m = (int(v) for v in rng.integers(1, [4, 4, 5]))
        W = random_classical_mac(n1, n2, m, rng)
        Wq = qb.CqMAC.from_classical(W)
        p = Distribution(random_pmf(n1 * n2, rng).reshape(n1, n2))
        joint = joint_from_setting1(p, W)
        inst = {"t": t, "p": _tolist(p.probs), "w": _tolist(W.w)}
        g = random_decoder((n1, n2, m), rng)
        for dec in (g, map_decoder(joint)):
            diff = pe_setting1(p, W, dec) - qb.pe_q1(p, Wq, qb.classical_povm(dec.g))
            res.check(-abs(diff), 1e-9, inst, "pe_q1 vs pe_setting1")
        for name, fam in classical_families(joint, rng)[:4]:
            qfam = qb.diag_family(fam)
            s_c = cb.theorem1_positive_part_sums(joint, fam, alphas)
            s_q = qb.theorem2_positive_part_sums(p, Wq, qfam, alphas)
            res.check_many(-np.abs(s_c - s_q), 1e-9, {**inst, "family": name}, "theorem2 vs theorem1")
            for a in sub_alphas:
                d5 = qb.cor5_bound(p, Wq, qfam, a).bound - cb.cor1_bound(joint, fam, a).bound
                res.check(-abs(d5), 1e-9, {**inst, "family": name, "alpha": a.tolist()}, "cor5 vs cor1")
        for a in alphas:
            d6 = qb.cor6_bound(p, Wq, a).bound - cb.cor2_bound(joint, a).bound
            res.check(-abs(d6), 1e-9, {**inst, "alpha": a.tolist()}, "cor6 vs cor2")
        M1, M2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        enc = random_encoders(M1, M2, n1, n2, rng)
        q, q1c, q2c = random_cor3_inputs(W, enc, rng)
        fam7 = qb.SigmaFamily(np.diag(q), qb._diag_stack(q1c), qb._diag_stack(q2c), require_order=False)
        for gam in alphas[::9] * np.array([M1, M2, M1 * M2]):
            c3 = cb.cor3_positive_part_sum(W, enc, q, q1c, q2c, gam)
            c7 = qb.cor7_positive_part_sum(Wq, enc, fam7, gam)
            res.check(-abs(c3 - c7), 1e-9, {**inst, "gammas": gam.tolist()}, "cor7 vs cor3")
    return res


def suite_theorem2(seed: int = 42, count: int = 200) -> SuiteResult:
    """Operator positive-part inequality against PGM and random POVMs."""
    res = SuiteResult("theorem2", seed, count)
    rng = np.random.default_rng(seed)
    alphas = cb.alpha_grid()
    atot = alphas.sum(axis=1)
    for t in range(count):
        n1, n2, d = (int(v) for v in rng.integers(1, [4, 4, 5]))
        Wq = random_cq_mac(n1, n2, d, rng)
        p = Distribution(random_pmf(n1 * n2, rng).reshape(n1, n2))
        povms = [qb.pgm_decoder(p, Wq)] + [qb.random_povm(d, (n1, n2), rng) for _ in range(RANDOM_DECODERS)]
        pes = np.array([qb.pe_q1(p, Wq, Y) for Y in povms])
        inst = {"t": t, "p": _tolist(p.probs), "states": _tolist(Wq.states)}
        for name, fam in quantum_families(p, Wq, rng):
            sums = qb.theorem2_positive_part_sums(p, Wq, fam, alphas)
            slack = sums[:, None] - (1.0 - pes[None, :] - atot[:, None])
            res.check_many(slack, 1e-8, {**inst, "family": name}, "theorem2")
            for k in range(0, len(alphas), 11):
                c5 = qb.cor5_bound(p, Wq, fam, alphas[k])
                res.check((1.0 - atot[k] - sums[k]) - c5.bound, 1e-10, {**inst, "family": name, "alpha": alphas[k].tolist()}, "theorem2 >= cor5")
                res.check(pes.min() - c5.bound, 1e-8, {**inst, "family": name, "alpha": alphas[k].tolist()}, "cor5 floor")
        for k in range(0, len(alphas), 11):
            if atot[k] <= 1:
                c6 = qb.cor6_bound(p, Wq, alphas[k])
                res.check(pes.min() - c6.bound, 1e-8, {**inst, "alpha": alphas[k].tolist()}, "cor6 floor")
    return res


def _random_code(Wn: qb.CqMAC, n: int, rng) -> CodeInstance:
    M1, M2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    enc = random_encoders(M1, M2, Wn.n1, Wn.n2, rng)
    if rng.random() < 0.5:
        Y = qb.pgm_message_decoder(Wn, enc)
    else:
        Y = qb.random_povm(Wn.dim, (M1, M2), rng)
    return CodeInstance(n, enc, Y)


def suite_eq74(seed: int = 42, count: int = 100) -> SuiteResult:
    """Finite-n converse inequality on random codes with rates meeting the precondition."""
    from .model import induced_input
    from .quantum import cq_product_extend

    res = SuiteResult("eq74", seed, count)
    rng = np.random.default_rng(seed)
    adder = np.zeros((2, 2, 3))
    for a in range(2):
        for b in range(2):
            adder[a, b, a + b] = 1.0
    for t in range(count):
        n = int(rng.integers(1, 4))
        kind = rng.integers(3)
        if kind == 0:
            W1 = qb.CqMAC.from_classical(ClassicalMAC(adder))
        elif kind == 1:
            W1 = qb.CqMAC.from_classical(random_classical_mac(2, 2, 2, rng))
        else:
            W1 = random_cq_mac(2, 2, 2, rng)
        Wn = cq_product_extend(W1, n) if n > 1 else W1
        code = _random_code(Wn, n, rng)
        p1, p2 = induced_input(code.enc)
        if rng.random() < 0.5:
            st = wp_triple(p1, p2, Wn)
            tname = "wp"
        else:
            st = wp_triple(p1, p2, random_cq_mac(Wn.n1, Wn.n2, Wn.dim, rng))
            tname = "wp of auxiliary channel"
        inst = {"t": t, "n": n, "kind": int(kind), "f1": _tolist(code.enc.f1), "f2": _tolist(code.enc.f2), "triple": tname}
        for gamma in (0.05, 0.1, 0.5):
            u1, u2 = rng.random(2)
            rates = RatePair(math.log(code.enc.M1) / n + u1 * gamma, math.log(code.enc.M2) / n + u2 * gamma)
            rep = finite_n_converse_check(Wn, code, st, gamma, rates)
            if not rep.rate_precondition:
                res.check(-1.0, 0.0, {**inst, "gamma": gamma}, "rate precondition unexpectedly violated")
                continue
            res.check(rep.slack, 1e-8, {**inst, "gamma": gamma, "rates": list(rep.rates)}, "eq74")
    return res


def suite_linalg(seed: int = 42, count: int = 200) -> SuiteResult:
    """Spectral identities on random (and deliberately degenerate) Hermitian matrices."""
    res = SuiteResult("linalg", seed, count)
    rng = np.random.default_rng(seed)
    for t in range(count):
        d = int(rng.integers(1, 7))
        A = random_hermitian(d, rng)
        if t % 4 == 1:
            w, v = np.linalg.eigh(A)
            w[: max(1, d // 2)] = 0.0
            A = (v * w) @ np.conj(v.T)
        B = random_hermitian(d, rng) if t % 5 else A.copy()
        inst = {"t": t, "A": _tolist(A), "B": _tolist(B)}
        tr_plus = positive_part_trace(A)
        alt = float(np.real(np.trace(A @ projector_geq(A))))
        res.check(-abs(tr_plus - alt), 1e-10, inst, "Tr A_+ vs Tr[A {A>=0}]")
        P = projector_leq(A, B)
        res.check(-float(np.linalg.norm(P @ P - P)), 1e-10, inst, "projector idempotent")
        res.check(-float(np.linalg.norm(P + projector_gt(A, B) - np.eye(d))), 1e-10, inst, "complement")
        res.check(0.0 if is_projector(P) else -1.0, 0.0, inst, "projector hermitian")
        G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        Bord = A + G @ np.conj(G.T) * rng.uniform(0, 1)
        res.check(positive_part_trace(Bord) - tr_plus, 1e-10, inst, "Tr A_+ <= Tr B_+ for A <= B")
        U = random_unitary(d, rng)
        res.check(-abs(positive_part_trace(U @ A @ np.conj(U.T)) - tr_plus), 1e-9, inst, "unitary invariance")
        wl, vl = hermitian_eig(A)
        wj, vj = hermitian_eig(A, method="jacobi")
        scale = max(1.0, float(np.abs(wl).max()))
        res.check(-float(np.abs(wl - wj).max()) / scale, 1e-10, inst, "jacobi vs lapack spectrum")
        res.check(-float(np.linalg.norm((vj * wj) @ np.conj(vj.T) - A)) / scale, 1e-10, inst, "jacobi reconstruction")
    return res


RUNNERS = {
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "yo-vs-han": suite_yo_vs_han,
    "quantum-classical": suite_quantum_classical,
    "eq74": suite_eq74,
    "linalg": suite_linalg,
}


def run_suite(name: str, seed: int = 42, count: int | None = None) -> SuiteResult:
    fn = RUNNERS[name]
    return fn(seed) if count is None else fn(seed, count)
