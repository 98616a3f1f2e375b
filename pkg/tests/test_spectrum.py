import math

import numpy as np
import pytest

from macbounds import quantum as qb
from macbounds.errors import DimensionError, MacBoundsError
from macbounds.linalg import POVM
from macbounds.model import Distribution, EncoderPair, product_distribution
from macbounds.spectrum import (
    LIMIT_NOTE,
    CodeInstance,
    RatePair,
    SigmaTriple,
    finite_n_converse_check,
    k_term,
    k_window,
    rate_axis,
    region_grid,
    wp_triple,
)
from macbounds.suites import random_classical_mac, random_cq_mac

U2 = Distribution.uniform(2)


@pytest.fixture
def noiseless_q(noiseless):
    return qb.CqMAC.from_classical(noiseless)


def classical_k(W, p1, p2, R1, R2, n):
    """Enumeration over (x1, x2, y) of the diagonal k-term."""
    py_x1 = np.einsum("j,ijy->iy", p2, W.w)
    py_x2 = np.einsum("i,ijy->jy", p1, W.w)
    py = np.einsum("i,j,ijy->y", p1, p2, W.w)
    total = 0.0
    for x1 in range(W.n1):
        for x2 in range(W.n2):
            for y in range(W.m):
                t = math.exp(n * R1) * py_x2[x2, y] + math.exp(n * R2) * py_x1[x1, y] + math.exp(n * (R1 + R2)) * py[y]
                if W.w[x1, x2, y] <= t:
                    total += p1[x1] * p2[x2] * W.w[x1, x2, y]
    return total


class TestTriple:
    def test_point_mass(self, rng):
        Wq = random_cq_mac(2, 3, 2, rng)
        st = wp_triple(Distribution([0, 1.0]), Distribution([0, 0, 1.0]), Wq)
        for op in (st.sigma, st.sigma1[1], st.sigma2[2]):
            assert np.allclose(op, Wq.states[1, 2])

    def test_adder(self, adder):
        st = wp_triple(U2, U2, qb.CqMAC.from_classical(adder))
        assert np.allclose(st.sigma, np.diag([0.25, 0.5, 0.25]))

    def test_residuals(self, rng):
        Wq = random_cq_mac(3, 2, 3, rng)
        st = wp_triple(Distribution(rng.dirichlet(np.ones(3))), Distribution(rng.dirichlet(np.ones(2))), Wq)
        assert max(st.residuals()) <= 1e-12

    def test_invalid_triple(self):
        with pytest.raises(MacBoundsError):
            SigmaTriple(np.eye(2) / 2, np.stack([np.diag([1.0, 0]), np.diag([1.0, 0])]), np.stack([np.eye(2) / 2] * 2), U2, U2)
        with pytest.raises(DimensionError):
            SigmaTriple(np.eye(2) / 2, np.stack([np.eye(2) / 2] * 3), np.stack([np.eye(2) / 2] * 2), U2, U2)


class TestKTerm:
    def test_noiseless_n1(self, noiseless_q):
        st = wp_triple(U2, U2, noiseless_q)
        assert k_term(noiseless_q, U2, U2, st, RatePair(0, 0), 1) == pytest.approx(1.0, abs=1e-12)

    def test_noiseless_n2(self, noiseless_q):
        W2 = qb.cq_product_extend(noiseless_q, 2)
        p = product_distribution(U2, 2)
        st = wp_triple(p, p, W2)
        assert k_term(W2, p, p, st, RatePair(0, 0), 2) == pytest.approx(0.0, abs=1e-12)

    def test_large_rates(self, rng):
        Wq = random_cq_mac(2, 2, 3, rng)
        st = wp_triple(U2, U2, Wq)
        assert k_term(Wq, U2, U2, st, RatePair(10, 10), 1) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_matches_enumeration(self, rng):
        for _ in range(10):
            W = random_classical_mac(2, 2, 3, rng)
            p1, p2 = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
            R1, R2 = rng.uniform(0, 1.5, 2)
            Wq = qb.CqMAC.from_classical(W)
            st = wp_triple(Distribution(p1), Distribution(p2), Wq)
            k = k_term(Wq, Distribution(p1), Distribution(p2), st, RatePair(R1, R2), 1)
            assert k == pytest.approx(classical_k(W, p1, p2, R1, R2, 1), abs=1e-9)

    def test_rate_validation(self):
        with pytest.raises(MacBoundsError):
            RatePair(-0.1, 0)

    def test_window_is_labelled(self):
        w = k_window([0.2, 0.5, 0.3])
        assert w["limsup_estimate"] == 0.5 and w["liminf_estimate"] == 0.2 and w["label"] == LIMIT_NOTE


class TestConverse:
    def test_trivial_code(self, rng):
        Wq = random_cq_mac(2, 2, 2, rng)
        enc = EncoderPair.deterministic((0,), (1,), 2, 2)
        code = CodeInstance(1, enc, POVM(np.eye(2)[None, None]))
        p1, p2 = Distribution([1.0, 0]), Distribution([0, 1.0])
        for g in (0.05, 0.5, 2.0):
            rep = finite_n_converse_check(Wq, code, wp_triple(p1, p2, Wq), g)
            assert rep.rhs <= 1 - 3 * math.exp(-g) + 1e-12
            assert rep.holds and rep.rate_precondition
            assert rep.epsilon == pytest.approx(0.0, abs=1e-12)

    def test_adder_n2_random_codes(self, adder, rng):
        W2 = qb.cq_product_extend(qb.CqMAC.from_classical(adder), 2)
        for _ in range(10):
            f1 = rng.dirichlet(np.ones(4), size=2)
            f2 = rng.dirichlet(np.ones(4), size=2)
            enc = EncoderPair(f1, f2)
            code = CodeInstance(2, enc, qb.pgm_message_decoder(W2, enc))
            p1 = Distribution(f1.mean(axis=0))
            p2 = Distribution(f2.mean(axis=0))
            rates = RatePair(math.log(2) / 2, math.log(2) / 2)
            rep = finite_n_converse_check(W2, code, wp_triple(p1, p2, W2), 0.1, rates)
            assert rep.rate_precondition and rep.holds
            assert rep.slack == pytest.approx(rep.epsilon - rep.rhs)

    def test_perfect_code_rhs_nonpositive(self, noiseless_q):
        enc = EncoderPair.deterministic((0, 1), (0, 1), 2, 2)
        Y = qb.classical_povm(np.eye(4).reshape(4, 2, 2).transpose(1, 2, 0))
        code = CodeInstance(1, enc, Y)
        rep = finite_n_converse_check(noiseless_q, code, wp_triple(U2, U2, noiseless_q), 0.1, RatePair(math.log(2), math.log(2)))
        assert rep.epsilon == pytest.approx(0.0, abs=1e-12)
        assert rep.rhs <= 1e-12

    def test_precondition_reported(self, noiseless_q):
        enc = EncoderPair.deterministic((0,), (0,), 2, 2)
        code = CodeInstance(1, enc, POVM(np.eye(4)[None, None]))
        p = Distribution([1.0, 0])
        rep = finite_n_converse_check(noiseless_q, code, wp_triple(p, p, noiseless_q), 0.1, RatePair(2, 2))
        assert not rep.rate_precondition and rep.notes

    def test_gamma_positive(self, noiseless_q):
        enc = EncoderPair.deterministic((0,), (0,), 2, 2)
        code = CodeInstance(1, enc, POVM(np.eye(4)[None, None]))
        p = Distribution([1.0, 0])
        with pytest.raises(MacBoundsError):
            finite_n_converse_check(noiseless_q, code, wp_triple(p, p, noiseless_q), 0.0)


class TestRegion:
    def test_eps_one_is_everything(self, adder):
        reg = region_grid(qb.CqMAC.from_classical(adder), 1, U2, U2, eps=1.0, grid=((0, 2, 5), (0, 2, 5)))
        assert reg.member.all()

    def test_negative_eps_is_empty(self, adder):
        reg = region_grid(qb.CqMAC.from_classical(adder), 1, U2, U2, eps=-0.1, grid=((0, 2, 5), (0, 2, 5)))
        assert not reg.member.any()

    def test_noiseless_n2_contains_origin(self, noiseless_q):
        reg = region_grid(noiseless_q, 2, U2, U2, eps=0.0, grid=((0, 1, 3), (0, 1, 3)))
        assert reg.member[0, 0] and reg.k[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_monotone(self, rng):
        W = random_classical_mac(2, 2, 3, rng)
        reg = region_grid(qb.CqMAC.from_classical(W), 2, U2, U2, grid=((0, 2, 11), (0, 2, 11)))
        assert reg.monotonicity_violations == []
        assert reg.note == LIMIT_NOTE

    def test_custom_triple(self, noiseless_q, rng):
        aux = random_cq_mac(2, 2, 4, rng)
        st = wp_triple(U2, U2, aux)
        reg = region_grid(noiseless_q, 1, U2, U2, triple=st, grid=((0, 1, 2), (0, 1, 2)))
        assert reg.k.shape == (2, 2)

    def test_rate_axis(self):
        assert np.allclose(rate_axis((0, 2, 41))[[0, 1, -1]], [0, 0.05, 2])
        assert np.array_equal(rate_axis((1, 1, 1)), [1.0])
        with pytest.raises(MacBoundsError):
            rate_axis((1, 0, 3))
