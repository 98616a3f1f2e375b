import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macbounds.errors import DimensionError, InvalidStateError, NonHermitianError
from macbounds.linalg import (
    POVM,
    as_hermitian,
    check_density,
    diag_embed,
    hermitian_eig,
    inv_sqrt_psd,
    is_projector,
    positive_part_trace,
    projector_geq,
    projector_gt,
    projector_leq,
    psd_order_holds,
    random_density,
    random_hermitian,
    random_unitary,
)
from macbounds.model import Distribution

X = np.array([[0, 1], [1, 0]], dtype=complex)
METHODS = ("lapack", "jacobi")


@pytest.mark.parametrize("method", METHODS)
class TestEig:
    def test_diagonal(self, method):
        w, v = hermitian_eig(np.diag([3.0, 1.0]), method=method)
        assert np.allclose(w, [3, 1])
        assert np.allclose(np.abs(v), np.eye(2))

    def test_pauli_x(self, method):
        w, _ = hermitian_eig(X, method=method)
        assert np.allclose(w, [1, -1], atol=1e-14)

    def test_random_reconstruction(self, method, rng):
        for _ in range(20):
            A = random_hermitian(6, rng)
            w, v = hermitian_eig(A, method=method)
            assert np.linalg.norm((v * w) @ np.conj(v.T) - A) <= 1e-10
            assert np.linalg.norm(np.conj(v.T) @ v - np.eye(6)) <= 1e-10
            assert np.all(np.diff(w) <= 1e-12)

    def test_degenerate_spectrum(self, method, rng):
        U = random_unitary(5, rng)
        A = (U * np.array([2, 2, 0, 0, -1.0])) @ np.conj(U.T)
        w, v = hermitian_eig(A, method=method)
        assert np.allclose(w, [2, 2, 0, 0, -1], atol=1e-12)
        assert np.linalg.norm((v * w) @ np.conj(v.T) - A) <= 1e-10

    def test_stack(self, method, rng):
        A = np.stack([random_hermitian(3, rng) for _ in range(4)])
        w, _ = hermitian_eig(A, method=method)
        assert w.shape == (4, 3)


def test_jacobi_matches_lapack(rng):
    for d in range(1, 7):
        A = random_hermitian(d, rng, scale=10.0)
        assert np.allclose(hermitian_eig(A, "jacobi")[0], hermitian_eig(A)[0], atol=1e-10)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DimensionError):
        as_hermitian(np.ones((2, 3)))


class TestProjector:
    def test_diag(self):
        P = projector_leq(np.diag([1.0, -1.0]), np.zeros((2, 2)))
        assert np.allclose(P, np.diag([0, 1]))

    def test_equal_operators_give_identity(self, rng):
        A = random_hermitian(4, rng)
        assert np.allclose(projector_leq(A, A), np.eye(4))

    def test_pauli_x(self):
        P = projector_leq(X, np.zeros((2, 2)))
        u = np.array([1, -1]) / np.sqrt(2)
        assert np.allclose(P, np.outer(u, u))

    def test_band_hits(self):
        _, hits = projector_leq(np.diag([1.0, 0.0]), np.zeros((2, 2)), return_band_hits=True)
        assert hits == 1

    def test_complement_and_idempotent(self, rng):
        for _ in range(30):
            A, B = random_hermitian(4, rng), random_hermitian(4, rng)
            P = projector_leq(A, B)
            assert is_projector(P)
            assert np.allclose(P + projector_gt(A, B), np.eye(4), atol=1e-10)

    def test_jacobi_projector_agrees(self, rng):
        A, B = random_hermitian(5, rng), random_hermitian(5, rng)
        assert np.allclose(projector_leq(A, B, method="jacobi"), projector_leq(A, B), atol=1e-9)


class TestPositivePart:
    def test_examples(self, rng):
        assert positive_part_trace(np.diag([2.0, -3.0])) == pytest.approx(2.0)
        assert positive_part_trace(X) == pytest.approx(1.0)
        rho = random_density(3, rng)
        assert positive_part_trace(rho) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_matches_projector_form(self, d, seed):
        r = np.random.default_rng(seed)
        A = random_hermitian(d, r)
        alt = np.real(np.trace(A @ projector_geq(A)))
        assert abs(positive_part_trace(A) - alt) <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_monotone_in_psd_order(self, d, seed):
        r = np.random.default_rng(seed)
        A = random_hermitian(d, r)
        G = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
        B = A + G @ np.conj(G.T)
        assert positive_part_trace(A) <= positive_part_trace(B) + 1e-10


class TestOrder:
    def test_examples(self):
        I = np.eye(2)
        assert psd_order_holds(I, I / 2)
        assert not psd_order_holds(np.diag([1.0, 0]), np.diag([0, 1.0]))
        assert psd_order_holds(I, I)


class TestDiagEmbed:
    def test_examples(self):
        assert np.allclose(diag_embed(Distribution([1.0, 0.0])), np.diag([1, 0]))
        assert np.allclose(diag_embed(Distribution.uniform(3)), np.eye(3) / 3)
        assert np.allclose(diag_embed([0.2, 0.8]), np.diag([0.2, 0.8]))


class TestStatesAndPOVMs:
    def test_density_checks(self):
        check_density(np.eye(2) / 2)
        with pytest.raises(InvalidStateError):
            check_density(np.diag([1.5, -0.5]))
        with pytest.raises(InvalidStateError):
            check_density(np.eye(2))

    def test_povm_completeness(self):
        POVM(np.stack([np.diag([1.0, 0]), np.diag([0, 1.0])]))
        with pytest.raises(InvalidStateError):
            POVM(np.stack([np.diag([1.0, 0]), np.diag([0, 0.5])]))

    def test_inv_sqrt(self, rng):
        rho = random_density(4, rng, rank=2)
        root, ker = inv_sqrt_psd(rho)
        supp = np.eye(4) - ker
        assert np.allclose(root @ rho @ root, supp, atol=1e-8)
        assert is_projector(ker) and np.allclose(ker @ rho, 0, atol=1e-12)
