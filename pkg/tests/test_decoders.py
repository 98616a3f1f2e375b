import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macbounds.decoders import (
    Decoder,
    exhaustive_min_error,
    map_decoder,
    min_error,
    pe_setting1,
    pe_setting2,
    pe_setting3,
    random_decoder,
)
from macbounds.errors import DimensionError, SizeCapError
from macbounds.model import (
    ClassicalMAC,
    CodebookPair,
    Distribution,
    EncoderPair,
    JointPMF,
    joint_from_setting1,
    lifted_channel,
)
from macbounds.suites import random_classical_mac, random_encoders

UNIFORM = Distribution.uniform(2, 2)


def test_inverting_decoder_on_noiseless(noiseless):
    g = Decoder.from_choices([(0, 0), (0, 1), (1, 0), (1, 1)], 2, 2)
    assert pe_setting1(UNIFORM, noiseless, g) == 0.0


def test_uniform_decoder_symmetry(rng):
    W = random_classical_mac(3, 2, 4, rng)
    p = Distribution(rng.dirichlet(np.ones(6)).reshape(3, 2))
    g = Decoder(np.full((3, 2, 4), 1 / 6))
    assert pe_setting1(p, W, g) == pytest.approx(1 - 1 / 6, abs=1e-12)


def test_adder_map(adder, adder_joint):
    g = map_decoder(adder_joint)
    assert pe_setting1(UNIFORM, adder, g) == pytest.approx(0.25, abs=1e-15)
    # lexicographic tie-break at y=1
    assert g.g[0, 1, 1] == 1.0 and g.g[1, 0, 1] == 0.0


def test_strictly_dominant_pair_chosen():
    p = np.zeros((2, 2, 1))
    p[1, 0, 0], p[0, 0, 0], p[0, 1, 0], p[1, 1, 0] = 0.4, 0.3, 0.2, 0.1
    g = map_decoder(JointPMF(p))
    assert g.g[1, 0, 0] == 1.0


def test_min_error_examples(adder_joint, noiseless):
    assert min_error(joint_from_setting1(UNIFORM, noiseless)) == 0.0
    assert min_error(adder_joint) == pytest.approx(0.25, abs=1e-15)
    indep = ClassicalMAC(np.tile([0.3, 0.7], (2, 2, 1)))
    assert min_error(joint_from_setting1(UNIFORM, indep)) == pytest.approx(0.75, abs=1e-15)


def test_exhaustive_agrees_with_min_error(adder_joint, rng):
    val, _ = exhaustive_min_error(adder_joint)
    assert val == pytest.approx(0.25, abs=1e-15)
    for _ in range(20):
        n1, n2, m = (int(v) for v in rng.integers(1, [3, 3, 4]))
        W = random_classical_mac(n1, n2, m, rng)
        p = Distribution(rng.dirichlet(np.ones(n1 * n2)).reshape(n1, n2))
        j = joint_from_setting1(p, W)
        assert exhaustive_min_error(j)[0] == pytest.approx(min_error(j), abs=1e-12)


def test_exhaustive_cap(rng):
    W = random_classical_mac(3, 3, 8, rng)
    with pytest.raises(SizeCapError):
        exhaustive_min_error(joint_from_setting1(Distribution.uniform(3, 3), W))


def test_setting2_examples(noiseless, adder, rng):
    enc = EncoderPair.deterministic((0, 1), (0, 1), 2, 2)
    g = Decoder.from_choices([(0, 0), (0, 1), (1, 0), (1, 1)], 2, 2)
    assert pe_setting2(noiseless, enc, g) == 0.0
    one = EncoderPair.deterministic((1,), (0,), 2, 2)
    assert pe_setting2(adder, one, Decoder(np.ones((1, 1, 3)))) == 0.0
    enc = random_encoders(3, 2, 2, 2, rng)
    g = random_decoder((3, 2, 3), rng)
    V = lifted_channel(adder, enc)
    assert pe_setting2(adder, enc, g) == pytest.approx(pe_setting1(Distribution.uniform(3, 2), V, g), abs=1e-12)


def test_setting3_examples(adder, full_code, rng):
    g = random_decoder((2, 2, 3), rng)
    assert pe_setting3(adder, full_code, g) == pytest.approx(pe_setting1(UNIFORM, adder, g), abs=1e-15)
    single = CodebookPair((1,), (1,))
    assert pe_setting3(adder, single, Decoder(np.ones((1, 1, 3)))) == 0.0
    assert pe_setting3(adder, full_code, map_decoder(joint_from_setting1(UNIFORM, adder))) == pytest.approx(0.25)


def test_decoder_validation():
    with pytest.raises(Exception):
        Decoder(np.full((2, 2, 3), 0.3))
    with pytest.raises(DimensionError):
        pe_setting1(UNIFORM, ClassicalMAC(np.full((2, 2, 2), 0.5)), Decoder(np.full((2, 2, 3), 0.25)))


def test_random_decoder_seeded_and_normalized():
    a = random_decoder((2, 3, 4), 7)
    b = random_decoder((2, 3, 4), 7)
    assert np.array_equal(a.g, b.g)
    r = np.random.default_rng(0)
    for _ in range(1000):
        g = random_decoder((2, 2, 3), r)
        assert np.allclose(g.g.sum(axis=(0, 1)), 1.0, atol=1e-12)


def test_average_random_decoder_above_min_error(adder, adder_joint):
    r = np.random.default_rng(5)
    pes = [pe_setting1(UNIFORM, adder, random_decoder((2, 2, 3), r)) for _ in range(1000)]
    assert np.mean(pes) >= min_error(adder_joint)
    assert min(pes) >= min_error(adder_joint) - 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_map_achieves_min_error(seed):
    r = np.random.default_rng(seed)
    n1, n2, m = (int(v) for v in r.integers(1, [4, 4, 5]))
    W = random_classical_mac(n1, n2, m, r)
    p = Distribution(r.dirichlet(np.ones(n1 * n2)).reshape(n1, n2))
    j = joint_from_setting1(p, W)
    assert pe_setting1(p, W, map_decoder(j)) == pytest.approx(min_error(j), abs=1e-12)
