import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stbc.codes import (CODE_NAMES, alamouti_encode, ciod2_code, ciod2_encode, ciod4_encode,
                        generator_matrix, get_code, golden_encode, proposed_2x2_encode,
                        proposed_4x2_encode, weight_matrices)
from stbc.constellation import THETA_G
from stbc.linalg import vec_stack, vec_tilde

W = cmath.exp(1j * math.pi / 4)
ints = st.integers(-7, 7)


def gaussian_ints(k):
    return st.lists(st.tuples(ints, ints), min_size=k, max_size=k).map(
        lambda v: np.array([complex(a, b) for a, b in v]))


def random_symbols(rng, k, n=None):
    shape = (k,) if n is None else (n, k)
    return rng.integers(-3, 4, shape) + 1j * rng.integers(-3, 4, shape)


def explicit_4x2(x):
    """The 4x4 codeword written out entry by entry from the rotated symbols."""
    s = np.asarray(x) * cmath.exp(1j * THETA_G)
    I, Q = s.real, s.imag
    return np.array([
        [I[0] + 1j * Q[2], -I[1] + 1j * Q[3], W * (I[4] + 1j * Q[6]), W * (-I[5] + 1j * Q[7])],
        [I[1] + 1j * Q[3], I[0] - 1j * Q[2], W * (I[5] + 1j * Q[7]), W * (I[4] - 1j * Q[6])],
        [W * (I[6] + 1j * Q[4]), W * (-I[7] + 1j * Q[5]), I[2] + 1j * Q[0], -I[3] + 1j * Q[1]],
        [W * (I[7] + 1j * Q[5]), W * (I[6] - 1j * Q[4]), I[3] + 1j * Q[1], I[2] - 1j * Q[0]],
    ])


def explicit_2x2(x):
    s = np.asarray(x) * cmath.exp(1j * THETA_G)
    I, Q = s.real, s.imag
    return np.array([
        [I[0] + 1j * Q[1], W * (I[2] + 1j * Q[3])],
        [W * (I[3] + 1j * Q[2]), I[1] + 1j * Q[0]],
    ])


def test_ciod2_examples():
    np.testing.assert_array_equal(ciod2_encode(0, 0), np.zeros((2, 2)))
    np.testing.assert_array_equal(ciod2_encode(1 + 2j, 3 + 4j), [[1 + 4j, 0], [0, 3 + 2j]])


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_ciod2_determinant(s1, s2):
    d = (s1.real + 1j * s2.imag) * (s2.real + 1j * s1.imag)
    assert abs(np.linalg.det(ciod2_encode(s1, s2)) - d) < 1e-9 * max(1, abs(d))


def test_proposed_2x2_zero():
    np.testing.assert_array_equal(proposed_2x2_encode(np.zeros(4)), np.zeros((2, 2)))


@given(gaussian_ints(4))
def test_proposed_2x2_explicit(x):
    assert np.max(np.abs(proposed_2x2_encode(x) - explicit_2x2(x))) < 1e-12


@given(gaussian_ints(2))
def test_proposed_2x2_reduces_to_ciod(x12):
    x = np.concatenate([x12, [0, 0]])
    r = cmath.exp(1j * THETA_G)
    expected = ciod2_encode(r * x12[0], r * x12[1])
    assert np.max(np.abs(proposed_2x2_encode(x) - expected)) < 1e-12


def test_ciod4_zero_and_quadrature_block():
    np.testing.assert_array_equal(ciod4_encode(np.zeros(4)), np.zeros((4, 4)))
    s = np.array([0.3 + 1.5j, -0.7 + 2.5j, 0, 0])
    out = ciod4_encode(s)
    np.testing.assert_allclose(out[2:, 2:], [[1.5j, 2.5j], [2.5j, -1.5j]])


def test_ciod4_upper_block_alamouti_type():
    rng = np.random.default_rng(0)
    s = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    a, b = s[0].real + 1j * s[2].imag, s[1].real + 1j * s[3].imag
    np.testing.assert_allclose(ciod4_encode(s)[:2, :2], [[a, -b.conjugate()], [b, a.conjugate()]])


def test_ciod4_last_entry():
    s = np.array([0.5 + 0.25j, 0, 2 + 3j, 0])
    assert ciod4_encode(s)[3, 3] == s[2].real - 1j * s[0].imag


@settings(max_examples=200)
@given(gaussian_ints(8))
def test_proposed_4x2_explicit(x):
    assert np.max(np.abs(proposed_4x2_encode(x) - explicit_4x2(x))) < 1e-12


def test_proposed_4x2_zero_and_reduction():
    np.testing.assert_array_equal(proposed_4x2_encode(np.zeros(8)), np.zeros((4, 4)))
    x = np.array([1 + 1j, -3 + 1j, 1 - 1j, 3 + 3j, 0, 0, 0, 0])
    expected = ciod4_encode(x[:4] * cmath.exp(1j * THETA_G))
    assert np.max(np.abs(proposed_4x2_encode(x) - expected)) < 1e-12


def test_alamouti_examples():
    np.testing.assert_array_equal(alamouti_encode(1, 0), np.eye(2))
    np.testing.assert_array_equal(alamouti_encode(0, 1j), [[0, 1j], [1j, 0]])


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_alamouti_orthogonal(s1, s2):
    s = alamouti_encode(s1, s2)
    g = s.conj().T @ s
    assert np.allclose(g, (abs(s1) ** 2 + abs(s2) ** 2) * np.eye(2), atol=1e-9)


def test_golden_zero():
    np.testing.assert_array_equal(golden_encode(np.zeros(4)), np.zeros((2, 2)))


def test_golden_constants():
    tau, mu = (1 + math.sqrt(5)) / 2, (1 - math.sqrt(5)) / 2
    x = np.array([1, 0, 0, 0])
    alpha = 1 + 1j - 1j * tau
    alpha_bar = 1 + 1j - 1j * mu
    np.testing.assert_allclose(golden_encode(x), np.diag([alpha, alpha_bar]) / math.sqrt(5))


@pytest.mark.parametrize("name", CODE_NAMES)
def test_weights_reconstruct_encoder(name):
    code = get_code(name)
    w = weight_matrices(code)
    assert w.shape == (2 * code.k, code.n_t, code.T)
    rng = np.random.default_rng(1)
    for x in random_symbols(rng, code.k, 1000):
        s = sum(w[2 * i] * x[i].real + w[2 * i + 1] * x[i].imag for i in range(code.k))
        assert np.max(np.abs(code.encode(x) - s)) < 1e-12


@pytest.mark.parametrize("name", CODE_NAMES)
def test_generator_consistency(name):
    code = get_code(name)
    g = generator_matrix(code)
    assert g.shape == (2 * code.n_t * code.T, 2 * code.k)
    rng = np.random.default_rng(2)
    for x in random_symbols(rng, code.k, 200):
        assert np.max(np.abs(vec_tilde(vec_stack(code.encode(x))) - g @ vec_tilde(x))) < 1e-12


@pytest.mark.parametrize("name", CODE_NAMES)
def test_linearity(name):
    code = get_code(name)
    rng = np.random.default_rng(3)
    x, y = random_symbols(rng, code.k), random_symbols(rng, code.k)
    assert np.max(np.abs(code.encode(x + y) - code.encode(x) - code.encode(y))) < 1e-12


@pytest.mark.parametrize("name", CODE_NAMES)
def test_encode_batch(name):
    code = get_code(name)
    x = random_symbols(np.random.default_rng(4), code.k, 20)
    batch = code.encode_batch(x)
    for i in range(20):
        assert np.max(np.abs(batch[i] - code.encode(x[i]))) < 1e-12


def test_alamouti_first_weight_is_identity():
    np.testing.assert_allclose(weight_matrices(get_code("alamouti"))[0], np.eye(2))


def test_generator_2x2_orthonormal_4x2_not():
    g2 = get_code("proposed2x2").generator
    g4 = get_code("proposed4x2").generator
    assert np.max(np.abs(g2.T @ g2 - np.eye(8))) < 1e-12
    assert np.max(np.abs(g4.T @ g4 - np.eye(16))) > 1e-3


def test_shapes_and_rates():
    assert get_code("proposed2x2").k == 4 and get_code("proposed2x2").T == 2
    assert get_code("proposed2x2").rate == 2
    assert get_code("proposed4x2").k == 8 and get_code("proposed4x2").T == 4
    assert get_code("proposed4x2").rate == 2
    assert len(weight_matrices(get_code("proposed2x2"))) == 8


def test_unrotated_ciod2_loses_rank():
    code = ciod2_code(rotation=0.0)
    # x1 purely imaginary, x2 zero: first diagonal entry vanishes
    assert abs(np.linalg.det(code.encode(np.array([2j, 0])))) < 1e-12


def test_unknown_code():
    with pytest.raises(KeyError):
        get_code("djabba")
