import math
import warnings

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from mlab.errors import DimensionError, NotNormalized, NotUnitary, ValidationError
from mlab.interaction import (
    DegenerateLabelsWarning,
    ProductHamiltonianSpec,
    TwoPartMeterSpec,
    cnot_partial,
    from_conditional_unitaries,
    from_product_hamiltonian,
    from_states,
    from_two_part_meter,
    gram,
    product_hamiltonian_gram,
)

from helpers import random_states, random_unitary
import oracles

H = 1 / math.sqrt(2)


def test_rotation_about_y():
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rot = [[c, -s], [s, c]]
    mi = from_conditional_unitaries([np.eye(2), rot], [1, 0])
    np.testing.assert_allclose(mi.phi[0], [1, 0])
    np.testing.assert_allclose(mi.phi[1], [H, H], atol=1e-15)


def test_identity_unitaries_give_all_ones_gram():
    mi = from_conditional_unitaries([np.eye(3)] * 3, [0.6, 0.8j, 0])
    np.testing.assert_allclose(gram(mi).g, np.ones((3, 3)), atol=1e-15)


def test_bit_flip_gives_orthogonal_states():
    mi = from_conditional_unitaries([np.eye(2), [[0, 1], [1, 0]]], [1, 0])
    assert gram(mi).g[0, 1] == 0


def test_conditional_unitaries_validation():
    with pytest.raises(NotUnitary):
        from_conditional_unitaries([np.eye(2), [[1, 1], [0, 1]]], [1, 0])
    with pytest.raises(NotNormalized):
        from_conditional_unitaries([np.eye(2), np.eye(2)], [1, 1])
    with pytest.raises(DimensionError):
        from_conditional_unitaries([np.eye(2), np.eye(3)], [1, 0])
    with pytest.raises(DimensionError):
        from_conditional_unitaries([np.eye(2), np.eye(2)], [1, 0], labels=(0, 1, 2))


def test_needs_two_states():
    with pytest.raises(DimensionError):
        from_states([[1, 0]])


def test_degenerate_labels_are_flagged():
    with pytest.warns(DegenerateLabelsWarning):
        mi = from_states([[1, 0], [0, 1]], labels=(1.0, 1.0))
    assert mi.degenerate
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not from_states([[1, 0], [0, 1]], labels=(1.0, -1.0)).degenerate


@pytest.mark.parametrize("theta", [0.0, 0.1, math.pi / 8, 0.7])
def test_product_hamiltonian_qubit(theta):
    mi = from_product_hamiltonian(ProductHamiltonianSpec((1, -1), (1, -1), [H, H], theta))
    expected_plus = [oracles.phase(-theta) * H, oracles.phase(theta) * H]
    expected_minus = [oracles.phase(theta) * H, oracles.phase(-theta) * H]
    np.testing.assert_allclose(mi.phi[0], expected_plus, atol=1e-15)
    np.testing.assert_allclose(mi.phi[1], expected_minus, atol=1e-15)
    # <phi(-1)|phi(+1)> = cos(2 theta)
    assert gram(mi).overlap(0, 1) == pytest.approx(math.cos(2 * theta), abs=1e-15)


def test_product_hamiltonian_zero_time():
    mi = from_product_hamiltonian(ProductHamiltonianSpec((1, -1, 2), (1, -1), [H, H], 0.0))
    np.testing.assert_allclose(gram(mi).g, np.ones((3, 3)))


def test_single_b_value_transfers_no_information():
    mi = from_product_hamiltonian(ProductHamiltonianSpec((1, -1, 3), (2.0,), [1.0], 0.4))
    np.testing.assert_allclose(np.abs(gram(mi).g), np.ones((3, 3)), atol=1e-15)


def test_product_hamiltonian_spec_validation():
    with pytest.raises(DimensionError):
        ProductHamiltonianSpec((1, -1), (1, -1, 0), [H, H], 0.1)
    with pytest.raises(NotNormalized):
        ProductHamiltonianSpec((1, -1), (1, -1), [1, 1], 0.1)


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 8, 1.1])
def test_two_part_meter_qubit(theta):
    mi = from_two_part_meter(TwoPartMeterSpec((0, 1), (1, -1), [0.5, 0.5], theta))
    assert mi.dim == 4
    # Each factor is cos(theta); the product is cos(theta)^2.
    assert gram(mi).g[0, 1] == pytest.approx(math.cos(theta) ** 2, abs=1e-15)


def test_two_part_meter_point_distribution():
    mi = from_two_part_meter(TwoPartMeterSpec((0, 1, 2.5), (1, -1), [1, 0], 0.8))
    np.testing.assert_allclose(np.abs(gram(mi).g), np.ones((3, 3)), atol=1e-15)


def test_two_part_meter_spec_validation():
    with pytest.raises(ValidationError):
        TwoPartMeterSpec((0, 1), (1, -1), [0.5, 0.6], 0.1)
    with pytest.raises(ValidationError):
        TwoPartMeterSpec((0, 1), (1, -1), [1.5, -0.5], 0.1)
    with pytest.raises(DimensionError):
        TwoPartMeterSpec((0, 1), (1, -1), [1.0], 0.1)


def test_cnot_partial_gram():
    assert gram(cnot_partial(math.pi / 4)).g[0, 1] == pytest.approx(math.cos(math.pi / 4),
                                                                      abs=1e-15)


def test_gram_identical_and_orthogonal():
    same = from_states([[H, 1j * H]] * 3)
    np.testing.assert_allclose(gram(same).g, np.ones((3, 3)), atol=1e-15)
    orth = from_states(np.eye(3))
    np.testing.assert_allclose(gram(orth).g, np.eye(3))


def test_gram_matches_bruteforce():
    rng = np.random.default_rng(11)
    states = random_states(rng, 4, 3)
    np.testing.assert_allclose(gram(from_states(states)).g,
                               oracles.gram(states.tolist()), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
def test_gram_invariant_under_common_unitary(seed, n, d):
    rng = np.random.default_rng(seed)
    states = random_states(rng, n, d)
    u = random_unitary(rng, d)
    g1 = gram(from_states(states)).g
    g2 = gram(from_states(states @ u.T)).g
    assert np.max(np.abs(g1 - g2)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
def test_product_hamiltonian_closed_form(seed, n, nb):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=nb) + 1j * rng.normal(size=nb)
    spec = ProductHamiltonianSpec(rng.normal(size=n), rng.normal(size=nb),
                                  psi / np.linalg.norm(psi), rng.uniform(0, 3))
    g = gram(from_product_hamiltonian(spec)).g
    assert np.max(np.abs(g - product_hamiltonian_gram(spec))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4))
def test_two_part_meter_gram_is_real_nonnegative(seed, n, nv):
    rng = np.random.default_rng(seed)
    spec = TwoPartMeterSpec(rng.normal(size=n), rng.normal(size=nv),
                            rng.dirichlet(np.ones(nv)), rng.uniform(0, 3))
    g = gram(from_two_part_meter(spec)).g
    assert np.max(np.abs(g.imag)) < 1e-12
    assert g.real.min() >= -1e-12
