"""Distribution containers and exact information measures."""
import numpy as np
import pytest

from conftest import naive_conditional_mi
from klsc.errors import ValidationError
from klsc.probability import (FiniteDist, JointTensor, VarGroup,
                              conditional_mi, entropy, marginalize)


def test_finite_dist_validates_mass():
    FiniteDist(np.array([0.25, 0.75]))
    with pytest.raises(ValidationError):
        FiniteDist(np.array([0.5, 0.4]))          # sums to 0.9
    with pytest.raises(ValidationError):
        FiniteDist(np.array([1.1, -0.1]))
    with pytest.raises(ValidationError):
        FiniteDist(np.array([]))


def test_joint_tensor_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        JointTensor(("x", "y"), np.ones((2, 2)))   # sums to 4
    with pytest.raises(ValidationError):
        JointTensor(("x",), np.full((2, 2), 0.25))  # label/ndim mismatch
    with pytest.raises(ValidationError):
        JointTensor(("x", "x"), np.full((2, 2), 0.25))


def test_joint_tensor_is_immutable():
    j = JointTensor(("x", "y"), np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        j.mass[0, 0] = 1.0


def test_var_group_coercion():
    assert VarGroup.of("x").labels == ("x",)
    assert VarGroup.of(("x", "y")).labels == ("x", "y")
    assert VarGroup.of(VarGroup(("z",))).labels == ("z",)
    with pytest.raises(ValidationError):
        VarGroup(("x", "x"))


def test_marginalize_keeps_original_axis_order():
    mass = np.arange(8, dtype=float).reshape(2, 2, 2)
    mass /= mass.sum()
    j = JointTensor(("a", "b", "c"), mass)
    m = marginalize(j, ("c", "a"))              # request order is irrelevant
    assert m.labels == ("a", "c")
    np.testing.assert_allclose(m.mass, mass.sum(axis=1))


def test_entropy_known_values():
    assert entropy(FiniteDist(np.array([0.5, 0.5]))) == pytest.approx(1.0, abs=1e-15)
    # binary entropy of the example's encoder-noise crossover
    assert entropy(FiniteDist(np.array([0.05, 0.95]))) == pytest.approx(
        0.2863969571159561, abs=1e-15)
    assert entropy(FiniteDist(np.array([0.10, 0.90]))) == pytest.approx(
        0.4689955935892812, abs=1e-15)
    assert entropy(FiniteDist(np.array([1.0, 0.0]))) == 0.0


def test_conditional_mi_independent_and_copy():
    j = JointTensor(("x", "y"), np.full((2, 2), 0.25))
    assert conditional_mi(j, "x", "y") == 0.0
    copy = JointTensor(("x", "y"), np.diag([0.5, 0.5]))
    assert conditional_mi(copy, "x", "y") == pytest.approx(1.0, abs=1e-15)


def test_conditional_mi_rejects_overlap():
    j = JointTensor(("x", "y", "z"), np.full((2, 2, 2), 0.125))
    with pytest.raises(ValidationError):
        conditional_mi(j, "x", "x")
    with pytest.raises(ValidationError):
        conditional_mi(j, "x", "y", cond=("x",))


def test_conditional_mi_matches_naive_reference():
    rng = np.random.default_rng(1845)
    for _ in range(25):
        mass = rng.random((2, 3, 2, 2)) + 1e-3
        mass /= mass.sum()
        j = JointTensor(("a", "b", "c", "d"), mass)
        fast = conditional_mi(j, "a", ("b", "d"), cond=("c",))
        slow = naive_conditional_mi(j, "a", ("b", "d"), cond=("c",))
        assert fast == pytest.approx(slow, abs=1e-12)
        fast2 = conditional_mi(j, ("a", "c"), "d")
        slow2 = naive_conditional_mi(j, ("a", "c"), "d")
        assert fast2 == pytest.approx(slow2, abs=1e-12)


def test_conditional_mi_clamps_rounding_noise_only():
    # a genuinely independent pair may compute to -1e-17; it must come back 0
    rng = np.random.default_rng(7)
    px = rng.random(4) + 0.1
    px /= px.sum()
    py = rng.random(4) + 0.1
    py /= py.sum()
    j = JointTensor(("x", "y"), np.outer(px, py))
    assert conditional_mi(j, "x", "y") == 0.0
