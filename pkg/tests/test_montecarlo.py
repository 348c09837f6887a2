"""Sampling determinism and plug-in estimator sanity."""
import numpy as np
import pytest

from klsc.errors import ValidationError
from klsc.montecarlo import empirical_joint, plugin_cmi, sample_joint
from klsc.probability import JointTensor, conditional_mi, marginalize

N = 200_000


def test_same_seed_same_batch(example_joint):
    a = sample_joint(example_joint, 1000, seed=9)
    b = sample_joint(example_joint, 1000, seed=9)
    assert np.array_equal(a.draws, b.draws)
    c = sample_joint(example_joint, 1000, seed=10)
    assert not np.array_equal(a.draws, c.draws)


def test_point_mass_draws_are_constant():
    mass = np.zeros((2, 3))
    mass[1, 2] = 1.0
    joint = JointTensor(("a", "b"), mass)
    batch = sample_joint(joint, 500, seed=0)
    assert np.all(batch.draws == [1, 2])


def test_batch_columns(example_joint):
    batch = sample_joint(example_joint, 100, seed=1)
    assert batch.labels == example_joint.labels
    assert batch.draws.shape == (100, 7)
    x = batch.column("x")
    assert set(np.unique(x)) <= {0, 1}
    # u is a single-symbol alphabet in the reference example
    assert np.all(batch.column("u") == 0)


def test_empirical_marginal_near_truth(example_joint):
    batch = sample_joint(example_joint, N, seed=20240817)
    emp = empirical_joint(batch)
    assert emp.labels == example_joint.labels
    assert emp.mass.sum() == pytest.approx(1.0, abs=1e-12)
    px = marginalize(emp, "x").mass
    assert px[0] == pytest.approx(0.5, abs=0.005)


def test_plugin_cmi_tracks_exact_values(example_joint):
    batch = sample_joint(example_joint, N, seed=7)
    for g1, g2, cond in ((("v",), ("y",), ("a",)),
                         (("x",), ("z",), ("a", "u")),
                         (("xt",), ("a",), ()),
                         (("v", "x"), ("y",), ("a",))):
        exact = conditional_mi(example_joint, g1, g2, cond)
        est = plugin_cmi(batch, g1, g2, cond)
        assert est == pytest.approx(exact, abs=0.01)


def test_independent_variables_estimate_near_zero():
    rng = np.random.default_rng(3)
    pa = rng.dirichlet(np.ones(3))
    pb = rng.dirichlet(np.ones(4))
    joint = JointTensor(("a", "b"), np.outer(pa, pb))
    batch = sample_joint(joint, N, seed=4)
    assert plugin_cmi(batch, "a", "b") <= 0.01


def test_copied_variable_estimates_full_bit():
    joint = JointTensor(("a", "b"), np.eye(2) * 0.5)
    batch = sample_joint(joint, 50_000, seed=5)
    # estimate equals the empirical H(A), within O(1/sqrt(n)) of one bit
    assert plugin_cmi(batch, "a", "b") == pytest.approx(1.0, abs=1e-3)


def test_sample_count_validation(example_joint):
    with pytest.raises(ValidationError):
        sample_joint(example_joint, 0, seed=0)
