"""Shared fixtures: the reference binary config and random-instance factories."""
import numpy as np
import pytest

from klsc.channels import CondChannel
from klsc.probability import FiniteDist, JointTensor, VarGroup
from klsc.system import BinaryExampleConfig, SystemFactors, build_binary_example, build_joint


@pytest.fixture(scope="session")
def example_config():
    """The bundled binary/BSC running example configuration."""
    return BinaryExampleConfig(p_enc=0.05, q=((0.010, 0.050), (0.030, 0.060)),
                               alpha0=0.3, alpha1=0.3, p0=0.1, p1=0.1)


@pytest.fixture(scope="session")
def example_joint(example_config):
    return build_joint(build_binary_example(example_config))


def stochastic_rows(rng, n, k, floor=1e-3):
    """Random row-stochastic matrix with entries bounded away from zero."""
    rows = rng.random((n, k)) + floor
    return rows / rows.sum(axis=1, keepdims=True)


def random_binary_factors(rng, separate_measurement=False, degraded=False):
    """A random valid all-binary SystemFactors instance.

    separate_measurement: the decoder channel ignores the encoder's noisy
    observation (rows constant in x~). degraded: Z is produced from Y by a
    further random channel, making (A,X~,X)-Y-Z a Markov chain.
    """
    source = FiniteDist(stochastic_rows(rng, 1, 2)[0])
    enc = CondChannel(("x",), (2,), "xt", 2, stochastic_rows(rng, 2, 2))
    action = CondChannel(("xt",), (2,), "a", 2, stochastic_rows(rng, 2, 2))
    if degraded:
        y_rows = stochastic_rows(rng, 8, 2)             # P(y | x, xt, a)
        w = stochastic_rows(rng, 2, 2)                  # P(z | y)
        meas_rows = np.einsum("ry,yz->ryz", y_rows, w).reshape(8, 4)
    elif separate_measurement:
        base = stochastic_rows(rng, 4, 4)               # rows over (x, a)
        # duplicate across xt: row index is (x*2 + xt)*2 + a
        meas_rows = np.empty((8, 4))
        for x in range(2):
            for xt in range(2):
                for a in range(2):
                    meas_rows[(x * 2 + xt) * 2 + a] = base[x * 2 + a]
    else:
        meas_rows = stochastic_rows(rng, 8, 4)
    meas = CondChannel(("x", "xt", "a"), (2, 2, 2), "yz", 4, meas_rows)
    aux_v = CondChannel(("xt", "a"), (2, 2), "v", 2, stochastic_rows(rng, 4, 2))
    aux_u = CondChannel(("v",), (2,), "u", 2, stochastic_rows(rng, 2, 2))
    return SystemFactors(source=source, enc_meas=enc, action=action, meas=meas,
                         aux_v=aux_v, aux_u=aux_u, y_size=2, z_size=2)


def degenerate_cln_factors():
    """X and Y constant, Z = X~: maximally favourable to the eavesdropper.

    Any L revealing X~ has I(L;X|A,Y) = 0 but I(L;Z|A,Y) up to one bit,
    so the (X over Z) ordering fails with gap -1.
    """
    source = FiniteDist(np.array([1.0]))
    enc = CondChannel(("x",), (1,), "xt", 2, np.array([[0.5, 0.5]]))
    action = CondChannel(("xt",), (2,), "a", 1, np.array([[1.0], [1.0]]))
    meas = CondChannel(("x", "xt", "a"), (1, 2, 1), "yz", 2,
                       np.array([[1.0, 0.0], [0.0, 1.0]]))
    aux_v = CondChannel(("xt", "a"), (2, 1), "v", 1, np.ones((2, 1)))
    aux_u = CondChannel(("v",), (1,), "u", 1, np.ones((1, 1)))
    return SystemFactors(source=source, enc_meas=enc, action=action,
                         meas=meas, aux_v=aux_v, aux_u=aux_u,
                         y_size=1, z_size=2)


def naive_conditional_mi(joint: JointTensor, g1, g2, cond=()) -> float:
    """Dict-and-loop I(g1;g2|cond) used to cross-check the array code."""
    a_axes = joint.axes_of(VarGroup.of(g1))
    b_axes = joint.axes_of(VarGroup.of(g2))
    c_axes = joint.axes_of(VarGroup.of(cond))

    def acc(axes):
        out = {}
        for idx, p in np.ndenumerate(joint.mass):
            if p <= 0:
                continue
            key = tuple(idx[i] for i in axes)
            out[key] = out.get(key, 0.0) + p
        return out

    p_ac = acc(a_axes + c_axes)
    p_bc = acc(b_axes + c_axes)
    p_abc = acc(a_axes + b_axes + c_axes)
    p_c = acc(c_axes) if c_axes else {(): 1.0}
    total = 0.0
    for key, p in p_abc.items():
        ka = key[:len(a_axes)]
        kb = key[len(a_axes):len(a_axes) + len(b_axes)]
        kc = key[len(a_axes) + len(b_axes):]
        total += p * np.log2(p * p_c[kc] / (p_ac[ka + kc] * p_bc[kb + kc]))
    return total
