import math
from array import array

import pytest

from rnnbench.cells import Block
from rnnbench.optim import Adam, Momentum, Nag, make_optimizer


def scalar_block(name, value):
    return Block(name, array("d", [value]), 1, 1)


def grad_arrays(*values):
    return [array("d", [v]) for v in values]


# -- hand-derived trajectories -------------------------------------------


def test_nag_quadratic_trajectory_exact():
    """Minimize f(x) = x^2/2 (gradient x) from x0=1, beta=0.9, lr=0.1.

    First step: lookahead = 1, v = 0.1, x = 0.9.
    Second step: lookahead = 0.9 - 0.9*0.1 = 0.81, v = 0.9*0.1 + 0.1*0.81
    = 0.171, x = 0.9 - 0.171 = 0.729.
    """
    theta = scalar_block("x", 1.0)
    opt = Nag(lr=0.1, beta=0.9)

    def grad_fn(shifted):
        return [array("d", [shifted[0][0]])]

    opt.step_with([theta], grad_fn)
    assert abs(theta.data[0] - 0.9) <= 1e-15
    opt.step_with([theta], grad_fn)
    assert abs(theta.data[0] - 0.729) <= 1e-15


def test_momentum_quadratic_trajectory_exact():
    """Same quadratic, classical momentum: x1 = 0.9, x2 = 0.72."""
    theta = scalar_block("x", 1.0)
    opt = Momentum(lr=0.1, beta=0.9)
    opt.step([theta], grad_arrays(theta.data[0]))
    assert abs(theta.data[0] - 0.9) <= 1e-15
    opt.step([theta], grad_arrays(theta.data[0]))
    assert abs(theta.data[0] - 0.72) <= 1e-15


def test_nag_and_momentum_diverge_on_quadratic():
    """The lookahead matters: trajectories split at the second step."""
    a = scalar_block("x", 1.0)
    b = scalar_block("x", 1.0)
    nag = Nag(lr=0.1, beta=0.9)
    mom = Momentum(lr=0.1, beta=0.9)
    for _ in range(2):
        nag.step_with([a], lambda shifted: [array("d", [shifted[0][0]])])
        mom.step([b], grad_arrays(b.data[0]))
    assert a.data[0] != b.data[0]


def test_adam_constant_gradient_moment_identity():
    """With a constant gradient g, bias correction makes m_hat = g and
    v_hat = g^2 at every step."""
    g = 0.73
    theta = scalar_block("x", 0.0)
    opt = Adam(lr=0.001)
    for t in range(1, 101):
        opt.step([theta], grad_arrays(g))
        bc1 = 1.0 - 0.9 ** t
        bc2 = 1.0 - 0.999 ** t
        m_hat = opt.moment1[0][0] / bc1
        v_hat = opt.moment2[0][0] / bc2
        assert abs(m_hat - g) <= 1e-12, f"t={t}"
        assert abs(v_hat - g * g) <= 1e-12, f"t={t}"


def test_adam_constant_gradient_step_size():
    """Once corrected, each update is lr * g / (|g| + eps) ~= lr * sign(g)."""
    theta = scalar_block("x", 5.0)
    opt = Adam(lr=0.01, eps=1e-8)
    before = theta.data[0]
    opt.step([theta], grad_arrays(2.0))
    moved = before - theta.data[0]
    assert moved == pytest.approx(0.01, rel=1e-7)


def test_beta_zero_momentum_is_plain_sgd_bitwise():
    rng_vals = [0.37, -1.24, 0.001, 8.5]
    theta = Block("w", array("d", rng_vals), 1, 4)
    sgd_ref = array("d", rng_vals)
    opt = Momentum(lr=0.05, beta=0.0)
    for step in range(5):
        g = array("d", [math.sin(step + i) for i in range(4)])
        opt.step([theta], [g])
        for i in range(4):
            sgd_ref[i] -= 0.05 * g[i]
    assert theta.data.tobytes() == sgd_ref.tobytes()


def test_beta_zero_nag_is_plain_sgd_bitwise():
    rng_vals = [0.37, -1.24, 0.001, 8.5]
    theta = Block("w", array("d", rng_vals), 1, 4)
    sgd_ref = array("d", rng_vals)
    opt = Nag(lr=0.05, beta=0.0)
    for step in range(5):
        g = array("d", [math.sin(step + i) for i in range(4)])

        def grad_fn(shifted, g=g):
            # with beta=0 the shifted point must equal theta itself
            assert shifted[0].tobytes() == theta.data.tobytes()
            return [g]

        opt.step_with([theta], grad_fn)
        for i in range(4):
            sgd_ref[i] -= 0.05 * g[i]
    assert theta.data.tobytes() == sgd_ref.tobytes()


def test_nag_restores_theta_before_update():
    """grad_fn may clobber the live parameters; the update must still apply
    to the pre-step theta."""
    theta = scalar_block("x", 1.0)
    opt = Nag(lr=0.1, beta=0.9)

    def hostile_grad_fn(shifted):
        theta.data[0] = 999.0  # simulate the model being overwritten
        return [array("d", [shifted[0][0]])]

    opt.step_with([theta], hostile_grad_fn)
    assert theta.data[0] == pytest.approx(0.9, abs=1e-15)


def test_optimizers_converge_on_quadratic_bowl():
    """All three reach the minimum of f(x) = (x-3)^2 comfortably."""
    for name in ("adam", "nag", "momentum"):
        theta = scalar_block("x", 0.0)
        lr = 0.05 if name != "adam" else 0.2
        opt = make_optimizer(name, lr=lr, momentum=0.8)
        for _ in range(300):
            if opt.needs_lookahead:
                opt.step_with([theta],
                              lambda s: [array("d", [2.0 * (s[0][0] - 3.0)])])
            else:
                opt.step([theta], grad_arrays(2.0 * (theta.data[0] - 3.0)))
        assert abs(theta.data[0] - 3.0) < 1e-3, name


# -- construction and guards ----------------------------------------------


def test_make_optimizer_names():
    assert make_optimizer("adam").name == "adam"
    assert make_optimizer("NAG").name == "nag"
    assert make_optimizer(" momentum ").name == "momentum"
    with pytest.raises(ValueError, match="unknown optimizer"):
        make_optimizer("rmsprop")


def test_hyperparameter_validation():
    with pytest.raises(ValueError, match="lr"):
        Adam(lr=0.0)
    with pytest.raises(ValueError, match="lr"):
        Momentum(lr=-0.1)
    with pytest.raises(ValueError, match="beta"):
        Momentum(lr=0.1, beta=1.0)
    with pytest.raises(ValueError, match="beta1"):
        Adam(beta1=-0.01)
    with pytest.raises(ValueError, match="beta2"):
        Adam(beta2=1.0)
    with pytest.raises(ValueError, match="eps"):
        Adam(eps=0.0)
    with pytest.raises(ValueError, match="beta"):
        Nag(lr=0.1, beta=2.0)


def test_layout_change_rejected():
    opt = Momentum(lr=0.1)
    a = scalar_block("x", 1.0)
    opt.step([a], grad_arrays(1.0))
    wider = Block("x", array("d", [1.0, 2.0]), 1, 2)
    with pytest.raises(ValueError, match="layout"):
        opt.step([wider], [array("d", [0.0, 0.0])])


def test_gradient_length_mismatch_rejected():
    opt = Momentum(lr=0.1)
    theta = Block("w", array("d", [1.0, 2.0]), 1, 2)
    with pytest.raises(ValueError, match="length"):
        opt.step([theta], [array("d", [1.0])])


def test_non_finite_gradient_names_block():
    opt = Adam()
    theta = scalar_block("w_out", 1.0)
    with pytest.raises(ValueError, match="w_out"):
        opt.step([theta], grad_arrays(float("nan")))


def test_adam_step_counter():
    opt = Adam()
    theta = scalar_block("x", 1.0)
    assert opt.t == 0
    opt.step([theta], grad_arrays(0.1))
    opt.step([theta], grad_arrays(0.1))
    assert opt.t == 2
