"""First-order optimizers over named parameter blocks.

Three methods, all operating in place on the flat arrays exposed by
``Forecaster.param_blocks()``:

* ``Momentum`` — classical heavy-ball:  v <- beta*v + lr*g(theta);
  theta <- theta - v.
* ``Nag`` — Nesterov's accelerated gradient in its literal two-step
  form:  v <- beta*v + lr*g(theta - beta*v);  theta <- theta - v.
  Because the gradient is taken at the looked-ahead point, ``Nag``
  consumes a callback that evaluates gradients at given parameter
  values rather than a precomputed gradient.
* ``Adam`` — bias-corrected first/second moments with elementwise step
  lr * m_hat / (sqrt(v_hat) + eps).

With beta = 0 both momentum variants reduce to plain SGD bit for bit.
State (velocities, moments) is created lazily on the first step and is
keyed to the block layout seen then; feeding a different layout later
is an error.
"""

from __future__ import annotations

from array import array
from typing import Callable, Sequence

from . import kernels

OPTIMIZER_NAMES = ("adam", "nag", "momentum")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _check_grads(blocks, grads) -> None:
    live = kernels.active()
    for blk, g in zip(blocks, grads):
        if len(blk.data) != len(g):
            raise ValueError(
                f"gradient for block {blk.name!r} has length {len(g)}, "
                f"expected {len(blk.data)}"
            )
        if not live.all_finite(g):
            raise ValueError(f"non-finite gradient in block {blk.name!r}")


class _Stateful:
    """Shared lazy per-block state handling."""

    def _init_state(self, blocks) -> None:
        self._layout = [(b.name, len(b.data)) for b in blocks]
        self._v = [array("d", bytes(8 * len(b.data))) for b in blocks]

    def _check_layout(self, blocks) -> None:
        layout = [(b.name, len(b.data)) for b in blocks]
        if layout != self._layout:
            raise ValueError(
                "parameter block layout changed between optimizer steps"
            )


class Momentum(_Stateful):
    """Classical momentum; beta=0 gives plain SGD."""

    name = "momentum"
    needs_lookahead = False

    def __init__(self, lr: float = 0.001, beta: float = 0.9):
        _require(lr > 0.0, f"lr must be > 0, got {lr}")
        _require(0.0 <= beta < 1.0, f"beta must be in [0, 1), got {beta}")
        self.lr = lr
        self.beta = beta
        self._v = None

    def step(self, blocks, grads: Sequence) -> None:
        """grads: flat float64 arrays in block order."""
        if self._v is None:
            self._init_state(blocks)
        else:
            self._check_layout(blocks)
        _check_grads(blocks, grads)
        live = kernels.active()
        for blk, v, g in zip(blocks, self._v, grads):
            live.velocity_update(v, g, self.beta, self.lr)
            live.sub_inplace(blk.data, v)

    @property
    def velocity(self):
        return self._v


class Nag(_Stateful):
    """Nesterov momentum, literal lookahead form.

    ``step_with`` calls ``grad_fn(shifted)`` exactly once, where
    ``shifted`` is a list of fresh arrays holding theta - beta*v in
    block order; the callback returns gradient arrays in the same
    order.  The callback may clobber the model's parameters while
    evaluating — originals are restored from a snapshot before the
    update applies.
    """

    name = "nag"
    needs_lookahead = True

    def __init__(self, lr: float = 0.001, beta: float = 0.9):
        _require(lr > 0.0, f"lr must be > 0, got {lr}")
        _require(0.0 <= beta < 1.0, f"beta must be in [0, 1), got {beta}")
        self.lr = lr
        self.beta = beta
        self._v = None

    def step_with(self, blocks, grad_fn: Callable) -> None:
        if self._v is None:
            self._init_state(blocks)
        else:
            self._check_layout(blocks)
        live = kernels.active()
        theta = [array("d", b.data) for b in blocks]  # snapshot
        shifted = [array("d", bytes(8 * len(b.data))) for b in blocks]
        for b, s, v in zip(blocks, shifted, self._v):
            live.lookahead(s, b.data, v, self.beta)
        grads = grad_fn(shifted)
        _check_grads(blocks, grads)
        for b, t, v, g in zip(blocks, theta, self._v, grads):
            live.velocity_update(v, g, self.beta, self.lr)
            live.assign_diff(b.data, t, v)

    @property
    def velocity(self):
        return self._v


class Adam(_Stateful):
    """Adam with standard bias correction."""

    name = "adam"
    needs_lookahead = False

    def __init__(self, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        _require(lr > 0.0, f"lr must be > 0, got {lr}")
        _require(0.0 <= beta1 < 1.0, f"beta1 must be in [0, 1), got {beta1}")
        _require(0.0 <= beta2 < 1.0, f"beta2 must be in [0, 1), got {beta2}")
        _require(eps > 0.0, f"eps must be > 0, got {eps}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m = None
        self._v = None
        self.t = 0

    def step(self, blocks, grads: Sequence) -> None:
        if self._m is None:
            self._layout = [(b.name, len(b.data)) for b in blocks]
            self._m = [array("d", bytes(8 * len(b.data))) for b in blocks]
            self._v = [array("d", bytes(8 * len(b.data))) for b in blocks]
        else:
            self._check_layout(blocks)
        _check_grads(blocks, grads)
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        live = kernels.active()
        for blk, m, v, g in zip(blocks, self._m, self._v, grads):
            live.adam_update(blk.data, m, v, g, self.beta1, self.beta2,
                             self.lr, self.eps, bc1, bc2)

    @property
    def moment1(self):
        return self._m

    @property
    def moment2(self):
        return self._v


def make_optimizer(name: str, lr: float = 0.001, momentum: float = 0.9,
                   beta1: float = 0.9, beta2: float = 0.999,
                   eps: float = 1e-8):
    """Build an optimizer by canonical name (adam, nag, momentum)."""
    key = name.strip().lower()
    if key == "adam":
        return Adam(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    if key == "nag":
        return Nag(lr=lr, beta=momentum)
    if key == "momentum":
        return Momentum(lr=lr, beta=momentum)
    raise ValueError(
        f"unknown optimizer {name!r}; choose from {OPTIMIZER_NAMES}"
    )
