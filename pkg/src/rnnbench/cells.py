"""Recurrent cells, the scalar forecaster built on them, and gradients.

Two cell kinds share one interface: "lstm" and "gru".  Each consumes the
concatenation [h_prev, x_t] (hidden state first) and starts every window
from zero state.  A window of inputs is unrolled, the last hidden state
feeds a dense head, and the head emits one scalar prediction.

``lstm_step``/``gru_step`` advance a single step and are the readable
definition of the recurrences.  ``forward_sequence``/``backward_sequence``
run whole windows through the flat-buffer kernels (see kernels.py) and
are what training uses; the test suite pins the two paths to each other
bit for bit.

Backward passes are full backpropagation through time over the window —
no truncation — with analytical gradients for every parameter block.
``gradient_check`` verifies them against central finite differences.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from math import sqrt
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

from . import kernels
from .linalg import (
    Matrix,
    Rng,
    Vector,
    concat,
    init_uniform,
    matvec,
    sigmoid,
    tanh_v,
    vadd,
    vmul,
)

CELL_KINDS = ("lstm", "gru")

# Parameter block order per cell kind.  Initialization draws, snapshots,
# gradient layout, and optimizer state all follow this order.
LSTM_BLOCKS = ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c",
               "w_out", "b_out")
GRU_BLOCKS = ("w_z", "w_r", "w_h", "b_z", "b_r", "b_h", "w_out", "b_out")


@dataclass
class LstmParams:
    """Gate weights over [h_prev, x] and gate biases; all shape-(H, H+D)/( H,)."""

    w_i: Matrix
    w_f: Matrix
    w_o: Matrix
    w_c: Matrix
    b_i: Vector
    b_f: Vector
    b_o: Vector
    b_c: Vector


@dataclass
class GruParams:
    w_z: Matrix
    w_r: Matrix
    w_h: Matrix
    b_z: Vector
    b_r: Vector
    b_h: Vector


@dataclass
class DenseParams:
    """Scalar readout: w_out is 1 x H, b_out has length 1."""

    w_out: Matrix
    b_out: Vector


@dataclass
class LstmState:
    h: Vector
    c: Vector

    @classmethod
    def zeros(cls, hidden: int) -> "LstmState":
        return cls(Vector.zeros(hidden), Vector.zeros(hidden))


@dataclass
class GruState:
    h: Vector

    @classmethod
    def zeros(cls, hidden: int) -> "GruState":
        return cls(Vector.zeros(hidden))


@dataclass
class LstmStepRecord:
    """Everything the backward pass needs from one forward step."""

    z: Vector       # [h_prev, x]
    i: Vector
    f: Vector
    o: Vector
    g: Vector       # candidate, tanh
    c: Vector
    tanh_c: Vector
    h: Vector


@dataclass
class GruStepRecord:
    zin: Vector     # [h_prev, x], feeds the z and r gates
    cin: Vector     # [r*h_prev, x], feeds the candidate
    z: Vector
    r: Vector
    h_cand: Vector
    h: Vector


def lstm_step(p: LstmParams, state: LstmState, x: Vector):
    """One LSTM step; returns (new state, step record)."""
    z = concat(state.h, x)
    i = sigmoid(vadd(matvec(p.w_i, z), p.b_i))
    f = sigmoid(vadd(matvec(p.w_f, z), p.b_f))
    o = sigmoid(vadd(matvec(p.w_o, z), p.b_o))
    g = tanh_v(vadd(matvec(p.w_c, z), p.b_c))
    c = vadd(vmul(f, state.c), vmul(i, g))
    tc = tanh_v(c)
    h = vmul(o, tc)
    rec = LstmStepRecord(z=z, i=i, f=f, o=o, g=g, c=c, tanh_c=tc, h=h)
    return LstmState(h=h, c=c), rec


def gru_step(p: GruParams, state: GruState, x: Vector):
    """One GRU step; returns (new state, step record).

    Update: h_t = (1 - z_t)*h_prev + z_t*h_cand, with the candidate read
    from [r_t*h_prev, x_t].
    """
    zin = concat(state.h, x)
    zg = sigmoid(vadd(matvec(p.w_z, zin), p.b_z))
    rg = sigmoid(vadd(matvec(p.w_r, zin), p.b_r))
    cin = concat(vmul(rg, state.h), x)
    hc = tanh_v(vadd(matvec(p.w_h, cin), p.b_h))
    hd = state.h.data
    zd = zg.data
    hcd = hc.data
    h = Vector(
        array("d", ((1.0 - zd[j]) * hd[j] + zd[j] * hcd[j] for j in range(len(zd)))),
        _checked=True,
    )
    rec = GruStepRecord(zin=zin, cin=cin, z=zg, r=rg, h_cand=hc, h=h)
    return GruState(h=h), rec


def readout(head: DenseParams, h: Vector) -> float:
    """Dense head: scalar prediction from the final hidden state."""
    return vadd(matvec(head.w_out, h), head.b_out).data[0]


class Block(NamedTuple):
    """A named flat view of one parameter (or gradient) array.

    ``data`` aliases the owning Matrix/Vector storage, so elementwise
    writes update the model in place.
    """

    name: str
    data: array
    rows: int
    cols: int


@dataclass
class Gradients:
    """Parameter gradients in the same block order as the model."""

    kind: str
    blocks: list  # list[Block]

    def get(self, name: str) -> array:
        for b in self.blocks:
            if b.name == name:
                return b.data
        raise KeyError(f"no gradient block named {name!r}")

    def names(self) -> list:
        return [b.name for b in self.blocks]


@dataclass
class SequenceCache:
    """Flat per-step activations recorded by forward_sequence."""

    kind: str
    steps: int
    input_size: int
    hidden: int
    xs: array
    bufs: dict

    def step(self, t: int):
        """Step t's activations as a step record (copies, for inspection)."""
        if not 0 <= t < self.steps:
            raise IndexError(f"step {t} out of range for {self.steps}-step cache")
        H = self.hidden
        K = H + self.input_size
        b = self.bufs

        def vec(name: str, width: int) -> Vector:
            return Vector(b[name][t * width:(t + 1) * width], _checked=True)

        if self.kind == "lstm":
            return LstmStepRecord(
                z=vec("z", K), i=vec("i", H), f=vec("f", H),
                o=vec("o", H), g=vec("g", H), c=vec("c", H),
                tanh_c=vec("tc", H), h=vec("h", H),
            )
        return GruStepRecord(
            zin=vec("zin", K), cin=vec("cin", K), z=vec("z", H),
            r=vec("r", H), h_cand=vec("hc", H), h=vec("h", H),
        )


@dataclass
class Forecaster:
    """A recurrent cell plus dense head predicting the next scalar value."""

    kind: str
    input_size: int
    hidden: int
    cell: object  # LstmParams | GruParams
    head: DenseParams

    # -- construction ------------------------------------------------

    @classmethod
    def zeros(cls, kind: str, hidden: int, input_size: int = 1) -> "Forecaster":
        _check_kind(kind)
        if hidden < 1 or input_size < 1:
            raise ValueError(
                f"hidden and input_size must be >= 1, got {hidden} and {input_size}"
            )
        k = hidden + input_size
        if kind == "lstm":
            cell = LstmParams(
                *(Matrix.zeros(hidden, k) for _ in range(4)),
                *(Vector.zeros(hidden) for _ in range(4)),
            )
        else:
            cell = GruParams(
                *(Matrix.zeros(hidden, k) for _ in range(3)),
                *(Vector.zeros(hidden) for _ in range(3)),
            )
        head = DenseParams(Matrix.zeros(1, hidden), Vector.zeros(1))
        return cls(kind=kind, input_size=input_size, hidden=hidden,
                   cell=cell, head=head)

    @classmethod
    def init_random(cls, kind: str, hidden: int, input_size: int = 1,
                    seed: int = 0, scale: float | None = None) -> "Forecaster":
        """Uniform init, +-1/sqrt(fan-in) per weight matrix, zero biases.

        Matrices are drawn in block order from a SplitMix64 stream, so a
        given (kind, hidden, input_size, seed) is reproducible bit for
        bit on any platform.  ``scale`` overrides the fan-in rule.
        """
        model = cls.zeros(kind, hidden, input_size)
        rng = Rng(seed)
        k = hidden + input_size
        cell_scale = scale if scale is not None else 1.0 / sqrt(k)
        head_scale = scale if scale is not None else 1.0 / sqrt(hidden)
        weights = ("w_i", "w_f", "w_o", "w_c") if kind == "lstm" else \
            ("w_z", "w_r", "w_h")
        for name in weights:
            setattr(model.cell, name, init_uniform(rng, hidden, k, cell_scale))
        model.head.w_out = init_uniform(rng, 1, hidden, head_scale)
        return model

    # -- parameter access --------------------------------------------

    def block_names(self) -> tuple:
        return LSTM_BLOCKS if self.kind == "lstm" else GRU_BLOCKS

    def param_blocks(self) -> list:
        """Named flat views of every parameter array, in canonical order."""
        out = []
        for name in self.block_names():
            owner = self.head if name in ("w_out", "b_out") else self.cell
            obj = getattr(owner, name)
            if isinstance(obj, Matrix):
                out.append(Block(name, obj.data, obj.rows, obj.cols))
            else:
                out.append(Block(name, obj.data, 1, len(obj.data)))
        return out

    def n_params(self) -> int:
        return sum(len(b.data) for b in self.param_blocks())

    def clone(self) -> "Forecaster":
        dup = Forecaster.zeros(self.kind, self.hidden, self.input_size)
        for mine, theirs in zip(self.param_blocks(), dup.param_blocks()):
            theirs.data[:] = mine.data
        return dup

    # -- persistence ---------------------------------------------------

    def save(self, path) -> None:
        """Write a textual snapshot; floats use repr-exact %.17g."""
        lines = [
            "rnnbench-params v1",
            f"cell={self.kind} hidden={self.hidden} input={self.input_size}",
        ]
        for b in self.param_blocks():
            lines.append(f"block {b.name} {b.rows} {b.cols}")
            for r in range(b.rows):
                lines.append(" ".join(
                    format(b.data[r * b.cols + k], ".17g") for k in range(b.cols)
                ))
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "Forecaster":
        lines = Path(path).read_text(encoding="ascii").splitlines()
        if not lines or lines[0] != "rnnbench-params v1":
            raise ValueError(f"{path}: not a rnnbench-params v1 snapshot")
        fields = dict(part.split("=", 1) for part in lines[1].split())
        model = cls.zeros(fields["cell"], int(fields["hidden"]), int(fields["input"]))
        pos = 2
        for b in model.param_blocks():
            header = f"block {b.name} {b.rows} {b.cols}"
            if pos >= len(lines) or lines[pos] != header:
                got = lines[pos] if pos < len(lines) else "<eof>"
                raise ValueError(f"{path}: expected {header!r}, got {got!r}")
            pos += 1
            for r in range(b.rows):
                vals = [float(tok) for tok in lines[pos].split()]
                if len(vals) != b.cols:
                    raise ValueError(
                        f"{path}: block {b.name} row {r} has {len(vals)} values, "
                        f"expected {b.cols}"
                    )
                b.data[r * b.cols:(r + 1) * b.cols] = array("d", vals)
                pos += 1
        for b in model.param_blocks():
            if not kernels.active().all_finite(b.data):
                raise ValueError(f"{path}: block {b.name} contains non-finite values")
        return model

    # -- inference -----------------------------------------------------

    def predict_window(self, window) -> float:
        return forward_sequence(self, window)[0]


def _check_kind(kind: str) -> None:
    if kind not in CELL_KINDS:
        raise ValueError(f"unknown cell kind {kind!r}; choose from {CELL_KINDS}")


def _flatten_window(window, input_size: int) -> array:
    """Accept [Vector, ...] or, when input_size == 1, plain floats."""
    xs = array("d")
    for t, x in enumerate(window):
        if isinstance(x, Vector):
            if len(x) != input_size:
                raise ValueError(
                    f"window step {t} has {len(x)} features, expected {input_size}"
                )
            xs.extend(x.data)
        elif input_size == 1:
            xs.append(float(x))
        else:
            raise ValueError(
                f"window step {t} is a scalar but input_size is {input_size}"
            )
    return xs


def forward_sequence(model: Forecaster, window):
    """Unroll the cell over the window; returns (prediction, cache).

    State starts at zero.  The cache holds every per-step activation the
    matching backward pass consumes.
    """
    T = len(window)
    if T < 1:
        raise ValueError("forward_sequence needs a non-empty window")
    H = model.hidden
    D = model.input_size
    K = H + D
    xs = _flatten_window(window, D)
    mod = kernels.active()
    c = model.cell
    w_out = model.head.w_out.data
    b_out = model.head.b_out.data[0]

    def buf(n: int) -> array:
        return array("d", bytes(8 * n))

    if model.kind == "lstm":
        bufs = {"z": buf(T * K), "i": buf(T * H), "f": buf(T * H),
                "o": buf(T * H), "g": buf(T * H), "c": buf(T * H),
                "tc": buf(T * H), "h": buf(T * H)}
        pred = mod.lstm_forward(
            c.w_i.data, c.w_f.data, c.w_o.data, c.w_c.data,
            c.b_i.data, c.b_f.data, c.b_o.data, c.b_c.data,
            w_out, b_out, xs, T, D, H,
            bufs["z"], bufs["i"], bufs["f"], bufs["o"], bufs["g"],
            bufs["c"], bufs["tc"], bufs["h"],
        )
    else:
        bufs = {"zin": buf(T * K), "cin": buf(T * K), "z": buf(T * H),
                "r": buf(T * H), "hc": buf(T * H), "h": buf(T * H)}
        pred = mod.gru_forward(
            c.w_z.data, c.w_r.data, c.w_h.data,
            c.b_z.data, c.b_r.data, c.b_h.data,
            w_out, b_out, xs, T, D, H,
            bufs["zin"], bufs["cin"], bufs["z"], bufs["r"],
            bufs["hc"], bufs["h"],
        )
    cache = SequenceCache(kind=model.kind, steps=T, input_size=D, hidden=H,
                          xs=xs, bufs=bufs)
    return pred, cache


def backward_sequence(model: Forecaster, cache: SequenceCache,
                      d_pred: float) -> Gradients:
    """Full-window backpropagation through time.

    ``d_pred`` is the adjoint of the prediction (for squared error on a
    target y that is 2*(pred - y)).  Returns gradients in block order.
    """
    if cache.kind != model.kind or cache.hidden != model.hidden \
            or cache.input_size != model.input_size:
        raise ValueError("cache does not match this model")
    T, H, D = cache.steps, cache.hidden, cache.input_size
    K = H + D
    mod = kernels.active()
    c = model.cell
    b = cache.bufs

    grads = []
    for blk in model.param_blocks():
        grads.append(Block(blk.name, array("d", bytes(8 * len(blk.data))),
                           blk.rows, blk.cols))
    g = {blk.name: blk.data for blk in grads}

    if model.kind == "lstm":
        mod.lstm_backward(
            c.w_i.data, c.w_f.data, c.w_o.data, c.w_c.data,
            model.head.w_out.data, T, D, H,
            b["z"], b["i"], b["f"], b["o"], b["g"], b["c"], b["tc"], b["h"],
            d_pred,
            g["w_i"], g["w_f"], g["w_o"], g["w_c"],
            g["b_i"], g["b_f"], g["b_o"], g["b_c"],
            g["w_out"], g["b_out"],
        )
    else:
        mod.gru_backward(
            c.w_z.data, c.w_r.data, c.w_h.data,
            model.head.w_out.data, T, D, H,
            b["zin"], b["cin"], b["z"], b["r"], b["hc"], b["h"],
            d_pred,
            g["w_z"], g["w_r"], g["w_h"],
            g["b_z"], g["b_r"], g["b_h"],
            g["w_out"], g["b_out"],
        )
    return Gradients(kind=model.kind, blocks=grads)


@dataclass
class GradCheckReport:
    """Analytical-vs-numerical gradient comparison for one model+window."""

    kind: str
    tolerance: float
    fd_step: float
    block_errors: list      # [(block name, relative error)]
    max_rel_error: float
    failing_blocks: list
    passed: bool

    def summary(self) -> str:
        lines = [
            f"cell={self.kind} tolerance={self.tolerance:g} fd_step={self.fd_step:g}"
        ]
        for name, err in self.block_errors:
            flag = "ok" if name not in self.failing_blocks else "FAIL"
            lines.append(f"  {name:<6} rel_err={err:.3e}  {flag}")
        lines.append(f"max_rel_error={self.max_rel_error:.3e} "
                     f"{'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def gradient_check(model: Forecaster, window, tolerance: float = 1e-5,
                   fd_step: float = 1e-6,
                   mutate_grads: Callable | None = None) -> GradCheckReport:
    """Compare backward_sequence against central finite differences.

    Per block the score is max|analytic - numeric| normalized by the
    largest magnitude seen in either gradient (floored at 1e-12).  Meant
    for small models; refuses hidden > 16 because the FD sweep is
    O(params) forward passes.

    ``mutate_grads`` lets tests corrupt the analytical gradients before
    comparison to prove the check actually detects faults.
    """
    if model.hidden > 16:
        raise ValueError(
            f"gradient_check is for small models (hidden <= 16), got {model.hidden}"
        )
    pred, cache = forward_sequence(model, window)
    grads = backward_sequence(model, cache, 1.0)
    if mutate_grads is not None:
        mutate_grads(grads)

    block_errors = []
    failing = []
    max_rel = 0.0
    for pblk, gblk in zip(model.param_blocks(), grads.blocks):
        pdata = pblk.data
        gdata = gblk.data
        maxdiff = 0.0
        maxmag = 0.0
        for idx in range(len(pdata)):
            orig = pdata[idx]
            pdata[idx] = orig + fd_step
            f_plus = forward_sequence(model, window)[0]
            pdata[idx] = orig - fd_step
            f_minus = forward_sequence(model, window)[0]
            pdata[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * fd_step)
            analytic = gdata[idx]
            diff = abs(analytic - numeric)
            if diff > maxdiff:
                maxdiff = diff
            mag = max(abs(analytic), abs(numeric))
            if mag > maxmag:
                maxmag = mag
        rel = maxdiff / max(maxmag, 1e-12)
        block_errors.append((pblk.name, rel))
        if rel > tolerance:
            failing.append(pblk.name)
        if rel > max_rel:
            max_rel = rel
    return GradCheckReport(
        kind=model.kind, tolerance=tolerance, fd_step=fd_step,
        block_errors=block_errors, max_rel_error=max_rel,
        failing_blocks=failing, passed=not failing,
    )
