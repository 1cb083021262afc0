"""Dense float64 tensors with reverse-mode automatic differentiation.

Operations execute eagerly on numpy arrays. When a :class:`Tape` is active,
every operation whose output needs a gradient appends a node (output tensor +
local backward rule) to the tape; the tape is therefore an ordered record of
executed operations in topological order, and ``Tape.backward`` replays it in
reverse exactly once per node. Without an active tape the same functions run
forward-only, which is how inference avoids graph bookkeeping.

Shapes are strict: no broadcasting except scalar-with-tensor. All math is
64-bit so finite-difference checks are trustworthy.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tensor",
    "Tape",
    "parameter",
    "constant",
    "matmul",
    "add",
    "sub",
    "mul",
    "neg",
    "abs_",
    "tanh",
    "sigmoid",
    "relu",
    "softmax",
    "log_softmax",
    "concat",
    "reshape",
    "slice_along",
    "max_over_axis",
    "sum_all",
    "add_rows",
    "conv1d",
    "grad_check",
    "GradCheckReport",
]


class Tensor:
    """A dense n-dimensional float64 array, optionally tracked for gradients.

    ``requires_grad=False`` marks a constant: it never accumulates gradient,
    no matter how it is used (this is how frozen embedding tables stay
    untouched by training).
    """

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # Operator sugar; python scalars are treated as constants.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def parameter(data, name: str | None = None) -> Tensor:
    """A trainable tensor."""
    return Tensor(data, requires_grad=True, name=name)


def constant(data, name: str | None = None) -> Tensor:
    """A tensor that never accumulates gradient."""
    return Tensor(data, requires_grad=False, name=name)


@dataclass
class _Node:
    out: Tensor
    backward: object  # callable(np.ndarray) -> None, accumulates into inputs


_state = threading.local()


def _tape_stack() -> list:
    stack = getattr(_state, "stack", None)
    if stack is None:
        stack = []
        _state.stack = stack
    return stack


def _active_tape():
    stack = _tape_stack()
    return stack[-1] if stack else None


@contextmanager
def _suspend_tape():
    # Forward-only region even when a caller holds a tape open.
    _tape_stack().append(None)
    try:
        yield
    finally:
        _tape_stack().pop()


class Tape:
    """Ordered record of executed operations for one differentiation graph.

    Use as a context manager around the forward computation, then call
    :meth:`backward` on the scalar result. Each graph instance is
    single-threaded; distinct tapes may live on distinct threads.
    """

    def __init__(self):
        self._nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _tape_stack().pop()
        assert popped is self

    def __len__(self) -> int:
        return len(self._nodes)

    def _record(self, out: Tensor, backward) -> None:
        self._nodes.append(_Node(out, backward))

    def backward(self, root: Tensor) -> None:
        """Accumulate d(root)/d(leaf) into every reachable trainable leaf.

        ``root`` must be scalar-sized. Calling again after clearing leaf
        gradients reproduces identical gradients: the replay is deterministic.
        """
        if root.data.size != 1:
            raise ValueError(f"backward root must be scalar, got shape {root.shape}")
        if not np.isfinite(root.data).all():
            raise ValueError("backward root is not finite")
        # Seeding is local to this pass. Every node.out was produced by an op
        # (never a caller-owned leaf), so interior grads can be dropped
        # afterwards; that leaves the tape replayable once leaves are cleared.
        root.grad = np.ones_like(root.data)
        for node in reversed(self._nodes):
            g = node.out.grad
            if g is None:
                continue
            node.backward(g)
        for node in self._nodes:
            if node.out is not root:
                node.out.grad = None


def _make_out(data: np.ndarray, *inputs: Tensor) -> tuple[Tensor, bool]:
    needs = any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs)
    tape = _active_tape()
    return out, (needs and tape is not None)


def _record(out: Tensor, backward) -> None:
    _active_tape()._record(out, backward)


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# binary elementwise (same shape, or scalar-with-tensor)


def _binary_shapes(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.data.ndim == 0 or b.data.ndim == 0:
        return
    raise ValueError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def _reduce_to(g: np.ndarray, t: Tensor) -> np.ndarray:
    # Inverse of the scalar-with-tensor case: a scalar operand receives the
    # sum of the incoming gradient.
    if t.data.ndim == 0 and np.ndim(g) != 0:
        return np.asarray(g.sum())
    return g


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "add")
    out, rec = _make_out(a.data + b.data, a, b)
    if rec:
        def backward(g):
            a._accumulate(_reduce_to(g, a))
            b._accumulate(_reduce_to(g, b))

        _record(out, backward)
    return out


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "sub")
    out, rec = _make_out(a.data - b.data, a, b)
    if rec:
        def backward(g):
            a._accumulate(_reduce_to(g, a))
            b._accumulate(_reduce_to(-g, b))

        _record(out, backward)
    return out


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "mul")
    out, rec = _make_out(a.data * b.data, a, b)
    if rec:
        a_data, b_data = a.data, b.data

        def backward(g):
            if a.requires_grad:
                a._accumulate(_reduce_to(g * b_data, a))
            if b.requires_grad:
                b._accumulate(_reduce_to(g * a_data, b))

        _record(out, backward)
    return out


# ---------------------------------------------------------------------------
# unary elementwise


def neg(a) -> Tensor:
    a = _as_tensor(a)
    out, rec = _make_out(-a.data, a)
    if rec:
        _record(out, lambda g: a._accumulate(-g))
    return out


def abs_(a) -> Tensor:
    """Elementwise absolute value; subgradient 0 at 0."""
    a = _as_tensor(a)
    out, rec = _make_out(np.abs(a.data), a)
    if rec:
        sign = np.sign(a.data)
        _record(out, lambda g: a._accumulate(g * sign))
    return out


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    y = np.tanh(a.data)
    out, rec = _make_out(y, a)
    if rec:
        _record(out, lambda g: a._accumulate(g * (1.0 - y * y)))
    return out


def _sigmoid_values(x: np.ndarray) -> np.ndarray:
    # Stable in both tails.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    y = _sigmoid_values(a.data)
    out, rec = _make_out(y, a)
    if rec:
        _record(out, lambda g: a._accumulate(g * y * (1.0 - y)))
    return out


def relu(a) -> Tensor:
    """max(0, x); the gradient at exactly 0 is 0."""
    a = _as_tensor(a)
    out, rec = _make_out(np.maximum(a.data, 0.0), a)
    if rec:
        mask = a.data > 0
        _record(out, lambda g: a._accumulate(g * mask))
    return out


# ---------------------------------------------------------------------------
# matmul


def matmul(a, b) -> Tensor:
    """Matrix product over 1-D/2-D operands (1-D x 1-D is a dot product)."""
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim not in (1, 2) or bd.ndim not in (1, 2):
        raise ValueError(f"matmul: operands must be 1-D or 2-D, got {a.shape} and {b.shape}")
    inner_a = ad.shape[-1]
    inner_b = bd.shape[0]
    if inner_a != inner_b:
        raise ValueError(f"matmul: inner extents disagree: {a.shape} vs {b.shape}")
    out, rec = _make_out(ad @ bd, a, b)
    if rec:
        def backward(g):
            if a.requires_grad:
                if ad.ndim == 2 and bd.ndim == 2:
                    a._accumulate(g @ bd.T)
                elif ad.ndim == 2 and bd.ndim == 1:
                    a._accumulate(np.outer(g, bd))
                elif ad.ndim == 1 and bd.ndim == 2:
                    a._accumulate(bd @ g)
                else:
                    a._accumulate(g * bd)
            if b.requires_grad:
                if ad.ndim == 2 and bd.ndim == 2:
                    b._accumulate(ad.T @ g)
                elif ad.ndim == 2 and bd.ndim == 1:
                    b._accumulate(ad.T @ g)
                elif ad.ndim == 1 and bd.ndim == 2:
                    b._accumulate(np.outer(ad, g))
                else:
                    b._accumulate(g * ad)

        _record(out, backward)
    return out


# ---------------------------------------------------------------------------
# softmax family (1-D)


def softmax(a) -> Tensor:
    """Max-shifted softmax over a 1-D tensor; output sums to 1."""
    a = _as_tensor(a)
    if a.data.ndim != 1 or a.data.size < 1:
        raise ValueError(f"softmax: need a nonempty 1-D tensor, got shape {a.shape}")
    if not np.isfinite(a.data).all():
        raise ValueError("softmax: non-finite input")
    shifted = a.data - a.data.max()
    e = np.exp(shifted)
    y = e / e.sum()
    out, rec = _make_out(y, a)
    if rec:
        _record(out, lambda g: a._accumulate(y * (g - np.dot(g, y))))
    return out


def log_softmax(a) -> Tensor:
    """log(softmax(x)) computed without forming the ratio."""
    a = _as_tensor(a)
    if a.data.ndim != 1 or a.data.size < 1:
        raise ValueError(f"log_softmax: need a nonempty 1-D tensor, got shape {a.shape}")
    if not np.isfinite(a.data).all():
        raise ValueError("log_softmax: non-finite input")
    shifted = a.data - a.data.max()
    e = np.exp(shifted)
    total = e.sum()
    y = shifted - np.log(total)
    out, rec = _make_out(y, a)
    if rec:
        sm = e / total
        _record(out, lambda g: a._accumulate(g - sm * g.sum()))
    return out


# ---------------------------------------------------------------------------
# structure ops


def concat(tensors, axis: int = 0) -> Tensor:
    """Concatenate along ``axis``; gradients route back to each source exactly."""
    ts = [_as_tensor(t) for t in tensors]
    if not ts:
        raise ValueError("concat: need at least one tensor")
    ndim = ts[0].data.ndim
    for t in ts:
        if t.data.ndim != ndim:
            raise ValueError(f"concat: rank mismatch {ts[0].shape} vs {t.shape}")
        for ax in range(ndim):
            if ax != axis and t.shape[ax] != ts[0].shape[ax]:
                raise ValueError(
                    f"concat: extent mismatch on axis {ax}: {ts[0].shape} vs {t.shape}"
                )
    out, rec = _make_out(np.concatenate([t.data for t in ts], axis=axis), *ts)
    if rec:
        sizes = [t.shape[axis] for t in ts]

        def backward(g):
            offset = 0
            for t, size in zip(ts, sizes):
                idx = [slice(None)] * ndim
                idx[axis] = slice(offset, offset + size)
                t._accumulate(g[tuple(idx)])
                offset += size

        _record(out, backward)
    return out


def reshape(a, shape) -> Tensor:
    """Row-major relabeling; element count must be preserved."""
    a = _as_tensor(a)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape, dtype=np.int64)) != a.data.size:
        raise ValueError(f"reshape: cannot view {a.shape} as {shape}")
    out, rec = _make_out(a.data.reshape(shape), a)
    if rec:
        old = a.shape
        _record(out, lambda g: a._accumulate(g.reshape(old)))
    return out


def slice_along(a, axis: int, start: int, stop: int) -> Tensor:
    """Contiguous region [start, stop) along one axis."""
    a = _as_tensor(a)
    if not (0 <= start < stop <= a.shape[axis]):
        raise ValueError(f"slice_along: [{start}:{stop}) out of range for axis {axis} of {a.shape}")
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)
    out, rec = _make_out(a.data[idx].copy(), a)
    if rec:
        def backward(g):
            if not a.requires_grad:
                return
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            a.grad[idx] += g

        _record(out, backward)
    return out


def max_over_axis(a, axis: int = 0) -> Tensor:
    """Maximum along ``axis``; gradient flows only to the first argmax."""
    a = _as_tensor(a)
    if a.shape[axis] < 1:
        raise ValueError(f"max_over_axis: empty axis {axis} in shape {a.shape}")
    values = a.data.max(axis=axis)
    out, rec = _make_out(values, a)
    if rec:
        argmax = a.data.argmax(axis=axis)  # first occurrence on ties

        def backward(g):
            scatter = np.zeros_like(a.data)
            np.put_along_axis(
                scatter, np.expand_dims(argmax, axis), np.expand_dims(g, axis), axis
            )
            a._accumulate(scatter)

        _record(out, backward)
    return out


def sum_all(a) -> Tensor:
    """Sum of all entries, as a scalar tensor."""
    a = _as_tensor(a)
    out, rec = _make_out(np.asarray(a.data.sum()), a)
    if rec:
        _record(out, lambda g: a._accumulate(np.full_like(a.data, float(g))))
    return out


def add_rows(m, v) -> Tensor:
    """Add a vector to every row of a matrix (explicit affine-bias op)."""
    m, v = _as_tensor(m), _as_tensor(v)
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ValueError(f"add_rows: need (T,F) and (F,), got {m.shape} and {v.shape}")
    out, rec = _make_out(m.data + v.data[None, :], m, v)
    if rec:
        def backward(g):
            m._accumulate(g)
            v._accumulate(g.sum(axis=0))

        _record(out, backward)
    return out


def conv1d(x, weight, bias, width: int, stride: int = 1) -> Tensor:
    """Temporal convolution over a (T, F) sequence.

    Each output row t is ``flatten(x[t*stride : t*stride+width]) @ weight.T
    + bias`` with weight of shape (K, width*F): the filter dots a window of
    ``width`` consecutive frames, concatenated in time order.
    """
    x, weight = _as_tensor(x), _as_tensor(weight)
    if x.data.ndim != 2:
        raise ValueError(f"conv1d: input must be (T, F), got {x.shape}")
    t_in, frames = x.shape
    if width < 1 or stride < 1:
        raise ValueError("conv1d: width and stride must be >= 1")
    if t_in < width:
        raise ValueError(f"conv1d: input length {t_in} shorter than kernel width {width}")
    if weight.data.ndim != 2 or weight.shape[1] != width * frames:
        raise ValueError(
            f"conv1d: weight must be (K, {width * frames}) for width {width} and "
            f"{frames} input frames, got {weight.shape}"
        )
    t_out = (t_in - width) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(x.data, (width, frames))
    windows = windows[::stride, 0].reshape(t_out, width * frames)
    values = windows @ weight.data.T
    inputs = [x, weight]
    if bias is not None:
        bias = _as_tensor(bias)
        if bias.data.shape != (weight.shape[0],):
            raise ValueError(f"conv1d: bias shape {bias.shape} != ({weight.shape[0]},)")
        values = values + bias.data[None, :]
        inputs.append(bias)
    out, rec = _make_out(values, *inputs)
    if rec:
        windows = windows.copy()  # detach from x.data's lifetime
        w_data = weight.data

        def backward(g):
            if weight.requires_grad:
                weight._accumulate(g.T @ windows)
            if bias is not None and bias.requires_grad:
                bias._accumulate(g.sum(axis=0))
            if x.requires_grad:
                gx = np.zeros_like(x.data)
                unfolded = g @ w_data  # (t_out, width*frames)
                for t in range(t_out):
                    lo = t * stride
                    gx[lo : lo + width] += unfolded[t].reshape(width, frames)
                x._accumulate(gx)

        _record(out, backward)
    return out


# ---------------------------------------------------------------------------
# gradient checking


@dataclass
class GradCheckReport:
    """Central-difference comparison for every checked parameter."""

    entries: list = field(default_factory=list)  # (name, max_rel_err, n_checked)
    eps: float = 1e-5

    @property
    def max_rel_error(self) -> float:
        return max((e[1] for e in self.entries), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max_rel_error <= tol

    def format(self) -> str:
        lines = [
            f"{name:40s} entries={n:6d} max_rel_err={err:.3e}"
            for name, err, n in self.entries
        ]
        lines.append(f"{'OVERALL':40s} max_rel_err={self.max_rel_error:.3e}")
        return "\n".join(lines)


def _rel_err(a: float, n: float) -> float:
    # the denominator floor acts as an absolute tolerance for near-zero
    # gradients, where central differences are dominated by cancellation
    # noise (~1e-11 at unit loss scale with the default eps)
    return abs(a - n) / max(1e-5, abs(a) + abs(n))


def grad_check(f, params, eps: float = 1e-5, max_entries: int | None = None,
               rng: np.random.RandomState | None = None) -> GradCheckReport:
    """Compare analytic gradients of ``f()`` against central differences.

    ``f`` must rebuild its graph on every call and return a scalar tensor.
    The analytic pass runs under a fresh tape; the perturbed evaluations run
    forward-only. Constants in ``params`` are asserted to stay gradient-free
    rather than differenced. ``max_entries`` caps the coordinates checked per
    parameter (all of them by default).
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    with Tape() as tape:
        loss = f()
    if loss.data.size != 1 or not np.isfinite(loss.data).all():
        raise ValueError("grad_check: objective must evaluate to a finite scalar")
    tape.backward(loss)

    report = GradCheckReport(eps=eps)
    for k, p in enumerate(params):
        name = p.name or f"param{k}"
        if not p.requires_grad:
            if p.grad is not None and np.any(p.grad):
                raise AssertionError(f"constant tensor {name} accumulated gradient")
            report.entries.append((name + " (constant)", 0.0, 0))
            continue
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            chooser = rng if rng is not None else np.random.RandomState(0)
            indices = chooser.choice(flat.size, size=max_entries, replace=False)
        worst = 0.0
        analytic_flat = analytic.reshape(-1)
        with _suspend_tape():
            for idx in indices:
                saved = flat[idx]
                flat[idx] = saved + eps
                hi = f().item()
                flat[idx] = saved - eps
                lo = f().item()
                flat[idx] = saved
                numeric = (hi - lo) / (2.0 * eps)
                worst = max(worst, _rel_err(float(analytic_flat[idx]), numeric))
        report.entries.append((name, worst, len(indices)))
    return report
