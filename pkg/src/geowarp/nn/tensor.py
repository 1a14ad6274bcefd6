"""Dense NHWC tensors with reverse-mode autodiff on an explicit tape.

Ops record onto the innermost active Tape; backward replays entries in
exact reverse execution order and accumulates gradients additively at
fan-out.  Without an active tape ops run in plain inference mode.
"""

import numpy as np


class Tensor:
    """A numpy array plus gradient slot; float32 for training, float64 for checks."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad=False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, rg={self.requires_grad})"


class TapeEntry:
    __slots__ = ("outputs", "inputs", "backward")

    def __init__(self, outputs, inputs, backward):
        self.outputs = outputs
        self.inputs = inputs
        self.backward = backward


_TAPE_STACK = []


def active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def record_op(outputs, inputs, backward):
    """Register an executed op with the active tape, if any.

    `backward` takes one gradient array per output (zeros substituted for
    outputs that received no gradient) and returns one array or None per
    input.
    """
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in outputs):
        tape.entries.append(TapeEntry(tuple(outputs), tuple(inputs), backward))


class Tape:
    """Ordered record of executed ops for one forward pass."""

    def __init__(self):
        self.entries = []

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _TAPE_STACK.pop()
        return False

    def backward(self, root, seed=None):
        """Back-propagate from `root` through the recorded entries."""
        if seed is None:
            seed = np.ones_like(root.data)
        root.grad = np.asarray(seed, dtype=root.data.dtype)
        replay_backward(self.entries, reverse=True)


def replay_backward(entries, reverse=True):
    """Run backward over tape entries in the given order.

    Exposed separately so the order-independence property can be exercised
    with alternative valid topological orders.
    """
    ordered = reversed(entries) if reverse else entries
    for entry in ordered:
        grads_out = [
            o.grad if o.grad is not None else np.zeros_like(o.data)
            for o in entry.outputs
        ]
        if all(o.grad is None for o in entry.outputs):
            continue
        grads_in = entry.backward(*grads_out)
        if not isinstance(grads_in, tuple):
            grads_in = (grads_in,)
        for t, g in zip(entry.inputs, grads_in):
            if g is None or not t.requires_grad:
                continue
            if t.grad is None:
                t.grad = g
            else:
                t.grad = t.grad + g


def zero_grads(tensors):
    for t in tensors:
        t.grad = None
