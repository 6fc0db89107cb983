"""Minimal dense-tensor reverse-mode differentiation.

Forward primitives record themselves on a :class:`Tape`; ``backward``
replays the records once in reverse, accumulating gradients into each
registered parameter. Everything is double precision, and no primitive
draws randomness except ``dropout`` (which takes an explicit generator),
so identical seeds yield bit-identical gradients.

Passing ``tape=None`` to any primitive runs the forward computation
without recording (inference mode).
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse as sp


class Tensor:
    """A 2-D float64 array with an optional gradient slot."""

    __slots__ = ("values", "grad", "requires_grad", "name")

    def __init__(self, values, requires_grad: bool = False, name: str | None = None):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ValueError(f"tensors are 2-D, got shape {arr.shape}")
        self.values = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @classmethod
    def _wrap(cls, values: np.ndarray, requires_grad: bool) -> "Tensor":
        # Fast path for freshly computed float64 arrays: no copy, no checks.
        out = object.__new__(cls)
        out.values = values
        out.grad = None
        out.requires_grad = requires_grad
        out.name = None
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def _accumulate(self, g: np.ndarray, own: bool = False) -> None:
        # ``own=True`` promises g is a fresh array no one else references,
        # so the first accumulation can adopt it instead of copying.
        if self.grad is None:
            self.grad = g if own else g.copy()
        else:
            self.grad += g

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


def parameter(values, name: str | None = None) -> Tensor:
    return Tensor(values, requires_grad=True, name=name)


class Tape:
    """Append-only record of one forward pass.

    Records are appended in execution order, so every node's inputs precede
    it and a single reverse sweep visits each node exactly once.
    """

    __slots__ = ("_records", "params", "kink_gaps")

    def __init__(self, params: Sequence[Tensor] = ()):
        self._records: list[tuple[Tensor, Callable[[np.ndarray], None]]] = []
        self.params = list(params)
        # Smallest |pre-activation| seen by any leaky_relu; lets callers
        # detect probes that sit too close to the kink for finite differences.
        self.kink_gaps: list[float] = []

    def __len__(self) -> int:
        return len(self._records)

    def record(self, out: Tensor, backward_fn: Callable[[np.ndarray], None]) -> None:
        self._records.append((out, backward_fn))


def backward(tape: Tape, loss: Tensor) -> dict[Tensor, np.ndarray]:
    """Gradients of a scalar loss for every registered parameter.

    Parameters off the path from the loss get zero gradients. The tape is
    consumed: records are cleared after the sweep.
    """
    if loss.values.shape != (1, 1):
        raise ValueError(f"backward needs a 1x1 loss, got shape {loss.values.shape}")
    for p in tape.params:
        p.grad = None
    loss.grad = np.ones((1, 1))
    for out, backward_fn in reversed(tape._records):
        if out.grad is not None:
            backward_fn(out.grad)
    grads: dict[Tensor, np.ndarray] = {}
    for p in tape.params:
        grads[p] = p.grad if p.grad is not None else np.zeros_like(p.values)
        p.grad = None
    tape._records.clear()
    return grads


def matmul(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = Tensor._wrap(a.values @ b.values, a.requires_grad or b.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.values.T, own=True)
        if b.requires_grad:
            b._accumulate(a.values.T @ g, own=True)

    tape.record(out, backward_fn)
    return out


def input_matmul(tape: Tape | None, x, w: Tensor) -> Tensor:
    """Multiply a constant design matrix (dense or CSR) by a parameter.

    Only ``w`` receives gradients, so sparse TF-IDF rows never have to be
    densified on the backward pass.
    """
    if x.shape[1] != w.shape[0]:
        raise ValueError(f"input_matmul: incompatible shapes {x.shape} and {w.shape}")
    product = x @ w.values
    if sp.issparse(product):  # pragma: no cover - scipy returns ndarray here
        product = product.toarray()
    out = Tensor._wrap(np.asarray(product, dtype=np.float64), w.requires_grad)
    if tape is None or not out.requires_grad:
        return out
    xT = x.T

    def backward_fn(g: np.ndarray) -> None:
        w._accumulate(np.asarray(xT @ g), own=True)

    tape.record(out, backward_fn)
    return out


def add(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"add: shape mismatch {a.shape} vs {b.shape}")
    out = Tensor._wrap(a.values + b.values, a.requires_grad or b.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(g)

    tape.record(out, backward_fn)
    return out


def scale(tape: Tape | None, a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor._wrap(a.values * c, a.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        a._accumulate(g * c, own=True)

    tape.record(out, backward_fn)
    return out


def concat_cols(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"concat_cols: row mismatch {a.shape} vs {b.shape}")
    split = a.shape[1]
    out = Tensor._wrap(
        np.concatenate([a.values, b.values], axis=1),
        a.requires_grad or b.requires_grad,
    )
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g[:, :split])
        if b.requires_grad:
            b._accumulate(g[:, split:])

    tape.record(out, backward_fn)
    return out


def slice_rows(tape: Tape | None, a: Tensor, start: int, stop: int) -> Tensor:
    if not 0 <= start < stop <= a.shape[0]:
        raise ValueError(f"slice_rows: [{start}, {stop}) invalid for shape {a.shape}")
    out = Tensor._wrap(a.values[start:stop].copy(), a.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if a.grad is None:
            a.grad = np.zeros_like(a.values)
        a.grad[start:stop] += g

    tape.record(out, backward_fn)
    return out


def outer_add(tape: Tape | None, s: Tensor, t: Tensor) -> Tensor:
    """out[i, j] = s[i, 0] + t[j, 0] for column vectors s and t."""
    if s.shape[1] != 1 or t.shape[1] != 1:
        raise ValueError(f"outer_add: need column vectors, got {s.shape} and {t.shape}")
    out = Tensor._wrap(s.values + t.values.T, s.requires_grad or t.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if s.requires_grad:
            s._accumulate(g.sum(axis=1, keepdims=True), own=True)
        if t.requires_grad:
            t._accumulate(g.sum(axis=0)[:, None], own=True)

    tape.record(out, backward_fn)
    return out


def leaky_relu(tape: Tape | None, a: Tensor, slope: float = 0.2) -> Tensor:
    positive = a.values >= 0.0
    out = Tensor._wrap(np.where(positive, a.values, slope * a.values), a.requires_grad)
    if tape is None:
        return out
    if a.values.size:
        tape.kink_gaps.append(float(np.min(np.abs(a.values))))
    if not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        a._accumulate(g * np.where(positive, 1.0, slope), own=True)

    tape.record(out, backward_fn)
    return out


def elu(tape: Tape | None, a: Tensor) -> Tensor:
    positive = a.values >= 0.0
    vals = np.where(positive, a.values, np.expm1(np.minimum(a.values, 0.0)))
    out = Tensor._wrap(vals, a.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        a._accumulate(g * np.where(positive, 1.0, vals + 1.0), own=True)

    tape.record(out, backward_fn)
    return out


def masked_row_softmax(tape: Tape | None, s: Tensor, mask: np.ndarray) -> Tensor:
    """Row softmax over masked entries only; unmasked entries are exactly 0.

    Uses row-max subtraction for stability. Every row must have at least
    one masked-in entry.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != s.shape:
        raise ValueError(f"masked softmax: mask shape {mask.shape} vs scores {s.shape}")
    row_counts = mask.sum(axis=1)
    if not row_counts.all():
        row = int(np.argmin(row_counts))
        raise ValueError(f"masked softmax: row {row} has no unmasked entries")
    finite = np.where(mask, s.values, -np.inf)
    row_max = finite.max(axis=1, keepdims=True)
    exps = np.zeros_like(s.values)
    np.exp(s.values - row_max, out=exps, where=mask)
    vals = exps / exps.sum(axis=1, keepdims=True)
    out = Tensor._wrap(vals, s.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        inner = (g * vals).sum(axis=1, keepdims=True)
        s._accumulate(vals * (g - inner), own=True)

    tape.record(out, backward_fn)
    return out


def gat_attention(tape: Tape | None, p: Tensor, a: Tensor, mask: np.ndarray, slope: float) -> Tensor:
    """Attention coefficients for one head, fused into a single record.

    Equivalent to ``masked_row_softmax(leaky_relu(outer_add(p @ a[:d],
    p @ a[d:]), slope), mask)`` where ``p`` holds the projected node
    features and ``a`` the length-2d attention vector (source half
    first). Fused because this chain dominates the training profile; the
    composed form stays available and the two are tested for agreement.
    """
    n, d = p.shape
    if a.shape != (2 * d, 1):
        raise ValueError(f"attention vector shape {a.shape} != ({2 * d}, 1)")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n, n):
        raise ValueError(f"gat_attention: mask shape {mask.shape} vs ({n}, {n})")
    row_counts = mask.sum(axis=1)
    if not row_counts.all():
        row = int(np.argmin(row_counts))
        raise ValueError(f"masked softmax: row {row} has no unmasked entries")

    pair = a.values.reshape(2, d).T  # columns [a_src, a_dst]
    q = p.values @ pair
    e = q[:, :1] + q[:, 1:].T
    positive = e >= 0.0
    scores = np.where(positive, e, slope * e)
    finite = np.where(mask, scores, -np.inf)
    row_max = finite.max(axis=1, keepdims=True)
    exps = np.zeros_like(scores)
    np.exp(scores - row_max, out=exps, where=mask)
    alpha = exps / exps.sum(axis=1, keepdims=True)
    out = Tensor._wrap(alpha, p.requires_grad or a.requires_grad)
    if tape is None:
        return out
    if e.size:
        tape.kink_gaps.append(float(np.min(np.abs(e))))
    if not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        g_scores = alpha * (g - (g * alpha).sum(axis=1, keepdims=True))
        g_e = g_scores * np.where(positive, 1.0, slope)
        g_q = np.empty((n, 2))
        g_q[:, 0] = g_e.sum(axis=1)
        g_q[:, 1] = g_e.sum(axis=0)
        if p.requires_grad:
            p._accumulate(g_q @ pair.T, own=True)
        if a.requires_grad:
            a._accumulate((p.values.T @ g_q).T.reshape(2 * d, 1), own=True)

    tape.record(out, backward_fn)
    return out


def row_mean(tape: Tape | None, h: Tensor) -> Tensor:
    n = h.shape[0]
    out = Tensor._wrap(h.values.mean(axis=0, keepdims=True), h.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        if h.grad is None:
            h.grad = np.zeros_like(h.values)
        h.grad += g / n

    tape.record(out, backward_fn)
    return out


def dropout(
    tape: Tape | None,
    a: Tensor,
    keep_prob: float,
    train_mode: bool,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Inverted dropout: zero entries with probability 1 - keep_prob and
    scale survivors by 1/keep_prob. Identity in eval mode and at
    keep_prob == 1.0 (exactly; no randomness is drawn)."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not train_mode or keep_prob == 1.0:
        return a
    if rng is None:
        raise ValueError("dropout in train mode needs a generator")
    keep = rng.random(a.shape) < keep_prob
    factor = keep / keep_prob
    out = Tensor._wrap(a.values * factor, a.requires_grad)
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        a._accumulate(g * factor, own=True)

    tape.record(out, backward_fn)
    return out


def cross_entropy_with_logits(tape: Tape | None, z: Tensor, target: int) -> Tensor:
    if z.shape[0] != 1:
        raise ValueError(f"cross entropy expects a single logit row, got {z.shape}")
    n_classes = z.shape[1]
    if not 0 <= target < n_classes:
        raise ValueError(f"target {target} out of range for {n_classes} classes")
    row = z.values[0]
    shifted = row - row.max()
    exps = np.exp(shifted)
    norm = exps.sum()
    out = Tensor._wrap(
        np.array([[np.log(norm) - shifted[target]]]), z.requires_grad
    )
    if tape is None or not out.requires_grad:
        return out

    def backward_fn(g: np.ndarray) -> None:
        grad = exps / norm
        grad[target] -= 1.0
        z._accumulate(g[0, 0] * grad[None, :], own=True)

    tape.record(out, backward_fn)
    return out


def min_kink_gap(tape: Tape) -> float:
    """Smallest |pre-activation| any leaky_relu saw on this tape."""
    return min(tape.kink_gaps) if tape.kink_gaps else np.inf


def finite_diff_check(
    compute_loss: Callable[[], tuple[float, Mapping[Tensor, np.ndarray]]],
    params: Sequence[Tensor],
    eps: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``compute_loss`` evaluates the scalar loss at the parameters' current
    values and returns ``(loss, grads)``; only the loss is used for the
    difference probes. The relative error denominator is
    ``max(1e-8, |analytic| + |numeric|)`` per coordinate. Callers are
    responsible for probing at smooth points (see :func:`min_kink_gap`).
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not params:
        return 0.0
    _, analytic = compute_loss()
    worst = 0.0
    for p in params:
        grad = np.asarray(analytic[p]).ravel()
        flat = p.values.flat
        for i in range(p.values.size):
            original = flat[i]
            flat[i] = original + eps
            plus, _ = compute_loss()
            flat[i] = original - eps
            minus, _ = compute_loss()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            denom = max(1e-8, abs(grad[i]) + abs(numeric))
            worst = max(worst, abs(grad[i] - numeric) / denom)
    return worst
