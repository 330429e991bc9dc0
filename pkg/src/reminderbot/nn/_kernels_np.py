"""Pure-numpy elementwise kernels for the recurrent nets.

These are the hot inner-loop pieces that are not matrix multiplies: gate
nonlinearities, the gated state blend and the fused softmax/cross-entropy.
The compiled extension (_kernels_cy) implements the same signatures; both
backends must agree to float64 round-off, which the tests assert. Matmuls
are deliberately left to numpy's BLAS in both backends.

All 2D arrays are C-contiguous float64; targets are int64.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def sigmoid_inplace(a: np.ndarray) -> np.ndarray:
    np.negative(a, out=a)
    np.exp(a, out=a)
    a += 1.0
    np.reciprocal(a, out=a)
    return a


def tanh_inplace(a: np.ndarray) -> np.ndarray:
    np.tanh(a, out=a)
    return a


def gru_combine(z: np.ndarray, h_prev: np.ndarray, hbar: np.ndarray) -> np.ndarray:
    """h_t = (1 - z) * h_prev + z * hbar."""
    return (1.0 - z) * h_prev + z * hbar


def gru_gate_grads(
    dh: np.ndarray, z: np.ndarray, hbar: np.ndarray, h_prev: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward through the blend and the z/h nonlinearities.

    Returns (dpre_z, dpre_h, dh_prev_direct) where pre_* are the gate
    pre-activations: dpre_z = dh (hbar - h_prev) z (1 - z),
    dpre_h = dh z (1 - hbar^2), dh_prev_direct = dh (1 - z).
    """
    dpre_z = dh * (hbar - h_prev) * z * (1.0 - z)
    dpre_h = dh * z * (1.0 - hbar * hbar)
    dh_prev = dh * (1.0 - z)
    return dpre_z, dpre_h, dh_prev


def r_gate_grads(
    drh: np.ndarray, r: np.ndarray, h_mat: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Backward through h-candidate's r * h_mat product.

    drh is the gradient at (r * h_mat). Returns (dpre_r, dh_mat_from_r):
    dpre_r = drh h_mat r (1 - r), dh_mat_from_r = drh r.
    """
    dpre_r = drh * h_mat * r * (1.0 - r)
    dh_mat = drh * r
    return dpre_r, dh_mat


def softmax_xent(
    logits: np.ndarray, targets: np.ndarray, mask: np.ndarray
) -> tuple[float, np.ndarray]:
    """Fused softmax + cross-entropy over rows.

    Returns (sum of masked per-row -log p[target], dlogits) where dlogits is
    (softmax - onehot) scaled by the row mask. Rows with mask 0 contribute
    nothing and get zero gradient.
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    denom = shifted.sum(axis=1, keepdims=True)
    probs = shifted / denom
    rows = np.arange(logits.shape[0])
    picked = probs[rows, targets]
    loss = float(-(np.log(picked) * mask).sum())
    dlogits = probs
    dlogits[rows, targets] -= 1.0
    dlogits *= mask[:, None]
    return loss, dlogits
