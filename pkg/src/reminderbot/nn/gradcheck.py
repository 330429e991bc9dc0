"""Central finite-difference verification of the analytic backward pass.

Only sensible on tiny models (it perturbs every parameter twice). Dropout
must be off: the check compares two evaluations of a deterministic loss.
"""

from __future__ import annotations

import numpy as np

from .model import Seq2SeqModel, loss_and_grads


def gradient_check(
    model: Seq2SeqModel,
    ctx_ids: np.ndarray,
    ctx_lens: np.ndarray,
    tgt_in: np.ndarray,
    tgt_out: np.ndarray,
    tgt_mask: np.ndarray,
    epsilon: float = 1e-4,
    params: list[str] | None = None,
) -> float:
    """Max relative error |g_a - g_n| / max(|g_a|, |g_n|, 1e-8) over entries."""
    _, _, analytic = loss_and_grads(
        model, ctx_ids, ctx_lens, tgt_in, tgt_out, tgt_mask
    )

    def loss_only() -> float:
        loss, _, _ = loss_and_grads(model, ctx_ids, ctx_lens, tgt_in, tgt_out, tgt_mask)
        return loss

    worst = 0.0
    names = params if params is not None else sorted(model.params)
    for name in names:
        tensor = model.params[name]
        grad = analytic[name]
        flat = tensor.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + epsilon
            up = loss_only()
            flat[i] = keep - epsilon
            down = loss_only()
            flat[i] = keep
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            err = abs(gflat[i] - numeric) / denom
            if err > worst:
                worst = err
    return worst
