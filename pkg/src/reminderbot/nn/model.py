"""Encoder-decoder with additive attention, all float64 numpy.

Architecture: token embeddings feed an L-layer bidirectional GRU encoder
(width H per direction). The decoder is an L-layer unidirectional GRU of
width 2H, initialized per layer from the encoder's final fwd/bwd states
through a tanh bridge. At each step the top decoder state from the previous
step queries additive attention over the top-layer encoder states; the
attention context is concatenated to the embedded previous output token as
decoder input, and logits project from [top state; context].

Variable lengths inside a bucket are handled by masking: the forward
encoder direction carries its state across pad steps, the backward
direction stays at zero until the last real token, attention adds -1e30 to
pad positions and the loss masks pad targets. Together these make a pair's
loss independent of the bucket it is padded into.

Recurrent dropout (train only) applies one mask per sequence to the state
entering the recurrent matmuls; the carry path uses the raw state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import get_kernels
from .vocab import EOS, GO, PAD, Vocabulary

_NEG = -1e30


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 1
    hidden: int = 64
    emb_dim: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.layers < 1 or self.hidden < 1 or self.emb_dim < 1:
            raise ValueError("layers, hidden and emb_dim must be >= 1")

    @property
    def dec_width(self) -> int:
        return 2 * self.hidden

    @property
    def att_dim(self) -> int:
        return 2 * self.hidden


@dataclass
class Seq2SeqModel:
    config: ModelConfig
    vocab: Vocabulary
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def param_count(self) -> int:
        return sum(int(v.size) for v in self.params.values())


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _init_gru(p: dict, rng, prefix: str, in_dim: int, width: int) -> None:
    p[f"{prefix}_Wzr"] = _glorot(rng, in_dim, 2 * width)
    p[f"{prefix}_Uzr"] = _glorot(rng, width, 2 * width)
    p[f"{prefix}_bzr"] = np.zeros(2 * width)
    p[f"{prefix}_Wh"] = _glorot(rng, in_dim, width)
    p[f"{prefix}_Uh"] = _glorot(rng, width, width)
    p[f"{prefix}_bh"] = np.zeros(width)


def build_model(config: ModelConfig, vocab: Vocabulary) -> Seq2SeqModel:
    rng = np.random.default_rng(config.seed)
    H, E, D, A = config.hidden, config.emb_dim, config.dec_width, config.att_dim
    V = vocab.size_total
    p: dict[str, np.ndarray] = {}
    p["emb"] = rng.uniform(-0.08, 0.08, size=(V, E))
    for layer in range(config.layers):
        in_dim = E if layer == 0 else 2 * H
        for direction in ("f", "b"):
            _init_gru(p, rng, f"enc{layer}{direction}", in_dim, H)
        p[f"bridge{layer}_W"] = _glorot(rng, 2 * H, D)
        p[f"bridge{layer}_b"] = np.zeros(D)
        dec_in = (E + 2 * H) if layer == 0 else D
        _init_gru(p, rng, f"dec{layer}", dec_in, D)
    p["att_Wa"] = _glorot(rng, D, A)
    p["att_Ua"] = _glorot(rng, 2 * H, A)
    p["att_v"] = rng.uniform(-0.08, 0.08, size=A)
    p["out_W"] = _glorot(rng, D + 2 * H, V)
    p["out_b"] = np.zeros(V)
    return Seq2SeqModel(config=config, vocab=vocab, params=p)


# -- single GRU step (functional form used by the cell oracle tests) ---------

def gru_step(x: np.ndarray, h_prev: np.ndarray, params: dict[str, np.ndarray]) -> np.ndarray:
    """One gated recurrence step: params carry Wzr/Uzr/bzr/Wh/Uh/bh.

    Accepts 1D (single example) or 2D (batch) x and h_prev.
    """
    K = get_kernels()
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
        h_prev = h_prev[None, :]
    if not (np.isfinite(x).all() and np.isfinite(h_prev).all()):
        raise FloatingPointError("non-finite input to gru_step")
    width = h_prev.shape[1]
    pre_zr = x @ params["Wzr"] + h_prev @ params["Uzr"] + params["bzr"]
    zr = K.sigmoid_inplace(np.ascontiguousarray(pre_zr))
    z = np.ascontiguousarray(zr[:, :width])
    r = np.ascontiguousarray(zr[:, width:])
    pre_h = x @ params["Wh"] + (r * h_prev) @ params["Uh"] + params["bh"]
    hbar = K.tanh_inplace(np.ascontiguousarray(pre_h))
    h = K.gru_combine(z, h_prev, hbar)
    return h[0] if squeeze else h


# -- batched GRU over a padded sequence ---------------------------------------

class _SeqCache:
    __slots__ = ("X", "h0", "mask", "mrec", "h_prev", "h_mat", "z", "r", "rh", "hbar", "prefix")

    def __init__(self) -> None:
        self.h_prev: list[np.ndarray] = []
        self.h_mat: list[np.ndarray] = []
        self.z: list[np.ndarray] = []
        self.r: list[np.ndarray] = []
        self.rh: list[np.ndarray] = []
        self.hbar: list[np.ndarray] = []


def _gru_seq_forward(
    params: dict[str, np.ndarray],
    prefix: str,
    X: np.ndarray,  # (T, B, in)
    h0: np.ndarray,  # (B, H)
    mask: np.ndarray | None,  # (T, B) of {0,1}
    mrec: np.ndarray | None,  # (B, H) recurrent dropout mask
) -> tuple[np.ndarray, np.ndarray, _SeqCache]:
    K = get_kernels()
    T, B, in_dim = X.shape
    width = h0.shape[1]
    Wzr, Uzr, bzr = params[f"{prefix}_Wzr"], params[f"{prefix}_Uzr"], params[f"{prefix}_bzr"]
    Wh, Uh, bh = params[f"{prefix}_Wh"], params[f"{prefix}_Uh"], params[f"{prefix}_bh"]

    XWzr = (X.reshape(T * B, in_dim) @ Wzr).reshape(T, B, 2 * width)
    XWh = (X.reshape(T * B, in_dim) @ Wh).reshape(T, B, width)

    cache = _SeqCache()
    cache.X, cache.h0, cache.mask, cache.mrec, cache.prefix = X, h0, mask, mrec, prefix

    h = h0
    Hs = np.empty((T, B, width))
    for t in range(T):
        h_mat = h * mrec if mrec is not None else h
        pre_zr = XWzr[t] + h_mat @ Uzr
        pre_zr += bzr
        zr = K.sigmoid_inplace(np.ascontiguousarray(pre_zr))
        z = np.ascontiguousarray(zr[:, :width])
        r = np.ascontiguousarray(zr[:, width:])
        rh = r * h_mat
        pre_h = XWh[t] + rh @ Uh
        pre_h += bh
        hbar = K.tanh_inplace(np.ascontiguousarray(pre_h))
        h_new = K.gru_combine(z, h, hbar)
        cache.h_prev.append(h)
        cache.h_mat.append(h_mat)
        cache.z.append(z)
        cache.r.append(r)
        cache.rh.append(rh)
        cache.hbar.append(hbar)
        if mask is not None:
            m = mask[t][:, None]
            h = m * h_new + (1.0 - m) * h
        else:
            h = h_new
        Hs[t] = h
    return Hs, h, cache


def _gru_seq_backward(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    cache: _SeqCache,
    dHs: np.ndarray | None,  # (T, B, H) grad on per-step outputs, or None
    dh_final: np.ndarray | None,  # (B, H) grad on the final state
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (dX, dh0)."""
    K = get_kernels()
    X, mask, mrec, prefix = cache.X, cache.mask, cache.mrec, cache.prefix
    T, B, in_dim = X.shape
    width = cache.h_prev[0].shape[1]
    Uzr, Uh = params[f"{prefix}_Uzr"], params[f"{prefix}_Uh"]
    Wzr, Wh = params[f"{prefix}_Wzr"], params[f"{prefix}_Wh"]

    dPreZr = np.zeros((T, B, 2 * width))
    dPreH = np.zeros((T, B, width))
    dh = np.zeros((B, width)) if dh_final is None else dh_final.copy()

    for t in range(T - 1, -1, -1):
        if dHs is not None:
            dh = dh + dHs[t]
        if mask is not None:
            m = mask[t][:, None]
            dh_in = np.ascontiguousarray(dh * m)
            dh_skip = dh * (1.0 - m)
        else:
            dh_in = np.ascontiguousarray(dh)
            dh_skip = 0.0
        z, r, hbar = cache.z[t], cache.r[t], cache.hbar[t]
        h_prev, h_mat, rh = cache.h_prev[t], cache.h_mat[t], cache.rh[t]

        dpre_z, dpre_h, dh_prev = K.gru_gate_grads(dh_in, z, hbar, h_prev)
        drh = np.ascontiguousarray(dpre_h @ Uh.T)
        dpre_r, dh_mat = K.r_gate_grads(drh, r, h_mat)
        dpre_zr = np.concatenate([dpre_z, dpre_r], axis=1)
        dh_mat = dh_mat + dpre_zr @ Uzr.T

        grads[f"{prefix}_Uzr"] += h_mat.T @ dpre_zr
        grads[f"{prefix}_Uh"] += rh.T @ dpre_h

        if mrec is not None:
            dh_prev = dh_prev + dh_mat * mrec
        else:
            dh_prev = dh_prev + dh_mat
        dh = dh_prev + dh_skip
        dPreZr[t] = dpre_zr
        dPreH[t] = dpre_h

    flatZr = dPreZr.reshape(T * B, 2 * width)
    flatH = dPreH.reshape(T * B, width)
    flatX = X.reshape(T * B, in_dim)
    grads[f"{prefix}_Wzr"] += flatX.T @ flatZr
    grads[f"{prefix}_Wh"] += flatX.T @ flatH
    grads[f"{prefix}_bzr"] += flatZr.sum(axis=0)
    grads[f"{prefix}_bh"] += flatH.sum(axis=0)
    dX = (flatZr @ Wzr.T + flatH @ Wh.T).reshape(T, B, in_dim)
    return dX, dh


# -- encoder ------------------------------------------------------------------

class _EncCache:
    __slots__ = ("ctx_ids", "layer_inputs", "fwd", "bwd", "finals", "bridge_pre")

    def __init__(self) -> None:
        self.layer_inputs: list[np.ndarray] = []
        self.fwd: list[_SeqCache] = []
        self.bwd: list[_SeqCache] = []
        self.finals: list[np.ndarray] = []
        self.bridge_pre: list[np.ndarray] = []


def _length_mask(lengths: np.ndarray, T: int) -> np.ndarray:
    """(T, B) mask with 1 at positions < length."""
    return (np.arange(T)[:, None] < lengths[None, :]).astype(float)


def encode_batch(
    model: Seq2SeqModel,
    ctx_ids: np.ndarray,  # (B, Tc) int64, already padded with eos+pads
    lengths: np.ndarray,  # (B,) real lengths including eos
    mrec: dict[str, np.ndarray] | None = None,
) -> tuple[np.ndarray, list[np.ndarray], np.ndarray, _EncCache]:
    """Returns (enc_states (Tc,B,2H), dec_h0 per layer, mask (Tc,B), cache)."""
    cfg, p = model.config, model.params
    B, Tc = ctx_ids.shape
    mask = _length_mask(lengths, Tc)
    X = np.ascontiguousarray(p["emb"][ctx_ids].transpose(1, 0, 2))  # (Tc, B, E)

    cache = _EncCache()
    cache.ctx_ids = ctx_ids
    dec_h0: list[np.ndarray] = []
    h0 = np.zeros((B, cfg.hidden))
    for layer in range(cfg.layers):
        cache.layer_inputs.append(X)
        mf = mrec.get(f"enc{layer}f") if mrec else None
        mb = mrec.get(f"enc{layer}b") if mrec else None
        Hf, hf_T, cf = _gru_seq_forward(p, f"enc{layer}f", X, h0, mask, mf)
        Xr = np.ascontiguousarray(X[::-1])
        mask_r = np.ascontiguousarray(mask[::-1])
        Hb_r, hb_T, cb = _gru_seq_forward(p, f"enc{layer}b", Xr, h0, mask_r, mb)
        Hb = np.ascontiguousarray(Hb_r[::-1])
        cache.fwd.append(cf)
        cache.bwd.append(cb)
        final = np.concatenate([hf_T, hb_T], axis=1)  # (B, 2H)
        cache.finals.append(final)
        pre = final @ p[f"bridge{layer}_W"] + p[f"bridge{layer}_b"]
        cache.bridge_pre.append(None)  # filled below with tanh output
        s0 = np.tanh(pre)
        cache.bridge_pre[layer] = s0
        dec_h0.append(s0)
        X = np.ascontiguousarray(np.concatenate([Hf, Hb], axis=2))  # (Tc, B, 2H)
    return X, dec_h0, mask, cache


def encode_backward(
    model: Seq2SeqModel,
    grads: dict[str, np.ndarray],
    cache: _EncCache,
    dEnc: np.ndarray,  # (Tc, B, 2H) grad on top-layer states
    dDecH0: list[np.ndarray],  # per-layer grad on decoder init states
) -> None:
    cfg, p = model.config, model.params
    H = cfg.hidden
    dX_above = dEnc
    for layer in range(cfg.layers - 1, -1, -1):
        s0 = cache.bridge_pre[layer]
        dpre = dDecH0[layer] * (1.0 - s0 * s0)
        grads[f"bridge{layer}_W"] += cache.finals[layer].T @ dpre
        grads[f"bridge{layer}_b"] += dpre.sum(axis=0)
        dfinal = dpre @ p[f"bridge{layer}_W"].T  # (B, 2H)

        dHf = np.ascontiguousarray(dX_above[:, :, :H])
        dHb = np.ascontiguousarray(dX_above[:, :, H:])
        dXf, _ = _gru_seq_backward(
            p, grads, cache.fwd[layer], dHf, np.ascontiguousarray(dfinal[:, :H])
        )
        dXb_r, _ = _gru_seq_backward(
            p,
            grads,
            cache.bwd[layer],
            np.ascontiguousarray(dHb[::-1]),
            np.ascontiguousarray(dfinal[:, H:]),
        )
        dX = dXf + dXb_r[::-1]
        dX_above = dX
    # dX_above is now (Tc, B, E): gradient on the embedded context
    ids = cache.ctx_ids  # (B, Tc)
    np.add.at(grads["emb"], ids, dX_above.transpose(1, 0, 2))


# -- attention ----------------------------------------------------------------

def _attend_forward(
    p: dict[str, np.ndarray],
    s: np.ndarray,  # (B, D) query: previous top decoder state
    Henc: np.ndarray,  # (Tc, B, 2H)
    UaH: np.ndarray,  # (Tc, B, A) precomputed Henc @ att_Ua
    neg_mask: np.ndarray,  # (Tc, B): 0 where real, -1e30 where pad
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (context (B,2H), alpha (Tc,B), act (Tc,B,A))."""
    act = np.tanh(UaH + (s @ p["att_Wa"])[None, :, :])
    e = act @ p["att_v"] + neg_mask
    e -= e.max(axis=0, keepdims=True)
    np.exp(e, out=e)
    alpha = e / e.sum(axis=0, keepdims=True)
    context = np.einsum("tb,tbh->bh", alpha, Henc)
    return context, alpha, act


def _attend_backward(
    p: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    dcontext: np.ndarray,  # (B, 2H)
    s: np.ndarray,
    Henc: np.ndarray,
    alpha: np.ndarray,
    act: np.ndarray,
    dHenc: np.ndarray,  # (Tc, B, 2H) accumulator, modified in place
) -> np.ndarray:
    """Returns ds (B, D); accumulates into dHenc and parameter grads."""
    dalpha = np.einsum("bh,tbh->tb", dcontext, Henc)
    dHenc += alpha[:, :, None] * dcontext[None, :, :]
    de = alpha * (dalpha - (alpha * dalpha).sum(axis=0, keepdims=True))
    grads["att_v"] += np.einsum("tba,tb->a", act, de)
    dact = de[:, :, None] * p["att_v"][None, None, :]
    dpre = dact * (1.0 - act * act)
    T, B, A = dpre.shape
    flat = dpre.reshape(T * B, A)
    grads["att_Ua"] += Henc.reshape(T * B, -1).T @ flat
    dHenc += (flat @ p["att_Ua"].T).reshape(Henc.shape)
    dq = dpre.sum(axis=0)  # (B, A)
    grads["att_Wa"] += s.T @ dq
    return dq @ p["att_Wa"].T


# -- decoder: teacher-forced loss with gradients -------------------------------

def loss_and_grads(
    model: Seq2SeqModel,
    ctx_ids: np.ndarray,  # (B, Tc)
    ctx_lens: np.ndarray,  # (B,)
    tgt_in: np.ndarray,  # (B, Tt) [go, y1, ..., pads]
    tgt_out: np.ndarray,  # (B, Tt) [y1, ..., eos, pads]
    tgt_mask: np.ndarray,  # (B, Tt) of {0,1}
    mrec: dict[str, np.ndarray] | None = None,
) -> tuple[float, int, dict[str, np.ndarray]]:
    """Summed masked cross-entropy, real-token count and parameter grads."""
    K = get_kernels()
    cfg, p = model.config, model.params
    B, Tt = tgt_in.shape
    D, H = cfg.dec_width, cfg.hidden

    Henc, dec_h0, emask, enc_cache = encode_batch(model, ctx_ids, ctx_lens, mrec)
    Tc = Henc.shape[0]
    UaH = (Henc.reshape(Tc * B, 2 * H) @ p["att_Ua"]).reshape(Tc, B, cfg.att_dim)
    neg_mask = (emask - 1.0) * -_NEG  # 0 where real; -1e30 where pad
    dec_mrec = [mrec.get(f"dec{l}") if mrec else None for l in range(cfg.layers)]

    h = [dec_h0[l] for l in range(cfg.layers)]
    steps = []
    loss_total = 0.0
    dlogits_steps = []
    for t in range(Tt):
        s_query = h[-1]
        context, alpha, act = _attend_forward(p, s_query, Henc, UaH, neg_mask)
        emb_t = p["emb"][tgt_in[:, t]]  # (B, E)
        x = np.ascontiguousarray(np.concatenate([emb_t, context], axis=1))
        layer_caches = []
        layer_input = x
        new_h = []
        for layer in range(cfg.layers):
            prefix = f"dec{layer}"
            h_prev = h[layer]
            h_mat = h_prev * dec_mrec[layer] if dec_mrec[layer] is not None else h_prev
            pre_zr = layer_input @ p[f"{prefix}_Wzr"] + h_mat @ p[f"{prefix}_Uzr"]
            pre_zr += p[f"{prefix}_bzr"]
            zr = K.sigmoid_inplace(np.ascontiguousarray(pre_zr))
            z = np.ascontiguousarray(zr[:, :D])
            r = np.ascontiguousarray(zr[:, D:])
            rh = r * h_mat
            pre_h = layer_input @ p[f"{prefix}_Wh"] + rh @ p[f"{prefix}_Uh"]
            pre_h += p[f"{prefix}_bh"]
            hbar = K.tanh_inplace(np.ascontiguousarray(pre_h))
            h_new = K.gru_combine(z, h_prev, hbar)
            layer_caches.append((layer_input, h_prev, h_mat, z, r, rh, hbar))
            layer_input = h_new
            new_h.append(h_new)
        h = new_h
        out_in = np.concatenate([h[-1], context], axis=1)  # (B, D+2H)
        logits = out_in @ p["out_W"] + p["out_b"]
        step_loss, dlogits = K.softmax_xent(
            np.ascontiguousarray(logits),
            np.ascontiguousarray(tgt_out[:, t]),
            np.ascontiguousarray(tgt_mask[:, t].astype(float)),
        )
        loss_total += step_loss
        dlogits_steps.append(dlogits)
        steps.append((s_query, context, alpha, act, layer_caches, out_in))

    grads = model.zero_grads()
    dHenc = np.zeros_like(Henc)
    dh_carry = [np.zeros((B, D)) for _ in range(cfg.layers)]
    ds_query_next = np.zeros((B, D))

    for t in range(Tt - 1, -1, -1):
        s_query, context, alpha, act, layer_caches, out_in = steps[t]
        dlogits = dlogits_steps[t]
        grads["out_W"] += out_in.T @ dlogits
        grads["out_b"] += dlogits.sum(axis=0)
        dout_in = dlogits @ p["out_W"].T
        dcontext = dout_in[:, D:].copy()

        dh_top = dout_in[:, :D] + dh_carry[-1] + ds_query_next
        dlayer_above = None
        dh_prevs = [None] * cfg.layers
        for layer in range(cfg.layers - 1, -1, -1):
            prefix = f"dec{layer}"
            layer_input, h_prev, h_mat, z, r, rh, hbar = layer_caches[layer]
            if layer == cfg.layers - 1:
                dh_total = dh_top
            else:
                dh_total = dh_carry[layer] + dlayer_above
            dh_total = np.ascontiguousarray(dh_total)
            dpre_z, dpre_h, dh_prev = K.gru_gate_grads(dh_total, z, hbar, h_prev)
            drh = np.ascontiguousarray(dpre_h @ p[f"{prefix}_Uh"].T)
            dpre_r, dh_mat = K.r_gate_grads(drh, r, h_mat)
            dpre_zr = np.concatenate([dpre_z, dpre_r], axis=1)
            dh_mat = dh_mat + dpre_zr @ p[f"{prefix}_Uzr"].T
            if dec_mrec[layer] is not None:
                dh_prev = dh_prev + dh_mat * dec_mrec[layer]
            else:
                dh_prev = dh_prev + dh_mat
            grads[f"{prefix}_Uzr"] += h_mat.T @ dpre_zr
            grads[f"{prefix}_Uh"] += rh.T @ dpre_h
            grads[f"{prefix}_Wzr"] += layer_input.T @ dpre_zr
            grads[f"{prefix}_Wh"] += layer_input.T @ dpre_h
            grads[f"{prefix}_bzr"] += dpre_zr.sum(axis=0)
            grads[f"{prefix}_bh"] += dpre_h.sum(axis=0)
            dlayer_above = dpre_zr @ p[f"{prefix}_Wzr"].T + dpre_h @ p[f"{prefix}_Wh"].T
            dh_prevs[layer] = dh_prev
        dh_carry = dh_prevs

        dx = dlayer_above  # (B, E + 2H): grad on [emb_t, context]
        E = cfg.emb_dim
        np.add.at(grads["emb"], tgt_in[:, t], dx[:, :E])
        dcontext += dx[:, E:]
        ds_query_next = _attend_backward(
            p, grads, dcontext, s_query, Henc, alpha, act, dHenc
        )

    dDecH0 = [dh_carry[l] for l in range(cfg.layers)]
    dDecH0[-1] = dDecH0[-1] + ds_query_next
    # UaH was precomputed from Henc: fold its use inside attention already
    encode_backward(model, grads, enc_cache, dHenc, dDecH0)

    tokens = int(tgt_mask.sum())
    return loss_total, tokens, grads


# -- single-sequence public API -------------------------------------------------

def encode(
    model: Seq2SeqModel, context_tokens: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Encode one token sequence; returns (states (T, 2H), final (2H,)).

    The final state is the top layer's concatenated fwd/bwd final.
    """
    if not context_tokens:
        raise ValueError("cannot encode an empty context")
    ids = np.array([model.vocab.encode(context_tokens)], dtype=np.int64)
    lengths = np.array([ids.shape[1]], dtype=np.int64)
    Henc, _, _, cache = encode_batch(model, ids, lengths)
    return Henc[:, 0, :], cache.finals[-1][0]


def attend(
    model: Seq2SeqModel, decoder_state: np.ndarray, encoder_states: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Additive attention for one query; returns (context, weights)."""
    if encoder_states.ndim != 2 or encoder_states.shape[0] < 1:
        raise ValueError("need at least one encoder state")
    p = model.params
    Henc = encoder_states[:, None, :]  # (T, 1, 2H)
    UaH = Henc @ p["att_Ua"]
    neg = np.zeros((Henc.shape[0], 1))
    context, alpha, _ = _attend_forward(p, decoder_state[None, :], Henc, UaH, neg)
    return context[0], alpha[:, 0]


def decode_greedy(
    model: Seq2SeqModel, context_tokens: Sequence[str], max_len: int = 40
) -> list[str]:
    """Greedy decoding from the go marker; stops at eos or max_len.

    Pad, go and unassigned buffer indices are masked out of the argmax, so
    they can never be emitted.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    K = get_kernels()
    cfg, p, vocab = model.config, model.params, model.vocab
    ids = np.array([vocab.encode(context_tokens)], dtype=np.int64)
    lengths = np.array([ids.shape[1]], dtype=np.int64)
    Henc, dec_h0, emask, _ = encode_batch(model, ids, lengths)
    Tc = Henc.shape[0]
    UaH = (Henc.reshape(Tc, 2 * cfg.hidden) @ p["att_Ua"]).reshape(Tc, 1, cfg.att_dim)
    neg_mask = (emask - 1.0) * -_NEG

    blocked = np.zeros(vocab.size_total, dtype=bool)
    blocked[PAD] = True
    blocked[GO] = True
    blocked[vocab.size_active :] = True

    h = list(dec_h0)
    token = GO
    out: list[int] = []
    D = cfg.dec_width
    for _ in range(max_len):
        context, _, _ = _attend_forward(p, h[-1], Henc, UaH, neg_mask)
        x = np.ascontiguousarray(
            np.concatenate([p["emb"][np.array([token])], context], axis=1)
        )
        layer_input = x
        new_h = []
        for layer in range(cfg.layers):
            prefix = f"dec{layer}"
            h_prev = h[layer]
            pre_zr = layer_input @ p[f"{prefix}_Wzr"] + h_prev @ p[f"{prefix}_Uzr"]
            pre_zr += p[f"{prefix}_bzr"]
            zr = K.sigmoid_inplace(np.ascontiguousarray(pre_zr))
            z = np.ascontiguousarray(zr[:, :D])
            r = np.ascontiguousarray(zr[:, D:])
            pre_h = layer_input @ p[f"{prefix}_Wh"] + (r * h_prev) @ p[f"{prefix}_Uh"]
            pre_h += p[f"{prefix}_bh"]
            hbar = K.tanh_inplace(np.ascontiguousarray(pre_h))
            h_new = K.gru_combine(z, h_prev, hbar)
            layer_input = h_new
            new_h.append(h_new)
        h = new_h
        logits = (np.concatenate([h[-1], context], axis=1) @ p["out_W"] + p["out_b"])[0]
        logits[blocked] = -np.inf
        token = int(np.argmax(logits))
        if token == EOS:
            break
        out.append(token)
    return model.vocab.decode(out)
