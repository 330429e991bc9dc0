"""Independent reference implementations the oracle tests compare against.

Nothing here imports from reminderbot's match or nn internals beyond data
containers; scoring math is recomputed from scratch (sklearn for tf-idf,
plain Python loops for the recurrent forward pass).
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer


def sklearn_scores(
    template_tokens: list[list[str]], query_tokens: list[str]
) -> np.ndarray:
    """Cosine of the query against each template, identical formula family:
    raw tf, idf = ln((1+N)/(1+df)) + 1, L2 norm, out-of-vocabulary query
    terms dropped before normalization."""
    vec = TfidfVectorizer(
        analyzer=lambda toks: toks,
        norm="l2",
        use_idf=True,
        smooth_idf=True,
        sublinear_tf=False,
    )
    doc_matrix = vec.fit_transform(template_tokens)
    q = vec.transform([query_tokens])
    return (doc_matrix @ q.T).toarray().ravel()


def sklearn_score_matrix(
    template_tokens: list[list[str]], queries: list[list[str]]
) -> np.ndarray:
    """(n_queries, n_templates) cosine matrix; one fit per corpus."""
    vec = TfidfVectorizer(
        analyzer=lambda toks: toks,
        norm="l2",
        use_idf=True,
        smooth_idf=True,
        sublinear_tf=False,
    )
    doc_matrix = vec.fit_transform(template_tokens)
    q = vec.transform(queries)
    return (q @ doc_matrix.T).toarray()


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def _gru_cell(p, prefix, x, h, width):
    """Scalar-loop GRU step on 1D vectors."""
    Wzr, Uzr, bzr = p[f"{prefix}_Wzr"], p[f"{prefix}_Uzr"], p[f"{prefix}_bzr"]
    Wh, Uh, bh = p[f"{prefix}_Wh"], p[f"{prefix}_Uh"], p[f"{prefix}_bh"]
    pre = [
        sum(x[i] * Wzr[i, j] for i in range(len(x)))
        + sum(h[i] * Uzr[i, j] for i in range(width))
        + bzr[j]
        for j in range(2 * width)
    ]
    z = [_sigmoid(v) for v in pre[:width]]
    r = [_sigmoid(v) for v in pre[width:]]
    pre_h = [
        sum(x[i] * Wh[i, j] for i in range(len(x)))
        + sum(r[i] * h[i] * Uh[i, j] for i in range(width))
        + bh[j]
        for j in range(width)
    ]
    hbar = [math.tanh(v) for v in pre_h]
    return [(1.0 - z[j]) * h[j] + z[j] * hbar[j] for j in range(width)]


def scalar_seq2seq_loss(model, ctx_ids, ctx_lens, tgt_in, tgt_out, tgt_mask) -> float:
    """Teacher-forced masked cross-entropy recomputed with Python loops.

    Single-layer models only; mirrors the documented architecture: bidi
    encoder with pad-carry masking, tanh bridge into a double-width decoder,
    additive attention queried by the previous top state, logits from
    [state; attention context].
    """
    cfg, p = model.config, model.params
    assert cfg.layers == 1
    H, D = cfg.hidden, cfg.dec_width
    B, Tc = ctx_ids.shape
    Tt = tgt_in.shape[1]
    total = 0.0
    for b in range(B):
        length = int(ctx_lens[b])
        emb = [list(p["emb"][ctx_ids[b, t]]) for t in range(Tc)]
        hf = [0.0] * H
        fwd = []
        for t in range(Tc):
            if t < length:
                hf = _gru_cell(p, "enc0f", emb[t], hf, H)
            fwd.append(list(hf))
        hb = [0.0] * H
        bwd = [None] * Tc
        for t in range(Tc - 1, -1, -1):
            if t < length:
                hb = _gru_cell(p, "enc0b", emb[t], hb, H)
            bwd[t] = list(hb)
        henc = [fwd[t] + bwd[t] for t in range(Tc)]
        final = fwd[-1] + bwd[0] if length == Tc else fwd[length - 1] + bwd[0]
        # forward state carries across pads, so fwd[-1] == fwd[length-1]
        s = [
            math.tanh(
                sum(final[i] * p["bridge0_W"][i, j] for i in range(2 * H))
                + p["bridge0_b"][j]
            )
            for j in range(D)
        ]
        for t in range(Tt):
            # additive attention over real positions
            scores = []
            for tc in range(Tc):
                if tc >= length:
                    scores.append(-math.inf)
                    continue
                act = [
                    math.tanh(
                        sum(henc[tc][i] * p["att_Ua"][i, a] for i in range(2 * H))
                        + sum(s[i] * p["att_Wa"][i, a] for i in range(D))
                    )
                    for a in range(cfg.att_dim)
                ]
                scores.append(sum(act[a] * p["att_v"][a] for a in range(cfg.att_dim)))
            peak = max(scores)
            expo = [math.exp(v - peak) if v != -math.inf else 0.0 for v in scores]
            denom = sum(expo)
            alpha = [v / denom for v in expo]
            context = [
                sum(alpha[tc] * henc[tc][i] for tc in range(Tc)) for i in range(2 * H)
            ]
            x = list(p["emb"][tgt_in[b, t]]) + context
            s = _gru_cell(p, "dec0", x, s, D)
            out_in = s + context
            logits = [
                sum(out_in[i] * p["out_W"][i, j] for i in range(D + 2 * H))
                + p["out_b"][j]
                for j in range(model.vocab.size_total)
            ]
            if tgt_mask[b, t]:
                peak = max(logits)
                lse = peak + math.log(sum(math.exp(v - peak) for v in logits))
                total += lse - logits[tgt_out[b, t]]
    return total
