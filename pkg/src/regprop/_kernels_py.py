"""NumPy implementation of the objective-table kernel (fallback backend)."""

from __future__ import annotations

import numpy as np

REG_CODES = {"none": 0, "dp": 1, "fpr": 2, "fnr": 3, "eeo": 4, "cal": 5, "bgl": 6}

# bounds the (rows x treatments x agents) working set
_CHUNK = 1 << 21


def treatment_bits(m: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows are treatment vectors in lexicographic order, agent 0 most significant."""
    stop = (1 << m) if stop is None else stop
    k = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)[None, :]
    return ((k >> shifts) & 1).astype(np.float64)


def _safe_div(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def objective_table(p1, group, n_groups, reg, lam):
    p1 = np.ascontiguousarray(p1, dtype=np.float64)
    group = np.asarray(group, dtype=np.int64)
    N, m = p1.shape
    K = 1 << m
    out = np.empty((N, K))
    onehot = np.zeros((m, n_groups))
    onehot[np.arange(m), group] = 1.0
    counts = onehot.sum(axis=0)
    total_p = p1.sum(axis=1)
    step = max(1, _CHUNK // max(1, N * m))
    for k0 in range(0, K, step):
        bits = treatment_bits(m, k0, min(K, k0 + step))
        # loss_i = p + t * (1 - 2p)
        loss = (total_p[:, None] + (1.0 - 2.0 * p1) @ bits.T) / m
        if reg == 0:
            r = 0.0
        elif reg == 1:
            sums = bits @ onehot
            r = (np.abs(sums[:, 0] * counts[1] - sums[:, 1] * counts[0]) / (counts[0] * counts[1]))[None, :]
        else:
            # per-agent, per-treatment quantities -> group sums (N, k, G)
            s_t = (bits @ onehot)[None, :, :]
            if reg == 2:
                num = np.einsum("km,nm,mg->nkg", bits, 1.0 - p1, onehot)
                rates = _safe_div(num, s_t)
                r = np.abs(rates[..., 0] - rates[..., 1])
            elif reg == 3:
                num = np.einsum("km,nm,mg->nkg", 1.0 - bits, p1, onehot) / counts
                r = np.abs(num[..., 0] - num[..., 1])
            elif reg == 4:
                num = np.einsum("km,nm,mg->nkg", bits, p1, onehot)
                ratio = _safe_div(num, s_t)
                total_t = bits.sum(axis=1)[None, :]
                scale = _safe_div(total_t, total_p[:, None])
                r = np.abs(ratio[..., 0] * scale - ratio[..., 1] * scale)
            else:
                li = p1[:, None, :] + bits[None, :, :] * (1.0 - 2.0 * p1)[:, None, :]
                r = np.einsum("nkm,mg->nkg", li, onehot / counts).sum(axis=2)
        out[:, k0:k0 + bits.shape[0]] = (1.0 - lam) * loss + lam * r
    return out
