"""Hot numeric kernels with numba and pure-numpy implementations.

Three kernel families live here because they dominate runtime at protocol
scale (block lengths 10^4..10^6):

* sum-product syndrome decoding (message passing over the sparse graph),
* GF(2) Gauss-Jordan elimination on bit-packed rows (rank / dependent rows),
* Toeplitz hashing over GF(2).

Each has a loop implementation compiled with numba and a vectorized numpy
fallback.  ``qkdpost._accel`` decides which one backs the public dispatchers;
both remain importable so the benchmark can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

MSG_CLAMP = 30.0

# ---------------------------------------------------------------------------
# sum-product decoding
#
# Edge layout: edges grouped by check.  chk_var[e] is the variable of edge e,
# chk_ptr[k]:chk_ptr[k+1] spans the edges of check k.  Messages are LLRs with
# the convention  llr > 0  <=>  bit 0 more likely.
# ---------------------------------------------------------------------------


def _sp_decode_loops(prior, chk_var, chk_ptr, syn, max_iter):
    n = prior.shape[0]
    m = chk_ptr.shape[0] - 1
    E = chk_var.shape[0]
    cv = np.zeros(E)
    th = np.zeros(E)
    pref = np.zeros(E)
    tot = np.zeros(n)
    xhat = np.zeros(n, np.uint8)
    for it in range(1, max_iter + 1):
        # variable pass: vc[e] = prior[v] + sum of incoming cv except edge e,
        # stored directly as tanh(vc/2) for the check pass
        for v in range(n):
            tot[v] = prior[v]
        for e in range(E):
            tot[chk_var[e]] += cv[e]
        for e in range(E):
            msg = tot[chk_var[e]] - cv[e]
            if msg > MSG_CLAMP:
                msg = MSG_CLAMP
            elif msg < -MSG_CLAMP:
                msg = -MSG_CLAMP
            th[e] = np.tanh(0.5 * msg)
        # check pass: prefix/suffix exclusion products over cached tanh values
        for k in range(m):
            lo = chk_ptr[k]
            hi = chk_ptr[k + 1]
            run = 1.0
            for e in range(lo, hi):
                pref[e] = run
                run *= th[e]
            run = 1.0 - 2.0 * syn[k]
            for e in range(hi - 1, lo - 1, -1):
                raw = pref[e] * run
                run *= th[e]
                if raw > 1.0 - 1e-15:
                    raw = 1.0 - 1e-15
                elif raw < -1.0 + 1e-15:
                    raw = -1.0 + 1e-15
                msg = 2.0 * np.arctanh(raw)
                if msg > MSG_CLAMP:
                    msg = MSG_CLAMP
                elif msg < -MSG_CLAMP:
                    msg = -MSG_CLAMP
                cv[e] = msg
        # hard decision and syndrome check
        for v in range(n):
            tot[v] = prior[v]
        for e in range(E):
            tot[chk_var[e]] += cv[e]
        for v in range(n):
            xhat[v] = 1 if tot[v] < 0.0 else 0
        ok = True
        for k in range(m):
            par = np.uint8(0)
            for e in range(chk_ptr[k], chk_ptr[k + 1]):
                par ^= xhat[chk_var[e]]
            if par != syn[k]:
                ok = False
                break
        if ok:
            return xhat, True, it
    return xhat, False, max_iter


def _sp_decode_numpy(prior, chk_var, chk_ptr, syn, max_iter):
    n = prior.shape[0]
    m = chk_ptr.shape[0] - 1
    E = chk_var.shape[0]
    chk_of_edge = np.repeat(np.arange(m), np.diff(chk_ptr))
    sgn_syn = 1.0 - 2.0 * syn.astype(np.float64)
    cv = np.zeros(E)
    for it in range(1, max_iter + 1):
        tot = prior + np.bincount(chk_var, weights=cv, minlength=n)
        vc = np.clip(tot[chk_var] - cv, -MSG_CLAMP, MSG_CLAMP)
        th = np.tanh(0.5 * vc)
        # product-with-exclusion in log/sign form; the 1e-300 floor keeps a
        # single zero factor exact and collapses multiple zeros to 0 messages
        lg = np.log(np.clip(np.abs(th), 1e-300, None))
        neg = (th < 0.0).astype(np.int64)
        sum_lg = np.bincount(chk_of_edge, weights=lg, minlength=m)
        sum_neg = np.bincount(chk_of_edge, weights=neg, minlength=m).astype(np.int64)
        excl = np.exp(sum_lg[chk_of_edge] - lg)
        excl_sgn = 1.0 - 2.0 * ((sum_neg[chk_of_edge] - neg) & 1)
        raw = np.clip(sgn_syn[chk_of_edge] * excl_sgn * excl, -1 + 1e-15, 1 - 1e-15)
        cv = np.clip(2.0 * np.arctanh(raw), -MSG_CLAMP, MSG_CLAMP)
        tot = prior + np.bincount(chk_var, weights=cv, minlength=n)
        xhat = (tot < 0.0).astype(np.uint8)
        par = np.bincount(chk_of_edge, weights=xhat[chk_var], minlength=m).astype(np.int64) & 1
        if np.array_equal(par, syn.astype(np.int64)):
            return xhat, True, it
    return xhat, False, max_iter


# ---------------------------------------------------------------------------
# GF(2) elimination on rows packed into uint64 words
# ---------------------------------------------------------------------------


def _gf2_eliminate_loops(rows, nbits):
    m, W = rows.shape
    pivot = np.zeros(m, np.uint8)
    rank = 0
    for c in range(nbits):
        wi = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for r in range(m):
            if pivot[r] == 0 and (rows[r, wi] & bit) != 0:
                p = r
                break
        if p < 0:
            continue
        pivot[p] = 1
        rank += 1
        for r in range(m):
            if pivot[r] == 0 and (rows[r, wi] & bit) != 0:
                for w in range(W):
                    rows[r, w] ^= rows[p, w]
        if rank == m:
            break
    return rank, pivot


def _gf2_eliminate_numpy(rows, nbits):
    m, W = rows.shape
    pivot = np.zeros(m, bool)
    rank = 0
    for c in range(nbits):
        wi = c >> 6
        bit = np.uint64(c & 63)
        has = ((rows[:, wi] >> bit) & np.uint64(1)).astype(bool) & ~pivot
        idx = np.flatnonzero(has)
        if idx.size == 0:
            continue
        p = idx[0]
        pivot[p] = True
        rank += 1
        if idx.size > 1:
            rows[idx[1:]] ^= rows[p]
        if rank == m:
            break
    return rank, pivot.astype(np.uint8)


def pack_rows(row_cols, row_ptr, n):
    """Pack adjacency-list rows into uint64 words, one row per matrix row."""
    m = row_ptr.shape[0] - 1
    W = (n + 63) // 64
    out = np.zeros((m, W), np.uint64)
    rows = np.repeat(np.arange(m), np.diff(row_ptr))
    np.bitwise_xor.at(out, (rows, row_cols >> 6), np.uint64(1) << (row_cols & 63).astype(np.uint64))
    return out


# ---------------------------------------------------------------------------
# Toeplitz hashing: key[i] = parity over j of x[j] * grev[l-1-i+j]
# where grev is the reversed generator, so each output bit is a dot product
# of x with a sliding window of grev.
# ---------------------------------------------------------------------------


def _popcount64(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)


def _toeplitz_loops(grev_w, xw, ell, Wx):
    key = np.zeros(ell, np.uint8)
    for i in range(ell):
        s = ell - 1 - i
        ws = s >> 6
        bs = np.uint64(s & 63)
        inv = np.uint64(64) - bs
        acc = np.uint64(0)
        if bs == 0:
            for k in range(Wx):
                acc ^= grev_w[ws + k] & xw[k]
        else:
            for k in range(Wx):
                w = (grev_w[ws + k] >> bs) | (grev_w[ws + k + 1] << inv)
                acc ^= w & xw[k]
        key[i] = _popcount64(acc) & np.uint64(1)
    return key


def _toeplitz_numpy(gen, x, ell):
    # exact counts via FFT convolution; values are bounded by len(x) so the
    # float64 round-trip is well inside integer accuracy at these sizes
    n = x.shape[0]
    size = 1
    while size < n + gen.shape[0]:
        size *= 2
    conv = np.fft.irfft(np.fft.rfft(x, size) * np.fft.rfft(gen, size), size)
    counts = np.rint(conv[n - 1 : n - 1 + ell])
    if np.abs(conv[n - 1 : n - 1 + ell] - counts).max(initial=0.0) > 0.1:
        raise FloatingPointError("FFT convolution lost integer accuracy")
    return (counts.astype(np.int64) & 1).astype(np.uint8)


def pack_bits(bits):
    """Pack a 0/1 vector into uint64 words, little-endian within each word."""
    nbits = bits.shape[0]
    W = (nbits + 63) // 64
    out = np.zeros(W, np.uint64)
    idx = np.arange(nbits)
    np.bitwise_or.at(out, idx >> 6, bits.astype(np.uint64) << (idx & 63).astype(np.uint64))
    return out


if USE_NUMBA:
    _sp_decode_numba = njit(cache=True)(_sp_decode_loops)
    _gf2_eliminate_numba = njit(cache=True)(_gf2_eliminate_loops)
    _popcount64 = njit(cache=True, inline="always")(_popcount64)
    _toeplitz_numba = njit(cache=True)(_toeplitz_loops)

    sp_decode_core = _sp_decode_numba
    gf2_eliminate_core = _gf2_eliminate_numba
else:
    sp_decode_core = _sp_decode_numpy
    gf2_eliminate_core = _gf2_eliminate_numpy


def toeplitz_core(gen, x, ell):
    if ell == 0:
        return np.zeros(0, np.uint8)
    if USE_NUMBA:
        grev = gen[::-1].astype(np.uint8)
        grev_w = np.zeros((grev.shape[0] + 63) // 64 + 1, np.uint64)
        grev_w[: (grev.shape[0] + 63) // 64] = pack_bits(grev)
        xw = pack_bits(x.astype(np.uint8))
        return _toeplitz_numba(grev_w, xw, ell, xw.shape[0])
    return _toeplitz_numpy(gen.astype(np.float64), x.astype(np.float64), ell)
