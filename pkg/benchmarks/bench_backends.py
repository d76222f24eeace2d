"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs both implementations of each hot kernel on protocol-scale inputs and
prints a timing table.  Usage:

    python benchmarks/bench_backends.py [--block 20000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from qkdpost._accel import NUMBA_AVAILABLE
from qkdpost._kernels import (
    _gf2_eliminate_numpy,
    _sp_decode_numpy,
    _toeplitz_numpy,
    pack_bits,
    pack_rows,
)
from qkdpost.channels import Basis, joint_distribution, make_amplitude_damping
from qkdpost.entropy import JointDistribution
from qkdpost.reconciliation import (
    _prior_llrs,
    gen_parity_check,
    priors_from_joint,
    syndrome,
)

if NUMBA_AVAILABLE:
    from qkdpost._kernels import _gf2_eliminate_numba, _sp_decode_numba, _toeplitz_numba


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--block", type=int, default=20_000, help="decode block length")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    n = args.block
    joint = JointDistribution(joint_distribution(make_amplitude_damping(0.3), Basis.Z, Basis.Z))
    m = int(np.ceil(n * 0.61))
    code = gen_parity_check(n, m, 3, seed=1)
    rng = np.random.default_rng(0)
    flat = rng.choice(4, size=n, p=joint.table.ravel())
    x, y = (flat // 2).astype(np.uint8), (flat % 2).astype(np.uint8)
    syn = syndrome(code, x)
    llr = _prior_llrs(priors_from_joint(joint, y, "direct"))

    rows = []

    t_np, out_np = timeit(
        lambda: _sp_decode_numpy(llr, code.chk_vars, code.chk_ptr, syn, 100), args.repeats
    )
    if NUMBA_AVAILABLE:
        _sp_decode_numba(llr, code.chk_vars, code.chk_ptr, syn, 2)  # compile
        t_nb, out_nb = timeit(
            lambda: _sp_decode_numba(llr, code.chk_vars, code.chk_ptr, syn, 100), args.repeats
        )
        assert np.array_equal(out_np[0], out_nb[0])
    else:
        t_nb = None
    rows.append((f"sum-product decode (n={n}, {out_np[2]} iters)", t_np, t_nb))

    packed = pack_rows(code.chk_vars, code.chk_ptr, n)
    t_np, r_np = timeit(lambda: _gf2_eliminate_numpy(packed.copy(), n), args.repeats)
    if NUMBA_AVAILABLE:
        _gf2_eliminate_numba(packed.copy(), n)
        t_nb, r_nb = timeit(lambda: _gf2_eliminate_numba(packed.copy(), n), args.repeats)
        assert r_np[0] == r_nb[0]
    else:
        t_nb = None
    rows.append((f"GF(2) elimination ({m}x{n})", t_np, t_nb))

    ell = n // 3
    gen = rng.integers(0, 2, n + ell - 1, dtype=np.uint8)
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    t_np, k_np = timeit(
        lambda: _toeplitz_numpy(gen.astype(float), bits.astype(float), ell), args.repeats
    )
    if NUMBA_AVAILABLE:
        grev = gen[::-1].astype(np.uint8)
        grev_w = np.zeros((grev.shape[0] + 63) // 64 + 1, np.uint64)
        grev_w[: (grev.shape[0] + 63) // 64] = pack_bits(grev)
        xw = pack_bits(bits)
        _toeplitz_numba(grev_w, xw, ell, xw.shape[0])
        t_nb, k_nb = timeit(lambda: _toeplitz_numba(grev_w, xw, ell, xw.shape[0]), args.repeats)
        assert np.array_equal(k_np, k_nb)
    else:
        t_nb = None
    rows.append((f"Toeplitz hash ({ell}x{n})", t_np, t_nb))

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'kernel':<{width}}{'numpy':>10}{'numba':>10}{'speedup':>9}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:<{width}}{t_np * 1e3:>8.1f}ms {'n/a':>9}{'':>9}")
        else:
            print(
                f"{name:<{width}}{t_np * 1e3:>8.1f}ms{t_nb * 1e3:>8.1f}ms{t_np / t_nb:>8.1f}x"
            )
    if not NUMBA_AVAILABLE:
        print("\nnumba not installed; showing the fallback path only")


if __name__ == "__main__":
    main()
