"""Numba kernels for path simulation.

Randomness is counter-based: every path owns a SplitMix64 stream keyed by
(seed, path index), so results are bit-identical no matter how the scheduler
assigns paths to threads. Normals come from a 128-layer ziggurat driven by
that stream. Reset epochs use exact exponential clocks; steps are truncated
to land exactly on each reset time.
"""

import math

import numpy as np
import numba
from numba import njit, prange

# prefer OpenMP: stale TBB installs trip numba's version probe with a warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

U64 = np.uint64
_GOLD = U64(0x9E3779B97F4A7C15)
_PATH_SALT = U64(0xDA942042E4DD58B5)
_ZIG_R = 3.442619855899

KIND_BM = 0
KIND_OU = 1
KIND_GBM = 2
KIND_FELLER = 3
KIND_WF = 4
KIND_TABULATED = 5


def _build_ziggurat():
    m1 = 2147483648.0
    dn = 3.442619855899
    tn = dn
    vn = 9.91256303526217e-3
    kn = np.zeros(128, dtype=np.int64)
    wn = np.zeros(128)
    fn = np.zeros(128)
    q = vn / math.exp(-0.5 * dn * dn)
    kn[0] = int((dn / q) * m1)
    kn[1] = 0
    wn[0] = q / m1
    wn[127] = dn / m1
    fn[0] = 1.0
    fn[127] = math.exp(-0.5 * dn * dn)
    for i in range(126, 0, -1):
        dn = math.sqrt(-2.0 * math.log(vn / dn + math.exp(-0.5 * dn * dn)))
        kn[i + 1] = int((dn / tn) * m1)
        tn = dn
        fn[i] = math.exp(-0.5 * dn * dn)
        wn[i] = dn / m1
    return kn, wn, fn


_KN, _WN, _FN = _build_ziggurat()


@njit(inline="always", cache=True)
def _mix64(z):
    z = (z + _GOLD) & U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)) & U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)) & U64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> U64(31))


@njit(inline="always", cache=True)
def _next_u64(key, ctr):
    return _mix64(key + ctr * _GOLD)


@njit(inline="always", cache=True)
def _u01(key, ctr):
    # top 53 bits, offset to the open interval (0, 1)
    return (np.float64(_next_u64(key, ctr) >> U64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(inline="always", cache=True)
def _znorm(key, ctr):
    """Standard normal draw; returns (z, advanced counter)."""
    kn, wn, fn = _KN, _WN, _FN
    while True:
        u = _next_u64(key, ctr)
        ctr += U64(1)
        hz = np.int64(np.int32(u & U64(0xFFFFFFFF)))
        iz = hz & np.int64(127)
        if np.abs(hz) < kn[iz]:
            return hz * wn[iz], ctr
        if iz == 0:
            # tail beyond the base strip
            while True:
                x = -math.log(_u01(key, ctr)) / _ZIG_R
                ctr += U64(1)
                y = -math.log(_u01(key, ctr))
                ctr += U64(1)
                if y + y >= x * x:
                    break
            if hz > 0:
                return _ZIG_R + x, ctr
            return -_ZIG_R - x, ctr
        x = hz * wn[iz]
        u2 = _u01(key, ctr)
        ctr += U64(1)
        if fn[iz] + u2 * (fn[iz - 1] - fn[iz]) < math.exp(-0.5 * x * x):
            return x, ctr


@njit(inline="always", cache=True)
def _coef(kind, p0, p1, x, mu_tab, sig_tab, tab_lo, tab_dx):
    """Drift and diffusion coefficient at x."""
    if kind == 0:       # BM with drift p0
        return p0, 1.0
    if kind == 1:       # OU: -p0 x, noise p1
        return -p0 * x, p1
    if kind == 2:       # GBM: p0 x, p1 x
        return p0 * x, p1 * x
    if kind == 3:       # Feller
        s = x if x > 0.0 else 0.0
        return 0.25, math.sqrt(s)
    if kind == 4:       # Wright-Fisher
        s = x * (1.0 - x)
        if s < 0.0:
            s = 0.0
        return 0.25 - 0.5 * x, math.sqrt(s)
    # tabulated coefficients, linear interpolation with clamped ends
    n = mu_tab.shape[0]
    ix = (x - tab_lo) / tab_dx
    i = int(ix)
    if i < 0:
        i = 0
        fr = 0.0
    elif i >= n - 1:
        i = n - 2
        fr = 1.0
    else:
        fr = ix - i
    mu = mu_tab[i] * (1.0 - fr) + mu_tab[i + 1] * fr
    sg = sig_tab[i] * (1.0 - fr) + sig_tab[i + 1] * fr
    return mu, sg


@njit(inline="always", cache=True)
def _path_key(seed, p, antithetic):
    if antithetic:
        return _mix64(U64(seed) ^ (U64(p >> 1) * _PATH_SALT)), (1.0 if (p & 1) == 0 else -1.0)
    return _mix64(U64(seed) ^ (U64(p) * _PATH_SALT)), 1.0


@njit(parallel=True, fastmath=True, cache=True)
def exit_kernel(seed, starts, xrs, r, kind, p0, p1,
                mu_tab, sig_tab, tab_lo, tab_dx,
                lo, hi, dt, t_max, bridge, antithetic):
    """First exit from (lo, hi) under resetting.

    Returns per-path exit side (-1 low, +1 high, 0 censored) and exit time
    (t_max for censored paths).
    """
    n = starts.shape[0]
    side = np.zeros(n, dtype=np.int8)
    times = np.full(n, t_max)
    for p in prange(n):
        key, sign = _path_key(seed, p, antithetic)
        ctr = U64(0)
        x = starts[p]
        xr = xrs[p]
        t = 0.0
        out = np.int8(0)
        if x <= lo:
            side[p] = np.int8(-1)
            times[p] = 0.0
            continue
        if x >= hi:
            side[p] = np.int8(1)
            times[p] = 0.0
            continue
        if r > 0.0:
            u = _u01(key, ctr)
            ctr += U64(1)
            t_reset = -math.log(u) / r
        else:
            t_reset = 1e300
        while t < t_max:
            h = dt
            hit_reset = False
            if t + h >= t_reset:
                h = t_reset - t
                hit_reset = True
            if t + h > t_max:
                h = t_max - t
                hit_reset = False
            if h > 0.0:
                mu, sg = _coef(kind, p0, p1, x, mu_tab, sig_tab, tab_lo, tab_dx)
                z, ctr = _znorm(key, ctr)
                xn = x + mu * h + sg * math.sqrt(h) * z * sign
                if xn <= lo:
                    out = np.int8(-1)
                    t += h
                    break
                if xn >= hi:
                    out = np.int8(1)
                    t += h
                    break
                if bridge:
                    s2h = sg * sg * h
                    d = (x - lo) * (xn - lo)
                    if d < 18.5 * s2h:
                        ub = _u01(key, ctr)
                        ctr += U64(1)
                        if ub < math.exp(-2.0 * d / s2h):
                            out = np.int8(-1)
                            t += h
                            break
                    d = (hi - x) * (hi - xn)
                    if d < 18.5 * s2h:
                        ub = _u01(key, ctr)
                        ctr += U64(1)
                        if ub < math.exp(-2.0 * d / s2h):
                            out = np.int8(1)
                            t += h
                            break
                x = xn
                t += h
            if hit_reset:
                x = xr
                u = _u01(key, ctr)
                ctr += U64(1)
                t_reset = t - math.log(u) / r
        if out != 0:
            side[p] = out
            times[p] = t
    return side, times


@njit(parallel=True, fastmath=True, cache=True)
def fpt_kernel(seed, starts, xrs, r, kind, p0, p1,
               mu_tab, sig_tab, tab_lo, tab_dx,
               barrier, dt, t_max, bridge, antithetic):
    """First passage below ``barrier`` under resetting.

    Returns per-path hit flags and passage times (t_max when censored).
    """
    n = starts.shape[0]
    hit = np.zeros(n, dtype=np.int8)
    times = np.full(n, t_max)
    for p in prange(n):
        key, sign = _path_key(seed, p, antithetic)
        ctr = U64(0)
        x = starts[p]
        xr = xrs[p]
        t = 0.0
        got = np.int8(0)
        if x <= barrier:
            hit[p] = np.int8(1)
            times[p] = 0.0
            continue
        if r > 0.0:
            u = _u01(key, ctr)
            ctr += U64(1)
            t_reset = -math.log(u) / r
        else:
            t_reset = 1e300
        while t < t_max:
            h = dt
            hit_reset = False
            if t + h >= t_reset:
                h = t_reset - t
                hit_reset = True
            if t + h > t_max:
                h = t_max - t
                hit_reset = False
            if h > 0.0:
                mu, sg = _coef(kind, p0, p1, x, mu_tab, sig_tab, tab_lo, tab_dx)
                z, ctr = _znorm(key, ctr)
                xn = x + mu * h + sg * math.sqrt(h) * z * sign
                if xn <= barrier:
                    got = np.int8(1)
                    t += h
                    break
                if bridge:
                    s2h = sg * sg * h
                    d = (x - barrier) * (xn - barrier)
                    if d < 18.5 * s2h:
                        ub = _u01(key, ctr)
                        ctr += U64(1)
                        if ub < math.exp(-2.0 * d / s2h):
                            got = np.int8(1)
                            t += h
                            break
                x = xn
                t += h
            if hit_reset:
                x = xr
                u = _u01(key, ctr)
                ctr += U64(1)
                t_reset = t - math.log(u) / r
        if got != 0:
            hit[p] = got
            times[p] = t
    return hit, times


@njit(parallel=True, cache=True)
def normal_sample(seed, n):
    """Ziggurat draws for distributional self-tests."""
    out = np.empty(n)
    for p in prange(n):
        key, _ = _path_key(seed, p, False)
        z, _ = _znorm(key, U64(0))
        out[p] = z
    return out
