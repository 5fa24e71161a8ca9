"""Compiled folds over product-form net-demand atoms.

Every row ``t`` of the product ``d_t - lam_t * y_s`` (s = 1..N_y) is reduced
independently with Neumaier summation, so the per-row sums do not depend on
how rows are split across threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .distribution import GRID_EPS

ROW_CHUNK = 256
_threads = 1


def set_num_threads(n: int):
    """Cap the worker threads used by the product folds (results do not change)."""
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def get_num_threads() -> int:
    return _threads


@njit(cache=True, nogil=True)
def _rows(demand, lam, wind, cum_p, cum_km, origin, step, shift, want_epu, lo, hi, lolp_out, epu_out):
    n_grid = cum_p.shape[0]
    m = wind.shape[0]
    for t in range(lo, hi):
        s_f = 0.0
        c_f = 0.0
        s_e = 0.0
        c_e = 0.0
        dt = demand[t]
        lt = lam[t]
        for j in range(m):
            v = dt - lt * wind[j] + shift
            u = v - origin
            k = math.floor(u / step + GRID_EPS)
            if k < 0:
                continue
            if k >= n_grid - 1:
                f = 1.0
                kc = n_grid - 1
            else:
                f = cum_p[k]
                kc = k
            tot = s_f + f
            if abs(s_f) >= abs(f):
                c_f += (s_f - tot) + f
            else:
                c_f += (f - tot) + s_f
            s_f = tot
            if want_epu:
                e = u * cum_p[kc] - step * cum_km[kc]
                if e < 0.0:
                    e = 0.0
                tot = s_e + e
                if abs(s_e) >= abs(e):
                    c_e += (s_e - tot) + e
                else:
                    c_e += (e - tot) + s_e
                s_e = tot
        lolp_out[t] = s_f + c_f
        epu_out[t] = s_e + c_e


def product_row_sums(demand, lam, wind, copt, shift=0.0, want_epu=True):
    """Per-demand-atom sums ``sum_s F_X(v)`` and ``sum_s E[max(v - X, 0)]``.

    ``v = demand[t] - lam[t] * wind[s] + shift``.  Returns two arrays of length
    ``len(demand)``; the EPU array is zero when ``want_epu`` is False.
    """
    demand = np.ascontiguousarray(demand, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    wind = np.ascontiguousarray(wind, dtype=np.float64)
    cum_p = np.ascontiguousarray(copt.cum_probs)
    cum_km = np.ascontiguousarray(copt.cum_index_moment)
    n = demand.size
    lolp_rows = np.zeros(n)
    epu_rows = np.zeros(n)
    bounds = [(lo, min(lo + ROW_CHUNK, n)) for lo in range(0, n, ROW_CHUNK)]

    def run(b):
        _rows(demand, lam, wind, cum_p, cum_km, copt.origin_mw, copt.step_mw, float(shift),
              bool(want_epu), b[0], b[1], lolp_rows, epu_rows)

    if _threads == 1 or len(bounds) == 1:
        for b in bounds:
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            list(pool.map(run, bounds))
    return lolp_rows, epu_rows


@njit(cache=True, nogil=True)
def _row_blocks(demand, lam, wind, wind_starts, cum_p, origin, step, shift, lo, hi, out):
    n_grid = cum_p.shape[0]
    n_blocks = wind_starts.shape[0] - 1
    for t in range(lo, hi):
        dt = demand[t]
        lt = lam[t]
        for b in range(n_blocks):
            s = 0.0
            c = 0.0
            for j in range(wind_starts[b], wind_starts[b + 1]):
                k = math.floor((dt - lt * wind[j] + shift - origin) / step + GRID_EPS)
                if k < 0:
                    continue
                f = 1.0 if k >= n_grid - 1 else cum_p[k]
                tot = s + f
                if abs(s) >= abs(f):
                    c += (s - tot) + f
                else:
                    c += (f - tot) + s
                s = tot
            out[t, b] = s + c


def product_block_sums(demand, lam, wind, wind_starts, copt, shift=0.0):
    """``out[t, b] = sum over s in wind block b of F_X(demand[t] - lam[t] * wind[s] + shift)``.

    ``wind_starts`` holds block boundaries: block ``b`` is
    ``wind[wind_starts[b]:wind_starts[b + 1]]``.
    """
    demand = np.ascontiguousarray(demand, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    wind = np.ascontiguousarray(wind, dtype=np.float64)
    wind_starts = np.ascontiguousarray(wind_starts, dtype=np.int64)
    if wind_starts[0] != 0 or wind_starts[-1] != wind.size or np.any(np.diff(wind_starts) < 0):
        raise ValueError("wind block boundaries must run from 0 to len(wind)")
    cum_p = np.ascontiguousarray(copt.cum_probs)
    n = demand.size
    out = np.zeros((n, wind_starts.size - 1))
    bounds = [(lo, min(lo + ROW_CHUNK, n)) for lo in range(0, n, ROW_CHUNK)]

    def run(b):
        _row_blocks(demand, lam, wind, wind_starts, cum_p, copt.origin_mw, copt.step_mw, float(shift),
                    b[0], b[1], out)

    if _threads == 1 or len(bounds) == 1:
        for b in bounds:
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            list(pool.map(run, bounds))
    return out
