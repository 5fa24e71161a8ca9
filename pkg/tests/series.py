"""Hand-built blocked series for bootstrap tests."""

import numpy as np
import pandas as pd

from vgadequacy.ingest import CHRISTMAS, NORMAL, PairedSeries


def blocked_series(demand, load_factor, n_winters: int, weeks: int, periods_per_week: int,
                   xmas_week: int | None = None, installed_mw: float = 1.0) -> PairedSeries:
    """Series of ``n_winters`` x ``weeks`` weeks; weeks ``xmas_week`` and the next form one Christmas block."""
    n = n_winters * weeks * periods_per_week
    demand = np.broadcast_to(np.asarray(demand, dtype=float), (n,)).copy()
    load_factor = np.broadcast_to(np.asarray(load_factor, dtype=float), (n,)).copy()
    winter, block, kind, week = [], [], [], []
    block_no = -1
    for w in range(n_winters):
        for k in range(weeks):
            if xmas_week is None or k != xmas_week + 1:
                block_no += 1
            is_x = xmas_week is not None and k in (xmas_week, xmas_week + 1)
            for _ in range(periods_per_week):
                winter.append(f"w{w}")
                block.append(block_no)
                kind.append(CHRISTMAS if is_x else NORMAL)
                week.append(w * weeks + k)
    ts = pd.date_range("2005-11-06", periods=n, freq="h", tz="UTC")
    return PairedSeries(ts, demand, load_factor, np.array(winter, dtype=object), np.array(block),
                        np.array(kind, dtype=object), np.array(week), installed_mw, periods_per_week)
