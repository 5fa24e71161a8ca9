import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgadequacy.exceptions import DataError
from vgadequacy.ingest import (
    CHRISTMAS, NORMAL, DemandSeries, SeasonSpec, WindSeries, add_response_adjustment, align_and_block,
    halfhourly_to_hourly, read_acs_csv, read_demand_csv, read_wind_csv, rescale_demand, wind_to_capacity,
    write_demand_csv, write_wind_csv,
)


def winter_hours(winter_id: str, weeks: int, extra_days: int = 0, freq: str = "h") -> pd.DatetimeIndex:
    start = SeasonSpec(weeks).season_start(winter_id) - pd.Timedelta(days=extra_days)
    end = start + pd.Timedelta(days=7 * weeks + 2 * extra_days)
    return pd.date_range(start, end, freq=freq, inclusive="left")


def make_inputs(winters, weeks, extra_days=0, seed=0):
    rng = np.random.default_rng(seed)
    ts = [winter_hours(w, weeks, extra_days) for w in winters]
    labels = np.concatenate([np.full(t.size, w, dtype=object) for w, t in zip(winters, ts)])
    ts = ts[0].append(ts[1:]) if len(ts) > 1 else ts[0]
    demand = DemandSeries(ts, rng.uniform(30000, 60000, ts.size), labels)
    wind = WindSeries(ts, rng.uniform(0, 1, ts.size))
    return demand, wind


SEVEN = [f"{y}-{(y + 1) % 100:02d}" for y in range(2005, 2012)]


# -- season rules -------------------------------------------------------------

def test_season_start_is_first_sunday_of_november():
    spec = SeasonSpec()
    assert spec.season_start("2005-06") == pd.Timestamp("2005-11-06", tz="UTC")
    assert spec.season_start("2009-10") == pd.Timestamp("2009-11-01", tz="UTC")
    assert spec.season_start("2010-11").dayofweek == 6
    with pytest.raises(DataError):
        spec.season_start("winter")


def test_christmas_week_contains_dec_25():
    spec = SeasonSpec()
    for w in SEVEN:
        k = spec.christmas_week(w)
        start = spec.season_start(w) + pd.Timedelta(weeks=k)
        xmas = pd.Timestamp(f"{w[:4]}-12-25", tz="UTC")
        assert start <= xmas < start + pd.Timedelta(weeks=1)
    assert SeasonSpec(weeks_per_winter=3).christmas_week("2005-06") is None
    with pytest.raises(ValueError):
        SeasonSpec(weeks_per_winter=2)


# -- halfhourly_to_hourly ---------------------------------------------------

def test_halfhourly_pair_max():
    ts = pd.date_range("2005-11-06", periods=2, freq="30min", tz="UTC")
    out = halfhourly_to_hourly(DemandSeries(ts, [30.0, 31.0], ["2005-06"] * 2))
    assert out.demand_mw.tolist() == [31.0]
    out = halfhourly_to_hourly(DemandSeries(ts, [50.0, 50.0], ["2005-06"] * 2))
    assert out.demand_mw.tolist() == [50.0]


def test_halfhourly_day():
    rng = np.random.default_rng(1)
    ts = pd.date_range("2005-11-06", periods=48, freq="30min", tz="UTC")
    values = rng.uniform(0, 100, 48)
    out = halfhourly_to_hourly(DemandSeries(ts, values, ["2005-06"] * 48))
    assert len(out) == 24
    np.testing.assert_array_equal(out.demand_mw, np.maximum(values[0::2], values[1::2]))
    assert (out.timestamps.minute == 0).all()


def test_halfhourly_errors():
    ts = pd.date_range("2005-11-06", periods=3, freq="30min", tz="UTC")
    with pytest.raises(DataError, match="odd"):
        halfhourly_to_hourly(DemandSeries(ts, [1.0, 2.0, 3.0], ["w"] * 3))
    ts = pd.date_range("2005-11-06 00:30", periods=2, freq="30min", tz="UTC")
    with pytest.raises(DataError, match="aligned"):
        halfhourly_to_hourly(DemandSeries(ts, [1.0, 2.0], ["w"] * 2))


# -- rescale_demand, add_response_adjustment, wind_to_capacity --------------

def test_rescale_examples():
    ts = pd.date_range("2005-11-06", periods=2, freq="h", tz="UTC")
    s = DemandSeries(ts, [50000.0, 40000.0], ["2005-06", "2005-06"])
    assert rescale_demand(s, {"2005-06": 50000.0}, 50000.0).demand_mw.tolist() == [50000.0, 40000.0]
    assert rescale_demand(s, {"2005-06": 50000.0}, 55550.0).demand_mw[0] == pytest.approx(55550.0)


def test_rescale_per_winter():
    ts = pd.date_range("2005-11-06", periods=4, freq="h", tz="UTC")
    s = DemandSeries(ts, [100.0, 200.0, 100.0, 200.0], ["a", "a", "b", "b"])
    out = rescale_demand(s, {"a": 50.0, "b": 200.0}, 100.0)
    assert out.demand_mw.tolist() == [200.0, 400.0, 50.0, 100.0]


def test_rescale_errors():
    ts = pd.date_range("2005-11-06", periods=2, freq="h", tz="UTC")
    s = DemandSeries(ts, [1.0, 2.0], ["a", "b"])
    with pytest.raises(DataError, match="'b'"):
        rescale_demand(s, {"a": 1.0}, 1.0)
    with pytest.raises(DataError):
        rescale_demand(s, {"a": 1.0, "b": 0.0}, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1.0, 1e5), min_size=2, max_size=30), st.floats(1e3, 1e5), st.floats(1e3, 1e5))
def test_rescale_preserves_shape(values, acs, target):
    ts = pd.date_range("2005-11-06", periods=len(values), freq="h", tz="UTC")
    out = rescale_demand(DemandSeries(ts, values, ["w"] * len(values)), {"w": acs}, target).demand_mw
    v = np.array(values)
    np.testing.assert_allclose(out[1:] / out[0], v[1:] / v[0], rtol=1e-12)


def test_response_adjustment():
    ts = pd.date_range("2005-11-06", periods=3, freq="h", tz="UTC")
    s = DemandSeries(ts, [55000.0, 1.0, 2.0], ["w"] * 3)
    assert add_response_adjustment(s, 0.0).demand_mw.tolist() == s.demand_mw.tolist()
    out = add_response_adjustment(s)
    assert out.demand_mw[0] == 55700.0
    assert out.demand_mw.mean() == pytest.approx(s.demand_mw.mean() + 700.0)
    with pytest.raises(DataError):
        add_response_adjustment(s, -1.0)


def test_wind_to_capacity():
    ts = pd.date_range("2005-11-06", periods=3, freq="h", tz="UTC")
    w = WindSeries(ts, [0.4, 1.0, 0.0])
    assert wind_to_capacity(w, 0.0).tolist() == [0.0, 0.0, 0.0]
    assert wind_to_capacity(w, 10120.0)[0] == pytest.approx(4048.0)
    np.testing.assert_array_equal(wind_to_capacity(w, 2000.0), 2 * wind_to_capacity(w, 1000.0))
    assert wind_to_capacity(w, 10120.0).max() <= 10120.0
    with pytest.raises(DataError):
        wind_to_capacity(w, -1.0)


def test_series_validation():
    ts = pd.date_range("2005-11-06", periods=2, freq="h", tz="UTC")
    with pytest.raises(DataError):
        DemandSeries(ts[::-1], [1.0, 2.0], ["w", "w"])
    with pytest.raises(DataError):
        DemandSeries(ts, [-1.0, 2.0], ["w", "w"])
    with pytest.raises(DataError):
        DemandSeries(ts, [1.0, 2.0], ["w", None])
    with pytest.raises(DataError):
        WindSeries(ts, [0.5, 1.2])


# -- align_and_block --------------------------------------------------------

def test_seven_winters_give_expected_block_counts():
    demand, wind = make_inputs(SEVEN, 20, extra_days=3)
    paired = align_and_block(demand, wind, SeasonSpec())
    assert paired.block_counts() == {NORMAL: 126, CHRISTMAS: 7}
    assert len(paired.week_slices()) == 140
    assert len(paired) == 7 * 20 * 168
    for sl, kind in paired.block_slices():
        assert sl.stop - sl.start == (336 if kind == CHRISTMAS else 168)


def test_christmas_outside_window():
    demand, wind = make_inputs(["2005-06"], 3)
    paired = align_and_block(demand, wind, SeasonSpec(weeks_per_winter=3))
    assert paired.block_counts() == {NORMAL: 3, CHRISTMAS: 0}


def test_identical_timestamps_keep_length():
    demand, wind = make_inputs(["2005-06"], 3)
    assert len(align_and_block(demand, wind, SeasonSpec(3))) == len(demand)


def test_alignment_is_intersection_within_windows():
    demand, wind = make_inputs(["2005-06", "2006-07"], 4, extra_days=2)
    # Wind is missing a stretch outside the windows and has extra records elsewhere.
    keep = np.ones(len(wind), dtype=bool)
    keep[:10] = False
    wind = WindSeries(wind.timestamps[keep], wind.load_factor[keep])
    spec = SeasonSpec(4)
    paired = align_and_block(demand, wind, spec)
    expected = []
    for w in ["2005-06", "2006-07"]:
        start = spec.season_start(w)
        expected.append(pd.date_range(start, start + pd.Timedelta(weeks=4), freq="h", inclusive="left"))
    expected = expected[0].append(expected[1])
    assert paired.timestamps.equals(expected)
    # Values follow their timestamps.
    d_pos = demand.timestamps.get_indexer(paired.timestamps)
    w_pos = wind.timestamps.get_indexer(paired.timestamps)
    np.testing.assert_array_equal(paired.demand_mw, demand.demand_mw[d_pos])
    np.testing.assert_array_equal(paired.load_factor, wind.load_factor[w_pos])


def test_blocks_partition_series():
    demand, wind = make_inputs(SEVEN[:2], 20)
    paired = align_and_block(demand, wind)
    slices = paired.block_slices()
    assert sum(s.stop - s.start for s, _ in slices) == len(paired)
    assert slices[0][0].start == 0
    for (a, _), (b, _) in zip(slices, slices[1:]):
        assert a.stop == b.start
    assert len(set(paired.block_id.tolist())) == len(slices)


def test_missing_hour_is_an_error_unless_gaps_allowed():
    demand, wind = make_inputs(["2005-06"], 20)
    spec = SeasonSpec()
    drop = spec.season_start("2005-06") + pd.Timedelta(days=15, hours=3)
    keep = wind.timestamps != drop
    wind = WindSeries(wind.timestamps[keep], wind.load_factor[keep])
    with pytest.raises(DataError, match="167 of 168"):
        align_and_block(demand, wind, spec)
    paired = align_and_block(demand, wind, SeasonSpec(allow_gaps=True))
    assert paired.block_counts() == {NORMAL: 17, CHRISTMAS: 1}
    assert len(paired.week_slices()) == 19
    assert drop.value not in paired.timestamps.asi8


def test_damaged_christmas_week_drops_whole_block():
    demand, wind = make_inputs(["2005-06"], 20)
    spec = SeasonSpec(allow_gaps=True)
    k = spec.christmas_week("2005-06")
    drop = spec.season_start("2005-06") + pd.Timedelta(weeks=k + 1, hours=5)
    keep = demand.timestamps != drop
    demand = DemandSeries(demand.timestamps[keep], demand.demand_mw[keep], demand.winter_id[keep])
    paired = align_and_block(demand, wind, spec)
    assert paired.block_counts() == {NORMAL: 18, CHRISTMAS: 0}


def test_winter_without_overlap_is_an_error():
    demand, _ = make_inputs(["2005-06", "2006-07"], 4)
    _, wind = make_inputs(["2005-06"], 4)
    with pytest.raises(DataError, match="2006-07"):
        align_and_block(demand, wind, SeasonSpec(4))


def test_alignment_deterministic():
    demand, wind = make_inputs(SEVEN[:2], 6, extra_days=1)
    a = align_and_block(demand, wind, SeasonSpec(6))
    b = align_and_block(demand, wind, SeasonSpec(6))
    assert a.demand_mw.tobytes() == b.demand_mw.tobytes()
    assert a.load_factor.tobytes() == b.load_factor.tobytes()
    assert a.block_id.tobytes() == b.block_id.tobytes()


def test_paired_series_capacity_view():
    demand, wind = make_inputs(["2005-06"], 3)
    paired = align_and_block(demand, wind, SeasonSpec(3))
    scaled = paired.with_installed(10120.0)
    np.testing.assert_allclose(scaled.wind_mw, paired.load_factor * 10120.0)
    assert paired.installed_mw == 1.0


def test_coarser_cadence():
    ts = winter_hours("2005-06", 3, freq="3h")
    demand = DemandSeries(ts, np.full(ts.size, 1.0), ["2005-06"] * ts.size)
    wind = WindSeries(ts, np.full(ts.size, 0.5))
    paired = align_and_block(demand, wind, SeasonSpec(3))
    assert paired.periods_per_week == 56
    assert paired.block_counts()[NORMAL] == 3


# -- CSV ------------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    demand, wind = make_inputs(["2005-06"], 3)
    write_demand_csv(demand, tmp_path / "d.csv")
    write_wind_csv(wind, tmp_path / "w.csv")
    d2 = read_demand_csv(tmp_path / "d.csv")
    w2 = read_wind_csv(tmp_path / "w.csv")
    assert d2.timestamps.equals(demand.timestamps)
    np.testing.assert_allclose(d2.demand_mw, demand.demand_mw, rtol=1e-15)
    np.testing.assert_allclose(w2.load_factor, wind.load_factor, rtol=1e-15)
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "timestamp,demand_mw,winter_id"


def test_csv_errors_carry_location(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("timestamp,load_factor\n2005-11-06T00:00:00Z,0.5\n2005-11-06T01:00:00Z,1.5\n")
    with pytest.raises(DataError, match=r"w.csv:3"):
        read_wind_csv(p)
    p.write_text("timestamp,load_factor\n2005-11-06T00:00:00Z,abc\n")
    with pytest.raises(DataError, match=r"w.csv:2"):
        read_wind_csv(p)
    p = tmp_path / "d.csv"
    p.write_text("timestamp,demand_mw\n2005-11-06T00:00:00Z,1\n")
    with pytest.raises(DataError, match="winter_id"):
        read_demand_csv(p)
    p = tmp_path / "acs.csv"
    p.write_text("winter_id,acs_peak_mw\n2005-06,57000\n2005-06,58000\n")
    with pytest.raises(DataError, match=r"acs.csv:3"):
        read_acs_csv(p)
    with pytest.raises(DataError, match="not found"):
        read_wind_csv(tmp_path / "nope.csv")
