import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgadequacy.distribution import (
    DiscreteDistribution, GenUnit, build_copt, cdf, convolve, expected_shortfall, moments, negate_and_shift,
    read_units_csv, write_units_csv,
)
from vgadequacy.exceptions import DataError, NumericalError

from .oracles import enumerate_copt


def atoms(d: DiscreteDistribution) -> dict[float, float]:
    return d.to_dict()


def assert_same_atoms(got: dict, want: dict, tol: float):
    keys = set(got) | set(want)
    for k in keys:
        assert abs(got.get(k, 0.0) - want.get(k, 0.0)) <= tol, (k, got.get(k), want.get(k))


units_strategy = st.lists(
    st.builds(
        GenUnit,
        name=st.just("u"),
        capacity_mw=st.integers(0, 60).map(float),
        availability=st.floats(0.0, 1.0),
    ),
    min_size=1,
    max_size=8,
)


# -- build_copt -------------------------------------------------------------

def test_single_unit():
    assert atoms(build_copt([GenUnit("a", 10, 0.9)])) == pytest.approx({0.0: 0.1, 10.0: 0.9}, abs=1e-15)


def test_two_identical_units():
    got = atoms(build_copt([GenUnit("a", 10, 0.9), GenUnit("b", 10, 0.9)]))
    assert_same_atoms(got, {0.0: 0.01, 10.0: 0.18, 20.0: 0.81}, 1e-15)


def test_twelve_units_match_enumeration():
    rng = np.random.default_rng(12)
    units = [GenUnit(f"u{i}", float(rng.integers(1, 400)), float(rng.uniform(0.5, 1.0))) for i in range(12)]
    assert_same_atoms(atoms(build_copt(units)), enumerate_copt(units, 1.0), 1e-12)


def test_capacity_rounding_half_up():
    assert sorted(atoms(build_copt([GenUnit("a", 2.5, 0.5)]))) == [0.0, 3.0]
    assert sorted(atoms(build_copt([GenUnit("a", 25.0, 0.5)], step_mw=10.0))) == [0.0, 30.0]
    assert sorted(atoms(build_copt([GenUnit("a", 24.9, 0.5)], step_mw=10.0))) == [0.0, 20.0]


def test_copt_mean_equals_rounded_expectation():
    units = [GenUnit("a", 10.4, 0.8), GenUnit("b", 7.5, 0.6), GenUnit("c", 3.0, 1.0)]
    mean, _ = moments(build_copt(units))
    assert mean == pytest.approx(10 * 0.8 + 8 * 0.6 + 3 * 1.0, abs=1e-9)


def test_certain_units_give_point_mass():
    d = build_copt([GenUnit("a", 10, 1.0), GenUnit("b", 5, 1.0)])
    assert atoms(d) == {15.0: 1.0}
    d = build_copt([GenUnit("a", 10, 0.0)])
    assert atoms(d) == {0.0: 1.0}


def test_copt_errors():
    with pytest.raises(DataError):
        build_copt([])
    with pytest.raises(DataError):
        GenUnit("x", float("nan"), 0.5)
    with pytest.raises(DataError):
        GenUnit("x", 10, 1.5)
    with pytest.raises(DataError):
        GenUnit("x", -1, 0.5)
    with pytest.raises(ValueError):
        build_copt([GenUnit("a", 1, 0.5)], step_mw=0.0)


@settings(max_examples=60, deadline=None)
@given(units_strategy, st.randoms(use_true_random=False))
def test_copt_order_independent(units, rnd):
    shuffled = list(units)
    rnd.shuffle(shuffled)
    a, b = build_copt(units), build_copt(shuffled)
    assert a.origin_mw == b.origin_mw
    np.testing.assert_allclose(a.probs, b.probs, rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(units_strategy)
def test_copt_matches_enumeration_property(units):
    assert_same_atoms(atoms(build_copt(units)), enumerate_copt(units, 1.0), 1e-12)


# -- DiscreteDistribution ---------------------------------------------------

def test_distribution_validation():
    with pytest.raises(ValueError):
        DiscreteDistribution(0.0, 1.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        DiscreteDistribution(0.0, 1.0, [1.0, 0.0])
    with pytest.raises(ValueError):
        DiscreteDistribution(0.0, -1.0, [1.0])
    with pytest.raises(ValueError):
        DiscreteDistribution(0.0, 1.0, [0.5, -0.1, 0.6])
    with pytest.raises(NumericalError):
        DiscreteDistribution(0.0, 1.0, [0.5, 0.4])
    d = DiscreteDistribution(0.0, 1.0, [0.5, 0.5])
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_from_atoms_and_equality():
    d = DiscreteDistribution.from_atoms({0: 0.5, 10: 0.5}, step_mw=5.0)
    assert d.probs.tolist() == [0.5, 0.0, 0.5]
    assert d == DiscreteDistribution(0.0, 5.0, [0.5, 0.0, 0.5])
    with pytest.raises(ValueError):
        DiscreteDistribution.from_atoms({0: 0.5, 7: 0.5}, step_mw=5.0)


# -- cdf ----------------------------------------------------------------------

def test_cdf_examples():
    d = DiscreteDistribution.from_atoms({0: 0.1, 100: 0.9})
    assert cdf(d, 50) == pytest.approx(0.1)
    assert cdf(d, 100) == 1.0
    assert cdf(d, -1) == 0.0
    assert cdf(d, 0) == pytest.approx(0.1)
    assert cdf(d, -1e300) == 0.0
    assert cdf(d, 1e300) == 1.0


def test_cdf_rejects_non_finite():
    d = DiscreteDistribution.point_mass(0.0)
    for bad in (float("nan"), float("inf"), -float("inf")):
        with pytest.raises(ValueError):
            cdf(d, bad)


@settings(max_examples=50, deadline=None)
@given(units_strategy, st.lists(st.floats(-50, 600), min_size=2, max_size=30))
def test_cdf_monotone_right_continuous(units, xs):
    d = build_copt(units)
    xs = np.sort(np.array(xs))
    values = cdf(d, xs)
    assert np.all(np.diff(values) >= -1e-15)
    assert cdf(d, d.max_mw) == 1.0
    for s in d.support:
        assert cdf(d, s + 1e-7) == cdf(d, s)


# -- convolve, negate_and_shift, moments -------------------------------------

def test_convolve_examples():
    a = DiscreteDistribution.from_atoms({0: 0.5, 10: 0.5})
    assert_same_atoms(atoms(convolve(a, a)), {0.0: 0.25, 10.0: 0.5, 20.0: 0.25}, 1e-15)
    ident = DiscreteDistribution.point_mass(0.0)
    assert convolve(ident, a) == a
    with pytest.raises(ValueError):
        convolve(a, DiscreteDistribution.point_mass(0.0, step_mw=2.0))


dist_strategy = units_strategy.map(build_copt)


@settings(max_examples=40, deadline=None)
@given(dist_strategy, dist_strategy, dist_strategy)
def test_convolve_algebra(a, b, c):
    ab, ba = convolve(a, b), convolve(b, a)
    assert_same_atoms(atoms(ab), atoms(ba), 1e-9)
    assert_same_atoms(atoms(convolve(ab, c)), atoms(convolve(a, convolve(b, c))), 1e-9)
    assert math.fsum(ab.probs) == pytest.approx(1.0, abs=1e-9)
    assert moments(ab)[0] == pytest.approx(moments(a)[0] + moments(b)[0], abs=1e-8)


def test_negate_and_shift_examples():
    assert atoms(negate_and_shift(DiscreteDistribution.point_mass(10.0), 0.0)) == {-10.0: 1.0}
    d = DiscreteDistribution.from_atoms({0: 0.5, 10: 0.5})
    assert atoms(negate_and_shift(d, 10.0)) == {0.0: 0.5, 10.0: 0.5}


@settings(max_examples=40, deadline=None)
@given(dist_strategy, st.floats(-1000, 1000))
def test_negate_and_shift_mean(d, delta):
    assert moments(negate_and_shift(d, delta))[0] == pytest.approx(-moments(d)[0] + delta, abs=1e-8)


def test_moments_examples():
    assert moments(DiscreteDistribution.from_atoms({0: 0.5, 10: 0.5})) == pytest.approx((5.0, 5.0))
    assert moments(DiscreteDistribution.point_mass(42.0)) == (42.0, 0.0)


def test_moments_twelve_units_match_enumeration():
    rng = np.random.default_rng(7)
    units = [GenUnit(f"u{i}", float(rng.integers(1, 300)), float(rng.uniform(0.6, 1.0))) for i in range(12)]
    oracle = enumerate_copt(units, 1.0)
    mean = math.fsum(v * p for v, p in oracle.items())
    std = math.sqrt(math.fsum((v - mean) ** 2 * p for v, p in oracle.items()))
    got = moments(build_copt(units))
    assert got[0] == pytest.approx(mean, abs=1e-9)
    assert got[1] == pytest.approx(std, abs=1e-9)


# -- expected_shortfall ------------------------------------------------------

def test_expected_shortfall_examples():
    assert expected_shortfall(DiscreteDistribution.point_mass(100.0), 150) == pytest.approx(50.0)
    d = DiscreteDistribution.from_atoms({0: 0.5, 100: 0.5})
    assert expected_shortfall(d, 50) == pytest.approx(25.0)
    assert expected_shortfall(d, -10) == 0.0
    assert expected_shortfall(d, 0) == 0.0
    with pytest.raises(ValueError):
        expected_shortfall(d, float("nan"))


@settings(max_examples=40, deadline=None)
@given(dist_strategy, st.lists(st.floats(-20, 500), min_size=1, max_size=20))
def test_expected_shortfall_matches_direct_sum(d, levels):
    sup, p = d.support, d.probs
    for x in levels:
        direct = math.fsum(p * np.maximum(x - sup, 0.0))
        assert expected_shortfall(d, x) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(dist_strategy)
def test_expected_shortfall_convex_piecewise_linear(d):
    sup = d.support
    grid = np.arange(sup[0] - 2 * d.step_mw, sup[-1] + 3 * d.step_mw, d.step_mw)
    es = expected_shortfall(d, grid)
    assert np.all(np.diff(es) >= -1e-9)
    assert np.all(np.diff(es, 2) >= -1e-9)
    # Linear between grid points: midpoint equals the chord.
    mids = expected_shortfall(d, grid[:-1] + 0.5 * d.step_mw)
    np.testing.assert_allclose(mids, 0.5 * (es[:-1] + es[1:]), atol=1e-9)


# -- unit CSV -----------------------------------------------------------------

def test_units_csv_round_trip(tmp_path):
    units = [GenUnit("a", 10.0, 0.9), GenUnit("b", 5.5, 0.75)]
    path = tmp_path / "units.csv"
    write_units_csv(units, path)
    assert path.read_text().splitlines()[0] == "name,capacity_mw,availability"
    assert read_units_csv(path) == units


def test_units_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("name,capacity_mw,availability\n")
    with pytest.raises(DataError, match="no units"):
        read_units_csv(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("name,capacity_mw,availability\na,10,0.5\nb,10,1.5\n")
    with pytest.raises(DataError, match=r"bad.csv:3"):
        read_units_csv(bad)
    missing = tmp_path / "missing.csv"
    missing.write_text("name,capacity_mw\na,10\n")
    with pytest.raises(DataError, match="availability"):
        read_units_csv(missing)
