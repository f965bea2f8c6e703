import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import degrid_naive, dilation_naive, hilbert_forward, morton_forward, zigzag_forward
from sfc.curves import CurveKind, generalized_hilbert, square_map
from sfc.errors import ConfigurationError, DegenerateInputError, DomainError
from sfc.metrics import (
    default_thresholds,
    degrid,
    dilation,
    full_preservation_threshold,
    hierarchy_check,
    pair_family_trace,
    parse_dyadic,
    preservation_sweep,
    scale_trace,
    sweep_table,
    theoretical_bound,
)

HF, MF, ZF = CurveKind.HILBERT, CurveKind.MORTON, CurveKind.ZIGZAG


# -- DeGrid ----------------------------------------------------------------


def test_degrid_zigzag_interior_k1():
    fld = degrid(square_map(ZF, 3), 1)
    assert fld.values[3] == 1.0
    assert fld.values[10] == 1.0


def test_degrid_zigzag_row_end():
    fld = degrid(square_map(ZF, 3), 1)
    assert fld.values[7] == pytest.approx((1 + math.sqrt(50)) / 2)
    assert fld.values[7] == pytest.approx(4.0355, abs=5e-5)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_degrid_hilbert_k1_is_one(n):
    vals = degrid(square_map(HF, n), 1).values
    assert np.all(vals == 1.0)


def test_degrid_positive_and_length():
    for kind in (HF, MF, ZF):
        fld = degrid(square_map(kind, 4), 3)
        assert len(fld) == 256
        assert np.all(fld.values >= 1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize(
    "kind,oracle", [(HF, hilbert_forward), (MF, morton_forward), (ZF, zigzag_forward)]
)
def test_degrid_matches_naive_loop(kind, oracle, n, k):
    cells = oracle(n)
    for squared in (False, True):
        fast = degrid(square_map(kind, n), k, squared=squared).values
        assert fast.tolist() == degrid_naive(cells, k, squared)


def test_degrid_generalized_map():
    cm = generalized_hilbert(7, 5)
    cells = [tuple(c) for c in cm.forward.tolist()]
    assert degrid(cm, 2).values.tolist() == degrid_naive(cells, 2)


def test_degrid_errors():
    with pytest.raises(DomainError):
        degrid(square_map(HF, 2), 0)
    with pytest.raises(DegenerateInputError):
        degrid(generalized_hilbert(1, 1), 1)


def test_degrid_heatmap_levels():
    fld = degrid(square_map(ZF, 3), 2)
    hm = fld.heatmap()
    assert hm.shape == (8, 8)
    assert hm.max() == 255
    # row-end cells are the brightest
    assert hm[0, 7] == 255


# -- preservation ------------------------------------------------------------


def test_sweep_brackets():
    fld = degrid(square_map(MF, 3), 2)
    lo, hi = float(fld.values.min()), float(fld.values.max())
    rows = preservation_sweep(fld, [lo * 0.5, hi])
    assert rows[0][1] == 0.0
    assert rows[1][1] == 100.0


def test_sweep_monotone_default_thresholds():
    fields = {k: degrid(square_map(k, 3), 2) for k in (HF, MF, ZF)}
    th = default_thresholds(fields.values())
    assert len(th) == 64
    rows = sweep_table(fields, th)
    for col in (1, 2, 3):
        pct = [r[col] for r in rows]
        assert pct == sorted(pct)
        assert pct[0] == 0.0 and pct[-1] == 100.0


def test_sweep_counts_exact():
    fld = degrid(square_map(ZF, 3), 1)
    # the 14 positions at row ends and row starts sit above 1, the rest are exactly 1
    (eps, pct), = preservation_sweep(fld, [1.0])
    assert pct == pytest.approx(100.0 * 50 / 64)


def test_sweep_errors():
    fld = degrid(square_map(HF, 2), 1)
    with pytest.raises(DomainError):
        preservation_sweep(fld, [])
    with pytest.raises(DomainError):
        preservation_sweep(fld, [0.5, 0.0])
    with pytest.raises(DomainError):
        preservation_sweep(fld, [-1.0])


def test_full_threshold_ordering_8x8():
    fields = {k: degrid(square_map(k, 3), 2) for k in (HF, MF, ZF)}
    full = {k: full_preservation_threshold(f) for k, f in fields.items()}
    assert full[HF] < full[MF] and full[HF] < full[ZF]


# -- dilation ------------------------------------------------------------------


def test_dilation_zigzag_order2():
    rep = dilation(square_map(ZF, 2), "all_pairs")
    assert rep.empirical_max == 10.0
    assert rep.argmax_pair == (3, 4)
    assert rep.theoretical_bound == 10.0


def test_dilation_morton_order3():
    rep = dilation(square_map(MF, 3), "all_pairs")
    assert rep.empirical_max == 50.0
    assert rep.argmax_pair == (31, 32)
    assert rep.metadata["table_expression"] == "2^n - 2^-n"


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_dilation_hilbert_bounded(n):
    rep = dilation(square_map(HF, n), "all_pairs")
    assert 0 < rep.empirical_max <= 6.0
    d1, d2 = rep.argmax_pair
    assert 0 <= d1 < d2 < 4**n


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize(
    "kind,oracle", [(HF, hilbert_forward), (MF, morton_forward), (ZF, zigzag_forward)]
)
def test_dilation_matches_pair_oracle(kind, oracle, n):
    best, pair = dilation_naive(oracle(n), n)
    rep = dilation(square_map(kind, n), "all_pairs")
    assert rep.empirical_max_exact == best
    assert rep.argmax_pair == pair


def test_dilation_adjacent_mode():
    rep = dilation(square_map(HF, 6), "adjacent_only", window=64)
    assert rep.mode == "adjacent_only" and rep.window == 64
    assert rep.empirical_max <= 6.0
    assert dilation(square_map(ZF, 6), "adjacent").empirical_max == theoretical_bound(ZF, 6)


def test_dilation_configuration_errors():
    with pytest.raises(ConfigurationError):
        dilation(square_map(HF, 6), "all_pairs")
    with pytest.raises(ConfigurationError):
        dilation(square_map(HF, 2), "bogus")
    with pytest.raises(ConfigurationError):
        dilation(generalized_hilbert(8, 8), "all_pairs")


def test_dilation_report_json_fields():
    d = dilation(square_map(MF, 2)).to_dict()
    assert set(d) >= {"kind", "order", "empirical_max", "argmax_pair", "theoretical_bound"}
    assert d["kind"] == "morton"


# -- scale traces --------------------------------------------------------------


def test_scale_trace_hilbert_endpoints_converge():
    n_max = 10
    tr = scale_trace(HF, 0, Fraction(4**n_max - 1, 4**n_max), 1, n_max)
    assert len(tr.ratios) == n_max - 1
    dev = [abs(r - 1) for r in tr.ratios]
    assert all(b < a for a, b in zip(dev[1:], dev[2:]))
    assert dev[-1] < 0.01


def test_scale_trace_single_order():
    tr = scale_trace(ZF, Fraction(1, 4), Fraction(3, 4), 3, 3)
    assert len(tr.distances) == 1 and tr.ratios == []


def test_scale_trace_errors():
    with pytest.raises(DegenerateInputError):
        scale_trace(HF, Fraction(1, 4), Fraction(1, 4), 1, 3)
    with pytest.raises(DomainError):
        scale_trace(ZF, Fraction(1, 3), Fraction(1, 2), 1, 4)
    with pytest.raises(DomainError):
        scale_trace(HF, 0, 1, 0, 3)
    with pytest.raises(DomainError):
        parse_dyadic("abc", 3)
    with pytest.raises(DomainError):
        parse_dyadic(Fraction(5, 4), 3)


def test_scale_trace_coarse_collision():
    # both parameters land in the same cell at order 1
    tr = scale_trace(HF, Fraction(0), Fraction(1, 16), 1, 2)
    assert tr.distances[0] == 0.0
    assert tr.ratios == [0.0]
    tr = scale_trace(HF, Fraction(1, 16), Fraction(0), 2, 2)
    assert tr.distances[0] > 0


def test_pair_family_zigzag_closed_form():
    tr = pair_family_trace(ZF, 1, 8)
    for n, v in zip(tr.orders, tr.normalized):
        assert v == pytest.approx(4**n - 2 ** (n + 1) + 2, rel=1e-12)
    assert tr.growth[-1] == pytest.approx(4.0, abs=0.05)


def test_pair_family_hilbert_bounded():
    tr = pair_family_trace(HF, 1, 10)
    assert max(tr.normalized) <= 6.0


# -- hierarchy -----------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 8))
def test_hierarchy(n):
    assert hierarchy_check(HF, n) == 0
    assert hierarchy_check(MF, n) == 0
    assert hierarchy_check(ZF, n) > 0


def test_hierarchy_errors():
    with pytest.raises(DomainError):
        hierarchy_check(HF, 0)
    with pytest.raises(ConfigurationError):
        hierarchy_check("ghilbert", 2)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), data=st.data())
def test_hierarchy_nesting_property(n, data):
    from sfc.curves import hilbert_xy2d, morton_xy2d

    side = 2 ** (n + 1)
    x = data.draw(st.integers(0, side - 1))
    y = data.draw(st.integers(0, side - 1))
    for fn in (hilbert_xy2d, morton_xy2d):
        assert fn(n + 1, (x, y)) // 4 == fn(n, (x // 2, y // 2))
