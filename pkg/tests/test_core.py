import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from posdomain.core import (
    ApproxPositiveDomain,
    Box,
    EmptyTarget,
    Interval,
    Label,
    TargetRange,
    VariableSpec,
    shrink_target,
    target_contains,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@st.composite
def intervals(draw):
    a, b = sorted([draw(finite), draw(finite)])
    if a == b:
        return Interval(a, b, True, True)
    return Interval(a, b, draw(st.booleans()), draw(st.booleans()))


class TestInterval:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Interval(1.0, 0.0)
        with pytest.raises(ValueError):
            Interval(1.0, 1.0, True, False)
        assert Interval(1.0, 1.0).contains(1.0)

    def test_infinite_ends_must_be_open(self):
        with pytest.raises(ValueError):
            Interval(-math.inf, 0.0, True, True)
        assert Interval(-math.inf, 0.0, False, True).contains(-1e300)

    @pytest.mark.parametrize(
        "lo_closed,hi_closed,at_lo,at_hi",
        [(True, True, True, True), (False, True, False, True), (True, False, True, False), (False, False, False, False)],
    )
    def test_endpoint_kinds(self, lo_closed, hi_closed, at_lo, at_hi):
        iv = Interval(0.0, 1.0, lo_closed, hi_closed)
        assert iv.contains(0.0) is at_lo
        assert iv.contains(1.0) is at_hi
        assert iv.contains(0.5)
        assert not iv.contains(-0.1)
        assert not iv.contains(1.1)

    @given(intervals(), finite)
    def test_array_membership_matches_scalar(self, iv, x):
        assert bool(iv.contains_array(np.array([x]))[0]) == iv.contains(x)

    @given(intervals(), st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True))
    def test_strict_interior_always_inside(self, iv, u):
        x = iv.lo + u * (iv.hi - iv.lo)
        if iv.lo < x < iv.hi:
            assert iv.contains(x)

    @given(intervals())
    def test_json_round_trip(self, iv):
        assert Interval.from_json(json.loads(json.dumps(iv.to_json()))) == iv

    def test_json_infinity_sentinels(self):
        iv = Interval(-math.inf, 2.0, False, True)
        assert iv.to_json() == {"lo": "-inf", "hi": 2.0, "lo_closed": False, "hi_closed": True}
        assert Interval.from_json(iv.to_json()) == iv


class TestTargetRange:
    def test_closed_endpoint(self):
        assert target_contains(TargetRange.closed(0, 1), 1.0)

    def test_right_open(self):
        t = TargetRange.of(Interval(0.0, 9.0, True, False))
        assert not target_contains(t, 9.0)
        assert target_contains(t, 8.999)

    def test_union_of_mixed_intervals(self):
        t = TargetRange.of(Interval(3.0, 3.5), Interval(5.0, 6.0, True, False))
        assert not target_contains(t, 4.0)
        assert target_contains(t, 3.5)
        assert target_contains(t, 5.0)
        assert not target_contains(t, 6.0)

    def test_sorted_on_construction(self):
        t = TargetRange.of(Interval(5.0, 6.0), Interval(0.0, 1.0))
        assert [iv.lo for iv in t.intervals] == [0.0, 5.0]

    @pytest.mark.parametrize(
        "a,b,merged",
        [
            (Interval(0.0, 1.0), Interval(1.0, 2.0), Interval(0.0, 2.0)),
            (Interval(0.0, 1.0, True, False), Interval(1.0, 2.0), Interval(0.0, 2.0)),
            (Interval(0.0, 1.0), Interval(1.0, 2.0, False, True), Interval(0.0, 2.0)),
        ],
    )
    def test_touching_intervals_merge(self, a, b, merged):
        assert TargetRange.of(b, a).intervals == (merged,)

    def test_open_open_touch_stays_split(self):
        t = TargetRange.of(Interval(0.0, 1.0, True, False), Interval(1.0, 2.0, False, True))
        assert len(t.intervals) == 2
        assert not t.contains(1.0)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            TargetRange.of(Interval(0.0, 2.0), Interval(1.0, 3.0))

    def test_empty_rejected(self):
        with pytest.raises(EmptyTarget):
            TargetRange(())

    def test_unbounded(self):
        t = TargetRange.of(Interval(-math.inf, 0.0, False, False))
        assert t.contains(-1e308) and not t.contains(0.0)
        assert TargetRange.from_json(t.to_json()) == t


class TestShrinkTarget:
    def test_model_error_margin(self):
        t = TargetRange.of(Interval(0.0, 10.0, True, False))
        assert shrink_target(t, 1.0) == TargetRange.of(Interval(0.0, 9.0, True, False))

    def test_zero_margin_identity(self):
        t = TargetRange.closed(0, 1)
        assert shrink_target(t, 0.0) == t
        assert shrink_target(t, 0.0, "both") == t

    def test_both_sides_can_empty(self):
        with pytest.raises(EmptyTarget):
            shrink_target(TargetRange.closed(0, 1), 0.6, "both")

    def test_drops_only_emptied_pieces(self):
        t = TargetRange.of(Interval(0.0, 0.5), Interval(2.0, 5.0))
        assert shrink_target(t, 1.0, "both") == TargetRange.of(Interval(3.0, 4.0))

    def test_infinite_ends_stay(self):
        t = TargetRange.of(Interval(-math.inf, 3.0, False, True))
        assert shrink_target(t, 1.0, "both") == TargetRange.of(Interval(-math.inf, 2.0, False, True))

    def test_negative_margin(self):
        with pytest.raises(ValueError):
            shrink_target(TargetRange.closed(0, 1), -0.1)


def test_variable_spec_rejects_zero_width():
    with pytest.raises(ValueError):
        VariableSpec("x", 1.0, 1.0)


def test_label_serialisation():
    assert [str(l) for l in Label] == ["Inside", "Outside"]
    assert json.dumps(Label.INSIDE) == '"Inside"'


@st.composite
def boxes_and_points(draw, m=3):
    ivs = tuple(draw(intervals()) for _ in range(m))
    pts = draw(st.lists(st.tuples(*[finite] * m), min_size=1, max_size=20))
    return Box(ivs), pts


@given(boxes_and_points())
def test_box_membership_is_conjunction(bp):
    box, pts = bp
    for p in pts:
        assert box.contains(p) == all(iv.contains(x) for iv, x in zip(box.intervals, p))
    assert box.contains_array(np.array(pts)).tolist() == [box.contains(p) for p in pts]


def _apd(boxes):
    vs = (VariableSpec("x1", 0.0, 4.0), VariableSpec("x2", 0.0, 4.0))
    return ApproxPositiveDomain(tuple(boxes), vs, TargetRange.closed(0, 1), 1.0)


def _cells():
    out = []
    for i in range(4):
        for j in range(4):
            if (i + j) % 2 == 0:
                out.append(Box((Interval(i, i + 1, i == 0, True), Interval(j, j + 1, j == 0, True))))
    return out


@given(st.permutations(_cells()), st.lists(st.tuples(st.floats(0, 4), st.floats(0, 4)), min_size=1, max_size=30))
def test_apd_membership_independent_of_box_order(perm, pts):
    a, b = _apd(_cells()), _apd(perm)
    assert [a.contains(p) for p in pts] == [b.contains(p) for p in pts]


def test_apd_rejects_overlapping_boxes():
    with pytest.raises(ValueError):
        _apd([Box((Interval(0, 2), Interval(0, 2))), Box((Interval(1, 3), Interval(1, 3)))])


def test_apd_accepts_boxes_sharing_an_open_face():
    _apd([Box((Interval(0, 1), Interval(0, 1))), Box((Interval(1, 2, False, True), Interval(0, 1)))])


def test_apd_rejects_box_outside_ranges():
    with pytest.raises(ValueError):
        _apd([Box((Interval(-1, 1), Interval(0, 1)))])


def test_apd_json_round_trip():
    apd = _apd(_cells())
    text = json.dumps(apd.to_json())
    assert ApproxPositiveDomain.from_json(json.loads(text)) == apd
    assert set(apd.to_json()) == {"variables", "target", "granularity", "refined", "boxes"}


def test_apd_report_bracket_notation():
    apd = _apd([Box((Interval(0.1, 0.5, False, True), Interval(0.0, 0.3)))])
    assert apd.report() == "x1 ∈ (0.1, 0.5], x2 ∈ [0.0, 0.3]\n"
