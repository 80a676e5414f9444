import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gicreg.frontier import (
    AXIS,
    Frontier,
    convex_hull,
    corner_query,
    dominates,
    envelope,
    excess,
    insert,
    max_violation,
    merge,
    pareto_mask,
    read_csv,
    witness_margin,
)
from gicreg.model import RatePair

rate = st.floats(0, 10, allow_nan=False)
points = st.lists(st.tuples(rate, rate), min_size=1, max_size=25)


def P(r1, r2, tag=None):
    return RatePair(r1, r2, {"scheme": "test", "params": {"i": tag}})


def F(pts):
    return Frontier.from_points([P(a, b, i) for i, (a, b) in enumerate(pts)])


class TestInsert:
    def test_into_empty(self):
        assert F([]).__len__() == 0
        fr = insert(Frontier.empty(), P(1, 1))
        assert fr.as_array().tolist() == [[1, 1]]

    def test_dominated(self):
        fr = insert(F([(1, 1)]), P(0.5, 0.5))
        assert fr.as_array().tolist() == [[1, 1]]

    def test_incomparable(self):
        fr = insert(F([(1, 1)]), P(2, 0.5))
        assert fr.as_array().tolist() == [[1, 1], [2, 0.5]]

    def test_removes_dominated_incumbents(self):
        fr = insert(F([(1, 1), (2, 0.5)]), P(3, 3))
        assert fr.as_array().tolist() == [[3, 3]]

    def test_tie_keeps_earliest(self):
        fr = insert(F([(1, 1)]), P(1, 1, "late"))
        assert fr.provenance[0]["params"]["i"] == 0

    @given(points, st.randoms(use_true_random=False))
    def test_order_insensitive(self, pts, rnd):
        a = F(pts)
        shuffled = list(pts)
        rnd.shuffle(shuffled)
        b = Frontier.empty()
        for x, y in shuffled:
            b = insert(b, P(x, y))
        np.testing.assert_array_equal(a.as_array(), b.as_array())

    @given(points)
    def test_invariants(self, pts):
        fr = F(pts)
        r1, r2 = fr.r1, fr.r2
        assert np.all(np.diff(r1) > 0) and np.all(np.diff(r2) < 0)
        arr = np.array(pts)
        # every input point is weakly dominated by a frontier point
        for x, y in arr:
            assert np.any((r1 >= x) & (r2 >= y))

    def test_pareto_mask(self):
        m = pareto_mask(np.array([1.0, 0.5, 2.0, 1.0]), np.array([1.0, 0.5, 0.5, 1.0]))
        assert m.tolist() == [True, False, True, False]

    def test_immutable(self):
        fr = F([(1, 1)])
        with pytest.raises(ValueError):
            fr.r1[0] = 3

    def test_merge_associative(self, rng):
        a, b, c = (F(rng.random((20, 2))) for _ in range(3))
        x = merge(merge(a, b), c).as_array()
        y = merge(a, merge(b, c)).as_array()
        np.testing.assert_array_equal(x, y)


class TestHull:
    def test_time_sharing(self):
        h = convex_hull(F([(1, 0), (0, 1)]))
        assert corner_query(h, 0.5) == pytest.approx(0.5)

    def test_single_point(self):
        h = convex_hull(F([(1, 2)]))
        assert h.as_array().tolist() == [[1, 2]]
        hx, hy = envelope(F([(1, 2)]))
        assert (hx[0], hy[0]) == (0, 2) and (hx[-1], hy[-1]) == (1, 0)

    def test_chord(self):
        h = convex_hull(F([(1, 1), (2, 0.5), (1.5, 0.9)]))
        assert [1.5, 0.9] in h.as_array().tolist()
        h = convex_hull(F([(1, 1), (2, 0.5), (1.5, 0.7)]))
        assert [1.5, 0.7] not in h.as_array().tolist()

    @given(points)
    def test_idempotent_and_dominating(self, pts):
        fr = F(pts)
        h = convex_hull(fr)
        np.testing.assert_array_equal(convex_hull(h).as_array(), h.as_array())
        assert dominates(h, fr, 0.0)

    @given(points)
    def test_concave(self, pts):
        h = convex_hull(F(pts)).as_array()
        if len(h) >= 3:
            s = np.diff(h[:, 1]) / np.diff(h[:, 0])
            assert np.all(np.diff(s) <= 1e-9)

    def test_axis_provenance(self):
        h = convex_hull(F([(1, 1), (3, 0.1)]))
        assert all(p["scheme"] in ("test", AXIS) for p in h.provenance)

    def test_empty(self):
        with pytest.raises(ValueError):
            convex_hull(Frontier.empty())


class TestDominance:
    def test_identical(self):
        a = F([(1, 2), (2, 1)])
        assert dominates(a, a, 0.0)

    def test_scaled(self):
        b = F([(1, 2), (2, 1), (1.6, 1.5)])
        a = Frontier.from_arrays(b.r1 * 1.01, b.r2 * 1.01)
        assert dominates(a, b) and not dominates(b, a)

    def test_slack(self):
        a = F([(1, 1)])
        b = F([(1, 1.02)])
        assert not dominates(a, b, 0.01)
        assert dominates(a, b, 0.03)
        assert max_violation(a, b) == pytest.approx(0.02, abs=1e-9)

    def test_uses_interpolation(self):
        a = F([(0, 1), (1, 0)])
        assert dominates(a, F([(0.5, 0.5)]))
        assert not dominates(a, F([(0.5, 0.51)]))

    @given(points, points, points)
    def test_transitive(self, x, y, z):
        a, b, c = F(x), F(y), F(z)
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)

    def test_excess(self):
        a = F([(1, 1)])
        np.testing.assert_allclose(excess(a, np.array([[0.5, 0.5], [1.2, 1.0], [2, 2]])), [0, 0.2, 1.0], atol=1e-12)

    def test_negative_slack(self):
        with pytest.raises(ValueError):
            dominates(F([(1, 1)]), F([(1, 1)]), -1)


class TestCorner:
    def test_rectangle(self):
        assert corner_query(F([(1, 1)]), 0.5) == 1.0

    def test_infeasible(self):
        assert corner_query(F([(1, 1)]), 1.5) == 0.0

    def test_hull_chord(self):
        assert corner_query(convex_hull(F([(1, 1), (2, 0)])), 0.5) == pytest.approx(1.5)

    def test_witness_margin(self):
        base = F([(0, 1), (1, 0)])
        assert witness_margin(base, (0.5, 0.6)) == pytest.approx(0.1)
        assert witness_margin(base, (0.2, 0.9)) == pytest.approx(0.1)
        assert witness_margin(base, (0.3, 0.3)) < 0
        assert witness_margin(F([(1, 1)]), (1.0, 1.3)) == pytest.approx(1.0)


class TestIO:
    def test_csv_format(self, tmp_path):
        fr = F([(0.1234567890123456, 2.0), (1 / 3, 1.0)])
        text = fr.to_csv()
        assert text.splitlines()[0] == "r1,r2"
        assert text.splitlines()[1] == "0.123456789012,2"
        assert "\r" not in text and text.endswith("\n")
        p = tmp_path / "f.csv"
        fr.write_csv(p)
        assert p.read_bytes() == text.encode()
        back = read_csv(p)
        assert dominates(back, fr, 1e-11) and dominates(fr, back, 1e-11)

    def test_json(self):
        fr = Frontier.from_points([RatePair(1, 2, {"scheme": "sason", "params": {"alpha": 0.5}})])
        data = json.loads(fr.to_json())
        assert data == [{"r1": 1.0, "r2": 2.0, "scheme": "sason", "params": {"alpha": 0.5}}]

    @pytest.mark.parametrize(
        "text", ["", "a,b\n1,2\n", "r1,r2\n1\n", "r1,r2\nx,1\n", "r1,r2\n-1,2\n", "r1,r2\n", "r1,r2\nnan,1\n"]
    )
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            read_csv(text, is_text=True)
