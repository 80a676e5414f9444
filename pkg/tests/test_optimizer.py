import numpy as np
import pytest

from gicreg.frontier import Frontier, dominates
from gicreg.model import ChannelParams
from gicreg.optimizer import GridSpec, SearchBudget, default_values, grid_search, parse_range, random_refine_search
from gicreg.schemes import ArmaSchemeParams, SasonParams, get_scheme, reevaluate, sason_rates, theorem3_rates


class TestParseRange:
    def test_inclusive(self):
        np.testing.assert_array_equal(parse_range("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])

    def test_clean_values(self):
        v = parse_range("0:1:0.01")
        assert len(v) == 101 and v[7] == 0.07 and v[-1] == 1.0

    def test_single(self):
        assert parse_range("0.3").tolist() == [0.3]

    @pytest.mark.parametrize("bad", ["0:1", "0:1:0", "1:0:0.1", "a:b:c", "0:1:-0.1"])
    def test_bad(self, bad):
        with pytest.raises(ValueError):
            parse_range(bad)


class TestGridSpec:
    def test_defaults(self):
        g = GridSpec.default("arma")
        assert len(g.values["alpha"]) == 101
        rho = np.array(g.values["rho_x1"])
        assert 0.0 in rho and rho.min() == -0.99 and rho.max() == 0.99
        assert np.all(np.abs(np.diff(rho)[1:-1] - 0.02) < 1e-12)

    def test_prefix_fix(self):
        g = GridSpec.default("arma", fixed={"rho": 0, "kappa1": 0.5})
        assert g.values["rho_x1"] == (0.0,) and g.values["rho_x2"] == (0.0,)
        assert g.values["kappa1"] == (0.5,) and len(g.values["kappa2"]) > 1

    def test_exact_name_beats_prefix(self):
        g = GridSpec.default("arma", fixed={"rho": 0, "rho_x2": 0.3})
        assert g.values["rho_x1"] == (0.0,) and g.values["rho_x2"] == (0.3,)

    def test_outside_support(self):
        with pytest.raises(ValueError):
            GridSpec.default("arma", fixed={"rho_x1": 1.0})
        with pytest.raises(ValueError):
            GridSpec.default("sason", ranges={"alpha": [0.5, 1.5]})

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            GridSpec("sason", {"alpha": [0.5], "beta": [0.5]})
        with pytest.raises(ValueError):
            GridSpec.default("sason", fixed={"rho": 0.1})

    def test_empty(self):
        with pytest.raises(ValueError):
            GridSpec("sason", {"alpha": [], "beta": [0.5], "lambda": [0.5]})

    def test_scheme_mismatch(self):
        g = GridSpec.default("sason", 0.5)
        with pytest.raises(ValueError):
            grid_search(ChannelParams(1, 1, 1, 1), "hk-baseline", g)

    def test_default_values_closed(self):
        sd = get_scheme("theorem2")
        v = default_values(sd, 3)
        assert v[0] == -0.5 and v[-1] == 0.5


class TestGridSearch:
    def test_single_point(self, fig_ch):
        g = GridSpec("sason", {"alpha": [0.3], "beta": [0.6], "lambda": [0.4]})
        fr = grid_search(fig_ch, "sason", g)
        r = sason_rates(fig_ch, SasonParams(0.3, 0.6, 0.4))
        assert fr.as_array().tolist() == [[r.r1, r.r2]]

    def test_subgrid_monotone(self, fig_ch):
        big = grid_search(fig_ch, "sason", GridSpec.default("sason", 0.05))
        small = grid_search(fig_ch, "sason", GridSpec.default("sason", 0.1))
        assert dominates(big, small, 0.0)

    def test_batching_does_not_change_result(self, fig_ch):
        g = GridSpec.default("arma", 0.25, fixed={"rho_x2": 0.3, "kappa": 0.2}, ranges={"rho_x1": [-0.5, 0.0, 0.5]})
        a = grid_search(fig_ch, "arma", g)
        b = grid_search(fig_ch, "arma", g, batch=7, threads=2)
        np.testing.assert_array_equal(a.as_array(), b.as_array())
        assert a.provenance == b.provenance

    def test_zero_filter_slice_equals_white(self, fig_ch):
        a = grid_search(fig_ch, "arma", GridSpec.default("arma", 0.05, fixed={"rho": 0, "kappa": 0}))
        b = grid_search(fig_ch, "sason", GridSpec.default("sason", 0.05))
        np.testing.assert_allclose(a.as_array(), b.as_array(), rtol=0, atol=1e-12)

    def test_provenance_reevaluates(self, fig_ch):
        g = GridSpec.default("arma", 0.25, open_step=0.45)
        fr = grid_search(fig_ch, "arma", g)
        for p in fr.points[:: max(1, len(fr) // 15)]:
            q = reevaluate(fig_ch, p)
            assert abs(q.r1 - p.r1) <= 1e-12 and abs(q.r2 - p.r2) <= 1e-12
            a = p.params
            t = theorem3_rates(
                fig_ch,
                ArmaSchemeParams.first_order(a["alpha"], a["beta"], a["lambda"], a["rho_x1"], a["rho_x2"], a["kappa1"], a["kappa2"]),
            )
            assert abs(t.r1 - p.r1) <= 1e-12 and abs(t.r2 - p.r2) <= 1e-12

    def test_pentagon_corners_contributed(self):
        ch = ChannelParams(6, 1, 2, 0)
        vals = {n: [0.0] for n in get_scheme("hk-sim").names}
        vals.update(alpha=[1.0], beta=[1.0], **{"lambda": [1.0]})
        fr = grid_search(ch, "hk-sim", GridSpec("hk-sim", vals))
        tags = sorted(p["tag"] for p in fr.provenance)
        assert tags == ["sim-r1", "sim-r2"]
        assert fr.r2.max() == pytest.approx(0.5)


class TestRandomSearch:
    def test_budget_validation(self):
        with pytest.raises(ValueError):
            SearchBudget(0)
        with pytest.raises(ValueError):
            SearchBudget(10, refinement_rounds=-1)
        with pytest.raises(ValueError):
            SearchBudget(10, seed=-1)

    def test_single_point_reproducible(self, fig_ch):
        a = random_refine_search(fig_ch, "arma", SearchBudget(1, seed=5, refinement_rounds=0))
        b = random_refine_search(fig_ch, "arma", SearchBudget(1, seed=5, refinement_rounds=0))
        assert len(a) == 1
        np.testing.assert_array_equal(a.as_array(), b.as_array())
        assert a.provenance == b.provenance

    def test_deterministic_across_threads(self, fig_ch):
        b = SearchBudget(3000, seed=11, refinement_rounds=2)
        x = random_refine_search(fig_ch, "hk-corollary", b, threads=1)
        y = random_refine_search(fig_ch, "hk-corollary", b, threads=3, batch=500)
        np.testing.assert_array_equal(x.as_array(), y.as_array())
        assert x.provenance == y.provenance

    def test_prefix_monotone(self, fig_ch):
        small = random_refine_search(fig_ch, "arma", SearchBudget(500, seed=2, refinement_rounds=0))
        big = random_refine_search(fig_ch, "arma", SearchBudget(1000, seed=2, refinement_rounds=0))
        assert dominates(big, small, 0.0)

    def test_fixed_and_support(self, fig_ch):
        fr = random_refine_search(fig_ch, "hk-sc", SearchBudget(2000, seed=1), fixed={"rho": 0.0, "xi2": 0.5})
        for p in fr.provenance:
            prm = p["params"]
            assert prm["xi2"] == 0.5
            assert all(prm[k] == 0.0 for k in prm if k.startswith("rho"))
            assert all(0 <= prm[k] <= 1 for k in ("alpha", "beta", "lambda", "xi1"))

    def test_anchor_box(self, fig_ch):
        anchor = {"kappa1": 0.2605, "kappa2": 0.9801, "rho_x1": 0.7425, "rho_x2": 0.4950}
        fr = random_refine_search(fig_ch, "arma", SearchBudget(400, seed=3, refinement_rounds=1), anchor=anchor)
        for p in fr.provenance:
            for k, v in anchor.items():
                assert abs(p["params"][k] - v) <= 0.5 + 1e-12

    def test_provenance_round_trip(self, fig_ch):
        fr = random_refine_search(fig_ch, "hk-corollary", SearchBudget(1000, seed=9, refinement_rounds=1))
        for p in fr.points:
            q = reevaluate(fig_ch, p)
            assert abs(q.r1 - p.r1) <= 1e-12 and abs(q.r2 - p.r2) <= 1e-12
