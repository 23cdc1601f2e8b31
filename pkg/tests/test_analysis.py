"""Verdict-engine tests against closed-form measures.

Oracles: lebesgue tails give exactly (1-t), so the tail ratio at exponent
s is (1-t)^(1-s) with a known log-slope per dyadic level; delta=0 power
laws give exactly constant ratios at the matching exponent; atoms give
exact-zero tails and underflowing moments.  Engine verdicts are checked
against these, never against the engines themselves.
"""

from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesarobench.analysis import (
    COMPACT_SLOPE_THRESHOLD,
    DEADBAND,
    NORM_DEADBAND,
    EquivalenceConfig,
    Prop1Bound,
    Verdict,
    carleson_exponent,
    check_equivalence,
    classify_boundedness,
    classify_carleson,
    classify_compactness,
    classify_moments,
    est_ratio_check,
    evaluate_panel,
    prop1_bound_check,
    reports_to_csv,
    reports_to_json,
)
from cesarobench.measures import Measure, parse_measure
from cesarobench.operators import SectionOp, section_norm
from cesarobench.spaces import SpaceIndex

LEBESGUE = parse_measure("lebesgue")
ATOM_HALF = parse_measure("atom(0.5,1.0)")

# Reduced budgets keep unit tests fast; verdicts at these budgets were
# verified to match the full-budget ones for the measures used here.
FAST_SIZES = tuple(1 << k for k in range(6, 13))
FAST_CONFIG = EquivalenceConfig(
    grid_depth=12,
    n_max=1 << 14,
    sizes=FAST_SIZES,
    compact_size=2048,
    m_list=(16, 32, 64, 128),
)
BOUNDED_OK = Verdict("norm", "bounded", ((1.0, 1.0),), 0.0, 0.0)


class TestCarlesonExponent:
    def test_values(self) -> None:
        assert carleson_exponent(1.0, 1.0) == 1.0
        assert carleson_exponent(0.5, 1.5) == 0.5
        assert carleson_exponent(1.5, 0.5) == 1.5
        assert carleson_exponent(1.2, 0.8) == pytest.approx(1.2, rel=1e-15)

    @given(
        st.floats(min_value=0.01, max_value=1.99),
        st.floats(min_value=0.01, max_value=1.99),
    )
    def test_pair_symmetry(self, alpha: float, beta: float) -> None:
        assert carleson_exponent(alpha, beta) + carleson_exponent(beta, alpha) == 2.0

    @pytest.mark.parametrize("bad", [0.0, 2.0, -0.5, 2.5, math.nan])
    def test_domain(self, bad: float) -> None:
        with pytest.raises(ValueError):
            carleson_exponent(bad, 1.0)
        with pytest.raises(ValueError):
            carleson_exponent(1.0, bad)


class TestClassifyCarleson:
    def test_lebesgue_critical_unit_ratios(self) -> None:
        v = classify_carleson(LEBESGUE, 1.0, grid_depth=16)
        assert v.status == "bounded"
        assert v.kind == "bounded_carleson"
        for _, ratio in v.evidence:
            assert ratio == pytest.approx(1.0, rel=1e-12)
        assert abs(v.fitted_slope) < 1e-10

    def test_lebesgue_supercritical_slope(self) -> None:
        # tail/(1-t)^1.5 = (1-t)^-0.5 doubles every two dyadic levels.
        v = classify_carleson(LEBESGUE, 1.5, grid_depth=20)
        assert v.status == "unbounded"
        assert v.kind == "not_carleson"
        assert v.fitted_slope == pytest.approx(0.5 * math.log(2.0), rel=1e-6)

    def test_lebesgue_subcritical_slope(self) -> None:
        v = classify_carleson(LEBESGUE, 0.5, grid_depth=20)
        assert v.status == "vanishing"
        assert v.kind == "vanishing_carleson"
        assert v.fitted_slope == pytest.approx(-0.5 * math.log(2.0), rel=1e-6)

    def test_power_law_constant_ratio(self) -> None:
        # tail = 2(1-t)^0.5 / 0.5 = 4(1-t)^0.5, so the s=0.5 ratio is 4.
        m = parse_measure("powlaw(c=2.0, gamma=-0.5, delta=0.0)")
        v = classify_carleson(m, 0.5, grid_depth=16)
        assert v.status == "bounded"
        for _, ratio in v.evidence:
            assert ratio == pytest.approx(4.0, rel=1e-11)

    def test_atom_tail_vanishes_exactly(self) -> None:
        v = classify_carleson(ATOM_HALF, 1.0, grid_depth=12)
        assert v.status == "vanishing"
        assert v.fitted_slope == -math.inf
        assert v.evidence[-1][1] == 0.0

    def test_evidence_grid(self) -> None:
        v = classify_carleson(LEBESGUE, 1.0, grid_depth=9)
        assert len(v.evidence) == 9
        assert [p for p, _ in v.evidence] == [1.0 - 2.0**-j for j in range(1, 10)]

    @settings(max_examples=25, deadline=None)
    @given(
        mass=st.floats(min_value=0.1, max_value=8.0),
        t0=st.floats(min_value=0.05, max_value=0.9),
        gamma=st.floats(min_value=-0.9, max_value=2.0),
        s=st.floats(min_value=0.2, max_value=1.8),
    )
    def test_scaling_invariance(
        self, mass: float, t0: float, gamma: float, s: float
    ) -> None:
        # Doubling the measure shifts log-ratios by a constant, so the
        # verdict and fitted slope cannot move.
        m = Measure(atoms=((t0, mass),), densities=((mass, gamma, 0.0),))
        doubled = Measure(
            atoms=((t0, 2.0 * mass),), densities=((2.0 * mass, gamma, 0.0),)
        )
        v1 = classify_carleson(m, s, grid_depth=10)
        v2 = classify_carleson(doubled, s, grid_depth=10)
        assert v1.status == v2.status
        if math.isfinite(v1.fitted_slope):
            assert v2.fitted_slope == pytest.approx(v1.fitted_slope, abs=1e-9)

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            classify_carleson(LEBESGUE, 0.0)
        with pytest.raises(ValueError):
            classify_carleson(LEBESGUE, 1.0, grid_depth=7)


class TestClassifyMoments:
    def test_lebesgue_critical_exact_ones(self) -> None:
        # mu_n = 1/(n+1) makes every normalized moment exactly 1.
        v = classify_moments(LEBESGUE, 1.0, n_max=1 << 12)
        assert v.status == "bounded"
        for _, ratio in v.evidence:
            assert ratio == pytest.approx(1.0, rel=1e-9)

    def test_lebesgue_supercritical_slope(self) -> None:
        v = classify_moments(LEBESGUE, 1.5, n_max=1 << 16)
        assert v.status == "unbounded"
        assert v.fitted_slope == pytest.approx(0.5, abs=1e-3)

    def test_lebesgue_subcritical_slope(self) -> None:
        v = classify_moments(LEBESGUE, 0.5, n_max=1 << 16)
        assert v.status == "vanishing"
        assert v.fitted_slope == pytest.approx(-0.5, abs=1e-3)

    def test_atom_moment_underflow(self) -> None:
        # 0.5^n underflows to exact zero well before n = 2^20.
        v = classify_moments(ATOM_HALF, 1.0)
        assert v.status == "vanishing"
        assert v.fitted_slope == -math.inf

    def test_critical_power_law_limit(self) -> None:
        # For the critical power law the normalized moment converges to
        # Gamma(s); the deepest sample must sit within 1%.
        s = 1.2
        m = parse_measure(f"powlaw(c=1.0, gamma={s - 1.0}, delta=0.0)")
        v = classify_moments(m, s)
        assert v.status == "bounded"
        assert v.evidence[-1][1] == pytest.approx(math.gamma(s), rel=0.01)

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            classify_moments(LEBESGUE, -1.0)
        with pytest.raises(ValueError):
            classify_moments(LEBESGUE, 1.0, n_max=63)


class TestClassifyBoundedness:
    def test_critical_is_bounded(self) -> None:
        v = classify_boundedness(LEBESGUE, 1.0, 1.0, FAST_SIZES)
        assert v.status == "bounded"
        assert v.kind == "bounded_norm"
        assert abs(v.fitted_slope) < NORM_DEADBAND

    def test_unbounded_slope_matches_exponent_gap(self) -> None:
        # s = 1.5 exceeds the critical tail exponent 1 by 0.5, and the
        # section norms grow with that log-log slope.
        v = classify_boundedness(LEBESGUE, 1.5, 0.5, FAST_SIZES)
        assert v.status == "unbounded"
        assert v.kind == "not_norm"
        assert v.fitted_slope == pytest.approx(0.5, abs=0.05)

    def test_atom_plateau(self) -> None:
        v = classify_boundedness(ATOM_HALF, 1.5, 0.5, FAST_SIZES)
        assert v.status == "bounded"
        assert abs(v.fitted_slope) < 1e-6

    def test_vanishing_type_reports_bounded(self) -> None:
        v = classify_boundedness(LEBESGUE, 0.5, 1.5, FAST_SIZES)
        assert v.status == "bounded"

    def test_evidence_is_nondecreasing_profile(self) -> None:
        v = classify_boundedness(LEBESGUE, 1.0, 1.0, FAST_SIZES)
        values = [r for _, r in v.evidence]
        assert len(values) == len(FAST_SIZES)
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-8

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            classify_boundedness(LEBESGUE, 2.5, 1.0, FAST_SIZES)
        with pytest.raises(ValueError):
            classify_boundedness(LEBESGUE, 1.0, 1.0, (64, 64))


class TestClassifyCompactness:
    def test_requires_bounded(self) -> None:
        with pytest.raises(ValueError, match="bounded"):
            classify_compactness(
                LEBESGUE, 1.5, 0.5, 2048, (16, 32, 64, 128),
                boundedness=Verdict("norm", "unbounded", ((1.0, 1.0),), 0.5, 0.0),
            )

    def test_atom_hits_floor(self) -> None:
        v = classify_compactness(
            ATOM_HALF, 1.0, 1.0, 2048, (16, 32, 64, 128), boundedness=BOUNDED_OK
        )
        assert v.status == "vanishing"
        assert v.kind == "compact"
        assert v.fitted_slope == -math.inf

    def test_critical_not_compact(self) -> None:
        v = classify_compactness(
            LEBESGUE, 1.0, 1.0, 2048, (16, 32, 64, 128), boundedness=BOUNDED_OK
        )
        assert v.status == "bounded"
        assert v.kind == "not_compact"
        assert v.fitted_slope > COMPACT_SLOPE_THRESHOLD
        # Tail norms stay comparable to the full norm.
        op = SectionOp(LEBESGUE, SpaceIndex(1.0), SpaceIndex(1.0), 2048)
        full = section_norm(op).value
        assert v.evidence[-1][1] > 0.5 * full

    def test_vanishing_type_compact(self) -> None:
        v = classify_compactness(
            LEBESGUE, 0.5, 1.5, 2048, (16, 32, 64, 128), boundedness=BOUNDED_OK
        )
        assert v.status == "vanishing"
        assert v.kind == "compact"
        assert v.fitted_slope < COMPACT_SLOPE_THRESHOLD

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            classify_compactness(
                LEBESGUE, 1.0, 1.0, 2048, (32, 16), boundedness=BOUNDED_OK
            )
        with pytest.raises(ValueError):
            classify_compactness(
                LEBESGUE, 1.0, 1.0, 2048, (16, 4096), boundedness=BOUNDED_OK
            )
        with pytest.raises(ValueError):
            # Deepest truncation too close to the section size.
            classify_compactness(
                LEBESGUE, 1.0, 1.0, 2048, (16, 512), boundedness=BOUNDED_OK
            )


class TestVerdict:
    def test_kind_mapping(self) -> None:
        ev = ((1.0, 1.0),)
        assert Verdict("carleson", "unbounded", ev, 1.0, 0.0).kind == "not_carleson"
        assert Verdict("moments", "vanishing", ev, -1.0, 0.0).kind == "vanishing_moments"
        assert Verdict("norm", "inconclusive", ev, 0.0, 0.0).kind == "inconclusive_norm"
        assert Verdict("compactness", "vanishing", ev, -1.0, 0.0).kind == "compact"
        assert Verdict("compactness", "bounded", ev, 0.0, 0.0).kind == "not_compact"

    def test_boolean_views(self) -> None:
        ev = ((1.0, 1.0),)
        assert Verdict("carleson", "bounded", ev, 0.0, 0.0).indicates_bounded
        assert Verdict("carleson", "vanishing", ev, -1.0, 0.0).indicates_bounded
        assert not Verdict("carleson", "unbounded", ev, 1.0, 0.0).indicates_bounded
        assert Verdict("carleson", "vanishing", ev, -1.0, 0.0).indicates_vanishing
        assert not Verdict("carleson", "bounded", ev, 0.0, 0.0).indicates_vanishing

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            Verdict("spectral", "bounded", ((1.0, 1.0),), 0.0, 0.0)
        with pytest.raises(ValueError):
            Verdict("carleson", "maybe", ((1.0, 1.0),), 0.0, 0.0)
        with pytest.raises(ValueError):
            Verdict("carleson", "bounded", (), 0.0, 0.0)


class TestCheckEquivalence:
    def test_bounded_entry_full_agreement(self) -> None:
        m = parse_measure("powlaw(c=1.0, gamma=0.0, delta=0.0)")
        rep = check_equivalence(m, 1.0, 1.0, FAST_CONFIG)
        assert rep.s == 1.0
        assert rep.boundedness_agree is True
        assert rep.compactness_agree is True
        assert set(rep.verdicts) == {"carleson", "moments", "norm", "compactness"}
        assert rep.verdicts["compactness"].kind == "not_compact"
        assert rep.warnings == ()
        assert rep.ok

    def test_unbounded_entry(self) -> None:
        rep = check_equivalence(LEBESGUE, 1.5, 0.5, FAST_CONFIG)
        assert rep.boundedness_agree is True
        assert rep.compactness_agree is None
        assert "compactness" not in rep.verdicts
        assert all(not v.indicates_bounded for v in rep.verdicts.values())
        assert rep.ok

    def test_vanishing_entry(self) -> None:
        rep = check_equivalence(ATOM_HALF, 1.0, 1.0, FAST_CONFIG)
        assert rep.boundedness_agree is True
        assert rep.compactness_agree is True
        assert rep.verdicts["compactness"].kind == "compact"

    def test_inconclusive_engine_excluded_with_warning(self, monkeypatch) -> None:
        import cesarobench.analysis as analysis

        def stub(m, s, n_max=1 << 20):
            return Verdict("moments", "inconclusive", ((1.0, 1.0),), 0.0, 1.0)

        monkeypatch.setattr(analysis, "classify_moments", stub)
        rep = check_equivalence(LEBESGUE, 1.0, 1.0, FAST_CONFIG)
        assert rep.boundedness_agree is True
        assert "moments engine inconclusive" in rep.warnings
        assert rep.ok

    def test_disagreement_detected(self, monkeypatch) -> None:
        import cesarobench.analysis as analysis

        def stub(m, s, n_max=1 << 20):
            return Verdict("moments", "unbounded", ((1.0, 1.0),), 1.0, 0.0)

        monkeypatch.setattr(analysis, "classify_moments", stub)
        rep = check_equivalence(LEBESGUE, 1.0, 1.0, FAST_CONFIG)
        assert rep.boundedness_agree is False
        assert not rep.ok


PANEL_ENTRIES = [
    ("lebesgue", LEBESGUE, 1.0, 1.0),
    ("atom_half", ATOM_HALF, 1.0, 1.0),
    ("atom_half", ATOM_HALF, 0.5, 1.5),
]


class TestEvaluatePanel:
    def test_sorted_output(self) -> None:
        shuffled = [PANEL_ENTRIES[2], PANEL_ENTRIES[0], PANEL_ENTRIES[1]]
        named = evaluate_panel(shuffled, FAST_CONFIG)
        keys = [(name, rep.alpha, rep.beta) for name, rep in named]
        assert keys == sorted(keys)

    def test_deterministic_and_thread_invariant(self, monkeypatch) -> None:
        serial = reports_to_json(evaluate_panel(PANEL_ENTRIES, FAST_CONFIG))
        again = reports_to_json(evaluate_panel(PANEL_ENTRIES, FAST_CONFIG))
        assert serial == again
        monkeypatch.setenv("CESARO_THREADS", "3")
        threaded = reports_to_json(evaluate_panel(PANEL_ENTRIES, FAST_CONFIG))
        assert threaded == serial


class TestReportSerialization:
    def test_json_roundtrip_and_nonfinite(self) -> None:
        named = evaluate_panel(PANEL_ENTRIES[:2], FAST_CONFIG)
        doc = json.loads(reports_to_json(named))
        assert doc["all_agree"] is True
        assert len(doc["entries"]) == 2
        atom_entry = next(e for e in doc["entries"] if e["name"] == "atom_half")
        # The atom's carleson slope is -inf and must serialize as a string.
        assert atom_entry["verdicts"]["carleson"]["fitted_slope"] == "-inf"
        leb_entry = next(e for e in doc["entries"] if e["name"] == "lebesgue")
        assert isinstance(leb_entry["verdicts"]["norm"]["fitted_slope"], float)

    def test_csv_shape(self) -> None:
        named = evaluate_panel(PANEL_ENTRIES[:1], FAST_CONFIG)
        lines = reports_to_csv(named).splitlines()
        header = lines[0].split(",")
        assert header[:6] == ["name", "measure", "alpha", "beta", "s", "engine"]
        expected_rows = sum(
            len(v.evidence) for _, rep in named for v in rep.verdicts.values()
        )
        assert len(lines) - 1 == expected_rows


class TestEstRatioCheck:
    def test_closed_forms(self) -> None:
        ts = [0.5, 0.9, 0.99]
        # c = 1 and c = 2 both collapse to rho(t) = t^2.
        for c in (1.0, 2.0):
            lo, hi = est_ratio_check(c, ts, 20000)
            assert lo == pytest.approx(0.25, rel=1e-9)
            assert hi == pytest.approx(0.99**2, rel=1e-9)
        # c = 3: rho(t) = t^2 (1 + t^2).
        lo, hi = est_ratio_check(3.0, ts, 20000)
        assert lo == pytest.approx(0.25 * 1.25, rel=1e-9)
        assert hi == pytest.approx(0.99**2 * (1 + 0.99**2), rel=1e-9)

    def test_stable_under_budget_doubling(self) -> None:
        ts = [0.5, 0.9, 0.99, 0.999]
        for c in (0.25, 0.7, 1.5, 3.5):
            lo, hi = est_ratio_check(c, ts, 100000)
            lo2, hi2 = est_ratio_check(c, ts, 200000)
            assert lo2 == pytest.approx(lo, rel=0.01)
            assert hi2 == pytest.approx(hi, rel=0.01)
            assert 0.0 < lo <= hi < math.inf

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            est_ratio_check(0.0, [0.5], 1000)
        with pytest.raises(ValueError):
            est_ratio_check(1.0, [], 1000)
        with pytest.raises(ValueError):
            est_ratio_check(1.0, [1.0], 1000)
        with pytest.raises(ValueError, match="too small"):
            est_ratio_check(1.0, [0.999], 1000)


class TestProp1BoundCheck:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 1.5, 1.75])
    def test_norm_below_bound(self, alpha: float) -> None:
        result = prop1_bound_check(alpha, 512)
        assert result.section_norm_value <= result.bound + 1e-9
        assert result.bound == pytest.approx(
            math.sqrt(2.0 * (2.0 + alpha)) / alpha, rel=1e-15
        )
        assert result.prefix_max_ratio <= 1.0
        assert result.suffix_max_ratio <= 1.0

    def test_partial_sum_inequality_brute_force(self) -> None:
        # Recompute the cumulative-sum inequality directly for small n.
        alpha = 0.5
        result = prop1_bound_check(alpha, 64)
        worst = 0.0
        for n in range(65):
            lhs = sum((k + 1.0) ** (-(2.0 - alpha) / 2.0) for k in range(n + 1))
            rhs = (2.0 / alpha) * (n + 1.0) ** (alpha / 2.0)
            assert lhs <= rhs
            worst = max(worst, lhs / rhs)
        assert result.prefix_max_ratio == pytest.approx(worst, rel=1e-12)

    def test_tail_sum_inequality_brute_force(self) -> None:
        # Suffix sums plus the integral remainder dominate the true tail.
        alpha = 1.0
        result = prop1_bound_check(alpha, 64)
        bound = (2.0 + alpha) / alpha
        # k = 0 is the worst index: the sum is a zeta-like tail.
        lhs = sum((n + 1.0) ** (-(2.0 + alpha) / 2.0) for n in range(200000))
        assert lhs <= bound
        assert result.suffix_max_ratio <= 1.0
        assert result.suffix_max_ratio == pytest.approx(lhs / bound, rel=1e-2)

    def test_tuple_unpacking(self) -> None:
        value, bound = prop1_bound_check(1.0, 128)
        assert isinstance(value, float)
        assert value <= bound

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            prop1_bound_check(0.0)
        with pytest.raises(ValueError):
            prop1_bound_check(2.0)
        with pytest.raises(ValueError):
            prop1_bound_check(1.0, 0)
