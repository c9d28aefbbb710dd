"""End-to-end acceptance gates at full scale.

Each test runs one check from ``beaconsim.acceptance`` and, where the check
summarizes a seeded measurement, also pins the frozen numbers for this
package's seeds so silent behavior drift fails loudly.  The 1000-node mobile
run is computed once per process and shared by the checks that read it.
"""

from __future__ import annotations

import pytest

from beaconsim import acceptance


# ---------------------------------------------------------------------------
# Shared flagship run
# ---------------------------------------------------------------------------


def test_flagship_run_matches_frozen_summary() -> None:
    series = acceptance.flagship_series()
    assert series.n_nodes == 1000
    assert series.levels == 4
    assert series.warmup == 16
    assert len(series.steps) == 34
    assert series.total_delivered() == 2040
    assert series.total_skipped() == 0
    assert series.p95_stretch() == pytest.approx(1.375)
    assert series.max_stretch() == pytest.approx(3.125)


def test_stretch_check_passes() -> None:
    result = acceptance.check_stretch()
    assert result.passed, result.detail
    assert "pooled=2040" in result.detail


def test_route_bound_check_passes() -> None:
    result = acceptance.check_route_bound()
    assert result.passed, result.detail
    assert "0 of 2040" in result.detail


def test_delivery_check_passes() -> None:
    result = acceptance.check_delivery()
    assert result.passed, result.detail
    assert "delivered=2040 of 2040" in result.detail


# ---------------------------------------------------------------------------
# Independent checks
# ---------------------------------------------------------------------------


def test_overhead_check_passes() -> None:
    result = acceptance.check_overhead()
    assert result.passed, result.detail
    assert "R^2" in result.detail


def test_cover_check_reports_zero_violations() -> None:
    result = acceptance.check_cover()
    assert result.passed, result.detail
    assert "0 violations" in result.detail


def test_regimes_check_matches_frozen_means() -> None:
    result = acceptance.check_regimes()
    assert result.passed, result.detail
    assert "10.00 -> 11.80" in result.detail
    assert "9.80 -> 11.00" in result.detail


def test_comb_check_passes() -> None:
    result = acceptance.check_comb()
    assert result.passed, result.detail


def test_smoothness_check_matches_frozen_counts() -> None:
    result = acceptance.check_smoothness()
    assert result.passed, result.detail
    assert result.detail.startswith("1014/1018")


def test_occupancy_check_passes() -> None:
    result = acceptance.check_occupancy()
    assert result.passed, result.detail
    assert result.detail.startswith("100/100")


def test_wall_check_matches_frozen_rates() -> None:
    result = acceptance.check_wall()
    assert result.passed, result.detail
    assert "39%" in result.detail
    assert "100%" in result.detail


# ---------------------------------------------------------------------------
# Runner behavior
# ---------------------------------------------------------------------------


def test_runner_prints_one_line_per_check_and_exits_zero(capsys) -> None:
    code = acceptance.main(["occupancy", "comb"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS  occupancy" in out
    assert "PASS  comb" in out
    assert out.strip().splitlines()[-1] == "2/2 checks passed"


def test_runner_turns_a_crashing_check_into_a_fail_line(monkeypatch) -> None:
    monkeypatch.setitem(acceptance.CHECKS, "boom", lambda: 1 // 0)
    results = acceptance.run_checks(["boom"])
    assert results == [
        acceptance.CheckResult(
            "boom", False, "ZeroDivisionError: integer division or modulo by zero"
        )
    ]


def test_runner_rejects_unknown_names() -> None:
    with pytest.raises(SystemExit):
        acceptance.main(["no-such-check"])
