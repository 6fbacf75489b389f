"""Inaccessibility worst cases and trace-side accounting."""

import itertools
import random

import pytest

from wnslab.channels import SwitchConfig
from wnslab.inaccess import (DEFAULT_SWITCH_MODEL, AccountVerdict, InaPeriod,
                             InaScenario, MacParams, SwitchModel, account,
                             beacon_interval, extract_periods, worst_case)
from wnslab.model import WnSParams
from wnslab.trace import TraceError, TraceRecord

from oracles import window_scan_oracle


def trace_with_periods(periods):
    records = []
    index = 0
    for start, end in periods:
        records.append(TraceRecord(index, start, "InaccessStart", {"cause": "injected"}))
        records.append(TraceRecord(index + 1, end, "InaccessEnd", {"cause": "injected"}))
        index += 2
    return records


def budget(i, tau_ina, window=10000):
    return WnSParams(omission_bound=3, max_inaccess=i, failed_channels=2,
                     consecutive_bound=3, observation_window=window,
                     tx_delay=1000, inaccess_budget=tau_ina)


class TestBeaconInterval:
    def test_order_zero_is_base_superframe(self):
        assert beacon_interval(MacParams(beacon_order=0)) == 960

    def test_max_order(self):
        assert beacon_interval(MacParams(beacon_order=14)) == 960 * 2 ** 14 == 15_728_640

    def test_doubling_law(self):
        for bo in range(14):
            assert beacon_interval(MacParams(beacon_order=bo + 1)) == \
                2 * beacon_interval(MacParams(beacon_order=bo))

    def test_strictly_increasing(self):
        values = [beacon_interval(MacParams(beacon_order=bo)) for bo in range(15)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_order_bounds_enforced(self):
        with pytest.raises(ValueError):
            MacParams(beacon_order=15)
        with pytest.raises(ValueError):
            MacParams(beacon_order=3, superframe_order=4)


class TestWorstCase:
    def test_beacon_loss_formula(self):
        p = MacParams(beacon_order=6, max_lost_beacons=4)
        assert worst_case(InaScenario.BEACON_LOSS, p, mitigated=False) == 245_760

    def test_mitigated_strictly_below_unmitigated_everywhere(self):
        for bo, mlb, scan in itertools.product(range(15), (1, 2, 4, 8), (2, 8, 16)):
            p = MacParams(beacon_order=bo, max_lost_beacons=mlb,
                          scan_channels=scan)
            for scenario in InaScenario:
                unmit = worst_case(scenario, p, mitigated=False)
                mit = worst_case(scenario, p, mitigated=True)
                assert mit < unmit, (scenario, bo, mlb, scan)

    def test_switch_blackout_equals_channel_layer_formula(self):
        p = MacParams(beacon_order=3)
        cfg = SwitchConfig(silence_timeout=2400, beacon_wait=2600,
                           beacon_cadence=1200, announce_repeats=3, hop_time=20)
        model = SwitchModel(config=cfg, failed_channels=2, omission_bound=2)
        assert worst_case(InaScenario.CHANNEL_SWITCH_BLACKOUT, p, False, model) \
            == cfg.worst_case_switch(2)

    def test_sync_loss_scan_term(self):
        p = MacParams(beacon_order=0, max_lost_beacons=2,
                      scan_duration_per_channel=500, scan_channels=4)
        assert worst_case(InaScenario.SYNC_LOSS_REJOIN, p, False) == \
            2 * 960 + 4 * 500 + 960
        assert worst_case(InaScenario.SYNC_LOSS_REJOIN, p, True) == \
            2 * 960 + 500 + 960


class TestExtractPeriods:
    def test_pairs_in_order(self):
        records = trace_with_periods([(10, 50), (100, 130)])
        periods = extract_periods(records)
        assert [(p.start, p.end) for p in periods] == [(10, 50), (100, 130)]

    def test_unbalanced_start_rejected(self):
        records = trace_with_periods([(10, 50)])[:1]
        with pytest.raises(TraceError):
            extract_periods(records)

    def test_end_without_start_rejected(self):
        rec = TraceRecord(0, 5, "InaccessEnd", {"cause": "injected"})
        with pytest.raises(TraceError):
            extract_periods([rec])


class TestAccount:
    def test_fault_free_trace_holds(self):
        verdict = account([], budget(i=1, tau_ina=1000))
        assert verdict.ok and verdict.periods == ()

    def test_count_breach_reports_window(self):
        records = trace_with_periods([(100, 200), (300, 400)])
        verdict = account(records, budget(i=1, tau_ina=1000))
        assert not verdict.ok
        assert verdict.worst_count == 2
        assert verdict.worst_window_start == 100

    def test_duration_breach(self):
        records = trace_with_periods([(0, 900), (2000, 2500)])
        verdict = account(records, budget(i=3, tau_ina=1000))
        assert not verdict.ok
        assert verdict.worst_duration == 1400

    def test_spread_periods_hold(self):
        records = trace_with_periods([(0, 100), (50_000, 50_100)])
        assert account(records, budget(i=1, tau_ina=1000)).ok

    def test_randomized_schedules_match_window_scan_oracle(self):
        rng = random.Random(61)
        for _ in range(60):
            t = 0
            periods = []
            for _ in range(rng.randrange(0, 12)):
                t += rng.randrange(50, 4000)
                dur = rng.randrange(1, 800)
                periods.append((t, t + dur))
                t += dur
            window = rng.randrange(500, 8000)
            i_budget = rng.randrange(0, 4)
            d_budget = rng.randrange(100, 2000)
            params = budget(i=i_budget, tau_ina=d_budget, window=window)
            verdict = account(trace_with_periods(periods), params)
            starts = [s for s, _ in periods]
            durs = [e - s for s, e in periods]
            count, total = window_scan_oracle(starts, durs, window)
            expected_ok = count <= i_budget and total <= d_budget
            assert verdict.ok == expected_ok, (periods, window, i_budget, d_budget)
