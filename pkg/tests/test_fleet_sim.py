import math

import pytest

from nsx.pool import FleetSimConfig, FleetSimReport, simulate_fleet

HOUR = 3600.0
DAY = 86400.0


class TestSimulateFleet:
    def test_zero_eviction_rate_full_availability(self):
        cfg = FleetSimConfig(fleet_size=5, eviction_rate_per_hour=0.0, horizon_s=30 * DAY, seed=1)
        report = simulate_fleet(cfg)
        assert report.eviction_count == 0
        assert report.mean_availability == 1.0
        assert report.fraction_of_time_below(0.8) == 0.0
        assert report.timeline == ((0.0, 1.0),)

    def test_no_replacement_decays_to_zero(self):
        # startup as long as the horizon: evicted capacity never comes back
        cfg = FleetSimConfig(
            fleet_size=6,
            eviction_rate_per_hour=1.0,  # MTBF 1h << 10-day horizon
            startup_min_s=10 * DAY,
            startup_max_s=10 * DAY,
            horizon_s=10 * DAY,
            seed=3,
        )
        report = simulate_fleet(cfg)
        assert report.eviction_count == 6
        assert report.timeline[-1][1] == 0.0
        assert report.fraction_of_time_below(0.01) > 0.9

    def test_seed_reproducibility(self):
        cfg = FleetSimConfig(fleet_size=8, eviction_rate_per_hour=0.05, horizon_s=90 * DAY, seed=77)
        a = simulate_fleet(cfg)
        b = simulate_fleet(cfg)
        assert a == b

    def test_different_seed_differs(self):
        base = dict(fleet_size=8, eviction_rate_per_hour=0.05, horizon_s=90 * DAY)
        a = simulate_fleet(FleetSimConfig(seed=1, **base))
        b = simulate_fleet(FleetSimConfig(seed=2, **base))
        assert a.timeline != b.timeline

    def test_capacity_fraction_bounds(self):
        cfg = FleetSimConfig(fleet_size=4, eviction_rate_per_hour=2.0, horizon_s=2 * DAY, seed=5)
        report = simulate_fleet(cfg)
        for _, frac in report.timeline:
            assert 0.0 <= frac <= 1.0

    def test_matches_renewal_theory(self):
        # MTBF 100h, startup uniform 5..15 min (mean 10 min)
        mtbf_s = 100 * HOUR
        mean_startup_s = 600.0
        cfg = FleetSimConfig(
            fleet_size=10,
            eviction_rate_per_hour=1 / 100,
            startup_min_s=300.0,
            startup_max_s=900.0,
            horizon_s=90 * DAY,
            seed=2024,
        )
        report = simulate_fleet(cfg)
        predicted = mtbf_s / (mtbf_s + mean_startup_s)
        assert predicted == pytest.approx(0.9983, abs=5e-4)
        assert report.mean_availability == pytest.approx(predicted, rel=0.01)

    def test_reliable_workers_never_evict(self):
        cfg = FleetSimConfig(
            fleet_size=4,
            eviction_rate_per_hour=5.0,
            startup_min_s=DAY,
            startup_max_s=DAY,
            horizon_s=DAY,
            seed=9,
            reliable_workers=2,
        )
        report = simulate_fleet(cfg)
        # the two evictable workers die and never return; the reliable pair stays
        assert report.eviction_count == 2
        assert report.timeline[-1][1] == pytest.approx(0.5)

    def test_report_serializes(self):
        cfg = FleetSimConfig(fleet_size=3, eviction_rate_per_hour=0.1, horizon_s=DAY, seed=4)
        payload = simulate_fleet(cfg).to_dict()
        assert payload["fleet_size"] == 3
        assert "fraction_below_80pct" in payload
        assert payload["timeline"][0] == [0.0, 1.0]

    def test_invalid_configs(self):
        with pytest.raises(ValueError):
            FleetSimConfig(fleet_size=0, eviction_rate_per_hour=0.1)
        with pytest.raises(ValueError):
            FleetSimConfig(fleet_size=1, eviction_rate_per_hour=-1)
        with pytest.raises(ValueError):
            FleetSimConfig(fleet_size=1, eviction_rate_per_hour=0.1, startup_min_s=10, startup_max_s=5)
        with pytest.raises(ValueError):
            FleetSimConfig(fleet_size=2, eviction_rate_per_hour=0.1, reliable_workers=3)

    def test_timeline_spans_horizon(self):
        cfg = FleetSimConfig(fleet_size=5, eviction_rate_per_hour=0.2, horizon_s=5 * DAY, seed=6)
        report = simulate_fleet(cfg)
        assert report.timeline[0][0] == 0.0
        assert all(t <= cfg.horizon_s for t, _ in report.timeline)

    def test_fraction_below_of_threshold_integrates_step_function(self):
        # hand-built report: 60% capacity for a quarter of the horizon
        cfg = FleetSimConfig(fleet_size=5, eviction_rate_per_hour=0.0, horizon_s=100.0, seed=0)
        report = FleetSimReport(
            config=cfg,
            timeline=((0.0, 1.0), (50.0, 0.6), (75.0, 1.0)),
            eviction_count=1,
            mean_availability=0.9,
        )
        assert report.fraction_of_time_below(0.8) == pytest.approx(0.25)
        assert report.fraction_of_time_below(0.5) == 0.0
