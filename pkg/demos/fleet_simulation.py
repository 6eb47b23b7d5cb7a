"""Explore how eviction rate and startup delay shape fleet availability.

Run: python demos/fleet_simulation.py
"""

from nsx import FleetSimConfig, simulate_fleet

DAY = 86_400.0


def show(label: str, cfg: FleetSimConfig) -> None:
    report = simulate_fleet(cfg)
    mtbf_h = (1 / cfg.eviction_rate_per_hour) if cfg.eviction_rate_per_hour else float("inf")
    print(
        f"{label:<28} MTBF {mtbf_h:>6.0f}h  evictions {report.eviction_count:>4}  "
        f"mean availability {report.mean_availability:.4f}  "
        f"time below 80% {report.fraction_of_time_below(0.8):.3%}"
    )


def main() -> None:
    print("10 workers over a simulated 90 days, startup uniform 5-20 min\n")
    for label, rate in [
        ("very stable (rate 1/500h)", 1 / 500),
        ("stable (rate 1/100h)", 1 / 100),
        ("churny (rate 1/24h)", 1 / 24),
        ("hostile (rate 1/4h)", 1 / 4),
    ]:
        show(label, FleetSimConfig(
            fleet_size=10, eviction_rate_per_hour=rate,
            startup_min_s=300, startup_max_s=1200,
            horizon_s=90 * DAY, seed=7,
        ))

    print("\nhybrid fleet: same churny rate, but 3 of 10 workers are reliable\n")
    show("churny + 3 reliable", FleetSimConfig(
        fleet_size=10, eviction_rate_per_hour=1 / 24,
        startup_min_s=300, startup_max_s=1200,
        horizon_s=90 * DAY, seed=7, reliable_workers=3,
    ))


if __name__ == "__main__":
    main()
