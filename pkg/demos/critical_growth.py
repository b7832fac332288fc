"""Queue growth at the critical point k = n next to a stable control."""
from entswitch.model import SwitchParams
from entswitch.simulate import SimConfig, instability_probe, run


def main():
    probe = instability_probe(SwitchParams(4, 4), (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6), replications=100, seed=3)
    print("k = n = 4, 100 paths from the empty state")
    for row in probe.rows:
        print(f"  T={row.horizon:>8}  median |X_T| {row.median:8.1f}  IQR [{row.lower_quartile:.0f}, {row.upper_quartile:.0f}]")
    ctrl = run(SwitchParams(5, 4), SimConfig(steps=10 ** 6, seed=3))
    print(f"control k=5 n=4: time-average |x| {ctrl.occupancy.value:.3f} +- {ctrl.occupancy.halfwidth:.3f} (closed form 7.5)")


if __name__ == "__main__":
    main()
