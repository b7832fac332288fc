"""Simulate a switch and compare the estimates with the closed forms.

Run with ``python3 demos/capacity_and_occupancy.py``.
"""
from entswitch.analytic import capacity, expected_qubits, pi_R0
from entswitch.model import SwitchParams
from entswitch.simulate import SimConfig, run


def main():
    for params in (SwitchParams(5, 3, 1.0, 0.8), SwitchParams(4, 3, 1.0, 1.0), SwitchParams(8, 5, 2.0, 0.5)):
        rep = run(params, SimConfig(steps=1_000_000, seed=1))
        print(f"k={params.k} n={params.n} mu={params.mu} q={params.q}")
        for name, est, exact in (("capacity", rep.capacity, capacity(params)),
                                 ("E|Q|", rep.occupancy, expected_qubits(params.k, params.n)),
                                 ("pi(R0)", rep.r0, pi_R0(params.k, params.n))):
            print(f"  {name:9s} {est.value:9.5f} +- {est.halfwidth:.5f}   closed form {exact:.5f}")


if __name__ == "__main__":
    main()
