"""Watch the truncated stationary solution converge as the cap B grows."""
from entswitch.model import SwitchParams
from entswitch.solve import convergence_sweep


def main():
    params = SwitchParams(4, 3)
    print(f"{'B':>4} {'pi(R0)':>14} {'E|Q|':>14} {'edge mass':>11} {'E error':>10}")
    for row in convergence_sweep(params, [5, 10, 20, 40, 80]):
        print(f"{row.B:>4} {row.pi_R0:14.10f} {row.expected_qubits:14.10f} "
              f"{row.boundary_mass:11.2e} {row.expected_qubits_error:10.2e}")


if __name__ == "__main__":
    main()
