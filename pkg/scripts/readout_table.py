"""Readout budget for both cavity geometries at two probe detunings."""

from polariton_qubits import qnd_readout as qr

ROWS = (("single_sided", 0.3, 41.1), ("single_sided", 0.1, 41.1),
        ("symmetric_two_sided", 0.3, 70.8), ("symmetric_two_sided", 0.1, 70.8))


def main():
    print(f"{'cavity':<22}{'δ meV':>7}{'τ_meas ps':>12}{'<N>':>10}{'P_sn':>10}{'crosstalk':>11}")
    for side, delta, F_T in ROWS:
        b = qr.readout_budget(qr.readout_config(side, delta, F_T=F_T))
        print(f"{side:<22}{delta:>7.2f}{b.tau_meas:>12.4g}{b.N_mean:>10.4g}{b.P_sn:>10.3g}"
              f"{b.P_crosstalk:>11.3g}")


if __name__ == "__main__":
    main()
