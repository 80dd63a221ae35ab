"""Tunnel coupling U of two 3 µm traps against separation for a few effective masses."""

import numpy as np

from polariton_qubits import trap_solver as ts


def main():
    masses = (2e-5, 4e-5, 8e-5)
    print("D um " + "".join(f"{'m=' + format(m, 'g'):>12}" for m in masses))
    for D in np.linspace(0.2, 1.0, 5):
        us = []
        for m in masses:
            grid = ts.build_coupled_well_potential(1.5, D, 7.0, dx=0.03, padding=3.0, m_eff=m)
            us.append(ts.tunnel_coupling(ts.solve_eigenmodes(grid, k=2)))
        print(f"{D:4.2f} " + "".join(f"{u:>12.4f}" for u in us))


if __name__ == "__main__":
    main()
