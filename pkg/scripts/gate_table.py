"""Calibrate the CZ-type gate for both cavity Q factors and both pulse strategies."""

import json

from polariton_qubits.cli import execute
from polariton_qubits.config import load_preset

PRESETS = ("table1_q76k_geometric", "table1_q76k_phase",
           "table1_q30k_geometric", "table1_q30k_phase")


def main():
    print(f"{'preset':<24}{'F':>10}{'gate ns':>10}{'Θ_g':>10}{'Θ_d':>10}{'C0':>9}")
    for name in PRESETS:
        s = json.loads(execute(load_preset(name), fmt="json")["result.json"])["summary"]
        print(f"{name:<24}{s['F']:>10.5f}{s['gate_time_ns']:>10.2f}{s['Theta_g']:>10.3f}"
              f"{s['Theta_d']:>10.3f}{s['C0']:>9.2f}")


if __name__ == "__main__":
    main()
