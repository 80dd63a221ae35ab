"""Run every built-in preset and write its outputs under out/<preset>/."""

import argparse
from pathlib import Path

from polariton_qubits.cli import execute, write_outputs
from polariton_qubits.config import load_preset, preset_names


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("names", nargs="*", help="subset of presets (default: all)")
    args = ap.parse_args()
    for name in args.names or preset_names():
        files = execute(load_preset(name), jobs=args.jobs)
        write_outputs(Path(args.out) / name, files)
        print(f"{name}: {', '.join(sorted(files))}")


if __name__ == "__main__":
    main()
