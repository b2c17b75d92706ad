"""Write a ready-to-run scenario file for the five-vertex benchmark.

The emitted JSON drives the full CLI chain:

    python scripts/make_demo_config.py out/scenario.json
    gridtrace simulate --config out/scenario.json
    gridtrace detect   --config out/scenario.json
    gridtrace identify --config out/scenario.json
"""

import argparse
import json
from pathlib import Path

SCENARIO = {
    "graph": {
        "n": 5,
        "edges": [[1, 4], [1, 5], [2, 3], [2, 4], [2, 5], [3, 4], [4, 5]],
    },
    "eta": 0.1,
    "grid": {"T": 100.0, "dt": 0.1, "T0": 10.0},
    "observed": [1, 4, 5],
    "source": {"kind": "zero"},
    "disturbances": [
        {"vertex": 2, "kind": "sine_halfperiod", "amplitude": 1.0, "onset": 10.0}
    ],
    "detection": {"epsilon": "auto", "window": 10},
    "identification": {"mode": "auto", "L": 8, "alpha": 0.01, "rho": 3.0},
    "noise": {"std": 0.0, "seed": 0},
    "outputs": {"dir": "out"},
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "path", nargs="?", default="scenario.json", help="where to write the file"
    )
    args = parser.parse_args()
    path = Path(args.path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(SCENARIO, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
