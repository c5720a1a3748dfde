"""|gamma'| versus the mean cavity detuning and the H Rabi coupling (Omega_V fixed)."""

import numpy as np

from qdcascade import Axis, SweepSpec, sweep
from qdcascade.cli import sweep_csv
from qdcascade.explorer import local_maxima

from _common import parser, symmetric


def main():
    p = parser(__doc__)
    p.add_argument("--steps", type=int, default=41)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    spec = SweepSpec(Axis("Omega_H", 0.005, 0.2, args.steps),
                     Axis("delta_CX", -0.5, 0.5, 2 * args.steps - 1),
                     fixed=symmetric(), window_width=0.1)
    res = sweep(spec, threads=args.threads)
    (args.out / "detuning_map.csv").write_text(sweep_csv(res))
    g = res.grid()
    for i, oh in enumerate(spec.axis1.values):
        row = g[i]
        j = int(np.nanargmax(row))
        print(f"Omega_H={oh:.4f}  best delta_CX={spec.axis2.values[j]:+.3f}  "
              f"|gamma'|={row[j]:.4f}  local maxima={len(local_maxima(row))}")


if __name__ == "__main__":
    main()
