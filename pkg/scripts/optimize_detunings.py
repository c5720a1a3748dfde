"""Independent tuning of both cavity modes for the unequal-splitting system."""

import json
from dataclasses import replace

import numpy as np

from qdcascade import Axis, SweepSpec, optimize_gamma, sweep
from qdcascade.cli import optimum_payload, sweep_csv

from _common import asymmetric, parser, symmetric


def main():
    p = parser(__doc__)
    p.add_argument("--grid", type=int, default=41)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    base = asymmetric()
    spec = SweepSpec(Axis("delta_C", 0.0, 0.6, args.grid), Axis("delta_CX", -0.5, 0.5, args.grid),
                     fixed=base)
    (args.out / "optimize_map.csv").write_text(sweep_csv(sweep(spec, threads=args.threads)))
    opt = optimize_gamma(base, grid=args.grid, threads=args.threads)
    (args.out / "optimize_optimum.json").write_text(json.dumps(optimum_payload(opt), indent=2))
    print(f"optimum: delta_C={opt.delta_C:.4f} delta_CX={opt.delta_CX:+.4f} "
          f"|gamma'|={opt.gamma_abs:.4f} QE={opt.qe:.4f} pair={opt.pair}")

    # best-over-delta_CX |gamma'| against Omega_H and delta_C, Omega_V = 0.11
    rows = ["omega_h_meV,delta_c_meV,best_gamma_abs,best_delta_cx_meV"]
    for oh in np.linspace(0.03, 0.2, 8):
        for dc in np.linspace(0.0, 0.5, 11):
            q = symmetric().with_detunings(delta_C=float(dc))
            r = optimize_gamma(replace(q, Omega_H=float(oh)), free=("delta_CX",), grid=41,
                               threads=args.threads)
            rows.append(f"{oh:.12g},{dc:.12g},{r.gamma_abs:.12g},{r.delta_CX:.12g}")
    (args.out / "optimize_best_over_delta_cx.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
