"""Photoluminescence spectra of the equal-splitting and unequal-splitting systems."""

import numpy as np

from qdcascade import analyze, build_channels, pl_spectrum
from qdcascade.cascade import default_spectrum_axis
from qdcascade.cli import spectrum_csv

from _common import asymmetric, parser, symmetric


def main():
    args = parser(__doc__).parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, p in (("equal", symmetric()), ("unequal", asymmetric())):
        chans = build_channels(p)
        spec = pl_spectrum(chans, np.concatenate(default_spectrum_axis(chans)))
        (args.out / f"spectrum_{name}.csv").write_text(spectrum_csv(spec))
        a = analyze(p, 0.1)
        print(f"{name:8s} pair {a.pair.label:10s} mismatch {a.pair.energy_mismatch:.4f} meV  "
              f"|gamma'| {a.gamma_abs:.4f}  QE {a.quantum_efficiency:.4f}")


if __name__ == "__main__":
    main()
