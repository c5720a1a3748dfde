import argparse
from pathlib import Path

from qdcascade import SystemParams


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--threads", type=int, default=1)
    return p


def symmetric() -> SystemParams:
    return SystemParams.from_detunings(0.25, 0.25, 0.0, Omega_H=0.11, Omega_V=0.11)


def asymmetric(delta_cx: float = -0.2) -> SystemParams:
    return SystemParams.from_detunings(0.25, 0.25, delta_cx, Omega_H=0.11, Omega_V=0.05)
