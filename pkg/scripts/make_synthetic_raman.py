"""Regenerate the packaged synthetic Raman cross-section table.

The curve is a stand-in for a measured spontaneous-Raman spectrum of
standard single-mode fiber pumped near 1550 nm: a dip at the pump, shoulders
a few nm to either side, a decay toward larger shifts, and a Stokes side that
sits above the anti-Stokes side at every shift. It is not measured data.

    python scripts/make_synthetic_raman.py [out.csv]
"""

import sys
from pathlib import Path

import numpy as np

PLATEAU = 1.2e-9  # (km nm)^-1 far from the pump, anti-Stokes side
SHOULDER = 1.5e-9  # extra height of the shoulder near SHOULDER_NM
SHOULDER_NM = 3.5
SHOULDER_WIDTH_NM = 8.0
DIP_DEPTH = 0.9  # fractional suppression at zero shift
DIP_WIDTH_NM = 1.9
STOKES_EXCESS = 0.2  # Stokes/anti-Stokes ratio minus one
STOKES_SLOPE = 0.02e-9  # per nm, rise toward the main Stokes band


def synthetic_beta(shift_nm):
    s = np.asarray(shift_nm, dtype=float)
    x = np.abs(s)
    envelope = PLATEAU + SHOULDER * np.exp(-((x - SHOULDER_NM) ** 2) / (2 * SHOULDER_WIDTH_NM**2))
    dip = 1 - DIP_DEPTH * np.exp(-(x**4) / (2 * DIP_WIDTH_NM**4))
    stokes_step = 0.5 * (1 + np.tanh(s))
    stokes = 1 + STOKES_EXCESS * stokes_step
    return envelope * dip * stokes + STOKES_SLOPE * np.maximum(s, 0) * stokes_step


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else (
        Path(__file__).resolve().parents[1] / "src" / "qkdwave" / "data" / "raman_synthetic.csv"
    )
    shifts = np.round(np.arange(-40.0, 40.0 + 1e-9, 0.25), 2)
    lines = ["shift_nm,beta_per_km_nm"]
    lines += [f"{s:.2f},{b:.6e}" for s, b in zip(shifts, synthetic_beta(shifts))]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(shifts)} samples to {out}")


if __name__ == "__main__":
    main(sys.argv)
