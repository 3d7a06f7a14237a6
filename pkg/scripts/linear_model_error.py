"""How far the two-chord linear key-rate model strays from the exact rate.

    python scripts/linear_model_error.py

Prints the pointwise relative error and the error normalised by the
zero-noise rate, over fractions of p_zero, for a few fiber lengths.
"""

import numpy as np

from qkdwave import DwdmParams, QkdParams, fit_linear_model, secret_key_rate

FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def main():
    qkd = QkdParams()
    print("L_km  frac  exact_bps     linear_bps    rel_err   err/R(0)")
    for length in (25, 45, 65):
        d = DwdmParams(length_km=length)
        model = fit_linear_model(qkd, d)
        r0 = secret_key_rate(0.0, qkd, d)
        for f in FRACTIONS:
            p = f * model.p_zero
            ex, li = secret_key_rate(p, qkd, d), model.rate(p)
            print(f"{length:<5} {f:<5} {ex:.5e}  {li:.5e}  {abs(li - ex) / ex:8.3%}  {abs(li - ex) / r0:8.3%}")
        p = np.linspace(0, model.p_zero, 2001)[:-1]
        rel = np.abs(model.rate(p) - secret_key_rate(p, qkd, d)) / secret_key_rate(p, qkd, d)
        first_bad = p[np.argmax(rel > 0.10)]
        print(f"L={length} km: pointwise error first exceeds 10% at {first_bad / model.p_zero:.2f} p_zero\n")


if __name__ == "__main__":
    main()
