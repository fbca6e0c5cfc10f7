"""Regenerate data/bessel_reference.csv from mpmath at 40 digits."""
import csv
from pathlib import Path

import mpmath

OUT = Path(__file__).resolve().parents[1] / "src" / "halfplane_vortex" / "data" / "bessel_reference.csv"


def main(n=200, lo="1e-6", hi="50"):
    mpmath.mp.dps = 40
    lo, hi = mpmath.log10(mpmath.mpf(lo)), mpmath.log10(mpmath.mpf(hi))
    with OUT.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "k0", "k1"])
        for i in range(n):
            # round the abscissa to a double first so the table is exact for it
            x = mpmath.mpf(float(mpmath.power(10, lo + (hi - lo) * i / (n - 1))))
            w.writerow([mpmath.nstr(x, 20, min_fixed=-30, max_fixed=30),
                        mpmath.nstr(mpmath.besselk(0, x), 20),
                        mpmath.nstr(mpmath.besselk(1, x), 20)])


if __name__ == "__main__":
    main()
