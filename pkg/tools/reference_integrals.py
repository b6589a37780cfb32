"""High-precision references for the |x - y|-weighted Bessel integral (item 1).

(1/R^2) int_[0,R]^2 I0(2 sqrt(xy)) e^{-x-y} |x - y| dx dy, computed with
mpmath as twice the integral over the triangle y < x, where the integrand
is analytic. Prints a JSON dict R -> value; the test suite freezes these
numbers.
"""

import json
import sys

import mpmath as mp


def item1(R, dps=30):
    mp.mp.dps = dps
    R = mp.mpf(R)

    def inner(x):
        return mp.quad(lambda y: (x - y) * mp.besseli(0, 2 * mp.sqrt(x * y)) * mp.exp(-x - y), [0, x])

    pts = mp.linspace(0, R, int(R) + 1)
    return 2 * mp.quad(inner, pts) / R ** 2


def main(argv=None):
    Rs = [5, 10, 20, 40] if not argv else [float(a) for a in argv]
    out = {str(float(R)): mp.nstr(item1(R), 20) for R in Rs}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main(sys.argv[1:])
