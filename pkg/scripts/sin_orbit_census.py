#!/usr/bin/env python3
"""Census of periodic orbits of the sin-profile centre-focus.

For the field built from sin(pi/x), crossings at x0 = 1/n (integer n >= 4)
lie on periodic orbits whose stability alternates with the parity of n.
This script verifies that, and also records the first-return behaviour at
the half-way candidates x0 = 2/m with m odd, which are NOT zeros of the
profile for this frequency: their displacement stays resolvably nonzero.

Usage: python scripts/sin_orbit_census.py [n_max]
"""

import sys

from sewedflow import chi, make_family, periodic_orbit_stability


def main(n_max: int = 12):
    system = make_family("centre_focus_sin", k=2)

    print("integer reciprocals x0 = 1/n (periodic orbits):")
    print(f"{'n':>4} {'x0':>10} {'|chi(-x0)|':>12} {'stability':>10}")
    for n in range(4, n_max + 1):
        x0 = 1.0 / n
        c = abs(chi(system, -x0))
        h = 1.0 / (2 * n * (n + 1))
        verdict = periodic_orbit_stability(system, x0, h)
        print(f"{n:>4} {x0:>10.6f} {c:>12.3e} {verdict:>10}")

    print("\nhalf-way candidates x0 = 2/m, m odd (recorded, not asserted):")
    print(f"{'m':>4} {'x0':>10} {'|chi(-x0)|':>12} {'periodic?':>10}")
    for m in range(9, 2 * n_max + 1, 2):
        x0 = 2.0 / m
        c = abs(chi(system, -x0))
        print(f"{m:>4} {x0:>10.6f} {c:>12.3e} {'yes' if c <= 1e-9 else 'no':>10}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 12)
