#!/usr/bin/env python3
"""Survey the built-in families: validation flags, classification, timing.

Usage: python scripts/family_survey.py
"""

from sewedflow import (
    CompactSymmetricSet,
    classify,
    estimate_chi_order,
    make_family,
    validate_sewed_focus,
)

CASES = [
    ("finite_time_ck k=2", make_family("finite_time_ck", k=2), 0.5, 3.0),
    ("finite_time_ck k=3", make_family("finite_time_ck", k=3), 0.5, 3.0),
    ("finite_time_cinf", make_family("finite_time_cinf"), 0.5, 1.0),
    ("sewed_centre", make_family("sewed_centre"), 0.5, 3.0),
    ("cubic_focus", make_family("cubic_focus"), 0.5, 3.0),
    ("centre_focus_sin k=2", make_family("centre_focus_sin", k=2), 0.26, 3.0),
    ("eset [0.2,0.3]+{0.5}",
     make_family("eset", k=2, eset=CompactSymmetricSet.from_spec(
         points=[0.5], intervals=[[0.2, 0.3]])), 0.65, 3.0),
]


def main():
    header = f"{'system':24} {'valid':6} {'strong':7} {'kind':14} {'timing':18} {'order':5}"
    print(header)
    print("-" * len(header))
    for name, system, hw, decades in CASES:
        rep = validate_sewed_focus(system, min(hw, 0.25), samples=32)
        c = classify(system, half_width=hw, decades=decades)
        timing = "-"
        if c.timing is not None:
            timing = c.timing.verdict
            if c.timing.T is not None:
                timing += f" T={c.timing.T:.6f}"
        order = estimate_chi_order(system)
        print(f"{name:24} {str(rep.all_ok):6} {str(rep.sf2strong_ok):7} "
              f"{c.kind:14} {timing:18} {order if order else '-'}")
        if c.zeros:
            shown = ", ".join(f"{z:.4f}" for z in c.zeros[:6])
            more = "" if len(c.zeros) <= 6 else f" (+{len(c.zeros) - 6} more)"
            print(f"{'':24} zeros: {shown}{more}")
        if c.zero_intervals:
            ivs = ", ".join(f"[{lo:.4f}, {hi:.4f}]" for lo, hi in c.zero_intervals)
            print(f"{'':24} zero intervals: {ivs}")


if __name__ == "__main__":
    main()
