#!/usr/bin/env python3
"""Demo: bubble energies quantize near integer multiples of one constant.

A single concentrated bubble carries a universal energy; a pair of far-apart
bubbles carries (almost) twice that.  The demo evaluates the scale-invariant
functional on one bubble (recovering the constant to machine-level accuracy)
and on antipodal pairs at increasing scales, showing the interaction gap
closing like 1/scale.

Example:
    python3 demos/energy_levels.py
"""

from morsecount import (
    Bubble,
    BubbleSum,
    I_from_J,
    constant_one,
    functional_J,
    sobolev_constant,
)

NORTH = (0.0, 0.0, 0.0, 1.0)
SOUTH = (0.0, 0.0, 0.0, -1.0)


def banner(text):
    print("=" * 72)
    print(text)
    print("=" * 72)


if __name__ == "__main__":
    banner("One bubble: the universal level")
    s3 = sobolev_constant(3)
    target1 = s3 ** (2.0 / 3.0)
    for lam in (2.0, 8.0, 64.0):
        u = BubbleSum(n=3, bubbles=(Bubble(center=NORTH, lam=lam),), alphas=(1.0,))
        j = functional_J(u, constant_one(3))
        print(f"scale {lam:6.1f}: J = {j:.10f}   target {target1:.10f}   "
              f"rel. dev {abs(j - target1) / target1:.2e}")
    print(f"energy form of the level: I = {I_from_J(target1, 3):.10f} "
          f"(= constant/3 = {s3 / 3:.10f})")
    print()

    banner("Two antipodal bubbles: approaching the doubled level")
    target2 = (2.0 * s3) ** (2.0 / 3.0)
    print(f"doubled-level target {target2:.6f}")
    prev = None
    for lam in (10.0, 30.0, 50.0, 100.0, 400.0):
        u = BubbleSum(
            n=3,
            bubbles=(Bubble(center=NORTH, lam=lam), Bubble(center=SOUTH, lam=lam)),
            alphas=(1.0, 1.0),
        )
        j = functional_J(u, constant_one(3))
        dev = abs(j - target2) / target2
        note = "" if prev is None else f"   scale*dev = {lam * dev:.2f}"
        print(f"scale {lam:6.1f}: J = {j:.6f}   rel. dev {dev:.4f}{note}")
        prev = dev
    print()
    print("the product scale*dev is nearly constant: the pair interaction on")
    print("the 3-sphere has a fat 1/scale tail, so the gap closes slowly --")
    print("the 1% window only opens past scale ~175.")
