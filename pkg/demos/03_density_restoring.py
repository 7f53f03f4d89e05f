#!/usr/bin/env python3
"""Density, the fixing step, and the density-restoring partition.

The running example is the uniform distribution on {00, 01, 10} with one-bit
blocks: it is not 1-dense (the first coordinate has max probability 2/3),
its best density level is log2(3/2)/1 = 0.585..., and the partition carves
its support into slices that each fix a block set and leave the rest dense,
with the exact entropy bound through the tail probabilities.
"""

from fractions import Fraction

from liftsim import (
    DistributionTable,
    density_restoring_fix,
    density_restoring_partition,
    is_dense,
    max_density,
)
from liftsim.exact import frac_decimal, frac_str

X = DistributionTable.uniform([(0, 0), (0, 1), (1, 0)])
b = 1

print("X uniform on {00, 01, 10}, one-bit blocks")
w = is_dense(X, Fraction(1), b)
print(f"1-dense? {w.dense}; first violating set {w.violating_set} "
      f"with marginal max probability {frac_str(w.witness_maxprob)}")

lo, hi = max_density(X, b)
print(f"max density bracket: [{frac_decimal(lo)}, {frac_decimal(hi)}] "
      f"(the sup is log2(3/2) = 0.5849625...)")

print("\nfixing step at delta = 1:")
coords, value, rest = density_restoring_fix(X, Fraction(1), b)
print(f"  maximal violating set {coords}, heavy value {value}")
print(f"  conditioned remainder is 1-dense: {is_dense(rest, Fraction(1), b).dense}")

print("\ndensity-restoring partition at delta = 1:")
for part in density_restoring_partition(X, Fraction(1), b):
    print(f"  part {part.index}: fixes I={part.coords} to {part.value}, "
          f"members {part.members}, prob {frac_str(part.prob)}, "
          f"tail p_geq {frac_str(part.p_geq)}")
print("every part fixes its blocks, leaves the remainder dense, and")
print("satisfies the exact entropy bound maxprob*p_geq <= maxprob(X)*2^(delta*b*|I|)")
