"""
Orbit balls and critical exponents
==================================

Enumerate the orbit of the origin under the shipped rank-2 Schottky group,
fit the growth rate of the ball counts and compare it with the word-length
oracle.  Run with ``python3 notebooks/01_orbits_and_exponents.py``.
"""

import numpy as np

from horolab import config, groups, measures

G = config.load_presentation("schottky2")
O = groups.enumerate_orbit(G, np.zeros(2), 30.0)
print(len(O), "orbit points within 30, complete:", O.complete)

# log #B(R) is close to linear with slope delta
R = np.arange(15, 30.1, 2.5)
print(np.column_stack([R, O.counts(R)]))

delta, se = measures.critical_exponent_estimate(O, (15, 30))
print(f"fitted delta = {delta:.4f} +/- {se:.4f}")
print(f"oracle       = {measures.exponent_oracle(G):.4f}")

# the same slope from another basepoint
Oz = groups.enumerate_orbit(G, np.array([0.3, 0.2]), 30.0)
print("from z = (0.3, 0.2):", measures.critical_exponent_estimate(Oz, (15, 30)))

# a kernel of expl1 grows strictly slower than the whole group
E = config.load_presentation("expl1")
OE = groups.enumerate_orbit(E, np.zeros(3), 40.0)
N = groups.suborbit(OE, E.homomorphisms["phi"])
print("expl1 G:", measures.critical_exponent_estimate(OE, (20, 40))[0])
print("expl1 N:", measures.critical_exponent_estimate(N, (20, 40))[0])
