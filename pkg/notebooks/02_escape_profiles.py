"""
Escape profiles along coded limit points
========================================

phi(t) is the distance from the ray point at time t to the nearest orbit
point.  Radial points return to bounded distance infinitely often; the fixed
point of a generator of a cyclic group shows the sawtooth.
"""

import numpy as np

from horolab import classify as cl
from horolab import coded, config, groups

C = config.load_presentation("cyclic")
ell = groups.min_translation_length(C)
p = cl.escape_profile(C, None, coded.CodedPoint(C, (1,)), 20.0)
for t, phi in zip(p.t[::4], p.phi[::4]):
    print(f"t={t:5.1f}  phi={phi:.4f}  (sawtooth {min(abs(t - k * ell) for k in range(40)):.4f})")

G = config.load_presentation("schottky2")
xi = coded.CodedPoint(G, (1, 2, 2, -1, 2))
q = cl.escape_profile(G, None, xi, 40.0)
print(cl.test_radial(q, 2.0))
print("violations:", cl.profile_violations(q))

# a uniform direction is not a limit point: phi grows like t
rng = np.random.default_rng(3)
v = rng.normal(size=2)
v /= np.linalg.norm(v)
O = groups.enumerate_orbit(G, np.zeros(2), 25.0)
r = cl.escape_profile(O, None, v, 12.0)
print(np.round(r.phi[::4], 3))
