"""KVol along the Teichmuller disk of S_(3,4).

The closed form on the disk is compared with a brute-force maximum taken over
closed saddle connections of the deformed surface M.S.
"""
import math

import numpy as np

from flatkvol.geom import Mat2
from flatkvol.kvol import PairData, kvol_bruteforce, kvol_on_orbit
from flatkvol.surface import BouwMollerParams, build_bouw_moller
from flatkvol.teich import kvol_disk, psi

p = BouwMollerParams(3, 4)
s = build_bouw_moller(p)
res = kvol_bruteforce(s, 3.0)
print(f"KVol(S_(3,4)) ~ {res.kvol_lower:.10f}, SysVol {res.sysvol:.10f}, maximizing pairs {res.n_maximizers}")

data = PairData.build(s, 4.0)
print("    t      disk      brute")
for t in np.linspace(-0.6, 0.6, 7):
    M = Mat2.diag(math.exp(t), math.exp(-t)) @ Mat2.rotation(0.3)
    print(f"{t:+.2f}  {kvol_disk(psi(M), p, s.area):9.5f}  {kvol_on_orbit(data, M):9.5f}")
