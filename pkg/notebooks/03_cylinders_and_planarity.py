"""Horizontal cylinders and the separatrix diagram.

A periodic direction splits the surface into cylinders. The separatrix diagram
records how saddle connections meet at the cone points. When it is planar in every
periodic direction, KVol stays bounded on the Teichmuller disk.
"""
import math

from flatkvol.periodic import (HorizontalGeometry, cylinder_decomposition, dual_separatrix_diagram,
                               kvol_bounded_on_orbit, separatrix_diagram, two_cylinder_nonplanar_example)
from flatkvol.surface import build_bouw_moller

s = build_bouw_moller((5, 4))
dec = cylinder_decomposition(s)
print(f"S_(5,4) horizontal: {len(dec.cylinders)} cylinders")
for c in sorted(dec.cylinders, key=lambda c: c.width):
    print(f"  width {c.width:.6f} height {c.height:.6f} modulus {c.modulus:.6f}")
print("closed form:", HorizontalGeometry.closed_form(5, 4))

g, gd = separatrix_diagram(s, dec=dec), dual_separatrix_diagram(s, dec=dec)
print(f"separatrix genus {g.genus}, dual genus {gd.genus}, dual faces {len(gd.faces())}")

bad = two_cylinder_nonplanar_example()
print("five-square surface, genus of the horizontal diagram:", separatrix_diagram(bad).genus)
print("bounded on the orbit?", kvol_bounded_on_orbit(bad, [math.inf]))
