"""Building Bouw-Moller surfaces and reading off their cone data.

Run with: python3 notebooks/01_surfaces.py
"""
import math

from flatkvol.surface import build_bouw_moller, equilateral_l_surface, validate_hypotheses

# S_{m,n} is glued from m semi-regular polygons. Its cone points and genus
# depend only on gcd(m, n) and mn - m - n.
for m, n in [(3, 4), (4, 3), (5, 4), (2, 6)]:
    s = build_bouw_moller((m, n))
    angles = ", ".join(f"{a / math.pi:.0f}pi" for a in s.cone_angles)
    print(f"S_({m},{n}): {len(s.polygons)} polygons, cone angles [{angles}], genus {s.genus}, area {s.area:.6f}")

# The polygon hypotheses: all angles at least pi/2, and no polygon glued to itself.
for label, s in [("S_(3,4)", build_bouw_moller((3, 4))), ("S_(4,3)", build_bouw_moller((4, 3))),
                 ("L of six triangles", equilateral_l_surface())]:
    print(label, validate_hypotheses(s).as_dict())

# Surfaces round-trip through a small JSON format.
s = build_bouw_moller((3, 4))
print(s.to_json()[:120], "...")
