"""Saddle connections, their polygonal decomposition and intersection numbers."""
import math

import numpy as np

from flatkvol.intersection import algebraic_intersection, closed_saddle_connections, intersection_matrix
from flatkvol.surface import build_bouw_moller
from flatkvol.trajectory import check_length_bounds, decompose, enumerate_saddle_connections

s = build_bouw_moller((3, 4))
scs = enumerate_saddle_connections(s, 2.0)
print(f"{len(scs)} oriented saddle connections of length <= 2 on S_(3,4)")
for sc in scs[:6]:
    d = decompose(sc)
    print(f"  hol=({sc.holonomy.x:+.4f}, {sc.holonomy.y:+.4f}) len={sc.length:.4f} k={d.k} p={d.p} q={d.q} "
          f"odd={d.is_odd}")

# Every saddle connection is at least (p + q) times the shortest side.
long_one = max(scs, key=lambda sc: decompose(sc).k)
print("length bounds for the longest chain:", check_length_bounds(long_one))

# Closed saddle connections pair through the algebraic intersection form.
closed = closed_saddle_connections(s, 2.0)
M = intersection_matrix(closed)
lengths = np.array([sc.length for sc in closed])
ratios = np.abs(M) / np.outer(lengths, lengths)
i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
print(f"largest Int/(l l') = {ratios[i, j]:.10f}, 1/sin^2(pi/3) = {1 / math.sin(math.pi / 3) ** 2:.10f}")
print("the same pair, computed from crossings:", algebraic_intersection(closed[i], closed[j]).as_dict())
