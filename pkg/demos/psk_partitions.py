"""
Sum constellations of two PSK users
===================================

With a relative rotation the pairwise sums of two M-PSK alphabets sit on
rings. Splitting each alphabet into two cells sets the distances a trellis
code sees; the parity split is the natural candidate.
"""

import numpy as np

from maclab.psk_geometry import (
    dmin_formula_ee,
    dmin_formula_eo,
    example_partitions,
    exhaustive_partition_search,
    partition_sumset_dmin,
    psk_pair,
    ring_structure,
    ungerboeck_split,
)

M = 8
for th in (np.pi / 12, np.pi / 8):
    rs = ring_structure(M, th)
    print(f"theta = {np.degrees(th):5.2f} deg: {rs.n_rings} rings, radii {np.round(np.unique(rs.chain()), 4)}")

# closed forms against brute force for the parity split
u = ungerboeck_split(M)
for th in np.pi / M * np.array([0.25, 0.5, 0.75]):
    rep = partition_sumset_dmin(u, u, *psk_pair(M, th))
    print(f"theta/(pi/8) = {th / (np.pi / M):.2f}: dee {rep.dee:.6f} (formula {dmin_formula_ee(M, th):.6f}),"
          f" deo {rep.deo:.6f} (formula {dmin_formula_eo(M, th):.6f})")

# at theta = pi/M no split beats parity; at small angles others do
for th in (np.pi / 8, np.pi / 25):
    res = exhaustive_partition_search(M, th)
    print(f"theta = {np.degrees(th):5.2f} deg: best bottleneck {res.best.bottleneck:.5f},"
          f" parity optimal: {res.ungerboeck_optimal}, {res.n_evaluated} pairs scored")

p1, p2 = example_partitions()
th = np.pi / 25
print("hand-picked pair at pi/25:", round(partition_sumset_dmin(p1, p2, *psk_pair(M, th)).bottleneck, 5))
