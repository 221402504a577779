"""Chord diagrams on two strands.

Prints the dimensions of A_k(2) for small k by two independent
eliminations, then the stacking commutator of the degree-3 and degree-4
linear tree diagrams.  Pass --check to run the degree-7 certificate,
which takes a long time.
"""

import sys

from stringlinks.diagalg import (commutator, commutator_check, dimension, dimension_dense,
                                 stu_expand, tree_jacobi)

for k in range(1, 5):
    print(f"dim A_{k}(2) = {dimension(k)} (dense oracle {dimension_dense(k)})")

H = stu_expand(tree_jacobi((1, 2, 2, 1)))
S = stu_expand(tree_jacobi((1, 2, 2, 2, 1)))
C = commutator(H, S)
print(f"D_H: {len(H.terms)} chord diagrams, D_S: {len(S.terms)}, commutator: {len(C.terms)}")

if "--check" in sys.argv:
    differ, cert = commutator_check()
    print("noncommutative" if differ else "no witness found")
    print(cert.summary())
