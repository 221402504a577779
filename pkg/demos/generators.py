"""Linear-tree generators of 2-string links up to C_k-concordance.

For each degree the generating set is printed together with the nonzero
Milnor invariants of length k+1 of the realised trees.
"""

import itertools
import sys

from stringlinks import milnor_mu
from stringlinks.treegen import enumerate_generators, milnor_rank, tree_to_morse

top = int(sys.argv[1]) if len(sys.argv) > 1 else 5
for k in range(1, top + 1):
    gs = enumerate_generators(k)
    print(f"degree {k}: {' '.join(gs.lines())}")
    for o in gs.indices:
        L = tree_to_morse(o)
        vals = {}
        for idx in itertools.product((1, 2), repeat=k + 1):
            mu = milnor_mu(L, idx)
            if mu:
                vals["".join(map(str, idx))] = mu
        print(f"  T({o}): {vals or 'all zero'}")
    print(f"  rank at length {k + 1}: {milnor_rank(gs.indices, k + 1)}")
