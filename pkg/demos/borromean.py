"""Triple linking of the Borromean braid.

Pairwise linking numbers vanish, so mu(123) is the first invariant that
sees the link.  Both longitude back ends are printed.
"""

from stringlinks import from_braid, milnor_mu
from stringlinks.stringlink import artin_longitudes, chen_milnor, linking_number

BRAID = "s1 s1 s2 s2 S1 S1 S2 S2"

L = from_braid(BRAID, 3)
print(f"braid {BRAID}, {L.crossing_count} crossings")
for i, j in ((1, 2), (1, 3), (2, 3)):
    print(f"  lk({i},{j}) = {linking_number(L, i, j)}")
print(f"  mu(123) = {milnor_mu(L, '123')}")

cm = chen_milnor(L, 3)
art = artin_longitudes(BRAID, 3)
for i in range(3):
    print(f"  longitude {i + 1}: word {cm.longitudes[i]}  artin {art[i]}")
