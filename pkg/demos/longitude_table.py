"""Degree-8 Magnus expansion of the first longitude of A B A' B'.

A is the reversed degree-2 tree (121) and B the degree-5 tree (121221);
primes mark concordance inverses.  The expansion has no terms of degree
1 to 7, and its 72 top coefficients are printed one per line.
"""

from stringlinks import format_series, longitude_series
from stringlinks.cli import load_fixture

L = load_fixture("ABAB")
s = longitude_series(L, 1, 8)
print(f"{L.crossing_count} crossings")
top = sorted((m, c) for m, c in s.terms.items() if len(m) == 8)
print(f"{len(top)} degree-8 terms, lower terms: "
      f"{sum(1 for m in s.terms if 0 < len(m) < 8)}")
for m, c in top:
    print(f"  {c:+d} {''.join('XY'[i - 1] for i in m)}")
print(format_series(s))
