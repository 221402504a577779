"""Command line front end.

Examples::

    stringlinks milnor --link braid:"s1 s1 s2 s2 S1 S1 S2 S2" --index 123
    stringlinks longitude --link fixture:ABAB --strand 1 --max-degree 8
    stringlinks gens --degree 6
    stringlinks tree2link --oindex 12221 --out t.morse
    stringlinks algebra dim --degree 3
    stringlinks algebra commutator --max-degree 7
    stringlinks reproduce borromean

Exit status: 0 on success, 2 when the input is rejected, 1 when a
computation runs out of its budget or a reproduction check fails.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from importlib import resources
from pathlib import Path

from . import diagalg, treegen
from .errors import ResourceLimitError, StringLinkError, MalformedInputError
from .magnus import format_series
from .stringlink import (MorseWord, artin_longitudes, braid_permutation, chen_milnor,
                         concordance_inverse, from_braid, longitude_series, milnor_mu,
                         parse_braid, parse_morse, series_longitudes, stack)

BORROMEAN = "s1 s1 s2 s2 S1 S1 S2 S2"


def fixture_text(name: str) -> str:
    try:
        return resources.files("stringlinks").joinpath("fixtures", name).read_text()
    except (FileNotFoundError, OSError):
        raise MalformedInputError(f"fixture file {name!r} is missing") from None


def load_fixture(name: str) -> MorseWord:
    if name == "ABAB":
        A, B = load_fixture("A"), load_fixture("B")
        return stack(A, B, concordance_inverse(A), concordance_inverse(B))
    if name == "borromean":
        return from_braid(BORROMEAN, 3)
    return parse_morse(fixture_text(f"{name}.morse"))


def load_link(spec: str) -> MorseWord:
    """``braid:<word>``, ``fixture:<name>`` or a path to a Morse word file."""
    if spec.startswith("braid:"):
        b = parse_braid(spec[6:])
        n = max((abs(g) for g in b), default=1) + 1
        return from_braid(b, n)
    if spec.startswith("fixture:"):
        return load_fixture(spec[8:])
    path = Path(spec)
    if not path.is_file():
        raise MalformedInputError(f"no such link file {spec!r}")
    return parse_morse(path.read_text())


def _parse_index(text: str) -> list[int]:
    text = text.replace(",", " ").strip()
    parts = text.split() if " " in text else list(text)
    try:
        return [int(t) for t in parts]
    except ValueError:
        raise MalformedInputError(f"bad index {text!r}") from None


def _emit(fmt: str, text: str, data) -> None:
    if fmt == "json":
        print(json.dumps(data, sort_keys=True))
    else:
        print(text)


# ------------------------------------------------------------ commands

def cmd_milnor(args) -> int:
    L = load_link(args.link)
    index = _parse_index(args.index)
    mu = milnor_mu(L, index)
    _emit(args.format, str(mu), {"index": "".join(map(str, index)), "mu": mu})
    return 0


def cmd_longitude(args) -> int:
    L = load_link(args.link)
    s = longitude_series(L, args.strand, args.max_degree, method=args.method)
    if args.format == "json":
        print(s.to_json())
    else:
        print(format_series(s))
    return 0


def cmd_gens(args) -> int:
    gs = treegen.enumerate_generators(args.degree, args.mode)
    if args.format == "json":
        print(json.dumps({"degree": gs.degree, "mode": gs.mode, "generators": gs.lines()},
                         sort_keys=True))
    else:
        print("\n".join(gs.lines()))
    return 0


def cmd_tree2link(args) -> int:
    L = treegen.tree_to_morse(args.oindex, args.strands)
    text = L.to_text()
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text.rstrip())
    return 0


def _primes(count: int) -> tuple[int, ...]:
    if count < 1:
        raise MalformedInputError("--primes must be at least 1")
    out = []
    p = 2 ** 31 - 1
    while len(out) < count:
        p -= 2
        if all(p % q for q in range(3, int(p ** 0.5) + 1, 2)):
            out.append(p)
    return tuple(out)


def cmd_algebra(args) -> int:
    if args.what == "dim":
        if args.degree is None:
            raise MalformedInputError("algebra dim needs --degree")
        if args.degree < 0:
            raise MalformedInputError("--degree must be non-negative")
        p = None if args.exact or args.primes is None else _primes(args.primes)[0]
        d = diagalg.dimension(args.degree, p)
        _emit(args.format, str(d), {"degree": args.degree, "dimension": d})
        return 0
    if args.max_degree is not None and args.max_degree < 7:
        raise MalformedInputError("the tree commutator lives in degree 7; use --max-degree 7")
    primes = None if args.exact else _primes(args.primes or 3)
    differ, cert = diagalg.commutator_check(primes=primes, exact=args.exact,
                                            max_rows=args.max_rows, method=args.method)
    report = {"noncommutative": differ, "certificate": cert.summary()}
    _emit(args.format, f"{'noncommutative' if differ else 'no witness found'}\n{cert.summary()}",
          report)
    return 0 if differ else 1


# ------------------------------------------------------------ reproduction

def _check_borromean() -> tuple[bool, str]:
    L = from_braid(BORROMEAN, 3)
    lon = series_longitudes(L, 2)
    lk = [lon.mu(i) for i in ((1, 2), (1, 3), (2, 3))]
    mu = lon.mu((1, 2, 3))
    return all(v == 0 for v in lk) and abs(mu) == 1, f"mu(12,13,23) = {lk}, mu(123) = {mu}"


def _check_table() -> tuple[bool, str]:
    golden = fixture_text("expected_ABAB_longitude1_deg8.txt").strip()
    s = longitude_series(load_fixture("ABAB"), 1, 8, method="series")
    text = format_series(s)
    top = sum(1 for m in s.terms if len(m) == 8)
    low = sum(1 for m in s.terms if 0 < len(m) < 8)
    return text == golden, f"{top} degree-8 coefficients, {low} unexpected lower terms"


def _check_gens() -> tuple[bool, str]:
    bad = []
    for line in fixture_text("generators.txt").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        k, rest = line.split(":")
        got = treegen.enumerate_generators(int(k)).lines()
        if got != rest.split():
            bad.append(int(k))
    return not bad, "all degrees match" if not bad else f"mismatch in degrees {bad}"


def _check_rank() -> tuple[bool, str]:
    r = treegen.milnor_rank(treegen.enumerate_generators(7), 8)
    return r == 6, f"rank = {r}"


def _check_oracle(seed: int) -> tuple[bool, str]:
    from .magnus import expand
    rng = random.Random(seed)
    done = agree = 0
    while done < 200:
        n = rng.choice((2, 3))
        b = [rng.choice((1, -1)) * rng.randint(1, n - 1) for _ in range(rng.randint(0, 12))]
        if braid_permutation(b, n) != list(range(1, n + 1)):
            continue
        cm = chen_milnor(from_braid(b, n), 5)
        art = artin_longitudes(b, n)
        done += 1
        agree += all(expand(cm.longitudes[i], n, 4) == expand(art[i], n, 4) for i in range(n))
    return agree == done, f"{agree}/{done} agree modulo the 5th lower central subgroup"


def _check_algebra(primes) -> tuple[bool, str]:
    differ, cert = diagalg.commutator_check(primes=primes)
    return differ, cert.summary()


TARGETS = ("borromean", "table", "gens", "rank", "oracle", "algebra")
DEFAULT_TARGETS = TARGETS


def cmd_reproduce(args) -> int:
    targets = DEFAULT_TARGETS if args.target == "all" else (args.target,)
    failed = 0
    for t in targets:
        start = time.time()
        if t == "oracle":
            ok, detail = _check_oracle(args.seed)
        elif t == "algebra":
            ok, detail = _check_algebra(_primes(args.primes or 3))
        else:
            ok, detail = globals()[f"_check_{t}"]()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {t}: {detail} ({time.time() - start:.1f}s)")
        sys.stdout.flush()
    return 1 if failed else 0


# ------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stringlinks",
                                 description="Milnor invariants and generators of string links")
    ap.add_argument("--workers", type=int, default=1, help="upper bound on worker processes")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    sub = ap.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("paper", "json"), default="paper")

    p = sub.add_parser("milnor", parents=[fmt], help="one Milnor invariant")
    p.add_argument("--link", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_milnor)

    p = sub.add_parser("longitude", parents=[fmt], help="Magnus expansion of a longitude")
    p.add_argument("--link", required=True)
    p.add_argument("--strand", type=int, default=1)
    p.add_argument("--max-degree", type=int, required=True)
    p.add_argument("--method", choices=("auto", "word", "series"), default="auto")
    p.set_defaults(func=cmd_longitude)

    p = sub.add_parser("gens", parents=[fmt], help="generating set of linear trees")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--mode", default="concordance")
    p.set_defaults(func=cmd_gens)

    p = sub.add_parser("tree2link", help="string link of a linear tree")
    p.add_argument("--oindex", required=True)
    p.add_argument("--strands", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree2link)

    p = sub.add_parser("algebra", parents=[fmt], help="chord diagram algebra on two strands")
    p.add_argument("what", choices=("dim", "commutator"))
    p.add_argument("--degree", type=int)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--primes", type=int)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--max-rows", type=int, default=None)
    p.add_argument("--method", choices=("auto", "graded", "eliminate"), default="auto",
                   help="graded: exact loop-degree certificate; eliminate: FI+4T row reduction")
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("reproduce", help="rerun the reference computations")
    p.add_argument("target", nargs="?", default="all", choices=("all",) + TARGETS)
    p.add_argument("--primes", type=int)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 1
    except (StringLinkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
