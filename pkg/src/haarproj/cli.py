"""haarproj command line: projection constants, counts, Sidon bounds and experiments."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import constants, experiments, indexsets, integrate, kernels, numtheory, sidon
from .dirichlet import METHODS, DirichletSpace, Frequency, projection_constant
from .experiments import REGISTRY, _dump, emit, run_experiment
from .indexsets import IndexSet

CONSTANT_OPS = {
    "l2_complex": constants.proj_l2_complex,
    "l2_real": constants.proj_l2_real,
    "l1_real": constants.proj_l1_real,
    "l1_complex": constants.proj_l1_complex,
    "kadets_snobar": constants.kadets_snobar,
    "lewis": constants.lewis_bound,
}


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    return [int(float(t)) for t in text.split(",") if t.strip()]


def _read_ints(path: str) -> list[int]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(int(line))
    return out


def parse_frequency(spec: str, b2: bool = False) -> Frequency:
    if spec.startswith("file:"):
        freq = Frequency.load(spec[5:])
        return Frequency(freq.kind, freq.values, freq.b2 or b2) if b2 else freq
    kinds = {"natural": "natural", "logn": "log_integers", "logp": "log_primes"}
    if spec in kinds:
        return Frequency(kinds[spec], b2=b2)
    raise UsageError(f"unknown frequency {spec!r}")


def parse_support(spec: str, freq: Frequency) -> list[int]:
    kind, _, arg = spec.partition(":")
    if kind == "upto":
        return list(range(freq.first_index, int(arg) + 1))
    if kind == "range":
        a, b = _ints(arg)
        return list(range(a, b + 1))
    if kind == "n1":
        m, x = _ints(arg)
        return [int(v) for v in numtheory.n1_numbers(m, x)]
    if kind == "ninf":
        m, n = _ints(arg)
        return indexsets.ninf_numbers(m, n)
    if kind == "file":
        return _read_ints(arg)
    raise UsageError(f"unknown support {spec!r}")


def parse_index_set(spec: str) -> IndexSet:
    kind, _, arg = spec.partition(":")
    if kind == "range":
        a, b = _ints(arg)
        return IndexSet(1, np.arange(a, b + 1).reshape(-1, 1))
    if kind == "basis":
        n = int(arg)
        return IndexSet(n, np.eye(n, dtype=np.int64))
    if kind == "box":
        return indexsets.generate("box", d=_ints(arg))
    if kind == "file":
        return IndexSet.load(arg)
    raise UsageError(f"unknown index set {spec!r}")


def _budget(args, default_samples: int) -> integrate.MCConfig:
    return integrate.MCConfig(samples=args.samples or default_samples, seed=args.seed,
                              blocks=args.blocks)


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _flat_csv(record: dict) -> str:
    keys = list(record)
    vals = [experiments.fmt_float(v) if isinstance(v, float) else str(v) for v in record.values()]
    return ",".join(keys) + "\n" + ",".join(vals) + "\n"


def _out(args, record: dict) -> None:
    text = _flat_csv(record) if args.format == "csv" else _dump(record) + "\n"
    _write(text, args.out)


# -- subcommands --------------------------------------------------------------


def cmd_lebesgue(args) -> int:
    ms = _ints(args.m)
    fn = kernels.lebesgue_L if args.kind == "symmetric" else kernels.lebesgue_Lplus
    rows = [{"m": m, "kind": args.kind, "value": fn(m)} for m in ms]
    if args.format == "csv":
        lines = ["m,kind,value"] + [f"{r['m']},{r['kind']},{experiments.fmt_float(r['value'])}" for r in rows]
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(_dump(rows if len(rows) > 1 else rows[0]) + "\n", args.out)
    return 0


def cmd_constants(args) -> int:
    if args.name in CONSTANT_OPS:
        value = CONSTANT_OPS[args.name](args.n)
        _out(args, {"name": args.name, "n": args.n, "value": value})
    elif args.name in constants.CURVES:
        value = constants.reference_curve(args.name, args.x, n=args.n, m=args.curve_m)
        _out(args, {"name": args.name, "x": args.x, "value": value})
    else:
        raise UsageError(f"unknown constant {args.name!r}")
    return 0


def cmd_count(args) -> int:
    fam = args.family
    params = {}
    for key in ("p", "m", "n", "x"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    if args.d is not None:
        params["d"] = _ints(args.d)
    if fam == "lambda_exact" and str(params.get("p", 1)) == "1" and not args.write:
        count = indexsets.cardinality_lambda1(params["m"], params["n"])
    elif fam == "sphere" and not args.write:
        count = indexsets.lattice_count(params["m"], params["n"])
    else:
        S = indexsets.generate(fam, cap=args.cap, **params)
        count = len(S)
        if args.write:
            S.save(args.write)
    _out(args, {"family": fam, **{k: (",".join(map(str, v)) if isinstance(v, list) else v)
                                  for k, v in params.items()}, "count": count})
    return 0


def cmd_proj(args) -> int:
    if args.frequency == "qindep":
        # any Q-independent values will do; logs of primes are one such choice
        J = parse_support(args.support, Frequency("log_primes"))
        values = np.log(np.asarray(numtheory.nth_primes(max(J)), dtype=float))
        freq = Frequency("q_independent_explicit", values, args.b2)
    else:
        freq = parse_frequency(args.frequency, args.b2)
        J = parse_support(args.support, freq)
    space = DirichletSpace(freq, J)
    res = projection_constant(space, args.method, _budget(args, 1 << 16),
                              rel_target=args.rel_target, T=args.T)
    _out(args, res.to_dict())
    if res.warning:
        print(f"warning: {res.warning}", file=sys.stderr)
    return 0


def cmd_sidon(args) -> int:
    J = parse_index_set(args.support)
    est = sidon.sidon_bounds(J, args.budget, args.grid, args.seed)
    rec = est.to_dict()
    if args.format == "csv":
        short = {k: v for k, v in rec.items() if not k.startswith("witness")}
        _write(_flat_csv(short), args.out)
    else:
        _write(_dump(rec) + "\n", args.out)
    return 0


def _list_text() -> str:
    width = max(len(n) for n in REGISTRY)
    return "\n".join(f"  {e.name:<{width}}  {e.anchor}" for e in REGISTRY.values())


def cmd_list(args) -> int:
    print(_list_text())
    return 0


def cmd_experiment(args) -> int:
    names = list(REGISTRY) if args.name == "all" else [args.name]
    if args.name != "all" and args.name not in REGISTRY:
        raise UsageError(f"unknown experiment {args.name!r}; known: {', '.join(REGISTRY)}")
    status = 0
    for name in names:
        params = {"seed": args.seed, "samples": args.samples, "blocks": args.blocks}
        if args.x:
            key = {"lozinski": "xs", "harper": "xs", "logp-limit": "ns", "babenko": "ms",
                   "limit-formula": "ms", "landau": "xs"}.get(name)
            if key:
                params[key] = _ints(args.x)
        report = run_experiment(name, **params)
        fmt = args.format or "csv"
        if args.name == "all":
            if not args.out:
                raise UsageError("experiment all needs --out DIR")
            os.makedirs(args.out, exist_ok=True)
            emit(report, fmt, os.path.join(args.out, f"{name}.{fmt}"))
        elif args.out in (None, "-"):
            sys.stdout.write(emit(report, fmt))
        else:
            emit(report, fmt, args.out)
        if not report.passed:
            status = 1
            print(f"{name}: FAILED", file=sys.stderr)
            for f in report.failures:
                print(f"  {f}", file=sys.stderr)
        else:
            print(f"{name}: ok", file=sys.stderr)
    return status


# -- parser -------------------------------------------------------------------


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    p.add_argument("--samples", type=int, default=d(None), help="sample budget")
    p.add_argument("--blocks", type=int, default=d(32), help="independent blocks / shifts (default 32)")
    p.add_argument("--jobs", type=int, default=d(1), help="worker threads (default 1)")
    p.add_argument("--out", default=d(None), help="output file (or directory for 'experiment all')")
    p.add_argument("--format", choices=("json", "csv"), default=d(None), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarproj",
        description="Projection constants of spaces of Dirichlet and trigonometric polynomials.",
        epilog="experiments:\n" + _list_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _globals(parser, False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _globals(p, True)
        return p

    p = add("lebesgue", "Lebesgue constants L_m or L_m^+")
    p.add_argument("--m", required=True, help="degree or comma-separated degrees")
    p.add_argument("--kind", choices=("symmetric", "analytic"), default="symmetric")
    p.add_argument("--plus", dest="kind", action="store_const", const="analytic",
                   help="shorthand for --kind analytic")
    p.set_defaults(func=cmd_lebesgue)

    p = add("constants", "closed forms and reference curves")
    p.add_argument("--name", required=True, choices=list(CONSTANT_OPS) + list(constants.CURVES))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--x", type=float, default=None, help="argument of a reference curve")
    p.add_argument("--curve-m", type=int, default=1, help="m for the landau curve")
    p.set_defaults(func=cmd_constants)

    p = add("count", "size of an index family")
    p.add_argument("--family", required=True, choices=indexsets.FAMILIES[:-1])
    p.add_argument("--p", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--d", default=None, help="box degrees, comma separated")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--write", default=None, help="also write the set to this file")
    p.set_defaults(func=cmd_count)

    p = add("proj", "projection constant of H^J(omega)")
    p.add_argument("--frequency", required=True, help="natural | logn | logp | qindep | file:PATH")
    p.add_argument("--support", required=True, help="upto:x | range:a,b | n1:m,x | ninf:m,n | file:PATH")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--b2", action="store_true", help="declare the characters a B2 set")
    p.add_argument("--rel-target", type=float, default=0.005)
    p.add_argument("--T", type=float, default=1e4, help="horizon for the ergodic engine")
    p.set_defaults(func=cmd_proj)

    p = add("sidon", "certified Sidon constant bounds")
    p.add_argument("--support", required=True, help="range:a,b | basis:n | box:d1,d2 | file:PATH")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--budget", type=int, default=64)
    p.set_defaults(func=cmd_sidon)

    p = add("experiment", "run a registered experiment ('all' runs every one)")
    p.add_argument("name")
    p.add_argument("--x", default=None, help="override the row parameters, comma separated")
    p.set_defaults(func=cmd_experiment)

    p = add("list-experiments", "list registered experiments")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    integrate.set_jobs(args.jobs)
    if args.format is None and args.command != "experiment":
        args.format = "json"
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, indexsets.CardinalityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
