"""Command-line front end.

Every subcommand writes machine-readable output (JSON, JSON lines or CSV)
that starts with the schema version and the full run configuration. The
configuration leaves out ``--threads`` and ``--out`` so that output bytes
depend only on the arguments that change results.

Exit codes: 0 success, 2 invalid parameters, 3 work budget exhausted.
"""
from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import SCHEMA_VERSION, diophantine, limitlaw, periodic, sequences, stats
from ._accel import set_threads
from .errors import InvalidParameter, WorkBudgetExceeded

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3
_UNRECORDED = ("threads", "out", "handler")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidParameter(message)


# -- argument helpers -----------------------------------------------------------------

def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"expected comma-separated numbers, got {text!r}") from None


def _strict(kind):
    """Turn malformed option text into an invalid-parameter error."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapped(text):
            try:
                return fn(text)
            except ValueError:
                raise InvalidParameter(f"malformed {kind}: {text!r}") from None
        return wrapped
    return deco


@_strict("index block")
def _index_block(text):
    """``lo-hi`` (inclusive) or a comma list of 1-based indices."""
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return _int_list(text)


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidParameter(f"not a rational number: {text!r}") from None


@_strict("grid")
def _grid(text):
    """``lo:hi:count`` linear grid or a comma list."""
    if text.count(":") == 2:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    return np.array(_float_list(text))


@_strict("checkpoint list")
def _checkpoints(text):
    """``range:lo:hi`` (every N), ``geom:lo:hi:ratio`` or a comma list."""
    kind, _, rest = text.partition(":")
    if kind == "range":
        lo, hi = (int(v) for v in rest.split(":"))
        return list(range(lo, hi + 1))
    if kind == "geom":
        lo, hi, q = rest.split(":")
        lo, hi, q = int(lo), int(hi), float(q)
        if q <= 1 or lo < 1:
            raise InvalidParameter("geometric checkpoints need lo >= 1 and ratio > 1")
        out, v = [], float(lo)
        while round(v) <= hi:
            if not out or round(v) > out[-1]:
                out.append(int(round(v)))
            v *= q
        return out
    return _int_list(text)


def _function(args):
    if getattr(args, "function_file", None):
        with open(args.function_file, encoding="utf-8") as fh:
            return periodic.parse_function_text(fh.read())
    return periodic.parse_function(args.function)


def _read_seq(path):
    try:
        return sequences.read_sequence(sys.stdin if path == "-" else path)
    except OSError as exc:
        raise InvalidParameter(f"cannot read sequence file: {exc}") from None


def _order(args, seq, N):
    """1-based index list for the summation order, or ``None`` for the natural order."""
    if args.order == "natural":
        return None
    sub = sequences.block_subsequence_indices(seq)
    if args.order == "block-sub":
        return sub
    return sequences.permute_interleave(sub, N)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNRECORDED}


# -- output -------------------------------------------------------------------------

def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _envelope(args, result) -> str:
    return _dump_json({"schema": SCHEMA_VERSION, "config": _config(args), "result": result})


def _csv_text(args, tables) -> str:
    """``tables`` is a list of ``(name, header, rows)``."""
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_VERSION}\n")
    buf.write(f"# config={json.dumps(_config(args), sort_keys=True, separators=(',', ':'))}\n")
    for name, header, rows in tables:
        buf.write(f"# table={name}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt(args, default="json"):
    return args.format or default


# -- subcommands ------------------------------------------------------------------

def cmd_gen(args):
    fam = args.family
    if fam == "geometric":
        seq = sequences.gen_geometric(args.base, args.count)
    elif fam == "erdos-fortet":
        seq = sequences.gen_erdos_fortet(args.count)
    elif fam == "super-lacunary":
        seq = sequences.gen_super_lacunary(args.count)
    elif fam == "block":
        r = _int_list(args.r) if args.r else None
        params = sequences.default_block_params(args.variant, args.count, r=r, m1=args.m1)
        seq = sequences.gen_block_sequence(params)
    elif fam == "random-omega":
        omega = sequences.omega_preset(args.omega)
        seq = sequences.gen_random_omega(omega, args.a, args.count, args.seed)
    elif fam == "hlp":
        seq = sequences.gen_hlp(_int_list(args.primes), args.count,
                                include_one=not args.exclude_one)
    else:  # pragma: no cover - argparse restricts the choices
        raise InvalidParameter(f"unknown family {fam!r}")
    if _fmt(args, "text") == "json":
        return _envelope(args, {"family_tag": seq.family_tag, "params": seq.params,
                                "seed": seq.seed, "fingerprint": seq.fingerprint(),
                                "terms": [str(t) for t in seq.terms]})
    buf = io.StringIO()
    sequences.write_sequence(seq, buf, {
        "schema": SCHEMA_VERSION,
        "config": json.dumps(_config(args), sort_keys=True, separators=(",", ":"))})
    return buf.getvalue()


def cmd_gap(args):
    seq = _read_seq(args.seq)
    eps = sequences.block_gap_eps(seq) if args.eps == "block" else _fraction(args.eps)
    rep = sequences.check_gap(seq, eps, args.k0)
    res = {"ok": rep.ok, "first_violation": rep.first_violation,
           "ratio": None if rep.ratio is None else str(rep.ratio),
           "required": None if rep.required is None else str(rep.required)}
    if _fmt(args) == "csv":
        return _csv_text(args, [("gap", list(res), [list(res.values())])])
    return _envelope(args, res)


def cmd_dioph(args):
    seq = _read_seq(args.seq)
    terms = seq.terms[: args.N] if args.N else seq.terms
    lo_hi = tuple(_int_list(args.index_range)) if args.index_range else None
    query = diophantine.DiophantineQuery(args.r, args.amax, lo_hi)
    sols = diophantine.count_solutions(terms, query, budget=args.budget)
    if _fmt(args) == "csv":
        rows = [(" ".join(map(str, s.indices)), " ".join(map(str, s.coeffs)),
                 " ".join(str(e) for e in s.elements(terms))) for s in sols]
        return _csv_text(args, [("solutions", ["indices", "coeffs", "elements"], rows)])
    lines = [_dump_json({"schema": SCHEMA_VERSION, "config": _config(args), "count": len(sols)})]
    lines.extend(_dump_json(s.to_json(terms)) for s in sols)
    return "".join(lines)


def cmd_aomega(args):
    seq = _read_seq(args.seq)
    terms = seq.terms[: args.K] if args.K else seq.terms
    omega = sequences.omega_preset(args.omega)
    if args.eta:
        omega = omega.eta()
    verdict = diophantine.check_a_omega(terms, omega, args.level, (args.rmax, args.amax),
                                        budget=args.budget)
    res = verdict.to_json()
    if _fmt(args) == "csv":
        wit = res.get("witness", {})
        row = [res["level"], res["caps"][0], res["caps"][1], res["outcome"],
               " ".join(map(str, wit.get("indices", []))),
               " ".join(map(str, wit.get("coeffs", [])))]
        return _csv_text(args, [("verdict", ["level", "rmax", "amax", "outcome",
                                             "witness_indices", "witness_coeffs"], [row])])
    return _envelope(args, res)


def cmd_moments(args):
    f = _function(args)
    seq = _read_seq(args.seq)
    if args.block_a or args.block_b:
        if not (args.block_a and args.block_b):
            raise InvalidParameter("mixed moments need both --block-a and --block-b")
        A, B = _index_block(args.block_a), _index_block(args.block_b)
        mixed = diophantine.moment_mixed(f, seq, A, B, args.p, args.q, budget=args.budget)
        va = diophantine.block_moment(f, seq, A, 2, budget=args.budget)
        vb = diophantine.block_moment(f, seq, B, 2, budget=args.budget)
        res = {"p": args.p, "q": args.q, "moment": mixed,
               "normalized": mixed / (va ** (args.p / 2) * vb ** (args.q / 2)),
               "gaussian": diophantine.gaussian_moment_constant(args.p)
               * diophantine.gaussian_moment_constant(args.q)}
    else:
        N = args.N if args.N is not None else len(seq)
        m = diophantine.moment_exact(f, seq, N, args.p, budget=args.budget)
        scale = (N * periodic.norm_sq(f)) ** (args.p / 2) if N else 1.0
        res = {"N": N, "p": args.p, "moment": m, "normalized": m / scale,
               "gaussian": diophantine.gaussian_moment_constant(args.p)}
        if args.p == 4 and N:
            m2 = diophantine.moment_exact(f, seq, N, 2, budget=args.budget)
            res["fourth_moment_ratio"] = m / (3 * m2 * m2) if m2 else None
    if _fmt(args) == "csv":
        return _csv_text(args, [("moments", list(res), [list(res.values())])])
    return _envelope(args, res)


def _sample_spec(args):
    if args.random is not None:
        return stats.SampleSpec("random", args.random, precision_bits=args.bits, seed=args.seed)
    return stats.SampleSpec("grid", args.grid, _fraction(args.offset), seed=args.seed)


def _clt_variance(args, f, sample):
    v = args.variance
    if v == "norm":
        return periodic.norm_sq(f)
    if v == "fit":
        return float(np.var(sample.values))
    if v.startswith("kac"):
        base = int(v.partition(":")[2] or 2)
        return periodic.kac_variance(f, base)
    try:
        return float(v)
    except ValueError:
        raise InvalidParameter(f"unknown variance choice {v!r}") from None


def cmd_clt(args):
    f = _function(args)
    seq = _read_seq(args.seq)
    N = args.N
    perm = _order(args, seq, N)
    sample = stats.sample_sums(f, seq, perm, N, _sample_spec(args))
    if _fmt(args) == "csv":
        return _csv_text(args, [("samples", ["x_index", "value"], enumerate(sample.values.tolist()))])
    var = _clt_variance(args, f, sample)
    mean = float(np.mean(sample.values)) if args.variance == "fit" else 0.0
    ks = stats.ks_distance(sample, stats.normal_cdf(mean, var)) if var > 0 else None
    cf = [[t, *(lambda z: (z.real, z.imag))(stats.empirical_cf(sample, t))]
          for t in _float_list(args.cf_t)]
    res = {"N": N, "M": len(sample), "variance": var, "ks": ks,
           "kurtosis": stats.excess_kurtosis(sample) if N else None,
           "ks_best_normal": stats.ks_best_normal(sample) if N else None,
           "cf": cf, "sequence_fingerprint": sample.seq_fingerprint,
           "permutation_fingerprint": sample.perm_fingerprint}
    return _envelope(args, res)


def cmd_lil(args):
    f = _function(args)
    seq = _read_seq(args.seq)
    cks = _checkpoints(args.checkpoints)
    perm = _order(args, seq, cks[-1] if cks else 0)
    terms = seq.terms if perm is None else [seq.terms[k - 1] for k in perm[: cks[-1]]]
    bits = max(t.bit_length() for t in terms[: cks[-1]]) + 64
    points = stats.random_points(args.points, bits, args.seed)
    table = stats.lil_scan(f, seq, perm, points, cks, two_sided=args.two_sided)
    if _fmt(args) == "csv":
        rows = ((i, n, float(table.ratios[i, c]))
                for i in range(len(points)) for c, n in enumerate(table.checkpoints))
        return _csv_text(args, [("lil", ["x_index", "N", "ratio"], rows)])
    final = table.final_max()
    res = {"points": len(points), "first_checkpoint": cks[0], "last_checkpoint": cks[-1],
           "checkpoints": len(cks), "norm": periodic.l2_norm(f),
           "running_max": final.tolist(),
           "median_running_max": float(np.median(final))}
    return _envelope(args, res)


def cmd_levy(args):
    kw = {name: _grid(getattr(args, name))
          for name in ("t_grid", "x_grid", "cf_grid", "y_grid") if getattr(args, name)}
    want = ("FG", "L", "cf", "cdf") if args.table == "all" else (args.table,)
    tables = limitlaw.tabulate(which=want, **kw)
    headers = {"FG": ["t", "F", "G"], "L": ["x", "L", "density"],
               "cf": ["t", "re", "im"], "cdf": ["y", "cdf"]}
    if _fmt(args, "csv") == "csv":
        return _csv_text(args, [(n, headers[n], tables[n]) for n in want])
    return _envelope(args, {n: [dict(zip(headers[n], row)) for row in tables[n]] for n in want})


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    common.add_argument("--threads", type=int, default=None, help="worker threads (numba backend)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)

    p = _Parser(prog="lacunary", description="Experiments with lacunary trigonometric sums.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        sp.set_defaults(handler=handler)
        return sp

    def add_function(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--function", help="shorthand such as cos:1:1.0,sin:2:0.5")
        g.add_argument("--function-file", help="file with 'cos j coeff' / 'sin j coeff' lines")

    def add_order(sp):
        sp.add_argument("--order", choices=("natural", "block-sub", "interleave"),
                        default="natural", help="summation order over the sequence")

    budget = dict(type=int, default=diophantine.DEFAULT_WORK_BUDGET, help="work budget")

    g = add("gen", cmd_gen, "generate a sequence file")
    g.add_argument("--family", required=True,
                   choices=("geometric", "erdos-fortet", "super-lacunary", "block",
                            "random-omega", "hlp"))
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--base", type=int, default=2)
    g.add_argument("--variant", choices=("clt", "lil"), default="clt")
    g.add_argument("--r", default=None, help="comma list of block lengths")
    g.add_argument("--m1", type=int, default=2)
    g.add_argument("--omega", default="sqrt", help="sqrt | logpow:A | const-plus-log:C")
    g.add_argument("--a", type=int, default=16)
    g.add_argument("--primes", default="2,3")
    g.add_argument("--exclude-one", action="store_true")

    g = add("gap", cmd_gap, "check n_{k+1}/n_k >= 1 + eps_k")
    g.add_argument("--seq", required=True)
    g.add_argument("--eps", required=True, help="constant (e.g. 1/10) or 'block'")
    g.add_argument("--k0", type=int, default=1)

    g = add("dioph", cmd_dioph, "enumerate signed relations among sequence terms")
    g.add_argument("--seq", required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--amax", type=int, required=True)
    g.add_argument("--N", type=int, default=None, help="prefix length")
    g.add_argument("--index-range", default=None, help="lo,hi (1-based, inclusive)")
    g.add_argument("--budget", **budget)

    g = add("aomega", cmd_aomega, "check the Diophantine condition at one level")
    g.add_argument("--seq", required=True)
    g.add_argument("--omega", default="sqrt")
    g.add_argument("--eta", action="store_true", help="use eta_k = sqrt(omega_k)/2")
    g.add_argument("--level", type=int, required=True)
    g.add_argument("--rmax", type=int, required=True)
    g.add_argument("--amax", type=int, required=True)
    g.add_argument("--K", type=int, default=None, help="prefix length")
    g.add_argument("--budget", **budget)

    g = add("moments", cmd_moments, "exact moments of partial sums")
    add_function(g)
    g.add_argument("--seq", required=True)
    g.add_argument("--N", type=int, default=None)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--q", type=int, default=0)
    g.add_argument("--block-a", default=None)
    g.add_argument("--block-b", default=None)
    g.add_argument("--budget", **budget)

    g = add("clt", cmd_clt, "sample normalized sums and compare with a normal law")
    add_function(g)
    g.add_argument("--seq", required=True)
    g.add_argument("--N", type=int, required=True)
    mode = g.add_mutually_exclusive_group()
    mode.add_argument("--grid", type=int, default=100003)
    mode.add_argument("--random", type=int, default=None, help="number of random points")
    g.add_argument("--offset", default="0", help="grid offset in [0,1)")
    g.add_argument("--bits", type=int, default=None, help="precision bits in random mode")
    g.add_argument("--variance", default="norm", help="norm | kac[:BASE] | fit | number")
    g.add_argument("--cf-t", default="0.5,1,2")
    add_order(g)

    g = add("lil", cmd_lil, "running LIL ratios at random points")
    add_function(g)
    g.add_argument("--seq", required=True)
    g.add_argument("--points", type=int, default=100)
    g.add_argument("--checkpoints", default="range:16:65536")
    g.add_argument("--two-sided", action="store_true")
    add_order(g)

    g = add("levy", cmd_levy, "tables of the limit law")
    g.add_argument("--table", choices=("FG", "L", "cf", "cdf", "all"), default="all")
    g.add_argument("--t-grid", default=None, help="lo:hi:n or comma list")
    g.add_argument("--x-grid", default=None)
    g.add_argument("--cf-grid", default=None)
    g.add_argument("--y-grid", default=None)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        set_threads(args.threads)
        text = args.handler(args)
        _emit(args, text)
    except InvalidParameter as exc:
        print(f"lacunary: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WorkBudgetExceeded as exc:
        print(f"lacunary: work budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
