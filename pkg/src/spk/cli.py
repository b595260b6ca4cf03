"""Command-line surface: gen | profile | bound | exact | verify | report.

Chains travel as JSON kernels (stdin/stdout by default), so subcommands
compose in pipes: `spk gen complete --n 10 | spk exact --p inf --eps 1/e`.
Exit codes: 0 success, 2 validation failure, 3 size cap, 4 parse error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import profiles as P
from .errors import ParseError, SizeCap, SpkError, ValidationFailed
from .exact import distance_curve, exact_tau
from .formats import chain_from_edge_csv, chain_from_json, chain_to_json
from .report import ReportOptions, build_report, write_report
from .verify import run_suites
from .zoo import complete_graph, cycle, torus_product, viscek

EXIT_VALIDATION = 2
EXIT_SIZE = 3
EXIT_PARSE = 4


def parse_epsilon(text):
    if text.strip() in ("1/e", "1/E"):
        return math.exp(-1)
    try:
        return float(text)
    except ValueError as e:
        raise ParseError(f"bad epsilon {text!r}") from e


def parse_p(text):
    if text in ("inf", "oo", "Inf"):
        return np.inf
    try:
        return int(text)
    except ValueError as e:
        raise ParseError(f"bad p {text!r}; use 1, 2 or inf") from e


def _read_chain(args):
    if getattr(args, "input", None):
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return chain_from_json(text)
    return chain_from_edge_csv(text)


def _write_text(args, text):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    if args.kind == "complete":
        chain = complete_graph(args.n)
    elif args.kind == "cycle":
        chain = cycle(args.n, lazy_alpha=args.lazy)
    elif args.kind == "viscek":
        _, chain = viscek(args.N, args.gen)
    elif args.kind == "torus":
        chain = torus_product(args.a, args.b)
    else:
        raise ParseError(f"unknown generator {args.kind!r}")
    _write_text(args, chain_to_json(chain) + "\n")
    return 0


def cmd_exact(args):
    chain = _read_chain(args)
    eps = parse_epsilon(args.eps)
    value = exact_tau(chain, parse_p(args.p), eps, mode=args.mode)
    if args.mode == "discrete":
        _write_text(args, f"{value}\n")
    else:
        _write_text(args, f"{value:.9g}\n")
    return 0


def cmd_profile(args):
    chain = _read_chain(args)
    profs = []
    if args.profile_mode in ("exhaustive", "connected"):
        band = P.spectral_profile_exhaustive(chain, cap=args.cap,
                                             mode=args.profile_mode)
        profs.extend([band.lower, band.upper])
        phi, phi_star = P.conductance_profile(chain, cap=args.cap)
        profs.extend([phi, phi_star])
    elif args.profile_mode == "envelopes":
        growth = P.growth_data(chain)
        lam1 = P.spectral_gap(chain)
        profs.append(P.volume_profile_bound(chain, growth=growth)
                     .floored_at(lam1))
        if args.poincare_a:
            profs.append(P.poincare_profile_bound(chain, args.poincare_a,
                                                  growth=growth))
        profs.append(P.conductance_lower_envelope(chain)[0])
    else:
        raise ParseError(f"unknown profile mode {args.profile_mode!r}")
    if args.format == "json":
        _write_text(args, json.dumps([p.to_json() for p in profs],
                                     indent=2) + "\n")
    else:
        _write_text(args, P.profile_csv(profs))
    return 0


def cmd_bound(args):
    chain = _read_chain(args)
    opts = _report_options(args)
    report = build_report(chain, name=args.name, opts=opts)
    if args.format == "json":
        _write_text(args, report.to_json() + "\n")
    else:
        _write_text(args, report.csv())
    return 0


def cmd_exact_curve(args):
    chain = _read_chain(args)
    curve = distance_curve(chain, parse_p(args.p))
    _write_text(args, curve.csv())
    return 0


def cmd_verify(args):
    names = args.suite.split(",") if args.suite else ["all"]
    failures = run_suites(names, seed=args.seed)
    for f in failures:
        sys.stderr.write(f"violation: {f}\n")
    sys.stdout.write(f"{'FAIL' if failures else 'OK'}: "
                     f"{len(failures)} violation(s)\n")
    return EXIT_VALIDATION if failures else 0


def cmd_report(args):
    chain = _read_chain(args)
    opts = _report_options(args)
    opts.figures = not args.no_figures
    report, written = write_report(chain, args.name, args.outdir, opts=opts)
    for path in written:
        sys.stdout.write(path + "\n")
    return 0


def _report_options(args):
    opts = ReportOptions()
    opts.eps = parse_epsilon(args.eps)
    if getattr(args, "cap", None):
        opts.enumeration_cap = args.cap
    if getattr(args, "poincare_a", None):
        opts.poincare_a = args.poincare_a
    if getattr(args, "rho", None):
        opts.rho = args.rho
    if getattr(args, "estimate_rho", False):
        opts.estimate_rho = True
    if getattr(args, "nash", None):
        C, D, T = (float(x) for x in args.nash.split(","))
        opts.nash = (C, D, T)
    if getattr(args, "moderate_growth", None):
        A, d = (float(x) for x in args.moderate_growth.split(","))
        opts.moderate_growth = (A, d)
    if getattr(args, "discrete", False):
        opts.discrete = True
    if getattr(args, "seed", None) is not None:
        opts.seed = args.seed
    return opts


def _add_chain_io(sub):
    sub.add_argument("--in", dest="input", default=None,
                     help="chain file (JSON kernel or src,dst,prob CSV); "
                          "stdin by default")
    sub.add_argument("-o", "--out", dest="output", default=None,
                     help="output path; stdout by default")


def _add_bound_flags(sub):
    sub.add_argument("--eps", default="1/e")
    sub.add_argument("--cap", type=int, default=P.ENUMERATION_CAP)
    sub.add_argument("--poincare-a", dest="poincare_a", type=float,
                     default=None)
    sub.add_argument("--rho", type=float, default=None)
    sub.add_argument("--estimate-rho", dest="estimate_rho",
                     action="store_true")
    sub.add_argument("--nash", default=None, metavar="C,D,T")
    sub.add_argument("--moderate-growth", dest="moderate_growth",
                     default=None, metavar="A,d")
    sub.add_argument("--discrete", action="store_true")
    sub.add_argument("--name", default="chain")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="spk",
        description="Spectral-profile analysis of finite Markov chains",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a benchmark chain")
    gen_subs = gen.add_subparsers(dest="kind", required=True)
    g = gen_subs.add_parser("complete")
    g.add_argument("--n", type=int, required=True)
    _add_chain_io(g)
    g = gen_subs.add_parser("cycle")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--lazy", type=float, default=0.0)
    _add_chain_io(g)
    g = gen_subs.add_parser("viscek")
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--gen", type=int, required=True)
    _add_chain_io(g)
    g = gen_subs.add_parser("torus")
    g.add_argument("--a", type=int, required=True)
    g.add_argument("--b", type=int, required=True)
    _add_chain_io(g)

    ex = subs.add_parser("exact", help="exact mixing time")
    ex.add_argument("--p", default="inf")
    ex.add_argument("--eps", default="1/e")
    ex.add_argument("--mode", choices=["continuous", "discrete"],
                    default="continuous")
    _add_chain_io(ex)

    curve = subs.add_parser("curve", help="distance curve CSV")
    curve.add_argument("--p", default="inf")
    _add_chain_io(curve)

    prof = subs.add_parser("profile", help="spectral/conductance profiles")
    prof.add_argument("--profile-mode", dest="profile_mode",
                      choices=["exhaustive", "connected", "envelopes"],
                      default="connected")
    prof.add_argument("--cap", type=int, default=P.ENUMERATION_CAP)
    prof.add_argument("--poincare-a", dest="poincare_a", type=float,
                      default=None)
    prof.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_chain_io(prof)

    bound = subs.add_parser("bound", help="all applicable mixing bounds")
    _add_bound_flags(bound)
    bound.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_chain_io(bound)

    ver = subs.add_parser("verify", help="run randomized invariant suites")
    ver.add_argument("--suite", default="all",
                     help="comma list: core,cheeger,abs,ebound,gap")
    ver.add_argument("--seed", type=int, default=0)

    rep = subs.add_parser("report", help="bounds vs exact, CSV/JSON/figures")
    _add_bound_flags(rep)
    rep.add_argument("--outdir", default="report_out")
    rep.add_argument("--no-figures", dest="no_figures", action="store_true")
    rep.add_argument("--seed", type=int, default=0)
    _add_chain_io(rep)

    return parser


_HANDLERS = {
    "gen": cmd_gen,
    "exact": cmd_exact,
    "curve": cmd_exact_curve,
    "profile": cmd_profile,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ParseError as e:
        sys.stderr.write(f"parse error: {e}\n")
        return EXIT_PARSE
    except SizeCap as e:
        sys.stderr.write(f"size cap: {e}\n")
        return EXIT_SIZE
    except ValidationFailed as e:
        sys.stderr.write(f"validation failed: {e}\n")
        return EXIT_VALIDATION
    except SpkError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
