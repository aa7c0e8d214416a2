"""Command-line interface.

Exit status is 0 on success, 1 on usage errors and 2 on numeric or
verification failures.
"""

import argparse
import json
import sys

import numpy as np

from . import analysis, sim
from .channel import anticommutation_pairs, observed_r_pattern, random_channel, theorem1_check
from .codes import CODE_NAMES, get_code
from .constellation import ConstellationError, from_name

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _symbols(text: str) -> np.ndarray:
    try:
        return np.array([complex(s.strip().replace("i", "j")) for s in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse symbols {text!r}") from exc


def _fmt_complex(z: complex) -> str:
    re, im = (0.0 if abs(v) < 5e-13 else v for v in (z.real, z.imag))
    return f"{re:+.6f}{im:+.6f}j"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_encode(args) -> int:
    code = get_code(args.code)
    x = _symbols(args.symbols)
    if len(x) != code.k:
        raise UsageError(f"{code.name} takes {code.k} symbols, got {len(x)}")
    s = code.encode(x)
    if args.json:
        print(json.dumps({"code": code.name, "real": s.real.tolist(), "imag": s.imag.tolist()}))
    else:
        for row in s:
            print("  ".join(_fmt_complex(z) for z in row))
    return EXIT_OK


def cmd_mindet(args) -> int:
    code, const = get_code(args.code), from_name(args.qam)
    if args.sampled:
        rep = analysis.min_det_sampled(code, const, samples=args.sampled, seed=args.seed)
    else:
        try:
            rep = analysis.min_det_search(code, const, cap=args.cap)
        except analysis.SearchBudgetExceeded as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
    if args.json:
        print(rep.to_json())
    else:
        print(f"{rep.delta_min:.6f}")
    return EXIT_OK if rep.full_rank else EXIT_NUMERIC


def cmd_rpattern(args) -> int:
    code = get_code(args.code)
    pat = observed_r_pattern(code, trials=args.trials, zero_tol=args.zero_tol,
                             rng=np.random.default_rng(args.seed))
    print(pat.to_json() if args.json else pat.ascii())
    return EXIT_OK


def cmd_theorem1(args) -> int:
    code = get_code(args.code)
    rng = np.random.default_rng(args.seed)
    worst = {"max_h_violation": 0.0, "max_q_violation": 0.0}
    for _ in range(args.trials):
        rep = theorem1_check(code, random_channel(rng, args.n_r, code.n_t))
        for key in worst:
            worst[key] = max(worst[key], rep[key])
    out = {"code": code.name, "pairs": anticommutation_pairs(code), "trials": args.trials, **worst}
    print(json.dumps(out))
    return EXIT_OK if max(worst.values()) < args.tol else EXIT_NUMERIC


def cmd_generator(args) -> int:
    g = get_code(args.code).generator
    if args.json:
        print(json.dumps({"code": args.code, "G": g.tolist()}))
    else:
        with np.printoptions(precision=6, suppress=True, linewidth=200):
            print(g)
        dev = np.max(np.abs(g.T @ g - np.eye(g.shape[1])))
        print(f"max |G^T G - I| = {dev:.3e}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        snrs = sim.parse_snr_range(args.snr)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cfg = sim.SimConfig(args.code, args.decoder, args.qam, snrs, args.trials, args.seed,
                        n_r=args.n_r, workers=args.threads)
    points = sim.run_cer_sweep(cfg)
    _emit(sim.to_csv(points), args.out)
    if args.json:
        meta = {
            "code": cfg.code_name, "decoder": cfg.decoder_name, "constellation": args.qam,
            "trials_per_point": cfg.trials_per_point, "seed": cfg.seed, "n_r": cfg.n_r,
            "snr_definition": sim.SNR_DEFINITION,
            "energy_scale": sim.energy_scale(get_code(cfg.code_name), from_name(args.qam)),
            "points": [p.to_dict() for p in points],
        }
        with open(args.json, "w") as fh:
            json.dump(meta, fh, indent=2)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import CRITERIA, run_checks

    numbers = None
    if args.only:
        numbers = [int(v) for v in args.only.split(",")]
        if any(n not in CRITERIA for n in numbers):
            raise UsageError(f"criteria are numbered 1..{len(CRITERIA)}")
    results = run_checks(numbers, report=lambda r: print(r.line(), flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed"
          + (f"; failed: {failed}" if failed else ""))
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stbc", description="Full-rate low-complexity STBC toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("encode", help="print the codeword for a symbol vector")
    e.add_argument("--code", required=True, choices=CODE_NAMES)
    e.add_argument("--symbols", required=True, help="comma-separated complex symbols, e.g. 1+1j,-1,3j,0")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_encode)

    a = sub.add_parser("analyze", help="structural analysis")
    asub = a.add_subparsers(dest="analysis", required=True, parser_class=_Parser)

    m = asub.add_parser("mindet", help="minimum determinant over codeword differences")
    m.add_argument("--code", required=True, choices=CODE_NAMES)
    m.add_argument("--qam", default="4")
    m.add_argument("--cap", type=int, default=analysis.DEFAULT_CAP)
    m.add_argument("--sampled", type=int, default=0, metavar="N",
                   help="random upper bound from N samples instead of exhaustive search")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_mindet)

    r = asub.add_parser("rpattern", help="observed zero pattern of R")
    r.add_argument("--code", required=True, choices=CODE_NAMES)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--zero-tol", type=float, default=1e-9)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_rpattern)

    t = asub.add_parser("theorem1", help="orthogonality of H_eq columns for anticommuting weights")
    t.add_argument("--code", required=True, choices=CODE_NAMES)
    t.add_argument("--trials", type=int, default=100)
    t.add_argument("--n-r", type=int, default=2)
    t.add_argument("--tol", type=float, default=1e-10)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_theorem1)

    g = asub.add_parser("generator", help="print the generator matrix")
    g.add_argument("--code", required=True, choices=CODE_NAMES)
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_generator)

    s = sub.add_parser("simulate", help="Monte Carlo simulation")
    ssub = s.add_subparsers(dest="sim", required=True, parser_class=_Parser)
    c = ssub.add_parser("cer", help="codeword error rate sweep, CSV output")
    c.add_argument("--code", required=True, choices=CODE_NAMES)
    c.add_argument("--decoder", default="fast", choices=sim.DECODERS)
    c.add_argument("--qam", default="4")
    c.add_argument("--snr", required=True, help="start:step:stop in dB (inclusive) or a,b,c")
    c.add_argument("--trials", type=int, default=10000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--n-r", type=int, default=2)
    c.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $STBC_THREADS or 1)")
    c.add_argument("--out", help="CSV path (default stdout)")
    c.add_argument("--json", metavar="PATH", help="also write JSON with metadata")
    c.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConstellationError, sim.ConfigurationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
