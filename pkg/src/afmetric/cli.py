"""Command-line front door.

Subcommands build towers, compute seminorms, run convergence scans, and
assemble certificates, writing deterministic JSON/CSV records: identical
configurations produce byte-identical files (fixed seeds, no timestamps).

Exit codes: 2 invalid input, 3 precision exhausted, 4 numerical
non-convergence, 5 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__, cfrac, convergence
from .cfrac import BaireSequence, DigitStream, parse_digit_list, parse_irrational
from .errors import (
    AfmetricError,
    AgreementTooShallow,
    InvalidDigit,
    LevelOutOfRange,
    NonConvergence,
    PrecisionExhausted,
    RationalInput,
    ShapeMismatch,
)

EXIT_INPUT = 2
EXIT_PRECISION = 3
EXIT_NONCONVERGENCE = 4
EXIT_CERTIFICATE = 5

_T_WIDTH_CASCADE = (1e-13, 1e-9, 1e-6, 1e-3, 0.49)


def _frac_doc(x: Fraction) -> dict:
    return {"fraction": f"{x.numerator}/{x.denominator}", "float": float(x)}


def _tail_doc(tb) -> dict:
    return {
        "partial": _frac_doc(tb.partial),
        "remainder": _frac_doc(tb.remainder),
        "total": _frac_doc(tb.total),
    }


def _write_json(doc: dict, out: str | None):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_lines(lines: list[str], out: str | None):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args: argparse.Namespace) -> dict:
    # the output path is not part of the semantic configuration
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _parse_irrational_args(values: list[str]):
    return [parse_irrational(v) for v in values]


# ---------------------------------------------------------------------------
# cf
# ---------------------------------------------------------------------------

def _cmd_cf(args) -> int:
    handle = parse_irrational(args.surd if args.surd else args.digits)
    depth = args.depth
    digits = cfrac.cf_expand(handle, depth)
    table = cfrac.convergents(digits)

    t_weights = []
    for n in range(1, depth + 1):
        entry = None
        for width in _T_WIDTH_CASCADE:
            try:
                ival = cfrac.t_weight_interval(handle, table, n, width)
                entry = {"n": n, "value": float(ival), "certified_width": float(ival.width)}
                break
            except PrecisionExhausted:
                continue
        t_weights.append(entry if entry else {"n": n, "value": None, "certified_width": None})

    doc = {
        "command": "cf",
        "version": __version__,
        "config": _config_echo(args),
        "tolerances": {"t_weight_width_cascade": list(_T_WIDTH_CASCADE)},
        "digits": digits,
        "convergents": [[table.p(n), table.q(n)] for n in range(depth + 1)],
        "t_weights": t_weights,
        "betas": [
            {"n": n, **_frac_doc(cfrac.es_beta(table, n))} for n in range(1, depth + 1)
        ],
        "tail_bounds": [
            {"n": n, **_tail_doc(cfrac.tail_bound(table, n, depth))}
            for n in range(1, depth + 1)
        ],
    }
    _write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# lip
# ---------------------------------------------------------------------------

def _build_tower(args, needed_depth: int):
    from .tower import es_tower, uhf_tower

    if args.family == "uhf":
        if not args.digits:
            raise InvalidDigit("uhf towers need --digits")
        head, period = parse_digit_list(args.digits)
        baire = BaireSequence(tuple(DigitStream(head, period).cf_digits(needed_depth)))
        return uhf_tower(baire, needed_depth)
    handle = parse_irrational(args.surd if args.surd else args.digits)
    return es_tower(handle, needed_depth)


def _cmd_lip(args) -> int:
    from .fdca import load_element
    from .spectral import lip_seminorm_detailed
    from .tower import embed_through

    needed = max(args.level, args.check_coherence or 0)
    tower = _build_tower(args, needed)
    element = load_element(args.element)
    result = lip_seminorm_detailed(tower, args.level, element, method=args.method)
    doc = {
        "command": "lip",
        "version": __version__,
        "config": _config_echo(args),
        "record": {
            "level": args.level,
            "element_id": args.element,
            "method": result.method,
            "value": result.value,
            "iterations": result.iterations,
            "residual": result.residual,
            "gns_dim": result.gns_dim,
        },
    }
    if args.check_coherence:
        lifted = embed_through(tower, args.level, args.check_coherence, element)
        other = lip_seminorm_detailed(tower, args.check_coherence, lifted, method=args.method)
        gap = abs(other.value - result.value) / max(result.value, 1e-300)
        doc["coherence"] = {
            "level": args.check_coherence,
            "value": other.value,
            "relative_gap": gap,
            "within_tol": gap <= args.tol,
        }
    _write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# converge / certificate
# ---------------------------------------------------------------------------

def _scan_csv(args, res: convergence.ScanResult, extra_header: list[str]) -> list[str]:
    lines = [
        "# afmetric converge",
        f"# version: {__version__}",
        f"# config: {json.dumps(_config_echo(args), sort_keys=True)}",
        f"# tolerances: scan-interval-width=1e-30 (constants), lip tol per --method",
        f"# limit-value: {res.limit_value!r}",
        f"# nonincreasing-steps: {''.join('T' if d else 'F' for d in res.decreasing_steps)}",
    ]
    lines += extra_header
    lines.append("step-index,parameter-label,value,gap")
    for i, (label, value, gap) in enumerate(zip(res.labels, res.values, res.gaps)):
        lines.append(f"{i},{label},{value!r},{gap!r}")
    return lines


def _cmd_converge(args) -> int:
    js = list(range(args.jmin, args.jmax + 1))
    labels = [f"j={j}" for j in js]
    suffix, suffix_period = parse_digit_list(args.suffix)
    if suffix_period:
        raise InvalidDigit("the family suffix is already periodic; give it as a plain list")
    extra: list[str] = []

    if args.family == "uhf":
        head, period = parse_digit_list(args.digits)
        # one digit past jmax so every approximant's first disagreement index exists
        length = max(args.level, args.jmax + 1)
        limit = BaireSequence(tuple(DigitStream(head, period).cf_digits(length)))
        family = convergence.baire_prefix_swap_family(limit, suffix, js, length)
        dists = [cfrac.baire_distance(limit, ap).value for ap in family]
        extra.append("# baire-distances: " + ",".join(f"{l}:{d!r}" for l, d in zip(labels, dists)))
    else:
        limit = parse_irrational(args.surd if args.surd else args.digits)
        family = convergence.prefix_swap_family(limit, suffix, js)

    if args.scan == "constants":
        res = convergence.constants_convergence_scan(limit, family, args.level, labels=labels)
    else:
        from .fdca import load_element

        element = load_element(args.element)
        res = convergence.lip_convergence_scan(
            limit, family, args.level, element, method=args.method, labels=labels
        )
    _write_lines(_scan_csv(args, res, extra), args.out)
    return 0


def _cmd_certificate(args) -> int:
    specs = (args.surd or []) + (args.digits or [])
    if len(specs) != 2:
        raise InvalidDigit("a certificate needs exactly two inputs (--surd/--digits)")
    a, b = _parse_irrational_args(specs)
    cert = convergence.es_certificate(
        a, b, args.epsilon, depth=args.depth, samples=args.samples, seed=args.seed
    )
    doc = {
        "command": "certificate",
        "version": __version__,
        "config": _config_echo(args),
        "epsilon": cert.epsilon,
        "inputs": [cert.label_a, cert.label_b],
        "n1": cert.n1,
        "n2": "inf" if cert.n2 == math.inf else cert.n2,
        "tails": {"a": _tail_doc(cert.tail_a), "b": _tail_doc(cert.tail_b)},
        "rigorous_tail_total": _frac_doc(cert.rigorous_tail_total),
        "tail_budget": {"per_tail": cert.epsilon / 3, "both_tails": 2 * cert.epsilon / 3},
        "heuristic_distortion": {
            "max_abs_diff": cert.distortion.max_abs_diff,
            "mean_abs_diff": cert.distortion.mean_abs_diff,
            "ratio_min": cert.distortion.ratio_min,
            "ratio_max": cert.distortion.ratio_max,
            "samples": cert.distortion.samples,
            "seed": cert.distortion.seed,
            "certified": cert.distortion.certified,
        },
        "status": cert.status,
    }
    _write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afmetric",
        description="Finite AF-filtration truncations, spectral seminorms, and convergence experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cf = sub.add_parser("cf", help="digits, convergents, trace weights, betas, tail bounds")
    cf.add_argument("--surd", help='quadratic surd "(a+b*sqrt(d))/c"')
    cf.add_argument("--digits", help='digit list "[r1,r2,...]" (optional " periodic:[...]")')
    cf.add_argument("--depth", type=int, required=True)
    cf.add_argument("--out")
    cf.set_defaults(func=_cmd_cf)

    lip = sub.add_parser("lip", help="Lip-seminorm of an element at a tower level")
    lip.add_argument("--surd")
    lip.add_argument("--digits")
    lip.add_argument("--family", choices=("es", "uhf"), default="es")
    lip.add_argument("--level", type=int, required=True)
    lip.add_argument("--element", required=True, help="element JSON file")
    lip.add_argument("--method", choices=("dense", "power", "auto"), default="auto")
    lip.add_argument("--check-coherence", type=int, dest="check_coherence")
    lip.add_argument("--tol", type=float, default=1e-8)
    lip.add_argument("--out")
    lip.set_defaults(func=_cmd_lip)

    conv = sub.add_parser("converge", help="sharp-constant / seminorm convergence scans")
    conv.add_argument("--scan", choices=("constants", "lip"), required=True)
    conv.add_argument("--surd")
    conv.add_argument("--digits")
    conv.add_argument("--family", choices=("es", "uhf"), default="es")
    conv.add_argument("--suffix", required=True, help='fixed suffix digits, e.g. "[2]"')
    conv.add_argument("--jmin", type=int, required=True)
    conv.add_argument("--jmax", type=int, required=True)
    conv.add_argument("--level", type=int, required=True)
    conv.add_argument("--element", help="element JSON file (lip scan)")
    conv.add_argument("--method", choices=("dense", "power", "auto"), default="auto")
    conv.add_argument("--out")
    conv.set_defaults(func=_cmd_converge)

    cert = sub.add_parser("certificate", help="two-parameter distance certificate")
    cert.add_argument("--surd", action="append")
    cert.add_argument("--digits", action="append")
    cert.add_argument("--epsilon", type=float, required=True)
    cert.add_argument("--depth", type=int, default=48)
    cert.add_argument("--samples", type=int, default=32)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--out")
    cert.set_defaults(func=_cmd_certificate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "command", None) in ("cf", "lip") and not (args.surd or args.digits):
        print("error: one of --surd/--digits is required", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "converge" and not (args.surd or args.digits):
        print("error: one of --surd/--digits is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        import threadpoolctl

        with threadpoolctl.threadpool_limits(limits=1):
            return args.func(args)
    except (RationalInput, InvalidDigit, ShapeMismatch, LevelOutOfRange,
            FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except AgreementTooShallow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except AfmetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
