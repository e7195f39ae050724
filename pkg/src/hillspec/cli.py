"""Command-line front end: band scans, constructions and their verification.

Every command writes its data under the ``--out`` prefix as CSV (17
significant digits) or JSON.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .bands import band_edges, default_scan_n, essential_spectrum, scan_discriminant
from .embedder import construct
from .errors import ConsistencyError, DomainError, HillError, NumericError
from .potentials import (gaussian_bump, parse_potential_spec,
                         sech2_bump)
from .verifier import Z_MATCH, hellmann_feynman, matching_function

COMMANDS = ("discriminant", "bands", "embed", "verify", "evans", "perturb")
EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64
VERIFY_TOL = 1e-10

EPILOG = """\
commands:
  discriminant  gamma(lambda) of one mode over --window     -> discriminant.csv
  bands         band edges for --m or --modes over --window -> bands.json
  embed         construct A0 with eigenvalue --lambda0       -> construction.csv, diagnostics.json
  verify        recompute a construction and compare         -> verify.json
  evans         matching function and its roots             -> iota.csv, roots.json
  perturb       first-order formula vs tracked eigenvalue    -> perturb.json

exit status:
  0   success
  1   domain error (bad input or a lambda outside the usable gap)
  2   numeric-accuracy error (failed accuracy or consistency check)
  64  usage error (unknown command or conflicting flags)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _window(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def _modes(text):
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b but got {text!r}")
    if not sep or a > b:
        raise argparse.ArgumentTypeError(f"bad mode range {text!r}")
    return a, b


def _perturbation(text):
    kind, _, args = text.partition(":")
    makers = {"sech2": sech2_bump, "gauss": gaussian_bump}
    if kind not in makers:
        raise argparse.ArgumentTypeError(f"perturbation must be sech2:... or gauss:..., got {text!r}")
    try:
        vals = [float(x) for x in args.split(",")] if args else []
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad perturbation parameters in {text!r}")
    if len(vals) > 3:
        raise argparse.ArgumentTypeError("perturbation takes at most center,width,amplitude")
    return makers[kind](*vals)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hillspec", description=__doc__.splitlines()[0],
                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS, metavar="command")
    p.add_argument("--potential", help='periodic background: "cos", "const:<c>" or "samples:<path>"')
    p.add_argument("--m", type=int, help="angular mode")
    p.add_argument("--modes", type=_modes, help="inclusive mode range a..b")
    p.add_argument("--lambda0", type=float, help="eigenvalue to embed")
    p.add_argument("--window", type=_window, help="spectral window lo,hi")
    p.add_argument("--beta", type=float, default=1.0, help="window steepness (default 1)")
    p.add_argument("--Z", type=float, default=20.0, help="half-width of the construction window (default 20)")
    p.add_argument("--h", type=float, default=2e-3, help="integration step (default 2e-3)")
    p.add_argument("--tol", type=float, default=1e-6, help="band-edge tolerance (default 1e-6)")
    p.add_argument("--out", default="./", help="output prefix; a trailing / names a directory (default ./)")
    p.add_argument("--strict", action="store_true", help="treat failed diagnostics as errors")
    p.add_argument("--construction", help="directory holding construction.csv and diagnostics.json")
    p.add_argument("--Z-match", dest="Z_match", type=float, default=Z_MATCH,
                   help="shooting half-width for evans/perturb (default 15)")
    p.add_argument("--perturbation", type=_perturbation, default=None,
                   help="perturb: sech2:center,width,amplitude or gauss:... (default sech2:0,1,1)")
    p.add_argument("--epsilon", type=float, default=1e-4, help="perturb: tracking step (default 1e-4)")
    return p


def _out(prefix: str, name: str) -> Path:
    if prefix.endswith(("/", "\\")) or Path(prefix).is_dir():
        path = Path(prefix) / name
    else:
        path = Path(prefix + name)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _check_conflicts(args):
    if args.m is not None and args.modes is not None:
        raise UsageError("--m and --modes are mutually exclusive")
    if args.construction is not None and args.potential is not None:
        raise UsageError("--construction already fixes the potential; drop --potential")
    if args.command in ("discriminant", "embed") and args.modes is not None:
        raise UsageError(f"{args.command} takes a single --m")
    if args.command in ("verify", "perturb"):
        _require(args, "construction")


def _potential(args):
    return parse_potential_spec(args.potential or "cos")


def _loaded(args):
    cols, diag = io.read_construction(args.construction)
    tail = parse_potential_spec(diag["potential"])
    return io.LoadedConstruction.from_files(cols, diag, tail)


def cmd_discriminant(args):
    _require(args, "window")
    m = 0 if args.m is None else args.m
    table = scan_discriminant(m, _potential(args), args.window, default_scan_n(args.window))
    path = _out(args.out, "discriminant.csv")
    io.write_csv(path, ("lambda", "gamma"), table.T)
    print(f"wrote {path}")


def cmd_bands(args):
    _require(args, "window")
    pot = _potential(args)
    if args.modes is not None:
        result = essential_spectrum(pot, args.modes, args.window, tol=args.tol)
        union = result.union
    else:
        result = band_edges(0 if args.m is None else args.m, pot, args.window, tol=args.tol)
        union = result.bands
    path = _out(args.out, "bands.json")
    io.write_json(path, result.to_json())
    for band in union:
        print("band [%.6f, %s]" % (band.lo, "inf" if math.isinf(band.hi) else "%.6f" % band.hi))
    print(f"wrote {path}")


def cmd_embed(args):
    _require(args, "lambda0", "m")
    spec = args.potential or "cos"
    c = construct(args.lambda0, args.m, parse_potential_spec(spec), beta=args.beta, Z=args.Z,
                  h=args.h, strict=args.strict)
    target = _out(args.out, io.CONSTRUCTION_CSV)
    prefix = target.name[: -len(io.CONSTRUCTION_CSV)]
    paths = io.write_construction(target.parent, c, spec, prefix=prefix)
    d = c.diagnostics
    print(f"alpha={c.alpha:.10g} residual_sup={d.residual_sup:.3g} "
          f"decay_rate_fit={d.decay_rate_fit:.6g} min_radicand={d.min_radicand:.3g}")
    print("wrote " + " and ".join(str(p) for p in paths))


def _close(a, b):
    return abs(a - b) <= VERIFY_TOL * max(1.0, abs(b))


def cmd_verify(args):
    cols, diag = io.read_construction(args.construction)
    pot = parse_potential_spec(diag["potential"])
    c = construct(diag["lambda0"], diag["m"], pot, beta=diag["beta"], Z=diag["Z"], h=diag["h"],
                  strict=args.strict, check_threshold="threshold" in diag)
    fresh = io.diagnostics_record(c, diag["potential"])
    arrays = dict(zip(io.CONSTRUCTION_COLUMNS, (c.z_grid, c.v_star, c.S, c.A0, c.A_per)))
    col_diff = {}
    for name, values in arrays.items():
        if cols[name].shape != values.shape:
            raise ConsistencyError(f"column {name}: {cols[name].size} rows on file, {values.size} recomputed")
        scale = max(1.0, float(np.max(np.abs(values))))
        col_diff[name] = float(np.max(np.abs(cols[name] - values))) / scale
    bad = [k for k, v in col_diff.items() if v > VERIFY_TOL]
    diag_diff = {}
    for key, value in fresh.items():
        old = diag.get(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if old != value:
                bad.append(key)
            continue
        if not isinstance(old, (int, float)) or not _close(float(old), float(value)):
            bad.append(key)
        diag_diff[key] = abs(float(old) - float(value)) if isinstance(old, (int, float)) else None
    path = _out(args.out, "verify.json")
    io.write_json(path, {"ok": not bad, "tolerance": VERIFY_TOL, "column_diff": col_diff,
                         "diagnostic_diff": diag_diff, "mismatched": bad})
    print(f"wrote {path}")
    if bad:
        raise ConsistencyError(f"recomputed construction differs in {bad}")
    print("construction reproduced within %g" % VERIFY_TOL)


def cmd_evans(args):
    _require(args, "window")
    if args.construction is not None:
        base = _loaded(args)
        pot, tail, m = base.asymptotic_potential(), base.potential, base.m
        if args.m is not None and args.m != m:
            raise UsageError(f"--m {args.m} conflicts with the construction's mode {m}")
    else:
        tail = _potential(args)
        pot, m = tail, (0 if args.m is None else args.m)
    mf = matching_function(pot, tail, m, args.window, Z_match=args.Z_match, h=args.h)
    io.write_iota(_out(args.out, "iota.csv"), mf)
    path = _out(args.out, "roots.json")
    io.write_json(path, mf.to_json())
    print("roots: " + (", ".join("%.12g" % r for r in mf.roots) or "none"))
    print(f"wrote {path}")


def cmd_perturb(args):
    base = _loaded(args)
    B = args.perturbation if args.perturbation is not None else sech2_bump()
    check = hellmann_feynman(base, B, epsilon=args.epsilon, Z_match=args.Z_match)
    path = _out(args.out, "perturb.json")
    io.write_json(path, {
        "perturbation": B.name, "epsilon": check.epsilon_used,
        "derivative_formula": check.derivative_formula,
        "derivative_tracked": check.derivative_tracked,
        "relative_discrepancy": check.relative_discrepancy,
        "sign_agrees": check.sign_agrees,
    })
    print(f"formula {check.derivative_formula:.10g} tracked {check.derivative_tracked:.10g} "
          f"(relative {check.relative_discrepancy:.3g})")
    print(f"wrote {path}")


HANDLERS = {
    "discriminant": cmd_discriminant, "bands": cmd_bands, "embed": cmd_embed,
    "verify": cmd_verify, "evans": cmd_evans, "perturb": cmd_perturb,
}


def _attach_values(argv):
    # values such as "-2..2" or "-1,1" look like options to argparse
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--modes", "--window"):
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as exc:  # --help or a usage error
        return exc.code
    try:
        _check_conflicts(args)
        HANDLERS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hillspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"hillspec: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, HillError, OSError, ValueError) as exc:
        print(f"hillspec: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
