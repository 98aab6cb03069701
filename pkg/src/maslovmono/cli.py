"""Command-line interface.

Reports go to stdout as a single JSON document with sorted keys; diagnostics
go to stderr.  Exit statuses: 0 success, 1 bad input, 2 negative verdict (no
eigenvalue 1, unsolvable system, theorem fails), 3 loop sample could not be
resolved.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import exact_int as ei
from . import normal_forms as nf
from .dynamics import SystemSpec
from .errors import IntegrationError, MaslovMonoError, NearCriticalError, ResolutionError
from .monodromy import LoopSpec, continue_loop

EXIT_OK, EXIT_INPUT, EXIT_VERDICT, EXIT_CRITICAL = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _int_token(tok) -> int:
    if isinstance(tok, bool) or not isinstance(tok, (int, str)):
        raise InputError(f"not an integer: {tok!r}")
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"not an integer: {tok!r}") from None


def parse_matrix_document(text: str) -> ei.Matrix:
    """Parse a square integer matrix.

    Accepts JSON ``{"n": n, "entries": [[...], ...]}`` or plain text whose
    first line is ``n`` followed by ``n`` lines of ``n`` integers.
    """
    text = text.strip()
    if not text:
        raise InputError("empty matrix document")
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        if not isinstance(doc, dict) or "n" not in doc or "entries" not in doc:
            raise InputError('JSON matrix document needs keys "n" and "entries"')
        n = _int_token(doc["n"])
        rows = doc["entries"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InputError('"entries" must be a list of rows')
        rows = [[_int_token(x) for x in r] for r in rows]
    else:
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if len(lines[0]) != 1:
            raise InputError("first line must contain only the dimension n")
        n = _int_token(lines[0][0])
        rows = [[_int_token(x) for x in ln] for ln in lines[1:]]
    if n < 1:
        raise InputError(f"dimension must be positive, got {n}")
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InputError(f"expected {n} rows of {n} integers")
    return rows


def matrix_document(m: ei.Matrix) -> dict:
    return {"n": len(m), "entries": m}


def format_matrix_text(m: ei.Matrix) -> str:
    return "\n".join([str(len(m))] + [" ".join(map(str, r)) for r in m]) + "\n"


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _blockdiag_doc(res: nf.BlockDiagResult) -> dict:
    doc = {"solvable": res.solvable, "d": res.d, "conjugator": res.conjugator,
           "block_diagonal": res.block_diagonal, "witness": None}
    if res.witness is not None:
        i, d, value = res.witness
        doc["witness"] = {"index": i, "divisor": d, "value": value}
    return doc


def classification_document(m: ei.Matrix) -> dict:
    res = nf.classify(m)
    doc = {
        "signature": res.signature.as_dict(),
        "form": res.form.value,
        "conjugator": res.conjugator,
        "normal_form": res.normal_form,
    }
    if res.k is not None:
        doc["k"] = res.k
    sig = res.signature
    if len(m) == 3 and sig.ma_plus == 3 and sig.mg_plus == 2:
        t, g = nf.reduce_mg2(m)
        doc["reduce_mg2"] = {"conjugator": t, "g": g}
    if len(m) == 3 and res.has_unit_eigenvalue:
        top = res.normal_form[0][1:]
        block = [r[1:] for r in res.normal_form[1:]]
        doc["block_diagonalize"] = _blockdiag_doc(nf.block_diagonalize(top, block))
    return doc


def cmd_classify(args) -> int:
    m = parse_matrix_document(_read(args.path))
    doc = classification_document(m)
    _emit(doc)
    return EXIT_OK if doc["form"] != nf.Form.NO_UNIT_EIGENVALUE.value else EXIT_VERDICT


def cmd_complete(args) -> int:
    s = nf.unimodular_completion(args.u)
    if args.format == "text":
        sys.stdout.write(format_matrix_text(s))
    else:
        _emit(matrix_document(s))
    return EXIT_OK


def cmd_blockdiag(args) -> int:
    m = parse_matrix_document(_read(args.path))
    if [r[0] for r in m] != [1] + [0] * (len(m) - 1):
        raise InputError("blockdiag expects a matrix whose first column is e1")
    res = nf.block_diagonalize(m[0][1:], [r[1:] for r in m[1:]])
    _emit(_blockdiag_doc(res))
    return EXIT_OK if res.solvable else EXIT_VERDICT


def cmd_theorem_check(args) -> int:
    m = parse_matrix_document(_read(args.path))
    verdict = nf.verify_theorem1(m, args.maslov)
    _emit({"monodromy": m, "maslov": args.maslov, "theorem": verdict.value})
    return EXIT_VERDICT if verdict is nf.Verdict.FAILS else EXIT_OK


def cmd_simulate(args) -> int:
    system = SystemSpec(a=args.system[0], b=args.system[1], tol=args.tol)
    loop = LoopSpec(center=args.loop_center, radii=args.loop_radii,
                    samples=args.samples, orientation=args.orientation)
    try:
        report = continue_loop(loop, system, workers=args.workers)
    except (NearCriticalError, IntegrationError, ResolutionError) as exc:
        s = getattr(exc, "s", None)
        msg = str(exc)
        if s is not None and "s = " not in msg:
            msg += f" (failing sample s = {s})"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CRITICAL
    _emit(report.to_dict())
    if args.csv:
        report.write_csv(args.csv)
    return EXIT_VERDICT if report.theorem is nf.Verdict.FAILS else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="maslovmono",
        description="Integer monodromy normal forms and numerical Maslov/monodromy checks.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify an SL(2,Z)/SL(3,Z) monodromy matrix")
    c.add_argument("path", help="matrix document, '-' for stdin")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("complete", help="complete a primitive vector to an SL(n,Z) matrix")
    c.add_argument("u", type=int, nargs="+")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.set_defaults(func=cmd_complete)

    c = sub.add_parser("blockdiag", help="block-diagonalise [[1, a], [0, A]]")
    c.add_argument("path", help="matrix document, '-' for stdin")
    c.set_defaults(func=cmd_blockdiag)

    c = sub.add_parser("theorem-check", help="check M mu = mu for a nonzero Maslov vector")
    c.add_argument("path", help="matrix document, '-' for stdin")
    c.add_argument("--maslov", type=_int_list, required=True, help="e.g. 0,2")
    c.set_defaults(func=cmd_theorem_check)

    c = sub.add_parser("simulate", help="continue cycles around a loop of regular values")
    c.add_argument("--system", type=_pair, default=(1.0, -1.0), metavar="A,B",
                   help="potential a r^4 + b r^2 (default 1,-1)")
    c.add_argument("--loop-center", type=_pair, default=(0.0, 0.0), metavar="J,H")
    c.add_argument("--loop-radii", type=_pair, default=(0.1, 0.1), metavar="RJ,RH")
    c.add_argument("--samples", type=int, default=64)
    c.add_argument("--orientation", choices=("ccw", "cw"), default="ccw")
    c.add_argument("--tol", type=float, default=1e-10)
    c.add_argument("--csv", metavar="PATH", help="write per-sample data for plotting")
    c.add_argument("--workers", type=int, default=None,
                   help="evaluate samples in this many processes")
    c.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError, TypeError, OSError, MaslovMonoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
