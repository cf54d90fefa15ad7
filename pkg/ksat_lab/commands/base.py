from __future__ import annotations
import argparse
from fractions import Fraction
from typing import Any, Dict, List, Optional

from ..errors import ValidationError
from ..formula import Formula, read_dimacs
from ..util import emit
from ..util.checkpoint import Checkpoint


class Command:
    """Interface for one CLI subcommand."""
    name: str = ""
    help: str = ""

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        pass

    def run(self, args: argparse.Namespace) -> int:
        raise NotImplementedError


# ------------- Shared arguments -------------

def add_out(p: argparse.ArgumentParser, *, csv: bool = False) -> None:
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    if csv:
        p.add_argument("--csv", default=None, help="also write the scan as CSV to this path")


def add_resume(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resume", default=None, metavar="PATH", help="checkpoint file for long scans")


def density(text: str) -> Fraction:
    """Densities are kept exact: '4.2' and '21/5' are both Fraction(21, 5)."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("not a number: %r" % text)
    if value <= 0:
        raise argparse.ArgumentTypeError("density must be > 0")
    return value


def int_range(text: str) -> List[int]:
    """'a:b' inclusive, or a comma list."""
    try:
        if ":" in text:
            lo, hi = (int(s) for s in text.split(":", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'lo:hi' or a comma list, got %r" % text)


def float_list(text: str) -> List[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma list of numbers, got %r" % text)


def load_formula(path: str) -> Formula:
    with open(path, "rb") as fh:
        return read_dimacs(fh.read())


def need_k(k: Optional[int], f: Formula) -> int:
    k = k or f.k
    if not k:
        raise ValidationError("clause width unknown; pass --k")
    return k


# ------------- Output -------------

def run_meta(args: argparse.Namespace) -> Dict[str, Any]:
    return {"command": args.command,
            "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "handler")}}


def checkpoint_for(args: argparse.Namespace, cfg: Dict[str, Any]) -> Optional[Checkpoint]:
    path = getattr(args, "resume", None)
    return Checkpoint(path, dict(cfg, command=args.command)) if path else None


def emit_json(args: argparse.Namespace, payload: Dict[str, Any]) -> None:
    emit.write_json(args.out, payload, meta=run_meta(args))


def emit_csv(args: argparse.Namespace, header, rows) -> None:
    if getattr(args, "csv", None):
        emit.write_csv(args.csv, header, rows, meta=run_meta(args))
