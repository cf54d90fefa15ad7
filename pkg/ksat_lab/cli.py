from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Optional

from . import config
from .commands import ALL_COMMANDS
from .errors import KsatLabError, ValidationError

log = logging.getLogger("ksat-lab.cli")


class ArgParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so bad flags map to exit 1."""

    def error(self, message: str):
        raise ValidationError("%s: %s" % (self.prog, message))


def build_parser() -> ArgParser:
    p = ArgParser(prog="ksat-lab", description="random k-SAT covers, type systems and moment computations")
    p.add_argument("--log-level", default=config.LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgParser)
    for cmd in ALL_COMMANDS:
        sp = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help)
        cmd.add_arguments(sp)
        sp.set_defaults(handler=cmd)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as e:
        logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(levelname)s %(message)s")
        log.error("%s", e)
        return e.exit_code
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(asctime)s %(levelname)s %(message)s")
    if not args.command:
        log.error("no command given; expected one of: %s", ", ".join(c.name for c in ALL_COMMANDS))
        return 1

    cmd = args.handler
    log.debug("running %s with threads=%d", cmd.name, config.THREADS)
    try:
        return cmd.run(args)
    except KsatLabError as e:
        log.error("%s: %s", cmd.name, e)
        return e.exit_code
    except OSError as e:
        log.error("%s: I/O failure: %s", cmd.name, e)
        return 1
    except Exception:
        log.exception("%s: internal error", cmd.name)
        return 2


if __name__ == "__main__":
    sys.exit(main())
