from __future__ import annotations

from .base import Command
from .covers import CoversCommand, ExtendCommand
from .generate import GenCommand, PruneCommand
from .moments import FhatCommand, FirstMomentCommand, PsiScanCommand, RegularXiCommand, SecondMomentCommand
from .selftest import SelftestCommand, run_selftest
from .thresholds import BoundsCommand, EmpiricalCommand
from .types import SpMarginalsCommand, TypesCommand

ALL_COMMANDS = [
    GenCommand(), PruneCommand(), CoversCommand(), ExtendCommand(), SpMarginalsCommand(), TypesCommand(),
    FirstMomentCommand(), SecondMomentCommand(), PsiScanCommand(), FhatCommand(), RegularXiCommand(),
    BoundsCommand(), EmpiricalCommand(), SelftestCommand(),
]

__all__ = ["ALL_COMMANDS", "Command", "run_selftest"]
