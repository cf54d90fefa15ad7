#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from __future__ import annotations
import sys

from ksat_lab.cli import main

if __name__ == "__main__":
    sys.exit(main())
