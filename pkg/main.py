#!/usr/bin/env python3
"""Точка входа симулятора оценки направления прихода."""

from doa_bench.cli.interface import main

if __name__ == "__main__":
    main()
