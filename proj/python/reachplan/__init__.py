"""Reachability-based safe trajectory planning."""

import json as _json

from ._core import __version__, check_timing, run, simulate_unicycle

__all__ = ["__version__", "check_timing", "run", "run_json", "simulate_unicycle"]


def run_json(*args):
    """Run a subcommand with --json and return (code, parsed stdout)."""
    code, out, err = run([*args, "--json"])
    if code == 2:
        raise ValueError(err.strip())
    return code, _json.loads(out) if out.strip() else None
