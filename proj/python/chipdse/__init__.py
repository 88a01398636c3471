"""Chiplet accelerator design-space exploration.

Commands return result bundles as ``{relative path: file text}``; use
``write_bundle`` to put one on disk.
"""

from pathlib import Path

from ._core import (
    InfeasibleError,
    amortized_nre,
    compare,
    cost,
    default_config,
    die_cost,
    dse,
    perimeter_scaling,
    pnr,
    simulate,
    solve_stages,
    spec_decode_speedup,
)

__all__ = [
    "InfeasibleError",
    "amortized_nre",
    "compare",
    "cost",
    "default_config",
    "die_cost",
    "dse",
    "perimeter_scaling",
    "pnr",
    "simulate",
    "solve_stages",
    "spec_decode_speedup",
    "write_bundle",
]


def write_bundle(bundle, out_dir):
    out = Path(out_dir)
    for rel, text in sorted(bundle.items()):
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return out
