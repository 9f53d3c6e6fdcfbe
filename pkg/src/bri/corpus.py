"""The shipped fixture corpus and corpus loading helpers."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .ingest import ChainRecord, clean, load_chain, parse_mmcif, read_manifest
from .invariant import BondStats, compute_bond_stats


def default_chains() -> list[ChainRecord]:
    """Clean chains of the synthetic structures bundled with the package."""
    data = resources.files("bri") / "data"
    chains: list[ChainRecord] = []
    for item in sorted(data.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".cif"):
            chains.extend(parse_mmcif(item.read_bytes()))
    return clean(chains)[0]


@lru_cache(maxsize=1)
def default_bond_stats() -> BondStats:
    """Bond statistics of :func:`default_chains`, used when no corpus is given."""
    return compute_bond_stats(c.backbone for c in default_chains())


def load_corpus(inputs: Iterable = (), manifest=None) -> list[ChainRecord]:
    """Chains from a manifest and/or individual coordinate CSV / mmCIF files."""
    chains: list[ChainRecord] = []
    if manifest is not None:
        chains.extend(read_manifest(manifest))
    for path in inputs:
        chains.append(load_chain(Path(path)))
    return chains
