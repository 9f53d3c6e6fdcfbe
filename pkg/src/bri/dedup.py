"""All-vs-all duplicate search over same-length chains.

Chains are grouped by residue count. Inside a group every pair is considered;
the L-infinity distance between Brain vectors never exceeds the distance
between full invariants, so a pair whose Brain distance is already above the
threshold can be skipped without losing any reportable pair.
"""
from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ingest import ChainRecord
from .invariant import ZERO_DISTANCE, compute_brain, compute_bri

# Slack on the Brain test that absorbs rounding in the column means.
_BRAIN_GUARD = 1e-12


@dataclass(frozen=True)
class ScanConfig:
    near_threshold: float = 0.01
    prefilter: bool = True
    brain_margin: float = 0.0

    def __post_init__(self):
        if not self.near_threshold >= 0:
            raise ValueError("near_threshold must be >= 0")
        if not self.brain_margin >= 0:
            raise ValueError("brain_margin must be >= 0")


@dataclass(frozen=True, order=True)
class DuplicatePair:
    linf_bri: float
    entry1: str
    chain1: str
    entry2: str
    chain2: str
    m: int = field(compare=False)
    coordinates_identical: bool = field(compare=False)
    sequences_equal: bool = field(compare=False)

    @property
    def zero_distance(self) -> bool:
        return self.linf_bri <= ZERO_DISTANCE

    def tsv(self) -> str:
        return "\t".join(
            [
                self.entry1,
                self.chain1,
                self.entry2,
                self.chain2,
                str(self.m),
                f"{self.linf_bri:.17g}",
                str(self.coordinates_identical).lower(),
                str(self.sequences_equal).lower(),
            ]
        )


PAIRS_HEADER = "entry1\tchain1\tentry2\tchain2\tm\tlinf_bri\tcoords_identical\tseqs_equal"


@dataclass
class ScanCounts:
    considered: int = 0
    pruned: int = 0
    compared: int = 0
    per_length: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    def add(self, m: int, considered: int, pruned: int, compared: int) -> None:
        self.per_length[m] = (considered, pruned, compared)
        self.considered += considered
        self.pruned += pruned
        self.compared += compared

    def tsv(self) -> str:
        lines = ["m\tconsidered\tpruned\tcompared"]
        for m in sorted(self.per_length):
            c, p, k = self.per_length[m]
            lines.append(f"{m}\t{c}\t{p}\t{k}")
        lines.append(f"total\t{self.considered}\t{self.pruned}\t{self.compared}")
        return "\n".join(lines) + "\n"


def _scan_group(m: int, chains: list[ChainRecord], bris: np.ndarray, cfg: ScanConfig):
    n = len(chains)
    thr = cfg.near_threshold
    use_brain = cfg.prefilter and m >= 2
    brains = np.stack([compute_brain(b) for b in bris]) if use_brain else None
    found = []
    pruned = compared = 0
    for i in range(n - 1):
        cand = np.arange(i + 1, n)
        if use_brain:
            bd = np.abs(brains[cand] - brains[i]).max(axis=1)
            keep = bd <= thr + cfg.brain_margin + _BRAIN_GUARD
            pruned += int(cand.size - keep.sum())
            cand = cand[keep]
        compared += int(cand.size)
        if not cand.size:
            continue
        dist = np.abs(bris[cand] - bris[i]).max(axis=(1, 2))
        for j, d in zip(cand[dist <= thr], dist[dist <= thr]):
            a, b = chains[i], chains[j]
            if b.ref < a.ref:
                a, b = b, a
            found.append(
                DuplicatePair(
                    linf_bri=float(d),
                    entry1=a.entry_id,
                    chain1=a.chain_id,
                    entry2=b.entry_id,
                    chain2=b.chain_id,
                    m=m,
                    coordinates_identical=bool(np.array_equal(a.backbone, b.backbone)),
                    sequences_equal=a.sequence == b.sequence,
                )
            )
    return m, found, n * (n - 1) // 2, pruned, compared


def _run(corpus, cfg: ScanConfig, threads: int | None):
    groups: dict[int, list[ChainRecord]] = defaultdict(list)
    for chain in corpus:
        groups[len(chain)].append(chain)
    jobs = []
    for m in sorted(groups):
        chains = groups[m]
        if len(chains) < 2:
            continue
        jobs.append((m, chains, np.stack([compute_bri(c.backbone) for c in chains]), cfg))
    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(jobs) < 2:
        results = [_scan_group(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: _scan_group(*job), jobs))
    pairs: list[DuplicatePair] = []
    counts = ScanCounts()
    for m, found, considered, pruned, compared in sorted(results, key=lambda r: r[0]):
        pairs.extend(found)
        counts.add(m, considered, pruned, compared)
    pairs.sort()
    return pairs, counts


def scan(corpus, cfg: ScanConfig | None = None, threads: int | None = None) -> list[DuplicatePair]:
    """Same-length chain pairs within ``cfg.near_threshold`` in L-infinity BRI distance.

    Output is sorted by distance, then by chain references; each pair appears
    once with the smaller ``(entry, chain)`` first. The result does not depend
    on ``threads``.
    """
    return _run(corpus, cfg or ScanConfig(), threads)[0]


def prefilter_stats(corpus, cfg: ScanConfig | None = None, threads: int | None = None) -> ScanCounts:
    """How many pairs were considered, pruned by the Brain bound, and fully compared."""
    return _run(corpus, cfg or ScanConfig(), threads)[1]


def scan_with_stats(corpus, cfg: ScanConfig | None = None, threads: int | None = None):
    return _run(corpus, cfg or ScanConfig(), threads)


def write_pairs(pairs, path_or_stream) -> None:
    text = PAIRS_HEADER + "\n" + "".join(p.tsv() + "\n" for p in pairs)
    if isinstance(path_or_stream, (str, os.PathLike)):
        with open(path_or_stream, "w") as fh:
            fh.write(text)
    else:
        path_or_stream.write(text)
