"""From mmCIF files to clean backbone chains.

:func:`parse_mmcif` turns one structure file into :class:`ChainRecord` objects
(first model only, backbone atoms N/CA/C only). :func:`clean` then applies the
six rejection steps in a fixed order; a chain is tagged with the first step
it fails.
"""
from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BRIError, MissingCategory, ParseError
from .geometry import ATOM_NAMES, as_backbone
from .mmcif import read_cif

STANDARD_RESIDUES = frozenset(
    "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE LEU LYS MET PHE PRO SER THR TRP TYR VAL".split()
)
STEPS = ("non-protein", "disordered", "non-consecutive", "clash", "incomplete", "non-standard")
CLASH_DISTANCE = 0.01  # angstrom
# Ligands and waters are not chains; they never reach the cleaning steps.
NON_CHAIN_ENTITY_TYPES = frozenset({"non-polymer", "water"})


class IncompleteChain(BRIError):
    """A chain is missing backbone atoms, so it has no backbone array."""


@dataclass
class Residue:
    seq_index: int
    name: str
    coords: np.ndarray = field(default_factory=lambda: np.full((3, 3), np.nan))  # rows N, CA, C
    occupancy: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    altloc: bool = False

    @property
    def complete(self) -> bool:
        return not np.isnan(self.coords).any()


@dataclass
class ChainRecord:
    entry_id: str
    chain_id: str
    model: int = 1
    entity_kind: str = "polypeptide(L)"
    residues: list[Residue] = field(default_factory=list)
    asym_id: str = ""

    @property
    def ref(self) -> tuple[str, str]:
        return (self.entry_id, self.chain_id)

    def __len__(self) -> int:
        return len(self.residues)

    @property
    def sequence(self) -> list[str]:
        return [r.name for r in self.residues]

    @property
    def backbone(self) -> np.ndarray:
        if not self.residues:
            raise IncompleteChain(f"{self.entry_id}/{self.chain_id} has no residues")
        coords = np.stack([r.coords for r in self.residues])
        if np.isnan(coords).any():
            i = int(np.flatnonzero(np.isnan(coords).any(axis=(1, 2)))[0])
            raise IncompleteChain(f"{self.entry_id}/{self.chain_id}: residue {self.residues[i].seq_index} lacks backbone atoms")
        return coords

    @classmethod
    def from_backbone(cls, entry_id: str, chain_id: str, coords, sequence: Sequence[str] | None = None, start: int = 1):
        coords = as_backbone(coords)
        names = list(sequence) if sequence is not None else ["GLY"] * len(coords)
        if len(names) != len(coords):
            raise ValueError("sequence length does not match backbone")
        residues = [
            Residue(start + i, names[i], coords[i].copy(), np.ones(3)) for i in range(len(coords))
        ]
        return cls(entry_id, chain_id, residues=residues, asym_id=chain_id)


def _get(cat: dict, *items: str) -> list[str] | None:
    for item in items:
        if item in cat:
            return cat[item]
    return None


def _missing(v: str) -> bool:
    return v in (".", "?")


def _float(text: str, lineno_hint: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", field=lineno_hint) from None


def parse_mmcif(source) -> list[ChainRecord]:
    """Backbone chains of the first model in an mmCIF file.

    ``source`` may be a path, raw bytes or a binary stream; gzip input is
    detected from its magic bytes. Chains are keyed by ``label_asym_id`` and
    named by ``auth_asym_id`` where present; ligand and water entities are
    skipped. Residues keep file order.

    Raises:
        ParseError: malformed syntax or non-numeric coordinates.
        MissingCategory: no (or an empty) ``atom_site`` table.
    """
    block, cats = read_cif(source)
    site = cats.get("atom_site")
    if not site or not site.get("Cartn_x"):
        raise MissingCategory("atom_site category is missing or empty")
    entry_id = (cats.get("entry", {}).get("id") or [block])[0]

    kinds: dict[str, str] = {}
    skipped_entities = set()
    ent = cats.get("entity", {})
    for eid, etype in zip(ent.get("id", []), ent.get("type", [])):
        kinds[eid] = etype
        if etype.lower() in NON_CHAIN_ENTITY_TYPES:
            skipped_entities.add(eid)
    poly = cats.get("entity_poly", {})
    for eid, ptype in zip(poly.get("entity_id", []), poly.get("type", [])):
        kinds[eid] = ptype

    n_atoms = len(site["Cartn_x"])
    for item, values in site.items():
        if len(values) != n_atoms:  # pragma: no cover - loops guarantee this
            raise ParseError("ragged atom_site table", field=item)

    def col(*names: str, default: str = ".") -> list[str]:
        return _get(site, *names) or [default] * n_atoms

    atom_names = col("label_atom_id", "auth_atom_id")
    comp = col("label_comp_id", "auth_comp_id")
    asym = col("label_asym_id", "auth_asym_id")
    auth_asym = col("auth_asym_id", "label_asym_id")
    entity = col("label_entity_id")
    label_seq = col("label_seq_id")
    auth_seq = col("auth_seq_id")
    ins = col("pdbx_PDB_ins_code")
    alt = col("label_alt_id")
    occ = col("occupancy", default="1")
    model = col("pdbx_PDB_model_num", default="1")
    xs, ys, zs = site["Cartn_x"], site.get("Cartn_y"), site.get("Cartn_z")
    if ys is None or zs is None:
        raise MissingCategory("atom_site lacks Cartn_y/Cartn_z")

    models = [int(m) if not _missing(m) else 1 for m in model]
    first_model = min(models)

    chains: dict[str, ChainRecord] = {}
    residue_maps: dict[str, dict[tuple, Residue]] = {}
    for k in range(n_atoms):
        if models[k] != first_model or entity[k] in skipped_entities:
            continue
        key_asym = asym[k]
        rec = chains.get(key_asym)
        if rec is None:
            rec = ChainRecord(
                entry_id=entry_id,
                chain_id=auth_asym[k],
                model=first_model,
                entity_kind=kinds.get(entity[k], ""),
                asym_id=key_asym,
            )
            chains[key_asym] = rec
            residue_maps[key_asym] = {}
        if not _missing(label_seq[k]):
            seq_token, seq_text = (label_seq[k], ""), label_seq[k]
        else:
            code = "" if _missing(ins[k]) else ins[k]
            seq_token, seq_text = (auth_seq[k], code), auth_seq[k]
        res_key = (seq_token, comp[k])
        res = residue_maps[key_asym].get(res_key)
        if res is None:
            try:
                idx = int(seq_text)
            except ValueError:
                raise ParseError(f"bad residue index {seq_text!r}", field="label_seq_id") from None
            res = Residue(idx, comp[k])
            residue_maps[key_asym][res_key] = res
            rec.residues.append(res)
        name = atom_names[k]
        if name not in ATOM_NAMES:
            continue
        slot = ATOM_NAMES.index(name)
        if not _missing(alt[k]):
            res.altloc = True
        if not np.isnan(res.coords[slot, 0]):
            continue  # keep the first alternate location
        res.coords[slot] = (_float(xs[k], "Cartn_x"), _float(ys[k], "Cartn_y"), _float(zs[k], "Cartn_z"))
        res.occupancy[slot] = 1.0 if _missing(occ[k]) else _float(occ[k], "occupancy")
    return list(chains.values())


def rejection_step(chain: ChainRecord) -> int | None:
    """1-based index of the first cleaning step ``chain`` fails, or ``None``."""
    if not chain.entity_kind.lower().startswith("polypeptide"):
        return 1
    for r in chain.residues:
        present = ~np.isnan(r.occupancy)
        if r.altloc or np.any(r.occupancy[present] < 1.0):
            return 2
    idx = [r.seq_index for r in chain.residues]
    if any(b - a != 1 for a, b in zip(idx, idx[1:])):
        return 3
    if chain.residues:
        pts = np.concatenate([r.coords for r in chain.residues])
        pts = pts[~np.isnan(pts).any(axis=1)]
        if len(pts) > 1 and np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) < CLASH_DISTANCE):
            return 4
    if not chain.residues or not all(r.complete for r in chain.residues):
        return 5
    if any(r.name not in STANDARD_RESIDUES for r in chain.residues):
        return 6
    return None


@dataclass
class RejectionReport:
    rows: list[tuple[str, str, int | None]] = field(default_factory=list)

    @property
    def counts(self) -> dict[int, int]:
        c = Counter(step for *_, step in self.rows if step is not None)
        return {s: c.get(s, 0) for s in range(1, len(STEPS) + 1)}

    @property
    def n_rejected(self) -> int:
        return sum(1 for *_, s in self.rows if s is not None)

    @property
    def n_accepted(self) -> int:
        return sum(1 for *_, s in self.rows if s is None)

    def merge(self, other: "RejectionReport") -> "RejectionReport":
        return RejectionReport(self.rows + other.rows)

    def write_tsv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("entry\tchain\tstep\n")
            for entry, chain, step in self.rows:
                if step is not None:
                    fh.write(f"{entry}\t{chain}\t{step}\n")


def clean(chains: Iterable[ChainRecord]) -> tuple[list[ChainRecord], RejectionReport]:
    accepted, report = [], RejectionReport()
    for chain in chains:
        step = rejection_step(chain)
        report.rows.append((chain.entry_id, chain.chain_id, step))
        if step is None:
            accepted.append(chain)
    return accepted, report


# Coordinate CSV: seq_index,residue,atom,x,y,z,occupancy at 3 decimals.

COORD_HEADER = ("seq_index", "residue", "atom", "x", "y", "z", "occupancy")


def write_coords(chain: ChainRecord, path_or_stream) -> None:
    own = isinstance(path_or_stream, (str, os.PathLike))
    fh = open(path_or_stream, "w", newline="") if own else path_or_stream
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COORD_HEADER)
        for r in chain.residues:
            for slot, name in enumerate(ATOM_NAMES):
                if np.isnan(r.coords[slot, 0]):
                    continue
                x, y, z = r.coords[slot]
                w.writerow([r.seq_index, r.name, name, f"{x:.3f}", f"{y:.3f}", f"{z:.3f}", f"{r.occupancy[slot]:.3f}"])
    finally:
        if own:
            fh.close()


def read_coords(path_or_stream, entry_id: str | None = None, chain_id: str | None = None) -> ChainRecord:
    """Read a coordinate CSV. Ids default to ``ENTRY_CHAIN`` parsed from the file name."""
    if isinstance(path_or_stream, (str, os.PathLike)):
        stem = Path(path_or_stream).stem
        if entry_id is None or chain_id is None:
            e, _, c = stem.partition("_")
            entry_id = entry_id or e
            chain_id = chain_id or c or "A"
        fh = open(path_or_stream, newline="")
    else:
        fh = path_or_stream
    entry_id = entry_id or "unknown"
    chain_id = chain_id or "A"
    chain = ChainRecord(entry_id, chain_id, asym_id=chain_id)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != COORD_HEADER:
            raise ParseError(f"coordinate CSV header must be {','.join(COORD_HEADER)}", 1)
        by_index: dict[int, Residue] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(COORD_HEADER):
                raise ParseError(f"expected {len(COORD_HEADER)} fields, got {len(row)}", lineno)
            try:
                idx = int(row[0])
                x, y, z, o = (float(v) for v in row[3:7])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            atom = row[2].strip()
            if atom not in ATOM_NAMES:
                raise ParseError(f"unknown backbone atom {atom!r}", lineno, "atom")
            res = by_index.get(idx)
            if res is None:
                res = by_index[idx] = Residue(idx, row[1].strip())
                chain.residues.append(res)
            slot = ATOM_NAMES.index(atom)
            res.coords[slot] = (x, y, z)
            res.occupancy[slot] = o
    finally:
        if fh is not path_or_stream:
            fh.close()
    return chain


def coords_filename(entry_id: str, chain_id: str) -> str:
    return f"{entry_id}_{chain_id}.csv"


def write_manifest(chains: Iterable[ChainRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("entry\tchain\tm\n")
        for c in chains:
            fh.write(f"{c.entry_id}\t{c.chain_id}\t{len(c)}\n")


def read_manifest(path) -> list[ChainRecord]:
    """Load every chain listed in a manifest from sibling coordinate CSVs."""
    base = Path(path).parent
    out = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].split("\t") != ["entry", "chain", "m"]:
        raise ParseError("manifest header must be entry<TAB>chain<TAB>m", 1)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("manifest rows need 3 tab-separated fields", lineno)
        entry, chain, m = parts
        rec = read_coords(base / coords_filename(entry, chain), entry, chain)
        if len(rec) != int(m):
            raise ParseError(f"{entry}/{chain}: manifest says {m} residues, file has {len(rec)}", lineno)
        out.append(rec)
    return out


def find_structure_files(directory) -> list[Path]:
    d = Path(directory)
    files = [p for p in d.iterdir() if p.is_file() and (p.name.endswith(".cif") or p.name.endswith(".cif.gz"))]
    return sorted(files)


def load_chain(path, chain_id: str | None = None) -> ChainRecord:
    """One chain from a coordinate CSV or an mmCIF file.

    For mmCIF the requested chain (auth or label id) is returned, else the
    first chain whose backbone is complete.
    """
    p = Path(path)
    if p.suffix == ".csv":
        return read_coords(p, chain_id=chain_id)
    chains = parse_mmcif(p)
    if chain_id is not None:
        for c in chains:
            if chain_id in (c.chain_id, c.asym_id):
                return c
        raise BRIError(f"{p.name}: no chain {chain_id!r}")
    for c in chains:
        if c.entity_kind.lower().startswith("polypeptide") and c.residues and all(r.complete for r in c.residues):
            return c
    raise BRIError(f"{p.name}: no complete protein chain")
