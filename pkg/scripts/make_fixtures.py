"""Regenerate the synthetic mmCIF fixtures.

    python scripts/make_fixtures.py

Writes the default bond-statistics corpus to ``src/bri/data`` and the
cleaning-protocol set (one violator per step plus one clean chain) to
``tests/fixtures/protocol``. Geometry is ideal backbone geometry with small
jitter; coordinates are rounded to 3 decimals like deposited files.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from bri.geometry import build_backbone  # noqa: E402

STANDARD = "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE LEU LYS MET PHE PRO SER THR TRP TYR VAL".split()
HELIX = (-57.0, -47.0)
STRAND = (-120.0, 130.0)


def torsions(pattern: str, rng) -> tuple[list[float], list[float]]:
    """``H`` helix, ``E`` strand, ``L`` loop residue per character."""
    phi, psi = [], []
    for ch in pattern:
        if ch == "H":
            p, s = HELIX
            p, s = p + rng.normal(0, 4), s + rng.normal(0, 4)
        elif ch == "E":
            p, s = STRAND
            p, s = p + rng.normal(0, 8), s + rng.normal(0, 8)
        else:
            p, s = rng.uniform(-160, -60), rng.uniform(-60, 170)
        phi.append(p)
        psi.append(s)
    return phi, psi


def chain_coords(pattern: str, seed: int, offset=(0.0, 0.0, 0.0)) -> np.ndarray:
    rng = np.random.default_rng(seed)
    phi, psi = torsions(pattern, rng)
    coords = build_backbone(phi, psi, omega=180.0 + rng.normal(0, 3, len(pattern)), noise=0.004, rng=rng)
    return np.round(coords + np.asarray(offset), 3)


class CifWriter:
    def __init__(self, entry: str):
        self.entry = entry
        self.entities: list[tuple[str, str, str | None]] = []  # id, type, poly type
        self.atoms: list[list[str]] = []

    def entity(self, eid: str, etype: str, poly: str | None) -> None:
        self.entities.append((eid, etype, poly))

    def residue(self, asym, auth, eid, seq, comp, coords, occ=(1.0, 1.0, 1.0), alt=".", model=1, skip=()):
        names = ("N", "CA", "C")
        for k, name in enumerate(names):
            if name in skip:
                continue
            x, y, z = coords[k]
            self.atoms.append(
                ["ATOM", name, name[0], alt, comp, asym, eid, str(seq), f"{x:.3f}", f"{y:.3f}", f"{z:.3f}",
                 f"{occ[k]:.2f}", str(seq), auth, str(model)]
            )
        # Carbonyl oxygen, which the reader must ignore.
        c, ca = coords[2], coords[1]
        o = c + 1.23 * (c - ca) / np.linalg.norm(c - ca)
        self.atoms.append(
            ["ATOM", "O", "O", alt, comp, asym, eid, str(seq), f"{o[0]:.3f}", f"{o[1]:.3f}", f"{o[2]:.3f}",
             "1.00", str(seq), auth, str(model)]
        )

    def water(self, asym, auth, eid, n, xyz):
        self.atoms.append(
            ["HETATM", "O", "O", ".", "HOH", asym, eid, ".", f"{xyz[0]:.3f}", f"{xyz[1]:.3f}", f"{xyz[2]:.3f}",
             "1.00", str(n), auth, "1"]
        )

    def text(self) -> str:
        out = [f"data_{self.entry.upper()}", "#", f"_entry.id {self.entry.upper()}", "#", "loop_",
               "_entity.id", "_entity.type"]
        out += [f"{e} {t}" for e, t, _ in self.entities]
        poly = [(e, p) for e, _, p in self.entities if p]
        if poly:
            out += ["#", "loop_", "_entity_poly.entity_id", "_entity_poly.type"]
            out += [f"{e} '{p}'" for e, p in poly]
        out += ["#", "loop_"]
        cols = ["group_PDB", "label_atom_id", "type_symbol", "label_alt_id", "label_comp_id", "label_asym_id",
                "label_entity_id", "label_seq_id", "Cartn_x", "Cartn_y", "Cartn_z", "occupancy", "auth_seq_id",
                "auth_asym_id", "pdbx_PDB_model_num"]
        out += [f"_atom_site.{c}" for c in ["id"] + cols]
        for k, row in enumerate(self.atoms, start=1):
            out.append(" ".join([row[0], str(k)] + row[1:]))
        out.append("#")
        return "\n".join(out) + "\n"


def sequence(n: int, rng) -> list[str]:
    return [STANDARD[i] for i in rng.integers(0, 20, n)]


def write_chain(w: CifWriter, asym, auth, eid, coords, names, **kw):
    for i, (xyz, comp) in enumerate(zip(coords, names), start=1):
        w.residue(asym, auth, eid, i, comp, xyz, **kw)


def default_corpus(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)
    specs = {
        "9hlx": ["LL" + "H" * 36 + "LL", "LLEEEEEELLLLEEEEEELLL" + "H" * 14],
        "9bsh": ["L" + "E" * 8 + "LLL" + "H" * 20 + "LLLL" + "E" * 7 + "LL" + "H" * 15],
        "9lop": ["L" * 12 + "H" * 10 + "L" * 8 + "E" * 6 + "L" * 14],
    }
    for n, (entry, patterns) in enumerate(specs.items()):
        w = CifWriter(entry)
        w.entity("1", "polymer", "polypeptide(L)")
        w.entity("2", "water", None)
        for k, pat in enumerate(patterns):
            asym = "AB"[k]
            coords = chain_coords(pat, seed=100 * n + k, offset=rng.uniform(-30, 30, 3))
            write_chain(w, asym, asym, "1", coords, sequence(len(pat), rng))
        for j in range(3):
            w.water("W", "A", "2", 500 + j, rng.uniform(-20, 20, 3))
        (out / f"{entry}.cif").write_text(w.text())


def protocol_set(out: Path) -> None:
    """One chain per file: a clean chain and one violator for each step."""
    out.mkdir(parents=True, exist_ok=True)
    names = list(STANDARD)  # all 20 standard residues
    coords = chain_coords("L" + "H" * 18 + "L", seed=11)

    def make(entry, *, etype=("polymer", "polypeptide(L)"), mutate=None, **kw):
        w = CifWriter(entry)
        w.entity("1", *etype)
        res_names = list(names)
        c = coords.copy()
        seqs = list(range(1, 21))
        occ = {}
        skip = {}
        if mutate:
            mutate(c, res_names, seqs, occ, skip)
        for i in range(20):
            w.residue("A", "A", "1", seqs[i], res_names[i], c[i], occ=occ.get(i, (1.0, 1.0, 1.0)), skip=skip.get(i, ()))
        (out / f"{entry}.cif").write_text(w.text())

    make("0okk")
    make("1rna", etype=("polymer", "polyribonucleotide"))
    make("2occ", mutate=lambda c, n, s, o, k: o.__setitem__(5, (1.0, 0.5, 1.0)))

    def gap(c, n, s, o, k):
        for i in range(3, 20):
            s[i] += 1  # indices ..., 3, 5, 6, ...

    make("3gap", mutate=gap)

    def clash(c, n, s, o, k):
        c[8, 1] = c[8, 0] + np.array([0.003, 0.003, 0.002])  # CA 0.0047 A from N

    make("4cls", mutate=clash)
    make("5inc", mutate=lambda c, n, s, o, k: k.__setitem__(12, ("CA",)))

    def mse(c, n, s, o, k):
        n[4] = "MSE"

    make("6mse", mutate=mse)


if __name__ == "__main__":
    default_corpus(ROOT / "src" / "bri" / "data")
    protocol_set(ROOT / "tests" / "fixtures" / "protocol")
    print("fixtures written")
