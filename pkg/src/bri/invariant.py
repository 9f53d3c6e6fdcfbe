"""Backbone rigid invariants and the constants that bound their continuity.

Matrices are plain numpy arrays:

* trin: ``(m, 3)``, columns ``xAN, xAC, yAC``: the shape of each residue triangle.
* BRI: ``(m, 9)``, columns ``xN yN zN xA yA zA xC yC zC``. Row ``i >= 2`` holds
  the bonds C(i-1)->N(i), N(i)->CA(i), CA(i)->C(i) written in the frame of
  residue ``i - 1``. Row 1 holds the first trin row in slots xN, xC, yC and
  zeros elsewhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import EmptyCorpus, IndexOutOfRange, InvalidStats, LengthMismatch, MalformedMatrix, TooShort
from .geometry import as_backbone, dot, frames, norm

TRIN_COLUMNS = ("xAN", "xAC", "yAC")
BRI_COLUMNS = ("xN", "yN", "zN", "xA", "yA", "zA", "xC", "yC", "zC")
Z_COLUMNS = (2, 5, 8)
ROW1_SLOTS = (0, 6, 7)  # xN, xC, yC
_ROW1_ZEROS = (1, 2, 3, 4, 5, 8)

# L-infinity distances at or below this are reported as zero.
ZERO_DISTANCE = 1e-12


def compute_trin(coords) -> np.ndarray:
    """Per-residue triangle invariant ``(|AN|, AC.AN/|AN|, height of C over AN)``."""
    coords = as_backbone(coords)
    frames(coords)  # degeneracy check with residue index
    an = coords[:, 0] - coords[:, 1]
    ac = coords[:, 2] - coords[:, 1]
    x_an = norm(an)
    x_ac = dot(ac, an) / x_an
    y_ac = norm(ac - (x_ac / x_an)[:, None] * an)
    return np.stack([x_an, x_ac, y_ac], axis=1)


def _first_row(trin_row) -> np.ndarray:
    row = np.zeros(9)
    row[list(ROW1_SLOTS)] = trin_row
    return row


def compute_bri(coords) -> np.ndarray:
    """The ``m x 9`` backbone rigid invariant. Linear in ``m``."""
    coords = as_backbone(coords)
    basis = frames(coords)
    trin = compute_trin(coords)
    m = coords.shape[0]
    out = np.zeros((m, 9))
    out[0] = _first_row(trin[0])
    if m > 1:
        prev = basis[:-1]  # (m-1, 3, 3): rows u, v, w of residue i-1
        bonds = (
            coords[1:, 0] - coords[:-1, 2],  # C(i-1) -> N(i)
            coords[1:, 1] - coords[1:, 0],  # N(i) -> CA(i)
            coords[1:, 2] - coords[1:, 1],  # CA(i) -> C(i)
        )
        for j, bond in enumerate(bonds):
            for axis in range(3):
                out[1:, 3 * j + axis] = dot(bond, prev[:, axis])
    return out + 0.0  # no negative zeros


def validate_bri(bri) -> np.ndarray:
    arr = np.asarray(bri, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 9 or arr.shape[0] < 1:
        raise MalformedMatrix(f"BRI must have shape (m, 9) with m >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MalformedMatrix("BRI entries must be finite")
    if np.any(arr[0, list(_ROW1_ZEROS)] != 0.0):
        raise MalformedMatrix("row 1 may only be non-zero in slots xN, xC, yC")
    return arr


def mirror_bri(bri) -> np.ndarray:
    """Invariant of the mirror image: all z-columns negated."""
    out = np.array(bri, dtype=np.float64)
    out[:, list(Z_COLUMNS)] = -out[:, list(Z_COLUMNS)] + 0.0
    return out


def bri_vector(bri) -> np.ndarray:
    """Flatten to the ``9m - 6`` free coordinates (row-1 zeros dropped)."""
    bri = np.asarray(bri, dtype=np.float64)
    return np.concatenate([bri[0, list(ROW1_SLOTS)], bri[1:].ravel()])


def bri_from_vector(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 3 or (vec.size - 3) % 9:
        raise MalformedMatrix(f"vector length {vec.size} is not of the form 9m - 6")
    out = np.zeros(((vec.size - 3) // 9 + 1, 9))
    out[0] = _first_row(vec[:3])
    out[1:] = vec[3:].reshape(-1, 9)
    return out


def linf(bri1, bri2) -> float:
    """Maximum absolute difference over corresponding entries."""
    a = np.asarray(bri1, dtype=np.float64)
    b = np.asarray(bri2, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def compute_brain(bri) -> np.ndarray:
    """Nine column averages of BRI rows ``2..m``."""
    bri = np.asarray(bri, dtype=np.float64)
    if bri.shape[0] < 2:
        raise TooShort(f"Brain needs at least 2 residues, got {bri.shape[0]}")
    rows = bri[1:]
    # Keep every mean inside its column's range despite summation rounding.
    return np.clip(rows.mean(axis=0), rows.min(axis=0), rows.max(axis=0))


def subchain_bri(bri, trin, i: int, k: int) -> np.ndarray:
    """BRI of residues ``i .. i+k-1`` (1-based) taken from the parent's matrices."""
    bri = np.asarray(bri, dtype=np.float64)
    trin = np.asarray(trin, dtype=np.float64)
    m = bri.shape[0]
    if trin.shape[0] != m:
        raise LengthMismatch("trin and BRI describe different chain lengths")
    if i < 1 or k < 1 or i + k - 1 > m:
        raise IndexOutOfRange(f"subchain start {i}, length {k} does not fit in {m} residues")
    if i == 1:
        return bri[:k].copy()
    out = np.empty((k, 9))
    out[0] = _first_row(trin[i - 1])
    out[1:] = bri[i : i + k - 1]
    return out


@dataclass(frozen=True)
class BondStats:
    """Extreme bond lengths and residue heights of a corpus, in angstroms.

    ``L_CN`` is ``None`` when no chain has a peptide bond (all chains are a
    single residue); the constants that need it then raise ``InvalidStats``.
    """

    l_NA: float
    L_NA: float
    L_AC: float
    L_CN: float | None
    h: float

    def __post_init__(self):
        if not (0 < self.l_NA <= self.L_NA):
            raise InvalidStats(f"need 0 < l_NA <= L_NA, got {self.l_NA}, {self.L_NA}")
        if not self.h > 0:
            raise InvalidStats(f"minimum height must be positive, got {self.h}")

    def with_cn(self, L_CN: float) -> "BondStats":
        return replace(self, L_CN=L_CN)

    @property
    def L(self) -> float:
        if self.L_CN is None:
            raise InvalidStats("no C-N peptide bond in the corpus; L is undefined")
        return max(self.L_CN, self.L_NA, self.L_AC)

    @property
    def K(self) -> float:
        return 1.0 / self.l_NA + (2.0 / self.h) * (1.0 + 2.0 * self.L_AC / self.l_NA)

    @property
    def lam(self) -> float:
        """Forward Lipschitz constant ``2(1 + 2LK)``."""
        return 2.0 * (1.0 + 2.0 * self.L * self.K)

    @property
    def base(self) -> float:
        """Growth base ``8LK`` of the inverse-continuity bound."""
        return 8.0 * self.L * self.K

    def log_mu(self, m: int) -> float:
        return log_row_factor(self.base, m) + 0.5 * math.log(3.0)

    def mu(self, m: int) -> float:
        """Atom-matching constant for chains of ``m`` residues; ``inf`` on overflow."""
        if m < 2:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.sqrt(3.0) * row_factors(self.base, m)[-1])

    def mu_overflows(self, m: int) -> bool:
        return math.isinf(self.mu(m))

    def as_dict(self, m: int | None = None) -> dict:
        d = {"l_NA": self.l_NA, "L_NA": self.L_NA, "L_AC": self.L_AC, "L_CN": self.L_CN, "h": self.h, "K": self.K}
        if self.L_CN is not None:
            d.update(L=self.L, lambda_=self.lam, base=self.base)
            if m is not None:
                d.update(m=m, mu=self.mu(m), log_mu=self.log_mu(m))
        return d


_LOG_MAX = math.log(np.finfo(np.float64).max)


def _check_base(b: float) -> None:
    if not b > 0 or abs(b - 1.0) < 1e-12 or not math.isfinite(b):
        raise InvalidStats(f"growth base must be positive, finite and != 1, got {b}")


def log_row_factor(b: float, i: int) -> float:
    """``log((b^(i-1) - 1) / (b - 1))`` without overflow (``-inf`` for ``i = 1``)."""
    _check_base(b)
    if i < 2:
        return -math.inf
    n = i - 1
    if b > 1:
        return n * math.log(b) + math.log1p(-(b ** -n)) - math.log(b - 1.0)
    return math.log1p(-(b**n)) - math.log1p(-b)


def row_factors(b: float, m: int) -> np.ndarray:
    """Row weights of the scaled invariant: 1 for row 1, ``(b^(i-1)-1)/(b-1)`` after.

    Weights that exceed the float range come back as ``inf``.
    """
    _check_base(b)
    with np.errstate(over="ignore"):
        out = (np.power(b, np.arange(m, dtype=np.float64)) - 1.0) / (b - 1.0)
    if m:
        out[0] = 1.0
    return out


def hat_bri(bri, stats: BondStats | float) -> np.ndarray:
    """BRI with row ``i`` scaled by ``(b^(i-1)-1)/(b-1)``, ``b = 8LK``.

    ``stats`` is either a :class:`BondStats` or the base ``b`` itself.
    Overflowed rows hold ``+-inf`` for non-zero entries and 0 for zeros.
    """
    bri = np.asarray(bri, dtype=np.float64)
    b = stats.base if isinstance(stats, BondStats) else float(stats)
    factors = row_factors(b, bri.shape[0])[:, None]
    with np.errstate(invalid="ignore", over="ignore"):
        out = bri * factors
    return np.where(bri == 0.0, 0.0, out)


def compute_bond_stats(corpus: Iterable) -> BondStats:
    """Exact extremes over every residue of every backbone in ``corpus``."""
    l_na = L_na = L_ac = L_cn = h = None
    for coords in corpus:
        coords = as_backbone(coords)
        trin = compute_trin(coords)
        na = trin[:, 0]
        ac_len = norm(coords[:, 2] - coords[:, 1])
        l_na = float(na.min()) if l_na is None else min(l_na, float(na.min()))
        L_na = float(na.max()) if L_na is None else max(L_na, float(na.max()))
        L_ac = float(ac_len.max()) if L_ac is None else max(L_ac, float(ac_len.max()))
        h = float(trin[:, 2].min()) if h is None else min(h, float(trin[:, 2].min()))
        if coords.shape[0] > 1:
            cn = float(norm(coords[1:, 0] - coords[:-1, 2]).max())
            L_cn = cn if L_cn is None else max(L_cn, cn)
    if l_na is None:
        raise EmptyCorpus("bond statistics need at least one backbone")
    return BondStats(l_NA=l_na, L_NA=L_na, L_AC=L_ac, L_CN=L_cn, h=h)


@dataclass(frozen=True)
class ColumnSummary:
    column: str
    count: int
    mean: float
    std: float
    min: float
    max: float

    @property
    def max_dev(self) -> float:
        """Largest distance of a value from the mean."""
        return max(self.max - self.mean, self.mean - self.min)


def _summary(name: str, values: np.ndarray) -> ColumnSummary:
    if values.size == 0:
        nan = float("nan")
        return ColumnSummary(name, 0, nan, nan, nan, nan)
    mean = float(values.mean())
    return ColumnSummary(name, int(values.size), mean, float(values.std()), float(values.min()), float(values.max()))


def corpus_invariant_stats(corpus: Iterable) -> list[ColumnSummary]:
    """Mean, population std, min and max of every trin and BRI column.

    trin columns use all residues; BRI columns use rows ``2..m`` of each chain.
    Chains are concatenated in corpus order so results are bit-stable.
    """
    trins, bris = [], []
    for coords in corpus:
        b = compute_bri(coords)
        trins.append(compute_trin(coords))
        bris.append(b[1:])
    if not trins:
        raise EmptyCorpus("corpus statistics need at least one backbone")
    trin = np.concatenate(trins)
    bri = np.concatenate(bris)
    return [_summary(n, trin[:, j]) for j, n in enumerate(TRIN_COLUMNS)] + [
        _summary(n, bri[:, j]) for j, n in enumerate(BRI_COLUMNS)
    ]
