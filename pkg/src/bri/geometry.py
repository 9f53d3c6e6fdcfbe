"""Vector and frame primitives for backbones.

A backbone is a float64 array of shape ``(m, 3, 3)``: residue, atom (N, CA, C),
cartesian coordinate in angstroms. Everything here is a pure function of its
inputs.

Dot and cross products are spelled out component by component instead of going
through ``np.dot``/``np.einsum``. The fixed summation order makes the results
bit-identical under axis permutations and sign flips, which the diagram
emitters rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateResidue

ATOM_NAMES = ("N", "CA", "C")

# Degeneracy guards in angstroms: |AN| and the height of triangle NAC at C.
TOL_LEN = 1e-6
TOL_HEIGHT = 1e-6


def as_backbone(coords) -> np.ndarray:
    """Validate and convert ``coords`` to a ``(m, 3, 3)`` float64 array."""
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim == 2 and arr.shape == (3, 3):
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != (3, 3):
        raise ValueError(f"backbone must have shape (m, 3, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("backbone coordinates must be finite")
    return arr


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(dot(a, a))


class ResidueFrame(NamedTuple):
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def matrix(self) -> np.ndarray:
        """Rows u, v, w: maps lab vectors to frame coordinates."""
        return np.stack([self.u, self.v, self.w])


def frames(coords: np.ndarray) -> np.ndarray:
    """Orthonormal bases of every residue of a backbone.

    Returns an ``(m, 3, 3)`` array whose ``[i]`` entry has rows ``u_i, v_i,
    w_i``. ``u`` points from CA to N, ``v`` is the unit part of CA->C
    orthogonal to ``u`` and ``w = u x v``.

    Raises:
        DegenerateResidue: with the 1-based index of the first residue whose
            |AN| or triangle height at C falls below the guard.
    """
    an = coords[:, 0] - coords[:, 1]
    ac = coords[:, 2] - coords[:, 1]
    an_len = norm(an)
    bad = np.flatnonzero(an_len < TOL_LEN)
    if bad.size:
        raise DegenerateResidue(f"|CA-N| = {an_len[bad[0]]:.3g} below {TOL_LEN}", int(bad[0]) + 1)
    b = dot(ac, an) / (an_len * an_len)
    h = ac - b[:, None] * an
    h_len = norm(h)
    bad = np.flatnonzero(h_len < TOL_HEIGHT)
    if bad.size:
        raise DegenerateResidue(
            f"triangle height at C = {h_len[bad[0]]:.3g} below {TOL_HEIGHT}", int(bad[0]) + 1
        )
    u = an / an_len[:, None]
    v = h / h_len[:, None]
    w = cross(u, v)
    return np.stack([u, v, w], axis=1)


def residue_frame(n, a, c) -> ResidueFrame:
    """Frame of a single residue from its N, CA and C positions."""
    coords = as_backbone(np.stack([np.asarray(n, float), np.asarray(a, float), np.asarray(c, float)]))
    basis = frames(coords)[0]
    return ResidueFrame(coords[0, 1].copy(), basis[0], basis[1], basis[2])


@dataclass(frozen=True)
class RigidMotion:
    """Orientation-preserving isometry ``p -> R p + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=np.float64)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("rigid motion must be finite")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-12:
            raise ValueError("rotation is not orthogonal")
        if abs(np.linalg.det(r) - 1.0) > 1e-12:
            raise ValueError("rotation is not proper (det != +1)")
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidMotion":
        rt = self.rotation.T
        return RigidMotion(rt, -(rt @ self.translation))

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """``self`` after ``other``."""
        return RigidMotion(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)


def apply_motion(f: RigidMotion, coords) -> np.ndarray:
    return f.apply(as_backbone(coords))


def mirror(coords) -> np.ndarray:
    """Reflect in the xy-plane: ``(x, y, z) -> (x, y, -z)``."""
    out = as_backbone(coords).copy()
    out[..., 2] = -out[..., 2]
    return out


def canonical_pose(coords) -> tuple[np.ndarray, RigidMotion]:
    """Move a backbone so CA1 is the origin, N1 lies on +x and C1 in the upper xy-plane.

    Returns the moved backbone and the motion that was applied.
    """
    coords = as_backbone(coords)
    rotation = frames(coords[:1])[0]
    f = RigidMotion(rotation, -(rotation @ coords[0, 1]))
    posed = f.apply(coords)
    # Exact by construction; clear rounding residue so the pose is idempotent.
    posed[0, 1] = 0.0
    posed[0, 0, 1:] = 0.0
    posed[0, 2, 2] = 0.0
    return posed, f


def rotation_from_quaternion(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_motion(seed: int | np.random.Generator, box: float = 10.0) -> RigidMotion:
    """Uniformly random rotation (Haar on SO(3)) and translation in ``[-box, box]^3``."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4)
    while np.linalg.norm(q) < 1e-8:  # pragma: no cover
        q = rng.standard_normal(4)
    return RigidMotion(rotation_from_quaternion(q), rng.uniform(-box, box, 3))


def rotation_angle(r: np.ndarray) -> float:
    return float(np.arccos(np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)))


def _place(a, b, c, length, angle, torsion):
    """Atom ``d`` with |cd| = length, angle bcd and dihedral abcd (radians)."""
    bc = c - b
    bc = bc / np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n = n / np.linalg.norm(n)
    m = np.stack([bc, np.cross(n, bc), n], axis=1)
    d = np.array(
        [
            -length * np.cos(angle),
            length * np.sin(angle) * np.cos(torsion),
            length * np.sin(angle) * np.sin(torsion),
        ]
    )
    return c + m @ d


def _place_fast(a, b, c, length, cos_a, sin_a, torsion):
    """Scalar version of :func:`_place` on 3-tuples; cosine and sine of the angle given."""
    bcx, bcy, bcz = c[0] - b[0], c[1] - b[1], c[2] - b[2]
    s = 1.0 / math.sqrt(bcx * bcx + bcy * bcy + bcz * bcz)
    bcx, bcy, bcz = bcx * s, bcy * s, bcz * s
    abx, aby, abz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    nx, ny, nz = aby * bcz - abz * bcy, abz * bcx - abx * bcz, abx * bcy - aby * bcx
    s = 1.0 / math.sqrt(nx * nx + ny * ny + nz * nz)
    nx, ny, nz = nx * s, ny * s, nz * s
    mx, my, mz = ny * bcz - nz * bcy, nz * bcx - nx * bcz, nx * bcy - ny * bcx
    d0 = -length * cos_a
    d1 = length * sin_a * math.cos(torsion)
    d2 = length * sin_a * math.sin(torsion)
    return (
        c[0] + bcx * d0 + mx * d1 + nx * d2,
        c[1] + bcy * d0 + my * d1 + ny * d2,
        c[2] + bcz * d0 + mz * d1 + nz * d2,
    )


def random_backbone(
    m: int,
    rng: np.random.Generator | int | None = None,
    bond_range: tuple[float, float] = (1.2, 1.6),
    angle_range: tuple[float, float] = (100.0, 130.0),
) -> np.ndarray:
    """Random non-degenerate backbone of ``m`` residues.

    Every bond length is uniform in ``bond_range`` and every bond angle uniform
    in ``angle_range`` degrees; torsions are uniform on the circle. Used as a
    test and experiment generator.
    """
    rng = np.random.default_rng(rng)
    n_atoms = 3 * m
    lengths = rng.uniform(*bond_range, n_atoms).tolist()
    angles = np.radians(rng.uniform(*angle_range, n_atoms))
    cos_a, sin_a = np.cos(angles).tolist(), np.sin(angles).tolist()
    torsions = rng.uniform(-np.pi, np.pi, n_atoms).tolist()
    pts = [(0.0, 0.0, 0.0)]
    if n_atoms > 1:
        pts.append((lengths[1], 0.0, 0.0))
    if n_atoms > 2:
        pts.append((lengths[1] - lengths[2] * cos_a[2], lengths[2] * sin_a[2], 0.0))
    for k in range(3, n_atoms):
        pts.append(_place_fast(pts[k - 3], pts[k - 2], pts[k - 1], lengths[k], cos_a[k], sin_a[k], torsions[k]))
    return np.array(pts, dtype=np.float64).reshape(m, 3, 3) + rng.uniform(-20, 20, 3)


def random_walk_backbone(m: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Fast vectorised backbone: bonds of random direction, lengths in [1.2, 1.6].

    Bond angles are unconstrained, so this is only meant for timing runs.
    """
    rng = np.random.default_rng(rng)
    steps = rng.standard_normal((3 * m, 3))
    steps *= (rng.uniform(1.2, 1.6, 3 * m) / np.linalg.norm(steps, axis=1))[:, None]
    return np.cumsum(steps, axis=0).reshape(m, 3, 3)


# Engh & Huber style ideal backbone geometry (angstrom, degrees).
IDEAL_BONDS = {"N-CA": 1.458, "CA-C": 1.525, "C-N": 1.329}
IDEAL_ANGLES = {"N-CA-C": 111.2, "CA-C-N": 116.2, "C-N-CA": 121.7}


def build_backbone(phi, psi, omega=None, noise: float = 0.0, rng=None) -> np.ndarray:
    """Backbone with ideal bond lengths and angles from torsions in degrees.

    ``phi[0]`` is unused (the first residue has no preceding C) and so is
    ``psi[-1]``. ``noise`` adds uniform per-coordinate jitter in angstroms.
    """
    phi = np.radians(np.asarray(phi, dtype=np.float64))
    psi = np.radians(np.asarray(psi, dtype=np.float64))
    m = len(phi)
    omega = np.radians(np.full(m, 180.0) if omega is None else np.asarray(omega, dtype=np.float64))
    b_na, b_ac, b_cn = IDEAL_BONDS["N-CA"], IDEAL_BONDS["CA-C"], IDEAL_BONDS["C-N"]
    a_nac, a_acn, a_cna = (np.radians(IDEAL_ANGLES[k]) for k in ("N-CA-C", "CA-C-N", "C-N-CA"))
    pts = np.zeros((3 * m, 3))
    pts[1] = (b_na, 0.0, 0.0)
    pts[2] = pts[1] + b_ac * np.array([-np.cos(a_nac), np.sin(a_nac), 0.0])
    for i in range(1, m):
        k = 3 * i
        pts[k] = _place(pts[k - 3], pts[k - 2], pts[k - 1], b_cn, a_acn, psi[i - 1])
        pts[k + 1] = _place(pts[k - 2], pts[k - 1], pts[k], b_na, a_cna, omega[i - 1])
        pts[k + 2] = _place(pts[k - 1], pts[k], pts[k + 1], b_ac, a_nac, phi[i])
    out = pts.reshape(m, 3, 3)
    if noise:
        out = out + np.random.default_rng(rng).uniform(-noise, noise, out.shape)
    return out
