"""Rebuild backbone coordinates from a BRI matrix."""
from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateResidue, DegenerateRow
from .geometry import TOL_HEIGHT, TOL_LEN, frames
from .invariant import validate_bri


def _basis(n, a, c, index):
    anx, any_, anz = n[0] - a[0], n[1] - a[1], n[2] - a[2]
    acx, acy, acz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    an_len = math.sqrt(anx * anx + any_ * any_ + anz * anz)
    if an_len < TOL_LEN:
        raise DegenerateRow(f"|CA-N| = {an_len:.3g} below {TOL_LEN}", index)
    b = (acx * anx + acy * any_ + acz * anz) / (an_len * an_len)
    hx, hy, hz = acx - b * anx, acy - b * any_, acz - b * anz
    h_len = math.sqrt(hx * hx + hy * hy + hz * hz)
    if h_len < TOL_HEIGHT:
        raise DegenerateRow(f"triangle height at C = {h_len:.3g} below {TOL_HEIGHT}", index)
    ux, uy, uz = anx / an_len, any_ / an_len, anz / an_len
    vx, vy, vz = hx / h_len, hy / h_len, hz / h_len
    return (
        (ux, uy, uz),
        (vx, vy, vz),
        (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx),
    )


def _step(p, u, v, w, x, y, z):
    return (
        p[0] + x * u[0] + y * v[0] + z * w[0],
        p[1] + x * u[1] + y * v[1] + z * w[1],
        p[2] + x * u[2] + y * v[2] + z * w[2],
    )


def reconstruct(bri) -> np.ndarray:
    """Backbone in canonical pose whose invariant is ``bri``.

    CA1 sits at the origin, N1 on the positive x-axis and C1 in the upper
    xy-plane. Each later residue is placed by adding its three stored bond
    vectors, expressed in the frame recomputed from the previous residue's
    already placed atoms. Runs in time linear in the number of rows.

    Raises:
        MalformedMatrix: bad shape, non-finite entries or a row-1 entry that
            must be zero is not.
        DegenerateRow: some residue ends up with no well-defined frame.
    """
    bri = validate_bri(bri)
    m = bri.shape[0]
    rows = bri.tolist()
    out = np.empty((m, 3, 3))
    n = (rows[0][0], 0.0, 0.0)
    a = (0.0, 0.0, 0.0)
    c = (rows[0][6], rows[0][7], 0.0)
    out[0] = (n, a, c)
    for i in range(1, m):
        u, v, w = _basis(n, a, c, i)
        r = rows[i]
        n = _step(c, u, v, w, r[0], r[1], r[2])
        a = _step(n, u, v, w, r[3], r[4], r[5])
        c = _step(a, u, v, w, r[6], r[7], r[8])
        out[i] = (n, a, c)
    try:
        frames(out)
    except DegenerateResidue as exc:
        raise DegenerateRow("reconstructed residue has no frame", exc.index) from None
    return out
