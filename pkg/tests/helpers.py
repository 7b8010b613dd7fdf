"""Shared test utilities: independent oracles and CSV readers.

The oracles here deliberately avoid the code paths under test. The
orthogonal-fit oracle minimizes the perpendicular-residual cost by golden
section search; the eigen oracle builds characteristic-polynomial
coefficients by hand and takes roots via the companion matrix, with
eigenvectors from an SVD null space.
"""

import csv

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def orthogonal_fit_cost(b, z_i, z_v):
    r = z_v - b * z_i
    return float(r @ r) / (1.0 + b * b)


def orthogonal_fit_oracle(z_i, z_v, lo=-100.0, hi=100.0, iters=200):
    """Minimizer of the perpendicular-residual cost.

    The cost has one minimum and one maximum over the reals, so a coarse
    grid locates the right basin first and golden section refines inside it.
    """
    z_i = np.asarray(z_i, dtype=float)
    z_v = np.asarray(z_v, dtype=float)
    grid = np.linspace(lo, hi, 4001)
    costs = [orthogonal_fit_cost(b, z_i, z_v) for b in grid]
    k = int(np.argmin(costs))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = orthogonal_fit_cost(c, z_i, z_v)
    fd = orthogonal_fit_cost(d, z_i, z_v)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = orthogonal_fit_cost(c, z_i, z_v)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = orthogonal_fit_cost(d, z_i, z_v)
    return 0.5 * (a + b)


def charpoly_eig_oracle(a):
    """Eigen decomposition via explicit characteristic polynomial roots.

    Supports 2x2 and 3x3 symmetric input. Coefficients are assembled by
    hand (trace, principal minors, determinant) so nothing here shares code
    with an eigensolver; roots come from numpy's companion-matrix solver and
    eigenvectors from the SVD null space of (A - lambda I).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    tr = float(np.trace(a))
    if n == 2:
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        coeffs = [1.0, -tr, det]
    elif n == 3:
        m01 = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        m02 = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        m12 = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
        det = (
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
        coeffs = [1.0, -tr, m01 + m02 + m12, -det]
    else:
        raise ValueError("oracle handles 2x2 and 3x3 only")
    values = np.sort(np.real(np.roots(coeffs)))[::-1]
    vectors = np.empty((n, n))
    for k, lam in enumerate(values):
        _, _, vt = np.linalg.svd(a - lam * np.eye(n))
        vectors[:, k] = vt[-1]
    return values, vectors


def read_csv_columns(path):
    """CSV as {name: [raw string, ...]} preserving the exact cell text."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    out = {name: [] for name in names}
    for row in rows[1:]:
        for name, cell in zip(names, row):
            out[name].append(cell)
    return out


def column(raw, name):
    return np.array([float(v) for v in raw[name]])


def select(raw, name, key, value):
    """Rows of column `name` where column `key` equals `value` (as text)."""
    keep = [k for k, v in enumerate(raw[key]) if v == value]
    return np.array([float(raw[name][k]) for k in keep])
