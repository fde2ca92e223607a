"""Rate-1 real orthogonal designs and their separable complex versions.

A linear design in ``k`` variables is stored as a coefficient tensor
``G[r, c, v]``: entry ``(r, c)`` of the ``l x Nt`` matrix is
``sum_v G[r, c, v] x_v``. Two views of ``G`` are used:

- column representation ``A_c = G[:, c, :]`` (``l x k``), so that column
  ``c`` of ``X`` is ``A_c x``;
- dispersion ``W_v = G[:, :, v]`` (``l x Nt``), so that ``X = sum_v x_v W_v``.

For a real orthogonal design the column matrices satisfy the
Hurwitz-Radon conditions ``A_i A_i^T = I`` and
``A_i A_j^T + A_j A_i^T = 0`` (``i != j``), which make
``Hhat = sum_c h_c A_c`` a scaled orthogonal matrix for any real ``h``.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .constellation import ValidationError

# rows as signed 1-based variable indices
_ROWS = {
    1: [[1]],
    2: [[1, 2], [-2, 1]],
    4: [[1, 2, 3, 4], [-2, 1, -4, 3], [-3, 4, 1, -2], [-4, -3, 2, 1]],
    8: [
        [1, 2, 3, 4, 5, 6, 7, 8],
        [-2, 1, 4, -3, 6, -5, -8, 7],
        [-3, -4, 1, 2, 7, 8, -5, -6],
        [-4, 3, -2, 1, 8, -7, 6, -5],
        [-5, -6, -7, -8, 1, 2, 3, 4],
        [-6, 5, -8, 7, -2, 1, -4, 3],
        [-7, 8, 5, -6, -3, 4, 1, -2],
        [-8, -7, 6, 5, -4, -3, 2, 1],
    ],
}

KINDS = ("ROD", "SOD")


def _tensor(rows):
    l, nt = len(rows), len(rows[0])
    G = np.zeros((l, nt, l))
    for r, row in enumerate(rows):
        for c, e in enumerate(row):
            G[r, c, abs(e) - 1] = np.sign(e)
    return G


@dataclass(frozen=True, eq=False)
class OrthogonalDesign:
    """An ``l x Nt`` linear design in ``k`` variables.

    Attributes
    ----------
    G : ndarray, shape (l, Nt, k)
        Coefficient tensor.
    kind : {"ROD", "SOD"}
        ``SOD`` means the same real structure with complex variables.
    """

    G: np.ndarray
    kind: str = "ROD"

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.ndim != 3:
            raise ValidationError("design", "coefficient tensor must have shape (l, Nt, k)")
        if self.kind not in KINDS:
            raise ValidationError("design", f"kind must be one of {KINDS}, got {self.kind!r}")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @property
    def l(self):
        return self.G.shape[0]

    @property
    def Nt(self):
        return self.G.shape[1]

    @property
    def k(self):
        return self.G.shape[2]

    @property
    def rate(self):
        return self.k / self.l

    @property
    def rep_matrices(self):
        """Column representation matrices, shape (Nt, l, k)."""
        return np.transpose(self.G, (1, 0, 2))

    @property
    def dispersion_matrices(self):
        """Matrices ``W_v`` with ``X = sum_v x_v W_v``, shape (k, l, Nt)."""
        return np.transpose(self.G, (2, 0, 1))

    def matrix(self, x):
        """The codeword for variable vector(s) ``x`` of shape (..., k)."""
        x = np.asarray(x)
        return np.einsum("rcv,...v->...rc", self.G, x)

    def effective_channel(self, h):
        """``Hhat = sum_c h_c A_c`` so that ``X h = Hhat x``; ``h`` of shape (..., Nt)."""
        return np.einsum("rcv,...c->...rv", self.G, np.asarray(h))

    def hurwitz_radon_residual(self):
        """Largest deviation from ``A_i A_i^T = I`` and ``A_i A_j^T + A_j A_i^T = 0``."""
        A = self.rep_matrices
        P = np.einsum("irv,jsv->ijrs", A, A)
        S = P + np.transpose(P, (1, 0, 2, 3))
        target = np.zeros_like(S)
        for i in range(self.Nt):
            target[i, i] = 2 * np.eye(self.l)
        return float(np.abs(S - target).max())

    def to_text(self, var="x"):
        """Human readable matrix, one row per line."""
        lines = []
        for r in range(self.l):
            cells = []
            for c in range(self.Nt):
                terms = []
                for v in np.flatnonzero(self.G[r, c]):
                    a = self.G[r, c, v]
                    s = "-" if a < 0 else ""
                    mag = "" if abs(abs(a) - 1) < 1e-12 else f"{abs(a):g}*"
                    terms.append(f"{s}{mag}{var}{v + 1}")
                cells.append("+".join(terms).replace("+-", "-") if terms else "0")
            lines.append(" ".join(f"{t:>5}" for t in cells))
        return "\n".join(lines)


def make_rod(Nt):
    """Rate-1 real orthogonal design for ``1 <= Nt <= 8`` transmit antennas.

    Square designs are used for 1, 2, 4 and 8 antennas; other sizes take
    the first ``Nt`` columns of the next square design, which keeps every
    column representation matrix and hence rate 1.
    """
    Nt = int(Nt)
    if not 1 <= Nt <= 8:
        raise ValidationError("antennas", f"supported Nt is 1..8, got {Nt}")
    size = min(s for s in _ROWS if s >= Nt)
    G = _tensor(_ROWS[size])[:, :Nt, :]
    return OrthogonalDesign(G, "ROD")


def make_sod(rod):
    """Separable orthogonal design: the ROD with its variables taken complex."""
    if rod.kind != "ROD":
        raise ValidationError("design", "input must be a real orthogonal design")
    if rod.hurwitz_radon_residual() > 1e-12:
        raise ValidationError("design", "input violates the Hurwitz-Radon conditions")
    return OrthogonalDesign(rod.G, "SOD")


def difference_ranks(design, constellation, tol=1e-9):
    """Ranks of ``X(x) - X(x')`` over all distinct variable vectors.

    Variables take values in ``constellation``; the difference codeword is
    ``X(d)`` with ``d`` ranging over nonzero vectors of pointwise
    differences. A code is fully diverse when the minimum rank is ``Nt``.

    Returns
    -------
    ndarray of int
        Sorted distinct ranks that occur.
    """
    p = np.asarray(constellation.points)
    diffs = np.unique(np.round((p[:, None] - p[None, :]).ravel(), 12))
    d = np.array(list(product(diffs, repeat=design.k)))
    d = d[np.any(np.abs(d) > tol, axis=1)]
    X = design.matrix(d)
    s = np.linalg.svd(X, compute_uv=False)
    ranks = np.count_nonzero(s > tol * np.maximum(s[:, :1], 1.0), axis=1)
    return np.unique(ranks)
