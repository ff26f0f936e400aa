"""Translation-reduced bases of local operator densities.

1D: all length-r Pauli words with a non-identity first site, N = 3*4^(r-1).
2D: all words on an n x m window whose support touches the last row and the
last column; grouping by support pattern gives the class table (3^p elements
per class with p non-identity cells).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp

from .pauli import I, PauliString

MAX_R_1D = 13
MAX_CELLS_2D = 9


@dataclass
class LocalOperatorBasis:
    dim: int                      # 1 or 2
    shape: tuple                  # (r,) or (n, m)
    codes: np.ndarray             # (N, nsites) int8, row-major for 2D
    classes: list = field(default=None)   # 2D: [(mask, popcount, count)]

    @property
    def nsites(self):
        return int(np.prod(self.shape))

    @property
    def size(self):
        return self.codes.shape[0]

    def __len__(self):
        return self.size

    def element(self, pos):
        grid = tuple(self.shape) if self.dim == 2 else None
        return PauliString(self.codes[pos], grid)

    def elements(self):
        return [self.element(p) for p in range(self.size)]

    def packed(self):
        """Flat window index of each element (site 0 most significant)."""
        n = self.nsites
        weights = 4 ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return self.codes.astype(np.int64) @ weights

    def position(self, codes):
        """Index of a canonical element; raises KeyError if not in basis."""
        codes = tuple(int(c) for c in codes)
        if self.dim == 1:
            first = codes[0]
            if first == I:
                raise KeyError(codes)
            idx = 0
            for c in codes:
                idx = idx * 4 + c
            return idx - 4 ** (self.nsites - 1)
        try:
            return self._index_map()[codes]
        except KeyError:
            raise KeyError(codes) from None

    def _index_map(self):
        if not hasattr(self, "_imap"):
            self._imap = {tuple(row): k for k, row in enumerate(self.codes)}
        return self._imap

    def canonicalize(self, codes):
        """(position, shift) of the canonical translate of a window word."""
        codes = tuple(int(c) for c in codes)
        if all(c == I for c in codes):
            raise ValueError("identity has no canonical density")
        if self.dim == 1:
            first = next(k for k, c in enumerate(codes) if c != I)
            shifted = codes[first:] + (I,) * first
            return self.position(shifted), first
        n, m = self.shape
        rows = [k // m for k, c in enumerate(codes) if c != I]
        cols = [k % m for k, c in enumerate(codes) if c != I]
        di, dj = (n - 1) - max(rows), (m - 1) - max(cols)
        out = [I] * (n * m)
        for k, c in enumerate(codes):
            if c != I:
                out[(k // m + di) * m + (k % m + dj)] = c
        return self.position(tuple(out)), (di, dj)


def build_basis_1d(r: int) -> LocalOperatorBasis:
    if not 1 <= r <= MAX_R_1D:
        raise ValueError(f"support r={r} outside 1..{MAX_R_1D}")
    n = 3 * 4 ** (r - 1)
    # lexicographic by packed code; first-site codes X < Y < Z
    packed = np.arange(4 ** (r - 1), 4 ** r, dtype=np.int64)
    codes = np.empty((n, r), dtype=np.int8)
    for j in range(r):
        codes[:, j] = (packed >> (2 * (r - 1 - j))) & 3
    return LocalOperatorBasis(1, (r,), codes)


def embed_coefficients_1d(v, r_from: int, r_to: int):
    """Lift a basis-r_from coefficient vector into the basis-r_to ordering.

    A support-<=r_from density is also a basis element at larger r (trailing
    identities); with the lexicographic packing, element i of basis r maps
    to element i * 4^(r_to - r_from) of basis r_to.  Useful for warm-starting
    eigensolves at r+1 from the converged mode at r.
    """
    v = np.asarray(v)
    if r_to < r_from:
        raise ValueError("r_to must be >= r_from")
    if v.shape != (3 * 4 ** (r_from - 1),):
        raise ValueError("coefficient vector does not match basis r_from")
    out = np.zeros(3 * 4 ** (r_to - 1), dtype=v.dtype)
    out[np.arange(v.size) * 4 ** (r_to - r_from)] = v
    return out


def build_basis_2d(n: int, m: int) -> LocalOperatorBasis:
    if n * m > MAX_CELLS_2D or n < 1 or m < 1:
        raise ValueError(f"2D support {n}x{m} above {MAX_CELLS_2D} cells")
    cells = n * m
    classes = []
    rows_of = [k // m for k in range(cells)]
    cols_of = [k % m for k in range(cells)]
    for mask in range(1, 2 ** cells):
        sup = [k for k in range(cells) if (mask >> k) & 1]
        if max(rows_of[k] for k in sup) == n - 1 and \
           max(cols_of[k] for k in sup) == m - 1:
            classes.append((mask, len(sup)))
    blocks = []
    table = []
    for mask, p in classes:
        sup = [k for k in range(cells) if (mask >> k) & 1]
        block = np.zeros((3 ** p, cells), dtype=np.int8)
        for row, assign in enumerate(product((1, 2, 3), repeat=p)):
            for k, c in zip(sup, assign):
                block[row, k] = c
        blocks.append(block)
        table.append((mask, p, 3 ** p))
    codes = np.vstack(blocks)
    return LocalOperatorBasis(2, (n, m), codes, classes=table)


def class_count_2d(n: int, m: int) -> int:
    """Closed-form class counts for n x 2 and n x 3 windows, n >= 2."""
    if m == 2 and n >= 2:
        return (5 + 6 * (2 ** (n - 2) - 1)) * 2 ** (n - 1)
    if m == 3 and n >= 2:
        return (11 + 14 * (2 ** (n - 2) - 1)) * 2 ** (2 * n - 2)
    raise ValueError("closed form known for m in (2, 3), n >= 2 only")


@dataclass
class ParityBlocks:
    """Orthonormal even/odd combinations under spatial reflection (1D)."""

    k: float
    even: sp.csr_matrix          # N x n_even
    odd: sp.csr_matrix           # N x n_odd


def reflection_map(basis: LocalOperatorBasis, k: float):
    """Signed permutation of the basis under site reflection.

    Reversal can leave leading identities; re-canonicalizing shifts the
    density by ``m`` sites which at momentum k contributes a phase
    e^{i k (m - r + 1)}; only k = 0, pi keep the map real.
    """
    if basis.dim != 1:
        raise ValueError("parity blocks defined for 1D bases only")
    if not (k == 0.0 or abs(k - np.pi) < 1e-15):
        raise ValueError("reflection commutes with k only at k = 0, pi")
    r = basis.nsites
    perm = np.empty(basis.size, dtype=np.int64)
    sign = np.empty(basis.size, dtype=np.int8)
    at_pi = k != 0.0
    for pos in range(basis.size):
        rc = tuple(basis.codes[pos][::-1])
        lead = next(j for j, c in enumerate(rc) if c != I)
        gamma = rc[lead:] + (I,) * lead
        perm[pos] = basis.position(gamma)
        sign[pos] = (-1) ** ((lead - r + 1) % 2) if at_pi else 1
    return perm, sign


def parity_blocks(basis: LocalOperatorBasis, k: float) -> ParityBlocks:
    perm, sign = reflection_map(basis, k)
    even_cols, odd_cols = [], []
    inv = 1 / np.sqrt(2.0)
    for pos in range(basis.size):
        mate = perm[pos]
        if mate == pos:
            (even_cols if sign[pos] > 0 else odd_cols).append([(pos, 1.0)])
        elif pos < mate:
            s = float(sign[pos])
            even_cols.append([(pos, inv), (mate, s * inv)])
            odd_cols.append([(pos, inv), (mate, -s * inv)])

    def mat(cols):
        data, ri, ci = [], [], []
        for c, entries in enumerate(cols):
            for pos, val in entries:
                data.append(val)
                ri.append(pos)
                ci.append(c)
        return sp.csr_matrix((data, (ri, ci)), shape=(basis.size, len(cols)))

    return ParityBlocks(k, mat(even_cols), mat(odd_cols))
