"""Exact Pauli-string algebra and gate-conjugation superoperators.

Everything works in the Hermitian Pauli basis {1, X, Y, Z}, encoded as
integer codes 0..3 (2 bits per site).  Conjugation of Hermitian Paulis by a
unitary gives real combinations, so all gate superoperators are real
orthogonal matrices; complex numbers enter the rest of the code only through
quasimomentum phases.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

I, X, Y, Z = 0, 1, 2, 3
CODE_CHARS = "1XYZ"
CHAR_CODES = {"1": I, "I": I, "X": X, "Y": Y, "Z": Z}

# single-site products: sigma^a sigma^b = i^PHASE[a,b] sigma^[PROD[a,b]]
PROD = np.zeros((4, 4), dtype=np.int8)
PHASE = np.zeros((4, 4), dtype=np.int8)
for _a in range(1, 4):
    PROD[0, _a] = PROD[_a, 0] = _a
    for _b in range(1, 4):
        if _a == _b:
            PROD[_a, _b] = 0
        else:
            _c = 6 - _a - _b
            PROD[_a, _b] = _c
            # XY = iZ, YZ = iX, ZX = iY (cyclic), reversed order gives -i
            PHASE[_a, _b] = 1 if (_b - _a) % 3 == 1 else 3

# 2x2 matrices for building gate unitaries
SIGMA = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


class PauliString:
    """Pauli word on a 1D segment or a flattened 2D grid window.

    codes[j] is the Pauli code of site j; for 2D the codes are a row-major
    flattening of an n x m grid and ``grid`` stores (n, m).
    """

    __slots__ = ("codes", "grid")

    def __init__(self, codes, grid=None):
        self.codes = tuple(int(c) for c in codes)
        if any(c < 0 or c > 3 for c in self.codes):
            raise ValueError("Pauli codes must be in 0..3")
        if grid is not None:
            n, m = grid
            if n * m != len(self.codes):
                raise ValueError("grid shape inconsistent with code count")
            grid = (n, m)
        self.grid = grid

    def __len__(self):
        return len(self.codes)

    def __eq__(self, other):
        return self.codes == other.codes and self.grid == other.grid

    def __hash__(self):
        return hash((self.codes, self.grid))

    def __repr__(self):
        return f"PauliString({self!s})"

    def __str__(self):
        s = "".join(CODE_CHARS[c] for c in self.codes)
        if self.grid is None:
            return s
        n, m = self.grid
        return "/".join(s[i * m:(i + 1) * m] for i in range(n))

    @classmethod
    def from_str(cls, text):
        rows = text.split("/")
        codes = [CHAR_CODES[ch] for row in rows for ch in row]
        grid = (len(rows), len(rows[0])) if len(rows) > 1 else None
        return cls(codes, grid)

    def is_canonical_density(self):
        """Canonical-density anchor: first site non-identity (1D), or
        support touching the last row and last column (2D)."""
        if self.grid is None:
            return len(self.codes) > 0 and self.codes[0] != I
        n, m = self.grid
        rows = {k // m for k, c in enumerate(self.codes) if c != I}
        cols = {k % m for k, c in enumerate(self.codes) if c != I}
        return bool(rows) and max(rows) == n - 1 and max(cols) == m - 1

    def packed(self):
        """Integer index, site 0 in the most significant position."""
        idx = 0
        for c in self.codes:
            idx = idx * 4 + c
        return idx


@dataclass(frozen=True)
class PhasedString:
    """i^phase times a PauliString; the phase exponent is kept mod 4."""

    phase: int
    string: PauliString

    def value(self):
        return 1j ** (self.phase % 4)


def pauli_mul(p: PauliString, q: PauliString) -> PhasedString:
    """Sitewise product p*q with the exact accumulated i-power."""
    if len(p) != len(q) or p.grid != q.grid:
        raise ValueError("length mismatch in pauli_mul")
    phase = 0
    codes = []
    for a, b in zip(p.codes, q.codes):
        codes.append(PROD[a, b])
        phase += PHASE[a, b]
    return PhasedString(phase % 4, PauliString(codes, p.grid))


@dataclass(frozen=True)
class GateSpec:
    """Analytic gate G = exp(-i*angle*P) for a 1- or 2-site Pauli word P."""

    word: tuple  # e.g. (Z,) or (Z, Z)
    angle: float

    @property
    def arity(self):
        return len(self.word)

    def unitary(self):
        p = SIGMA[self.word[0]]
        for c in self.word[1:]:
            p = np.kron(p, SIGMA[c])
        dim = p.shape[0]
        return np.cos(self.angle) * np.eye(dim) - 1j * np.sin(self.angle) * p

    def inverse(self):
        return GateSpec(self.word, -self.angle)


@dataclass(frozen=True)
class GateSuperoperator:
    """Heisenberg conjugation a -> G^dag a G in the Hermitian Pauli basis.

    matrix[out, in] = tr(sigma_out G^dag sigma_in G) / 2^arity; real and
    orthogonal, with the all-identity row/column a unit vector.
    """

    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        dim = 4 ** self.arity
        if m.shape != (dim, dim):
            raise ValueError("superoperator shape mismatch")
        if not np.allclose(m.T @ m, np.eye(dim), atol=1e-13):
            raise ValueError("superoperator not orthogonal: gate not unitary?")


def _pauli_word_matrix(codes):
    p = SIGMA[codes[0]]
    for c in codes[1:]:
        p = np.kron(p, SIGMA[c])
    return p


def superoperator_from_unitary(g: np.ndarray) -> GateSuperoperator:
    """Expand a -> G^dag a G over Hermitian Pauli words; exact up to LAPACK."""
    dim = g.shape[0]
    arity = dim.bit_length() - 1
    nops = 4 ** arity
    words = [_pauli_word_matrix(_codes(idx, arity)) for idx in range(nops)]
    conj = [g.conj().T @ w @ g for w in words]
    mat = np.empty((nops, nops))
    for out in range(nops):
        for inn in range(nops):
            val = np.trace(words[out] @ conj[inn]) / dim
            if abs(val.imag) > 1e-13:
                raise ValueError("non-real superoperator entry: input not unitary")
            mat[out, inn] = val.real
    return GateSuperoperator(arity, mat)


def _codes(idx, n):
    return tuple((idx >> (2 * (n - 1 - k))) & 3 for k in range(n))


@lru_cache(maxsize=256)
def gate_superoperator(spec: GateSpec) -> GateSuperoperator:
    """Superoperator of an analytic axis-angle gate.

    Closed form: words commuting with P are fixed; anticommuting words w
    rotate, w -> cos(2*angle) w - sin(2*angle) * (i P w).
    """
    n = spec.arity
    nops = 4 ** n
    c2, s2 = np.cos(2 * spec.angle), np.sin(2 * spec.angle)
    mat = np.zeros((nops, nops))
    p = PauliString(spec.word)
    for inn in range(nops):
        w = PauliString(_codes(inn, n))
        pw = pauli_mul(p, w)
        wp = pauli_mul(w, p)
        if pw.phase == wp.phase:
            mat[inn, inn] = 1.0
        else:
            # G^dag w G = cos(2t) w + sin(2t) * i^(pw.phase+1) * (P w)
            mat[inn, inn] = c2
            coeff = s2 * (1j ** (pw.phase + 1))
            assert abs(coeff.imag) < 1e-15
            mat[pw.string.packed(), inn] = coeff.real
    return GateSuperoperator(n, mat)
