"""Momentum-resolved truncated operator propagator M(k).

M_{alpha,beta}(k) is the one-Floquet-step Heisenberg map restricted to
translation-reduced operator densities of support r (1D) or n x m (2D).
The column of index beta is obtained by conjugating the density a^beta,
embedded in a window padded by one light cone (s sites per side), and
projecting onto densities placed at all shifts d with phase e^{-i k d}.

Two equivalent backends:

  padded   -- exact sparse conjugation over the full padded region: the
              state is a list of (Pauli word, coefficient) pairs and every
              axis-angle gate maps a word to at most two words (reference
              implementation, normative);
  in_situ  -- branch decomposition over pad-site Pauli codes, keeping only
              interior-sized dense arrays; boundary gates are applied as
              blocks indexed by (pad codes in, pad codes out) and branches
              whose frozen pad pattern cannot reach any shift channel are
              pruned (production path for large r).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .basis import LocalOperatorBasis
from .models import ModelSpec, apply_superop, region_program
from .pauli import I, PHASE, PROD, gate_superoperator

DENSE_CAP = 16384
PADDED_REGION_CAP_SITES = 31   # packed words must fit an int64


def _strides(n):
    return 4 ** np.arange(n - 1, -1, -1, dtype=np.int64)


class _Region:
    """Padded region geometry: window cells plus light-cone pad sites."""

    def __init__(self, spec: ModelSpec, shape):
        s = spec.spreading
        if spec.dim == 1:
            (r,) = shape
            labels = list(range(r + 2 * s))
            window = [w + s for w in range(r)]
        else:
            n, m = shape
            if s != 1:
                raise ValueError("2D supports s=1 only")
            labels = [(i, j) for i in range(n + 2) for j in range(m + 2)
                      if not ((i in (0, n + 1)) and (j in (0, m + 1)))]
            window = [(i + 1, j + 1) for i in range(n) for j in range(m)]
        self.spec = spec
        self.shape = tuple(shape)
        self.s = s
        self.labels = labels
        self.axis = {lab: a for a, lab in enumerate(labels)}
        self.window_axes = [self.axis[w] for w in window]
        self.pad_axes = [a for a in range(len(labels))
                         if a not in set(self.window_axes)]
        self.program = region_program(spec, labels)

    @property
    def nsites(self):
        return len(self.labels)

    def shifts(self):
        """(d, placement) pairs; placement maps window cell index -> label."""
        if self.spec.dim == 1:
            (r,) = self.shape
            out = []
            for d in range(-self.s, self.s + 1):
                out.append((d, [w + self.s + d for w in range(r)]))
            return out
        n, m = self.shape
        out = []
        # axis shifts only: diagonal placements would need the corner
        # sites, which are outside the padded region
        for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            place = [(i + 1 + di, j + 1 + dj)
                     for i in range(n) for j in range(m)]
            out.append(((di, dj), place))
        return out


def _shift_phase(k, d):
    if np.isscalar(d):
        ph = np.exp(-1j * k * d)
    else:
        ph = np.exp(-1j * (k[0] * d[0] + k[1] * d[1]))
    if abs(ph.imag) < 1e-15:
        return float(ph.real)
    return complex(ph)


@dataclass
class _Channel:
    """Projection data of one shift d: which basis rows read which entry."""

    d: object
    phase: object
    groups: dict        # padkey (int) -> (basis positions, flat indices)
    readable_pads: frozenset   # pad-slot indices that may carry support
    full_flat: np.ndarray = None   # padded mode: region flat index per row
    positions: np.ndarray = None   # rows of the basis that are valid at d


class TruncatedPropagator:
    """Truncated one-step propagator at quasimomentum k.

    mode 'in_situ' (default) or 'padded'; set inverse=True to build from
    the inverse circuit (adjoint-symmetry checks).
    """

    def __init__(self, spec: ModelSpec, basis: LocalOperatorBasis, k=0.0,
                 mode="in_situ", inverse=False):
        if spec.dim != basis.dim:
            raise ValueError("model and basis dimensionality differ")
        if spec.dim == 2:
            kt = (k, k) if np.isscalar(k) else tuple(k)
            if kt != (0.0, 0.0):
                raise ValueError("2D propagator supports k = (0, 0) only")
            k = (0.0, 0.0)
        else:
            k = float(k)
            if not -np.pi - 1e-12 <= k <= np.pi + 1e-12:
                raise ValueError("k outside [-pi, pi]")
        if mode not in ("in_situ", "padded"):
            raise ValueError(f"unknown mode {mode!r}")
        self.spec = spec
        self.basis = basis
        self.k = k
        self.mode = mode
        self.region = _Region(spec, basis.shape)
        if mode == "padded" and self.region.nsites > PADDED_REGION_CAP_SITES:
            raise ValueError("padded region too large; use in_situ mode")
        self.program = self.region.program.inverse() if inverse \
            else self.region.program
        self._build_channels()
        self.is_real = all(np.isrealobj(np.asarray(c.phase))
                           for c in self.channels)
        if mode == "in_situ":
            self._build_boundary_blocks()
        else:
            self._build_sparse_gates()

    # -- projection / embedding tables ------------------------------------

    def _build_channels(self):
        basis, region = self.basis, self.region
        codes = basis.codes
        nwin = codes.shape[1]
        rstr = _strides(region.nsites)
        wstr = _strides(nwin)
        pad_slot = {a: i for i, a in enumerate(region.pad_axes)}
        self.channels = []
        for d, place in region.shifts():
            # target region axis of each window cell; -1 = outside (corner)
            target = np.array([region.axis.get(lab, -1) for lab in place])
            valid = np.ones(basis.size, dtype=bool)
            for c in np.nonzero(target < 0)[0]:
                valid &= codes[:, c] == I
            pos = np.nonzero(valid)[0]
            reg = np.zeros((len(pos), region.nsites), dtype=np.int8)
            for c in range(nwin):
                if target[c] >= 0:
                    reg[:, target[c]] = codes[pos, c]
            full_flat = reg.astype(np.int64) @ rstr
            interior_flat = reg[:, region.window_axes].astype(np.int64) @ wstr
            padkeys = reg[:, region.pad_axes].astype(np.int64) @ \
                _strides(len(region.pad_axes))
            groups = {}
            order = np.argsort(padkeys, kind="stable")
            keys, starts = np.unique(padkeys[order], return_index=True)
            bounds = list(starts) + [len(order)]
            for i, key in enumerate(keys):
                sel = order[bounds[i]:bounds[i + 1]]
                groups[int(key)] = (pos[sel], interior_flat[sel])
            readable = frozenset(pad_slot[a] for a in
                                 (set(target) & set(region.pad_axes)))
            self.channels.append(_Channel(d, _shift_phase(self.k, d), groups,
                                          readable, full_flat, pos))
        # d = 0 channel is full-coverage: reuse its tables for embedding
        zero = 0 if self.spec.dim == 1 else (0, 0)
        c0 = next(c for c in self.channels if c.d == zero)
        assert len(c0.positions) == basis.size
        self._embed_full = c0.full_flat
        self._embed_interior = c0.groups[0][1][np.argsort(c0.groups[0][0])]

    # -- in-situ machinery ------------------------------------------------

    def _build_boundary_blocks(self):
        """Flatten the program; split each gate into pad/interior action."""
        region = self.region
        pad_slot = {a: i for i, a in enumerate(region.pad_axes)}
        win_pos = {a: i for i, a in enumerate(region.window_axes)}
        self._gates = []
        for _, gates in self.program.layers:
            for gate, sites in gates:
                mat = gate_superoperator(gate).matrix
                arity = len(sites)
                pads = [(i, pad_slot[a]) for i, a in enumerate(sites)
                        if a in pad_slot]
                ins = [(i, win_pos[a]) for i, a in enumerate(sites)
                       if a in win_pos]
                if not pads:
                    self._gates.append(("interior", mat,
                                        [p for _, p in ins], None))
                    continue
                mt = mat.reshape((4,) * (2 * arity))
                table = {}
                ni = len(ins)
                for ic in itertools.product(range(4), repeat=len(pads)):
                    entries = []
                    for oc in itertools.product(range(4), repeat=len(pads)):
                        idx = [slice(None)] * (2 * arity)
                        for (gi, _), o, c in zip(pads, oc, ic):
                            idx[gi] = o
                            idx[arity + gi] = c
                        blk = mt[tuple(idx)].reshape(4 ** ni, 4 ** ni)
                        if np.any(blk != 0.0):
                            entries.append((oc, blk))
                    table[ic] = entries
                self._gates.append(("boundary", table,
                                    [p for _, p in ins],
                                    [s for _, s in pads]))
        # pad I-ness is frozen once no remaining multi-site gate touches it
        last_touch = {}
        for gi, (kind, _, in_axes, padslots) in enumerate(self._gates):
            if kind == "boundary" and len(in_axes) + len(padslots) >= 2:
                for p in padslots:
                    last_touch[p] = gi
        npads = len(region.pad_axes)
        self._freeze_after = [set() for _ in range(len(self._gates))]
        for p in range(npads):
            gi = last_touch.get(p, -1)
            if gi >= 0:
                self._freeze_after[gi].add(p)
        self._frozen_start = frozenset(p for p in range(npads)
                                       if p not in last_touch)
        self._readable = [c.readable_pads for c in self.channels]

    def _prune(self, branches, frozen):
        if not frozen:
            return branches
        out = {}
        for key, arr in branches.items():
            hot = frozenset(p for p in frozen if key[p] != I)
            if any(hot <= rd for rd in self._readable):
                out[key] = arr
        return out

    def _apply_in_situ(self, block):
        """block: (N, B) coefficients -> (N, B) after one step."""
        r = len(self.region.window_axes)
        nb = block.shape[1]
        interior = np.zeros((4 ** r, nb), dtype=block.dtype)
        interior[self._embed_interior] = block
        shape = (4,) * r + (nb,)
        key0 = (I,) * len(self.region.pad_axes)
        branches = {key0: interior.reshape(shape)}
        frozen = set(self._frozen_start)
        for gi, (kind, payload, in_axes, padslots) in enumerate(self._gates):
            if kind == "interior":
                branches = {k: apply_superop(a, payload, in_axes, r)
                            for k, a in branches.items()}
            else:
                new = {}
                for key, arr in branches.items():
                    ic = tuple(key[p] for p in padslots)
                    for oc, blk in payload[ic]:
                        nk = list(key)
                        for p, o in zip(padslots, oc):
                            nk[p] = o
                        nk = tuple(nk)
                        if in_axes:
                            contrib = apply_superop(arr, blk, in_axes, r)
                        else:
                            contrib = blk[0, 0] * arr
                        if nk in new:
                            new[nk] = new[nk] + contrib
                        else:
                            new[nk] = contrib
                branches = new
            if self._freeze_after[gi]:
                frozen |= self._freeze_after[gi]
                branches = self._prune(branches, frozen)
        out_dtype = np.result_type(block.dtype,
                                   *(np.asarray(c.phase).dtype
                                     for c in self.channels))
        out = np.zeros((self.basis.size, nb), dtype=out_dtype)
        for ch in self.channels:
            for key, (pos, flat) in ch.groups.items():
                kt = self._int_to_key(key)
                arr = branches.get(kt)
                if arr is not None:
                    out[pos] += ch.phase * arr.reshape(4 ** r, nb)[flat]
        return out

    def _int_to_key(self, key):
        npads = len(self.region.pad_axes)
        return tuple((key >> (2 * (npads - 1 - i))) & 3
                     for i in range(npads))

    # -- padded (sparse word list) machinery ------------------------------

    def _build_sparse_gates(self):
        nreg = self.region.nsites
        self._sgates = []
        for _, gates in self.program.layers:
            for gate, sites in gates:
                c2 = math.cos(2 * gate.angle)
                s2 = math.sin(2 * gate.angle)
                if c2 == 1.0 and s2 == 0.0:
                    continue            # identity superoperator
                shifts = [2 * (nreg - 1 - a) for a in sites]
                prods = [PROD[p].astype(np.int64) for p in gate.word]
                phases = [PHASE[p].astype(np.int64) for p in gate.word]
                self._sgates.append((gate.word, shifts, c2, s2,
                                     prods, phases))

    def _conjugate_sparse(self, words, coeffs):
        """One step of U^dag . U on a sorted (word, coefficient) list."""
        for pword, shifts, c2, s2, prods, phases in self._sgates:
            codes = [(words >> sh) & 3 for sh in shifts]
            anti = np.zeros(len(words), dtype=bool)
            for c, p in zip(codes, pword):
                anti ^= (c != I) & (c != p)
            if not anti.any():
                continue
            f_anti = coeffs[anti]
            coeffs = np.where(anti, c2 * coeffs, coeffs)
            if s2 == 0.0:
                continue
            new_w = words[anti].copy()
            ph = np.zeros(anti.sum(), dtype=np.int64)
            for c, sh, pr, pp in zip(codes, shifts, prods, phases):
                ca = c[anti]
                new_w += (pr[ca] - ca) * (1 << sh)
                ph += pp[ca]
            # G^dag w G picks up sin(2t) * i^(phase+1), always real
            ph = (ph + 1) % 4
            assert not np.any(ph % 2)
            new_f = s2 * np.where(ph == 0, 1.0, -1.0) * f_anti
            words = np.concatenate([words, new_w])
            coeffs = np.concatenate([coeffs, new_f])
            words, inv = np.unique(words, return_inverse=True)
            if np.iscomplexobj(coeffs):
                coeffs = (np.bincount(inv, coeffs.real, len(words))
                          + 1j * np.bincount(inv, coeffs.imag, len(words)))
            else:
                coeffs = np.bincount(inv, coeffs, len(words))
        return words, coeffs

    def _apply_padded(self, block):
        nb = block.shape[1]
        out_dtype = np.result_type(block.dtype,
                                   *(np.asarray(c.phase).dtype
                                     for c in self.channels))
        out = np.zeros((self.basis.size, nb), dtype=out_dtype)
        for b in range(nb):
            v = block[:, b]
            nz = np.nonzero(v)[0]
            if len(nz) == 0:
                continue
            words, coeffs = self._conjugate_sparse(self._embed_full[nz],
                                                   v[nz])
            for ch in self.channels:
                idx = np.searchsorted(words, ch.full_flat)
                idx_c = np.minimum(idx, len(words) - 1)
                hit = words[idx_c] == ch.full_flat
                out[ch.positions[hit], b] += ch.phase * coeffs[idx_c[hit]]
        return out

    # -- public API -------------------------------------------------------

    @property
    def size(self):
        return self.basis.size

    def apply(self, v):
        v = np.asarray(v)
        if v.shape != (self.size,):
            raise ValueError("vector length mismatch")
        if self.is_real and not np.iscomplexobj(v):
            v = v.astype(np.float64, copy=False)
        else:
            v = v.astype(np.complex128, copy=False)
        step = self._apply_in_situ if self.mode == "in_situ" \
            else self._apply_padded
        return step(v[:, None])[:, 0]

    def build_column(self, beta):
        e = np.zeros(self.size)
        e[beta] = 1.0
        return self.apply(e)

    def build_dense(self, cap=DENSE_CAP, block_size=256):
        if self.size > cap:
            raise ValueError(
                f"N={self.size} above dense cap {cap}; use apply() "
                "with an iterative eigensolver")
        step = self._apply_in_situ if self.mode == "in_situ" \
            else self._apply_padded
        # keep each batched work tensor under ~2 GiB
        cells = self.region.nsites if self.mode == "padded" \
            else len(self.region.window_axes)
        block_size = max(1, min(block_size, 2 ** 27 // 4 ** cells))
        dtype = np.float64 if self.is_real else np.complex128
        m = np.empty((self.size, self.size), dtype=dtype, order="F")
        for lo in range(0, self.size, block_size):
            hi = min(lo + block_size, self.size)
            blk = np.zeros((self.size, hi - lo), dtype=np.float64)
            blk[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
            m[:, lo:hi] = step(blk)
        return m

    def as_linear_operator(self):
        dtype = np.float64 if self.is_real else np.complex128
        return spla.LinearOperator((self.size, self.size),
                                   matvec=self.apply, dtype=dtype)


def density_vector(basis: LocalOperatorBasis, codes) -> np.ndarray:
    """Unit coefficient vector of a density string padded to the window."""
    codes = tuple(codes)
    if basis.dim == 1:
        if len(codes) > basis.nsites:
            raise ValueError("support exceeds window")
        codes = codes + (I,) * (basis.nsites - len(codes))
    v = np.zeros(basis.size)
    v[basis.position(codes)] = 1.0
    return v


def truncated_correlator(prop: TruncatedPropagator, a_vec, t_max):
    """C_A(t) = <<A| M^t |A>>, t = 0..t_max, by repeated application."""
    a_vec = np.asarray(a_vec)
    out = np.empty(t_max + 1, dtype=np.complex128)
    v = a_vec
    out[0] = np.vdot(a_vec, v)
    for t in range(1, t_max + 1):
        v = prop.apply(v)
        out[t] = np.vdot(a_vec, v)
    if np.abs(out.imag).max() < 1e-13 * max(1.0, np.abs(out.real).max()):
        return out.real
    return out


def save_dense(path, matrix, spec: ModelSpec, k, basis: LocalOperatorBasis):
    """Dense M(k) with a self-describing header (model echo, k, dims)."""
    header = {"model": spec.to_json(), "k": k if np.isscalar(k) else list(k),
              "shape": list(basis.shape), "N": basis.size}
    np.savez_compressed(path, matrix=matrix, header=json.dumps(header))


def load_dense(path):
    with np.load(path, allow_pickle=False) as f:
        return f["matrix"], json.loads(str(f["header"]))
