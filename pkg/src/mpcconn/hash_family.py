"""Enumerable k-wise independent hash families h: [N] -> {0,1}^l.

A member is a polynomial of degree k-1 over GF(2^r), r = max(ceil(log2 N), l),
evaluated at the field encoding of x and truncated to its low l bits.  For
distinct points the k field values are uniform and independent over the
family, and truncation keeps that exact.

Seeds are integers in [0, 2^(k*r)).  Coefficients are stored highest degree
first (Horner order); in the seed integer the leading coefficient occupies the
lowest r bits, so the constant term is the most significant chunk.  With that
order the first 2^r seeds already sweep distinct slopes instead of a block of
constant functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .finite_field import WORD_BITS, BinaryField, ceil_log2, gf2_mul


@dataclass(frozen=True)
class HashFamilySpec:
    N: int
    ell: int
    k: int
    field: BinaryField

    @property
    def r(self) -> int:
        return self.field.r

    @property
    def size(self) -> int:
        return 1 << (self.k * self.r)

    @property
    def seed_bits(self) -> int:
        return self.k * self.r


@dataclass(frozen=True)
class HashSeed:
    coeffs: tuple[int, ...]
    index: int


def make_family(N: int, ell: int, k: int) -> HashFamilySpec:
    if N < 1:
        raise ValueError("domain size must be >= 1")
    if k < 1:
        raise ValueError("independence order must be >= 1")
    if not 1 <= ell < WORD_BITS:
        raise ValueError(f"output bits {ell} outside [1, {WORD_BITS - 1}]")
    r = max(ceil_log2(N), ell)
    if r >= WORD_BITS:
        raise ValueError(f"domain size {N} exceeds the word size")
    return HashFamilySpec(N=N, ell=ell, k=k, field=BinaryField.of_degree(r))


def seed_at(spec: HashFamilySpec, index: int) -> HashSeed:
    if not 0 <= index < spec.size:
        raise IndexError(f"seed index {index} outside family of size {spec.size}")
    mask = (1 << spec.r) - 1
    coeffs = tuple((index >> (spec.r * j)) & mask for j in range(spec.k))
    return HashSeed(coeffs=coeffs, index=index)


def enumerate_seeds(spec: HashFamilySpec, start: int = 0, stop: int | None = None) -> Iterator[HashSeed]:
    """Yield every seed once, in increasing index order."""
    stop = spec.size if stop is None else min(stop, spec.size)
    for index in range(start, stop):
        yield seed_at(spec, index)


def eval(spec: HashFamilySpec, seed: HashSeed, x: int) -> int:  # noqa: A001 - public name
    if not 0 <= x < spec.N:
        raise ValueError(f"{x} outside domain [0, {spec.N})")
    acc = 0
    for c in seed.coeffs:
        acc = gf2_mul(acc, x, spec.field) ^ c
    return acc & ((1 << spec.ell) - 1)


# --- vectorised evaluation -------------------------------------------------

def _gf2_mul_arrays(a: np.ndarray, b: np.ndarray, r: int, modulus: int) -> np.ndarray:
    """Broadcast GF(2^r) product of two uint64 arrays."""
    a, b = np.broadcast_arrays(a.astype(np.uint64), b.astype(np.uint64))
    acc = np.zeros(a.shape, dtype=np.uint64)
    one = np.uint64(1)
    m = np.uint64(modulus)
    shift_r = np.uint64(r)
    for i in range(r - 1, -1, -1):
        acc <<= one
        acc ^= ((acc >> shift_r) & one) * m
        acc ^= ((b >> np.uint64(i)) & one) * a
    return acc


def seed_coefficients(spec: HashFamilySpec, indices) -> np.ndarray:
    """Coefficient matrix, shape (len(indices), k), highest degree first."""
    idx = np.asarray(indices, dtype=np.uint64)
    mask = np.uint64((1 << spec.r) - 1)
    return np.stack([(idx >> np.uint64(spec.r * j)) & mask for j in range(spec.k)], axis=-1)


def eval_array(spec: HashFamilySpec, seed: HashSeed, xs) -> np.ndarray:
    """``eval`` for every point of ``xs`` under one seed."""
    return eval_table(spec, [seed.index], xs)[0]


def eval_table(spec: HashFamilySpec, indices, xs) -> np.ndarray:
    """Hash values for every (seed index, point); shape (len(indices), len(xs))."""
    xs = np.asarray(xs, dtype=np.uint64)
    if xs.size and int(xs.max()) >= spec.N:
        raise ValueError("point outside the hash domain")
    coeffs = seed_coefficients(spec, indices)
    acc = np.zeros((coeffs.shape[0], xs.shape[0]), dtype=np.uint64)
    for j in range(spec.k):
        if j:
            acc = _gf2_mul_arrays(acc, xs[None, :], spec.r, spec.field.modulus)
        acc ^= coeffs[:, j][:, None]
    return (acc & np.uint64((1 << spec.ell) - 1)).astype(np.int64)


def iter_tables(spec: HashFamilySpec, xs, batch: int = 64, start: int = 0,
                stop: int | None = None) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Walk seeds in enumeration order, ``batch`` at a time, yielding
    ``(indices, eval_table(spec, indices, xs))``."""
    stop = spec.size if stop is None else min(stop, spec.size)
    for lo in range(start, stop, batch):
        idx = np.arange(lo, min(lo + batch, stop), dtype=np.uint64)
        yield idx.astype(np.int64), eval_table(spec, idx, xs)


# --- scattered inputs --------------------------------------------------------

# fractional bits of the golden ratio; any odd multiplier and nonzero field
# element would do
_SCATTER = 0x9E3779B97F4A7C15


def scatter_element(spec: HashFamilySpec) -> int:
    g = _SCATTER & ((1 << spec.r) - 1)
    return g if g else 1


def scattered_family(N: int, ell: int, k: int) -> HashFamilySpec:
    """Family over the whole field GF(2^r), r as for ``make_family(N, ...)``,
    meant to be fed ``scatter`` output."""
    base = make_family(N, ell, k)
    return make_family(1 << base.r, ell, k)


def scatter(spec: HashFamilySpec, xs) -> np.ndarray:
    """A fixed bijection of [2^r]: odd integer multiply, xor-shift, then a
    field multiply by a fixed nonzero element.

    Any bijection keeps the family exactly k-wise independent.  It matters for
    early exit: the first seeds in enumeration order are small slopes, whose
    low output bits are linear in the low bits of small points, so on
    structured labels (arithmetic progressions, say) the first few hundred
    seeds can all behave alike.  Mixing integer and carry-less arithmetic
    breaks that structure.
    """
    r = spec.r
    mask = np.uint64((1 << r) - 1)
    xs = np.asarray(xs, dtype=np.uint64)
    if xs.size and int(xs.max()) > int(mask):
        raise ValueError("point outside the field")
    odd = np.uint64((_SCATTER & int(mask)) | 1)
    y = (xs * odd) & mask
    y ^= y >> np.uint64((r + 1) // 2)
    g = np.uint64(scatter_element(spec))
    return _gf2_mul_arrays(y, g, r, spec.field.modulus).astype(np.int64)
