"""Exact arithmetic over prime fields F_p and binary fields GF(2^r).

Elements are plain Python ints.  A binary-field element is the bitmask of
a polynomial over GF(2) of degree < r; a modulus is the bitmask of a
degree-r polynomial (bit r set).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

WORD_BITS = 64

# Above this degree the irreducibility check switches from trial division
# to Ben-Or's gcd test (same answer, polynomial time).
TRIAL_DIVISION_MAX_DEGREE = 20


def is_prime(n: int) -> bool:
    """Deterministic trial division."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    if n % 3 == 0:
        return n == 3
    f = 5
    while f * f <= n:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


def find_prime_in(lo: int, hi: int) -> int | None:
    """Smallest prime in ``[lo, hi]``, or ``None`` if the interval has none."""
    if lo < 2 or lo > hi:
        raise ValueError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    for q in range(lo, hi + 1):
        if is_prime(q):
            return q
    return None


def next_prime(lo: int) -> int:
    q = max(lo, 2)
    while not is_prime(q):
        q += 1
    return q


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p >= 1 << (WORD_BITS // 2):
            # products of two elements must stay inside a 64-bit word
            raise ValueError(f"modulus {self.p} too large for word arithmetic")

    def check(self, a: int) -> int:
        if not 0 <= a < self.p:
            raise ValueError(f"{a} is not an element of F_{self.p}")
        return a

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)


def poly_eval_fp(coeffs, x: int, field: PrimeField) -> int:
    """Evaluate ``sum(coeffs[j] * x**j) mod p`` by Horner's rule.

    ``coeffs`` is little-endian: ``coeffs[0]`` is the constant term.
    """
    if len(coeffs) == 0:
        raise ValueError("empty coefficient list")
    p = field.p
    field.check(x)
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + field.check(c)) % p
    return acc


# --- GF(2)[x] helpers -----------------------------------------------------

def clmul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, m: int) -> int:
    """Remainder of ``a`` divided by ``m`` in GF(2)[x]."""
    dm = m.bit_length() - 1
    if dm < 0:
        raise ZeroDivisionError("zero modulus")
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _mulmod(a: int, b: int, m: int) -> int:
    return poly_mod(clmul(a, b), m)


def is_irreducible_trial(poly: int) -> bool:
    """Irreducibility over GF(2) by dividing by every polynomial of degree
    1..deg/2 (a reducible polynomial has a factor of at most half its
    degree)."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for q in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, q) == 0:
                return False
    return True


def is_irreducible_ben_or(poly: int) -> bool:
    """Ben-Or test: f of degree r is irreducible iff
    gcd(x^(2^i) - x, f) = 1 for all i <= r/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    x = 0b10
    t = x
    for _ in range(deg // 2):
        t = _mulmod(t, t, poly)
        if poly_gcd(poly, t ^ x) != 1:
            return False
    return True


def is_irreducible(poly: int) -> bool:
    if poly.bit_length() - 1 <= TRIAL_DIVISION_MAX_DEGREE:
        return is_irreducible_trial(poly)
    return is_irreducible_ben_or(poly)


@lru_cache(maxsize=None)
def find_irreducible(r: int) -> int:
    """Numerically smallest irreducible polynomial of degree ``r``."""
    if not 1 <= r <= WORD_BITS:
        raise ValueError(f"degree {r} outside [1, {WORD_BITS}]")
    for poly in range(1 << r, 1 << (r + 1)):
        if is_irreducible(poly):
            return poly
    raise AssertionError(f"no irreducible polynomial of degree {r}")  # pragma: no cover


@dataclass(frozen=True)
class BinaryField:
    r: int
    modulus: int

    def __post_init__(self):
        if self.modulus.bit_length() - 1 != self.r:
            raise ValueError(f"modulus {self.modulus:#x} does not have degree {self.r}")
        if not is_irreducible(self.modulus):
            raise ValueError(f"modulus {self.modulus:#x} is reducible")

    @classmethod
    def of_degree(cls, r: int) -> "BinaryField":
        return cls(r, find_irreducible(r))

    @property
    def order(self) -> int:
        return 1 << self.r

    def check(self, a: int) -> int:
        if not 0 <= a < (1 << self.r):
            raise ValueError(f"{a} is not an element of GF(2^{self.r})")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return gf2_mul(a, b, self)

    def pow(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, (1 << self.r) - 2)


def gf2_mul(a: int, b: int, field: BinaryField) -> int:
    """Product in GF(2^r): carry-less multiply, then reduce by the modulus."""
    field.check(a)
    field.check(b)
    r, m = field.r, field.modulus
    acc = 0
    # interleaved shift-and-reduce keeps acc below 2^r
    for i in range(b.bit_length() - 1, -1, -1):
        acc <<= 1
        if acc >> r:
            acc ^= m
        if (b >> i) & 1:
            acc ^= a
    return acc


def ceil_log2(n: int) -> int:
    """Smallest e with 2**e >= n (0 for n <= 1)."""
    return max(0, (n - 1).bit_length())


def int_log_ceil(n: int, base: int) -> int:
    """Smallest d >= 1 with base**d >= n, computed exactly."""
    d, acc = 1, base
    while acc < n:
        acc *= base
        d += 1
    return d


def log_base(n: float, base: float) -> float:
    return math.log(n) / math.log(base)
