"""Desk-scale exponential ElGamal over Z*_p, with threshold key shares.

Everything is exact integer arithmetic over tiny parameters (p=7 by default);
it mirrors what the model's procedures compute, not real cryptography.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple


class CryptoError(ValueError):
    pass


class Ciphertext(NamedTuple):
    y1: int
    y2: int


class Ballot(NamedTuple):
    onion: Ciphertext
    cl: tuple[int, ...]


class Receipt(NamedTuple):
    onion: Ciphertext
    r: int


@dataclass(frozen=True)
class GroupParams:
    p: int = 7
    alpha: int = 3
    beta: int = 6

    def __post_init__(self):
        if self.p < 3:
            raise CryptoError("modulus too small")
        if self.alpha % self.p == 0 or self.beta % self.p == 0:
            raise CryptoError("alpha and beta must be units mod p")
        if self.beta % self.p not in self.dlog_table:
            raise CryptoError(f"beta={self.beta} is not a power of alpha={self.alpha}")

    @cached_property
    def ord(self) -> int:
        x, n = self.alpha % self.p, 1
        while x != 1:
            x = x * self.alpha % self.p
            n += 1
        return n

    @cached_property
    def dlog_table(self) -> dict[int, int]:
        return {pow(self.alpha, j, self.p): j for j in range(self.ord)}

    @property
    def k(self) -> int:
        """Private exponent, recovered as log_alpha(beta)."""
        return self.dlog_table[self.beta % self.p]

    # ---- group arithmetic

    def zpow(self, a: int, b: int) -> int:
        a %= self.p
        if a == 0:
            raise CryptoError("zpow of a non-unit")
        # negative exponents go through the modular inverse; for a in <alpha>
        # this equals a^(b mod ord)
        return pow(a, b, self.p)

    def dlog(self, e: int) -> int:
        try:
            return self.dlog_table[e % self.p]
        except KeyError:
            raise CryptoError(f"{e} is not a power of {self.alpha} mod {self.p}") from None

    def encr(self, m: int, r: int) -> Ciphertext:
        if m % self.p == 0:
            raise CryptoError("plaintext must be a unit")
        return Ciphertext(self.zpow(self.alpha, r), m * self.zpow(self.beta, r) % self.p)

    def decr(self, c: Ciphertext, k: int) -> int:
        return c.y2 * self.zpow(c.y1, -k) % self.p

    def reencrypt(self, c: Ciphertext, r: int) -> Ciphertext:
        return Ciphertext(
            c.y1 * self.zpow(self.alpha, r) % self.p,
            c.y2 * self.zpow(self.beta, r) % self.p,
        )

    def absorb_index(self, c: Ciphertext, i: int) -> Ciphertext:
        return Ciphertext(c.y1, c.y2 * self.zpow(self.alpha, i) % self.p)

    def power(self, c: Ciphertext, delta: int) -> Ciphertext:
        """Componentwise power: an encryption of m^delta."""
        return Ciphertext(self.zpow(c.y1, delta), self.zpow(c.y2, delta))

    def partial_decrypt_step(self, c: Ciphertext, contribution: int) -> Ciphertext:
        return Ciphertext(c.y1, c.y2 * self.zpow(c.y1, -contribution) % self.p)

    def is_valid(self, c: Ciphertext) -> bool:
        return 1 <= c.y1 < self.p and 1 <= c.y2 < self.p


DEFAULT_GROUP = GroupParams()


def zpow(a: int, b: int, group: GroupParams = DEFAULT_GROUP) -> int:
    return group.zpow(a, b)


def encr(m: int, r: int, group: GroupParams = DEFAULT_GROUP) -> Ciphertext:
    return group.encr(m, r)


def decr(c: Ciphertext, k: int, group: GroupParams = DEFAULT_GROUP) -> int:
    return group.decr(Ciphertext(*c), k)


def reencrypt(c: Ciphertext, r: int, group: GroupParams = DEFAULT_GROUP) -> Ciphertext:
    return group.reencrypt(Ciphertext(*c), r)


def absorb_index(c: Ciphertext, i: int, group: GroupParams = DEFAULT_GROUP) -> Ciphertext:
    return group.absorb_index(Ciphertext(*c), i)


def dlog(e: int, group: GroupParams = DEFAULT_GROUP) -> int:
    return group.dlog(e)


def partial_decrypt_step(c: Ciphertext, contribution: int, group: GroupParams = DEFAULT_GROUP) -> Ciphertext:
    return group.partial_decrypt_step(Ciphertext(*c), contribution)


def candidate_list(seed: int, c_total: int) -> tuple[int, ...]:
    """Cyclic shift with ``cl[r] = (r + seed) mod c_total``."""
    if seed < 0:
        raise CryptoError("seed must be non-negative")
    return tuple((r + seed) % c_total for r in range(c_total))


def c_index(cl: tuple[int, ...], target: int) -> int:
    return cl.index(target)


# ---------------------------------------------------------------- Shamir


@dataclass(frozen=True)
class KeyShares:
    k: int
    coeffs: tuple[int, ...]  # a1, a2, ... (degree = len(coeffs))
    shares: tuple[tuple[int, int], ...] = field(default=())

    @property
    def a1(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    @property
    def threshold(self) -> int:
        return len(self.coeffs) + 1

    def y(self, x: int) -> int:
        for sx, sy in self.shares:
            if sx == x:
                return sy
        raise KeyError(x)


def _lagrange_basis(subset: tuple[int, ...], member: int) -> Fraction:
    lam = Fraction(1)
    for j in subset:
        if j != member:
            lam *= Fraction(j, j - member)
    return lam


def shamir_shares(k: int, a1: int = 1, n: int = 3, degree: int = 1) -> KeyShares:
    """Points (x, k + a1·x + a1·x² + …) for x = 1..n on a degree-``degree``
    polynomial; rejects coefficients whose Lagrange products are not integral
    for some (degree+1)-subset."""
    coeffs = (a1,) * degree
    shares = tuple((x, k + sum(a * x ** (i + 1) for i, a in enumerate(coeffs))) for x in range(1, n + 1))
    ks = KeyShares(k, coeffs, shares)
    for subset in itertools.combinations(range(1, n + 1), degree + 1):
        for x in subset:
            prod = _lagrange_basis(subset, x) * ks.y(x)
            if prod.denominator != 1:
                raise CryptoError(
                    f"coefficient a1={a1}: subset {subset} gives non-integral product {prod}"
                )
    return ks


def lagrange_exponent(shares: KeyShares, subset, member: int) -> int:
    subset = tuple(sorted(subset))
    if member not in subset:
        raise CryptoError(f"{member} not in subset {subset}")
    if len(set(subset)) != len(subset):
        raise CryptoError("subset values must be distinct")
    prod = _lagrange_basis(subset, member) * shares.y(member)
    if prod.denominator != 1:
        raise ArithmeticError(f"non-integral Lagrange product {prod}")
    return int(prod)
