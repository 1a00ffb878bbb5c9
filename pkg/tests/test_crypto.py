import itertools

import pytest

from pavmc.crypto import (
    Ciphertext,
    CryptoError,
    GroupParams,
    absorb_index,
    candidate_list,
    decr,
    dlog,
    encr,
    lagrange_exponent,
    partial_decrypt_step,
    reencrypt,
    shamir_shares,
    zpow,
)

G = GroupParams()
UNITS = range(1, 7)
EXPONENTS = range(6)


def brute_log(e, alpha=3, p=7):
    return next(x for x in range(p - 1) if pow(alpha, x, p) == e)


def test_group_defaults():
    assert (G.p, G.alpha, G.beta, G.ord) == (7, 3, 6, 6)
    assert G.k == brute_log(6) == 3


@pytest.mark.parametrize("a,b,expected", [(3, 0, 1), (3, 3, 6), (3, -3, 6)])
def test_zpow(a, b, expected):
    assert zpow(a, b) == expected


def test_zpow_rejects_zero():
    with pytest.raises(CryptoError):
        zpow(7, 2)


def test_encr_examples():
    assert encr(5, 0) == (1, 5)
    assert encr(1, 1) == (3, 6)
    assert encr(2, 2) == (2, 2)


def test_decr_examples():
    assert decr(encr(1, 1), 3) == 1
    assert decr(Ciphertext(1, 4), 3) == 4
    assert decr(encr(4, 5), 3) == 4


def test_reencrypt_examples():
    c = encr(4, 2)
    assert reencrypt(c, 0) == c
    assert reencrypt(encr(1, 1), 1) == encr(1, 2) == (2, 1)
    assert decr(reencrypt(encr(2, 2), 5), 3) == 2


def test_absorb_examples():
    c = encr(4, 2)
    assert absorb_index(c, 0) == c
    assert absorb_index(encr(1, 1), 2) == (3, 5)
    assert decr(absorb_index(encr(zpow(3, 1), 0), 2), 3) == zpow(3, 3) == 6


@pytest.mark.parametrize("e", UNITS)
def test_dlog_matches_brute_force(e):
    assert dlog(e) == brute_log(e)


def test_dlog_rejects_non_power():
    g = GroupParams(p=7, alpha=2, beta=4)  # <2> = {1, 2, 4}
    with pytest.raises(CryptoError):
        g.dlog(3)


def test_candidate_lists():
    assert candidate_list(0, 3) == (0, 1, 2)
    assert candidate_list(1, 3) == (1, 2, 0)
    cl = candidate_list(2, 3)
    r = cl.index(0)
    assert r == 1 and (2 + r) % 3 == 0


@pytest.mark.parametrize("s", range(6))
@pytest.mark.parametrize("chosen", range(3))
def test_shift_consistency(s, chosen):
    cl = candidate_list(s, 3)
    assert (s + cl.index(chosen)) % 3 == chosen


def test_shamir_shares():
    assert shamir_shares(3, 1, 3).shares == ((1, 4), (2, 5), (3, 6))
    with pytest.raises(CryptoError):
        shamir_shares(3, 2, 3)  # subset {1,3}: 3/2 * 5
    # constant polynomial: every share is k; integral only for n = 2
    assert shamir_shares(3, 0, 2).shares == ((1, 3), (2, 3))
    with pytest.raises(CryptoError):
        shamir_shares(3, 0, 3)  # subset {1,3}: 3/2 * 3


def test_lagrange_exponents():
    ks = shamir_shares(3, 1, 3)
    assert lagrange_exponent(ks, {1, 2}, 1) == 8
    assert lagrange_exponent(ks, {1, 2}, 2) == -5
    assert lagrange_exponent(ks, {1, 3}, 1) == 6
    assert lagrange_exponent(ks, {1, 3}, 3) == -3
    for subset in itertools.combinations((1, 2, 3), 2):
        assert sum(lagrange_exponent(ks, subset, x) for x in subset) == 3


def test_partial_decrypt_steps():
    c = Ciphertext(3, 6)
    assert partial_decrypt_step(c, 0) == c
    mid = partial_decrypt_step(c, 8)
    assert mid == (3, 3)
    assert partial_decrypt_step(mid, -5) == (3, 1)
    assert partial_decrypt_step(partial_decrypt_step(c, -5), 8) == (3, 1)
