import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from pavmc.crypto import Ballot, Ciphertext, GroupParams, Receipt, candidate_list, encr, reencrypt
from pavmc.model import AuditTables, Board, ConfigError, ModelConfig, build_network
from pavmc.model.board import (
    SENTINEL,
    TallyError,
    c_index,
    check_mix,
    corrupted_do_mixing,
    do_mixing,
    do_rev,
    generate_ballots,
    tally,
    verify_receipt,
    victim_slot,
)

G = GroupParams()


def test_instance_counts():
    assert len(build_network(ModelConfig()).instances) == 12
    cfg = ModelConfig(v_total=1, mt_total=1, dt_total=2, dt_min=2)
    assert len(build_network(cfg).instances) == 7


def test_corrupt_flag_per_teller():
    net = build_network(ModelConfig(corrupt_mtellers=(0,)))
    flags = [inst.params["corrupt"] for inst in net.instances if inst.template.name == "MixTeller"]
    assert flags == [1, 0, 0]


@pytest.mark.parametrize(
    "kw",
    [
        {"v_total": 0},
        {"c_total": 0},
        {"mt_total": 0},
        {"dt_min": 4},
        {"corrupt_mtellers": (3,)},
        {"delta_values": (1,)},
        {"rand_values": (6,)},
        {"a1": 2},
        {"v_total": 5, "c_total": 3},
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        ModelConfig(**kw)


def test_generate_ballots():
    ballots = generate_ballots(G, [0, 0, 0], 3)
    assert [b.onion for b in ballots] == [(1, 1), (1, 3), (1, 2)]
    assert generate_ballots(G, [1], 3)[0] == Ballot((3, 6), (0, 1, 2))
    assert generate_ballots(G, [1, 2], 3)[1] == Ballot((2, 3), (1, 2, 0))


def test_c_index():
    b = lambda s: Ballot(encr(1, 0), candidate_list(s, 3))
    assert c_index(b(0), 2) == 2
    assert c_index(b(1), 0) == 2
    assert c_index(b(2), 0) == 1


def test_verify_receipt():
    onion = encr(3, 2)
    board = Board.empty(2, 4).with_cell(1, 0, G.absorb_index(onion, 1))
    assert verify_receipt(G, board, Receipt(onion, 1))
    assert not verify_receipt(G, board, Receipt(onion, 2))
    assert not verify_receipt(G, Board.empty(2, 4), Receipt(onion, 1))


def test_do_mixing_examples():
    col = [encr(3, 1), encr(2, 4)]
    board = Board.empty(2, 3).with_column(0, col)
    same = do_mixing(G, board, 0, 1, [0, 0], (0, 1))
    assert same.column(1) == col
    out = do_mixing(G, board, 0, 1, [1, 0], (1, 0)).column(1)
    assert out[1] == reencrypt(col[0], 1) and out[0] == col[1]
    with pytest.raises(ValueError):
        do_mixing(G, board, 0, 2, [0, 0], (0, 1))


def test_mixing_preserves_plaintexts():
    rng = random.Random(5)
    for _ in range(50):
        col = [encr(rng.randrange(1, 7), rng.randrange(6)) for _ in range(3)]
        perm = tuple(rng.sample(range(3), 3))
        rands = [rng.randrange(6) for _ in range(3)]
        out = do_mixing(G, Board.empty(3, 2).with_column(0, col), 0, 1, rands, perm).column(1)
        assert Counter(G.decr(c, 3) for c in out) == Counter(G.decr(c, 3) for c in col)


def test_corrupted_mixing():
    col = [encr(3, 1), encr(2, 4), encr(6, 2)]
    board = Board.empty(3, 2).with_column(0, col)
    with pytest.raises(ValueError):
        corrupted_do_mixing(G, board, 0, 1, [0] * 3, (0, 1, 2), delta=1)
    out = corrupted_do_mixing(G, board, 0, 1, [1, 2, 3], (1, 2, 0), delta=2).column(1)
    victim = victim_slot((1, 2, 0))
    assert victim == 2
    assert G.decr(out[victim], 3) == 3 ** 2 % 7
    # the batch now holds both m and m^delta
    plain = [G.decr(c, 3) for c in out]
    assert 3 in plain and 2 in plain


def test_victim_slot_single_term():
    assert victim_slot((0,)) == 0


def test_do_rev_sides():
    p_odd, p_even = (1, 2, 0), (2, 0, 1)
    r_odd, r_even = [1, 2, 3], [4, 5, 0]
    rev_p, rev_r = do_rev(p_odd, p_even, r_odd, r_even, 0b111, 0)
    assert rev_p == [2, 0, 1] and rev_r == [3, 1, 2]
    rev_p, rev_r = do_rev(p_odd, p_even, r_odd, r_even, 0b111, 0b111)
    assert rev_p == list(p_even) and rev_r == r_even
    rev_p, rev_r = do_rev(p_odd, p_even, r_odd, r_even, 0b111, 0b010)
    assert rev_p == [2, 0, 1] and rev_r == [3, 5, 2]


def mixed_board(v, corrupt, perm_odd, perm_even, r_odd, r_even, delta=2):
    col = [encr(G.zpow(3, i), i + 1) for i in range(v)]
    board = Board.empty(v, 3).with_column(0, col)
    if corrupt:
        board = corrupted_do_mixing(G, board, 0, 1, r_odd, perm_odd, delta)
    else:
        board = do_mixing(G, board, 0, 1, r_odd, perm_odd)
    return do_mixing(G, board, 1, 2, r_even, perm_even)


def audit_all(v, corrupt, perm_odd, perm_even, r_odd, r_even):
    tables = AuditTables.default(v, 3)
    board = mixed_board(v, corrupt, perm_odd, perm_even, r_odd, r_even)
    results = []
    for ch in tables.audit_ch:
        for lr in tables.audit_lr:
            rev = do_rev(perm_odd, perm_even, r_odd, r_even, ch, lr)
            results.append(check_mix(G, board, 0, ch, lr, *rev))
    return results


def test_honest_audit_always_passes_v2():
    for po, pe in itertools.product(itertools.permutations(range(2)), repeat=2):
        for ro, re_ in itertools.product(itertools.product(range(6), repeat=2), repeat=2):
            assert all(audit_all(2, False, po, pe, list(ro), list(re_)))


@pytest.mark.parametrize("v", [2, 3])
def test_attack_detected_half_the_time(v):
    for po in itertools.permutations(range(v)):
        results = audit_all(v, True, po, tuple(range(v)), [1] * v, [2] * v)
        assert Fraction(results.count(False), len(results)) == Fraction(1, 2)


def test_victim_right_side_escapes():
    po, pe = (1, 0), (0, 1)
    board = mixed_board(2, True, po, pe, [1, 1], [0, 0])
    victim = victim_slot(po)
    ok = lambda lr: check_mix(G, board, 0, 0b11, lr, *do_rev(po, pe, [1, 1], [0, 0], 0b11, lr))
    assert ok(1 << victim)
    assert not ok(0)


def test_tally_examples():
    assert tally(G, [(1, 3 ** 0)] * 3, 3) == [3, 0, 0]
    assert tally(G, [(1, 1), (1, 3), (1, 2)], 3) == [1, 1, 1]
    assert tally(G, [(1, 3 ** 2 % 7)], 3) == [0, 0, 1]
    with pytest.raises(TallyError):
        tally(G, [SENTINEL], 3)


def run_to_results(net, rng):
    s = net.initial_state()
    sys_i = net.instance_id("Sys", None)
    while net.location_name(s, sys_i) != "results":
        succ = net.successors(s)
        assert succ, net.describe(s)
        s = rng.choice(succ)[1]
    return s


def test_end_to_end_random_runs():
    net = build_network(ModelConfig())
    sys_i = net.instance_id("Sys", None)
    rng = random.Random(11)
    for _ in range(10):
        s = run_to_results(net, rng)
        chosen = Counter(net.value(s, "chosen", i) for i in range(3))
        assert list(net.value(s, "vote_sum", sys_i)) == [chosen[c] for c in range(3)]
        assert net.value(s, "decryptions") == 2


def test_honest_verification_passes():
    net = build_network(ModelConfig(v_total=2))
    rng = random.Random(3)
    for _ in range(10):
        s = run_to_results(net, rng)
        for _ in range(40):
            succ = net.successors(s)
            if not succ:
                break
            s = rng.choice(succ)[1]
            for i in range(2):
                assert net.location_name(s, i) != "failed"
