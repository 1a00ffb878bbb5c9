"""Bulletin-board operations: ballots, receipts, mixing, audit and tally.

These are the pure versions of the procedures the model's edges call; the
network procedures in :mod:`pavmc.model.pretavoter` delegate to them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from ..crypto import Ballot, Ciphertext, GroupParams, Receipt, candidate_list

SENTINEL = Ciphertext(0, 0)


class TallyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Board:
    """``grid[row][col]``: v_total rows, 1 + 2·mt_total + dt_min columns."""

    grid: tuple[tuple[Ciphertext, ...], ...]

    @classmethod
    def empty(cls, v_total: int, n_cols: int) -> "Board":
        return cls(tuple((SENTINEL,) * n_cols for _ in range(v_total)))

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def column(self, c: int) -> list[Ciphertext]:
        return [row[c] for row in self.grid]

    def with_column(self, c: int, values: Sequence[Ciphertext]) -> "Board":
        return Board(
            tuple(row[:c] + (Ciphertext(*values[t]),) + row[c + 1 :] for t, row in enumerate(self.grid))
        )

    def with_cell(self, t: int, c: int, value: Ciphertext) -> "Board":
        col = self.column(c)
        col[t] = Ciphertext(*value)
        return self.with_column(c, col)


@dataclass(frozen=True)
class AuditTables:
    """Audit encodings: subset and side masks over odd-mix output terms.

    A set bit in an ``audit_ch`` mask marks an audited term; in an
    ``audit_lr`` mask a set bit reveals the right (even-mix) link, a clear
    bit the left (odd-mix) link.
    """

    P_b: tuple[tuple[int, ...], ...]
    S_c: tuple[tuple[int, ...], ...]
    audit_ch: tuple[int, ...]
    audit_lr: tuple[int, ...]

    @classmethod
    def default(cls, v_total: int, c_total: int) -> "AuditTables":
        return cls(
            P_b=tuple(itertools.permutations(range(v_total))),
            S_c=tuple(candidate_list(s, c_total) for s in range(c_total)),
            audit_ch=((1 << v_total) - 1,),
            audit_lr=tuple(range(1 << v_total)),
        )


def generate_ballots(group: GroupParams, rands: Sequence[int], c_total: int) -> list[Ballot]:
    """Ballot i encrypts alpha^i (the voter id is the seed)."""
    return [
        Ballot(group.encr(group.zpow(group.alpha, i), r), candidate_list(i, c_total))
        for i, r in enumerate(rands)
    ]


def c_index(ballot: Ballot, target: int) -> int:
    return ballot.cl.index(target)


def verify_receipt(group: GroupParams, board: Board, receipt: Receipt) -> bool:
    if not group.is_valid(receipt.onion):
        return False
    absorbed = group.absorb_index(receipt.onion, receipt.r)
    return absorbed in board.column(0)


def mix_column(group: GroupParams, col: Sequence[Ciphertext], rands, perm) -> list[Ciphertext]:
    out = [SENTINEL] * len(col)
    for t, c in enumerate(col):
        out[perm[t]] = group.reencrypt(Ciphertext(*c), rands[t])
    return out


def victim_slot(perm: Sequence[int], target: int = 0) -> int:
    """Last output index other than the target's image; with one term the
    image itself is the only slot available."""
    for j in reversed(range(len(perm))):
        if j != perm[target]:
            return j
    return perm[target]


def do_mixing(group: GroupParams, board: Board, in_col: int, out_col: int, rands, perm) -> Board:
    if in_col != out_col - 1:
        raise ValueError("mixes read the column immediately to the left")
    return board.with_column(out_col, mix_column(group, board.column(in_col), rands, perm))


def corrupted_do_mixing(
    group: GroupParams, board: Board, in_col: int, out_col: int, rands, perm, delta: int,
    target: int = 0, victim: int | None = None,
) -> Board:
    if delta % group.ord == 1:
        raise ValueError("delta = 1 leaves the ciphertext's plaintext unchanged")
    if victim is None:
        victim = victim_slot(perm, target)
    col = mix_column(group, board.column(in_col), rands, perm)
    col[victim] = group.power(board.grid[target][in_col], delta)
    return board.with_column(out_col, col)


def do_rev(perm_odd, perm_even, rands_odd, rands_even, ch_mask: int, lr_mask: int):
    """Links and factors revealed for the audited odd-mix output terms.

    Returns ``(rev_p, rev_r)`` indexed by odd-mix output term; unaudited
    entries are 0.
    """
    n = len(perm_odd)
    rev_p, rev_r = [0] * n, [0] * n
    for t in range(n):
        if not ch_mask >> t & 1:
            continue
        if lr_mask >> t & 1:
            rev_p[t] = perm_even[t]
            rev_r[t] = rands_even[t]
        else:
            src = perm_odd.index(t)
            rev_p[t] = src
            rev_r[t] = rands_odd[src]
    return rev_p, rev_r


def check_mix(group: GroupParams, board: Board, mix: int, ch_mask: int, lr_mask: int, rev_p, rev_r) -> bool:
    """Mix teller ``mix`` owns columns 2·mix+1 (odd) and 2·mix+2 (even)."""
    src_col, mid_col, out_col = 2 * mix, 2 * mix + 1, 2 * mix + 2
    return check_links(
        group, board.column(src_col), board.column(mid_col), board.column(out_col),
        ch_mask, lr_mask, rev_p, rev_r,
    )


def check_links(group, src, mid, out, ch_mask, lr_mask, rev_p, rev_r) -> bool:
    for t in range(len(mid)):
        if not ch_mask >> t & 1:
            continue
        if lr_mask >> t & 1:
            if group.reencrypt(Ciphertext(*mid[t]), rev_r[t]) != tuple(out[rev_p[t]]):
                return False
        elif group.reencrypt(Ciphertext(*src[rev_p[t]]), rev_r[t]) != tuple(mid[t]):
            return False
    return True


def post_results(group: GroupParams, board: Board, c_total: int) -> list[int]:
    return tally(group, board.column(board.cols - 1), c_total)


def tally(group: GroupParams, last_col: Sequence[Ciphertext], c_total: int) -> list[int]:
    vote_sum = [0] * c_total
    for c in last_col:
        exp = group.dlog_table.get(c[1] % group.p)
        if exp is None or c[1] == 0:
            raise TallyError(f"final term {tuple(c)} is not a power of alpha")
        vote_sum[exp % c_total] += 1
    return vote_sum
