"""The Prêt à Voter network: Voter, Coercer, MixTeller, DecryptionTeller,
Auditor and Sys templates over the automata kernel."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..crypto import Ciphertext, GroupParams, KeyShares, lagrange_exponent, shamir_shares
from ..kernel import Channel, Edge, EvalError, Location, Network, ProcessTemplate, VariableDecl
from .board import AuditTables, SENTINEL, TallyError, check_links, mix_column, tally, victim_slot
from .board import do_rev as _do_rev


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    c_total: int = 3
    v_total: int = 3
    mt_total: int = 3
    dt_total: int = 3
    dt_min: int = 2
    p: int = 7
    alpha: int = 3
    beta: int = 6
    a1: int = 1
    corrupt_mtellers: tuple[int, ...] = ()
    # Domains the nondeterministic selections draw from; None = everything.
    rand_values: tuple[int, ...] | None = None
    perm_values: tuple[int, ...] | None = None
    delta_values: tuple[int, ...] | None = None
    audit_ch: tuple[int, ...] | None = None
    audit_lr: tuple[int, ...] | None = None
    group: GroupParams = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name, None)
            if isinstance(val, list):
                object.__setattr__(self, f.name, tuple(val))
        try:
            group = GroupParams(self.p, self.alpha, self.beta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "group", group)
        self.validate()

    def validate(self) -> None:
        if self.v_total < 1:
            raise ConfigError("v_total must be >= 1")
        if self.c_total < 1:
            raise ConfigError("c_total must be >= 1")
        if self.mt_total < 1:
            raise ConfigError("mt_total must be >= 1")
        if not 1 <= self.dt_min <= self.dt_total:
            raise ConfigError(f"dt_min={self.dt_min} must lie in [1, dt_total={self.dt_total}]")
        if self.v_total + self.c_total - 2 >= self.group.ord:
            raise ConfigError(
                f"seed + index exponents reach {self.v_total + self.c_total - 2}, "
                f"need < ord={self.group.ord}"
            )
        for m in self.corrupt_mtellers:
            if not 0 <= m < self.mt_total:
                raise ConfigError(f"corrupt mix teller {m} out of range")
        _subset("rand_values", self.rand_values, range(self.group.ord))
        _subset("perm_values", self.perm_values, range(len(self.tables.P_b)))
        _subset("delta_values", self.delta_values, range(2, self.group.ord))
        if self.delta_values is not None and any(d % self.group.ord == 1 for d in self.delta_values):
            raise ConfigError("delta = 1 mod ord is a no-op attack")
        full = 1 << self.v_total
        _subset("audit_ch", self.audit_ch, range(1, full))
        _subset("audit_lr", self.audit_lr, range(full))
        try:
            self.shares
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def tables(self) -> AuditTables:
        t = AuditTables.default(self.v_total, self.c_total)
        return AuditTables(
            t.P_b,
            t.S_c,
            self.audit_ch if self.audit_ch is not None else t.audit_ch,
            self.audit_lr if self.audit_lr is not None else t.audit_lr,
        )

    @property
    def shares(self) -> KeyShares:
        return shamir_shares(self.group.k, self.a1, self.dt_total, self.dt_min - 1)

    @property
    def n_cols(self) -> int:
        return 1 + 2 * self.mt_total + self.dt_min

    @property
    def rands(self) -> tuple[int, ...]:
        return self.rand_values if self.rand_values is not None else tuple(range(self.group.ord))

    @property
    def perms(self) -> tuple[int, ...]:
        return self.perm_values if self.perm_values is not None else tuple(range(len(self.tables.P_b)))

    @property
    def deltas(self) -> tuple[int, ...]:
        if self.delta_values is not None:
            return self.delta_values
        return tuple(d for d in range(2, self.group.ord) if d % self.group.ord != 1)

    def replace(self, **changes) -> "ModelConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        kw.update(changes)
        return ModelConfig(**kw)


def _subset(name, values, universe) -> None:
    if values is None:
        return
    if not values:
        raise ConfigError(f"{name} must not be empty")
    bad = [x for x in values if x not in universe]
    if bad:
        raise ConfigError(f"{name}: values {bad} outside {universe}")


# ---------------------------------------------------------------- templates

INIT, COMMITTED = "initial", "committed"


def voter_template(cfg: ModelConfig) -> ProcessTemplate:
    top = cfg.p - 1
    return ProcessTemplate(
        "Voter",
        [
            Location("idle", INIT), Location("has_ballot"), Location("marked_choice"),
            Location("received_receipt"), Location("verification"), Location("passed"),
            Location("failed"), Location("end"), Location("punished"), Location("not_punished"),
        ],
        [
            Edge("idle", "idle", guard="!coerced", sync="interact[id]?", update="coerced = 1"),
            Edge("idle", "has_ballot", sync="v_phase?",
                 update="rcpt_y1 = ballot_y1[id], rcpt_y2 = ballot_y2[id]"),
            Edge("has_ballot", "marked_choice", select=(("X", 0, cfg.c_total - 1),),
                 update="chosen = X, rcpt_r = c_index(id, X)",
                 inverse_update="chosen = 0, rcpt_r = 0"),
            Edge("marked_choice", "received_receipt", sync="record!",
                 update="rec_y1 = rcpt_y1, rec_y2 = rcpt_y2, rec_r = rcpt_r"),
            Edge("received_receipt", "received_receipt", guard="coerced && !shown", sync="show[id]!",
                 update="shown = 1, shown_y1[id] = rcpt_y1, shown_y2[id] = rcpt_y2, shown_r[id] = rcpt_r"),
            Edge("received_receipt", "received_receipt", guard="!posted", sync="p_phase?",
                 update="posted = 1"),
            Edge("received_receipt", "verification", guard="posted"),
            Edge("verification", "passed", guard="verify()"),
            Edge("verification", "failed", guard="!verify()"),
            Edge("received_receipt", "end", update="finished++"),
            Edge("passed", "end", update="finished++"),
            Edge("failed", "end", update="finished++"),
            Edge("end", "punished", guard="coerced", sync="punish[id]?"),
            Edge("end", "not_punished", guard="coerced", sync="not_punish[id]?"),
        ],
        locals=[
            VariableDecl("chosen", 0, cfg.c_total - 1),
            VariableDecl("coerced", 0, 1),
            VariableDecl("shown", 0, 1),
            VariableDecl("rcpt_y1", 0, top),
            VariableDecl("rcpt_y2", 0, top),
            VariableDecl("rcpt_r", 0, cfg.c_total - 1),
            VariableDecl("posted", 0, 1),
        ],
        parameters=("id",),
    )


def coercer_template(cfg: ModelConfig) -> ProcessTemplate:
    sel = (("w", 0, cfg.v_total - 1),)
    return ProcessTemplate(
        "Coercer",
        [Location("loop", INIT)],
        [
            Edge("loop", "loop", select=sel, guard="!coercion[w]", sync="interact[w]!",
                 update="coercion[w] = 1"),
            Edge("loop", "loop", select=sel, guard="!seen[w]", sync="show[w]?",
                 update="seen[w] = 1"),
            Edge("loop", "loop", select=sel, guard="published && coercion[w] == 1", sync="punish[w]!",
                 update="coercion[w] = 2", inverse_update="coercion[w] = 1"),
            Edge("loop", "loop", select=sel, guard="published && coercion[w] == 1", sync="not_punish[w]!",
                 update="coercion[w] = 2", inverse_update="coercion[w] = 1"),
        ],
        locals=[
            VariableDecl("coercion", 0, 2, 0, (cfg.v_total,)),
            VariableDecl("seen", 0, 1, 0, (cfg.v_total,)),
        ],
    )


def mixteller_template(cfg: ModelConfig) -> ProcessTemplate:
    v = cfg.v_total
    rsel = (("ri", 0, len(cfg.rands) - 1),)
    psel = (("pi", 0, len(cfg.perms) - 1),)
    dsel = (("di", 0, len(cfg.deltas) - 1),)
    return ProcessTemplate(
        "MixTeller",
        [
            Location("idle", INIT), Location("wait"), Location("odd"), Location("even"),
            Location("mixed"), Location("revealed", COMMITTED), Location("passed_audit"),
            Location("failed_audit"),
        ],
        [
            Edge("idle", "wait", sync="m_phase?"),
            Edge("wait", "odd", guard="mixes == id"),
            Edge("odd", "odd", select=rsel, guard="rand_ptr < V",
                 update="vec_r[0][rand_ptr] = RANDS[ri], rand_ptr++",
                 inverse_guard="rand_ptr > 0", inverse_update="rand_ptr--, vec_r[0][rand_ptr] = 0"),
            Edge("odd", "even", select=psel, guard="rand_ptr == V && !corrupt",
                 update="perm_i[0] = PERMS[pi], mix(0), rand_ptr = 0",
                 inverse_guard="rand_ptr == 0 && !corrupt",
                 inverse_update="clear_mix(0), perm_i[0] = 0, rand_ptr = V"),
            Edge("odd", "even", select=psel + dsel, guard="rand_ptr == V && corrupt",
                 update="perm_i[0] = PERMS[pi], delta = DELTAS[di], corrupt_mix(), rand_ptr = 0",
                 inverse_guard="rand_ptr == 0 && corrupt",
                 inverse_update="clear_mix(0), perm_i[0] = 0, delta = 0, rand_ptr = V"),
            Edge("even", "even", select=rsel, guard="rand_ptr < V",
                 update="vec_r[1][rand_ptr] = RANDS[ri], rand_ptr++",
                 inverse_guard="rand_ptr > 0", inverse_update="rand_ptr--, vec_r[1][rand_ptr] = 0"),
            Edge("even", "mixed", select=psel, guard="rand_ptr == V",
                 update="perm_i[1] = PERMS[pi], mix(1), rand_ptr = 0, mixes++",
                 inverse_guard="rand_ptr == 0",
                 inverse_update="mixes--, clear_mix(1), perm_i[1] = 0, rand_ptr = V"),
            Edge("mixed", "revealed", sync="reveal[id]?", update="do_rev()",
                 inverse_update="clear_rev()"),
            Edge("revealed", "passed_audit", sync="audit_pass[id]?"),
            Edge("revealed", "failed_audit", sync="audit_fail[id]?"),
        ],
        locals=[
            VariableDecl("vec_r", 0, cfg.group.ord - 1, 0, (2, v)),
            VariableDecl("perm_i", 0, len(cfg.tables.P_b) - 1, 0, (2,)),
            VariableDecl("rand_ptr", 0, v),
            VariableDecl("delta", 0, cfg.group.ord - 1),
        ],
        parameters=("id", "corrupt"),
    )


def dteller_template(cfg: ModelConfig) -> ProcessTemplate:
    return ProcessTemplate(
        "DecryptionTeller",
        [Location("idle", INIT), Location("wait"), Location("refused"), Location("cooperating"),
         Location("halt")],
        [
            Edge("idle", "wait", sync="d_phase?"),
            # refusing is only possible once enough tellers have joined
            Edge("wait", "refused", guard="dt_curr >= DTMIN"),
            Edge("wait", "cooperating", guard="dt_curr < DTMIN",
                 update="dt_participants[id] = 1, dt_curr++"),
            Edge("cooperating", "halt", guard="dt_curr == DTMIN && decryptions == dt_rank()",
                 update="my_decr(), decryptions++",
                 inverse_guard="decryptions == dt_rank() + 1",
                 inverse_update="decryptions--, clear_decr()"),
        ],
        parameters=("id",),
    )


def auditor_template(cfg: ModelConfig) -> ProcessTemplate:
    sel = (("c", 0, len(cfg.tables.audit_ch) - 1), ("l", 0, len(cfg.tables.audit_lr) - 1))
    return ProcessTemplate(
        "Auditor",
        [Location("idle", INIT), Location("auditing_mixes"), Location("auditing_mix_i"),
         Location("checking"), Location("end")],
        [
            Edge("idle", "auditing_mixes", sync="m_phase?"),
            Edge("auditing_mixes", "auditing_mix_i", select=sel, guard="audited < mixes",
                 update="ch_j = AUDIT_CH[c], lr_j = AUDIT_LR[l]"),
            Edge("auditing_mix_i", "checking", sync="reveal[audited]!"),
            # the verdict forgets the audit choice; reversing re-selects it
            Edge("checking", "auditing_mixes", guard="check_mix()", sync="audit_pass[audited]!",
                 update="clear_rev(), ch_j = 0, lr_j = 0, audited++",
                 inverse_guard="audited > 0", inverse_select=sel,
                 inverse_sync="audit_pass[audited - 1]!",
                 inverse_update="audited--, ch_j = AUDIT_CH[c], lr_j = AUDIT_LR[l], restore_rev()"),
            Edge("checking", "auditing_mixes", guard="!check_mix()", sync="audit_fail[audited]!",
                 update="clear_rev(), ch_j = 0, lr_j = 0, audited++",
                 inverse_guard="audited > 0", inverse_select=sel,
                 inverse_sync="audit_fail[audited - 1]!",
                 inverse_update="audited--, ch_j = AUDIT_CH[c], lr_j = AUDIT_LR[l], restore_rev()"),
            Edge("auditing_mixes", "end", guard="audited == MT"),
        ],
    )


def sys_template(cfg: ModelConfig) -> ProcessTemplate:
    v = cfg.v_total
    return ProcessTemplate(
        "Sys",
        [
            Location("idle", INIT), Location("generating_ballots"), Location("ballots_ready"),
            Location("voting"), Location("intake", COMMITTED), Location("receipts_posted"),
            Location("mixing"), Location("decryption"), Location("results"),
        ],
        [
            Edge("idle", "generating_ballots"),
            Edge("generating_ballots", "generating_ballots", select=(("ri", 0, len(cfg.rands) - 1),),
                 guard="r_ptr < V", update="r_vec[r_ptr] = RANDS[ri], r_ptr++",
                 inverse_guard="r_ptr > 0", inverse_update="r_ptr--, r_vec[r_ptr] = 0"),
            Edge("generating_ballots", "ballots_ready", guard="r_ptr == V",
                 update="generate_ballots()", inverse_update="clear_ballots()"),
            Edge("ballots_ready", "voting", sync="v_phase!"),
            Edge("voting", "intake", sync="record?"),
            # absorbing clears the transfer slot; reversing re-selects the index
            Edge("intake", "voting", update="absorb_i(), voted++",
                 inverse_guard="voted > 0", inverse_select=(("r", 0, cfg.c_total - 1),),
                 inverse_update="voted--, unabsorb_i(r)"),
            Edge("voting", "receipts_posted", guard="voted == V", sync="p_phase!"),
            # voters finish checking their receipts before mixing starts
            Edge("receipts_posted", "mixing", guard="finished == V", sync="m_phase!"),
            Edge("mixing", "decryption", guard="mixes == MT && audited == MT", sync="d_phase!"),
            Edge("decryption", "results", guard="decryptions == DTMIN",
                 update="post_results(), published = 1",
                 inverse_update="published = 0, clear_results()"),
        ],
        locals=[
            VariableDecl("vote_sum", 0, v, 0, (cfg.c_total,)),
            VariableDecl("r_vec", 0, cfg.group.ord - 1, 0, (v,)),
            VariableDecl("r_ptr", 0, v),
            VariableDecl("voted", 0, v),
        ],
    )


def global_decls(cfg: ModelConfig) -> list[VariableDecl]:
    v, top = cfg.v_total, cfg.p - 1
    return [
        VariableDecl("board_y1", 0, top, 0, (v, cfg.n_cols)),
        VariableDecl("board_y2", 0, top, 0, (v, cfg.n_cols)),
        VariableDecl("ballot_y1", 0, top, 0, (v,)),
        VariableDecl("ballot_y2", 0, top, 0, (v,)),
        VariableDecl("rec_y1", 0, top),
        VariableDecl("rec_y2", 0, top),
        VariableDecl("rec_r", 0, cfg.c_total - 1),
        VariableDecl("shown_y1", 0, top, 0, (v,)),
        VariableDecl("shown_y2", 0, top, 0, (v,)),
        VariableDecl("shown_r", 0, cfg.c_total - 1, 0, (v,)),
        VariableDecl("mixes", 0, cfg.mt_total),
        VariableDecl("audited", 0, cfg.mt_total),
        VariableDecl("ch_j", 0, (1 << v) - 1),
        VariableDecl("lr_j", 0, (1 << v) - 1),
        VariableDecl("rev_p", 0, v - 1, 0, (v,)),
        VariableDecl("rev_r", 0, cfg.group.ord - 1, 0, (v,)),
        VariableDecl("dt_curr", 0, cfg.dt_min),
        VariableDecl("decryptions", 0, cfg.dt_min),
        VariableDecl("dt_participants", 0, 1, 0, (cfg.dt_total,)),
        VariableDecl("finished", 0, v),
        VariableDecl("published", 0, 1),
    ]


def channels(cfg: ModelConfig) -> list[Channel]:
    v, mt = cfg.v_total, cfg.mt_total
    return [
        Channel("record"),
        Channel("interact", size=v),
        Channel("show", size=v),
        Channel("punish", size=v),
        Channel("not_punish", size=v),
        Channel("reveal", size=mt),
        Channel("audit_pass", size=mt),
        Channel("audit_fail", size=mt),
        Channel("v_phase", "broadcast"),
        Channel("p_phase", "broadcast"),
        Channel("m_phase", "broadcast"),
        Channel("d_phase", "broadcast"),
    ]


# ---------------------------------------------------------------- procedures
#
# Each factory receives the calling instance's Layout and returns
# fn(v, *args). Guards pass a tuple, updates a list they may write.


class _Cells:
    """Offsets of the board and other shared arrays for one network."""

    def __init__(self, lay, cfg: ModelConfig):
        self.cfg = cfg
        self.v = cfg.v_total
        self.n_cols = cfg.n_cols
        self.y1 = lay.offset("board_y1")
        self.y2 = lay.offset("board_y2")

    def cell(self, vals, t, c) -> Ciphertext:
        k = t * self.n_cols + c
        return Ciphertext(vals[self.y1 + k], vals[self.y2 + k])

    def column(self, vals, c) -> list[Ciphertext]:
        return [self.cell(vals, t, c) for t in range(self.v)]

    def put(self, w, t, c, ct) -> None:
        k = t * self.n_cols + c
        w[self.y1 + k], w[self.y2 + k] = ct

    def put_column(self, w, c, col) -> None:
        for t, ct in enumerate(col):
            self.put(w, t, c, ct)


def _procedures(cfg: ModelConfig) -> dict:
    g = cfg.group
    tables = cfg.tables
    shares = cfg.shares
    v_total, c_total, mt = cfg.v_total, cfg.c_total, cfg.mt_total

    def c_index(lay):
        lists = [[(r + s) % c_total for r in range(c_total)] for s in range(v_total)]

        def fn(v, seed, target):
            return lists[seed].index(target)
        return fn

    def verify(lay):
        cells = _Cells(lay, cfg)
        o1, o2, orr = lay.offset("rcpt_y1"), lay.offset("rcpt_y2"), lay.offset("rcpt_r")

        def fn(v):
            rc = Ciphertext(v[o1], v[o2])
            if not g.is_valid(rc):
                return 0
            return 1 if g.absorb_index(rc, v[orr]) in cells.column(v, 0) else 0
        return fn

    def generate_ballots(lay):
        rv, b1, b2 = lay.offset("r_vec"), lay.offset("ballot_y1"), lay.offset("ballot_y2")

        def fn(w):
            for i in range(v_total):
                w[b1 + i], w[b2 + i] = g.encr(g.zpow(g.alpha, i), w[rv + i])
        return fn

    def clear_ballots(lay):
        b1, b2 = lay.offset("ballot_y1"), lay.offset("ballot_y2")

        def fn(w):
            for i in range(v_total):
                w[b1 + i] = w[b2 + i] = 0
        return fn

    def absorb_i(lay):
        cells = _Cells(lay, cfg)
        voted = lay.offset("voted")
        r1, r2, rr = lay.offset("rec_y1"), lay.offset("rec_y2"), lay.offset("rec_r")

        def fn(w):
            rc = Ciphertext(w[r1], w[r2])
            cells.put(w, w[voted], 0, g.absorb_index(rc, w[rr]))
            w[r1] = w[r2] = w[rr] = 0
        return fn

    def unabsorb_i(lay):
        cells = _Cells(lay, cfg)
        voted = lay.offset("voted")
        r1, r2, rr = lay.offset("rec_y1"), lay.offset("rec_y2"), lay.offset("rec_r")

        def fn(w, r):
            cell = cells.cell(w, w[voted], 0)
            if g.is_valid(cell):
                w[r1], w[r2] = g.absorb_index(cell, -r)
                w[rr] = r
            cells.put(w, w[voted], 0, SENTINEL)
        return fn

    def _teller(lay):
        return (
            lay.const("id"),
            lay.offset("vec_r"),
            lay.offset("perm_i"),
        )

    def mix(lay):
        cells = _Cells(lay, cfg)
        me, vr, pi = _teller(lay)

        def fn(w, half):
            src = 2 * me + half
            rands = w[vr + half * v_total : vr + (half + 1) * v_total]
            perm = tables.P_b[w[pi + half]]
            cells.put_column(w, src + 1, mix_column(g, cells.column(w, src), rands, perm))
        return fn

    def corrupt_mix(lay):
        cells = _Cells(lay, cfg)
        me, vr, pi = _teller(lay)
        dl = lay.offset("delta")

        def fn(w):
            src = 2 * me
            perm = tables.P_b[w[pi]]
            col = cells.column(w, src)
            out = mix_column(g, col, w[vr : vr + v_total], perm)
            # target term 0; its power overwrites another output slot
            out[victim_slot(perm, 0)] = g.power(col[0], w[dl])
            cells.put_column(w, src + 1, out)
        return fn

    def clear_mix(lay):
        cells = _Cells(lay, cfg)
        me = lay.const("id")

        def fn(w, half):
            cells.put_column(w, 2 * me + half + 1, [SENTINEL] * v_total)
        return fn

    def _reveal(w, me, vr, pi, rp, rr, ch, lr):
        perm_odd, perm_even = tables.P_b[w[pi]], tables.P_b[w[pi + 1]]
        rands = w[vr : vr + 2 * v_total]
        rev_p, rev_r = _do_rev(perm_odd, perm_even, rands[:v_total], rands[v_total:], ch, lr)
        w[rp : rp + v_total] = rev_p
        w[rr : rr + v_total] = rev_r

    def do_rev(lay):
        me, vr, pi = _teller(lay)
        rp, rr = lay.offset("rev_p"), lay.offset("rev_r")
        ch, lr = lay.offset("ch_j"), lay.offset("lr_j")

        def fn(w):
            _reveal(w, me, vr, pi, rp, rr, w[ch], w[lr])
        return fn

    def restore_rev(lay):
        # the auditor re-derives the revealed data from the teller it audited
        net = lay.network
        rp, rr = lay.offset("rev_p"), lay.offset("rev_r")
        ch, lr, au = lay.offset("ch_j"), lay.offset("lr_j"), lay.offset("audited")
        tellers = []
        for m in range(mt):
            tl = net.layout(net.instance_id("MixTeller", m))
            tellers.append((m, tl.offset("vec_r"), tl.offset("perm_i")))

        def fn(w):
            m, vr, pi = tellers[w[au]]
            _reveal(w, m, vr, pi, rp, rr, w[ch], w[lr])
        return fn

    def clear_rev(lay):
        rp, rr = lay.offset("rev_p"), lay.offset("rev_r")

        def fn(w):
            w[rp : rp + v_total] = [0] * v_total
            w[rr : rr + v_total] = [0] * v_total
        return fn

    def check_mix(lay):
        cells = _Cells(lay, cfg)
        rp, rr = lay.offset("rev_p"), lay.offset("rev_r")
        ch, lr, au = lay.offset("ch_j"), lay.offset("lr_j"), lay.offset("audited")

        def fn(v):
            m = v[au]
            src, mid, out = (cells.column(v, 2 * m + d) for d in range(3))
            ok = check_links(
                g, src, mid, out, v[ch], v[lr], v[rp : rp + v_total], v[rr : rr + v_total]
            )
            return 1 if ok else 0
        return fn

    def dt_rank(lay):
        me = lay.const("id")
        part = lay.offset("dt_participants")

        def fn(v):
            return sum(v[part : part + me])
        return fn

    def _dt(lay):
        return lay.const("id"), lay.offset("dt_participants"), _Cells(lay, cfg)

    def my_decr(lay):
        me, part, cells = _dt(lay)

        memo: dict[tuple, int] = {}

        def fn(w):
            rank = sum(w[part : part + me])
            subset = tuple(x + 1 for x in range(cfg.dt_total) if w[part + x])
            contribution = memo.get(subset)
            if contribution is None:
                contribution = memo[subset] = lagrange_exponent(shares, subset, me + 1)
            col = 2 * mt + rank
            stage = [g.partial_decrypt_step(ct, contribution) for ct in cells.column(w, col)]
            cells.put_column(w, col + 1, stage)
        return fn

    def clear_decr(lay):
        me, part, cells = _dt(lay)

        def fn(w):
            rank = sum(w[part : part + me])
            cells.put_column(w, 2 * mt + rank + 1, [SENTINEL] * v_total)
        return fn

    def post_results(lay):
        cells = _Cells(lay, cfg)
        vs = lay.offset("vote_sum")

        def fn(w):
            try:
                counts = tally(g, cells.column(w, cfg.n_cols - 1), c_total)
            except TallyError as exc:
                raise EvalError(str(exc)) from exc
            w[vs : vs + c_total] = counts
        return fn

    def clear_results(lay):
        vs = lay.offset("vote_sum")

        def fn(w):
            w[vs : vs + c_total] = [0] * c_total
        return fn

    return {f.__name__: f for f in (
        c_index, verify, generate_ballots, clear_ballots, absorb_i, unabsorb_i, mix,
        corrupt_mix, clear_mix, do_rev, restore_rev, clear_rev, check_mix, dt_rank,
        my_decr, clear_decr, post_results, clear_results,
    )}


def build_network(cfg: ModelConfig | None = None) -> Network:
    cfg = cfg or ModelConfig()
    cfg.validate()
    tables = cfg.tables
    corrupt = set(cfg.corrupt_mtellers)
    consts = {
        "V": cfg.v_total,
        "C": cfg.c_total,
        "MT": cfg.mt_total,
        "DT": cfg.dt_total,
        "DTMIN": cfg.dt_min,
        "RANDS": cfg.rands,
        "PERMS": cfg.perms,
        "DELTAS": cfg.deltas,
        "AUDIT_CH": tables.audit_ch,
        "AUDIT_LR": tables.audit_lr,
    }
    processes = [
        (voter_template(cfg), [{"id": i} for i in range(cfg.v_total)]),
        (coercer_template(cfg), [{}]),
        (mixteller_template(cfg),
         [{"id": m, "corrupt": int(m in corrupt)} for m in range(cfg.mt_total)]),
        (dteller_template(cfg), [{"id": d} for d in range(cfg.dt_total)]),
        (auditor_template(cfg), [{}]),
        (sys_template(cfg), [{}]),
    ]
    net = Network(
        processes,
        globals=global_decls(cfg),
        channels=channels(cfg),
        consts=consts,
        functions=_procedures(cfg),
    )
    net.config = cfg
    return net
