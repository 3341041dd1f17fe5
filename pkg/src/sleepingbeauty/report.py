"""Text tables and record streams for engine results.

Every report has a text form (aligned columns) and a record form (one JSON
object per line, rationals as ``p/q`` strings).  Reports built on a
deliberately wrong model carry an ``[ERRONEOUS MODEL]`` banner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import betting, branching, measure, sampler
from .measure import HALFER, THIRDER
from .protocol import ExperimentProtocol, builtin

BANNER = "[ERRONEOUS MODEL]"


def fmt(value) -> str:
    """Canonical string: ``p/q`` for rationals (whole numbers bare), ``a+b·e`` for money."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    if value is None:
        return "-"
    return str(value)


@dataclass
class Report:
    title: str
    headers: tuple[str, ...] = ("quantity", "value")
    rows: list[tuple[str, ...]] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    erroneous: str | None = None

    def add(self, space: str, event: str, value, *extra):
        """Append a table row and its record.  ``extra`` fills further columns."""
        text = fmt(value)
        self.rows.append((event, text, *map(fmt, extra)))
        rec = {"report": self.title, "space": space, "event": event, "value": text}
        for h, x in zip(self.headers[2:], extra):
            rec[h] = fmt(x)
        if self.erroneous:
            rec["erroneous"] = self.erroneous
        self.records.append(rec)

    def row(self, *cells, record: dict | None = None):
        """Append a free-form row; ``record`` is emitted as given."""
        self.rows.append(tuple(map(fmt, cells)))
        if record is not None:
            rec = {"report": self.title, **{k: fmt(v) for k, v in record.items()}}
            if self.erroneous:
                rec["erroneous"] = self.erroneous
            self.records.append(rec)

    def text(self) -> str:
        lines = [f"== {self.title} =="]
        if self.erroneous:
            lines.append(f"{BANNER} {self.erroneous}")
        widths = [len(h) for h in self.headers]
        for r in self.rows:
            for i, c in enumerate(r):
                if i < len(widths):
                    widths[i] = max(widths[i], len(c))
                else:
                    widths.append(len(c))
        lines.append("  ".join(h.ljust(w) for h, w in zip(self.headers, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths[: len(self.headers)]))
        for r in self.rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"

    def record_lines(self) -> str:
        return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in self.records)


def emit(reports, fmt_name: str = "text") -> str:
    if fmt_name == "records":
        return "".join(r.record_lines() for r in reports)
    return "\n".join(r.text() for r in reports)


# -- credences ------------------------------------------------------------------


def credence_report(protocol: ExperimentProtocol, weighting: str) -> Report:
    space = measure.centered(protocol, weighting)
    tag = f"{protocol.name}/{weighting}"
    rep = Report(f"credence {tag}")
    days = protocol.days()
    for b in protocol.branches:
        for i, a in enumerate(b.awakenings):
            rep.add(tag, f"P({b.name}∩{a.day})", space.weights[(b.profile, i)])
    for d in days:
        rep.add(tag, f"P({d})", space.prob(measure.day_event(protocol, d)))
    outcomes = [measure.outcome_event(protocol, l, protocol.primary.id) for l in protocol.primary.labels]
    for e in outcomes:
        rep.add(tag, f"P({e.label})", space.prob(e))
    for d in days:
        day = measure.day_event(protocol, d)
        for e in outcomes:
            rep.add(tag, f"P({e.label}|{d})", measure.condition(space, e, day))
    cells = [measure.day_event(protocol, d) for d in days]
    for e in outcomes:
        dec = measure.decompose(space, e, cells)
        terms = " + ".join(
            "0" if c is None or c == 0 else f"{fmt(c)}·{fmt(p)}" for c, p in dec.terms
        )
        rep.add(tag, f"P({e.label}) = {terms}", dec.total)
    for e in outcomes:
        rep.add(tag, f"P(Wake|{e.label})/P(Wake)", measure.wake_likelihood_ratio(protocol, weighting, e))
    if space.conditioned_out:
        rep.notes.append(f"conditioned out zero-awakening branches: {space.conditioned_out}")
    rep.notes.extend(measure.knowledge_report(protocol))
    return rep


def naive_report(protocol: ExperimentProtocol, event: measure.Event) -> list[Report]:
    obj = Report(f"objective {protocol.name}")
    naive = Report(f"naive indifference {protocol.name}", erroneous=measure.NAIVE_FLAG)
    m_obj = measure.objective_measure(protocol)
    m_naive = measure.naive_indifference(protocol)
    for b in protocol.branches:
        obj.add(f"{protocol.name}/objective", f"P({b.name})", m_obj.weights[b.profile])
        naive.add(f"{protocol.name}/naive", f"P({b.name})", m_naive.weights[b.profile])
    obj.add(f"{protocol.name}/objective", f"P({event.label})", m_obj.prob(event))
    naive.add(f"{protocol.name}/naive", f"P({event.label})", m_naive.prob(event))
    return [obj, naive]


def technicolor_report() -> list[Report]:
    p = builtin("technicolor")
    table = Report("technicolor branches", ("branch", "P", "Mo", "Tu"))
    obj = measure.objective_measure(p)
    for b in p.branches:
        sig = [",".join(sorted(a.signals)) for a in b.awakenings] + ["", ""]
        table.row(b.name, obj.weights[b.profile], sig[0], sig[1],
                  record={"space": "technicolor/objective", "event": b.name, "value": obj.weights[b.profile]})

    space = measure.centered(p, HALFER)
    red, blue = measure.sees_event(p, "red"), measure.sees_event(p, "blue")
    H = measure.outcome_event(p, "H", "coin")
    ov = measure.overlap_report(space, [red, blue])
    eq = Report("technicolor overlap (halfer)")
    tag = "technicolor/halfer"
    eq.add(tag, "P(Red)", ov.measures[0])
    eq.add(tag, "P(Blue)", ov.measures[1])
    eq.add(tag, "P(Red∩Blue)", ov.intersections[(0, 1)])
    eq.add(tag, "P(Red)+P(Blue)", ov.total)
    eq.add(tag, "verdict", ov.verdict)
    eq.add(tag, "P(H|Red)", measure.condition(space, H, red))
    eq.add(tag, "P(H|Blue)", measure.condition(space, H, blue))
    p_red_given_h = measure.condition(space, red, H)
    eq.add(tag, "P(Red|H)", p_red_given_h)
    eq.add(tag, "P(H) = P(H|Red)·P(Red)/P(Red|H)", measure.condition(space, H, red) * ov.measures[0] / p_red_given_h)
    return [table, eq]


def elga_report() -> list[Report]:
    reports = []
    for name in ("sbp", "method2", "method2prime"):
        p = builtin(name)
        rep = Report(f"Monday conditionals {name} (halfer)")
        space = measure.centered(p, HALFER)
        mo = measure.day_event(p, "Mo")
        tag = f"{name}/halfer"
        for label in ("H", "T"):
            e = measure.outcome_event(p, label) & mo
            rep.add(tag, f"P({label}∩Mo)", space.prob(e))
        rep.add(tag, "P(Mo)", space.prob(mo))
        for label in ("H", "T"):
            e = measure.outcome_event(p, label) & mo
            rep.add(tag, f"P({label}∩Mo|Mo)", measure.condition(space, e, mo))
        rep.notes.extend(measure.knowledge_report(p))
        reports.append(rep)
    return reports


# -- sampling ------------------------------------------------------------------


def simulate_report(protocol, event: measure.Event, mode: str, n: int, seed: int, workers: int = 1) -> Report:
    result = sampler.convergence_check(protocol, event, mode, n, seed, workers=workers)
    est = result.estimate
    rep = Report(f"simulate {protocol.name} {mode} seed={seed} n={n}")
    tag = f"{protocol.name}/{mode}"
    label = event.label or "event"
    rep.add(tag, f"hits({label})", est.hits)
    rep.add(tag, "total", est.total)
    rep.add(tag, f"estimate({label})", est.estimate)
    rep.add(tag, "estimate (decimal)", f"{float(est.estimate):.6f}")
    rep.add(tag, "stderr", f"{est.stderr:.6f}")
    rep.add(tag, f"exact({label})", result.exact)
    rep.add(tag, "convergence (4 stderr)", "pass" if result.passed else "fail")
    return rep


# -- betting ---------------------------------------------------------------------


def book_table(book: betting.BettingBook, title: str) -> Report:
    labels = book.protocol.primary.labels
    rep = Report(title, ("offer", "when", *labels))
    for o in book.offers:
        rep.row(o.id, o.when, *(o.payoff[l] for l in labels),
                record={"space": book.name, "event": o.id, "value": " ".join(f"{l}={o.payoff[l]}" for l in labels)})
    return rep


def settlement_report(title: str, book: betting.BettingBook, report: betting.SettlementReport, choices=None) -> Report:
    rep = Report(title)
    for name, v in report.by_name().items():
        rep.add(book.name, f"net({name})", v)
    rep.add(book.name, "sure_loss", report.sure_loss)
    rep.add(book.name, "flip_epsilon", report.flip_epsilon)
    if choices is not None:
        rep.add(book.name, "accept upfront", choices.upfront)
        rep.add(book.name, "accept at awakenings", sum(choices.per_awakening.values()))
    return rep


def _cdt_formula(book, offer, credence, action) -> str:
    v0 = betting.cdt_value(book, offer, credence, 0, action)
    v1 = betting.cdt_value(book, offer, credence, 1, action)
    slope = v1 - v0
    if slope == betting.ZERO:
        return str(v0)
    head = "" if v0 == betting.ZERO else f"{v0} + "
    return f"{head}p*·({slope})"


def dutchbook_report(book: betting.BettingBook, policy: betting.Policy) -> list[Report]:
    decision = betting.decide(book, policy)
    reports = [book_table(book, f"book {book.name}")]
    if policy.kind == betting.DECISION:
        vals = Report(f"values {policy.label}")
        if decision.accept_upfront_value is not None:
            vals.add(book.name, "V(accept upfront)", decision.accept_upfront_value)
        if decision.accept_value is not None:
            vals.add(book.name, "V(accept)", decision.accept_value)
            vals.add(book.name, "V(reject)", decision.reject_value)
            vals.add(book.name, "V(accept)-V(reject)", decision.accept_value - decision.reject_value)
        reports.append(vals)
    reports.append(settlement_report(f"settlement {book.name} under {policy.label}", book, decision.report, decision.choices))
    if policy.kind == betting.REJECT_ALL:
        reports[-1].notes.append("refusing every offer is always available and never sure-loses")
    return reports


def n_waking_report(n: int, policy: betting.Policy) -> Report:
    res = betting.n_waking_cdt_edt(n, policy)
    rep = Report(f"N-waking Game 2 under {policy.label}", ("N", "accept-all H", "accept-all T", "CDT gap", "EDT accept", "policy T"))
    for r in res.rows:
        rep.row(r.n, r.accept_all["H"], r.accept_all["T"], r.cdt_gap, r.edt_accept, r.decision.report["T"],
                record={"space": f"n_waking({r.n})", "event": "accept-all T", "value": r.accept_all["T"]})
    rep.notes.append(f"tails loss monotone in N: {fmt(res.monotone)}")
    return rep


def dutch_tables() -> list[Report]:
    hb, bb, g2 = betting.hitchcock(), betting.briggs(), betting.hitchcock_game2()
    out = [book_table(hb, "Hitchcock book")]

    t3 = Report("Game 2 for an agent whose awakenings act alike", ("branch", "payoff"))
    for name, v in betting.edt_table(g2).items():
        t3.row(name, v, record={"space": "hitchcock_game2/edt", "event": name, "value": v})
    out.append(t3)

    t4 = Report("Game 2 choices", ("branch", "choices", "payoff"))
    for name, choices, v in betting.choice_table(g2):
        t4.row(name, choices, v, record={"space": "hitchcock_game2", "event": f"{name}:{choices}", "value": v})
    out.append(t4)

    out.append(book_table(bb, "Briggs book"))

    accept = betting.Policy(betting.ACCEPT_ALL)
    out.append(settlement_report("Hitchcock accept-all", hb, betting.decide(hb, accept).report))
    out.append(settlement_report("Briggs accept-all", bb, betting.decide(bb, accept).report))

    vals = Report("decision values")
    for action in (betting.ACCEPT, betting.REJECT):
        vals.add("hitchcock/cdt-halfer", f"V({action}) Game 2", _cdt_formula(g2, "game2", HALFER, action))
    vals.add("hitchcock/cdt-halfer", "V(accept)-V(reject) Game 2",
             betting.cdt_value(g2, "game2", HALFER, 1, "accept") - betting.cdt_value(g2, "game2", HALFER, 1, "reject"))
    vals.add("hitchcock/edt-halfer", "V(accept) Game 2", betting.edt_value(g2, "game2", HALFER, "accept"))
    vals.add("briggs/edt-thirder", "V(accept) Game 2*", betting.edt_value(bb, "game2*", THIRDER, "accept"))
    out.append(vals)

    verdicts = Report("decision verdicts", ("policy", "book", "accept upfront", "accept each", "sure_loss"))
    for pol in ("cdt-halfer", "edt-halfer", "edt-thirder", "reject-all"):
        for book in (hb, bb):
            d = betting.decide(book, betting.Policy.parse(pol))
            verdicts.row(pol, book.name, d.choices.upfront, d.accepts_each, d.report.sure_loss,
                         record={"space": book.name, "event": pol, "value": d.report.sure_loss})
    out.append(verdicts)
    return out


# -- branching -------------------------------------------------------------------


def branch_report(protocol: ExperimentProtocol, mode: str) -> list[Report]:
    tree = branching.from_quantum_protocol(protocol)
    wm = branching.world_measure(tree, mode)
    tree_rep = Report(f"world tree {protocol.name}", ("node", "born weight"))
    for line in tree.render().splitlines():
        label, _, weight = line.rpartition(" : ")
        tree_rep.row(label, weight, record={"space": protocol.name, "event": label.strip(), "value": weight})
    rep = Report(f"world credence {protocol.name} {wm.mode}", erroneous=wm.erroneous)
    for label, w in wm.weights.items():
        rep.add(f"{protocol.name}/{wm.mode}", f"P({label} world)", w)
    return [tree_rep, rep]


def quantum_tables() -> list[Report]:
    q = builtin("quantum_sbp")
    tree = branching.from_quantum_protocol(q)
    heads = branching.world_event(tree, "H")
    single = Report("quantum sbp, single normalization")
    single.add("quantum_sbp/single", "P(Heads world)", branching.world_credence(tree, heads, "single"))
    wm = branching.world_measure(tree, "double")
    double = Report("quantum sbp, double normalization", erroneous=wm.erroneous)
    double.add("quantum_sbp/double", "P(Heads world)", branching.world_credence(tree, heads, "double"))

    cmp = branching.second_q_toss_compare()
    comp = Report("SBP-Tail vs Second-Q-Toss", ("setup", "P̃(Mo)", "P(Mo)", "worlds", "Born(Mo)"))
    for r in cmp.rows:
        comp.row(r.setup, r.objective_mo, r.credence_mo, r.worlds, r.born_mo,
                 record={"space": r.setup, "event": "(P̃(Mo),P(Mo))", "value": f"({fmt(r.objective_mo)},{fmt(r.credence_mo)})"})
    return [single, double, comp]


def proportion_tables(n: int = 100000, seed: int = 42) -> list[Report]:
    out = []
    sbp = builtin("sbp")
    H = measure.outcome_event(sbp, "H")
    for mode in (sampler.PER_EXPERIMENT, sampler.PER_AWAKENING):
        out.append(simulate_report(sbp, H, mode, n, seed))
    g = builtin("groisman")
    out.append(simulate_report(g, measure.outcome_event(g, "H").named("green put in"), sampler.PER_EXPERIMENT, n, seed))
    out.append(simulate_report(g, measure.signal_event(g, "green").named("green picked out"), sampler.PER_AWAKENING, n, seed))

    ens = sampler.run(sbp, n, seed)
    rs = sampler.reward_summary(ens, {"H": 1, "T": 2}, H)
    rew = Report(f"reward weighting (1 per H, 2 per T) seed={seed} n={n}")
    rew.add("sbp/reward", "reward per experiment", f"{float(rs.per_trial):.6f}")
    rew.add("sbp/reward", "H share of reward", f"{float(rs.share):.6f}")
    rew.add("sbp/reward", "H frequency", f"{float(rs.frequency):.6f}")
    out.append(rew)
    return out


def all_tables(n: int = 100000, seed: int = 42) -> list[Report]:
    sbp = builtin("sbp")
    dal = builtin("dalembert")
    reports = [credence_report(sbp, HALFER), credence_report(sbp, THIRDER)]
    reports += elga_report()
    reports += naive_report(dal, measure.branch_event(dal, lambda b: "H" in b.profile, "≥1 Heads"))
    reports += technicolor_report()
    reports += dutch_tables()
    reports.append(n_waking_report(3, betting.Policy.parse("cdt-halfer")))
    reports += quantum_tables()
    reports += proportion_tables(n, seed)
    return reports
