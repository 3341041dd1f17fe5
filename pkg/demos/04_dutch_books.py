"""
Sure losses from bets offered at every awakening
=================================================

Payoffs carry a symbolic tiebreaker e, so -5+3·e reads as "lose a
little under five" for any small positive e.
"""

from sleepingbeauty import betting as bt

book = bt.hitchcock()
print(bt.render_book(book))

accept = bt.ChoiceProfile.uniform(book.protocol, True, True)
report = bt.settle(book, accept)
print("accept everything:", {k: str(v) for k, v in report.by_name().items()}, "sure loss:", report.sure_loss, "until e =", report.flip_epsilon)

# every way of answering Game 2 alone
for name, choices, payoff in bt.choice_table(bt.hitchcock_game2()):
    print(f"  {name} {choices:3s} {payoff}")

# CDT treats the other awakening as a coin with P(accept) = p*
for p in ("0", "1/2", "1"):
    a = bt.cdt_value(book, "game2", "halfer", p, "accept")
    r = bt.cdt_value(book, "game2", "halfer", p, "reject")
    print(f"p*={p:3s} V(accept)={a}  V(reject)={r}  gap={a - r}")

for book, policy in [(bt.hitchcock(), "cdt-halfer"), (bt.hitchcock(), "edt-halfer"), (bt.briggs(), "edt-thirder"), (bt.briggs(), "reject-all")]:
    d = bt.decide(book, bt.Policy.parse(policy))
    print(f"{book.name:10s} {policy:12s} accepts each: {d.accepts_each!s:5s} sure loss: {d.report.sure_loss}")

# more awakenings after Tails, more loss
rows = bt.n_waking_cdt_edt(5, bt.Policy.parse("cdt-halfer")).rows
print({row.n: str(row.accept_all["T"]) for row in rows})
