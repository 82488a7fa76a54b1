"""Upward-closed path sets, their valuation, and the path-space measure.

Finitely generated upward-closed sets (of paths, or of stutter classes) are
represented by their generator antichains.  The valuation of a path-level
upper set is the summed weight of its generators — equivalently, of the
separation closure, the prefix-minimal elements, which is what makes the sum
well defined.  On class-level upper sets the induced measure of a state
evaluates in closed form via geometric factors for silent self-loops.  A
seeded auditor replays the algebraic laws these constructions rely on against
randomly drawn execution sets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .fps import Fps, mu_p
from .paths import Path, StutterClass, class_leq, last, prefix_leq


def separation_closure(paths) -> set[Path]:
    """The prefix-minimal members of a finite set of paths."""
    items = set(paths)
    return {p for p in items if not any(q != p and prefix_leq(q, p) for q in items)}


def _leq(kind: str):
    return prefix_leq if kind == "path" else class_leq


def _minimal(items: set, kind: str) -> frozenset:
    leq = _leq(kind)
    return frozenset(p for p in items if not any(q != p and leq(q, p) for q in items))


@dataclass(frozen=True)
class UpperSet:
    """An upward-closed set, held as its generator antichain."""

    kind: str  # "path" or "class"
    generators: frozenset

    def __post_init__(self):
        if self.kind not in ("path", "class"):
            raise ValueError(f"bad kind {self.kind!r}")
        if self.generators != _minimal(set(self.generators), self.kind):
            raise ValueError("generators must form a minimal antichain")

    def contains(self, item) -> bool:
        leq = _leq(self.kind)
        return any(leq(g, item) for g in self.generators)

    def is_empty(self) -> bool:
        return not self.generators


def upset_normalize(gens, kind: str | None = None) -> UpperSet:
    """The upper set generated by ``gens``, with the closure as generators."""
    items = set(gens)
    if kind is None:
        kind = "class" if items and all(isinstance(g, StutterClass) for g in items) else "path"
    return UpperSet(kind, _minimal(items, kind))


def _join_kind(u: UpperSet, v: UpperSet) -> str:
    if u.kind != v.kind:
        if u.is_empty():
            return v.kind
        if v.is_empty():
            return u.kind
        raise ValueError(f"kind mismatch: {u.kind} vs {v.kind}")
    return u.kind


def upset_union(u: UpperSet, v: UpperSet) -> UpperSet:
    kind = _join_kind(u, v)
    return UpperSet(kind, _minimal(set(u.generators) | set(v.generators), kind))


def upset_intersect(u: UpperSet, v: UpperSet) -> UpperSet:
    """Intersection via pairwise maxima: a common upper bound of two
    generators forces them comparable in a prefix order, so it suffices to
    keep the larger of each comparable pair."""
    kind = _join_kind(u, v)
    leq = _leq(kind)
    kept = set()
    for g in u.generators:
        for h in v.generators:
            if leq(g, h):
                kept.add(h)
            elif leq(h, g):
                kept.add(g)
    return UpperSet(kind, _minimal(kept, kind))


def valuation(fps: Fps, u: UpperSet) -> Fraction:
    """Total weight of a path-level upper set: the sum over its generators."""
    if u.kind != "path":
        raise ValueError("valuation is defined on path-level upper sets")
    return sum((mu_p(fps, g) for g in u.generators), Fraction(0))


def _self_loop(fps: Fps, state_name) -> Fraction:
    s = fps.index(state_name)
    return fps.prob.get((s, fps.tau, s), Fraction(0))


def class_future_measure(fps: Fps, c: StutterClass) -> Fraction:
    """Measure, from the class's start state, of the future of ``c``.

    The minimal executions collapsing onto the representative are the
    representative itself with silent self-loops inserted at non-final
    positions; summing their weights yields one geometric factor per
    position.
    """
    rep = c.canonical
    weight = mu_p(fps, rep)
    if weight == 0:
        return Fraction(0)
    for i in range(len(rep.steps)):
        weight /= 1 - _self_loop(fps, rep.state_at(i))
    return weight


def class_future_measure_truncated(fps: Fps, c: StutterClass, depth: int) -> Fraction:
    """Oracle for the closed form: enumerate the minimal executions of at
    most ``depth`` steps and sum their weights directly."""
    rep = c.canonical
    n = len(rep.steps)
    base = mu_p(fps, rep)
    if base == 0 or n > depth:
        return Fraction(0)
    loops = [_self_loop(fps, rep.state_at(i)) for i in range(n)]
    total = Fraction(0)

    def insert(i: int, weight: Fraction, budget: int):
        nonlocal total
        if i == n:
            total += weight
            return
        acc = weight
        spent = 0
        while spent <= budget:
            insert(i + 1, acc, budget - spent)
            acc *= loops[i]
            if acc == 0:
                break
            spent += 1

    insert(0, base, depth - n)
    return total


def alpha_measure(fps: Fps, x: str, u: UpperSet) -> Fraction:
    """Measure at state ``x`` of a class-level upper set.

    Incomparable classes have disjoint futures (the class order is a prefix
    order), so the measure is the plain sum over generators rooted at ``x``.
    """
    if not u.is_empty() and u.kind != "class":
        raise ValueError("alpha_measure is defined on class-level upper sets")
    return sum(
        (class_future_measure(fps, g) for g in u.generators if g.canonical.start == x),
        Fraction(0),
    )


# ---------------------------------------------------------------------------
# Law audit.

LAWS = (
    "strictness",
    "monotonicity",
    "modularity",
    "sepclosure-idempotent",
    "hereditarity",
    "upset-sepclosure",
    "separated-bound",
    "mu-order-reversal",
    "mu-empty-path",
)


@dataclass
class ValuationReport:
    law: str
    trials: int
    failures: int
    witness: str | None = None

    def as_dict(self) -> dict:
        out = {"law": self.law, "trials": self.trials, "failures": self.failures}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _simulate(fps: Fps, rng: random.Random, start: Path | None = None, max_steps: int = 8) -> Path:
    """One weighted random execution, stopping early now and then."""
    p = start if start is not None else Path(fps.names[rng.randrange(fps.n)])
    s = fps.index(last(p))
    while len(p.steps) < max_steps:
        row = fps.row(s)
        if not row or rng.random() < 0.3:
            break
        u = rng.random()
        acc = 0.0
        chosen = row[-1]
        for a, t, pr in row:
            acc += float(pr)
            if u < acc:
                chosen = (a, t, pr)
                break
        a, t, _ = chosen
        p = p.step(fps.actions[a], fps.names[t])
        s = t
    return p


def _random_set(fps: Fps, rng: random.Random, size: int = 4) -> set[Path]:
    return {_simulate(fps, rng) for _ in range(rng.randint(1, size))}


def _extend(fps: Fps, rng: random.Random, p: Path) -> Path:
    return _simulate(fps, rng, start=p, max_steps=len(p.steps) + rng.randint(1, 4))


def audit_valuation(fps: Fps, seed: int, trials: int) -> list[ValuationReport]:
    """Replay each law ``trials`` times on random execution sets."""
    reports = []
    for law in LAWS:
        rng = random.Random(f"{seed}:{law}")
        failures = 0
        witness = None

        def fail(instance: str):
            nonlocal failures, witness
            failures += 1
            if witness is None:
                witness = instance

        for _ in range(trials):
            if law == "strictness":
                if valuation(fps, upset_normalize(set(), "path")) != 0:
                    fail("valuation of the empty set")
            elif law == "monotonicity":
                big = _random_set(fps, rng)
                small = {_extend(fps, rng, p) for p in big if rng.random() < 0.8}
                u1, u2 = upset_normalize(small, "path"), upset_normalize(big, "path")
                if valuation(fps, u1) > valuation(fps, u2):
                    fail(f"{sorted(p.pretty() for p in small)} vs {sorted(p.pretty() for p in big)}")
            elif law == "modularity":
                u = upset_normalize(_random_set(fps, rng), "path")
                v = upset_normalize(_random_set(fps, rng), "path")
                lhs = valuation(fps, u) + valuation(fps, v)
                rhs = valuation(fps, upset_union(u, v)) + valuation(fps, upset_intersect(u, v))
                if lhs != rhs:
                    fail(f"{u} vs {v}: {lhs} != {rhs}")
            elif law == "sepclosure-idempotent":
                closed = separation_closure(_random_set(fps, rng))
                if separation_closure(closed) != closed:
                    fail(repr(sorted(p.pretty() for p in closed)))
            elif law == "hereditarity":
                closed = separation_closure(_random_set(fps, rng))
                sub = {p for p in closed if rng.random() < 0.5}
                if separation_closure(sub) != sub:
                    fail(repr(sorted(p.pretty() for p in sub)))
            elif law == "upset-sepclosure":
                base = _random_set(fps, rng)
                padded = base | {_extend(fps, rng, p) for p in base}
                if separation_closure(padded) != separation_closure(base):
                    fail(repr(sorted(p.pretty() for p in base)))
            elif law == "separated-bound":
                stem = _simulate(fps, rng, max_steps=4)
                exts = separation_closure({_extend(fps, rng, stem) for _ in range(3)})
                bound = mu_p(fps, stem)
                total = sum((mu_p(fps, q) for q in exts), Fraction(0))
                if total > bound:
                    fail(f"{stem.pretty()}: {total} > {bound}")
            elif law == "mu-order-reversal":
                p = _simulate(fps, rng)
                q = _extend(fps, rng, p)
                if mu_p(fps, q) > mu_p(fps, p):
                    fail(f"{p.pretty()} -> {q.pretty()}")
            elif law == "mu-empty-path":
                x = fps.names[rng.randrange(fps.n)]
                if mu_p(fps, Path(x)) != 1:
                    fail(x)
        reports.append(ValuationReport(law, trials, failures, witness))
    return reports
