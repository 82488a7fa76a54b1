"""Fully probabilistic systems with exact rational transition weights.

States either stop (outgoing mass 0) or move (mass exactly 1).  Reachability
probabilities P(x, tau*a, Y) are sums over first-hit executions; they are
computed exactly as the least solution of a rational linear system, never by
enumeration, so silent loops are handled without approximation.  Equivalence
of states (probabilistic delay bisimulation) is decided by refining a
partition against those reachability signatures, with an exhaustive
partition-lattice oracle alongside for small systems.
"""

from __future__ import annotations

from fractions import Fraction

from .lts import Partition
from .paths import Action, Path

Triple = tuple[int, int, int]  # (source, action, target) indices


class FpsParseError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class FpsValidationError(ValueError):
    pass


class Fps:
    """A finite fully probabilistic system over named states."""

    def __init__(self, names, actions, prob: dict[Triple, Fraction]):
        self.names: tuple[str, ...] = tuple(names)
        self.actions: tuple[Action, ...] = tuple(actions)
        self.prob: dict[Triple, Fraction] = {k: Fraction(v) for k, v in prob.items()}
        n, m = len(self.names), len(self.actions)
        if len(set(self.names)) != n:
            raise ValueError("duplicate state names")
        taus = [i for i, a in enumerate(self.actions) if a.is_tau]
        if len(taus) != 1:
            raise ValueError("exactly one silent action is required")
        self.tau: int = taus[0]
        sums = [Fraction(0)] * n
        for (s, a, t), p in self.prob.items():
            if not (0 <= s < n and 0 <= t < n and 0 <= a < m):
                raise ValueError(f"transition {(s, a, t)} out of range")
            if not 0 < p <= 1:
                raise FpsValidationError(
                    f"state {self.names[s]}: probability {p} outside (0, 1]"
                )
            sums[s] += p
        for s, total in enumerate(sums):
            if total not in (0, 1):
                raise FpsValidationError(
                    f"state {self.names[s]}: outgoing probability {total}, expected 0 or 1"
                )
        self._index = {name: i for i, name in enumerate(self.names)}
        self._action_index = {a.label: i for i, a in enumerate(self.actions)}
        self._rows: list[tuple[tuple[int, int, Fraction], ...]] | None = None

    @property
    def n(self) -> int:
        return len(self.names)

    def visible(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.actions)) if i != self.tau)

    def index(self, name: str) -> int:
        if name not in self._index:
            raise KeyError(f"unknown state {name!r}")
        return self._index[name]

    def action_index(self, label: str) -> int | None:
        return self._action_index.get(label)

    def row(self, s: int) -> tuple[tuple[int, int, Fraction], ...]:
        """Outgoing transitions of ``s`` as sorted (action, target, prob)."""
        if self._rows is None:
            acc: list[list[tuple[int, int, Fraction]]] = [[] for _ in range(self.n)]
            for (src, a, t), p in self.prob.items():
                acc[src].append((a, t, p))
            self._rows = [tuple(sorted(r)) for r in acc]
        return self._rows[s]


def parse_fps(text: str, tau_label: str = "tau") -> Fps:
    """Parse the line format ``source action probability target``.

    ``#`` starts a comment; a bare ``state NAME`` line declares a state that
    appears on no transition; probabilities are fractions like ``1/3`` or
    decimals with a finite expansion.
    """
    names: list[str] = []
    index: dict[str, int] = {}

    def state_of(token: str) -> int:
        if token not in index:
            index[token] = len(names)
            names.append(token)
        return index[token]

    labels: list[str] = []
    label_index: dict[str, int] = {}
    prob: dict[Triple, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "state":
            if len(tokens) != 2:
                raise FpsParseError("expected 'state NAME'", lineno)
            state_of(tokens[1])
            continue
        if len(tokens) != 4:
            raise FpsParseError(
                f"expected 'source action probability target', got {line!r}", lineno
            )
        src_tok, label, prob_tok, dst_tok = tokens
        try:
            p = Fraction(prob_tok)
        except (ValueError, ZeroDivisionError):
            raise FpsParseError(f"malformed probability {prob_tok!r}", lineno) from None
        if not 0 < p <= 1:
            raise FpsParseError(f"probability {prob_tok} outside (0, 1]", lineno)
        if label not in label_index:
            label_index[label] = len(labels)
            labels.append(label)
        triple = (state_of(src_tok), label_index[label], state_of(dst_tok))
        if triple in prob:
            raise FpsParseError(f"duplicate transition {line!r}", lineno)
        prob[triple] = p
    actions = [Action(lbl, lbl == tau_label) for lbl in labels]
    if not any(a.is_tau for a in actions):
        actions.append(Action(tau_label, True))
    return Fps(names, actions, prob)


def write_fps(fps: Fps) -> str:
    """Render back to the line format (declaring isolated states explicitly)."""
    used = {s for s, _, _ in fps.prob} | {t for _, _, t in fps.prob}
    out = [f"state {fps.names[s]}" for s in range(fps.n) if s not in used]
    for s, a, t in sorted(fps.prob):
        p = fps.prob[(s, a, t)]
        out.append(f"{fps.names[s]} {fps.actions[a].label} {p} {fps.names[t]}")
    return "\n".join(out) + "\n"


def mu_p(fps: Fps, p: Path) -> Fraction:
    """Weight of a path: the product of its step probabilities, 0 off-system."""
    total = Fraction(1)
    here = fps.index(p.start)
    for action, state in p.steps:
        t = fps.index(state)
        a = fps.action_index(action.label)
        step = fps.prob.get((here, a, t), Fraction(0)) if a is not None else Fraction(0)
        if step == 0:
            return Fraction(0)
        total *= step
        here = t
    return total


def first_hit_set(
    fps: Fps, x: str, a_hat: str | None, Y: set[str], depth: int
) -> set[Path]:
    """Executions from ``x`` with trace tau* (``a_hat`` None) or tau*·a_hat,
    ending in ``Y``, with no shorter qualifying prefix; at most ``depth`` steps.
    """
    yi = {fps.index(y) for y in Y}
    tau_action = fps.actions[fps.tau]
    a_idx = None
    if a_hat is not None:
        a_idx = fps.action_index(a_hat)
        if a_idx is None or a_idx == fps.tau:
            raise ValueError(f"a_hat must be a visible action, got {a_hat!r}")
    out: set[Path] = set()

    def walk(p: Path, here: int, budget: int):
        if a_idx is None and here in yi:
            out.add(p)  # first hit; extensions would have this qualifying prefix
            return
        if budget == 0:
            return
        for a, t, _ in fps.row(here):
            if a == fps.tau:
                walk(p.step(tau_action, fps.names[t]), t, budget - 1)
            elif a == a_idx and t in yi:
                out.add(p.step(fps.actions[a], fps.names[t]))

    walk(Path(x), fps.index(x), depth)
    return out


def _solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination for a full-rank square rational system."""
    n = len(rows)
    m = [rows[i][:] + [rhs[i]] for i in range(n)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[pivot] = m[pivot], m[col]
        inv = m[col][col]
        m[col] = [v / inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [vr - factor * vc for vr, vc in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def _reach_vector(fps: Fps, a_idx: int | None, yi: frozenset[int]) -> list[Fraction]:
    """P(s, tau*a, Y) for every s, as the least solution of the step system.

    States that cannot contribute are pruned first (their value is 0); the
    remaining matrix is then nonsingular, because from every kept state some
    pruned-or-terminal exit has positive probability within n steps.
    """
    n = fps.n
    zero, one = Fraction(0), Fraction(1)
    base: set[int] = set()
    if a_idx is None:
        base = set(yi)
    else:
        for s in range(n):
            if any(a == a_idx and t in yi for a, t, _ in fps.row(s)):
                base.add(s)
    # Backward silent reachability to the base.
    can = set(base)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in can:
                continue
            if any(a == fps.tau and t in can for a, t, _ in fps.row(s)):
                can.add(s)
                changed = True
    values = [zero] * n
    if a_idx is None:
        for y in yi:
            values[y] = one
        unknowns = sorted(can - yi)
    else:
        unknowns = sorted(can)
    if not unknowns:
        return values
    pos = {s: i for i, s in enumerate(unknowns)}
    k = len(unknowns)
    rows = [[one if i == j else zero for j in range(k)] for i in range(k)]
    rhs = [zero] * k
    for s in unknowns:
        i = pos[s]
        for a, t, p in fps.row(s):
            if a_idx is None:
                if a != fps.tau:
                    continue
                if t in yi:
                    rhs[i] += p
                elif t in pos:
                    rows[i][pos[t]] -= p
            else:
                if a == fps.tau and t in pos:
                    rows[i][pos[t]] -= p
                elif a == a_idx and t in yi:
                    rhs[i] += p
    solution = _solve(rows, rhs)
    for s, v in zip(unknowns, solution):
        values[s] = v
    return values


def prob_reach(fps: Fps, x: str, a_hat: str | None, Y: set[str]) -> Fraction:
    """Exact P(x, tau*a_hat, Y); ``a_hat`` None means the silent-only trace."""
    a_idx = None
    if a_hat is not None:
        a_idx = fps.action_index(a_hat)
        if a_idx == fps.tau:
            raise ValueError("a_hat must be a visible action or None")
        if a_idx is None:
            return Fraction(0)
    return _reach_vector(fps, a_idx, frozenset(fps.index(y) for y in Y))[fps.index(x)]


def _signature_matrix(fps: Fps, part: Partition, cache=None):
    """Per-state signature maps (a_hat label or None, block) -> probability."""
    sigs: list[dict[tuple[str | None, int], Fraction]] = [{} for _ in range(fps.n)]
    for a_idx in (None, *fps.visible()):
        label = None if a_idx is None else fps.actions[a_idx].label
        for b, members in enumerate(part.blocks):
            key = (a_idx, frozenset(members))
            if cache is not None and key in cache:
                vector = cache[key]
            else:
                vector = _reach_vector(fps, a_idx, frozenset(members))
                if cache is not None:
                    cache[key] = vector
            for s in range(fps.n):
                if vector[s]:
                    sigs[s][(label, b)] = vector[s]
    return sigs


def prob_signature(fps: Fps, part: Partition, x: str) -> dict[tuple[str | None, int], Fraction]:
    """Signature of one state against a partition (nonzero entries only)."""
    return _signature_matrix(fps, part)[fps.index(x)]


def signature_sort_key(entry):
    """Sort key for ((a_hat label or None, block), value) signature items."""
    (label, block), _ = entry
    return ("" if label is None else label, block)


def delay_refine_history(fps: Fps) -> list[Partition]:
    """Refinement rounds from one block to the signature fixed point."""
    part = Partition.single(fps.n)
    history = [part]
    for _ in range(fps.n + 1):
        sigs = _signature_matrix(fps, part)
        new = Partition.from_labels(
            [
                (part.block_of[s], tuple(sorted(sigs[s].items(), key=signature_sort_key)))
                for s in range(fps.n)
            ]
        )
        if new == part:
            return history
        part = new
        history.append(part)
    raise AssertionError("refinement failed to stabilise")


def delay_refine(fps: Fps) -> Partition:
    """Coarsest partition whose blocks agree on every reachability signature."""
    return delay_refine_history(fps)[-1]


def _restricted_growth(n: int):
    """All set partitions of range(n), as block-label vectors."""
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield labels[:]
            return
        for lab in range(used + 1):
            labels[i] = lab
            yield from rec(i + 1, used + (1 if lab == used else 0))

    yield from rec(0, 0)


def brute_force_delay(fps: Fps) -> Partition:
    """Oracle: the coarsest valid partition by exhaustive lattice search.

    Valid means every pair of states sharing a block agrees on the
    reachability probability into every block, for the silent trace and every
    visible action.  The join of all valid partitions is returned and itself
    checked for validity.
    """
    n = fps.n
    if n > 8:
        raise ValueError(f"brute force limited to 8 states, got {n}")
    cache: dict = {}

    def valid(part: Partition) -> bool:
        for a_idx in (None, *fps.visible()):
            for members in part.blocks:
                key = (a_idx, frozenset(members))
                if key not in cache:
                    cache[key] = _reach_vector(fps, a_idx, frozenset(members))
                vector = cache[key]
                for block in part.blocks:
                    first = vector[block[0]]
                    if any(vector[s] != first for s in block[1:]):
                        return False
        return True

    parent = list(range(n))

    def find(s: int) -> int:
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for labels in _restricted_growth(n):
        part = Partition.from_labels(labels)
        if valid(part):
            for block in part.blocks:
                for s in block[1:]:
                    parent[find(s)] = find(block[0])
    join = Partition.from_labels([find(s) for s in range(n)])
    if not valid(join):
        raise AssertionError("join of valid partitions is not valid")
    return join


def minimize_fps(fps: Fps) -> tuple[Fps, Partition]:
    """Quotient by the delay partition, with block-level transition rows.

    The row of a block is the one-step distribution of any member conditioned
    on leaving the block (within-block silent mass dropped); stop and
    divergent blocks get an empty row.  All exit-positive members must agree
    (checked), and the quotient is validated by refining it jointly with the
    original system.
    """
    part = delay_refine(fps)
    block_of = part.block_of
    rows: list[dict[tuple[int, int], Fraction]] = []
    for b, members in enumerate(part.blocks):
        common: dict[tuple[int, int], Fraction] | None = None
        for x in members:
            total = sum((p for _, _, p in fps.row(x)), Fraction(0))
            within = sum(
                (p for a, t, p in fps.row(x) if a == fps.tau and block_of[t] == b),
                Fraction(0),
            )
            exit_mass = total - within
            if exit_mass == 0:
                continue
            row: dict[tuple[int, int], Fraction] = {}
            for a, t, p in fps.row(x):
                if a == fps.tau and block_of[t] == b:
                    continue
                key = (a, block_of[t])
                row[key] = row.get(key, Fraction(0)) + p / exit_mass
            if common is None:
                common = row
            elif common != row:
                raise AssertionError(
                    f"members of block {part.blocks[b]} disagree on exit rows"
                )
        rows.append(common or {})

    k = part.n_blocks
    names = [str(i) for i in range(k)]
    prob = {
        (b, a, c): p for b, row in enumerate(rows) for (a, c), p in row.items()
    }
    quotient = Fps(names, fps.actions, prob)

    # Joint refinement of original + quotient must pair each state with its block
    # and keep distinct blocks apart.
    prefix = "#q"
    while any(name.startswith(prefix) for name in fps.names):
        prefix += "#"
    joint_names = list(fps.names) + [f"{prefix}{i}" for i in range(k)]
    joint_prob: dict[Triple, Fraction] = dict(fps.prob)
    for (b, a, c), p in prob.items():
        joint_prob[(fps.n + b, a, fps.n + c)] = p
    joint = Fps(joint_names, fps.actions, joint_prob)
    joint_part = delay_refine(joint)
    for s in range(fps.n):
        if joint_part.block_of[s] != joint_part.block_of[fps.n + block_of[s]]:
            raise AssertionError("quotient failed the joint-refinement validation")
    if len({joint_part.block_of[fps.n + b] for b in range(k)}) != k:
        raise AssertionError("distinct quotient states merged in joint refinement")
    return quotient, part
