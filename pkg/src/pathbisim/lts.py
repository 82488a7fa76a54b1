"""Labelled transition systems and silent-step equivalence checking.

Equivalence (branching / weak / eta / delay) is decided by partition
refinement: the signature of a state against the current partition is the
set of block-and-action words obtained from its encoded path set, collapsed
up to stuttering.  With silent cycles crossing blocks that set is infinite,
so signatures are represented as canonical minimal DFAs and compared
exactly.  A classical transfer-property oracle (pair deletion to the
greatest fixed point) is kept alongside for cross-checking.
"""

from __future__ import annotations

import hashlib
import re
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .paths import Action, Path, StutterClass, class_of, path

Letter = tuple[str, int]  # (action label, target block)


class Semantics(Enum):
    BRANCHING = "branching"
    WEAK = "weak"
    ETA = "eta"
    DELAY = "delay"


class AutParseError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Lts:
    """A finite labelled transition system with one designated silent action.

    States are indices into ``names``; ``transitions`` holds (source, action
    index, target) triples.
    """

    def __init__(self, names, actions, transitions, initial: int = 0):
        self.names: tuple[str, ...] = tuple(names)
        self.actions: tuple[Action, ...] = tuple(actions)
        self.transitions: tuple[tuple[int, int, int], ...] = tuple(sorted(set(transitions)))
        self.initial = initial
        n, m = len(self.names), len(self.actions)
        if len(set(self.names)) != n:
            raise ValueError("duplicate state names")
        taus = [i for i, a in enumerate(self.actions) if a.is_tau]
        if len(taus) != 1:
            raise ValueError("exactly one silent action is required")
        self.tau: int = taus[0]
        for s, a, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n and 0 <= a < m):
                raise ValueError(f"transition {(s, a, t)} out of range")
        if not 0 <= initial < n:
            raise ValueError("initial state out of range")
        self._index = {name: i for i, name in enumerate(self.names)}
        self._succ: list[dict[int, tuple[int, ...]]] | None = None

    @property
    def n(self) -> int:
        return len(self.names)

    def visible(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.actions)) if i != self.tau)

    def index(self, name: str) -> int:
        if name not in self._index:
            raise KeyError(f"unknown state {name!r}")
        return self._index[name]

    def succ(self, s: int) -> dict[int, tuple[int, ...]]:
        """Outgoing transitions of ``s`` as an action -> sorted targets map."""
        if self._succ is None:
            acc: list[dict[int, list[int]]] = [{} for _ in range(self.n)]
            for src, a, dst in self.transitions:
                acc[src].setdefault(a, []).append(dst)
            self._succ = [{a: tuple(sorted(ts)) for a, ts in row.items()} for row in acc]
        return self._succ[s]


_HEADER = re.compile(r"des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TRIPLE = re.compile(r'\(\s*([^,\s]+)\s*,\s*(?:"([^"]*)"|([^,\s")]+))\s*,\s*([^,\s)]+)\s*\)\s*$')
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")


def parse_aut(text: str, tau_label: str = "tau") -> Lts:
    """Parse an ``.aut`` description.

    Classic form uses numeric states; as an extension, states may instead all
    be bare identifiers (interned in order of first appearance).  The silent
    action is the one labelled ``tau_label`` (alias ``i`` is also accepted).
    """
    lines = text.splitlines()
    header = None
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if header is None:
            header = (lineno, line)
        else:
            body.append((lineno, line))
    if header is None:
        raise AutParseError("missing 'des (init, m, n)' header", 1)
    m_hdr = _HEADER.match(header[1])
    if not m_hdr:
        raise AutParseError(f"malformed header {header[1]!r}", header[0])
    initial, m_count, n_count = (int(g) for g in m_hdr.groups())
    if len(body) != m_count:
        raise AutParseError(
            f"header announces {m_count} transitions, found {len(body)}", header[0]
        )

    names: list[str] = []
    index: dict[str, int] = {}
    numeric: bool | None = None

    def state_of(token: str, lineno: int) -> int:
        nonlocal numeric
        is_num = token.isdigit()
        if numeric is None:
            numeric = is_num
        elif numeric != is_num:
            raise AutParseError(f"state token {token!r} mixes numeric and named styles", lineno)
        if is_num:
            value = int(token)
            if value >= n_count:
                raise AutParseError(f"state {value} out of range (n = {n_count})", lineno)
            return value
        if not _NAME.match(token):
            raise AutParseError(f"bad state token {token!r}", lineno)
        if token not in index:
            index[token] = len(names)
            names.append(token)
        return index[token]

    labels: list[str] = []
    label_index: dict[str, int] = {}
    triples: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int, int]] = set()
    for lineno, line in body:
        m_tr = _TRIPLE.match(line)
        if not m_tr:
            raise AutParseError(f"malformed transition {line!r}", lineno)
        src_tok, quoted, bare, dst_tok = m_tr.groups()
        label = quoted if quoted is not None else bare
        src = state_of(src_tok, lineno)
        dst = state_of(dst_tok, lineno)
        if label not in label_index:
            label_index[label] = len(labels)
            labels.append(label)
        triple = (src, label_index[label], dst)
        if triple in seen:
            raise AutParseError(f"duplicate transition {line!r}", lineno)
        seen.add(triple)
        triples.append(triple)

    if numeric is False:
        if len(names) != n_count:
            raise AutParseError(
                f"header announces {n_count} states, found {len(names)} names", header[0]
            )
        if initial >= n_count:
            raise AutParseError(f"initial state {initial} out of range", header[0])
    else:
        names = [str(i) for i in range(n_count)]
        if initial >= n_count:
            raise AutParseError(f"initial state {initial} out of range", header[0])

    silent = {tau_label, "i"}
    actions = [Action(lbl, lbl in silent) for lbl in labels]
    if not any(a.is_tau for a in actions):
        actions.append(Action(tau_label, True))
    if sum(a.is_tau for a in actions) != 1:
        raise AutParseError("more than one silent action label in use", header[0])
    return Lts(names, actions, triples, initial)


def write_aut(lts: Lts) -> str:
    """Render an ``Lts`` in ``.aut`` form (numeric when names are canonical)."""
    numeric = lts.names == tuple(str(i) for i in range(lts.n))
    if not numeric:
        used = {s for s, _, t in lts.transitions} | {t for _, _, t in lts.transitions}
        missing = [lts.names[i] for i in range(lts.n) if i not in used]
        if missing:
            raise ValueError(f"named .aut form cannot declare isolated states: {missing}")
    out = [f"des ({lts.initial}, {len(lts.transitions)}, {lts.n})"]
    for s, a, t in lts.transitions:
        out.append(f'({lts.names[s]},"{lts.actions[a].label}",{lts.names[t]})')
    return "\n".join(out) + "\n"


def weak_closure(lts: Lts) -> list[list[bool]]:
    """Reflexive-transitive closure of the silent step, as a boolean matrix."""
    n = lts.n
    closure = []
    for s in range(n):
        row = [False] * n
        queue = deque([s])
        row[s] = True
        while queue:
            u = queue.popleft()
            for t in lts.succ(u).get(lts.tau, ()):
                if not row[t]:
                    row[t] = True
                    queue.append(t)
        closure.append(row)
    return closure


def _tau_plus(lts: Lts, wc: list[list[bool]]) -> list[list[bool]]:
    """Reachability by one or more silent steps."""
    n = lts.n
    plus = [[False] * n for _ in range(n)]
    for s in range(n):
        for u in lts.succ(s).get(lts.tau, ()):
            for t in range(n):
                if wc[u][t]:
                    plus[s][t] = True
    return plus


# ---------------------------------------------------------------------------
# Encoded path sets (enumeration form, for fixtures and cross-checks).


def _executions_one_visible(lts: Lts, x: int, depth: int):
    """All executions from x with at most one visible action, <= depth steps."""
    found = []

    def walk(p: Path, seen_visible: bool):
        found.append((p, seen_visible))
        if len(p.steps) == depth:
            return
        s = p.state_at(len(p.steps))
        for a, targets in sorted(lts.succ(s).items()):
            if a != lts.tau and seen_visible:
                continue
            action = lts.actions[a]
            for t in targets:
                walk(p.step(action, t), seen_visible or a != lts.tau)

    walk(Path(x), False)
    return found


def alpha(lts: Lts, x: int, sem: Semantics, depth: int | None = None) -> frozenset[StutterClass]:
    """The encoded path set of ``x`` at ``sem``, as stutter classes.

    Enumerates executions of at most ``depth`` steps (default: generous for
    systems whose silent part is loop-free).  This is a reference surface for
    tests and the ``alpha-dump`` command; refinement never truncates because
    it works on automata instead.
    """
    if depth is None:
        depth = lts.n * (len(lts.actions) + 1)
    tau_action = lts.actions[lts.tau]
    out: set[StutterClass] = set()
    for p, seen_visible in _executions_one_visible(lts, x, depth):
        k = len(p.steps)
        if sem is Semantics.BRANCHING:
            # Traces stay in tau* + tau*·visible: nothing after a visible step.
            if seen_visible and _first_visible(p) != k - 1:
                continue
            out.add(class_of(p))
            continue
        if k == 0:
            out.add(class_of(p))
            continue
        if seen_visible:
            # Silent segments are recorded by their endpoints only: the
            # matching side of the respective game may reach an endpoint
            # through blocks the challenger never visits, so intermediate
            # states of a silent walk cannot be observable.
            i = _first_visible(p)
            a, end = p.steps[i][0], p.steps[-1][1]
            if sem is Semantics.WEAK:
                out.add(class_of(path(x, a, end)))
            elif sem is Semantics.ETA:
                lead = ((tau_action, p.state_at(i)),) if i else ()
                out.add(class_of(Path(x, lead + ((a, end),))))
            else:  # delay
                trail = ((tau_action, end),) if i < k - 1 else ()
                out.add(class_of(Path(x, ((a, p.steps[i][1]),) + trail)))
        else:
            # A pure silent run contributes one jump to its endpoint.
            out.add(class_of(path(x, tau_action, p.steps[-1][1])))
    return frozenset(out)


def _first_visible(p: Path) -> int:
    for i, (a, _) in enumerate(p.steps):
        if not a.is_tau:
            return i
    raise ValueError("no visible step")


# ---------------------------------------------------------------------------
# Signature automata.


@dataclass(frozen=True)
class SignatureAutomaton:
    """Canonical minimal DFA for a state's signature language.

    Words alternate block ids and action labels, starting with
    ``initial_block``; the DFA proper runs over (label, block) letters with
    state 0 initial (numbering is breadth-first under sorted letters, so two
    automata are equal iff the languages and initial blocks are).  Every DFA
    state accepts: the language is prefix closed, and undefined letters are
    rejections.
    """

    initial_block: int
    num_states: int
    edges: tuple[tuple[int, Letter, int], ...]

    @property
    def key(self):
        return (self.initial_block, self.num_states, self.edges)

    def hash_hex(self) -> str:
        return hashlib.sha256(repr(self.key).encode()).hexdigest()

    def successors(self) -> dict[int, dict[Letter, int]]:
        table: dict[int, dict[Letter, int]] = {s: {} for s in range(self.num_states)}
        for src, letter, dst in self.edges:
            table[src][letter] = dst
        return table

    def words(self, max_steps: int) -> set[tuple]:
        """All accepted words of at most ``max_steps`` letters, flattened."""
        table = self.successors()
        out: set[tuple] = set()

        def walk(state: int, word: tuple, budget: int):
            out.add((self.initial_block,) + word)
            if budget == 0:
                return
            for (label, block), dst in table[state].items():
                walk(dst, word + (label, block), budget - 1)

        walk(0, (), max_steps)
        return out


def _nfa_edges(lts: Lts, block_of, x: int, sem: Semantics):
    """Emission NFA for the signature of ``x``: nodes -> [(letter|None, node)].

    Nodes are ('pre', s) during the leading silent phase, ('lead', s) once a
    leading endpoint is fixed, ('post', u) after the observable step, and
    'sink' once nothing more can be observed.  ``None`` letters are silent
    moves of the automaton (within-block stuttering).
    """
    wc = weak_closure(lts)
    tau = lts.tau
    tlabel = lts.actions[tau].label
    edges: dict[object, list[tuple[Letter | None, object]]] = {}
    n = lts.n

    def add(node, letter, target):
        edges.setdefault(node, []).append((letter, target))
        edges.setdefault(target, [])

    def emit(b_src: int, target_block: int) -> Letter | None:
        return None if target_block == b_src else (tlabel, target_block)

    edges[("pre", x)] = []
    if sem is Semantics.BRANCHING:
        # Explicit leading silent walk, then one observable step.  The
        # matching walk of an equivalent state crosses blocks in lockstep,
        # so every crossing of the walk is observable here.
        reach = [s for s in range(n) if wc[x][s]]
        for s in reach:
            for t in lts.succ(s).get(tau, ()):
                add(("pre", s), emit(block_of[s], block_of[t]), ("pre", t))
            for a in lts.visible():
                label = lts.actions[a].label
                for u in lts.succ(s).get(a, ()):
                    add(("pre", s), (label, block_of[u]), "sink")
    elif sem is Semantics.ETA:
        # Leading walk recorded by its endpoint, one observable jump with
        # the trailing walk folded into its endpoint.
        tp = _tau_plus(lts, wc)
        for s in range(n):
            if not wc[x][s]:
                continue
            add(("pre", x), emit(block_of[x], block_of[s]), ("lead", s))
            for a in lts.visible():
                label = lts.actions[a].label
                for u in lts.succ(s).get(a, ()):
                    for t in range(n):
                        if wc[u][t]:
                            add(("lead", s), (label, block_of[t]), "sink")
        for t in range(n):
            if tp[x][t] and block_of[t] != block_of[x]:
                add(("pre", x), (tlabel, block_of[t]), "sink")
    elif sem is Semantics.WEAK:
        tp = _tau_plus(lts, wc)
        for u in range(n):
            if not wc[x][u]:
                continue
            for a in lts.visible():
                label = lts.actions[a].label
                for v in lts.succ(u).get(a, ()):
                    for t in range(n):
                        if wc[v][t]:
                            add(("pre", x), (label, block_of[t]), "sink")
        for t in range(n):
            if tp[x][t] and block_of[t] != block_of[x]:
                add(("pre", x), (tlabel, block_of[t]), "sink")
    else:
        # Delay: invisible leading walk, observable step to its direct
        # target, trailing walk recorded by its endpoint.
        tp = _tau_plus(lts, wc)
        for s in range(n):
            if not wc[x][s]:
                continue
            for a in lts.visible():
                label = lts.actions[a].label
                for u in lts.succ(s).get(a, ()):
                    add(("pre", x), (label, block_of[u]), ("post", u))
        for t in range(n):
            if tp[x][t] and block_of[t] != block_of[x]:
                add(("pre", x), (tlabel, block_of[t]), "sink")
        targets = sorted({node[1] for node in edges if node != "sink" and node[0] == "post"})
        for u in targets:
            for t in range(n):
                if tp[u][t] and block_of[t] != block_of[u]:
                    add(("post", u), (tlabel, block_of[t]), "sink")
    return edges


def signature_automaton(lts: Lts, part: "Partition", x: int, sem: Semantics) -> SignatureAutomaton:
    """Canonical minimal DFA of the block-word signature of ``x``."""
    block_of = part.block_of
    nfa = _nfa_edges(lts, block_of, x, sem)
    nodes = sorted(nfa, key=repr)
    node_id = {node: i for i, node in enumerate(nodes)}
    eps: list[list[int]] = [[] for _ in nodes]
    moves: list[dict[Letter, set[int]]] = [{} for _ in nodes]
    for node, out in nfa.items():
        for letter, target in out:
            if letter is None:
                eps[node_id[node]].append(node_id[target])
            else:
                moves[node_id[node]].setdefault(letter, set()).add(node_id[target])

    def closure(states: frozenset[int]) -> frozenset[int]:
        todo = list(states)
        seen = set(states)
        while todo:
            u = todo.pop()
            for v in eps[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return frozenset(seen)

    start = closure(frozenset({node_id[("pre", x)]}))
    subsets = {start: 0}
    order = [start]
    dfa_edges: list[tuple[int, Letter, int]] = []
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        by_letter: dict[Letter, set[int]] = {}
        for u in subset:
            for letter, targets in moves[u].items():
                by_letter.setdefault(letter, set()).update(targets)
        for letter in sorted(by_letter):
            target = closure(frozenset(by_letter[letter]))
            if target not in subsets:
                subsets[target] = len(order)
                order.append(target)
                queue.append(target)
            dfa_edges.append((subsets[subset], letter, subsets[target]))

    num, min_edges = _minimize_dfa(len(order), dfa_edges)
    return SignatureAutomaton(block_of[x], num, min_edges)


def _minimize_dfa(num: int, edges: list[tuple[int, Letter, int]]):
    """Merge states of a partial all-accepting DFA with equal residual languages."""
    out: list[dict[Letter, int]] = [{} for _ in range(num)]
    for src, letter, dst in edges:
        out[src][letter] = dst
    block = [0] * num
    while True:
        keys = [
            tuple(sorted((letter, block[dst]) for letter, dst in out[s].items()))
            for s in range(num)
        ]
        remap: dict[tuple, int] = {}
        new_block = []
        for s in range(num):
            group = (block[s], keys[s])
            if group not in remap:
                remap[group] = len(remap)
            new_block.append(remap[group])
        if new_block == block:
            break
        block = new_block
    merged = {
        (block[src], letter, block[dst]) for src, letter, dst in edges
    }
    return len(set(block)), _renumber_from(block[0], len(set(block)), merged)


def _renumber_from(start: int, num: int, edges: set[tuple[int, Letter, int]]):
    """Relabel so the start state is 0, preserving reachability order (BFS)."""
    table: dict[int, list[tuple[Letter, int]]] = {s: [] for s in range(num)}
    for src, letter, dst in edges:
        table[src].append((letter, dst))
    order = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for letter, v in sorted(table[u]):
            if v not in order:
                order[v] = len(order)
                queue.append(v)
    return tuple(
        sorted((order[src], letter, order[dst]) for src, letter, dst in edges)
    )


# ---------------------------------------------------------------------------
# Partitions and refinement.


@dataclass(frozen=True)
class Partition:
    """A partition of 0..n-1 with canonical block ids (by smallest member)."""

    block_of: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        groups: dict[object, list[int]] = {}
        for state, label in enumerate(labels):
            groups.setdefault(label, []).append(state)
        ordered = sorted(groups.values(), key=lambda b: b[0])
        block_of = [0] * len(labels)
        for i, members in enumerate(ordered):
            for s in members:
                block_of[s] = i
        return cls(tuple(block_of), tuple(tuple(b) for b in ordered))

    @classmethod
    def single(cls, n: int) -> "Partition":
        return cls.from_labels([0] * n)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def same_block(self, x: int, y: int) -> bool:
        return self.block_of[x] == self.block_of[y]

    def named_blocks(self, names) -> list[list[str]]:
        return [[names[s] for s in block] for block in self.blocks]


def refine_history(lts: Lts, sem: Semantics) -> list[Partition]:
    """Refinement rounds from the single-block partition to the fixed point."""
    part = Partition.single(lts.n)
    history = [part]
    for _ in range(lts.n + 1):
        keys = [signature_automaton(lts, part, x, sem).key for x in range(lts.n)]
        new = Partition.from_labels([(part.block_of[x], keys[x]) for x in range(lts.n)])
        if new == part:
            return history
        part = new
        history.append(part)
    raise AssertionError("refinement failed to stabilise")


def refine(lts: Lts, sem: Semantics) -> Partition:
    """The coarsest partition stable under the signature of ``sem``."""
    return refine_history(lts, sem)[-1]


def classical_partition(lts: Lts, sem: Semantics) -> Partition:
    """Oracle: greatest fixed point of the classical transfer properties."""
    n = lts.n
    wc = weak_closure(lts)
    require_pre = sem in (Semantics.BRANCHING, Semantics.ETA)
    trailing = sem in (Semantics.ETA, Semantics.WEAK)
    rel = [[True] * n for _ in range(n)]

    def answers(x: int, a: int, x2: int, y: int) -> bool:
        if a == lts.tau and rel[x2][y]:
            return True  # silent move answered by stuttering
        for y1 in range(n):
            if not wc[y][y1]:
                continue
            if require_pre and not rel[x][y1]:
                continue
            for y2 in lts.succ(y1).get(a, ()):
                if trailing:
                    if any(wc[y2][y3] and rel[x2][y3] for y3 in range(n)):
                        return True
                elif rel[x2][y2]:
                    return True
        return False

    def transfers(x: int, y: int) -> bool:
        return all(
            answers(x, a, x2, y)
            for a, targets in lts.succ(x).items()
            for x2 in targets
        )

    changed = True
    while changed:
        changed = False
        for x in range(n):
            for y in range(x + 1, n):
                if rel[x][y] and not (transfers(x, y) and transfers(y, x)):
                    rel[x][y] = rel[y][x] = False
                    changed = True
    return Partition.from_labels([tuple(rel[x]) for x in range(n)])


def equivalent(lts: Lts, x: int, y: int, sem: Semantics, check_oracle: bool = False) -> bool:
    """Whether two states are equivalent at ``sem``.

    With ``check_oracle`` the result is asserted against the classical
    transfer-property fixed point (slow; meant for debugging).
    """
    part = refine(lts, sem)
    same = part.same_block(x, y)
    if check_oracle:
        oracle = classical_partition(lts, sem)
        if oracle != part:
            raise AssertionError(f"refine disagrees with the classical oracle at {sem}")
    return same


def minimize(lts: Lts, sem: Semantics) -> tuple[Lts, Partition]:
    """Quotient by the ``sem`` partition; within-block silent steps vanish."""
    part = refine(lts, sem)
    block = part.block_of
    quotient = set()
    for s, a, t in lts.transitions:
        if a == lts.tau and block[s] == block[t]:
            continue
        quotient.add((block[s], a, block[t]))
    names = [str(i) for i in range(part.n_blocks)]
    return Lts(names, lts.actions, sorted(quotient), block[lts.initial]), part
