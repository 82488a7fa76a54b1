"""Shared random generators for the property suites.

All generators take an explicit ``random.Random`` so every suite is
reproducible from its seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from pathbisim.fps import Fps
from pathbisim.lts import Lts
from pathbisim.paths import TAU, Action, Path

VISIBLE = (Action("a"), Action("b"), Action("c"))


def random_lts(rng: random.Random, max_states: int = 8, acyclic_tau: bool = False) -> Lts:
    """A small random system: <= 8 states, <= 3 visible actions, silent
    density <= 1/2.  With ``acyclic_tau`` silent edges only go upward, so the
    silent part of the graph has no cycles."""
    n = rng.randint(2, max_states)
    actions = list(VISIBLE[: rng.randint(1, 3)]) + [Action("tau", True)]
    tau_idx = len(actions) - 1
    transitions = set()
    for _ in range(rng.randint(0, 2 * n + 2)):
        s, a, t = rng.randrange(n), rng.randrange(len(actions)), rng.randrange(n)
        if acyclic_tau and a == tau_idx and s >= t:
            continue
        transitions.add((s, a, t))
    return Lts([f"s{i}" for i in range(n)], actions, sorted(transitions))


def random_fps(rng: random.Random, max_states: int = 6) -> Fps:
    """A small random probabilistic system with denominators <= 4; roughly a
    quarter of the states are stops."""
    n = rng.randint(1, max_states)
    actions = list(VISIBLE[: rng.randint(1, 2)]) + [Action("tau", True)]
    prob: dict[tuple[int, int, int], Fraction] = {}
    for s in range(n):
        if rng.random() < 0.25:
            continue
        d = rng.randint(1, 4)
        cuts = sorted(rng.sample(range(1, d), k=rng.randint(0, min(2, d - 1)))) + [d]
        lo = 0
        for hi in cuts:
            key = (s, rng.randrange(len(actions)), rng.randrange(n))
            prob[key] = prob.get(key, Fraction(0)) + Fraction(hi - lo, d)
            lo = hi
    return Fps([f"s{i}" for i in range(n)], actions, prob)


def random_path(rng: random.Random, n_states: int = 5, max_len: int = 8) -> Path:
    """A random path over abstract states, with plenty of silent self-steps
    (they are what the stutter machinery is about)."""
    names = [f"v{i}" for i in range(n_states)]
    here = rng.choice(names)
    p = Path(here)
    for _ in range(rng.randint(0, max_len)):
        r = rng.random()
        if r < 0.35:
            p = p.step(TAU, here)
        elif r < 0.55:
            here = rng.choice(names)
            p = p.step(TAU, here)
        else:
            here = rng.choice(names)
            p = p.step(rng.choice(VISIBLE[:2]), here)
    return p


def random_state_map(rng: random.Random, n_states: int = 5, n_targets: int = 4):
    return {f"v{i}": f"w{rng.randrange(n_targets)}" for i in range(n_states)}


def inflate(rng: random.Random, p: Path) -> Path:
    """Insert silent self-steps at random positions: the result is stutter
    equivalent to ``p`` whenever ``p`` has no silent self-steps itself."""
    out = Path(p.start)
    for k in range(rng.randint(0, 2)):
        out = out.step(TAU, p.start)
    for action, state in p.steps:
        out = out.step(action, state)
        for k in range(rng.randint(0, 2)):
            out = out.step(TAU, state)
    return out


def refines(fine, coarse) -> bool:
    """Every block of ``fine`` is contained in one block of ``coarse``."""
    return all(
        len({coarse.block_of[s] for s in block}) == 1 for block in fine.blocks
    )
