"""Finite paths over labelled systems: traces, stutter collapse, prefix order.

A path is a start state plus a sequence of (action, state) steps.  Silent
self-steps (a tau action that stays in the same state) carry no observable
information; collapsing them yields the path's stutter invariant, and two
paths are stutter equivalent when their invariants coincide.  Most functions
here are tiny; the point is to fix one canonical set of definitions that the
rest of the package (and its property tests) can lean on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Union

State = Hashable


@dataclass(frozen=True)
class Action:
    """A transition label; ``is_tau`` marks the silent action."""

    label: str
    is_tau: bool = False

    def __str__(self) -> str:
        return self.label


#: Default silent action used by tests and builders.
TAU = Action("tau", is_tau=True)

Word = tuple[Action, ...]


@dataclass(frozen=True)
class Path:
    """A start state followed by alternating (action, state) steps."""

    start: State
    steps: tuple[tuple[Action, State], ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def state_at(self, i: int) -> State:
        """State reached after the first ``i`` steps (``i = 0`` is the start)."""
        return self.start if i == 0 else self.steps[i - 1][1]

    def states(self) -> tuple[State, ...]:
        return (self.start,) + tuple(s for _, s in self.steps)

    def step(self, action: Action, state: State) -> "Path":
        """The one-step extension of this path."""
        return Path(self.start, self.steps + ((action, state),))

    def prefix(self, k: int) -> "Path":
        """The prefix with the first ``k`` steps."""
        if not 0 <= k <= len(self.steps):
            raise ValueError(f"prefix length {k} out of range")
        return Path(self.start, self.steps[:k])

    def pretty(self) -> str:
        parts = [str(self.start)]
        for action, state in self.steps:
            parts += [str(action), str(state)]
        return "(" + ", ".join(parts) + ")"


def path(start: State, *rest: object) -> Path:
    """Build a path from alternating action, state arguments.

    ``path(x, a, y, b, z)`` is the path x -a-> y -b-> z.
    """
    if len(rest) % 2:
        raise ValueError("expected alternating action, state arguments")
    steps = []
    for i in range(0, len(rest), 2):
        action = rest[i]
        if not isinstance(action, Action):
            raise TypeError(f"expected an Action at argument {i + 1}, got {action!r}")
        steps.append((action, rest[i + 1]))
    return Path(start, tuple(steps))


def trace(p: Path) -> Word:
    """The word of actions along ``p``."""
    return tuple(a for a, _ in p.steps)


def last(p: Path) -> State:
    """The final state of ``p``."""
    return p.steps[-1][1] if p.steps else p.start


@dataclass(frozen=True)
class StutterBasis:
    """Monotone index map from positions of a path onto its stutter invariant.

    ``image_index[i]`` is the position that the state after ``i`` steps
    occupies in the collapsed path; it starts at 0, grows by 0 or 1 per step,
    and stays flat exactly on silent self-steps.
    """

    image_index: tuple[int, ...]


def stutter_basis(p: Path) -> StutterBasis:
    """The index map collapsing the silent self-steps of ``p``."""
    idx = [0]
    here = p.start
    for action, state in p.steps:
        flat = action.is_tau and state == here
        idx.append(idx[-1] if flat else idx[-1] + 1)
        here = state
    return StutterBasis(tuple(idx))


def stutter_invariant(p: Path) -> Path:
    """The path obtained by dropping every silent self-step of ``p``."""
    kept = []
    here = p.start
    for action, state in p.steps:
        if not (action.is_tau and state == here):
            kept.append((action, state))
        here = state
    return Path(p.start, tuple(kept))


def stutter_equiv(p: Path, q: Path) -> bool:
    """Whether two paths agree after collapsing silent self-steps."""
    return stutter_invariant(p) == stutter_invariant(q)


StateMap = Union[Callable[[State], State], Mapping[State, State]]


def _as_fn(f: StateMap) -> Callable[[State], State]:
    return f.__getitem__ if isinstance(f, Mapping) else f


def map_path(f: StateMap, p: Path) -> Path:
    """Apply a state map (callable or mapping) to every state of ``p``."""
    g = _as_fn(f)
    return Path(g(p.start), tuple((a, g(s)) for a, s in p.steps))


@dataclass(frozen=True)
class StutterClass:
    """A stutter-equivalence class, held as its collapsed representative."""

    canonical: Path

    def __post_init__(self) -> None:
        if stutter_invariant(self.canonical) != self.canonical:
            raise ValueError("canonical path of a class must have no silent self-steps")

    @property
    def start(self) -> State:
        return self.canonical.start


def class_of(p: Path) -> StutterClass:
    """The stutter class of ``p``."""
    return StutterClass(stutter_invariant(p))


def map_class(f: StateMap, c: StutterClass) -> StutterClass:
    """The image class under a state map (well defined up to stuttering)."""
    return class_of(map_path(f, c.canonical))


def prefix_leq(p: Path, q: Path) -> bool:
    """Whether ``p`` is a prefix of ``q``."""
    return p.start == q.start and q.steps[: len(p.steps)] == p.steps


def class_leq(c: StutterClass, d: StutterClass) -> bool:
    """Prefix order on stutter classes (via the collapsed representatives)."""
    return prefix_leq(c.canonical, d.canonical)


def hreflect(p1: Path, p2: Path) -> Path | None:
    """A prefix of ``p2`` stutter equivalent to ``p1``, or None.

    When the collapsed ``p1`` is a prefix of the collapsed ``p2``, some prefix
    of ``p2`` collapses to exactly that path; scanning short to long finds it.
    """
    target = stutter_invariant(p1)
    for k in range(len(p2.steps) + 1):
        q = p2.prefix(k)
        if stutter_invariant(q) == target:
            return q
    return None
