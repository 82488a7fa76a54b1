"""Command-line front-end.

Subcommands: check, partition, minimize (equivalence work on .aut and .fps
inputs), prob-reach, audit (probabilistic systems), alpha-dump, paths
(inspection).  Exit status is 0 for "equivalent" (and success in general),
1 for "inequivalent", 2 for usage or input errors.  All fractions print
exactly as p/q.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path as FilePath

from . import fps as fps_mod
from . import lts as lts_mod
from .fps import Fps, delay_refine_history, mu_p, prob_signature
from .lts import Lts, Partition, Semantics, signature_automaton
from .paths import Path, map_path
from .valuation import audit_valuation


class CliError(Exception):
    pass


def _load(args) -> tuple[str, object]:
    """Read the input file; returns ('aut', Lts) or ('fps', Fps)."""
    path = FilePath(args.input)
    fmt = args.input_format
    if fmt is None:
        suffix = path.suffix.lstrip(".").lower()
        if suffix in ("aut", "fps"):
            fmt = suffix
        else:
            raise CliError(f"cannot infer format of {path.name!r}; pass --input-format")
    text = path.read_text()
    if fmt == "aut":
        return "aut", lts_mod.parse_aut(text, tau_label=args.tau_label)
    return "fps", fps_mod.parse_fps(text, tau_label=args.tau_label)


def _semantics(args, fmt: str) -> Semantics:
    if fmt == "fps":
        if args.semantics not in (None, "delay"):
            raise CliError("probabilistic inputs support only the delay semantics")
        return Semantics.DELAY
    if args.semantics is None:
        raise CliError("--semantics is required for .aut inputs")
    return Semantics(args.semantics)


def _block_names(names, members) -> str:
    return "{" + ",".join(names[s] for s in members) + "}"


def _emit(args, text_lines: list[str], payload) -> None:
    if args.output_format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# check


def _lts_fragment(lts: Lts, sem: Semantics, x: int, y: int) -> str | None:
    """Shortest signature word separating x from y, read at the round that
    split them."""
    history = lts_mod.refine_history(lts, sem)
    before = None
    for part in history:
        if not part.same_block(x, y):
            break
        before = part
    if before is None:
        return None
    a = signature_automaton(lts, before, x, sem)
    b = signature_automaton(lts, before, y, sem)
    word = _difference_word(a, b)
    if word is None:
        return None
    pieces = [_block_names(lts.names, before.blocks[a.initial_block])]
    for label, block in word:
        pieces += [label, _block_names(lts.names, before.blocks[block])]
    return " ".join(pieces)


def _difference_word(a, b):
    """Shortest word accepted by exactly one automaton (same initial block)."""
    if a.initial_block != b.initial_block:
        return ()
    ta, tb = a.successors(), b.successors()
    seen = {(0, 0)}
    queue = [((0, 0), ())]
    while queue:
        (sa, sb), word = queue.pop(0)
        for letter in sorted(set(ta[sa]) | set(tb[sb])):
            na, nb = ta[sa].get(letter), tb[sb].get(letter)
            grown = word + (letter,)
            if (na is None) != (nb is None):
                return grown
            if na is not None and (na, nb) not in seen:
                seen.add((na, nb))
                queue.append(((na, nb), grown))
    return None


def _fps_fragment(fps: Fps, x: int, y: int) -> str | None:
    history = delay_refine_history(fps)
    before = None
    for part in history:
        if not part.same_block(x, y):
            break
        before = part
    if before is None:
        return None
    sx = prob_signature(fps, before, fps.names[x])
    sy = prob_signature(fps, before, fps.names[y])
    for key in sorted(set(sx) | set(sy), key=lambda k: ("" if k[0] is None else k[0], k[1])):
        vx, vy = sx.get(key, Fraction(0)), sy.get(key, Fraction(0))
        if vx != vy:
            label, block = key
            word = "tau*" if label is None else f"tau* {label}"
            target = _block_names(fps.names, before.blocks[block])
            return (
                f"P({fps.names[x]}, {word}, {target}) = {vx} but "
                f"P({fps.names[y]}, {word}, {target}) = {vy}"
            )
    return None


def cmd_check(args) -> int:
    fmt, system = _load(args)
    sem = _semantics(args, fmt)
    if fmt == "aut":
        x, y = (system.index(name) for name in args.pair)
        part = lts_mod.refine(system, sem)
    else:
        x, y = (system.index(name) for name in args.pair)
        part = fps_mod.delay_refine(system)
    same = part.same_block(x, y)
    payload = {"semantics": sem.value, "pair": list(args.pair), "equivalent": same}
    if same:
        _emit(args, [f"equivalent ({sem.value}): {args.pair[0]} ~ {args.pair[1]}"], payload)
        return 0
    fragment = (
        _lts_fragment(system, sem, x, y) if fmt == "aut" else _fps_fragment(system, x, y)
    )
    lines = [f"inequivalent ({sem.value}): {args.pair[0]} vs {args.pair[1]}"]
    if fragment:
        payload["fragment"] = fragment
        lines.append(f"distinguishing signature fragment: {fragment}")
    _emit(args, lines, payload)
    return 1


# ---------------------------------------------------------------------------
# partition / minimize


def _partition_of(fmt: str, system, sem: Semantics) -> Partition:
    return lts_mod.refine(system, sem) if fmt == "aut" else fps_mod.delay_refine(system)


def cmd_partition(args) -> int:
    fmt, system = _load(args)
    sem = _semantics(args, fmt)
    part = _partition_of(fmt, system, sem)
    blocks = part.named_blocks(system.names)
    payload = {"semantics": sem.value, "blocks": blocks}
    _emit(args, [",".join("{" + ",".join(b) + "}" for b in blocks)], payload)
    return 0


def cmd_minimize(args) -> int:
    fmt, system = _load(args)
    sem = _semantics(args, fmt)
    if fmt == "aut":
        quotient, part = lts_mod.minimize(system, sem)
        rendered = lts_mod.write_aut(quotient)
    else:
        quotient, part = fps_mod.minimize_fps(system)
        rendered = fps_mod.write_fps(quotient)
    stem = FilePath(args.input)
    out_path = FilePath(args.output) if args.output else stem.with_suffix(f".min{stem.suffix}")
    map_path_ = FilePath(args.map) if args.map else stem.with_suffix(".map.json")
    out_path.write_text(rendered)
    state_map = {"semantics": sem.value, "blocks": part.named_blocks(system.names)}
    map_path_.write_text(json.dumps(state_map, indent=2, sort_keys=True) + "\n")
    _emit(
        args,
        [f"{part.n_blocks} states, written to {out_path} (state map: {map_path_})"],
        {"states": part.n_blocks, "output": str(out_path), "map": str(map_path_)},
    )
    return 0


# ---------------------------------------------------------------------------
# prob-reach / audit / alpha-dump / paths


def cmd_prob_reach(args) -> int:
    fmt, system = _load(args)
    if fmt != "fps":
        raise CliError("prob-reach needs a probabilistic (.fps) input")
    a_hat = None if args.action in ("eps", "") else args.action
    targets = set(args.targets.split(","))
    value = fps_mod.prob_reach(system, getattr(args, "from"), a_hat, targets)
    _emit(args, [str(value)], {"value": str(value)})
    return 0


def cmd_audit(args) -> int:
    fmt, system = _load(args)
    if fmt != "fps":
        raise CliError("audit needs a probabilistic (.fps) input")
    reports = audit_valuation(system, args.seed, args.trials)
    lines = [
        f"{r.law}: {r.trials} trials, {r.failures} failures"
        + (f" (witness: {r.witness})" if r.witness else "")
        for r in reports
    ]
    _emit(args, lines, [r.as_dict() for r in reports])
    return 0 if all(r.failures == 0 for r in reports) else 1


def cmd_alpha_dump(args) -> int:
    fmt, system = _load(args)
    if fmt != "aut":
        raise CliError("alpha-dump needs an .aut input")
    sem = _semantics(args, fmt)
    x = system.index(args.state)
    classes = lts_mod.alpha(system, x, sem, args.depth)
    rendered = sorted(
        map_path(lambda s: system.names[s], c.canonical).pretty() for c in classes
    )
    _emit(
        args,
        rendered,
        {"semantics": sem.value, "state": args.state, "depth": args.depth, "classes": rendered},
    )
    return 0


def cmd_paths(args) -> int:
    fmt, system = _load(args)
    x = args.state
    rows: list[tuple[str, str | None]] = []
    if fmt == "aut":
        start = system.index(x)

        def walk_lts(p: Path, here: int):
            named = map_path(lambda s: system.names[s], p)
            rows.append((named.pretty(), None))
            if len(p.steps) == args.depth:
                return
            for a, targets in sorted(system.succ(here).items()):
                for t in targets:
                    walk_lts(p.step(system.actions[a], t), t)

        walk_lts(Path(start), start)
    else:
        start = system.index(x)

        def walk_fps(p: Path, here: int):
            rows.append((p.pretty(), str(mu_p(system, p))))
            if len(p.steps) == args.depth:
                return
            for a, t, _ in system.row(here):
                walk_fps(p.step(system.actions[a], system.names[t]), t)

        walk_fps(Path(x), start)
    lines = [text if mu is None else f"{text}  mu={mu}" for text, mu in rows]
    payload = [
        {"path": text} if mu is None else {"path": text, "mu": mu} for text, mu in rows
    ]
    _emit(args, lines, payload)
    return 0


# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="pathbisim", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, semantics: bool = False):
        p.add_argument("input", help="system description (.aut or .fps)")
        p.add_argument("--input-format", choices=("aut", "fps"))
        p.add_argument("--tau-label", default="tau")
        p.add_argument("--output-format", choices=("text", "json"), default="text")
        if semantics:
            p.add_argument(
                "--semantics", choices=tuple(s.value for s in Semantics)
            )

    p = sub.add_parser("check", help="decide equivalence of a pair of states")
    common(p, semantics=True)
    p.add_argument("--pair", nargs=2, metavar=("X", "Y"), required=True)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("partition", help="print the equivalence blocks")
    common(p, semantics=True)
    p.set_defaults(run=cmd_partition)

    p = sub.add_parser("minimize", help="write the quotient system and state map")
    common(p, semantics=True)
    p.add_argument("--output", help="quotient file (default: INPUT.min.EXT)")
    p.add_argument("--map", help="state map JSON (default: INPUT.map.json)")
    p.set_defaults(run=cmd_minimize)

    p = sub.add_parser("prob-reach", help="exact reachability probability")
    common(p)
    p.add_argument("--from", required=True, metavar="STATE")
    p.add_argument("--action", default="eps", help="visible action, or 'eps' (default)")
    p.add_argument("--targets", required=True, help="comma-separated target states")
    p.set_defaults(run=cmd_prob_reach)

    p = sub.add_parser("audit", help="replay the valuation and measure laws")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500)
    p.set_defaults(run=cmd_audit)

    p = sub.add_parser("alpha-dump", help="print the encoded path classes of a state")
    common(p, semantics=True)
    p.add_argument("--state", required=True)
    p.add_argument("--depth", type=int, default=None)
    p.set_defaults(run=cmd_alpha_dump)

    p = sub.add_parser("paths", help="list executions from a state")
    common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--depth", type=int, default=5)
    p.set_defaults(run=cmd_paths)

    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.run(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
