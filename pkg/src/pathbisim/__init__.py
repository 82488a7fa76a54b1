"""Path-based decision procedures for stutter-insensitive behavioural
equivalences on labelled transition systems and fully probabilistic systems.

The package is organised around explicit finite paths: alternating
state/action sequences, their stutter invariants, and encodings of a state's
behaviour as a set of path classes.  On top of that sit partition refiners
for the branching, weak, eta and delay equivalences, an exact-arithmetic
probabilistic layer, and a valuation algebra on upper sets of paths with a
randomised law audit.
"""

from .paths import (
    TAU,
    Action,
    Path,
    StutterBasis,
    StutterClass,
    class_leq,
    class_of,
    hreflect,
    last,
    map_class,
    map_path,
    path,
    prefix_leq,
    stutter_basis,
    stutter_equiv,
    stutter_invariant,
    trace,
)
from .lts import (
    AutParseError,
    Lts,
    Partition,
    Semantics,
    SignatureAutomaton,
    alpha,
    classical_partition,
    equivalent,
    minimize,
    parse_aut,
    refine,
    refine_history,
    signature_automaton,
    weak_closure,
    write_aut,
)
from .fps import (
    Fps,
    FpsParseError,
    FpsValidationError,
    brute_force_delay,
    delay_refine,
    delay_refine_history,
    first_hit_set,
    minimize_fps,
    mu_p,
    parse_fps,
    prob_reach,
    prob_signature,
    write_fps,
)
from .valuation import (
    UpperSet,
    ValuationReport,
    alpha_measure,
    audit_valuation,
    class_future_measure,
    class_future_measure_truncated,
    separation_closure,
    upset_intersect,
    upset_normalize,
    upset_union,
    valuation,
)

__version__ = "0.1.0"

__all__ = [
    "TAU",
    "Action",
    "Path",
    "StutterBasis",
    "StutterClass",
    "class_leq",
    "class_of",
    "hreflect",
    "last",
    "map_class",
    "map_path",
    "path",
    "prefix_leq",
    "stutter_basis",
    "stutter_equiv",
    "stutter_invariant",
    "trace",
    "AutParseError",
    "Lts",
    "Partition",
    "Semantics",
    "SignatureAutomaton",
    "alpha",
    "classical_partition",
    "equivalent",
    "minimize",
    "parse_aut",
    "refine",
    "refine_history",
    "signature_automaton",
    "weak_closure",
    "write_aut",
    "Fps",
    "FpsParseError",
    "FpsValidationError",
    "brute_force_delay",
    "delay_refine",
    "delay_refine_history",
    "first_hit_set",
    "minimize_fps",
    "mu_p",
    "parse_fps",
    "prob_reach",
    "prob_signature",
    "write_fps",
    "UpperSet",
    "ValuationReport",
    "alpha_measure",
    "audit_valuation",
    "class_future_measure",
    "class_future_measure_truncated",
    "separation_closure",
    "upset_intersect",
    "upset_normalize",
    "upset_union",
    "valuation",
    "__version__",
]
