"""JSON instance files: schema, model construction and instance generators."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
from referencing import Registry
from referencing.jsonschema import DRAFT202012

from . import oracle
from .encodings import ENCODERS, Dfa, EncodingResult
from .model import Model, SlidekitError, UsageError
from .propagator import SlideConstraint, build_chain
from .specs import spec_from_json


class InputError(SlidekitError):
    """An instance file that cannot be parsed, validated or built."""


_INT = {"type": "integer"}
_INTS = {"type": "array", "items": _INT}
_NAMES = {"type": "array", "items": {"type": "string"}, "minItems": 1}
_POS = {"type": "integer", "minimum": 1}


def _tagged(tag: str, branches: list[dict]) -> list[dict]:
    """if/then per discriminator value, so errors point into the matching branch."""
    return [
        {"if": {"properties": {tag: b["properties"][tag]}, "required": [tag]}, "then": b}
        for b in branches
    ]


_SPEC_BRANCHES = [
    {
        "properties": {
            "kind": {"const": "table"},
            "arity": _POS,
            "tuples": {"type": "array", "items": _INTS},
        },
        "required": ["tuples"],
        "additionalProperties": False,
    },
    {
        "properties": {
            "kind": {"const": "sum"},
            "arity": _POS,
            "lower": _INT,
            "upper": _INT,
            "values": _INTS,
        },
        "required": ["arity", "lower", "upper"],
        "additionalProperties": False,
    },
    {
        "properties": {
            "kind": {"const": "dfa"},
            "transitions": {"type": "array", "items": {**_INTS, "minItems": 3, "maxItems": 3}},
        },
        "required": ["transitions"],
        "additionalProperties": False,
    },
    {"properties": {"kind": {"const": "lex"}}, "additionalProperties": False},
    {
        "properties": {"kind": {"const": "counter"}, "inner": {"$ref": "spec"}},
        "required": ["inner"],
        "additionalProperties": False,
    },
    {
        "properties": {"kind": {"const": "predicate"}, "name": {"type": "string"}, "arity": _POS},
        "required": ["name", "arity"],
        "additionalProperties": False,
    },
]

SPEC_SCHEMA = {
    "$id": "spec",
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": [b["properties"]["kind"]["const"] for b in _SPEC_BRANCHES]}},
    "allOf": _tagged("kind", _SPEC_BRANCHES),
}

_DFA = {
    "type": "object",
    "properties": {
        "states": _INTS,
        "alphabet": _INTS,
        "transitions": {"type": "array", "items": {**_INTS, "minItems": 3, "maxItems": 3}},
        "initial": _INT,
        "accepting": _INTS,
    },
    "required": ["transitions", "initial", "accepting"],
    "additionalProperties": False,
}


def _constraint(kind: str, props: dict, required: list[str]) -> dict:
    return {
        "properties": {
            "type": {"const": kind},
            "name": {"type": "string"},
            "baseline": {"enum": ["decomposed"]},
            **props,
        },
        "required": ["type", *required],
        "additionalProperties": False,
    }


_CONSTRAINT_BRANCHES = [
    _constraint("slide", {"vars": _NAMES, "k": _POS, "step": _POS, "spec": {"$ref": "spec"}}, ["vars", "k", "spec"]),
    _constraint("among", {"vars": _NAMES, "values": _INTS, "count": {"type": "string"}}, ["vars", "values", "count"]),
    _constraint(
        "among_seq",
        {"vars": _NAMES, "values": _INTS, "lower": _INT, "upper": _INT, "q": _POS},
        ["vars", "values", "lower", "upper", "q"],
    ),
    _constraint("sliding_sum", {"vars": _NAMES, "lower": _INT, "upper": _INT, "q": _POS}, ["vars", "lower", "upper", "q"]),
    _constraint("regular", {"vars": _NAMES, "dfa": _DFA}, ["vars", "dfa"]),
    _constraint(
        "stretch",
        {"vars": _NAMES, "lengths": {"type": "array", "items": {**_INTS, "minItems": 3, "maxItems": 3}}},
        ["vars", "lengths"],
    ),
    _constraint("lex_leq", {"x": _NAMES, "y": _NAMES}, ["x", "y"]),
    _constraint("contiguity", {"vars": _NAMES}, ["vars"]),
    _constraint("cardpath", {"vars": _NAMES, "spec": {"$ref": "spec"}, "count": {"type": "string"}}, ["vars", "spec", "count"]),
]

CONSTRAINT_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": [b["properties"]["type"]["const"] for b in _CONSTRAINT_BRANCHES]}},
    "allOf": _tagged("type", _CONSTRAINT_BRANCHES),
}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"name": {"type": "string"}, "lower": _INT, "upper": _INT},
                "required": ["name", "lower", "upper"],
                "additionalProperties": False,
            },
        },
        "constraints": {"type": "array", "items": CONSTRAINT_SCHEMA},
        "seed": _INT,
        "expected_domains": {"type": "object", "additionalProperties": _INTS},
    },
    "required": ["variables", "constraints"],
    "additionalProperties": False,
}

_VALIDATOR = None


def _validator() -> jsonschema.Draft202012Validator:
    global _VALIDATOR
    if _VALIDATOR is None:
        registry = Registry().with_resource("spec", DRAFT202012.create_resource(SPEC_SCHEMA))
        _VALIDATOR = jsonschema.Draft202012Validator(INSTANCE_SCHEMA, registry=registry)
    return _VALIDATOR


def validate(doc: dict) -> None:
    e = jsonschema.exceptions.best_match(_validator().iter_errors(doc))
    if e is not None:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {e.message}")


def load_instance(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validate(doc)
    return doc


@dataclass
class Posted:
    """One instance constraint as built into a model."""

    doc: dict
    constraints: list[SlideConstraint]
    encoding: EncodingResult | None
    scope: list[int]
    holds: object  # callable over values of ``scope``


@dataclass
class Built:
    model: Model
    names: dict[str, int]
    posted: list[Posted] = field(default_factory=list)

    @property
    def decision_vars(self) -> list[int]:
        return [v.id for v in self.model.variables if not v.aux]


def _dfa(d: dict) -> Dfa:
    return Dfa.from_triples(
        [tuple(t) for t in d["transitions"]],
        d["initial"],
        d["accepting"],
        states=d.get("states"),
        alphabet=d.get("alphabet"),
    )


def _encode(model: Model, c: dict, ids) -> tuple[EncodingResult, list[int], object]:
    """Encoding, semantic scope and semantic test for one constraint document."""
    kind = c["type"]
    if kind == "slide":
        xs = ids(c["vars"])
        spec = spec_from_json(c["spec"])
        k, step = c["k"], c.get("step", 1)
        slide = SlideConstraint(build_chain(xs, k, step), spec, name=c.get("name"))
        starts = range(0, len(xs) - k + 1, step)
        return EncodingResult([], slide), xs, lambda t: all(spec.evaluate(t[o:o + k]) for o in starts)
    if kind == "among":
        xs, n = ids(c["vars"]), ids([c["count"]])[0]
        vals = frozenset(c["values"])
        enc = ENCODERS[kind](model, xs, vals, n)
        return enc, xs + [n], lambda t: oracle.among_count(t[:-1], vals) == t[-1]
    if kind == "among_seq":
        xs = ids(c["vars"])
        args = (c["lower"], c["upper"], c["q"])
        vals = frozenset(c["values"])
        enc = ENCODERS[kind](model, *args, xs, vals)
        return enc, xs, lambda t: oracle.among_seq_holds(t, *args, vals)
    if kind == "sliding_sum":
        xs = ids(c["vars"])
        args = (c["lower"], c["upper"], c["q"])
        enc = ENCODERS[kind](model, *args, xs)
        return enc, xs, lambda t: oracle.sliding_sum_holds(t, *args)
    if kind == "regular":
        xs = ids(c["vars"])
        dfa = _dfa(c["dfa"])
        return ENCODERS[kind](model, dfa, xs), xs, lambda t: oracle.dfa_accepts(dfa, t)
    if kind == "stretch":
        xs = ids(c["vars"])
        lengths = {v: (lo, hi) for v, lo, hi in c["lengths"]}
        return ENCODERS[kind](model, xs, lengths), xs, lambda t: oracle.stretch_holds(t, lengths)
    if kind == "lex_leq":
        xs, ys = ids(c["x"]), ids(c["y"])
        n = len(xs)
        return ENCODERS[kind](model, xs, ys), xs + ys, lambda t: oracle.lex_leq_holds(t[:n], t[n:])
    if kind == "contiguity":
        xs = ids(c["vars"])
        return ENCODERS[kind](model, xs), xs, oracle.contiguity_holds
    if kind == "cardpath":
        xs, n = ids(c["vars"]), ids([c["count"]])[0]
        spec = spec_from_json(c["spec"])
        enc = ENCODERS[kind](model, spec, xs, n)
        return enc, xs + [n], lambda t: oracle.cardpath_count(spec, t[:-1]) == t[-1]
    raise InputError(f"unknown constraint type {kind!r}")


def build_model(doc: dict, variant: str = "slide", only: int | None = None) -> Built:
    """Build a model from a validated instance.

    ``variant="decomposed"`` posts every window separately; a constraint with
    ``"baseline": "decomposed"`` is decomposed in either variant. ``only``
    restricts the model to a single constraint (by index).
    """
    if variant not in ("slide", "decomposed"):
        raise UsageError(f"unknown variant {variant!r}")
    model = Model()
    names: dict[str, int] = {}
    try:
        for v in doc["variables"]:
            if v["name"] in names:
                raise InputError(f"duplicate variable name {v['name']!r}")
            names[v["name"]] = model.new_variable(v["lower"], v["upper"], name=v["name"]).id
    except UsageError as exc:
        raise InputError(str(exc)) from None

    def ids(seq):
        try:
            return [names[s] for s in seq]
        except KeyError as exc:
            raise InputError(f"unknown variable {exc.args[0]!r}") from None

    built = Built(model, names)
    for i, c in enumerate(doc["constraints"]):
        if only is not None and i != only:
            continue
        try:
            enc, scope, holds = _encode(model, c, ids)
        except (UsageError, KeyError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"constraint {i} ({c['type']}): {exc}") from None
        decomposed = variant == "decomposed" or c.get("baseline") == "decomposed"
        enc.post(model, decomposed=decomposed)
        built.posted.append(Posted(c, enc.constraints(decomposed), enc, scope, holds))
    return built


def dump_instance(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# -- generators ----------------------------------------------------------------

def amongseq_roster(rng: random.Random, n: int, d: int, q: int, lower: int, upper: int, density: float) -> dict:
    """Shift sequence: value d-1 ("night") limited per q-window, a day off every q+1 days.

    A ``density`` fraction of the days is pre-assigned a random shift.
    """
    if d < 2:
        raise UsageError("roster instances need at least two shift values")
    names = [f"s{i + 1}" for i in range(n)]
    variables = []
    for name in names:
        if rng.random() < density:
            v = rng.randrange(d)
            variables.append({"name": name, "lower": v, "upper": v})
        else:
            variables.append({"name": name, "lower": 0, "upper": d - 1})
    constraints = [
        {"type": "among_seq", "vars": names, "values": [d - 1], "lower": lower, "upper": upper, "q": q},
    ]
    if n >= q + 1:
        constraints.append({"type": "among_seq", "vars": names, "values": [0], "lower": 1, "upper": q + 1, "q": q + 1})
    return {"variables": variables, "constraints": constraints}


def random_table(rng: random.Random, n: int, d: int, k: int, density: float, step: int = 1) -> dict:
    """Slide over a random table holding ``round(density * d**k)`` tuples."""
    names = [f"x{i + 1}" for i in range(n)]
    universe = [tuple((i // d**p) % d for p in reversed(range(k))) for i in range(d**k)]
    size = round(density * len(universe))
    tuples = sorted(rng.sample(universe, size))
    return {
        "variables": [{"name": s, "lower": 0, "upper": d - 1} for s in names],
        "constraints": [
            {
                "type": "slide",
                "vars": names,
                "k": k,
                "step": step,
                "spec": {"kind": "table", "arity": k, "tuples": [list(t) for t in tuples]},
            }
        ],
    }


FAMILIES = ("amongseq-roster", "random-table")


def generate(family: str, count: int, seed: int, n=None, d=None, k=None, q=None, lower=None, upper=None, density=None):
    """Yield ``(instance_id, document)`` pairs; deterministic given ``seed``.

    Unset sizes are drawn per instance: n in 50..500, q (or k) in 3..7.
    """
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}; choose from {FAMILIES}")
    rng = random.Random(seed)
    for i in range(count):
        ni = n if n is not None else rng.randint(50, 500)
        if family == "amongseq-roster":
            di = d if d is not None else 3
            qi = q if q is not None else (k if k is not None else rng.randint(3, 7))
            qi = min(qi, ni)
            lo = lower if lower is not None else 1
            hi = upper if upper is not None else max(lo, qi // 2)
            dens = density if density is not None else 0.1
            doc = amongseq_roster(rng, ni, di, qi, lo, hi, dens)
        else:
            di = d if d is not None else 3
            ki = k if k is not None else (q if q is not None else rng.randint(2, 3))
            ki = min(ki, ni)
            dens = density if density is not None else 0.5
            doc = random_table(rng, ni, di, ki, dens)
        doc["seed"] = seed
        yield f"{family}-{seed}-{i:03d}", doc
