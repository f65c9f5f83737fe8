"""Sliding-sequence global constraints rewritten as a single slide.

Every encoder allocates its auxiliary variables in the given model and
returns an :class:`EncodingResult`; nothing is posted until
:meth:`EncodingResult.post`. Sequence variables must be distinct: a variable
repeated along the sequence would break the chain structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import Model, UsageError, Variable, var_ids
from .propagator import SlideConstraint, WindowChain, build_chain
from .specs import CounterStep, DfaTransition, LexStep, SlidSpec, SumInRange


@dataclass
class EncodingResult:
    aux_vars: list[Variable]
    slide: SlideConstraint
    boundary: list[tuple[int, frozenset[int]]] = field(default_factory=list)

    def constraints(self, decomposed: bool = False) -> list[SlideConstraint]:
        return self.slide.decompose() if decomposed else [self.slide]

    def post(self, model: Model, decomposed: bool = False) -> None:
        """Apply the boundary restrictions and post the slide (or its windows)."""
        for var, allowed in self.boundary:
            model.restrict(var, allowed)
        for c in self.constraints(decomposed):
            model.post(c)


@dataclass
class Dfa:
    """Deterministic automaton over integer states and symbols."""

    states: list[int]
    alphabet: list[int]
    transitions: dict[tuple[int, int], int]
    initial: int
    accepting: frozenset[int]

    def __post_init__(self):
        self.states = sorted(set(self.states))
        self.alphabet = sorted(set(self.alphabet))
        self.accepting = frozenset(self.accepting)
        known = set(self.states)
        if self.initial not in known:
            raise UsageError(f"initial state {self.initial} is not a state")
        if not self.accepting <= known:
            raise UsageError("accepting states must be states")
        for (s, a), t in self.transitions.items():
            if s not in known or t not in known:
                raise UsageError(f"transition ({s}, {a}) -> {t} uses an unknown state")

    @classmethod
    def from_triples(cls, triples, initial, accepting, states=None, alphabet=None) -> "Dfa":
        transitions: dict[tuple[int, int], int] = {}
        for s, a, t in triples:
            if transitions.get((s, a), t) != t:
                raise UsageError(f"nondeterministic transition on ({s}, {a})")
            transitions[(s, a)] = t
        states = set(states or ()) | {initial, *accepting} | {s for s, _ in transitions} | set(transitions.values())
        if alphabet is None:
            alphabet = {a for _, a in transitions}
        return cls(list(states), list(alphabet), transitions, initial, frozenset(accepting))

    def relation(self) -> list[tuple[int, int, int]]:
        return sorted((s, a, t) for (s, a), t in self.transitions.items())

    def accepts(self, word: Iterable[int]) -> bool:
        state = self.initial
        for a in word:
            state = self.transitions.get((state, a))
            if state is None:
                return False
        return state in self.accepting


def _sequence(model: Model, X: Sequence, what: str = "X") -> list[int]:
    ids = var_ids(X)
    if not ids:
        raise UsageError(f"{what} must be non-empty")
    if len(set(ids)) != len(ids):
        raise UsageError(f"{what} repeats a variable")
    for i in ids:
        if not 0 <= i < len(model.variables):
            raise UsageError(f"unknown variable {i}")
    return ids


def _counters(model: Model, count: int, prefix: str) -> list[Variable]:
    # the i-th counter (0-based) can only hold 0..i
    return [model.new_variable(0, i, name=f"{prefix}.M{i + 1}", aux=True) for i in range(count)]


def _tag(model: Model, kind: str) -> str:
    return f"_{kind}{len(model.constraints)}_{len(model.variables)}"


def encode_among(model: Model, X: Sequence, values: Iterable[int], N) -> EncodingResult:
    """``|{i : X_i in values}| = N`` via a counter chain ``(M_i, X_i, M_{i+1})``."""
    xs = _sequence(model, X)
    n_id = var_ids([N])[0]
    if n_id in xs:
        raise UsageError("the count variable cannot occur in X")
    vals = frozenset(int(v) for v in values)
    tag = _tag(model, "among")
    ms = _counters(model, len(xs), tag)
    seq = []
    for m, x in zip(ms, xs):
        seq += [m.id, x]
    seq.append(n_id)
    slide = SlideConstraint(build_chain(seq, 3, 2), CounterStep(SumInRange(1, 1, 1, vals)), name=tag)
    return EncodingResult(ms, slide, [(ms[0].id, frozenset({0})), (n_id, frozenset(range(len(xs) + 1)))])


def _check_window_params(n: int, q: int, lower: int, upper: int) -> None:
    if not 1 <= q <= n:
        raise UsageError(f"window length {q} must be within 1..{n}")
    if lower > upper:
        raise UsageError(f"lower {lower} > upper {upper}")


def encode_among_seq(model: Model, lower: int, upper: int, q: int, X: Sequence, values: Iterable[int]) -> EncodingResult:
    """Every ``q`` consecutive variables hold between ``lower`` and ``upper`` values from ``values``."""
    xs = _sequence(model, X)
    _check_window_params(len(xs), q, lower, upper)
    spec = SumInRange(q, lower, upper, frozenset(int(v) for v in values))
    return EncodingResult([], SlideConstraint(build_chain(xs, q, 1), spec, name=_tag(model, "among_seq")))


def encode_sliding_sum(model: Model, lower: int, upper: int, q: int, X: Sequence) -> EncodingResult:
    xs = _sequence(model, X)
    _check_window_params(len(xs), q, lower, upper)
    spec = SumInRange(q, lower, upper)
    return EncodingResult([], SlideConstraint(build_chain(xs, q, 1), spec, name=_tag(model, "sliding_sum")))


def encode_regular(model: Model, dfa: Dfa, X: Sequence) -> EncodingResult:
    """``X`` spells a word accepted by ``dfa``; state variables ``Q_0..Q_n`` are interleaved."""
    xs = _sequence(model, X)
    tag = _tag(model, "regular")
    qs = [model.new_variable_from(dfa.states, name=f"{tag}.Q{i}", aux=True) for i in range(len(xs) + 1)]
    seq = [qs[0].id]
    for x, q in zip(xs, qs[1:]):
        seq += [x, q.id]
    slide = SlideConstraint(build_chain(seq, 3, 2), DfaTransition(dfa.relation()), name=tag)
    boundary = [(qs[0].id, frozenset({dfa.initial})), (qs[-1].id, dfa.accepting)]
    return EncodingResult(qs, slide, boundary)


def stretch_dfa(alphabet: Iterable[int], lengths: Mapping[int, tuple[int, int]], n: int) -> Dfa:
    """Automaton for "every maximal run of value v has length within lengths[v]".

    State 0 is the start; state ids for ``(v, run)`` follow in alphabet order.
    Values missing from ``lengths`` may form runs of any length. Maxima are
    clamped to ``n``; a value whose minimum exceeds ``n`` can never close a run.
    """
    alphabet = sorted(set(alphabet))
    bounds = {}
    for v in alphabet:
        lo, hi = lengths.get(v, (1, n))
        if lo < 1 or lo > hi:
            raise UsageError(f"bad stretch bounds {lo}..{hi} for value {v}")
        bounds[v] = (lo, min(hi, n))
    state: dict[tuple[int, int], int] = {}
    for v in alphabet:
        for r in range(1, bounds[v][1] + 1):
            state[(v, r)] = len(state) + 1
    transitions: dict[tuple[int, int], int] = {}
    for v in alphabet:
        transitions[(0, v)] = state[(v, 1)]
        lo, hi = bounds[v]
        for r in range(1, hi + 1):
            if r < hi:
                transitions[(state[(v, r)], v)] = state[(v, r + 1)]
            if r >= lo:
                for w in alphabet:
                    if w != v:
                        transitions[(state[(v, r)], w)] = state[(w, 1)]
    accepting = frozenset(s for (v, r), s in state.items() if r >= bounds[v][0])
    return Dfa([0, *state.values()], alphabet, transitions, 0, accepting)


def encode_stretch(model: Model, X: Sequence, lengths: Mapping[int, tuple[int, int]]) -> EncodingResult:
    xs = _sequence(model, X)
    alphabet = set()
    for x in xs:
        alphabet.update(model.domain(x).values())
    alphabet.update(lengths)
    return encode_regular(model, stretch_dfa(alphabet, lengths, len(xs)), xs)


def encode_lex_leq(model: Model, X: Sequence, Y: Sequence) -> EncodingResult:
    """``X <=lex Y`` with equality flags ``B_1..B_{n+1}`` in windows ``(B_i, X_i, Y_i, B_{i+1})``."""
    xs = _sequence(model, X, "X")
    ys = _sequence(model, Y, "Y")
    if len(xs) != len(ys):
        raise UsageError("X and Y must have the same length")
    if set(xs) & set(ys):
        raise UsageError("X and Y must not share variables")
    tag = _tag(model, "lex")
    bs = [model.new_variable(0, 1, name=f"{tag}.B{i + 1}", aux=True) for i in range(len(xs) + 1)]
    seq = [bs[0].id]
    for x, y, b in zip(xs, ys, bs[1:]):
        seq += [x, y, b.id]
    slide = SlideConstraint(build_chain(seq, 4, 3), LexStep(), name=tag)
    return EncodingResult(bs, slide, [(bs[0].id, frozenset({1}))])


def contiguity_dfa() -> Dfa:
    # 0*1*0*: 0 = leading zeros, 1 = inside the block, 2 = trailing zeros
    return Dfa.from_triples([(0, 0, 0), (0, 1, 1), (1, 1, 1), (1, 0, 2), (2, 0, 2)], 0, {0, 1, 2})


def encode_contiguity(model: Model, X: Sequence) -> EncodingResult:
    return encode_regular(model, contiguity_dfa(), X)


def encode_cardpath(model: Model, C: SlidSpec, X: Sequence, N) -> EncodingResult:
    """``C`` holds on exactly ``N`` of the ``n-k+1`` windows of ``X``.

    Windows are ``(M_i, X_i..X_{i+k-1}, M_{i+1})`` under ``CounterStep(C)``
    with ``M_1 = 0`` and ``N`` standing in for the last counter, so GAC on
    this one slide is GAC on the cardinality path constraint.
    """
    xs = _sequence(model, X)
    k = C.arity
    m = len(xs) - k + 1
    if m < 1:
        raise UsageError(f"sequence of length {len(xs)} is shorter than the arity {k}")
    n_id = var_ids([N])[0]
    if n_id in xs:
        raise UsageError("the count variable cannot occur in X")
    tag = _tag(model, "cardpath")
    ms = _counters(model, m, tag)
    ends = [mv.id for mv in ms] + [n_id]
    windows = [[ends[i], *xs[i:i + k], ends[i + 1]] for i in range(m)]
    slide = SlideConstraint(WindowChain(windows), CounterStep(C), name=tag)
    return EncodingResult(ms, slide, [(ms[0].id, frozenset({0})), (n_id, frozenset(range(m + 1)))])


ENCODERS = {
    "among": encode_among,
    "among_seq": encode_among_seq,
    "sliding_sum": encode_sliding_sum,
    "regular": encode_regular,
    "stretch": encode_stretch,
    "lex_leq": encode_lex_leq,
    "contiguity": encode_contiguity,
    "cardpath": encode_cardpath,
}
