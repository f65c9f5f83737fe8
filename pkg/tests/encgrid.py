"""Parameter grids for checking each encoding against its direct meaning.

A case builds a fresh model with the encoding posted and returns the scope of
original variables, their domains and the semantic membership test. The check
enumerates the encoded model with the oracle, projects onto the scope and
compares with the direct enumeration.
"""

import itertools
import random

from slidekit import (
    Dfa,
    ExtensionalTable,
    Model,
    encode_among,
    encode_among_seq,
    encode_cardpath,
    encode_contiguity,
    encode_lex_leq,
    encode_regular,
    encode_sliding_sum,
    encode_stretch,
    named_predicate,
)
from slidekit import oracle

# the oracle cap is a guard on the raw product; the encoded models are large
# products but the early window checks keep the walk small
CAP = 10**15
MAX_N = 5
MAX_D = 3


def subsets(xs):
    return [frozenset(c) for r in range(len(xs) + 1) for c in itertools.combinations(xs, r)]


def _seq(m, n, d):
    return [m.new_variable(0, d - 1, name=f"X{i + 1}") for i in range(n)]


def among(n, d, values):
    m = Model()
    X = _seq(m, n, d)
    N = m.new_variable(0, n, name="N")
    encode_among(m, X, values, N).post(m)
    return m, X + [N], lambda t: oracle.among_count(t[:n], values) == t[n]


def among_seq(n, d, q, lo, hi, values):
    m = Model()
    X = _seq(m, n, d)
    encode_among_seq(m, lo, hi, q, X, values).post(m)
    return m, X, lambda t: oracle.among_seq_holds(t, lo, hi, q, values)


def sliding_sum(n, d, q, lo, hi):
    m = Model()
    X = _seq(m, n, d)
    encode_sliding_sum(m, lo, hi, q, X).post(m)
    return m, X, lambda t: oracle.sliding_sum_holds(t, lo, hi, q)


def regular(n, d, dfa):
    m = Model()
    X = _seq(m, n, d)
    encode_regular(m, dfa, X).post(m)
    return m, X, lambda t: oracle.dfa_accepts(dfa, t)


def stretch(n, d, lengths):
    m = Model()
    X = _seq(m, n, d)
    encode_stretch(m, X, lengths).post(m)
    return m, X, lambda t: oracle.stretch_holds(t, lengths)


def lex_leq(n, d):
    m = Model()
    X = _seq(m, n, d)
    Y = [m.new_variable(0, d - 1, name=f"Y{i + 1}") for i in range(n)]
    encode_lex_leq(m, X, Y).post(m)
    return m, X + Y, lambda t: oracle.lex_leq_holds(t[:n], t[n:])


def contiguity(n, d):
    m = Model()
    X = _seq(m, n, d)
    encode_contiguity(m, X).post(m)
    return m, X, oracle.contiguity_holds


def cardpath(n, d, spec):
    m = Model()
    X = _seq(m, n, d)
    count = n - spec.arity + 1
    N = m.new_variable(0, count, name="N")
    encode_cardpath(m, spec, X, N).post(m)
    return m, X + [N], lambda t: oracle.cardpath_count(spec, t[:n]) == t[n]


def random_dfa(rng: random.Random, states: int, d: int) -> Dfa:
    triples = [(s, a, rng.randrange(states)) for s in range(states) for a in range(d) if rng.random() < 0.8]
    accepting = {s for s in range(states) if rng.random() < 0.5}
    return Dfa.from_triples(triples, 0, accepting, states=range(states), alphabet=range(d))


def random_tables(rng: random.Random, d: int, k: int, count: int):
    universe = list(itertools.product(range(d), repeat=k))
    return [ExtensionalTable(rng.sample(universe, rng.randint(0, len(universe))), arity=k) for _ in range(count)]


def cardpath_specs(rng: random.Random, d: int):
    specs = []
    for k in (1, 2):
        specs += [named_predicate(p, k) for p in ("true", "false")]
        specs += random_tables(rng, d, k, 3)
    specs += [named_predicate(p, 2) for p in ("eq", "neq", "lt", "le")]
    return specs


STRETCH_OPTIONS = [None, (1, 1), (2, 2), (1, 2), (2, "n"), (3, "n+1"), ("n+1", "n+2")]


def _bound(b, n):
    return {"n": n, "n+1": n + 1, "n+2": n + 2}.get(b, b)


def cases(kind: str, seed: int = 0):
    """Yield ``(label, thunk)`` for every grid point of one encoding."""
    rng = random.Random(seed)
    for n in range(1, MAX_N + 1):
        for d in range(1, MAX_D + 1):
            if kind == "among":
                for vals in subsets(range(d)):
                    yield f"n={n} d={d} v={sorted(vals)}", lambda n=n, d=d, v=vals: among(n, d, v)
            elif kind == "among_seq":
                for q in range(1, n + 1):
                    for lo in range(q + 1):
                        for hi in range(lo, q + 1):
                            for vals in subsets(range(d)):
                                yield (f"n={n} d={d} q={q} l={lo} u={hi} v={sorted(vals)}",
                                       lambda n=n, d=d, q=q, lo=lo, hi=hi, v=vals: among_seq(n, d, q, lo, hi, v))
            elif kind == "sliding_sum":
                for q in range(1, n + 1):
                    top = q * (d - 1)
                    for lo in range(top + 2):
                        for hi in range(lo, top + 2):
                            yield (f"n={n} d={d} q={q} l={lo} u={hi}",
                                   lambda n=n, d=d, q=q, lo=lo, hi=hi: sliding_sum(n, d, q, lo, hi))
            elif kind == "regular":
                for states in (1, 2, 3):
                    for r in range(8):
                        dfa = random_dfa(rng, states, d)
                        yield f"n={n} d={d} dfa={dfa.relation()} acc={sorted(dfa.accepting)}", \
                            lambda n=n, d=d, dfa=dfa: regular(n, d, dfa)
            elif kind == "stretch":
                for combo in itertools.product(STRETCH_OPTIONS, repeat=d):
                    lengths = {v: (_bound(b[0], n), _bound(b[1], n)) for v, b in enumerate(combo) if b}
                    if any(lo > hi for lo, hi in lengths.values()):
                        continue
                    yield f"n={n} d={d} lengths={lengths}", lambda n=n, d=d, L=lengths: stretch(n, d, L)
            elif kind == "lex_leq":
                yield f"n={n} d={d}", lambda n=n, d=d: lex_leq(n, d)
            elif kind == "contiguity":
                yield f"n={n} d={d}", lambda n=n, d=d: contiguity(n, d)
            elif kind == "cardpath":
                for spec in cardpath_specs(rng, d):
                    if spec.arity <= n:
                        yield f"n={n} d={d} C={spec!r}", lambda n=n, d=d, s=spec: cardpath(n, d, s)
            else:
                raise ValueError(kind)


KINDS = ("among", "among_seq", "sliding_sum", "regular", "stretch", "lex_leq", "contiguity", "cardpath")


def check(thunk) -> bool:
    m, scope, holds = thunk()
    doms = [v.domain.values() for v in scope]
    # domains of originals are untouched by posting, except N which the boundary
    # already limits to the count range it had anyway
    sols = oracle.enumerate_solutions(m, CAP)
    return oracle.project(sols, scope) == oracle.semantic_solutions(doms, holds)
