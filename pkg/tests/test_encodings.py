import pytest

from slidekit import (
    Dfa,
    Model,
    Outcome,
    encode_among,
    encode_among_seq,
    encode_cardpath,
    encode_contiguity,
    encode_lex_leq,
    encode_regular,
    encode_sliding_sum,
    encode_stretch,
    fixpoint,
    named_predicate,
)
from slidekit.encodings import stretch_dfa
from slidekit.model import UsageError

import encgrid

A, B = 0, 1


def seq(m, n, d=2):
    return [m.new_variable(0, d - 1, name=f"X{i + 1}") for i in range(n)]


def run(m, enc):
    enc.post(m)
    m.schedule_all()
    return fixpoint(m)


def doms(vs):
    return [v.domain.values() for v in vs]


def test_among_examples():
    m = Model()
    X = seq(m, 2)
    N = m.new_variable(0, 2)
    m.assign(X[0], 1)
    m.assign(N, 1)
    assert run(m, encode_among(m, X, {1}, N)) is Outcome.FIXPOINT
    assert doms(X) == [[1], [0]]

    for fixed, want in ((0, [0, 2]), (4, [1])):
        m = Model()
        X = seq(m, 4, 3)
        N = m.new_variable(0, 4)
        m.assign(N, fixed)
        run(m, encode_among(m, X, {1}, N))
        assert doms(X) == [want] * 4


def test_among_counter_domains():
    m = Model()
    X = seq(m, 3)
    N = m.new_variable(0, 10)
    enc = encode_among(m, X, {1}, N)
    assert [v.domain.values() for v in enc.aux_vars] == [[0], [0, 1], [0, 1, 2]]
    enc.post(m)
    assert N.domain.values() == [0, 1, 2, 3]


def test_among_seq_examples():
    m = Model()
    X = seq(m, 3)
    m.assign(X[1], 1)
    run(m, encode_among_seq(m, 1, 1, 2, X, {1}))
    assert doms(X) == [[0], [1], [0]]

    m = Model()
    X = seq(m, 5, 3)
    run(m, encode_among_seq(m, 0, 3, 3, X, {1}))
    assert doms(X) == [[0, 1, 2]] * 5

    m = Model()
    X = seq(m, 5, 3)
    run(m, encode_among_seq(m, 3, 3, 3, X, {1, 2}))
    assert doms(X) == [[1, 2]] * 5


def test_sliding_sum_examples():
    m = Model()
    X = seq(m, 3)
    m.assign(X[0], 1)
    m.assign(X[1], 1)
    run(m, encode_sliding_sum(m, 1, 2, 3, X))
    assert doms(X) == [[1], [1], [0]]

    m = Model()
    X = seq(m, 4, 3)
    assert run(m, encode_sliding_sum(m, 0, 6, 3, X)) is Outcome.FIXPOINT
    assert doms(X) == [[0, 1, 2]] * 4

    m = Model()
    X = [m.new_variable(1, 3) for _ in range(4)]
    assert run(m, encode_sliding_sum(m, 0, 2, 3, X)) is Outcome.FAILURE


def no_bb():
    # state 1 means the last symbol was b
    return Dfa.from_triples([(0, A, 0), (0, B, 1), (1, A, 0)], 0, {0, 1})


def test_regular_examples():
    m = Model()
    X = seq(m, 3)
    m.assign(X[1], B)
    run(m, encode_regular(m, no_bb(), X))
    assert doms(X) == [[A], [B], [A]]

    m = Model()
    X = seq(m, 4, 3)
    anything = Dfa.from_triples([(0, a, 0) for a in range(3)], 0, {0})
    run(m, encode_regular(m, anything, X))
    assert doms(X) == [[0, 1, 2]] * 4

    m = Model()
    X = seq(m, 3)
    assert run(m, encode_regular(m, Dfa.from_triples([(0, A, 0)], 0, set()), X)) is Outcome.FAILURE


def test_regular_state_variables():
    m = Model()
    X = seq(m, 3)
    enc = encode_regular(m, no_bb(), X)
    assert len(enc.aux_vars) == 4
    assert [len(w) for w in enc.slide.chain.windows] == [3, 3, 3]
    assert enc.slide.chain.windows[1] == (enc.aux_vars[1].id, X[1].id, enc.aux_vars[2].id)


def test_stretch_examples():
    m = Model()
    X = seq(m, 2)
    m.assign(X[0], A)
    run(m, encode_stretch(m, X, {A: (2, 2)}))
    assert doms(X) == [[A], [A]]

    m = Model()
    X = seq(m, 4, 3)
    run(m, encode_stretch(m, X, {v: (1, 4) for v in range(3)}))
    assert doms(X) == [[0, 1, 2]] * 4

    m = Model()
    X = [m.new_variable(1, 1) for _ in range(3)]
    assert run(m, encode_stretch(m, X, {1: (4, 6)})) is Outcome.FAILURE


def test_stretch_dfa_state_count():
    dfa = stretch_dfa([0, 1], {0: (1, 3), 1: (2, 9)}, 4)
    assert len(dfa.states) == 3 + 4 + 1
    assert dfa.accepts([0, 1, 1, 0]) and not dfa.accepts([0, 1, 0])


def test_lex_examples():
    m = Model()
    X = [m.new_variable(1, 1), m.new_variable(0, 1)]
    Y = [m.new_variable(1, 1), m.new_variable(0, 0)]
    run(m, encode_lex_leq(m, X, Y))
    assert doms(X) == [[1], [0]]

    m = Model()
    X = [m.new_variable(0, 0)] + seq(m, 2, 3)
    Y = [m.new_variable(1, 1)] + seq(m, 2, 3)
    run(m, encode_lex_leq(m, X, Y))
    assert doms(X[1:] + Y[1:]) == [[0, 1, 2]] * 4

    m = Model()
    X = [m.new_variable(v, v) for v in (2, 0, 1)]
    Y = [m.new_variable(v, v) for v in (2, 0, 1)]
    assert run(m, encode_lex_leq(m, X, Y)) is Outcome.FIXPOINT


def test_contiguity_examples():
    m = Model()
    X = seq(m, 4)
    m.assign(X[0], 1)
    m.assign(X[2], 1)
    run(m, encode_contiguity(m, X))
    assert doms(X) == [[1], [1], [1], [0, 1]]

    m = Model()
    X = [m.new_variable(0, 0) for _ in range(4)]
    assert run(m, encode_contiguity(m, X)) is Outcome.FIXPOINT

    m = Model()
    X = seq(m, 1)
    run(m, encode_contiguity(m, X))
    assert doms(X) == [[0, 1]]


def test_cardpath_examples():
    eq = named_predicate("eq", 2)
    m = Model()
    X = seq(m, 3)
    N = m.new_variable(2, 2)
    run(m, encode_cardpath(m, eq, X, N))
    assert doms(X) == [[0, 1]] * 3 and N.domain.values() == [2]

    m = Model()
    X = seq(m, 3)
    N = m.new_variable(2, 2)
    m.assign(X[0], 0)
    run(m, encode_cardpath(m, eq, X, N))
    assert doms(X) == [[0], [0], [0]]

    true = named_predicate("true", 2)
    m = Model()
    X = seq(m, 4, 3)
    N = m.new_variable(3, 3)
    assert run(m, encode_cardpath(m, true, X, N)) is Outcome.FIXPOINT
    assert doms(X) == [[0, 1, 2]] * 4
    m = Model()
    X = seq(m, 4, 3)
    N = m.new_variable(2, 2)
    assert run(m, encode_cardpath(m, true, X, N)) is Outcome.FAILURE


def test_cardpath_chain_shape():
    m = Model()
    X = seq(m, 4)
    N = m.new_variable(0, 3)
    enc = encode_cardpath(m, named_predicate("lt", 2), X, N)
    w = enc.slide.chain.windows
    assert len(w) == 3 and w[-1][-1] == N.id
    assert all(len(x) == 4 for x in w)


def test_single_state_dfa_is_noop():
    m = Model()
    X = seq(m, 5, 3)
    m.remove_value(X[2], 1)
    before = doms(X)
    dfa = Dfa.from_triples([(0, a, 0) for a in range(3)], 0, {0})
    run(m, encode_regular(m, dfa, X))
    assert doms(X) == before


def test_malformed_parameters():
    m = Model()
    X = seq(m, 3)
    N = m.new_variable(0, 3)
    bad = [
        lambda: encode_among(m, [], {1}, N),
        lambda: encode_among(m, X, {1}, X[0]),
        lambda: encode_among_seq(m, 2, 1, 2, X, {1}),
        lambda: encode_among_seq(m, 0, 1, 4, X, {1}),
        lambda: encode_sliding_sum(m, 0, 1, 0, X),
        lambda: encode_lex_leq(m, X, X[:2]),
        lambda: encode_lex_leq(m, X, X),
        lambda: encode_stretch(m, X, {0: (0, 2)}),
        lambda: encode_stretch(m, X, {0: (3, 2)}),
        lambda: encode_cardpath(m, named_predicate("eq", 2), X[:1], N),
        lambda: encode_regular(m, no_bb(), [X[0], X[0]]),
        lambda: Dfa.from_triples([(0, 0, 0), (0, 0, 1)], 0, {0}),
    ]
    for make in bad:
        with pytest.raises(UsageError):
            make()


@pytest.mark.parametrize("kind", encgrid.KINDS)
def test_encoding_matches_semantics(kind):
    bad = [label for label, thunk in encgrid.cases(kind) if not encgrid.check(thunk)]
    assert bad == []
