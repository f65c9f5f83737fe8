"""Brute-force ground truth: solution enumeration and GAC by definition.

Nothing here touches the propagator. Constraints are checked only through
``spec.evaluate`` on their windows (or through a :class:`SemanticRelation`),
so these functions can serve as the independent side of every property test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import Model, ResourceError, var_ids

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class SemanticRelation:
    """A constraint given directly by its meaning: ``holds(values over scope)``."""

    scope: tuple[int, ...]
    holds: Callable[[tuple[int, ...]], bool]

    @classmethod
    def over(cls, variables: Sequence, holds) -> "SemanticRelation":
        return cls(tuple(var_ids(variables)), holds)


def _checks(model: Model, relations: Iterable[SemanticRelation]):
    """(scope, test) pairs covering every window of every posted constraint."""
    checks = []
    for c in model.constraints:
        spec = c.spec
        for w in c.chain.windows:
            checks.append((tuple(w), spec.evaluate))
    for r in relations:
        checks.append((r.scope, r.holds))
    return checks


def enumerate_solutions(
    model: Model, cap: int = DEFAULT_CAP, relations: Iterable[SemanticRelation] = ()
) -> list[tuple[int, ...]]:
    """All assignments (indexed by variable id) satisfying every constraint.

    Walks the product of the current domains depth-first in variable-id
    order and tests each check as soon as its last variable is assigned, so
    a failed check discards its whole sub-product. No propagation.
    """
    n = len(model.variables)
    domains = [v.domain.values() for v in model.variables]
    size = math.prod(len(d) for d in domains)
    if size > cap:
        raise ResourceError(f"search space {size} exceeds oracle cap {cap}")
    if n == 0:
        return [()]
    due: list[list] = [[] for _ in range(n)]
    for scope, test in _checks(model, relations):
        if scope:
            due[max(scope)].append((scope, test))
        elif not test(()):
            return []
    out: list[tuple[int, ...]] = []
    values = [0] * n

    def walk(i: int) -> None:
        for v in domains[i]:
            values[i] = v
            if all(test(tuple(values[j] for j in scope)) for scope, test in due[i]):
                if i + 1 == n:
                    out.append(tuple(values))
                else:
                    walk(i + 1)

    walk(0)
    return out


def gac_by_definition(
    model: Model, cap: int = DEFAULT_CAP, relations: Iterable[SemanticRelation] = ()
) -> list[set[int]]:
    """Per variable, the values used by at least one solution."""
    sols = enumerate_solutions(model, cap, relations)
    out: list[set[int]] = [set() for _ in model.variables]
    for s in sols:
        for i, v in enumerate(s):
            out[i].add(v)
    return out


def project(solutions: Iterable[Sequence[int]], variables: Sequence) -> set[tuple[int, ...]]:
    ids = var_ids(variables)
    return {tuple(s[i] for i in ids) for s in solutions}


def semantic_solutions(domains: Sequence[Sequence[int]], holds) -> set[tuple[int, ...]]:
    """Direct enumeration of a relation over explicit domains."""
    return {t for t in itertools.product(*domains) if holds(t)}


# -- direct meanings of the encoded constraints ------------------------------

def among_count(xs: Sequence[int], values) -> int:
    return sum(1 for x in xs if x in values)


def among_seq_holds(xs, lower, upper, q, values) -> bool:
    return all(lower <= among_count(xs[i:i + q], values) <= upper for i in range(len(xs) - q + 1))


def sliding_sum_holds(xs, lower, upper, q) -> bool:
    return all(lower <= sum(xs[i:i + q]) <= upper for i in range(len(xs) - q + 1))


def dfa_accepts(dfa, word) -> bool:
    state = dfa.initial
    for a in word:
        state = dfa.transitions.get((state, a))
        if state is None:
            return False
    return state in dfa.accepting


def stretch_holds(xs, lengths) -> bool:
    n = len(xs)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[j + 1] == xs[i]:
            j += 1
        lo, hi = lengths.get(xs[i], (1, n))
        if not lo <= j - i + 1 <= hi:
            return False
        i = j + 1
    return True


def lex_leq_holds(xs, ys) -> bool:
    return tuple(xs) <= tuple(ys)


def contiguity_holds(xs) -> bool:
    ones = [i for i, x in enumerate(xs) if x == 1]
    if any(x not in (0, 1) for x in xs):
        return False
    return not ones or ones[-1] - ones[0] + 1 == len(ones)


def cardpath_count(spec, xs) -> int:
    k = spec.arity
    return sum(1 for i in range(len(xs) - k + 1) if spec.evaluate(tuple(xs[i:i + k])))
