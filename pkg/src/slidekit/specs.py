"""Slid constraints: the fixed-arity constraint applied to every window.

Each spec can test a single tuple (:meth:`SlidSpec.evaluate`), stream the
satisfying tuples of a window (:meth:`SlidSpec.enumerate_satisfying`), or
materialize them as an ``(T, k)`` int64 array for the propagator
(:meth:`SlidSpec.tuples_array`).
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .model import Domain, ResourceError, UsageError

DEFAULT_PRODUCT_CAP = 10**7


def _values(dom) -> list[int]:
    if isinstance(dom, Domain):
        return dom.values()
    return sorted(set(int(v) for v in dom))


def cartesian(value_lists: Sequence[Sequence[int]]) -> np.ndarray:
    """All tuples of the product in lexicographic order, as an ``(P, k)`` array."""
    k = len(value_lists)
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if any(len(v) == 0 for v in value_lists):
        return np.zeros((0, k), dtype=np.int64)
    grids = np.meshgrid(*[np.asarray(v, dtype=np.int64) for v in value_lists], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def product_size(value_lists: Sequence[Sequence[int]]) -> int:
    return math.prod(len(v) for v in value_lists)


class SlidSpec(ABC):
    """A constraint of fixed arity ``k``. Immutable after construction."""

    arity: int

    def evaluate(self, t: Sequence[int]) -> bool:
        if len(t) != self.arity:
            raise UsageError(f"expected a {self.arity}-tuple, got {len(t)} values")
        return self._holds(tuple(t))

    @abstractmethod
    def _holds(self, t: tuple) -> bool: ...

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`evaluate` over the rows of an ``(N, k)`` array."""
        return np.fromiter((self._holds(tuple(r)) for r in rows.tolist()), dtype=np.bool_, count=len(rows))

    def _check_window(self, window_domains) -> list[list[int]]:
        if len(window_domains) != self.arity:
            raise UsageError(f"expected {self.arity} domains, got {len(window_domains)}")
        return [_values(d) for d in window_domains]

    def enumerate_satisfying(self, window_domains) -> Iterator[tuple[int, ...]]:
        """Satisfying tuples of the product of ``window_domains``, lexicographically."""
        vals = self._check_window(window_domains)
        for t in itertools.product(*vals):
            if self._holds(t):
                yield t

    def tuples_array(self, window_domains, cap: int | None = None) -> np.ndarray:
        """Satisfying tuples as an ``(T, k)`` array; ResourceError beyond ``cap``."""
        vals = self._check_window(window_domains)
        if product_size(vals) > DEFAULT_PRODUCT_CAP:
            raise ResourceError(f"window product {product_size(vals)} exceeds {DEFAULT_PRODUCT_CAP}")
        rows = cartesian(vals)
        out = rows[self.evaluate_rows(rows)]
        _check_cap(len(out), cap)
        return out

    def to_table(self, window_domains, cap: int = DEFAULT_PRODUCT_CAP) -> "ExtensionalTable":
        vals = self._check_window(window_domains)
        size = product_size(vals)
        if size > cap:
            raise ResourceError(f"product of window domains ({size}) exceeds cap {cap}")
        return ExtensionalTable(self.tuples_array(vals), arity=self.arity)

    def to_json(self) -> dict:
        raise UsageError(f"{type(self).__name__} has no JSON form")


def _check_cap(n: int, cap: int | None) -> None:
    if cap is not None and n > cap:
        raise ResourceError(f"{n} satisfying tuples exceed the per-window cap {cap}")


class ExtensionalTable(SlidSpec):
    """Explicit list of allowed tuples."""

    def __init__(self, tuples, arity: int | None = None):
        try:
            rows = np.asarray(
                tuples if isinstance(tuples, np.ndarray) else [tuple(t) for t in tuples], dtype=np.int64
            )
        except ValueError:
            raise UsageError("table rows must all have the same length") from None
        if rows.ndim != 2:
            if rows.size != 0:
                raise UsageError("table rows must all have the same length")
            if arity is None:
                raise UsageError("an empty table needs an explicit arity")
            rows = rows.reshape(0, arity)
        if arity is not None and rows.shape[1] != arity:
            raise UsageError(f"table tuples have length {rows.shape[1]}, expected {arity}")
        if rows.shape[1] < 1:
            raise UsageError("arity must be positive")
        rows = np.unique(rows, axis=0) if len(rows) else rows
        self.arity = rows.shape[1]
        self.rows = rows
        self.rows.setflags(write=False)
        self.tuples = frozenset(map(tuple, rows.tolist()))

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"ExtensionalTable(arity={self.arity}, size={len(self.rows)})"

    def _holds(self, t):
        return t in self.tuples

    def evaluate_rows(self, rows):
        return _rows_in(rows, self.rows)

    def _filtered(self, vals: list[list[int]]) -> np.ndarray:
        keep = np.ones(len(self.rows), dtype=np.bool_)
        for p, vs in enumerate(vals):
            keep &= np.isin(self.rows[:, p], np.asarray(vs, dtype=np.int64))
        return self.rows[keep]

    def enumerate_satisfying(self, window_domains):
        vals = self._check_window(window_domains)
        for r in self._filtered(vals).tolist():
            yield tuple(r)

    def tuples_array(self, window_domains, cap=None):
        out = self._filtered(self._check_window(window_domains))
        _check_cap(len(out), cap)
        return out

    def to_json(self):
        return {"kind": "table", "arity": self.arity, "tuples": self.rows.tolist()}


def _rows_in(rows: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Row-wise membership of ``rows`` in ``table`` (both int64, same width)."""
    if len(table) == 0 or len(rows) == 0:
        return np.zeros(len(rows), dtype=np.bool_)
    both = np.concatenate([table, rows])
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.ravel()
    present = np.zeros(inv.max() + 1, dtype=np.bool_)
    present[inv[: len(table)]] = True
    return present[inv[len(table):]]


class SumInRange(SlidSpec):
    """``lower <= sum(mapped(t_i)) <= upper``.

    With ``membership`` each value maps to 1 if it is in the set and 0
    otherwise; without it values are summed as-is.
    """

    def __init__(self, arity: int, lower: int, upper: int, membership: Iterable[int] | None = None):
        if arity < 1:
            raise UsageError("arity must be positive")
        if lower > upper:
            raise UsageError(f"lower {lower} > upper {upper}")
        self.arity = arity
        self.lower = lower
        self.upper = upper
        self.membership = None if membership is None else frozenset(int(v) for v in membership)

    def __repr__(self):
        m = "" if self.membership is None else f", membership={sorted(self.membership)}"
        return f"SumInRange(arity={self.arity}, {self.lower}..{self.upper}{m})"

    def _map(self, v: int) -> int:
        if self.membership is None:
            return v
        return 1 if v in self.membership else 0

    def _holds(self, t):
        s = sum(self._map(v) for v in t)
        return self.lower <= s <= self.upper

    def evaluate_rows(self, rows):
        if self.membership is None:
            s = rows.sum(axis=1)
        else:
            s = np.isin(rows, np.fromiter(self.membership, dtype=np.int64)).sum(axis=1)
        return (s >= self.lower) & (s <= self.upper)

    def enumerate_satisfying(self, window_domains):
        # DFS over partial sums, cut when the remaining positions cannot reach [lower, upper]
        vals = self._check_window(window_domains)
        if any(not v for v in vals):
            return
        mapped = [[self._map(v) for v in vs] for vs in vals]
        k = self.arity
        rest_min = [0] * (k + 1)
        rest_max = [0] * (k + 1)
        for p in range(k - 1, -1, -1):
            rest_min[p] = rest_min[p + 1] + min(mapped[p])
            rest_max[p] = rest_max[p + 1] + max(mapped[p])
        lo, hi = self.lower, self.upper
        prefix: list[int] = []

        def walk(p: int, s: int):
            if p == k:
                yield tuple(prefix)
                return
            for v, m in zip(vals[p], mapped[p]):
                t = s + m
                if t + rest_min[p + 1] > hi or t + rest_max[p + 1] < lo:
                    continue
                prefix.append(v)
                yield from walk(p + 1, t)
                prefix.pop()

        yield from walk(0, 0)

    def to_json(self):
        d = {"kind": "sum", "arity": self.arity, "lower": self.lower, "upper": self.upper}
        if self.membership is not None:
            d["values"] = sorted(self.membership)
        return d


class DfaTransition(SlidSpec):
    """``(state, symbol, next_state)`` must be a transition of an automaton."""

    arity = 3

    def __init__(self, relation: Iterable[tuple[int, int, int]]):
        self.relation = frozenset(tuple(int(x) for x in r) for r in relation)
        if any(len(r) != 3 for r in self.relation):
            raise UsageError("transitions must be (state, symbol, state) triples")
        self._table = ExtensionalTable(sorted(self.relation), arity=3)

    def __repr__(self):
        return f"DfaTransition({len(self.relation)} transitions)"

    def _holds(self, t):
        return t in self.relation

    def evaluate_rows(self, rows):
        return self._table.evaluate_rows(rows)

    def enumerate_satisfying(self, window_domains):
        return self._table.enumerate_satisfying(window_domains)

    def tuples_array(self, window_domains, cap=None):
        return self._table.tuples_array(window_domains, cap)

    def to_json(self):
        return {"kind": "dfa", "transitions": [list(r) for r in sorted(self.relation)]}


class LexStep(SlidSpec):
    """One step of a lexicographic comparison over ``(eq, x, y, next_eq)``.

    ``eq == 1`` means the prefixes so far are equal: then ``x <= y`` and
    ``next_eq == [x == y]``. Once ``eq == 0`` it stays 0.
    """

    arity = 4

    def __repr__(self):
        return "LexStep()"

    def _holds(self, t):
        b, x, y, nb = t
        if b == 0:
            return nb == 0
        if b == 1:
            return x <= y and nb == (1 if x == y else 0)
        return False

    def evaluate_rows(self, rows):
        b, x, y, nb = rows.T
        open_ = (b == 1) & (x <= y) & (nb == (x == y))
        return ((b == 0) & (nb == 0)) | open_

    def to_json(self):
        return {"kind": "lex"}


class CounterStep(SlidSpec):
    """``(c, x_1..x_m, c')`` with ``c' = c + [inner(x_1..x_m)]``."""

    def __init__(self, inner: SlidSpec):
        self.inner = inner
        self.arity = inner.arity + 2

    def __repr__(self):
        return f"CounterStep({self.inner!r})"

    def _holds(self, t):
        return t[-1] == t[0] + (1 if self.inner._holds(t[1:-1]) else 0)

    def evaluate_rows(self, rows):
        return rows[:, -1] == rows[:, 0] + self.inner.evaluate_rows(rows[:, 1:-1])

    def _inner_rows(self, vals):
        inner_vals = vals[1:-1]
        if product_size(inner_vals) > DEFAULT_PRODUCT_CAP:
            raise ResourceError("inner window product exceeds cap")
        rows = cartesian(inner_vals)
        return rows, self.inner.evaluate_rows(rows).astype(np.int64)

    def enumerate_satisfying(self, window_domains):
        vals = self._check_window(window_domains)
        rows, flags = self._inner_rows(vals)
        nxt = set(vals[-1])
        for c in vals[0]:
            for r, f in zip(rows.tolist(), flags.tolist()):
                if c + f in nxt:
                    yield (c, *r, c + f)

    def tuples_array(self, window_domains, cap=None):
        vals = self._check_window(window_domains)
        rows, flags = self._inner_rows(vals)
        counters = np.asarray(vals[0], dtype=np.int64)
        p = len(rows)
        c = np.repeat(counters, p)
        nxt = c + np.tile(flags, len(counters))
        keep = np.isin(nxt, np.asarray(vals[-1], dtype=np.int64))
        mid = np.tile(rows, (len(counters), 1))
        out = np.column_stack([c[keep], mid[keep], nxt[keep]]).astype(np.int64, copy=False)
        _check_cap(len(out), cap)
        return out

    def to_json(self):
        return {"kind": "counter", "inner": self.inner.to_json()}


class Predicate(SlidSpec):
    """Opaque boolean function of a ``k``-tuple.

    ``pure=True`` declares the function side-effect free, which allows
    results to be cached.
    """

    def __init__(self, arity: int, fn: Callable[..., bool], name: str | None = None, pure: bool = True):
        if arity < 1:
            raise UsageError("arity must be positive")
        self.arity = arity
        self.fn = fn
        self.name = name
        self.pure = pure
        self._cache: dict[tuple, bool] | None = {} if pure else None

    def __repr__(self):
        return f"Predicate({self.name or self.fn!r}, arity={self.arity})"

    def _holds(self, t):
        if self._cache is None:
            return bool(self.fn(*t))
        r = self._cache.get(t)
        if r is None:
            r = self._cache[t] = bool(self.fn(*t))
        return r

    def to_json(self):
        if self.name not in PREDICATES:
            raise UsageError("only named predicates can be serialized")
        return {"kind": "predicate", "name": self.name, "arity": self.arity}


PREDICATES: dict[str, Callable[..., bool]] = {
    "eq": lambda *t: all(a == t[0] for a in t),
    "neq": lambda *t: len(set(t)) == len(t),
    "lt": lambda *t: all(a < b for a, b in zip(t, t[1:])),
    "le": lambda *t: all(a <= b for a, b in zip(t, t[1:])),
    "true": lambda *t: True,
    "false": lambda *t: False,
}


def named_predicate(name: str, arity: int) -> Predicate:
    try:
        fn = PREDICATES[name]
    except KeyError:
        raise UsageError(f"unknown predicate {name!r}; known: {sorted(PREDICATES)}") from None
    return Predicate(arity, fn, name=name)


def spec_from_json(d: dict) -> SlidSpec:
    kind = d.get("kind")
    if kind == "table":
        return ExtensionalTable(d["tuples"], arity=d.get("arity"))
    if kind == "sum":
        return SumInRange(d["arity"], d["lower"], d["upper"], d.get("values"))
    if kind == "dfa":
        return DfaTransition(d["transitions"])
    if kind == "lex":
        return LexStep()
    if kind == "counter":
        return CounterStep(spec_from_json(d["inner"]))
    if kind == "predicate":
        return named_predicate(d["name"], d["arity"])
    raise UsageError(f"unknown spec kind {kind!r}")
