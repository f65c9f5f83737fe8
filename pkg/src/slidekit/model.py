"""Finite-domain variables, the model container and its backtrackable trail."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_DOMAIN_SIZE = 1 << 16


class SlidekitError(Exception):
    """Base class for library errors."""


class UsageError(SlidekitError, ValueError):
    """Malformed arguments or an API used out of order."""


class ResourceError(SlidekitError, RuntimeError):
    """A configured size cap (tuples, product, ...) would be exceeded."""


class Domain:
    """Sparse-set domain over the contiguous range ``lower..upper``.

    The first ``size`` entries of ``dense`` are the present values (as offsets
    from ``offset``); ``pos`` maps an offset to its slot in ``dense``. Removal
    swaps with the last present slot, so restoring a domain on backtrack only
    needs the old ``size``.
    """

    __slots__ = ("offset", "capacity", "dense", "pos", "size")

    def __init__(self, lower: int, upper: int):
        if lower > upper:
            raise UsageError(f"empty range {lower}..{upper}")
        capacity = upper - lower + 1
        if capacity > MAX_DOMAIN_SIZE:
            raise UsageError(f"domain {lower}..{upper} exceeds {MAX_DOMAIN_SIZE} values")
        self.offset = lower
        self.capacity = capacity
        self.dense = list(range(capacity))
        self.pos = list(range(capacity))
        self.size = capacity

    def __contains__(self, value) -> bool:
        i = value - self.offset
        return 0 <= i < self.capacity and self.pos[i] < self.size

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return iter(self.values())

    def __repr__(self) -> str:
        return f"Domain({self.values()})"

    def values(self) -> list[int]:
        off = self.offset
        return sorted(off + i for i in self.dense[: self.size])

    def remove(self, value: int) -> bool:
        i = value - self.offset
        if not (0 <= i < self.capacity):
            return False
        p = self.pos[i]
        if p >= self.size:
            return False
        last = self.size - 1
        j = self.dense[last]
        self.dense[p], self.dense[last] = j, i
        self.pos[j], self.pos[i] = p, last
        self.size = last
        return True

    @property
    def lower(self) -> int:
        return self.offset + min(self.dense[: self.size])

    @property
    def upper(self) -> int:
        return self.offset + max(self.dense[: self.size])

    def is_fixed(self) -> bool:
        return self.size == 1

    @property
    def value(self) -> int:
        if self.size != 1:
            raise UsageError("domain is not a singleton")
        return self.offset + self.dense[0]

    def mask(self) -> np.ndarray:
        """Boolean membership over ``offset .. offset+capacity-1``."""
        m = np.zeros(self.capacity, dtype=np.bool_)
        m[self.dense[: self.size]] = True
        return m


class Variable:
    __slots__ = ("id", "name", "domain", "aux")

    def __init__(self, id: int, name: str | None, domain: Domain, aux: bool = False):
        self.id = id
        self.name = name if name is not None else f"x{id}"
        self.domain = domain
        # aux variables are introduced by encodings; search branches on them last
        self.aux = aux

    def __repr__(self) -> str:
        return f"Variable({self.name}={self.domain.values()})"


class Model:
    """Variables, posted constraints, trail and propagation queue.

    Constraints are any objects exposing ``scope`` (variable ids) and
    ``propagate(model)``. Failure is the sticky ``failed`` flag; it is reset
    by :meth:`pop_level` to whatever it was at the matching push.
    """

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list = []
        self.failed = False
        self._trail: list[tuple[int, int]] = []
        self._levels: list[tuple[int, bool]] = []
        self._stamp: list[int] = []
        self._level_id = 0
        self._next_level_id = 1
        self._watchers: list[list[int]] = []
        self._queue: deque[int] = deque()
        self._queued: list[bool] = []
        self._active: int | None = None
        self._cids: dict[int, int] = {}

    # -- variables ---------------------------------------------------------
    def new_variable(self, lower: int, upper: int, name: str | None = None, aux: bool = False) -> Variable:
        var = Variable(len(self.variables), name, Domain(lower, upper), aux)
        self.variables.append(var)
        self._stamp.append(0)
        self._watchers.append([])
        return var

    def new_variable_from(self, values: Iterable[int], name: str | None = None, aux: bool = False) -> Variable:
        vals = sorted(set(values))
        if not vals:
            raise UsageError("empty value set")
        var = self.new_variable(vals[0], vals[-1], name, aux)
        keep = set(vals)
        for v in range(vals[0], vals[-1] + 1):
            if v not in keep:
                var.domain.remove(v)
        return var

    def __len__(self) -> int:
        return len(self.variables)

    def domain(self, var) -> Domain:
        return self.variables[_vid(var)].domain

    def domains(self) -> list[list[int]]:
        return [v.domain.values() for v in self.variables]

    def by_name(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    # -- mutation ----------------------------------------------------------
    def remove_value(self, var, value: int) -> bool:
        """Remove ``value``; returns whether the domain changed.

        Emptying a domain sets ``failed`` instead of raising.
        """
        vid = _vid(var)
        dom = self.variables[vid].domain
        if value not in dom:
            return False
        if self._stamp[vid] != self._level_id:
            self._stamp[vid] = self._level_id
            self._trail.append((vid, dom.size))
        dom.remove(value)
        if dom.size == 0:
            self.failed = True
        self._notify(vid)
        return True

    def restrict(self, var, allowed: Iterable[int]) -> bool:
        """Intersect the domain of ``var`` with ``allowed``."""
        keep = set(allowed)
        dom = self.domain(var)
        changed = False
        for v in dom.values():
            if v not in keep:
                changed |= self.remove_value(var, v)
        return changed

    def assign(self, var, value: int) -> bool:
        return self.restrict(var, (value,))

    # -- trail -------------------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self._levels)

    def push_level(self) -> None:
        self._levels.append((len(self._trail), self.failed))
        self._level_id = self._next_level_id
        self._next_level_id += 1

    def pop_level(self) -> None:
        if not self._levels:
            raise UsageError("pop_level without a matching push_level")
        mark, failed = self._levels.pop()
        trail = self._trail
        variables = self.variables
        while len(trail) > mark:
            vid, size = trail.pop()
            variables[vid].domain.size = size
            self._stamp[vid] = 0
        self.failed = failed
        # a fresh id: stamps written at the popped level must not match again
        self._level_id = self._next_level_id
        self._next_level_id += 1
        self.clear_queue()

    # -- constraints and scheduling ---------------------------------------
    def post(self, constraint) -> None:
        cid = len(self.constraints)
        for v in constraint.scope:
            if not 0 <= v < len(self.variables):
                raise UsageError(f"constraint refers to unknown variable {v}")
        self.constraints.append(constraint)
        self._cids[id(constraint)] = cid
        self._queued.append(False)
        for v in sorted(set(constraint.scope)):
            self._watchers[v].append(cid)
        self.schedule(cid)

    def schedule(self, cid: int) -> None:
        if not self._queued[cid]:
            self._queued[cid] = True
            self._queue.append(cid)

    def schedule_all(self) -> None:
        for cid in range(len(self.constraints)):
            self.schedule(cid)

    def next_scheduled(self) -> int | None:
        if not self._queue:
            return None
        cid = self._queue.popleft()
        self._queued[cid] = False
        return cid

    def clear_queue(self) -> None:
        while self._queue:
            self._queued[self._queue.popleft()] = False

    def _cid_of(self, constraint) -> int | None:
        return self._cids.get(id(constraint))

    def _notify(self, vid: int) -> None:
        for cid in self._watchers[vid]:
            if cid != self._active:
                self.schedule(cid)


def _vid(var) -> int:
    return var.id if isinstance(var, Variable) else int(var)


def var_ids(variables: Sequence) -> list[int]:
    return [_vid(v) for v in variables]
