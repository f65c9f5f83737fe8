"""Window chains, the slide constraint and its GAC propagator.

The propagator enumerates the satisfying tuples of every window under the
current domains, keeps those reachable from the left end of the chain
(forward pass) and from the right end (backward pass) through
overlap-consistent joins, and prunes every value that no surviving tuple
uses. Because consecutive windows share exactly the variables they have in
common (running intersection), pairwise join consistency along the chain is
global consistency, so the result is GAC on the conjunction of windows.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .model import Model, ResourceError, UsageError, var_ids
from .specs import SlidSpec, product_size

DEFAULT_TUPLE_CAP = 10**6
# shared-table path limits: value span of the chain, candidate box size, dense valid-mask size
_SHARED_SPAN = 256
_SHARED_BOX = 1 << 20
_SHARED_CELLS = 1 << 25
_DIRECT_KEYS = 1 << 22
_DENSE_SUPPORT = 1 << 24


def tuple_cap() -> int:
    """Per-window tuple cap; ``SLIDEKIT_TUPLE_CAP`` overrides the default."""
    raw = os.environ.get("SLIDEKIT_TUPLE_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise UsageError(f"SLIDEKIT_TUPLE_CAP must be an integer, got {raw!r}") from None
    return DEFAULT_TUPLE_CAP


class WindowChain:
    """Ordered windows over variable ids with the running-intersection property.

    For each consecutive pair the shared variables must be a suffix (as a
    set) of the earlier window and a prefix of the later one; ``overlaps[i]``
    lists ``(positions in W_i, positions in W_{i+1})`` pairing them up.
    """

    def __init__(self, windows: Sequence[Sequence[int]]):
        windows = [tuple(int(v) for v in w) for w in windows]
        if not windows:
            raise UsageError("a chain needs at least one window")
        for w in windows:
            if not w:
                raise UsageError("empty window")
            if len(set(w)) != len(w):
                raise UsageError(f"window {w} repeats a variable")
        self.windows = windows
        self.overlaps: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        for a, b in zip(windows, windows[1:]):
            shared = set(a) & set(b)
            s = len(shared)
            if set(a[len(a) - s:]) != shared or set(b[:s]) != shared:
                raise UsageError(f"windows {a} and {b} do not overlap on a suffix/prefix")
            rpos = tuple(i for i, v in enumerate(a) if v in shared)
            lpos = tuple(b.index(a[i]) for i in rpos)
            self.overlaps.append((rpos, lpos))
        last_seen: dict[int, int] = {}
        for i, w in enumerate(windows):
            for v in w:
                if v in last_seen and last_seen[v] != i - 1:
                    raise UsageError(f"variable {v} occurs in non-contiguous windows")
                last_seen[v] = i

    def __len__(self) -> int:
        return len(self.windows)

    def __repr__(self) -> str:
        return f"WindowChain({len(self.windows)} windows)"

    @property
    def variables(self) -> list[int]:
        seen: dict[int, None] = {}
        for w in self.windows:
            for v in w:
                seen.setdefault(v)
        return list(seen)


def build_chain(variables: Sequence, k: int, step: int = 1) -> WindowChain:
    """Windows of ``k`` consecutive variables starting every ``step`` positions."""
    ids = var_ids(variables)
    if k < 1 or step < 1:
        raise UsageError("k and step must be positive")
    if k > len(ids):
        raise UsageError(f"window arity {k} exceeds sequence length {len(ids)}")
    return WindowChain([ids[o:o + k] for o in range(0, len(ids) - k + 1, step)])


class Outcome(enum.Enum):
    FIXPOINT = "fixpoint"
    FAILURE = "failure"


@dataclass
class PropagationResult:
    outcome: Outcome
    pruned: list[tuple[int, int]] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.outcome is Outcome.FAILURE


@dataclass
class PropagatorStats:
    calls: int = 0
    tuples: int = 0
    joins: int = 0
    pruned: int = 0


@dataclass
class SupportSets:
    """Per-window forward/backward/support sets over a flat tuple array.

    ``tuples[starts[i]:starts[i+1]]`` are the satisfying tuples of window i;
    ``forward``, ``backward`` and ``support`` are masks over those rows.
    """

    chain: WindowChain
    tuples: np.ndarray
    starts: np.ndarray
    forward: np.ndarray
    backward: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.forward & self.backward

    def window(self, i: int, which: str = "support") -> set[tuple[int, ...]]:
        a, b = self.starts[i], self.starts[i + 1]
        mask = getattr(self, which)[a:b]
        return set(map(tuple, self.tuples[a:b][mask].tolist()))

    @property
    def failed(self) -> bool:
        s = self.support
        return any(not s[self.starts[i]:self.starts[i + 1]].any() for i in range(len(self.chain)))

    def projection(self, var: int, window: int | None = None) -> set[int]:
        """Values of ``var`` in the support of ``window`` (default: first containing it)."""
        if self.failed:
            return set()
        if window is None:
            window = next((i for i, w in enumerate(self.chain.windows) if var in w), None)
            if window is None:
                raise UsageError(f"variable {var} is not in the chain")
        p = self.chain.windows[window].index(var)
        return {t[p] for t in self.window(window)}


class SlideConstraint:
    """``spec`` holds on every window of ``chain``."""

    def __init__(self, chain: WindowChain, spec: SlidSpec, name: str | None = None):
        for w in chain.windows:
            if len(w) != spec.arity:
                raise UsageError(f"window {w} has length {len(w)}, spec arity is {spec.arity}")
        self.chain = chain
        self.spec = spec
        self.name = name
        self.scope = chain.variables
        self.stats = PropagatorStats()
        self._windows = np.asarray(chain.windows, dtype=np.int64).reshape(len(chain), spec.arity)

    def __repr__(self):
        return f"SlideConstraint({self.name or self.spec!r}, {len(self.chain)} windows)"

    def propagate(self, model: Model) -> PropagationResult:
        return propagate_gac(self, model)

    def satisfied(self, values: Sequence[int]) -> bool:
        """Check a full assignment indexed by variable id."""
        return all(self.spec.evaluate(tuple(values[v] for v in w)) for w in self.chain.windows)

    def decompose(self) -> list["SlideConstraint"]:
        """Each window as an independent single-window slide."""
        return [
            SlideConstraint(WindowChain([w]), self.spec, name=f"{self.name or 'slide'}[{i}]")
            for i, w in enumerate(self.chain.windows)
        ]


class _Locals:
    """Chain variables in first-occurrence order with their current domains."""

    def __init__(self, c: SlideConstraint, model: Model):
        self.vars = np.asarray(c.scope, dtype=np.int64)
        self.index = np.full(len(model.variables), -1, dtype=np.int64)
        self.index[self.vars] = np.arange(len(self.vars))
        doms = [model.variables[v].domain for v in c.scope]
        self.offset = np.fromiter((d.offset for d in doms), dtype=np.int64, count=len(doms))
        sizes = np.fromiter((d.size for d in doms), dtype=np.int64, count=len(doms))
        self.member_local = np.repeat(np.arange(len(doms)), sizes)
        self.member_value = (
            np.fromiter(
                (i for d in doms for i in d.dense[: d.size]), dtype=np.int64, count=int(sizes.sum())
            )
            + np.repeat(self.offset, sizes)
        )
        self.doms = doms
        self.lo = int(self.member_value.min()) if len(self.member_value) else 0
        self.hi = int(self.member_value.max()) if len(self.member_value) else 0


def _gather_tuples(c: SlideConstraint, loc: _Locals, cap: int):
    """Satisfying tuples of all windows as ``(tuples, starts)``."""
    spec, W = c.spec, c._windows
    m, k = W.shape
    span = loc.hi - loc.lo + 1
    lw = loc.index[W]
    if span <= _SHARED_SPAN:
        dense = np.zeros((len(loc.vars), span), dtype=np.bool_)
        dense[loc.member_local, loc.member_value - loc.lo] = True
        union = [np.nonzero(dense[np.unique(lw[:, p])].any(axis=0))[0] + loc.lo for p in range(k)]
        if product_size(union) <= _SHARED_BOX:
            table = spec.tuples_array([u.tolist() for u in union])
            if m * len(table) <= _SHARED_CELLS:
                valid = np.ones((m, len(table)), dtype=np.bool_)
                for p in range(k):
                    valid &= dense[lw[:, p][:, None], (table[:, p] - loc.lo)[None, :]]
                counts = valid.sum(axis=1)
                if counts.max(initial=0) > cap:
                    raise ResourceError(f"{counts.max()} tuples in one window exceed cap {cap}")
                _, ti = np.nonzero(valid)
                starts = np.zeros(m + 1, dtype=np.int64)
                np.cumsum(counts, out=starts[1:])
                return table[ti], starts
    parts = []
    for w in lw:
        parts.append(spec.tuples_array([loc.doms[i] for i in w], cap))
    starts = np.zeros(m + 1, dtype=np.int64)
    np.cumsum([len(p) for p in parts], out=starts[1:])
    return np.concatenate(parts) if parts else np.zeros((0, k), np.int64), starts


def _overlap_keys(c: SlideConstraint, tuples: np.ndarray, starts: np.ndarray, loc: _Locals):
    """Dense overlap keys ``(lkey, rkey, nkeys)`` for the chain sweep."""
    m = len(c.chain)
    total = len(tuples)
    lkey = np.zeros(total, dtype=np.int64)
    rkey = np.zeros(total, dtype=np.int64)
    if m == 1 or total == 0:
        return lkey, rkey, 1
    win = np.repeat(np.arange(m), np.diff(starts))
    span = loc.hi - loc.lo + 1
    groups: dict[tuple, list[int]] = {}
    for i, sig in enumerate(c.chain.overlaps):
        groups.setdefault(sig, []).append(i)
    width = max(len(r) for r, _ in c.chain.overlaps)
    if width == 0:
        return lkey, rkey, 1
    use_radix = span ** width < (1 << 62)
    if len(groups) == 1:
        # uniform chain: every window but the last has a right overlap, every one but the first a left
        (rpos, lpos), = groups
        a, b = int(starts[m - 1]), int(starts[1])
        rkey[:a] = _radix(tuples[:a, list(rpos)], loc.lo, span) if use_radix else 0
        lkey[b:] = _radix(tuples[b:, list(lpos)], loc.lo, span) if use_radix else 0
        if use_radix:
            groups = {}
    for (rpos, lpos), pairs in groups.items():
        if not rpos:
            continue
        left = np.zeros(m, dtype=np.bool_)
        left[pairs] = True
        right = np.zeros(m, dtype=np.bool_)
        right[np.asarray(pairs) + 1] = True
        rows_r = left[win]
        rows_l = right[win]
        if use_radix:
            rkey[rows_r] = _radix(tuples[rows_r][:, rpos], loc.lo, span)
            lkey[rows_l] = _radix(tuples[rows_l][:, lpos], loc.lo, span)
        else:
            both = np.concatenate([tuples[rows_r][:, rpos], tuples[rows_l][:, lpos]])
            _, inv = np.unique(both, axis=0, return_inverse=True)
            inv = inv.ravel()
            nr = int(rows_r.sum())
            rkey[rows_r] = inv[:nr]
            lkey[rows_l] = inv[nr:]
    nkeys = int(max(lkey.max(), rkey.max())) + 1
    if nkeys > _DIRECT_KEYS:
        uniq, inv = np.unique(np.concatenate([lkey, rkey]), return_inverse=True)
        lkey, rkey = inv[:total], inv[total:]
        nkeys = len(uniq)
    return lkey, rkey, nkeys


def _radix(cols: np.ndarray, lo: int, span: int) -> np.ndarray:
    key = np.zeros(len(cols), dtype=np.int64)
    for q in range(cols.shape[1] - 1, -1, -1):
        key = key * span + (cols[:, q] - lo)
    return key


def support_sets(c: SlideConstraint, model: Model) -> SupportSets:
    """Compute F, B and S for every window under the current domains."""
    loc = _Locals(c, model)
    return _support_sets(c, model, loc)


def _support_sets(c, model, loc) -> SupportSets:
    tuples, starts = _gather_tuples(c, loc, tuple_cap())
    if len(tuples) == 0:
        empty = np.zeros(0, dtype=np.bool_)
        return SupportSets(c.chain, tuples, starts, empty, empty)
    lkey, rkey, nkeys = _overlap_keys(c, tuples, starts, loc)
    fwd, bwd = kernels.sweep(starts, lkey, rkey, nkeys)
    c.stats.tuples += len(tuples)
    c.stats.joins += 2 * len(tuples)
    return SupportSets(c.chain, tuples, starts, fwd, bwd)


def propagate_gac(c: SlideConstraint, model: Model) -> PropagationResult:
    """Prune every value without support in the conjunction of all windows."""
    c.stats.calls += 1
    loc = _Locals(c, model)
    if len(loc.member_value) == 0 or any(d.size == 0 for d in loc.doms):
        model.failed = True
        return PropagationResult(Outcome.FAILURE)
    S = _support_sets(c, model, loc)
    alive = S.support
    m, k = c._windows.shape
    win = np.repeat(np.arange(m), np.diff(S.starts))[alive]
    if len(alive) == 0 or np.bincount(win, minlength=m).min() == 0:
        model.failed = True
        return PropagationResult(Outcome.FAILURE)

    # supported (variable, value) pairs, read off the first window holding each variable
    lw = loc.index[c._windows]
    first = np.zeros(m * k, dtype=np.bool_)
    first[np.unique(lw.ravel(), return_index=True)[1]] = True
    first = first.reshape(m, k)
    span = loc.hi - loc.lo + 1
    member_keys = loc.member_local * span + (loc.member_value - loc.lo)
    if len(loc.vars) * span <= _DENSE_SUPPORT:
        flags = kernels.supported_values(S.tuples, S.starts, alive, lw, first, loc.lo, span, len(loc.vars))
        dead = member_keys[~flags[member_keys]]
    else:
        rows = S.tuples[alive]
        sup_keys = []
        for p in range(k):
            sel = first[win, p]
            sup_keys.append(lw[win[sel], p] * span + (rows[sel, p] - loc.lo))
        dead = member_keys[~np.isin(member_keys, np.unique(np.concatenate(sup_keys)))]

    pruned = []
    model._active = model._cid_of(c)
    try:
        for key in dead.tolist():
            li, off = divmod(key, span)
            var, value = int(loc.vars[li]), off + loc.lo
            if model.remove_value(var, value):
                pruned.append((var, value))
    finally:
        model._active = None
    c.stats.pruned += len(pruned)
    if model.failed:
        return PropagationResult(Outcome.FAILURE, pruned)
    return PropagationResult(Outcome.FIXPOINT, pruned)


def projection(c: SlideConstraint, S: SupportSets, var) -> set[int]:
    return S.projection(var_ids([var])[0])


def schedule(c: SlideConstraint, model: Model, changed_var=None) -> None:
    """Mark ``c`` for re-propagation; repeated calls before a drain coalesce."""
    model.schedule(model._cid_of(c))
