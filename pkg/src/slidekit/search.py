"""Depth-first binary-branching search over a propagation fixpoint."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from .model import Model, UsageError
from .propagator import Outcome

VAR_ORDERS = ("lexicographic", "min-domain")
VAL_ORDERS = ("ascending", "descending")
MODES = ("first", "count_all")


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    LIMIT = "limit"


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    propagations: int = 0
    pruned: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    status: Status
    solution: tuple[int, ...] | None = None
    count: int = 0
    stats: SearchStats = field(default_factory=SearchStats)


def fixpoint(model: Model, stats: SearchStats | None = None) -> Outcome:
    """Run scheduled propagators until the queue drains or something fails."""
    if model.failed:
        model.clear_queue()
        return Outcome.FAILURE
    while (cid := model.next_scheduled()) is not None:
        res = model.constraints[cid].propagate(model)
        if stats is not None:
            stats.propagations += 1
            stats.pruned += len(res.pruned)
        if res.failed or model.failed:
            model.clear_queue()
            return Outcome.FAILURE
    return Outcome.FIXPOINT


class _Limit(Exception):
    pass


def solve(
    model: Model,
    var_order: str = "lexicographic",
    val_order: str = "ascending",
    mode: str = "first",
    node_limit: int | None = None,
    time_limit_ms: float | None = None,
) -> SolveResult:
    """Branch ``x = v`` then ``x != v`` with chronological backtracking.

    Decision variables are branched on before auxiliary ones; ties in
    ``min-domain`` go to the lowest id. Every branch (left or right) is one
    node. The model is returned to its root-fixpoint state afterwards.
    """
    if var_order not in VAR_ORDERS:
        raise UsageError(f"var_order must be one of {VAR_ORDERS}")
    if val_order not in VAL_ORDERS:
        raise UsageError(f"val_order must be one of {VAL_ORDERS}")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")

    stats = SearchStats()
    start = time.perf_counter()
    deadline = None if time_limit_ms is None else start + time_limit_ms / 1000.0
    primary = [v for v in model.variables if not v.aux]
    secondary = [v for v in model.variables if v.aux]
    pick_min = val_order == "ascending"

    def choose():
        for group in (primary, secondary):
            best = None
            for v in group:
                size = v.domain.size
                if size > 1:
                    if var_order == "lexicographic":
                        best = v
                        break
                    if best is None or size < best.domain.size:
                        best = v
            if best is not None:
                vals = best.domain.values()
                return best.id, vals[0] if pick_min else vals[-1]
        return None

    def open_node():
        if node_limit is not None and stats.nodes >= node_limit:
            raise _Limit
        if deadline is not None and time.perf_counter() > deadline:
            raise _Limit
        stats.nodes += 1
        model.push_level()

    base_depth = model.depth
    stack: list[list[int]] = []

    def backtrack() -> bool:
        while stack:
            frame = stack[-1]
            model.pop_level()
            if frame[2] == 0:
                frame[2] = 1
                open_node()
                model.remove_value(frame[0], frame[1])
                if fixpoint(model, stats) is Outcome.FIXPOINT:
                    return True
                stats.failures += 1
            else:
                stack.pop()
        return False

    solution = None
    count = 0
    status = Status.UNSAT
    model.schedule_all()
    try:
        if fixpoint(model, stats) is Outcome.FAILURE:
            stats.failures += 1
        else:
            while True:
                decision = choose()
                if decision is None:
                    sol = tuple(v.domain.value for v in model.variables)
                    count += 1
                    if solution is None:
                        solution = sol
                    if mode == "first":
                        status = Status.SAT
                        break
                    if not backtrack():
                        break
                    continue
                var, val = decision
                open_node()
                stack.append([var, val, 0])
                model.assign(var, val)
                if fixpoint(model, stats) is Outcome.FAILURE:
                    stats.failures += 1
                    if not backtrack():
                        break
            if mode == "count_all" and count:
                status = Status.SAT
    except _Limit:
        status = Status.LIMIT
    finally:
        while model.depth > base_depth:
            model.pop_level()
        stats.wall_time = time.perf_counter() - start
    return SolveResult(status, solution, count, stats)


def check_solution(model: Model, solution) -> bool:
    """Every posted constraint holds on ``solution`` (indexed by variable id)."""
    return all(c.satisfied(solution) for c in model.constraints)
