"""Experiment runner behind the CLI: solving, verification and slide-vs-decomposed comparison."""

from __future__ import annotations

import copy
import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import oracle
from .instances import InputError, build_model, dump_instance, load_instance
from .search import SolveResult, fixpoint, solve

REPORT_FIELDS = ("instance", "variant", "result", "solutions", "nodes", "failures", "pruned", "wall_ms", "solution")


@dataclass
class SolveOptions:
    var_order: str = "lexicographic"
    val_order: str = "ascending"
    mode: str = "first"
    node_limit: int | None = None
    time_limit_ms: float | None = None
    timing: bool = False


def run(doc: dict, instance_id: str, variant: str, opts: SolveOptions) -> tuple[dict, SolveResult]:
    built = build_model(doc, variant)
    res = solve(
        built.model,
        var_order=opts.var_order,
        val_order=opts.val_order,
        mode=opts.mode,
        node_limit=opts.node_limit,
        time_limit_ms=opts.time_limit_ms,
    )
    sol = ""
    if res.solution is not None:
        sol = " ".join(f"{v.name}={res.solution[v.id]}" for v in built.model.variables if not v.aux)
    row = {
        "instance": instance_id,
        "variant": variant,
        "result": res.status.value,
        "solutions": res.count,
        "nodes": res.stats.nodes,
        "failures": res.stats.failures,
        "pruned": res.stats.pruned,
        # wall time breaks byte-identical reruns, so it is opt-in
        "wall_ms": f"{res.stats.wall_time * 1000:.3f}" if opts.timing else "",
        "solution": sol,
    }
    return row, res


def format_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _instance_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"{d}: not a directory")
    return sorted(d.glob("*.json"))


def compare(directory, opts: SolveOptions, jobs: int = 1) -> list[dict]:
    """Paired slide/decomposed rows for every instance, ordered by instance id."""
    files = _instance_files(directory)
    docs = [(p.stem, load_instance(p)) for p in files]

    def both(item):
        iid, doc = item
        return [run(doc, iid, variant, opts)[0] for variant in ("slide", "decomposed")]

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        pairs = list(pool.map(both, docs))
    return [row for pair in pairs for row in pair]


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        tag = "ok" if self.ok else "MISMATCH"
        return f"{tag:8s} {self.name}" + (f": {self.detail}" if self.detail else "")


def _strip_baselines(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    for c in doc["constraints"]:
        c.pop("baseline", None)
    return doc


def _diff(model, got, want) -> str:
    bad = [
        f"{model.variables[i].name}: {sorted(g)} != {sorted(w)}"
        for i, (g, w) in enumerate(zip(got, want))
        if set(g) != set(w)
    ]
    return "; ".join(bad[:4])


def verify(doc: dict, cap: int = oracle.DEFAULT_CAP) -> list[Check]:
    """Cross-check the propagator and encodings against the brute-force oracle.

    Raises ResourceError when an oracle enumeration would exceed ``cap``.
    """
    doc = _strip_baselines(doc)
    checks: list[Check] = []
    for i, c in enumerate(doc["constraints"]):
        label = f"constraint {i} ({c['type']})"
        built = build_model(doc, only=i)
        m = built.model
        sols = oracle.enumerate_solutions(m, cap)
        expect = [{s[v] for s in sols} for v in range(len(m.variables))]
        fixpoint(m)
        got = [set() for _ in m.variables] if m.failed else [set(d) for d in m.domains()]
        checks.append(Check(f"{label} GAC", got == expect, _diff(m, got, expect)))

        p = built.posted[0]
        projected = oracle.project(sols, p.scope)
        doms = [doc_domain(doc, m.variables[v].name) for v in p.scope]
        direct = oracle.semantic_solutions(doms, p.holds)
        checks.append(
            Check(
                f"{label} encoding",
                projected == direct,
                "" if projected == direct else f"{len(projected)} encoded vs {len(direct)} direct solutions",
            )
        )

    built = build_model(doc)
    m = built.model
    sols = oracle.enumerate_solutions(m, cap)
    gac = [{s[i] for s in sols} for i in range(len(m.variables))]
    res = solve(build_model(doc).model, mode="count_all")
    checks.append(
        Check("model solution count", res.count == len(sols), f"search {res.count} vs oracle {len(sols)}")
    )
    fixpoint(m)
    got = [set() for _ in m.variables] if m.failed else [set(d) for d in m.domains()]
    sound = all(w <= g for g, w in zip(got, gac))
    checks.append(Check("model propagation sound", sound, "" if sound else _diff(m, got, gac)))

    for name, values in sorted(doc.get("expected_domains", {}).items()):
        if name not in built.names:
            raise InputError(f"expected_domains names unknown variable {name!r}")
        have = got[built.names[name]]
        ok = have == set(values)
        checks.append(Check(f"expected domain {name}", ok, "" if ok else f"{sorted(have)} != {sorted(values)}"))
    return checks


def doc_domain(doc: dict, name: str) -> list[int]:
    for v in doc["variables"]:
        if v["name"] == name:
            return list(range(v["lower"], v["upper"] + 1))
    raise InputError(f"unknown variable {name!r}")


def write_instances(pairs, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for iid, doc in pairs:
        p = out / f"{iid}.json"
        p.write_text(dump_instance(doc))
        paths.append(p)
    return paths

