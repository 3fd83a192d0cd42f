"""JSON report document and certificate re-verification."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .forking import cert_from_dict, is_morley
from .formula import Var, conj, constants, free_vars, map_constants, substitute
from .rank import RankTree, UthValue
from .theories import get_theory

CERT_KINDS = ("divide", "fork", "rank_tree", "uth", "uth_star", "morley")


@dataclass
class Report:
    command: str
    theory: str
    inputs: dict = field(default_factory=dict)
    result: object = None
    certificate: object = None
    bounds: dict = field(default_factory=dict)
    oracle: object = None
    wall_time_ms: float = 0.0
    unknown: bool = False
    failed: bool = False

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "theory": self.theory,
            "inputs": self.inputs,
            "result": self.result,
            "certificate": self.certificate,
            "bounds": self.bounds,
            "oracle": self.oracle,
            "wall_time_ms": self.wall_time_ms,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def strip_timing(doc: dict) -> dict:
    """Report without the wall-time field, for byte comparisons."""
    return {k: v for k, v in doc.items() if k != "wall_time_ms"}


def _verify_morley(d: dict) -> bool:
    th = get_theory(d["theory"])
    el = lambda data: tuple(th.element(s) for s in data)
    base = el(d["base"])
    seq = [el(s) for s in d["sequence"]]
    if not is_morley(th, seq, base):
        return False
    if "phi" not in d:
        xs = [Var(v["name"], v["sort"]) for v in d["vars"]]
        t = th.parse(d["type"], {v.name: v.sort for v in xs})
        return all(th.holds(substitute(t, dict(zip(xs, s)))) for s in seq)
    phi = th.parse(d["phi"])
    a = seq[0]
    if set(a) != set(constants(phi)) - set(base):
        return False
    # the sequence starts at the parameter tuple; instantiate by position
    insts = [map_constants(phi, dict(zip(a, s))) for s in seq]
    x = sorted(free_vars(phi), key=lambda v: v.name)
    return th.holds(substitute(conj(insts), dict(zip(x, el(d["b"])))))


def verify_certificate(d: dict) -> bool:
    kind = d["kind"]
    if kind in ("divide", "fork"):
        return cert_from_dict(d).verify()
    if kind == "rank_tree":
        return RankTree.from_dict(d).verify()
    if kind in ("uth", "uth_star"):
        return UthValue.from_dict(d).verify()
    if kind == "morley":
        return _verify_morley(d)
    raise ValueError(f"unknown certificate kind {kind!r}")


def _walk(obj, path="$"):
    if isinstance(obj, dict):
        if obj.get("kind") in CERT_KINDS and "theory" in obj:
            yield path, obj
            return
        for k, v in obj.items():
            yield from _walk(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _walk(v, f"{path}[{i}]")


def recheck_report(doc: dict) -> tuple[int, list[str]]:
    """Re-verify every certificate found in a report; returns the number
    checked and the JSON paths of those that failed."""
    n = 0
    failures = []
    for path, cert in _walk(doc):
        n += 1
        try:
            ok = verify_certificate(cert)
        except Exception as e:  # a malformed certificate counts as a failure
            ok = False
            path = f"{path} ({e})"
        if not ok:
            failures.append(path)
    return n, failures
