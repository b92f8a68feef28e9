"""Ghost artifacts: parsing provider answers, requesting with retries, and
validating inverses by concrete round trips."""

from __future__ import annotations

import itertools
import logging
import math
import random
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..errors import (GhostRuntimeFault, GhostsymError, MiniCSyntaxError, ProviderUnavailable,
                      RuntimeFault, SortError, StepBudgetExceeded, UnparsableGhost)
from ..minilang import ast as A
from ..minilang.interp import ConcreteState, default_value, exec_program, run_stmts
from ..minilang.parser import _Parser, parse_program
from ..minilang.printer import proc_text, struct_text
from .prompts import (INVERSE, KINDS, SURROGATE, TOPOLOGY, FragmentInfo, fragment_info,
                      prompt_hash, render_prompt)

log = logging.getLogger(__name__)

MAX_CANDIDATES = 8
RETRIES = 3
GHOST_BUDGET = 200_000

_FENCE = re.compile(r"```[A-Za-z]*\n(.*?)```", re.S)
_KIND_TAG = re.compile(r"^\s*//\s*kind:\s*(\w+)", re.M)
_DOMAIN = re.compile(r"^\s*//\s*domain:\s*(\w+)\s+(int|float)\s+(\S+)\s+(\S+)\s*$", re.M)
_MODE = re.compile(r"^\s*//\s*mode:\s*(\w+)", re.M)


@dataclass
class GhostArtifact:
    kind: str
    program: A.Program            # ghost procedures plus the host declarations they use
    entry: str
    target: str                   # fragment label
    source: str = ""
    provenance: Dict[str, Any] = field(default_factory=dict)
    validation: Dict[str, Any] = field(default_factory=dict)
    domain: Dict[str, Tuple[str, float, float]] = field(default_factory=dict)
    mode: str = "set"             # inverse: set | closest
    rd_vars: Tuple[str, ...] = ()
    wr_vars: Tuple[str, ...] = ()

    @property
    def proc(self) -> A.Procedure:
        return self.program.proc(self.entry)


def extract_code(text: str) -> str:
    """Strip markdown fences around a MiniC answer."""
    blocks = _FENCE.findall(text)
    return "\n".join(blocks) if blocks else text


def parse_ghost(text: str, host: A.Program, entry: str) -> A.Program:
    """Parse ghost source in the context of ``host``'s records and procedures.

    Host declarations the ghost does not redefine are made available to it.
    """
    code = extract_code(text)
    structs, procs = _Parser(code).program()
    own_structs = {s.name for s in structs}
    own_procs = {p.name for p in procs}
    prelude = [struct_text(s) for s in host.structs if s.name not in own_structs]
    helpers = [proc_text(p) for p in host.procs if p.name not in own_procs]
    # host structs go first so the ghost can refer to them, host procedures last
    program = parse_program("\n".join(prelude + [code] + helpers))
    if not program.has_proc(entry):
        raise SortError(f"answer does not define {entry}", None, None)
    return A.Program(program.structs, program.procs, entry)


def check_shape(kind: str, info: FragmentInfo, program: A.Program, entry: str):
    """Raise SortError when the ghost does not have the expected interface."""
    proc = program.proc(entry)
    fp = info.footprint
    if kind == INVERSE:
        if len(proc.params) != len(fp.wr_vars):
            raise SortError(f"{entry} must take {len(fp.wr_vars)} parameter(s)", None, None)
        emits = [s for p in program.procs for s in A.walk_stmts(p.body) if isinstance(s, A.Emit)]
        if not emits:
            raise SortError(f"{entry} never emits a candidate", None, None)
        for e in emits:
            if len(e.values) != len(fp.rd_vars):
                raise SortError(f"emit needs {len(fp.rd_vars)} value(s)", None, None)
    elif kind == SURROGATE:
        wr = set(fp.wr_vars)
        want = [v for v in fp.rd_vars if v not in wr] + list(fp.wr_vars)
        if len(proc.params) != len(want):
            raise SortError(f"{entry} must take parameters {', '.join(want)}", None, None)
        for prm, name in zip(proc.params, want):
            if (name in wr) != prm.ref:
                raise SortError(f"parameter {prm.name} must {'' if name in wr else 'not '}be ref",
                                None, None)
    elif kind == TOPOLOGY:
        if not proc.params or proc.params[-1].type.kind != "int":
            raise SortError(f"{entry} must end with an int selector parameter", None, None)
        for s in A.walk_stmts(proc.body):
            if isinstance(s, (A.Assume, A.If, A.Return)):
                continue
            if isinstance(s, A.Assign):
                tgt = s.target
                if isinstance(tgt, A.FieldLoad):
                    ty = _field_type(program, tgt.name)
                    if ty is not None and ty.kind != "ptr":
                        raise SortError(f"topology case writes data field {tgt.name}", None, None)
                continue
            raise SortError(f"topology builders may only link and assume, found "
                            f"{type(s).__name__}", None, None)


def _field_type(program, name):
    for s in program.structs:
        ty = s.field_type(name)
        if ty is not None:
            return ty
    return None


def parse_domain(text: str):
    dom = {}
    for name, kind, lo, hi in _DOMAIN.findall(text):
        conv = int if kind == "int" else float
        dom[name] = (kind, conv(_num(lo)), conv(_num(hi)))
    return dom


def _num(s):
    s = s.replace("pi", repr(math.pi))
    if "*" in s:
        a, b = s.split("*", 1)
        return float(a) * float(b)
    return float(s) if any(c in s for c in ".eE") else int(s, 0)


def make_artifact(kind: str, info: FragmentInfo, text: str, provenance=None) -> GhostArtifact:
    """Parse and shape-check ``text``; raises MiniCSyntaxError or SortError."""
    tag = _KIND_TAG.search(text)
    if tag and tag.group(1) in KINDS and tag.group(1) != kind:
        log.info("provider tagged @%s as %s instead of %s", info.label, tag.group(1), kind)
        kind = tag.group(1)
        info = fragment_info(info.program, info.label, kind, info.pool)
    entry = info.ghost_name
    program = parse_ghost(text, info.program, entry)
    check_shape(kind, info, program, entry)
    mode = _MODE.search(text)
    return GhostArtifact(kind, program, entry, info.label, extract_code(text),
                         dict(provenance or {}), {}, parse_domain(text),
                         mode.group(1) if mode else "set",
                         info.footprint.rd_vars, info.footprint.wr_vars)


def request_ghost(fragment, kind: str, provider, retries: int = RETRIES) -> GhostArtifact:
    """Render the prompt, ask ``provider`` and parse the answer.

    A parse or sort failure is appended to the prompt and retried, up to
    ``retries`` attempts in total.
    """
    if provider is None:
        raise ProviderUnavailable("no ghost provider configured")
    info = fragment if isinstance(fragment, FragmentInfo) else fragment_info(*fragment, kind)
    base = render_prompt(kind, info)
    prompt = base
    tokens_in = tokens_out = 0
    last = None
    for attempt in range(1, retries + 1):
        resp = provider.request(prompt, {"base": base, "attempt": attempt})
        tokens_in += resp.input_tokens
        tokens_out += resp.output_tokens
        prov = {"provider": provider.name, "model": getattr(provider, "model", ""),
                "prompt_hash": prompt_hash(base), "attempts": attempt,
                "input_tokens": tokens_in, "output_tokens": tokens_out, "cached": resp.cached}
        try:
            return make_artifact(kind, info, resp.text, prov)
        except (MiniCSyntaxError, SortError) as exc:
            last = exc
            log.info("ghost for @%s rejected on attempt %d: %s", info.label, attempt, exc)
            prompt = render_prompt(kind, info, {"diagnostic": str(exc)})
    err = UnparsableGhost(f"no usable {kind} ghost for @{info.label} after {retries} attempts: {last}")
    err.input_tokens, err.output_tokens = tokens_in, tokens_out
    raise err


# ------------------------------------------------------------------ execution

def _coerce(value, ty):
    if ty.kind == "float":
        return float(value)
    if ty.kind == "int":
        return int(value)
    if ty.kind == "bool":
        return bool(value)
    return value


def run_inverse(artifact: GhostArtifact, post_values: Dict[str, Any], rd_vars=None):
    """Concretely run the inverse on ``post_values``; returns candidate dicts.

    Candidates come in emission order, at most eight of them.
    """
    proc = artifact.proc
    store = {}
    for prm in proc.params:
        if prm.name not in post_values:
            raise GhostRuntimeFault(f"inverse input {prm.name} has no value")
        store[prm.name] = _coerce(post_values[prm.name], prm.type)
    try:
        final = exec_program(artifact.program, ConcreteState(store=store), entry=artifact.entry,
                             budget=GHOST_BUDGET)
    except (RuntimeFault, StepBudgetExceeded) as exc:
        raise GhostRuntimeFault(f"inverse {artifact.entry} failed: {exc}") from exc
    names = rd_vars or artifact.rd_vars
    out = []
    for tup in final.emitted[:MAX_CANDIDATES]:
        out.append(dict(zip(names, tup)) if names else tup)
    return out


def run_fragment(program: A.Program, label: str, pre_values: Dict[str, Any], types=None):
    """Concretely execute the body of fragment ``label`` from ``pre_values``.

    Variables not given a value start at their type's default.
    """
    _, frag = A.find_fragment(program, label)
    store = {}
    for name, ty in (types or {}).items():
        store[name] = default_value(ty)
    for name, v in pre_values.items():
        ty = (types or {}).get(name)
        store[name] = _coerce(v, ty) if ty is not None else v
    return run_stmts(program, frag.body, store).store


# ------------------------------------------------------------------ validation

def _close(a, b, rel=1e-6):
    if isinstance(a, float) or isinstance(b, float):
        a, b = float(a), float(b)
        if math.isnan(a) or math.isnan(b):
            return False
        return abs(a - b) <= rel * max(1.0, abs(a), abs(b))
    return a == b


@dataclass
class InverseReport:
    total: int = 0
    passed: int = 0
    skipped: int = 0
    exhaustive: bool = False
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)
    status: str = "trusted"

    @property
    def rate(self) -> float:
        return self.passed / self.total if self.total else 0.0

    def as_dict(self):
        return {"total": self.total, "passed": self.passed, "skipped": self.skipped,
                "rate": self.rate, "exhaustive": self.exhaustive, "status": self.status,
                "counterexamples": self.counterexamples[:10]}


def _samples(domain, rd_vars, n, seed):
    spaces = []
    exhaustive = True
    for v in rd_vars:
        kind, lo, hi = domain.get(v, ("int", -(1 << 31), (1 << 31) - 1))
        if kind == "int" and hi - lo + 1 <= 4096:
            spaces.append(range(lo, hi + 1))
        else:
            exhaustive = False
            spaces.append((kind, lo, hi))
    if exhaustive and math.prod(len(s) for s in spaces) <= max(n, 4096):
        return [dict(zip(rd_vars, combo)) for combo in itertools.product(*spaces)], True
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        rho = {}
        for v, sp in zip(rd_vars, spaces):
            if isinstance(sp, range):
                rho[v] = rng.choice(sp)
            else:
                kind, lo, hi = sp
                rho[v] = rng.randint(int(lo), int(hi)) if kind == "int" else rng.uniform(lo, hi)
        out.append(rho)
    return out, False


def validate_inverse(fragment, artifact: GhostArtifact, n_samples: int = 1000, *, seed: int = 0,
                     threshold: float = 1.0, rel_tol: float = 1e-6) -> InverseReport:
    """Check rho in f_inv(f(rho)) on the artifact's declared domain.

    Small integer domains are enumerated; otherwise ``n_samples`` seeded
    random pre-states are drawn.  Pre-states on which the fragment itself
    faults are outside its domain and are skipped.
    """
    info = fragment if isinstance(fragment, FragmentInfo) else fragment_info(*fragment, INVERSE)
    fp = info.footprint
    rd, wr = fp.rd_vars, fp.wr_vars
    samples, exhaustive = _samples(artifact.domain, rd, n_samples, seed)
    rep = InverseReport(exhaustive=exhaustive)
    for rho in samples:
        try:
            post = run_fragment(info.program, info.label, rho, fp.types)
        except (RuntimeFault, StepBudgetExceeded):
            rep.skipped += 1
            continue
        rep.total += 1
        omega = {v: post[v] for v in wr}
        try:
            cands = run_inverse(artifact, omega, rd)
        except GhostsymError as exc:
            rep.counterexamples.append({"pre": rho, "post": omega, "error": str(exc)})
            continue
        if any(all(_close(c.get(v), rho[v], rel_tol) for v in rd) for c in cands):
            rep.passed += 1
        else:
            rep.counterexamples.append({"pre": rho, "post": omega, "candidates": cands[:4]})
    rep.status = "trusted" if rep.total and rep.rate >= threshold else "heuristic"
    artifact.validation.update(rep.as_dict())
    return rep


__all__ = ["GhostArtifact", "extract_code", "parse_ghost", "check_shape", "make_artifact",
           "request_ghost", "run_inverse", "run_fragment", "validate_inverse", "InverseReport",
           "MAX_CANDIDATES", "RETRIES"]
