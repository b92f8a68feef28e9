"""Command line front end.

    ghostsym run --config campaign.cfg
    ghostsym exec prog.minic --input x=3 --input y=1.5
    ghostsym symex prog.minic --mode ghost
    ghostsym ghost validate prog.minic ghost.minic --label f
    ghostsym corpus sync [--check]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import GhostsymError
from ..ghost import INVERSE, KINDS, fragment_info, make_artifact, validate_inverse
from ..minilang.interp import ConcreteState
from ..minilang.parser import parse_program
from ..replay import run_original
from .campaign import Report, make_provider, run_campaign, run_program
from .config import MODES, CampaignConfig, load_config
from .corpus import CORPUS_DIR, corpus_names, corpus_program, sync_fixtures


def _load_program(ref):
    p = Path(ref)
    if p.is_file():
        return p.stem, parse_program(p.read_text(encoding="utf-8"))
    if ref in corpus_names():
        return ref, corpus_program(ref).program
    raise GhostsymError(f"no such program: {ref}")


def _value(text):
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(low, 0)
    except ValueError:
        return float(low)


def cmd_run(args):
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    report = run_campaign(cfg)
    print(report.table())
    if cfg.output:
        print(f"report written to {cfg.output}")
    return 0


def cmd_exec(args):
    _, program = _load_program(args.program)
    store = {}
    for item in args.input:
        if "=" not in item:
            raise GhostsymError(f"--input expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        store[k.strip()] = _value(v)
    entry = program.proc(program.entry)
    for p in entry.params:
        store.setdefault(p.name, 0.0 if p.type.kind == "float" else 0)
    trace, ret, fault = run_original(program, ConcreteState(store=store), args.budget)
    out = {"trace": [f"{s}:{'T' if b else 'F'}" for s, b in trace], "ret": ret, "fault": fault}
    print(json.dumps(out, indent=2))
    return 1 if fault else 0


def cmd_symex(args):
    name, program = _load_program(args.program)
    cfg = CampaignConfig(modes=(args.mode,), budget=args.budget, provider=args.provider,
                         fixture_dir=args.fixture_dir, seed=args.seed)
    rep = run_program(program, args.mode, cfg, name=name, provider=make_provider(cfg))
    if args.json:
        print(json.dumps(rep.as_dict(), indent=2, default=str))
    else:
        print(Report({}, [rep]).table())
        for t in rep.tests:
            print(f"  {json.dumps(t['input']['store'])} -> {', '.join(t['new'])}")
        for e in rep.errors:
            print(f"  error: {e}")
    return 0


def cmd_validate(args):
    _, program = _load_program(args.program)
    path = Path(args.fixture)
    label, kind = args.label, args.kind
    parts = path.name.split(".")
    if len(parts) >= 4:           # <prog>.<label>.<kind>.minic
        label = label or parts[-3]
        kind = kind or parts[-2]
    label = label or "f"
    kind = kind or INVERSE
    info = fragment_info(program, label, kind)
    art = make_artifact(kind, info, path.read_text(encoding="utf-8"))
    print(f"{art.kind} ghost {art.entry} for @{label}: shape ok")
    if art.kind != INVERSE:
        return 0
    rep = validate_inverse(fragment_info(program, label, INVERSE), art, args.samples,
                           seed=args.seed)
    print(json.dumps(rep.as_dict(), indent=2, default=str))
    return 0 if rep.rate == 1.0 else 1


def cmd_sync(args):
    stale = sync_fixtures(CORPUS_DIR, args.fixture_dir, check=args.check)
    for s in stale:
        print(("stale: " if args.check else "updated: ") + s)
    return 1 if (args.check and stale) else 0


def build_parser():
    ap = argparse.ArgumentParser(prog="ghostsym", description="ghost-code assisted symbolic execution")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a campaign from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("exec", help="run a program concretely")
    p.add_argument("program")
    p.add_argument("--input", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--budget", type=int)
    p.set_defaults(fn=cmd_exec)

    p = sub.add_parser("symex", help="explore, solve and replay one program")
    p.add_argument("program")
    p.add_argument("--mode", choices=MODES, default="ghost")
    p.add_argument("--budget", type=float, default=60.0)
    p.add_argument("--provider", choices=("fixture", "http", "none"), default="fixture")
    p.add_argument("--fixture-dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_symex)

    g = sub.add_parser("ghost", help="ghost code utilities").add_subparsers(dest="action", required=True)
    p = g.add_parser("validate", help="shape-check a ghost file and test an inverse")
    p.add_argument("program")
    p.add_argument("fixture")
    p.add_argument("--label")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_validate)

    c = sub.add_parser("corpus", help="bundled corpus utilities").add_subparsers(dest="action", required=True)
    p = c.add_parser("sync", help="regenerate prompt-hash fixtures from corpus/ghosts")
    p.add_argument("--check", action="store_true")
    p.add_argument("--fixture-dir")
    p.set_defaults(fn=cmd_sync)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except GhostsymError as exc:
        print(f"ghostsym: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
