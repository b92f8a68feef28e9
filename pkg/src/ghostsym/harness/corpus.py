"""The bundled mini-bomb corpus and its fixture directory.

Layout under ``ghostsym/corpus``:

  programs/<name>.minic                  the program under test
  ghosts/<name>.<label>.<kind>.minic     hand-checked ghost answers
  fixtures/<prompt hash>.minic           the same answers keyed by prompt
  manifest.json                          categories, unreachable targets, witnesses

``sync_fixtures`` regenerates ``fixtures/`` from ``ghosts/`` by rendering the
prompt each ghost answers; the fixture provider then serves them offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..minilang import ast as A
from ..minilang.interp import ConcreteState
from ..minilang.parser import parse_program

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


@dataclass
class GhostSource:
    label: str
    kind: str
    path: Path

    @property
    def text(self) -> str:
        return self.path.read_text(encoding="utf-8")


@dataclass
class CorpusProgram:
    name: str
    path: Path
    category: str = ""
    unreachable: Tuple[str, ...] = ()
    witnesses: List[ConcreteState] = field(default_factory=list)
    ghosts: List[GhostSource] = field(default_factory=list)

    @property
    def source(self) -> str:
        return self.path.read_text(encoding="utf-8")

    @property
    def program(self) -> A.Program:
        return parse_program(self.source)


def witness_state(entry: dict) -> ConcreteState:
    heap = {int(a): dict(cell) for a, cell in entry.get("heap", {}).items()}
    return ConcreteState(store=dict(entry.get("store", {})), heap=heap)


@lru_cache(maxsize=None)
def _manifest(root: str) -> dict:
    path = Path(root) / "manifest.json"
    return json.loads(path.read_text(encoding="utf-8")) if path.is_file() else {"programs": {}}


def ghost_sources(name: str, root: Path = CORPUS_DIR) -> List[GhostSource]:
    out = []
    for path in sorted((root / "ghosts").glob(f"{name}.*.minic")):
        parts = path.name.split(".")
        if len(parts) == 4:
            out.append(GhostSource(parts[1], parts[2], path))
    return out


def corpus_program(name: str, root: Path = CORPUS_DIR) -> CorpusProgram:
    path = root / "programs" / f"{name}.minic"
    if not path.is_file():
        raise FileNotFoundError(f"no corpus program {name!r}")
    meta = _manifest(str(root))["programs"].get(name, {})
    return CorpusProgram(name, path, meta.get("category", ""), tuple(meta.get("unreachable", ())),
                         [witness_state(w) for w in meta.get("witnesses", ())],
                         ghost_sources(name, root))


def corpus_names(root: Path = CORPUS_DIR) -> List[str]:
    return sorted(p.stem for p in (root / "programs").glob("*.minic"))


def load_corpus(root: Path = CORPUS_DIR) -> List[CorpusProgram]:
    return [corpus_program(n, root) for n in corpus_names(root)]


def fixture_entries(root: Path = CORPUS_DIR) -> Dict[str, GhostSource]:
    """Prompt hash -> ghost answer, for every ghost of every corpus program."""
    from ..ghost.prompts import fragment_info, prompt_hash, render_prompt
    out = {}
    for prog in load_corpus(root):
        program = prog.program
        for g in prog.ghosts:
            info = fragment_info(program, g.label, g.kind)
            out[prompt_hash(render_prompt(g.kind, info))] = g
    return out


def sync_fixtures(root: Path = CORPUS_DIR, fixture_dir: Optional[Path] = None,
                  check: bool = False) -> List[str]:
    """Write (or with ``check`` only compare) ``fixtures/<hash>.minic``.

    Returns the fixture names that were missing or stale.
    """
    fixture_dir = Path(fixture_dir or root / "fixtures")
    fixture_dir.mkdir(parents=True, exist_ok=True)
    entries = fixture_entries(root)
    stale = []
    for key, g in sorted(entries.items()):
        path = fixture_dir / f"{key}.minic"
        text = g.text
        if not path.is_file() or path.read_text(encoding="utf-8") != text:
            stale.append(path.name)
            if not check:
                path.write_text(text, encoding="utf-8")
    if not check:
        for path in fixture_dir.glob("*.minic"):
            if path.stem not in entries:
                path.unlink()
                stale.append(path.name)
    return stale


__all__ = ["CORPUS_DIR", "CorpusProgram", "GhostSource", "corpus_program", "corpus_names",
           "load_corpus", "ghost_sources", "fixture_entries", "sync_fixtures", "witness_state"]
