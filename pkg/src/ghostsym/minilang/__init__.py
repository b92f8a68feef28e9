"""MiniC: the source language for target programs and ghost code."""

from . import ast
from .ast import FragmentLabel, Program
from .interp import ConcreteState, Interpreter, exec_program, run_stmts
from .parser import INTRINSICS, check_program, parse_program, tokenize
from .printer import pretty_print, stmts_text
from .transform import fragment_body, replace_fragment, resolve_label

# ``exec`` is the name used throughout the docs; it shadows the builtin only
# inside this namespace.
exec = exec_program  # noqa: A001

__all__ = [
    "ast", "FragmentLabel", "Program", "ConcreteState", "Interpreter",
    "exec_program", "exec", "run_stmts", "INTRINSICS", "check_program",
    "parse_program", "tokenize", "pretty_print", "stmts_text", "fragment_body",
    "replace_fragment", "resolve_label",
]
