"""Output models: a small arithmetic expression language and an external process adapter."""

from __future__ import annotations

import queue
import re
import subprocess
import threading
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import VariableSpec


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownVariable(ValueError):
    pass


class UnknownFunction(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

# --- tokenizer and parser ----------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        byte_off = len(source[:pos].encode("utf-8"))
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", byte_off)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), byte_off))
        pos = m.end()
    toks.append(_Tok("end", "", len(source.encode("utf-8"))))
    return toks


class _Parser:
    # expr  := term (('+'|'-') term)*
    # term  := unary (('*'|'/') unary)*
    # unary := '-' unary | power
    # power := atom ('^' unary)?
    # atom  := num | ident | ident '(' expr ')' | '(' expr ')'

    def __init__(self, source: str, variables: Sequence[VariableSpec]):
        self.toks = _tokenize(source)
        self.i = 0
        self.names = {v.name: k for k, v in enumerate(variables)}
        self.variables = list(variables)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            raise ExpressionSyntaxError(f"expected {text!r}", self.tok.offset)
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(float(t.text))
        if t.kind == "ident":
            self.take()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {t.text!r} at byte offset {t.offset}")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            return Var(self._resolve(t), t.text)
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"unexpected {what}", t.offset)

    def _resolve(self, t: _Tok) -> int:
        if t.text in self.names:
            return self.names[t.text]
        # positional alias x1..xm
        m = re.fullmatch(r"x([1-9]\d*)", t.text)
        if m and int(m.group(1)) <= len(self.variables):
            return int(m.group(1)) - 1
        raise UnknownVariable(f"unknown variable {t.text!r} at byte offset {t.offset}")


def to_source(node: Node) -> str:
    """Render an AST as fully parenthesised source that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def _eval(node: Node, cols: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(cols.shape[0], node.value)
    if isinstance(node, Var):
        return cols[:, node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, cols)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, cols))
    return _BINARY[node.op](_eval(node.left, cols), _eval(node.right, cols))


class Expression:
    """A parsed expression bound to its variable list; usable as an OutputModel."""

    concurrency_safe = True

    def __init__(self, root: Node, variables: Sequence[VariableSpec], source: str | None = None):
        self.root = root
        self.variables = tuple(variables)
        self.arity = len(self.variables)
        self.source = source if source is not None else to_source(root)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expression) and self.root == other.root

    def evaluate(self, point: Sequence[float]) -> float:
        return float(self.evaluate_batch(np.asarray([point], dtype=float))[0])

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.arity:
            raise ArityMismatch(f"expression takes {self.arity} inputs, got shape {points.shape}")
        with np.errstate(all="ignore"):
            return _eval(self.root, points).astype(float, copy=False)


def parse_expression(source: str, variables: Sequence[VariableSpec]) -> Expression:
    if not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return Expression(_Parser(source, variables).parse(), variables, source)


def evaluate_expression(e: Expression, point: Sequence[float]) -> float:
    if len(point) != e.arity:
        raise ArityMismatch(f"expression takes {e.arity} inputs, got {len(point)}")
    return e.evaluate(point)


# The four benchmark functions of the sensitivity study, over x1, x2.
BENCHMARKS = {
    "linear": "x1 + x2",
    "sum_of_squares": "x1^2 + x2^2",
    "sin_plus_cos": "sin(x1) + cos(x2)",
    "log_sum_abs": "log(abs(x1) + abs(x2))",
}


# --- external process ---------------------------------------------------------


class ModelProtocolError(RuntimeError):
    """Base class for failures talking to an external model."""


class ProcessDied(ModelProtocolError):
    pass


class ProtocolError(ModelProtocolError):
    pass


class ModelTimeout(ModelProtocolError):
    pass


_EOF = object()


class ExternalModel:
    """A model served by a child process over a line protocol on stdin/stdout.

    On start the child receives ``ARITY m`` and must answer ``OK``. Each request
    is one line of ``m`` space-separated decimals; each reply one decimal line.
    """

    concurrency_safe = False

    def __init__(self, command: Sequence[str], arity: int, timeout: float = 10.0):
        if arity < 1:
            raise ValueError("arity must be positive")
        self.command = list(command)
        self.arity = arity
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()

    def start(self) -> "ExternalModel":
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProcessDied(f"cannot launch {self.command!r}: {exc}") from exc
        threading.Thread(target=self._pump, args=(self._proc.stdout,), daemon=True).start()
        reply = self._exchange(f"ARITY {self.arity}")
        if reply != "OK":
            self.close()
            raise ProtocolError(f"handshake expected 'OK', got {reply!r}")
        return self

    def _pump(self, stream) -> None:
        for line in stream:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _exchange(self, request: str) -> str:
        if self._proc is None:
            self.start()
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProcessDied(f"model process is gone: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ModelTimeout(f"no reply within {self.timeout} s") from None
        if line is _EOF:
            raise ProcessDied(f"model process exited (code {self._proc.poll()})")
        return line.strip()

    def evaluate(self, point: Sequence[float]) -> float:
        if len(point) != self.arity:
            raise ArityMismatch(f"model takes {self.arity} inputs, got {len(point)}")
        reply = self._exchange(" ".join(repr(float(x)) for x in point))
        try:
            return float(reply)
        except ValueError:
            raise ProtocolError(f"non-numeric reply {reply!r}") from None

    def close(self) -> None:
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        try:
            if proc.stdin:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=1.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if proc.stdout:
            proc.stdout.close()

    def __enter__(self) -> "ExternalModel":
        if self._proc is None:
            self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external_evaluate(m: ExternalModel, point: Sequence[float]) -> float:
    return m.evaluate(point)
