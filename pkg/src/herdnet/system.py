"""Signed directed networks with leader/driver input attachments.

A network is a signed digraph on nodes 1..n together with a description of
how external input enters it: either a set of leader nodes sharing one
signal, or a set of driver nodes with independent signals.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Sign(enum.Enum):
    PLUS = 1
    MINUS = -1

    def __neg__(self) -> "Sign":
        return Sign.MINUS if self is Sign.PLUS else Sign.PLUS

    def __mul__(self, other: "Sign") -> "Sign":
        return Sign(self.value * other.value)

    @property
    def glyph(self) -> str:
        return "+" if self is Sign.PLUS else "-"

    @classmethod
    def from_glyph(cls, glyph: str) -> "Sign":
        if glyph == "+":
            return cls.PLUS
        if glyph == "-":
            return cls.MINUS
        raise ValueError(f"not a sign glyph: {glyph!r}")


class InputMode(enum.Enum):
    SINGLE_INPUT = "single-input"
    MULTI_DRIVER = "multi-driver"


@dataclass(frozen=True, order=True)
class SignedEdge:
    src: int
    dst: int
    sign: Sign = field(compare=False)
    weight: float | None = field(default=None, compare=False)


@dataclass(frozen=True)
class InputAttachment:
    node: int
    sign: Sign = Sign.PLUS
    strength: float | None = None


@dataclass(frozen=True)
class StructuredSystem:
    n: int
    edges: tuple[SignedEdge, ...]
    mode: InputMode
    inputs: tuple[InputAttachment, ...]

    @property
    def m(self) -> int:
        """Number of input columns of B."""
        return len(self.inputs) if self.mode is InputMode.MULTI_DRIVER else 1

    @property
    def input_nodes(self) -> tuple[int, ...]:
        return tuple(a.node for a in self.inputs)

    def edge_sign(self, src: int, dst: int) -> Sign | None:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e.sign
        return None

    def out_edges(self, node: int) -> tuple[SignedEdge, ...]:
        return tuple(e for e in self.edges if e.src == node)

    def in_edges(self, node: int) -> tuple[SignedEdge, ...]:
        return tuple(e for e in self.edges if e.dst == node)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ParseError(ValueError):
    """Syntax or semantic error in an edge-list document."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def validate(system: StructuredSystem) -> list[Diagnostic]:
    """Check every type invariant; one diagnostic per violation."""
    out: list[Diagnostic] = []
    if system.n < 1:
        out.append(Diagnostic("BadNodeCount", f"n must be >= 1, got {system.n}"))
    seen: set[tuple[int, int]] = set()
    for e in system.edges:
        if not (1 <= e.src <= system.n) or not (1 <= e.dst <= system.n):
            out.append(Diagnostic(
                "IndexOutOfRange",
                f"edge ({e.src}, {e.dst}) references a node outside [1, {system.n}]"))
        if (e.src, e.dst) in seen:
            out.append(Diagnostic(
                "DuplicateEdge", f"more than one edge for pair ({e.src}, {e.dst})"))
        seen.add((e.src, e.dst))
        if e.weight is not None and not e.weight > 0:
            out.append(Diagnostic(
                "NonPositiveWeight", f"edge ({e.src}, {e.dst}) has weight {e.weight}"))
    if not system.inputs:
        out.append(Diagnostic("NoInputs", "at least one leader or driver is required"))
    attached: set[int] = set()
    for a in system.inputs:
        if not (1 <= a.node <= system.n):
            out.append(Diagnostic(
                "IndexOutOfRange", f"input at node {a.node} outside [1, {system.n}]"))
        if a.node in attached:
            out.append(Diagnostic("DuplicateInput", f"node {a.node} attached twice"))
        attached.add(a.node)
        if a.strength is not None and not a.strength > 0:
            out.append(Diagnostic(
                "NonPositiveStrength", f"input at node {a.node} has strength {a.strength}"))
    return out


def input_connected(system: StructuredSystem) -> tuple[bool, frozenset[int]]:
    """Directed reachability of every node from some input-attached node."""
    adjacency: dict[int, list[int]] = {}
    for e in system.edges:
        adjacency.setdefault(e.src, []).append(e.dst)
    seen = set(system.input_nodes)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in adjacency.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    unreachable = frozenset(range(1, system.n + 1)) - seen
    return (not unreachable, unreachable)


def _parse_number(token: str, what: str, line: int, column: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{what} must be a decimal literal, got {token!r}", line, column)
    if not value > 0:
        raise ParseError(f"{what} must be > 0, got {token}", line, column)
    return value


def _parse_index(token: str, line: int, column: int) -> int:
    if not token.lstrip("-").isdigit():
        raise ParseError(f"expected a node index, got {token!r}", line, column)
    return int(token)


def parse_system(text: str) -> StructuredSystem:
    """Parse an edge-list document.

    Grammar (one directive per line, '#' starts a comment)::

        n <int>
        leader <node> [+|-] [strength]
        driver <node> [+|-] [strength]
        edge <src> <dst> <+|-> [weight]
    """
    n: int | None = None
    edges: list[SignedEdge] = []
    inputs: list[InputAttachment] = []
    kinds: set[str] = set()
    seen_pairs: set[tuple[int, int]] = set()
    attached: set[int] = set()

    def check_range(idx: int, line: int, column: int) -> int:
        if n is None:
            raise ParseError("node referenced before the 'n' directive", line, column)
        if not (1 <= idx <= n):
            raise ParseError(f"node index {idx} outside [1, {n}]", line, column)
        return idx

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        tokens = body.split()
        columns: list[int] = []
        search = 0
        for t in tokens:
            at = body.find(t, search)
            columns.append(at + 1)
            search = at + len(t)
        head = tokens[0]
        if head == "n":
            if n is not None:
                raise ParseError("duplicate 'n' directive", lineno, columns[0])
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise ParseError("expected 'n <positive int>'", lineno, columns[0])
            n = int(tokens[1])
        elif head in ("leader", "driver"):
            kinds.add(head)
            if kinds == {"leader", "driver"}:
                raise ParseError("cannot mix 'leader' and 'driver' lines", lineno, columns[0])
            if len(tokens) < 2 or len(tokens) > 4:
                raise ParseError(f"expected '{head} <node> [+|-] [strength]'", lineno, columns[0])
            node = check_range(_parse_index(tokens[1], lineno, columns[1]), lineno, columns[1])
            if node in attached:
                raise ParseError(f"node {node} attached twice", lineno, columns[1])
            attached.add(node)
            sign = Sign.PLUS
            strength: float | None = None
            rest = tokens[2:]
            restcols = columns[2:]
            if rest and rest[0] in ("+", "-"):
                sign = Sign.from_glyph(rest[0])
                rest, restcols = rest[1:], restcols[1:]
            if rest:
                strength = _parse_number(rest[0], "strength", lineno, restcols[0])
                rest, restcols = rest[1:], restcols[1:]
            if rest:
                raise ParseError(f"unexpected token {rest[0]!r}", lineno, restcols[0])
            inputs.append(InputAttachment(node, sign, strength))
        elif head == "edge":
            if len(tokens) < 4 or len(tokens) > 5:
                raise ParseError("expected 'edge <src> <dst> <+|-> [weight]'", lineno, columns[0])
            src = check_range(_parse_index(tokens[1], lineno, columns[1]), lineno, columns[1])
            dst = check_range(_parse_index(tokens[2], lineno, columns[2]), lineno, columns[2])
            if tokens[3] not in ("+", "-"):
                raise ParseError(f"expected edge sign '+' or '-', got {tokens[3]!r}",
                                 lineno, columns[3])
            sign = Sign.from_glyph(tokens[3])
            weight = None
            if len(tokens) == 5:
                weight = _parse_number(tokens[4], "weight", lineno, columns[4])
            if (src, dst) in seen_pairs:
                raise ParseError(f"duplicate edge ({src}, {dst})", lineno, columns[1])
            seen_pairs.add((src, dst))
            edges.append(SignedEdge(src, dst, sign, weight))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, columns[0])

    if n is None:
        raise ParseError("missing 'n' directive", max(1, text.count('\n') + 1))
    if not inputs:
        raise ParseError("zero inputs: at least one leader or driver line is required",
                         text.count('\n') + 1)
    mode = InputMode.MULTI_DRIVER if "driver" in kinds else InputMode.SINGLE_INPUT
    system = StructuredSystem(n, tuple(sorted(edges)), mode, tuple(inputs))
    problems = validate(system)
    if problems:
        raise ParseError("; ".join(str(p) for p in problems), 1)
    return system


def serialize_system(system: StructuredSystem) -> str:
    """Canonical edge-list text; parse(serialize(s)) == s for validated s."""
    kind = "driver" if system.mode is InputMode.MULTI_DRIVER else "leader"
    lines = [f"n {system.n}"]
    for a in system.inputs:
        parts = [kind, str(a.node), a.sign.glyph]
        if a.strength is not None:
            parts.append(format(a.strength, ".17g"))
        lines.append(" ".join(parts))
    for e in sorted(system.edges):
        parts = ["edge", str(e.src), str(e.dst), e.sign.glyph]
        if e.weight is not None:
            parts.append(format(e.weight, ".17g"))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def build_system(n: int,
                 edges: list[tuple[int, int, str]] | list[tuple[int, int, str, float]],
                 leaders: list | None = None,
                 drivers: list | None = None) -> StructuredSystem:
    """Convenience constructor from terse tuples; signs given as glyphs."""
    if (leaders is None) == (drivers is None):
        raise ValueError("exactly one of leaders/drivers must be given")
    parsed_edges = []
    for spec in edges:
        src, dst, glyph = spec[0], spec[1], spec[2]
        weight = spec[3] if len(spec) > 3 else None
        parsed_edges.append(SignedEdge(src, dst, Sign.from_glyph(glyph), weight))
    attachments = []
    for item in (leaders if leaders is not None else drivers):
        if isinstance(item, int):
            attachments.append(InputAttachment(item))
        else:
            node, glyph = item[0], item[1]
            strength = item[2] if len(item) > 2 else None
            attachments.append(InputAttachment(node, Sign.from_glyph(glyph), strength))
    mode = InputMode.SINGLE_INPUT if leaders is not None else InputMode.MULTI_DRIVER
    return StructuredSystem(n, tuple(sorted(parsed_edges)), mode, tuple(attachments))
