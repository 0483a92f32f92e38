"""Qualitative sign algebra and the sign-structured controllability matrix.

Entries live in the four-element set {0, +, -, +/-}.  Addition models the
superposition of walk products of possibly different signs; multiplication
models composing a walk with one more edge.  The matrix records, for every
node and walk length, all signs the corresponding controllability entry can
take over positive-magnitude realizations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .layered import SignedLayeredGraph, WalkSignSummary, walk_sign_sets, _seed_groups
from .system import Sign, StructuredSystem


class QSign(enum.Enum):
    ZERO = "0"
    PLUS = "+"
    MINUS = "-"
    INDET = "+/-"

    @property
    def glyph(self) -> str:
        return self.value

    @classmethod
    def from_glyph(cls, glyph: str) -> "QSign":
        for q in cls:
            if q.value == glyph:
                return q
        raise ValueError(f"not a qualitative sign glyph: {glyph!r}")

    @classmethod
    def from_sign(cls, sign: Sign) -> "QSign":
        return cls.PLUS if sign is Sign.PLUS else cls.MINUS

    @classmethod
    def from_sign_set(cls, signs: frozenset[Sign]) -> "QSign":
        if not signs:
            return cls.ZERO
        if signs == {Sign.PLUS}:
            return cls.PLUS
        if signs == {Sign.MINUS}:
            return cls.MINUS
        return cls.INDET


_Z, _P, _M, _I = QSign.ZERO, QSign.PLUS, QSign.MINUS, QSign.INDET

_ADD = {
    (_Z, _Z): _Z, (_Z, _P): _P, (_Z, _M): _M, (_Z, _I): _I,
    (_P, _P): _P, (_P, _M): _I, (_P, _I): _I,
    (_M, _M): _M, (_M, _I): _I,
    (_I, _I): _I,
}

_MUL = {
    (_Z, _Z): _Z, (_Z, _P): _Z, (_Z, _M): _Z, (_Z, _I): _Z,
    (_P, _P): _P, (_P, _M): _M, (_P, _I): _I,
    (_M, _M): _P, (_M, _I): _I,
    (_I, _I): _I,
}


def qsign_add(a: QSign, b: QSign) -> QSign:
    return _ADD.get((a, b)) or _ADD[(b, a)]


def qsign_mul(a: QSign, b: QSign) -> QSign:
    return _MUL.get((a, b)) or _MUL[(b, a)]


@dataclass(frozen=True)
class SignMatrix:
    """n x (n*m) qualitative matrix in column blocks of width m.

    Column j (1-based) holds walk length k = (j-1) // m from driver
    l = ((j-1) % m) + 1.
    """
    n: int
    m: int
    entries: tuple[tuple[QSign, ...], ...]

    def entry(self, i: int, k: int, driver: int = 1) -> QSign:
        """Entry for node i (1-based), walk length k, given driver."""
        return self.entries[i - 1][k * self.m + (driver - 1)]

    def column_index(self, k: int, driver: int = 1) -> int:
        """1-based flat column index of block (k, driver)."""
        return k * self.m + driver

    @property
    def cols(self) -> int:
        return self.n * self.m

    def row(self, i: int) -> tuple[QSign, ...]:
        return self.entries[i - 1]

    def to_json_grid(self) -> list[list[str]]:
        return [[q.glyph for q in row] for row in self.entries]

    @classmethod
    def from_json_grid(cls, grid: list[list[str]], m: int = 1) -> "SignMatrix":
        entries = tuple(tuple(QSign.from_glyph(g) for g in row) for row in grid)
        return cls(len(entries), m, entries)

    def render_text(self) -> str:
        width = max(len(q.glyph) for row in self.entries for q in row)
        lines = []
        for row in self.entries:
            lines.append(" ".join(q.glyph.rjust(width) for q in row))
        return "\n".join(lines)


def sscm(system: StructuredSystem) -> SignMatrix:
    """Sign-structured controllability matrix via qualitative matrix powers.

    Column block k is S(A)^k S(B), computed by propagating each driver's
    qualitative column through S(A).
    """
    n = system.n
    m = system.m
    sign_a: list[list[QSign]] = [[_Z] * n for _ in range(n)]
    for e in system.edges:
        sign_a[e.dst - 1][e.src - 1] = QSign.from_sign(e.sign)

    columns: list[list[QSign]] = [[_Z] * n for _ in range(n * m)]
    for ell, seeds in enumerate(_seed_groups(system), start=1):
        col = [_Z] * n
        for a in seeds:
            col[a.node - 1] = QSign.from_sign(a.sign)
        for k in range(n):
            columns[k * m + (ell - 1)] = col
            if k == n - 1:
                break
            nxt = [_Z] * n
            for i in range(n):
                acc = _Z
                for j in range(n):
                    acc = qsign_add(acc, qsign_mul(sign_a[i][j], col[j]))
                nxt[i] = acc
            col = nxt
    entries = tuple(tuple(columns[j][i] for j in range(n * m)) for i in range(n))
    return SignMatrix(n, m, entries)


def sscm_from_walk_sets(summary: WalkSignSummary, n: int, m: int) -> SignMatrix:
    """Reduction of walk-sign sets to the qualitative alphabet."""
    entries = tuple(
        tuple(
            QSign.from_sign_set(summary.get(i + 1, j // m, (j % m) + 1))
            for j in range(n * m))
        for i in range(n))
    return SignMatrix(n, m, entries)


def layer_column_consistency(gs: SignedLayeredGraph, s: SignMatrix) -> bool:
    """Nonzero entry at (i, length k, driver) iff node i occurs at layer k+1."""
    for dl in gs.per_driver:
        for i in range(1, s.n + 1):
            for k in range(s.n):
                nonzero = s.entry(i, k, dl.driver) is not _Z
                if nonzero != dl.occurs(i, k + 1):
                    return False
    return True


def herdable_follower(s: SignMatrix, j: int) -> bool:
    """A follower is herdable when its row has any nonzero entry."""
    if not (1 <= j <= s.n):
        raise IndexError(f"node {j} outside [1, {s.n}]")
    return any(q is not _Z for q in s.row(j))


def sscm_reduction_matches(system: StructuredSystem) -> bool:
    """Internal oracle: semiring powers equal the walk-sign-set reduction."""
    summary = walk_sign_sets(system)
    return sscm(system) == sscm_from_walk_sets(summary, system.n, system.m)
