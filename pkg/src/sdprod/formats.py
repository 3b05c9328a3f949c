"""Text formats for programs, graphs, sign matrices, and games.

All formats are line-oriented with '#' comments.  Floating values are
printed with 17 significant digits, which round-trips float64 exactly.

Program files::

    DIM 2
    OBJECTIVE
    0 1 -1
    EQ 1
    0 0 1
    1 1 1
    NONNEG
    0 1 0.5

Sections OBJECTIVE (once, first), then one block per constraint: EQ or
LE followed by the right-hand side on the header line, or NONNEG with no
right-hand side.  Triples "i j value" describe the upper triangle
(i <= j) of a symmetric matrix.  Canonical emission orders constraints
by (relation, insertion index), EQ before LE, and triples by (i, j).

Graphs: first line the vertex count, then one "i j" edge per line.
Sign matrices: first line "rows cols", then rows of +-1 entries.
Games: "GAME |S| |T| |U| |W|", a "P" block with |S| rows of |T|
probabilities, and one "V s t" block per question pair with |U| rows of
|W| zero/one entries.
"""

from __future__ import annotations

import numpy as np

from .library import Game, Graph, SignMatrix
from .model import LinearConstraint, Relation, SdpProgram

__all__ = [
    "ParseError",
    "parse_program",
    "emit_program",
    "parse_graph",
    "emit_graph",
    "parse_sign_matrix",
    "emit_sign_matrix",
    "parse_game",
    "emit_game",
]


class ParseError(ValueError):
    """Malformed input file; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _parse_int(token: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(line, f"expected an integer {what}, got {token!r}") from None


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(line, f"expected a number {what}, got {token!r}") from None


# ---------------------------------------------------------------------------
# Programs.
# ---------------------------------------------------------------------------


def parse_program(text: str) -> SdpProgram:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty program file")
    pos = 0

    def peek():
        return lines[pos] if pos < len(lines) else (len(lines) + 1, None)

    number, line = lines[pos]
    parts = line.split()
    if parts[0] != "DIM" or len(parts) != 2:
        raise ParseError(number, f"expected 'DIM <n>', got {line!r}")
    dim = _parse_int(parts[1], number, "dimension")
    if dim <= 0:
        raise ParseError(number, f"dimension must be positive, got {dim}")
    pos += 1

    def read_matrix(section_line: int) -> np.ndarray:
        nonlocal pos
        mat = np.zeros((dim, dim))
        seen = False
        while pos < len(lines):
            number, line = lines[pos]
            head = line.split()[0]
            if head in ("OBJECTIVE", "EQ", "LE", "NONNEG"):
                break
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(number, f"expected 'i j value', got {line!r}")
            i = _parse_int(parts[0], number, "row index")
            j = _parse_int(parts[1], number, "column index")
            value = _parse_float(parts[2], number, "entry value")
            if not (0 <= i <= j < dim):
                raise ParseError(
                    number, f"indices ({i}, {j}) must satisfy 0 <= i <= j < {dim}"
                )
            if mat[i, j] != 0.0:
                raise ParseError(number, f"duplicate entry ({i}, {j})")
            mat[i, j] = value
            mat[j, i] = value
            seen = True
            pos += 1
        del seen
        return mat

    number, line = peek()
    if line is None or line.split()[0] != "OBJECTIVE":
        raise ParseError(number, "expected an OBJECTIVE section after DIM")
    pos += 1
    objective = read_matrix(number)

    constraints: list[LinearConstraint] = []
    nonneg: list[np.ndarray] = []
    while pos < len(lines):
        number, line = lines[pos]
        parts = line.split()
        head = parts[0]
        if head in ("EQ", "LE"):
            if len(parts) != 2:
                raise ParseError(number, f"expected '{head} <rhs>', got {line!r}")
            rhs = _parse_float(parts[1], number, "right-hand side")
            pos += 1
            matrix = read_matrix(number)
            rel = Relation.EQ if head == "EQ" else Relation.LE
            constraints.append(LinearConstraint(matrix, rhs, rel))
        elif head == "NONNEG":
            if len(parts) != 1:
                raise ParseError(number, f"NONNEG takes no right-hand side: {line!r}")
            pos += 1
            nonneg.append(read_matrix(number))
        elif head == "OBJECTIVE":
            raise ParseError(number, "duplicate OBJECTIVE section")
        else:
            raise ParseError(number, f"unknown section {head!r}")
    return SdpProgram(
        dim=dim,
        objective=objective,
        constraints=tuple(constraints),
        nonneg=tuple(nonneg),
    )


def _emit_matrix(mat: np.ndarray, out: list[str]) -> None:
    n = mat.shape[0]
    for i in range(n):
        for j in range(i, n):
            if mat[i, j] != 0.0:
                out.append(f"{i} {j} {_fmt(mat[i, j])}")


def emit_program(program: SdpProgram) -> str:
    out = [f"DIM {program.dim}", "OBJECTIVE"]
    _emit_matrix(program.objective, out)
    ordered = [c for c in program.constraints if c.relation is Relation.EQ]
    ordered += [c for c in program.constraints if c.relation is Relation.LE]
    for con in ordered:
        head = "EQ" if con.relation is Relation.EQ else "LE"
        out.append(f"{head} {_fmt(con.rhs)}")
        _emit_matrix(con.matrix, out)
    for mat in program.nonneg:
        out.append("NONNEG")
        _emit_matrix(mat, out)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Graphs and sign matrices.
# ---------------------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty graph file")
    number, line = lines[0]
    parts = line.split()
    if len(parts) != 1:
        raise ParseError(number, f"expected the vertex count alone, got {line!r}")
    n = _parse_int(parts[0], number, "vertex count")
    edges = []
    for number, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(number, f"expected 'i j', got {line!r}")
        i = _parse_int(parts[0], number, "vertex")
        j = _parse_int(parts[1], number, "vertex")
        try:
            Graph.from_edges(n, [(i, j)])
        except ValueError as exc:
            raise ParseError(number, str(exc)) from None
        edges.append((i, j))
    return Graph.from_edges(n, edges)


def emit_graph(graph: Graph) -> str:
    out = [str(graph.n)]
    out += [f"{i} {j}" for i, j in graph.sorted_edges()]
    return "\n".join(out) + "\n"


def parse_sign_matrix(text: str) -> SignMatrix:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty sign-matrix file")
    number, line = lines[0]
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(number, f"expected 'rows cols', got {line!r}")
    r = _parse_int(parts[0], number, "row count")
    c = _parse_int(parts[1], number, "column count")
    if len(lines) - 1 != r:
        raise ParseError(number, f"expected {r} matrix rows, got {len(lines) - 1}")
    entries = []
    for number, line in lines[1:]:
        row = [_parse_float(tok, number, "entry") for tok in line.split()]
        if len(row) != c:
            raise ParseError(number, f"expected {c} entries, got {len(row)}")
        entries.append(row)
    try:
        return SignMatrix(np.array(entries))
    except ValueError as exc:
        raise ParseError(lines[1][0], str(exc)) from None


def emit_sign_matrix(sign: SignMatrix) -> str:
    r, c = sign.shape
    out = [f"{r} {c}"]
    for row in sign.entries:
        out.append(" ".join("1" if v > 0 else "-1" for v in row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Games.
# ---------------------------------------------------------------------------


def parse_game(text: str) -> Game:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty game file")
    number, line = lines[0]
    parts = line.split()
    if len(parts) != 5 or parts[0] != "GAME":
        raise ParseError(number, f"expected 'GAME |S| |T| |U| |W|', got {line!r}")
    ns, nt, nu, nw = (_parse_int(tok, number, "alphabet size") for tok in parts[1:])
    pos = 1
    number, line = lines[pos]
    if line != "P":
        raise ParseError(number, f"expected a 'P' section, got {line!r}")
    pos += 1
    p = np.zeros((ns, nt))
    for s in range(ns):
        number, line = lines[pos]
        row = [_parse_float(tok, number, "probability") for tok in line.split()]
        if len(row) != nt:
            raise ParseError(number, f"expected {nt} probabilities, got {len(row)}")
        p[s] = row
        pos += 1
    v = np.zeros((ns, nt, nu, nw))
    seen = set()
    while pos < len(lines):
        number, line = lines[pos]
        parts = line.split()
        if parts[0] != "V" or len(parts) != 3:
            raise ParseError(number, f"expected 'V <s> <t>', got {line!r}")
        s = _parse_int(parts[1], number, "question index")
        t = _parse_int(parts[2], number, "question index")
        if not (0 <= s < ns and 0 <= t < nt):
            raise ParseError(number, f"question pair ({s}, {t}) out of range")
        if (s, t) in seen:
            raise ParseError(number, f"duplicate V block for ({s}, {t})")
        seen.add((s, t))
        pos += 1
        for u in range(nu):
            number, line = lines[pos]
            row = [_parse_int(tok, number, "predicate value") for tok in line.split()]
            if len(row) != nw:
                raise ParseError(number, f"expected {nw} values, got {len(row)}")
            v[s, t, u] = row
            pos += 1
    if len(seen) != ns * nt:
        raise ParseError(
            lines[-1][0], f"expected {ns * nt} V blocks, got {len(seen)}"
        )
    try:
        return Game(p=p, v=v)
    except ValueError as exc:
        raise ParseError(lines[0][0], str(exc)) from None


def emit_game(game: Game) -> str:
    ns, nt, nu, nw = game.sizes
    out = [f"GAME {ns} {nt} {nu} {nw}", "P"]
    for s in range(ns):
        out.append(" ".join(_fmt(game.p[s, t]) for t in range(nt)))
    for s in range(ns):
        for t in range(nt):
            out.append(f"V {s} {t}")
            for u in range(nu):
                out.append(
                    " ".join(str(int(game.v[s, t, u, w])) for w in range(nw))
                )
    return "\n".join(out) + "\n"
