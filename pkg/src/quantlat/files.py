"""Text formats for cells, systems and quasiperiodic sets.

All three formats are line based: `#` starts a comment, blank lines are
skipped, tokens are whitespace separated, and the first meaningful line names
the format.  The same parsers serve the CLI and the tests.

Cell file::

    cell
    dim <n>
    piece <z_1> ... <z_n>          # integer shift; starts a new piece
    box <lo_1> ... <lo_n> <hi_1> ... <hi_n>
    ...                            # boxes belong to the piece above them

System file::

    system
    dim <n>
    matrix <n*n row-major entries>
    quantizer roundoff             # or: quantizer cell <path>

Quasiperiodic set file::

    qpset
    m <rows>
    n <cols>
    matrix <m*n row-major entries>
    box <lo_1> ... <lo_m> <hi_1> ... <hi_m>
    ...                            # window boxes in [0,1)^m
"""

from __future__ import annotations

import os

import numpy as np

from .dynamics import QuantizedSystem
from .geometry import Box, Cell, JordanSet, Quantizer, cell_build, roundoff_quantizer
from .quasiperiodic import QuasiperiodicSet


class FormatError(ValueError):
    """Malformed input file; message names the offending line."""


def _tokenized_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _expect_header(tokens_iter, name: str):
    try:
        lineno, tokens = next(tokens_iter)
    except StopIteration:
        raise FormatError(f"empty file, expected '{name}' header") from None
    if tokens != [name]:
        raise FormatError(f"line {lineno}: expected '{name}' header, got {' '.join(tokens)}")


def parse_cell(text: str) -> Cell:
    lines = _tokenized_lines(text)
    _expect_header(lines, "cell")
    dim = None
    pieces: list[tuple[list[Box], tuple[int, ...]]] = []
    for lineno, tok in lines:
        key, args = tok[0], tok[1:]
        if key == "dim":
            if len(args) != 1:
                raise FormatError(f"line {lineno}: dim takes one value")
            dim = int(args[0])
        elif key == "piece":
            if dim is None:
                raise FormatError(f"line {lineno}: dim must come before pieces")
            if len(args) != dim:
                raise FormatError(f"line {lineno}: piece shift needs {dim} integers")
            pieces.append(([], tuple(int(v) for v in args)))
        elif key == "box":
            if not pieces:
                raise FormatError(f"line {lineno}: box before any piece")
            if len(args) != 2 * dim:
                raise FormatError(f"line {lineno}: box needs {2 * dim} numbers")
            vals = [float(v) for v in args]
            pieces[-1][0].append(Box(tuple(vals[:dim]), tuple(vals[dim:])))
        else:
            raise FormatError(f"line {lineno}: unknown key {key!r}")
    if dim is None or not pieces:
        raise FormatError("cell file needs a dim line and at least one piece")
    built = []
    for boxes, shift in pieces:
        if not boxes:
            raise FormatError(f"piece with shift {shift} has no boxes")
        built.append((JordanSet(dim, tuple(boxes)), shift))
    return cell_build(built)


def format_cell(cell: Cell) -> str:
    out = ["cell", f"dim {cell.dim}"]
    for piece, shift in cell.pieces:
        out.append("piece " + " ".join(str(v) for v in shift))
        for b in piece.boxes:
            out.append("box " + " ".join(repr(v) for v in b.lo + b.hi))
    return "\n".join(out) + "\n"


def parse_system(text: str, *, base_dir: str = ".") -> QuantizedSystem:
    lines = _tokenized_lines(text)
    _expect_header(lines, "system")
    dim = None
    matrix = None
    quantizer: Quantizer | None = None
    for lineno, tok in lines:
        key, args = tok[0], tok[1:]
        if key == "dim":
            dim = int(args[0])
        elif key == "matrix":
            if dim is None:
                raise FormatError(f"line {lineno}: dim must come before matrix")
            if len(args) != dim * dim:
                raise FormatError(f"line {lineno}: matrix needs {dim * dim} entries")
            matrix = np.array([float(v) for v in args]).reshape(dim, dim)
        elif key == "quantizer":
            if dim is None:
                raise FormatError(f"line {lineno}: dim must come before quantizer")
            if args == ["roundoff"]:
                quantizer = roundoff_quantizer(dim)
            elif len(args) == 2 and args[0] == "cell":
                path = os.path.join(base_dir, args[1])
                with open(path, encoding="utf-8") as fh:
                    quantizer = Quantizer.from_cell(parse_cell(fh.read()))
            else:
                raise FormatError(f"line {lineno}: quantizer must be 'roundoff' or 'cell <path>'")
        else:
            raise FormatError(f"line {lineno}: unknown key {key!r}")
    if matrix is None or quantizer is None:
        raise FormatError("system file needs matrix and quantizer lines")
    return QuantizedSystem.build(matrix, quantizer)


def format_system(L: np.ndarray, quantizer_ref: str = "roundoff") -> str:
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    entries = " ".join(repr(v) for v in L.reshape(-1).tolist())
    return f"system\ndim {n}\nmatrix {entries}\nquantizer {quantizer_ref}\n"


def parse_qpset(text: str) -> QuasiperiodicSet:
    lines = _tokenized_lines(text)
    _expect_header(lines, "qpset")
    m = n = None
    matrix = None
    boxes: list[Box] = []
    for lineno, tok in lines:
        key, args = tok[0], tok[1:]
        if key == "m":
            m = int(args[0])
        elif key == "n":
            n = int(args[0])
        elif key == "matrix":
            if m is None or n is None:
                raise FormatError(f"line {lineno}: m and n must come before matrix")
            if len(args) != m * n:
                raise FormatError(f"line {lineno}: matrix needs {m * n} entries")
            matrix = np.array([float(v) for v in args]).reshape(m, n)
        elif key == "box":
            if m is None:
                raise FormatError(f"line {lineno}: m must come before boxes")
            if len(args) != 2 * m:
                raise FormatError(f"line {lineno}: box needs {2 * m} numbers")
            vals = [float(v) for v in args]
            boxes.append(Box(tuple(vals[:m]), tuple(vals[m:])))
        else:
            raise FormatError(f"line {lineno}: unknown key {key!r}")
    if matrix is None or not boxes:
        raise FormatError("qpset file needs matrix and at least one box")
    return QuasiperiodicSet(matrix, JordanSet(m, tuple(boxes)))


def format_qpset(q: QuasiperiodicSet) -> str:
    out = ["qpset", f"m {q.m}", f"n {q.n}"]
    out.append("matrix " + " ".join(repr(v) for v in q.Lambda.reshape(-1).tolist()))
    for b in q.G.boxes:
        out.append("box " + " ".join(repr(v) for v in b.lo + b.hi))
    return "\n".join(out) + "\n"


def load_system(path: str) -> QuantizedSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def load_cell(path: str) -> Cell:
    with open(path, encoding="utf-8") as fh:
        return parse_cell(fh.read())


def load_qpset(path: str) -> QuasiperiodicSet:
    with open(path, encoding="utf-8") as fh:
        return parse_qpset(fh.read())
