"""
Plain-text set-exchange format.

Each record is a header ``cz n=<n> ng=<n_g> nh=<n_h>`` followed by n rows of
G, one row for c, n_h rows of A and one row for b, whitespace separated.
Rows of width zero are empty lines. Lines starting with '#' and blank lines
between records are ignored.
"""
import re

import numpy as np

from ..utils.errors import SetFormatError
from .constrained_zonotope import ConstrainedZonotope

HEADER_RE = re.compile(r"^cz\s+n=(\d+)\s+ng=(\d+)\s+nh=(\d+)\s*$")


def _fmt_row(values):
    return " ".join(f"{float(v):.17g}" for v in values)


def format_set(X):
    lines = [f"cz n={X.n} ng={X.n_g} nh={X.n_h}"]
    lines.extend(_fmt_row(row) for row in X.G)
    lines.append(_fmt_row(X.c))
    lines.extend(_fmt_row(row) for row in X.A)
    lines.append(_fmt_row(X.b))
    return "\n".join(lines) + "\n"


def write_sets(path, sets):
    with open(path, 'w') as f:
        for X in sets:
            f.write(format_set(X))


def _parse_row(line, width, line_no):
    tokens = line.split()
    if len(tokens) != width:
        raise SetFormatError(f"Line {line_no}: expected {width} values, found {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as e:
        raise SetFormatError(f"Line {line_no}: {e}") from e


def parse_sets(text):
    lines = text.splitlines()
    sets = []
    pos = 0
    while pos < len(lines):
        stripped = lines[pos].strip()
        if not stripped or stripped.startswith('#'):
            pos += 1
            continue
        match = HEADER_RE.match(stripped)
        if not match:
            raise SetFormatError(f"Line {pos + 1}: expected a 'cz n= ng= nh=' header")
        n, n_g, n_h = (int(v) for v in match.groups())
        needed = n + 1 + n_h + 1
        body = lines[pos + 1:pos + 1 + needed]
        if len(body) < needed:
            # A trailing empty b row may be lost by editors stripping the final newline
            if n_h == 0 and len(body) == needed - 1:
                body.append("")
            else:
                raise SetFormatError(f"Line {pos + 1}: record truncated")
        first = pos + 2
        G = [_parse_row(body[k], n_g, first + k) for k in range(n)]
        c = _parse_row(body[n], n, first + n)
        A = [_parse_row(body[n + 1 + k], n_g, first + n + 1 + k) for k in range(n_h)]
        b = _parse_row(body[n + 1 + n_h], n_h, first + n + 1 + n_h)
        sets.append(ConstrainedZonotope(
            np.array(G, dtype=float).reshape(n, n_g),
            np.array(c, dtype=float),
            np.array(A, dtype=float).reshape(n_h, n_g),
            np.array(b, dtype=float),
        ))
        pos += 1 + needed
    return sets


def read_sets(path):
    with open(path, 'r') as f:
        return parse_sets(f.read())
