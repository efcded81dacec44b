"""Plain-text matrix format.

First line ``rows cols``, then one line per row of whitespace-separated
complex entries written ``re`` or ``re+imi`` (``0.5-0.25i``).
"""

import numpy as np

from .linalg import as_cmatrix


def parse_entry(token):
    """Parse ``re``, ``re+imi``, ``imi``; Python's ``j`` suffix is not accepted."""
    token = token.strip()
    if not token or "j" in token or "J" in token:
        raise ValueError(f"malformed complex entry {token!r}")
    if token.endswith("i"):
        body = token[:-1]
        # bare "i" / "1-i": unit imaginary part
        if body in ("", "+", "-") or body[-1] in "+-":
            body += "1"
        try:
            return complex(body + "j")
        except ValueError:
            raise ValueError(f"malformed complex entry {token!r}") from None
    try:
        return complex(float(token), 0.0)
    except ValueError:
        raise ValueError(f"malformed complex entry {token!r}") from None


def parse_matrix(text):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("first line must be 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if rows < 1 or cols < 1:
        raise ValueError("dimensions must be positive")
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"expected {rows} rows, found {len(body)}")
    data = []
    for i, line in enumerate(body):
        tokens = line.split()
        if len(tokens) != cols:
            raise ValueError(f"row {i} has {len(tokens)} entries, expected {cols}")
        data.append([parse_entry(t) for t in tokens])
    return as_cmatrix(data)


def format_entry(z):
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{z.imag:+.17g}i"


def format_matrix(A):
    A = np.asarray(A)
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(format_entry(x) for x in row) for row in A]
    return "\n".join(lines) + "\n"


def read_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read())


def write_matrix(path, A):
    with open(path, "w") as fh:
        fh.write(format_matrix(A))
