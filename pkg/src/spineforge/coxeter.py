"""Gram matrices and classification of the linear diagrams Delta(m,d) and the cube family.

Both diagrams are paths on d+1 nodes.  The first edge carries m; for the
cube family the last edge carries 4; every other edge carries 3.

Only one label is free, so every quantity used here is a + b*y with a, b
rational and y = cos^2(pi/m).  y is rational exactly when m is 2, 3, 4 or
6 (Niven); otherwise a + b*y vanishes only if a = b = 0, and its sign is
read from a high-precision evaluation.  Signs are therefore exact.
"""

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import sympy

SIMPLEX = "simplex"
CUBE = "cube"
CLASSES = ("spherical", "euclidean", "compact", "ideal", "superideal")

_RATIONAL_Y = {2: Fraction(0), 3: Fraction(1, 4), 4: Fraction(1, 2), 6: Fraction(3, 4)}


class CoxeterError(ValueError):
    pass


@dataclass(frozen=True)
class CoxeterDiagram:
    kind: str
    m: int
    d: int

    def __post_init__(self):
        if self.kind not in (SIMPLEX, CUBE):
            raise CoxeterError(f"unknown kind {self.kind!r}")
        if self.m < 3 or self.d < 2:
            raise CoxeterError("need m >= 3 and d >= 2")

    @property
    def nodes(self):
        return self.d + 1

    def labels(self):
        """Edge labels along the path."""
        lab = [3] * self.d
        lab[0] = self.m
        if self.kind == CUBE:
            lab[-1] = 4
        return lab


@dataclass
class GramMatrix:
    labels: list
    entries: list

    def numeric(self):
        return np.array([[float(x) for x in row] for row in self.entries])

    @property
    def size(self):
        return len(self.entries)


def gram_matrix(diag):
    n = diag.nodes
    entries = [[sympy.Integer(1) if i == j else sympy.Integer(0) for j in range(n)]
               for i in range(n)]
    for i, lab in enumerate(diag.labels()):
        c = -sympy.cos(sympy.pi / lab)
        entries[i][i + 1] = c
        entries[i + 1][i] = c
    return GramMatrix(diag.labels(), entries)


class _Lin:
    """a + b*y with rational a, b."""
    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, o):
        return _Lin(self.a + o.a, self.b + o.b)

    def __sub__(self, o):
        return _Lin(self.a - o.a, self.b - o.b)


class _Field:
    def __init__(self, m, dps=60):
        self.m = m
        self.exact = _RATIONAL_Y.get(m)
        self.dps = dps
        with mpmath.workdps(dps):
            self.y = mpmath.cos(mpmath.pi / m) ** 2

    def sign(self, v):
        if self.exact is not None:
            x = v.a + v.b * self.exact
            return (x > 0) - (x < 0)
        if v.b == 0:
            return (v.a > 0) - (v.a < 0)
        with mpmath.workdps(self.dps):
            x = mpmath.mpf(v.a.numerator) / v.a.denominator + \
                mpmath.mpf(v.b.numerator) / v.b.denominator * self.y
            if abs(x) < mpmath.mpf(10) ** (-self.dps + 10):
                raise CoxeterError("indeterminate (increase precision)")
        return 1 if x > 0 else -1


def _sq(lab, field):
    """cos^2(pi/lab) as a _Lin."""
    if lab in _RATIONAL_Y:
        return _Lin(_RATIONAL_Y[lab])
    if lab == field.m:
        return _Lin(0, 1)
    raise CoxeterError(f"label {lab} is neither rational nor m")


def _charpoly(sqs, field):
    """Coefficients (low degree first) of det(G - xI) for a path with edge squares sqs."""
    # p_i(x) = (1 - x) p_{i-1}(x) - c_i^2 p_{i-2}(x)
    prev = [_Lin(1)]
    cur = [_Lin(1), _Lin(-1)]
    if not sqs:
        return cur
    for c2 in sqs:
        nxt = [_Lin(0) for _ in range(len(cur) + 1)]
        for i, v in enumerate(cur):
            nxt[i] = nxt[i] + v
            nxt[i + 1] = nxt[i + 1] - v
        for i, v in enumerate(prev):
            prod = _mul(v, c2)
            nxt[i] = nxt[i] - prod
        prev, cur = cur, nxt
    return cur


def _mul(u, v):
    if u.b and v.b:
        raise CoxeterError("the free label occurs twice")
    return _Lin(u.a * v.a, u.a * v.b + u.b * v.a)


def _inertia_path(sqs, field):
    """(positive, negative, zero) eigenvalue counts of a path Gram matrix.

    The characteristic polynomial of a symmetric matrix has only real roots,
    so Descartes' rule of signs counts positive and negative roots exactly.
    """
    coeffs = _charpoly(sqs, field)
    signs = [field.sign(c) for c in coeffs]
    zero = 0
    while zero < len(signs) and signs[zero] == 0:
        zero += 1
    nz = [s for s in signs if s]
    pos = sum(1 for a, b in zip(nz, nz[1:]) if a != b)
    alt = [s * (-1) ** i for i, s in enumerate(signs) if s]
    neg = sum(1 for a, b in zip(alt, alt[1:]) if a != b)
    return pos, neg, zero


def inertia(labels, m, drop=None):
    """Inertia of the Gram matrix of a labelled path, optionally with one node deleted."""
    field = _Field(m)
    n = len(labels) + 1
    blocks = [list(range(n))] if drop is None else [list(range(drop)), list(range(drop + 1, n))]
    tot = [0, 0, 0]
    for nodes in blocks:
        if not nodes:
            continue
        sqs = [_sq(labels[i], field) for i in nodes[:-1]]
        p, q, z = _inertia_path(sqs, field)
        tot[0] += p
        tot[1] += q
        tot[2] += z
    return tuple(tot)


def vertex_figures(diag):
    """Inertia of each principal minor with one node deleted."""
    return [inertia(diag.labels(), diag.m, drop=i) for i in range(diag.nodes)]


def classify(diag):
    labels = diag.labels()
    n = diag.nodes
    p, q, z = inertia(labels, diag.m)
    if q == 0 and z == 0:
        return "spherical"
    if q == 0:
        return "euclidean"
    if q != 1 or z != 0 or p != n - 1:
        raise CoxeterError(f"signature ({p},{q},{z}) is not hyperbolic")
    figs = vertex_figures(diag)
    if any(f[1] > 0 for f in figs):
        return "superideal"
    if any(f[2] > 0 for f in figs):
        return "ideal"
    return "compact"


def class_index(c):
    return CLASSES.index(c)


# known classes of small diagrams, as (kind, m, d) -> class
GOLDEN = {
    (SIMPLEX, 3, 2): "spherical", (SIMPLEX, 3, 5): "spherical", (SIMPLEX, 3, 8): "spherical",
    (SIMPLEX, 4, 2): "spherical", (SIMPLEX, 4, 3): "spherical", (SIMPLEX, 4, 6): "spherical",
    (SIMPLEX, 7, 2): "compact", (SIMPLEX, 8, 2): "compact", (SIMPLEX, 12, 2): "compact",
    (SIMPLEX, 6, 3): "ideal", (SIMPLEX, 7, 3): "superideal",
    (SIMPLEX, 5, 4): "superideal", (SIMPLEX, 6, 4): "superideal", (SIMPLEX, 5, 5): "superideal",
    (SIMPLEX, 7, 6): "superideal",
    (CUBE, 3, 2): "spherical", (CUBE, 3, 3): "spherical", (CUBE, 3, 6): "spherical",
    (CUBE, 4, 2): "euclidean", (CUBE, 4, 3): "euclidean", (CUBE, 4, 4): "euclidean",
    (CUBE, 5, 3): "compact", (CUBE, 6, 3): "superideal",
    (CUBE, 5, 4): "compact", (CUBE, 6, 4): "superideal",
    (CUBE, 5, 5): "superideal", (CUBE, 5, 6): "superideal",
}


def golden_table(golden=None):
    """Rows (kind, m, d, expected, got, ok) over the golden facts."""
    rows = []
    for (kind, m, d), want in sorted((golden or GOLDEN).items()):
        got = classify(CoxeterDiagram(kind, m, d))
        rows.append((kind, m, d, want, got, got == want))
    return rows


def table_csv(kinds=(SIMPLEX, CUBE), ms=range(3, 9), ds=range(2, 7)):
    lines = ["kind,m,d,class"]
    for kind in kinds:
        for d in ds:
            for m in ms:
                try:
                    c = classify(CoxeterDiagram(kind, m, d))
                except CoxeterError as exc:
                    c = f"error: {exc}"
                lines.append(f"{kind},{m},{d},{c}")
    return "\n".join(lines) + "\n"
