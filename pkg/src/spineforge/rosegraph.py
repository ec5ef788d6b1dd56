"""Graphs over the rose, the circle family L and quotients of L."""

import json

from .words import ReducedWord, WordError, letter_char, char_letter


class QuotientError(ValueError):
    pass


class InconsistentLabels(QuotientError):
    def __init__(self, cls, edges):
        super().__init__(f"inconsistent labels in class {cls}: edges {edges}")
        self.cls = cls
        self.edges = edges


class IllegalQuotient(QuotientError):
    def __init__(self, vertex, label):
        super().__init__(f"illegal quotient at vertex {vertex}: label {letter_char(label)} departs twice")
        self.vertex = vertex
        self.label = label


class LabeledGraph:
    """Directed edges ``(u, v, label)``; reversing an edge inverts the label.

    A loop contributes two half-edges at its vertex.
    """

    def __init__(self, num_vertices, edges):
        self.num_vertices = int(num_vertices)
        self.edges = [(int(u), int(v), int(x)) for u, v, x in edges]
        for u, v, x in self.edges:
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError("edge endpoint out of range")
            if x == 0:
                raise ValueError("zero label")

    def half_edges(self):
        """List of (vertex, departing label, edge id, end) with end 0 = tail."""
        out = []
        for i, (u, v, x) in enumerate(self.edges):
            out.append((u, x, i, 0))
            out.append((v, -x, i, 1))
        return out

    def valence(self):
        val = [0] * self.num_vertices
        for u, v, _ in self.edges:
            val[u] += 1
            val[v] += 1
        return val

    def violations(self):
        seen = {}
        bad = set()
        for vert, x, _, _ in self.half_edges():
            if (vert, x) in seen:
                bad.add((vert, x))
            seen[(vert, x)] = True
        return sorted(bad)

    def to_json(self, partition=None):
        d = {"vertices": self.num_vertices,
             "edges": [{"u": u, "v": v, "label": letter_char(x)} for u, v, x in self.edges]}
        if partition is not None:
            d["partition"] = partition
        return d

    @classmethod
    def from_json(cls, d):
        return cls(d["vertices"], [(e["u"], e["v"], char_letter(e["label"])) for e in d["edges"]])

    def __eq__(self, other):
        return (isinstance(other, LabeledGraph) and self.num_vertices == other.num_vertices
                and self.edges == other.edges)


def is_immersed(g):
    """Return (True, None) or (False, (vertex, label)) for the first violation."""
    bad = g.violations()
    if bad:
        return False, bad[0]
    return True, None


class CircleFamily:
    """``copies`` disjoint circles, each reading the cyclic word r.

    Edge ``c*n + p`` runs from vertex ``c*n + p`` to ``c*n + (p+1) % n`` and
    carries the letter ``r[p]``.
    """

    def __init__(self, word, copies=1):
        if not isinstance(word, ReducedWord):
            word = ReducedWord(word, cyclic=True)
        if not word.cyclic:
            word = ReducedWord(word.letters, cyclic=True)
        if len(word) == 0:
            raise WordError("empty relator")
        if copies < 1:
            raise ValueError("copies must be positive")
        self.word = word
        self.copies = copies
        self.n = len(word)

    @property
    def num_edges(self):
        return self.copies * self.n

    @property
    def components(self):
        return self.copies

    def edge_id(self, comp, pos):
        return comp * self.n + pos % self.n

    def locate(self, e):
        return divmod(e, self.n)

    def label(self, e):
        return self.word.letters[e % self.n]

    def tail(self, e):
        return e

    def head(self, e):
        c, p = divmod(e, self.n)
        return c * self.n + (p + 1) % self.n

    def next_edge(self, e):
        return self.head(e)

    def prev_edge(self, e):
        c, p = divmod(e, self.n)
        return c * self.n + (p - 1) % self.n

    def graph(self):
        return LabeledGraph(self.num_edges, [(self.tail(e), self.head(e), self.label(e))
                                             for e in range(self.num_edges)])


def circles_from_word(r, copies=1):
    if isinstance(r, str):
        r = ReducedWord(r, cyclic=True)
    elif not isinstance(r, ReducedWord):
        r = ReducedWord(r, cyclic=True)
    return CircleFamily(r, copies)


class EdgePartition:
    """Partition of the edges of L into aligned classes.

    ``cls[e]`` is the class of edge e and ``ori[e]`` is +1 when e runs along
    the class's reference direction, -1 when it runs against it.
    """

    def __init__(self, cls, ori):
        if len(cls) != len(ori):
            raise ValueError("cls and ori differ in length")
        self.cls = list(cls)
        self.ori = list(ori)

    @classmethod
    def singletons(cls, num_edges):
        return cls(range(num_edges), [1] * num_edges)

    @classmethod
    def from_classes(cls, num_edges, classes):
        """``classes``: iterable of lists of (edge, ori); missing edges are singletons."""
        c = [-1] * num_edges
        o = [1] * num_edges
        nxt = 0
        for members in classes:
            for e, s in members:
                if c[e] != -1:
                    raise ValueError(f"edge {e} in two classes")
                c[e] = nxt
                o[e] = s
            nxt += 1
        for e in range(num_edges):
            if c[e] == -1:
                c[e] = nxt
                nxt += 1
        return cls(c, o)

    def classes(self):
        groups = {}
        for e, c in enumerate(self.cls):
            groups.setdefault(c, []).append(e)
        return [groups[c] for c in sorted(groups, key=lambda c: groups[c][0])]

    def class_sizes(self):
        return sorted(len(g) for g in self.classes())

    def to_lists(self):
        return [[[e, self.ori[e]] for e in g] for g in self.classes()]

    def copy(self):
        return EdgePartition(self.cls, self.ori)


class _UF:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if a < b:
            self.p[b] = a
        else:
            self.p[a] = b


class Quotient:
    """Result of :func:`apply_partition`.

    ``edge_map[e]`` is the Sigma edge of L-edge e, ``edge_ori[e]`` its
    orientation relative to that edge and ``vertex_map[x]`` the Sigma vertex
    of L-vertex x.
    """

    def __init__(self, graph, edge_map, edge_ori, vertex_map, members):
        self.graph = graph
        self.edge_map = edge_map
        self.edge_ori = edge_ori
        self.vertex_map = vertex_map
        self.members = members


def apply_partition(L, p, check=True, labels=True):
    """Collapse each class of ``p`` to one edge of the quotient graph.

    Quotient vertices are numbered by their smallest L-vertex representative;
    quotient edges by their smallest member.  Raises InconsistentLabels or
    IllegalQuotient (when ``check``) instead of folding.  With ``labels``
    false the letters of L are ignored and only the shape is computed.
    """
    E = L.num_edges
    if len(p.cls) != E:
        raise ValueError("partition size does not match L")
    groups = p.classes()
    uf = _UF(E)
    for g in groups:
        ref = g[0]
        o0 = p.ori[ref]
        t0 = L.tail(ref) if o0 == 1 else L.head(ref)
        h0 = L.head(ref) if o0 == 1 else L.tail(ref)
        lab0 = L.label(ref) * o0
        for e in g[1:]:
            o = p.ori[e]
            if labels and L.label(e) * o != lab0:
                raise InconsistentLabels(p.cls[ref], g)
            if o == 1:
                uf.union(t0, L.tail(e))
                uf.union(h0, L.head(e))
            else:
                uf.union(t0, L.head(e))
                uf.union(h0, L.tail(e))
    roots = {}
    vmap = [0] * E
    for x in range(E):
        r = uf.find(x)
        if r not in roots:
            roots[r] = len(roots)
        vmap[x] = roots[r]
    edges = []
    emap = [0] * E
    eori = [1] * E
    for i, g in enumerate(groups):
        ref = g[0]
        o0 = p.ori[ref]
        for e in g:
            emap[e] = i
            eori[e] = p.ori[e]
        if o0 == 1:
            edges.append((vmap[L.tail(ref)], vmap[L.head(ref)], L.label(ref)))
        else:
            edges.append((vmap[L.head(ref)], vmap[L.tail(ref)], -L.label(ref)))
    graph = LabeledGraph(len(roots), edges)
    if check:
        ok, bad = is_immersed(graph)
        if not ok:
            raise IllegalQuotient(*bad)
    return Quotient(graph, emap, eori, vmap, groups)


def to_dot(graph, glued=(), name="sigma"):
    """DOT text; edges listed in ``glued`` are drawn red, the rest black."""
    glued = set(glued)
    lines = [f"graph {name} {{", "  node [shape=point];"]
    for v in range(graph.num_vertices):
        lines.append(f"  v{v};")
    for i, (u, v, x) in enumerate(graph.edges):
        color = "red" if i in glued else "black"
        lines.append(f'  v{u} -- v{v} [label="{letter_char(x)}", color={color}, dir=forward];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(obj):
    """Canonical JSON bytes used for every artifact we write."""
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode()
