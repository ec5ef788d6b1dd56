"""Combinatorial gluing patterns: hypercube paths, height pairs, lens layouts.

A :class:`Template` is a graph with a list of beachball slots.  Each slot
has a start vertex, an end vertex and a list of paths from start to end;
a path is a list of ``(edge, direction)`` steps, direction +1 meaning the
edge is crossed from its first to its second endpoint.
"""

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .rosegraph import LabeledGraph
from .spine import local_r3, SIMPLICIAL, CUBICAL


class DegenerateDimension(ValueError):
    pass


def zigzag(s):
    """0, 1, -1, 2, -2, ..."""
    return (s + 1) // 2 if s % 2 else -(s // 2)


def cube_orders(n):
    """Axis orders for the n paths of each beachball in the n-cube.

    Consecutive axes of an order are the turns the path makes; the n orders
    together turn through every pair of axes exactly twice, once near each
    endpoint of a beachball.  For odd n the orders are the zigzag
    rotations a + z(s); for even n they are the Walecki Hamiltonian paths of
    K_n together with their reverses.  For n = 3 this is the cyclic family.
    """
    if n % 2:
        return [[(a + zigzag(s)) % n for s in range(n)] for a in range(n)]
    half = [[(i + zigzag(s)) % n for s in range(n)] for i in range(n // 2)]
    return half + [p[::-1] for p in half]


def cube_starts(n):
    """One start vertex for each antipodal pair of the n-cube."""
    if n % 2:
        return [u for u in range(2 ** n) if bin(u).count("1") % 2 == 0]
    return [u for u in range(2 ** n) if not (u >> (n - 1)) & 1]


@dataclass
class Slot:
    start: int
    end: int
    paths: list


@dataclass
class Template:
    num_vertices: int
    edges: list
    slots: list
    steps: int
    name: str = ""
    projection: dict = None

    @property
    def degree(self):
        return len(self.slots[0].paths)

    def edge_strands(self):
        cnt = Counter()
        for sl in self.slots:
            for p in sl.paths:
                for e, _ in p:
                    cnt[e] += 1
        return [cnt[e] for e in range(len(self.edges))]


def cube_graph(n):
    edges = []
    index = {}
    for u in range(2 ** n):
        for ax in range(n):
            w = u | (1 << ax)
            if w != u:
                index[(u, ax)] = len(edges)
                edges.append((u, w))
    return edges, index


def _cube_step(index, c, ax):
    lo = c & ~(1 << ax)
    return index[(lo, ax)], (1 if c == lo else -1)


def hypercube_template(d):
    """2^(d-1) beachballs of degree d on the 1-skeleton of the d-cube."""
    if d < 2:
        raise DegenerateDimension("hypercube gluing needs d >= 2")
    edges, index = cube_graph(d)
    slots = []
    for u in cube_starts(d):
        paths = []
        for order in cube_orders(d):
            c = u
            p = []
            for ax in order:
                p.append(_cube_step(index, c, ax))
                c ^= 1 << ax
            paths.append(p)
        slots.append(Slot(u, u ^ (2 ** d - 1), paths))
    return Template(2 ** d, edges, slots, d, f"hypercube{d}")


def lens_parity(d):
    """Parity bit x of the height pairs.

    The local checker accepts x = 1 for d = 3 and every even d, and x = 0
    for odd d >= 5; the other choice fails R3 at the last window.
    """
    return 1 if d % 2 == 0 or d == 3 else 0


def _prefix(w, p):
    return (w * (p // len(w) + 1))[:p]


def height_pairs(d, x=None):
    """The four pairs of 01 words of length d that prescribe the lifts."""
    if d <= 2:
        raise DegenerateDimension("degenerate dimension")
    if x is None:
        x = lens_parity(d)
    m = d - 2
    y = 1 - x
    return [("0" + "0" * m + "0", "0" + "1" * m + "0"),
            ("0" + _prefix("01", m) + "1", "0" + _prefix("10", m) + "1"),
            ("1" + _prefix("1100", m) + str(x), "1" + _prefix("0011", m) + str(x)),
            ("1" + _prefix("1001", m) + str(y), "1" + _prefix("0110", m) + str(y))]


def spherical_graph(g):
    """S(g): vertices 2v+a, edges 4e+2a+b joining (u,a) to (v,b).

    Returns (graph, vertex projection, edge projection).
    """
    edges = []
    for u, v, x in g.edges:
        for a in (0, 1):
            for b in (0, 1):
                edges.append((2 * u + a, 2 * v + b, x))
    s = LabeledGraph(2 * g.num_vertices, edges)
    vproj = [v // 2 for v in range(s.num_vertices)]
    eproj = [e // 4 for e in range(len(edges))]
    return s, vproj, eproj


def lens_template(d, x=None):
    """4 * 2^(d-2) beachballs of degree 2(d-1) in S(C), C the (d-1)-cube.

    Slot ``4*b + P`` lies over downstairs slot b with height pair P; its
    paths ``2j`` and ``2j+1`` are the two lifts of downstairs path j.
    For d = 2 this is the bigon: two beachballs glued along a circle.
    """
    if d == 2:
        slots = [Slot(0, 1, [[(0, 1)], [(1, 1)]]) for _ in range(2)]
        return Template(2, [(0, 1), (0, 1)], slots, 1, "lens2", {"down": [None, None]})
    n = d - 1
    down = hypercube_template(n)
    H = height_pairs(d, x)
    edges = []
    for (u, w) in down.edges:
        for a in (0, 1):
            for b in (0, 1):
                edges.append((2 * u + a, 2 * w + b))
    slots = []
    proj = []
    for bi, sl in enumerate(down.slots):
        for P, pair in enumerate(H):
            paths = []
            for dp in sl.paths:
                for h in pair:
                    c = sl.start
                    p = []
                    for s, (e, dr) in enumerate(dp):
                        a, b = int(h[s]), int(h[s + 1])
                        lo_h, hi_h = (a, b) if dr == 1 else (b, a)
                        p.append((4 * e + 2 * lo_h + hi_h, dr))
                    paths.append(p)
            slots.append(Slot(2 * sl.start + int(pair[0][0]), 2 * sl.end + int(pair[0][-1]), paths))
            proj.append((bi, P))
    return Template(2 * down.num_vertices, edges, slots, n, f"lens{d}", {"down": proj, "base": down})


def template_turns(t):
    """Turns of all strands, with pendant stems at the slot endpoints.

    Half-edges are ``2*e + end`` for template edges; the stem of slot i at
    its start is ``("s", i, 0)`` and at its end ``("s", i, 1)``.
    """
    turns = {}
    for i, sl in enumerate(t.slots):
        for p in sl.paths:
            verts = [sl.start]
            hes = []
            for e, dr in p:
                a, b = t.edges[e]
                if dr == 1:
                    hes.append((2 * e, 2 * e + 1))
                    verts.append(b)
                else:
                    hes.append((2 * e + 1, 2 * e))
                    verts.append(a)
            ins = [("s", i, 0)] + [h[1] for h in hes]
            outs = [h[0] for h in hes] + [("s", i, 1)]
            for v, a, b in zip(verts, ins, outs):
                turns.setdefault(v, []).append((a, b))
    return turns


def check_template(t, kind):
    """Local R1-R3 at every vertex of a small template (pure Python)."""
    d = t.steps if kind == SIMPLICIAL else t.steps + 1
    turns = template_turns(t)
    incident = {}
    for e, (a, b) in enumerate(t.edges):
        incident.setdefault(a, []).append(2 * e)
        incident.setdefault(b, []).append(2 * e + 1)
    for i, sl in enumerate(t.slots):
        incident.setdefault(sl.start, []).append(("s", i, 0))
        incident.setdefault(sl.end, []).append(("s", i, 1))
    key = {}
    for v in incident:
        for j, h in enumerate(sorted(incident[v], key=str)):
            key[h] = (v, j)
    bad = []
    for v, hs in sorted(incident.items()):
        ts = [(key[a][1], key[b][1]) for a, b in turns.get(v, [])]
        ok, why, anti = local_r3(kind, d, [key[h][1] for h in hs], ts)
        if not ok:
            bad.append((v, why))
            continue
        if kind == CUBICAL:
            # stems of a vertex must be antipodal to each other
            stems = [key[h][1] for h in hs if isinstance(h, tuple)]
            if len(stems) != 2 or anti.get(stems[0]) != stems[1]:
                bad.append((v, "stems not antipodal"))
    if kind == CUBICAL and not bad:
        bad.extend(_template_module_breaks(t, turns))
    return not bad, bad


def _template_module_breaks(t, turns):
    # continuation of each strand step at both ends; pair by antipodal codes
    cont = {}
    for i, sl in enumerate(t.slots):
        for pi, p in enumerate(sl.paths):
            prev = ("s", i, 0)
            for s, (e, dr) in enumerate(p):
                nxt = ("s", i, 1) if s == len(p) - 1 else (2 * p[s + 1][0] + (0 if p[s + 1][1] == 1 else 1))
                lo, hi = (prev, nxt) if dr == 1 else (nxt, prev)
                cont.setdefault(e, []).append((lo, hi))
                prev = 2 * e + (1 if dr == 1 else 0)
    bad = []
    for e, lst in cont.items():
        def pairs(idx):
            g = {}
            for sid, r in enumerate(lst):
                c = r[idx]
                k = ("stem",) if isinstance(c, tuple) else _anti_class(t, c)
                g.setdefault(k, []).append(sid)
            return sorted(tuple(v) for v in g.values())
        a, b = pairs(0), pairs(1)
        if a != b or any(len(x) != 2 for x in a):
            bad.append((e, "module"))
    return bad


def _anti_class(t, h):
    # antipodal half-edges of S(C) at a vertex differ only in the far height
    if t.projection and "base" in t.projection:
        return (h // 8, h & 1)
    return (h & 1,)


def lens_arrays(d, x=None):
    """Vectorized strand-step data of the lens layout for large d.

    Returns a dict of int arrays with one entry per upstairs strand step:
    ``edge`` (S(C) edge id), ``lo``/``hi`` continuation codes at the two
    endpoints of the edge, plus per-vertex turn keys.
    """
    if d < 3:
        raise DegenerateDimension("array layout needs d >= 3")
    n = d - 1
    H = height_pairs(d, x)
    starts = np.array(cube_starts(n), dtype=np.int64)
    orders = np.array(cube_orders(n), dtype=np.int64)      # (n paths, n steps)
    words = np.array([[int(c) for c in h] for pair in H for h in pair], dtype=np.int64)  # (8, d)
    # downstairs vertex sequences: (starts, paths, n+1)
    flips = np.cumsum(1 << orders, axis=1)  # xor of distinct bits equals sum
    seq = np.concatenate([np.zeros((len(orders), 1), dtype=np.int64), flips], axis=1)
    verts = starts[:, None, None] ^ seq[None, :, :]
    return {"n": n, "H": words, "orders": orders, "verts": verts, "starts": starts}


def check_lens_arrays(d, x=None):
    """Local cubical R1-R3 of the lens layout, vectorized.

    Half-edge code at an upstairs vertex: ``2*axis + far height`` for S(C)
    edges and ``2n + slot`` for the two stems.  Checks every non-antipodal
    pair carries exactly one turn, antipodal pairs carry none, and fiber
    pairings seen from both ends of each edge agree.
    """
    A = lens_arrays(d, x)
    n, words, orders, verts = A["n"], A["H"], A["orders"], A["verts"]
    C = 2 * n + 2
    nv = 2 ** n
    counts = np.zeros(nv * 2 * C * C, dtype=np.int32)
    # per word w (0..7): pair P = w // 2; stems: start slot P % 2, end slot P // 2
    nb, npth, _ = verts.shape
    strand_edges = []
    for w in range(8):
        h = words[w]
        P = w // 2
        hv = np.broadcast_to(h, (nb, npth, n + 1))
        upv = 2 * verts + hv                      # upstairs vertex ids
        ax = np.broadcast_to(orders, (nb, npth, n))
        code_out = np.empty((nb, npth, n + 1), dtype=np.int64)
        code_in = np.empty((nb, npth, n + 1), dtype=np.int64)
        code_out[:, :, :n] = 2 * ax + hv[:, :, 1:]
        code_out[:, :, n] = 2 * n + P // 2
        code_in[:, :, 1:] = 2 * ax + hv[:, :, :n]
        code_in[:, :, 0] = 2 * n + P % 2
        lo = np.minimum(code_in, code_out)
        hi = np.maximum(code_in, code_out)
        key = (upv * C + lo) * C + hi
        counts += np.bincount(key.ravel(), minlength=counts.size).astype(np.int32)
        # strand steps: edge between verts[s] and verts[s+1], keyed by
        # (lower downstairs vertex, axis, heights at lower and upper end)
        va = verts[:, :, :n]
        vb = verts[:, :, 1:]
        swap = va > vb
        ha = hv[:, :, :n]
        hb = hv[:, :, 1:]
        ekey = ((np.where(swap, vb, va) * n + ax) * 4
                + 2 * np.where(swap, hb, ha) + np.where(swap, ha, hb)).astype(np.int32)
        ca = code_in[:, :, :n]
        cb = code_out[:, :, 1:]
        c_lo = np.where(swap, cb, ca).astype(np.int8)
        c_hi = np.where(swap, ca, cb).astype(np.int8)
        strand_edges.append((ekey.ravel(), c_lo.ravel(), c_hi.ravel()))
        del va, vb, swap, ha, hb, ca, cb
        del hv, upv, code_in, code_out, key
    counts = counts.reshape(nv * 2, C, C)
    bad = []
    iu = np.triu_indices(C, 1)
    pair_counts = counts[:, iu[0], iu[1]]
    antip = (iu[1] == iu[0] + 1) & (iu[0] % 2 == 0)
    if counts[:, np.arange(C), np.arange(C)].any():
        bad.append("backtracking turn")
    if (pair_counts[:, antip] != 0).any():
        bad.append("antipodal pair carries a strand")
    if (pair_counts[:, ~antip] != 1).any():
        bad.append("non-antipodal pair not covered exactly once")
    ekey = np.concatenate([t[0] for t in strand_edges])
    ends = [np.concatenate([t[1] for t in strand_edges]), np.concatenate([t[2] for t in strand_edges])]
    del strand_edges
    first = None
    for c in ends:
        order = np.lexsort((c >> 1, ekey))
        k1 = ekey[order]
        k2 = c[order] >> 1
        same = (k1[0::2] == k1[1::2]) & (k2[0::2] == k2[1::2])
        if not same.all():
            bad.append("fiber pairing not by antipodes")
            break
        partner = np.empty_like(order)
        partner[order[0::2]] = order[1::2]
        partner[order[1::2]] = order[0::2]
        del order, k1, k2, same
        if first is None:
            first = partner
        elif not np.array_equal(first, partner):
            bad.append("fiber pairings disagree at the two ends of an edge")
    fib = np.bincount(ekey)
    if (fib[fib > 0] != 2 * n).any() or np.count_nonzero(fib) != 4 * n * 2 ** (n - 1):
        bad.append("edge fiber size")
    return not bad, bad
