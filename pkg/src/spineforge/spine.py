"""Regular spines: fiber modules, the R1-R5 checker, transport and holonomy.

A strand is an edge of L.  At every vertex x of L the circle turns from the
half-edge of Sigma under the edge entering x to the half-edge under the edge
leaving x; all local conditions are phrased in terms of these turns.
Half-edges are encoded as ``2*E + end`` with end 0 at the tail of E.
"""

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

from .rosegraph import EdgePartition, apply_partition, is_immersed


SIMPLICIAL = "simplicial"
CUBICAL = "cubical"


class SpineError(ValueError):
    pass


def multiplicity(kind, d):
    """The gluing multiplicity: d for simplicial spines, 2(d-1) for cubical."""
    if kind == SIMPLICIAL:
        return d
    if kind == CUBICAL:
        return 2 * (d - 1)
    raise SpineError(f"unknown kind {kind!r}")


def genuine_valence(kind, d):
    return d + 1 if kind == SIMPLICIAL else 2 * d


@dataclass
class FiberModule:
    """The strands over one edge of Sigma, listed in label order.

    Simplicial: ``strands[i]`` carries label i+1.  Cubical: ``strands[2t]``
    and ``strands[2t+1]`` carry labels +(t+1) and -(t+1) and are antipodal.
    """
    kind: str
    strands: list

    def label(self, s):
        i = self.strands.index(s)
        if self.kind == SIMPLICIAL:
            return i + 1
        return (i // 2 + 1) * (1 if i % 2 == 0 else -1)

    def labels(self):
        return {s: self.label(s) for s in self.strands}

    def antipode(self, s):
        i = self.strands.index(s)
        return self.strands[i ^ 1]


class Spine:
    """A quotient of L together with fiber labelings.

    ``fibers`` maps each Sigma edge to a list of strands in label order; if
    omitted they are derived from the local structure.
    """

    def __init__(self, L, partition, kind, d, fibers=None, k=None, labels=True):
        self.L = L
        self.partition = partition
        self.kind = kind
        self.d = d
        self.k = k if k is not None else L.word.rank
        self.dd = multiplicity(kind, d)
        self.q = apply_partition(L, partition, check=False, labels=labels)
        self.sigma = self.q.graph
        self._turns = None
        self._fiber_sets = None
        if fibers is None:
            fibers = derive_fibers(self)
        self.fibers = [list(f) for f in fibers]

    # structural helpers

    def half_edge_of(self, e, side):
        """Half-edge of Sigma under side ``side`` (0 tail, 1 head) of L-edge e."""
        E = self.q.edge_map[e]
        end = side if self.q.edge_ori[e] == 1 else 1 - side
        return 2 * E + end

    def he_vertex(self, h):
        u, v, _ = self.sigma.edges[h // 2]
        return v if h & 1 else u

    def turns(self):
        """List indexed by L-vertex x: (half-edge in, half-edge out)."""
        if self._turns is None:
            L = self.L
            t = []
            for x in range(L.num_edges):
                t.append((self.half_edge_of(L.prev_edge(x), 1), self.half_edge_of(x, 0)))
            self._turns = t
        return self._turns

    def continuation(self, s, h):
        """Half-edge that strand s turns into at the end of s lying on h."""
        L = self.L
        side = (h & 1) if self.q.edge_ori[s] == 1 else 1 - (h & 1)
        t = self.turns()
        if side == 1:
            return t[L.head(s)][1]
        return t[s][0]

    def neighbour_strand(self, s, h):
        """The L-edge adjacent to s across its end lying on h."""
        L = self.L
        side = (h & 1) if self.q.edge_ori[s] == 1 else 1 - (h & 1)
        return L.next_edge(s) if side == 1 else L.prev_edge(s)

    def preimages(self):
        if self._fiber_sets is None:
            pre = [[] for _ in self.sigma.edges]
            for e, E in enumerate(self.q.edge_map):
                pre[E].append(e)
            self._fiber_sets = pre
        return self._fiber_sets

    def module(self, E):
        return FiberModule(self.kind, self.fibers[E])

    def incident(self):
        inc = [[] for _ in range(self.sigma.num_vertices)]
        for i, (u, v, _) in enumerate(self.sigma.edges):
            inc[u].append(2 * i)
            inc[v].append(2 * i + 1)
        return inc

    def vertex_turns(self):
        vt = [[] for _ in range(self.sigma.num_vertices)]
        for x, (a, b) in enumerate(self.turns()):
            vt[self.q.vertex_map[x]].append((a, b, x))
        return vt


def classify_vertices(s):
    """'internal', 'genuine' or 'bad' for every vertex of Sigma."""
    gv = genuine_valence(s.kind, s.d)
    out = []
    for val in s.sigma.valence():
        out.append("internal" if val == 2 else "genuine" if val == gv else "bad")
    return out


def _antipodal_matching(inc, counts):
    """Zero-strand pairs at a cubical vertex, if they form a perfect matching."""
    zero = [(a, b) for a, b in combinations(sorted(inc), 2)
            if counts.get((a, b), 0) == 0]
    seen = set()
    for a, b in zero:
        if a in seen or b in seen:
            return None
        seen.update((a, b))
    if len(seen) != len(inc):
        return None
    anti = {}
    for a, b in zero:
        anti[a] = b
        anti[b] = a
    return anti


def derive_fibers(s):
    """Fiber labelings read off the local structure.

    Cubical pairings are taken from the antipodal structure at one genuine
    end of each topological edge and carried along it by continuation, so
    the checker's module test at the far end is a genuine test.
    """
    pre = s.preimages()
    if s.kind == SIMPLICIAL:
        return [sorted(p) for p in pre]
    cls = classify_vertices(s)
    inc = s.incident()
    vt = s.vertex_turns()
    anti_at = {}
    for v, c in enumerate(cls):
        if c != "genuine":
            continue
        counts = Counter()
        for a, b, _ in vt[v]:
            counts[(min(a, b), max(a, b))] += 1
        anti = _antipodal_matching(inc[v], counts)
        if anti is not None:
            anti_at[v] = anti
    fibers = [None] * len(pre)
    for E in range(len(pre)):
        if fibers[E] is not None:
            continue
        # walk to a genuine end of the topological edge containing E
        path = _top_edge_through(s, E, cls)
        start_he = path[0]
        v = s.he_vertex(start_he)
        first = start_he // 2
        anti = anti_at.get(v)
        strands = sorted(pre[first])
        pairs = None
        if anti is not None and len(strands) == s.dd:
            part = {}
            for st in strands:
                part[s.continuation(st, start_he)] = st
            pairs = []
            used = set()
            for st in strands:
                if st in used:
                    continue
                c = s.continuation(st, start_he)
                mate = part.get(anti.get(c))
                if mate is None or mate in used or mate == st:
                    pairs = None
                    break
                used.update((st, mate))
                pairs.append((min(st, mate), max(st, mate)))
        if pairs is None:
            pairs = [tuple(strands[i:i + 2]) for i in range(0, len(strands), 2)]
        order = [x for p in sorted(pairs) for x in p]
        fibers[first] = order
        # propagate through internal vertices
        h = start_he ^ 1
        cur = order
        for nxt_he in path[1:]:
            nxt = []
            for st in cur:
                nb = s.neighbour_strand(st, h)
                nxt.append(nb)
            E2 = nxt_he // 2
            if fibers[E2] is not None or sorted(nxt) != sorted(pre[E2]):
                break
            fibers[E2] = nxt
            cur = nxt
            h = nxt_he ^ 1
    for E in range(len(pre)):
        if fibers[E] is None:
            fibers[E] = sorted(pre[E])
    return fibers


def _top_edge_through(s, E, cls):
    """Half-edges (oriented away from the start) of the topological edge of E."""
    other = {}
    for v, hs in enumerate(s.incident()):
        if cls[v] == "internal" and len(hs) == 2:
            other[hs[0]] = hs[1]
            other[hs[1]] = hs[0]
    # walk backwards from the tail of E
    h = 2 * E
    seen = {E}
    while h in other:
        prev = other[h] ^ 1
        if prev // 2 in seen:
            break
        seen.add(prev // 2)
        h = prev
    start = h ^ 0
    # start is a half-edge whose vertex is the start of the walk; orient outward
    path = [start]
    h = start ^ 1
    visited = {start // 2}
    while h in other:
        nh = other[h]
        if nh // 2 in visited:
            break
        visited.add(nh // 2)
        path.append(nh)
        h = nh ^ 1
    return path


@dataclass
class SpineReport:
    immersed: bool
    R1: dict
    R2: dict
    R3: dict
    R4: dict
    R5: dict
    m: list
    min_top_edge: int
    holonomies: list = field(default_factory=list)

    @property
    def passed(self):
        return all(getattr(self, r)["pass"] for r in ("R1", "R2", "R3", "R4", "R5")) and self.immersed

    def verdicts(self):
        return {r: getattr(self, r)["pass"] for r in ("R1", "R2", "R3", "R4", "R5")}

    def to_json(self):
        return {"immersed": self.immersed, "R1": self.R1, "R2": self.R2, "R3": self.R3,
                "R4": self.R4, "R5": self.R5, "m": self.m, "min_top_edge": self.min_top_edge,
                "holonomies": self.holonomies, "pass": self.passed}


MAX_WITNESSES = 20


def _wit(lst):
    return sorted(lst)[:MAX_WITNESSES]


def check_r1(s):
    cls = classify_vertices(s)
    bad = [[v, val] for v, (c, val) in enumerate(zip(cls, s.sigma.valence())) if c == "bad"]
    return {"pass": not bad, "witnesses": _wit(bad)}


def check_r2(s):
    pre = s.preimages()
    bad = []
    for E, p in enumerate(pre):
        f = s.fibers[E] if E < len(s.fibers) else []
        if len(p) != s.dd:
            bad.append([E, "preimage", len(p)])
        elif len(f) != s.dd or sorted(f) != sorted(p):
            bad.append([E, "fiber", len(f)])
    if len(s.fibers) != len(pre):
        bad.append([-1, "fiber count", len(s.fibers)])
    if s.kind == CUBICAL and not bad:
        bad.extend(_internal_module_breaks(s))
    return {"pass": not bad, "witnesses": _wit(bad)}


def _internal_module_breaks(s):
    cls = classify_vertices(s)
    bad = []
    for v, hs in enumerate(s.incident()):
        if cls[v] != "internal":
            continue
        h1 = hs[0]
        m1 = s.module(h1 // 2)
        m2 = s.module(hs[1] // 2)
        for st in m1.strands:
            nb = s.neighbour_strand(st, h1)
            if nb not in m2.strands:
                continue
            if m2.antipode(nb) != s.neighbour_strand(m1.antipode(st), h1):
                bad.append([hs[1] // 2, "module", v])
                break
    return bad


def local_r3(kind, d, incident, turns, modules=None, continuation=None):
    """R3 at one genuine vertex.

    ``incident``: half-edges at the vertex; ``turns``: list of (a, b) pairs.
    For cubical vertices ``modules`` maps a half-edge to a pair
    (strands-at-this-end, antipode function) and ``continuation(strand, h)``
    gives the half-edge a strand continues into.
    Returns (ok, reason, antipodal map or None).
    """
    counts = Counter()
    for a, b in turns:
        if a == b:
            return False, "backtrack", None
        counts[(min(a, b), max(a, b))] += 1
    inc = sorted(incident)
    if kind == SIMPLICIAL:
        for a, b in combinations(inc, 2):
            if counts.get((a, b), 0) != 1:
                return False, f"pair {a},{b} carries {counts.get((a, b), 0)}", None
        if sum(counts.values()) != len(inc) * (len(inc) - 1) // 2:
            return False, "stray turns", None
        return True, "", None
    for key, c in counts.items():
        if c > 1:
            return False, f"pair {key[0]},{key[1]} carries {c}", None
    anti = _antipodal_matching(inc, counts)
    if anti is None or len(inc) != 2 * d:
        return False, "no antipodal matching", None
    if modules is not None:
        for h in inc:
            strands, ant = modules(h)
            for st in strands:
                c1 = continuation(st, h)
                c2 = continuation(ant(st), h)
                if anti.get(c1) != c2:
                    return False, f"module break on half-edge {h}", anti
    return True, "", anti


def check_r3(s):
    cls = classify_vertices(s)
    inc = s.incident()
    vt = s.vertex_turns()
    bad = []
    pre = s.preimages()
    for v, c in enumerate(cls):
        if c == "genuine":
            def modules(h, s=s):
                m = s.module(h // 2)
                return m.strands, m.antipode
            ok, why, _ = local_r3(s.kind, s.d, inc[v], [(a, b) for a, b, _ in vt[v]],
                                  modules if s.kind == CUBICAL else None, s.continuation)
            if not ok:
                bad.append([v, why])
        elif c == "internal":
            hs = set(inc[v])
            for a, b, _ in vt[v]:
                if a == b or {a, b} != hs:
                    bad.append([v, "internal strand does not continue"])
                    break
            else:
                if len(vt[v]) != len(pre[inc[v][0] // 2]):
                    bad.append([v, "internal turn count"])
    return {"pass": not bad, "witnesses": _wit([[v, str(w)] for v, w in bad])}


def genuine_visits(s):
    cls = classify_vertices(s)
    L = s.L
    m = []
    for c in range(L.copies):
        m.append(sum(1 for p in range(L.n) if cls[s.q.vertex_map[c * L.n + p]] == "genuine"))
    return m


def check_r4(s, m=None):
    ms = genuine_visits(s)
    ok = len(set(ms)) <= 1 and (m is None or all(x == m for x in ms))
    return {"pass": ok, "witnesses": [] if ok else [[c, x] for c, x in enumerate(ms)][:MAX_WITNESSES]}, ms


def min_top_edge(s):
    """Length of the shortest maximal path through internal vertices."""
    cls = classify_vertices(s)
    inc = s.incident()
    other = {}
    for v, hs in enumerate(inc):
        if cls[v] == "internal":
            other[hs[0]] = hs[1]
            other[hs[1]] = hs[0]
    best = None
    seen = set()
    for v, hs in enumerate(inc):
        if cls[v] == "internal":
            continue
        for h in hs:
            if h // 2 in seen:
                continue
            length = 0
            cur = h
            while True:
                seen.add(cur // 2)
                length += 1
                far = cur ^ 1
                if far not in other:
                    break
                cur = other[far]
            best = length if best is None else min(best, length)
    # cycles made only of internal vertices
    for E in range(len(s.sigma.edges)):
        if E in seen:
            continue
        length = 0
        cur = 2 * E
        while cur // 2 not in seen:
            seen.add(cur // 2)
            length += 1
            cur = other.get(cur ^ 1, cur ^ 1)
        best = length if best is None else min(best, length)
    return best if best is not None else 0


class TransportUndefined(SpineError):
    pass


class Transport:
    """Per-vertex lookup tables for transversal transport."""

    def __init__(self, s):
        self.s = s
        self.cls = classify_vertices(s)
        self.pair_turn = {}
        for x, (a, b) in enumerate(s.turns()):
            self.pair_turn[(a, b)] = x
            self.pair_turn[(b, a)] = x

    def strand_at(self, x, h):
        """The L-edge of turn x lying on half-edge h."""
        s = self.s
        a, b = s.turns()[x]
        if a == h:
            return s.L.prev_edge(x)
        if b == h:
            return x
        raise TransportUndefined(f"turn {x} does not use half-edge {h}")

    def step(self, strands, h_in, h_out, through=None):
        """Transport strands sitting on h_in across the vertex to h_out."""
        s = self.s
        v = s.he_vertex(h_in)
        out = []
        if self.cls[v] == "internal":
            for st in strands:
                out.append(s.neighbour_strand(st, h_in))
            return out
        for st in strands:
            c = s.continuation(st, h_in)
            x = self.pair_turn.get((h_out, c))
            if x is None or c == h_out:
                raise TransportUndefined(f"transport undefined at vertex {v}")
            out.append(self.strand_at(x, h_out))
        return out


def transversal_transport(s, v, in_edge, out_edge, transport=None):
    """Bijection of transversals for a strand turning in_edge -> out_edge at v.

    ``in_edge`` and ``out_edge`` are half-edges at v.  Returns a dict from
    strands over in_edge to strands over out_edge, excluding the turning
    strand (and its antipode in the cubical case).
    """
    tr = transport or Transport(s)
    x = tr.pair_turn.get((in_edge, out_edge))
    if x is None or tr.cls[v] != "genuine" or s.he_vertex(in_edge) != v:
        raise TransportUndefined(f"transport undefined at vertex {v}")
    ell = tr.strand_at(x, in_edge)
    m = s.module(in_edge // 2)
    skip = {ell}
    if s.kind == CUBICAL:
        skip.add(m.antipode(ell))
    src = [st for st in m.strands if st not in skip]
    dst = tr.step(src, in_edge, out_edge)
    return dict(zip(src, dst))


def cocycle_holonomy(s, comp, start=0, transport=None):
    """Holonomy of the transversal connection around one component of L.

    Returned as a dict from labels to labels in the fiber labeling of the
    starting edge (signed labels in the cubical case); the identity means the
    cocycle condition holds on this component.
    """
    tr = transport or Transport(s)
    L = s.L
    e0 = L.edge_id(comp, start)
    m0 = s.module(s.q.edge_map[e0])
    skip = {e0}
    if s.kind == CUBICAL:
        skip.add(m0.antipode(e0))
    base = [st for st in m0.strands if st not in skip]
    cur = list(base)
    e = e0
    for _ in range(L.n):
        x = L.next_edge(e)
        h_in, h_out = s.turns()[x]
        cur = tr.step(cur, h_in, h_out)
        e = x
    labels = m0.labels()
    return {labels[a]: labels[b] for a, b in zip(base, cur)}


def is_identity(h):
    return all(k == v for k, v in h.items())


def check_r5(s, transport=None):
    tr = transport or Transport(s)
    hol = []
    bad = []
    for c in range(s.L.copies):
        try:
            h = cocycle_holonomy(s, c, transport=tr)
        except TransportUndefined as exc:
            bad.append([c, str(exc)])
            hol.append(None)
            continue
        hol.append(sorted([k, v] for k, v in h.items()))
        if not is_identity(h):
            bad.append([c, "nontrivial holonomy"])
    return {"pass": not bad, "witnesses": _wit(bad)}, hol


def check_regularity(s, m=None):
    immersed, _ = is_immersed(s.sigma)
    r1 = check_r1(s)
    r2 = check_r2(s)
    r3 = check_r3(s)
    r4, ms = check_r4(s, m)
    if r1["pass"] and r2["pass"] and r3["pass"]:
        r5, hol = check_r5(s)
    else:
        r5, hol = {"pass": False, "witnesses": [["skipped", "R1-R3 failed"]]}, []
    return SpineReport(immersed, r1, r2, r3, r4, r5, ms, min_top_edge(s), hol)


def mapping_complex_stats(s, report=None):
    """Euler characteristic of Sigma with a disk on each component of L.

    For d = 2 simplicial spines also checks that the complex is a closed
    surface and that chi = c(1 - m/6).
    """
    report = report or check_regularity(s)
    if not all(report.verdicts()[r] for r in ("R1", "R2", "R3", "R4")):
        raise SpineError("mapping complex needs R1-R4")
    V = s.sigma.num_vertices
    E = len(s.sigma.edges)
    c = s.L.copies
    chi = V - E + c
    # naive cell count of the mapping cylinder plus disks
    VL = EL = s.L.num_edges
    naive = (V + VL) - (E + EL + VL) + (EL + c)
    out = {"chi": chi, "naive_chi": naive, "components": c, "m": report.m[0] if report.m else 0}
    if s.kind == SIMPLICIAL and s.d == 2:
        ok = all(len(p) == 2 for p in s.preimages())
        inc = s.incident()
        vt = s.vertex_turns()
        for v in range(V):
            deg = Counter()
            adj = {h: set() for h in inc[v]}
            for a, b, _ in vt[v]:
                deg[a] += 1
                deg[b] += 1
                adj[a].add(b)
                adj[b].add(a)
            if any(deg[h] != 2 for h in inc[v]):
                ok = False
                break
            start = inc[v][0]
            seen = {start}
            stack = [start]
            while stack:
                for y in adj[stack.pop()]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(inc[v]):
                ok = False
                break
        m = out["m"]
        formula_ok = 6 * chi == c * (6 - m)
        out["surface_check"] = ok and formula_ok
        out["formula_chi"] = f"{c}*(1-{m}/6)"
    return out
