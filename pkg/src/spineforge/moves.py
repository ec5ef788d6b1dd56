"""Local rewriting moves on a partial gluing of L.

A :class:`GluingState` holds the edge partition of L together with an
inventory: glued segments, the reservoir of beachballs, the remainder, and
the pieces the moves produce (barrels, biparts, half-barrels, glued
hypercubes and lenses).  Every move edits the partition through
:meth:`GluingState.glue` and :meth:`GluingState.unglue`; these primitive
edits are logged so that a trace replays the partition exactly.

Coordinates.  A glued segment is a list of ``dd`` runs; run ``i`` is its
coordinate ``i``.  An :class:`Arc` leaves the end of coordinate ``lco`` of
one glued segment and enters the start of coordinate ``rco`` of another.
In the cubical case coordinates ``2t`` and ``2t+1`` are antipodal.
"""

import copy
from dataclasses import dataclass, field
from typing import NamedTuple

from .rosegraph import EdgePartition, IllegalQuotient, apply_partition
from .spine import CUBICAL, SIMPLICIAL, multiplicity
from .templates import (DegenerateDimension, height_pairs, hypercube_template, lens_template,
                        spherical_graph)
from .words import letter_char


__all__ = ["Run", "Arc", "Beachball", "Piece", "GluingState", "MoveError", "covering_move",
           "elimination_move", "rolling_move", "tear_move", "close_barrels", "hypercube_glue",
           "lens_glue", "swap_beachballs", "replay", "latin", "identity_perms", "height_pairs",
           "spherical_graph", "DegenerateDimension"]


class MoveError(ValueError):
    pass


class Run(NamedTuple):
    """``length`` consecutive edges of component ``comp``.

    With ``dir`` = +1 the run covers positions pos, pos+1, ...; with -1 it
    covers pos, pos-1, ..., each edge crossed from head to tail.
    """
    comp: int
    pos: int
    length: int
    dir: int = 1

    def reversed(self):
        return Run(self.comp, self.pos + self.dir * (self.length - 1), self.length, -self.dir)

    def sub(self, start, length):
        return Run(self.comp, self.pos + self.dir * start, length, self.dir)

    def to_json(self):
        return [self.comp, self.pos, self.length, self.dir]


@dataclass
class Arc:
    run: Run
    start: int
    lco: int
    end: int
    rco: int

    def to_json(self):
        return {"run": self.run.to_json(), "start": self.start, "lco": self.lco,
                "end": self.end, "rco": self.rco}


@dataclass
class Beachball:
    """dd arcs from the end of one glued segment to the start of another."""
    arcs: list

    @property
    def start(self):
        return self.arcs[0].start

    @property
    def end(self):
        return self.arcs[0].end


@dataclass
class Piece:
    kind: str
    arcs: list
    info: dict = field(default_factory=dict)


def identity_perms(dd, s):
    return [list(range(s)) for _ in range(dd)]


def latin(dd, shift=None):
    """p[i][c] = c + shift[i] mod dd; every column sees every sheet once."""
    shift = list(range(dd)) if shift is None else list(shift)
    if sorted(x % dd for x in shift) != list(range(dd)):
        raise MoveError("latin shifts must be distinct mod dd")
    return [[(c + shift[i]) % dd for c in range(dd)] for i in range(dd)]


class GluingState:
    def __init__(self, L, kind, d, lam, N):
        self.L = L
        self.kind = kind
        self.d = d
        self.dd = multiplicity(kind, d)
        self.lam = lam
        self.N = N
        E = L.num_edges
        self.cls = [-1] * E
        self.ori = [1] * E
        self.members = {}
        self.next_cid = 0
        self.next_id = 0
        self.free = [Run(c, 0, L.n) for c in range(L.copies)]
        self.glued = {}
        self.beachballs = {}
        self.remainder = {}
        self.pieces = {}
        self.trace = []
        self.ledger = []
        self._ops = None
        self._snap = None

    # runs and words

    def run_edges(self, run):
        return [self.L.edge_id(run.comp, run.pos + run.dir * t) for t in range(run.length)]

    def run_word(self, run):
        L = self.L
        return tuple(L.label(e) * run.dir for e in self.run_edges(run))

    def run_start(self, run):
        e = self.L.edge_id(run.comp, run.pos)
        return self.L.tail(e) if run.dir == 1 else self.L.head(e)

    def run_end(self, run):
        e = self.L.edge_id(run.comp, run.pos + run.dir * (run.length - 1))
        return self.L.head(e) if run.dir == 1 else self.L.tail(e)

    def word_str(self, run):
        return "".join(letter_char(x) for x in self.run_word(run))

    def segment_word(self, gid):
        return self.run_word(self.glued[gid][0])

    def new_id(self):
        self.next_id += 1
        return self.next_id - 1

    # primitive edits

    def glue(self, runs):
        """Glue runs position by position, the first run giving the direction."""
        if len({r.length for r in runs}) != 1:
            raise MoveError("glued runs differ in length")
        lists = [self.run_edges(r) for r in runs]
        for t in range(runs[0].length):
            self._set_class([(lists[i][t], runs[i].dir) for i in range(len(runs))])

    def unglue(self, runs):
        for r in runs:
            for e in self.run_edges(r):
                if self.cls[e] >= 0:
                    self._free_class(self.cls[e])

    def _set_class(self, mem):
        for e, _ in mem:
            if self.cls[e] >= 0:
                raise MoveError(f"edge {e} already glued")
        if len({e for e, _ in mem}) != len(mem):
            raise MoveError("an edge is glued to itself")
        cid = self.next_cid
        self.next_cid += 1
        for e, o in mem:
            self.cls[e] = cid
            self.ori[e] = o
        self.members[cid] = [e for e, _ in mem]
        if self._ops is not None:
            self._ops.append(["g", [x for e, o in mem for x in (e, o)]])

    def _free_class(self, cid):
        mem = self.members.pop(cid)
        for e in mem:
            self.cls[e] = -1
            self.ori[e] = 1
        if self._ops is not None:
            self._ops.append(["u", sorted(mem)])

    # transactions

    def begin(self, name, params):
        self._snap = (list(self.cls), list(self.ori), dict(self.members), self.next_cid,
                      self.next_id, copy.deepcopy((self.free, self.glued, self.beachballs,
                                                   self.remainder, self.pieces)),
                      len(self.ledger))
        self._ops = []
        self._move = (name, params)

    def commit(self, delta=None):
        name, params = self._move
        self.trace.append({"move": name, "params": params, "ops": self._ops,
                           "inventory": delta or {}})
        self._ops = None
        self._snap = None

    def rollback(self):
        (self.cls, self.ori, self.members, self.next_cid, self.next_id, inv, nled) = self._snap
        self.free, self.glued, self.beachballs, self.remainder, self.pieces = inv
        del self.ledger[nled:]
        self._ops = None
        self._snap = None

    def run_move(self, name, params, fn, legality=None):
        """Run ``fn`` as one logged move, rolling back on failure.

        An IllegalQuotient raised inside is reported as MoveError prefixed
        with ``legality``.
        """
        self.begin(name, params)
        try:
            out = fn()
        except IllegalQuotient as exc:
            self.rollback()
            raise MoveError(f"{legality or 'illegal quotient'}: {exc}") from exc
        except Exception:
            self.rollback()
            raise
        self.commit(out if isinstance(out, dict) else {"result": out})
        return out

    # views

    def partition(self):
        E = len(self.cls)
        cls = [c if c >= 0 else self.next_cid + e for e, c in enumerate(self.cls)]
        return EdgePartition(cls, self.ori)

    def quotient(self, check=True):
        return apply_partition(self.L, self.partition(), check=check)

    def mass(self):
        """Edge count held by the inventory; equals the size of L."""
        m = sum(r.length for r in self.free)
        m += sum(r.length for runs in self.glued.values() for r in runs)
        m += sum(a.run.length for b in self.beachballs.values() for a in b.arcs)
        m += sum(a.run.length for a in self.remainder.values())
        m += sum(a.run.length for p in self.pieces.values() for a in p.arcs)
        return m

    def counts(self):
        out = {"glued": len(self.glued), "beachballs": len(self.beachballs),
               "remainder": len(self.remainder)}
        for p in self.pieces.values():
            out[p.kind] = out.get(p.kind, 0) + 1
        return out

    # local legality

    def vertex_class(self, x):
        """L-vertices identified with x by the current gluing."""
        L = self.L
        seen = {x}
        stack = [x]
        while stack:
            y = stack.pop()
            for e, side in ((y, 0), (L.prev_edge(y), 1)):
                c = self.cls[e]
                if c < 0:
                    continue
                ref = side if self.ori[e] == 1 else 1 - side
                for f in self.members[c]:
                    fs = ref if self.ori[f] == 1 else 1 - ref
                    z = L.tail(f) if fs == 0 else L.head(f)
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
        return seen

    def _half_edge(self, e, side):
        c = self.cls[e]
        if c < 0:
            return ("free", e, side)
        return (c, side if self.ori[e] == 1 else 1 - side)

    def check_vertices(self, xs):
        """Raise IllegalQuotient unless every quotient vertex through xs is immersed."""
        L = self.L
        done = set()
        for x in xs:
            if x in done:
                continue
            vc = self.vertex_class(x)
            done |= vc
            seen = {}
            for y in vc:
                p = L.prev_edge(y)
                for he, lab in ((self._half_edge(y, 0), L.label(y)),
                                (self._half_edge(p, 1), -L.label(p))):
                    if seen.setdefault(lab, he) != he:
                        raise IllegalQuotient(min(vc), lab)

    def check_arcs(self, arcs):
        xs = []
        for a in arcs:
            xs.append(self.run_start(a.run))
            xs.append(self.run_end(a.run))
        self.check_vertices(xs)

    # inventory helpers

    def add_glued(self, runs, glue=True):
        if glue:
            self.glue(runs)
        gid = self.new_id()
        self.glued[gid] = list(runs)
        return gid

    def add_beachball(self, arcs):
        bid = self.new_id()
        self.beachballs[bid] = Beachball(sorted(arcs, key=lambda a: a.lco))
        return bid

    def add_piece(self, kind, arcs, **info):
        pid = self.new_id()
        self.pieces[pid] = Piece(kind, list(arcs), info)
        return pid

    def beachball_ending_at(self, gid):
        for bid, b in sorted(self.beachballs.items()):
            if b.end == gid:
                return bid
        return None

    def beachball_starting_at(self, gid):
        for bid, b in sorted(self.beachballs.items()):
            if b.start == gid:
                return bid
        return None

    def remap_segments(self, remap):
        if not remap:
            return

        def f(g):
            while g in remap:
                g = remap[g]
            return g
        for coll in ([a for b in self.beachballs.values() for a in b.arcs],
                     list(self.remainder.values()),
                     [a for p in self.pieces.values() for a in p.arcs]):
            for a in coll:
                a.start = f(a.start)
                a.end = f(a.end)
        for p in self.pieces.values():
            for key in ("left", "right"):
                if key in p.info:
                    p.info[key] = f(p.info[key])


def replay(L, kind, d, lam, N, trace, upto=None):
    """Rebuild the partition of a state from the primitive edits of a trace."""
    st = GluingState(L, kind, d, lam, N)
    for i, line in enumerate(trace):
        if upto is not None and i >= upto:
            break
        for op, data in line["ops"]:
            if op == "g":
                st._set_class([(data[j], data[j + 1]) for j in range(0, len(data), 2)])
            else:
                for c in sorted({st.cls[e] for e in data if st.cls[e] >= 0}):
                    st._free_class(c)
    return st


# covering machinery

def _check_perms(perms, dd, s):
    if len(perms) != dd:
        raise MoveError("each permutation tuple needs dd entries")
    for q in perms:
        if sorted(q) != list(range(s)):
            raise MoveError(f"not a permutation of {s} sheets: {q}")


def _pull_apart(st, gids, perm):
    """Unglue one segment per column and reglue coordinate i of column c
    into sheet perm[i][c].  Returns the new segment ids by sheet."""
    words = {st.segment_word(g) for g in gids}
    if len(words) != 1:
        raise MoveError("glued labels differ along a row")
    old = [st.glued.pop(g) for g in gids]
    st.unglue([r for runs in old for r in runs])
    s = len(gids)
    new = []
    for c2 in range(s):
        runs = [old[perm[i].index(c2)][i] for i in range(st.dd)]
        new.append(st.add_glued(runs))
    return new


def _cover_arcs(arc_cols, left, right, pl, pr):
    """Re-attach the arcs of one beachball row to the new sheets."""
    out = []
    for c, arcs in enumerate(arc_cols):
        for a in arcs:
            out.append(Arc(a.run, left[pl[a.lco][c]], a.lco, right[pr[a.rco][c]], a.rco))
    return out


def components(arcs):
    """Connected components of a bipartite multigraph given by arcs."""
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in arcs:
        ra, rb = find(("l", a.start)), find(("r", a.end))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps = {}
    for a in arcs:
        comps.setdefault(find(("l", a.start)), []).append(a)
    return [comps[k] for k in sorted(comps, key=lambda k: min((x.start, x.end) for x in comps[k]))]


def classify_cover(arcs, dd):
    """Name of a connected cover of a beachball given its arcs."""
    lefts = {a.start for a in arcs}
    rights = {a.end for a in arcs}
    if len(lefts) == 1 and len(rights) == 1:
        return "beachball"
    if len(lefts) == 2 and len(rights) == 2:
        return "barrel"
    if is_bipart(arcs, dd):
        return "bipart"
    return "cover"


def is_bipart(arcs, dd):
    """Arcs joining dd left segments to dd right segments in every pair."""
    lefts = {a.start for a in arcs}
    rights = {a.end for a in arcs}
    return len(lefts) == dd and len(rights) == dd and \
        len({(a.start, a.end) for a in arcs}) == dd * dd


def is_covering_type(st, arcs):
    """Labels pulled back from a beachball: arcs over one coordinate agree."""
    by = {}
    for a in arcs:
        if by.setdefault(a.lco, st.run_word(a.run)) != st.run_word(a.run):
            return False
    return True


def _store_row(st, arcs, bipart=False):
    """Store the pieces of one row; with ``bipart`` a K(dd, dd) is named so even for dd = 2."""
    out = []
    for comp in components(arcs):
        kind = "bipart" if bipart and is_bipart(comp, st.dd) else classify_cover(comp, st.dd)
        if kind == "beachball":
            out.append(["beachball", st.add_beachball(comp)])
        else:
            left = sorted({a.start for a in comp})
            right = sorted({a.end for a in comp})
            out.append([kind, st.add_piece(kind, comp, lefts=left, rights=right)])
    return out


def _merge_run(parts):
    head = parts[0]
    comp, pos, d = head.comp, head.pos, head.dir
    total = 0
    for p in parts:
        if p.comp != comp or p.dir != 1:
            raise MoveError("collapse needs forward runs on one circle")
        total += p.length
    return Run(comp, pos, total, 1)


def _collapse_row(st, arcs, left, right):
    """Glue each trivial sheet beachball into one segment of length 3 lambda."""
    remap = {}
    merged = []
    by = {}
    for a in arcs:
        if a.lco != a.rco:
            raise MoveError("collapse needs arcs that keep their coordinate")
        by.setdefault((a.start, a.end), []).append(a)
    for (g1, g2), group in sorted(by.items()):
        group.sort(key=lambda a: a.lco)
        if len(group) != st.dd:
            raise MoveError("collapse needs trivial cover")
        if len({st.run_word(a.run) for a in group}) != 1:
            raise MoveError("collapse needs monochromatic beachballs")
        st.glue([a.run for a in group])
        lr = st.glued.pop(g1)
        rr = st.glued.pop(g2)
        runs = [_merge_run([lr[i], group[i].run, rr[i]]) for i in range(st.dd)]
        gid = st.new_id()
        st.glued[gid] = runs
        remap[g1] = gid
        remap[g2] = gid
        merged.append(gid)
    return merged, remap


def _column_rows(st, matrix):
    r = len(matrix[0])
    for col in matrix:
        if len(col) != r:
            raise MoveError("ragged matrix")
        for j, b in enumerate(col):
            if b not in st.beachballs:
                raise MoveError(f"beachball {b} is not in the reservoir")
            if j and st.beachballs[col[j - 1]].end != st.beachballs[b].start:
                raise MoveError("beachballs in a column are not consecutive")
    return r


def _covering(st, matrix, perms, modes):
    s = len(matrix)
    dd = st.dd
    r = _column_rows(st, matrix)
    if len(perms) != r + 1:
        raise MoveError("need r+1 permutation tuples")
    for p in perms:
        _check_perms(p, dd, s)
    ident = identity_perms(dd, s)
    if perms[0] != ident or perms[r] != ident:
        raise MoveError("p_0 and p_r must be the identity")
    modes = modes or ["cover"] * r
    for j in range(1, r + 1):
        if modes[j - 1] == "collapse" and perms[j - 1] != perms[j]:
            raise MoveError("collapse needs trivial cover")
    bbs = [[st.beachballs[b] for b in col] for col in matrix]
    sheets = [[bbs[c][0].start for c in range(s)]]
    for j in range(1, r):
        gids = [bbs[c][j].start for c in range(s)]
        sheets.append(gids if perms[j] == ident else _pull_apart(st, gids, perms[j]))
    sheets.append([bbs[c][r - 1].end for c in range(s)])
    for col in matrix:
        for b in col:
            del st.beachballs[b]
    rows = []
    touched = []
    remap = {}
    for j in range(1, r + 1):
        arcs = _cover_arcs([bbs[c][j - 1].arcs for c in range(s)], sheets[j - 1], sheets[j],
                           perms[j - 1], perms[j])
        touched.extend(arcs)
        if modes[j - 1] == "collapse":
            merged, rm = _collapse_row(st, arcs, sheets[j - 1], sheets[j])
            remap.update(rm)
            rows.append([["glued", g] for g in merged])
        else:
            rows.append(_store_row(st, arcs))
    st.remap_segments(remap)
    st.check_arcs(touched)
    return rows


def covering_move(st, matrix, perms, modes=None):
    """Pull apart the interior glued rows of an s x r matrix of beachballs.

    ``matrix[c]`` lists r consecutive beachballs of column c.  ``perms[j]``
    (j = 0..r) is a list of dd permutations of range(s); coordinate i of the
    glued segment of column c in row j moves to sheet ``perms[j][i][c]``.
    ``modes[j-1]`` is 'cover' or 'collapse' for beachball row j.  Returns,
    per row, the list of [kind, id] of the produced pieces.
    """
    return st.run_move("covering", {"matrix": matrix, "perms": perms, "modes": modes},
                       lambda: _covering(st, matrix, perms, modes), legality="illegal cover labels")


def elimination_move(st, columns, shift=None):
    """Trade 3 dd beachballs for two biparts and dd collapsed segments.

    ``columns``: dd columns of 3 consecutive beachballs.  The outer rows are
    pulled apart by a Latin square into biparts; the beachballs formed in the
    middle row must be monochromatic and collapse.
    """
    dd = st.dd
    if len(columns) != dd or any(len(c) != 3 for c in columns):
        raise MoveError("elimination needs dd columns of 3 beachballs")
    P = latin(dd, shift)
    ident = identity_perms(dd, dd)

    def run():
        comps = sorted({a.run.comp for col in columns for b in col if b in st.beachballs
                        for a in st.beachballs[b].arcs})
        try:
            rows = _covering(st, columns, [ident, P, P, ident], ["cover", "collapse", "cover"])
            for j in (0, 2):
                for item in rows[j]:
                    kind, pid = item
                    # for dd = 2 a bipart has the shape of a barrel
                    if kind == "beachball" or not is_bipart(st.pieces[pid].arcs, dd) or \
                            not is_covering_type(st, st.pieces[pid].arcs):
                        raise MoveError("bipart labels not of covering type")
                    st.pieces[pid].kind = item[0] = "bipart"
        except IllegalQuotient as exc:
            raise MoveError(f"no covering-type labeling: {exc}") from exc
        except MoveError as exc:
            if "labels" in str(exc) or "monochromatic" in str(exc):
                raise MoveError(f"no covering-type labeling: {exc}") from exc
            raise
        st.ledger.append({"move": "elimination", "components": comps, "columns": columns})
        return {"rows": rows, "components": comps}

    return st.run_move("elimination", {"columns": columns, "shift": shift}, run)


def rolling_move(st, columns, coords=None):
    """Trade 4 beachballs (2 columns x 2 rows) for two barrels.

    The middle glued row swaps the two sheets in the coordinates ``coords``,
    a nonempty proper subset (default {0}).
    """
    dd = st.dd
    if len(columns) != 2 or any(len(c) != 2 for c in columns):
        raise MoveError("rolling needs 2 columns of 2 beachballs")
    coords = sorted(set(coords if coords is not None else [0]))
    if not coords or len(coords) >= dd:
        raise MoveError("swap coordinates must form a nonempty proper subset")
    tau = [[1, 0] if i in coords else [0, 1] for i in range(dd)]
    ident = identity_perms(dd, 2)

    def run():
        rows = _covering(st, columns, [ident, tau, ident], ["cover", "cover"])
        return {"rows": rows}

    return st.run_move("rolling", {"columns": columns, "coords": coords}, run,
                       legality="illegal cover labels")


# tearing the remainder

def remainder_at(st, gid, side):
    """Remainder arcs leaving the end (side 'end') or entering the start of gid."""
    if side == "end":
        return sorted((k for k, a in st.remainder.items() if a.start == gid),
                      key=lambda k: st.remainder[k].lco)
    return sorted((k for k, a in st.remainder.items() if a.end == gid),
                  key=lambda k: st.remainder[k].rco)


def find_triples(st, w1, w2, count, exclude=()):
    """Consecutive beachball triples whose interior glued words are w1, w2."""
    out = []
    used = set(exclude)
    by_start = {}
    for bid, b in sorted(st.beachballs.items()):
        by_start.setdefault(b.start, []).append(bid)
    for bid, b in sorted(st.beachballs.items()):
        if len(out) == count:
            break
        if bid in used or st.segment_word(b.end) != w1:
            continue
        nxt = [x for x in by_start.get(b.end, []) if x not in used]
        if not nxt:
            continue
        b2 = nxt[0]
        g2 = st.beachballs[b2].end
        if st.segment_word(g2) != w2:
            continue
        nxt3 = [x for x in by_start.get(g2, []) if x not in used and x not in (bid, b2)]
        if not nxt3:
            continue
        trip = [bid, b2, nxt3[0]]
        used.update(trip)
        out.append(trip)
    return out


def _tear(st, v, vp, triples, shift):
    dd = st.dd
    if v not in st.glued or vp not in st.glued:
        raise MoveError("tear vertices must be glued segment ends")
    ya = remainder_at(st, v, "end")
    yb = remainder_at(st, vp, "start")
    if len(ya) != dd or len(yb) != dd:
        raise MoveError("tear vertices must be dd-valent remainder vertices")
    bb_v = st.beachball_ending_at(v)
    bb_vp = st.beachball_starting_at(vp)
    if bb_v is None or bb_vp is None:
        raise MoveError("reservoir exhausted: no beachball next to a tear vertex")
    if triples is None:
        triples = find_triples(st, st.segment_word(v), st.segment_word(vp), dd - 1,
                               exclude=(bb_v, bb_vp))
    if len(triples) != dd - 1:
        raise MoveError(f"reservoir exhausted: {dd - 1 - len(triples)} beachball triples missing")
    for t in triples:
        if any(b not in st.beachballs for b in t) or len(t) != 3:
            raise MoveError("reservoir exhausted: triple not in the reservoir")
        b1, b2, b3 = (st.beachballs[b] for b in t)
        if b1.end != b2.start or b2.end != b3.start:
            raise MoveError("triple beachballs are not consecutive")
        if st.segment_word(b1.end) != st.segment_word(v) or \
                st.segment_word(b2.end) != st.segment_word(vp):
            raise MoveError("tear labels disagree")
    if {bb_v, bb_vp} & {b for t in triples for b in t}:
        raise MoveError("tear beachballs overlap")
    P = latin(dd, shift)
    ident = identity_perms(dd, dd)
    cols1 = [st.beachballs[bb_v]] + [st.beachballs[t[0]] for t in triples]
    cols2 = [None] + [st.beachballs[t[1]] for t in triples]
    cols3 = [st.beachballs[bb_vp]] + [st.beachballs[t[2]] for t in triples]
    g0 = [b.start for b in cols1]
    g1 = _pull_apart(st, [v] + [b.end for b in cols1[1:]], P)
    g2 = _pull_apart(st, [vp] + [b.start for b in cols3[1:]], P)
    g3 = [b.end for b in cols3]
    for b in [bb_v, bb_vp] + [x for t in triples for x in t]:
        del st.beachballs[b]
    row1 = _cover_arcs([b.arcs for b in cols1], g0, g1, ident, P)
    row3 = _cover_arcs([b.arcs for b in cols3], g2, g3, P, ident)
    mid = _cover_arcs([[]] + [b.arcs for b in cols2[1:]], g1, g2, P, P)
    touched = row1 + row3 + mid
    for k in ya:
        a = st.remainder[k]
        a.start = g1[P[a.lco][0]]
        touched.append(a)
    for k in yb:
        a = st.remainder[k]
        a.end = g2[P[a.rco][0]]
        touched.append(a)
    out = {"row1": _store_row(st, row1, True), "row3": _store_row(st, row3, True),
           "half_barrels": []}
    for comp in components(mid):
        left = {a.start for a in comp}
        right = {a.end for a in comp}
        if len(left) != 1 or len(right) != 1:
            raise MoveError("tear middle row is not a trivial cover")
        pid = st.add_piece("half_barrel", comp, left=comp[0].start, right=comp[0].end)
        out["half_barrels"].append(pid)
    st.check_arcs(touched)
    out["closed"] = close_barrels(st)
    return out


def tear_move(st, v, vp, triples=None, shift=None):
    """Tear the remainder at the end of glued segment v and the start of vp.

    Uses the beachball ending at the start of v, the one starting at the end
    of vp and dd-1 consecutive triples whose interior glued words equal those
    of v and vp.  The two outer rows become biparts and the middle row dd
    half-barrels whose free edges are the remainder arcs at v and vp.
    """
    return st.run_move("tear", {"v": v, "vp": vp, "triples": triples, "shift": shift},
                       lambda: _tear(st, v, vp, triples, shift), legality="tear labels disagree")


def non_barrel_edges(st):
    return len(st.remainder)


def close_barrels(st):
    """Turn half-barrels whose free edges close up into beachballs or barrels."""
    closed = []
    changed = True
    while changed:
        changed = False
        hb = {pid: p for pid, p in sorted(st.pieces.items()) if p.kind == "half_barrel"}
        for pid, p in hb.items():
            L_, R_ = p.info["left"], p.info["right"]
            out = remainder_at(st, L_, "end")
            inn = remainder_at(st, R_, "start")
            if len(out) != 1 or len(inn) != 1:
                continue
            a = st.remainder[out[0]]
            if a.end == R_ and out[0] == inn[0]:
                del st.remainder[out[0]]
                del st.pieces[pid]
                closed.append(["beachball", st.add_beachball(p.arcs + [a])])
                changed = True
                break
            for qid, q in hb.items():
                if qid == pid or q.info["right"] != a.end:
                    continue
                out2 = remainder_at(st, q.info["left"], "end")
                if len(out2) == 1 and st.remainder[out2[0]].end == R_:
                    b = st.remainder.pop(out2[0])
                    del st.remainder[out[0]]
                    del st.pieces[pid]
                    del st.pieces[qid]
                    arcs = p.arcs + q.arcs + [a, b]
                    closed.append(["barrel", st.add_piece("barrel", arcs,
                                                          lefts=sorted({x.start for x in arcs}),
                                                          rights=sorted({x.end for x in arcs}),
                                                          reservoir=True)])
                    changed = True
                    break
            if changed:
                break
    return closed


# template gluing

_TEMPLATES = {}


def template_for(kind, d):
    key = (kind, d)
    if key not in _TEMPLATES:
        _TEMPLATES[key] = hypercube_template(d) if kind == SIMPLICIAL else lens_template(d)
    return _TEMPLATES[key]


def strand_chunks(st, t, layout):
    """Runs laid on each template edge, in the edge's reference direction.

    ``layout[i] = (bid, orient, sigma)``: beachball bid fills slot i, running
    from slot start to slot end when orient = +1, and its arc k follows path
    sigma[k].
    """
    if st.lam % t.steps:
        raise MoveError("lambda is not divisible by the template step count")
    ell = st.lam // t.steps
    per_edge = [[] for _ in t.edges]
    for i, (bid, o, sigma) in enumerate(layout):
        bb = st.beachballs.get(bid)
        if bb is None:
            raise MoveError(f"beachball {bid} is not in the reservoir")
        if sorted(sigma) != list(range(t.degree)) or len(bb.arcs) != t.degree:
            raise MoveError("arc to path assignment is not a bijection")
        for k, a in enumerate(bb.arcs):
            if a.run.length != st.lam:
                raise MoveError("beachball arcs must have length lambda")
            run = a.run if o == 1 else a.run.reversed()
            for s, (e, dr) in enumerate(t.slots[i].paths[sigma[k]]):
                chunk = run.sub(s * ell, ell)
                per_edge[e].append(chunk if dr == 1 else chunk.reversed())
    return per_edge


def _module_pairs_ok(bb, sigma):
    for k, a in enumerate(bb.arcs):
        for k2, b in enumerate(bb.arcs):
            if b.lco == a.lco ^ 1 and sigma[k2] != sigma[k] ^ 1:
                return False
            if b.rco == a.rco ^ 1 and sigma[k2] != sigma[k] ^ 1:
                return False
    return True


def _template_glue(st, kind, layout, err):
    t = template_for(kind, st.d)
    if len(layout) != len(t.slots):
        raise MoveError(f"{err}: layout needs {len(t.slots)} beachballs")
    if len({b for b, _, _ in layout}) != len(layout):
        raise MoveError(f"{err}: a beachball is used twice")
    if kind == CUBICAL:
        for bid, _, sigma in layout:
            if not _module_pairs_ok(st.beachballs[bid], sigma):
                raise MoveError(f"{err}: layout breaks the antipodal pairing")
    per_edge = strand_chunks(st, t, layout)
    for e, runs in enumerate(per_edge):
        if len({st.run_word(r) for r in runs}) != 1:
            raise MoveError(f"{err}: template edge {e} carries different words")
    arcs = []
    for bid, _, _ in layout:
        arcs.extend(st.beachballs.pop(bid).arcs)
    for runs in per_edge:
        st.glue(runs)
    try:
        st.check_arcs(arcs)
    except IllegalQuotient as exc:
        raise MoveError(f"{err}: {exc}") from exc
    pid = st.add_piece("cube" if kind == SIMPLICIAL else "lens", arcs, template=t.name,
                       layout=[[b, o, list(s)] for b, o, s in layout])
    return {"piece": pid}


def hypercube_glue(st, layout):
    """Drape 2^(d-1) beachballs over the 1-skeleton of the d-cube."""
    if st.kind != SIMPLICIAL:
        raise MoveError("hypercube gluing needs a simplicial state")
    return st.run_move("hypercube", {"layout": [[b, o, list(s)] for b, o, s in layout]},
                       lambda: _template_glue(st, SIMPLICIAL, layout, "hypercube labels illegal"))


def lens_glue(st, layout):
    """Glue 2^d beachballs of degree 2(d-1) into the spherical graph of the (d-1)-cube."""
    if st.kind != CUBICAL:
        raise MoveError("lens gluing needs a cubical state")
    return st.run_move("lens", {"layout": [[b, o, list(s)] for b, o, s in layout]},
                       lambda: _template_glue(st, CUBICAL, layout, "lens labels illegal"))


def unglue_template(st, pid):
    """Return the beachballs of a glued template piece to the reservoir."""
    p = st.pieces.pop(pid)
    st.unglue([a.run for a in p.arcs])
    layout = p.info["layout"]
    dd = len(p.arcs) // len(layout)
    for i, (bid, _, _) in enumerate(layout):
        st.beachballs[bid] = Beachball(p.arcs[i * dd:(i + 1) * dd])
    return layout


def swap_beachballs(st, pid1, slot1, pid2, slot2):
    """Exchange two placed beachballs with identical arc words.

    The glued templates are rebuilt with the two beachballs interchanged,
    arcs matched by word, so the quotient graph is unchanged as a labeled
    graph while the map from L changes.
    """
    def run():
        kind = st.kind
        l1 = unglue_template(st, pid1)
        l2 = unglue_template(st, pid2) if pid2 != pid1 else l1
        b1, o1, s1 = l1[slot1]
        b2, o2, s2 = l2[slot2]
        w1 = [st.run_word(a.run) for a in st.beachballs[b1].arcs]
        w2 = [st.run_word(a.run) for a in st.beachballs[b2].arcs]
        if sorted(w1) != sorted(w2) or o1 != o2:
            raise MoveError("swapped beachballs are not twins")
        # arc k of b1 takes the path of the arc of b2 with the same word
        n1 = [s2[w2.index(w)] for w in w1]
        n2 = [s1[w1.index(w)] for w in w2]
        l1 = [list(x) for x in l1]
        l2 = [list(x) for x in l2] if pid2 != pid1 else l1
        l1[slot1] = [b2, o2, n2]
        l2[slot2] = [b1, o1, n1]
        err = "swap labels illegal"
        r1 = _template_glue(st, kind, [tuple(x) for x in l1], err)
        r2 = _template_glue(st, kind, [tuple(x) for x in l2], err) if pid2 != pid1 else r1
        return {"pieces": [r1["piece"], r2["piece"]]}

    return st.run_move("swap", {"a": [pid1, slot1], "b": [pid2, slot2]}, run)
