"""From a relator to a regular spine.

The stages run in order on one :class:`GluingState`; each is logged as a
move so that the trace replays the partition.  A stage that cannot finish
raises :class:`StageError` carrying its name and a witness.
"""

import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, field

from .moves import (Arc, GluingState, MoveError, Run, hypercube_glue, lens_glue, remainder_at,
                    replay, swap_beachballs, tear_move, template_for)
from .rosegraph import CircleFamily, IllegalQuotient
from .spine import (CUBICAL, SIMPLICIAL, Spine, check_regularity, cocycle_holonomy, is_identity,
                    multiplicity)
from .words import ReducedWord, make_rng, random_cyclically_reduced_word


class StageError(RuntimeError):
    def __init__(self, stage, message, witness=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
        self.witness = witness
        self.result = None


@dataclass
class BuildParams:
    d: int
    kind: str = SIMPLICIAL
    k: int = 3
    n: int = None
    lam: int = None
    N: int = None
    copies: int = 1
    seed: int = 0
    retry_budget: int = 20000
    model: str = "planted"
    top_edge: int = None

    @property
    def dd(self):
        return multiplicity(self.kind, self.d)

    def resolved(self):
        """Copy with lambda, N and n filled in from the defaults."""
        p = BuildParams(**asdict(self))
        if p.lam is None:
            p.lam = 4 * p.dd
        if p.N is None:
            p.N = 8 * p.lam
        if p.n is None:
            p.n = p.dd * p.N * p.lam
        if p.top_edge is None:
            p.top_edge = p.lam
        return p

    def validate(self):
        if self.kind not in (SIMPLICIAL, CUBICAL):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        p = self.resolved()
        if p.lam % p.dd:
            raise ValueError("dd must divide lambda")
        if p.N % 2 or p.N < 8 * p.lam:
            raise ValueError("N must be even and at least 8 lambda")
        need = p.d + 1 if p.kind == SIMPLICIAL else 2 * p.d + 1
        if 2 * p.k - 1 < need:
            raise ValueError(f"2k-1 >= {need} fails for k={p.k}")
        if p.copies < 1 or p.n < 1:
            raise ValueError("copies and n must be positive")
        if p.model not in ("planted", "uniform"):
            raise ValueError(f"unknown model {p.model!r}")
        return p

    def to_json(self):
        return asdict(self)


@dataclass
class Block:
    comp: int
    start: int
    index: int


@dataclass
class BlockStructure:
    lam: int
    N: int
    blocks: list
    prev: dict = field(default_factory=dict)

    def segment(self, b, p):
        return Run(b.comp, b.start + p * self.lam, self.lam)

    def per_component(self):
        out = {}
        for b in self.blocks:
            out.setdefault(b.comp, []).append(b)
        return out

    def to_json(self):
        return {"lam": self.lam, "N": self.N,
                "blocks": [[b.comp, b.start, b.index] for b in self.blocks]}

    @classmethod
    def from_json(cls, d):
        bs = cls(d["lam"], d["N"], [Block(*x) for x in d["blocks"]])
        bs.link()
        return bs

    def link(self):
        """Previous block on the same circle, for the even segment before a block."""
        self.prev = {}
        for comp, bl in self.per_component().items():
            for i, b in enumerate(bl):
                self.prev[(b.comp, b.start)] = bl[i - 1]
        return self


@dataclass
class BuildResult:
    spine: Spine
    report: object
    trace: list
    state: GluingState
    params: BuildParams
    info: dict

    def trace_jsonl(self):
        return "".join(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n"
                       for line in self.trace)

    def trace_hash(self):
        return hashlib.sha256(self.trace_jsonl().encode()).hexdigest()


def make_relator(params):
    """The relator a build runs on: planted by default, uniform on request."""
    p = params.resolved()
    if p.model == "uniform":
        return random_cyclically_reduced_word(p.k, p.n, p.seed)
    from .planted import planted_instance
    unit = p.dd * p.N * p.lam
    if p.n % unit:
        raise ValueError(f"planted relators need n divisible by {unit}")
    return planted_instance(p.kind, p.d, p.k, p.seed, t=p.n // unit, lam=p.lam, N=p.N).r


def _stage(st, name, fn, params=None):
    try:
        return st.run_move(name, params or {}, fn)
    except StageError:
        raise
    except (MoveError, IllegalQuotient, ValueError) as exc:
        raise StageError(name, str(exc)) from exc


# normalization and blocks

def _flanks_ok(st, runs):
    L = st.L
    before = {L.label(L.prev_edge(st.run_edges(r)[0])) for r in runs}
    after = {L.label(L.next_edge(st.run_edges(r)[-1])) for r in runs}
    return len(before) == len(runs) and len(after) == len(runs)


def normalize_length(st, params, rng=None):
    """Glue dd copies of one subword so the free length becomes a multiple of lambda N.

    Returns the per-component offset at which blocks start.
    """
    L = st.L
    unit = params.lam * params.N
    rho = L.n % unit
    if rho == 0:
        return {c: 0 for c in range(L.copies)}
    length = unit + rho
    dd = st.dd
    if L.copies < dd or L.n < length + unit:
        raise StageError("normalize", "normalization failed: need dd circles long enough")
    rng = rng or make_rng(params.seed)
    words = {}
    for p in range(L.n):
        words.setdefault(st.run_word(Run(0, p, length)), []).append(p)
    tries = 0
    for w in sorted(words, key=lambda w: words[w][0]):
        pos = words[w]
        if len(pos) < dd:
            continue
        for combo in itertools.combinations(pos, dd):
            tries += 1
            if tries > params.retry_budget:
                raise StageError("normalize", "normalization failed: retry budget exhausted")
            runs = [Run(c, combo[c], length) for c in range(dd)]
            if not _flanks_ok(st, runs):
                continue

            def glue(runs=runs):
                gid = st.add_glued(runs)
                st.free = []
                st.check_vertices([st.run_start(r) for r in runs] + [st.run_end(r) for r in runs])
                return {"glued": gid}
            try:
                st.run_move("normalize", {"runs": [r.to_json() for r in runs]}, glue)
            except (MoveError, IllegalQuotient):
                continue
            return {c: (combo[c] + length) % L.n if c < dd else 0 for c in range(L.copies)}
    raise StageError("normalize", "normalization failed: no repeated subword with distinct flanks")


def segment_blocks(st, params, offsets=None):
    L = st.L
    unit = params.lam * params.N
    offsets = offsets or {c: 0 for c in range(L.copies)}
    blocks = []
    for c in range(L.copies):
        free = L.n if offsets[c] == 0 and L.n % unit == 0 else L.n - (L.n % unit) - unit
        if free % unit:
            raise StageError("segment", "block lengths do not divide the circle")
        if offsets[c] == 0 and L.n % unit:
            raise StageError("segment", f"lambda N = {unit} does not divide n = {L.n}")
        for i in range(free // unit):
            blocks.append(Block(c, offsets[c] + i * unit, i))
    bs = BlockStructure(params.lam, params.N, blocks).link()
    st.run_move("segment", {"blocks": len(blocks)}, lambda: {"blocks": len(blocks)})
    return bs


# matching

def _odd_signature(st, bs, b):
    return tuple(st.run_word(bs.segment(b, p)) for p in range(1, bs.N, 2))


def _even_runs(bs, b):
    """Even segments of a block; the first follows the last odd segment of the previous block."""
    return [bs.segment(b, p) for p in range(0, bs.N, 2)]


def compatible(st, bs, blocks):
    """Aligned even segments start and end with pairwise different letters."""
    cols = [_even_runs(bs, b) for b in blocks]
    for j in range(len(cols[0])):
        firsts = set()
        lasts = set()
        for c in cols:
            w = st.run_word(c[j])
            firsts.add(w[0])
            lasts.add(w[-1])
        if len(firsts) != len(blocks) or len(lasts) != len(blocks):
            return False
    return True


def match_blocks(st, bs, params, rng=None):
    """Greedy partition of blocks into compatible dd-tuples."""
    rng = rng or make_rng(params.seed)
    dd = st.dd
    buckets = {}
    for b in bs.blocks:
        buckets.setdefault(_odd_signature(st, bs, b), []).append(b)
    keys = sorted(buckets, key=lambda k: (buckets[k][0].comp, buckets[k][0].start))
    order = [keys[int(i)] for i in rng.permutation(len(keys))]
    tuples = []
    unmatched = []
    for key in order:
        pool = list(buckets[key])
        while pool:
            cur = [pool.pop(0)]
            rest = []
            for b in pool:
                if len(cur) < dd and compatible(st, bs, cur + [b]):
                    cur.append(b)
                else:
                    rest.append(b)
            pool = rest
            if len(cur) == dd:
                tuples.append(cur)
            else:
                unmatched.extend(cur)
    tuples.sort(key=lambda t: (t[0].comp, t[0].start))
    unmatched.sort(key=lambda b: (b.comp, b.start))
    frac = len(unmatched) / max(1, len(bs.blocks))
    st.run_move("match", {"seed": params.seed},
                lambda: {"tuples": len(tuples), "unmatched": len(unmatched)})
    return {"matching": tuples, "unmatched": unmatched, "unmatched_fraction": frac}


def supercompatible(st, bs, blocks):
    return all(compatible(st, bs, list(sub))
               for sub in itertools.combinations(blocks, len(blocks) - 1))


def resolve_unmatched(st, bs, matching, params):
    """Absorb each unmatched block into a supercompatible (dd+1)-tuple.

    The circles are replaced by dd copies.  Block x of the (dd+1)-tuple in
    copy c joins group (x + c + 1) mod (dd+1), so every group is a sub-dd
    tuple, and ordinary tuples are glued in every copy.
    Returns the new (state, block structure, matching).
    """
    unmatched = matching["unmatched"]
    tuples = list(matching["matching"])
    if not unmatched:
        return st, bs, tuples
    dd = st.dd
    groups = []
    for u in unmatched:
        found = None
        for i, t in enumerate(tuples):
            if _odd_signature(st, bs, t[0]) != _odd_signature(st, bs, u):
                continue
            if supercompatible(st, bs, t + [u]):
                found = i
                break
        if found is None:
            raise StageError("resolve", "resolution failed", witness=[u.comp, u.start])
        groups.append(sorted(tuples.pop(found) + [u], key=lambda b: (b.comp, b.start)))
    L = st.L
    if st.glued:
        raise StageError("resolve", "resolution failed: circles were already glued by normalize")
    copies = L.copies * dd
    st2 = GluingState(CircleFamily(L.word, copies), st.kind, st.d, st.lam, st.N)
    blocks = [Block(c * L.copies + b.comp, b.start, b.index) for c in range(dd) for b in bs.blocks]
    bs2 = BlockStructure(bs.lam, bs.N, blocks).link()

    def lift(b, c):
        return Block(c * L.copies + b.comp, b.start, b.index)
    new = [[lift(b, c) for b in t] for t in tuples for c in range(dd)]
    for grp in groups:
        parts = [[] for _ in range(dd + 1)]
        for c in range(dd):
            for x, b in enumerate(grp):
                parts[(x + c + 1) % (dd + 1)].append(lift(b, c))
        new.extend(parts)
    new.sort(key=lambda t: (t[0].comp, t[0].start))
    st2.run_move("resolve", {"copies": dd, "groups": len(groups)},
                 lambda: {"copies": copies, "groups": len(groups)})
    st2.trace = st.trace + st2.trace
    return st2, bs2, new


# gluing

def coordinate(q, dd, kind):
    if kind == SIMPLICIAL:
        return q
    h = dd // 2
    return 2 * q if q < h else 2 * (q - h) + 1


def glue_matched(st, bs, tuples):
    """Glue odd segments of every tuple, then read off beachballs.

    Each even segment joins the end of one glued segment to the start of
    another; even segments with the same pair of ends form a beachball when
    there are exactly dd of them with distinct coordinates.  The rest is
    the remainder.
    """
    dd = st.dd
    N = bs.N

    def run():
        where = {}
        for t in tuples:
            t = sorted(t, key=lambda b: (b.comp, b.start))
            for p in range(1, N, 2):
                runs = [None] * dd
                for q, b in enumerate(t):
                    runs[coordinate(q, dd, st.kind)] = bs.segment(b, p)
                gid = st.add_glued(runs)
                for i, r in enumerate(runs):
                    where[(r.comp, r.pos)] = (gid, i)
        groups = {}
        loose = []
        for b in bs.blocks:
            evens = [(b.start + p * bs.lam) for p in range(0, N, 2)]
            for pos in evens:
                r = Run(b.comp, pos % st.L.n, bs.lam)
                left = where.get((b.comp, (pos - bs.lam) % st.L.n))
                right = where.get((b.comp, (pos + bs.lam) % st.L.n))
                if left is None or right is None:
                    loose.append(r)
                    continue
                a = Arc(r, left[0], left[1], right[0], right[1])
                groups.setdefault((left[0], right[0]), []).append(a)
        n_bb = 0
        for key in sorted(groups):
            arcs = groups[key]
            if len(arcs) == dd and len({a.lco for a in arcs}) == dd \
                    and len({a.rco for a in arcs}) == dd:
                st.add_beachball(arcs)
                n_bb += 1
            else:
                for a in arcs:
                    st.remainder[st.new_id()] = a
        st.free = loose
        xs = [x for g in st.glued.values() for r in g for x in (st.run_start(r), st.run_end(r))]
        st.check_vertices(xs)
        return {"glued": len(st.glued), "beachballs": n_bb, "remainder": len(st.remainder)}

    return _stage(st, "glue_matched", run)


def clear_remainder(st, params):
    """Tear the remainder until no remainder arcs are left."""
    if not st.remainder:
        st.run_move("clear_remainder", {}, lambda: {"tears": 0})
        return 0
    tears = 0
    while st.remainder:
        done = False
        starts = sorted({a.start for a in st.remainder.values()})
        ends = sorted({a.end for a in st.remainder.values()})
        for v in starts:
            if len(remainder_at(st, v, "end")) != st.dd:
                continue
            for vp in ends:
                if len(remainder_at(st, vp, "start")) != st.dd:
                    continue
                try:
                    tear_move(st, v, vp)
                except MoveError:
                    continue
                tears += 1
                done = True
                break
            if done:
                break
        if not done or tears > params.retry_budget:
            raise StageError("clear_remainder", "reservoir exhausted",
                             witness={"remainder": len(st.remainder), "tears": tears})
    return tears


def _inv(w):
    return tuple(-x for x in reversed(w))


class _LayoutSearch:
    """Backtracking placement of beachballs on one template at a time.

    Arc chunks are indexed by (step, word, orientation).  A seed beachball is
    tried in every slot, orientation and arc assignment; after that the
    slot with the most known edges is filled from the index.
    """

    def __init__(self, st, budget):
        self.st = st
        self.t = template_for(st.kind, st.d)
        self.ell = st.lam // self.t.steps
        self.budget = budget
        self.nodes = 0
        self.chunks = {}
        self.index = {}
        for bid, bb in st.beachballs.items():
            self._add(bid, bb)

    def _add(self, bid, bb):
        t = self.t
        for o in (1, -1):
            per = []
            for k, a in enumerate(bb.arcs):
                run = a.run if o == 1 else a.run.reversed()
                ws = [self.st.run_word(run.sub(s * self.ell, self.ell)) for s in range(t.steps)]
                per.append(ws)
                for s, w in enumerate(ws):
                    self.index.setdefault((s, w, o), []).append((bid, k))
            self.chunks[(bid, o)] = per

    def sigmas(self, bid):
        dd = self.t.degree
        bb = self.st.beachballs[bid]
        out = []
        for p in itertools.permutations(range(dd)):
            if self.st.kind == CUBICAL and not _pairs_ok(bb, p):
                continue
            out.append(list(p))
        return out

    def fits(self, known, slot, bid, o, sigma):
        """New edge words implied by the placement, or None on conflict."""
        sl = self.t.slots[slot]
        new = {}
        for k, ws in enumerate(self.chunks[(bid, o)]):
            for s, (e, dr) in enumerate(sl.paths[sigma[k]]):
                w = ws[s] if dr == 1 else _inv(ws[s])
                have = known.get(e, new.get(e))
                if have is None:
                    new[e] = w
                elif have != w:
                    return None
        return new

    def known_count(self, known, slot):
        return sum(1 for p in self.t.slots[slot].paths for e, _ in p if e in known)

    def candidates(self, known, slot, used):
        sl = self.t.slots[slot]
        seen = set()
        for pi, path in enumerate(sl.paths):
            for s, (e, dr) in enumerate(path):
                if e not in known:
                    continue
                w = known[e] if dr == 1 else _inv(known[e])
                for o in (1, -1):
                    for bid, k in self.index.get((s, w, o), []):
                        if bid in used or bid not in self.st.beachballs or (bid, o) in seen:
                            continue
                        seen.add((bid, o))
                        yield bid, o
                return

    def solve(self, seed_bid):
        """Yield complete layouts with the seed placed, in search order."""
        S = len(self.t.slots)
        for slot in range(S):
            for o in (1, -1):
                for sigma in self.sigmas(seed_bid):
                    new = self.fits({}, slot, seed_bid, o, sigma)
                    if new is None:
                        continue
                    for res in self._extend({slot: (seed_bid, o, sigma)}, new, {seed_bid}):
                        yield [res[i] for i in range(S)]

    def _extend(self, lay, known, used):
        self.nodes += 1
        if self.nodes > self.budget:
            raise StageError("glue_reservoir", "cover search failed: retry budget exhausted",
                             witness={"nodes": self.nodes})
        S = len(self.t.slots)
        if len(lay) == S:
            yield dict(lay)
            return
        free = [i for i in range(S) if i not in lay]
        slot = max(free, key=lambda i: (self.known_count(known, i), -i))
        if self.known_count(known, slot) == 0:
            return
        for bid, o in self.candidates(known, slot, used):
            for sigma in self.sigmas(bid):
                new = self.fits(known, slot, bid, o, sigma)
                if new is None:
                    continue
                lay[slot] = (bid, o, sigma)
                known2 = dict(known)
                known2.update(new)
                yield from self._extend(lay, known2, used | {bid})
                del lay[slot]


def _pairs_ok(bb, sigma):
    for k, a in enumerate(bb.arcs):
        for k2, b in enumerate(bb.arcs):
            if b.lco == a.lco ^ 1 and sigma[k2] != sigma[k] ^ 1:
                return False
            if b.rco == a.rco ^ 1 and sigma[k2] != sigma[k] ^ 1:
                return False
    return True


def glue_reservoir(st, params):
    """Glue every beachball into hypercube (simplicial) or lens (cubical) templates."""
    other = sorted(p.kind for p in st.pieces.values() if p.kind in ("barrel", "bipart",
                                                                     "half_barrel"))
    if other:
        raise StageError("glue_reservoir", "cover search failed: remainder pieces left",
                         witness={"pieces": other})
    try:
        search = _LayoutSearch(st, params.retry_budget)
    except MoveError as exc:
        raise StageError("glue_reservoir", str(exc)) from exc
    glue = hypercube_glue if st.kind == SIMPLICIAL else lens_glue
    S = len(search.t.slots)
    placed = []
    while st.beachballs:
        if len(st.beachballs) < S:
            raise StageError("glue_reservoir", "cover search failed: beachballs left over",
                             witness={"beachballs": sorted(st.beachballs)})
        seed_bid = min(st.beachballs)
        done = False
        for layout in search.solve(seed_bid):
            try:
                placed.append(glue(st, layout)["piece"])
            except MoveError:
                continue
            done = True
            break
        if not done:
            raise StageError("glue_reservoir", "cover search failed",
                             witness={"seed": seed_bid, "left": len(st.beachballs)})
    return placed


def symmetrize(st, spine, report):
    """Check that every component makes the same number of genuine visits.

    Moves are only drawn symmetrically here, so this stage verifies rather
    than rebalances.
    """
    ms = report.m
    st.run_move("symmetrize", {}, lambda: {"m": ms})
    if len(set(ms)) > 1:
        raise StageError("symmetrize", "components make different numbers of genuine visits",
                         witness={"m": ms})
    return ms


def twin_pairs(st):
    """Placed beachballs in different templates whose arc words agree."""
    by = {}
    for pid, p in sorted(st.pieces.items()):
        if p.kind not in ("cube", "lens"):
            continue
        dd = len(p.arcs) // len(p.info["layout"])
        for i in range(len(p.info["layout"])):
            arcs = p.arcs[i * dd:(i + 1) * dd]
            key = (i, tuple(sorted(st.run_word(a.run) for a in arcs)))
            by.setdefault(key, []).append(pid)
    out = []
    for (slot, _), pids in sorted(by.items()):
        for a, b in itertools.combinations(pids, 2):
            out.append((a, slot, b, slot))
    return out


def _holonomies(st, k):
    sp = Spine(st.L, st.partition(), st.kind, st.d, k=k)
    return sp, [cocycle_holonomy(sp, c) for c in range(st.L.copies)]


def adjust_cocycles(st, params):
    """Swap twin beachballs until every component has trivial holonomy."""
    sp, hol = _holonomies(st, params.k)
    bad = [c for c, h in enumerate(hol) if not is_identity(h)]
    swaps = []
    if not bad:
        st.run_move("adjust_cocycles", {}, lambda: {"swaps": 0})
        return sp, swaps
    tries = 0
    while bad:
        improved = False
        for a, s1, b, s2 in twin_pairs(st):
            tries += 1
            if tries > params.retry_budget:
                break
            # pieces are renumbered by a swap, so look the pair up again
            if a not in st.pieces or b not in st.pieces:
                continue
            try:
                out = swap_beachballs(st, a, s1, b, s2)
            except MoveError:
                continue
            sp2, hol2 = _holonomies(st, params.k)
            bad2 = [c for c, h in enumerate(hol2) if not is_identity(h)]
            if len(bad2) < len(bad):
                swaps.append([a, s1, b, s2, out["pieces"]])
                sp, hol, bad = sp2, hol2, bad2
                improved = True
                break
            p1, p2 = out["pieces"]
            swap_beachballs(st, p1, s1, p2, s2)
        if not improved:
            raise StageError("cocycle", "cocycle adjustment failed",
                             witness={"components": bad, "holonomy": [hol[c] for c in bad]})
    return sp, swaps


def build_spine(r, params):
    """Run every stage on the relator r and check the result."""
    p = params.validate()
    if not isinstance(r, ReducedWord):
        r = ReducedWord(r)
    rng = make_rng(p.seed)
    L = CircleFamily(r, p.copies)
    st = GluingState(L, p.kind, p.d, p.lam, p.N)
    st.run_move("params", {"params": p.to_json(), "relator": str(r)}, lambda: {})
    offsets = normalize_length(st, p, rng)
    bs = segment_blocks(st, p, offsets)
    m = match_blocks(st, bs, p, rng)
    if m["matching"] == [] and m["unmatched"]:
        raise StageError("match", "no compatible block tuples",
                         witness={"unmatched_fraction": m["unmatched_fraction"]})
    st, bs, tuples = resolve_unmatched(st, bs, m, p)
    glue_matched(st, bs, tuples)
    tears = clear_remainder(st, p)
    glue_reservoir(st, p)
    if st.free:
        raise StageError("glue_reservoir", "free edges remain",
                         witness={"free": [x.to_json() for x in st.free[:8]]})
    try:
        spine = Spine(st.L, st.partition(), st.kind, st.d, k=p.k)
    except (ValueError, IllegalQuotient) as exc:
        raise StageError("verify", str(exc)) from exc
    report = check_regularity(spine)
    if report.R1["pass"] and report.R2["pass"] and report.R3["pass"]:
        symmetrize(st, spine, report)
        spine, swaps = adjust_cocycles(st, p)
        report = check_regularity(spine)
    else:
        swaps = []
    info = {"tuples": len(tuples), "unmatched_fraction": m["unmatched_fraction"],
            "tears": tears, "swaps": len(swaps), "copies": st.L.copies,
            "min_top_edge": report.min_top_edge, "counts": st.counts()}
    res = BuildResult(spine, report, st.trace, st, p, info)
    err = None
    if not report.passed:
        err = StageError("verify", "regularity check failed",
                         witness={k: v for k, v in report.verdicts().items() if not v})
    elif report.min_top_edge < p.top_edge:
        err = StageError("verify", "topological edge shorter than required",
                         witness={"min_top_edge": report.min_top_edge, "required": p.top_edge})
    if err is not None:
        err.result = res
        raise err
    return res


def replay_trace(trace, upto=None):
    """Gluing state after the first ``upto`` trace lines of a build.

    The relator and sizes come from the leading params line; a resolve line
    restarts on the enlarged family of circles, as the build did.
    """
    if not trace or trace[0]["move"] != "params":
        raise ValueError("trace does not start with a params line")
    p = BuildParams(**trace[0]["params"]["params"])
    r = ReducedWord.parse(trace[0]["params"]["relator"])
    L = CircleFamily(r, p.copies)
    start = 0
    stop = len(trace) if upto is None else min(upto, len(trace))
    for i in range(stop):
        if trace[i]["move"] == "resolve":
            L = CircleFamily(r, trace[i]["inventory"]["copies"])
            start = i
    return replay(L, p.kind, p.d, p.lam, p.N, trace[start:stop])
