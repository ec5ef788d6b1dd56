"""Piece statistics, bead decompositions and the long-subword lift check."""

import math
from dataclasses import dataclass, field

from .rosegraph import CircleFamily, EdgePartition, apply_partition
from .words import ReducedWord, make_rng


class AnalysisError(ValueError):
    pass


# pieces

def _symmetrized(p):
    """Cyclic words r and r^-1 for every relator."""
    out = []
    for r in p.relators:
        w = tuple(r)
        out.append(w)
        out.append(tuple(-x for x in reversed(w)))
    return out


def _rank_tables(words):
    """Doubling ranks of w^infinity[i : i + 2^j] for every word and start."""
    starts = [(a, i) for a, w in enumerate(words) for i in range(len(w))]
    rank = {s: words[s[0]][s[1]] for s in starts}
    tables = [rank]
    top = max(len(w) for w in words)
    step = 1
    while step < top:
        keys = {s: (rank[s], rank[(s[0], (s[1] + step) % len(words[s[0]]))]) for s in starts}
        ids = {k: i for i, k in enumerate(sorted(set(keys.values())))}
        rank = {s: ids[keys[s]] for s in starts}
        tables.append(rank)
        step *= 2
    return starts, tables


def _lcp(words, tables, a, b, cap):
    la, lb = len(words[a[0]]), len(words[b[0]])
    i, j = a[1], b[1]
    out = 0
    for lev in range(len(tables) - 1, -1, -1):
        step = 1 << lev
        if out + step > cap:
            continue
        t = tables[lev]
        if t[(a[0], (i + out) % la)] == t[(b[0], (j + out) % lb)]:
            out += step
    return out


def piece_profile(p):
    """Longest piece starting at each position of the symmetrized relators.

    Positions are the cyclic rotations of each r and r^-1, and a piece shared
    by two positions is capped at the shorter of their words.  Rotations are
    sorted by doubling ranks, so for a fixed length threshold only neighbours
    in sorted order need comparing.
    """
    words = _symmetrized(p)
    if not words or any(len(w) == 0 for w in words):
        raise AnalysisError("relators must be nonempty")
    starts, tables = _rank_tables(words)
    top = tables[-1]
    order = sorted(starts, key=lambda s: (top[s], s))
    best = {s: 0 for s in starts}
    for thr in sorted({len(w) for w in words}):
        sub = [s for s in order if len(words[s[0]]) >= thr]
        for a, b in zip(sub, sub[1:]):
            x = _lcp(words, tables, a, b, thr)
            best[a] = max(best[a], x)
            best[b] = max(best[b], x)
    return best


def max_piece(p):
    return max(piece_profile(p).values())


def pieces_histogram(p):
    """CSV text: piece length, number of positions whose longest piece has it."""
    counts = {}
    for x in piece_profile(p).values():
        counts[x] = counts.get(x, 0) + 1
    return "length,positions\n" + "".join(f"{x},{counts[x]}\n" for x in sorted(counts))


def pieces_ratio(p):
    return max_piece(p) / p.n


# bead decomposition

@dataclass
class BeadDecomposition:
    n: int
    m: int
    dd: int
    delta: float
    C: float
    lip_length: int
    factors: list
    lips: list
    pieces: list = field(default_factory=list)

    def lip_mass(self):
        return sum(self.lip_length for _ in self.lips)

    def partition(self):
        """Edge partition gluing the occurrences of every lip."""
        classes = []
        for lip in self.lips:
            for u in range(self.lip_length):
                classes.append([(p + u, 1) for p in lip["positions"]])
        return EdgePartition.from_classes(self.n, classes)

    def to_json(self):
        return {"n": self.n, "m": self.m, "dd": self.dd, "delta": self.delta, "C": self.C,
                "lip_length": self.lip_length, "factors": self.factors, "lips": self.lips,
                "pieces": self.pieces}


def bead_lengths(n, delta, dd):
    """Lengths of r_i and s_i and the number m of beads, m divisible by dd."""
    lr = int(math.floor(n ** (1 - delta)))
    ls = int(math.floor(n ** delta))
    m = n // (lr + ls)
    m -= m % dd
    if m < dd or lr < 1 or ls < 1:
        raise AnalysisError("relator too short for a bead decomposition")
    return lr, ls, m


def bead_decompose(r, delta, C, dd, seed=0, k=None):
    """Factor r = r_1 s_1 ... r_m s_m and find the lips.

    Every s_i has length floor(n^delta) and every r_i floor(n^(1-delta)),
    except that the last r_m absorbs the rounding.  For each i < m/dd the
    blocks s_i, s_(i+m/dd), ... must share a subword of length ceil(C log n)
    whose occurrences have pairwise different letters before and after, so
    that gluing them keeps the quotient immersed.
    """
    r = r if isinstance(r, ReducedWord) else ReducedWord(r)
    letters = tuple(r)
    n = len(letters)
    k = k or r.rank
    if C >= delta / math.log(2 * k - 1):
        raise AnalysisError("C must be smaller than delta / log(2k-1)")
    ell = int(math.ceil(C * math.log(n)))
    if ell < 1:
        raise AnalysisError("n is too small for lips of positive length")
    lr, ls, m = bead_lengths(n, delta, dd)
    factors = []
    pos = 0
    for i in range(m):
        rl = lr if i < m - 1 else n - pos - ls
        factors.append({"r": [pos, rl], "s": [pos + rl, ls]})
        pos += rl + ls
    rng = make_rng(seed)
    step = m // dd
    lips = []
    for i in range(step):
        blocks = [factors[i + j * step]["s"] for j in range(dd)]
        lip, longest = _common_lip(letters, blocks, ell, rng)
        if lip is None:
            if longest >= ell:
                raise AnalysisError(f"no lip found: common subwords of length {ell} in bead {i}"
                                    " all have repeated flanking letters")
            raise AnalysisError(f"no lip found: longest common length {longest} < {ell}"
                                f" for bead {i}")
        lips.append(lip)
    occ = sorted(p for lip in lips for p in lip["positions"])
    pieces = []
    for a, b in zip(occ, occ[1:] + [occ[0] + n]):
        pieces.append([(a + ell) % n, b - a - ell])
    return BeadDecomposition(n, m, dd, delta, C, ell, factors, lips, pieces)


def _occurrences(letters, block, ell):
    start, length = block
    n = len(letters)
    out = {}
    for p in range(start, start + length - ell + 1):
        w = tuple(letters[(p + u) % n] for u in range(ell))
        out.setdefault(w, []).append(p % n)
    return out


def _common_lip(letters, blocks, ell, rng):
    n = len(letters)
    occ = [_occurrences(letters, b, ell) for b in blocks]
    common = sorted(set(occ[0]).intersection(*occ[1:]))
    choices = []
    for w in common:
        for combo in _product_limited([occ[j][w] for j in range(len(blocks))]):
            before = {letters[(p - 1) % n] for p in combo}
            after = {letters[(p + ell) % n] for p in combo}
            if len(before) == len(combo) and len(after) == len(combo):
                choices.append({"word": list(w), "positions": list(combo)})
                break
    if choices:
        return choices[int(rng.integers(len(choices)))], ell
    return None, _longest_common(letters, blocks, ell)


def _product_limited(lists, cap=4096):
    out = [[]]
    for lst in lists:
        out = [o + [x] for o in out for x in lst][:cap]
    return out


def _longest_common(letters, blocks, upto):
    best = 0
    for L in range(1, upto + 1):
        occ = [_occurrences(letters, b, L) for b in blocks]
        if set(occ[0]).intersection(*occ[1:]):
            best = L
        else:
            break
    return best


def lips_glue_legally(r, bd):
    L = CircleFamily(r if isinstance(r, ReducedWord) else ReducedWord(r))
    try:
        apply_partition(L, bd.partition())
    except ValueError:
        return False
    return True


# lift check

@dataclass
class LiftResult:
    verdict: object
    paths: int
    witness: dict = None

    def to_json(self):
        return {"verdict": self.verdict, "paths": self.paths, "witness": self.witness}


def _out_table(s):
    """out[v][letter] = (sigma edge, direction, far vertex)."""
    g = s.sigma
    out = [dict() for _ in range(g.num_vertices)]
    for E, (u, v, lab) in enumerate(g.edges):
        out[u][lab] = (E, 1, v)
        out[v][-lab] = (E, -1, u)
    return out


def long_subword_lift_check(s, r, beta, cap=2_000_000):
    """Do immersed Sigma-paths of length ceil(beta n) reading r or r^-1 lift to L?

    Sigma is folded, so a path is fixed by its start vertex and its word.
    Every start vertex is tried against every cyclic subword of r and r^-1;
    ``cap`` bounds the number of letters traced, and hitting it gives the
    verdict "inconclusive".
    """
    letters = tuple(r)
    n = len(letters)
    ell = int(math.ceil(beta * n))
    if ell < 1:
        raise AnalysisError("beta n must be positive")
    out = _out_table(s)
    q = s.q
    L = s.L
    inv = tuple(-x for x in reversed(letters))
    words = {}
    for src in (letters, inv):
        for p in range(n):
            w = tuple(src[(p + u) % n] for u in range(ell))
            words.setdefault(w, p)
    lifted = set()
    for e in range(L.num_edges):
        for dr in (1, -1):
            path = []
            x = e
            for _ in range(ell):
                path.append((q.edge_map[x], q.edge_ori[x] * dr))
                x = L.next_edge(x) if dr == 1 else L.prev_edge(x)
            lifted.add(tuple(path))
    work = 0
    count = 0
    trie = {}
    for w in words:
        node = trie
        for a in w:
            node = node.setdefault(a, {})
    for v in range(len(out)):
        stack = [(v, trie, [])]
        while stack:
            u, node, path = stack.pop()
            if len(path) == ell:
                count += 1
                if tuple(path) not in lifted:
                    return LiftResult(False, count, {"start": v, "edges": [list(x) for x in path]})
                continue
            for a, child in node.items():
                step = out[u].get(a)
                if step is None:
                    continue
                work += 1
                if work > cap:
                    return LiftResult("inconclusive", count, {"cap": cap})
                E, dr, w = step
                if path and path[-1] == (E, -dr):
                    continue
                stack.append((w, child, path + [(E, dr)]))
    return LiftResult(True, count)
