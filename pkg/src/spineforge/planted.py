"""Planted relators for end-to-end runs.

At desk-scale lengths a uniformly random relator has no compatible block
tuples, so the construction cannot start.  A planted relator is read off a
regular spine built first: one circle cut into ``t * dd`` blocks, tuple j
made of blocks j, j+t, ..., all even segments forming beachballs, and the
beachballs draped over hypercube or lens templates.  Letters are then
chosen so that the quotient immerses, and r is the word along the circle.

Some templates come in twin pairs with identical letters; swapping twin
beachballs keeps the quotient and changes only the transversal holonomy.
"""

from dataclasses import dataclass, field

from .rosegraph import CircleFamily, EdgePartition
from .spine import (CUBICAL, SIMPLICIAL, Spine, check_r5, check_regularity, classify_vertices,
                    genuine_valence, multiplicity)
from .templates import hypercube_template, lens_template
from .words import ReducedWord, make_rng


class PlantError(ValueError):
    pass


def coordinate_of_range(q, dd, kind):
    """Coordinate of the q-th block range inside a tuple.

    Cubical coordinates 2u and 2u+1 are antipodal; they are given to ranges
    u and u + dd/2 so that the pairing survives the shift at the wrap.
    """
    if kind == SIMPLICIAL:
        return q
    h = dd // 2
    return 2 * q if q < h else 2 * (q - h) + 1


def default_lengths(kind, d):
    dd = multiplicity(kind, d)
    lam = 4 * dd
    return lam, 8 * lam


_TPL = {}


def _template(kind, d):
    if (kind, d) not in _TPL:
        _TPL[(kind, d)] = hypercube_template(d) if kind == SIMPLICIAL else lens_template(d)
    return _TPL[(kind, d)]


@dataclass
class PlantedInstance:
    r: ReducedWord
    kind: str
    d: int
    k: int
    lam: int
    N: int
    t: int
    seed: int
    partition: EdgePartition
    layouts: list
    twins: list
    tries: int = 0
    info: dict = field(default_factory=dict)


def block_beachballs(kind, dd, t, N, lam):
    """Beachballs of the planted block layout as lists of (pos, lco, rco)."""
    out = []
    for j in range(t):
        for p in range(0, N, 2):
            arcs = []
            for q in range(dd):
                pos = ((j + q * t) * N + p) * lam
                q_left = (q - 1) % dd if (p == 0 and j == 0) else q
                arcs.append((pos, coordinate_of_range(q_left, dd, kind),
                             coordinate_of_range(q, dd, kind)))
            arcs.sort(key=lambda a: a[1])
            out.append(arcs)
    return out


def block_glued(kind, dd, t, N, lam):
    out = []
    for j in range(t):
        for p in range(1, N, 2):
            runs = [None] * dd
            for q in range(dd):
                runs[coordinate_of_range(q, dd, kind)] = ((j + q * t) * N + p) * lam
            out.append(runs)
    return out


def random_sigma(kind, dd, rng):
    if kind == SIMPLICIAL:
        return [int(x) for x in rng.permutation(dd)]
    h = dd // 2
    pi = rng.permutation(h)
    flip = rng.integers(0, 2, size=h)
    sigma = [0] * dd
    for u in range(h):
        sigma[2 * u] = 2 * int(pi[u]) + int(flip[u])
        sigma[2 * u + 1] = 2 * int(pi[u]) + 1 - int(flip[u])
    return sigma


def template_classes(tpl, lam, bbs, layout, n):
    """Edge classes of one glued template; layout[i] = (bb index, sigma)."""
    ell = lam // tpl.steps
    per = [[[] for _ in range(ell)] for _ in tpl.edges]
    for i, (b, sigma) in enumerate(layout):
        for k, (pos, _, _) in enumerate(bbs[b]):
            for s, (e, dr) in enumerate(tpl.slots[i].paths[sigma[k]]):
                base = pos + s * ell
                for u in range(ell):
                    if dr == 1:
                        per[e][u].append(((base + u) % n, 1))
                    else:
                        per[e][u].append(((base + ell - 1 - u) % n, -1))
    return [c for e in per for c in e]


def _classes(kind, d, lam, N, t, bbs, glued, layouts):
    n = t * multiplicity(kind, d) * N * lam
    tpl = _template(kind, d)
    classes = []
    for runs in glued:
        for u in range(lam):
            classes.append([(pos + u, 1) for pos in runs])
    for lay in layouts:
        classes.extend(template_classes(tpl, lam, bbs, lay, n))
    return EdgePartition.from_classes(n, classes)


def _placeholder(n):
    return CircleFamily(ReducedWord([1, 2] * (n // 2)))


def _fill(first, last, length, k, rng):
    """Random reduced word with prescribed first and last letters."""
    if length < 3:
        raise PlantError("topological edges must have length at least 3")
    w = [first]
    letters = [x for x in range(-k, k + 1) if x]
    for i in range(1, length - 1):
        bad = {-w[-1]}
        if i == length - 2:
            bad.add(-last)
        choices = [x for x in letters if x not in bad]
        w.append(choices[int(rng.integers(len(choices)))])
    w.append(last)
    return w


def planted_instance(kind, d, k, seed, t=1, twins=2, lam=None, N=None, max_tries=500,
                     require_r5=True):
    """A relator r together with the spine it was read from.

    With ``require_r5`` false the first layout is kept whatever its holonomy.
    """
    dd = multiplicity(kind, d)
    if lam is None or N is None:
        lam0, N0 = default_lengths(kind, d)
        lam = lam or lam0
        N = N or N0
    if 2 * k < genuine_valence(kind, d):
        raise PlantError("too few generators for the genuine valence")
    tpl = _template(kind, d)
    S = len(tpl.slots)
    nbb = t * N // 2
    if nbb % S or lam % tpl.steps:
        raise PlantError("beachball count or lambda does not fit the template")
    T = nbb // S
    if 2 * twins > T:
        raise PlantError("more twin templates than templates")
    rng = make_rng(seed)
    n = t * dd * N * lam
    bbs = block_beachballs(kind, dd, t, N, lam)
    glued = block_glued(kind, dd, t, N, lam)
    order = [int(x) for x in rng.permutation(nbb)]
    groups = [order[g * S:(g + 1) * S] for g in range(T)]
    layouts = [None] * T
    for g in range(twins):
        sig = [random_sigma(kind, dd, rng) for _ in range(S)]
        layouts[2 * g] = list(zip(groups[2 * g], sig))
        layouts[2 * g + 1] = list(zip(groups[2 * g + 1], sig))
    free = sorted(b for g in range(2 * twins, T) for b in groups[g])
    Lph = _placeholder(n)
    tries = 0
    while True:
        tries += 1
        if tries > max_tries:
            raise PlantError("no layout with trivial holonomy found")
        perm = [free[int(i)] for i in rng.permutation(len(free))]
        for g in range(2 * twins, T):
            chunk = perm[(g - 2 * twins) * S:(g - 2 * twins + 1) * S]
            layouts[g] = [(b, random_sigma(kind, dd, rng)) for b in chunk]
        part = _classes(kind, d, lam, N, t, bbs, glued, layouts)
        sp = Spine(Lph, part, kind, d, k=k, labels=False)
        if not require_r5:
            break
        r5, _ = check_r5(sp)
        if r5["pass"]:
            break
    word = _label(sp, kind, d, k, lam, tpl, bbs, layouts, twins, glued, rng)
    inst = PlantedInstance(ReducedWord(word), kind, d, k, lam, N, t, seed, part,
                           [[[b, 1, list(s)] for b, s in lay] for lay in layouts],
                           [[2 * g, 2 * g + 1] for g in range(twins)], tries)
    return inst


def _label(sp, kind, d, k, lam, tpl, bbs, layouts, twins, glued, rng):
    q = sp.q
    n = len(q.edge_map)
    ell = lam // tpl.steps
    letters = [x for x in range(-k, k + 1) if x]
    out_letter = {}

    def he_of(e, side):
        return sp.half_edge_of(e, side)

    # template vertex -> canonical half-edge list, per template instance
    def vertex_halfedges(lay):
        hes = {}
        for i, (b, sigma) in enumerate(lay):
            sl = tpl.slots[i]
            for k_, (pos, _, _) in enumerate(bbs[b]):
                path = sl.paths[sigma[k_]]
                v = sl.start
                for s, (e, dr) in enumerate(path):
                    a, c = tpl.edges[e]
                    x = (pos + s * ell) % n
                    y = (pos + (s + 1) * ell - 1) % n
                    hes.setdefault(v, {})[("e", e, 0 if dr == 1 else 1)] = he_of(x, 0)
                    v = c if dr == 1 else a
                    hes.setdefault(v, {})[("e", e, 1 if dr == 1 else 0)] = he_of(y, 1)
                # stems: the glued segment before and after the arc
                hes[sl.start][("stem", i, 0)] = he_of((pos - 1) % n, 1)
                hes[sl.end][("stem", i, 1)] = he_of((pos + lam) % n, 0)
        return {v: [h[key] for key in sorted(h)] for v, h in hes.items()}

    canon = [vertex_halfedges(lay) for lay in layouts]
    for g, hv in enumerate(canon):
        twin_of = g - 1 if (g < 2 * twins and g % 2 == 1) else None
        for v in sorted(hv):
            hs = hv[v]
            if twin_of is not None:
                src = canon[twin_of][v]
                for h, h0 in zip(hs, src):
                    out_letter[h] = out_letter[h0]
                continue
            pick = rng.choice(len(letters), size=len(hs), replace=False)
            for h, i in zip(hs, pick):
                out_letter[h] = letters[int(i)]
    lab = [None] * len(sp.sigma.edges)

    def chain_from(e0, length, src=None):
        # Sigma edges under L-edges e0..e0+length-1, oriented like L
        es = [(e0 + u) % n for u in range(length)]
        if lab[q.edge_map[es[0]]] is not None:
            return [lab[q.edge_map[e]] * q.edge_ori[e] for e in es]
        first = out_letter[he_of(es[0], 0)]
        last = -out_letter[he_of(es[-1], 1)]
        w = src if src is not None else _fill(first, last, length, k, rng)
        for e, x in zip(es, w):
            E = q.edge_map[e]
            val = x * q.edge_ori[e]
            if lab[E] is not None and lab[E] != val:
                raise PlantError("inconsistent planted labels")
            lab[E] = val
        return w

    for runs in glued:
        chain_from(runs[0], lam)
    words = {}
    for g, lay in enumerate(layouts):
        twin_of = g - 1 if (g < 2 * twins and g % 2 == 1) else None
        for i, (b, sigma) in enumerate(lay):
            for k_, (pos, _, _) in enumerate(bbs[b]):
                for s, (e, dr) in enumerate(tpl.slots[i].paths[sigma[k_]]):
                    key = (i, k_, s)
                    src = words.get((twin_of, key)) if twin_of is not None else None
                    w = chain_from(pos + s * ell, ell, src)
                    words[(g, key)] = w
    return [lab[q.edge_map[e]] * q.edge_ori[e] for e in range(n)]


def verify_planted(inst):
    L = CircleFamily(inst.r)
    sp = Spine(L, inst.partition, inst.kind, inst.d, k=inst.k)
    return check_regularity(sp), sp
