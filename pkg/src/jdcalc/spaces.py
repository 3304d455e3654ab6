"""Diagram strata: enumeration, relation instances, and exact quotients.

A stratum is the span of all canonical diagrams of one degree over one
signature.  The quotient by the antisymmetry / IHX / STU (and, for circled
asterisk labels, link) relations is presented by an echelon basis over exact
rationals; ``normal_form`` maps any linear combination to coordinates.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import cache
from .diagrams import (
    CIRCLE, CSTAR, INTERVAL, STAR, ZERO, DomainError, JacobiDiagram,
    Signature, StructureError, canonical_form, deserialize, empty_diagram,
    serialize,
)

#: Strata beyond this degree are refused (sizes grow superexponentially).
HARD_DEGREE_CAP = 6


class CapacityError(RuntimeError):
    """Requested stratum exceeds the configured degree cap."""


# ---------------------------------------------------------------------------
# linear combinations
# ---------------------------------------------------------------------------

class LinComb:
    """Finite formal sum of canonical diagrams with rational coefficients."""

    __slots__ = ("signature", "terms")

    def __init__(self, signature, terms=None):
        self.signature = signature
        self.terms = {}
        if terms:
            for d, c in terms.items() if isinstance(terms, dict) else terms:
                self.add_raw(d, c)

    @classmethod
    def zero(cls, signature):
        return cls(signature)

    @classmethod
    def of(cls, diagram, coeff=1):
        lc = cls(diagram.signature)
        lc.add_raw(diagram, coeff)
        return lc

    def add_raw(self, diagram, coeff):
        """Accumulate ``coeff`` times a (possibly raw) diagram; the diagram
        is canonicalized and its sign folded into the coefficient."""
        if diagram.signature != self.signature:
            raise DomainError("signature mismatch: %s vs %s"
                              % (diagram.signature, self.signature))
        coeff = Fraction(coeff)
        if not coeff:
            return
        got = canonical_form(diagram)
        if got is ZERO:
            return
        rep, sign = got
        new = self.terms.get(rep, 0) + coeff * sign
        if new:
            self.terms[rep] = new
        else:
            self.terms.pop(rep, None)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        out = LinComb(self.signature, dict(self.terms))
        for d, c in other.terms.items():
            out.add_raw(d, c)
        return out

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        out = LinComb.zero(self.signature)
        if scalar:
            out.terms = {d: c * scalar for d, c in self.terms.items()}
        return out

    def __mul__(self, scalar):
        return self.__rmul__(scalar)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, LinComb)
                and self.signature == other.signature
                and self.terms == other.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        """Deterministically ordered (diagram, coefficient) pairs."""
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def degree_part(self, n):
        out = LinComb.zero(self.signature)
        out.terms = {d: c for d, c in self.terms.items() if d.degree == n}
        return out

    def truncate(self, n):
        out = LinComb.zero(self.signature)
        out.terms = {d: c for d, c in self.terms.items() if d.degree <= n}
        return out

    def degrees(self):
        return sorted({d.degree for d in self.terms})

    def map_terms(self, fn):
        """Linear extension of a map diagram -> LinComb (on any signature)."""
        out = None
        for d, c in self.terms.items():
            img = fn(d)
            if out is None:
                out = LinComb.zero(img.signature)
            for d2, c2 in img.terms.items():
                out.add_raw(d2, c * c2)
        if out is None:
            raise DomainError("map_terms on the zero combination "
                              "has no target signature")
        return out

    def __repr__(self):
        if not self.terms:
            return "LinComb<0 on %s>" % self.signature
        bits = ["%s * [%s]" % (c, serialize(d)) for d, c in self.items()]
        return "LinComb<" + " + ".join(bits) + ">"


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _end_order(sig, nv, points):
    ends = []
    for c, n in enumerate(points):
        tag = {INTERVAL: "i", CIRCLE: "o", STAR: "a", CSTAR: "a"}[sig.kind(c)]
        for p in range(n):
            ends.append((tag, c, p))
    for i in range(nv):
        for s in range(3):
            ends.append(("v", i, s))
    return ends


def _matchings(sig, nv, points, forbid_vacuum=False, require_connected=False):
    """Yield edge lists of all diagrams with the given layout, pruned so that
    every unsigned isomorphism class appears at least once.

    Prunings: tadpole edges are skipped (they canonicalize to zero); fresh
    internal vertices are entered only through the lowest id at slot 0;
    partially used vertices only through their lowest free slot; asterisk
    legs only through the lowest free index per label.
    """
    ends = _end_order(sig, nv, points)
    if len(ends) % 2:
        return
    n_ends = len(ends)
    pos = {e: k for k, e in enumerate(ends)}
    matched = [False] * n_ends

    # union-find over component nodes with undo log
    nodes = {}

    def node_of(e):
        return ("v", e[1]) if e[0] == "v" else e

    for e in ends:
        nd = node_of(e)
        if nd not in nodes:
            rooted = nd[0] != "v"
            open_ct = 3 if nd[0] == "v" else 1
            nodes[nd] = [nd, open_ct, rooted]  # parent, open ends, rooted
    parent = {nd: nd for nd in nodes}
    info = {nd: (nodes[nd][1], nodes[nd][2]) for nd in nodes}
    undo = []

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def union_and_close(e1, e2):
        """Join the components of e1, e2 and account for the two matched
        ends.  Returns (closed_root or None); records undo info."""
        r1, r2 = find(node_of(e1)), find(node_of(e2))
        if r1 == r2:
            o, rt = info[r1]
            undo.append(("info", r1, (o, rt)))
            info[r1] = (o - 2, rt)
            return r1 if o - 2 == 0 else None
        o1, t1 = info[r1]
        o2, t2 = info[r2]
        undo.append(("parent", r2, parent[r2]))
        undo.append(("info", r1, (o1, t1)))
        parent[r2] = r1
        info[r1] = (o1 + o2 - 2, t1 or t2)
        return r1 if o1 + o2 - 2 == 0 else None

    def rollback(mark):
        while len(undo) > mark:
            kind, key, val = undo.pop()
            if kind == "parent":
                parent[key] = val
            else:
                info[key] = val

    edges = []
    remaining = n_ends

    def candidates(e):
        """Partner choices for the lowest unmatched end ``e``; the fresh
        vertex / lowest-slot / lowest-leg rules all exclude ``e`` itself."""
        e_vertex = e[1] if e[0] == "v" else None
        fresh = None
        low = {}
        for i in range(nv):
            st = [s for s in range(3) if not matched[pos[("v", i, s)]]
                  and ("v", i, s) != e]
            used = any(matched[pos[("v", i, s)]] for s in range(3)) \
                or i == e_vertex
            if not used:
                if fresh is None:
                    fresh = i
            elif st:
                low[i] = st[0]
        a_low = {}
        for c2, npts in enumerate(points):
            if sig.kind(c2) in (STAR, CSTAR):
                for p in range(npts):
                    f2 = ("a", c2, p)
                    if not matched[pos[f2]] and f2 != e:
                        a_low[c2] = p
                        break
        k = pos[e]
        out = []
        for f in ends[k + 1:]:
            if matched[pos[f]]:
                continue
            if f[0] == "v":
                if f[1] == e_vertex:
                    continue  # tadpole
                st = low.get(f[1])
                if st is None:
                    if f[1] != fresh or f[2] != 0:
                        continue
                elif f[2] != st:
                    continue
            elif f[0] == "a":
                if a_low.get(f[1]) != f[2]:
                    continue
            out.append(f)
        return out

    def rec():
        nonlocal remaining
        if remaining == 0:
            yield list(edges)
            return
        e = next(x for x in ends if not matched[pos[x]])
        for f in candidates(e):
            mark = len(undo)
            closed = union_and_close(e, f)
            ok = True
            if closed is not None and remaining > 2:
                o, rooted = info[closed]
                if require_connected:
                    ok = False
                elif forbid_vacuum and not rooted:
                    ok = False
            elif closed is not None and remaining == 2:
                o, rooted = info[closed]
                if forbid_vacuum and not rooted:
                    ok = False
                if require_connected and \
                        len({find(nd) for nd in parent}) != 1:
                    ok = False
            if ok:
                matched[pos[e]] = matched[pos[f]] = True
                edges.append((e, f))
                remaining -= 2
                yield from rec()
                remaining += 2
                edges.pop()
                matched[pos[e]] = matched[pos[f]] = False
            rollback(mark)

    if n_ends == 0:
        yield []
        return
    yield from rec()


def _compositions(total, k):
    """All ways to write ``total`` as an ordered sum of k nonnegatives."""
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


_pieces_cache = {}
_closed_cache = {}


def _subdivide_join(d, i, j):
    """Insertion move: subdivide edges i and j (possibly equal) at two new
    trivalent vertices and join them; grows the vertex count by two."""
    edges = list(d.edges)
    va, vb = d.nv, d.nv + 1
    if i == j:
        x, y = edges[i]
        del edges[i]
        edges += [(x, ("v", va, 0)), (("v", va, 1), ("v", vb, 0)),
                  (("v", vb, 1), y), (("v", va, 2), ("v", vb, 2))]
    else:
        x1, y1 = edges[i]
        x2, y2 = edges[j]
        for k in sorted((i, j), reverse=True):
            del edges[k]
        edges += [(x1, ("v", va, 0)), (("v", va, 1), y1),
                  (x2, ("v", vb, 0)), (("v", vb, 1), y2),
                  (("v", va, 2), ("v", vb, 2))]
    return JacobiDiagram(d.signature, d.nv + 2, d.points, edges, 1,
                         _validate=False)


def closed_connected(degree):
    """Canonical connected vacuum diagrams (no legs) of the given degree.

    Grown by edge insertion from the theta graph: subdividing two edges of a
    smaller diagram and joining the new vertices reaches every connected
    loopless trivalent multigraph.  Cross-checked against the brute-force
    matcher in the test suite.
    """
    if degree in _closed_cache:
        return _closed_cache[degree]
    from .diagrams import theta_graph
    sig0 = Signature(())
    key = ("closed", degree, cache.CODE_VERSION)
    payload = cache.load(key)
    if payload is not None:
        out = tuple(deserialize(t) for t in payload["diagrams"])
        _closed_cache[degree] = out
        return out
    if degree <= 0:
        out = ()
    elif degree == 1:
        out = (canonical_form(theta_graph(sig0))[0],)
    else:
        found = {}
        for p in closed_connected(degree - 1):
            m = len(p.edges)
            for i in range(m):
                for j in range(i, m):
                    got = canonical_form(_subdivide_join(p, i, j))
                    if got is not ZERO:
                        found.setdefault(got[0], None)
        out = tuple(sorted(found, key=lambda d: d.sort_key()))
    cache.store(key, {"diagrams": [serialize(d) for d in out]})
    _closed_cache[degree] = out
    return out


def connected_pieces(sig, degree):
    """Canonical connected diagrams of the given degree (over the asterisk
    labels of ``sig`` only; skeleton components get no attachments here)."""
    key = (sig, degree)
    if key in _pieces_cache:
        return _pieces_cache[key]
    star = [c for c in range(len(sig)) if sig.kind(c) in (STAR, CSTAR)]
    found = {}
    sig0 = Signature(())
    for d0 in closed_connected(degree):
        d = JacobiDiagram(sig, d0.nv, [0] * len(sig), d0.edges, 1,
                          _validate=False)
        found.setdefault(canonical_form(d)[0], None)
    for nlegs in range(1, 2 * degree + 1):
        nv = 2 * degree - nlegs
        if nv < 0 or not star:
            continue
        for combo in _compositions(nlegs, len(star)):
            points = [0] * len(sig)
            for c, n in zip(star, combo):
                points[c] = n
            for edges in _matchings(sig, nv, points,
                                    require_connected=True):
                d = JacobiDiagram(sig, nv, points, edges, 1, _validate=False)
                got = canonical_form(d)
                if got is not ZERO:
                    found.setdefault(got[0], None)
    out = tuple(sorted(found, key=lambda d: d.sort_key()))
    _pieces_cache[key] = out
    return out


def _multiset_unions(sig, pieces_by_degree, total):
    """All canonical unions of connected pieces with degrees summing to
    ``total``; pieces chosen with non-decreasing index to avoid repeats."""
    from .diagrams import _assemble  # reuse the canonical assembler

    flat = []
    for deg in sorted(pieces_by_degree):
        for p in pieces_by_degree[deg]:
            flat.append((deg, p))

    out = []

    def rec(idx, remaining, chosen):
        if remaining == 0:
            if chosen:
                d = _assemble(sig, list(chosen))
                got = canonical_form(d)
                if got is not ZERO:
                    out.append(got[0])
            else:
                out.append(empty_diagram(sig))
            return
        for i in range(idx, len(flat)):
            deg, p = flat[i]
            if deg > remaining:
                break
            chosen.append(p)
            rec(i, remaining - deg, chosen)
            chosen.pop()

    rec(0, total, [])
    return out


def _novac_direct(sig, degree):
    """Diagrams with no vacuum component, every component touching the
    skeleton or carrying a leg; direct matcher over leg distributions."""
    found = {}
    ncomp = len(sig)
    for nlegs in range(2 * degree + 1):
        nv = 2 * degree - nlegs
        if nv < 0:
            continue
        for combo in _compositions(nlegs, ncomp):
            points = list(combo)
            for edges in _matchings(sig, nv, points, forbid_vacuum=True):
                d = JacobiDiagram(sig, nv, points, edges, 1, _validate=False)
                got = canonical_form(d)
                if got is not ZERO:
                    found.setdefault(got[0], None)
    return sorted(found, key=lambda d: d.sort_key())


_enum_cache = {}


def enumerate_diagrams(sig, degree, cap=HARD_DEGREE_CAP):
    """Complete duplicate-free list of canonical diagrams of exactly the
    given degree on the signature, vacuum components included."""
    if degree < 0:
        raise DomainError("degree must be nonnegative")
    if degree > cap:
        raise CapacityError(
            "degree %d exceeds the configured cap %d" % (degree, cap))
    key = (sig, degree)
    if key in _enum_cache:
        return _enum_cache[key]
    disk_key = ("enum", str(sig), degree, cache.CODE_VERSION)
    payload = cache.load(disk_key)
    if payload is not None:
        out = tuple(deserialize(t) for t in payload["diagrams"])
        _enum_cache[key] = out
        return out

    if not sig.skeleton_indices():
        pieces = {d: connected_pieces(sig, d) for d in range(1, degree + 1)}
        out = _multiset_unions(sig, pieces, degree)
    else:
        from .diagrams import _assemble
        vac_sig = Signature(())
        vac_pieces = {d: connected_pieces(vac_sig, d)
                      for d in range(1, degree + 1)}
        out = []
        for k in range(degree + 1):
            legged = (_novac_direct(sig, k) if k else [empty_diagram(sig)])
            for vac in _multiset_unions(vac_sig, vac_pieces, degree - k):
                for base in legged:
                    if vac.nv == 0:
                        out.append(base)
                        continue
                    lifted = JacobiDiagram(
                        sig, vac.nv, [0] * len(sig),
                        vac.edges, 1, _validate=False)
                    d = _assemble(sig, [base, lifted])
                    got = canonical_form(d)
                    if got is not ZERO:
                        out.append(got[0])
    out = tuple(sorted(set(out), key=lambda d: d.sort_key()))
    cache.store(disk_key, {"diagrams": [serialize(d) for d in out]})
    _enum_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# relation instances
# ---------------------------------------------------------------------------

def _relabel_edges(d, mapping):
    edges = [tuple(sorted((mapping.get(a, a), mapping.get(b, b))))
             for a, b in d.edges]
    return JacobiDiagram(d.signature, d.nv, d.points, edges, 1,
                         _validate=False)


def ihx_terms(d, edge):
    """The H and X rewirings of ``d`` at an internal edge; the relation
    instance is d - H + X."""
    (ta, ia, sa), (tb, ib, sb) = edge
    u, s = ia, sa
    v, r = ib, sb
    e_h = {("v", u, (s + 2) % 3): ("v", v, (r + 1) % 3),
           ("v", v, (r + 1) % 3): ("v", u, (s + 2) % 3)}
    e_x = {("v", u, (s + 2) % 3): ("v", v, (r + 1) % 3),
           ("v", v, (r + 1) % 3): ("v", v, (r + 2) % 3),
           ("v", v, (r + 2) % 3): ("v", u, (s + 2) % 3)}
    return _relabel_edges(d, e_h), _relabel_edges(d, e_x)


def stu_terms(d, edge):
    """The T and U resolutions of ``d`` at a skeleton-adjacent vertex; the
    relation instance is d - T + U."""
    if edge[0][0] == "v":
        (_, i, s), skel = edge
    else:
        skel, (_, i, s) = edge
    tag, c, p = skel
    partner = d.partner_map()
    a_end = partner[("v", i, (s + 1) % 3)]
    b_end = partner[("v", i, (s + 2) % 3)]
    if a_end[0] == "v" and a_end[1] == i:
        raise StructureError("tadpole at STU site")

    def build(first, second):
        def shift(e):
            if e[0] == tag and e[1] == c and e[2] > p:
                return (tag, c, e[2] + 1)
            return e

        def drop_vertex(e):
            if e[0] == "v":
                if e[1] == i:
                    return None
                if e[1] > i:
                    return ("v", e[1] - 1, e[2])
            return e

        new_edges = []
        for x, y in d.edges:
            if (x[0] == "v" and x[1] == i) or (y[0] == "v" and y[1] == i):
                continue
            new_edges.append((drop_vertex(shift(x)), drop_vertex(shift(y))))
        fa = drop_vertex(shift(first))
        fb = drop_vertex(shift(second))
        new_edges.append((fa, (tag, c, p)))
        new_edges.append((fb, (tag, c, p + 1)))
        points = list(d.points)
        points[c] += 1
        return JacobiDiagram(d.signature, d.nv - 1, points, new_edges, 1,
                             _validate=False)

    return build(a_end, b_end), build(b_end, a_end)


def _glue_leg_pairs(d, pairs):
    """Fuse the given pairs of asterisk-leg ends inside one diagram.
    Returns (diagram, number_of_free_circles)."""
    partner = d.partner_map()
    wired = {}
    for x, y in pairs:
        wired[x] = y
        wired[y] = x
    new_edges = []
    seen = set()
    for e in partner:
        if e in wired or e in seen:
            continue
        cur = partner[e]
        while cur in wired:
            cur = partner[wired[cur]]
        if cur in seen:
            continue
        seen.add(e)
        seen.add(cur)
        new_edges.append((e, cur))
    circles = 0
    visited = set()
    for w in wired:
        if w in visited:
            continue
        cur = w
        cycle = True
        chain = []
        while True:
            chain.append(cur)
            chain.append(wired[cur])
            nxt = partner[wired[cur]]
            if nxt not in wired:
                cycle = False
                break
            cur = nxt
            if cur == w:
                break
        if cycle:
            circles += 1
            visited.update(chain)
    # drop fused legs, reindex remaining asterisk legs per component
    gone = set(wired)
    remap = {}
    counters = {}
    points = list(d.points)
    for c, n in enumerate(points):
        if d.signature.kind(c) in (STAR, CSTAR):
            points[c] = 0
    star = set(d.signature.star_indices())

    def conv(e):
        if e[0] == "a":
            if e not in remap:
                j = counters.get(e[1], 0)
                counters[e[1]] = j + 1
                remap[e] = ("a", e[1], j)
            return remap[e]
        return e

    out_edges = []
    for x, y in new_edges:
        out_edges.append((conv(x), conv(y)))
    for c in star:
        points[c] = counters.get(c, 0)
    return (JacobiDiagram(d.signature, d.nv, points, out_edges, 1,
                          _validate=False), circles)


def link_instances(sig, degree, cap=HARD_DEGREE_CAP):
    """Link-relation instances for every circled-asterisk label: for each
    diagram one degree up and each of its marked legs, the sum over
    attachments of the marked leg to the other legs of that label.
    Attachments that would close a free circle are dropped."""
    out = []
    cstars = [c for c in range(len(sig)) if sig.kind(c) == CSTAR]
    if not cstars:
        return out
    for d in enumerate_diagrams(sig, degree + 1, cap=max(cap, degree + 1)):
        partner = d.partner_map()
        for c in cstars:
            k = d.points[c]
            if k < 2:
                continue
            for marked in range(k):
                lc = LinComb.zero(sig)
                m_end = ("a", c, marked)
                for other in range(k):
                    if other == marked:
                        continue
                    o_end = ("a", c, other)
                    if partner[m_end] == o_end:
                        continue  # would close a free circle
                    glued, circles = _glue_leg_pairs(d, [(m_end, o_end)])
                    if circles:
                        continue
                    lc.add_raw(glued, 1)
                if lc:
                    out.append(lc)
    return out


def relation_instances(sig, degree, relation_sign=1, cap=HARD_DEGREE_CAP):
    """All AS, IHX, STU and link relation instances on the stratum, each a
    LinComb that must vanish in the quotient.

    ``relation_sign=-1`` flips the sign of the resolved terms in IHX and STU
    (the deliberate-fault hook used by the negative controls).
    """
    from .diagrams import flip_vertex

    out = []
    for d in enumerate_diagrams(sig, degree, cap=cap):
        # AS: d plus d with one vertex orientation reversed
        for i in range(d.nv):
            lc = LinComb.of(d)
            lc.add_raw(flip_vertex(d, i), 1)
            out.append(lc)
        for edge in d.edges:
            (xa, xb) = edge
            if xa[0] == "v" and xb[0] == "v":
                h, x = ihx_terms(d, edge)
                lc = LinComb.of(d)
                lc.add_raw(h, -relation_sign)
                lc.add_raw(x, relation_sign)
                out.append(lc)
            elif (xa[0] == "v" and xb[0] in ("i", "o")) or \
                 (xb[0] == "v" and xa[0] in ("i", "o")):
                t, u = stu_terms(d, edge)
                lc = LinComb.of(d)
                lc.add_raw(t, -relation_sign)
                lc.add_raw(u, relation_sign)
                out.append(lc)
    out.extend(link_instances(sig, degree, cap=cap))
    return out


# ---------------------------------------------------------------------------
# exact echelon quotient
# ---------------------------------------------------------------------------

class QuotientBasis:
    """Reduced presentation of one stratum modulo its relation span."""

    def __init__(self, signature, degree, diagrams, rows):
        self.signature = signature
        self.degree = degree
        self.diagrams = tuple(diagrams)
        self.index = {d: k for k, d in enumerate(self.diagrams)}
        self.rows = rows  # pivot col -> sparse row dict (pivot coeff 1)
        self.basis_cols = tuple(c for c in range(len(self.diagrams))
                                if c not in rows)

    @property
    def dim(self):
        return len(self.basis_cols)

    @property
    def rank(self):
        return len(self.rows)

    def basis_diagrams(self):
        return tuple(self.diagrams[c] for c in self.basis_cols)

    def vector_of(self, lincomb):
        vec = {}
        for d, c in lincomb.terms.items():
            col = self.index.get(d)
            if col is None:
                raise DomainError(
                    "diagram outside stratum (%s, degree %d): %s"
                    % (self.signature, self.degree, serialize(d)))
            vec[col] = vec.get(col, 0) + c
        return {k: v for k, v in vec.items() if v}

    def reduce_vector(self, vec):
        vec = dict(vec)
        out = {}
        while vec:
            lead = min(vec)
            coef = vec.pop(lead)
            if not coef:
                continue
            row = self.rows.get(lead)
            if row is None:
                out[lead] = coef
                continue
            for col, rc in row.items():
                if col == lead:
                    continue
                new = vec.get(col, 0) - coef * rc
                if new:
                    vec[col] = new
                else:
                    vec.pop(col, None)
        return out

    def normal_form(self, lincomb):
        """Coordinates of the class of ``lincomb`` over the basis columns."""
        if lincomb.signature != self.signature:
            raise DomainError("signature mismatch")
        red = self.reduce_vector(self.vector_of(lincomb))
        return tuple(red.get(c, Fraction(0)) for c in self.basis_cols)

    def is_zero(self, lincomb):
        return not any(self.normal_form(lincomb))


def echelon_insert(rows, vec):
    """Insert a sparse vector into an echelon row set; returns the pivot
    column or None when the vector reduces to zero."""
    vec = dict(vec)
    while vec:
        lead = min(vec)
        coef = vec[lead]
        if not coef:
            del vec[lead]
            continue
        row = rows.get(lead)
        if row is None:
            inv = Fraction(1) / coef
            rows[lead] = {c: v * inv for c, v in vec.items()}
            return lead
        del vec[lead]
        for col, rc in row.items():
            if col == lead:
                continue
            new = vec.get(col, 0) - coef * rc
            if new:
                vec[col] = new
            else:
                vec.pop(col, None)
    return None


def build_quotient(sig, degree, relation_sign=1, cap=HARD_DEGREE_CAP,
                   diagrams=None, relations=None):
    if diagrams is None:
        diagrams = enumerate_diagrams(sig, degree, cap=cap)
    if relations is None:
        relations = relation_instances(sig, degree,
                                       relation_sign=relation_sign, cap=cap)
    index = {d: k for k, d in enumerate(diagrams)}
    rows = {}
    for rel in relations:
        vec = {}
        for d, c in rel.terms.items():
            vec[index[d]] = vec.get(index[d], 0) + c
        echelon_insert(rows, vec)
    return QuotientBasis(sig, degree, diagrams, rows)


def normal_form(lincomb, quotient):
    return quotient.normal_form(lincomb)


_quotient_mem = {}


def quotient_basis(sig, degree, relation_sign=1, cap=HARD_DEGREE_CAP):
    """Cached quotient presentation of the stratum (memory, then disk)."""
    mem_key = (sig, degree, relation_sign)
    got = _quotient_mem.get(mem_key)
    if got is not None:
        return got
    disk_key = ("quot", str(sig), degree, relation_sign,
                cache.CODE_VERSION)
    payload = cache.load(disk_key)
    if payload is not None:
        diagrams = tuple(deserialize(t) for t in payload["diagrams"])
        rows = {int(p): {int(c): Fraction(v) for c, v in row.items()}
                for p, row in payload["pivot_rows"].items()}
        q = QuotientBasis(sig, degree, diagrams, rows)
    else:
        q = build_quotient(sig, degree, relation_sign=relation_sign,
                           cap=cap)
        cache.store(disk_key, {
            "signature": str(sig),
            "degree": degree,
            "relation_sign": relation_sign,
            "diagrams": [serialize(d) for d in q.diagrams],
            "pivot_rows": {str(p): {str(c): str(v) for c, v in row.items()}
                           for p, row in q.rows.items()},
        })
    _quotient_mem[mem_key] = q
    return q


# ---------------------------------------------------------------------------
# interval closure
# ---------------------------------------------------------------------------

def close_interval(lincomb, label):
    """Attach the two endpoints of the interval ``label``: the induced map
    into the signature where that component is a circle."""
    sig = lincomb.signature
    c = sig.index(label)
    if sig.kind(c) != INTERVAL:
        raise DomainError("component %r is not an interval" % label)
    comps = list(sig.components)
    comps[c] = (CIRCLE, label)
    new_sig = Signature(comps)
    out = LinComb.zero(new_sig)
    for d, coeff in lincomb.terms.items():
        edges = [tuple(("o", c, e[2]) if e[0] == "i" and e[1] == c else e
                       for e in pair) for pair in d.edges]
        out.add_raw(JacobiDiagram(new_sig, d.nv, d.points, edges, 1,
                                  _validate=False), coeff)
    return out
