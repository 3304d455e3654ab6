"""Jacobi diagrams on arbitrary skeletons, with signed canonical forms.

A diagram lives over a skeleton signature (ordered intervals, circles,
asterisk labels, circled-asterisk labels).  Internal vertices are trivalent
and carry a cyclic order on their three edge-ends; reversing that order
negates the diagram (antisymmetry).  Canonicalization picks a unique minimal
representative of the isomorphism class and tracks the sign; a diagram
isomorphic to its own negative canonicalizes to the ZERO marker.

Edge-ends are encoded as tuples:

    ('v', i, s)   slot s (0, 1, 2) of internal vertex i; slots 0->1->2->0
                  is the cyclic orientation
    ('i', c, p)   attachment at position p on interval component c
    ('o', c, p)   attachment at cyclic position p on circle component c
    ('a', c, j)   j-th leg carrying the asterisk label of component c
"""

from __future__ import annotations

import itertools
from functools import lru_cache

INTERVAL = "interval"
CIRCLE = "circle"
STAR = "star"
CSTAR = "cstar"

_KIND_ATOM = {INTERVAL: "up", CIRCLE: "circle", STAR: "*", CSTAR: "@"}


class StructureError(ValueError):
    """Malformed diagram data (wrong valence, dangling ends, bad labels)."""


class DomainError(ValueError):
    """Operation applied outside its domain (unknown label, bad argument)."""


class Signature:
    """Ordered list of skeleton components with unique labels."""

    __slots__ = ("components", "_index", "_hash")

    def __init__(self, components):
        components = tuple((str(kind), str(label)) for kind, label in components)
        labels = [lab for _, lab in components]
        if len(set(labels)) != len(labels):
            raise StructureError("duplicate labels in signature: %r" % (labels,))
        for kind, _ in components:
            if kind not in (INTERVAL, CIRCLE, STAR, CSTAR):
                raise StructureError("unknown component kind %r" % kind)
        self.components = components
        self._index = {lab: i for i, (_, lab) in enumerate(components)}
        self._hash = hash(components)

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise DomainError("label %r not in signature %s" % (label, self))

    def kind(self, c):
        return self.components[c][0]

    def label(self, c):
        return self.components[c][1]

    def labels(self):
        return tuple(lab for _, lab in self.components)

    def star_indices(self):
        return tuple(c for c, (k, _) in enumerate(self.components)
                     if k in (STAR, CSTAR))

    def skeleton_indices(self):
        return tuple(c for c, (k, _) in enumerate(self.components)
                     if k in (INTERVAL, CIRCLE))

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.components == other.components

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Signature(%s)" % str(self)

    def __str__(self):
        if not self.components:
            return "empty"
        parts = []
        for kind, lab in self.components:
            atom = _KIND_ATOM[kind]
            if kind in (STAR, CSTAR):
                parts.append(atom + lab)
            else:
                parts.append("%s:%s" % (atom, lab))
        return ",".join(parts)

    @staticmethod
    def parse(spec):
        """Parse a signature spec like ``up:z,circle:w,*x,@y``.

        A leading ``A:`` or ``B:`` designator is accepted and ignored (it is
        a mnemonic for based/symmetrized spaces).  Bare ``up`` / ``circle``
        atoms are auto-labelled by their 1-based position.
        """
        spec = spec.strip()
        if spec.lower() in ("", "empty", "vacuum"):
            return Signature(())
        if spec[:2] in ("A:", "B:", "a:", "b:") and "," not in spec[:2]:
            spec = spec[2:]
        comps = []
        for pos, atom in enumerate(a.strip() for a in spec.split(",")):
            if not atom:
                continue
            if atom.startswith("*"):
                comps.append((STAR, atom[1:]))
            elif atom.startswith("@"):
                comps.append((CSTAR, atom[1:]))
            elif atom.startswith("up"):
                rest = atom[2:]
                lab = rest[1:] if rest.startswith(":") else str(pos + 1)
                comps.append((INTERVAL, lab))
            elif atom.startswith("circle"):
                rest = atom[6:]
                lab = rest[1:] if rest.startswith(":") else str(pos + 1)
                comps.append((CIRCLE, lab))
            else:
                raise DomainError("cannot parse signature atom %r" % atom)
        for kind, lab in comps:
            if not lab:
                raise DomainError("component %r needs a label" % kind)
        return Signature(comps)


#: Marker returned by canonicalization when a diagram equals its own negative.
ZERO = None


class JacobiDiagram:
    """Uni-trivalent graph over a skeleton signature, with a bookkeeping sign.

    ``points[c]`` counts the attachment positions (interval/circle) or legs
    (asterisk labels) on component ``c``.  ``edges`` is a perfect matching on
    all edge-ends.  Instances are immutable; canonical representatives carry
    ``sign == +1``.
    """

    __slots__ = ("signature", "nv", "points", "edges", "sign", "_hash")

    def __init__(self, signature, nv, points, edges, sign=1, _validate=True):
        self.signature = signature
        self.nv = int(nv)
        self.points = tuple(int(p) for p in points)
        self.edges = tuple(sorted(tuple(sorted(e)) for e in edges))
        self.sign = int(sign)
        if _validate:
            self._validate()
        self._hash = hash((self.signature, self.nv, self.points,
                           self.edges, self.sign))

    def _validate(self):
        if self.sign not in (1, -1):
            raise StructureError("sign must be +1 or -1")
        if len(self.points) != len(self.signature):
            raise StructureError("points do not match signature arity")
        want = set()
        for i in range(self.nv):
            for s in range(3):
                want.add(("v", i, s))
        for c, n in enumerate(self.points):
            tag = {INTERVAL: "i", CIRCLE: "o", STAR: "a", CSTAR: "a"}[
                self.signature.kind(c)]
            for p in range(n):
                want.add((tag, c, p))
        seen = []
        for e in self.edges:
            if len(e) != 2 or e[0] == e[1]:
                raise StructureError("bad edge %r" % (e,))
            seen.extend(e)
        if sorted(seen) != sorted(want):
            raise StructureError(
                "edges are not a perfect matching on the ends "
                "(%d ends matched, %d expected)" % (len(seen), len(want)))

    # -- basic accessors -------------------------------------------------

    @property
    def degree(self):
        tot = self.nv + sum(self.points)
        if tot % 2:
            raise StructureError("odd total vertex count")
        return tot // 2

    def leg_count(self, label):
        return self.points[self.signature.index(label)]

    def partner_map(self):
        p = {}
        for a, b in self.edges:
            p[a] = b
            p[b] = a
        return p

    def component_split(self):
        """Connected components of the diagram with the skeleton cut out.

        Returns a list of sets of ends; each set holds the leg/attachment
        ends and implicitly the internal vertices of one component.
        """
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def mark(a, b):
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for a, b in self.edges:
            na = a[:2] if a[0] == "v" else a
            nb = b[:2] if b[0] == "v" else b
            mark(na, nb)
        groups = {}
        for x in parent:
            groups.setdefault(find(x), set()).add(x)
        return list(groups.values())

    def has_vacuum_component(self):
        """True if some connected component touches no skeleton or leg."""
        for comp in self.component_split():
            if all(x[0] == "v" for x in comp):
                return True
        return False

    def is_strut_component_free(self, labels=None):
        """True when no connected component is a single leg-to-leg edge with
        both ends among ``labels`` (all asterisk labels when None)."""
        if labels is None:
            idx = set(self.signature.star_indices())
        else:
            idx = {self.signature.index(l) for l in labels}
        for a, b in self.edges:
            if a[0] == "a" and b[0] == "a" and a[1] in idx and b[1] in idx:
                return False
        return True

    # -- equality / ordering ---------------------------------------------

    def key(self):
        return (self.signature.components, self.nv, self.points,
                self.edges, self.sign)

    def sort_key(self):
        return (self.degree, self.nv, self.points, self.edges)

    def __eq__(self, other):
        return isinstance(other, JacobiDiagram) and self.key() == other.key()

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "JacobiDiagram(%s)" % serialize(self)

    def with_sign(self, sign):
        if sign == self.sign:
            return self
        return JacobiDiagram(self.signature, self.nv, self.points,
                             self.edges, sign, _validate=False)


def empty_diagram(signature):
    return JacobiDiagram(signature, 0, (0,) * len(signature), ())


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------

_UNPLACED = (9,)

_canon_cache = {}


def _token(end, place, rot, points):
    """Comparable token for an edge-end under a partial vertex placement."""
    tag = end[0]
    if tag == "v":
        got = place.get(end[1])
        if got is None:
            return _UNPLACED
        newid, inv = got
        return (0, newid, inv[end[2]])
    if tag == "i":
        return (1, end[1], end[2])
    if tag == "o":
        n = points[end[1]]
        return (2, end[1], (end[2] - rot.get(end[1], 0)) % n)
    return (3, end[1])


_PERMS3 = tuple(itertools.permutations(range(3)))
_PARITY = {p: (1 if p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1)
           for p in _PERMS3}


def canonical_form(d):
    """Return ``(representative, sign)`` for ``d`` or ``ZERO``.

    The representative is the minimal encoding of the isomorphism class of
    ``d`` (sign field +1); ``sign`` is the orientation-reversal parity of the
    relabeling taking ``d`` to it, times ``d.sign``.  ``ZERO`` is returned
    when some automorphism reverses an odd number of vertex orientations.
    """
    key = (d.signature, d.nv, d.points, d.edges)
    hit = _canon_cache.get(key)
    if hit is None:
        hit = _canonical_uncached(d)
        _canon_cache[key] = hit
    if hit is ZERO:
        return ZERO
    rep, s = hit
    return rep, s * d.sign


def canonicalize(d):
    """Spec-facing wrapper: canonical diagram with the sign folded in,
    or ``ZERO``."""
    got = canonical_form(d)
    if got is ZERO:
        return ZERO
    rep, s = got
    return rep.with_sign(s)


def _canonical_uncached(d):
    for a, b in d.edges:
        if a[0] == "v" and b[0] == "v" and a[1] == b[1]:
            return ZERO  # self-loop: odd automorphism swaps its two ends

    blocks = _split_blocks(d)
    if len(blocks) <= 1:
        return _canonical_block(d)

    # Canonicalize connected blocks independently and reassemble; exchanging
    # isomorphic blocks is always an even automorphism, so signs multiply.
    parts = []
    sign = 1
    for b in blocks:
        got = _canonical_block_cached(b)
        if got is ZERO:
            return ZERO
        rep, s = got
        sign *= s
        parts.append(rep)
    rep = _assemble(d.signature, parts)
    return rep, sign


def _split_blocks(d):
    """Split ``d`` into sub-diagrams: one block holding everything attached
    to interval/circle skeleton components, plus one block per remaining
    connected component.  Blocks are returned as JacobiDiagram values on the
    same signature (asterisk legs renumbered per block)."""
    sig = d.signature
    skel = set(sig.skeleton_indices())
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def node(e):
        if e[0] == "v":
            return ("v", e[1])
        if e[0] in ("i", "o"):
            return ("skel",)
        return e

    def mark(a, b):
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    if skel:
        parent[("skel",)] = ("skel",)
    for a, b in d.edges:
        mark(node(a), node(b))

    groups = {}
    for a, b in d.edges:
        groups.setdefault(find(node(a)), []).append((a, b))
    if not groups:
        return []

    skel_root = find(("skel",)) if ("skel",) in parent else None
    blocks = []
    order = sorted(groups, key=lambda r: (r != skel_root, str(r)))
    for root in order:
        edges = groups[root]
        vmap = {}
        amap = {}
        points = [0] * len(sig)
        has_skel = False

        def conv(e):
            nonlocal has_skel
            if e[0] == "v":
                if e[1] not in vmap:
                    vmap[e[1]] = len(vmap)
                return ("v", vmap[e[1]], e[2])
            if e[0] == "a":
                if e not in amap:
                    amap[e] = ("a", e[1], points[e[1]])
                    points[e[1]] += 1
                return amap[e]
            has_skel = True
            points[e[1]] = max(points[e[1]], e[2] + 1)
            return e

        bedges = [tuple(sorted((conv(a), conv(b)))) for a, b in edges]
        if root == skel_root:
            # keep full skeleton position counts
            for c in skel:
                points[c] = d.points[c]
        blocks.append(JacobiDiagram(sig, len(vmap), points, bedges,
                                    1, _validate=False))
    # bare skeleton components (positions but no edges) need a carrier block
    if skel and skel_root not in groups:
        points = [0] * len(sig)
        for c in skel:
            points[c] = d.points[c]
        blocks.insert(0, JacobiDiagram(sig, 0, points, (), 1,
                                       _validate=False))
    return blocks


_block_cache = {}


def _canonical_block_cached(b):
    key = (b.signature, b.nv, b.points, b.edges)
    hit = _block_cache.get(key)
    if hit is None:
        hit = _canonical_block(b)
        _block_cache[key] = hit
    return hit


def _assemble(sig, parts):
    """Reassemble canonical blocks into one canonical diagram.  The skeleton
    block (if any) stays first; the rest are sorted by their encodings."""
    skelset = set(sig.skeleton_indices())
    head = [p for p in parts if any(p.points[c] for c in skelset)]
    tail = sorted((p for p in parts if p not in head),
                  key=lambda p: (p.nv, p.points, p.edges))
    ordered = head + tail

    voff = 0
    acount = [0] * len(sig)
    points = [0] * len(sig)
    edges = []
    nv = 0
    for p in ordered:
        amap = {}

        def conv(e):
            if e[0] == "v":
                return ("v", e[1] + voff, e[2])
            if e[0] == "a":
                if e not in amap:
                    amap[e] = ("a", e[1], acount[e[1]] + len(
                        [k for k in amap if k[1] == e[1]]))
                return amap[e]
            return e

        for a, b in p.edges:
            edges.append(tuple(sorted((conv(a), conv(b)))))
        for c in range(len(sig)):
            if c in skelset:
                points[c] = max(points[c], p.points[c])
            else:
                acount[c] += p.points[c]
        voff += p.nv
        nv += p.nv
    for c in range(len(sig)):
        if c not in skelset:
            points[c] = acount[c]
    return JacobiDiagram(sig, nv, points, edges, 1, _validate=False)


def _canonical_block(d):
    partner = d.partner_map()
    points = d.points
    circle_rots = []
    for c, n in enumerate(points):
        if d.signature.kind(c) == CIRCLE and n > 1:
            circle_rots.append((c, n))
    colors = _wl_colors(d, partner)

    best = None
    best_signs = None
    best_assign = None

    for rot_choice in itertools.product(*(range(n) for _, n in circle_rots)):
        rot = {c: r for (c, _), r in zip(circle_rots, rot_choice)}
        stream, leaves = _min_stream(d, partner, rot, points, colors)
        if best is None or stream < best[0]:
            best = (stream, rot)
            best_signs = {s for _, s in leaves}
            best_assign = leaves[0][0]
        elif stream == best[0]:
            best_signs |= {s for _, s in leaves}

    if 1 in best_signs and -1 in best_signs:
        return ZERO
    sign = 1 if 1 in best_signs else -1
    rep = _rebuild(d, best_assign, best[1])
    return rep, sign


def _wl_colors(d, partner):
    """Iso-invariant vertex colors by iterated neighborhood refinement.

    Colors are returned as small ranks; the underlying color values are
    built only from relabeling-invariant data (leg labels, fixed interval
    positions, edge multiplicities), never from vertex ids, slot numbers,
    or circle positions.
    """
    nv = d.nv

    def static_desc(e):
        if e[0] == "i":
            return (1, e[1], e[2])
        if e[0] == "o":
            return (2, e[1])
        return (3, e[1])

    mult = {}
    col = {}
    for v in range(nv):
        legs = []
        nbrs = []
        for s in range(3):
            p = partner[("v", v, s)]
            if p[0] == "v":
                nbrs.append(p[1])
                mult[(v, p[1])] = mult.get((v, p[1]), 0) + 1
            else:
                legs.append(static_desc(p))
        col[v] = (tuple(sorted(legs)),
                  tuple(sorted(mult[(v, u)] for u in set(nbrs))))
    for _ in range(3):
        nxt = {}
        for v in range(nv):
            around = []
            for s in range(3):
                p = partner[("v", v, s)]
                if p[0] == "v":
                    around.append(col[p[1]])
            nxt[v] = (col[v], tuple(sorted(around)))
        if len(set(nxt.values())) == len(set(col.values())):
            break
        col = nxt
    ranking = {c: i for i, c in enumerate(sorted(set(col.values())))}
    return {v: ranking[col[v]] for v in range(nv)}


def _min_stream(d, partner, rot, points, colors):
    """Greedy lexicographic minimization over vertex placements.

    Returns the minimal stream together with every complete assignment
    achieving it (as ``(placement, slot-parity-product)`` pairs).  Rows are
    prefixed by the placed vertex's refinement color, which is
    iso-invariant, so restricting to minimal rows stays canonical.
    """
    leg_edges = tuple(sorted(
        tuple(sorted((_token(a, {}, rot, points), _token(b, {}, rot, points))))
        for a, b in d.edges if a[0] != "v" and b[0] != "v"))

    nv = d.nv
    if nv == 0:
        return (leg_edges,), [({}, 1)]

    adj = [[partner[("v", v, s)] for s in range(3)] for v in range(nv)]
    stream = [leg_edges]
    states = [({}, 1)]  # place dict {orig: (newid, inv_perm)}, parity
    for newid in range(nv):
        best_row = None
        nxt = []
        for place, parity in states:
            for v in range(nv):
                if v in place:
                    continue
                cv = colors[v]
                if best_row is not None and cv > best_row[0]:
                    continue
                pv = adj[v]
                toks = (_token(pv[0], place, rot, points),
                        _token(pv[1], place, rot, points),
                        _token(pv[2], place, rot, points))
                for perm in _PERMS3:
                    row = (cv, toks[perm[0]], toks[perm[1]], toks[perm[2]])
                    if best_row is not None and row > best_row:
                        continue
                    inv = [0, 0, 0]
                    for j in range(3):
                        inv[perm[j]] = j
                    p2 = dict(place)
                    p2[v] = (newid, tuple(inv))
                    if best_row is None or row < best_row:
                        best_row = row
                        nxt = [(p2, parity * _PARITY[perm])]
                    else:
                        nxt.append((p2, parity * _PARITY[perm]))
        stream.append(best_row)
        states = nxt
    return tuple(stream), states


def _rebuild(d, place, rot):
    """Apply a placement/rotation to produce the canonical representative."""
    points = d.points
    sig = d.signature

    def map_end(e):
        if e[0] == "v":
            newid, inv = place[e[1]]
            return ("v", newid, inv[e[2]])
        if e[0] == "o":
            n = points[e[1]]
            return ("o", e[1], (e[2] - rot.get(e[1], 0)) % n)
        return e

    # renumber asterisk legs by structural position, not original index:
    # blank the leg indices, sort, then hand out fresh indices in walk order
    blanked = []
    for a, b in d.edges:
        pair = []
        for e in (a, b):
            e = map_end(e)
            if e[0] == "a":
                e = ("a", e[1], -1)
            pair.append(e)
        blanked.append(tuple(sorted(pair)))
    blanked.sort()
    counters = {}
    out = []
    for a, b in blanked:
        pair = []
        for e in (a, b):
            if e[0] == "a":
                j = counters.get(e[1], 0)
                counters[e[1]] = j + 1
                e = ("a", e[1], j)
            pair.append(e)
        out.append(tuple(sorted(pair)))
    return JacobiDiagram(sig, d.nv, points, out, 1, _validate=False)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _leg_end(signature, points, label):
    """Allocate one more leg/attachment on the component named ``label``;
    mutates ``points`` (a list) and returns the new end."""
    c = signature.index(label)
    kind = signature.kind(c)
    tag = {INTERVAL: "i", CIRCLE: "o", STAR: "a", CSTAR: "a"}[kind]
    end = (tag, c, points[c])
    points[c] += 1
    return end


def strut(signature, label_a, label_b):
    """Single edge joining two legs; degree 1."""
    points = [0] * len(signature)
    a = _leg_end(signature, points, label_a)
    b = _leg_end(signature, points, label_b)
    return JacobiDiagram(signature, 0, points, [(a, b)])


def strut_power(signature, label_a, label_b, k):
    """k parallel struts between the two named components, as one diagram."""
    points = [0] * len(signature)
    edges = []
    for _ in range(k):
        a = _leg_end(signature, points, label_a)
        b = _leg_end(signature, points, label_b)
        edges.append((a, b))
    return JacobiDiagram(signature, 0, points, edges)


def wheel(n, signature=None, label="x"):
    """The n-wheel: an n-gon with n legs, all carrying ``label``.

    ``n`` must be even and positive (odd wheels vanish by antisymmetry and
    are rejected).  Degree is n.
    """
    if n <= 0 or n % 2:
        raise DomainError("wheel size must be even and positive, got %r" % n)
    if signature is None:
        signature = Signature([(STAR, label)])
    c = signature.index(label)
    if signature.kind(c) not in (STAR, CSTAR):
        raise DomainError("wheel legs need an asterisk label, got %r" % label)
    points = [0] * len(signature)
    points[c] = n
    edges = []
    for i in range(n):
        # slots: 0 = leg, 1 = next rim vertex, 2 = previous rim vertex
        edges.append((("v", i, 0), ("a", c, i)))
        edges.append((("v", i, 1), ("v", (i + 1) % n, 2)))
    return JacobiDiagram(signature, n, points, edges)


def theta_graph(signature=None):
    """Two trivalent vertices joined by three edges (the closed theta)."""
    if signature is None:
        signature = Signature(())
    points = [0] * len(signature)
    edges = [(("v", 0, s), ("v", 1, (3 - s) % 3)) for s in range(3)]
    return JacobiDiagram(signature, 2, points, edges)


def flip_vertex(d, i):
    """Reverse the cyclic orientation at internal vertex ``i`` (swaps two
    slots); the result represents minus the original class."""
    if not 0 <= i < d.nv:
        raise DomainError("no internal vertex %d" % i)
    swap = {("v", i, 1): ("v", i, 2), ("v", i, 2): ("v", i, 1)}
    edges = [tuple(swap.get(e, e) for e in edge) for edge in d.edges]
    return JacobiDiagram(d.signature, d.nv, d.points, edges, d.sign,
                         _validate=False)


# ---------------------------------------------------------------------------
# serialization (documented in the README; round-trips losslessly)
# ---------------------------------------------------------------------------

_END_TAGS = {"v", "i", "o", "a"}


def serialize(d):
    """Deterministic one-line text form of a diagram."""
    ends = ",".join("%s%d.%d-%s%d.%d" % (a[0], a[1], a[2], b[0], b[1], b[2])
                    for a, b in d.edges)
    return "sig=%s nv=%d pts=%s edges=%s sign=%s" % (
        d.signature, d.nv, ":".join(str(p) for p in d.points),
        ends or "-", "+" if d.sign > 0 else "-")


def deserialize(text):
    fields = {}
    for chunk in text.strip().split():
        k, _, v = chunk.partition("=")
        fields[k] = v
    sig = Signature.parse(fields["sig"])
    nv = int(fields["nv"])
    pts = [int(x) for x in fields["pts"].split(":")] if fields["pts"] else []
    if fields["pts"] == "":
        pts = []
    edges = []
    if fields["edges"] != "-":
        for pair in fields["edges"].split(","):
            a, b = pair.split("-")
            edges.append((_parse_end(a), _parse_end(b)))
    sign = 1 if fields["sign"] == "+" else -1
    return JacobiDiagram(sig, nv, pts, edges, sign)


def _parse_end(tok):
    tag = tok[0]
    if tag not in _END_TAGS:
        raise StructureError("bad end token %r" % tok)
    c, _, p = tok[1:].partition(".")
    return (tag, int(c), int(p))
