"""Operations of the diagram calculus.

Everything here is (bi)linear over linear combinations and works termwise on
canonical diagrams: the two products, symmetrization and its inverse,
diagrammatic differential operators (gluing all legs of one diagram onto
some legs of another), the inner product (gluing onto all legs), the
cabling maps, the component coproduct, and the vacuum projection.

Gluing never touches cyclic orders, so it produces no signs; signs appear
only when results are canonicalized.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .diagrams import (
    CIRCLE, CSTAR, INTERVAL, STAR, DomainError, JacobiDiagram, Signature,
    empty_diagram,
)
from .spaces import LinComb, quotient_basis


# ---------------------------------------------------------------------------
# signature plumbing
# ---------------------------------------------------------------------------

def merge_signatures(sa, sb):
    comps = list(sa.components)
    kinds = {lab: kind for kind, lab in comps}
    for kind, lab in sb.components:
        if lab in kinds:
            if kinds[lab] != kind:
                raise DomainError(
                    "label %r is %s on one side and %s on the other"
                    % (lab, kinds[lab], kind))
        else:
            comps.append((kind, lab))
    return Signature(comps)


def transplant(d, new_sig):
    """Re-express a diagram over a larger signature, matching labels by
    name."""
    old = d.signature
    cmap = {c: new_sig.index(old.label(c)) for c in range(len(old))}

    def conv(e):
        if e[0] == "v":
            return e
        return (e[0], cmap[e[1]], e[2])

    points = [0] * len(new_sig)
    for c, n in enumerate(d.points):
        points[cmap[c]] = n
    edges = [tuple(sorted((conv(a), conv(b)))) for a, b in d.edges]
    return JacobiDiagram(new_sig, d.nv, points, edges, d.sign,
                         _validate=False)


def lift(lc, new_sig):
    """Linear extension of ``transplant`` with no position shifts."""
    out = LinComb.zero(new_sig)
    for d, c in lc.terms.items():
        out.add_raw(transplant(d, new_sig), c)
    return out


def relabel(lc, old_label, new_label):
    """Rename one signature component (and move its legs along)."""
    comps = [(k, new_label if lab == old_label else lab)
             for k, lab in lc.signature.components]
    new_sig = Signature(comps)
    out = LinComb.zero(new_sig)
    for d, c in lc.terms.items():
        out.add_raw(JacobiDiagram(new_sig, d.nv, d.points, d.edges, d.sign,
                                  _validate=False), c)
    return out


def _union_pair(sig, da, db, concat_labels=()):
    """Union of two diagrams over a merged signature.

    Shared interval/circle components may carry attachments on both sides
    only when listed in ``concat_labels`` (then b's positions follow a's).
    Returns the raw union diagram plus end-translation maps for both sides.
    """
    for kind, lab in set(da.signature.components) & set(
            db.signature.components):
        if kind in (INTERVAL, CIRCLE) and lab not in concat_labels:
            ca, cb = da.signature.index(lab), db.signature.index(lab)
            if da.points[ca] and db.points[cb]:
                raise DomainError(
                    "both operands attach to non-asterisk component %r"
                    % lab)

    amap = {c: sig.index(da.signature.label(c))
            for c in range(len(da.signature))}
    bmap = {c: sig.index(db.signature.label(c))
            for c in range(len(db.signature))}
    points = [0] * len(sig)
    for c, n in enumerate(da.points):
        points[amap[c]] += n
    boff = {}
    for c, n in enumerate(db.points):
        boff[c] = points[bmap[c]]
        points[bmap[c]] += n

    def conv_a(e):
        if e[0] == "v":
            return e
        return (e[0], amap[e[1]], e[2])

    voff = da.nv

    def conv_bv(e):
        if e[0] == "v":
            return ("v", e[1] + voff, e[2])
        return (e[0], bmap[e[1]], e[2] + boff[e[1]])

    edges = [tuple(sorted((conv_a(x), conv_a(y)))) for x, y in da.edges]
    edges += [tuple(sorted((conv_bv(x), conv_bv(y)))) for x, y in db.edges]
    d = JacobiDiagram(sig, da.nv + db.nv, points, edges, 1, _validate=False)
    return d, conv_a, conv_bv


def _glue_inside(d, pairs):
    """Fuse pairs of asterisk-leg ends of one diagram; raises if a free
    circle would appear (callers guarantee strutlessness on one side)."""
    from .spaces import _glue_leg_pairs
    glued, circles = _glue_leg_pairs(d, pairs)
    if circles:
        raise DomainError("gluing closed a free circle; strut guard failed")
    return glued


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def disjoint_union(a, b):
    """Bilinear disjoint union; asterisk labels merge, other shared
    components must carry attachments on at most one side."""
    sig = merge_signatures(a.signature, b.signature)
    out = LinComb.zero(sig)
    for da, ca in a.terms.items():
        for db, cb in b.terms.items():
            d, _, _ = _union_pair(sig, da, db)
            out.add_raw(d, ca * cb)
    return out


def connected_sum(a, b, label):
    """Concatenation along the interval ``label``: a's attachments first."""
    for lc in (a, b):
        c = lc.signature.index(label)
        if lc.signature.kind(c) != INTERVAL:
            raise DomainError("connected sum needs interval %r" % label)
    sig = merge_signatures(a.signature, b.signature)
    out = LinComb.zero(sig)
    for da, ca in a.terms.items():
        for db, cb in b.terms.items():
            d, _, _ = _union_pair(sig, da, db, concat_labels=(label,))
            out.add_raw(d, ca * cb)
    return out


def unit_on(sig):
    return LinComb.of(empty_diagram(sig))


# ---------------------------------------------------------------------------
# symmetrization
# ---------------------------------------------------------------------------

def _star_to_interval_sig(sig, label):
    c = sig.index(label)
    if sig.kind(c) not in (STAR, CSTAR):
        raise DomainError("%r is not an asterisk label" % label)
    comps = list(sig.components)
    comps[c] = (INTERVAL, label)
    return Signature(comps)


def symmetrize(lc, label):
    """The averaging map: place the ``label`` legs of each term on a new
    oriented interval (attached from the left) in all orders, averaged."""
    sig = lc.signature
    c = sig.index(label)
    new_sig = _star_to_interval_sig(sig, label)
    out = LinComb.zero(new_sig)
    for d, coeff in lc.terms.items():
        k = d.points[c]
        legs = [("a", c, j) for j in range(k)]
        weight = coeff / Fraction(_factorial(k))
        for order in itertools.permutations(range(k)):
            place = {legs[j]: ("i", c, order[j]) for j in range(k)}
            edges = [tuple(sorted((place.get(x, x), place.get(y, y))))
                     for x, y in d.edges]
            out.add_raw(JacobiDiagram(new_sig, d.nv, d.points, edges, 1,
                                      _validate=False), weight)
    return out


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


_chi_solver_cache = {}


def symmetrize_inverse(lc, label):
    """Exact inverse of ``symmetrize`` on each degree stratum, computed by
    solving the symmetrization matrix in quotient coordinates."""
    tgt_sig = lc.signature
    c = tgt_sig.index(label)
    if tgt_sig.kind(c) != INTERVAL:
        raise DomainError("%r is not an interval label" % label)
    comps = list(tgt_sig.components)
    comps[c] = (STAR, label)
    src_sig = Signature(comps)

    out = LinComb.zero(src_sig)
    for n in lc.degrees():
        part = lc.degree_part(n)
        coords = _solve_chi(src_sig, tgt_sig, label, n,
                            quotient_basis(tgt_sig, n).normal_form(part))
        basis = quotient_basis(src_sig, n).basis_diagrams()
        for x, d in zip(coords, basis):
            if x:
                out.add_raw(d, x)
    return out


def _solve_chi(src_sig, tgt_sig, label, degree, rhs):
    key = (src_sig, label, degree)
    solver = _chi_solver_cache.get(key)
    if solver is None:
        qs = quotient_basis(src_sig, degree)
        qt = quotient_basis(tgt_sig, degree)
        cols = [qt.normal_form(symmetrize(LinComb.of(d), label))
                for d in qs.basis_diagrams()]
        if len(cols) != qt.dim:
            raise DomainError(
                "symmetrization strata have unequal dimensions "
                "(%d vs %d) at degree %d" % (len(cols), qt.dim, degree))
        solver = _dense_inverse([[cols[j][i] for j in range(len(cols))]
                                 for i in range(qt.dim)])
        _chi_solver_cache[key] = solver
    return _mat_vec(solver, rhs)


def _dense_inverse(m):
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)]
           + [Fraction(1 if i == j else 0) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise DomainError("symmetrization matrix is singular; "
                              "the averaging map must be invertible")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _mat_vec(m, v):
    return tuple(sum((row[j] * v[j] for j in range(len(v))), Fraction(0))
                 for row in m)


# ---------------------------------------------------------------------------
# gluing operations
# ---------------------------------------------------------------------------

def _star_legs(d, labels):
    sig = d.signature
    out = {}
    for lab in labels:
        c = sig.index(lab)
        if sig.kind(c) not in (STAR, CSTAR):
            raise DomainError("%r is not an asterisk label" % lab)
        out[lab] = [("a", c, j) for j in range(d.points[c])]
    return out


def _default_labels(lc):
    sig = lc.signature
    return tuple(sig.label(c) for c in sig.star_indices())


def _check_strutless(lc, labels):
    for d in lc.terms:
        if not d.is_strut_component_free(labels):
            raise DomainError(
                "operator diagram contains a strut on the glued labels "
                "(the pairing would diverge)")


def apply_diff_op(op, target, labels=None):
    """Apply ``op`` as a diagrammatic differential operator to ``target``:
    for each pair of terms, the sum over all ways of gluing all the glued-
    label legs of the operator onto distinct same-label legs of the target.
    Terms where the operator has more legs than the target contribute 0.
    """
    if labels is None:
        labels = _default_labels(op)
    _check_strutless(op, labels)
    sig = merge_signatures(target.signature, op.signature)
    out = LinComb.zero(sig)
    for dc, cc in op.terms.items():
        for dd, cd in target.terms.items():
            d, conv_c, conv_d = _union_pair(sig, dc, dd)
            c_legs = {lab: [conv_c(e) for e in legs] for lab, legs
                      in _star_legs(dc, labels).items()}
            d_legs = {lab: [conv_d(e) for e in legs] for lab, legs
                      in _star_legs(dd, labels).items()}
            if any(len(c_legs[lab]) > len(d_legs[lab]) for lab in labels):
                continue
            spaces = [list(itertools.permutations(d_legs[lab],
                                                  len(c_legs[lab])))
                      for lab in labels]
            for choice in itertools.product(*spaces):
                pairs = []
                for lab, picked in zip(labels, choice):
                    pairs.extend(zip(c_legs[lab], picked))
                out.add_raw(_glue_inside(d, pairs), cc * cd)
    return out


def _pairings(items):
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for sub in _pairings(rest):
            yield [(first, items[k])] + sub


def inner_product(a, b, labels=None):
    """Glue all ``labels`` legs of both sides pairwise (zero unless the leg
    counts agree); the glued labels disappear from the result's signature.

    The left argument must have no strut components on the glued labels.
    """
    if labels is None:
        labels = tuple(sorted(set(_default_labels(a))
                              & set(_default_labels(b))))
    if isinstance(labels, str):
        labels = (labels,)
    _check_strutless(a, labels)
    sig_full = merge_signatures(a.signature, b.signature)
    keep = [comp for comp in sig_full.components if comp[1] not in labels
            or comp[0] not in (STAR, CSTAR)]
    sig_out = Signature(keep)
    out = LinComb.zero(sig_out)

    for da, ca in a.terms.items():
        for db, cb in b.terms.items():
            counts_a = {lab: da.points[da.signature.index(lab)]
                        if lab in da.signature.labels() else 0
                        for lab in labels}
            counts_b = {lab: db.points[db.signature.index(lab)]
                        if lab in db.signature.labels() else 0
                        for lab in labels}
            if counts_a != counts_b:
                continue
            weight = ca * cb
            if _struts_only_on(db, labels):
                for glued in _glue_via_strut_matchings(
                        sig_full, da, db, labels):
                    out.add_raw(_strip_labels(glued, sig_out, labels),
                                weight * _strut_symmetry(counts_a))
            else:
                d, conv_a, conv_b = _union_pair(sig_full, da, db)
                a_legs = {lab: [conv_a(e) for e in legs] for lab, legs
                          in _star_legs(da, labels).items()}
                b_legs = {lab: [conv_b(e) for e in legs] for lab, legs
                          in _star_legs(db, labels).items()}
                spaces = [list(itertools.permutations(b_legs[lab]))
                          for lab in labels]
                for choice in itertools.product(*spaces):
                    pairs = []
                    for lab, picked in zip(labels, choice):
                        pairs.extend(zip(a_legs[lab], picked))
                    out.add_raw(_strip_labels(_glue_inside(d, pairs),
                                              sig_out, labels), weight)
    return out


def _struts_only_on(d, labels):
    """True when every glued-label leg of ``d`` is strut-paired with a leg
    of the same label (then gluing reduces to matchings on the other side)."""
    sig = d.signature
    idx = {sig.index(lab) for lab in labels if lab in sig.labels()}
    if not idx:
        return not any(d.points[sig.index(lab)] for lab in labels
                       if lab in sig.labels())
    partner = d.partner_map()
    for c in idx:
        for j in range(d.points[c]):
            p = partner[("a", c, j)]
            if not (p[0] == "a" and p[1] == c):
                return False
    return True


def _strut_symmetry(counts):
    """Number of bijections realizing one matching: n! orderings of the
    struts times 2^n end swaps, per label."""
    out = 1
    for k in counts.values():
        n = k // 2
        out *= _factorial(n) * 2 ** n
    return out


def _glue_via_strut_matchings(sig_full, da, db, labels):
    """Fast path: the right term's glued legs are pure strut pairs, so the
    gluings are exactly the perfect matchings of the left term's legs."""
    keep_edges = []
    sigb = db.signature
    idx = {sigb.index(lab) for lab in labels if lab in sigb.labels()}
    for x, y in db.edges:
        if x[0] == "a" and x[1] in idx:
            continue
        keep_edges.append((x, y))
    points = list(db.points)
    for c in idx:
        points[c] = 0
    db_rest = JacobiDiagram(sigb, db.nv, points, keep_edges, 1,
                            _validate=False)
    d, conv_a, _ = _union_pair(sig_full, da, db_rest)
    per_label = [[conv_a(e) for e in legs] for lab, legs
                 in _star_legs(da, labels).items()]
    spaces = [list(_pairings(legs)) for legs in per_label]
    for choice in itertools.product(*spaces):
        pairs = [p for sub in choice for p in sub]
        yield _glue_inside(d, pairs)


def _strip_labels(d, sig_out, labels):
    sig = d.signature
    drop = {sig.index(lab) for lab in labels}
    for c in drop:
        if d.points[c]:
            raise DomainError("legs left over on a glued label")
    cmap = {}
    k = 0
    for c in range(len(sig)):
        if c not in drop:
            cmap[c] = k
            k += 1

    def conv(e):
        if e[0] == "v":
            return e
        return (e[0], cmap[e[1]], e[2])

    points = [d.points[c] for c in range(len(sig)) if c not in drop]
    edges = [tuple(sorted((conv(x), conv(y)))) for x, y in d.edges]
    return JacobiDiagram(sig_out, d.nv, points, edges, 1, _validate=False)


# ---------------------------------------------------------------------------
# cabling maps
# ---------------------------------------------------------------------------

def leg_coproduct(lc, label, new_labels):
    """Replace each ``label`` leg by one of the ``new_labels`` in all ways
    (the diagram action of disconnected cabling)."""
    sig = lc.signature
    c = sig.index(label)
    if sig.kind(c) not in (STAR, CSTAR):
        raise DomainError("%r is not an asterisk label" % label)
    kind = sig.kind(c)
    comps = []
    for k2, (kind2, lab2) in enumerate(sig.components):
        if k2 == c:
            comps.extend((kind, nl) for nl in new_labels)
        else:
            comps.append((kind2, lab2))
    new_sig = Signature(comps)
    out = LinComb.zero(new_sig)
    n = len(new_labels)
    tgt = [new_sig.index(nl) for nl in new_labels]

    for d, coeff in lc.terms.items():
        k = d.points[c]
        base_map = {}
        for c2 in range(len(sig)):
            if c2 != c:
                base_map[c2] = new_sig.index(sig.label(c2))
        for assign in itertools.product(range(n), repeat=k):
            counters = {}
            place = {}
            for j in range(k):
                t = tgt[assign[j]]
                place[("a", c, j)] = ("a", t, counters.get(t, 0))
                counters[t] = counters.get(t, 0) + 1

            def conv(e):
                if e[0] == "v":
                    return e
                if e[0] == "a" and e[1] == c:
                    return place[e]
                return (e[0], base_map[e[1]], e[2])

            points = [0] * len(new_sig)
            for c2, np in enumerate(d.points):
                if c2 == c:
                    continue
                points[base_map[c2]] = np
            for t, np in counters.items():
                points[t] = np
            edges = [tuple(sorted((conv(x), conv(y)))) for x, y in d.edges]
            out.add_raw(JacobiDiagram(new_sig, d.nv, points, edges, 1,
                                      _validate=False), coeff)
    return out


def scale_legs(lc, label, n):
    """Multiply each term by n^(number of ``label`` legs): the diagram
    action of connected cabling."""
    sig = lc.signature
    c = sig.index(label)
    out = LinComb.zero(sig)
    for d, coeff in lc.terms.items():
        out.add_raw(d, coeff * Fraction(n) ** d.points[c])
    return out


# ---------------------------------------------------------------------------
# component coproduct and vacuum projection
# ---------------------------------------------------------------------------

class TensorComb:
    """Formal sum of ordered pairs of diagrams with rational coefficients."""

    __slots__ = ("signature", "terms")

    def __init__(self, signature):
        self.signature = signature
        self.terms = {}

    def add_raw(self, dl, dr, coeff):
        from .diagrams import canonical_form, ZERO
        coeff = Fraction(coeff)
        if not coeff:
            return
        gl = canonical_form(dl)
        gr = canonical_form(dr)
        if gl is ZERO or gr is ZERO:
            return
        key = (gl[0], gr[0])
        new = self.terms.get(key, 0) + coeff * gl[1] * gr[1]
        if new:
            self.terms[key] = new
        else:
            self.terms.pop(key, None)

    def __eq__(self, other):
        return (isinstance(other, TensorComb)
                and self.signature == other.signature
                and self.terms == other.terms)

    def __len__(self):
        return len(self.terms)

    @classmethod
    def of_pair(cls, a, b):
        """Tensor of two linear combinations over one signature."""
        out = cls(a.signature)
        for dl, cl in a.terms.items():
            for dr, cr in b.terms.items():
                out.add_raw(dl, dr, cl * cr)
        return out


def _diagram_pieces(d):
    """Connected components of the diagram with the skeleton cut out, as
    lists of edges; attachment ends stay in skeleton coordinates."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def node(e):
        if e[0] == "v":
            return ("v", e[1])
        return e  # every leg / attachment end is its own node

    for x, y in d.edges:
        for e in (x, y):
            parent.setdefault(node(e), node(e))
        rx, ry = find(node(x)), find(node(y))
        if rx != ry:
            parent[rx] = ry
    groups = {}
    for x, y in d.edges:
        groups.setdefault(find(node(x)), []).append((x, y))
    return list(groups.values())


def _build_from_pieces(sig, pieces, ref):
    """Diagram from a subset of pieces of ``ref``: vertices renumbered,
    skeleton positions compressed preserving order, legs reindexed."""
    vmap = {}
    skel_positions = {}
    for piece in pieces:
        for x, y in piece:
            for e in (x, y):
                if e[0] == "v":
                    vmap.setdefault(e[1], len(vmap))
                elif e[0] in ("i", "o"):
                    skel_positions.setdefault(e[1], set()).add(e[2])
    pos_map = {}
    for c, ps in skel_positions.items():
        for k, p in enumerate(sorted(ps)):
            pos_map[(c, p)] = k
    counters = {}
    legmap = {}

    def conv(e):
        if e[0] == "v":
            return ("v", vmap[e[1]], e[2])
        if e[0] in ("i", "o"):
            return (e[0], e[1], pos_map[(e[1], e[2])])
        if e not in legmap:
            j = counters.get(e[1], 0)
            counters[e[1]] = j + 1
            legmap[e] = ("a", e[1], j)
        return legmap[e]

    points = [0] * len(sig)
    edges = []
    for piece in pieces:
        for x, y in piece:
            edges.append(tuple(sorted((conv(x), conv(y)))))
    for c, ps in skel_positions.items():
        points[c] = len(ps)
    for c, n in counters.items():
        points[c] = n
    return JacobiDiagram(sig, len(vmap), points, edges, 1, _validate=False)


def component_coproduct(lc):
    """Assign each skeleton-free-cut component of every term to the first
    or second tensor factor and sum over all 2^m choices."""
    out = TensorComb(lc.signature)
    sig = lc.signature
    for d, coeff in lc.terms.items():
        pieces = _diagram_pieces(d)
        m = len(pieces)
        for mask in range(2 ** m):
            left = [pieces[i] for i in range(m) if mask >> i & 1]
            right = [pieces[i] for i in range(m) if not mask >> i & 1]
            out.add_raw(_build_from_pieces(sig, left, d),
                        _build_from_pieces(sig, right, d), coeff)
    return out


def drop_vacuum(lc):
    """Kill every term with a component disjoint from all skeleton and
    asterisk structure; the identity on the rest."""
    out = LinComb.zero(lc.signature)
    for d, c in lc.terms.items():
        if not d.has_vacuum_component():
            out.terms[d] = c
    return out


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------

def exp_series(v, max_degree, product):
    """exp of a combination with no degree-0 part, truncated by degree."""
    if v.degree_part(0):
        raise DomainError("exp needs a vanishing degree-0 part")
    out = unit_on(v.signature)
    power = unit_on(v.signature)
    k = 1
    while True:
        power = product(power, v).truncate(max_degree)
        if not power:
            break
        out = out + Fraction(1, _factorial(k)) * power
        k += 1
    return out


def log_series(v, max_degree, product):
    """log of a combination with unit leading term, truncated by degree."""
    u = v - unit_on(v.signature)
    if u.degree_part(0):
        raise DomainError("log needs leading coefficient 1")
    out = LinComb.zero(v.signature)
    power = unit_on(v.signature)
    k = 1
    while True:
        power = product(power, u).truncate(max_degree)
        if not power:
            break
        out = out + Fraction((-1) ** (k + 1), k) * power
        k += 1
    return out
