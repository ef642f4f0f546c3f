"""Path semicategories of finite discrete causal 2-complexes.

A :class:`DiscreteSpacetime` is a directed graph whose edges are labelled
``timelike`` or ``lightlike`` together with a list of 2-cells, each a pair
of edge paths with common endpoints.  Paths are tuples of edge ids; the
empty path at a vertex is a causal (never timelike) path.  Two paths are
homotopic when a chain of elementary moves (swap one side of a cell for the
other inside the path) connects them, every intermediate path being a path
of the same flavor and of length at most ``max_path_len``.

All results are therefore about paths of bounded length.  On acyclic
complexes with ``max_path_len`` at least the longest path the bound is
invisible; on cyclic ones it is part of the answer.
"""

from __future__ import annotations

import bisect
import itertools
import json
import random
from dataclasses import dataclass, field

from .errors import CompositionError, InputError

TIMELIKE = "timelike"
CAUSAL = "causal"
LIGHTLIKE = "lightlike"
FLAVORS = (TIMELIKE, CAUSAL)


def _key(x):
    """Total order on vertex/edge ids: integers numerically, before strings."""
    if isinstance(x, int) and not isinstance(x, bool):
        return (0, x, "")
    return (1, 0, str(x))


def _check_flavor(flavor):
    if flavor not in FLAVORS:
        raise InputError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


@dataclass(frozen=True)
class Edge:
    id: object
    src: object
    dst: object
    label: str = TIMELIKE


@dataclass(frozen=True)
class EdgePath:
    """A directed edge path; ``edges == ()`` is the constant path at ``start``."""

    start: object
    end: object
    edges: tuple
    vertices: tuple
    flavor: str

    def __len__(self):
        return len(self.edges)

    def sort_key(self):
        return (tuple(_key(v) for v in self.vertices), tuple(_key(e) for e in self.edges))

    def to_dict(self):
        return {"vertices": list(self.vertices), "edges": list(self.edges)}

    def __str__(self):
        return "->".join(map(str, self.vertices)) if self.edges else f"({self.start})"


@dataclass(frozen=True)
class PathClass:
    """Homotopy class of paths ``start -> end``, identified by its canonical representative."""

    rep: EdgePath
    flavor: str
    start: object
    end: object
    members: tuple = field(default=(), compare=False, hash=False, repr=False)

    @property
    def is_empty(self):
        return not self.rep.edges

    def to_dict(self):
        return {
            "start": self.start,
            "end": self.end,
            "flavor": self.flavor,
            "representative": self.rep.to_dict(),
            "size": len(self.members),
        }

    def __str__(self):
        return f"[{self.rep}]"


@dataclass
class DiscreteSpacetime:
    vertices: tuple
    edges: tuple
    cells: tuple
    max_path_len: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        self.edges = tuple(self.edges)
        self.cells = tuple((tuple(a), tuple(b)) for a, b in self.cells)
        self._validate()
        self._by_id = {e.id: e for e in self.edges}
        self._out = {v: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: (_key(e.dst), _key(e.id))):
            self._out[e.src].append(e)

    def _validate(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("duplicate vertex ids")
        if not isinstance(self.max_path_len, int) or isinstance(self.max_path_len, bool) or self.max_path_len < 1:
            raise InputError(f"max_path_len must be a positive integer, got {self.max_path_len!r}")
        vs = set(self.vertices)
        ids = set()
        for e in self.edges:
            if e.src not in vs or e.dst not in vs:
                raise InputError(f"edge {e.id!r} uses an unknown vertex")
            if e.src == e.dst:
                raise InputError(f"edge {e.id!r} is a self-loop {e.src!r} -> {e.src!r}")
            if e.label not in (TIMELIKE, LIGHTLIKE):
                raise InputError(f"edge {e.id!r} has label {e.label!r}; expected timelike or lightlike")
            if e.id in ids:
                raise InputError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
        by_id = {e.id: e for e in self.edges}
        for k, (left, right) in enumerate(self.cells):
            ends = []
            for side in (left, right):
                if not side:
                    raise InputError(f"cell {k} has an empty side")
                if any(i not in by_id for i in side):
                    raise InputError(f"cell {k} references an unknown edge")
                seq = [by_id[i] for i in side]
                if any(a.dst != b.src for a, b in zip(seq, seq[1:])):
                    raise InputError(f"cell {k}: side {list(side)} is not a directed path")
                ends.append((seq[0].src, seq[-1].dst))
            if ends[0] != ends[1]:
                raise InputError(f"cell {k}: sides have different endpoints {ends[0]} and {ends[1]}")

    # -- io

    @classmethod
    def from_dict(cls, data):
        try:
            vertices = list(data["vertices"])
            raw = data.get("edges", [])
            edges = [
                Edge(e.get("id", i), e["from"], e["to"], e.get("label", TIMELIKE))
                for i, e in enumerate(raw)
            ]
            cells = [(c["left"], c["right"]) for c in data.get("cells", [])]
            bound = data["max_path_len"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed discrete spacetime: {exc!r}") from None
        return cls(vertices, edges, cells, bound)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "from": e.src, "to": e.dst, "label": e.label} for e in self.edges],
            "cells": [{"left": list(a), "right": list(b)} for a, b in self.cells],
            "max_path_len": self.max_path_len,
        }

    # -- helpers

    def edge(self, eid):
        return self._by_id[eid]

    def out_edges(self, v, flavor=CAUSAL):
        return [e for e in self._out[v] if flavor == CAUSAL or e.label == TIMELIKE]

    def path(self, start, edges, flavor):
        """Build an :class:`EdgePath` from a start vertex and edge ids (no flavor check)."""
        verts = [start]
        for eid in edges:
            e = self._by_id[eid]
            if e.src != verts[-1]:
                raise InputError(f"edge {eid!r} does not continue a path at {verts[-1]!r}")
            verts.append(e.dst)
        return EdgePath(start, verts[-1], tuple(edges), tuple(verts), flavor)

    def is_flavor_path(self, edges, flavor):
        if flavor == TIMELIKE:
            return bool(edges) and all(self._by_id[e].label == TIMELIKE for e in edges)
        return True

    def _require_vertex(self, *vs):
        for v in vs:
            if v not in self._out:
                raise InputError(f"unknown vertex {v!r}")


# --------------------------------------------------------------------------
# enumeration and classes


def _raw_paths(X, x, y, flavor):
    """Edge-id tuples of all flavor paths ``x -> y`` of length <= bound."""
    key = ("paths", flavor, x, y)
    if key in X._cache:
        return X._cache[key]
    found = []
    if flavor == CAUSAL and x == y:
        found.append(())
    stack = [(x, ())]
    while stack:
        v, es = stack.pop()
        if len(es) == X.max_path_len:
            continue
        for e in reversed(X.out_edges(v, flavor)):
            nxt = es + (e.id,)
            if e.dst == y:
                found.append(nxt)
            stack.append((e.dst, nxt))
    paths = sorted((X.path(x, es, flavor) for es in found), key=lambda p: (len(p), p.sort_key()))
    X._cache[key] = paths
    return paths


def enumerate_paths(X, x, y, flavor=TIMELIKE):
    """All ``flavor`` paths from ``x`` to ``y`` with at most ``max_path_len`` edges.

    Ordered by length, then by vertex sequence.
    """
    _check_flavor(flavor)
    X._require_vertex(x, y)
    return list(_raw_paths(X, x, y, flavor))


def _moves(X, edges):
    """All paths one elementary move away from ``edges`` (no flavor or bound check)."""
    n = len(edges)
    for left, right in X.cells:
        for src, dst in ((left, right), (right, left)):
            k = len(src)
            for i in range(n - k + 1):
                if edges[i : i + k] == src:
                    yield edges[:i] + dst + edges[i + k :]


def _classify(X, x, y, flavor):
    key = ("classes", flavor, x, y)
    if key in X._cache:
        return X._cache[key]
    paths = _raw_paths(X, x, y, flavor)
    index = {p.edges: i for i, p in enumerate(paths)}
    parent = list(range(len(paths)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, p in enumerate(paths):
        for new in _moves(X, p.edges):
            j = index.get(new)
            if j is not None:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups = {}
    for i in range(len(paths)):
        groups.setdefault(find(i), []).append(paths[i])
    classes = []
    for members in groups.values():
        rep = min(members, key=EdgePath.sort_key)
        classes.append(PathClass(rep, flavor, x, y, tuple(members)))
    classes.sort(key=lambda c: (len(c.rep), c.rep.sort_key()))
    lookup = {p.edges: c for c in classes for p in c.members}
    X._cache[key] = (classes, lookup)
    return X._cache[key]


def homotopy_classes(X, x, y, flavor=TIMELIKE):
    """Partition of :func:`enumerate_paths` into homotopy classes."""
    _check_flavor(flavor)
    X._require_vertex(x, y)
    return list(_classify(X, x, y, flavor)[0])


def class_of(X, path, flavor=None):
    """The class containing ``path`` (an :class:`EdgePath`, or ``(start, edge ids)``)."""
    if not isinstance(path, EdgePath):
        start, edges = path
        path = X.path(start, tuple(edges), flavor or TIMELIKE)
    flavor = flavor or path.flavor
    _check_flavor(flavor)
    if not X.is_flavor_path(path.edges, flavor):
        raise InputError(f"{path} is not a {flavor} path")
    if len(path) > X.max_path_len:
        raise InputError(f"{path} is longer than max_path_len = {X.max_path_len}")
    return _classify(X, path.start, path.end, flavor)[1][path.edges]


def all_classes(X, flavor=TIMELIKE):
    """Every class over every ordered vertex pair, as ``{(x, y): [classes]}``."""
    return {(x, y): homotopy_classes(X, x, y, flavor) for x in X.vertices for y in X.vertices}


def compose(X, b, a):
    """``[b][a]``: the class of ``a`` followed by ``b``.

    The concatenation of canonical representatives is used when it fits the
    length bound; otherwise the first member pair (in enumeration order) that
    fits.  Raises :class:`CompositionError` when the classes are not
    composable or no pair fits.
    """
    if a.flavor != b.flavor:
        raise CompositionError(f"cannot compose a {b.flavor} class with a {a.flavor} class")
    if a.end != b.start:
        raise CompositionError(f"{b} starts at {b.start!r} but {a} ends at {a.end!r}")
    memo = X._cache.setdefault(("compose", a.flavor), {})
    key = (b.start, b.rep.edges, a.start, a.rep.edges)
    if key in memo:
        out = memo[key]
    else:
        out = memo[key] = _compose(X, b, a)
    if out is None:
        raise CompositionError(f"no representatives of {b} and {a} compose within max_path_len = {X.max_path_len}")
    return out


def _compose(X, b, a):
    bound = X.max_path_len
    lookup = _classify(X, a.start, b.end, a.flavor)[1]
    if len(a.rep) + len(b.rep) <= bound:
        return lookup[a.rep.edges + b.rep.edges]
    # members are sorted by length, so the shortest of b bounds every pair
    for pa in a.members:
        if len(pa) + len(b.members[0]) > bound:
            break
        for pb in b.members:
            if len(pa) + len(pb) <= bound:
                return lookup[pa.edges + pb.edges]
    return None


def try_compose(X, b, a):
    try:
        return compose(X, b, a)
    except CompositionError:
        return None


def diamond(X, c):
    """Vertices ``z`` through which ``c`` splits as ``[b][a]`` with ``a: start -> z``, ``b: z -> end``.

    For timelike classes both parts are nonempty, so the endpoints only
    appear when a member revisits them; for causal classes both endpoints
    always belong.
    """
    zs = set()
    for m in c.members:
        verts = m.vertices if c.flavor == CAUSAL else m.vertices[1:-1]
        zs.update(verts)
    return zs


def diamond_bruteforce(X, c):
    """Same as :func:`diamond`, straight from the definition (used as a cross-check)."""
    zs = set()
    for z in X.vertices:
        for pa in _raw_paths(X, c.start, z, c.flavor):
            for pb in _raw_paths(X, z, c.end, c.flavor):
                if len(pa) + len(pb) > X.max_path_len:
                    continue
                ba = X.path(c.start, pa.edges + pb.edges, c.flavor)
                if class_of(X, ba) == c:
                    zs.add(z)
                    break
            if z in zs:
                break
    return zs


def _splits(cls, keep_first):
    """``(head, tail)`` edge tuples of member splittings; ``keep_first`` keeps ``head`` nonempty."""
    seen = set()
    for m in cls.members:
        lo, hi = (1, len(m)) if keep_first else (0, len(m) - 1)
        for k in range(lo, hi + 1):
            part = (m.edges[:k], m.edges[k:], m.vertices[k])
            if part not in seen:
                seen.add(part)
                yield part


def basis_set(X, a, b, c):
    """Classes ``[d] = [c1][b][a2]`` over splittings ``[a] = [a2][a1]`` and ``[c] = [c2][c1]``.

    Timelike flavor only.  ``a1`` and ``c2`` are nonempty; ``a2`` or ``c1`` may
    be empty, which is the trivial splitting at ``x`` (resp. ``y``).
    """
    for cls in (a, b, c):
        if cls.flavor != TIMELIKE:
            raise InputError("basis_set is defined for timelike classes")
    if a.end != b.start or b.end != c.start:
        raise InputError(f"classes {a}, {b}, {c} do not form a composable chain")
    out = set()
    bound = X.max_path_len
    for _, a2, p in _splits(a, keep_first=True):
        for c1, _, q in _splits(c, keep_first=False):
            lookup = _classify(X, p, q, TIMELIKE)[1]
            for mb in b.members:
                d = a2 + mb.edges + c1
                if len(d) <= bound:
                    out.add(lookup[d])
                    break
    return out


# --------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    flavor: str
    violations: list = field(default_factory=list)
    checked: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def failed(self, axiom):
        return [v for v in self.violations if v["axiom"] == axiom]

    def to_dict(self):
        return {
            "flavor": self.flavor,
            "ok": self.ok,
            "checked": dict(self.checked),
            "skipped": dict(self.skipped),
            "violations": list(self.violations),
        }


def _shortest(cls):
    return len(cls.members[0])


def _well_defined(X, b, a):
    """Classes reached by composing every member pair that fits the bound."""
    lookup = _classify(X, a.start, b.end, a.flavor)[1]
    return {lookup[pa.edges + pb.edges] for pa in a.members for pb in b.members
            if len(pa) + len(pb) <= X.max_path_len}


class _Table:
    """Integer view of all classes with a memoized composition table (-1: out of bound)."""

    def __init__(self, X, homs):
        self.X = X
        self.classes = [c for cls in homs.values() for c in cls]
        self.index = {id(c): i for i, c in enumerate(self.classes)}
        self.short = [len(c.members[0]) for c in self.classes]
        self.empty = [c.is_empty for c in self.classes]
        # per hom-set: class indices sorted by shortest member, and those lengths
        self.homs = {}
        for k, cls in homs.items():
            ids = sorted((self.index[id(c)] for c in cls), key=self.short.__getitem__)
            self.homs[k] = (ids, [self.short[i] for i in ids])
        self.memo = {}

    def within(self, key, room):
        ids, lens = self.homs[key]
        return ids[: bisect.bisect_right(lens, room)]

    def comp(self, j, i):
        """Index of ``classes[j] o classes[i]``."""
        key = (j, i)
        r = self.memo.get(key)
        if r is None:
            c = try_compose(self.X, self.classes[j], self.classes[i])
            r = self.memo[key] = -1 if c is None else self.index[id(c)]
        return r


def _acts_as_identity(tab, e, v):
    # idempotence first, so that a loop nothing composes with is not a vacuous identity
    if tab.comp(e, e) != e:
        return False
    room = tab.X.max_path_len - tab.short[e]
    for (s, t) in tab.homs:
        if t == v:
            for f in tab.within((s, t), room):
                r = tab.comp(e, f)
                if r >= 0 and r != f:
                    return False
        if s == v:
            for f in tab.within((s, t), room):
                r = tab.comp(f, e)
                if r >= 0 and r != f:
                    return False
    return True


def check_axioms(X, flavor=TIMELIKE):
    """Exhaustive check of the (semi)category laws on the bounded hom-sets.

    Associativity and well-definedness of composition are checked for both
    flavors.  Timelike: no loop class may act as a two-sided identity.
    Causal: empty-path classes must be identities, and no other class may
    have a two-sided inverse.  Compositions that do not fit the length bound
    are skipped and counted.
    """
    _check_flavor(flavor)
    rep = AxiomReport(flavor)
    homs = all_classes(X, flavor)
    tab = _Table(X, homs)
    C = tab.classes
    vs = X.vertices
    bound = X.max_path_len
    checked = dict.fromkeys(("well_defined", "associativity", "identity", "inverse"), 0)
    skipped = dict.fromkeys(("well_defined", "associativity"), 0)

    # a composite needs some member pair within the bound, so hom-sets sorted
    # by shortest member let us stop early; skipped combinations are counted
    total = 0
    for u, v, w in itertools.product(vs, repeat=3):
        total += len(homs[u, v]) * len(homs[v, w])
        for a in tab.homs[u, v][0]:
            for b in tab.within((v, w), bound - tab.short[a]):
                results = _well_defined(X, C[b], C[a])
                checked["well_defined"] += 1
                if len(results) > 1:
                    rep.violations.append({
                        "axiom": "well_defined",
                        "detail": f"{C[b]} o {C[a]} depends on representatives",
                        "classes": [str(C[b]), str(C[a])],
                        "results": sorted(str(r) for r in results),
                    })
    skipped["well_defined"] = total - checked["well_defined"]

    total = 0
    short, comp = tab.short, tab.comp
    for u, v, w, t in itertools.product(vs, repeat=4):
        total += len(homs[u, v]) * len(homs[v, w]) * len(homs[w, t])
        if not homs[w, t]:
            continue
        for a in tab.homs[u, v][0]:
            for b in tab.within((v, w), bound - short[a]):
                ba = comp(b, a)
                if ba < 0:
                    continue
                for c in tab.within((w, t), bound - max(short[b], short[ba])):
                    cb = comp(c, b)
                    if cb < 0:
                        continue
                    left, right = comp(cb, a), comp(c, ba)
                    if left < 0 or right < 0:
                        continue
                    checked["associativity"] += 1
                    if left != right:
                        rep.violations.append({
                            "axiom": "associativity",
                            "detail": f"({C[c]} o {C[b]}) o {C[a]} = {C[left]} but {C[c]} o ({C[b]} o {C[a]}) = {C[right]}",
                            "classes": [str(C[c]), str(C[b]), str(C[a])],
                        })
    skipped["associativity"] = total - checked["associativity"]

    for v in vs:
        for e in tab.homs[v, v][0]:
            checked["identity"] += 1
            is_id = _acts_as_identity(tab, e, v)
            if flavor == TIMELIKE and is_id:
                rep.violations.append({
                    "axiom": "no_identity",
                    "detail": f"{C[e]} acts as a two-sided identity at {v!r}",
                    "classes": [str(C[e])],
                })
            elif flavor == CAUSAL and tab.empty[e] and not is_id:
                rep.violations.append({
                    "axiom": "identity",
                    "detail": f"the empty path at {v!r} is not a two-sided identity",
                    "classes": [str(C[e])],
                })
            elif flavor == CAUSAL and not tab.empty[e] and is_id:
                rep.violations.append({
                    "axiom": "identity",
                    "detail": f"non-empty class {C[e]} acts as an identity at {v!r}",
                    "classes": [str(C[e])],
                })

    if flavor == CAUSAL:
        ident = {v: i for v in vs for i in tab.homs[v, v][0] if tab.empty[i]}
        for u, v in itertools.product(vs, repeat=2):
            for g in tab.homs[u, v][0]:
                if tab.empty[g]:
                    continue
                checked["inverse"] += 1
                for h in tab.within((v, u), bound - short[g]):
                    if comp(h, g) == ident.get(u, -2) and comp(g, h) == ident.get(v, -2):
                        rep.violations.append({
                            "axiom": "no_inverse",
                            "detail": f"{C[g]} has inverse {C[h]}",
                            "classes": [str(C[g]), str(C[h])],
                        })
                        break
    rep.checked, rep.skipped = checked, skipped
    return rep


# --------------------------------------------------------------------------
# functors


@dataclass
class FunctorReport:
    is_functor: bool
    is_isomorphism: bool
    violations: list = field(default_factory=list)
    edge_map: dict = field(default_factory=dict)
    faithful: bool | None = None

    def to_dict(self):
        return {
            "is_functor": self.is_functor,
            "is_isomorphism": self.is_isomorphism,
            "faithful": self.faithful,
            "edge_map": [{"edge": k, "image": v} for k, v in self.edge_map.items()],
            "violations": list(self.violations),
        }


def _edge_map(f, X, Y, flavor, violations):
    """Map each flavor edge of ``X`` to the lowest-id compatible edge of ``Y``."""
    emap = {}
    for e in X.edges:
        if flavor == TIMELIKE and e.label != TIMELIKE:
            continue
        u, v = f[e.src], f[e.dst]
        cands = [g for g in Y.edges if g.src == u and g.dst == v]
        if flavor == TIMELIKE:
            cands = [g for g in cands if g.label == TIMELIKE]
        else:
            # keep the label if possible
            cands.sort(key=lambda g: g.label != e.label)
        if not cands:
            violations.append({
                "kind": "edge",
                "edge": e.id,
                "detail": f"edge {e.id!r} ({e.src!r} -> {e.dst!r}) has no {flavor} image {u!r} -> {v!r}",
            })
            continue
        best = cands[0].label
        emap[e.id] = min((g for g in cands if g.label == best), key=lambda g: _key(g.id)).id
    return emap


def _class_map(X, Y, f, emap, flavor, violations):
    """Image class for every class of ``X``; records classes whose members split or leave the bound."""
    cmap = {}
    for (x, y), classes in all_classes(X, flavor).items():
        for cls in classes:
            images = set()
            for m in cls.members:
                edges = tuple(emap[e] for e in m.edges)
                if len(edges) > Y.max_path_len:
                    continue
                images.add(class_of(Y, Y.path(f[x], edges, flavor)))
            if len(images) != 1:
                violations.append({
                    "kind": "class",
                    "class": str(cls),
                    "detail": "members map to different classes" if images else "no member image within the bound",
                })
                continue
            cmap[cls] = images.pop()
    return cmap


def _check_composition(X, Y, cmap, flavor, violations):
    homs = all_classes(X, flavor)
    for u, v, w in itertools.product(X.vertices, repeat=3):
        for a in homs[u, v]:
            for b in homs[v, w]:
                ba = try_compose(X, b, a)
                if ba is None or ba not in cmap or a not in cmap or b not in cmap:
                    continue
                img = try_compose(Y, cmap[b], cmap[a])
                if img is not None and img != cmap[ba]:
                    violations.append({
                        "kind": "composition",
                        "pair": [str(b), str(a)],
                        "detail": f"F({b} o {a}) = {cmap[ba]} but F({b}) o F({a}) = {img}",
                    })


def _functor_parts(f, X, Y, flavor):
    violations = []
    emap = _edge_map(f, X, Y, flavor, violations)
    if violations:
        return emap, None, violations
    cmap = _class_map(X, Y, f, emap, flavor, violations)
    _check_composition(X, Y, cmap, flavor, violations)
    return emap, cmap, violations


def induced_functor(f, X, Y, flavor=TIMELIKE):
    """Check whether the vertex map ``f`` induces a functor ``Pi(X) -> Pi(Y)`` and whether it is an isomorphism.

    ``f`` must send every flavor edge ``u -> v`` to some flavor edge
    ``f(u) -> f(v)``; when several exist the lowest id is used.  The
    isomorphism test requires ``f`` to be a bijection whose inverse induces a
    functor as well, with both class maps mutually inverse on every hom-set.
    """
    _check_flavor(flavor)
    f = dict(f)
    missing = [v for v in X.vertices if v not in f]
    if missing:
        raise InputError(f"vertex map is undefined on {missing}")
    bad = [v for v in f.values() if v not in Y._out]
    if bad:
        raise InputError(f"vertex map has images outside the target: {bad}")
    emap, cmap, violations = _functor_parts(f, X, Y, flavor)
    is_functor = not violations
    iso = False
    if is_functor:
        iso = _isomorphism(f, X, Y, flavor, cmap, violations)
    return FunctorReport(is_functor, iso, violations, emap)


def _isomorphism(f, X, Y, flavor, cmap, violations):
    if len(set(f.values())) != len(X.vertices) or len(Y.vertices) != len(X.vertices):
        violations.append({"kind": "bijection", "detail": "vertex map is not a bijection"})
        return False
    g = {v: k for k, v in f.items()}
    _, back, inv_violations = _functor_parts(g, Y, X, flavor)
    if inv_violations:
        violations.extend({**v, "direction": "inverse"} for v in inv_violations)
        return False
    ok = True
    for (x, y), classes in all_classes(X, flavor).items():
        target = homotopy_classes(Y, f[x], f[y], flavor)
        if len(target) != len(classes):
            violations.append({
                "kind": "hom_set",
                "pair": [x, y],
                "detail": f"|Pi({x!r}, {y!r})| = {len(classes)} but the image hom-set has {len(target)} classes",
            })
            ok = False
            continue
        for cls in classes:
            if back.get(cmap[cls]) != cls:
                violations.append({"kind": "inverse", "class": str(cls), "detail": "class maps are not mutually inverse"})
                ok = False
    return ok


def forget_flavor(X):
    """The inclusion of timelike classes into causal classes, as a functor report.

    Composition is always preserved; ``faithful`` records whether distinct
    timelike classes stay distinct, with each collision listed.
    """
    tl = all_classes(X, TIMELIKE)
    cmap = {}
    violations = []
    for (x, y), classes in tl.items():
        for cls in classes:
            images = {class_of(X, X.path(x, m.edges, CAUSAL), CAUSAL) for m in cls.members}
            cmap[cls] = min(images, key=lambda c: c.rep.sort_key())
            if len(images) > 1:
                violations.append({"kind": "class", "class": str(cls), "detail": "members map to different causal classes"})
    is_functor = not violations
    for u, v, w in itertools.product(X.vertices, repeat=3):
        for a in tl[u, v]:
            for b in tl[v, w]:
                ba = try_compose(X, b, a)
                img = try_compose(X, cmap[b], cmap[a])
                if ba is not None and img is not None and cmap[ba] != img:
                    is_functor = False
                    violations.append({"kind": "composition", "pair": [str(b), str(a)], "detail": "inclusion does not preserve composition"})
    faithful = True
    for (x, y), classes in tl.items():
        seen = {}
        for cls in classes:
            img = cmap[cls]
            if img in seen:
                faithful = False
                violations.append({
                    "kind": "collision",
                    "pair": [x, y],
                    "detail": f"timelike classes {seen[img]} and {cls} have the same causal class {img}",
                })
            else:
                seen[img] = cls
    emap = {e.id: e.id for e in X.edges if e.label == TIMELIKE}
    # empty-path identities of the causal side are never hit
    iso = is_functor and faithful and not X.vertices
    return FunctorReport(is_functor, iso, violations, emap, faithful)


# --------------------------------------------------------------------------
# examples


def _spacetime(vertices, edges, cells=(), bound=6):
    es = [Edge(i, u, v, lab) for i, (u, v, lab) in enumerate(edges)]
    return DiscreteSpacetime(vertices, es, cells, bound)


T, N = TIMELIKE, LIGHTLIKE


def _square(cells):
    return _spacetime(["x", "a", "b", "y"], [("x", "a", T), ("a", "y", T), ("x", "b", T), ("b", "y", T)], cells)


EXAMPLES = {
    # single timelike edge
    "edge": lambda: _spacetime(["x", "y"], [("x", "y", T)]),
    "square": lambda: _square([]),
    "square_with_cell": lambda: _square([([0, 1], [2, 3])]),
    "chain": lambda: _spacetime(["x", "m", "y"], [("x", "m", T), ("m", "y", T)]),
    "chain4": lambda: _spacetime(["w", "x", "y", "z"], [("w", "x", T), ("x", "y", T), ("y", "z", T)]),
    "chain5": lambda: _spacetime(
        ["w", "m", "x", "y", "z"], [("w", "m", T), ("m", "x", T), ("x", "y", T), ("y", "z", T)]
    ),
    # x -> m -> y timelike, x -> y lightlike, tied by a cell
    "lightlike_chain": lambda: _spacetime(
        ["x", "m", "y"], [("x", "m", T), ("m", "y", T), ("x", "y", N)], [([0, 1], [2])]
    ),
    # two timelike routes that are only causally homotopic, through a lightlike route
    "lightlike_cell": lambda: _spacetime(
        ["x", "a", "b", "m", "y"],
        [("x", "a", T), ("a", "y", T), ("x", "b", T), ("b", "y", T), ("x", "m", N), ("m", "y", N)],
        [([0, 1], [4, 5]), ([4, 5], [2, 3])],
    ),
    # x -> y -> x with the round trip absorbed on both sides
    "absorbing_cycle": lambda: _spacetime(
        ["x", "y"], [("x", "y", T), ("y", "x", T)], [([0, 1, 0], [0]), ([1, 0, 1], [1])], bound=5
    ),
    "empty": lambda: DiscreteSpacetime([], [], [], 1),
}


def example(name):
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise InputError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


def longest_path(X):
    """Number of edges of the longest directed path, or ``None`` if the graph has a cycle."""
    indeg = {v: 0 for v in X.vertices}
    for e in X.edges:
        indeg[e.dst] += 1
    depth = dict.fromkeys(X.vertices, 0)
    ready = [v for v in X.vertices if not indeg[v]]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for e in X.out_edges(v):
            depth[e.dst] = max(depth[e.dst], depth[v] + 1)
            indeg[e.dst] -= 1
            if not indeg[e.dst]:
                ready.append(e.dst)
    if seen < len(X.vertices):
        return None
    return max(depth.values(), default=0)


def random_spacetime(seed, *, max_vertices=8, max_edges=14, max_cells=3, max_len=8, acyclic=False,
                     full_bound=False, bound=None, lightlike=0.2):
    """A random complex within the given size limits; a simple digraph (no parallel edges).

    With ``acyclic`` and ``full_bound`` the bound is raised to the longest
    path, so that it truncates nothing.
    """
    rng = random.Random(seed)
    n = rng.randint(1, max_vertices)
    verts = list(range(n))
    pairs = [(u, v) for u in verts for v in verts if u != v and (not acyclic or u < v)]
    rng.shuffle(pairs)
    m = rng.randint(0, min(max_edges, len(pairs)))
    edges = [Edge(i, u, v, LIGHTLIKE if rng.random() < lightlike else TIMELIKE) for i, (u, v) in enumerate(sorted(pairs[:m]))]
    bound = bound or rng.randint(1, max_len)
    X = DiscreteSpacetime(verts, edges, [], bound)
    if acyclic and full_bound:
        bound = max(bound, longest_path(X) or 1)
        X = DiscreteSpacetime(verts, edges, [], bound)
    # cells join two paths between a pair that has at least two
    options = []
    for x in verts:
        for y in verts:
            paths = [p for p in _raw_paths(X, x, y, CAUSAL) if p.edges]
            if len(paths) >= 2:
                options.append(paths)
    cells = []
    for _ in range(rng.randint(0, max_cells) if options else 0):
        a, b = rng.sample(rng.choice(options), 2)
        cells.append((a.edges, b.edges))
    return DiscreteSpacetime(verts, edges, cells, bound)
