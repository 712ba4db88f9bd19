"""Abstract simplicial complexes with canonical vertex-tuple simplexes.

A simplex is a strictly increasing tuple of non-negative integer vertex
labels.  A complex stores its full downward-closed simplex set, so links,
stars and move predicates are plain set lookups.  Complexes are immutable
values; every operation returns a new one.  ``WorkingComplex`` is the
mutable mirror used by long move replays.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional

Vertex = int
Simplex = tuple[int, ...]


def simplex(vertices: Iterable[int]) -> Simplex:
    """Canonicalise an iterable of vertex labels into a simplex tuple."""
    s = tuple(sorted(vertices))
    if not s:
        raise ValueError("a simplex needs at least one vertex")
    if len(set(s)) != len(s):
        raise ValueError(f"duplicate vertices in {s}")
    if any(v < 0 for v in s):
        raise ValueError(f"negative vertex label in {s}")
    return s


def faces(s: Simplex) -> Iterator[Simplex]:
    """All nonempty faces of ``s``, including ``s`` itself."""
    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


def proper_faces(s: Simplex) -> Iterator[Simplex]:
    for k in range(1, len(s)):
        yield from combinations(s, k)


def facets(s: Simplex) -> Iterator[Simplex]:
    """Codimension-one faces of ``s``."""
    if len(s) > 1:
        yield from combinations(s, len(s) - 1)


class Complex:
    """A finite, downward-closed set of simplexes."""

    __slots__ = ("_simplexes", "_dim", "_byvertex", "_fvec", "_hash")

    def __init__(self, simplexes: Iterable[Simplex], *, _assume_closed: bool = False):
        simps = frozenset(simplexes)
        if not _assume_closed:
            for s in simps:
                if not isinstance(s, tuple) or tuple(sorted(set(s))) != s or not s:
                    raise ValueError(f"not a canonical simplex: {s!r}")
                for f in proper_faces(s):
                    if f not in simps:
                        raise ValueError(f"complex not closed under faces: {f} missing from {s}")
        self._simplexes = simps
        self._dim = max((len(s) - 1 for s in simps), default=-1)
        self._byvertex: Optional[dict[int, frozenset[Simplex]]] = None
        self._fvec: Optional[tuple[int, ...]] = None
        self._hash: Optional[int] = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_maximal(cls, maximal: Iterable[Iterable[int]]) -> "Complex":
        """Smallest downward-closed complex containing the given simplexes."""
        out: set[Simplex] = set()
        for m in maximal:
            out.update(faces(simplex(m)))
        return cls(out, _assume_closed=True)

    @classmethod
    def empty(cls) -> "Complex":
        return cls(frozenset(), _assume_closed=True)

    # -- basic queries -------------------------------------------------

    @property
    def simplexes(self) -> frozenset[Simplex]:
        return self._simplexes

    @property
    def dimension(self) -> int:
        return self._dim

    def __contains__(self, s) -> bool:
        return s in self._simplexes

    def __len__(self) -> int:
        return len(self._simplexes)

    def __iter__(self) -> Iterator[Simplex]:
        return iter(self._simplexes)

    def __eq__(self, other) -> bool:
        return isinstance(other, Complex) and self._simplexes == other._simplexes

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._simplexes)
        return self._hash

    def __repr__(self) -> str:
        return f"Complex(dim={self._dim}, f={self.f_vector()})"

    def vertices(self) -> list[int]:
        return sorted(s[0] for s in self._simplexes if len(s) == 1)

    def max_label(self) -> int:
        """Largest vertex label, -1 when empty.  Fresh labels go above it."""
        return max((s[-1] for s in self._simplexes), default=-1)

    def simplexes_of_dim(self, k: int) -> list[Simplex]:
        return sorted(s for s in self._simplexes if len(s) == k + 1)

    def top_simplexes(self) -> list[Simplex]:
        return self.simplexes_of_dim(self._dim)

    def maximal_simplexes(self) -> list[Simplex]:
        """Simplexes not properly contained in any other simplex."""
        out = []
        for s in self._simplexes:
            cof = self.cofaces(s)
            if len(cof) == 1:
                out.append(s)
        return sorted(out)

    def f_vector(self) -> tuple[int, ...]:
        """(p_0, ..., p_n): count of i-simplexes by dimension."""
        if self._fvec is None:
            counts = [0] * (self._dim + 1)
            for s in self._simplexes:
                counts[len(s) - 1] += 1
            self._fvec = tuple(counts)
        return self._fvec

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * p for i, p in enumerate(self.f_vector()))

    # -- incidence -----------------------------------------------------

    def _index(self) -> dict[int, frozenset[Simplex]]:
        if self._byvertex is None:
            acc: dict[int, set[Simplex]] = {}
            for s in self._simplexes:
                for v in s:
                    acc.setdefault(v, set()).add(s)
            self._byvertex = {v: frozenset(ss) for v, ss in acc.items()}
        return self._byvertex

    def cofaces(self, a: Simplex) -> set[Simplex]:
        """All simplexes of the complex containing ``a`` (including ``a``)."""
        idx = self._index()
        try:
            sets = [idx[v] for v in a]
        except KeyError:
            return set()
        sets.sort(key=len)
        out = set(sets[0])
        for s in sets[1:]:
            out &= s
        return out

    def link(self, a: Simplex) -> "Complex":
        """lk(a, K): simplexes b disjoint from a with a ∪ b in the complex."""
        if a not in self._simplexes:
            raise KeyError(f"simplex {a} not in complex")
        av = set(a)
        out = set()
        for c in self.cofaces(a):
            if len(c) > len(a):
                out.add(tuple(v for v in c if v not in av))
        return Complex(out, _assume_closed=True)

    def star(self, a: Simplex) -> "Complex":
        """Closed star st(a, K) = a ⋆ lk(a, K) as a subcomplex."""
        if a not in self._simplexes:
            raise KeyError(f"simplex {a} not in complex")
        out: set[Simplex] = set()
        for c in self.cofaces(a):
            out.update(faces(c))
        return Complex(out, _assume_closed=True)

    # -- structure tests -------------------------------------------------

    def is_pure(self) -> bool:
        n = self._dim
        return all(len(m) - 1 == n for m in self.maximal_simplexes())

    def is_closed_pseudomanifold(self) -> bool:
        """Pure, every ridge in exactly two tops, strongly connected."""
        if self._dim < 1 or not self._simplexes:
            return False
        tops = self.top_simplexes()
        if not self.is_pure():
            return False
        ridge_tops: dict[Simplex, list[Simplex]] = {}
        for t in tops:
            for r in facets(t):
                ridge_tops.setdefault(r, []).append(t)
        if any(len(ts) != 2 for ts in ridge_tops.values()):
            return False
        # strong connectivity through ridges
        seen = {tops[0]}
        stack = [tops[0]]
        while stack:
            t = stack.pop()
            for r in facets(t):
                for u in ridge_tops[r]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
        return len(seen) == len(tops)

    # -- serialization helpers ------------------------------------------

    def canonical_json(self) -> str:
        return json.dumps(
            {"dimension": self._dim, "maximal_simplexes": [list(s) for s in self.maximal_simplexes()]},
            separators=(",", ":"),
        )

    def digest(self) -> str:
        """Stable hash of the canonical serialization."""
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def close_under_faces(maximal: Iterable[Iterable[int]]) -> Complex:
    return Complex.from_maximal(maximal)


def join(k: Complex, l: Complex) -> Complex:
    """Join of two complexes on disjoint vertex sets."""
    kv = set(k.vertices())
    lv = set(l.vertices())
    if kv & lv:
        raise ValueError(f"join requires disjoint vertex labels, shared: {sorted(kv & lv)}")
    if not k.simplexes:
        return l
    if not l.simplexes:
        return k
    out: set[Simplex] = set(k.simplexes) | set(l.simplexes)
    for a in k.simplexes:
        for b in l.simplexes:
            out.add(tuple(sorted(a + b)))
    return Complex(out, _assume_closed=True)


def cone(apex: int, base: Complex) -> Complex:
    """apex ⋆ base."""
    return join(Complex(((apex,),), _assume_closed=True), base)


def boundary_of_simplex(s: Simplex) -> Complex:
    """∂s: the complex of proper faces of one simplex."""
    return Complex(set(proper_faces(s)), _assume_closed=True)


# -- isomorphism search ----------------------------------------------------


@dataclass(frozen=True)
class Isomorphism:
    """A vertex bijection inducing a bijection of simplex sets."""

    vertex_map: dict[int, int]

    def apply(self, k: Complex) -> Complex:
        m = self.vertex_map
        return Complex(
            {tuple(sorted(m[v] for v in s)) for s in k.simplexes}, _assume_closed=True
        )

    def inverse(self) -> "Isomorphism":
        return Isomorphism({w: v for v, w in self.vertex_map.items()})


def _vertex_signatures(k: Complex) -> dict[int, tuple]:
    """Per-vertex invariant: link f-vector refined by one round of
    neighbour-signature aggregation.  Used only to prune the search."""
    base: dict[int, tuple] = {}
    nbrs: dict[int, set[int]] = {v: set() for v in k.vertices()}
    for v in k.vertices():
        counts: dict[int, int] = {}
        for c in k.cofaces((v,)):
            counts[len(c) - 1] = counts.get(len(c) - 1, 0) + 1
            for w in c:
                if w != v:
                    nbrs[v].add(w)
        base[v] = tuple(sorted(counts.items()))
    out = {}
    for v in k.vertices():
        out[v] = (base[v], tuple(sorted(base[w] for w in nbrs[v])))
    return out


def find_isomorphism(k: Complex, l: Complex) -> Optional[Isomorphism]:
    """Backtracking search for a simplicial isomorphism from k to l.

    Candidates are bucketed by (degree, link f-vector) style signatures,
    and vertices are assigned in an order that stays adjacent to the
    already-mapped part, so the simplex-preservation check prunes early.
    """
    if k.f_vector() != l.f_vector():
        return None
    if not k.simplexes:
        return Isomorphism({})
    sig_k = _vertex_signatures(k)
    sig_l = _vertex_signatures(l)
    by_sig: dict[tuple, list[int]] = {}
    for w, s in sig_l.items():
        by_sig.setdefault(s, []).append(w)
    if sorted(sig_k.values()) != sorted(sig_l.values()):
        return None

    kverts = k.vertices()
    # order: rarest signature first, then grow through neighbours
    rarity = {v: len(by_sig[sig_k[v]]) for v in kverts}
    order: list[int] = []
    placed: set[int] = set()
    adjacency: dict[int, set[int]] = {v: set() for v in kverts}
    for s in k.simplexes:
        for a in s:
            for b in s:
                if a != b:
                    adjacency[a].add(b)
    remaining = set(kverts)
    while remaining:
        frontier = {v for v in remaining if adjacency[v] & placed}
        pool = frontier or remaining
        v = min(pool, key=lambda u: (rarity[u], u))
        order.append(v)
        placed.add(v)
        remaining.discard(v)

    l_simplexes = l.simplexes
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(v: int, w: int) -> bool:
        # every fully-mapped simplex through v must land in l
        for c in k.cofaces((v,)):
            img = []
            ok = True
            for u in c:
                if u == v:
                    img.append(w)
                elif u in mapping:
                    img.append(mapping[u])
                else:
                    ok = False
                    break
            if ok and tuple(sorted(img)) not in l_simplexes:
                return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in by_sig.get(sig_k[v], ()):
            if w in used or not consistent(v, w):
                continue
            mapping[v] = w
            used.add(w)
            if backtrack(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, len(order) + 100))
    try:
        found = backtrack(0)
    finally:
        sys.setrecursionlimit(old)
    if not found:
        return None
    iso = Isomorphism(dict(mapping))
    if iso.apply(k).simplexes != l.simplexes:  # bijection of simplex sets, exactly
        return None
    return iso


# -- mutable mirror ---------------------------------------------------------


class WorkingComplex:
    """Mutable simplex set with a vertex incidence index.

    Long move replays mutate this in place; ``snapshot`` freezes the
    current state back into a ``Complex``.
    """

    __slots__ = ("simplexes", "byvertex", "next_label")

    def __init__(self, k: Complex, *, reserve_above: int = -1):
        self.simplexes: set[Simplex] = set(k.simplexes)
        self.byvertex: dict[int, set[Simplex]] = {}
        for s in self.simplexes:
            for v in s:
                self.byvertex.setdefault(v, set()).add(s)
        self.next_label = max(k.max_label(), reserve_above) + 1

    def __contains__(self, s) -> bool:
        return s in self.simplexes

    def __len__(self) -> int:
        return len(self.simplexes)

    def fresh_label(self) -> int:
        v = self.next_label
        self.next_label += 1
        return v

    def add(self, s: Simplex) -> None:
        if s not in self.simplexes:
            self.simplexes.add(s)
            for v in s:
                self.byvertex.setdefault(v, set()).add(s)

    def discard(self, s: Simplex) -> None:
        if s in self.simplexes:
            self.simplexes.discard(s)
            for v in s:
                bucket = self.byvertex[v]
                bucket.discard(s)
                if not bucket:
                    del self.byvertex[v]

    def cofaces(self, a: Simplex) -> set[Simplex]:
        try:
            sets = sorted((self.byvertex[v] for v in a), key=len)
        except KeyError:
            return set()
        out = set(sets[0])
        for s in sets[1:]:
            out &= s
        return out

    def link_simplexes(self, a: Simplex) -> set[Simplex]:
        av = set(a)
        return {
            tuple(v for v in c if v not in av)
            for c in self.cofaces(a)
            if len(c) > len(a)
        }

    def snapshot(self) -> Complex:
        return Complex(frozenset(self.simplexes), _assume_closed=True)
