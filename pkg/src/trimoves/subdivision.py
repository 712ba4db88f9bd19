"""Barycentric, iterated, and relative-partial subdivisions with carriers.

The carrier of a subdivision simplex is the smallest simplex of the parent
complex containing it; it is what makes skeleton counts and restriction to
a parent simplex computable.  Cone apexes are always fresh labels allocated
in a fixed canonical order (ascending parent dimension, then lexicographic),
so two runs on the same input produce identical complexes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .complexes import Complex, Simplex, facets


class ResourceCapExceeded(Exception):
    """Raised when a subdivision would exceed the configured simplex ceiling."""


@dataclass(frozen=True)
class SubdividedComplex:
    """A subdivision of ``parent`` together with its carrier map.

    ``carrier[s]`` is the smallest parent simplex containing ``s``; for a
    surviving original simplex it is the simplex itself.  ``apex_of`` maps
    each parent simplex that was coned during this construction to its
    fresh apex vertex (empty for identity subdivisions and restrictions).
    """

    complex: Complex
    parent: Complex
    carrier: dict[Simplex, Simplex]
    apex_of: dict[Simplex, int] = field(default_factory=dict)

    def validate(self) -> None:
        """Check carrier totality, monotonicity and parent coverage."""
        for s in self.complex.simplexes:
            c = self.carrier.get(s)
            if c is None:
                raise ValueError(f"carrier missing for {s}")
            if c not in self.parent:
                raise ValueError(f"carrier {c} of {s} not in parent complex")
            if len(c) < len(s):
                raise ValueError(f"carrier {c} too small for {s}")
            for f in facets(s):
                cf = self.carrier[f]
                if not set(cf) <= set(c):
                    raise ValueError(f"carrier not monotone at {f} < {s}")
        covered = {self.carrier[s] for s in self.complex.simplexes}
        for p in self.parent.simplexes:
            if p not in covered:
                raise ValueError(f"parent simplex {p} has no subdividing simplex")

    def children_with_carrier_in(self, a: Simplex) -> set[Simplex]:
        """All subdivision simplexes whose carrier is a face of ``a``."""
        idx = self._carrier_index()
        out: set[Simplex] = set()
        for k in range(1, len(a) + 1):
            for f in combinations(a, k):
                out.update(idx.get(f, ()))
        return out

    def _carrier_index(self) -> dict[Simplex, set[Simplex]]:
        idx = getattr(self, "_idx", None)
        if idx is None:
            idx = {}
            for s, c in self.carrier.items():
                idx.setdefault(c, set()).add(s)
            object.__setattr__(self, "_idx", idx)
        return idx


def identity_subdivision(k: Complex) -> SubdividedComplex:
    return SubdividedComplex(k, k, {s: s for s in k.simplexes})


def partial_relative(
    k: Complex,
    alpha: SubdividedComplex,
    r: int,
    *,
    max_simplexes: Optional[int] = None,
) -> SubdividedComplex:
    """Subdivision that keeps ``alpha`` on the r-skeleton and cones above.

    Parent simplexes of dimension at most ``r`` carry their alpha
    subdivision; each higher-dimensional simplex is replaced, inductively by
    dimension, with the cone on its already-subdivided boundary from a fresh
    apex.  With ``alpha`` the identity and ``r = 0`` this is the barycentric
    subdivision; with ``r = n`` it returns ``alpha`` itself.
    """
    if alpha.parent is not k and alpha.parent.simplexes != k.simplexes:
        raise ValueError("alpha must be a subdivision of k")
    n = k.dimension
    if not 0 <= r <= max(n, 0):
        raise ValueError(f"need 0 <= r <= {n}, got {r}")
    for s in alpha.complex.simplexes:
        c = alpha.carrier.get(s)
        if c is None:
            raise ValueError(f"carrier missing for {s}")
        if c not in k:
            raise ValueError(f"carrier {c} of {s} is not a simplex of the parent")

    # sub[a]: the subdivision of the closed simplex a, built by dimension
    sub: dict[Simplex, set[Simplex]] = {}
    carrier: dict[Simplex, Simplex] = {}
    apex_of: dict[Simplex, int] = {}
    next_label = max(k.max_label(), alpha.complex.max_label()) + 1
    total = 0

    for d in range(n + 1):
        for a in k.simplexes_of_dim(d):
            if d <= r:
                children = alpha.children_with_carrier_in(a)
                if not children:
                    raise ValueError(f"alpha has no simplexes carried by {a}")
                sub[a] = children
                for s in children:
                    carrier[s] = alpha.carrier[s]
            else:
                boundary: set[Simplex] = set()
                for f in facets(a):
                    boundary |= sub[f]
                apex = next_label
                next_label += 1
                apex_of[a] = apex
                coned = {(apex,)} | {tuple(sorted(s + (apex,))) for s in boundary}
                carrier[(apex,)] = a
                for s in boundary:
                    carrier[tuple(sorted(s + (apex,)))] = a
                sub[a] = boundary | coned
            total += len(sub[a])
            if max_simplexes is not None and total > max_simplexes:
                raise ResourceCapExceeded(
                    f"subdivision exceeds simplex cap {max_simplexes}"
                )

    out: set[Simplex] = set()
    for a in k.maximal_simplexes():
        out |= sub[a]
    result = Complex(out, _assume_closed=True)
    carrier = {s: carrier[s] for s in result.simplexes}
    return SubdividedComplex(result, k, carrier, apex_of)


def barycentric(k: Complex) -> SubdividedComplex:
    """β K: cone every positive-dimensional simplex over its subdivided
    boundary from a fresh barycenter vertex; original vertices survive."""
    if not k.simplexes:
        return SubdividedComplex(k, k, {})
    return partial_relative(k, identity_subdivision(k), 0)


def compose_carriers(
    outer: SubdividedComplex, inner: SubdividedComplex
) -> SubdividedComplex:
    """Carrier composition: ``outer`` subdivides ``inner.complex`` which
    subdivides ``inner.parent``; the result carries ``outer.complex`` into
    ``inner.parent`` by taking the smallest containing parent simplex."""
    if outer.parent.simplexes != inner.complex.simplexes:
        raise ValueError("outer must subdivide inner.complex")
    carrier = {s: inner.carrier[outer.carrier[s]] for s in outer.complex.simplexes}
    return SubdividedComplex(outer.complex, inner.parent, carrier, dict(outer.apex_of))


def iterated_barycentric(
    k: Complex, m: int, *, max_simplexes: int = 2_000_000
) -> SubdividedComplex:
    """β^m K with the carrier composed all the way down into K."""
    if m < 0:
        raise ValueError("m must be non-negative")
    current = identity_subdivision(k)
    for _ in range(m):
        layer = partial_relative(
            current.complex,
            identity_subdivision(current.complex),
            0,
            max_simplexes=max_simplexes,
        )
        current = compose_carriers(layer, current)
    return current


def skeleton_counts(sub: SubdividedComplex) -> tuple[int, ...]:
    """s_i: number of i-simplexes of the subdivision whose carrier is
    i-dimensional, i.e. the ones lying in the i-skeleton of the parent."""
    n = sub.parent.dimension
    counts = [0] * (n + 1)
    for s in sub.complex.simplexes:
        i = len(s) - 1
        if len(sub.carrier[s]) - 1 == i:
            counts[i] += 1
    return tuple(counts)
