"""Detection, application, inversion and logging of bistellar moves.

The move κ(A, B) applies to a complex K of dimension n when A ∈ K,
lk(A, K) = ∂B for an (n − dim A)-simplex B ∉ K; it removes the simplexes
containing A and inserts the simplexes containing B.  Moves are recorded
with both simplexes explicit so sequences are self-contained: replay never
has to re-infer B, and vertex accounting can be audited from the log alone.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .complexes import (
    Complex,
    Simplex,
    WorkingComplex,
    find_isomorphism,
    proper_faces,
)


class MoveError(Exception):
    """The move is not applicable where it was asked to run."""


class SearchCapExceeded(Exception):
    """A bounded search hit its node budget before deciding."""


@dataclass(frozen=True)
class PachnerMove:
    """κ(a, b) with a and b canonical disjoint simplexes, dim a + dim b = n."""

    a: Simplex
    b: Simplex

    def __post_init__(self):
        if set(self.a) & set(self.b):
            raise ValueError(f"move simplexes must be disjoint: {self.a}, {self.b}")

    def inverted(self) -> "PachnerMove":
        return PachnerMove(self.b, self.a)

    @property
    def removed_vertices(self) -> frozenset[int]:
        return frozenset(self.a) if len(self.a) == 1 else frozenset()

    @property
    def added_vertices(self) -> frozenset[int]:
        return frozenset(self.b) if len(self.b) == 1 else frozenset()


def invert(move: PachnerMove) -> PachnerMove:
    return move.inverted()


@dataclass(frozen=True)
class MoveSequence:
    """An ordered, replayable move log with endpoint digests."""

    moves: tuple[PachnerMove, ...]
    start_digest: str
    end_digest: str

    def __len__(self) -> int:
        return len(self.moves)

    def removed_vertices(self) -> frozenset[int]:
        out: set[int] = set()
        for m in self.moves:
            out |= m.removed_vertices
        return frozenset(out)

    def reversed(self) -> "MoveSequence":
        return MoveSequence(
            tuple(m.inverted() for m in reversed(self.moves)),
            self.end_digest,
            self.start_digest,
        )


def _boundary_set(b: Simplex) -> set[Simplex]:
    return set(proper_faces(b))


def applicable(k: Complex, a: Simplex) -> Optional[Simplex]:
    """Return the unique B with lk(a, K) = ∂B and B ∉ K, if any.

    For a top-dimensional ``a`` the link is empty and B is a fresh vertex.
    """
    if a not in k:
        raise KeyError(f"simplex {a} not in complex")
    n = k.dimension
    r = len(a) - 1
    lk = k.link(a).simplexes
    if r == n:
        if lk:
            return None
        return (k.max_label() + 1,)
    verts = sorted({v for s in lk for v in s})
    if len(verts) != n - r + 1:
        return None
    b = tuple(verts)
    if lk != frozenset(proper_faces(b)):
        return None
    if b in k:
        return None
    return b


def move_delta(move: PachnerMove) -> tuple[set[Simplex], set[Simplex]]:
    """(removed, added) simplex sets of κ(a, b): the faces of a ⋆ b
    containing a, and those containing b."""
    a, b = move.a, move.b
    removed = {tuple(sorted(a + bp)) for bp in _subsets_with_empty(b) if bp != b}
    added = {tuple(sorted(b + ap)) for ap in _subsets_with_empty(a) if ap != a}
    return removed, added


def _subsets_with_empty(s: Simplex) -> Iterable[Simplex]:
    for k in range(len(s) + 1):
        yield from combinations(s, k)


def check_applicable(work: WorkingComplex, move: PachnerMove, n: int) -> None:
    """Raise MoveError unless κ(a, b) applies to the working complex."""
    a, b = move.a, move.b
    if (len(a) - 1) + (len(b) - 1) != n:
        raise MoveError(f"dim {a} + dim {b} != {n}")
    if a not in work:
        raise MoveError(f"move simplex {a} absent")
    if b in work:
        raise MoveError(f"inserted simplex {b} already present")
    if work.link_simplexes(a) != _boundary_set(b):
        raise MoveError(f"link of {a} is not the boundary of {b}")


def apply_move_inplace(
    work: WorkingComplex, move: PachnerMove, n: int, *, validate: bool = True
) -> tuple[set[Simplex], set[Simplex]]:
    """Apply κ(a, b) to a working complex, returning (removed, added)."""
    if validate:
        check_applicable(work, move, n)
    removed, added = move_delta(move)
    for s in removed:
        work.discard(s)
    for s in added:
        work.add(s)
    if work.next_label <= move.b[-1]:
        work.next_label = move.b[-1] + 1
    return removed, added


def apply(k: Complex, move: PachnerMove) -> Complex:
    """κ(a, b) as a pure function on complexes."""
    work = WorkingComplex(k)
    apply_move_inplace(work, move, k.dimension)
    return work.snapshot()


def apply_sequence(k: Complex, seq: MoveSequence, *, verify_digests: bool = True) -> Complex:
    if verify_digests and k.digest() != seq.start_digest:
        raise MoveError("start complex does not match sequence start digest")
    work = WorkingComplex(k)
    n = k.dimension
    for m in seq.moves:
        apply_move_inplace(work, m, n)
    out = work.snapshot()
    if verify_digests and out.digest() != seq.end_digest:
        raise MoveError("replay did not reproduce the end digest")
    return out


def sequence_from_moves(start: Complex, moves: Iterable[PachnerMove]) -> MoveSequence:
    """Apply and log moves, producing a digest-stamped sequence."""
    work = WorkingComplex(start)
    n = start.dimension
    ms = tuple(moves)
    for m in ms:
        apply_move_inplace(work, m, n)
    return MoveSequence(ms, start.digest(), work.snapshot().digest())


def enumerate_moves(k: Complex) -> list[PachnerMove]:
    """All applicable moves, ordered by (dim a, a) for determinism."""
    out = []
    for a in sorted(k.simplexes, key=lambda s: (len(s), s)):
        b = applicable(k, a)
        if b is not None:
            out.append(PachnerMove(a, b))
    return out


def replay_verified(
    start: Complex,
    seq: MoveSequence,
    *,
    expect: Optional[Complex] = None,
    check_pseudomanifold: bool = True,
    full_check_every: Optional[int] = None,
) -> Complex:
    """Replay a sequence with closed-pseudomanifold tracking.

    Ridge degrees are maintained incrementally and every ridge touched by a
    move must come out with exactly two cofacets, so a purity/degree defect
    in any intermediate complex is caught at the move that creates it;
    full global checks run periodically and at both endpoints.
    """
    from itertools import combinations as _comb

    if start.digest() != seq.start_digest:
        raise MoveError("start complex does not match sequence start digest")
    n = start.dimension
    if check_pseudomanifold and not start.is_closed_pseudomanifold():
        raise MoveError("start complex is not a closed pseudomanifold")
    work = WorkingComplex(start)
    ridge_count: dict[Simplex, int] = {}
    for t in start.simplexes:
        if len(t) == n + 1:
            for r in _comb(t, n):
                ridge_count[r] = ridge_count.get(r, 0) + 1
    if full_check_every is None:
        full_check_every = max(1, len(seq.moves) // 10)
    for idx, m in enumerate(seq.moves):
        removed, added = apply_move_inplace(work, m, n)
        if check_pseudomanifold:
            touched: set[Simplex] = set()
            for s in removed:
                if len(s) == n + 1:
                    for r in _comb(s, n):
                        ridge_count[r] = ridge_count.get(r, 0) - 1
                        touched.add(r)
            for s in added:
                if len(s) == n + 1:
                    for r in _comb(s, n):
                        ridge_count[r] = ridge_count.get(r, 0) + 1
                        touched.add(r)
            for r in touched:
                c = ridge_count.get(r, 0)
                if c == 0:
                    ridge_count.pop(r, None)
                    if r in work:
                        raise MoveError(
                            f"move {idx}: ridge {r} left behind without cofacets"
                        )
                elif c != 2:
                    raise MoveError(
                        f"move {idx}: ridge {r} has {c} cofacets; "
                        "intermediate complex is not a closed pseudomanifold"
                    )
            if (idx + 1) % full_check_every == 0:
                if not work.snapshot().is_closed_pseudomanifold():
                    raise MoveError(f"full check failed after move {idx}")
    out = work.snapshot()
    if check_pseudomanifold and not out.is_closed_pseudomanifold():
        raise MoveError("end complex is not a closed pseudomanifold")
    if out.digest() != seq.end_digest:
        raise MoveError("replay did not reproduce the end digest")
    if expect is not None and out != expect:
        raise MoveError("replayed complex differs from the expected complex")
    return out


def _iso_signature(k: Complex) -> tuple:
    links = []
    for v in k.vertices():
        counts: dict[int, int] = {}
        for c in k.cofaces((v,)):
            counts[len(c) - 1] = counts.get(len(c) - 1, 0) + 1
        links.append(tuple(sorted(counts.items())))
    return (k.f_vector(), tuple(sorted(links)))


def bfs_equivalence(
    k: Complex,
    l: Complex,
    max_depth: int,
    *,
    max_nodes: int = 20_000,
) -> Optional[MoveSequence]:
    """Shortest move sequence from k to (a complex isomorphic to) l within
    the depth bound, or None.  Visited complexes are bucketed by an
    isomorphism signature and confirmed with an explicit isomorphism check,
    so distinct complexes never merge."""
    if find_isomorphism(k, l) is not None:
        return sequence_from_moves(k, ())
    seen: dict[tuple, list[Complex]] = {_iso_signature(k): [k]}
    queue: deque[tuple[Complex, tuple[PachnerMove, ...]]] = deque([(k, ())])
    nodes = 0
    while queue:
        current, path = queue.popleft()
        if len(path) >= max_depth:
            continue
        for move in enumerate_moves(current):
            nodes += 1
            if nodes > max_nodes:
                raise SearchCapExceeded(f"bfs exceeded {max_nodes} expansions")
            nxt = apply(current, move)
            sig = _iso_signature(nxt)
            bucket = seen.setdefault(sig, [])
            if any(find_isomorphism(nxt, old) is not None for old in bucket):
                continue
            bucket.append(nxt)
            if find_isomorphism(nxt, l) is not None:
                return sequence_from_moves(k, path + (move,))
            queue.append((nxt, path + (move,)))
    return None
