"""Move-sequence generators: subdivision-to-barycentric reduction and the
end-to-end pipeline relating two geometric triangulations.

``alpha_to_beta`` walks the partial-subdivision ladder downwards: at level r
it stars, for every r-simplex A of the parent, the join S(A) of the
restricted subdivision over A with the link chains above A, replacing it by
a cone from a fresh apex.  After all levels the working complex is
isomorphic to the plain barycentric subdivision of the parent, and no
parent vertex was ever removed.  Every starring is generated from a
shelling certificate and validated move by move against the ambient
complex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional

from .bounds import depth_m, depth_mprime, reduction_sum_bound, bridge_sum_bound, mu, total_bound
from .complexes import Complex, Isomorphism, Simplex, WorkingComplex, find_isomorphism
from .geometry import GeomComplex, Geometry, geometric_barycentric, kappa
from .intersect import CommonSubdivision, barycentric_polytopal, torus_intersect
from .pachner import MoveError, MoveSequence, PachnerMove, apply_move_inplace, replay_verified
from .shelling import ShellingError, find_shelling, starring_moves
from .subdivision import (
    SubdividedComplex,
    barycentric,
    compose_carriers,
    partial_relative,
    skeleton_counts,
)


class ShellingFailure(Exception):
    """A star neighbourhood could not be shelled; callers may escalate by
    pre-subdividing the input subdivision twice and restarting."""

    def __init__(self, simplex: Simplex, message: str):
        super().__init__(f"S({simplex}): {message}")
        self.simplex = simplex


class ReductionError(Exception):
    pass


@dataclass
class LevelRecord:
    r: int
    a: Simplex
    ball_tops: int  # moves spent equals the top-simplex count of S(A)


@dataclass
class ReductionTrace:
    """Per-starring records plus the per-level and total bound checks."""

    records: list[LevelRecord] = field(default_factory=list)
    per_level_moves: dict[int, int] = field(default_factory=dict)
    per_level_bounds: dict[int, int] = field(default_factory=dict)
    total_moves: int = 0
    reduction_bound: int = 0
    result: Optional[Complex] = None
    final_isomorphism: Optional[Isomorphism] = None
    apex_of: dict[Simplex, int] = field(default_factory=dict)
    level_checks: dict[int, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def _link_chain_part(work: WorkingComplex, tops_a: list[Simplex], alpha_vertices: set[int]) -> set[Simplex]:
    """Simplexes t disjoint from the restricted subdivision joining every
    top simplex of it inside the working complex."""
    first = tops_a[0]
    candidates = {
        t
        for t in work.link_simplexes(first)
        if not (set(t) & alpha_vertices)
    }
    for s in tops_a[1:]:
        if not candidates:
            break
        sset = set(s)
        candidates = {
            t
            for t in candidates
            if not (set(t) & sset) and tuple(sorted(t + s)) in work
        }
    return candidates


def _join_sets(a_part: set[Simplex], l_part: set[Simplex]) -> set[Simplex]:
    out = set(a_part) | set(l_part)
    for s in a_part:
        for t in l_part:
            out.add(tuple(sorted(s + t)))
    return out


ISO_CHECK_LIMIT = 2500  # simplex count above which level checks drop to f-vectors


def alpha_to_beta(
    k: Complex,
    alpha: SubdividedComplex,
    *,
    level_check: str = "auto",
    max_shelling_nodes: int = 2_000_000,
) -> tuple[MoveSequence, ReductionTrace]:
    """Moves taking the subdivision ``alpha`` of ``k`` to (a complex
    isomorphic to) the barycentric subdivision of ``k``.

    Raises ShellingFailure when some star neighbourhood S(A) admits no
    shelling; the caller escalates per the two-extra-layers strategy.
    """
    if not k.is_closed_pseudomanifold():
        raise ReductionError("the parent complex must be a closed pseudomanifold")
    if alpha.parent.simplexes != k.simplexes:
        raise ReductionError("alpha must subdivide the given complex")
    alpha.validate()
    n = k.dimension
    p = k.f_vector()
    s_counts = skeleton_counts(alpha)

    work = WorkingComplex(alpha.complex, reserve_above=k.max_label())
    kvertex_labels = {
        s[0] for s in alpha.complex.simplexes if len(s) == 1 and len(alpha.carrier[s]) == 1
    }
    trace = ReductionTrace()
    trace.reduction_bound = reduction_sum_bound(n, p, s_counts)
    moves: list[PachnerMove] = []

    for r in range(n, 0, -1):
        level_moves = 0
        for a in k.simplexes_of_dim(r):
            children = alpha.children_with_carrier_in(a)
            tops_a = sorted(s for s in children if len(s) == r + 1)
            if not tops_a:
                raise ReductionError(f"alpha restricted to {a} has no top simplexes")
            for s in tops_a:
                if s not in work:
                    raise ReductionError(
                        f"restricted subdivision simplex {s} vanished from the complex"
                    )
            alpha_vertices = {v for s in children for v in s}
            l_part = _link_chain_part(work, tops_a, alpha_vertices)
            ball_simplexes = _join_sets(children, l_part)
            ball = Complex(ball_simplexes, _assume_closed=True)
            if ball.dimension != n:
                raise ReductionError(f"S({a}) is not full-dimensional")
            shelling = find_shelling(ball, max_nodes=max_shelling_nodes)
            if shelling is None:
                raise ShellingFailure(a, "star neighbourhood is not shellable")
            apex = work.fresh_label()
            mvs = starring_moves(shelling, apex)
            for mv in mvs:
                try:
                    apply_move_inplace(work, mv, n)
                except MoveError as e:
                    raise ShellingError(
                        f"ambient link condition violated starring S({a}) at {mv}: {e}"
                    ) from e
            trace.apex_of[a] = apex
            trace.records.append(LevelRecord(r, a, len(mvs)))
            level_moves += len(mvs)
            moves.extend(mvs)
        trace.per_level_moves[r] = level_moves
        p_entry = 1 if n - r - 1 == -1 else p[n - r - 1]
        bound_r = factorial(n - r) * s_counts[r] * p_entry
        trace.per_level_bounds[r] = bound_r
        if level_moves > bound_r:
            raise ReductionError(
                f"level {r} used {level_moves} moves, above its bound {bound_r}"
            )
        _level_check(trace, work, k, alpha, r - 1, level_check)

    trace.total_moves = len(moves)
    if trace.total_moves > trace.reduction_bound:
        raise ReductionError("total move count exceeds the reduction bound")

    removed = set()
    for mv in moves:
        removed |= mv.removed_vertices
    if removed & kvertex_labels:
        raise ReductionError(
            f"moves removed parent vertices {sorted(removed & kvertex_labels)}"
        )

    result = work.snapshot()
    trace.result = result
    reference = barycentric(k).complex
    iso = find_isomorphism(result, reference)
    if iso is None:
        raise ReductionError("reduction endpoint is not isomorphic to the barycentric subdivision")
    trace.final_isomorphism = iso
    seq = MoveSequence(tuple(moves), alpha.complex.digest(), result.digest())
    return seq, trace


def _level_check(
    trace: ReductionTrace,
    work: WorkingComplex,
    k: Complex,
    alpha: SubdividedComplex,
    r: int,
    mode: str,
) -> None:
    """Compare the working complex against the independently constructed
    partial subdivision at level r (by isomorphism when small)."""
    if mode == "off":
        trace.level_checks[r] = "skipped"
        return
    reference = partial_relative(k, alpha, r).complex if r >= 1 else barycentric(k).complex
    snapshot = work.snapshot()
    if snapshot.f_vector() != reference.f_vector():
        raise ReductionError(
            f"after level {r + 1}: f-vector {snapshot.f_vector()} differs "
            f"from the reference {reference.f_vector()}"
        )
    if mode == "iso" or (mode == "auto" and len(reference) <= ISO_CHECK_LIMIT):
        if find_isomorphism(snapshot, reference) is None:
            raise ReductionError(f"after level {r + 1}: not isomorphic to the reference")
        trace.level_checks[r] = "iso"
    else:
        trace.level_checks[r] = "fvector"


def _layered(base: SubdividedComplex, layers: int) -> SubdividedComplex:
    out = base
    for _ in range(layers):
        out = compose_carriers(barycentric(out.complex), out)
    return out


def beta2_bridge(
    k: Complex,
    kprime: SubdividedComplex,
    *,
    layers: int = 2,
    level_check: str = "auto",
) -> tuple[MoveSequence, ReductionTrace]:
    """Relate the twice-subdivided ``kprime`` to the barycentric subdivision
    of ``k``, with the move count checked against the double-factorial sum
    over the skeleton counts of ``kprime`` (p_0 = 2 convention)."""
    alpha = _layered(kprime, layers)
    seq, trace = alpha_to_beta(k, alpha, level_check=level_check)
    if layers == 2:
        bound = bridge_sum_bound(k.dimension, k.f_vector(), skeleton_counts(kprime))
        trace.notes.append(
            f"two-layer bound {bound} (ridge links contribute the fixed "
            "two-vertex count in place of the vertex total)"
        )
        if len(seq) > bound:
            raise ReductionError(
                f"bridge used {len(seq)} moves, above the two-layer bound {bound}"
            )
    return seq, trace


@dataclass
class RelateResult:
    """End-to-end output: the verified sequence between the barycentric
    subdivisions of the two (pre-subdivided) inputs, plus audit data."""

    sequence: MoveSequence
    start: Complex
    end: Complex
    trace1: ReductionTrace
    trace2: ReductionTrace
    common: CommonSubdivision
    common_vertices: frozenset[int]
    pre_subdivision_depth: int
    escalation_layers: int
    bound_m: int
    bound_value: int
    notes: list[str] = field(default_factory=list)


def _min_convexity_depth(gk: GeomComplex) -> int:
    """Smallest m with kappa^m Lambda < 2 r(M) on the flat torus/circle."""
    if gk.period is None:
        raise ReductionError("the end-to-end pipeline runs on torus quotients")
    lam = gk.max_edge()
    inj = gk.period / 2  # = 2 r(M)
    n = gk.complex.dimension
    m = 0
    contraction = kappa(Geometry.EUCLIDEAN, n, max(lam, 1e-12))
    while lam >= inj:
        lam *= contraction
        m += 1
        if m > 64:
            raise ReductionError("convexity pre-subdivision depth ran away")
    return m


def relate(
    k1: GeomComplex,
    k2: GeomComplex,
    *,
    level_check: str = "auto",
    verify: bool = True,
    max_escalations: int = 2,
) -> RelateResult:
    """Verified move sequence from β(pre-subdivided k1) to β(pre-subdivided
    k2) through their common geometric subdivision.

    Both inputs are barycentrically subdivided until every simplex sits in
    a strongly convex ball, intersected on the torus, and reduced through
    the common subdivision; the two reductions are stitched back to back.
    Shelling failures escalate by putting two more barycentric layers on
    the common subdivision and restarting.
    """
    if k1.tag != k2.tag or k1.tag != Geometry.EUCLIDEAN:
        raise ReductionError("the desk-scale pipeline is Euclidean (flat torus/circle)")
    if k1.period is None or k1.period != k2.period:
        raise ReductionError("inputs must share one torus period")
    n = k1.complex.dimension
    if n != k2.complex.dimension or n > 2:
        raise ReductionError("the pipeline supports dimensions 1 and 2")

    p = k1.complex.f_vector()[n]
    q = k2.complex.f_vector()[n]
    lam = max(k1.max_edge(), k2.max_edge())
    inj = k1.period / 2

    m_geo = max(_min_convexity_depth(k1), _min_convexity_depth(k2))
    b1 = geometric_barycentric(k1, m_geo)
    b2 = geometric_barycentric(k2, m_geo)

    poly = torus_intersect(b1, b2)
    common = barycentric_polytopal(poly, b1, b2)

    notes: list[str] = []
    layers = 0
    while True:
        alpha1 = _layered(common.as_subdivided(1), layers)
        alpha2 = _layered(common.as_subdivided(2), layers)
        if alpha1.complex.digest() != alpha2.complex.digest():
            raise ReductionError("the two carrier views diverged on the same complex")
        try:
            seq1, trace1 = alpha_to_beta(b1.complex, alpha1, level_check=level_check)
            seq2, trace2 = alpha_to_beta(b2.complex, alpha2, level_check=level_check)
            break
        except ShellingFailure as e:
            layers += 2
            notes.append(f"escalated to {layers} extra layers after {e}")
            if layers > 2 * max_escalations:
                raise
    if layers == 0:
        notes.append("direct reduction through the common subdivision succeeded")

    full = MoveSequence(
        seq1.reversed().moves + seq2.moves, seq1.end_digest, seq2.end_digest
    )
    start = trace1.result
    end = trace2.result

    common_vertices = frozenset(
        v
        for v in common.complex.vertices()
        if len(common.carrier1[(v,)]) == 1 and len(common.carrier2[(v,)]) == 1
    )
    removed = set()
    for mv in full.moves:
        removed |= mv.removed_vertices
    if removed & common_vertices:
        raise ReductionError(
            f"sequence removed common vertices {sorted(removed & common_vertices)}"
        )

    m_bound = depth_m(mu(Geometry.EUCLIDEAN, n), lam, inj)
    bound = total_bound(n, p, q, m_bound if n <= 4 else depth_mprime(m_bound, n))
    if len(full) >= bound:
        raise ReductionError(f"sequence length {len(full)} reached the bound {bound}")

    if verify:
        replay_verified(start, full, expect=end)

    return RelateResult(
        sequence=full,
        start=start,
        end=end,
        trace1=trace1,
        trace2=trace2,
        common=common,
        common_vertices=common_vertices,
        pre_subdivision_depth=m_geo,
        escalation_layers=layers,
        bound_m=m_bound,
        bound_value=bound,
        notes=notes,
    )
