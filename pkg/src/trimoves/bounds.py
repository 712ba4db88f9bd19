"""Exact evaluation of the move-count bounds and radius relations.

Factorial and power expressions are evaluated in exact big-integer
arithmetic.  Transcendentals (ln, cosh, sinh, sin, Gamma) are evaluated at
50 significant digits via mpmath; where a bound direction depends on a
rounding, the rounding is taken conservatively so the reported bound is
never understated.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath as mp

from .geometry import Geometry

DPS = 50
_GUARD = 10  # extra working digits


def _mpf(x) -> mp.mpf:
    with mp.workdps(DPS + _GUARD):
        return mp.mpf(x)


def mu(tag: Geometry, n: int, lam: Optional[float] = None) -> mp.mpf:
    """Subdivision-depth coefficient: n+1, 2n+1, or n cosh^(n-1)(lam) + 1."""
    with mp.workdps(DPS + _GUARD):
        if tag == Geometry.EUCLIDEAN:
            return mp.mpf(n + 1)
        if tag == Geometry.SPHERICAL:
            return mp.mpf(2 * n + 1)
        if lam is None:
            raise ValueError("hyperbolic mu needs the edge bound")
        return n * mp.cosh(lam) ** (n - 1) + 1


def kappa_exact(tag: Geometry, n: int, lam: Optional[float] = None) -> mp.mpf:
    """The diameter contraction factor at 50 digits."""
    with mp.workdps(DPS + _GUARD):
        if tag == Geometry.EUCLIDEAN:
            return mp.mpf(n) / (n + 1)
        if tag == Geometry.SPHERICAL:
            return mp.mpf(2 * n) / (2 * n + 1)
        if lam is None:
            raise ValueError("hyperbolic kappa needs the edge bound")
        c = n * mp.cosh(lam) ** (n - 1)
        return c / (c + 1)


def depth_m(mu_value, lam: float, inj: float) -> int:
    """Smallest positive integer strictly greater than mu ln(lam/inj).

    When the logarithm is non-positive the clamp m >= 1 keeps at least one
    subdivision in the pipeline before strong-convexity checks.
    """
    if lam <= 0 or inj <= 0:
        raise ValueError("lam and inj must be positive")
    with mp.workdps(DPS + _GUARD):
        x = _mpf(mu_value) * mp.log(_mpf(lam) / _mpf(inj))
        # conservative upward guard: a representation error just below an
        # integer must not shrink m below the exact-value answer
        m = int(mp.floor(x + mp.mpf("1e-40"))) + 1
    return max(1, m)


def depth_mprime(m: int, n: int) -> int:
    return max(2 ** (n + 1), m)


def sphere_volume(n: int) -> mp.mpf:
    """Volume of the round unit n-sphere: 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    with mp.workdps(DPS + _GUARD):
        return 2 * mp.pi ** (mp.mpf(n + 1) / 2) / mp.gamma(mp.mpf(n + 1) / 2)


def inj_lower(tag: Geometry, n: int, vol: float, diam: float) -> mp.mpf:
    """Injectivity radius lower bound pi vol / (delta vol(S^n)) with delta
    the (sin/sinh-adjusted) diameter term of the closed-geodesic bound."""
    if vol <= 0 or diam <= 0:
        raise ValueError("vol and diam must be positive")
    with mp.workdps(DPS + _GUARD):
        d = _mpf(diam)
        if tag == Geometry.EUCLIDEAN:
            delta = d
        elif tag == Geometry.SPHERICAL:
            delta = mp.sin(d) ** (n - 1)
        else:
            delta = mp.sinh(d) ** (n - 1)
        return mp.pi * _mpf(vol) / (delta * sphere_volume(n))


def convexity_radius_chain(l_c: Fraction) -> tuple[Fraction, Fraction]:
    """(r, inj) from the shortest closed geodesic: r = inj/2 = l_c/4, exact."""
    l_c = Fraction(l_c)
    if l_c <= 0:
        raise ValueError("geodesic length must be positive")
    inj = l_c / 2
    return inj / 2, inj


def total_bound(n: int, p: int, q: int, mprime: int) -> int:
    """2^n (n+1)!^(4+3m') p q (p+q), exactly."""
    if min(n, p, q, mprime) <= 0:
        raise ValueError("all arguments must be positive")
    return 2**n * math.factorial(n + 1) ** (4 + 3 * mprime) * p * q * (p + q)


def barymoves_bound(n: int, m: int, p: int) -> int:
    """(n+1)!^(2m+2) p^2, exactly."""
    if n <= 0 or m < 0 or p <= 0:
        raise ValueError("need n, p positive and m non-negative")
    return math.factorial(n + 1) ** (2 * m + 2) * p * p


def reduction_sum_bound(n: int, p_vector, s_vector) -> int:
    """sum_{i=1..n} (n-i)! p_{n-i-1} s_i with the convention p_{-1} = 1.

    ``p_vector`` supplies the actual counts (p_0, ..., p_n); ``s_vector``
    supplies (s_0, ..., s_n) of which only s_1..s_n are used.
    """
    p = list(p_vector)
    s = list(s_vector)
    if len(p) != n + 1 or len(s) != n + 1:
        raise ValueError(f"expected vectors of length {n + 1}")

    def pi(i: int) -> int:
        return 1 if i == -1 else p[i]

    return sum(math.factorial(n - i) * pi(n - i - 1) * s[i] for i in range(1, n + 1))


def bridge_sum_bound(n: int, p_vector, s_vector) -> int:
    """sum_{i=1..n} (n-i)! (i+1)!^2 p_{n-i-1} s_i with p_0 := 2, p_{-1} := 1.

    The p_0 = 2 convention is used verbatim (the link of a ridge has exactly
    two vertices); the supplied p_vector entry 0 is ignored here and the
    substitution is reported by the caller rather than silently blended.
    """
    p = list(p_vector)
    s = list(s_vector)
    if len(p) != n + 1 or len(s) != n + 1:
        raise ValueError(f"expected vectors of length {n + 1}")

    def pi(i: int) -> int:
        if i == -1:
            return 1
        if i == 0:
            return 2
        return p[i]

    return sum(
        math.factorial(n - i) * math.factorial(i + 1) ** 2 * pi(n - i - 1) * s[i]
        for i in range(1, n + 1)
    )


def commonsub_bound(n: int, i: int, p_i: int, q_n: int) -> int:
    """(2^n - 1)(n+1)!^2 p_i q_n, exactly."""
    return (2**n - 1) * math.factorial(n + 1) ** 2 * p_i * q_n


W_HYPERBOLIC_3 = "0.9427"  # closed orientable hyperbolic 3-manifold volume floor


def volhyp_m(n: int, p: int, lam: float, *, orientable: bool = True) -> int:
    """Subdivision depth for closed hyperbolic manifolds from universal
    volume bounds, as the smallest qualifying integer.

    n = 3 and orientable uses the w = 0.9427 volume floor (no 2^(n+1) term
    in that branch); even n uses the Gauss-Bonnet variant; any other n > 2
    uses the universal lower volume bound, both under max(2^(n+1), .).
    """
    if n < 2:
        raise ValueError("needs n >= 2")
    if p <= 0 or lam <= 0:
        raise ValueError("p and lam must be positive")
    with mp.workdps(DPS + _GUARD):
        lam_m = _mpf(lam)
        coeff = n * mp.cosh(lam_m) ** (n - 1) + 1
        guard = mp.mpf("1e-40")
        if n == 3 and orientable:
            x = coeff * mp.log(2 * mp.pi * p * lam_m**2 / mp.mpf(W_HYPERBOLIC_3))
            return int(mp.floor(x + guard)) + 1
        if n % 2 == 0:
            x = coeff * mp.log(2 * p * lam_m**2 / mp.pi)
        else:
            x = coeff * mp.log(
                2 * p * lam_m**2 * n * mp.mpf((n + 3) ** n) * mp.pi ** (n * (n - 1))
            )
        return max(2 ** (n + 1), int(mp.floor(x + guard))) + 1


# -- report assembly ----------------------------------------------------------


@dataclass
class ManifoldData:
    """Inputs for the bound calculator; optional fields unlock extra rows."""

    tag: Geometry
    n: int
    lam: float
    p: int
    q: int
    inj: Optional[float] = None
    vol: Optional[float] = None
    diam: Optional[float] = None
    lam_min: Optional[float] = None
    orientable: bool = True

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.q < 1 or self.lam <= 0:
            raise ValueError("dimension, simplex counts and edge bound must be positive")
        if self.tag == Geometry.SPHERICAL and self.lam > math.pi / 2 + 1e-12:
            raise ValueError("spherical inputs require lam <= pi/2")
        for name in ("inj", "vol", "diam", "lam_min"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when present")


@dataclass
class BoundReport:
    """Every bound the calculator can evaluate on the given data.

    Integer-valued formulas are exact integers; real-valued quantities are
    50-digit decimal strings.  ``notes`` records conventions applied
    (clamps, diameter substitutions, p_0 = 2).
    """

    mu: str
    kappa: str
    m: int
    mprime: int
    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "mu": self.mu,
                "kappa": self.kappa,
                "m": self.m,
                "mprime": self.mprime,
                "values": {k: str(v) for k, v in sorted(self.values.items())},
                "notes": self.notes,
            },
            indent=2,
            sort_keys=True,
        )


def _fmt(x: mp.mpf) -> str:
    with mp.workdps(DPS):
        return mp.nstr(mp.mpf(x), DPS)


def compute_report(data: ManifoldData) -> BoundReport:
    notes: list[str] = []
    mu_v = mu(data.tag, data.n, data.lam)
    kap = kappa_exact(data.tag, data.n, data.lam)

    inj = data.inj
    if inj is None and data.vol is not None:
        diam = data.diam
        if diam is None:
            diam = data.p * data.lam
            notes.append("diam substituted by p*lam")
        inj_b = inj_lower(data.tag, data.n, data.vol, diam)
        inj = float(inj_b)
        notes.append("inj from vol/diam lower bound")

    values: dict = {}
    if inj is not None:
        with mp.workdps(DPS + _GUARD):
            x = mu_v * mp.log(_mpf(data.lam) / _mpf(inj))
        m = depth_m(mu_v, data.lam, inj)
        if x < 1:
            notes.append("m clamped to 1 (log term below 1)")
        values["inj_used"] = _fmt(_mpf(inj))
    else:
        m = 1
        notes.append("no injectivity radius available; m defaulted to 1")
    mprime = depth_mprime(m, data.n)

    values["total_bound"] = total_bound(data.n, data.p, data.q, mprime)
    if data.n <= 4:
        values["total_bound_direct"] = total_bound(data.n, data.p, data.q, m)
        notes.append("n <= 4: direct bound with exponent 4+3m also reported")
    values["barymoves_bound"] = barymoves_bound(data.n, m, data.p)
    if data.vol is not None and data.diam is not None:
        values["inj_lower"] = _fmt(inj_lower(data.tag, data.n, data.vol, data.diam))
    if data.tag == Geometry.HYPERBOLIC and data.n >= 2:
        values["volhyp_m"] = volhyp_m(data.n, data.p, data.lam, orientable=data.orientable)
        if data.n == 3 and data.orientable:
            notes.append(f"volhyp_m uses the w = {W_HYPERBOLIC_3} volume floor")

    return BoundReport(_fmt(mu_v), _fmt(kap), m, mprime, values, notes)
