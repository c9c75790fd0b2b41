"""One-dimensional quadrature and the Funk-Hecke reduction.

:func:`integrate` is a vectorized adaptive Gauss-Kronrod integrator: the
interval is first cut at every declared singular point, panels touching a
singular point are graded geometrically toward it, and the panels carrying
the largest error estimates are bisected until the global estimate drops
below ``tol * (1 + |I|)``.

Integrands must accept a 1-D numpy array and return an array of the same
shape (a scalar return is broadcast).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError

DEFAULT_TOL = 1e-10
MAX_DEPTH = 40
GRADING_RATIO = 0.25
GRADING_LEVELS = 30
_MARK_FRACTION = 0.5
_MAX_PANELS = 200_000

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XK_HALF = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
_WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
# Gauss nodes sit at odd positions of the Kronrod node list.
_WG = np.zeros(15)
_WG[1::2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an interpolatory rule on ``domain``."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple = (-1.0, 1.0)

    def scaled(self, a, b):
        """The same rule mapped affinely onto [a, b]."""
        lo, hi = self.domain
        k = (b - a) / (hi - lo)
        return QuadratureRule(a + (self.nodes - lo) * k, self.weights * k, (a, b))

    def apply(self, f):
        values = np.broadcast_to(np.asarray(f(self.nodes), dtype=float), self.nodes.shape)
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class SingularitySpec:
    """Points where the integrand is singular or non-smooth.

    ``kinds`` holds ``"log"`` or ``("algebraic", exponent)`` per location; the
    kind is informational, every declared point becomes a graded breakpoint.
    """

    locations: tuple = ()
    kinds: tuple = ()

    def __post_init__(self):
        if len(self.kinds) not in (0, len(self.locations)):
            raise DomainError("kinds must be empty or match locations")

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def logarithmic(cls, locations):
        locations = tuple(float(x) for x in np.atleast_1d(locations))
        return cls(locations, ("log",) * len(locations))

    @classmethod
    def algebraic(cls, locations, exponents):
        locations = tuple(float(x) for x in np.atleast_1d(locations))
        exponents = np.broadcast_to(np.asarray(exponents, dtype=float), (len(locations),))
        return cls(locations, tuple(("algebraic", float(e)) for e in exponents))

    def merged(self, other):
        return SingularitySpec(self.locations + other.locations,
                               self._kinds_full() + other._kinds_full())

    def _kinds_full(self):
        return self.kinds if self.kinds else ("log",) * len(self.locations)


def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise DomainError("gauss_legendre requires n >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    return QuadratureRule(nodes, weights, (-1.0, 1.0))


def _graded(lo, hi, toward_lo):
    """Geometric panels on [lo, hi] accumulating at one end."""
    h = hi - lo
    floor = 1e3 * np.finfo(float).eps * max(abs(lo), abs(hi))
    cuts = [1.0]
    for k in range(1, GRADING_LEVELS + 1):
        width = h * GRADING_RATIO ** k
        if width <= floor:
            break
        cuts.append(GRADING_RATIO ** k)
    cuts.append(0.0)
    if toward_lo:
        edges = [lo + h * c for c in reversed(cuts)]
    else:
        edges = [hi - h * c for c in cuts]
    edges[0], edges[-1] = lo, hi
    return list(zip(edges[:-1], edges[1:]))


def initial_panels(a, b, sing=None, breakpoints=()):
    """Split [a, b] at declared points and grade toward singular ones."""
    singular = set()
    if sing is not None:
        for x in sing.locations:
            if a - 1e-15 * max(1.0, abs(a)) <= x <= b + 1e-15 * max(1.0, abs(b)):
                singular.add(min(max(float(x), a), b))
    cuts = sorted(singular | {float(x) for x in breakpoints if a < x < b} | {a, b})
    panels = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        left, right = lo in singular, hi in singular
        if left and right:
            mid = 0.5 * (lo + hi)
            panels += _graded(lo, mid, True) + _graded(mid, hi, False)
        elif left:
            panels += _graded(lo, hi, True)
        elif right:
            panels += _graded(lo, hi, False)
        else:
            panels.append((lo, hi))
    return panels


def _evaluate(f, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _XK[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float)
    fx = np.broadcast_to(fx, (x.size,)).reshape(x.shape)
    kron = half * (fx @ _WK)
    gauss = half * (fx @ _WG)
    err = np.abs(kron - gauss)
    bad = ~np.isfinite(kron)
    err[bad] = np.inf
    kron = np.where(bad, 0.0, kron)
    return kron, err


def integrate(f, a, b, sing=None, tol=DEFAULT_TOL, breakpoints=()):
    """Adaptive integral of ``f`` over [a, b].

    Raises :class:`AccuracyError` (carrying the best estimate) if the
    tolerance cannot be met within the depth limit.
    """
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("integrate requires a finite interval")
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, sing, tol, breakpoints)
    panels = initial_panels(a, b, sing, breakpoints)
    lo = np.array([p[0] for p in panels])
    hi = np.array([p[1] for p in panels])
    depth = np.zeros(lo.size, dtype=int)
    val, err = _evaluate(f, lo, hi)
    while True:
        order = np.argsort(lo, kind="stable")
        total = math.fsum(val[order])
        err_total = float(np.sum(err[order]))
        if err_total <= tol * (1.0 + abs(total)):
            return total
        # panels at the floating-point resolution limit cannot be refined
        resolution = 1e4 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))
        splittable = (depth < MAX_DEPTH) & (hi - lo > resolution)
        if not np.any(splittable & (err > 0)) or lo.size > _MAX_PANELS:
            raise AccuracyError(f"integrate: tolerance {tol:g} not met (error {err_total:.3g})",
                                estimate=total, error=err_total)
        # Doerfler marking among the panels that may still be bisected
        cand = np.where(splittable)[0]
        cand = cand[np.argsort(-err[cand], kind="stable")]
        if np.isinf(err_total):
            marked = cand[np.isinf(err[cand])]
        else:
            cum = np.cumsum(err[cand])
            cutoff = int(np.searchsorted(cum, _MARK_FRACTION * err_total)) + 1
            marked = cand[:cutoff]
        if marked.size == 0:
            raise AccuracyError(f"integrate: tolerance {tol:g} not met (error {err_total:.3g})",
                                estimate=total, error=err_total)
        mid = 0.5 * (lo[marked] + hi[marked])
        new_lo = np.concatenate([lo[marked], mid])
        new_hi = np.concatenate([mid, hi[marked]])
        new_depth = np.concatenate([depth[marked], depth[marked]]) + 1
        nv, ne = _evaluate(f, new_lo, new_hi)
        keep = np.ones(lo.size, dtype=bool)
        keep[marked] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def sphere_normalizer(d):
    """tau_{d-1} = Gamma(d/2) / (Gamma(1/2) Gamma((d-1)/2))."""
    if d < 2:
        raise DomainError("Funk-Hecke requires d >= 2")
    return math.exp(math.lgamma(d / 2) - math.lgamma(0.5) - math.lgamma((d - 1) / 2))


def funk_hecke_theta(h, d, theta_sing=None, tol=DEFAULT_TOL):
    """tau_{d-1} * int_0^pi h(theta) sin(theta)^(d-2) dtheta.

    Angle form of :func:`funk_hecke`.  Writing the integral in theta removes
    the (1 - t^2)^((d-3)/2) endpoint weight and lets callers express
    distances without cancellation.
    """
    tau = sphere_normalizer(d)
    power = d - 2

    def integrand(theta):
        return h(theta) * np.sin(theta) ** power

    return tau * integrate(integrand, 0.0, math.pi, theta_sing, tol)


def funk_hecke(g, d, sing=None, tol=DEFAULT_TOL):
    """Average of ``g(x . y)`` over y uniform on the unit sphere S^(d-1).

    Equals tau_{d-1} int_{-1}^{1} g(t) (1 - t^2)^((d-3)/2) dt; computed via
    t = cos(theta).  Singular points of ``g`` are given in the t variable.
    """
    theta_sing = None
    if sing is not None and sing.locations:
        locs = [math.acos(min(1.0, max(-1.0, t))) for t in sing.locations]
        theta_sing = SingularitySpec(tuple(locs), sing._kinds_full())
    return funk_hecke_theta(lambda th: g(np.cos(th)), d, theta_sing, tol)


@dataclass(frozen=True)
class GradedAngleRule:
    """Fixed theta rule on [0, pi] graded toward theta = 0.

    Used where a Funk-Hecke average must be taken for many radii at once
    (nested integrals): the weights already include tau_{d-1} sin^(d-2).
    """

    d: int
    theta: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        nodes, w = np.polynomial.legendre.leggauss(20)
        edges = [0.0] + [math.pi * GRADING_RATIO ** k for k in range(GRADING_LEVELS + 8, -1, -1)]
        th, wt = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            th.append(0.5 * (lo + hi) + half * nodes)
            wt.append(half * w)
        theta = np.concatenate(th)
        weights = np.concatenate(wt) * np.sin(theta) ** (self.d - 2) * sphere_normalizer(self.d)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weights", weights)
