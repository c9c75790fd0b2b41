"""Modified potentials phi = U^mu + V along a ray and Frostman checks.

Everything is expressed in the radial coordinate lambda = |x| / R, where R
is the outer radius of the candidate measure.  For a shell of radius r R the
squared distance to the point lambda R x is written as
(lambda - r)^2 + 4 lambda r sin^2(theta/2) (in units of R^2), which avoids
cancellation when lambda is close to r.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic
from .errors import DomainError, RegimeError
from .kernels import ExternalField, RieszParams
from .quadrature import GradedAngleRule, SingularitySpec, funk_hecke_theta, integrate
from .specfun import chebyshev_u, elliptic_k_array, gegenbauer, hyp2f1_value

PHI_TOL = 1e-12
FROSTMAN_TOL = 1e-7

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
SERIES = "series"

# closed-form branches of sphere_phi_prime
HYPERGEOMETRIC = "hypergeometric"
TRIGONOMETRIC = "trigonometric"
GEGENBAUER = "gegenbauer"
RATIONAL = "rational"
GENERIC = "generic_hypergeometric"
BRANCHES = (HYPERGEOMETRIC, TRIGONOMETRIC, GEGENBAUER, RATIONAL, GENERIC)


@dataclass(frozen=True)
class PhiEvaluation:
    """phi (and possibly phi') at one radial coordinate."""

    lam: float
    value: float = None
    derivative: float = None
    method: str = QUADRATURE
    branch: str = ""

    def to_dict(self):
        return {"lambda": self.lam, "phi": self.value, "phi_prime": self.derivative,
                "method": self.method, "branch": self.branch}


@dataclass
class FrostmanReport:
    constant_c: float
    on_support_max_dev: float
    off_support_min_margin: float
    grid: dict
    verdict: str
    tol: float = FROSTMAN_TOL
    evaluations: list = field(default_factory=list, repr=False)

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self, include_evaluations=False):
        out = asdict(self)
        out.pop("evaluations")
        if include_evaluations:
            out["evaluations"] = [e.to_dict() for e in self.evaluations]
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _check_lambda(lam, positive=False):
    lam = float(lam)
    if lam < 0 or (positive and lam == 0):
        raise DomainError(f"lambda must be {'positive' if positive else 'nonnegative'}")
    return lam


# --------------------------------------------------------------------------
# kernel averages over a shell
# --------------------------------------------------------------------------

def _shell_kernel(s, sq):
    """K_s as a function of the squared distance."""
    if s == 0:
        return -0.5 * np.log(sq)
    return np.sign(s) * sq ** (-0.5 * s)


def _distance_sq(lam, r, theta):
    return (lam - r) ** 2 + 4.0 * lam * r * np.sin(0.5 * theta) ** 2


def _field_term(fld, R, lam):
    return fld.gamma * (lam * R) ** fld.alpha


def _field_slope(fld, R, lam):
    a = fld.alpha
    if lam == 0:
        return 0.0 if a > 1 else (fld.gamma * R if a == 1 else math.inf)
    return fld.gamma * a * R ** a * lam ** (a - 1.0)


def unit_sphere_potential(params, lam, tol=PHI_TOL):
    """Potential of the uniform law on the unit sphere at distance lam from its centre."""
    s, d = params.s, params.d

    def h(theta):
        return _shell_kernel(s, _distance_sq(lam, 1.0, theta))

    return funk_hecke_theta(h, d, SingularitySpec.logarithmic([0.0]), tol)


def sphere_phi(params, fld, R, lam, tol=PHI_TOL):
    """phi for the uniform sphere law of radius R, by Funk-Hecke quadrature."""
    lam = _check_lambda(lam)
    if params.d < 2:
        raise DomainError("sphere potentials need d >= 2")
    if lam == 1 and params.s >= params.d - 1:
        raise RegimeError("the kernel is not integrable on the sphere")
    pot = unit_sphere_potential(params, lam, tol)
    s = params.s
    scale = -math.log(R) if s == 0 else None
    value = pot + scale if s == 0 else pot * R ** (-s)
    return PhiEvaluation(lam, value + _field_term(fld, R, lam), None, QUADRATURE)


def _sphere_phi_prime_quadrature(params, fld, R, lam, tol=PHI_TOL):
    s, d = params.s, params.d

    def h(theta):
        half = np.sin(0.5 * theta) ** 2
        sq = (lam - 1.0) ** 2 + 4.0 * lam * half
        # lambda - cos(theta) written without cancellation
        return (lam - 1.0 + 2.0 * half) * sq ** (-0.5 * (s + 2.0))

    inner = funk_hecke_theta(h, d, SingularitySpec.logarithmic([0.0]), tol)
    return -params.kappa * R ** (-s) * inner + _field_slope(fld, R, lam)


# --------------------------------------------------------------------------
# closed forms for the sphere
# --------------------------------------------------------------------------

def _zeta(lam):
    """zeta = 4 lam^2 / (1 + lam^2)^2 and 1 - zeta."""
    q = 1.0 + lam * lam
    return 4.0 * lam * lam / (q * q), ((1.0 - lam) * (1.0 + lam) / q) ** 2


def _branch_hypergeometric(params, lam):
    # s = 0, d >= 4
    d = params.d
    z, w = _zeta(lam)
    q = 1.0 + lam * lam
    f = hyp2f1_value(0.5, 1.0, d / 2.0, z, one_minus_z=w)
    return ((1.0 - lam) * (1.0 + lam) / q * f - 1.0) / (2.0 * lam)


def _gegenbauer_rule(ell, n):
    """Gauss rule for the weight (1 - t^2)^(ell - 1/2) by Golub-Welsch."""
    if ell == 1.0:
        j = np.arange(1, n + 1)
        angle = j * math.pi / (n + 1)
        return np.cos(angle), math.pi / (n + 1) * np.sin(angle) ** 2
    k = np.arange(1, n)
    beta = k * (k + 2 * ell - 1) / (4.0 * (k + ell) * (k + ell - 1))
    jac = np.diag(np.sqrt(beta), 1) + np.diag(np.sqrt(beta), -1)
    nodes, vecs = np.linalg.eigh(jac)
    mu0 = math.exp(0.5 * math.log(math.pi) + math.lgamma(ell + 0.5) - math.lgamma(ell + 1.0))
    return nodes, mu0 * vecs[0] ** 2


def _orthogonal_moments(params):
    """Moments A_k, B_k of the expansion of the exact kernel derivative.

    With ell = (s+2)/2 and d = s + 4 + 2m, the generating function
    (1 - 2 lam t + lam^2)^(-ell) = sum C_k^(ell)(t) lam^k reduces the
    Funk-Hecke integral to the finitely many k <= 2m + 1 that are not
    annihilated by orthogonality.  A_k and B_k are the integrals of
    C_k (1-t^2)^m and t C_k (1-t^2)^m against the Gegenbauer weight.
    """
    s, d = params.s, params.d
    m = round((d - 4 - s) / 2)
    ell = (s + 2.0) / 2.0
    t, w = _gegenbauer_rule(ell, 2 * m + 3)
    base = w * (1.0 - t * t) ** m
    kmax = 2 * m + 1
    if s == 0:
        polys = [chebyshev_u(k, t) for k in range(kmax + 1)]
    else:
        polys = [gegenbauer(k, ell, t) for k in range(kmax + 1)]
    A = np.array([np.dot(base, p) for p in polys])
    B = np.array([np.dot(base * t, p) for p in polys])
    return A, B


def _branch_orthogonal(params, lam):
    # d = s + 4 + 2m: Chebyshev U (s = 0) or Gegenbauer sums
    s, d = params.s, params.d
    A, B = _orthogonal_moments(params)
    tau = math.exp(math.lgamma(d / 2) - math.lgamma(0.5) - math.lgamma((d - 1) / 2))
    k = np.arange(A.size)
    if lam <= 1.0:
        total = np.sum(lam ** k * (lam * A - B))
    else:
        rho = 1.0 / lam
        total = np.sum(rho ** (s + 2.0 + k) * (lam * A - B))
    return -params.kappa * tau * total


def _branch_rational(params, lam):
    # (d, s) = (3, -1): kernel -|x|, derivative of the mean distance
    if lam <= 1.0:
        return -2.0 * lam / 3.0
    return -1.0 + 1.0 / (3.0 * lam * lam)


def _branch_generic(params, lam):
    # unit-sphere potential (1 + lam^2)^(-s/2) 2F1(s/4, (s+2)/4; d/2; zeta), differentiated
    s, d = params.s, params.d
    z, w = _zeta(lam)
    q = 1.0 + lam * lam
    g0 = hyp2f1_value(s / 4.0, (s + 2.0) / 4.0, d / 2.0, z, one_minus_z=w)
    g1 = hyp2f1_value(s / 4.0 + 1.0, (s + 6.0) / 4.0, d / 2.0 + 1.0, z, one_minus_z=w)
    flat = (1.0 - lam) * (1.0 + lam)
    if flat == 0.0:
        g1_term = 0.0
    else:
        g1_term = (s + 2.0) * flat / (d * q * q) * g1
    return abs(s) * lam * q ** (-(s + 2.0) / 2.0) * (g1_term - g0)


def available_branches(params):
    """Closed-form branches of sphere_phi_prime valid for (d, s), most specific first."""
    s, d = params.s, params.d
    out = []
    if d == 3 and s == -1:
        out.append(RATIONAL)
    half_m = (d - 4 - s) / 2
    if s == 0 and d >= 4 and abs(half_m - round(half_m)) < 1e-12:
        out.append(TRIGONOMETRIC)
    if s != 0 and half_m >= 0 and abs(half_m - round(half_m)) < 1e-12:
        out.append(GEGENBAUER)
    if s == 0 and d >= 4:
        out.append(HYPERGEOMETRIC)
    if s != 0 and d >= 2 and s < d - 1:
        out.append(GENERIC)
    return out


_BRANCH_FUNCS = {
    HYPERGEOMETRIC: _branch_hypergeometric,
    TRIGONOMETRIC: _branch_orthogonal,
    GEGENBAUER: _branch_orthogonal,
    RATIONAL: _branch_rational,
    GENERIC: _branch_generic,
}


def sphere_phi_prime(params, fld, R, lam, method="auto", tol=PHI_TOL):
    """d phi / d lambda for the uniform sphere law of radius R.

    ``method`` is ``"auto"`` (most specific closed form), one of
    :data:`BRANCHES`, or ``"quadrature"``.
    """
    lam = _check_lambda(lam, positive=True)
    if method == QUADRATURE:
        value = _sphere_phi_prime_quadrature(params, fld, R, lam, tol)
        return PhiEvaluation(lam, None, value, QUADRATURE)
    branches = available_branches(params)
    if method == "auto":
        if not branches:
            value = _sphere_phi_prime_quadrature(params, fld, R, lam, tol)
            return PhiEvaluation(lam, None, value, QUADRATURE)
        method = branches[0]
    if method not in branches:
        raise RegimeError(f"branch {method!r} does not apply to (d, s) = ({params.d}, {params.s})")
    if method == GENERIC and lam == 1.0 and params.d - params.s - 3 <= 0:
        raise RegimeError("the generic form is singular at lambda = 1 for d <= s + 3")
    core = _BRANCH_FUNCS[method](params, lam)
    scale = 1.0 if params.s == 0 else R ** (-params.s)
    value = scale * core + _field_slope(fld, R, lam)
    return PhiEvaluation(lam, None, float(value), CLOSED_FORM, method)


# --------------------------------------------------------------------------
# measures with a continuous radial part
# --------------------------------------------------------------------------

_ANGLE_RULES = {}


def _angle_rule(d):
    if d not in _ANGLE_RULES:
        _ANGLE_RULES[d] = GradedAngleRule(d)
    return _ANGLE_RULES[d]


def _shell_average(params, lam, r):
    """Funk-Hecke average of K_s over shells of radii r (R units, without the R^-s scale)."""
    rule = _angle_rule(params.d)
    r = np.asarray(r, dtype=float)
    half = np.sin(0.5 * rule.theta) ** 2
    sq = (lam - r[:, None]) ** 2 + 4.0 * lam * r[:, None] * half[None, :]
    return _shell_kernel(params.s, sq) @ rule.weights


def _continuous_part(measure):
    if measure.variant == analytic.MIXTURE:
        return measure.beta, measure.radial_exponent + 1.0
    if measure.variant == analytic.BALL:
        return 1.0, measure.radial_exponent + 1.0
    raise RegimeError(f"{measure.variant} has no continuous radial part")


def mixture_phi(measure, params, fld, lam, tol=1e-11):
    """phi for a Mixture or BallLaw measure by nested (radial x Funk-Hecke) quadrature."""
    lam = _check_lambda(lam)
    weight, a = _continuous_part(measure)
    R, s = measure.R, params.s

    def radial(r):
        return a * r ** (a - 1.0) * _shell_average(params, lam, r)

    points = [0.0, 1.0] + ([lam] if 0.0 < lam < 1.0 else [])
    sing = SingularitySpec.algebraic(points, [a - 1.0] + [0.0] * (len(points) - 1))
    ball = integrate(radial, 0.0, 1.0, sing, tol)
    atom = 0.0
    if weight < 1.0:
        atom = float(_shell_average(params, lam, np.array([1.0]))[0])
    pot = weight * ball + (1.0 - weight) * atom
    pot = pot - math.log(R) if s == 0 else pot * R ** (-s)
    return PhiEvaluation(lam, pot + _field_term(fld, R, lam), None, QUADRATURE)


def _mixture_regime(measure, params, fld):
    s, d = params.s, params.d
    if measure.variant != analytic.MIXTURE:
        raise RegimeError("mixture_phi_prime needs a Mixture measure")
    if not ((s >= 0 and d == s + 4) or (d == 3 and s == -1)):
        raise RegimeError("closed-form mixture derivative needs d = s + 4 or (d, s) = (3, -1)")


def mixture_phi_prime(params, fld, lam, measure=None):
    """d phi / d lambda for the ball-plus-sphere mixture, in closed form.

    Inside the unit sphere the shell at radius r contributes
    -2 lam / ((s+4) r) r^-s when r > lam and
    ((s+2)/(s+4)) r^2 lam^(-s-3) - lam^(-s-1) when r < lam (times |s| R^-s);
    integrating against the radial law gives the expression below.  The
    measure defaults to the one produced by :func:`analytic.ball_mixture`.
    """
    lam = _check_lambda(lam, positive=True)
    if measure is None:
        measure = analytic.ball_mixture(params, fld)
    _mixture_regime(measure, params, fld)
    s, R, beta = params.s, measure.R, measure.beta
    a = measure.radial_exponent + 1.0
    c = (s + 2.0) / (s + 4.0)
    inside = min(lam, 1.0)
    # shells with r < min(lam, 1)
    outer = c * a / (a + 2.0) * inside ** (a + 2.0) * lam ** (-s - 3.0) - inside ** a * lam ** (-s - 1.0)
    # shells with lam < r < 1
    inner = 0.0
    if lam < 1.0:
        e = a - s - 2.0
        span = -math.log(lam) if e == 0 else (1.0 - lam ** e) / e
        inner = -2.0 * a * lam / (s + 4.0) * span
    if lam < 1.0:
        atom = -2.0 * lam / (s + 4.0)
    else:
        atom = c * lam ** (-s - 3.0) - lam ** (-s - 1.0)
    core = beta * (outer + inner) + (1.0 - beta) * atom
    value = params.kappa * R ** (-s) * core + _field_slope(fld, R, lam)
    return PhiEvaluation(lam, None, float(value), CLOSED_FORM, "mixture")


# --------------------------------------------------------------------------
# Frostman verification
# --------------------------------------------------------------------------

def default_grid(n=400, lam_max=3.0):
    return np.linspace(lam_max / n, lam_max, n)


def _phi_for(measure, params, fld, lam):
    variant = measure.variant
    if variant == analytic.SPHERE:
        value = sphere_phi(params, fld, measure.R, lam).value
        deriv = None
        if lam > 0:
            try:
                deriv = sphere_phi_prime(params, fld, measure.R, lam).derivative
            except (RegimeError, DomainError):
                deriv = None
        return PhiEvaluation(lam, value, deriv, QUADRATURE)
    if variant in (analytic.MIXTURE, analytic.BALL):
        value = mixture_phi(measure, params, fld, lam).value
        deriv = None
        if variant == analytic.MIXTURE and lam > 0:
            try:
                deriv = mixture_phi_prime(params, fld, lam, measure).derivative
            except RegimeError:
                deriv = None
        return PhiEvaluation(lam, value, deriv, QUADRATURE)
    raise RegimeError(f"no potential for {variant}")


def _point_mass_phi(params, fld, lam):
    # delta_0 with alpha = -s: phi(lam) = -lam^-s + gamma lam^alpha = (gamma - 1) lam^alpha
    s, a, g = params.s, fld.alpha, fld.gamma
    value = -(lam ** (-s)) + g * lam ** a
    deriv = s * lam ** (-s - 1.0) + g * a * lam ** (a - 1.0) if lam > 0 else None
    return PhiEvaluation(lam, value, deriv, CLOSED_FORM, "point_mass")


def frostman_verify(measure, params, fld, grid=None, tol=FROSTMAN_TOL):
    """Check U^mu + V = c on the support and >= c off it, on a lambda grid.

    c is phi(1) for a sphere, phi(0) for the point mass and the mean of phi
    over the on-support grid points for measures with a continuous part.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("empty grid")
    if np.any(grid < 0):
        raise DomainError("grid must be nonnegative")
    variant = measure.variant
    if variant == analytic.POINT_MASS:
        evals = [_point_mass_phi(params, fld, float(x)) for x in grid]
        c = _point_mass_phi(params, fld, 0.0).value
        on = np.array([abs(c - c)])
        off = np.array([e.value - c for e in evals if e.lam > 0])
    elif variant == analytic.SPHERE:
        evals = [_phi_for(measure, params, fld, float(x)) for x in grid]
        support = _phi_for(measure, params, fld, 1.0)
        c = support.value
        on_vals = [support.value] + [e.value for e in evals if e.lam == 1.0]
        on = np.abs(np.array(on_vals) - c)
        off = np.array([e.value - c for e in evals if e.lam != 1.0])
    elif variant in (analytic.MIXTURE, analytic.BALL):
        evals = [_phi_for(measure, params, fld, float(x)) for x in grid]
        lams = np.array([e.lam for e in evals])
        vals = np.array([e.value for e in evals])
        if not np.any(lams <= 1.0):
            evals.append(_phi_for(measure, params, fld, 1.0))
            lams = np.append(lams, 1.0)
            vals = np.append(vals, evals[-1].value)
        inside = lams <= 1.0
        c = float(np.mean(vals[inside]))
        on = np.abs(vals[inside] - c)
        off = vals[~inside] - c
    else:
        raise RegimeError(f"Frostman verification not available for {variant}")
    dev = float(np.max(on)) if on.size else 0.0
    margin = float(np.min(off)) if off.size else math.inf
    verdict = "pass" if dev <= tol and margin >= -tol else "fail"
    desc = {"n": int(grid.size), "min": float(grid.min()), "max": float(grid.max()),
            "units": "lambda = |x| / R"}
    return FrostmanReport(float(c), dev, margin, desc, verdict, tol, evals)


# --------------------------------------------------------------------------
# integral identity for s = d - 1
# --------------------------------------------------------------------------

def sd1_integrand(d, lam):
    """Integrand of the s = d - 1 ball identity on r in [0, 1]."""
    a = (d - 1.0) / 2.0

    def f(r):
        r = np.asarray(r, dtype=float)
        total = lam + r
        z = 4.0 * lam * r / (total * total)
        w = ((lam - r) / total) ** 2
        if d == 2:
            hyp = 2.0 / math.pi * elliptic_k_array(z, one_minus_m=w)
        else:
            hyp = hyp2f1_value(a, a, d - 1.0, z, one_minus_z=w)
        with np.errstate(invalid="ignore"):
            ratio = np.where(total > 0, r / total, 1.0)
        return ratio ** (d - 1) * hyp * np.sqrt((1.0 - r) * (1.0 + r))

    return f


def sd1_identity_residual(d, lam, tol=1e-11):
    """|LHS - RHS| of the s = d - 1 integral identity at lambda in [0, 1]."""
    if not 2 <= int(d) <= 12 or int(d) != d:
        raise DomainError("identity implemented for integer 2 <= d <= 12")
    if not 0.0 <= lam <= 1.0:
        raise DomainError("lambda must lie in [0, 1]")
    d = int(d)
    sing = SingularitySpec.algebraic([1.0], [0.5])
    if 0.0 < lam:
        sing = sing.merged(SingularitySpec.logarithmic([lam]))
    lhs = integrate(sd1_integrand(d, lam), 0.0, 1.0, sing, tol)
    rhs = math.pi / 4.0 * (1.0 - (d - 1.0) / d * lam * lam)
    return abs(lhs - rhs)


def sphere_measure(params, fld, R=None):
    """Uniform sphere law with the given (or the optimal) radius."""
    if R is None:
        R = analytic.sphere_radius(params, fld)
    return analytic.EquilibriumMeasure(analytic.SPHERE, R=R, alpha=fld.alpha,
                                       provenance="uniform sphere law",
                                       parameters={"d": params.d, "s": params.s,
                                                   "gamma": fld.gamma, "alpha": fld.alpha})


__all__ = [
    "PhiEvaluation", "FrostmanReport", "sphere_phi", "sphere_phi_prime", "mixture_phi",
    "mixture_phi_prime", "frostman_verify", "sd1_identity_residual", "available_branches",
    "BRANCHES", "RieszParams", "ExternalField",
]
