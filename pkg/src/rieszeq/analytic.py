"""Closed-form equilibrium measures and the constants that go with them.

All radial laws in this module are power laws for the norm |x|: a law with
exponent ``e`` on [0, R] has norm density (e+1) r^e / R^(e+1).
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, RegimeError, UnsupportedRegimeError
from .kernels import ExternalField, RieszParams, Verdict, admissibility, coulomb_constant, sphere_area
from .quadrature import integrate
from .specfun import digamma, double_factorial

POINT_MASS = "PointMass"
SPHERE = "SphereUniform"
MIXTURE = "Mixture"
BALL = "BallLaw"
ULLMAN = "Ullman"
NON_EXISTENT = "NonExistent"
UNKNOWN = "Unknown"

SUPPORTED_VARIANTS = (POINT_MASS, SPHERE, MIXTURE, BALL, ULLMAN)


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Tagged union of the equilibrium measures the library can name.

    ``beta`` is the mass of the absolutely continuous part (Mixture only; it
    is 1 for BallLaw).  ``radial_exponent`` is the exponent of its norm
    density.  ``parameters`` records (d, s, gamma, alpha) for serialization.
    """

    variant: str
    R: float = None
    beta: float = None
    radial_exponent: float = None
    alpha: float = None
    provenance: str = ""
    parameters: dict = field(default_factory=dict)

    @property
    def supported(self):
        return self.variant in SUPPORTED_VARIANTS

    @property
    def atom_fraction(self):
        """Mass carried by the uniform sphere of radius R."""
        if self.variant == SPHERE:
            return 1.0
        if self.variant == MIXTURE:
            return 1.0 - self.beta
        return 0.0

    def radial_density(self, r):
        """Norm density of the continuous part, normalized to 1 on [0, R]."""
        if self.radial_exponent is None:
            raise RegimeError(f"{self.variant} has no continuous radial part")
        r = np.asarray(r, dtype=float)
        a = self.radial_exponent + 1.0
        inside = (r >= 0) & (r <= self.R)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inside, a * np.abs(r) ** (a - 1.0) / self.R ** a, 0.0)
        return out

    def spatial_density(self, r, d):
        """Density with respect to Lebesgue measure on R^d, including beta."""
        weight = self.beta if self.variant == MIXTURE else 1.0
        r = np.asarray(r, dtype=float)
        return weight * self.radial_density(r) / (sphere_area(d) * r ** (d - 1))

    def to_dict(self):
        out = asdict(self)
        return {
            "variant": out.pop("variant"),
            "parameters": {k: v for k, v in out.items()
                           if k not in ("provenance", "parameters") and v is not None}
                          | dict(self.parameters),
            "provenance": self.provenance,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        params = dict(data.get("parameters", {}))
        core = {k: params.pop(k) for k in ("R", "beta", "radial_exponent") if k in params}
        if data["variant"] in SUPPORTED_VARIANTS and data["variant"] != POINT_MASS:
            core["alpha"] = params.get("alpha")
        return cls(variant=data["variant"], provenance=data.get("provenance", ""),
                   parameters=params, **core)


def _record(params, fld):
    return {"d": params.d, "s": params.s, "gamma": fld.gamma, "alpha": fld.alpha}


def _is_s_plus_four(params):
    return (params.s >= 0 and params.d == params.s + 4) or (params.d == 3 and params.s == -1)


# --------------------------------------------------------------------------
# radii and constants
# --------------------------------------------------------------------------

def sphere_radius(params, fld):
    """Radius of the uniform sphere law minimizing the energy among spheres.

    s > 0 (d = s + 4): (2s/((s+4) gamma alpha))^(1/(alpha+s));
    s = 0 (any d >= 4): (1/(2 gamma alpha))^(1/alpha);
    (d, s) = (3, -1): (2/(3 gamma alpha))^(1/(alpha-1)).
    """
    s, d, g, a = params.s, params.d, fld.gamma, fld.alpha
    if a < 2:
        raise RegimeError("the sphere law needs alpha >= 2")
    if s == 0 and d >= 4:
        return (1.0 / (2.0 * g * a)) ** (1.0 / a)
    if s > 0 and d == s + 4:
        return (2.0 * s / ((s + 4.0) * g * a)) ** (1.0 / (a + s))
    if d == 3 and s == -1:
        return (2.0 / (3.0 * g * a)) ** (1.0 / (a - 1.0))
    raise RegimeError(f"no sphere-radius formula for (d, s) = ({d}, {s})")


def ball_radius(params, fld):
    """Outer radius of the ball-plus-sphere mixture: gamma alpha R^(alpha+s) = 2|s|/(alpha+s+2)."""
    s, g, a = params.s, fld.gamma, fld.alpha
    return (2.0 * params.kappa / ((a + s + 2.0) * g * a)) ** (1.0 / (a + s))


def ball_mixture(params, fld):
    """Mixture beta * (radial power law on the ball) + (1 - beta) * sphere."""
    s, d, a = params.s, params.d, fld.alpha
    if not _is_s_plus_four(params):
        raise RegimeError("the mixture law needs d = s + 4 (s >= 0) or (d, s) = (3, -1)")
    lower = 1.0 if s == -1 else 0.0
    if not lower < a < 2:
        raise RegimeError(f"the mixture law needs {lower:g} < alpha < 2")
    return EquilibriumMeasure(
        MIXTURE, R=ball_radius(params, fld), beta=(2.0 - a) / (s + 2.0),
        radial_exponent=a + s - 1.0, alpha=a,
        provenance="ball-plus-sphere mixture, d = s + 4" if s >= 0 else "mixture, d = 3, s = -1",
        parameters=_record(params, fld))


def wiener_constant(d, s):
    """Energy of the uniform measure on the unit sphere S^(d-1) for K_s."""
    valid = (-2 < s < 0 and d >= 2) or (0 < s < d - 1 and d >= 4) or (s == 0 and d >= 4)
    if not valid:
        raise RegimeError(f"Wiener constant formula not available for (d, s) = ({d}, {s})")
    if s == 0:
        return -math.log(2.0) + 0.5 * (digamma(d - 1.0) - digamma((d - 1.0) / 2.0))
    lg = math.lgamma
    value = math.exp(lg(d / 2) + lg(d - 1 - s) - lg((d - s) / 2) - lg(d - 1 - s / 2))
    return math.copysign(value, s)


def sphere_energy(params, fld, R):
    """Energy I(sigma_R) of the uniform sphere law of radius R."""
    if not R > 0:
        raise DomainError("radius must be positive")
    w = wiener_constant(params.d, params.s)
    field_part = 2.0 * fld.gamma * R ** fld.alpha
    if params.s == 0:
        return -math.log(R) + w + field_part
    return w / R ** params.s + field_part


def ms_ball_radius(d, s, alpha, gamma=1.0):
    """Ball radius from the Mhaskar-Saff functional when the support is a ball."""
    if not (s > 0 and d - 2 <= s < d):
        raise RegimeError("ball radius formula needs d - 2 <= s < d and s > 0")
    lg = math.lgamma
    base = s / (gamma * alpha) * math.exp(lg((d - s) / 2) + lg((alpha + 2 + s) / 2)
                                          - lg((alpha + d) / 2))
    return base ** (1.0 / (alpha + s))


def ullman_radius(alpha, gamma=1.0):
    """Half-width of the support of the Ullman law on the line."""
    lg = math.lgamma
    base = math.sqrt(math.pi) / alpha * math.exp(lg((alpha + 2) / 2) - lg((alpha + 1) / 2))
    return (base / gamma) ** (1.0 / alpha)


def _ullman_density_scalar(alpha, x, R):
    ax = abs(x)
    if ax >= R:
        return 0.0
    if ax == 0.0:
        if alpha <= 1.0:
            return math.inf
        return alpha / (math.pi * R ** alpha) * R ** (alpha - 1.0) / (alpha - 1.0)
    # t = |x| cosh(u) absorbs the inverse square root at t = |x|
    upper = math.acosh(R / ax)

    def integrand(u):
        return (ax * np.cosh(u)) ** (alpha - 1.0)

    inner = integrate(integrand, 0.0, upper, tol=1e-12)
    return alpha / (math.pi * R ** alpha) * inner


def ullman_density(alpha, x, gamma=1.0):
    """Density of the one-dimensional log-kernel equilibrium law for gamma |x|^alpha."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    R = ullman_radius(alpha, gamma)
    x = np.asarray(x, dtype=float)
    out = np.array([_ullman_density_scalar(alpha, float(v), R) for v in x.ravel()])
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def ullman_measure(fld):
    return EquilibriumMeasure(ULLMAN, R=ullman_radius(fld.alpha, fld.gamma), alpha=fld.alpha,
                              provenance="Ullman law, d = 1, s = 0",
                              parameters={"d": 1, "s": 0.0, "gamma": fld.gamma,
                                          "alpha": fld.alpha})


def coulomb_ball_law(d, alpha, gamma=1.0):
    """Equilibrium law for the Coulomb kernel (s = d - 2, or s = 0 when d = 2).

    The measure is Delta V / c_d on a ball; its norm density is a power law.
    """
    if d < 2:
        raise RegimeError("Coulomb ball laws need d >= 2")
    if d == 2:
        R = (1.0 / (gamma * alpha)) ** (1.0 / alpha)
        exponent = alpha - 1.0
        s = 0.0
    else:
        R = ((d - 2.0) / (gamma * alpha)) ** (1.0 / (alpha + d - 2.0))
        exponent = alpha + d - 3.0
        s = d - 2.0
    return EquilibriumMeasure(BALL, R=R, beta=1.0, radial_exponent=exponent, alpha=alpha,
                              provenance="Coulomb ball law",
                              parameters={"d": d, "s": s, "gamma": gamma, "alpha": alpha})


def iterated_coulomb_constant(d, n):
    """C_{d,n} = (-1)^(n-1) (d-4)!! (2n-2)!! / (d-2n-2)!!."""
    if n < 1 or d - 2 * n <= -2:
        raise RegimeError("need n >= 1 and s = d - 2n > -2")
    sign = -1 if (n - 1) % 2 else 1
    return sign * double_factorial(d - 4) * double_factorial(2 * n - 2) / double_factorial(d - 2 * n - 2)


def iterated_interior_density(d, n, fld, r):
    """Delta^n V / (c_d C_{d,n}) at radius r (s = d - 2n).

    Negative values mean the interior carries no mass.
    """
    if fld.p != 2.0:
        raise UnsupportedRegimeError("iterated Laplacian only for the Euclidean field")
    const = iterated_coulomb_constant(d, n)
    coef, power = fld.gamma, fld.alpha
    for _ in range(n):
        coef *= power * (power + d - 2.0)
        power -= 2.0
    r = np.asarray(r, dtype=float)
    return coef * r ** power / (coulomb_constant(d) * const)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def solve_equilibrium(params, fld):
    """Name the equilibrium measure for (d, s, gamma, alpha) when it is known."""
    if fld.p != 2.0:
        raise UnsupportedRegimeError("closed forms are only known for the Euclidean field")
    verdict = admissibility(params, fld).verdict
    record = _record(params, fld)
    if verdict is Verdict.DEGENERATE_POINT_MASS:
        return EquilibriumMeasure(POINT_MASS, provenance="alpha = -s, gamma >= 1",
                                  parameters=record)
    if verdict is Verdict.NON_EXISTENT:
        return EquilibriumMeasure(NON_EXISTENT, provenance="field too weak", parameters=record)
    d, s, a = params.d, params.s, fld.alpha
    if _is_s_plus_four(params) or (s == 0 and d >= 4 and a >= 2):
        if a >= 2:
            return EquilibriumMeasure(SPHERE, R=sphere_radius(params, fld), alpha=a,
                                      provenance="condensation on a sphere, alpha >= 2",
                                      parameters=record)
        return ball_mixture(params, fld)
    if d >= 3 and s == d - 2:
        return coulomb_ball_law(d, a, fld.gamma)
    if d == 2 and s == 0:
        return coulomb_ball_law(2, a, fld.gamma)
    if d == 1 and s == 0:
        return ullman_measure(fld)
    return EquilibriumMeasure(UNKNOWN, provenance="no closed form in this regime",
                              parameters=record)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def _directions(rng, n, d):
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; redraw defensively
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


def sample(measure, d, n, seed):
    """Draw ``n`` i.i.d. points of R^d from ``measure`` (reproducible in ``seed``)."""
    if not measure.supported:
        raise RegimeError(f"cannot sample from {measure.variant}")
    if n < 0:
        raise DomainError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    if measure.variant == POINT_MASS:
        return np.zeros((n, d))
    if measure.variant == ULLMAN:
        if d != 1:
            raise RegimeError("the Ullman law lives on the line")
        # arcsine law on [-t, t] mixed over t with density alpha t^(alpha-1) / R^alpha
        t = measure.R * rng.random(n) ** (1.0 / measure.alpha)
        return (t * np.cos(math.pi * rng.random(n)))[:, None]
    directions = _directions(rng, n, d)
    if measure.variant == SPHERE:
        norms = np.full(n, measure.R)
    else:
        a = measure.radial_exponent + 1.0
        u = rng.random(n)
        norms = measure.R * rng.random(n) ** (1.0 / a)
        if measure.variant == MIXTURE:
            norms = np.where(u < measure.beta, norms, measure.R)
    return directions * norms[:, None]


def default_params(d, s, gamma, alpha, p=2.0):
    """Convenience constructor for the (params, field) pair."""
    return RieszParams(d, s), ExternalField(gamma, alpha, p)
