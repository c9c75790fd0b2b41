"""Riesz kernels, power-law external fields and admissibility of parameters."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, SingularityError, UnsupportedRegimeError


@dataclass(frozen=True)
class RieszParams:
    """Dimension ``d`` and Riesz exponent ``s`` (requires s > -2)."""

    d: int
    s: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be an integer >= 1, got {self.d!r}")
        if not self.s > -2:
            raise UnsupportedRegimeError(f"s = {self.s} <= -2 is outside the supported regime")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "s", float(self.s))

    @property
    def sign(self):
        return float(np.sign(self.s))

    @property
    def kappa(self):
        """|s|, or 1 for the logarithmic kernel."""
        return abs(self.s) if self.s != 0 else 1.0


@dataclass(frozen=True)
class ExternalField:
    """V(x) = gamma * |x|_p ** alpha."""

    gamma: float
    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not self.p >= 1:
            raise DomainError("norm index p must be >= 1")
        for name in ("gamma", "alpha", "p"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def radial(self, r):
        """Field as a function of the Euclidean norm (p = 2 only)."""
        return self.gamma * np.asarray(r, dtype=float) ** self.alpha


class Verdict(str, Enum):
    ADMISSIBLE = "Admissible"
    DEGENERATE_POINT_MASS = "DegeneratePointMass"
    NON_EXISTENT = "NonExistent"


@dataclass(frozen=True)
class Admissibility:
    verdict: Verdict
    reason: str = ""


def riesz_kernel(params, r):
    """K_s(r) = sign(s) r^-s, and -log r for s = 0.  Vectorized in ``r``."""
    s = params.s
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("distance must be nonnegative")
    if s >= 0 and np.any(r == 0):
        raise SingularityError("kernel is singular at r = 0 for s >= 0")
    if s == 0:
        out = -np.log(r)
    else:
        with np.errstate(divide="ignore"):
            out = np.sign(s) * r ** (-s)
        if s < 0:
            out = np.where(r == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def riesz_kernel_gradient(params, diff):
    """Gradient of x -> K_s(|x|) at ``diff``: -|s| x / |x|^(s+2) (s = 0: -x/|x|^2).

    ``diff`` may be a single vector or an array whose last axis is the
    coordinate axis.
    """
    diff = np.asarray(diff, dtype=float)
    r2 = np.sum(diff * diff, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise SingularityError("kernel gradient undefined at the origin")
    return -params.kappa * diff * r2 ** (-(params.s + 2) / 2)


def field_value(field, x):
    """V at a point (or at each row of an N x d array)."""
    x = np.asarray(x, dtype=float)
    if field.p == 2.0:
        norm = np.sqrt(np.sum(x * x, axis=-1))
    else:
        norm = np.sum(np.abs(x) ** field.p, axis=-1) ** (1.0 / field.p)
    out = field.gamma * norm ** field.alpha
    return float(out) if np.ndim(out) == 0 else out


def _nondifferentiable(field, x, norm):
    """Rows at which V has no gradient."""
    at_origin = (norm == 0) & (field.alpha <= 1.0)
    if field.p == 1.0:
        at_origin = at_origin | np.any(x == 0, axis=-1)
    return at_origin


def field_gradient(field, x, with_flag=False):
    """Gradient of V: gamma alpha |x|_p^(alpha-p) |x_i|^(p-1) sign(x_i).

    At non-differentiable points the zero subgradient is returned; with
    ``with_flag=True`` the result is ``(gradient, flag)`` where ``flag`` marks
    those points.
    """
    x = np.asarray(x, dtype=float)
    a, p = field.alpha, field.p
    if p == 2.0:
        norm = np.sqrt(np.sum(x * x, axis=-1, keepdims=True))
        core = x
        power = a - 2.0
    else:
        norm = np.sum(np.abs(x) ** p, axis=-1, keepdims=True) ** (1.0 / p)
        core = np.abs(x) ** (p - 1.0) * np.sign(x)
        power = a - p
    flag = _nondifferentiable(field, x, norm[..., 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norm > 0, norm ** power, 0.0)
    grad = field.gamma * a * scale * core
    grad = np.where(np.asarray(flag)[..., None], 0.0, grad)
    grad = np.nan_to_num(grad, nan=0.0)
    if with_flag:
        return grad, flag
    return grad


def admissibility(params, field):
    """Classify (s, alpha, gamma) for the Euclidean field."""
    if field.p != 2.0:
        raise UnsupportedRegimeError("admissibility is only classified for p = 2")
    s, a, g = params.s, field.alpha, field.gamma
    if s >= 0:
        return Admissibility(Verdict.ADMISSIBLE, "s >= 0: the field dominates the kernel")
    if a > -s:
        return Admissibility(Verdict.ADMISSIBLE, "alpha > -s")
    if a == -s and g >= 1:
        return Admissibility(Verdict.DEGENERATE_POINT_MASS, "alpha = -s and gamma >= 1")
    return Admissibility(Verdict.NON_EXISTENT, "field too weak to confine the measure")


def sphere_area(d):
    """Surface area of the unit sphere S^(d-1) in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def coulomb_constant(d):
    """c_d with Delta K_(d-2) = -c_d delta_0: 2 pi for d = 2, (d-2)|S^(d-1)| otherwise."""
    if int(d) != d or d < 1:
        raise DomainError("dimension must be an integer >= 1")
    if d == 2:
        return 2.0 * math.pi
    return abs(d - 2) * sphere_area(d)
