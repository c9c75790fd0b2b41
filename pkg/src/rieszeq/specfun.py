"""Scalar special functions used by the closed-form potentials.

Gamma-type functions, Pochhammer symbols and double factorials, generalized
hypergeometric series, Chebyshev/Gegenbauer polynomials and the complete
elliptic integral of the first kind.  Every routine is pure.

The hypergeometric routines come in two flavours: :func:`hyp2f1` and
:func:`hyp_pfq` take scalars and return a :class:`HypSeriesResult` with
convergence diagnostics; :func:`hyp2f1_value` is the vectorized workhorse used
inside quadrature integrands.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

SERIES_TOL = 1e-15
MAX_TERMS = 10_000
# Beyond this |z| the Gauss series is replaced by a connection formula in 1 - z.
_SERIES_RADIUS = 0.75
_INTEGER_SLACK = 1e-9

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class HypSeriesResult:
    """Value of a hypergeometric evaluation with its convergence record."""

    value: float
    terms_used: int
    converged: bool
    route: str = "series"

    def __float__(self):
        return float(self.value)


# --------------------------------------------------------------------------
# Gamma family
# --------------------------------------------------------------------------

def log_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


# Asymptotic-series coefficients B_2k / (2k) for k = 1..7, Horner order.
_DIGAMMA_ASYMPTOTIC = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)


def _digamma_positive(x):
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # sum_k B_2k / (2k) x**(-2k), signs carried by the table
    series = 0.0
    for coef in reversed(_DIGAMMA_ASYMPTOTIC):
        series = series * inv2 + coef
    series *= inv2
    return shift + math.log(x) - 0.5 / x - series


def digamma(x):
    """Digamma function psi(x) = Gamma'(x) / Gamma(x) for ``x > 0``.

    Upward recurrence to ``x >= 10`` followed by the Stirling asymptotic
    series truncated after the x**-14 term.
    """
    if not x > 0:
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    return _digamma_positive(float(x))


def _digamma_any(x):
    """Digamma on the whole real line minus the poles (reflection formula)."""
    if x > 0:
        return _digamma_positive(x)
    if x == math.floor(x):
        raise DomainError(f"digamma has a pole at {x!r}")
    return _digamma_positive(1.0 - x) - math.pi / math.tan(math.pi * x)


def _is_nonpositive_integer(x):
    return x <= 0 and abs(x - round(x)) < _INTEGER_SLACK


def _rgamma(x):
    """Reciprocal gamma, zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / math.gamma(x)


def pochhammer(z, k):
    """Rising factorial (z)_k = z (z+1) ... (z+k-1), with (z)_0 = 1."""
    if k < 0:
        raise DomainError("pochhammer requires k >= 0")
    out = 1.0
    for i in range(int(k)):
        out *= z + i
    return out


def double_factorial(z):
    """z!! = z (z-2) (z-4) ...; equal to 1 for z <= 0."""
    z = int(z)
    out = 1
    while z > 0:
        out *= z
        z -= 2
    return out


# --------------------------------------------------------------------------
# Hypergeometric series
# --------------------------------------------------------------------------

def _series(a, b, z, tol=SERIES_TOL, max_terms=MAX_TERMS):
    """Direct summation of pFq on an array of arguments.

    Terms are generated by their ratio.  Returns (values, terms_used,
    converged).
    """
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(max_terms):
        num = 1.0
        for ai in a:
            num *= ai + k
        den = float(k + 1)
        for bi in b:
            den *= bi + k
        ratio = (num / den) * z
        term = term * ratio
        total = total + term
        if num == 0.0:
            return total, k + 2, True
        small = np.abs(term) < tol * (1.0 + np.abs(total))
        if np.all(small & (np.abs(ratio) < 1.0)):
            return total, k + 2, True
    return total, max_terms + 1, False


def _levin_u(partial, terms, beta=1.0):
    """Levin u-transform of the partial sums s_0..s_k."""
    k = len(partial) - 1
    num = 0.0
    den = 0.0
    for j in range(k + 1):
        w = (-1) ** j * math.comb(k, j) * ((beta + j) / (beta + k)) ** (k - 2)
        w /= (beta + j) * terms[j]
        num += w * partial[j]
        den += w
    return num / den


def _accelerated_sum(a, b, z, tol=1e-13, max_order=60):
    """Sum a slowly convergent pFq at |z| = 1 by Levin u-acceleration."""
    terms = [1.0]
    partial = [1.0]
    term = 1.0
    previous = None
    best = None
    for k in range(max_order):
        num = 1.0
        for ai in a:
            num *= ai + k
        den = float(k + 1)
        for bi in b:
            den *= bi + k
        term *= num / den * z
        if term == 0.0:
            return partial[-1], k + 1, True
        terms.append(term)
        partial.append(partial[-1] + term)
        if k < 4:
            continue
        estimate = _levin_u(partial, terms)
        if previous is not None:
            gap = abs(estimate - previous)
            if best is None or gap < best[1]:
                best = (estimate, gap, k + 2)
            if gap < tol * max(1.0, abs(estimate)):
                return estimate, k + 2, True
        previous = estimate
    estimate, gap, used = best
    return estimate, used, gap < 1e-9 * max(1.0, abs(estimate))


def _euler_3f2(a, b, z=1.0):
    """3F2(a; b; z) as an Euler integral of 2F1(zt), if some b_j > a_i > 0.

    Levin acceleration loses digits to cancellation on logarithmically
    convergent series, so arguments at or near 1 are reduced one order instead.
    """
    from .quadrature import SingularitySpec, integrate

    for i in range(3):
        for j in range(2):
            ai, bj = a[i], b[j]
            if bj > ai > 0:
                rest_a = [a[k] for k in range(3) if k != i]
                rest_b = b[1 - j]
                sing = SingularitySpec.algebraic([0.0, 1.0], [ai - 1.0, bj - ai - 1.0])

                def integrand(t, ai=ai, bj=bj, rest_a=rest_a, rest_b=rest_b):
                    inner = hyp2f1_value(rest_a[0], rest_a[1], rest_b, z * t)
                    return t ** (ai - 1.0) * (1.0 - t) ** (bj - ai - 1.0) * inner

                scale = math.exp(math.lgamma(bj) - math.lgamma(ai) - math.lgamma(bj - ai))
                return scale * integrate(integrand, 0.0, 1.0, sing, tol=1e-14)
    return None


def hyp_pfq(a, b, z):
    """Generalized hypergeometric function pFq(a; b; z) by direct summation.

    Supports ``p <= 3`` and ``q <= 2``.  For ``p = q + 1`` on the unit circle
    the value at z = 1 comes from the Gauss formula (p = 2) or an Euler
    integral over 2F1 (p = 3); z = -1 uses the Levin u-transform.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    z = float(z)
    if len(a) > 3 or len(b) > 2:
        raise DomainError("hyp_pfq supports p <= 3 and q <= 2")
    for bi in b:
        if _is_nonpositive_integer(bi):
            raise DomainError(f"lower parameter {bi} is a non-positive integer")
    terminating = any(_is_nonpositive_integer(ai) for ai in a)
    if z == 0.0:
        return HypSeriesResult(1.0, 1, True)
    p, q = len(a), len(b)
    if not terminating:
        if p > q + 1:
            raise DomainError("pFq with p > q + 1 diverges for z != 0")
        if p == q + 1:
            if abs(z) > 1.0:
                raise DomainError("pFq with p = q + 1 requires |z| <= 1")
            excess = sum(b) - sum(a)
            if abs(z) == 1.0:
                if (z == 1.0 and excess <= 0) or (z == -1.0 and excess <= -1):
                    raise DomainError("pFq diverges on the unit circle for these parameters")
                if z == 1.0 and p == 2:
                    return HypSeriesResult(_gauss_value(a[0], a[1], b[0]), 1, True, route="gauss")
                if z == 1.0 and p == 3:
                    reduced = _euler_3f2(a, b)
                    if reduced is not None:
                        return HypSeriesResult(reduced, 1, True, route="euler")
                value, used, ok = _accelerated_sum(a, b, z)
                return HypSeriesResult(float(value), used, ok, route="levin")
    value, used, ok = _series(a, b, z)
    if not ok and not terminating and p == q + 1 and 0.0 < z < 1.0:
        # slow algebraic convergence close to z = 1
        if p == 2:
            return HypSeriesResult(hyp2f1_value(a[0], a[1], b[0], z), used, True, route="2f1")
        if p == 3:
            reduced = _euler_3f2(a, b, z)
            if reduced is not None:
                return HypSeriesResult(reduced, used, True, route="euler")
    if not ok:
        raise ConvergenceError("pFq series did not converge", terms_used=used, estimate=float(value))
    return HypSeriesResult(float(value), used, ok)


def _gauss_value(a, b, c):
    m = c - a - b
    return math.gamma(c) * math.gamma(m) * _rgamma(c - a) * _rgamma(c - b)


def _connection_noninteger(a, b, c, w):
    # 2F1 in powers of w = 1 - z, two-term connection formula
    w = np.asarray(w, dtype=float)
    m = c - a - b
    f1, n1, ok1 = _series((a, b), (1.0 - m,), w)
    f2, n2, ok2 = _series((c - a, c - b), (1.0 + m,), w)
    coef1 = math.gamma(c) * math.gamma(m) * _rgamma(c - a) * _rgamma(c - b)
    coef2 = math.gamma(c) * math.gamma(-m) * _rgamma(a) * _rgamma(b)
    return coef1 * f1 + coef2 * w ** m * f2, max(n1, n2), ok1 and ok2


def _connection_logarithmic(a, b, w, tol=SERIES_TOL, max_terms=MAX_TERMS):
    # c = a + b: logarithmic case of the connection formula, in w = 1 - z
    w = np.asarray(w, dtype=float)
    logw = np.log(w)
    prefactor = math.gamma(a + b) * _rgamma(a) * _rgamma(b)
    coef = 1.0
    h = 2.0 * _digamma_any(1.0) - _digamma_any(a) - _digamma_any(b)
    total = coef * (h - logw)
    wn = np.ones_like(w)
    for n in range(1, max_terms):
        coef *= (a + n - 1) * (b + n - 1) / (n * n)
        h += 2.0 / n - 1.0 / (a + n - 1) - 1.0 / (b + n - 1)
        wn = wn * w
        term = coef * (h - logw) * wn
        total = total + term
        if np.all(np.abs(term) < tol * (1.0 + np.abs(total))) and np.all(w < 1.0):
            return prefactor * total, n + 1, True
    return prefactor * total, max_terms, False


def _euler_integral(a, b, c, z):
    """Euler integral representation, valid when c > b > 0 (or c > a > 0)."""
    from .quadrature import SingularitySpec, integrate

    if c > b > 0:
        aa, bb = a, b
    elif c > a > 0:
        aa, bb = b, a
    else:
        raise ConvergenceError("no Euler integral representation: need c > b > 0")
    sing = SingularitySpec.algebraic([0.0, 1.0], [bb - 1.0, c - bb - 1.0])

    def integrand(u):
        return u ** (bb - 1.0) * (1.0 - u) ** (c - bb - 1.0) * (1.0 - z * u) ** (-aa)

    value = integrate(integrand, 0.0, 1.0, sing, tol=1e-13)
    scale = math.exp(math.lgamma(c) - math.lgamma(bb) - math.lgamma(c - bb))
    return scale * value


def _hyp2f1_scalar(a, b, c, z):
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined: c = {c} is a non-positive integer")
    if z > 1.0:
        raise DomainError("2F1 is only evaluated for z <= 1")
    if z == 0.0:
        return HypSeriesResult(1.0, 1, True)
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        value, used, ok = _series((a, b), (c,), z)
        return HypSeriesResult(float(value), used, ok)
    m = c - a - b
    if z == 1.0:
        if m <= 0:
            raise DomainError("2F1(a,b;c;1) diverges unless c - a - b > 0")
        return HypSeriesResult(_gauss_value(a, b, c), 1, True, route="gauss")
    if z < -0.5:
        # Pfaff transformation onto (1/3, 1)
        inner = _hyp2f1_scalar(a, c - b, c, z / (z - 1.0))
        return HypSeriesResult((1.0 - z) ** (-a) * inner.value, inner.terms_used,
                               inner.converged, route="pfaff+" + inner.route)
    if z <= _SERIES_RADIUS:
        value, used, ok = _series((a, b), (c,), z)
        if not ok:
            raise ConvergenceError("2F1 series did not converge", terms_used=used,
                                   estimate=float(value))
        return HypSeriesResult(float(value), used, ok)
    nearest = round(m)
    if abs(m - nearest) > _INTEGER_SLACK:
        value, used, ok = _connection_noninteger(a, b, c, 1.0 - z)
        return HypSeriesResult(float(value), used, ok, route="connection")
    if nearest == 0:
        value, used, ok = _connection_logarithmic(a, b, 1.0 - z)
        return HypSeriesResult(float(value), used, ok, route="connection-log")
    value, used, ok = _series((a, b), (c,), z)
    if ok:
        return HypSeriesResult(float(value), used, ok)
    try:
        return HypSeriesResult(_euler_integral(a, b, c, z), used, True, route="euler")
    except ConvergenceError as exc:
        raise ConvergenceError(f"2F1 series stalled near z=1 and {exc}", terms_used=used,
                               estimate=float(value)) from None


def hyp2f1(a, b, c, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 1.

    Routes: the Gauss series for |z| <= 0.75; Pfaff's transformation for
    z < -1/2; for 0.75 < z < 1 the connection formula in 1 - z (with its
    logarithmic form when c = a + b), or, when c - a - b is a nonzero integer,
    the Gauss series followed by the Euler integral if the series stalls; the
    closed Gauss value at z = 1.
    """
    return _hyp2f1_scalar(float(a), float(b), float(c), float(z))


def hyp2f1_value(a, b, c, z, one_minus_z=None):
    """Vectorized 2F1 returning plain floats; ``inf`` where it diverges at z = 1.

    Near z = 1 the connection formulas work in w = 1 - z; callers that know w
    more accurately than z can pass it as ``one_minus_z``.
    """
    a, b, c = float(a), float(b), float(c)
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if one_minus_z is None:
        w = 1.0 - z
    else:
        w = np.atleast_1d(np.asarray(one_minus_z, dtype=float))
        z = np.where(w > 0.5, z, 1.0 - w)
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined: c = {c} is a non-positive integer")
    if np.any(z > 1.0):
        raise DomainError("2F1 is only evaluated for z <= 1")
    out = np.empty_like(z)
    m = c - a - b
    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    one = w == 0.0
    if np.any(one):
        out[one] = _gauss_value(a, b, c) if m > 0 else np.inf
    neg = (z < -0.5) & ~one
    if np.any(neg) and not terminating:
        zn = z[neg]
        out[neg] = (1.0 - zn) ** (-a) * hyp2f1_value(a, c - b, c, zn / (zn - 1.0))
    inner = (np.abs(z) <= _SERIES_RADIUS) | (terminating & ~one)
    if terminating:
        neg = np.zeros_like(neg)
    inner &= ~neg & ~one
    if np.any(inner):
        out[inner] = _series((a, b), (c,), z[inner])[0]
    near = ~(inner | neg | one)
    if np.any(near):
        nearest = round(m)
        zn = z[near]
        if abs(m - nearest) > _INTEGER_SLACK:
            out[near] = _connection_noninteger(a, b, c, w[near])[0]
        elif nearest == 0:
            out[near] = _connection_logarithmic(a, b, w[near])[0]
        else:
            out[near] = [_hyp2f1_scalar(a, b, c, float(v)).value for v in zn]
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Orthogonal polynomials
# --------------------------------------------------------------------------

def chebyshev_u(n, t):
    """Chebyshev polynomial of the second kind U_n(t) by forward recurrence."""
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 * t
    for _ in range(1, n):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur if cur.ndim else float(cur)


def gegenbauer(n, ell, t):
    """Gegenbauer polynomial C_n^(ell)(t), ``ell > 0``, by forward recurrence.

    k C_k = 2 t (k + ell - 1) C_{k-1} - (k + 2 ell - 2) C_{k-2}.
    """
    if not ell > 0:
        raise DomainError("gegenbauer requires ell > 0")
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 * ell * t
    for k in range(2, n + 1):
        prev, cur = cur, (2.0 * t * (k + ell - 1) * cur - (k + 2 * ell - 2) * prev) / k
    return cur if cur.ndim else float(cur)


# --------------------------------------------------------------------------
# Elliptic integral
# --------------------------------------------------------------------------

def elliptic_k_array(m, one_minus_m=None):
    """Vectorized K(m) by the arithmetic-geometric mean; no domain checks.

    ``one_minus_m`` may be supplied when it is known more accurately than m.
    """
    m = np.asarray(m, dtype=float)
    a = np.ones_like(m)
    g = np.sqrt(1.0 - m if one_minus_m is None else np.asarray(one_minus_m, dtype=float))
    for _ in range(64):
        if np.all(np.abs(a - g) <= 1e-16 * a):
            break
        a, g = 0.5 * (a + g), np.sqrt(a * g)
    return np.pi / (2.0 * a)


def elliptic_k(m):
    """Complete elliptic integral of the first kind in the parameter convention.

    K(m) = (pi/2) 2F1(1/2, 1/2; 1; m), defined for 0 <= m < 1.
    """
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise DomainError(f"elliptic_k requires 0 <= m < 1, got {m!r}")
    return float(elliptic_k_array(m))
