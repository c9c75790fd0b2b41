"""Discrete N-point Riesz energy, its gradient and a limited-memory BFGS minimizer.

The discrete energy of x_1..x_N is

    E = 2 * ( sum_{i<j} K_s(x_i - x_j) + (N - 1) * sum_i V(x_i) ),

whose gradient with respect to x_k is
2 sum_{j != k} grad K_s(x_k - x_j) + 2 (N - 1) grad V(x_k).

Pair sums are computed in row blocks.  Squared distances come from the Gram
matrix except for close pairs, which are recomputed from explicit
differences so that neither the energy nor the gradient loses accuracy.
"""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .errors import DomainError, SingularityError
from .kernels import ExternalField, RieszParams, field_gradient, field_value

BLOCK_ROWS = 256
# pairs with |xi - xj|^2 below this fraction of |xi|^2 + |xj|^2 use explicit differences
_NEAR_FRACTION = 1e-4


@dataclass
class Configuration:
    """N points in R^d with provenance metadata."""

    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, ndmin=2)
        if pts.ndim != 2:
            raise DomainError("points must be an N x d array")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        self.points = pts

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def norms(self):
        return np.linalg.norm(self.points, axis=1)

    def to_csv(self, path=None):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.d)])
        for row in self.points:
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text):
        if "\n" in str(path_or_text):
            text = str(path_or_text)
        else:
            with open(path_or_text, encoding="utf-8") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if not all(h.startswith("x") for h in header):
            raise DomainError("configuration CSV must have x1..xd headers")
        pts = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, len(header))
        return cls(pts)

    def to_json(self, **kwargs):
        meta = {k: v for k, v in self.meta.items() if k != "history"}
        return json.dumps({"n": self.n, "d": self.d, "meta": meta,
                           "points": self.points.tolist()}, **kwargs)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(np.array(data["points"], dtype=float).reshape(data["n"], data["d"]),
                   data.get("meta", {}))


@dataclass(frozen=True)
class MinimizeOptions:
    """Controls for :func:`minimize`.

    ``energy_tolerance`` stops the run when the energy has decreased by less
    than that relative amount over the last ``stall_window`` iterations (0
    disables the test).
    """

    memory: int = 10
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-6
    energy_tolerance: float = 0.0
    stall_window: int = 20
    armijo: float = 1e-4
    wolfe: float = 0.9
    max_line_search: int = 40
    reproducible_reduction: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.memory < 1:
            raise DomainError("memory must be >= 1")
        if not (self.gradient_tolerance > 0 and self.energy_tolerance >= 0):
            raise DomainError("tolerances must be positive")
        if not 0 < self.armijo < self.wolfe < 1:
            raise DomainError("need 0 < armijo < wolfe < 1")
        if self.max_iterations < 0:
            raise DomainError("max_iterations must be nonnegative")


# --------------------------------------------------------------------------
# energy and gradient
# --------------------------------------------------------------------------

def _block_terms(X, sq_norms, i0, i1, s, kappa, want_grad):
    """Kernel sum and kernel gradient for rows i0:i1 against all points.

    Returns (sum over the block rows of sum_{j != i} K, gradient rows or None,
    collision flag).
    """
    Xi = X[i0:i1]
    scale = sq_norms[i0:i1, None] + sq_norms[None, :]
    D2 = scale - 2.0 * (Xi @ X.T)
    rows = np.arange(i1 - i0)
    D2[rows, rows + i0] = 1.0
    near = D2 < _NEAR_FRACTION * scale
    near[rows, rows + i0] = False
    ni, nj = np.nonzero(near)
    if ni.size:
        diff = Xi[ni] - X[nj]
        D2[ni, nj] = np.einsum("ij,ij->i", diff, diff)
    if np.any(D2 <= 0):
        zero = D2 <= 0
        zero[rows, rows + i0] = False
        if s >= 0 and np.any(zero):
            return math.inf, None, True
        D2 = np.where(zero, 1.0, D2)
    else:
        zero = None
    if s == 0:
        K = -0.5 * np.log(D2)
    else:
        K = math.copysign(1.0, s) * D2 ** (-0.5 * s)
    K[rows, rows + i0] = 0.0
    if zero is not None:
        K[zero] = 0.0
    total = math.fsum(K.sum(axis=1))
    if not want_grad:
        return total, None, False
    C = -kappa / D2 if s == 0 else -kappa * D2 ** (-0.5 * (s + 2.0))
    C[rows, rows + i0] = 0.0
    if zero is not None:
        C[zero] = 0.0
    if ni.size:
        c_near = C[ni, nj].copy()
        C[ni, nj] = 0.0
    grad = Xi * C.sum(axis=1)[:, None] - C @ X
    if ni.size:
        np.add.at(grad, ni, c_near[:, None] * diff)
    return total, grad, False


def _energy_and_gradient(X, params, fld, want_grad=True, threads=1):
    """(E, grad E) with E = +inf on a collision for s >= 0."""
    N = X.shape[0]
    if N == 0:
        return 0.0, np.zeros_like(X)
    s, kappa = params.s, params.kappa
    sq_norms = np.einsum("ij,ij->i", X, X)
    starts = list(range(0, N, BLOCK_ROWS))

    def work(i0):
        return _block_terms(X, sq_norms, i0, min(i0 + BLOCK_ROWS, N), s, kappa, want_grad)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(i0) for i0 in starts]
    # fixed block order keeps the reduction independent of the thread count
    if any(p[2] for p in parts):
        return math.inf, None
    pair_sum = math.fsum(p[0] for p in parts)
    field_sum = math.fsum(np.atleast_1d(field_value(fld, X)))
    energy = pair_sum + 2.0 * (N - 1) * field_sum
    if not want_grad:
        return energy, None
    grad = 2.0 * np.concatenate([p[1] for p in parts], axis=0)
    grad += 2.0 * (N - 1) * field_gradient(fld, X)
    return energy, grad


def _as_points(config):
    return config.points if isinstance(config, Configuration) else np.array(config, dtype=float, ndmin=2)


def energy(config, params, fld, threads=1):
    """Discrete energy; raises on coincident points when s >= 0."""
    X = _as_points(config)
    value, _ = _energy_and_gradient(X, params, fld, want_grad=False, threads=threads)
    if math.isinf(value):
        raise SingularityError("coincident points have infinite energy for s >= 0")
    return value


def energy_gradient(config, params, fld, threads=1):
    """Gradient of :func:`energy`, an N x d array."""
    X = _as_points(config)
    value, grad = _energy_and_gradient(X, params, fld, want_grad=True, threads=threads)
    if math.isinf(value):
        raise SingularityError("coincident points have no gradient for s >= 0")
    return grad


# --------------------------------------------------------------------------
# limited-memory BFGS
# --------------------------------------------------------------------------

def _two_loop(g, s_hist, y_hist, rho_hist):
    q = g.copy()
    alphas = []
    for s_k, y_k, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * np.dot(s_k, q)
        alphas.append(a)
        q -= a * y_k
    if s_hist:
        q *= np.dot(s_hist[-1], y_hist[-1]) / np.dot(y_hist[-1], y_hist[-1])
    for (s_k, y_k, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * np.dot(y_k, q)
        q += (a - b) * s_k
    return -q


def _line_search(fun, x, f0, g0, p, step, opts):
    """Weak Wolfe line search by bracketing and bisection.

    Returns (step, f, g) or None.  Infinite energies count as too long a step.
    """
    slope = np.dot(g0, p)
    lo, hi = 0.0, math.inf
    best = None
    for _ in range(opts.max_line_search):
        f, g = fun(x + step * p)
        if not math.isfinite(f) or f > f0 + opts.armijo * step * slope:
            hi = step
        else:
            if best is None or f < best[1]:
                best = (step, f, g)
            if np.dot(g, p) >= opts.wolfe * slope:
                return step, f, g
            lo = step
        step = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * lo
    return best


def minimize(config0, params, fld, opts=None):
    """Minimize the discrete energy from ``config0`` by L-BFGS.

    Stops when ||grad||_inf < gradient_tolerance, on the iteration cap, or on
    energy stagnation.  ``meta`` of the result records iterations, the final
    energy and gradient norm, whether the line search stalled, and the energy
    history.
    """
    opts = opts or MinimizeOptions()
    X0 = _as_points(config0).copy()
    shape = X0.shape

    def fun(flat):
        e, g = _energy_and_gradient(flat.reshape(shape), params, fld, True, opts.threads)
        return e, (g.ravel() if g is not None else None)

    x = X0.ravel()
    f, g = fun(x)
    if not math.isfinite(f):
        raise SingularityError("initial configuration has infinite energy")
    history = [f]
    s_hist, y_hist, rho_hist = [], [], []
    stalled = False
    iterations = 0
    while iterations < opts.max_iterations:
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm < opts.gradient_tolerance:
            break
        p = _two_loop(g, s_hist, y_hist, rho_hist)
        if s_hist:
            step0 = 1.0
        else:
            # first step moves the farthest point by about 1% of the configuration size
            step0 = 0.01 * max(1.0, float(np.max(np.abs(x)))) / max(float(np.max(np.abs(p))), 1e-300)
        if np.dot(p, g) >= 0:
            s_hist, y_hist, rho_hist = [], [], []
            p = -g
        found = _line_search(fun, x, f, g, p, step0, opts)
        if found is None and s_hist:
            s_hist, y_hist, rho_hist = [], [], []
            p = -g
            step0 = 0.01 * max(1.0, float(np.max(np.abs(x)))) / max(gnorm, 1e-300)
            found = _line_search(fun, x, f, g, p, step0, opts)
        if found is None:
            stalled = True
            break
        step, f_new, g_new = found
        s_k = step * p
        y_k = g_new - g
        sy = float(np.dot(s_k, y_k))
        if sy > 1e-12 * np.linalg.norm(s_k) * np.linalg.norm(y_k):
            s_hist.append(s_k)
            y_hist.append(y_k)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > opts.memory:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        x = x + s_k
        f, g = f_new, g_new
        history.append(f)
        iterations += 1
        w = opts.stall_window
        if opts.energy_tolerance > 0 and len(history) > w:
            if history[-w - 1] - f <= opts.energy_tolerance * max(1.0, abs(f)):
                break
    meta = dict(getattr(config0, "meta", {}) or {})
    meta.update({
        "iterations": iterations,
        "energy": f,
        "gradient_norm": float(np.max(np.abs(g))) if g.size else 0.0,
        "stalled": stalled,
        "history": history,
    })
    return Configuration(x.reshape(shape), meta)


# --------------------------------------------------------------------------
# multi-start driver and statistics
# --------------------------------------------------------------------------

@dataclass
class MultiStartResult:
    best: Configuration
    energies: list
    configurations: list = field(default_factory=list, repr=False)

    @property
    def spread(self):
        return float(max(self.energies) - min(self.energies))


def analytic_radius(params, fld):
    """Outer radius of the closed-form equilibrium law, or None if unknown."""
    if fld.p != 2.0:
        return None
    measure = analytic.solve_equilibrium(params, fld)
    return measure.R if measure.R else None


def uniform_ball(rng, n, d, radius):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * (radius * rng.random(n) ** (1.0 / d))[:, None]
    # keep points off the origin, where the field may not be differentiable
    at_origin = np.all(pts == 0, axis=1)
    pts[at_origin, 0] = 1e-12
    return pts


def initial_configuration(n, d, seed, radius=1.0):
    rng = np.random.default_rng(seed)
    return Configuration(uniform_ball(rng, n, d, radius), {"seed": seed})


def multi_start(n_starts, seed, n, params, fld, opts=None, radius=None, workers=1):
    """Run :func:`minimize` from ``n_starts`` independent uniform-ball starts.

    Start radius is twice the analytic support radius when known, else 1.
    Seeds for the runs are spawned from ``seed``.
    """
    if n_starts < 1:
        raise DomainError("n_starts must be >= 1")
    if n < 1:
        raise DomainError("n must be >= 1")
    if radius is None:
        known = analytic_radius(params, fld)
        radius = 2.0 * known if known else 1.0
    children = np.random.SeedSequence(seed).spawn(n_starts)

    def run(k):
        rng = np.random.default_rng(children[k])
        start = Configuration(uniform_ball(rng, n, params.d, radius),
                              {"seed": seed, "start": k, "start_radius": radius})
        return minimize(start, params, fld, opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_starts)))
    else:
        results = [run(k) for k in range(n_starts)]
    energies = [r.meta["energy"] for r in results]
    best = results[int(np.argmin(energies))]
    return MultiStartResult(best, energies, results)


@dataclass
class RadialStats:
    support_radius: float
    bin_edges: np.ndarray
    counts: np.ndarray
    sphere_mass_fraction: float = None
    shell_center: float = None
    shell_halfwidth: float = None

    def to_dict(self):
        return {"support_radius": self.support_radius,
                "bin_edges": [float(v) for v in self.bin_edges],
                "counts": [int(v) for v in self.counts],
                "sphere_mass_fraction": self.sphere_mass_fraction,
                "shell_center": self.shell_center,
                "shell_halfwidth": self.shell_halfwidth}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def histogram_csv(self):
        lines = ["bin_lo,bin_hi,count"]
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            lines.append(f"{float(lo)!r},{float(hi)!r},{int(c)}")
        return "\n".join(lines) + "\n"


def radial_stats(config, bins=50, shell_center=None, shell_halfwidth=0.01):
    """Support radius, histogram of norms and mass near a sphere of radius shell_center."""
    if bins < 1:
        raise DomainError("bins must be >= 1")
    norms = _as_points(config)
    norms = np.linalg.norm(norms, axis=1)
    if norms.size == 0:
        raise DomainError("empty configuration")
    support = float(norms.max())
    top = 1.1 * support if support > 0 else 1.0
    counts, edges = np.histogram(norms, bins=bins, range=(0.0, top))
    fraction = None
    if shell_center is not None:
        lo = shell_center * (1.0 - shell_halfwidth)
        hi = shell_center * (1.0 + shell_halfwidth)
        fraction = float(np.mean((norms >= lo) & (norms <= hi)))
    return RadialStats(support, edges, counts, fraction, shell_center,
                       shell_halfwidth if shell_center is not None else None)


__all__ = ["Configuration", "MinimizeOptions", "initial_configuration", "RadialStats", "MultiStartResult", "energy",
           "energy_gradient", "minimize", "multi_start", "radial_stats", "RieszParams",
           "ExternalField"]
