"""Composite quadrature grids on finite intervals and interval truncation.

Gauss-Legendre panels are the workhorse: they keep every node strictly
inside the interval and carry per-panel spectral cumulative-integration and
differentiation matrices used by the Volterra solvers.  A composite
trapezoid scheme is available for diagnostics; its nodes include the panel
boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate
from numpy.polynomial import legendre

from .errors import ContractError, DomainError, TruncationError

__all__ = [
    "Quadrature",
    "TruncationReport",
    "build_grid",
    "build_grid_from_edges",
    "truncate_interval",
]

GAUSS = "gauss-legendre"
TRAPEZOID = "trapezoid"
_SCHEMES = (GAUSS, TRAPEZOID)


@lru_cache(maxsize=32)
def _gauss_rule(n: int):
    x, w = legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=32)
def _panel_cumulative(n: int):
    """Matrix S with S[k, m] = integral_{-1}^{x_k} of the m-th Lagrange basis.

    Built through the Legendre expansion of each basis polynomial, which is
    exact on Gauss nodes and numerically stable for the panel sizes used
    here.
    """
    x, w = _gauss_rule(n)
    pvals = np.zeros((n + 1, n))
    for deg in range(n + 1):
        coeff = np.zeros(deg + 1)
        coeff[deg] = 1.0
        pvals[deg] = legendre.legval(x, coeff)
    p_at_minus1 = np.array([(-1.0) ** deg for deg in range(n + 1)])
    s = np.zeros((n, n))
    for m in range(n):
        a = np.array([(2 * deg + 1) / 2.0 * w[m] * pvals[deg, m] for deg in range(n)])
        val = a[0] * (x + 1.0)
        for deg in range(1, n):
            val = val + a[deg] * (
                (pvals[deg + 1] - pvals[deg - 1])
                - (p_at_minus1[deg + 1] - p_at_minus1[deg - 1])
            ) / (2 * deg + 1)
        s[:, m] = val
    return s


@lru_cache(maxsize=32)
def _panel_diff(n: int):
    """Differentiation matrix on the n Gauss nodes (barycentric form)."""
    x, _ = _gauss_rule(n)
    c = np.ones(n)
    for k in range(n):
        c[k] = np.prod(x[k] - x[np.arange(n) != k])
    d = np.zeros((n, n))
    for k in range(n):
        for m in range(n):
            if k != m:
                d[k, m] = (c[k] / c[m]) / (x[k] - x[m])
        d[k, k] = -np.sum(d[k, np.arange(n) != k])
    return d


@dataclass(frozen=True)
class Quadrature:
    """Composite quadrature rule with panel structure.

    nodes are strictly increasing; weights are positive and sum to b - a.
    For the Gauss-Legendre scheme every node lies strictly inside (a, b)
    and inside its panel; the trapezoid scheme places nodes on panel
    boundaries (including a and b).
    """

    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    panel_edges: np.ndarray
    n_per_panel: int
    scheme: str = GAUSS
    # node index ranges per panel, precomputed for the sweep kernels
    panel_slices: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.panel_edges):
            arr.setflags(write=False)

    @property
    def interval(self):
        return (self.a, self.b)

    @property
    def panels(self) -> int:
        return len(self.panel_edges) - 1

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> complex:
        """Weighted sum of per-node values (scalars or stacked arrays)."""
        v = np.asarray(values)
        if v.shape[0] != self.size:
            raise ContractError("values length does not match node count")
        if v.ndim == 1:
            return v @ self.weights
        return np.tensordot(self.weights, v, axes=(0, 0))

    def panel_width(self, p: int) -> float:
        return self.panel_edges[p + 1] - self.panel_edges[p]

    def cumulative(self, values):
        """Spectrally accurate per-node values of integral_a^{x_i} f.

        ``values`` holds f sampled on the grid nodes (leading axis = node);
        only valid for the Gauss-Legendre scheme.
        """
        self._require_gauss("cumulative integration")
        v = np.asarray(values, dtype=complex)
        out = np.empty_like(v)
        s_hat = _panel_cumulative(self.n_per_panel)
        carried = np.zeros(v.shape[1:], dtype=complex)
        for p, sl in enumerate(self.panel_slices):
            h = self.panel_width(p)
            local = np.tensordot(s_hat * (h / 2.0), v[sl], axes=(1, 0))
            out[sl] = carried + local
            carried = carried + np.tensordot(self.weights[sl], v[sl], axes=(0, 0))
        return out

    def differentiate(self, values):
        """Per-panel spectral derivative of node samples."""
        self._require_gauss("spectral differentiation")
        v = np.asarray(values, dtype=complex)
        out = np.empty_like(v)
        d_hat = _panel_diff(self.n_per_panel)
        for p, sl in enumerate(self.panel_slices):
            h = self.panel_width(p)
            out[sl] = np.tensordot(d_hat * (2.0 / h), v[sl], axes=(1, 0))
        return out

    def refined(self, factor: int = 2) -> "Quadrature":
        """Same interval and scheme with each panel split into ``factor``."""
        edges = []
        for p in range(self.panels):
            sub = np.linspace(self.panel_edges[p], self.panel_edges[p + 1], factor + 1)
            edges.extend(sub[:-1])
        edges.append(self.panel_edges[-1])
        return build_grid_from_edges(np.array(edges), self.n_per_panel, self.scheme)

    def _require_gauss(self, what):
        if self.scheme != GAUSS:
            raise ContractError(f"{what} requires the Gauss-Legendre scheme")


def build_grid(interval, n_per_panel: int = 16, panels: int = 1, scheme: str = GAUSS) -> Quadrature:
    """Composite rule with ``panels`` equal panels of ``n_per_panel`` nodes."""
    a, b = float(interval[0]), float(interval[1])
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("interval endpoints must be finite; truncate first")
    if panels < 1:
        raise DomainError("panels must be >= 1")
    edges = np.linspace(a, b, panels + 1)
    return build_grid_from_edges(edges, n_per_panel, scheme)


def build_grid_from_edges(edges, n_per_panel: int = 16, scheme: str = GAUSS) -> Quadrature:
    """Composite rule on explicitly given panel edges.

    Use this to align panel boundaries with discontinuities of the data
    (e.g. square-well edges); per-panel smoothness restores full accuracy.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("panel edges must be strictly increasing with >= 2 entries")
    if not np.all(np.isfinite(edges)):
        raise DomainError("panel edges must be finite; truncate first")
    if n_per_panel < 2:
        raise DomainError("n_per_panel must be >= 2")
    if scheme not in _SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; choose from {_SCHEMES}")

    if scheme == GAUSS:
        x_hat, w_hat = _gauss_rule(n_per_panel)
        nodes, weights, slices = [], [], []
        pos = 0
        for p in range(len(edges) - 1):
            h = edges[p + 1] - edges[p]
            nodes.append(edges[p] + (x_hat + 1.0) * h / 2.0)
            weights.append(w_hat * h / 2.0)
            slices.append(slice(pos, pos + n_per_panel))
            pos += n_per_panel
        return Quadrature(
            a=edges[0],
            b=edges[-1],
            nodes=np.concatenate(nodes),
            weights=np.concatenate(weights),
            panel_edges=edges.copy(),
            n_per_panel=n_per_panel,
            scheme=scheme,
            panel_slices=tuple(slices),
        )

    # composite trapezoid; junction nodes merged so the global node list
    # stays strictly increasing
    nodes = [edges[0]]
    weights = [0.0]
    for p in range(len(edges) - 1):
        h = (edges[p + 1] - edges[p]) / (n_per_panel - 1)
        local = edges[p] + h * np.arange(n_per_panel)
        weights[-1] += h / 2.0
        for t in local[1:-1]:
            nodes.append(t)
            weights.append(h)
        nodes.append(edges[p + 1])
        weights.append(h / 2.0)
    return Quadrature(
        a=edges[0],
        b=edges[-1],
        nodes=np.array(nodes),
        weights=np.array(weights),
        panel_edges=edges.copy(),
        n_per_panel=n_per_panel,
        scheme=TRAPEZOID,
        panel_slices=(),
    )


@dataclass(frozen=True)
class TruncationReport:
    """Finite working interval for data given on a (semi-)infinite one."""

    original_interval: tuple
    truncated_interval: tuple
    tail_mass: float
    requested_tol: float


def _tail_integral(envelope, lo, hi) -> float:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        val, _ = scipy.integrate.quad(envelope, lo, hi, limit=200)
    if not math.isfinite(val):
        return math.inf
    return abs(val)


def _find_cutoff(envelope, start: float, tol: float, direction: int, max_doublings: int = 60):
    """Smallest |cutoff| with tail integral <= tol, by doubling then bisection."""
    inf = math.inf if direction > 0 else -math.inf

    def tail(c):
        return _tail_integral(envelope, c, inf) if direction > 0 else _tail_integral(envelope, inf, c)

    lo = start + direction * 1.0
    if tail(lo) <= tol:
        return lo, tail(lo)
    hi = lo
    for _ in range(max_doublings):
        hi = start + (hi - start) * 2.0
        if tail(hi) <= tol:
            break
    else:
        raise TruncationError(
            f"tail integral stays above tol={tol:.1e} after {max_doublings} doublings"
        )
    # bisect toward the minimal admissible cutoff
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid
        if abs(hi - lo) <= 1e-3 * (1.0 + abs(hi)):
            break
    return hi, tail(hi)


def truncate_interval(envelope, original, tol: float) -> TruncationReport:
    """Replace infinite endpoints by finite cutoffs with tail mass <= tol.

    ``envelope`` is a scalar majorant of the integrand's pointwise norm on
    the discarded tails.  For the doubly infinite case each side gets half
    of the budget.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    a, b = float(original[0]), float(original[1])
    if a >= b:
        raise DomainError("empty interval")
    left_inf = math.isinf(a)
    right_inf = math.isinf(b)
    if not left_inf and not right_inf:
        return TruncationReport((a, b), (a, b), 0.0, tol)

    side_tol = tol / 2.0 if (left_inf and right_inf) else tol
    tail = 0.0
    if right_inf:
        anchor = 0.0 if left_inf else a
        b, mass = _find_cutoff(envelope, anchor, side_tol, +1)
        tail += mass
    if left_inf:
        anchor = 0.0 if right_inf else b
        a, mass = _find_cutoff(envelope, anchor, side_tol, -1)
        tail += mass
    if a >= b:
        raise TruncationError("truncation produced an empty interval")
    return TruncationReport(tuple(original), (a, b), tail, tol)
