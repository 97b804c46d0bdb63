"""Matrix Schrodinger scattering on the line and half line.

Builds the semi-separable kernels of -u G0 v for a matrix potential,
computes Jost solutions and the Jost function by three routes, checks the
determinant identities connecting them, counts bound states by three
methods, and evaluates the weighted-trace bound on the count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ContractError, DomainError, ResonanceWarning, RouteMismatchError
from .kernels import OperatorFunction, SemiSeparableKernel
from .linalg import det, herm_eigs, polar_factor
from .quadrature import Quadrature, build_grid_from_edges, truncate_interval
from .reduction import det1_semiseparable, volterra_solve_arrays

__all__ = [
    "SpectralPoint",
    "Potential",
    "JostData",
    "potential_grid",
    "jost_solution",
    "jost_function",
    "build_K_fullline",
    "build_Ktilde_system",
    "build_K_halfline",
    "jost_pais_check",
    "system_det2_check",
    "count_bound_states",
    "bargmann_bound",
]

Z_MIN = 1e-8
JOST_PLUS = "plus"
JOST_MINUS = "minus"
VIA_B8 = "via_b8"
VIA_B8A = "via_b8a"
VIA_WRONSKIAN = "via_wronskian"
FULL_LINE = "full_line"
HALF_LINE = "half_line"
WEIGHT_L1 = "L1"
WEIGHT_L1_WEIGHTED = "L1_weighted"
METHOD_JOST = "jost_zeros"
METHOD_BS = "birman_schwinger"
METHOD_DIRECT = "direct_diag"


@dataclass(frozen=True)
class SpectralPoint:
    """Complex energy z with its branch-resolved square root k, Im(k) >= 0."""

    z: complex
    k: complex

    @classmethod
    def from_z(cls, z, z_min: float = Z_MIN) -> "SpectralPoint":
        z = complex(z)
        if abs(z) < z_min:
            raise DomainError(f"|z| = {abs(z):.2e} below the z_min guard {z_min:.1e}")
        k = np.sqrt(z + 0j)
        if k.imag < 0:
            k = -k
        if k.imag == 0 and k.real <= 0:
            k = -k
        return cls(z=z, k=complex(k))

    @property
    def on_cut(self) -> bool:
        return self.z.imag == 0.0 and self.z.real >= 0.0

    def require_off_cut(self):
        if self.on_cut:
            raise DomainError(f"z = {self.z} lies on the essential-spectrum cut [0, inf)")
        return self


def _as_point(z) -> SpectralPoint:
    return z if isinstance(z, SpectralPoint) else SpectralPoint.from_z(z)


@dataclass
class Potential:
    """Matrix-valued potential with a scalar decay majorant for truncation."""

    op: OperatorFunction
    hermitian: bool
    envelope: Callable[[float], float]
    weight_class: str = WEIGHT_L1
    breakpoints: tuple = field(default=())

    def __post_init__(self):
        if self.op.rows != self.op.cols:
            raise ContractError("potential values must be square matrices")
        if self.weight_class not in (WEIGHT_L1, WEIGHT_L1_WEIGHTED):
            raise ContractError(f"unknown weight class {self.weight_class!r}")
        self._uv_cache = {}

    @property
    def d(self) -> int:
        return self.op.rows

    @property
    def interval(self):
        return self.op.interval

    def __call__(self, x: float) -> np.ndarray:
        return self.op(x)

    def uv_at(self, x: float):
        """Cached pointwise factorization V(x) = u(x) v(x), v = |V(x)|^{1/2}.

        Energy sweeps revisit the same grid nodes many times; memoizing by
        abscissa keeps the factorization cost linear in the node count.
        """
        key = float(x)
        hit = self._uv_cache.get(key)
        if hit is None:
            hit = polar_factor(self.op(x))
            if len(self._uv_cache) < 65536:
                self._uv_cache[key] = hit
        return hit

    def validate_on(self, xs, herm_tol: float = 1e-10):
        """Spot-check hermiticity and envelope domination on sample points."""
        for x in xs:
            m = self.op(x)
            if self.hermitian:
                defect = np.linalg.norm(m - m.conj().T)
                if defect > herm_tol * max(1.0, np.linalg.norm(m)):
                    raise ContractError(
                        f"potential flagged hermitian but ||V-V*|| = {defect:.3e} at x={x}"
                    )
            trace_norm = float(np.sum(np.linalg.svd(m, compute_uv=False)))
            if trace_norm > self.envelope(x) * (1 + 1e-8) + 1e-12:
                raise ContractError(
                    f"envelope {self.envelope(x):.3e} does not dominate "
                    f"||V(x)||_1 = {trace_norm:.3e} at x={x}"
                )


def potential_grid(pot: Potential, tol: float = 1e-8, n_per_panel: int = 16,
                   panels_per_unit: float = 1.0, min_panels: int = 8,
                   validate: bool = True) -> Quadrature:
    """Panel-aligned Gauss grid on the truncated support of the potential.

    Panel edges include the potential's recorded breakpoints so that
    discontinuous wells stay panel-smooth.
    """
    report = truncate_interval(pot.envelope, pot.interval, tol)
    a, b = report.truncated_interval
    inner = [x for x in pot.breakpoints if a < x < b]
    panels = max(min_panels, math.ceil((b - a) * panels_per_unit))
    edges = np.unique(np.concatenate([np.linspace(a, b, panels + 1), inner]))
    grid = build_grid_from_edges(edges, n_per_panel)
    if validate:
        pot.validate_on(grid.nodes[:: max(1, grid.size // 8)])
    return grid


def factor_functions(pot: Potential, interval) -> tuple:
    """Pointwise split V(x) = u(x) v(x) with v = |V|^{1/2} as factor functions."""
    d = pot.d
    u = OperatorFunction.from_callable(lambda x: pot.uv_at(x)[0], d, d, interval)
    v = OperatorFunction.from_callable(lambda x: pot.uv_at(x)[1], d, d, interval)
    return u, v


# ----------------------------------------------------------------------
# Jost solutions and the Jost function

@dataclass(frozen=True)
class JostData:
    """Samples of a Jost solution on a grid, with solve diagnostics."""

    which: str
    z: SpectralPoint
    samples: np.ndarray  # (N, d, d)
    grid: Quadrature
    residual: float
    route: str | None = None
    jost_function: np.ndarray | None = None


def _free_kernel_parts(pot: Potential, pt: SpectralPoint, grid: Quadrature):
    """Factor arrays of g0(z, x, x') V(x') on the grid nodes."""
    k = pt.k
    d = pot.d
    xs = grid.nodes
    v_samples = pot.op.sample(xs)
    eye = np.eye(d, dtype=complex)
    e_plus = np.exp(1j * k * xs)
    e_minus = np.exp(-1j * k * xs)
    x1 = (e_plus / (2j * k))[:, None, None] * eye
    y1 = e_minus[:, None, None] * v_samples
    x2 = (-e_minus / (2j * k))[:, None, None] * eye
    y2 = e_plus[:, None, None] * v_samples
    return [x1, x2], [y1, y2]


def jost_solution(pot: Potential, z, which: str, grid: Quadrature,
                  method: str = "back_substitution") -> JostData:
    """Solve the Jost Volterra equation on the truncated interval.

    The free boundary value e^{+-ikx} I is exact beyond the truncation
    point, so the plus solution back-substitutes from b and the minus
    solution from a.
    """
    pt = _as_point(z)
    x_parts, y_parts = _free_kernel_parts(pot, pt, grid)
    d = pot.d
    eye = np.eye(d, dtype=complex)
    if which == JOST_PLUS:
        rhs = np.exp(1j * pt.k * grid.nodes)[:, None, None] * eye
        coeff, forward = -1.0, False
    elif which == JOST_MINUS:
        rhs = np.exp(-1j * pt.k * grid.nodes)[:, None, None] * eye
        coeff, forward = 1.0, True
    else:
        raise ContractError(f"which must be {JOST_PLUS!r} or {JOST_MINUS!r}")
    samples, _, residual = volterra_solve_arrays(
        x_parts, y_parts, rhs, grid, coeff, forward, method=method)
    return JostData(which=which, z=pt, samples=samples, grid=grid, residual=residual)


def _wronskian_at(left, left_d, right, right_d, idx):
    return left[idx] @ right_d[idx] - left_d[idx] @ right[idx]


def jost_function(pot: Potential, z, grid: Quadrature, route: str = VIA_B8,
                  route_tol: float = 1e-6,
                  f_plus: JostData | None = None,
                  f_minus_conj: JostData | None = None) -> np.ndarray:
    """Jost function by three routes, cross-checked before returning one.

    Routes: the integral against f_plus, the mirror integral against
    f_minus at the conjugate energy, and the normalized Wronskian of the
    two with per-panel spectral derivatives.  Disagreement beyond
    ``route_tol`` raises with all three values attached.
    """
    pt = _as_point(z).require_off_cut()
    k = pt.k
    d = pot.d
    xs, w = grid.nodes, grid.weights
    if f_plus is None:
        f_plus = jost_solution(pot, pt, JOST_PLUS, grid)
    zbar_pt = SpectralPoint.from_z(np.conj(pt.z))
    if f_minus_conj is None:
        f_minus_conj = jost_solution(pot, zbar_pt, JOST_MINUS, grid)
    v_samples = pot.op.sample(xs)
    eye = np.eye(d, dtype=complex)

    e_minus = np.exp(-1j * k * xs)
    integrand_b8 = np.einsum("j,jde,jeq->jdq", w * e_minus, v_samples, f_plus.samples)
    val_b8 = eye - integrand_b8.sum(axis=0) / (2j * k)

    fmc = np.conj(np.transpose(f_minus_conj.samples, (0, 2, 1)))
    e_plus = np.exp(1j * k * xs)
    integrand_b8a = np.einsum("jde,jeq,j->jdq", fmc, v_samples, w * e_plus)
    val_b8a = eye - integrand_b8a.sum(axis=0) / (2j * k)

    fp_d = grid.differentiate(f_plus.samples)
    fmc_d = np.conj(np.transpose(grid.differentiate(f_minus_conj.samples), (0, 2, 1)))
    idx = int(np.argmin(np.abs(xs - 0.5 * (grid.a + grid.b))))
    wr = _wronskian_at(fmc, fmc_d, f_plus.samples, fp_d, idx)
    val_wr = wr / (2j * k)

    values = {VIA_B8: val_b8, VIA_B8A: val_b8a, VIA_WRONSKIAN: val_wr}
    scale = max(np.linalg.norm(val_b8), 1.0)
    worst = max(
        np.linalg.norm(values[a] - values[b])
        for a in values for b in values
    )
    if worst > route_tol * scale:
        raise RouteMismatchError(
            f"Jost function routes disagree by {worst:.3e} (tol {route_tol:.1e})",
            details={name: v.copy() for name, v in values.items()},
        )
    if route not in values:
        raise ContractError(f"unknown route {route!r}")
    return values[route]


# ----------------------------------------------------------------------
# scattering kernels

def build_K_fullline(pot: Potential, z, grid: Quadrature) -> SemiSeparableKernel:
    """Semi-separable kernel of -u G0(z) v on the truncated line."""
    pt = _as_point(z).require_off_cut()
    k = pt.k
    d = pot.d
    interval = (grid.a, grid.b)
    u, v = factor_functions(pot, interval)
    f1 = OperatorFunction.from_callable(
        lambda x: -u(x) * np.exp(1j * k * x), d, d, interval)
    g1 = OperatorFunction.from_callable(
        lambda x: (1j / (2 * k)) * v(x) * np.exp(-1j * k * x), d, d, interval)
    f2 = OperatorFunction.from_callable(
        lambda x: -u(x) * np.exp(-1j * k * x), d, d, interval)
    g2 = OperatorFunction.from_callable(
        lambda x: (1j / (2 * k)) * v(x) * np.exp(1j * k * x), d, d, interval)
    return SemiSeparableKernel(f1, g1, f2, g2)


def build_Ktilde_system(pot: Potential, z, grid: Quadrature) -> SemiSeparableKernel:
    """Kernel of the first-order 2x2 block reformulation (2d-dim range).

    The factor spaces stay d-dimensional; the kernel value is discontinuous
    across the diagonal, which is fine for the 2-modified determinant.
    """
    pt = _as_point(z)
    if pt.z == 0:
        raise DomainError("z must be nonzero for the first-order system kernel")
    k = pt.k
    d = pot.d
    interval = (grid.a, grid.b)
    u, v = factor_functions(pot, interval)
    zero = np.zeros((d, d), dtype=complex)

    def f1(x):
        ux = u(x)
        return -np.vstack([ux, 1j * k * ux]) * np.exp(1j * k * x)

    def f2(x):
        ux = u(x)
        return -np.vstack([ux, -1j * k * ux]) * np.exp(-1j * k * x)

    def g1(x):
        return np.hstack([(1j / (2 * k)) * v(x) * np.exp(-1j * k * x), zero])

    def g2(x):
        return np.hstack([(1j / (2 * k)) * v(x) * np.exp(1j * k * x), zero])

    return SemiSeparableKernel(
        OperatorFunction.from_callable(f1, 2 * d, d, interval),
        OperatorFunction.from_callable(g1, d, 2 * d, interval),
        OperatorFunction.from_callable(f2, 2 * d, d, interval),
        OperatorFunction.from_callable(g2, d, 2 * d, interval),
    )


def build_K_halfline(pot: Potential, z, grid: Quadrature) -> SemiSeparableKernel:
    """Semi-separable kernel of -u G0+(z) v for the Dirichlet half line."""
    pt = _as_point(z).require_off_cut()
    k = pt.k
    d = pot.d
    interval = (grid.a, grid.b)
    if interval[0] < -1e-12:
        raise DomainError("half-line kernel requires a grid inside (0, inf)")
    u, v = factor_functions(pot, interval)
    f1 = OperatorFunction.from_callable(
        lambda x: -u(x) * np.exp(1j * k * x), d, d, interval)
    g1 = OperatorFunction.from_callable(
        lambda x: v(x) * (np.sin(k * x) / k), d, d, interval)
    f2 = OperatorFunction.from_callable(
        lambda x: -u(x) * (np.sin(k * x) / k), d, d, interval)
    g2 = OperatorFunction.from_callable(
        lambda x: v(x) * np.exp(1j * k * x), d, d, interval)
    return SemiSeparableKernel(f1, g1, f2, g2)


# ----------------------------------------------------------------------
# determinant identity checks

def jost_pais_check(pot: Potential, z, grid: Quadrature):
    """Fredholm determinant of I - K(z) versus det of the Jost function.

    Returns (lhs, rhs); the two sides come from independent pipelines and
    should agree after grid refinement.
    """
    pt = _as_point(z).require_off_cut()
    kernel = build_K_fullline(pot, pt, grid)
    lhs = det1_semiseparable(kernel, 1.0, grid).value
    rhs = det(jost_function(pot, pt, grid))
    return lhs, rhs


def system_det2_check(pot: Potential, z, grid: Quadrature):
    """The three 2-modified determinant expressions of the system identity.

    Returns (d2_system, d2_kernel, jost_side): the first-order system
    kernel, the second-order kernel, and det F(z) times the trace
    exponential.  All three should agree pairwise.
    """
    from .reduction import det2_semiseparable

    pt = _as_point(z).require_off_cut()
    d2_system = det2_semiseparable(build_Ktilde_system(pot, pt, grid), 1.0, grid).value
    d2_kernel = det2_semiseparable(build_K_fullline(pot, pt, grid), 1.0, grid).value
    v_samples = pot.op.sample(grid.nodes)
    trace_v = complex(np.einsum("j,jdd->", grid.weights, v_samples))
    jost_side = det(jost_function(pot, pt, grid)) * np.exp(-1j * trace_v / (2 * pt.k))
    return d2_system, d2_kernel, jost_side


# ----------------------------------------------------------------------
# bound states

def _negative_part_root(m):
    """Hermitian square root of the negative part of a Hermitian matrix."""
    lam, q = herm_eigs(m)
    lam_minus = np.where(lam < 0, -lam, 0.0)
    return (q * np.sqrt(lam_minus)) @ q.conj().T


def _sup_norm(pot: Potential, xs) -> float:
    return max(float(np.linalg.norm(pot.op(x), 2)) for x in xs)


def _fullline_jost_det(pot, z, grid):
    f_plus = jost_solution(pot, z, JOST_PLUS, grid)
    v_samples = pot.op.sample(grid.nodes)
    e_minus = np.exp(-1j * z.k * grid.nodes)
    integ = np.einsum("j,jde,jeq->dq", grid.weights * e_minus, v_samples,
                      f_plus.samples)
    return det(np.eye(pot.d) - integ / (2j * z.k))


def _halfline_jost_det(pot, z, grid):
    from .reduction import FHAT1, solve_volterra

    kernel = build_K_halfline(pot, z, grid)
    sol = solve_volterra(kernel, 1.0, grid, FHAT1)
    g1 = kernel.G1.sample(grid.nodes)
    i1 = np.einsum("j,jre,jeq->rq", grid.weights, g1, sol.samples)
    return det(np.eye(kernel.n1) - i1)


def _jost_det_real(pot, domain, kappa, grid):
    """Scattering determinant at z = -kappa^2; real for Hermitian potentials.

    The full line uses the single-integral Jost-function route; the half
    line uses the canonical reduced-determinant route of the Dirichlet
    kernel (its Jost-Pais twin).
    """
    z = SpectralPoint.from_z(-kappa * kappa)
    if domain == FULL_LINE:
        value = _fullline_jost_det(pot, z, grid)
    else:
        value = _halfline_jost_det(pot, z, grid)
    if abs(value.imag) > 1e-8 * (1.0 + abs(value)):
        warnings.warn(
            f"Jost determinant at kappa={kappa:.3e} has imaginary residue "
            f"{value.imag:.2e}", ResonanceWarning)
    return value.real


def _count_jost_zeros(pot, domain, grid, kappa_min=1e-4, n_samples=60,
                      resonance_tol=1e-6):
    probe = grid.nodes[:: max(1, grid.size // 16)]
    kappa_max = 1.0 + math.sqrt(max(_sup_norm(pot, probe), 1e-12))
    kappas = np.geomspace(kappa_min, kappa_max, n_samples)
    vals = np.array([_jost_det_real(pot, domain, kap, grid) for kap in kappas])
    if abs(vals[0]) < resonance_tol:
        warnings.warn(
            "Jost determinant nearly vanishes at the bottom of the search "
            "window; a zero-energy resonance makes the count inconclusive",
            ResonanceWarning)
    count = 0
    for i in range(len(kappas) - 1):
        if vals[i] == 0.0:
            count += 1
            continue
        if vals[i] * vals[i + 1] < 0:
            scipy.optimize.brentq(
                lambda kap: _jost_det_real(pot, domain, kap, grid),
                kappas[i], kappas[i + 1], xtol=1e-10)
            count += 1
    return count


def _birman_schwinger_matrix(pot, domain, grid, lam):
    xs, w = grid.nodes, grid.weights
    root_lam = math.sqrt(lam)
    v_minus = np.stack([_negative_part_root(pot.op(x)) for x in xs])
    diff = np.abs(xs[:, None] - xs[None, :])
    if domain == FULL_LINE:
        g0 = np.exp(-root_lam * diff) / (2 * root_lam)
    else:
        g0 = (np.exp(-root_lam * diff)
              - np.exp(-root_lam * (xs[:, None] + xs[None, :]))) / (2 * root_lam)
    sw = np.sqrt(w)
    blocks = np.einsum("i,ide,ij,jeq,j->idjq", sw, v_minus, g0, v_minus, sw)
    n, d = grid.size, pot.d
    return blocks.reshape(n * d, n * d)


def _count_birman_schwinger(pot, domain, grid, lam=1e-6, sensitivity=1e-5):
    counts = []
    for lam_probe in (lam, sensitivity):
        mat = _birman_schwinger_matrix(pot, domain, grid, lam_probe)
        evals, _ = herm_eigs(mat)
        counts.append(int(np.sum(evals > 1.0)))
    if counts[0] != counts[1]:
        warnings.warn(
            f"Birman-Schwinger count changes between lambda={lam:.1e} "
            f"({counts[0]}) and {sensitivity:.1e} ({counts[1]}); "
            "a near-threshold state makes the count inconclusive",
            ResonanceWarning)
    return counts[0]


def _v_or_zero(pot, x):
    a, b = pot.interval
    if x < a or x > b:
        return np.zeros((pot.d, pot.d), dtype=complex)
    return pot.op(x)


def _count_direct_diag(pot, domain, dx=0.02, pad=30.0, lambda_cut=1e-8,
                       trunc_tol=1e-10):
    report = truncate_interval(pot.envelope, pot.interval, trunc_tol)
    a, b = report.truncated_interval
    if domain == HALF_LINE:
        lo, hi = 0.0, b + pad
    else:
        lo, hi = a - pad, b + pad
    n = max(int(math.ceil((hi - lo) / dx)), 16)
    h = (hi - lo) / n
    xs = lo + h * np.arange(1, n)
    d = pot.d
    m = len(xs) * d
    band = np.zeros((d + 1, m), dtype=complex)
    for i, x in enumerate(xs):
        vm = _v_or_zero(pot, x)
        for c in range(d):
            col = i * d + c
            band[0, col] = 2.0 / h**2 + vm[c, c].real
            for cp in range(c + 1, d):
                band[cp - c, i * d + c] = vm[cp, c]
        if i + 1 < len(xs):
            for c in range(d):
                band[d, i * d + c] = -1.0 / h**2
    vmax = max(
        float(np.linalg.norm(_v_or_zero(pot, x), 2))
        for x in xs[:: max(1, len(xs) // 16)]
    )
    lower_bound = -(vmax + 10.0)
    evals = scipy.linalg.eig_banded(
        band, lower=True, eigvals_only=True, select="v",
        select_range=(lower_bound, -lambda_cut))
    return int(len(evals))


def count_bound_states(pot: Potential, domain: str, method: str = "all",
                       grid: Quadrature | None = None, tol: float = 1e-8,
                       **kwargs) -> int:
    """Number of negative-energy bound states of the Schrodinger operator.

    Methods: sign changes of the real Jost determinant on a log kappa grid
    with bisection refinement, the Birman-Schwinger eigenvalue count at a
    small negative energy, and direct banded finite-difference
    diagonalization.  ``all`` runs the three and insists they agree.
    """
    if not pot.hermitian:
        raise ContractError("bound-state counting is defined for Hermitian potentials only")
    if domain not in (FULL_LINE, HALF_LINE):
        raise ContractError(f"domain must be {FULL_LINE!r} or {HALF_LINE!r}")
    if domain == HALF_LINE and pot.interval[0] < -1e-12:
        raise ContractError("half-line counting requires a potential on (0, inf)")
    if grid is None:
        grid = potential_grid(pot, tol=tol)

    if method == METHOD_JOST:
        return _count_jost_zeros(pot, domain, grid, **kwargs)
    if method == METHOD_BS:
        return _count_birman_schwinger(pot, domain, grid, **kwargs)
    if method == METHOD_DIRECT:
        return _count_direct_diag(pot, domain, **kwargs)
    if method != "all":
        raise ContractError(f"unknown method {method!r}")

    counts = {
        METHOD_JOST: _count_jost_zeros(pot, domain, grid),
        METHOD_BS: _count_birman_schwinger(pot, domain, grid),
        METHOD_DIRECT: _count_direct_diag(pot, domain),
    }
    values = set(counts.values())
    if len(values) != 1:
        raise RouteMismatchError(
            f"bound-state counting methods disagree: {counts}", details=counts)
    return values.pop()


def bargmann_bound(pot: Potential, grid: Quadrature | None = None,
                   tol: float = 1e-10) -> float:
    """Weighted trace integral bounding the half-line bound-state count.

    Computes the quadrature of x tr V_-(x) over the truncated half line;
    requires a Hermitian potential declared integrable with weight (1+x).
    """
    if not pot.hermitian:
        raise ContractError("the bound is stated for self-adjoint potentials")
    if pot.weight_class != WEIGHT_L1_WEIGHTED:
        raise ContractError("potential must be declared L1 with weight (1+x)")
    if pot.interval[0] < -1e-12:
        raise ContractError("the bound applies to half-line potentials")
    if grid is None:
        # truncate against the weighted envelope so the discarded tail of
        # the x-weighted integrand itself stays below tol
        weighted = lambda x: (1.0 + abs(x)) * pot.envelope(x)
        report = truncate_interval(weighted, pot.interval, tol)
        a, b = report.truncated_interval
        inner = [x for x in pot.breakpoints if a < x < b]
        panels = max(8, math.ceil(b - a))
        edges = np.unique(np.concatenate([np.linspace(a, b, panels + 1), inner]))
        grid = build_grid_from_edges(edges, 16)
    total = 0.0
    for x, w in zip(grid.nodes, grid.weights):
        lam, _ = herm_eigs(pot.op(x))
        total += w * x * float(np.sum(np.where(lam < 0, -lam, 0.0)))
    return total
