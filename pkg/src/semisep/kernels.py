"""Semi-separable kernel model: matrix-valued factor functions and blocks.

A kernel on (a, b) takes the value F1(x) G1(x') below the diagonal and
F2(x) G2(x') above it; the triangular combination H = F1 G1 - F2 G2 and the
block functions B, C, A built from the factors drive all determinant
reductions.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import ContractError, DimensionError, DomainError

__all__ = [
    "OperatorFunction",
    "SemiSeparableKernel",
    "BlockStructure",
    "DIAG_AVERAGE",
    "DIAG_LOWER",
    "DIAG_UPPER",
]

DIAG_AVERAGE = "average"
DIAG_LOWER = "lower"
DIAG_UPPER = "upper"
_DIAG_CONVENTIONS = (DIAG_AVERAGE, DIAG_LOWER, DIAG_UPPER)

_DOMAIN_SLACK = 1e-9


@dataclass
class OperatorFunction:
    """A matrix-valued function of one real variable on a finite interval.

    Backed either by a closed-form evaluator or by panel-aligned samples
    with piecewise-polynomial interpolation (degree recorded).  Evaluation
    is allowed on the closed interval; re-entrant and side-effect free.
    """

    rows: int
    cols: int
    interval: tuple
    fun: Callable[[float], np.ndarray] = field(repr=False)
    degree: int | None = None  # interpolation degree; None for closed form

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionError("rows and cols must be positive")
        a, b = self.interval
        if not a < b:
            raise DomainError("interval must satisfy a < b")

    def __call__(self, x: float) -> np.ndarray:
        a, b = self.interval
        slack = _DOMAIN_SLACK * (b - a)
        if x < a - slack or x > b + slack:
            raise DomainError(f"x={x} outside interval [{a}, {b}]")
        m = np.asarray(self.fun(float(np.clip(x, a, b))), dtype=complex)
        if m.shape != (self.rows, self.cols):
            raise DimensionError(
                f"evaluator returned shape {m.shape}, declared ({self.rows}, {self.cols})"
            )
        if not np.all(np.isfinite(m)):
            raise ContractError(f"non-finite evaluation at x={x}")
        return m

    def sample(self, xs) -> np.ndarray:
        """Stacked evaluations, shape (len(xs), rows, cols)."""
        return np.stack([self(x) for x in np.asarray(xs, dtype=float)])

    @classmethod
    def from_callable(cls, fun, rows, cols, interval):
        return cls(rows=rows, cols=cols, interval=tuple(interval), fun=fun)

    @classmethod
    def constant(cls, mat, interval):
        m = np.asarray(mat, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        return cls(rows=m.shape[0], cols=m.shape[1], interval=tuple(interval),
                   fun=lambda x, m=m: m)

    @classmethod
    def zero(cls, rows, cols, interval):
        z = np.zeros((rows, cols), dtype=complex)
        return cls(rows=rows, cols=cols, interval=tuple(interval), fun=lambda x, z=z: z)

    @classmethod
    def from_samples(cls, xs, mats, degree: int = 3):
        """Interpolate sampled matrices; degree at most 3."""
        xs = np.asarray(xs, dtype=float)
        mats = np.asarray(mats, dtype=complex)
        if mats.ndim != 3 or mats.shape[0] != len(xs):
            raise DimensionError("mats must have shape (len(xs), rows, cols)")
        if len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise DomainError("sample abscissae must be strictly increasing")
        if not 1 <= degree <= 3:
            raise DomainError("interpolation degree must be 1..3")
        k = min(degree, len(xs) - 1)
        flat = mats.reshape(len(xs), -1)
        sp_re = make_interp_spline(xs, flat.real, k=k, axis=0)
        sp_im = make_interp_spline(xs, flat.imag, k=k, axis=0)
        rows, cols = mats.shape[1], mats.shape[2]

        def fun(x, sp_re=sp_re, sp_im=sp_im, rows=rows, cols=cols):
            return (sp_re(x) + 1j * sp_im(x)).reshape(rows, cols)

        return cls(rows=rows, cols=cols, interval=(xs[0], xs[-1]), fun=fun, degree=k)

    @classmethod
    def from_csv(cls, path, degree: int = 3):
        """Read samples from CSV with header x, re_1_1, im_1_1, ... (row-major)."""
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            rows = [row for row in reader if row]
        labels = [h.strip() for h in header]
        if not labels or labels[0].lower() != "x":
            raise ContractError("CSV must start with a header row whose first column is 'x'")
        pat = re.compile(r"^(re|im)_(\d+)_(\d+)$")
        shape_r = shape_c = 0
        for lab in labels[1:]:
            m = pat.match(lab.lower())
            if not m:
                raise ContractError(f"unrecognized CSV column {lab!r}")
            shape_r = max(shape_r, int(m.group(2)))
            shape_c = max(shape_c, int(m.group(3)))
        expected = 1 + 2 * shape_r * shape_c
        if len(labels) != expected:
            raise ContractError(
                f"CSV has {len(labels)} columns, expected {expected} for a "
                f"{shape_r}x{shape_c} matrix"
            )
        data = np.array([[float(v) for v in row] for row in rows])
        xs = data[:, 0]
        vals = data[:, 1::2] + 1j * data[:, 2::2]
        mats = vals.reshape(len(xs), shape_r, shape_c)
        return cls.from_samples(xs, mats, degree=degree)

    def to_csv(self, path, xs):
        """Write samples at ``xs`` in the format read by ``from_csv``."""
        xs = np.asarray(xs, dtype=float)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            head = ["x"]
            for i in range(1, self.rows + 1):
                for j in range(1, self.cols + 1):
                    head += [f"re_{i}_{j}", f"im_{i}_{j}"]
            writer.writerow(head)
            for x in xs:
                m = self(x).reshape(-1)
                row = [repr(x)]
                for v in m:
                    row += [repr(v.real), repr(v.imag)]
                writer.writerow(row)


class BlockStructure(NamedTuple):
    """Block functions of a kernel: C(x), B(x), A(x) = B(x) C(x), and P0."""

    c: Callable[[float], np.ndarray]
    b: Callable[[float], np.ndarray]
    a: Callable[[float], np.ndarray]
    p0: np.ndarray


@dataclass
class SemiSeparableKernel:
    """The quadruple (F1, G1, F2, G2) on a shared interval.

    F1: d x n1, G1: n1 x d, F2: d x n2, G2: n2 x d.  The diagonal value is
    set by ``diagonal``: the average of the two branches (default), or the
    lower/upper one-sided limit.
    """

    F1: OperatorFunction
    G1: OperatorFunction
    F2: OperatorFunction
    G2: OperatorFunction
    diagonal: str = DIAG_AVERAGE

    def __post_init__(self):
        if self.diagonal not in _DIAG_CONVENTIONS:
            raise ContractError(f"diagonal convention must be one of {_DIAG_CONVENTIONS}")
        d = self.F1.rows
        if self.F2.rows != d or self.G1.cols != d or self.G2.cols != d:
            raise DimensionError("factor dimensions do not share a common range space")
        if self.F1.cols != self.G1.rows:
            raise DimensionError("F1/G1 inner dimensions disagree")
        if self.F2.cols != self.G2.rows:
            raise DimensionError("F2/G2 inner dimensions disagree")
        ivs = {f.interval for f in (self.F1, self.G1, self.F2, self.G2)}
        if len(ivs) != 1:
            raise DomainError(f"factors must share one interval, got {sorted(ivs)}")

    @property
    def d(self) -> int:
        return self.F1.rows

    @property
    def n1(self) -> int:
        return self.F1.cols

    @property
    def n2(self) -> int:
        return self.F2.cols

    @property
    def interval(self):
        return self.F1.interval

    def eval(self, x: float, xp: float) -> np.ndarray:
        """Kernel value at (x, x'); the diagonal follows the set convention."""
        if xp < x:
            return self.F1(x) @ self.G1(xp)
        if x < xp:
            return self.F2(x) @ self.G2(xp)
        low = self.F1(x) @ self.G1(x)
        up = self.F2(x) @ self.G2(x)
        if self.diagonal == DIAG_LOWER:
            return low
        if self.diagonal == DIAG_UPPER:
            return up
        return 0.5 * (low + up)

    def eval_h(self, x: float, xp: float) -> np.ndarray:
        """Triangular-kernel value H(x, x') = F1(x) G1(x') - F2(x) G2(x')."""
        return self.F1(x) @ self.G1(xp) - self.F2(x) @ self.G2(xp)

    def block_c(self, x: float) -> np.ndarray:
        """Row block (F1(x)  F2(x)), shape d x (n1 + n2)."""
        return np.hstack([self.F1(x), self.F2(x)])

    def block_b(self, x: float) -> np.ndarray:
        """Column block (G1(x); -G2(x)), shape (n1 + n2) x d."""
        return np.vstack([self.G1(x), -self.G2(x)])

    def block_a(self, x: float) -> np.ndarray:
        """Generator A(x) of the propagator equation; equals B(x) C(x)."""
        f1, f2 = self.F1(x), self.F2(x)
        g1, g2 = self.G1(x), self.G2(x)
        top = np.hstack([g1 @ f1, g1 @ f2])
        bot = np.hstack([-g2 @ f1, -g2 @ f2])
        return np.vstack([top, bot])

    @property
    def p0(self) -> np.ndarray:
        """Projector onto the second factor space inside the block space."""
        n = self.n1 + self.n2
        p = np.zeros((n, n), dtype=complex)
        p[self.n1:, self.n1:] = np.eye(self.n2)
        return p

    def blocks(self) -> BlockStructure:
        return BlockStructure(c=self.block_c, b=self.block_b, a=self.block_a, p0=self.p0)

    def with_diagonal(self, convention: str) -> "SemiSeparableKernel":
        return SemiSeparableKernel(self.F1, self.G1, self.F2, self.G2, diagonal=convention)
