"""Named kernel and potential families constructible from plain parameters.

These back the CLI's JSON job configs and the randomized test batteries.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError
from .kernels import OperatorFunction, SemiSeparableKernel
from .schrodinger import (
    Potential,
    WEIGHT_L1,
    WEIGHT_L1_WEIGHTED,
)

__all__ = [
    "kernel_family",
    "potential_family",
    "random_smooth_kernel",
]

_INF = math.inf


def _trig_factor(rng, rows, cols, amplitude=0.7):
    base = rng.uniform(-amplitude, amplitude, (rows, cols))
    wave = rng.uniform(-amplitude / 2, amplitude / 2, (rows, cols))
    phase = rng.uniform(0.0, 2 * np.pi, (rows, cols))
    freq = rng.integers(1, 3)

    def fun(x, base=base, wave=wave, phase=phase, freq=freq):
        return (base + wave * np.sin(2 * np.pi * freq * x + phase)).astype(complex)

    return fun


def random_smooth_kernel(seed, d=2, n1=2, n2=2, interval=(0.0, 1.0),
                         continuous=True) -> SemiSeparableKernel:
    """Randomized kernel with closed-form trigonometric factors.

    With ``continuous=True`` (the Green's-function-like case) the two
    branches agree on the diagonal: F2 = F1 M and G1 = M G2 for a smooth
    invertible square matrix M, which forces n1 == n2.  Otherwise the four
    factors are drawn independently and the kernel jumps across the
    diagonal.
    """
    rng = np.random.default_rng(seed)
    if continuous:
        if n1 != n2:
            raise ContractError("diagonal-continuous construction needs n1 == n2")
        f1_fun = _trig_factor(rng, d, n1)
        g2_fun = _trig_factor(rng, n2, d)
        phases = rng.uniform(0.0, 2 * np.pi, (n1, n1))

        def m_fun(x, phases=phases):
            return np.eye(n1) * (1.3 + 0.3 * np.sin(np.pi * x)) \
                + 0.2 * np.sin(np.pi * x + phases)

        f2_fun = lambda x: f1_fun(x) @ m_fun(x)
        g1_fun = lambda x: m_fun(x) @ g2_fun(x)
    else:
        f1_fun = _trig_factor(rng, d, n1)
        g1_fun = _trig_factor(rng, n1, d)
        f2_fun = _trig_factor(rng, d, n2)
        g2_fun = _trig_factor(rng, n2, d)
    return SemiSeparableKernel(
        OperatorFunction.from_callable(f1_fun, d, n1, interval),
        OperatorFunction.from_callable(g1_fun, n1, d, interval),
        OperatorFunction.from_callable(f2_fun, d, n2, interval),
        OperatorFunction.from_callable(g2_fun, n2, d, interval),
    )


def kernel_family(name: str, **params) -> SemiSeparableKernel:
    """Construct a kernel by family name.

    Families: ``rank_one`` (constant unit factors on (0,1)),
    ``exp_separable`` (e^x against e^{-x'}), ``smooth_random`` (see
    ``random_smooth_kernel``), ``csv`` (four sampled factor files F1, G1,
    F2, G2).
    """
    if name == "rank_one":
        interval = tuple(params.get("interval", (0.0, 1.0)))
        one = OperatorFunction.constant([[1.0]], interval)
        return SemiSeparableKernel(one, one, one, one)
    if name == "exp_separable":
        interval = tuple(params.get("interval", (0.0, 1.0)))
        grow = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(x)]], dtype=complex), 1, 1, interval)
        decay = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(-x)]], dtype=complex), 1, 1, interval)
        return SemiSeparableKernel(grow, decay, grow, decay)
    if name == "smooth_random":
        return random_smooth_kernel(
            seed=int(params.get("seed", 0)),
            d=int(params.get("d", 2)),
            n1=int(params.get("n1", 2)),
            n2=int(params.get("n2", 2)),
            interval=tuple(params.get("interval", (0.0, 1.0))),
            continuous=bool(params.get("continuous", True)),
        )
    if name == "csv":
        factors = [OperatorFunction.from_csv(params[key]) for key in ("F1", "G1", "F2", "G2")]
        return SemiSeparableKernel(*factors)
    raise ContractError(f"unknown kernel family {name!r}")


def _square_well(depth, width, center, domain):
    lo, hi = center - width / 2.0, center + width / 2.0
    if domain == "half" and lo < 0:
        raise ContractError("half-line well must sit inside (0, inf)")
    interval = (0.0, _INF) if domain == "half" else (-_INF, _INF)

    def v_fun(x, lo=lo, hi=hi, depth=depth):
        inside = lo <= x <= hi
        return np.array([[-depth if inside else 0.0]], dtype=complex)

    def envelope(x, lo=lo, hi=hi, depth=depth):
        return abs(depth) if lo <= x <= hi else 0.0

    op = OperatorFunction.from_callable(v_fun, 1, 1, interval)
    weight = WEIGHT_L1_WEIGHTED if domain == "half" else WEIGHT_L1
    return Potential(op=op, hermitian=True, envelope=envelope,
                     weight_class=weight, breakpoints=(lo, hi))


def _gaussian(amplitude, sigma, center, domain):
    interval = (0.0, _INF) if domain == "half" else (-_INF, _INF)

    def v_fun(x, a=amplitude, s=sigma, c=center):
        return np.array([[a * np.exp(-((x - c) ** 2) / (2 * s * s))]], dtype=complex)

    def envelope(x, a=abs(amplitude), s=sigma, c=center):
        return a * math.exp(-((x - c) ** 2) / (2 * s * s))

    op = OperatorFunction.from_callable(v_fun, 1, 1, interval)
    weight = WEIGHT_L1_WEIGHTED if domain == "half" else WEIGHT_L1
    return Potential(op=op, hermitian=True, envelope=envelope, weight_class=weight)


def _exponential(amplitude, rate):
    interval = (0.0, _INF)

    def v_fun(x, a=amplitude, r=rate):
        return np.array([[a * np.exp(-r * x)]], dtype=complex)

    def envelope(x, a=abs(amplitude), r=rate):
        return a * math.exp(-r * x)

    op = OperatorFunction.from_callable(v_fun, 1, 1, interval)
    return Potential(op=op, hermitian=True, envelope=envelope,
                     weight_class=WEIGHT_L1_WEIGHTED)


def _matrix_diag(entries, domain):
    parts = [potential_family(e["family"], **{k: v for k, v in e.items() if k != "family"})
             for e in entries]
    d = len(parts)
    interval = parts[0].interval
    for p in parts:
        if p.interval != interval:
            raise ContractError("diagonal channels must share one domain")

    def v_fun(x, parts=parts, d=d):
        out = np.zeros((d, d), dtype=complex)
        for i, p in enumerate(parts):
            out[i, i] = p.op(x)[0, 0]
        return out

    def envelope(x, parts=parts):
        return sum(p.envelope(x) for p in parts)

    op = OperatorFunction.from_callable(v_fun, d, d, interval)
    breaks = tuple(sorted({b for p in parts for b in p.breakpoints}))
    weight = parts[0].weight_class
    return Potential(op=op, hermitian=all(p.hermitian for p in parts),
                     envelope=envelope, weight_class=weight, breakpoints=breaks)


def _matrix_coupled(amplitude, profile, domain):
    amp = np.asarray(amplitude, dtype=complex)
    if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
        raise ContractError("amplitude must be a square matrix")
    hermitian = bool(np.allclose(amp, amp.conj().T, atol=1e-14))
    base = potential_family(profile["family"],
                            **{k: v for k, v in profile.items() if k != "family"})
    d = amp.shape[0]
    trace_norm = float(np.sum(np.linalg.svd(amp, compute_uv=False)))

    def v_fun(x, amp=amp, base=base):
        return amp * base.op(x)[0, 0]

    def envelope(x, base=base, tn=trace_norm):
        return tn * base.envelope(x)

    op = OperatorFunction.from_callable(v_fun, d, d, base.interval)
    return Potential(op=op, hermitian=hermitian and base.hermitian,
                     envelope=envelope, weight_class=base.weight_class,
                     breakpoints=base.breakpoints)


def potential_family(name: str, **params) -> Potential:
    """Construct a potential by family name.

    Families: ``square_well(depth, width, center, domain)``,
    ``gaussian(amplitude, sigma, center, domain)``,
    ``exponential(amplitude, rate)`` on the half line,
    ``matrix_diag(entries)`` for a diagonal matrix of scalar families,
    ``matrix_coupled(amplitude, profile)`` for a constant Hermitian matrix
    times a scalar profile, and ``csv(path, envelope_scale)`` for sampled
    data on a finite interval.
    """
    if name == "square_well":
        return _square_well(
            depth=float(params["depth"]),
            width=float(params["width"]),
            center=float(params.get("center", 0.0)),
            domain=params.get("domain", "full"),
        )
    if name == "gaussian":
        return _gaussian(
            amplitude=float(params["amplitude"]),
            sigma=float(params["sigma"]),
            center=float(params.get("center", 0.0)),
            domain=params.get("domain", "full"),
        )
    if name == "exponential":
        return _exponential(
            amplitude=float(params["amplitude"]), rate=float(params.get("rate", 1.0)))
    if name == "matrix_diag":
        return _matrix_diag(params["entries"], params.get("domain", "full"))
    if name == "matrix_coupled":
        amp = params["amplitude"]
        if isinstance(amp, list):
            amp = [[complex(v) if not isinstance(v, list) else complex(*v) for v in row]
                   for row in amp]
        return _matrix_coupled(amp, params["profile"], params.get("domain", "full"))
    if name == "csv":
        op = OperatorFunction.from_csv(params["path"])
        scale = float(params.get("envelope_scale", 1.0))
        probe = np.linspace(op.interval[0], op.interval[1], 64)
        bound = scale * max(
            float(np.sum(np.linalg.svd(op(x), compute_uv=False))) for x in probe)
        hermitian = all(
            np.allclose(op(x), op(x).conj().T, atol=1e-10) for x in probe[::8])
        return Potential(op=op, hermitian=hermitian,
                         envelope=lambda x, b=bound: b,
                         weight_class=params.get("weight_class", WEIGHT_L1))
    raise ContractError(f"unknown potential family {name!r}")
