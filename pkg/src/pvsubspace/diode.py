"""Single-diode equivalent-circuit model of a PV cell.

The current at terminal voltage ``V`` is the root of

    g(I) = I_L - I_S (exp((V + I R_S) / (N_S n V_th)) - 1) - (V + I R_S) / R_P - I,

with the photocurrent ``I_L`` fixed by requiring ``I(0) = I_SC``.  ``g`` is
strictly decreasing in ``I``, so every solve here is a bracketed Newton
iteration that falls back to bisection whenever a Newton step leaves the
bracket.  Maximum power is found by golden-section search over
``[0, V_oc]`` after eliminating ``I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketFailure, ConfigError, ExponentOverflow, NoConvergence
from .params import DIODE_SI_2CM2, ParameterSpace, denormalize

BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
T_CELL = 298.15  # K, 25 degrees C

EXP_LIMIT = 700.0
MAX_ITER = 200
VOLTAGE_TOL = 1e-10
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DiodeParams:
    i_sc: float
    i_s: float
    n: float
    r_s: float
    r_p: float

    def __post_init__(self):
        for field in ("i_sc", "i_s", "n", "r_s", "r_p"):
            value = getattr(self, field)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(field, f"must be finite and > 0, got {value!r}")

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "DiodeParams":
        i_sc, i_s, n, r_s, r_p = (float(v) for v in values)
        return cls(i_sc, i_s, n, r_s, r_p)

    @classmethod
    def from_normalized(cls, x: Sequence[float], space: ParameterSpace = DIODE_SI_2CM2) -> "DiodeParams":
        return cls.from_vector(denormalize(space, x))


@dataclass(frozen=True)
class DiodeConstants:
    n_s: int = 1
    v_th: float = BOLTZMANN * T_CELL / ELEMENTARY_CHARGE

    def __post_init__(self):
        if int(self.n_s) != self.n_s or self.n_s < 1:
            raise ConfigError("n_s", f"must be a positive integer, got {self.n_s!r}")
        if not (math.isfinite(self.v_th) and self.v_th > 0):
            raise ConfigError("v_th", f"must be > 0, got {self.v_th!r}")


@dataclass(frozen=True)
class IVPoint:
    v: float
    i: float


@dataclass(frozen=True)
class PmaxResult:
    p_max: float
    v_max: float
    i_max: float
    v_oc: float

    def to_dict(self) -> dict:
        return {"p_max": self.p_max, "v_max": self.v_max, "i_max": self.i_max, "v_oc": self.v_oc}


def _exp(arg: float) -> float:
    if arg > EXP_LIMIT:
        raise ExponentOverflow(f"exponent {arg:.6g} exceeds {EXP_LIMIT}; inputs far outside physical ranges")
    return math.exp(arg)


def _expm1(arg: float) -> float:
    if arg > EXP_LIMIT:
        raise ExponentOverflow(f"exponent {arg:.6g} exceeds {EXP_LIMIT}; inputs far outside physical ranges")
    return math.expm1(arg)


def _scale(p: DiodeParams, c: DiodeConstants) -> float:
    return c.n_s * p.n * c.v_th


def photocurrent(p: DiodeParams, c: DiodeConstants = DiodeConstants()) -> float:
    a = _scale(p, c)
    return p.i_sc + p.i_s * _expm1(p.i_sc * p.r_s / a) + p.i_sc * p.r_s / p.r_p


def _solve_decreasing(fun: Callable[[float], tuple[float, float]], lo: float, hi: float,
                      x0: float, what: str) -> tuple[float, float]:
    """Root of a strictly decreasing function on ``[lo, hi]``.

    ``fun`` returns ``(value, derivative)``.  Returns ``(root, residual)``.
    """
    f_lo, _ = fun(lo)
    f_hi, _ = fun(hi)
    if f_lo == 0.0:
        return lo, 0.0
    if f_hi == 0.0:
        return hi, 0.0
    if not (f_lo > 0.0 > f_hi):
        raise BracketFailure(f"{what}: no sign change on [{lo!r}, {hi!r}] (g={f_lo!r}, {f_hi!r})")

    x = min(max(x0, lo), hi)
    fx, dfx = fun(x)
    for _ in range(MAX_ITER):
        if fx == 0.0:
            return x, 0.0
        if fx > 0.0:
            lo = x
        else:
            hi = x
        step = fx / dfx if dfx != 0.0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * max(1.0, abs(x)) or hi - lo <= 4e-16 * max(1.0, abs(x)):
            f_new, _ = fun(x_new)
            return (x_new, f_new) if abs(f_new) <= abs(fx) else (x, fx)
        x = x_new
        fx, dfx = fun(x)
    raise NoConvergence(f"{what}: no convergence after {MAX_ITER} iterations")


def _current_residual(p: DiodeParams, a: float, i_l: float, v: float) -> Callable[[float], tuple[float, float]]:
    def g(i: float) -> tuple[float, float]:
        vd = v + i * p.r_s
        e = _exp(vd / a)
        value = i_l - p.i_s * (e - 1.0) - vd / p.r_p - i
        slope = -p.i_s * p.r_s / a * e - p.r_s / p.r_p - 1.0
        return value, slope
    return g


def model_residual(p: DiodeParams, c: DiodeConstants, v: float, i: float) -> float:
    """``g(I)`` at the given point; zero on the I-V curve."""
    a = _scale(p, c)
    value, _ = _current_residual(p, a, photocurrent(p, c), v)(i)
    return value


def _solve_current(p: DiodeParams, a: float, i_l: float, v: float, guess: float | None = None) -> float:
    g = _current_residual(p, a, i_l, v)
    x0 = p.i_sc if guess is None else guess
    i, _ = _solve_decreasing(g, -i_l, i_l, x0, f"current at V={v!r}")
    return i


def open_circuit_voltage(p: DiodeParams, c: DiodeConstants = DiodeConstants()) -> float:
    """Voltage where the current vanishes.

    At ``I = 0`` the model is explicit in ``V``; its root lies below the
    shunt-free estimate ``a log(I_L / I_S + 1)``.
    """
    a = _scale(p, c)
    i_l = photocurrent(p, c)
    top = a * math.log(i_l / p.i_s + 1.0)

    def h(v: float) -> tuple[float, float]:
        e = _exp(v / a)
        return i_l - p.i_s * (e - 1.0) - v / p.r_p, -p.i_s / a * e - 1.0 / p.r_p

    v_oc, _ = _solve_decreasing(h, 0.0, top, top, "open-circuit voltage")
    return v_oc


def solve_current(p: DiodeParams, c: DiodeConstants = DiodeConstants(), v: float = 0.0,
                  v_oc: float | None = None) -> IVPoint:
    """Current at terminal voltage ``v`` with ``0 <= v <= V_oc``."""
    if v_oc is None:
        v_oc = open_circuit_voltage(p, c)
    if not 0.0 <= v <= v_oc * (1.0 + 1e-12):
        raise ConfigError("v", f"voltage {v!r} outside [0, V_oc={v_oc!r}]")
    i = _solve_current(p, _scale(p, c), photocurrent(p, c), float(v))
    return IVPoint(float(v), i)


def iv_curve(p: DiodeParams, c: DiodeConstants = DiodeConstants(), points: int = 100) -> list[IVPoint]:
    if points < 2:
        raise ConfigError("points", f"need at least 2 points, got {points}")
    a = _scale(p, c)
    i_l = photocurrent(p, c)
    v_oc = open_circuit_voltage(p, c)
    curve = []
    guess = p.i_sc
    for v in np.linspace(0.0, v_oc, points):
        guess = _solve_current(p, a, i_l, float(v), guess)
        curve.append(IVPoint(float(v), guess))
    return curve


def golden_section_max(fun: Callable[[float], float], lo: float, hi: float,
                       tol: float = VOLTAGE_TOL) -> tuple[float, float]:
    """Maximize a unimodal function on ``[lo, hi]`` to interval width ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def p_max(p: DiodeParams, c: DiodeConstants = DiodeConstants(), tol: float = VOLTAGE_TOL) -> PmaxResult:
    """Maximum of ``V * I(V)`` along the I-V curve."""
    a = _scale(p, c)
    i_l = photocurrent(p, c)
    v_oc = open_circuit_voltage(p, c)
    last = [p.i_sc]

    def power(v: float) -> float:
        last[0] = _solve_current(p, a, i_l, v, last[0])
        return v * last[0]

    v_best, _ = golden_section_max(power, 0.0, v_oc, tol)
    i_best = _solve_current(p, a, i_l, v_best, last[0])
    return PmaxResult(v_best * i_best, v_best, i_best, v_oc)


@dataclass(frozen=True)
class DiodePmaxModel:
    """``P_max`` as a function of a normalized point; picklable for process pools."""

    space: ParameterSpace = DIODE_SI_2CM2
    constants: DiodeConstants = DiodeConstants()
    model_id: str = "diode-si-2cm2"

    def __call__(self, x: Sequence[float]) -> float:
        return p_max(DiodeParams.from_normalized(x, self.space), self.constants).p_max
