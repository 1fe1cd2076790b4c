"""CST airfoil representation and Hicks-Henne bump modification.

An airfoil is stored as two sets of 7 CST coefficients (6th-order
Bernstein shape function, class exponents 0.5/1.0, zero trailing-edge
gap).  Local modifications are sine-power bumps added to the upper
surface; the bumped curve is refit with CST (smoothing) and the lower
surface is rescaled to hold maximum thickness fixed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_CST = 7  # 6th-order Bernstein -> 7 coefficients per surface
CLASS_N1 = 0.5
CLASS_N2 = 1.0
N_STATIONS = 201  # cosine grid used for evaluation, fitting, thickness
WIDTH_GRID = 2001  # uniform grid used to measure bump widths
_BINOM6 = np.array([math.comb(6, i) for i in range(N_CST)], dtype=float)


class GeometryError(ValueError):
    """Raised for invalid stations, fit failures, or degenerate rescales."""


def cosine_stations(n: int = N_STATIONS) -> np.ndarray:
    """Chordwise stations clustered at both ends, x[0]=0, x[-1]=1."""
    return 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n)))


@dataclass(frozen=True)
class BumpAction:
    """Sine-power bump: peak location t1, width s_b, signed height h_b."""

    t1: float
    s_b: float
    h_b: float


@dataclass(frozen=True)
class AirfoilGeom:
    """CST airfoil with a maximum-thickness constraint.

    Construct through :func:`make_airfoil` so the lower surface is
    rescaled to meet ``t_max``.
    """

    cst_upper: np.ndarray
    cst_lower: np.ndarray
    t_max: float

    def upper_y(self, x: np.ndarray) -> np.ndarray:
        return cst_evaluate(self.cst_upper, x)

    def lower_y(self, x: np.ndarray) -> np.ndarray:
        return cst_evaluate(self.cst_lower, x)

    @property
    def cst14(self) -> np.ndarray:
        return np.concatenate([self.cst_upper, self.cst_lower])


def cst_evaluate(coeffs, x) -> np.ndarray:
    """Evaluate a 7-coefficient CST surface at stations x in [0,1]."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (N_CST,):
        raise GeometryError(f"expected {N_CST} CST coefficients, got {coeffs.shape}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise GeometryError("station outside [0, 1]")
    cls = np.power(x, CLASS_N1) * np.power(1.0 - x, CLASS_N2)
    shape = np.zeros_like(x)
    for i in range(N_CST):
        shape = shape + coeffs[i] * _BINOM6[i] * x**i * (1.0 - x) ** (6 - i)
    return cls * shape


def _design_matrix(x: np.ndarray) -> np.ndarray:
    cls = np.power(x, CLASS_N1) * np.power(1.0 - x, CLASS_N2)
    cols = [cls * _BINOM6[i] * x**i * (1.0 - x) ** (6 - i) for i in range(N_CST)]
    return np.stack(cols, axis=1)


def cst_fit(x, y) -> np.ndarray:
    """Least-squares CST coefficients for a sampled curve."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise GeometryError("x and y must be 1-D arrays of equal length")
    if x.size < N_CST + 1:
        raise GeometryError("need at least 8 stations to fit 7 coefficients")
    a = _design_matrix(x)
    coeffs, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    if rank < N_CST:
        raise GeometryError("rank-deficient CST design matrix")
    return coeffs


def bump_y(t1: float, t2: float, h_b: float, x) -> np.ndarray:
    """Hicks-Henne bump h_b * sin(pi * x^e)^t2 with e mapping t1 to 0.5."""
    if not 0.0 < t1 < 1.0:
        raise GeometryError("t1 must be in (0, 1)")
    if t2 <= 0.0:
        raise GeometryError("t2 must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise GeometryError("station outside [0, 1]")
    e = math.log(0.5) / math.log(t1)
    # sin can underflow to a tiny negative at x=1; clip before the
    # fractional power
    s = np.clip(np.sin(np.pi * np.power(x, e)), 0.0, None)
    # sin(pi) rounds to ~1e-16 instead of 0 and a fractional power t2
    # would inflate it, so pin the analytic end zeros
    s[(x == 0.0) | (x == 1.0)] = 0.0
    return h_b * np.power(s, t2)


def measure_bump_width(t1: float, t2: float) -> float:
    """Chordwise distance between the two 1%-height points of a bump.

    Measured on a 2001-point uniform grid with linear interpolation of
    the crossings; independent of h_b.
    """
    x = np.linspace(0.0, 1.0, WIDTH_GRID)
    f = bump_y(t1, t2, 1.0, x)
    above = np.nonzero(f >= 0.01)[0]
    if above.size == 0:
        return 0.0

    def _cross(i0: int, i1: int) -> float:
        f0, f1 = f[i0], f[i1]
        if f1 == f0:
            return x[i0]
        return x[i0] + (0.01 - f0) * (x[i1] - x[i0]) / (f1 - f0)

    i_l, i_r = above[0], above[-1]
    x_l = x[i_l] if i_l == 0 else _cross(i_l - 1, i_l)
    x_r = x[i_r] if i_r == WIDTH_GRID - 1 else _cross(i_r, i_r + 1)
    return x_r - x_l


_T2_LO = 0.2
_T2_HI = 200.0


def solve_t2(t1: float, s_b: float, tol: float = 1e-6) -> tuple[float, bool]:
    """Shape exponent giving a 1%-height width of s_b at peak t1.

    Returns (t2, clamped).  clamped is set when the requested width is
    not achievable inside the t2 bracket, or when a 1% crossing sits in
    a boundary grid cell (flank truncated by the [0,1] support); in the
    infeasible case the closest achievable t2 is returned.
    """
    if not 0.0 < t1 < 1.0:
        raise GeometryError("t1 must be in (0, 1)")
    if s_b <= 0.0:
        raise GeometryError("s_b must be positive")
    # width is monotone decreasing in t2
    w_lo = measure_bump_width(t1, _T2_LO)
    w_hi = measure_bump_width(t1, _T2_HI)
    if s_b >= w_lo:
        return _T2_LO, True
    if s_b <= w_hi:
        return _T2_HI, True
    lo, hi = _T2_LO, _T2_HI
    t2 = 0.5 * (lo + hi)
    for _ in range(100):
        t2 = 0.5 * (lo + hi)
        w = measure_bump_width(t1, t2)
        if abs(w - s_b) < 0.25 * tol:
            break
        if w > s_b:
            lo = t2
        else:
            hi = t2
    clamped = _flank_truncated(t1, t2)
    return t2, clamped


def _flank_truncated(t1: float, t2: float) -> bool:
    """True when a 1% crossing falls in the first or last width-grid cell."""
    x = np.linspace(0.0, 1.0, WIDTH_GRID)
    f = bump_y(t1, t2, 1.0, x)
    above = np.nonzero(f >= 0.01)[0]
    if above.size == 0:
        return True
    return above[0] <= 1 or above[-1] >= WIDTH_GRID - 2


def curvature(x, y) -> np.ndarray:
    """kappa = y'' / (1 + y'^2)^(3/2), central differences, one-sided ends."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise GeometryError("need at least 3 stations for curvature")
    if np.any(np.diff(x) <= 0.0):
        raise GeometryError("stations must be strictly increasing")
    dy = np.gradient(y, x)
    d2y = np.gradient(dy, x)
    return d2y / np.power(1.0 + dy**2, 1.5)


def max_thickness(airfoil: AirfoilGeom) -> float:
    """Maximum of (y_upper - y_lower) on the fixed 201-point cosine grid."""
    x = cosine_stations()
    return float(np.max(airfoil.upper_y(x) - airfoil.lower_y(x)))


def _thickness_of(upper: np.ndarray, lower: np.ndarray, x: np.ndarray) -> float:
    return float(np.max(cst_evaluate(upper, x) - cst_evaluate(lower, x)))


def _rescale_lower(upper, lower, t_max: float) -> np.ndarray:
    """Scale lower coefficients so max thickness equals t_max.

    Bisection on the scale factor in [0.25, 4.0]; thickness is monotone
    in the factor for any lower surface below the upper one.
    """
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    x = cosine_stations()
    yu = cst_evaluate(upper, x)
    yl = cst_evaluate(lower, x)

    def thick(s: float) -> float:
        return float(np.max(yu - s * yl))

    if abs(thick(1.0) - t_max) <= 1e-9:
        return lower
    lo, hi = 0.25, 4.0
    f_lo, f_hi = thick(lo) - t_max, thick(hi) - t_max
    if f_lo * f_hi > 0.0:
        raise GeometryError("cannot bracket thickness scale factor")
    # thick may be increasing or decreasing in s depending on sign of yl
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = thick(mid) - t_max
        if abs(f_mid) < 1e-10 or hi - lo < 1e-12:
            return mid * lower
        if (f_mid > 0.0) == (f_hi > 0.0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi) * lower


def make_airfoil(cst_upper, cst_lower, t_max: float) -> AirfoilGeom:
    """Build an airfoil, rescaling the lower surface to meet t_max."""
    upper = np.asarray(cst_upper, dtype=float).copy()
    lower = _rescale_lower(upper, cst_lower, t_max)
    return AirfoilGeom(cst_upper=upper, cst_lower=lower, t_max=t_max)


def apply_action(airfoil: AirfoilGeom, action: BumpAction) -> AirfoilGeom:
    """Add a bump to the upper surface, refit with CST, restore thickness.

    The refit is the smoothing step: the bumped curve is reconstructed
    as a 6th-order CST surface, then the lower surface is rescaled so
    the maximum thickness stays at t_max.
    """
    t2, _ = solve_t2(action.t1, action.s_b)
    x = cosine_stations()
    y_bumped = airfoil.upper_y(x) + bump_y(action.t1, t2, action.h_b, x)
    new_upper = cst_fit(x, y_bumped)
    new_lower = _rescale_lower(new_upper, airfoil.cst_lower, airfoil.t_max)
    return AirfoilGeom(cst_upper=new_upper, cst_lower=new_lower, t_max=airfoil.t_max)


# ---------------------------------------------------------------------------
# file formats


def write_coordinates(path, airfoil: AirfoilGeom, n: int = N_STATIONS) -> None:
    """Selig-order coordinate file: upper TE->LE, then lower LE->TE."""
    x = cosine_stations(n)
    yu = airfoil.upper_y(x)
    yl = airfoil.lower_y(x)
    with open(path, "w") as fh:
        fh.write("# airfoil coordinates, Selig order\n")
        for xi, yi in zip(x[::-1], yu[::-1]):
            fh.write(f"{float(xi)!r} {float(yi)!r}\n")
        for xi, yi in zip(x[1:], yl[1:]):
            fh.write(f"{float(xi)!r} {float(yi)!r}\n")


def read_coordinates(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a Selig-order coordinate file; returns (x, y) as written."""
    xs, ys = [], []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            a, b = line.split()
            xs.append(float(a))
            ys.append(float(b))
    return np.array(xs), np.array(ys)


def write_cst_file(path, airfoil: AirfoilGeom) -> None:
    """14 whitespace-separated coefficients, then t_max on line two."""
    with open(path, "w") as fh:
        fh.write(" ".join(repr(float(c)) for c in airfoil.cst14) + "\n")
        fh.write(repr(float(airfoil.t_max)) + "\n")


def read_cst_file(path) -> AirfoilGeom:
    with open(path) as fh:
        vals = [float(v) for v in fh.readline().split()]
        t_max = float(fh.readline().strip())
    if len(vals) != 2 * N_CST:
        raise GeometryError("CST file must hold 14 coefficients on line one")
    return make_airfoil(vals[:N_CST], vals[N_CST:], t_max)
