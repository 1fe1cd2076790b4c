"""Wall Mach number distributions and their physical features.

The upper-surface distribution is reduced to six features: suction-peak
Mach MwL, shock location X1, pre-shock Mach Mw1, highest post-shock
Mach MwA, highest lower-surface Mach, and a suction-plateau smoothness
measure Err.  The RL state is the 4-vector [X1, Mw1, MwL, MwA].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GAMMA = 1.4  # air, perfect gas

# upper-surface search windows (chord fractions)
PEAK_WINDOW = (0.0, 0.2)
SHOCK_WINDOW = (0.2, 0.9)
MIN_SHOCK_DROP = 0.05  # minimum Mach drop across a detected shock


class NonphysicalPressureError(ValueError):
    """Static pressure ratio fell to or below zero."""


class FeatureError(ValueError):
    """Distribution too coarse or malformed for feature extraction."""


@dataclass(frozen=True)
class WallMachDistribution:
    x_upper: np.ndarray
    mw_upper: np.ndarray
    x_lower: np.ndarray
    mw_lower: np.ndarray
    m_inf: float


@dataclass(frozen=True)
class FeatureSet:
    x1: float
    mw1: float
    mwl: float
    mwa: float
    mw_lower: float
    err: float
    no_shock: bool = False

    @property
    def state(self) -> np.ndarray:
        """The 4-element RL state [X1, Mw1, MwL, MwA]."""
        return np.array([self.x1, self.mw1, self.mwl, self.mwa])


def cp_to_wall_mach(cp, m_inf: float):
    """Isentropic wall Mach number from pressure coefficient.

    p/p_inf = 1 + 0.7 M^2 cp, with total pressure (1 + 0.2 M^2)^3.5;
    cp = 0 recovers the free-stream Mach.
    """
    cp = np.asarray(cp, dtype=float)
    p_ratio = 1.0 + 0.7 * m_inf**2 * cp
    if np.any(p_ratio <= 0.0):
        raise NonphysicalPressureError("static pressure ratio <= 0")
    p0_ratio = (1.0 + 0.2 * m_inf**2) ** 3.5
    m2 = 5.0 * ((p0_ratio / p_ratio) ** (1.0 / 3.5) - 1.0)
    if np.any(m2 < -1e-12):
        raise NonphysicalPressureError("pressure above stagnation value")
    out = np.sqrt(np.clip(m2, 0.0, None))
    return float(out) if out.ndim == 0 else out


def sonic_cp(m_inf: float) -> float:
    """Pressure coefficient at which the wall Mach number equals one."""
    p0_ratio = (1.0 + 0.2 * m_inf**2) ** 3.5
    p_ratio = p0_ratio / 1.2**3.5
    return (p_ratio - 1.0) / (0.7 * m_inf**2)


def extract_features(dist: WallMachDistribution) -> FeatureSet:
    """Reduce a wall Mach distribution to the six physical features.

    Shock detection: steepest negative finite-difference gradient of
    mw_upper inside the shock window, accepted only when the monotone
    descending run around it drops at least MIN_SHOCK_DROP.  When no
    upper-surface station is supersonic (or no acceptable drop exists)
    the no_shock flag is set and Mw1/X1 fall back to the global upper
    maximum.
    """
    x = np.asarray(dist.x_upper, dtype=float)
    mw = np.asarray(dist.mw_upper, dtype=float)
    if x.size < 20:
        raise FeatureError("upper surface needs at least 20 stations")
    if np.any(np.diff(x) <= 0.0):
        raise FeatureError("upper stations must be strictly increasing")

    peak_mask = (x >= PEAK_WINDOW[0]) & (x <= PEAK_WINDOW[1])
    if not np.any(peak_mask):
        raise FeatureError("no stations in the suction-peak window")
    i_peak = int(np.nonzero(peak_mask)[0][np.argmax(mw[peak_mask])])
    mwl = float(mw[i_peak])

    mw_lower_max = float(np.max(dist.mw_lower)) if len(dist.mw_lower) else 0.0

    shock = _find_shock(x, mw)
    if np.max(mw) < 1.0 or shock is None:
        i_max = int(np.argmax(mw))
        return FeatureSet(
            x1=float(x[i_max]),
            mw1=float(mw[i_max]),
            mwl=mwl,
            mwa=float(np.min(mw[i_max:])) if i_max < mw.size else float(mw[-1]),
            mw_lower=mw_lower_max,
            err=_plateau_err(x, mw, i_peak, i_max),
            no_shock=True,
        )

    i_steep, i_pre, i_foot = shock
    x1 = 0.5 * (x[i_steep] + x[i_steep + 1])
    mw1 = float(mw[i_pre])
    mwa = float(np.max(mw[i_foot:]))
    err = _plateau_err(x, mw, i_peak, i_pre)
    return FeatureSet(x1=float(x1), mw1=mw1, mwl=mwl, mwa=mwa,
                      mw_lower=mw_lower_max, err=err, no_shock=False)


def _find_shock(x: np.ndarray, mw: np.ndarray):
    """Locate the steepest descending interval and its monotone run.

    Returns (steepest interval index, pre-shock local-max index,
    shock-foot index) or None when no drop of MIN_SHOCK_DROP exists.
    """
    grad = np.diff(mw) / np.diff(x)
    mid = 0.5 * (x[:-1] + x[1:])
    window = (mid >= SHOCK_WINDOW[0]) & (mid <= SHOCK_WINDOW[1])
    if not np.any(window) or np.min(grad[window]) >= 0.0:
        return None
    cand = np.nonzero(window)[0]
    i_steep = int(cand[np.argmin(grad[cand])])
    # expand the monotone descending run around the steepest cell
    i_pre = i_steep
    while i_pre > 0 and mw[i_pre - 1] > mw[i_pre]:
        i_pre -= 1
    i_foot = i_steep + 1
    while i_foot < mw.size - 1 and mw[i_foot + 1] < mw[i_foot]:
        i_foot += 1
    if mw[i_pre] - mw[i_foot] < MIN_SHOCK_DROP:
        return None
    return i_steep, i_pre, i_foot


def _plateau_err(x: np.ndarray, mw: np.ndarray, i_peak: int, i_pre: int) -> float:
    """RMS deviation of mw from the peak-to-preshock chord line.

    Stand-in for the published plateau-smoothness measure; isolated
    here so it can be swapped without touching callers.
    """
    if i_pre <= i_peak + 1:
        return 0.0
    xs = x[i_peak : i_pre + 1]
    ys = mw[i_peak : i_pre + 1]
    line = ys[0] + (ys[-1] - ys[0]) * (xs - xs[0]) / (xs[-1] - xs[0])
    inner = slice(1, -1)
    dev = ys[inner] - line[inner]
    if dev.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(dev**2)))


def is_single_shock(features: FeatureSet) -> bool:
    """True when the distribution carries a genuine single shock."""
    return (not features.no_shock) and features.mw1 >= 1.0


# ---------------------------------------------------------------------------
# distribution file format: "x value surface_id" rows, header declares the
# value kind ("cp" or "mw") and the free-stream Mach


def write_distribution(path, dist: WallMachDistribution) -> None:
    with open(path, "w") as fh:
        fh.write(f"# kind=mw m_inf={float(dist.m_inf)!r}\n")
        for xi, mi in zip(dist.x_upper, dist.mw_upper):
            fh.write(f"{float(xi)!r} {float(mi)!r} 0\n")
        for xi, mi in zip(dist.x_lower, dist.mw_lower):
            fh.write(f"{float(xi)!r} {float(mi)!r} 1\n")


def read_distribution(path) -> WallMachDistribution:
    kind = "mw"
    m_inf = None
    rows: list[tuple[float, float, int]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                for tok in line.lstrip("#").split():
                    if tok.startswith("kind="):
                        kind = tok.split("=", 1)[1]
                    elif tok.startswith("m_inf="):
                        m_inf = float(tok.split("=", 1)[1])
                continue
            if not line:
                continue
            a, b, sid = line.split()
            rows.append((float(a), float(b), int(sid)))
    if m_inf is None:
        raise FeatureError("distribution file header must declare m_inf")
    up = sorted((r for r in rows if r[2] == 0), key=lambda r: r[0])
    lo = sorted((r for r in rows if r[2] == 1), key=lambda r: r[0])
    xu = np.array([r[0] for r in up])
    vu = np.array([r[1] for r in up])
    xl = np.array([r[0] for r in lo])
    vl = np.array([r[1] for r in lo])
    if kind == "cp":
        vu = cp_to_wall_mach(vu, m_inf)
        vl = cp_to_wall_mach(vl, m_inf)
    return WallMachDistribution(x_upper=xu, mw_upper=vu, x_lower=xl,
                                mw_lower=vl, m_inf=m_inf)
