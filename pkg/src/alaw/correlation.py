"""Connected-correlation profiles and a fitted correlation length.

The strength between two small regions is the trace norm of
``rho^{XY} - rho^X (x) rho^Y``; it dominates every connected correlator of
unit-norm operators on those supports, so a profile that decays like
``2^{-l/xi}`` certifies the decay assumption for operators on up to two
sites.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from alaw.errors import DomainError, PreconditionError
from alaw.qstate import ChainState, Region, as_region, reduce

MAX_SUPPORT = 2
STRENGTH_FLOOR = 1e-12
SAFETY = 1.5
SLOPE_TOL = 1e-9  # flatter fits are treated as no decay
CSV_HEADER = ("separation", "strength", "region_size")


def _embed_product(rho_x: np.ndarray, rx: Region, rho_y: np.ndarray, ry: Region) -> np.ndarray:
    """``rho^X (x) rho^Y`` in the little-endian basis of ``rx | ry``."""
    # kron(rho_y, rho_x) puts the X sites on the low bits, in order rx then ry.
    prod = np.kron(rho_y, rho_x)
    order = list(rx.sites) + list(ry.sites)
    union = sorted(order)
    k = len(order)
    # Axis t of a (2,)*k reshaped index carries bit k-1-t.
    rows = [k - 1 - order.index(union[k - 1 - t]) for t in range(k)]
    perm = rows + [k + r for r in rows]
    t = prod.reshape((2,) * (2 * k))
    return t.transpose(perm).reshape(2 ** k, 2 ** k)


def correlation_strength(state: ChainState, rx, ry) -> float:
    """``|| rho^{XY} - rho^X (x) rho^Y ||_1`` for supports of at most two sites."""
    rx, ry = as_region(rx), as_region(ry)
    if len(rx) > MAX_SUPPORT or len(ry) > MAX_SUPPORT:
        raise DomainError(f"supports are limited to {MAX_SUPPORT} sites")
    if not rx.isdisjoint(ry):
        raise DomainError("regions overlap")
    rx.check(state.num_sites)
    ry.check(state.num_sites)
    joint = reduce(state, rx | ry).matrix
    product = _embed_product(reduce(state, rx).matrix, rx, reduce(state, ry).matrix, ry)
    diff = joint - product
    return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


@dataclass(frozen=True)
class CorrelationProfile:
    """Maximal strength per (separation, region size); separation counts the sites strictly between."""

    separations: np.ndarray
    strengths: np.ndarray
    region_sizes: np.ndarray
    xi_hat: float = 1.0
    fit_residual: float = 0.0

    def envelope(self) -> tuple[np.ndarray, np.ndarray]:
        """Maximum strength at each distinct separation, across region sizes."""
        seps = np.unique(self.separations)
        env = np.array([self.strengths[self.separations == s].max() for s in seps])
        return seps, env

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for sep, st, size in zip(self.separations, self.strengths, self.region_sizes):
            writer.writerow([int(sep), format(float(st), ".17g"), int(size)])
        return buf.getvalue()


@dataclass(frozen=True)
class Certificate:
    xi: float
    certified: bool
    prefactor: float = 1.0
    slope: float = float("nan")
    intercept: float = float("nan")
    fit_residual: float = 0.0
    points_used: int = 0
    scope: str = "supports of at most 2 sites"
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "certified": self.certified,
            "prefactor": self.prefactor,
            "slope": self.slope,
            "intercept": self.intercept,
            "fit_residual": self.fit_residual,
            "points_used": self.points_used,
            "scope": self.scope,
        }


def measure_profile(state: ChainState, sizes: tuple[int, ...] = (1, 2)) -> CorrelationProfile:
    """Scan every in-chain pair of equal-size blocks at every separation >= 1."""
    n = state.num_sites
    seps, strengths, region_sizes = [], [], []
    for k in sizes:
        if not 1 <= k <= MAX_SUPPORT:
            raise DomainError(f"region size {k} outside 1..{MAX_SUPPORT}")
        for gap in range(1, n - 2 * k + 1):
            best = 0.0
            for x0 in range(0, n - 2 * k - gap + 1):
                rx = Region.block(x0, k)
                ry = Region.block(x0 + k + gap, k)
                best = max(best, correlation_strength(state, rx, ry))
            seps.append(gap)
            strengths.append(best)
            region_sizes.append(k)
    return CorrelationProfile(np.array(seps, dtype=int), np.array(strengths),
                              np.array(region_sizes, dtype=int))


def fit_xi(profile: CorrelationProfile, safety: float = SAFETY,
           poly_prefactor: bool = False) -> Certificate:
    """Fit ``log2(strength) ~ slope * l + b`` and return a certificate.

    The returned length is ``max(1, -safety / slope)``.  With
    ``poly_prefactor`` the bound becomes ``P 2^{-l/xi}`` with the smallest
    ``P >= 1`` covering every measured point.
    """
    seps, env = profile.envelope()
    keep = env > STRENGTH_FLOOR
    if not keep.any():
        return Certificate(1.0, True, notes=["all strengths below floor"])
    if keep.sum() < 3:
        raise PreconditionError("need at least 3 separations above the strength floor")
    x, y = seps[keep].astype(float), np.log2(env[keep])
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(res[0]) if len(res) else 0.0
    if slope >= -SLOPE_TOL:
        return Certificate(math.inf, False, 1.0, float(slope), float(intercept), residual,
                           int(keep.sum()), notes=["no decay"])
    xi = float(max(1.0, safety * (-1.0 / slope)))
    pref = 1.0
    if poly_prefactor:
        pref = max(1.0, float(np.max(profile.strengths * 2.0 ** (profile.separations / xi))))
    bound = pref * 2.0 ** (-profile.separations / xi)
    certified = bool(np.all(profile.strengths <= bound * (1 + 1e-12)))
    return Certificate(xi, certified, pref, float(slope), float(intercept), residual,
                       int(keep.sum()))


def certify(state: ChainState, safety: float = SAFETY,
            poly_prefactor: bool = False) -> tuple[CorrelationProfile, Certificate]:
    """Measure, fit and attach the fitted length to the returned profile."""
    profile = measure_profile(state)
    cert = fit_xi(profile, safety, poly_prefactor)
    profile = CorrelationProfile(profile.separations, profile.strengths, profile.region_sizes,
                                 cert.xi, cert.fit_residual)
    return profile, cert


def is_zero_profile(profile: CorrelationProfile) -> bool:
    """True when every strength at separation >= 1 is below the floor."""
    return bool(np.all(profile.strengths <= STRENGTH_FLOOR))
