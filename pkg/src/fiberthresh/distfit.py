"""Rayleigh and Rician densities, maximum-likelihood fits and BIC selection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import ConvergenceError, DegenerateDataError, DomainError

RICIAN_TOL = 1e-9
RICIAN_MAX_ITER = 200
PROFILE_GRID = 64


class Family(str, enum.Enum):
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"

    @property
    def n_params(self) -> int:
        return 1 if self is Family.RAYLEIGH else 2


@dataclass(frozen=True)
class RayleighParams:
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Rayleigh sigma must be positive and finite, got {self.sigma!r}")


@dataclass(frozen=True)
class RicianParams:
    sigma: float
    s: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Rician sigma must be positive and finite, got {self.sigma!r}")
        if not (self.s >= 0 and math.isfinite(self.s)):
            raise DomainError(f"Rician s must be >= 0 and finite, got {self.s!r}")


@dataclass(frozen=True)
class FitResult:
    family: Family
    params: RayleighParams | RicianParams
    log_likelihood: float
    bic: float
    n: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def as_record(self) -> dict:
        """Flat record with the fixed field order used by the ``fit`` command."""
        return {
            "family": self.family.value,
            "sigma": float(self.params.sigma),
            "s": float(getattr(self.params, "s", 0.0)),
            "log_likelihood": float(self.log_likelihood),
            "bic": float(self.bic),
            "n": int(self.n),
        }


def as_samples(values, min_size: int = 0) -> np.ndarray:
    """Validate a received-sample vector and return it as a float64 array."""
    y = np.asarray(values, dtype=np.float64).ravel()
    if y.size < min_size:
        raise DegenerateDataError(f"need at least {min_size} samples, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise DomainError("samples must be finite")
    if np.any(y < 0):
        raise DomainError("samples must be nonnegative")
    return y


def _check_points(y):
    arr = np.asarray(y, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("density argument must be >= 0")
    return arr


def _scalar_or_array(val, like):
    return float(val) if np.ndim(like) == 0 else val


def rayleigh_pdf(y, params: RayleighParams):
    arr = _check_points(y)
    v = params.sigma**2
    return _scalar_or_array(arr / v * np.exp(-arr * arr / (2.0 * v)), y)


def rician_pdf(y, params: RicianParams):
    # (y/v) exp(-(y^2+s^2)/2v) I0(ys/v) == (y/v) exp(-(y-s)^2/2v) i0e(ys/v): no overflow
    arr = _check_points(y)
    v = params.sigma**2
    s = params.s
    val = arr / v * np.exp(-((arr - s) ** 2) / (2.0 * v)) * kernels.i0e(arr * (s / v))
    return _scalar_or_array(val, y)


def estimate_rayleigh_scale(samples) -> RayleighParams:
    """Closed-form MLE: sigma = sqrt(sum(y**2) / (2 n))."""
    y = as_samples(samples, min_size=1)
    peak = float(y.max())
    if peak == 0.0:
        raise DegenerateDataError("all samples are zero; Rayleigh scale would be 0")
    # scaled by the peak so squares neither underflow nor overflow
    z = y / peak
    sigma = peak * math.sqrt(float(np.dot(z, z)) / (2.0 * y.size))
    if sigma == 0.0:
        raise DegenerateDataError("all samples are zero; Rayleigh scale would be 0")
    return RayleighParams(sigma)


def _profile_maximum(y, m2, tol, max_iter):
    """Maximise the likelihood along the stationarity curve sigma**2 = (m2 - s**2) / 2.

    Every interior stationary point and the s = 0 boundary optimum lie on this
    curve, so its maximum is the global one.
    """
    top = math.sqrt(m2)

    def neg(s):
        return -kernels.rician_loglik_core(y, s, max((m2 - s * s) / 2.0, 1e-300))

    grid = np.linspace(0.0, top, PROFILE_GRID + 1)[:-1]
    vals = np.array([neg(s) for s in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1] if i + 1 < grid.size else top * (1.0 - 1e-12)
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": tol * top, "maxiter": max_iter})
    if not res.success:
        raise ConvergenceError(f"Rician profile search did not converge in {max_iter} iterations")
    s_best, f_best = (res.x, res.fun) if res.fun <= vals[i] else (grid[i], vals[i])
    if neg(0.0) <= f_best:
        s_best, f_best = 0.0, neg(0.0)
    return s_best * s_best, (m2 - s_best * s_best) / 2.0, -f_best


def estimate_rician_params(samples, tol: float = RICIAN_TOL, max_iter: int = RICIAN_MAX_ITER) -> RicianParams:
    """Rician MLE.

    When the method-of-moments s**2 is not positive (mean(y)**2 / mean(y**2)
    <= pi/4, the Rayleigh value) the Rayleigh reduction s = 0 is returned.
    Otherwise a grid scan and bounded search along the profile curve locate the global
    maximum; Newton ascent in (s**2, sigma**2) with backtracking then polishes
    it until s and sigma move by less than ``tol`` relative to sigma + s.
    """
    y = as_samples(samples, min_size=2)
    if not np.any(y > 0):
        raise DegenerateDataError("all samples are zero")
    if np.all(y == y[0]):
        raise DegenerateDataError("all samples are equal; zero variance")

    m1 = float(np.mean(y))
    m2 = float(np.dot(y, y)) / y.size
    if m1 * m1 / m2 <= math.pi / 4.0:
        # moment estimate of s**2 is <= 0: Rayleigh reduction
        return RicianParams(math.sqrt(m2 / 2.0), 0.0)
    u, v, ll = _profile_maximum(y, m2, tol, max_iter)
    if u == 0.0:
        return RicianParams(math.sqrt(v), 0.0)
    for _ in range(max_iter):
        ll_new, u_new, v_new = _newton_step(y, u, v, ll, m2)
        if u_new is None:
            # no strict ascent left: already at the optimum to working precision
            return RicianParams(math.sqrt(v), math.sqrt(u))
        ds = abs(math.sqrt(u_new) - math.sqrt(u))
        dsig = abs(math.sqrt(v_new) - math.sqrt(v))
        u, v, ll = u_new, v_new, ll_new
        if max(ds, dsig) <= tol * (math.sqrt(v) + math.sqrt(u)):
            return RicianParams(math.sqrt(v), math.sqrt(u))
    raise ConvergenceError(f"Rician fit did not converge in {max_iter} iterations")


def _newton_step(y, u, v, ll, m2):
    _, gu, gv, huu, huv, hvv = kernels.rician_newton_terms(y, u, v)
    det = huu * hvv - huv * huv
    if not (huu < 0 and det > 0):
        return None, None, None
    du = -(hvv * gu - huv * gv) / det
    dv = -(huu * gv - huv * gu) / det
    step = 1.0
    for _ in range(40):
        u_new = u + step * du
        v_new = v + step * dv
        if u_new >= 0 and v_new > 0:
            ll_new = kernels.rician_loglik_core(y, math.sqrt(u_new), v_new)
            if ll_new > ll:
                return ll_new, u_new, v_new
        step *= 0.5
    return None, None, None


def log_likelihood(family, params, samples) -> float:
    """Sum of log densities; any zero sample drives the sum to ``-inf``."""
    family = Family(family)
    y = as_samples(samples)
    with np.errstate(divide="ignore"):
        log_y = float(np.sum(np.log(y)))
    if family is Family.RAYLEIGH:
        v = params.sigma**2
        return log_y - y.size * math.log(v) - float(np.dot(y, y)) / (2.0 * v)
    return log_y + kernels.rician_loglik_core(y, params.s, params.sigma**2)


def bic(log_likelihood: float, k: int, n: int) -> float:
    if not math.isfinite(log_likelihood):
        raise DomainError("BIC needs a finite log-likelihood")
    if k < 1 or n < 1:
        raise DomainError("BIC needs k >= 1 and n >= 1")
    return k * math.log(n) - 2.0 * log_likelihood


_ESTIMATORS = {
    Family.RAYLEIGH: estimate_rayleigh_scale,
    Family.RICIAN: estimate_rician_params,
}


def fit_family(family, samples) -> FitResult:
    family = Family(family)
    y = as_samples(samples, min_size=1)
    params = _ESTIMATORS[family](y)
    ll = log_likelihood(family, params, y)
    return FitResult(family, params, ll, bic(ll, family.n_params, y.size), y.size)


def fit_best(samples, families=(Family.RAYLEIGH, Family.RICIAN)) -> FitResult:
    """Fit every candidate family and return the one with the lowest BIC.

    Zero samples have zero density under both families, so they are dropped
    before fitting; the count is reported in ``diagnostics["zeros_dropped"]``.
    Families whose estimator fails are listed in ``diagnostics["skipped"]``.
    Ties go to the family with fewer parameters.
    """
    families = sorted({Family(f) for f in families}, key=lambda f: f.n_params)
    if not families:
        raise DomainError("at least one candidate family is required")
    y = as_samples(samples)
    positive = y[y > 0]
    skipped = {}
    fits = []
    for fam in families:
        try:
            fits.append(fit_family(fam, positive))
        except (DegenerateDataError, ConvergenceError, DomainError) as exc:
            skipped[fam.value] = str(exc)
    if not fits:
        raise DegenerateDataError(f"no candidate family could be fitted: {skipped}")
    best = min(fits, key=lambda r: (r.bic, r.family.n_params))
    diagnostics = {
        "zeros_dropped": int(y.size - positive.size),
        "skipped": skipped,
        "bic": {r.family.value: r.bic for r in fits},
    }
    return FitResult(best.family, best.params, best.log_likelihood, best.bic, best.n, diagnostics)
