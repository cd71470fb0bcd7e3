"""Fractional differencing and FARIMA(p, d, q) fitting, simulation and
forecasting.

Model::

    phi(B) (1 - B)^d X_t = theta(B) Z_t,    Z_t ~ WN(0, sigma2),  |d| < 0.5

with ``phi(B) = 1 - phi_1 B - ... - phi_p B^p`` and
``theta(B) = 1 + theta_1 B + ... + theta_q B^q``.

Fitting is two-stage: ``d`` from a log-periodogram regression, then an ARMA
fit by conditional sum of squares on the fractionally differenced series.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, signal
from scipy.linalg import solve_toeplitz

from .errors import DegenerateDataError, ParameterError, SeriesTooShortError

log = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 100
D_BOUND = 0.5
D_CLAMP = 0.49
MIN_GPH_LENGTH = 32
MAX_ORDER = 5


class TruncationWarning(UserWarning):
    """Series shorter than the differencing truncation."""


# --------------------------------------------------------------------------
# fractional differencing

def frac_diff_coeffs(d: float, K: int, strict: bool = True) -> np.ndarray:
    """Weights ``pi_0..pi_K`` of ``(1 - B)^d = sum_k pi_k B^k``.

    ``pi_0 = 1`` and ``pi_k = pi_{k-1} (k - 1 - d) / k``. ``strict`` enforces
    ``|d| < 0.5``.
    """
    if strict and not abs(d) < D_BOUND:
        raise ParameterError(f"|d| must be < {D_BOUND}, got {d}")
    if K < 1:
        raise ParameterError("truncation K must be >= 1")
    k = np.arange(1, K + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 1.0 - d) / k)))


def frac_difference(series, d: float, K: int = DEFAULT_TRUNCATION,
                    strict: bool = True) -> np.ndarray:
    """``Y_t = sum_{k=0}^{min(t, K)} pi_k X_{t-k}``."""
    x = np.asarray(series, dtype=float)
    n = x.size
    pi = frac_diff_coeffs(d, K, strict)
    if n <= K:
        warnings.warn(f"series length {n} <= truncation K={K}", TruncationWarning,
                      stacklevel=2)
    if n == 0:
        return x.copy()
    return np.convolve(x, pi[:n])[:n]


def frac_integrate(series, d: float, K: int = DEFAULT_TRUNCATION,
                   strict: bool = True) -> np.ndarray:
    """Inverse of :func:`frac_difference` with the same ``d`` and ``K``.

    Solves ``X_t = Y_t - sum_{k=1}^{min(t, K)} pi_k X_{t-k}``. For ``t <= K``
    this coincides with expanding ``(1 - B)^(-d)``; beyond ``K`` it stays the
    exact inverse of the truncated differencing filter.
    """
    y = np.asarray(series, dtype=float)
    pi = frac_diff_coeffs(d, K, strict)
    if y.size == 0:
        return y.copy()
    return signal.lfilter([1.0], pi, y)


# --------------------------------------------------------------------------
# memory parameter

@dataclass(frozen=True)
class GPHResult:
    d: float
    stderr: float
    bandwidth: int
    clamped: bool
    raw_d: float


def gph(series, bandwidth_exponent: float = 0.5) -> GPHResult:
    """Log-periodogram regression over the lowest ``floor(n**0.5)`` Fourier
    frequencies. The slope on ``-log(4 sin^2(lambda/2))`` estimates ``d``."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < MIN_GPH_LENGTH:
        raise SeriesTooShortError(
            f"series too short: {n} < {MIN_GPH_LENGTH} points for estimating d")
    if not np.all(np.isfinite(x)):
        raise DegenerateDataError("series contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateDataError("constant series has a zero periodogram")
    x = x - x.mean()
    m = int(math.floor(n ** bandwidth_exponent))
    j = np.arange(1, m + 1)
    lam = 2.0 * np.pi * j / n
    periodogram = np.abs(np.fft.fft(x)[1:m + 1]) ** 2 / (2.0 * np.pi * n)
    if np.any(periodogram <= 0):
        raise DegenerateDataError("zero periodogram ordinate")
    reg = -np.log(4.0 * np.sin(lam / 2.0) ** 2)
    reg_c = reg - reg.mean()
    sxx = float(reg_c @ reg_c)
    raw = float(reg_c @ np.log(periodogram) / sxx)
    stderr = math.sqrt(math.pi ** 2 / 6.0 / sxx)
    d = min(max(raw, -D_CLAMP), D_CLAMP)
    if d != raw:
        log.info("d estimate %.4f clamped to %.2f", raw, d)
    return GPHResult(d, stderr, m, d != raw, raw)


def estimate_d(series) -> float:
    """GPH estimate of ``d``, clamped into [-0.49, 0.49]."""
    return gph(series).d


# --------------------------------------------------------------------------
# ARMA by conditional sum of squares

def _pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson: partial autocorrelations in (-1, 1) -> stationary AR."""
    phi = np.zeros(0)
    for k, rk in enumerate(r):
        phi = np.concatenate((phi - rk * phi[::-1], [rk])) if k else np.array([rk])
    return phi


def _ar_to_pacf(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float).copy()
    p = phi.size
    r = np.zeros(p)
    for k in range(p - 1, -1, -1):
        rk = phi[k]
        r[k] = rk
        if k == 0:
            break
        if abs(rk) >= 1:
            raise ValueError("not stationary")
        phi = (phi[:k] + rk * phi[:k][::-1]) / (1.0 - rk * rk)
    return r


def _unpack(u, p, q):
    phi = _pacf_to_ar(np.tanh(u[:p])) if p else np.zeros(0)
    theta = -_pacf_to_ar(np.tanh(u[p:p + q])) if q else np.zeros(0)
    return phi, theta


def _pack(phi, theta):
    parts = []
    if len(phi):
        parts.append(np.arctanh(np.clip(_ar_to_pacf(phi), -0.999, 0.999)))
    if len(theta):
        parts.append(np.arctanh(np.clip(_ar_to_pacf(-np.asarray(theta)), -0.999, 0.999)))
    return np.concatenate(parts) if parts else np.zeros(0)


def is_stationary(phi, margin: float = 1e-6) -> bool:
    if len(phi) == 0:
        return True
    roots = np.roots(np.r_[-np.asarray(phi)[::-1], 1.0])
    return bool(np.all(np.abs(roots) > 1.0 + margin))


def is_invertible(theta, margin: float = 1e-6) -> bool:
    return is_stationary(-np.asarray(theta), margin)


def css_residuals(y, phi, theta) -> np.ndarray:
    """Residuals for ``t >= p`` with pre-sample residuals set to zero."""
    y = np.asarray(y, dtype=float)
    p = len(phi)
    w = signal.lfilter(np.r_[1.0, -np.asarray(phi)], [1.0], y)[p:]
    if len(theta):
        return signal.lfilter([1.0], np.r_[1.0, np.asarray(theta)], w)
    return w


def _hannan_rissanen(y, p, q):
    n = y.size
    if q == 0:
        phi = _yule_walker(y, p)
        return phi, np.zeros(0)
    long_order = min(max(p + q + 2, int(round(math.log(n) ** 1.5))), n // 4)
    a = _yule_walker(y, long_order)
    e = signal.lfilter(np.r_[1.0, -a], [1.0], y)
    start = long_order + max(p, q)
    cols = [y[start - i:n - i] for i in range(1, p + 1)]
    cols += [e[start - j:n - j] for j in range(1, q + 1)]
    coef = np.linalg.lstsq(np.column_stack(cols), y[start:], rcond=None)[0]
    return coef[:p], coef[p:]


def _yule_walker(y, p):
    if p == 0:
        return np.zeros(0)
    n = y.size
    acov = np.array([y[:n - k] @ y[k:] / n for k in range(p + 1)])
    if acov[0] <= 0:
        return np.zeros(p)
    return solve_toeplitz(acov[:p], acov[1:p + 1])


@dataclass(frozen=True)
class ARMAFit:
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    css: float
    n_eff: int

    @property
    def aicc(self) -> float:
        k = len(self.phi) + len(self.theta) + 1
        n = self.n_eff
        if self.sigma2 <= 0:
            return -math.inf
        denom = n - k - 1
        corr = 2.0 * k * (k + 1) / denom if denom > 0 else math.inf
        return n * math.log(self.sigma2) + 2.0 * k + corr


def fit_arma(series, p: int, q: int, seed: int = 0) -> ARMAFit:
    """CSS fit of a zero-mean ARMA(p, q).

    Nelder-Mead in a reparametrization that keeps every candidate stationary
    and invertible, started from a Hannan-Rissanen moment estimate, then
    from zeros and a few random points. ``sigma2 = CSS / n_eff``.
    """
    y = np.asarray(series, dtype=float)
    if not (0 <= p <= MAX_ORDER and 0 <= q <= MAX_ORDER):
        raise ParameterError(f"orders must be in [0, {MAX_ORDER}]")
    if y.size < 10 * (p + q + 1):
        raise SeriesTooShortError(
            f"series too short: {y.size} points for ARMA({p},{q})")
    if not np.all(np.isfinite(y)):
        raise DegenerateDataError("series contains non-finite values")

    def css(u):
        phi, theta = _unpack(u, p, q)
        e = css_residuals(y, phi, theta)
        return float(e @ e)

    if p + q == 0:
        e = css_residuals(y, (), ())
        s = float(e @ e)
        return ARMAFit(np.zeros(0), np.zeros(0), s / e.size, s, e.size)

    starts = []
    try:
        phi0, theta0 = _hannan_rissanen(y, p, q)
        if is_stationary(phi0) and is_invertible(theta0):
            starts.append(_pack(phi0, theta0))
    except (np.linalg.LinAlgError, ValueError):
        pass
    starts.append(np.zeros(p + q))
    rng = np.random.default_rng(seed)
    starts.extend(rng.normal(scale=0.5, size=(2, p + q)))

    best = None
    for u0 in starts:
        res = optimize.minimize(css, u0, method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": 1e-12,
                                         "maxiter": 4000 * (p + q),
                                         "maxfev": 8000 * (p + q)})
        phi, theta = _unpack(res.x, p, q)
        if not (is_stationary(phi) and is_invertible(theta)):
            continue
        if best is None or res.fun < best[0]:
            best = (res.fun, phi, theta)
    if best is None:
        raise DegenerateDataError(
            f"ARMA({p},{q}) fit has no stationary, invertible optimum")
    s, phi, theta = best
    n_eff = y.size - p
    return ARMAFit(phi, theta, s / n_eff, s, n_eff)


def select_order(series, orders: Sequence[int] = (0, 1, 2)) -> ARMAFit:
    """Lowest-AICc CSS fit over ``orders x orders``."""
    best = None
    for p, q in itertools.product(orders, orders):
        try:
            fit = fit_arma(series, p, q)
        except (SeriesTooShortError, DegenerateDataError):
            continue
        if best is None or fit.aicc < best.aicc - 1e-12:
            best = fit
    if best is None:
        raise SeriesTooShortError("series too short for any candidate ARMA order")
    return best


# --------------------------------------------------------------------------
# FARIMA

@dataclass
class FarimaModel:
    ar: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ma: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d: float = 0.0
    sigma2: float = 1.0
    truncation: int = DEFAULT_TRUNCATION
    mean: float = 0.0
    d_clamped: bool = False
    n_obs: int = 0

    def __post_init__(self):
        self.ar = np.atleast_1d(np.asarray(self.ar, dtype=float))
        self.ma = np.atleast_1d(np.asarray(self.ma, dtype=float))
        if not abs(self.d) < D_BOUND:
            raise ParameterError(f"|d| must be < {D_BOUND}, got {self.d}")
        if self.sigma2 < 0:
            raise ParameterError("sigma2 must be non-negative")
        if not is_stationary(self.ar, margin=0.0):
            raise ParameterError("AR polynomial is not stationary")
        if not is_invertible(self.ma, margin=0.0):
            raise ParameterError("MA polynomial is not invertible")

    @property
    def p(self) -> int:
        return self.ar.size

    @property
    def q(self) -> int:
        return self.ma.size

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "d": self.d,
                "phi": self.ar.tolist(), "theta": self.ma.tolist(),
                "sigma2": self.sigma2, "K": self.truncation, "mean": self.mean}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FarimaModel":
        return cls(ar=d["phi"], ma=d["theta"], d=d["d"], sigma2=d["sigma2"],
                   truncation=d["K"], mean=d.get("mean", 0.0))


def fit_farima(series, p: int | None = None, q: int | None = None,
               K: int = DEFAULT_TRUNCATION, orders: Sequence[int] = (0, 1, 2)) -> FarimaModel:
    """Center, estimate ``d`` by GPH, difference, then fit the ARMA part.

    With ``p`` and ``q`` both None the order is chosen by AICc over
    ``orders``.
    """
    x = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DegenerateDataError("series contains missing or non-finite values")
    est = gph(x)
    mean = float(x.mean())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        y = frac_difference(x - mean, est.d, K)
    if p is None and q is None:
        fit = select_order(y, orders)
    else:
        fit = fit_arma(y, p or 0, q or 0)
    return FarimaModel(fit.phi, fit.theta, est.d, fit.sigma2, K, mean,
                       est.clamped, x.size)


def _arma_forecast(y, e, phi, theta, h):
    """Recursive h-step ARMA forecasts given in-sample residuals ``e``
    aligned with the tail of ``y``."""
    p, q = len(phi), len(theta)
    hist = list(y)
    res = list(e)
    out = []
    for _ in range(h):
        v = sum(phi[i] * hist[-1 - i] for i in range(p) if len(hist) > i)
        v += sum(theta[j] * res[-1 - j] for j in range(q) if len(res) > j)
        hist.append(v)
        res.append(0.0)
        out.append(v)
    return np.array(out)


def forecast(model: FarimaModel, series, h: int = 1) -> np.ndarray:
    """h-step forecasts on the original scale.

    ARMA forecasts of the differenced centered series are appended to it
    and the whole is fractionally integrated back.
    """
    if h < 1:
        raise ParameterError("horizon must be >= 1")
    x = np.asarray(series, dtype=float) - model.mean
    n = x.size
    if n == 0:
        raise SeriesTooShortError("cannot forecast an empty series")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        y = frac_difference(x, model.d, model.truncation)
        e = css_residuals(y, model.ar, model.ma) if n > model.p else np.zeros(0)
        y_hat = _arma_forecast(y, e, model.ar, model.ma, h)
        x_ext = frac_integrate(np.concatenate((y, y_hat)), model.d, model.truncation)
    return x_ext[n:] + model.mean


def simulate_farima(model: FarimaModel, n: int, seed: int,
                    burn_in: int | None = None) -> np.ndarray:
    """Gaussian FARIMA sample path of length ``n``.

    ARMA recursion on seeded innovations, then fractional integration with
    the full (untruncated) expansion; the first ``burn_in`` values (default
    ``n``) are discarded.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    burn = n if burn_in is None else burn_in
    total = n + burn
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(total) * math.sqrt(model.sigma2)
    w = signal.lfilter(np.r_[1.0, model.ma], np.r_[1.0, -model.ar], z)
    if model.d != 0.0 and total > 1:
        pi = frac_diff_coeffs(-model.d, total - 1)
        w = np.convolve(w, pi)[:total]
    return w[burn:] + model.mean


def sample_acf(x, lag: int) -> float:
    x = np.asarray(x, dtype=float) - np.mean(x)
    denom = float(x @ x)
    return float(x[:-lag] @ x[lag:] / denom) if denom > 0 else 0.0


def model_summary(model: FarimaModel) -> dict:
    d = model.to_dict()
    d["d_clamped"] = model.d_clamped
    d["n_obs"] = model.n_obs
    return d


__all__ = [
    "ARMAFit", "FarimaModel", "GPHResult", "TruncationWarning", "estimate_d",
    "fit_arma", "fit_farima", "forecast", "frac_diff_coeffs", "frac_difference",
    "frac_integrate", "gph", "select_order", "simulate_farima",
]
