"""Stochastic atmospheric transmittance model and channel averaging.

The amplitude transmission factor eta of a beam-wander dominated free-space
link follows the log-negative Weibull density on (0, eta0].  All channel
averages are integrals of the form int f(eta) p(eta) d(eta); substituting
v = (L^2 / 2 sigma_b^2) (2 ln(eta0/eta))^(2/gamma_s) turns them into
int_0^inf f(eta(v)) exp(-v) dv with a smooth integrand, which is what the
default quadrature discretizes (the density is weakly singular at eta0, so
quadrature directly in eta converges poorly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NoSolutionError, TruncationError

DEFAULT_SPOT_RATIO = 1.1
DEFAULT_ORDER = 96
#: exp(-V_CAP) bounds the neglected probability mass of the transformed rule
V_CAP = 34.0


@dataclass(frozen=True)
class FadingChannel:
    """Log-negative Weibull transmittance distribution parameters."""

    sigma_b: float  # beam-wander std-dev, units of the aperture radius
    beta_aperture: float
    W: float  # beam-spot radius
    h: float  # (beta / W)^2
    gamma_s: float  # shape
    L_scale: float  # scale
    eta0: float  # maximum transmittance


def make_channel(
    sigma_b: float,
    beta_aperture: float = 1.0,
    spot_ratio: float = DEFAULT_SPOT_RATIO,
) -> FadingChannel:
    """Build a channel from the beam-wander std-dev and geometry."""
    if sigma_b <= 0 or beta_aperture <= 0 or spot_ratio <= 0:
        raise DomainError("sigma_b, beta_aperture and spot_ratio must be positive")
    h = (1.0 / spot_ratio) ** 2
    eta0_sq = 1.0 - math.exp(-2.0 * h)
    eta0 = math.sqrt(eta0_sq)
    # exp(-4h) I0(4h) and exp(-4h) I1(4h) via scaled Bessel functions
    i0s = float(special.ive(0, 4.0 * h))
    i1s = float(special.ive(1, 4.0 * h))
    denom = 1.0 - i0s
    log_term = math.log(2.0 * eta0_sq / denom)
    gamma_s = 8.0 * h * (i1s / denom) / log_term
    L_scale = beta_aperture * log_term ** (-1.0 / gamma_s)
    return FadingChannel(
        sigma_b=sigma_b,
        beta_aperture=beta_aperture,
        W=spot_ratio * beta_aperture,
        h=h,
        gamma_s=gamma_s,
        L_scale=L_scale,
        eta0=eta0,
    )


def pdf(ch: FadingChannel, eta) -> np.ndarray | float:
    """Probability density of the transmission factor (zero outside (0, eta0])."""
    scalar = np.isscalar(eta) or np.ndim(eta) == 0
    eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
    out = np.zeros_like(eta_arr)
    mask = (eta_arr > 0.0) & (eta_arr <= ch.eta0)
    if mask.any():
        e = eta_arr[mask]
        t = 2.0 * np.log(ch.eta0 / e)
        expo = 2.0 / ch.gamma_s
        l2s2 = ch.L_scale**2 / (2.0 * ch.sigma_b**2)
        with np.errstate(divide="ignore", over="ignore"):
            log_p = (
                math.log(4.0 * l2s2 / ch.gamma_s)
                - np.log(e)
                + (expo - 1.0) * np.log(t)
                - l2s2 * t**expo
            )
        out[mask] = np.exp(log_p)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights for channel averages, int f(eta) p(eta) d(eta) ~ sum w f(eta)."""

    nodes: np.ndarray  # eta values, strictly inside (0, eta0)
    weights: np.ndarray  # fold in the density: sum(weights) ~ 1
    order: int


def affine_rule(eta0: float, order: int = DEFAULT_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Plain Gauss-Legendre nodes/weights on [0, eta0] (weights sum to eta0)."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * eta0 * (x + 1.0), 0.5 * eta0 * w


def _eta_of_v(ch: FadingChannel, v: np.ndarray) -> np.ndarray:
    t = (2.0 * ch.sigma_b**2 * v / ch.L_scale**2) ** (ch.gamma_s / 2.0)
    return ch.eta0 * np.exp(-0.5 * t)


def channel_quadrature(ch: FadingChannel, order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Quadrature rule with the fading density folded into the weights."""
    x, w = np.polynomial.legendre.leggauss(order)
    v = 0.5 * V_CAP * (x + 1.0)
    wv = 0.5 * V_CAP * w * np.exp(-v)
    return QuadratureRule(nodes=_eta_of_v(ch, v), weights=wv, order=order)


def average(ch: FadingChannel, f, rule: QuadratureRule | None = None) -> float:
    """int f(eta) p(eta) d(eta) for a vectorized scalar function f."""
    rule = rule or channel_quadrature(ch)
    return float(np.sum(rule.weights * f(rule.nodes)))


def survival_probability(ch: FadingChannel, eta_th: float) -> float:
    """P[eta >= eta_th], exact under the v-substitution."""
    if eta_th <= 0.0:
        return 1.0
    if eta_th >= ch.eta0:
        return 0.0
    t = 2.0 * math.log(ch.eta0 / eta_th)
    v = (ch.L_scale**2 / (2.0 * ch.sigma_b**2)) * t ** (2.0 / ch.gamma_s)
    return 1.0 - math.exp(-v)


def mean_intensity_transmittance(ch: FadingChannel, rule: QuadratureRule | None = None) -> float:
    """Mean of eta^2 over the fading distribution."""
    return average(ch, lambda eta: eta**2, rule)


def mean_loss_db(ch: FadingChannel, rule: QuadratureRule | None = None) -> float:
    """Mean fading loss in dB, -10 log10 of the mean intensity transmittance."""
    return -10.0 * math.log10(mean_intensity_transmittance(ch, rule))


def solve_sigma_for_loss(
    target_db: float,
    beta_aperture: float = 1.0,
    spot_ratio: float = DEFAULT_SPOT_RATIO,
    tol_db: float = 0.01,
) -> FadingChannel:
    """Find the beam-wander std-dev giving the requested mean loss."""

    def loss_at(sigma: float) -> float:
        return mean_loss_db(make_channel(sigma, beta_aperture, spot_ratio))

    lo, hi = 1e-4, 1.0
    if target_db < loss_at(lo):
        raise NoSolutionError(
            f"target {target_db} dB below the minimum achievable loss "
            f"{loss_at(lo):.3f} dB at this geometry"
        )
    while loss_at(hi) < target_db:
        hi *= 2.0
        if hi > 1e4:
            raise NoSolutionError(f"no sigma_b reaches {target_db} dB")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if loss_at(mid) < target_db:
            lo = mid
        else:
            hi = mid
        if abs(loss_at(mid) - target_db) < 0.1 * tol_db:
            break
    return make_channel(math.sqrt(lo * hi), beta_aperture, spot_ratio)


def ensemble_average(evolve_at, ch: FadingChannel, rule: QuadratureRule | None = None,
                     trace_tol: float = 1e-3):
    """Average density-operator elements over the fading distribution.

    ``evolve_at`` maps a transmission factor eta to a BipartiteDensity;
    the result is the element-wise weighted sum (one fading channel).
    """
    rule = rule or channel_quadrature(ch)
    acc = None
    template = None
    for eta, w in zip(rule.nodes, rule.weights):
        density = evolve_at(float(eta))
        if acc is None:
            acc = w * density.rho
            template = density
        else:
            acc += w * density.rho
    out = type(template)(acc, template.f_max, template.ell_max,
                         selection_exact=template.selection_exact)
    tr = out.trace()
    if not (1.0 - trace_tol <= tr <= 1.0 + 1e-9):
        raise TruncationError(f"averaged trace {tr:.6g} outside [1 - {trace_tol:g}, 1]")
    out.trace_deficit = 1.0 - tr
    return out


def ensemble_average_symmetric(evolve_at, ch: FadingChannel,
                               rule: QuadratureRule | None = None,
                               trace_tol: float = 1e-3):
    """Two independent, identically distributed fading channels.

    ``evolve_at`` maps (eta1, eta2) to a BipartiteDensity; the average runs
    over the tensorized rule.
    """
    rule = rule or channel_quadrature(ch, order=48)
    acc = None
    template = None
    for eta1, w1 in zip(rule.nodes, rule.weights):
        for eta2, w2 in zip(rule.nodes, rule.weights):
            density = evolve_at(float(eta1), float(eta2))
            if acc is None:
                acc = (w1 * w2) * density.rho
                template = density
            else:
                acc += (w1 * w2) * density.rho
    out = type(template)(acc, template.f_max, template.ell_max,
                         selection_exact=template.selection_exact)
    tr = out.trace()
    if not (1.0 - trace_tol <= tr <= 1.0 + 1e-9):
        raise TruncationError(f"averaged trace {tr:.6g} outside [1 - {trace_tol:g}, 1]")
    out.trace_deficit = 1.0 - tr
    return out
