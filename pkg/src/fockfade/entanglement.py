"""Entanglement measures from evolved density operators.

The partial transpose of states evolved from Schmidt-form inputs is block
diagonal at fixed total photon number F = a + b (blocks of dimension
F + 1), so the negativity comes from small dense Hermitian eigensolves.
A Gaussian covariance-matrix route for TMSV inputs provides an independent
oracle and fast paths (conditional entropy, single-photon comparison).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import BipartiteDensity
from .errors import DomainError, FockfadeError
from .fading import FadingChannel, QuadratureRule, channel_quadrature
from .states import NoonState, SchmidtState

EIG_CLAMP = 1e-12
HERMITICITY_TOL = 1e-9


@dataclass(frozen=True)
class PTSpectrum:
    """Eigenvalues of the partially transposed density, grouped by block.

    ``blocks`` maps a block label to its eigenvalue vector.  For states
    obeying the a - b = c - d selection rule the labels are the total
    photon numbers F; a single block labelled -1 marks the dense fallback
    used for inputs without that structure (NOON states).
    """

    blocks: tuple[tuple[int, np.ndarray], ...]
    trace_check: float

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([ev for _, ev in self.blocks])


def _f_blocks(rho: np.ndarray, f_max: int) -> list[tuple[int, np.ndarray]]:
    blocks = []
    for f in range(f_max + 1):
        a = np.arange(f + 1)
        block = rho[a[:, None], f - a[None, :], a[None, :], f - a[:, None]]
        blocks.append((f, np.linalg.eigvalsh(block)))
    return blocks


def _dense_spectrum(rho: np.ndarray) -> np.ndarray:
    n = rho.shape[0]
    pt = rho.transpose(0, 3, 2, 1)  # swap mode-2 ket/bra
    mat = pt.reshape(n * n, n * n)
    return np.linalg.eigvalsh(0.5 * (mat + mat.T))


def partial_transpose_spectrum(density: BipartiteDensity) -> PTSpectrum:
    """Spectrum of the partial transpose with respect to mode 2.

    Densities flagged ``selection_exact`` skip the hermiticity and
    structure scans (their engines guarantee both by construction).
    """
    trace = density.trace()
    if density.selection_exact:
        return PTSpectrum(blocks=tuple(_f_blocks(density.rho, density.f_max)),
                          trace_check=trace)
    herm = density.hermiticity_error()
    if herm > HERMITICITY_TOL:
        raise FockfadeError(f"input not Hermitian (max asymmetry {herm:.3g})")
    if density.selection_rule_residual() <= 1e-12:
        blocks = _f_blocks(density.rho, density.f_max)
    else:
        blocks = [(-1, _dense_spectrum(density.rho))]
    return PTSpectrum(blocks=tuple(blocks), trace_check=trace)


def pure_pt_spectrum(state: SchmidtState, f_cap: int | None = None) -> PTSpectrum:
    """PT spectrum of an un-evolved Schmidt-form state, block by block.

    Avoids materializing the rank-4 density: within block F the only
    nonzero entries sit at (m + offset1, n + offset1) for m + n equal to
    F minus the offset sum.
    """
    q = state.q
    nq = q.shape[0]
    d1, d2 = state.offset1, state.offset2
    top = 2 * (nq - 1) + d1 + d2
    f_max = top if f_cap is None else min(f_cap, top)
    blocks = []
    trace = 0.0
    for f in range(d1 + d2, f_max + 1):
        dim = f + 1
        block = np.zeros((dim, dim))
        s = f - d1 - d2  # m + n within this block
        for m in range(max(0, s - nq + 1), min(s, nq - 1) + 1):
            n = s - m
            a = m + d1
            c = n + d1
            if a < dim and c < dim and f - a == n + d2:
                block[a, c] = q[m] * q[n]
        ev = np.linalg.eigvalsh(block)
        blocks.append((f, ev))
        trace += float(np.trace(block))
    return PTSpectrum(blocks=tuple(blocks), trace_check=trace)


def log_negativity(spectrum: PTSpectrum) -> float:
    """E_LN = log2(1 + 2N), N the absolute sum of negative PT eigenvalues."""
    ev = spectrum.eigenvalues()
    ev = np.where(np.abs(ev) < EIG_CLAMP, 0.0, ev)
    negativity = float(-ev[ev < 0].sum())
    return math.log2(1.0 + 2.0 * negativity)


def negativity(spectrum: PTSpectrum) -> float:
    ev = spectrum.eigenvalues()
    ev = np.where(np.abs(ev) < EIG_CLAMP, 0.0, ev)
    return float(-ev[ev < 0].sum())


def density_log_negativity(density: BipartiteDensity) -> float:
    return log_negativity(partial_transpose_spectrum(density))


# ---------------------------------------------------------------------------
# Gaussian covariance-matrix route (TMSV oracle and fast paths)

Z2 = np.diag([1.0, -1.0])
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianCM:
    """Two-mode covariance matrix M = [[A, C], [C^T, B]], vacuum variance 1."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.C], [self.C.T, self.B]])

    def check_physical(self, slack: float = 1e-9) -> None:
        m = self.matrix()
        ev = np.linalg.eigvalsh(m + 1j * OMEGA)
        if ev.min() < -slack:
            raise DomainError(f"unphysical covariance matrix (min eig {ev.min():.3g})")


def tmsv_covariance_after_channel(
    lam: float, eta1: float, chi1: float, eta2: float, chi2: float
) -> GaussianCM:
    """Covariance matrix of a TMSV after independent noisy attenuators."""
    if not 0.0 <= lam < 1.0:
        raise DomainError("lambda must be in [0, 1)")
    v = (1.0 + lam * lam) / (1.0 - lam * lam)  # cosh(2r)
    corr = math.sqrt(max(v * v - 1.0, 0.0))  # sinh(2r)
    a = eta1**2 * v + 1.0 - eta1**2 + chi1
    b = eta2**2 * v + 1.0 - eta2**2 + chi2
    c = eta1 * eta2 * corr
    return GaussianCM(A=a * np.eye(2), B=b * np.eye(2), C=c * Z2)


def _entropy_f(x: float) -> float:
    """f(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2); f(1) = 0."""
    x = max(x, 1.0)  # clamp sub-vacuum rounding
    hi = 0.5 * (x + 1.0)
    lo = 0.5 * (x - 1.0)
    out = hi * math.log2(hi)
    if lo > 0.0:
        out -= lo * math.log2(lo)
    return out


def gaussian_log_negativity(cm: GaussianCM) -> float:
    det_a = float(np.linalg.det(cm.A))
    det_b = float(np.linalg.det(cm.B))
    det_c = float(np.linalg.det(cm.C))
    det_m = float(np.linalg.det(cm.matrix()))
    delta = det_a + det_b - 2.0 * det_c  # PT-transformed seralian
    disc = max(delta * delta - 4.0 * det_m, 0.0)
    nu_minus_sq = 0.5 * (delta - math.sqrt(disc))
    if nu_minus_sq <= 0.0:
        raise DomainError("degenerate covariance matrix")
    nu_minus = math.sqrt(nu_minus_sq)
    return max(0.0, -math.log2(nu_minus))


def gaussian_conditional_entropy(cm: GaussianCM) -> float:
    """E_CE = S(rho_1) - S(rho) from the covariance matrix."""
    det_a = float(np.linalg.det(cm.A))
    det_b = float(np.linalg.det(cm.B))
    det_c = float(np.linalg.det(cm.C))
    det_m = float(np.linalg.det(cm.matrix()))
    delta = det_a + det_b + 2.0 * det_c
    disc = max(delta * delta - 4.0 * det_m, 0.0)
    nu1 = math.sqrt(max(0.5 * (delta + math.sqrt(disc)), 1.0))
    nu2 = math.sqrt(max(0.5 * (delta - math.sqrt(disc)), 1.0))
    return _entropy_f(math.sqrt(det_a)) - _entropy_f(nu1) - _entropy_f(nu2)


# ---------------------------------------------------------------------------
# Fock-space entropies

def _difference_blocks(rho: np.ndarray, f_max: int) -> list[np.ndarray]:
    """Hermitian blocks of rho at fixed photon-number difference a - b."""
    n = rho.shape[0]
    blocks = []
    for k in range(-(n - 1), n):
        pairs = [(a, a - k) for a in range(n) if 0 <= a - k < n and a + (a - k) <= f_max]
        if not pairs:
            continue
        dim = len(pairs)
        block = np.empty((dim, dim))
        for i, (a, b) in enumerate(pairs):
            for j, (c, d) in enumerate(pairs):
                block[i, j] = rho[a, b, c, d]
        blocks.append(block)
    return blocks


def _entropy_from_probs(p: np.ndarray, floor: float) -> float:
    if p.min() < floor:
        raise DomainError(f"negative probability {p.min():.3g} beyond tolerance")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0.0:
        raise DomainError("zero-trace spectrum")
    p = p[p > 0.0] / total
    return float(-(p * np.log2(p)).sum())


def conditional_entropy_fock(density: BipartiteDensity, eig_floor: float = -1e-9) -> float:
    """S(rho_1) - S(rho) computed from the truncated Fock representation."""
    if density.selection_rule_residual() > 1e-12:
        raise FockfadeError("conditional_entropy_fock needs the a-b = c-d structure")
    spectra = [np.linalg.eigvalsh(b) for b in _difference_blocks(density.rho, density.f_max)]
    joint = np.concatenate(spectra)
    n = density.size
    idx = np.arange(n)
    marg = density.rho[idx[:, None], idx[None, :], idx[:, None], idx[None, :]].sum(axis=1)
    return _entropy_from_probs(marg, eig_floor) - _entropy_from_probs(joint, eig_floor)


# ---------------------------------------------------------------------------
# Rates and fading bounds

def rate(p_c: float, eln: float) -> float:
    """Entanglement-generation rate per initial pulse, R_E = P_c * E_LN."""
    if not 0.0 <= p_c <= 1.0:
        raise DomainError("creation probability must be in [0, 1]")
    if eln < 0.0:
        raise DomainError("log-negativity must be non-negative")
    return p_c * eln


def ensemble_negativity_bound(
    ch: FadingChannel,
    negativity_at,
    rule: QuadratureRule | None = None,
) -> float:
    """log2(1 + 2 int p(eta) N(eta) d(eta)).

    Valid bound on the ensemble state's distillable entanglement even
    though log-negativity itself is not convex.
    """
    rule = rule or channel_quadrature(ch)
    avg_n = float(sum(w * negativity_at(float(eta))
                      for eta, w in zip(rule.nodes, rule.weights)))
    return math.log2(1.0 + 2.0 * avg_n)
