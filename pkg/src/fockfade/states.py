"""Initial entangled states in the Fock basis.

Covers the deterministic two-mode squeezed vacuum (TMSV), the six heralded
beam-splitter families (photon subtraction / addition / replacement, each
in a single-mode and a both-mode variant), and NOON states.  Schmidt-form
states carry a coefficient vector plus per-mode index offsets; all
coefficients are real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, DomainError, NoSolutionError, UnsupportedFormError

SCHMIDT_FAMILIES = ("tmsv", "pss_b", "pss_s", "pas_b", "pas_s", "prs_b", "prs_s")
FAMILIES = SCHMIDT_FAMILIES + ("noon",)

#: families whose recipe needs a beam-splitter transmissivity T
T_FAMILIES = ("pss_b", "pss_s", "pas_b", "pas_s", "prs_b", "prs_s")

DEFAULT_N_MAX = 80
NOON_N_MAX = 10


@dataclass(frozen=True)
class SqueezingSpec:
    """Two-mode squeezing strength in its three equivalent parameterizations."""

    squeezing_db: float
    r: float
    lam: float  # tanh(r), strictly < 1


def squeezing_from_db(db: float) -> SqueezingSpec:
    """Convert squeezing in dB, defined as -10*log10(exp(-2r))."""
    if db < 0:
        raise DomainError(f"squeezing must be non-negative, got {db} dB")
    r = db * math.log(10.0) / 20.0
    return SqueezingSpec(squeezing_db=db, r=r, lam=math.tanh(r))


def squeezing_from_lambda(lam: float) -> SqueezingSpec:
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must be in [0, 1), got {lam}")
    r = math.atanh(lam)
    return SqueezingSpec(squeezing_db=20.0 * r / math.log(10.0), r=r, lam=lam)


@dataclass(frozen=True)
class StateRecipe:
    family: str
    squeezing: SqueezingSpec | None = None
    T: float | None = None
    noon_n: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConstructionError(f"unknown family {self.family!r}")
        if self.family == "noon":
            if self.noon_n is None or not 2 <= self.noon_n <= NOON_N_MAX:
                raise ConstructionError(
                    f"NOON photon number must be in [2, {NOON_N_MAX}]"
                )
            return
        if self.squeezing is None:
            raise ConstructionError(f"{self.family} requires a squeezing spec")
        if self.family in T_FAMILIES:
            if self.T is None or not 0.0 <= self.T <= 1.0:
                raise ConstructionError(
                    f"{self.family} requires transmissivity T in [0, 1]"
                )
            if self.family in ("prs_b", "prs_s") and self.T == 0.0:
                raise ConstructionError("PRS with T=0 is a degenerate null state")
        elif self.T is not None:
            raise ConstructionError(f"{self.family} takes no transmissivity")

    @property
    def label(self) -> str:
        if self.family == "noon":
            return f"noon{self.noon_n}"
        return self.family


@dataclass(frozen=True)
class SchmidtState:
    """Pure state sum_n q[n] |n+offset1>_1 |n+offset2>_2, unit norm."""

    q: np.ndarray
    offset1: int
    offset2: int
    n_max: int
    captured_norm: float = 1.0  # squared-norm mass inside the truncation window

    @property
    def equal_offsets(self) -> bool:
        return self.offset1 == self.offset2


@dataclass(frozen=True)
class NoonState:
    n: int

    def __post_init__(self):
        if not 2 <= self.n <= NOON_N_MAX:
            raise ConstructionError(f"NOON photon number must be in [2, {NOON_N_MAX}]")


def _raw_coefficients(recipe: StateRecipe, n_max: int) -> tuple[np.ndarray, int, int]:
    lam = recipe.squeezing.lam
    T = recipe.T
    n = np.arange(n_max + 1)
    fam = recipe.family
    if fam == "tmsv":
        q = math.sqrt(1.0 - lam**2) * lam**n
        return q, 0, 0
    if fam == "pss_b":
        x = lam * T * T
        norm = math.sqrt((1.0 - x * x) ** 3 / (1.0 + x * x))
        return norm * x**n * (n + 1), 0, 0
    if fam == "pas_b":
        x = lam * T * T
        norm = math.sqrt((1.0 - x * x) ** 3 / (1.0 + x * x))
        q = np.zeros(n_max + 1)
        q[1:] = norm * x ** (n[1:] - 1) * n[1:]
        return q, 0, 0
    if fam in ("pss_s", "pas_s"):
        y = lam * T
        q = (1.0 - y * y) * y**n * np.sqrt(n + 1)
        off = (1, 0) if fam == "pss_s" else (0, 1)
        return q, off[0], off[1]
    if fam == "prs_b":
        p = creation_probability(recipe)
        bracket = (T * T - n * (1.0 - T * T)) ** 2
        q = math.sqrt(1.0 - lam**2) / math.sqrt(p) * lam**n * T ** (2 * (n - 1)) * bracket
        return q, 0, 0
    if fam == "prs_s":
        p = creation_probability(recipe)
        bracket = T * T - n * (1.0 - T * T)
        q = math.sqrt(1.0 - lam**2) / math.sqrt(p) * lam**n * T ** (n - 1) * bracket
        return q, 0, 0
    raise ConstructionError(f"no coefficient formula for {fam}")


def build_state(recipe: StateRecipe, n_max: int = DEFAULT_N_MAX) -> SchmidtState | NoonState:
    """Build the normalized truncated state for a recipe.

    The returned ``captured_norm`` reports how much squared-norm mass the
    truncation window caught; callers should check it against their
    tolerance before trusting downstream results.
    """
    if recipe.family == "noon":
        return NoonState(n=recipe.noon_n)
    if n_max < 0:
        raise ConstructionError(f"n_max must be non-negative, got {n_max}")
    q, off1, off2 = _raw_coefficients(recipe, n_max)
    captured = float(np.dot(q, q))
    if captured <= 0.0:
        raise ConstructionError(f"null state for recipe {recipe}")
    return SchmidtState(
        q=q / math.sqrt(captured),
        offset1=off1,
        offset2=off2,
        n_max=n_max,
        captured_norm=captured,
    )


def creation_probability(recipe: StateRecipe) -> float:
    """Heralding probability P_c of the recipe's preparation.

    The closed forms cancel exactly at degenerate points such as T = 1,
    so roundoff can land a hair outside [0, 1]; the result is clipped.
    """
    return min(max(_creation_probability(recipe), 0.0), 1.0)


def _creation_probability(recipe: StateRecipe) -> float:
    fam = recipe.family
    if fam == "tmsv":
        return 1.0
    if fam == "noon":
        n = recipe.noon_n
        if n == 2:
            return 1.0
        return math.factorial(n - 1) * (2.0 * n) ** (1 - n)
    lam = recipe.squeezing.lam
    T = recipe.T
    l2 = lam * lam
    T2 = T * T
    T4 = T2 * T2
    if fam == "pss_b":
        return l2 * (1 - l2) * (1 + l2 * T4) * (1 - T2) ** 2 / (1 - l2 * T4) ** 3
    if fam == "pss_s":
        return l2 * (1 - l2) * (1 - T2) / (1 - l2 * T2) ** 2
    if fam == "pas_b":
        return (1 - l2) * (1 + l2 * T4) * (1 - T2) ** 2 / (1 - l2 * T4) ** 3
    if fam == "pas_s":
        return (1 - l2) * (1 - T2) / (1 - l2 * T2) ** 2
    if fam == "prs_b":
        T6 = T4 * T2
        T8 = T4 * T4
        bracket = (
            T4
            + (1 - 8 * T2 + 24 * T4 - 32 * T6 + 11 * T8) * l2
            + T4 * (11 - 56 * T2 + 96 * T4 - 56 * T6 + 11 * T8) * l2 * l2
            + T8 * (11 - 32 * T2 + 24 * T4 - 8 * T6 + T8) * l2**3
            + T4 * T8 * l2**4
        )
        return (1 - l2) / (1 - T4 * l2) ** 5 * bracket
    if fam == "prs_s":
        bracket = l2 + T2 * (1 + (T2 - 4) * l2 + l2 * l2)
        return (1 - l2) / (1 - T2 * l2) ** 3 * bracket
    raise ConstructionError(f"no creation probability for {fam}")


def analytic_log_negativity(state: SchmidtState) -> float:
    """Closed-form E_LN of an equal-offset Schmidt state, 2*log2(sum |q_n|).

    The partial-transpose spectrum of a pure Schmidt state depends only on
    products of coefficient magnitudes, so signed families (PRS) enter
    through |q_n|.
    """
    if not state.equal_offsets:
        raise UnsupportedFormError(
            "analytic form requires equal mode offsets (not PSS_s/PAS_s)"
        )
    return 2.0 * math.log2(float(np.abs(state.q).sum()))


def pure_log_negativity(state: SchmidtState | NoonState) -> float:
    """E_LN of an un-evolved state, valid for any Schmidt form and NOON."""
    if isinstance(state, NoonState):
        return 1.0
    total = float(np.abs(state.q).sum())
    return 2.0 * math.log2(total)


def overlap(a: SchmidtState, b: SchmidtState) -> float:
    """Fidelity |<a|b>|^2 between two Schmidt-form pure states."""
    if (a.offset1, a.offset2) != (b.offset1, b.offset2):
        return 0.0
    n = min(a.q.shape[0], b.q.shape[0])
    return float(np.dot(a.q[:n], b.q[:n]) ** 2)


def calibrate_to_entanglement(
    family: str,
    target_eln: float,
    T: float | None = None,
    noon_n: int | None = None,
    n_max: int = DEFAULT_N_MAX,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> StateRecipe:
    """Find a recipe whose initial E_LN hits ``target_eln``.

    Bisects the squeezing parameter lambda at fixed T; E_LN is strictly
    increasing in lambda for every family on the supported grid.  NOON
    states carry exactly 1 ebit and are accepted only for that target.
    """
    if target_eln <= 0:
        raise DomainError("target entanglement must be positive")
    if family == "noon":
        if abs(target_eln - 1.0) > 1e-12:
            raise NoSolutionError("NOON states carry exactly 1 ebit")
        return StateRecipe(family="noon", noon_n=noon_n or 2)

    def eln_of(lam: float) -> float:
        recipe = StateRecipe(
            family=family,
            squeezing=squeezing_from_lambda(lam),
            T=T if family in T_FAMILIES else None,
        )
        return pure_log_negativity(build_state(recipe, n_max))

    lo, hi = 1e-6, 1.0 - 1e-6
    f_lo, f_hi = eln_of(lo), eln_of(hi)
    if not f_lo < f_hi:
        raise NoSolutionError(f"E_LN not increasing in lambda for {family}")
    if not f_lo <= target_eln <= f_hi:
        raise NoSolutionError(
            f"target {target_eln} outside reachable range [{f_lo:.3g}, {f_hi:.3g}]"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = eln_of(mid)
        if abs(f_mid - target_eln) < tol:
            lo = hi = mid
            break
        if f_mid < target_eln:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return StateRecipe(
        family=family,
        squeezing=squeezing_from_lambda(lam),
        T=T if family in T_FAMILIES else None,
    )
