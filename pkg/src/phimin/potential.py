"""Height-dependent weight functions and their admissibility checks.

The weight ``phi`` is a smooth function of the vertical coordinate z,
defined on an open half-line ]alpha, +inf[ and known in closed form
together with its first three derivatives.  Only a closed registry of
families is supported so that evaluation is exact to third order without
a symbolic engine:

    Constant(c0)              phi = c0
    Linear(slope)             phi' = slope            (soliton weight)
    Quadratic(Lambda, beta)   phi' = Lambda*z + beta
    LogPower(a)               phi' = a / z            (domes, hyperbolic)
    Series(Lambda, beta, c)   phi' = Lambda*u + beta + sum_i c_i u^-i

``phi`` is stored up to an additive constant; the ``offset`` field fixes
the representative, which matters only for normalised density audits.

The admissibility checks cover:

    c1:   phi' > 0 and phi'' >= 0 on the queried window,
    c2:   Gamma = sup(2 phi'' - phi'^2) finite,
    cc3:  the tail expansion exists with Lambda >= 0 (beta > 0 if
          Lambda = 0),
    d3:   phi''' <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

CONSTANT = "Constant"
LINEAR = "Linear"
QUADRATIC = "Quadratic"
LOG_POWER = "LogPower"
SERIES = "Series"

FAMILIES = (CONSTANT, LINEAR, QUADRATIC, LOG_POWER, SERIES)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class PotentialDomainError(ValueError):
    """Evaluation requested at a height outside ]alpha, +inf[."""


class PotentialFamilyError(ValueError):
    """Operation unsupported or ill-posed for the given family."""


@dataclass(frozen=True)
class PotentialSpec:
    """One member of the closed weight-function registry.

    ``params`` holds the family coefficients under fixed key names
    (see the factory classmethods).  ``alpha`` is the left endpoint of
    the height domain; evaluation is defined for z > alpha only.
    """

    family: str
    params: dict = field(default_factory=dict)
    alpha: float = float("-inf")
    label: str = ""
    offset: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PotentialFamilyError(f"unknown family {self.family!r}")
        _validate_params(self.family, self.params, self.alpha)

    # -- factories ---------------------------------------------------------

    @classmethod
    def constant(cls, c0: float = 0.0, alpha: float = float("-inf"), label: str = "") -> "PotentialSpec":
        return cls(CONSTANT, {"c0": float(c0)}, alpha=alpha, label=label)

    @classmethod
    def linear(cls, slope: float, alpha: float = float("-inf"), label: str = "") -> "PotentialSpec":
        return cls(LINEAR, {"slope": float(slope)}, alpha=alpha, label=label)

    @classmethod
    def quadratic(cls, lam: float, beta: float, alpha: float = float("-inf"), label: str = "") -> "PotentialSpec":
        return cls(QUADRATIC, {"Lambda": float(lam), "beta": float(beta)}, alpha=alpha, label=label)

    @classmethod
    def log_power(cls, a: float, alpha: float = 0.0, label: str = "") -> "PotentialSpec":
        return cls(LOG_POWER, {"a": float(a)}, alpha=alpha, label=label)

    @classmethod
    def series(cls, lam: float, beta: float, coefficients, u0: float,
               alpha: float = 0.0, label: str = "") -> "PotentialSpec":
        return cls(SERIES, {"Lambda": float(lam), "beta": float(beta),
                            "coefficients": tuple(float(c) for c in coefficients),
                            "u0": float(u0)}, alpha=alpha, label=label)

    # -- domain ------------------------------------------------------------

    @property
    def domain_left(self) -> float:
        """Left endpoint of the effective evaluation domain."""
        if self.family == LOG_POWER:
            return max(self.alpha, 0.0)
        if self.family == SERIES and self.params["coefficients"]:
            # inverse powers are singular at 0, regardless of alpha
            return max(self.alpha, 0.0)
        return self.alpha

    def with_offset(self, offset: float) -> "PotentialSpec":
        return replace(self, offset=float(offset))


def _validate_params(family: str, params: dict, alpha: float) -> None:
    required = {
        CONSTANT: {"c0"},
        LINEAR: {"slope"},
        QUADRATIC: {"Lambda", "beta"},
        LOG_POWER: {"a"},
        SERIES: {"Lambda", "beta", "coefficients", "u0"},
    }[family]
    missing = required - set(params)
    if missing:
        raise PotentialFamilyError(f"{family} spec missing parameters {sorted(missing)}")
    if family == LOG_POWER and alpha < 0.0:
        raise PotentialFamilyError("LogPower requires alpha >= 0")
    if family == SERIES:
        u0 = params["u0"]
        if not u0 > max(alpha, 0.0):
            raise PotentialFamilyError("Series requires u0 > max(alpha, 0)")


@dataclass(frozen=True)
class PotentialEval:
    """phi and its first three derivatives at a single height."""

    phi: float
    d1: float
    d2: float
    d3: float


class Asymptotics(NamedTuple):
    lam: float
    beta: float
    violates_constraint: bool


@dataclass(frozen=True)
class ConditionReport:
    """Admissibility summary of a weight on a height window."""

    c1_holds: bool
    gamma: float
    c2_holds: bool
    cc3_holds: bool
    d3_nonpositive: bool
    lam: float
    beta: float
    sample_count: int
    gamma_is_analytic: bool


# ---------------------------------------------------------------------------
# evaluation


def _derivatives(spec: PotentialSpec, z):
    """(phi, phi', phi'', phi''') at z; vectorised, no domain checks."""
    z = np.asarray(z, dtype=float)
    p = spec.params
    if spec.family == CONSTANT:
        c0 = p["c0"]
        zero = np.zeros_like(z)
        return c0 + zero, zero, zero.copy(), zero.copy()
    if spec.family == LINEAR:
        m = p["slope"]
        zero = np.zeros_like(z)
        return m * z, m + zero, zero, zero.copy()
    if spec.family == QUADRATIC:
        lam, beta = p["Lambda"], p["beta"]
        zero = np.zeros_like(z)
        return 0.5 * lam * z * z + beta * z, lam * z + beta, lam + zero, zero
    if spec.family == LOG_POWER:
        a = p["a"]
        return a * np.log(z), a / z, -a / z**2, 2.0 * a / z**3
    # Series: phi' = Lambda u + beta + sum c_i u^-i, integrated/differentiated
    lam, beta = p["Lambda"], p["beta"]
    coeffs = p["coefficients"]
    phi = 0.5 * lam * z * z + beta * z
    d1 = lam * z + beta
    d2 = np.full_like(z, lam)
    d3 = np.zeros_like(z)
    for i, c in enumerate(coeffs, start=1):
        d1 = d1 + c * z**(-i)
        d2 = d2 - i * c * z**(-i - 1)
        d3 = d3 + i * (i + 1) * c * z**(-i - 2)
        if i == 1:
            phi = phi + c * np.log(z)
        else:
            phi = phi - c / ((i - 1) * z**(i - 1))
    return phi, d1, d2, d3


def eval_potential(spec: PotentialSpec, z):
    """Evaluate phi, phi', phi'', phi''' at height z (scalar or array).

    Raises PotentialDomainError outside ]alpha, +inf[ and
    PotentialFamilyError where inverse powers or logarithms are singular.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= spec.alpha):
        raise PotentialDomainError(f"height {z} not above alpha={spec.alpha}")
    if spec.domain_left > spec.alpha and np.any(z_arr <= spec.domain_left):
        raise PotentialFamilyError(
            f"{spec.family} is singular at or below z={spec.domain_left}")
    phi, d1, d2, d3 = _derivatives(spec, z_arr)
    phi = phi + spec.offset
    if np.isscalar(z) or z_arr.ndim == 0:
        return PotentialEval(float(phi), float(d1), float(d2), float(d3))
    return PotentialEval(phi, d1, d2, d3)


# ---------------------------------------------------------------------------
# condition checks


def _golden_refine(f, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximum of f on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return max(f1, f2)


def _sampled_sup(f, zs: np.ndarray) -> float:
    """Sample max plus one golden-section refinement around the best point."""
    vals = f(zs)
    k = int(np.argmax(vals))
    lo = zs[max(k - 1, 0)]
    hi = zs[min(k + 1, len(zs) - 1)]
    if hi > lo:
        return max(float(vals[k]), _golden_refine(lambda t: float(f(t)), lo, hi))
    return float(vals[k])


def _gamma_analytic(spec: PotentialSpec, z_lo: float, z_hi: float):
    """Exact sup of 2 phi'' - phi'^2 over [z_lo, z_hi] where closed-form."""
    p = spec.params
    if spec.family == CONSTANT:
        return 0.0
    if spec.family == LINEAR:
        return -p["slope"] ** 2
    if spec.family == QUADRATIC:
        lam, beta = p["Lambda"], p["beta"]
        if lam == 0.0:
            return -beta**2
        z_star = -beta / lam
        if z_lo <= z_star <= z_hi:
            return 2.0 * lam
        edge = min((lam * z_lo + beta) ** 2, (lam * z_hi + beta) ** 2)
        return 2.0 * lam - edge
    return None


def asymptotics(spec: PotentialSpec) -> Asymptotics:
    """Tail coefficients (Lambda, beta) of phi' = Lambda z + beta + O(1/z).

    The flag reports violation of the admissible-tail constraint
    Lambda >= 0 with beta > 0 when Lambda = 0.
    """
    p = spec.params
    if spec.family == CONSTANT:
        lam, beta = 0.0, 0.0
    elif spec.family == LINEAR:
        lam, beta = 0.0, p["slope"]
    elif spec.family in (QUADRATIC, SERIES):
        lam, beta = p["Lambda"], p["beta"]
    else:
        raise PotentialFamilyError(
            "LogPower has no tail expansion of the admissible form")
    violates = (lam < 0.0) or (lam == 0.0 and not beta > 0.0)
    return Asymptotics(lam, beta, violates)


def _c1_analytic(spec: PotentialSpec, z_lo: float, z_hi: float):
    """Exact c1 verdict on [z_lo, z_hi] for closed-form families."""
    p = spec.params
    if spec.family == CONSTANT:
        return False
    if spec.family == LINEAR:
        return p["slope"] > 0.0
    if spec.family == QUADRATIC:
        lam, beta = p["Lambda"], p["beta"]
        return lam >= 0.0 and lam * z_lo + beta > 0.0
    if spec.family == LOG_POWER:
        # phi' and phi'' have opposite signs unless a = 0
        return False
    return None


def check_conditions(spec: PotentialSpec, z_lo: float, z_hi: float,
                     n_samples: int) -> ConditionReport:
    """Check c1/c2/cc3 and phi''' <= 0 on [z_lo, z_hi].

    Suprema are analytic where the family admits a closed form
    (Constant, Linear, Quadratic) and otherwise come from n_samples
    uniform points refined by a golden-section pass around the best one.
    """
    if not (spec.domain_left < z_lo < z_hi):
        raise PotentialDomainError(
            f"need domain_left < z_lo < z_hi, got ({z_lo}, {z_hi})")
    if n_samples < 2:
        raise PotentialDomainError("n_samples must be >= 2")

    zs = np.linspace(z_lo, z_hi, n_samples)
    _, d1, d2, d3 = _derivatives(spec, zs)

    c1 = _c1_analytic(spec, z_lo, z_hi)
    if c1 is None:
        min_d1 = -_sampled_sup(lambda t: -_derivatives(spec, t)[1], zs)
        min_d2 = -_sampled_sup(lambda t: -_derivatives(spec, t)[2], zs)
        c1 = (min_d1 > 0.0) and (min_d2 >= -1e-14)

    gamma = _gamma_analytic(spec, z_lo, z_hi)
    gamma_is_analytic = gamma is not None
    if gamma is None:
        gamma = _sampled_sup(
            lambda t: 2.0 * _derivatives(spec, t)[2] - _derivatives(spec, t)[1] ** 2, zs)

    c2 = _c2_global(spec)

    if spec.family == LOG_POWER:
        lam, beta, cc3 = 0.0, 0.0, False
    else:
        lam, beta, violates = asymptotics(spec)
        cc3 = not violates

    if spec.family in (CONSTANT, LINEAR, QUADRATIC):
        d3_ok = True
    elif spec.family == LOG_POWER:
        d3_ok = spec.params["a"] <= 0.0
    else:
        max_d3 = _sampled_sup(lambda t: _derivatives(spec, t)[3], zs)
        d3_ok = max_d3 <= 1e-14

    return ConditionReport(
        c1_holds=bool(c1),
        gamma=float(gamma),
        c2_holds=bool(c2),
        cc3_holds=bool(cc3),
        d3_nonpositive=bool(d3_ok),
        lam=float(lam),
        beta=float(beta),
        sample_count=int(n_samples),
        gamma_is_analytic=bool(gamma_is_analytic),
    )


def _c2_global(spec: PotentialSpec) -> bool:
    """Is 2 phi'' - phi'^2 bounded above on the whole effective domain?

    Closed-form families are decided exactly.  For Series the tail
    beyond the validity threshold decays (to -inf if Lambda > 0, to
    -beta^2 if Lambda = 0) and the compact part is continuous, so the
    answer is always True there.
    """
    if spec.family in (CONSTANT, LINEAR, QUADRATIC, SERIES):
        return True
    a = spec.params["a"]
    coef = -a * (a + 2.0)  # 2 phi'' - phi'^2 = coef / z^2
    if coef <= 0.0:
        return True
    return spec.alpha > 0.0


# ---------------------------------------------------------------------------
# normalisation for density audits


def normalized_for_window(spec: PotentialSpec, epsilon: float) -> PotentialSpec:
    """Shift the additive constant so that phi(0) = 0 and 0 <= phi(eps) < 1.

    Needed by density monotonicity audits, which evaluate phi at small
    radii.  Raises if no offset realises the window condition.
    """
    if epsilon <= 0.0:
        raise PotentialDomainError("epsilon must be positive")
    if spec.domain_left >= 0.0:
        raise PotentialDomainError(
            "normalisation window requires the domain to contain ]0, eps]")
    base0 = float(_derivatives(spec, np.asarray(0.0))[0])
    shifted = spec.with_offset(-base0)
    at_eps = eval_potential(shifted, epsilon).phi
    if not (0.0 <= at_eps < 1.0):
        raise PotentialDomainError(
            f"no offset puts phi({epsilon}) in [0, 1): got {at_eps}")
    return shifted


# ---------------------------------------------------------------------------
# JSON round-trip (field names are the CLI wire format)


def to_json_dict(spec: PotentialSpec) -> dict:
    params = dict(spec.params)
    if "coefficients" in params:
        params["coefficients"] = list(params["coefficients"])
    return {
        "family": spec.family,
        "params": params,
        "alpha": None if math.isinf(spec.alpha) else spec.alpha,
        "label": spec.label,
        "offset": spec.offset,
    }


def spec_from_json(obj: dict) -> PotentialSpec:
    """Build a spec from its JSON object form.

    Family parameters may sit under "params" or inline next to "family";
    a missing or null alpha means an unbounded-below domain.
    """
    if "family" not in obj:
        raise PotentialFamilyError("potential object missing 'family'")
    family = obj["family"]
    if family not in FAMILIES:
        raise PotentialFamilyError(f"unknown family {family!r}")
    known = {"family", "params", "alpha", "label", "offset"}
    params = dict(obj.get("params") or {})
    for key, val in obj.items():
        if key not in known:
            params[key] = val
    if "coefficients" in params:
        params["coefficients"] = tuple(float(c) for c in params["coefficients"])
    alpha = obj.get("alpha")
    if alpha is None:
        alpha = 0.0 if family in (LOG_POWER, SERIES) else float("-inf")
    return PotentialSpec(
        family=family,
        params=params,
        alpha=float(alpha),
        label=str(obj.get("label", "")),
        offset=float(obj.get("offset", 0.0)),
    )
