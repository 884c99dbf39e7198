"""Diffusivity and reaction families with numerical hypothesis audits.

The quasilinear diffusivity is described by a primitive Gamma with
derivative gamma, pinched between positive constants gamma_min <= gamma(t)
<= gamma_max with a limit gamma_inf at infinity, and with t -> Gamma(t^2)
convex. Reactions come in two growth classes: genuinely sublinear ones
(f = nu * g with g(t) = o(t) at infinity) and asymptotically linear ones.

The existence theory hangs on asymptotic statements (limsup/liminf slope
comparisons against gamma * lambda1). Those are not decidable by a finite
computation, so the audits here sample log-spaced ranges and label their
verdicts "verified-sampled", reserving "verified-analytic" for bounds the
family carries in closed form. A failed sample is a hard "violated".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoefficientModel",
    "ReactionModel",
    "HypothesisReport",
    "BallConditionReport",
    "make_coefficient",
    "make_reaction",
    "check_hypotheses",
    "check_ball_condition",
]

COEFFICIENT_FAMILIES = ("power", "constant")
REACTION_FAMILIES = ("saturating", "cubic_saturating", "linear")


@dataclass(frozen=True)
class CoefficientModel:
    """Diffusivity family: primitive Gamma, derivative gamma, cached bounds.

    analytic_bounds marks gamma_min/gamma_max/gamma_inf as closed-form
    values of the family (vs sampled estimates).
    """

    family: str
    params: dict
    gamma_min: float
    gamma_max: float
    gamma_inf: float
    analytic_bounds: bool

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "constant":
            return np.full_like(t, self.params["c"])
        a, b, p = self.params["A"], self.params["B"], self.params["p"]
        return a + (b * p / 2.0) * (1.0 + t) ** (p / 2.0 - 1.0)

    def big_gamma(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "constant":
            return self.params["c"] * t
        a, b, p = self.params["A"], self.params["B"], self.params["p"]
        return a * t + b * ((1.0 + t) ** (p / 2.0) - 1.0)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


@dataclass(frozen=True)
class ReactionModel:
    """Reaction family: f with primitive F, growth class, linear bound data.

    For the sublinear class f = nu * g; linear_bound_C is the constant of
    the bound f(t) <= C t for t > onset_t0, and asymptotic_slope the limit
    of f(t)/t at infinity (0 for genuinely sublinear families).
    """

    family: str
    params: dict
    growth_class: str
    linear_bound_C: float
    onset_t0: float
    asymptotic_slope: float

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "saturating":
            return self.params["nu"] * self.params["amplitude"] * t / (1.0 + np.abs(t))
        if self.family == "cubic_saturating":
            k = self.params["kappa"]
            return k * t**3 / (1.0 + t**2)
        k = self.params["kappa"]
        return k * t

    def big_f(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "saturating":
            return self.params["nu"] * self.params["amplitude"] * (np.abs(t) - np.log1p(np.abs(t)))
        if self.family == "cubic_saturating":
            k = self.params["kappa"]
            return 0.5 * k * (t**2 - np.log1p(t**2))
        k = self.params["kappa"]
        return 0.5 * k * t**2

    def g(self, t):
        """Underlying g of the sublinear class (f = nu * g)."""
        if self.growth_class != "sublinear":
            raise ValueError(f"family {self.family!r} has no sublinear factor g")
        t = np.asarray(t, dtype=float)
        return self.params["amplitude"] * t / (1.0 + np.abs(t))

    def big_g(self, t):
        if self.growth_class != "sublinear":
            raise ValueError(f"family {self.family!r} has no sublinear factor G")
        t = np.asarray(t, dtype=float)
        return self.params["amplitude"] * (np.abs(t) - np.log1p(np.abs(t)))

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


@dataclass(frozen=True)
class HypothesisReport:
    """Per-hypothesis verdicts of a (coefficient, reaction) pair.

    Verdicts take values in {verified-analytic, verified-sampled, violated,
    inconclusive}; witnesses holds the sampled quantities the verdicts were
    based on; lambda1 is the eigenvalue used in the slope thresholds.
    """

    verdicts: dict
    witnesses: dict
    lambda1: float

    def all_verified(self, keys=None) -> bool:
        items = self.verdicts if keys is None else {k: self.verdicts[k] for k in keys}
        return all(v.startswith("verified") for v in items.values())


@dataclass(frozen=True)
class BallConditionReport:
    """Margin report of the radius condition R^2 >= C R^2 + ||h|| R."""

    satisfied: bool
    margin: float
    radius: float
    bound_constant: float


def make_coefficient(family: str, params: dict) -> CoefficientModel:
    """Build a diffusivity model.

    "power": Gamma(t) = A t + B ((1+t)^{p/2} - 1) with A, B > 0 and
    1 < p < 2; gamma decreases from A + B p/2 at zero to the limit A.
    "constant": gamma == c > 0.
    """
    if family == "power":
        a = float(params["A"])
        b = float(params["B"])
        p = float(params["p"])
        if a <= 0 or b <= 0:
            raise ValueError(f"power family needs A, B > 0, got A={a}, B={b}")
        if not 1.0 < p < 2.0:
            raise ValueError(f"power family needs p in (1, 2), got {p}")
        return CoefficientModel(
            family=family,
            params={"A": a, "B": b, "p": p},
            gamma_min=a,
            gamma_max=a + b * p / 2.0,
            gamma_inf=a,
            analytic_bounds=True,
        )
    if family == "constant":
        c = float(params["c"])
        if c <= 0:
            raise ValueError(f"constant family needs c > 0, got {c}")
        return CoefficientModel(
            family=family, params={"c": c},
            gamma_min=c, gamma_max=c, gamma_inf=c, analytic_bounds=True,
        )
    raise ValueError(f"unknown coefficient family {family!r}; known: {COEFFICIENT_FAMILIES}")


def make_reaction(family: str, params: dict) -> ReactionModel:
    """Build a reaction model.

    "saturating": f(t) = nu * amplitude * t / (1 + |t|), sublinear class
    (slope nu*amplitude at 0, slope 0 at infinity, |f| <= nu*amplitude*|t|
    everywhere; amplitude defaults to 1 and rescales the factor g).
    "cubic_saturating": f(t) = kappa t^3 / (1 + t^2), linear class (slope 0
    at 0, slope kappa at infinity, f(t) <= kappa t for t > 0).
    "linear": f(t) = kappa t (the negative-control family: slope at 0
    equals the slope at infinity).
    """
    if family == "saturating":
        nu = float(params["nu"])
        amp = float(params.get("amplitude", 1.0))
        if nu <= 0 or amp <= 0:
            raise ValueError(f"saturating family needs nu, amplitude > 0, got nu={nu}, amplitude={amp}")
        return ReactionModel(
            family=family, params={"nu": nu, "amplitude": amp}, growth_class="sublinear",
            linear_bound_C=nu * amp, onset_t0=1.0, asymptotic_slope=0.0,
        )
    if family == "cubic_saturating":
        k = float(params["kappa"])
        if k <= 0:
            raise ValueError(f"cubic_saturating family needs kappa > 0, got {k}")
        return ReactionModel(
            family=family, params={"kappa": k}, growth_class="linear",
            linear_bound_C=k, onset_t0=1.0, asymptotic_slope=k,
        )
    if family == "linear":
        k = float(params["kappa"])
        if k <= 0:
            raise ValueError(f"linear family needs kappa > 0, got {k}")
        return ReactionModel(
            family=family, params={"kappa": k}, growth_class="linear",
            linear_bound_C=k, onset_t0=0.0, asymptotic_slope=k,
        )
    raise ValueError(f"unknown reaction family {family!r}; known: {REACTION_FAMILIES}")


# ---------------------------------------------------------------------------
# hypothesis audits
# ---------------------------------------------------------------------------

_SMALL_T = np.logspace(-6.0, -1.0, 60)
_LARGE_T = np.logspace(2.0, 6.0, 60)


def _audit_coefficient(coeff: CoefficientModel, verdicts, witnesses):
    t = np.concatenate([[0.0], np.logspace(-6, 6, 200)])
    gam = coeff.gamma(t)
    tol = 1e-12 * max(1.0, coeff.gamma_max)
    in_bounds = bool(
        np.all(gam >= coeff.gamma_min - tol) and np.all(gam <= coeff.gamma_max + tol)
    )
    positive = coeff.gamma_min > 0
    witnesses["gamma_range"] = (float(gam.min()), float(gam.max()))
    if not (in_bounds and positive):
        verdicts["gamma1"] = "violated"
    else:
        verdicts["gamma1"] = "verified-analytic" if coeff.analytic_bounds else "verified-sampled"

    # midpoint convexity of m(t) = Gamma(t^2) on 1000 sampled triples
    rng = np.random.default_rng(1234)
    a = 10.0 ** rng.uniform(-4, 3, size=1000)
    b = 10.0 ** rng.uniform(-4, 3, size=1000)
    m = lambda t: coeff.big_gamma(np.asarray(t) ** 2)
    lhs = m(0.5 * (a + b))
    rhs = 0.5 * (m(a) + m(b))
    defect = float(np.min(rhs - lhs))
    witnesses["convexity_min_defect"] = defect
    scale = 1e-10 * max(1.0, float(np.max(np.abs(rhs))))
    verdicts["gamma2"] = "verified-sampled" if defect >= -scale else "violated"


def _audit_linear_reaction(reaction, coeff, lambda1, verdicts, witnesses, crit_p):
    slope_small = np.max(reaction.f(_SMALL_T) / _SMALL_T)
    witnesses["f1_max_small_slope"] = float(slope_small)
    thresh = coeff.gamma_min * lambda1
    verdicts["f1"] = "verified-sampled" if slope_small < thresh else "violated"

    ratio = reaction.f(_LARGE_T) / _LARGE_T**crit_p
    witnesses["f2_exponent"] = crit_p
    witnesses["f2_final_ratio"] = float(ratio[-1])
    decaying = ratio[-1] <= 1e-3 * max(ratio[0], 1e-300) or ratio[-1] < 1e-12
    verdicts["f2"] = "verified-sampled" if decaying else "inconclusive"

    slope_large = reaction.f(_LARGE_T) / _LARGE_T
    witnesses["f3_min_large_slope"] = float(np.min(slope_large))
    target = coeff.gamma_inf * lambda1
    verdicts["f3"] = (
        "verified-sampled" if np.min(slope_large) >= target * (1.0 - 1e-9) else "violated"
    )

    bounded = np.max(slope_large) < 1e12 and slope_large[-1] <= 10.0 * max(slope_large[0], 1e-300)
    witnesses["f4_final_slope"] = float(slope_large[-1])
    verdicts["f4"] = "verified-sampled" if bounded else "violated"


def _audit_sublinear_reaction(reaction, verdicts, witnesses):
    t = np.logspace(3.0, 6.0, 40)
    slopes = np.abs(reaction.g(t) / t)
    witnesses["g1_final_slope"] = float(slopes[-1])
    small = slopes[-1] <= 1e-2 and np.all(np.diff(slopes) <= 1e-15)
    verdicts["g1"] = "verified-sampled" if small else "inconclusive"

    t0 = max(reaction.onset_t0, 1.0)
    # midpoint-rule quadrature of g as an oracle-grade integral of G(t0)
    rq = np.linspace(0.0, t0, 20001)
    mid = 0.5 * (rq[1:] + rq[:-1])
    g_t0 = float(np.sum(reaction.g(mid)) * (rq[1] - rq[0]))
    witnesses["g2_G_at_t0"] = g_t0
    verdicts["g2"] = "verified-sampled" if g_t0 > 0 else "violated"

    tt = np.logspace(-6.0, 6.0, 200)
    cg = float(np.max(np.abs(reaction.g(tt) / tt)))
    witnesses["g3_bound_Cg"] = cg
    verdicts["g3"] = "verified-sampled" if np.isfinite(cg) else "violated"


def check_hypotheses(coeff: CoefficientModel, reaction: ReactionModel,
                     lambda1: float, dimension: int = 1,
                     s: float = 0.5) -> HypothesisReport:
    """Numerically audit the standing assumptions of the existence theory.

    Slope conditions are sampled on log grids (t in [1e-6, 1e-1] near zero,
    [1e2, 1e6] at infinity) against the thresholds gamma_min * lambda1 and
    gamma_inf * lambda1. The critical exponent entering the subcritical
    growth check is 2d/(d-2s) when d > 2s and infinity otherwise (standard
    convention; the check uses the midpoint of the admissible range, capped
    at 2).
    """
    if lambda1 <= 0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    verdicts: dict = {}
    witnesses: dict = {}
    _audit_coefficient(coeff, verdicts, witnesses)
    if reaction.growth_class == "sublinear":
        _audit_sublinear_reaction(reaction, verdicts, witnesses)
    else:
        if dimension > 2 * s:
            two_star = 2.0 * dimension / (dimension - 2.0 * s)
            crit_p = min(2.0, 0.5 * (1.0 + (two_star - 1.0)))
        else:
            crit_p = 2.0
        _audit_linear_reaction(reaction, coeff, lambda1, verdicts, witnesses, crit_p)
    return HypothesisReport(verdicts=verdicts, witnesses=witnesses, lambda1=float(lambda1))


def check_ball_condition(R: float, reaction: ReactionModel, h_norm: float) -> BallConditionReport:
    """Margin of the radius condition R^2 >= C R^2 + ||h||_{L2} R.

    Reported, never used as a hard gate: with C >= 1 the condition is
    unsatisfiable for any R > 0, which conflicts with the slope regimes the
    two-solution theory needs; runs log the margin and proceed.
    """
    if R < reaction.onset_t0:
        raise ValueError(
            f"radius R={R} must be at least the onset t0={reaction.onset_t0}"
        )
    if h_norm < 0:
        raise ValueError("h_norm must be nonnegative")
    c = reaction.linear_bound_C
    margin = R**2 - c * R**2 - h_norm * R
    return BallConditionReport(
        satisfied=bool(margin >= 0), margin=float(margin),
        radius=float(R), bound_constant=float(c),
    )
