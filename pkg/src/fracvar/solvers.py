"""Cone-constrained minimization and the numerical mountain pass.

Solutions are sought in the nonnegative cone X = {u >= 0}. Two search
modes cover the two existence mechanisms:

* minimize_cone: projected descent with Armijo backtracking for the local
  minimizer the direct method produces. Descent directions are
  preconditioned by ((-Lap)^s + I)^{-1} (dense Cholesky, shared with the
  eigen solver); the cone projection is the nodewise positive part. An
  optional ball constraint rescales iterates back to radius R in the
  discrete H^s norm and records which boundary variant of the
  compactness condition was active (sign of <E'(u), u>).

* mountain_pass: a discrete path deformation between two low-energy
  points. Phase A repeatedly locates the path-energy maximizer, applies
  one projected descent step to it, and redistributes the path by equal
  H^s arclength; phase B pins the near-saddle maximizer with a local
  minimax polish (1D maximization along the path tangent alternating with
  projected descent in the orthogonal complement) until the first-order
  residual meets tolerance. Both phases use only energies and gradients.

First-order optimality over the cone is measured by the KKT residual:
|g_i| on nodes with u_i > 0 and max(0, -g_i) on active nodes, g being the
nodal representer of the energy derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .coeffs import check_ball_condition
from .energy import EnergyModel, EnergyOverflowError, energy, energy_gradient, hs_norm
from .fracops import NonlocalOperator, composition_matrix
from .grid import Field

__all__ = [
    "SolverOptions",
    "SolveReport",
    "RaySearchResult",
    "project_cone",
    "kkt_residual",
    "minimize_cone",
    "mountain_pass",
    "ray_search",
    "coercivity_radius",
]

_TRIVIAL_L2 = 1e-8


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget, tolerances, step rule, and path shape.

    ball_radius None means unconstrained (a coercivity-based default is
    derived per run and reported); path options apply to mountain_pass.
    """

    max_iter: int = 5000
    tol_g: float = 1e-6
    armijo_factor: float = 0.5
    armijo_slope: float = 1e-4
    ball_radius: float | None = None
    cone_projection: bool = True
    path_points: int = 41
    path_step_cap: float | None = None
    respline_every: int = 10
    tol_active: float = 1e-10

    def __post_init__(self):
        if self.tol_g <= 0 or self.tol_active <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.armijo_factor < 1.0:
            raise ValueError("armijo_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_slope < 0.5:
            raise ValueError("armijo_slope must lie in (0, 0.5)")
        if self.path_points < 3 or self.path_points % 2 == 0:
            raise ValueError("path_points must be odd and at least 3")


@dataclass
class SolveReport:
    """Outcome of one solve: the field, its energy, first-order residual,
    classification, and boundary/ball diagnostics."""

    solution: Field
    energy: float
    kkt_residual: float
    iterations: int
    classification: str
    hs_norm: float
    l2_norm: float
    ball_radius: float | None = None
    ball_margin: float | None = None
    level: float | None = None
    boundary: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        diag = {k: v for k, v in self.diagnostics.items()
                if not isinstance(v, (list, tuple)) or len(v) <= 8}
        trace = self.diagnostics.get("energy_trace")
        if trace is not None:
            diag["energy_initial"] = float(trace[0])
            diag["energy_final"] = float(trace[-1])
        return {
            "energy": self.energy,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "classification": self.classification,
            "hs_norm": self.hs_norm,
            "l2_norm": self.l2_norm,
            "ball_radius": self.ball_radius,
            "ball_margin": self.ball_margin,
            "level": self.level,
            "boundary": self.boundary,
            "diagnostics": diag,
        }


@dataclass(frozen=True)
class RaySearchResult:
    """Sampled energy curve along a ray, with the first crossing if any."""

    t_star: float | None
    t_values: np.ndarray
    energies: np.ndarray
    margin: float

    @property
    def found(self) -> bool:
        return self.t_star is not None


def project_cone(u: Field) -> Field:
    """Nodewise positive part; idempotent."""
    return Field(u.grid, np.maximum(u.values, 0.0))


def kkt_residual(model: EnergyModel, u: Field, tol_active: float = 1e-10) -> float:
    """First-order residual of minimization over the cone at u >= 0."""
    g = energy_gradient(model, u).representer.values
    active = u.values > tol_active
    parts = []
    if np.any(active):
        parts.append(np.max(np.abs(g[active])))
    if np.any(~active):
        parts.append(np.max(np.maximum(0.0, -g[~active])))
    return float(max(parts)) if parts else 0.0


def coercivity_radius(model: EnergyModel, lambda1: float) -> float | None:
    """Radius estimate of the coercivity ball, None when not coercive.

    From E(u) >= (gamma_min/4)||u||^2 - ||h|| ||u||/sqrt(lambda1) - A|Omega|
    with A = sup_t (F(t) - lambda1 gamma_min t^2 / 4): the zero-sublevel set
    sits inside a computable ball whenever A is finite. The supremum is
    sampled on a log grid; unbounded growth at the far end reports None.
    """
    gmin = model.coeff.gamma_min
    t = np.logspace(-3, 8, 400)
    head = model.big_f(t) - lambda1 * gmin * t**2 / 4.0
    if head[-1] > max(0.0, np.max(head[:-1])):
        return None
    a_const = max(0.0, float(np.max(head)))
    vol = model.grid.spec.volume
    h_l2 = float(np.sqrt(model.grid.weight * np.dot(model.forcing.values,
                                                    model.forcing.values)))
    a = gmin / 4.0
    b = h_l2 / np.sqrt(lambda1)
    c = a_const * vol
    return float((b + np.sqrt(b**2 + 4.0 * a * c)) / (2.0 * a) + 1.0)


class _Preconditioner:
    """Apply ((-Lap)^s + I)^{-1} via a cached dense Cholesky factor.

    A gradient operator is preferred: its composition matrix -div_s grad_s
    is the Laplacian the energy actually induces, which makes the descent
    nearly Newton in the semilinear regime. A laplacian operator's table
    works too; None degrades to the identity (plain projected gradient).

    For cone-constrained descent the solve can be restricted to the
    inactive index set (two-metric projection): mixing preconditioned
    directions into active coordinates stalls the line search, so active
    nodes move by the raw gradient instead. Restricted factors are cached
    per active set and recomputed only when it changes.
    """

    def __init__(self, op: NonlocalOperator | None):
        self._matrix = None
        self._factor = None
        self._sub_mask = None
        self._sub_factor = None
        if op is not None:
            if op.kind == "gradient":
                mat = composition_matrix(op)
            elif op.kind == "laplacian":
                mat = op.table.copy()
            else:
                raise ValueError(f"cannot precondition with operator kind {op.kind!r}")
            mat[np.diag_indices_from(mat)] += 1.0
            self._matrix = mat
            self._factor = cho_factor(mat)

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        if self._factor is None:
            return vec
        return cho_solve(self._factor, vec)

    def solve_inactive(self, vec: np.ndarray, inactive: np.ndarray) -> np.ndarray:
        """Solve on the inactive subset only; zeros elsewhere."""
        out = np.zeros_like(vec)
        if self._matrix is None:
            out[inactive] = vec[inactive]
            return out
        if inactive.all():
            out[:] = cho_solve(self._factor, vec)
            return out
        if self._sub_mask is None or not np.array_equal(self._sub_mask, inactive):
            sub = self._matrix[np.ix_(inactive, inactive)]
            self._sub_factor = cho_factor(sub)
            self._sub_mask = inactive.copy()
        out[inactive] = cho_solve(self._sub_factor, vec[inactive])
        return out


def _ball_rescale(u: Field, model: EnergyModel, radius: float | None,
                  boundary: dict) -> Field:
    if radius is None:
        return u
    nrm = hs_norm(model.grad_op, u)
    if nrm <= radius:
        return u
    scaled = Field(u.grid, u.values * (radius / nrm))
    g = energy_gradient(model, scaled).representer
    inner = float(scaled.grid.weight * np.dot(g.values, scaled.values))
    boundary["hits"] = boundary.get("hits", 0) + 1
    boundary["last_inner_product"] = inner
    # boundary variant (b) needs <E'(u), u> <= 0 on the sphere; a positive
    # pairing means the rescaled point is not a descent-compatible boundary
    # state and is flagged as variant (c)
    boundary["condition"] = "b" if inner <= 0 else "c"
    return scaled


def _armijo_step(model, opts, u, g_field, direction, f_u, step0=1.0,
                 radius=None, boundary=None, step_cap=None):
    """Backtracking projected step; returns (u_new, f_new, step) or None."""
    boundary = boundary if boundary is not None else {}
    w = model.grid.weight
    step = step0
    for _ in range(60):
        trial = Field(u.grid, u.values + step * direction)
        if opts.cone_projection:
            trial = project_cone(trial)
        if step_cap is not None:
            move = hs_norm(model.grad_op, Field(u.grid, trial.values - u.values))
            if move > step_cap:
                step *= opts.armijo_factor
                continue
        trial = _ball_rescale(trial, model, radius, boundary)
        delta = trial.values - u.values
        if not np.any(delta):
            return None
        slope = w * np.dot(g_field.values, delta)
        try:
            f_trial = energy(model, trial)
        except EnergyOverflowError:
            step *= opts.armijo_factor
            continue
        if f_trial <= f_u + opts.armijo_slope * min(slope, 0.0):
            return trial, f_trial, step
        step *= opts.armijo_factor
    return None


def _classify(u: Field, converged: bool) -> str:
    l2 = float(np.sqrt(u.grid.weight * np.dot(u.values, u.values)))
    if not converged:
        return "failed"
    return "trivial" if l2 <= _TRIVIAL_L2 else "local-min"


_DRAIN_BAND = 1e-4


def _first_order_done(kkt: float, u: Field, tol_g: float) -> bool:
    """Scale-aware termination near the trivial state.

    The gradient shrinks linearly with the iterate near zero, so an
    absolute first-order test would stop a run draining to the trivial
    state a few decades above the classification cut. Inside the band
    (1e-8, 1e-4] the tolerance tightens proportionally, which lets
    trivial-bound runs drain below the cut while genuine small-amplitude
    minimizers still terminate (their residual vanishes exactly at the
    minimizer, not merely linearly).
    """
    if kkt > tol_g:
        return False
    l2 = float(np.sqrt(u.grid.weight * np.dot(u.values, u.values)))
    if l2 <= _TRIVIAL_L2 or l2 > _DRAIN_BAND:
        return True
    return kkt <= tol_g * (l2 / _DRAIN_BAND)


def minimize_cone(model: EnergyModel, opts: SolverOptions, u0: Field,
                  precond_op: NonlocalOperator | None = None,
                  lambda1: float | None = None) -> SolveReport:
    """Projected, preconditioned descent over the cone.

    Terminates when the KKT residual reaches opts.tol_g; non-convergence
    is reported (classification "failed"), not raised. When no ball radius
    is configured, a default of 10x the coercivity-ball estimate is used
    if the model is coercive (and reported), otherwise the run is
    unconstrained.
    """
    precond = _Preconditioner(precond_op)
    u = project_cone(u0) if opts.cone_projection else u0

    radius = opts.ball_radius
    if radius is None and lambda1 is not None:
        est = coercivity_radius(model, lambda1)
        if est is not None:
            radius = 10.0 * est

    boundary: dict = {"hits": 0, "condition": None, "last_inner_product": None}
    f_u = energy(model, u)
    kkt = kkt_residual(model, u, opts.tol_active)
    step = 1.0
    converged = _first_order_done(kkt, u, opts.tol_g)
    it = 0
    merit_mode = False
    m_u = np.inf
    energy_trace = [f_u]
    hs_trace_max = hs_norm(model.grad_op, u)

    def descent_direction(g_vals: np.ndarray) -> np.ndarray:
        if not opts.cone_projection:
            return -precond(g_vals)
        inactive = u.values > opts.tol_active
        d = -precond.solve_inactive(g_vals, inactive)
        # active nodes re-enter only along a strictly infeasible gradient
        d[~inactive] = np.maximum(-g_vals[~inactive], 0.0)
        return d

    def projected_merit(g_vals: np.ndarray, point: Field) -> float:
        pg = g_vals.copy()
        act = point.values <= opts.tol_active
        pg[act] = np.minimum(g_vals[act], 0.0)
        return float(np.linalg.norm(pg))

    while not converged and it < opts.max_iter:
        it += 1
        g = energy_gradient(model, u).representer
        direction = descent_direction(g.values)
        if not merit_mode:
            res = _armijo_step(model, opts, u, g, direction, f_u,
                               step0=min(4.0 * step, 1.0), radius=radius,
                               boundary=boundary)
            if res is None:
                # energy differences are roundoff-bound at this scale; finish
                # on the projected-gradient norm, which still resolves
                merit_mode = True
                m_u = projected_merit(g.values, u)
                continue
            u, f_u, step = res
        else:
            alpha, accepted = 1.0, False
            for _ in range(40):
                trial = Field(u.grid, u.values + alpha * direction)
                if opts.cone_projection:
                    trial = project_cone(trial)
                trial = _ball_rescale(trial, model, radius, boundary)
                if not np.any(trial.values - u.values):
                    break
                g_t = energy_gradient(model, trial).representer.values
                m_t = projected_merit(g_t, trial)
                if m_t < m_u * 0.999:
                    u, m_u, accepted = trial, m_t, True
                    break
                alpha *= 0.5
            if not accepted:
                break
            f_u = energy(model, u)
        energy_trace.append(f_u)
        hs_trace_max = max(hs_trace_max, hs_norm(model.grad_op, u))
        kkt = kkt_residual(model, u, opts.tol_active)
        if _first_order_done(kkt, u, opts.tol_g):
            converged = True

    l2 = float(np.sqrt(u.grid.weight * np.dot(u.values, u.values)))
    hs = hs_norm(model.grad_op, u)
    ball_margin = None
    if model.reaction is not None:
        h_l2 = float(np.sqrt(model.grid.weight
                             * np.dot(model.forcing.values, model.forcing.values)))
        r_eff = radius if radius is not None else max(model.reaction.onset_t0, hs, 1.0)
        r_eff = max(r_eff, model.reaction.onset_t0)
        ball_margin = check_ball_condition(r_eff, model.reaction, h_l2).margin
    return SolveReport(
        solution=u, energy=f_u, kkt_residual=kkt, iterations=it,
        classification=_classify(u, converged), hs_norm=hs, l2_norm=l2,
        ball_radius=radius, ball_margin=ball_margin, boundary=boundary,
        diagnostics={"energy_trace": energy_trace, "hs_trace_max": hs_trace_max,
                     "merit_mode_used": merit_mode},
    )


def ray_search(model: EnergyModel, direction: Field, t_max: float = 1e3,
               steps: int = 80, t_min: float | None = None,
               margin: float = 0.0) -> RaySearchResult:
    """Sample the energy along t -> E(t * direction) on a log grid.

    Returns the smallest sampled t whose energy drops below E(0) - margin
    (None when the curve never crosses, which callers treat as a failed
    mountain-pass geometry), together with the whole curve.
    """
    d = direction.values
    if not np.any(d):
        raise ValueError("ray direction must be nonzero")
    if np.any(d < 0):
        raise ValueError("ray direction must be nonnegative")
    if t_min is None:
        t_min = t_max * 1e-6
    ts = np.logspace(np.log10(t_min), np.log10(t_max), steps)
    zero = energy(model, Field(direction.grid, np.zeros_like(d)))
    energies = np.empty(steps)
    t_star = None
    for i, t in enumerate(ts):
        energies[i] = energy(model, Field(direction.grid, t * d))
        if t_star is None and energies[i] < zero - margin:
            t_star = float(t)
    return RaySearchResult(t_star=t_star, t_values=ts, energies=energies,
                           margin=margin)


# ---------------------------------------------------------------------------
# mountain pass
# ---------------------------------------------------------------------------


def _respline(path: list[Field], model: EnergyModel, cone: bool) -> list[Field]:
    """Redistribute the path points at equal H^s arclength (endpoints fixed)."""
    vals = np.stack([p.values for p in path])
    segs = [hs_norm(model.grad_op, Field(path[0].grid, vals[k + 1] - vals[k]))
            for k in range(len(path) - 1)]
    cum = np.concatenate([[0.0], np.cumsum(segs)])
    total = cum[-1]
    if total == 0.0:
        return path
    targets = np.linspace(0.0, total, len(path))
    out = [path[0]]
    for tgt in targets[1:-1]:
        k = int(np.searchsorted(cum, tgt, side="right") - 1)
        k = min(k, len(path) - 2)
        seg = cum[k + 1] - cum[k]
        lam = 0.0 if seg == 0.0 else (tgt - cum[k]) / seg
        v = (1.0 - lam) * vals[k] + lam * vals[k + 1]
        p = Field(path[0].grid, v)
        out.append(project_cone(p) if cone else p)
    out.append(path[-1])
    return out


def _hessian_vec(model: EnergyModel, u: Field, v: np.ndarray,
                 scale: float) -> np.ndarray:
    """Directional curvature by central differences of the gradient."""
    eps = 1e-5 * max(scale, 1.0) / max(np.linalg.norm(v), 1e-300)
    gp = energy_gradient(model, Field(u.grid, u.values + eps * v)).representer.values
    gm = energy_gradient(model, Field(u.grid, u.values - eps * v)).representer.values
    return (gp - gm) / (2.0 * eps)


def _refresh_unstable_mode(model, u, v, precond, scale, sweeps=4):
    """Estimate the lowest-curvature direction at u.

    Preconditioned Rayleigh-quotient descent on the finite-difference
    Hessian; this is the minimum-mode step of dimer-type saddle search and
    needs gradients only.
    """
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(sweeps):
        hv = _hessian_vec(model, u, v, scale)
        lam = float(np.dot(v, hv))
        resid = hv - lam * v
        step = precond(resid)
        v = v - step
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            break
        v = v / nrm
    return v, lam


def mountain_pass(model: EnergyModel, u_low: Field, u_far: Field,
                  opts: SolverOptions,
                  precond_op: NonlocalOperator | None = None,
                  r_h: float | None = None,
                  sphere_samples: int = 32, seed: int = 0) -> SolveReport:
    """Discrete path deformation toward the barrier critical point.

    Preconditions: E(u_far) < E(u_low) and both endpoints nonnegative
    (typically u_low is a minimizer or zero, u_far a point found by
    ray_search beyond the barrier). Returns the limiting path maximizer
    with its min-max level c; if r_h is supplied the report also records a
    sampled sphere infimum at radius r_h for the barrier inequality
    c >= alpha(r_h) > 0.
    """
    f_low = energy(model, u_low)
    f_far = energy(model, u_far)
    if not f_far < f_low:
        raise ValueError(
            f"mountain-pass geometry violated: E(u_far)={f_far:.6g} is not "
            f"below E(u_low)={f_low:.6g}"
        )
    if np.any(u_low.values < 0) or np.any(u_far.values < 0):
        raise ValueError("mountain-pass endpoints must be nonnegative")

    precond = _Preconditioner(precond_op)
    cone = opts.cone_projection
    w = model.grid.weight
    p_count = opts.path_points
    lam = np.linspace(0.0, 1.0, p_count)
    path = [Field(u_low.grid, (1 - t) * u_low.values + t * u_far.values) for t in lam]
    if cone:
        path = [project_cone(p) for p in path]

    total_len = hs_norm(model.grad_op, Field(u_low.grid, u_far.values - u_low.values))
    step_cap = opts.path_step_cap
    if step_cap is None:
        # one path segment: keeps the maximizer from teleporting into the
        # unbounded valley beyond the barrier
        step_cap = max(total_len / (p_count - 1), 1e-12)

    endpoint_level = max(f_low, f_far)
    barrier_min_gap = np.inf
    levels: list[float] = []
    kkt = np.inf
    it = 0
    budget_a = min(max(opts.max_iter // 4, 20), 400)
    stall = 0
    best_kkt = np.inf

    while it < budget_a:
        it += 1
        vals = np.array([energy(model, p) for p in path])
        k = 1 + int(np.argmax(vals[1:-1]))
        level = float(vals[k])
        levels.append(level)
        barrier_min_gap = min(barrier_min_gap, level - endpoint_level)
        kkt = kkt_residual(model, path[k], opts.tol_active)
        if kkt <= opts.tol_g:
            break
        if kkt < 0.9 * best_kkt:
            best_kkt, stall = kkt, 0
        else:
            stall += 1
            if stall >= 30:
                break
        g = energy_gradient(model, path[k]).representer
        direction = -precond(g.values)
        res = _armijo_step(model, opts, path[k], g, direction, vals[k],
                           step0=1.0, step_cap=step_cap)
        if res is not None:
            path[k] = res[0]
        path = _respline(path, model, cone)

    # phase B: minimum-mode-following polish of the near-barrier maximizer.
    # The gradient component along the unstable direction is reflected, so
    # plain descent dynamics converge to the index-1 saddle; steps are
    # accepted only when the preconditioned gradient norm decreases, which
    # rules out sliding down the unbounded valley.
    vals = [energy(model, p) for p in path]
    k = 1 + int(np.argmax(vals[1:-1]))
    u = path[k]
    mode = path[min(k + 1, p_count - 1)].values - path[max(k - 1, 0)].values
    if not np.any(mode):
        mode = np.ones(u.grid.n_nodes)
    scale = max(float(np.max(np.abs(u.values))), 1.0)

    def merit(fld: Field) -> float:
        g = energy_gradient(model, fld).representer.values
        return float(np.sqrt(w) * np.linalg.norm(precond(g)))

    m_u = merit(u)
    kkt = kkt_residual(model, u, opts.tol_active)
    converged = kkt <= opts.tol_g
    alpha = 1.0
    while not converged and it < opts.max_iter:
        it += 1
        mode, curvature = _refresh_unstable_mode(model, u, mode, precond, scale)
        g = energy_gradient(model, u).representer
        d = -precond(g.values)
        if curvature < 0.0:
            # reflect the component along the unstable mode
            d += 2.0 * mode * (np.dot(precond(g.values), mode) / np.dot(mode, mode))
        alpha = min(2.0 * alpha, 1.0)
        accepted = False
        for _ in range(40):
            trial = Field(u.grid, u.values + alpha * d)
            if cone:
                trial = project_cone(trial)
            if not np.any(trial.values - u.values):
                break
            m_t = merit(trial)
            if m_t <= m_u * (1.0 - 1e-4 * alpha) or m_t < m_u * 0.999:
                u, m_u = trial, m_t
                accepted = True
                break
            alpha *= 0.5
        level = energy(model, u)
        levels.append(level)
        barrier_min_gap = min(barrier_min_gap, level - endpoint_level)
        kkt = kkt_residual(model, u, opts.tol_active)
        if kkt <= opts.tol_g:
            converged = True
        if not accepted and alpha < 1e-14:
            break

    final = u
    f_final = energy(model, final)
    kkt = kkt_residual(model, final, opts.tol_active)
    l2_final = float(np.sqrt(w * np.dot(final.values, final.values)))
    # a mountain-pass point is a nontrivial critical point strictly above
    # both endpoint levels; a first-order point that drifted to the trivial
    # state or below the barrier means the geometry degenerated
    converged = (kkt <= opts.tol_g and l2_final > _TRIVIAL_L2
                 and f_final > endpoint_level)

    diagnostics: dict = {
        "levels_head": [float(v) for v in levels[:5]],
        "level_final": f_final,
        "barrier_min_gap": float(barrier_min_gap),
        "endpoint_level": float(endpoint_level),
    }
    if r_h is not None:
        rng = np.random.default_rng(seed)
        sphere_vals = []
        for _ in range(sphere_samples):
            v = project_cone(Field(final.grid, rng.standard_normal(final.grid.n_nodes)))
            nrm = hs_norm(model.grad_op, v)
            if nrm == 0.0:
                continue
            sphere_vals.append(energy(model, Field(final.grid, v.values * (r_h / nrm))))
        diagnostics["sphere_radius"] = r_h
        diagnostics["sphere_inf_sampled"] = float(np.min(sphere_vals))
        diagnostics["level_above_sphere_inf"] = bool(f_final >= np.min(sphere_vals))

    l2 = float(np.sqrt(w * np.dot(final.values, final.values)))
    return SolveReport(
        solution=final, energy=f_final, kkt_residual=kkt, iterations=it,
        classification="mountain-pass" if converged else "failed",
        hs_norm=hs_norm(model.grad_op, final), l2_norm=l2,
        level=f_final, diagnostics=diagnostics,
    )
