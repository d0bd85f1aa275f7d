"""Out-of-plane (mode III) crack solver.

Given the out-of-plane bimaterial constant h33, the interface compliance
kappa and a self-balanced crack-face loading, solve for the displacement
jump on the crack (x < 0) and the interfacial traction (x > 0).  The kernel
scale is a = h33/kappa.

Four algebraically equivalent formulations are implemented; they differ in
which kernel acts on the unknown and which on the loading:

    formulation   unknown side            loading side
    coupled-st    S on d(jump)/dx + tip   T on p
    mixed         T on jump (2nd kind)    S on p' + identity terms
    t-only        T on jump (2nd kind)    T on p
    s-only        S on d(jump)/dx + tip   S on p' + identity terms

The default is t-only: second kind, bounded log kernel, no tip-correction
unknown.  Cross-formulation agreement is a discretization check, not an
algebraic one.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import operators as op
from . import specfun
from .errors import ConvergenceError, SolverError, ValidationError
from .materials import require_self_balanced

FORMULATIONS = ("coupled-st", "mixed", "t-only", "s-only")

# kappa below roughly 1e-3 * l * sqrt(s44 s55) makes the kernel scale
# degenerate; in terms of problem data that is a*l exceeding this bound
MAX_SCALE_TIMES_LENGTH = 2000.0

_T_LHS = ("mixed", "t-only")
_T_RHS = ("coupled-st", "t-only")

DIRECT_COND_LIMIT = 1e12
FIXED_POINT_RELAX = 0.5
FIXED_POINT_TOL = 1e-8
FIXED_POINT_MAXITER = 500


@dataclass(frozen=True)
class Mode3Problem:
    """Immutable mode III problem description."""

    constants: object  # BimaterialConstants with the out-of-plane group
    kappa: float
    loading: object
    grid: op.Grid
    formulation: str = "t-only"

    def __post_init__(self):
        self.constants.require_out_of_plane()
        if not np.isfinite(self.kappa) or self.kappa <= 0.0:
            raise ValidationError(f"kappa must be positive, got {self.kappa!r}")
        if self.formulation not in FORMULATIONS:
            raise ValidationError(
                f"unknown formulation {self.formulation!r}; use one of {FORMULATIONS}"
            )
        if self.loading.ncomp != 1:
            raise ValidationError("mode III takes a scalar (1-component) loading")
        require_self_balanced(self.loading)
        if self.scale * self.loading.max_scale > MAX_SCALE_TIMES_LENGTH:
            raise ValidationError(
                "kappa is too small relative to h33 and the loading length "
                "scale (normalized kappa below ~1e-3): this is effectively a "
                "perfect interface, outside this solver's regime; see the "
                "perfect-interface fracture literature for that limit"
            )

    @property
    def scale(self):
        """Kernel scale h33 / kappa."""
        return self.constants.h33 / self.kappa


@dataclass(frozen=True)
class SolutionProfile:
    """Discrete solution along the crack/interface line.

    jump is the displacement jump: the solved crack opening for x1 <= 0 and
    kappa * traction (transmission) for x1 > 0.  traction holds the applied
    average traction on the crack rows and the solved interfacial traction
    for x1 >= 0 (the x1 = 0 row carries the tip limit from the interface
    side).  Arrays are (n,) for mode III and (n, 2) for in-plane solutions.
    Starred fields are filled by `normalize`.
    """

    x1: np.ndarray
    jump: np.ndarray
    traction: np.ndarray
    region: np.ndarray
    meta: dict = field(default_factory=dict)
    jump_star: Optional[np.ndarray] = None
    traction_star: Optional[np.ndarray] = None

    @property
    def ncomp(self):
        return 1 if self.jump.ndim == 1 else self.jump.shape[1]

    def crack_mask(self):
        return self.x1 <= 0.0

    def interface_mask(self):
        return self.x1 >= 0.0


def default_grid(constants, kappa, loading, n=400, q=3.0,
                 far_factor=op.FAR_FIELD_FACTOR, far_ratio=op.FAR_FIELD_RATIO):
    """Graded core grid for the mode III scales plus geometric far field.

    The core half-length follows the kernel/loading rule; the far extension
    carries the slow |x|^(-1/2) tail left by self-balanced loadings.
    """
    constants.require_out_of_plane()
    a = constants.h33 / kappa
    half = op.default_truncation(a, loading.max_scale)
    core = op.build_grid(half, half, n, n, q)
    return op.extend_grid(core, factor=far_factor, ratio=far_ratio)


def _scalar(fun):
    """Adapt a loading face method returning (n, 1) to a scalar-valued callable."""
    return lambda x: fun(np.atleast_1d(x))[:, 0]


def _crack_matrices(problem):
    """LHS matrix on the unknown crack nodes (truncation end excluded)."""
    a = problem.scale
    kappa = problem.kappa
    grid = problem.grid
    if problem.formulation in _T_LHS:
        T_s = op.assemble("T_singular", a, grid, kind="values").matrix[1:, 1:]
        m = T_s.shape[0]
        return -(a / (np.pi * kappa)) * T_s - np.eye(m) / kappa
    SD_s = op.assemble("S_singular", a, grid, kind="derivative").matrix[1:, 1:]
    lhs = SD_s / (np.pi * kappa)
    s0 = op.jump_correction("S_singular", a, grid)[1:]
    lhs[:, -1] -= s0 / (np.pi * kappa)  # tip value is the last unknown
    return lhs


def _loading_terms(problem, side):
    """Loading-side combination of the chosen formulation at the side's
    collocation nodes; `side` is "crack" or "interface".

    Returns the right-hand side of the crack equation for side="crack", and
    the loading contribution (with its equation sign) to the traction for
    side="interface".
    """
    a = problem.scale
    delta = problem.constants.delta3
    grid = problem.grid
    load = problem.loading
    if side == "crack":
        x = grid.neg_nodes[1:]
        kernel_sgn = -1.0
        s_vec = op.jump_correction("S_singular", a, grid)[1:]
    else:
        x = grid.pos_nodes
        kernel_sgn = +1.0
        s_vec = op.jump_correction("S_compact", a, grid)

    p_a = _scalar(load.average)
    p_j = _scalar(load.jump)
    has_jump = bool(np.any(load.jump(grid.neg_nodes) != 0.0))

    if problem.formulation in _T_RHS:
        out = kernel_sgn * (a / np.pi) * op.convolve_function(
            "T", a, x, p_a, grid.neg_nodes
        )
        if delta != 0.0 and has_jump:
            out += kernel_sgn * (delta * a / (2.0 * np.pi)) * op.convolve_function(
                "T", a, x, p_j, grid.neg_nodes
            )
        return out

    dp_a = _scalar(load.average_deriv)
    dp_j = _scalar(load.jump_deriv)
    p_a0 = load.average(np.array([0.0]))[0, 0]
    p_j0 = load.jump(np.array([0.0]))[0, 0]
    out = -kernel_sgn * (
        op.convolve_function("S", a, x, dp_a, grid.neg_nodes) - p_a0 * s_vec
    ) / np.pi
    out += p_a(x) if side == "crack" else 0.0
    if delta != 0.0 and has_jump:
        out -= kernel_sgn * (delta / (2.0 * np.pi)) * (
            op.convolve_function("S", a, x, dp_j, grid.neg_nodes) - p_j0 * s_vec
        )
        if side == "crack":
            out += (delta / 2.0) * p_j(x)
    return out


def _crack_rhs(problem):
    return _loading_terms(problem, "crack")


def solve_mode3(problem, method="direct", relaxation=FIXED_POINT_RELAX,
                fp_tol=FIXED_POINT_TOL, fp_max_iter=FIXED_POINT_MAXITER):
    """Solve the crack equation and evaluate the interfacial traction.

    method="direct" uses a dense solve; method="fixed-point" runs the
    relaxed iteration available for the second-kind (T on unknown)
    formulations.  The iteration's contraction rate degrades with the
    truncation length (low-frequency modes), so long far-field extensions
    may need a larger fp_max_iter.
    """
    lhs = _crack_matrices(problem)
    rhs = _crack_rhs(problem)
    iterations = 0
    if method == "direct":
        try:
            u = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular discrete system: {exc}") from exc
        cond = np.linalg.cond(lhs)
        if not np.isfinite(cond) or cond > DIRECT_COND_LIMIT:
            raise SolverError(
                f"discrete system ill-conditioned: cond = {cond:.3e}"
            )
    elif method == "fixed-point":
        if problem.formulation not in _T_LHS:
            raise ValidationError(
                "fixed-point iteration applies to the second-kind "
                "formulations only (mixed, t-only)"
            )
        a = problem.scale
        kappa = problem.kappa
        T_s = -(lhs + np.eye(lhs.shape[0]) / kappa) * (np.pi * kappa) / a
        u = np.zeros_like(rhs)
        trace = []
        for iterations in range(1, fp_max_iter + 1):
            new = -kappa * rhs - (a / np.pi) * (T_s @ u)
            u_next = (1.0 - relaxation) * u + relaxation * new
            change = np.max(np.abs(u_next - u)) / max(np.max(np.abs(u_next)), 1e-300)
            trace.append(change)
            u = u_next
            if change <= fp_tol:
                break
        else:
            raise ConvergenceError(
                f"fixed-point iteration did not reach {fp_tol} in "
                f"{fp_max_iter} iterations",
                trace=trace,
            )
    else:
        raise ValidationError(f"unknown solve method {method!r}")

    jump_full = np.concatenate([[0.0], u])
    traction = evaluate_traction(problem, jump_full)
    lin_res = float(np.max(np.abs(lhs @ u - rhs)) / max(np.max(np.abs(rhs)), 1e-300))

    grid = problem.grid
    tip_u = jump_full[-1]
    tip_t = traction[0]
    tip_gap = abs(tip_u - problem.kappa * tip_t) / max(abs(tip_u), 1e-300)
    jump = np.concatenate([jump_full, problem.kappa * traction[1:]])
    trac_col = np.concatenate(
        [_scalar(problem.loading.average)(grid.neg_nodes[:-1]), traction]
    )
    region = np.where(grid.nodes < 0.0, "crack", "interface")
    region[grid.i_zero] = "crack"
    meta = {
        "mode": "iii",
        "formulation": problem.formulation,
        "method": method,
        "kappa": problem.kappa,
        "h33": problem.constants.h33,
        "delta3": problem.constants.delta3,
        "kernel_scale": problem.scale,
        "grid": {
            "l_neg": grid.l_neg,
            "l_pos": grid.l_pos,
            "n_neg": grid.n_neg,
            "n_pos": grid.n_pos,
            "q": grid.q,
        },
        "linear_residual": lin_res,
        "tip_consistency": tip_gap,
        "iterations": iterations,
    }
    return SolutionProfile(
        x1=grid.nodes, jump=jump, traction=trac_col, region=region, meta=meta
    )


def evaluate_traction(problem, jump_full):
    """Interfacial traction on x >= 0 from a crack-side nodal jump vector.

    `jump_full` holds values at every crack node including the truncation
    end; the companion identity of the problem's formulation is used.
    """
    grid = problem.grid
    jump_full = np.asarray(jump_full, dtype=float)
    if jump_full.shape != grid.neg_nodes.shape:
        raise ValidationError(
            f"jump vector must match the {grid.neg_nodes.size} crack nodes"
        )
    a = problem.scale
    kappa = problem.kappa
    if problem.formulation in _T_LHS:
        T_c = op.assemble("T_compact", a, grid, kind="values").matrix
        unknown_part = -(a / (np.pi * kappa)) * (T_c @ jump_full)
    else:
        SD_c = op.assemble("S_compact", a, grid, kind="derivative").matrix
        s0 = op.jump_correction("S_compact", a, grid)
        unknown_part = (SD_c @ jump_full - jump_full[-1] * s0) / (np.pi * kappa)
    return unknown_part + _loading_terms(problem, "interface")


def normalize(profile, F, l, mat_one):
    """Attach normalized fields: jump/(F sqrt(s44 s55)_I) and traction l/F.

    Records F, l, kappa_star in the metadata; the defining material is the
    upper half-plane one.
    """
    if F <= 0 or l <= 0:
        raise ValidationError("normalization needs F > 0 and l > 0")
    s_root = mat_one.out_of_plane_root()
    kappa = profile.meta.get("kappa")
    meta = dict(profile.meta)
    meta.update(F=F, l=l, s_root_one=s_root)
    if kappa is not None:
        meta["kappa_star"] = kappa / (l * s_root)
    return SolutionProfile(
        x1=profile.x1,
        jump=profile.jump,
        traction=profile.traction,
        region=profile.region,
        meta=meta,
        jump_star=profile.jump / (F * s_root),
        traction_star=profile.traction * l / F,
    )


def residual_in_formulation(problem, jump_full, formulation):
    """Max-norm relative residual of a nodal jump in another formulation's
    crack equation (a discretization-consistency diagnostic)."""
    alt = Mode3Problem(
        constants=problem.constants,
        kappa=problem.kappa,
        loading=problem.loading,
        grid=problem.grid,
        formulation=formulation,
    )
    lhs = _crack_matrices(alt)
    rhs = _crack_rhs(alt)
    jump_full = np.asarray(jump_full, dtype=float)
    r = lhs @ jump_full[1:] - rhs
    return float(np.max(np.abs(r)) / max(np.max(np.abs(rhs)), 1e-300))
