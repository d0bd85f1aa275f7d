"""Coupled in-plane (mode I/II) crack solver.

The Fourier-domain relation couples the two in-plane components through
2x2 matrices A(xi), B(xi), C(xi) whose entries are rational in |xi| with the
common denominator D = d0 + d1|xi| + d2|xi|^2.  D factorises over the two
positive roots xi1 <= xi2, and partial fractions reduce every inverse
transform to scalar S/T kernels at scales xi1, xi2, weighted by constant
2x2 matrices.  The crack equation collocates

    B_op d(jump)/dx + tip corrections = C_op p_avg + A_op p_jump,  x < 0,

and the interfacial traction follows from the companion identity on x > 0.
The A operator carries an extra 1/2 relative to B and C.
"""

from dataclasses import dataclass

import numpy as np

from . import operators as op
from . import specfun
from .errors import SolverError, ValidationError
from .materials import require_self_balanced
from .mode3 import SolutionProfile

ROOT_GAP_TOL = 1e-6
VIETA_TOL = 1e-12
DIRECT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class InPlaneConstants:
    """Bimaterial + interface constants entering the in-plane system."""

    h11: float
    h22: float
    beta: float
    gamma: float
    delta1: float
    delta2: float
    k11: float
    k12: float
    k22: float
    d0: float
    d1: float
    d2: float
    xi1: float
    xi2: float

    @property
    def hroot(self):
        return np.sqrt(self.h11 * self.h22)

    @property
    def k_matrix(self):
        return np.array([[self.k11, self.k12], [self.k12, self.k22]])

    def as_dict(self):
        return {
            name: getattr(self, name)
            for name in (
                "h11", "h22", "beta", "gamma", "delta1", "delta2",
                "k11", "k12", "k22", "d0", "d1", "d2", "xi1", "xi2",
            )
        }


def in_plane_constants(constants, law):
    """Combine bimaterial constants and interface law; factor the denominator.

    Validates d0, d1, d2 > 0, requires real distinct roots and checks the
    Vieta identities of the computed factorization.
    """
    constants.require_in_plane()
    K = law.in_plane_matrix()
    h11, h22, beta = constants.h11, constants.h22, constants.beta
    d0 = h11 * h22 * (1.0 - beta**2)
    d1 = K[0, 0] * h22 + K[1, 1] * h11
    d2 = K[0, 0] * K[1, 1] - K[0, 1] ** 2
    if d0 <= 0 or d1 <= 0 or d2 <= 0:
        raise ValidationError(
            f"denominator coefficients must be positive, got d0={d0}, d1={d1}, d2={d2}"
        )
    disc = d1**2 - 4.0 * d2 * d0
    if disc < 0:
        raise ValidationError(
            "negative discriminant d1^2 - 4 d2 d0: complex denominator roots "
            "are outside the supported regime"
        )
    root = np.sqrt(disc)
    xi1 = (d1 - root) / (2.0 * d2)
    xi2 = (d1 + root) / (2.0 * d2)
    if (xi2 - xi1) <= ROOT_GAP_TOL * xi2:
        raise ValidationError(
            f"denominator roots nearly coincide (xi1={xi1}, xi2={xi2}): the "
            "partial-fraction representation is ill-conditioned"
        )
    if abs(xi1 * xi2 - d0 / d2) > VIETA_TOL * (d0 / d2) or abs(
        xi1 + xi2 - d1 / d2
    ) > VIETA_TOL * (d1 / d2):
        raise SolverError("root finding violated the Vieta identities")
    return InPlaneConstants(
        h11=h11,
        h22=h22,
        beta=beta,
        gamma=constants.gamma,
        delta1=constants.delta1,
        delta2=constants.delta2,
        k11=float(K[0, 0]),
        k12=float(K[0, 1]),
        k22=float(K[1, 1]),
        d0=d0,
        d1=d1,
        d2=d2,
        xi1=xi1,
        xi2=xi2,
    )


def abc_at_xi(c, xi):
    """The three coupling matrices at frequencies `xi`, shape (n, 2, 2).

    Entries are assembled from |xi| and sign(xi); xi = 0 samples use the
    xi -> 0+ limit (the matrices jump across 0 in their imaginary parts).
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    s = np.sign(xi)
    s[xi == 0.0] = 1.0
    ax = np.abs(xi)
    h11, h22, beta, gamma = c.h11, c.h22, c.beta, c.gamma
    d1v, d2v = c.delta1, c.delta2
    K11, K12, K22 = c.k11, c.k12, c.k22
    rt = c.hroot
    D = c.d0 + c.d1 * ax + c.d2 * ax**2

    A = np.empty((xi.size, 2, 2), dtype=complex)
    A[:, 0, 0] = h11 * h22 * (d1v + beta * gamma) + ax * (
        d1v * h11 * K22 - 1j * gamma * K12 * rt * s
    )
    A[:, 0, 1] = -1j * s * h22 * rt * (gamma + beta * d2v) - ax * (
        1j * gamma * K22 * rt * s + d2v * h22 * K12
    )
    A[:, 1, 0] = 1j * s * h11 * rt * (d1v * beta + gamma) - ax * (
        d1v * h11 * K12 - 1j * gamma * K11 * rt * s
    )
    A[:, 1, 1] = h11 * h22 * (beta * gamma + d2v) + ax * (
        d2v * h22 * K11 + 1j * gamma * K12 * rt * s
    )
    A /= 2.0 * D[:, None, None]

    B = np.empty_like(A)
    B[:, 0, 0] = -1j * (xi * K22 + h22 * s)
    B[:, 0, 1] = 1j * xi * K12 - beta * rt
    B[:, 1, 0] = 1j * xi * K12 + beta * rt
    B[:, 1, 1] = -1j * (xi * K11 + h11 * s)
    B /= D[:, None, None]

    C = np.empty_like(A)
    C[:, 0, 0] = h11 * h22 * (1.0 - beta**2) + ax * (
        h11 * K22 + 1j * beta * K12 * rt * s
    )
    C[:, 0, 1] = -ax * (h22 * K12 - 1j * beta * s * K22 * rt)
    C[:, 1, 0] = -ax * (h11 * K12 + 1j * beta * s * K11 * rt)
    C[:, 1, 1] = h11 * h22 * (1.0 - beta**2) + ax * (
        h22 * K11 - 1j * beta * K12 * rt * s
    )
    C /= D[:, None, None]
    return A, B, C


@dataclass(frozen=True)
class PartialFractionSet:
    """Constant matrices of the partial-fraction kernel expansion.

    For each family F in {A, B, C} the transform is
    (F_r + F_rd xi + i (F_i + F_id xi)) / D for xi > 0, and the inverse
    transform combines T and S kernels at scales xi1, xi2 with weights
    F^(1) = F - F_dag xi1 and F^(2) = -F + F_dag xi2 over d2 (xi2 - xi1).
    """

    xi1: float
    xi2: float
    d2: float
    a_r: np.ndarray
    a_rd: np.ndarray
    a_i: np.ndarray
    a_id: np.ndarray
    b_r: np.ndarray
    b_rd: np.ndarray
    b_i: np.ndarray
    b_id: np.ndarray
    c_r: np.ndarray
    c_rd: np.ndarray
    c_i: np.ndarray
    c_id: np.ndarray

    def combo(self, base, dag, j):
        if j == 1:
            return base - dag * self.xi1
        return -base + dag * self.xi2

    def weights(self, family):
        """((T-weight at xi1, T at xi2), (S at xi1, S at xi2)) for a family."""
        base_r = getattr(self, f"{family}_r")
        dag_r = getattr(self, f"{family}_rd")
        base_i = getattr(self, f"{family}_i")
        dag_i = getattr(self, f"{family}_id")
        return (
            (self.combo(base_r, dag_r, 1), self.combo(base_r, dag_r, 2)),
            (self.combo(base_i, dag_i, 1), self.combo(base_i, dag_i, 2)),
        )

    def reconstruct(self, family, xi):
        """Rational reconstruction of a family from its partial fractions."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        ax = np.abs(xi)[:, None, None]
        sg = np.sign(xi)[:, None, None]
        den = self.d2 * (self.xi2 - self.xi1)
        (tr1, tr2), (si1, si2) = self.weights(family)
        re = (tr1[None] / (ax + self.xi1) + tr2[None] / (ax + self.xi2)) / den
        im = (si1[None] / (ax + self.xi1) + si2[None] / (ax + self.xi2)) / den
        out = re + 1j * sg * im
        if family == "a":
            out = out / 2.0
        return out


def invert_abc(c):
    """Partial-fraction matrices of A, B, C from the element tables."""
    h11, h22, beta, gamma = c.h11, c.h22, c.beta, c.gamma
    d1v, d2v = c.delta1, c.delta2
    K11, K12, K22 = c.k11, c.k12, c.k22
    rt = c.hroot
    return PartialFractionSet(
        xi1=c.xi1,
        xi2=c.xi2,
        d2=c.d2,
        a_r=h11 * h22 * np.array([[d1v + beta * gamma, 0.0], [0.0, d2v + beta * gamma]]),
        a_rd=np.array(
            [
                [d1v * h11 * K22, -d2v * h22 * K12],
                [-d1v * h11 * K12, d2v * h22 * K11],
            ]
        ),
        a_i=rt
        * np.array(
            [
                [0.0, -h22 * (d2v * beta + gamma)],
                [h11 * (d1v * beta + gamma), 0.0],
            ]
        ),
        a_id=gamma * rt * np.array([[-K12, -K22], [K11, K12]]),
        b_r=beta * rt * np.array([[0.0, -1.0], [1.0, 0.0]]),
        b_rd=np.zeros((2, 2)),
        b_i=np.array([[-h22, 0.0], [0.0, -h11]]),
        b_id=np.array([[-K22, K12], [K12, -K11]]),
        c_r=h11 * h22 * (1.0 - beta**2) * np.eye(2),
        c_rd=np.array([[h11 * K22, -h22 * K12], [-h11 * K12, h22 * K11]]),
        c_i=np.zeros((2, 2)),
        c_id=beta * rt * np.array([[K12, K22], [-K11, -K12]]),
    )


def default_grid(ipc, loading, n=400, q=3.0,
                 far_factor=op.FAR_FIELD_FACTOR, far_ratio=op.FAR_FIELD_RATIO):
    """Graded core resolving the slowest kernel scale, plus geometric far field."""
    half = op.default_truncation(ipc.xi1, loading.max_scale)
    core = op.build_grid(half, half, n, n, q)
    return op.extend_grid(core, factor=far_factor, ratio=far_ratio)


def _convolve_vector(kernel, a, targets, fun, breakpoints):
    """Apply a scalar kernel to each component of a 2-vector function."""
    cols = [
        op.convolve_function(kernel, a, targets, lambda t, k=k: fun(t)[:, k], breakpoints)
        for k in (0, 1)
    ]
    return np.stack(cols, axis=-1)


def _family_apply(pf, family, conv_t, conv_s, extra_half):
    """-(1/(pi d2 (xi2-xi1))) * sum_j [F_R^(j) T_j + F_I^(j) S_j] given the
    per-root scalar convolutions of a 2-vector field."""
    (tr1, tr2), (si1, si2) = pf.weights(family)
    den = np.pi * pf.d2 * (pf.xi2 - pf.xi1)
    out = -(
        np.einsum("ab,nb->na", tr1, conv_t[0])
        + np.einsum("ab,nb->na", tr2, conv_t[1])
        + np.einsum("ab,nb->na", si1, conv_s[0])
        + np.einsum("ab,nb->na", si2, conv_s[1])
    ) / den
    if extra_half:
        out = out / 2.0
    return out


def _loading_side(ipc, pf, loading, targets, grid):
    """C_op p_avg + A_op p_jump at the given targets."""
    bp = grid.neg_nodes
    p_a = loading.average
    p_j = loading.jump
    conv_t_a = [
        _convolve_vector("T", x, targets, p_a, bp) for x in (ipc.xi1, ipc.xi2)
    ]
    conv_s_a = [
        _convolve_vector("S", x, targets, p_a, bp) for x in (ipc.xi1, ipc.xi2)
    ]
    out = _family_apply(pf, "c", conv_t_a, conv_s_a, extra_half=False)
    if np.any(loading.jump(bp) != 0.0):
        conv_t_j = [
            _convolve_vector("T", x, targets, p_j, bp) for x in (ipc.xi1, ipc.xi2)
        ]
        conv_s_j = [
            _convolve_vector("S", x, targets, p_j, bp) for x in (ipc.xi1, ipc.xi2)
        ]
        out = out + _family_apply(pf, "a", conv_t_j, conv_s_j, extra_half=True)
    return out


def _b_operator_blocks(ipc, pf, grid, side):
    """Matrix blocks of B_op acting on d(jump)/dx plus the tip-correction
    columns, returned as (n_t, n_s, 2, 2) with sources = crack nodes[1:]."""
    variant = "singular" if side == "crack" else "compact"
    td = [
        op.assemble(f"T_{variant}", x, grid, kind="derivative").matrix[:, 1:]
        for x in (ipc.xi1, ipc.xi2)
    ]
    sd = [
        op.assemble(f"S_{variant}", x, grid, kind="derivative").matrix[:, 1:]
        for x in (ipc.xi1, ipc.xi2)
    ]
    if side == "crack":
        td = [m[1:] for m in td]
        sd = [m[1:] for m in sd]
        targets = grid.neg_nodes[1:]
        s_side = -1
    else:
        targets = grid.pos_nodes
        s_side = +1
    (tr1, tr2), (si1, si2) = pf.weights("b")
    den = np.pi * pf.d2 * (pf.xi2 - pf.xi1)
    n_t, n_s = td[0].shape
    blocks = -(
        np.einsum("ab,ns->nsab", tr1, td[0])
        + np.einsum("ab,ns->nsab", tr2, td[1])
        + np.einsum("ab,ns->nsab", si1, sd[0])
        + np.einsum("ab,ns->nsab", si2, sd[1])
    ) / den

    # tip corrections: the log parts of the two T kernels cancel exactly
    # (the B family has no |xi| term in its real part), leaving a finite
    # difference kernel; the S parts keep their one-sided tip limits
    t_diff = specfun.kernel_T_diff(ipc.xi1, ipc.xi2, targets)
    s_1 = specfun.kernel_S_limit(ipc.xi1, targets, side=s_side)
    s_2 = specfun.kernel_S_limit(ipc.xi2, targets, side=s_side)
    corr = (
        np.einsum("ab,n->nab", pf.b_r, t_diff)
        + np.einsum("ab,n->nab", si1, s_1)
        + np.einsum("ab,n->nab", si2, s_2)
    ) / den
    blocks[:, -1, :, :] += corr
    return blocks, targets


def _flatten_blocks(blocks):
    """(n_t, n_s, 2, 2) -> (2 n_t, 2 n_s) with component-major ordering."""
    n_t, n_s = blocks.shape[:2]
    return blocks.transpose(2, 0, 3, 1).reshape(2 * n_t, 2 * n_s)


@dataclass(frozen=True)
class Mode12Problem:
    """Immutable in-plane problem description."""

    constants: InPlaneConstants
    loading: object
    grid: op.Grid

    def __post_init__(self):
        if self.loading.ncomp != 2:
            raise ValidationError("in-plane problems take a 2-component loading")
        require_self_balanced(self.loading)


def solve_mode12(constants, law, loading, grid=None):
    """Solve the in-plane crack equation and evaluate interfacial tractions.

    `constants` may be a BimaterialConstants (combined here with `law`) or a
    ready InPlaneConstants (law ignored).  Returns a 2-component profile:
    jump rows on the crack, K-weighted traction rows on the interface.
    """
    ipc = constants if isinstance(constants, InPlaneConstants) else in_plane_constants(
        constants, law
    )
    if grid is None:
        grid = default_grid(ipc, loading)
    problem = Mode12Problem(constants=ipc, loading=loading, grid=grid)
    pf = invert_abc(ipc)

    blocks, targets = _b_operator_blocks(ipc, pf, grid, side="crack")
    lhs = _flatten_blocks(blocks)
    rhs = _loading_side(ipc, pf, loading, targets, grid)
    rhs_flat = rhs.T.ravel()
    try:
        u_flat = np.linalg.solve(lhs, rhs_flat)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular in-plane system: {exc}") from exc
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > DIRECT_COND_LIMIT:
        raise SolverError(f"in-plane system ill-conditioned: cond = {cond:.3e}")
    m = targets.size
    u = u_flat.reshape(2, m).T
    jump_full = np.vstack([[0.0, 0.0], u])

    traction = evaluate_traction(problem, jump_full)
    K = ipc.k_matrix
    jump_pos = traction @ K.T

    lin_res = float(
        np.max(np.abs(lhs @ u_flat - rhs_flat)) / max(np.max(np.abs(rhs_flat)), 1e-300)
    )
    tip_u = jump_full[-1]
    tip_gap = float(
        np.max(np.abs(tip_u - jump_pos[0])) / max(np.max(np.abs(tip_u)), 1e-300)
    )

    jump = np.vstack([jump_full, jump_pos[1:]])
    trac_col = np.vstack([loading.average(grid.neg_nodes[:-1]), traction])
    region = np.where(grid.nodes < 0.0, "crack", "interface")
    region[grid.i_zero] = "crack"
    meta = {
        "mode": "i-ii",
        "in_plane": ipc.as_dict(),
        "grid": {
            "l_neg": grid.l_neg,
            "l_pos": grid.l_pos,
            "n_neg": grid.n_neg,
            "n_pos": grid.n_pos,
            "q": grid.q,
        },
        "linear_residual": lin_res,
        "tip_consistency": tip_gap,
        "condition_number": float(cond),
    }
    return SolutionProfile(
        x1=grid.nodes, jump=jump, traction=trac_col, region=region, meta=meta
    )


def evaluate_traction(problem, jump_full):
    """Interfacial traction on x >= 0 from crack-side nodal jump values."""
    grid = problem.grid
    jump_full = np.asarray(jump_full, dtype=float)
    if jump_full.shape != (grid.neg_nodes.size, 2):
        raise ValidationError(
            f"jump array must be ({grid.neg_nodes.size}, 2) on the crack nodes"
        )
    ipc = problem.constants
    pf = invert_abc(ipc)
    blocks, targets = _b_operator_blocks(ipc, pf, grid, side="interface")
    u_flat = jump_full[1:].T.ravel()
    unknown_part = (_flatten_blocks(blocks) @ u_flat).reshape(2, targets.size).T
    return unknown_part - _loading_side(ipc, pf, problem.loading, targets, grid)


def normalize(profile, F, l):
    """Attach normalized in-plane fields jump/F and traction l/F.

    The out-of-plane compliance normalization has no analogue for in-plane
    materials given by engineering constants, so amplitudes scale by F only.
    """
    if F <= 0 or l <= 0:
        raise ValidationError("normalization needs F > 0 and l > 0")
    meta = dict(profile.meta)
    meta.update(F=F, l=l, jump_scale=F, traction_scale=l / F)
    return SolutionProfile(
        x1=profile.x1,
        jump=profile.jump,
        traction=profile.traction,
        region=profile.region,
        meta=meta,
        jump_star=profile.jump / F,
        traction_star=profile.traction * l / F,
    )
