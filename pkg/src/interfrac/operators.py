"""Discrete convolution operators on a truncated, graded half-line mesh.

The unknowns live on the crack side x <= 0 as piecewise-linear (hat) nodal
values.  Operator matrices map those nodal values (or the derivative of the
hat interpolant) to kernel convolutions collocated at grid nodes, either on
the crack side ("singular" variants, target x <= 0) or across the tip on the
interface side ("compact" variants, target x >= 0).

The kernels are never sampled at their singular point.  Each element integral
is split as

    T_a(x - t) = log|x - t| + (log a + gamma) + smooth remainder,
    S_a(x - t) = -(pi/2) sign(x - t)          + smooth remainder,

with the log and sign moments against linear shape functions evaluated in
closed form and the remainders by Gauss panels, geometrically refined
whenever the target sits inside or within one element length of the source
element.

`convolve_function` applies the same kernels to an arbitrary smooth function
without going through the hat basis; it is used for loading right-hand sides
and for verification, where interpolation error would mask quadrature error.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import specfun
from .errors import ValidationError

# quadrature controls: 12-point Gauss on regular elements, 8-point panels with
# 2:1 geometric refinement into near/contained singular points
N_GAUSS = 12
N_GAUSS_PANEL = 8
GEOM_RATIO = 0.5
N_PANELS = 44

VARIANTS = ("S_singular", "S_compact", "T_singular", "T_compact")
KINDS = ("values", "derivative")

_GAUSS = leggauss(N_GAUSS)
_GAUSS_PANEL = leggauss(N_GAUSS_PANEL)


@dataclass(frozen=True)
class Grid:
    """Graded collocation grid with 0 as a node.

    Negative-side nodes follow -l_neg ((m-i)/m)**q, so spacing shrinks like a
    power law toward the crack tip; the positive side mirrors this.  Doubling
    n_neg/n_pos nests the previous node set.
    """

    l_neg: float
    l_pos: float
    n_neg: int
    n_pos: int
    q: float
    nodes: np.ndarray

    @property
    def i_zero(self):
        return self.n_neg

    @property
    def neg_nodes(self):
        """Nodes on the crack side, -l_neg .. 0 inclusive."""
        return self.nodes[: self.n_neg + 1]

    @property
    def pos_nodes(self):
        """Nodes on the interface side, 0 .. l_pos inclusive."""
        return self.nodes[self.n_neg :]

    def scaled(self, c):
        """The same logical grid with all lengths multiplied by ``c``."""
        if c <= 0:
            raise ValidationError("grid scale factor must be positive")
        return Grid(
            l_neg=c * self.l_neg,
            l_pos=c * self.l_pos,
            n_neg=self.n_neg,
            n_pos=self.n_pos,
            q=self.q,
            nodes=c * self.nodes,
        )


def build_grid(l_neg, l_pos, n_neg, n_pos, q, min_nodes=8):
    """Build a graded grid on [-l_neg, l_pos] with 0 as a node.

    `min_nodes` guards against grids too coarse to resolve the tip; pass a
    smaller value explicitly to build toy grids.
    """
    for name, v in (("l_neg", l_neg), ("l_pos", l_pos)):
        if not np.isfinite(v) or v <= 0:
            raise ValidationError(f"{name} must be positive, got {v!r}")
    if q < 1.0:
        raise ValidationError(f"grading exponent q must be >= 1, got {q!r}")
    if n_neg < min_nodes or n_pos < min_nodes:
        raise ValidationError(
            f"fewer than {min_nodes} nodes per side (got {n_neg}, {n_pos})"
        )
    i = np.arange(n_neg + 1)
    neg = -l_neg * ((n_neg - i) / n_neg) ** q
    j = np.arange(1, n_pos + 1)
    pos = l_pos * (j / n_pos) ** q
    nodes = np.concatenate([neg, pos])
    nodes[n_neg] = 0.0
    return Grid(l_neg=l_neg, l_pos=l_pos, n_neg=n_neg, n_pos=n_pos, q=q, nodes=nodes)


def default_truncation(a, l_max):
    """Core truncation half-length: the loading tail decays like exp(x/l)
    while the kernel tail decays like 1/(a x), so take max(10 l, 20/a)."""
    if a <= 0 or l_max <= 0:
        raise ValidationError("kernel scale and loading scale must be positive")
    return max(10.0 * l_max, 20.0 / a)


# Self-balanced loadings leave a dipole far field: the jump decays only like
# |x|^(-1/2), far slower than the kernel tails.  The solver grids therefore
# extend the graded core with geometrically growing elements; the slow tail
# is smooth out there, so a handful of coarse elements carry it accurately.
FAR_FIELD_FACTOR = 2000.0
FAR_FIELD_RATIO = 1.08


def extend_grid(grid, factor=FAR_FIELD_FACTOR, ratio=FAR_FIELD_RATIO):
    """Append geometric far-field elements on both sides of a core grid.

    New nodes grow from each end by `ratio` until `factor` times the core
    half-lengths are covered.  The returned grid keeps 0 as a node and
    reports the updated node counts.
    """
    if factor < 1.0 or ratio <= 1.0:
        raise ValidationError("extension needs factor >= 1 and ratio > 1")
    if factor == 1.0:
        return grid

    def tail(start, limit):
        out = []
        r = start
        while r < limit:
            r *= ratio
            out.append(min(r, limit) if r >= limit else r)
        return np.asarray(out)

    neg_ext = tail(grid.l_neg, factor * grid.l_neg)
    pos_ext = tail(grid.l_pos, factor * grid.l_pos)
    nodes = np.concatenate([-neg_ext[::-1], grid.nodes, pos_ext])
    return Grid(
        l_neg=-nodes[0],
        l_pos=nodes[-1],
        n_neg=grid.n_neg + neg_ext.size,
        n_pos=grid.n_pos + pos_ext.size,
        q=grid.q,
        nodes=nodes,
    )


@dataclass(frozen=True)
class DiscreteOperator:
    """Dense discretization of a projected convolution operator."""

    variant: str
    a: float
    kind: str
    targets: np.ndarray
    source_nodes: np.ndarray
    matrix: np.ndarray

    def apply(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != self.matrix.shape[1]:
            raise ValidationError(
                f"operator expects {self.matrix.shape[1]} source values, "
                f"got {coeffs.shape[0]}"
            )
        return self.matrix @ coeffs


def _ln_moment_0(x, t0, t1):
    """int_{t0}^{t1} log|x - t| dt, valid also when x lies inside."""

    def f0(u):
        return np.where(u == 0.0, 0.0, u * np.log(np.abs(np.where(u == 0.0, 1.0, u))) - u)

    return f0(x - t0) - f0(x - t1)


def _ln_moment_1(x, t0, t1):
    """int_{t0}^{t1} (t - t0) log|x - t| dt."""

    def f1(u):
        u2 = u * u
        return np.where(
            u == 0.0, 0.0, 0.5 * u2 * np.log(np.abs(np.where(u == 0.0, 1.0, u))) - 0.25 * u2
        )

    # substitute u = t - x: int (u + (x - t0)) log|u| du
    j1 = f1(t1 - x) - f1(t0 - x)
    return j1 + (x - t0) * _ln_moment_0(x, t0, t1)


def _sign_moment_0(x, t0, t1):
    """int_{t0}^{t1} sign(x - t) dt; targets at an endpoint use the closure
    convention sign(0) -> limit from inside the element."""
    h = t1 - t0
    inside = np.clip(x, t0, t1)
    return (inside - t0) - (t1 - inside) + 0.0 * h


def _sign_moment_1(x, t0, t1):
    """int_{t0}^{t1} (t - t0) sign(x - t) dt."""
    h = t1 - t0
    inside = np.clip(x, t0, t1)
    y = inside - t0
    return y * y - 0.5 * h * h


def _panels_toward(lo, hi, point):
    """Panel breakpoints on [lo, hi] geometrically refined toward `point`,
    which must be one of the endpoints."""
    length = hi - lo
    rads = length * GEOM_RATIO ** np.arange(N_PANELS + 1)
    if point == lo:
        b = lo + rads[::-1]
        return np.concatenate([[lo], b])
    b = hi - rads
    return np.concatenate([b, [hi]])


def _gauss_on_panels(breaks, npts=N_GAUSS_PANEL):
    """Gauss nodes/weights on consecutive panels given by `breaks`."""
    xg, wg = leggauss(npts) if npts != N_GAUSS_PANEL else _GAUSS_PANEL
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _refined_nodes(t0, t1, x):
    """Quadrature nodes/weights on [t0, t1] refined toward the singular or
    nearest point x (x may be inside, at an endpoint, or outside)."""
    if x <= t0:
        return _gauss_on_panels(_panels_toward(t0, t1, t0))
    if x >= t1:
        return _gauss_on_panels(_panels_toward(t0, t1, t1))
    nl, wl = _gauss_on_panels(_panels_toward(t0, x, x))
    nr, wr = _gauss_on_panels(_panels_toward(x, t1, x))
    return np.concatenate([nl, nr]), np.concatenate([wl, wr])


def _remainder(kernel, a, s):
    if kernel == "T":
        return specfun.kernel_T_remainder(a, s)
    return specfun.kernel_S_remainder(a, s)


def _element_rows(kernel, a, x, t0, t1):
    """Per-target element integrals (I_const, I_lin) over [t0, t1]:

    I_const = int K_a(x - t) dt, I_lin = int K_a(x - t) (t - t0)/h dt.
    Targets farther than one element length see a smooth integrand and use
    plain Gauss on the full kernel; nearer targets combine closed-form
    log/sign moments with refined-panel quadrature of the smooth remainder.
    """
    h = t1 - t0
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    near = (x > t0 - h) & (x < t1 + h)
    far = ~near
    if np.any(far):
        xg, wg = _GAUSS
        tg = 0.5 * (t0 + t1) + 0.5 * h * xg
        wgt = 0.5 * h * wg
        kfun = specfun.kernel_T if kernel == "T" else specfun.kernel_S
        kv = kfun(a, x[far, None] - tg[None, :])
        i0[far] = kv @ wgt
        i1[far] = kv @ (wgt * (tg - t0) / h)
    if np.any(near):
        xn = x[near]
        if kernel == "T":
            c = np.log(a) + specfun.EULER_GAMMA
            j0 = _ln_moment_0(xn, t0, t1) + c * h
            j1 = _ln_moment_1(xn, t0, t1) / h + c * h / 2.0
        else:
            j0 = -specfun.S_JUMP * _sign_moment_0(xn, t0, t1)
            j1 = -specfun.S_JUMP * _sign_moment_1(xn, t0, t1) / h
        for k, idx in enumerate(np.nonzero(near)[0]):
            tg, wgt = _refined_nodes(t0, t1, x[idx])
            rem = _remainder(kernel, a, x[idx] - tg)
            i0[idx] = j0[k] + rem @ wgt
            i1[idx] = j1[k] + rem @ (wgt * (tg - t0) / h)
    return i0, i1


def assemble(variant, a, grid, kind="values"):
    """Dense matrix of a projected convolution operator on the hat basis.

    variant selects kernel and target side; kind="values" integrates the
    kernel against the hats themselves, kind="derivative" against their
    (piecewise constant) derivatives.  Sources are always the crack-side hats.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown operator variant {variant!r}; use {VARIANTS}")
    if kind not in KINDS:
        raise ValidationError(f"unknown operator kind {kind!r}; use {KINDS}")
    if a <= 0:
        raise ValidationError("kernel scale must be positive")
    kernel = variant[0]
    src = grid.neg_nodes
    targets = grid.neg_nodes if variant.endswith("singular") else grid.pos_nodes
    n_t, n_s = targets.size, src.size
    mat = np.zeros((n_t, n_s))
    for e in range(n_s - 1):
        t0, t1 = src[e], src[e + 1]
        i0, i1 = _element_rows(kernel, a, targets, t0, t1)
        if kind == "values":
            mat[:, e] += i0 - i1  # left shape (t1 - t)/h
            mat[:, e + 1] += i1  # right shape (t - t0)/h
        else:
            h = t1 - t0
            mat[:, e] += -i0 / h
            mat[:, e + 1] += i0 / h
    return DiscreteOperator(
        variant=variant, a=a, kind=kind, targets=targets, source_nodes=src, matrix=mat
    )


def jump_correction(variant, a, grid, value_at_zero=1.0):
    """Correction vector S_a(x_i) * value_at_zero on the variant's targets.

    This is the column that the tip discontinuity of a crack-supported
    function contributes through the derivative of its extension by zero.
    The x = 0 entry takes the one-sided limit from the target side.
    """
    if variant not in ("S_singular", "S_compact"):
        raise ValidationError("jump corrections exist for the S kernel variants only")
    if variant == "S_singular":
        return value_at_zero * specfun.kernel_S_limit(a, grid.neg_nodes, side=-1)
    return value_at_zero * specfun.kernel_S_limit(a, grid.pos_nodes, side=+1)


def convolve_function(kernel, a, targets, f, breakpoints):
    """int K_a(x - t) f(t) dt over the mesh `breakpoints`, per target x.

    `f` is called on arrays of quadrature nodes and must return values of the
    same shape.  Near/contained targets trigger panels geometrically refined
    into the kernel singularity; the remaining sliver of relative size
    GEOM_RATIO**N_PANELS is dropped, which the integrable singularity makes
    harmless.
    """
    if kernel not in ("S", "T"):
        raise ValidationError(f"kernel must be 'S' or 'T', got {kernel!r}")
    if a <= 0:
        raise ValidationError("kernel scale must be positive")
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.ndim != 1 or breakpoints.size < 2 or np.any(np.diff(breakpoints) <= 0):
        raise ValidationError("breakpoints must be strictly increasing")
    kfun = specfun.kernel_T if kernel == "T" else lambda aa, s: specfun.kernel_S(aa, s)
    out = np.zeros(targets.size)
    xg, wg = _GAUSS
    for e in range(breakpoints.size - 1):
        t0, t1 = breakpoints[e], breakpoints[e + 1]
        h = t1 - t0
        near = (targets > t0 - h) & (targets < t1 + h)
        far = ~near
        if np.any(far):
            tg = 0.5 * (t0 + t1) + 0.5 * h * xg
            wgt = 0.5 * h * wg
            fv = f(tg)
            kv = kfun(a, targets[far, None] - tg[None, :])
            out[far] += kv @ (wgt * fv)
        for idx in np.nonzero(near)[0]:
            tg, wgt = _refined_nodes(t0, t1, targets[idx])
            s = targets[idx] - tg
            keep = s != 0.0
            kv = kfun(a, s[keep])
            out[idx] += kv @ (wgt[keep] * f(tg[keep]))
    return out
