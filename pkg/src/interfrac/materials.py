"""Material description, interface law, crack-face loadings, derived constants.

Conventions: material I occupies the upper half-plane, material II the lower
one.  Compliances use contracted (Voigt) indexing; the in-plane block is
(s11, s12, s22, s66) and the out-of-plane shear block is (s44, s55).  Either
block may be absent: the named shear-modulus materials carry no in-plane data
and the incompressible in-plane parameterization carries no out-of-plane data.
Derived bimaterial constants are computed per block, and asking for a block
that either material lacks is an error rather than a silent default.

All types are frozen dataclasses; every operation is a pure function.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError

# default relative tolerances for the self-balance check
BALANCE_TOL_PARAMETRIC = 1e-10
BALANCE_TOL_TABULATED = 1e-6


def _require_positive(name, value):
    if value is None or not np.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class OrthotropicCompliance:
    """Compliance entries of one orthotropic half-plane.

    s44 = 1/mu23 and s55 = 1/mu13 drive the out-of-plane (mode III) problem;
    s11, s12, s22, s66 drive the in-plane (mode I/II) problem.  Missing blocks
    are allowed and stay None.
    """

    s44: Optional[float] = None
    s55: Optional[float] = None
    s11: Optional[float] = None
    s12: Optional[float] = None
    s22: Optional[float] = None
    s66: Optional[float] = None

    def __post_init__(self):
        oop = (self.s44, self.s55)
        inp = (self.s11, self.s12, self.s22, self.s66)
        if all(v is None for v in oop) and all(v is None for v in inp):
            raise ValidationError("compliance needs at least one complete block")
        if any(v is None for v in oop) and not all(v is None for v in oop):
            raise ValidationError("out-of-plane block requires both s44 and s55")
        if any(v is None for v in inp) and not all(v is None for v in inp):
            raise ValidationError("in-plane block requires s11, s12, s22 and s66")
        if self.has_out_of_plane:
            _require_positive("s44", self.s44)
            _require_positive("s55", self.s55)
        if self.has_in_plane:
            _require_positive("s11", self.s11)
            _require_positive("s22", self.s22)
            _require_positive("s66", self.s66)
            if not np.isfinite(self.s12):
                raise ValidationError("s12 must be finite")
            if self.s11 * self.s22 - self.s12**2 <= 0.0:
                raise ValidationError(
                    "in-plane block not positive definite: s11*s22 - s12^2 <= 0"
                )

    @property
    def has_out_of_plane(self):
        return self.s44 is not None

    @property
    def has_in_plane(self):
        return self.s11 is not None

    def out_of_plane_root(self):
        """sqrt(s44*s55), the single out-of-plane material parameter."""
        if not self.has_out_of_plane:
            raise ValidationError("material has no out-of-plane compliances")
        return math.sqrt(self.s44 * self.s55)


@dataclass(frozen=True)
class IncompressibleOrthotropicParams:
    """Engineering constants of an incompressible orthotropic material."""

    e1: float
    e2: float
    e3: float
    mu12: float

    def __post_init__(self):
        for name in ("e1", "e2", "e3", "mu12"):
            _require_positive(name, getattr(self, name))


@dataclass(frozen=True)
class InterfaceLaw:
    """Imperfection matrix of the soft interface.

    kappa is the out-of-plane entry; (k11, k12, k22) form the symmetric
    in-plane block.  Either part may be omitted when the corresponding mode
    is not solved.
    """

    kappa: Optional[float] = None
    k11: Optional[float] = None
    k12: Optional[float] = None
    k22: Optional[float] = None

    def __post_init__(self):
        if self.kappa is None and self.k11 is None:
            raise ValidationError("interface law needs kappa and/or the in-plane block")
        if self.kappa is not None:
            _require_positive("kappa", self.kappa)
        inp = (self.k11, self.k12, self.k22)
        if any(v is not None for v in inp):
            if any(v is None for v in inp):
                raise ValidationError("in-plane interface block requires k11, k12, k22")
            _require_positive("k11", self.k11)
            _require_positive("k22", self.k22)
            if not np.isfinite(self.k12):
                raise ValidationError("k12 must be finite")
            if self.k11 * self.k22 - self.k12**2 <= 0.0:
                raise ValidationError(
                    "in-plane interface block not positive definite: "
                    "k11*k22 - k12^2 <= 0"
                )

    @property
    def has_mode3(self):
        return self.kappa is not None

    @property
    def has_in_plane(self):
        return self.k11 is not None

    def require_mode3(self):
        if not self.has_mode3:
            raise ValidationError("interface law has no kappa (mode III) entry")
        return self.kappa

    def in_plane_matrix(self):
        if not self.has_in_plane:
            raise ValidationError("interface law has no in-plane block")
        return np.array([[self.k11, self.k12], [self.k12, self.k22]])


@dataclass(frozen=True)
class BimaterialConstants:
    """Derived constants of a material pair.

    The out-of-plane group is (h33, delta3); the in-plane group is
    (h11, h22, beta, gamma, delta1, delta2) together with the per-material
    intermediates lambda, n, rho.  Groups the pair cannot support stay None.
    """

    h33: Optional[float] = None
    delta3: Optional[float] = None
    h11: Optional[float] = None
    h22: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    delta1: Optional[float] = None
    delta2: Optional[float] = None
    lambdaI: Optional[float] = None
    lambdaII: Optional[float] = None
    nI: Optional[float] = None
    nII: Optional[float] = None
    rhoI: Optional[float] = None
    rhoII: Optional[float] = None

    @property
    def has_out_of_plane(self):
        return self.h33 is not None

    @property
    def has_in_plane(self):
        return self.h11 is not None

    def require_out_of_plane(self):
        if not self.has_out_of_plane:
            raise ValidationError(
                "bimaterial pair lacks out-of-plane constants (s44/s55 missing)"
            )

    def require_in_plane(self):
        if not self.has_in_plane:
            raise ValidationError(
                "bimaterial pair lacks in-plane constants (s11..s66 missing)"
            )


def compliance_from_shear_moduli(mu23, mu13, in_plane=None):
    """Build a compliance from the two out-of-plane shear moduli.

    `in_plane`, when given, must be an OrthotropicCompliance whose in-plane
    block is copied over; otherwise the material is usable for mode III only.
    """
    _require_positive("mu23", mu23)
    _require_positive("mu13", mu13)
    kw = {}
    if in_plane is not None:
        if not in_plane.has_in_plane:
            raise ValidationError("in_plane argument carries no in-plane block")
        kw = dict(s11=in_plane.s11, s12=in_plane.s12, s22=in_plane.s22, s66=in_plane.s66)
    return OrthotropicCompliance(s44=1.0 / mu23, s55=1.0 / mu13, **kw)


def compliance_from_incompressible(p):
    """In-plane compliances of an incompressible orthotropic material.

    s11 = 1/e1, s22 = 1/e2, s66 = 1/mu12 and
    s12 = (1/e3 - 1/e1 - 1/e2)/2.
    """
    s11 = 1.0 / p.e1
    s22 = 1.0 / p.e2
    s66 = 1.0 / p.mu12
    s12 = 0.5 * (1.0 / p.e3 - 1.0 / p.e1 - 1.0 / p.e2)
    if s11 * s22 - s12**2 <= 0.0:
        raise ValidationError(
            "incompressible parameters give an indefinite in-plane block"
        )
    return OrthotropicCompliance(s11=s11, s12=s12, s22=s22, s66=s66)


def _in_plane_terms(mat):
    """Per-material in-plane intermediates (lam, n, rho, root, h11c, h22c, w)."""
    lam = mat.s11 / mat.s22
    root = math.sqrt(mat.s11 * mat.s22)
    rho = (2.0 * mat.s12 + mat.s66) / (2.0 * root)
    if rho <= -1.0:
        raise ValidationError(f"in-plane block gives rho = {rho} <= -1")
    n = math.sqrt((1.0 + rho) / 2.0)
    h11c = 2.0 * n * lam**0.25 * root
    h22c = 2.0 * n * lam**-0.25 * root
    w = mat.s12 + root
    return lam, n, rho, h11c, h22c, w


def bimaterial_constants(mat_one, mat_two):
    """All derived constants of the (upper, lower) material pair.

    Signed constants follow the convention "material I minus material II over
    the sum"; swapping the materials negates delta1, delta2, delta3 and beta
    and leaves h11, h22, h33, gamma unchanged.
    """
    out = {}
    if mat_one.has_out_of_plane and mat_two.has_out_of_plane:
        r1 = mat_one.out_of_plane_root()
        r2 = mat_two.out_of_plane_root()
        h33 = r1 + r2
        out.update(h33=h33, delta3=(r1 - r2) / h33)
    if mat_one.has_in_plane and mat_two.has_in_plane:
        lam1, n1, rho1, h11c1, h22c1, w1 = _in_plane_terms(mat_one)
        lam2, n2, rho2, h11c2, h22c2, w2 = _in_plane_terms(mat_two)
        h11 = h11c1 + h11c2
        h22 = h22c1 + h22c2
        root = math.sqrt(h11 * h22)
        beta = (w2 - w1) / root
        if abs(beta) >= 1.0:
            raise ValidationError(
                f"|beta| = {abs(beta)} >= 1: pair inadmissible for the "
                "in-plane solver (denominator constant d0 would not be positive)"
            )
        out.update(
            h11=h11,
            h22=h22,
            beta=beta,
            gamma=(w1 + w2) / root,
            delta1=(h11c1 - h11c2) / h11,
            delta2=(h22c1 - h22c2) / h22,
            lambdaI=lam1,
            lambdaII=lam2,
            nI=n1,
            nII=n2,
            rhoI=rho1,
            rhoII=rho2,
        )
    if not out:
        raise ValidationError(
            "material pair shares no complete compliance block; "
            "cannot derive any bimaterial constants"
        )
    return BimaterialConstants(**out)


@dataclass(frozen=True)
class LoadTerm:
    """One parametric crack-face traction term c (x/l)^n exp(x/l) on x <= 0.

    `c` is a tuple of amplitudes: length 1 for scalar (mode III) loadings,
    length 2 for in-plane vector loadings.
    """

    face: str
    c: tuple
    l: float
    n: int

    def __post_init__(self):
        if self.face not in ("upper", "lower"):
            raise ValidationError(f"face must be 'upper' or 'lower', got {self.face!r}")
        _require_positive("l", self.l)
        if not isinstance(self.n, int) or self.n < 0:
            raise ValidationError(f"power n must be a nonnegative integer, got {self.n!r}")
        c = tuple(float(v) for v in np.atleast_1d(self.c))
        if len(c) not in (1, 2) or not all(np.isfinite(c)):
            raise ValidationError("amplitude c must be 1 or 2 finite numbers")
        object.__setattr__(self, "c", c)

    def values(self, x):
        """Term values at x, shape (len(x), ncomp); zero for x > 0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = x / self.l
        base = np.where(x <= 0.0, y**self.n * np.exp(y), 0.0)
        return base[:, None] * np.asarray(self.c)

    def derivs(self, x):
        """d/dx of the term at x (one-sided value at x = 0), zero for x > 0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = x / self.l
        if self.n == 0:
            poly = np.ones_like(y)
        else:
            poly = self.n * y ** (self.n - 1) + y**self.n
        base = np.where(x <= 0.0, poly * np.exp(y) / self.l, 0.0)
        return base[:, None] * np.asarray(self.c)

    def fourier(self, xi):
        """Fourier transform int_{-inf}^0 term * exp(i xi x) dx, per component."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        base = (-1.0) ** self.n * math.factorial(self.n) * self.l
        base = base / (1.0 + 1j * self.l * xi) ** (self.n + 1)
        return base[:, None] * np.asarray(self.c)

    def integral(self):
        """int_{-inf}^0 of the term, per component (analytic)."""
        return np.asarray(self.c) * (-1.0) ** self.n * math.factorial(self.n) * self.l


@dataclass(frozen=True)
class Loading:
    """Self-describing crack-face loading made of parametric terms."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("loading needs at least one term")
        ncomp = len(terms[0].c)
        if any(len(t.c) != ncomp for t in terms):
            raise ValidationError("all loading terms must share the component count")
        object.__setattr__(self, "terms", terms)

    @property
    def ncomp(self):
        return len(self.terms[0].c)

    @property
    def max_scale(self):
        """Largest length scale among the terms (used for grid truncation)."""
        return max(t.l for t in self.terms)

    def _face_sum(self, x, face, deriv=False):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((x.size, self.ncomp))
        for t in self.terms:
            if t.face == face:
                out += t.derivs(x) if deriv else t.values(x)
        return out

    def upper(self, x):
        return self._face_sum(x, "upper")

    def lower(self, x):
        return self._face_sum(x, "lower")

    def average(self, x):
        return 0.5 * (self.upper(x) + self.lower(x))

    def jump(self, x):
        return self.upper(x) - self.lower(x)

    def average_deriv(self, x):
        return 0.5 * (self._face_sum(x, "upper", True) + self._face_sum(x, "lower", True))

    def jump_deriv(self, x):
        return self._face_sum(x, "upper", True) - self._face_sum(x, "lower", True)

    def fourier_average(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((xi.size, self.ncomp), dtype=complex)
        for t in self.terms:
            out += 0.5 * t.fourier(xi)
        return out

    def fourier_jump(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((xi.size, self.ncomp), dtype=complex)
        for t in self.terms:
            out += t.fourier(xi) if t.face == "upper" else -t.fourier(xi)
        return out

    def balance_residual(self):
        """Analytic int (p+ - p-) dx per component."""
        res = np.zeros(self.ncomp)
        for t in self.terms:
            res += t.integral() if t.face == "upper" else -t.integral()
        return res

    def balance_scale(self):
        """Largest per-term integral magnitude, the reference for tolerance."""
        return max(float(np.max(np.abs(t.integral()))) for t in self.terms)

    @property
    def is_tabulated(self):
        return False


@dataclass(frozen=True)
class TabulatedLoading:
    """Crack-face loading given as samples on x <= 0 (piecewise linear).

    `x` must be strictly increasing and nonpositive; values are assumed zero
    left of the first sample.  `p_plus`/`p_minus` have shape (len(x),) or
    (len(x), 2).
    """

    x: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0) or np.any(x > 0):
            raise ValidationError(
                "tabulated loading needs strictly increasing sample points on x <= 0"
            )
        pp = np.asarray(self.p_plus, dtype=float)
        pm = np.asarray(self.p_minus, dtype=float)
        if pp.ndim == 1:
            pp = pp[:, None]
        if pm.ndim == 1:
            pm = pm[:, None]
        if pp.shape != pm.shape or pp.shape[0] != x.size or pp.shape[1] not in (1, 2):
            raise ValidationError("tabulated loading faces must share shape (n, 1|2)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p_plus", pp)
        object.__setattr__(self, "p_minus", pm)

    @property
    def ncomp(self):
        return self.p_plus.shape[1]

    @property
    def max_scale(self):
        return float(-self.x[0])

    def _interp(self, x, table):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cols = [
            np.interp(x, self.x, table[:, k], left=0.0, right=0.0)
            for k in range(self.ncomp)
        ]
        out = np.stack(cols, axis=-1)
        out[x > 0.0] = 0.0
        return out

    def upper(self, x):
        return self._interp(x, self.p_plus)

    def lower(self, x):
        return self._interp(x, self.p_minus)

    def average(self, x):
        return 0.5 * (self.upper(x) + self.lower(x))

    def jump(self, x):
        return self.upper(x) - self.lower(x)

    def _interp_deriv(self, x, table):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        slopes = np.diff(table, axis=0) / np.diff(self.x)[:, None]
        idx = np.clip(np.searchsorted(self.x, x, side="left") - 1, 0, slopes.shape[0] - 1)
        out = slopes[idx]
        out[(x < self.x[0]) | (x > 0.0)] = 0.0
        return out

    def average_deriv(self, x):
        return 0.5 * (self._interp_deriv(x, self.p_plus) + self._interp_deriv(x, self.p_minus))

    def jump_deriv(self, x):
        return self._interp_deriv(x, self.p_plus) - self._interp_deriv(x, self.p_minus)

    def fourier_average(self, xi):
        return self._fourier(xi, 0.5 * (self.p_plus + self.p_minus))

    def fourier_jump(self, xi):
        return self._fourier(xi, self.p_plus - self.p_minus)

    def _fourier(self, xi, table):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        phase = np.exp(1j * xi[:, None] * self.x[None, :])
        return np.trapezoid(phase[:, :, None] * table[None, :, :], self.x, axis=1)

    def balance_residual(self):
        return np.trapezoid(self.p_plus - self.p_minus, self.x, axis=0)

    def balance_scale(self):
        scale = max(
            float(np.max(np.abs(np.trapezoid(self.p_plus, self.x, axis=0)))),
            float(np.max(np.abs(np.trapezoid(self.p_minus, self.x, axis=0)))),
        )
        return scale if scale > 0.0 else 1.0

    @property
    def is_tabulated(self):
        return True


def validate_self_balance(load, tol=None):
    """Check int (p+ - p-) dx = 0; returns (balanced flag, residual array).

    Parametric loadings integrate analytically; tabulated ones by trapezoid.
    The flag compares the residual against tol times the largest per-term
    integral magnitude.
    """
    if tol is None:
        tol = BALANCE_TOL_TABULATED if load.is_tabulated else BALANCE_TOL_PARAMETRIC
    residual = load.balance_residual()
    scale = load.balance_scale()
    balanced = bool(np.all(np.abs(residual) <= tol * max(scale, 1e-300)))
    return balanced, residual


def require_self_balanced(load, tol=None):
    balanced, residual = validate_self_balance(load, tol)
    if not balanced:
        raise ValidationError(
            f"loading is not self-balanced: residual {residual} "
            f"(scale {load.balance_scale()})"
        )


# Named materials. The three shear-modulus orientations share one base
# material; only the axis labelling differs, so they are given directly by
# their (mu23, mu13) pairs and carry no in-plane block.
_PRESET_BUILDERS = {
    "A": lambda: compliance_from_shear_moduli(1.0, 2.0 / 3.0),
    "B": lambda: compliance_from_shear_moduli(1.0, 0.5),
    "C": lambda: compliance_from_shear_moduli(0.5, 2.0 / 3.0),
    "incompressible-I": lambda: compliance_from_incompressible(
        IncompressibleOrthotropicParams(e1=20.0, e2=10.0, e3=10.0, mu12=5.0)
    ),
    "incompressible-II": lambda: compliance_from_incompressible(
        IncompressibleOrthotropicParams(e1=20.0, e2=10.0, e3=15.0, mu12=5.0)
    ),
}


def material_preset(name):
    """Return a named preset material; see MATERIAL_PRESET_NAMES."""
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        raise ValidationError(
            f"unknown material preset {name!r}; known: {sorted(_PRESET_BUILDERS)}"
        ) from None
    return builder()


MATERIAL_PRESET_NAMES = tuple(sorted(_PRESET_BUILDERS))
