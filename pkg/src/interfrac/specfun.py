"""Sine/cosine integrals and the closed-form convolution kernels.

The two kernels live on the whole line and carry the interface length scale
``a`` (units 1/length):

* ``kernel_S`` is odd, jumps by ``-pi*sign(x)/2`` at the origin and decays
  like ``-sign(x)/(a|x|)``,
* ``kernel_T`` is even, logarithmically singular at the origin and decays
  like ``-1/(a x)**2``.

Both are combinations of the sine integral ``si`` and cosine integral ``ci``.
The singular parts are available in closed form, so the module also exposes
the smooth remainders ``kernel_S_remainder`` / ``kernel_T_remainder`` that the
operator assembly integrates by quadrature after the sign / log moments have
been handled analytically.  All functions are pure and accept scalars or
arrays in ``x``.
"""

import numpy as np
from scipy.special import sici

from .errors import ValidationError

EULER_GAMMA = float(np.euler_gamma)

# |kernel_S| jump amplitude at the origin: S(0+) = -S_JUMP, S(0-) = +S_JUMP
S_JUMP = np.pi / 2.0


def _validate_scale(a):
    if not np.isfinite(a) or a <= 0.0:
        raise ValidationError(f"kernel scale must be positive, got a={a!r}")


def si(x):
    """Sine integral si(x) = -int_x^inf sin(t)/t dt, for x > 0.

    Equals Si(x) - pi/2; tends to -pi/2 as x -> 0+ and to 0 as x -> inf.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValidationError("si(x) requires x > 0")
    out = sici(x)[0] - np.pi / 2.0
    return out if out.ndim else float(out)


def ci(x):
    """Cosine integral ci(x) = -int_x^inf cos(t)/t dt, for x > 0.

    Diverges like log(x) + gamma as x -> 0+ and tends to 0 as x -> inf.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValidationError("ci(x) requires x > 0 (log divergence at 0)")
    out = sici(x)[1]
    return out if out.ndim else float(out)


def _cin_comp(z):
    """ci(z) - log(z) - gamma, computed without cancellation.

    Series sum_{k>=1} (-z^2)^k / (2k (2k)!) below z=1, direct above.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1.0
    if np.any(small):
        zs = z[small] ** 2
        # 9 terms keep the truncation below 1e-17 at z = 1
        acc = np.zeros_like(zs)
        coeff = -1.0
        fact = 1.0
        for k in range(1, 10):
            fact *= (2 * k - 1) * (2 * k)
            acc += coeff * zs**k / (2 * k * fact)
            coeff = -coeff
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = sici(zb)[1] - np.log(zb) - EULER_GAMMA
    return out


def _s_remainder_abs(z):
    """kernel_S(x>0) + pi/2 as a function of z = a*x >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    pos = z > 0.0
    if np.any(pos):
        zp = z[pos]
        s, c = sici(zp)
        # Si*cos - Ci*sin + (pi/2)(1 - cos); every term is cancellation-free
        out[pos] = s * np.cos(zp) - c * np.sin(zp) + S_JUMP * 2.0 * np.sin(zp / 2.0) ** 2
    return out


def _t_remainder_abs(z):
    """kernel_T - log(a|x|) - gamma as a function of z = a|x| >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    pos = z > 0.0
    if np.any(pos):
        zp = z[pos]
        s = sici(zp)[0] - np.pi / 2.0
        cosm1 = -2.0 * np.sin(zp / 2.0) ** 2
        out[pos] = (
            s * np.sin(zp)
            + _cin_comp(zp) * np.cos(zp)
            + (EULER_GAMMA + np.log(zp)) * cosm1
        )
    return out


def kernel_S(a, x):
    """Odd kernel S_a(x) = sign(x) [si(a|x|) cos(a|x|) - ci(a|x|) sin(a|x|)].

    The value at x = 0 is 0 by the odd convention; the one-sided limits
    -+ pi/2 are available through `kernel_S_limit`.
    """
    _validate_scale(a)
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * (_s_remainder_abs(a * np.abs(x)) - S_JUMP)
    return out if out.ndim else float(out)


def kernel_S_limit(a, x, side):
    """kernel_S with the x = 0 entries replaced by the one-sided limit.

    `side` is -1 for the limit from x < 0 (value +pi/2) and +1 from x > 0
    (value -pi/2); nonzero x are unaffected.
    """
    if side not in (-1, 1):
        raise ValidationError("side must be -1 or +1")
    _validate_scale(a)
    x = np.asarray(x, dtype=float)
    sgn = np.sign(x)
    sgn = np.where(x == 0.0, float(side), sgn)
    out = sgn * (_s_remainder_abs(a * np.abs(x)) - S_JUMP)
    return out if out.ndim else float(out)


def kernel_T(a, x):
    """Even kernel T_a(x) = si(a|x|) sin(a|x|) + ci(a|x|) cos(a|x|).

    Log-singular at x = 0, which is rejected; the operator layer integrates
    the singularity analytically instead of sampling it.
    """
    _validate_scale(a)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise ValidationError("kernel_T is log-singular at x = 0")
    z = a * np.abs(x)
    out = np.log(z) + EULER_GAMMA + _t_remainder_abs(z)
    return out if out.ndim else float(out)


def kernel_S_remainder(a, x):
    """Smooth odd part of kernel_S: S_a(x) + (pi/2) sign(x).

    Vanishes at x = 0 and is continuous there (O(a|x| log a|x|)).
    """
    _validate_scale(a)
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * _s_remainder_abs(a * np.abs(x))
    return out if out.ndim else float(out)


def kernel_T_remainder(a, x):
    """Smooth even part of kernel_T: T_a(x) - log(a|x|) - gamma.

    Vanishes at x = 0 and is continuous there.
    """
    _validate_scale(a)
    x = np.asarray(x, dtype=float)
    out = _t_remainder_abs(a * np.abs(x))
    return out if out.ndim else float(out)


def kernel_T_diff(a1, a2, x):
    """T_{a1}(x) - T_{a2}(x), finite for every x including x = 0.

    The log singularities cancel, leaving log(a1/a2) plus the difference of
    the smooth remainders.
    """
    _validate_scale(a1)
    _validate_scale(a2)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.log(a1 / a2) + _t_remainder_abs(a1 * ax) - _t_remainder_abs(a2 * ax)
    return out if out.ndim else float(out)
