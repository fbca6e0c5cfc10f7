"""Modified Bessel functions K0, K1 and the layer interaction kernels.

Two evaluation branches are used:

* ``x <= 2``: ascending series, including the logarithmic terms.
* ``x > 2``: Steed's continued fraction for the exponentially scaled
  functions ``exp(x) K_nu(x)`` (Temme's CF2 for ``nu = 0``).

Interaction kernels between two vortices a distance ``r`` apart::

    same layer   G_s(r) = ln r - K0(r)      G_s'(r) = 1/r + K1(r)   (h_same)
    cross layer  G_c(r) = ln r + K0(r)      G_c'(r) = 1/r - K1(r)   (h_cross)

``G_c`` and ``G_c'`` stay finite as ``r -> 0`` (limits ``ln 2 - gamma`` and
``0``); below the branch point both are summed from series with the
logarithmic singularity cancelled analytically.

The scalar kernels are numba-compiled so they can be called from the
compiled velocity and field loops in :mod:`halfplane_vortex.model`.
"""
import math

import numpy as np
from numba import njit, vectorize

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
LN2_MINUS_GAMMA = 0.69314718055994530942 - EULER_GAMMA

SERIES_CUTOFF = 2.0

_EPS = 1e-17
_MAXTERMS = 60
_CF_MAXIT = 10000


@njit(cache=True)
def _series_parts(x):
    """Return (I0, S0, I1, S1) for 0 <= x <= 2.

    I0, I1 are the regular Bessel functions; S0 = sum_{k>=1} H_k t^k/(k!)^2
    and S1 = (x/4) sum_{k>=0} (H_k + H_{k+1}) t^k/(k!(k+1)!) with t = x^2/4
    and H_k the harmonic numbers.
    """
    t = 0.25 * x * x
    i0 = 1.0
    s0 = 0.0
    c0 = 1.0  # t^k / (k!)^2
    c1 = 1.0  # t^k / (k! (k+1)!)
    i1 = 1.0
    s1 = 1.0  # H_0 + H_1
    hk = 0.0
    for k in range(1, _MAXTERMS):
        c0 *= t / (k * k)
        c1 *= t / (k * (k + 1))
        hk += 1.0 / k
        i0 += c0
        s0 += hk * c0
        i1 += c1
        s1 += (2.0 * hk + 1.0 / (k + 1)) * c1
        if c0 * hk < _EPS * i0 and c1 * (2.0 * hk + 1.0) < _EPS * s1:
            break
    return i0, s0, 0.5 * x * i1, 0.25 * x * s1


@njit(cache=True)
def _k0_series(x):
    i0, s0, i1, s1 = _series_parts(x)
    return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + s0


@njit(cache=True)
def _k1_series(x):
    i0, s0, i1, s1 = _series_parts(x)
    return 1.0 / x + (math.log(0.5 * x) + EULER_GAMMA) * i1 - s1


@njit(cache=True)
def _scaled_cf(x):
    """exp(x)*K0(x), exp(x)*K1(x) by Steed's continued fraction (x > ~1)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    h = a1 * h
    k0e = math.sqrt(math.pi / (2.0 * x)) / s
    k1e = k0e * (x + 0.5 - h) / x
    return k0e, k1e


@njit(cache=True)
def _k0_cf(x):
    return _scaled_cf(x)[0] * math.exp(-x)


@njit(cache=True)
def _k1_cf(x):
    return _scaled_cf(x)[1] * math.exp(-x)


@njit(cache=True)
def k0_scalar(x):
    if x <= SERIES_CUTOFF:
        return _k0_series(x)
    return _k0_cf(x)


@njit(cache=True)
def k1_scalar(x):
    if x <= SERIES_CUTOFF:
        return _k1_series(x)
    return _k1_cf(x)


@njit(cache=True)
def h_same_scalar(r):
    return 1.0 / r + k1_scalar(r)


@njit(cache=True)
def h_cross_scalar(r):
    if r == 0.0:
        return 0.0
    if r <= SERIES_CUTOFF:
        i0, s0, i1, s1 = _series_parts(r)
        return s1 - (math.log(0.5 * r) + EULER_GAMMA) * i1
    return 1.0 / r - _k1_cf(r)


@njit(cache=True)
def kernel_same_scalar(r):
    return math.log(r) - k0_scalar(r)


@njit(cache=True)
def kernel_cross_scalar(r):
    if r <= SERIES_CUTOFF:
        i0, s0, i1, s1 = _series_parts(r)
        if r == 0.0:
            return LN2_MINUS_GAMMA
        # ln r + K0(r) = ln r (1 - I0) + (ln 2 - gamma) I0 + S0
        return math.log(r) * (1.0 - i0) + LN2_MINUS_GAMMA * i0 + s0
    return math.log(r) + _k0_cf(r)


_k0_u = vectorize(["float64(float64)"], cache=True)(lambda x: k0_scalar(x))
_k1_u = vectorize(["float64(float64)"], cache=True)(lambda x: k1_scalar(x))
_h_same_u = vectorize(["float64(float64)"], cache=True)(lambda r: h_same_scalar(r))
_h_cross_u = vectorize(["float64(float64)"], cache=True)(lambda r: h_cross_scalar(r))
_kc_u = vectorize(["float64(float64)"], cache=True)(lambda r: kernel_cross_scalar(r))
_ks_u = vectorize(["float64(float64)"], cache=True)(lambda r: kernel_same_scalar(r))

# single-branch evaluators, exposed for the branch-overlap checks
k0_series = vectorize(["float64(float64)"], cache=True)(lambda x: _k0_series(x))
k1_series = vectorize(["float64(float64)"], cache=True)(lambda x: _k1_series(x))
k0_cf = vectorize(["float64(float64)"], cache=True)(lambda x: _k0_cf(x))
k1_cf = vectorize(["float64(float64)"], cache=True)(lambda x: _k1_cf(x))


def _checked(func, x, strict, name):
    arr = np.asarray(x, dtype=float)
    bad = arr <= 0 if strict else arr < 0
    if np.any(bad) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} requires argument {'> 0' if strict else '>= 0'}, got {x!r}")
    out = func(arr)
    return float(out) if out.ndim == 0 else out


def k0(x):
    """Modified Bessel function of the second kind, order 0 (x > 0)."""
    return _checked(_k0_u, x, True, "k0")


def k1(x):
    """Modified Bessel function of the second kind, order 1 (x > 0)."""
    return _checked(_k1_u, x, True, "k1")


def h_same(r):
    """Radial derivative of the same-layer kernel, 1/r + K1(r)."""
    return _checked(_h_same_u, r, True, "h_same")


def h_cross(r):
    """Radial derivative of the cross-layer kernel, 1/r - K1(r); 0 at r = 0."""
    return _checked(_h_cross_u, r, False, "h_cross")


def kernel_same(r):
    """Same-layer pair potential ln r - K0(r)."""
    return _checked(_ks_u, r, True, "kernel_same")


def kernel_cross(r):
    """Cross-layer pair potential ln r + K0(r); ln 2 - gamma at r = 0."""
    return _checked(_kc_u, r, False, "kernel_cross")
