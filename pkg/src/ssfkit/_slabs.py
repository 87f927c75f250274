"""Exact constant-coefficient propagation and scaled 2x2 algebra.

Solutions of ``-y'' + v0*y = z*y`` on a slab have closed forms; this
module provides the slab transfer matrix in an overflow-safe
``(mantissa, log_scale)`` representation together with the exact
Pruefer-phase advance across a slab.  Matrices are row-major 4-tuples
``(t11, t12, t21, t22)``; the true matrix is ``mantissa * exp(log_scale)``.
"""

import math

IDENTITY = (1.0, 0.0, 0.0, 1.0)

# Renormalize whenever the mantissa leaves this band.
_RENORM_HI = 1e8
_RENORM_LO = 1e-8


def slab_transfer(v0: float, z: float, d: float):
    """Exact transfer matrix over a slab of signed length ``d``.

    Maps ``(y, y')`` at the near end to the far end.  Returns
    ``(mantissa, log_scale)``; the determinant of the true matrix is 1.
    """
    m2 = z - v0  # y'' = -m2*y
    if d == 0.0:
        return IDENTITY, 0.0
    u = m2 * d * d
    if abs(u) < 1e-12:
        # Degenerate slab: series in m2*d^2 keeps full precision.
        e11 = 1.0 - 0.5 * u + u * u / 24.0
        e12 = d * (1.0 - u / 6.0 + u * u / 120.0)
        return (e11, e12, -m2 * e12, e11), 0.0
    if m2 > 0.0:
        k = math.sqrt(m2)
        c, s = math.cos(k * d), math.sin(k * d)
        return (c, s / k, -k * s, c), 0.0
    kap = math.sqrt(-m2)
    ad = abs(d)
    q = math.exp(-2.0 * kap * ad)
    sgn = 1.0 if d > 0 else -1.0
    half_sum = 0.5 * (1.0 + q)
    half_diff = 0.5 * (1.0 - q)
    m = (half_sum, sgn * half_diff / kap, sgn * kap * half_diff, half_sum)
    return m, kap * ad


def compose(m2, l2, m1, l1):
    """Scaled product ``(m2 e^{l2}) (m1 e^{l1})`` with renormalization."""
    a11, a12, a21, a22 = m2
    b11, b12, b21, b22 = m1
    c = (
        a11 * b11 + a12 * b21,
        a11 * b12 + a12 * b22,
        a21 * b11 + a22 * b21,
        a21 * b12 + a22 * b22,
    )
    lc = l1 + l2
    s = max(abs(c[0]), abs(c[1]), abs(c[2]), abs(c[3]))
    if s > _RENORM_HI or (0.0 < s < _RENORM_LO):
        inv = 1.0 / s
        c = (c[0] * inv, c[1] * inv, c[2] * inv, c[3] * inv)
        lc += math.log(s)
    return c, lc


def apply_vec(m, y, p):
    a11, a12, a21, a22 = m
    return a11 * y + a12 * p, a21 * y + a22 * p


def det2(m):
    return m[0] * m[3] - m[1] * m[2]


def prufer_slab_advance(v0: float, z: float, d: float, theta: float) -> float:
    """Exact Pruefer phase advance across a constant slab (``d >= 0``).

    The phase is defined by ``y = r sin(theta)``, ``y' = r cos(theta)``;
    it increases through every multiple of pi (upward zero crossings of
    ``y``), so the advance counts eigenvalue-relevant oscillation exactly.
    """
    if d == 0.0:
        return theta
    m2 = z - v0
    n = math.floor(theta / math.pi)
    r = theta - n * math.pi
    if r < 0.0:  # floating fuzz at multiples of pi
        r, n = r + math.pi, n - 1
    if m2 > 1e-14:
        # Oscillatory slab: in coordinates (y, y'/k) the flow is a rigid
        # rotation at rate k, so the scaled phase advances by exactly k*d.
        k = math.sqrt(m2)
        rs = math.atan2(k * math.sin(r), math.cos(r))
        phi = n * math.pi + rs + k * d
        mfl = math.floor(phi / math.pi)
        rem = phi - mfl * math.pi
        if rem < 0.0:
            rem, mfl = rem + math.pi, mfl - 1
        r_out = math.atan2(math.sin(rem), k * math.cos(rem))
        if r_out < 0.0:
            r_out += math.pi
        return mfl * math.pi + r_out
    # Non-oscillatory slab: at most one zero crossing (y is convex where
    # positive), detected by the sign of the propagated y component.
    y0, p0 = math.sin(r), math.cos(r)
    if m2 < -1e-14:
        kap = math.sqrt(-m2)
        q = math.exp(-2.0 * kap * d)
        yh = 0.5 * (1.0 + q) * y0 + 0.5 * (1.0 - q) / kap * p0
        ph = 0.5 * kap * (1.0 - q) * y0 + 0.5 * (1.0 + q) * p0
    else:
        u = m2 * d * d
        e11 = 1.0 - 0.5 * u
        e12 = d * (1.0 - u / 6.0)
        yh = e11 * y0 + e12 * p0
        ph = -m2 * e12 * y0 + e11 * p0
    if yh < 0.0:
        crossings, yh, ph = 1, -yh, -ph
    else:
        crossings = 0
    r_out = math.atan2(yh, ph)
    if r_out < 0.0:
        r_out += math.pi
    return (n + crossings) * math.pi + r_out
