# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Dormand-Prince 5(4) propagation of the linear
two-column system and of the Pruefer phase over one smooth segment.

Mirror image of ``ssfkit._kernels_py``; both backends expose the same
functions with identical semantics so they can be swapped at import.
"""

from libc.math cimport sqrt, exp, cosh, sin, cos, fabs, fmax, pow

STATUS_OK = 0
STATUS_NORM_STOP = 1
STATUS_STEP_UNDERFLOW = 2

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0


cdef inline double _pot(int kind, double c0, double c1, double x) nogil:
    cdef double s, c
    if kind == 0:
        return c0
    if kind == 1:
        s = x / c1
        return c0 * exp(-0.5 * s * s)
    # kind == 2
    c = cosh(x / c1)
    return -c0 / (c * c)


def pot_value(int kind, params, double x):
    cdef double c0 = params[0]
    cdef double c1 = params[1] if len(params) > 1 else 1.0
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown potential kind {kind}")
    return _pot(kind, c0, c1, x)


def propagate_linear(int kind, params, double z, double x0, double x1,
                     double y1, double p1, double y2, double p2,
                     double rtol, double atol, double stop_norm):
    """Advance the two-column system ``y'' = (V - z) y`` from x0 toward x1.

    Returns ``(x_reached, y1, p1, y2, p2, status)``.  Stops early once the
    state norm exceeds ``stop_norm`` so the caller can renormalize.
    """
    cdef double c0 = params[0]
    cdef double c1 = params[1] if len(params) > 1 else 1.0
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown potential kind {kind}")

    cdef double span = x1 - x0
    if span == 0.0:
        return x0, y1, p1, y2, p2, STATUS_OK
    cdef double direction = 1.0 if span > 0 else -1.0
    cdef double w = _pot(kind, c0, c1, x0) - z
    cdef double h = direction * min(fabs(span), 0.1 / sqrt(fmax(1.0, fabs(w))))
    cdef double hmin = fabs(span) * 1e-15
    cdef double x = x0

    cdef double k1a, k1b, k1c, k1d, k2a, k2b, k2c, k2d, k3a, k3b, k3c, k3d
    cdef double k4a, k4b, k4c, k4d, k5a, k5b, k5c, k5d, k6a, k6b, k6c, k6d
    cdef double k7a, k7b, k7c, k7d
    cdef double ya, yb, yc, yd, n1, q1, n2, q2
    cdef double ea, eb, ec, ed, sa, sb, sc, sd, err, factor

    while True:
        if (x1 - x) * direction <= hmin:
            return x1, y1, p1, y2, p2, STATUS_OK
        if fabs(h) > fabs(x1 - x):
            h = x1 - x
        if fabs(h) < hmin:
            return x, y1, p1, y2, p2, STATUS_STEP_UNDERFLOW

        w = _pot(kind, c0, c1, x) - z
        k1a = p1; k1b = w * y1; k1c = p2; k1d = w * y2

        w = _pot(kind, c0, c1, x + A21 * h) - z
        ya = y1 + h * A21 * k1a
        yb = p1 + h * A21 * k1b
        yc = y2 + h * A21 * k1c
        yd = p2 + h * A21 * k1d
        k2a = yb; k2b = w * ya; k2c = yd; k2d = w * yc

        w = _pot(kind, c0, c1, x + 0.3 * h) - z
        ya = y1 + h * (A31 * k1a + A32 * k2a)
        yb = p1 + h * (A31 * k1b + A32 * k2b)
        yc = y2 + h * (A31 * k1c + A32 * k2c)
        yd = p2 + h * (A31 * k1d + A32 * k2d)
        k3a = yb; k3b = w * ya; k3c = yd; k3d = w * yc

        w = _pot(kind, c0, c1, x + 0.8 * h) - z
        ya = y1 + h * (A41 * k1a + A42 * k2a + A43 * k3a)
        yb = p1 + h * (A41 * k1b + A42 * k2b + A43 * k3b)
        yc = y2 + h * (A41 * k1c + A42 * k2c + A43 * k3c)
        yd = p2 + h * (A41 * k1d + A42 * k2d + A43 * k3d)
        k4a = yb; k4b = w * ya; k4c = yd; k4d = w * yc

        w = _pot(kind, c0, c1, x + (8.0 / 9.0) * h) - z
        ya = y1 + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a)
        yb = p1 + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b)
        yc = y2 + h * (A51 * k1c + A52 * k2c + A53 * k3c + A54 * k4c)
        yd = p2 + h * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
        k5a = yb; k5b = w * ya; k5c = yd; k5d = w * yc

        w = _pot(kind, c0, c1, x + h) - z
        ya = y1 + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a)
        yb = p1 + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b)
        yc = y2 + h * (A61 * k1c + A62 * k2c + A63 * k3c + A64 * k4c + A65 * k5c)
        yd = p2 + h * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
        k6a = yb; k6b = w * ya; k6c = yd; k6d = w * yc

        n1 = y1 + h * (B1 * k1a + B3 * k3a + B4 * k4a + B5 * k5a + B6 * k6a)
        q1 = p1 + h * (B1 * k1b + B3 * k3b + B4 * k4b + B5 * k5b + B6 * k6b)
        n2 = y2 + h * (B1 * k1c + B3 * k3c + B4 * k4c + B5 * k5c + B6 * k6c)
        q2 = p2 + h * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)

        k7a = q1; k7b = w * n1; k7c = q2; k7d = w * n2

        ea = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
        eb = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
        ec = h * (E1 * k1c + E3 * k3c + E4 * k4c + E5 * k5c + E6 * k6c + E7 * k7c)
        ed = h * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)

        sa = atol + rtol * fmax(fabs(y1), fabs(n1))
        sb = atol + rtol * fmax(fabs(p1), fabs(q1))
        sc = atol + rtol * fmax(fabs(y2), fabs(n2))
        sd = atol + rtol * fmax(fabs(p2), fabs(q2))
        err = sqrt(0.25 * ((ea / sa) ** 2 + (eb / sb) ** 2
                           + (ec / sc) ** 2 + (ed / sd) ** 2))

        if err <= 1.0:
            x += h
            y1 = n1; p1 = q1; y2 = n2; p2 = q2
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * pow(err, -0.2))
            h *= fmax(MIN_FACTOR, factor)
            if fmax(fmax(fabs(y1), fabs(p1)), fmax(fabs(y2), fabs(p2))) > stop_norm:
                return x, y1, p1, y2, p2, STATUS_NORM_STOP
        else:
            h *= fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))


cdef inline double _prufer_rhs(int kind, double c0, double c1, double z,
                               double x, double th) nogil:
    cdef double s = sin(th)
    cdef double c = cos(th)
    return c * c + (z - _pot(kind, c0, c1, x)) * s * s


def prufer_advance(int kind, params, double z, double x0, double x1,
                   double theta, double rtol, double atol):
    """Integrate ``theta' = cos^2 + (z - V) sin^2`` on [x0, x1] (forward)."""
    cdef double c0 = params[0]
    cdef double c1 = params[1] if len(params) > 1 else 1.0
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown potential kind {kind}")

    cdef double span = x1 - x0
    if span <= 0.0:
        return theta, STATUS_OK
    cdef double w = z - _pot(kind, c0, c1, x0)
    cdef double h = min(span, 0.1 / sqrt(fmax(1.0, fabs(w))))
    cdef double hmin = span * 1e-15
    cdef double x = x0
    cdef double k1, k2, k3, k4, k5, k6, k7, tn, e, scale, err, factor

    while True:
        if x1 - x <= hmin:
            return theta, STATUS_OK
        if h > x1 - x:
            h = x1 - x
        if h < hmin:
            return theta, STATUS_STEP_UNDERFLOW
        k1 = _prufer_rhs(kind, c0, c1, z, x, theta)
        k2 = _prufer_rhs(kind, c0, c1, z, x + A21 * h, theta + h * A21 * k1)
        k3 = _prufer_rhs(kind, c0, c1, z, x + 0.3 * h, theta + h * (A31 * k1 + A32 * k2))
        k4 = _prufer_rhs(kind, c0, c1, z, x + 0.8 * h,
                         theta + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = _prufer_rhs(kind, c0, c1, z, x + (8.0 / 9.0) * h,
                         theta + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = _prufer_rhs(kind, c0, c1, z, x + h,
                         theta + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        tn = theta + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = _prufer_rhs(kind, c0, c1, z, x + h, tn)
        e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * fmax(fabs(theta), fabs(tn))
        err = fabs(e) / scale
        if err <= 1.0:
            x += h
            theta = tn
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * pow(err, -0.2))
            h *= fmax(MIN_FACTOR, factor)
        else:
            h *= fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
