"""Pure-Python twin of the compiled hot kernels.

Implements exactly the same Dormand-Prince 5(4) stepping logic as
``ssfkit._core`` so the two backends are interchangeable.  Used when the
compiled extension is unavailable (or forced via ``SSFKIT_BACKEND``).

Kernel potential kinds (smooth on the segment handed to the kernel):
  0  constant        params = (v0,)
  1  gaussian        params = (amplitude, sigma)
  2  poschl_teller   params = (prefactor, scale)  ->  -prefactor*sech(x/scale)^2
"""

import math

STATUS_OK = 0
STATUS_NORM_STOP = 1
STATUS_STEP_UNDERFLOW = 2

# Dormand-Prince 5(4) tableau.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def pot_value(kind: int, params, x: float) -> float:
    if kind == 0:
        return params[0]
    if kind == 1:
        s = x / params[1]
        return params[0] * math.exp(-0.5 * s * s)
    if kind == 2:
        c = math.cosh(x / params[1])
        return -params[0] / (c * c)
    raise ValueError(f"unknown potential kind {kind}")


def propagate_linear(kind, params, z, x0, x1, y1, p1, y2, p2, rtol, atol, stop_norm):
    """Advance the two-column system ``y'' = (V - z) y`` from x0 toward x1.

    Returns ``(x_reached, y1, p1, y2, p2, status)``.  Stops early (status
    NORM_STOP) once the state norm exceeds ``stop_norm`` so the caller can
    renormalize and keep chunk determinants well conditioned.
    """
    span = x1 - x0
    if span == 0.0:
        return x0, y1, p1, y2, p2, STATUS_OK
    direction = 1.0 if span > 0 else -1.0
    w0 = pot_value(kind, params, x0) - z
    h = direction * min(abs(span), 0.1 / math.sqrt(max(1.0, abs(w0))))
    hmin = abs(span) * 1e-15
    x = x0
    while True:
        if (x1 - x) * direction <= hmin:
            return x1, y1, p1, y2, p2, STATUS_OK
        if abs(h) > abs(x1 - x):
            h = x1 - x
        if abs(h) < hmin:
            return x, y1, p1, y2, p2, STATUS_STEP_UNDERFLOW

        w = pot_value(kind, params, x) - z
        k1a, k1b, k1c, k1d = p1, w * y1, p2, w * y2

        w = pot_value(kind, params, x + _A21 * h) - z
        ya = y1 + h * _A21 * k1a
        yb = p1 + h * _A21 * k1b
        yc = y2 + h * _A21 * k1c
        yd = p2 + h * _A21 * k1d
        k2a, k2b, k2c, k2d = yb, w * ya, yd, w * yc

        w = pot_value(kind, params, x + 0.3 * h) - z
        ya = y1 + h * (_A31 * k1a + _A32 * k2a)
        yb = p1 + h * (_A31 * k1b + _A32 * k2b)
        yc = y2 + h * (_A31 * k1c + _A32 * k2c)
        yd = p2 + h * (_A31 * k1d + _A32 * k2d)
        k3a, k3b, k3c, k3d = yb, w * ya, yd, w * yc

        w = pot_value(kind, params, x + 0.8 * h) - z
        ya = y1 + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        yb = p1 + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        yc = y2 + h * (_A41 * k1c + _A42 * k2c + _A43 * k3c)
        yd = p2 + h * (_A41 * k1d + _A42 * k2d + _A43 * k3d)
        k4a, k4b, k4c, k4d = yb, w * ya, yd, w * yc

        w = pot_value(kind, params, x + (8.0 / 9.0) * h) - z
        ya = y1 + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        yb = p1 + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        yc = y2 + h * (_A51 * k1c + _A52 * k2c + _A53 * k3c + _A54 * k4c)
        yd = p2 + h * (_A51 * k1d + _A52 * k2d + _A53 * k3d + _A54 * k4d)
        k5a, k5b, k5c, k5d = yb, w * ya, yd, w * yc

        w = pot_value(kind, params, x + h) - z
        ya = y1 + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        yb = p1 + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        yc = y2 + h * (_A61 * k1c + _A62 * k2c + _A63 * k3c + _A64 * k4c + _A65 * k5c)
        yd = p2 + h * (_A61 * k1d + _A62 * k2d + _A63 * k3d + _A64 * k4d + _A65 * k5d)
        k6a, k6b, k6c, k6d = yb, w * ya, yd, w * yc

        n1 = y1 + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        q1 = p1 + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        n2 = y2 + h * (_B1 * k1c + _B3 * k3c + _B4 * k4c + _B5 * k5c + _B6 * k6c)
        q2 = p2 + h * (_B1 * k1d + _B3 * k3d + _B4 * k4d + _B5 * k5d + _B6 * k6d)

        k7a, k7b, k7c, k7d = q1, w * n1, q2, w * n2

        ea = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        eb = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        ec = h * (_E1 * k1c + _E3 * k3c + _E4 * k4c + _E5 * k5c + _E6 * k6c + _E7 * k7c)
        ed = h * (_E1 * k1d + _E3 * k3d + _E4 * k4d + _E5 * k5d + _E6 * k6d + _E7 * k7d)

        sa = atol + rtol * max(abs(y1), abs(n1))
        sb = atol + rtol * max(abs(p1), abs(q1))
        sc = atol + rtol * max(abs(y2), abs(n2))
        sd = atol + rtol * max(abs(p2), abs(q2))
        err = math.sqrt(
            0.25 * ((ea / sa) ** 2 + (eb / sb) ** 2 + (ec / sc) ** 2 + (ed / sd) ** 2)
        )

        if err <= 1.0:
            x += h
            y1, p1, y2, p2 = n1, q1, n2, q2
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
            h *= max(_MIN_FACTOR, factor)
            if max(abs(y1), abs(p1), abs(y2), abs(p2)) > stop_norm:
                return x, y1, p1, y2, p2, STATUS_NORM_STOP
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)


def prufer_advance(kind, params, z, x0, x1, theta, rtol, atol):
    """Integrate ``theta' = cos^2(theta) + (z - V) sin^2(theta)`` on [x0, x1].

    Returns ``(theta_at_x1, status)``; requires ``x1 >= x0``.
    """
    span = x1 - x0
    if span <= 0.0:
        return theta, STATUS_OK
    w0 = z - pot_value(kind, params, x0)
    h = min(span, 0.1 / math.sqrt(max(1.0, abs(w0))))
    hmin = span * 1e-15
    x = x0

    def rhs(xx, th):
        s = math.sin(th)
        c = math.cos(th)
        return c * c + (z - pot_value(kind, params, xx)) * s * s

    while True:
        if x1 - x <= hmin:
            return theta, STATUS_OK
        if h > x1 - x:
            h = x1 - x
        if h < hmin:
            return theta, STATUS_STEP_UNDERFLOW
        k1 = rhs(x, theta)
        k2 = rhs(x + _A21 * h, theta + h * _A21 * k1)
        k3 = rhs(x + 0.3 * h, theta + h * (_A31 * k1 + _A32 * k2))
        k4 = rhs(x + 0.8 * h, theta + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(x + (8.0 / 9.0) * h, theta + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = rhs(x + h, theta + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        tn = theta + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = rhs(x + h, tn)
        e = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        scale = atol + rtol * max(abs(theta), abs(tn))
        err = abs(e) / scale
        if err <= 1.0:
            x += h
            theta = tn
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
            h *= max(_MIN_FACTOR, factor)
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
