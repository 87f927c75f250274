"""Potentials, coupled boundary data, and the scalar constants attached to them.

Potentials are real, bounded, and compactly supported: ``V(x) = 0`` for
``|x| > support_halfwidth``.  That restriction keeps every downstream
integral tail-free and makes the free-region propagation exact.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError
from .quadrature import integrate

# Kernel-side potential kinds (see _kernels_py / _core).
KIND_CONST = 0
KIND_GAUSSIAN = 1
KIND_POSCHL = 2


class Segment(NamedTuple):
    """One maximal smoothness interval of the potential.

    ``exterior`` marks segments on which V vanishes identically because
    they lie outside the support; those admit exact free propagation.
    """

    lo: float
    hi: float
    kind: int
    params: tuple
    exterior: bool


@dataclass(frozen=True)
class Potential:
    """Compactly supported potential built from one of the preset shapes."""

    kind: str
    params: tuple
    support_halfwidth: float
    # Discontinuities / kinks inside the closed support, including its edges.
    breakpoints: tuple
    # Interior pieces as (lo, hi, kernel_kind, kernel_params).
    _pieces: tuple

    def __call__(self, x):
        scalar = np.isscalar(x)
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xa)
        for lo, hi, kind, params in self._pieces:
            mask = (xa >= lo) & (xa <= hi)
            if not mask.any():
                continue
            xs = xa[mask]
            if kind == KIND_CONST:
                out[mask] = params[0]
            elif kind == KIND_GAUSSIAN:
                amp, sigma = params
                out[mask] = amp * np.exp(-0.5 * (xs / sigma) ** 2)
            elif kind == KIND_POSCHL:
                pref, scale = params
                out[mask] = -pref / np.cosh(xs / scale) ** 2
        return float(out[0]) if scalar else out

    @property
    def bound(self) -> float:
        """An upper bound for sup |V|."""
        b = 0.0
        for _, _, kind, params in self._pieces:
            b = max(b, abs(params[0]) if kind != KIND_POSCHL else abs(params[0]))
        return b

    @property
    def is_zero(self) -> bool:
        return all(kind == KIND_CONST and params[0] == 0.0 for _, _, kind, params in self._pieces)

    def segments(self, lo: float, hi: float) -> list:
        """Smoothness segments covering [lo, hi], exterior parts flagged."""
        if hi < lo:
            raise ValueError("segments: hi < lo")
        segs = []
        a = self.support_halfwidth
        if lo < -a:
            segs.append(Segment(lo, min(hi, -a), KIND_CONST, (0.0,), True))
        for plo, phi, kind, params in self._pieces:
            s, e = max(lo, plo), min(hi, phi)
            if s < e:
                segs.append(Segment(s, e, kind, params, False))
        if hi > a:
            segs.append(Segment(max(lo, a), hi, KIND_CONST, (0.0,), True))
        return segs


def _mk(kind, params, halfwidth, breakpoints, pieces):
    return Potential(kind, tuple(params), float(halfwidth), tuple(breakpoints), tuple(pieces))


def square_well(depth: float, halfwidth: float) -> Potential:
    """V = -depth on [-halfwidth, halfwidth], zero outside."""
    if not (math.isfinite(depth) and math.isfinite(halfwidth)) or halfwidth <= 0:
        raise DomainError("square_well: need finite depth and halfwidth > 0")
    h = float(halfwidth)
    return _mk(
        "square_well",
        (depth, h),
        h,
        (-h, h),
        ((-h, h, KIND_CONST, (-float(depth),)),),
    )


def gaussian(amplitude: float, sigma: float, cutoff: float) -> Potential:
    """V = amplitude * exp(-x^2 / (2 sigma^2)) on [-cutoff, cutoff]."""
    if sigma <= 0 or cutoff <= 0 or not math.isfinite(amplitude):
        raise DomainError("gaussian: need sigma > 0, cutoff > 0, finite amplitude")
    c = float(cutoff)
    return _mk(
        "gaussian",
        (amplitude, sigma, c),
        c,
        (-c, c),
        ((-c, c, KIND_GAUSSIAN, (float(amplitude), float(sigma))),),
    )


def poschl_teller(strength: float, scale: float, cutoff: float) -> Potential:
    """V = -s(s+1)/scale^2 * sech(x/scale)^2 on [-cutoff, cutoff]."""
    if strength < 0 or scale <= 0 or cutoff <= 0:
        raise DomainError("poschl_teller: need strength >= 0, scale > 0, cutoff > 0")
    c = float(cutoff)
    pref = strength * (strength + 1.0) / scale**2
    return _mk(
        "poschl_teller",
        (strength, scale, c),
        c,
        (-c, c),
        ((-c, c, KIND_POSCHL, (pref, float(scale))),),
    )


def piecewise_constant(breakpoints, values) -> Potential:
    """V = values[i] on (breakpoints[i], breakpoints[i+1]), zero outside."""
    bps = [float(b) for b in breakpoints]
    vals = [float(v) for v in values]
    if len(bps) != len(vals) + 1 or len(vals) < 1:
        raise DomainError("piecewise_constant: need len(breakpoints) == len(values) + 1 >= 2")
    if any(b2 <= b1 for b1, b2 in zip(bps[:-1], bps[1:])):
        raise DomainError("piecewise_constant: breakpoints must be strictly increasing")
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("piecewise_constant: values must be finite")
    h = max(abs(bps[0]), abs(bps[-1]))
    pieces = []
    # Pad with explicit zero pieces so the pieces cover [-h, h].
    if bps[0] > -h:
        pieces.append((-h, bps[0], KIND_CONST, (0.0,)))
    for lo, hi, v in zip(bps[:-1], bps[1:], vals):
        pieces.append((lo, hi, KIND_CONST, (v,)))
    if bps[-1] < h:
        pieces.append((bps[-1], h, KIND_CONST, (0.0,)))
    cuts = sorted({-h, h, *bps})
    return _mk("piecewise_constant", (tuple(bps), tuple(vals)), h, cuts, pieces)


def zero_potential(halfwidth: float = 1.0) -> Potential:
    """The zero potential (with a nominal support for bookkeeping)."""
    return square_well(0.0, halfwidth)


@dataclass(frozen=True)
class BoundaryData:
    """Coupled boundary condition ``(y(l), y'(l)) = e^{i phi} R (y(-l), y'(-l))``.

    ``R`` must be real with det(R) = 1 (tolerance 1e-12) and R_{1,2} != 0;
    violations are rejected, never repaired, since a renormalized R would
    silently corrupt every derived constant.
    """

    phi: float
    r: tuple  # ((r11, r12), (r21, r22))

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (2, 2):
            raise DomainError("BoundaryData: R must be 2x2")
        object.__setattr__(self, "r", ((float(r[0, 0]), float(r[0, 1])), (float(r[1, 0]), float(r[1, 1]))))
        det = r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0]
        if abs(det - 1.0) > 1e-12:
            raise DomainError(f"BoundaryData: det(R) = {det!r} differs from 1 by more than 1e-12")
        if r[0, 1] == 0.0:
            raise DomainError("BoundaryData: R_{1,2} must be nonzero")
        if not (0.0 <= self.phi < math.pi):
            raise DomainError("BoundaryData: phi must lie in [0, pi)")

    @property
    def r11(self) -> float:
        return self.r[0][0]

    @property
    def r12(self) -> float:
        return self.r[0][1]

    @property
    def r21(self) -> float:
        return self.r[1][0]

    @property
    def r22(self) -> float:
        return self.r[1][1]

    @property
    def phase(self) -> complex:
        return complex(math.cos(self.phi), math.sin(self.phi))

    def matrix(self) -> np.ndarray:
        return np.array(self.r, dtype=float)


@dataclass(frozen=True)
class CouplingConstants:
    """Scalar quantities derived from a potential / boundary-data pair."""

    m_v: float                 # mass of the negative part of V
    n_r: float                 # (|R11| + |R22| + 2) / |R12|
    k_r0: float                # largest root of the limiting det polynomial
    k_r_max: float             # max(k_r0, sqrt(1 + n_r))
    lower_bound_line: float    # -M_V (1 + M_V)
    lower_bound_interval: float  # -(1 + M_V + N_R)
    _p_coeffs: tuple           # (linear, constant) term of p(k) = k^2 - b k + c

    def p_r0(self, k):
        """Limiting value of det K as the interval grows: k^2 - b k + c."""
        b, c = self._p_coeffs
        k = np.asarray(k, dtype=float)
        out = k * k - b * k + c
        return float(out) if out.ndim == 0 else out


def negative_part_mass(potential: Potential, abs_tol: float = 1e-10) -> float:
    """Integral of the negative part V_- = (|V| - V)/2 over the support."""
    a = potential.support_halfwidth

    def vminus(x):
        v = potential(x)
        return 0.5 * (np.abs(v) - v)

    val, _ = integrate(vminus, -a, a, breakpoints=potential.breakpoints, abs_tol=abs_tol)
    return max(0.0, val)


def bc_constants(potential: Potential, bc: BoundaryData) -> CouplingConstants:
    """All derived constants for the pair (V, (phi, R))."""
    m_v = negative_part_mass(potential)
    r11, r12, r21, r22 = bc.r11, bc.r12, bc.r21, bc.r22
    n_r = (abs(r11) + abs(r22) + 2.0) / abs(r12)
    b = (r11 + r22) / r12
    c = r21 / r12
    # Largest root; the discriminant ((R11-R22)^2 + 4)/R12^2 is always positive.
    k_r0 = 0.5 * (b + math.sqrt((r11 - r22) ** 2 + 4.0) / abs(r12))
    k_r_max = max(k_r0, math.sqrt(1.0 + n_r))
    return CouplingConstants(
        m_v=m_v,
        n_r=n_r,
        k_r0=k_r0,
        k_r_max=k_r_max,
        lower_bound_line=-m_v * (1.0 + m_v),
        lower_bound_interval=-(1.0 + m_v + n_r),
        _p_coeffs=(b, c),
    )


def factorize(potential: Potential, x):
    """Split V = u*v with u = sgn(V) sqrt(|V|) and v = sqrt(|V|) >= 0."""
    v = potential(x)
    root = np.sqrt(np.abs(v))
    u = np.sign(v) * root
    if np.isscalar(x):
        return float(u), float(root)
    return u, root
