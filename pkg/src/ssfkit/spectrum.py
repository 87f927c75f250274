"""Eigenvalues of the interval operators and bound states on the line.

Dirichlet eigenvalues are located by bisection on the Pruefer phase,
which is monotone in the spectral parameter and counts zeros exactly, so
the returned list is certified complete up to the horizon.  Coupled
eigenvalues are roots of the real characteristic function
F(lambda) = tr(T(lambda)^{-1} R) - 2 cos(phi), bracketed on a scan grid
tied to the local free-spectrum spacing; tangential touches (possible
for phi = 0) are detected and assigned multiplicity two.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._backend import kernels
from ._slabs import prufer_slab_advance
from .errors import HorizonExceeded, IntegrationError, ScanResolutionError
from .model import BoundaryData, Potential, negative_part_mass
from .solve import DEFAULT_ATOL, DEFAULT_RTOL, _Marcher, transfer_matrix


@dataclass(frozen=True)
class EigenvalueList:
    """Sorted eigenvalues with multiplicities below a completeness horizon."""

    values: tuple
    multiplicities: tuple
    lambda_max: float
    kind: str

    def expanded(self) -> np.ndarray:
        """Values repeated according to multiplicity."""
        return np.repeat(np.asarray(self.values, dtype=float),
                         np.asarray(self.multiplicities, dtype=int))

    def count(self, lam: float) -> int:
        if lam > self.lambda_max * (1 + 1e-12) + 1e-12:
            raise HorizonExceeded(
                f"counting at lambda={lam} beyond certified horizon {self.lambda_max}"
            )
        return int(np.searchsorted(self.expanded(), lam, side="right"))


def counting(eigs: EigenvalueList, lam: float) -> int:
    """Number of eigenvalues <= lam, with multiplicity."""
    return eigs.count(lam)


def prufer_theta(potential: Potential, z: float, ell: float,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """Pruefer phase at +ell of the solution vanishing at -ell.

    Constant pieces (including the free exterior) advance by the exact
    slab update; smooth pieces integrate the phase ODE.
    """
    theta = 0.0
    for seg in potential.segments(-ell, ell):
        if seg.exterior or seg.kind == 0:
            v0 = 0.0 if seg.exterior else seg.params[0]
            theta = prufer_slab_advance(v0, z, seg.hi - seg.lo, theta)
        else:
            theta, status = kernels.prufer_advance(
                seg.kind, seg.params, z, seg.lo, seg.hi, theta, rtol, atol
            )
            if status != 0:
                raise IntegrationError(f"Pruefer phase integration stalled at z={z}")
    return theta


def _dirichlet_char(potential, ell, rtol):
    def char(lam):
        return transfer_matrix(potential, lam, ell, rtol).mantissa[1]
    return char


def eigenvalues_dirichlet(potential: Potential, ell: float, lambda_max: float,
                          rtol: float = DEFAULT_RTOL) -> EigenvalueList:
    """All Dirichlet eigenvalues up to lambda_max (all simple).

    Completeness: theta(+ell; lambda) is strictly increasing in lambda
    and crosses n*pi exactly at the n-th eigenvalue, so the phase at the
    horizon fixes the count and plain bisection brackets every root; a
    final Brent polish on the transfer-matrix characteristic sharpens
    each eigenvalue to ~1e-12.
    """
    if not math.isfinite(lambda_max):
        raise HorizonExceeded("eigenvalues_dirichlet: lambda_max must be finite")
    m_v = negative_part_mass(potential)
    lam_floor = -m_v * (1.0 + m_v) - 1e-9
    theta_top = prufer_theta(potential, lambda_max, ell, rtol)
    n_eigs = int(math.floor(theta_top / math.pi + 1e-9))
    char = _dirichlet_char(potential, ell, rtol)
    values = []
    lo = lam_floor
    for n in range(1, n_eigs + 1):
        target = n * math.pi
        a, b = lo, lambda_max
        # Bisection on the monotone phase down to a tight bracket.
        while b - a > 1e-6 * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if prufer_theta(potential, mid, ell, rtol) < target:
                a = mid
            else:
                b = mid
        fa, fb = char(a), char(b)
        if fa == 0.0:
            root = a
        elif fb == 0.0:
            root = b
        elif fa * fb < 0.0:
            root = brentq(char, a, b, xtol=1e-13 * max(1.0, abs(b)), rtol=1e-15)
        else:
            # The characteristic did not change sign across the tiny
            # bracket (roundoff plateau); fall back to deeper bisection.
            while b - a > 1e-12 * max(1.0, abs(b)):
                mid = 0.5 * (a + b)
                if prufer_theta(potential, mid, ell, rtol) < target:
                    a = mid
                else:
                    b = mid
            root = 0.5 * (a + b)
        values.append(root)
        lo = root
    return EigenvalueList(values=tuple(values),
                          multiplicities=tuple([1] * len(values)),
                          lambda_max=float(lambda_max), kind="dirichlet")


def coupled_characteristic(potential: Potential, bc: BoundaryData, lam: float,
                           ell: float, rtol: float = DEFAULT_RTOL):
    """F(lambda) = tr(T^{-1} R) - 2 cos(phi), in transfer-matrix mantissa scale.

    Returns (f_scaled, magnitude_scale); f_scaled carries a positive
    lambda-dependent factor exp(-log_scale), so zeros and signs match F.
    """
    tm = transfer_matrix(potential, lam, ell, rtol)
    m11, m12, m21, m22 = tm.mantissa
    r11, r12 = bc.r11, bc.r12
    r21, r22 = bc.r21, bc.r22
    damp = math.exp(-tm.log_scale) if tm.log_scale < 700 else 0.0
    two_cos = 2.0 * math.cos(bc.phi)
    f = m22 * r11 - m12 * r21 - m21 * r12 + m11 * r22 - two_cos * damp
    scale = (abs(m22 * r11) + abs(m12 * r21) + abs(m21 * r12) + abs(m11 * r22)
             + abs(two_cos) * damp + 1e-300)
    return f, scale


def _coupled_scan_grid(ell, lam_floor, lambda_max):
    """Scan points: half the local free Dirichlet gap pi^2 (2n+1)/(2 ell)^2."""
    pts = []
    if lam_floor < 0:
        step = 0.5 * (math.pi / (2.0 * ell)) ** 2
        n_neg = int(math.ceil(-lam_floor / step)) + 1
        pts.extend(np.linspace(lam_floor, 0.0, n_neg))
    top = math.sqrt(max(lambda_max, 0.0))
    if top > 0:
        dk = math.pi / (4.0 * ell)
        n_pos = int(math.ceil(top / dk)) + 1
        ks = np.linspace(0.0, top, n_pos)
        pts.extend((ks[1:] ** 2).tolist())
    grid = np.unique(np.asarray(pts, dtype=float))
    grid[-1] = lambda_max
    return grid


def eigenvalues_coupled(potential: Potential, bc: BoundaryData, ell: float,
                        lambda_max: float,
                        rtol: float = DEFAULT_RTOL) -> EigenvalueList:
    """Eigenvalues of the coupled interval operator up to lambda_max.

    det(T(lambda) - e^{i phi} R) = 0 together with det T = det R = 1
    reduces to the real condition tr(T^{-1} R) = 2 cos(phi); roots are
    bracketed by the scan grid.  A dipping |F| without sign change is
    refined: a hidden pair of simple roots is split, a genuine
    tangential touch is recorded with multiplicity two.
    """
    if not math.isfinite(lambda_max):
        raise HorizonExceeded("eigenvalues_coupled: lambda_max must be finite")
    m_v = negative_part_mass(potential)
    n_r = (abs(bc.r11) + abs(bc.r22) + 2.0) / abs(bc.r12)
    lam_floor = -(1.0 + m_v + n_r) - 1e-6
    grid = _coupled_scan_grid(ell, lam_floor, lambda_max)
    fvals = np.empty_like(grid)
    scales = np.empty_like(grid)
    for i, lam in enumerate(grid):
        fvals[i], scales[i] = coupled_characteristic(potential, bc, lam, ell, rtol)

    def f_only(lam):
        return coupled_characteristic(potential, bc, lam, ell, rtol)[0]

    def f_norm(lam):
        f, s = coupled_characteristic(potential, bc, lam, ell, rtol)
        return abs(f) / s

    duplicate_tol = 1e-10 * max(1.0, abs(lambda_max))
    roots: list[tuple[float, int]] = []

    def add_root(lam, mult):
        # Overlapping refinement windows may re-locate a known root.
        if any(abs(r - lam) < duplicate_tol for r, _ in roots):
            return
        roots.append((lam, mult))

    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = fvals[i], fvals[i + 1]
        if fa == 0.0:
            add_root(a, 1)
            continue
        if fa * fb < 0.0:
            add_root(brentq(f_only, a, b, xtol=1e-13 * max(1.0, abs(b)), rtol=1e-15), 1)
            continue
        # Same-sign cell: a dipping local minimum may hide a tangential
        # double root or a pair of simple roots inside one scan step.
        if not (0 < i < len(grid) - 1):
            continue
        same_sign_window = (fvals[i - 1] * fa > 0.0) and (fa * fb > 0.0)
        na = abs(fa) / scales[i]
        is_local_min = (
            na < 0.05
            and na <= abs(fvals[i - 1]) / scales[i - 1]
            and na <= abs(fb) / scales[i + 1]
        )
        if not (same_sign_window and is_local_min):
            continue
        lo, hi = grid[i - 1], b
        res = minimize_scalar(f_norm, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        lam_star, val = float(res.x), float(res.fun)
        if coupled_characteristic(potential, bc, lam_star, ell, rtol)[0] * fa < 0.0:
            # Minimizer crossed zero: two simple roots straddle it.
            r1 = brentq(f_only, lo, lam_star, xtol=1e-13 * max(1.0, abs(hi)), rtol=1e-15)
            r2 = brentq(f_only, lam_star, hi, xtol=1e-13 * max(1.0, abs(hi)), rtol=1e-15)
            if abs(r2 - r1) < duplicate_tol:
                raise ScanResolutionError(
                    f"pair of characteristic roots unresolvable near lambda={lam_star}"
                )
            add_root(r1, 1)
            add_root(r2, 1)
        elif val < 1e-10:
            add_root(lam_star, 2)

    roots.sort()
    return EigenvalueList(values=tuple(r for r, _ in roots),
                          multiplicities=tuple(m for _, m in roots),
                          lambda_max=float(lambda_max), kind="coupled")


def bound_states_line(potential: Potential, n_scan: int = 2048,
                      rtol: float = DEFAULT_RTOL) -> EigenvalueList:
    """Negative eigenvalues of the full-line operator.

    At z = -kappa^2 the left Jost solution equals exp(kappa x) up to the
    support edge; propagating it across and demanding decay on the right
    gives the matching function W(kappa) = f'(a) + kappa f(a), whose
    zeros are the bound states (all simple in one dimension).
    """
    m_v = negative_part_mass(potential)
    kap_max = math.sqrt(m_v * (1.0 + m_v))
    if kap_max == 0.0:
        return EigenvalueList(values=(), multiplicities=(), lambda_max=0.0,
                              kind="line_bound_states")
    a = potential.support_halfwidth

    def wron(kap):
        marcher = _Marcher(potential, -kap * kap, rtol)
        _, (y, p, _) = marcher.run(-a, a, 1.0, kap)
        return p + kap * y

    kaps = np.linspace(1e-9, kap_max * (1 + 1e-12), n_scan)
    vals = np.array([wron(k) for k in kaps])
    roots = []
    for i in range(len(kaps) - 1):
        if vals[i] == 0.0:
            roots.append(kaps[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(wron, kaps[i], kaps[i + 1], xtol=1e-14, rtol=1e-15))
    lams = sorted(-k * k for k in roots)
    return EigenvalueList(values=tuple(lams),
                          multiplicities=tuple([1] * len(lams)),
                          lambda_max=0.0, kind="line_bound_states")
