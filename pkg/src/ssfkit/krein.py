"""Krein coefficient matrix, its free closed form, and Green kernels for
the Dirichlet and coupled interval operators.

The coupled resolvent kernel is built two independent ways: directly, by
imposing the coupled endpoint relation on a corrected Dirichlet kernel,
and through the Krein coefficient matrix as Dirichlet kernel plus an
explicit rank-two term.  The Krein path is the exported default; the
direct path backs the identity self-test.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DirichletEigenvalueHit, DomainError, KreinSingular
from .model import BoundaryData, Potential
from .quadrature import gl_nodes
from .solve import DEFAULT_RTOL, _Marcher, basis_solutions, transfer_matrix


@dataclass(frozen=True)
class KreinMatrix:
    """Coefficient matrix of the rank-two resolvent correction.

    Hermitian for real z (the two interior derivative traces entering
    the off-diagonal are +-1/T12), invertible away from the coupled
    spectrum.  ``p_r0`` carries the large-interval determinant limit for
    free matrices, None otherwise.
    """

    z: float
    ell: float
    entries: np.ndarray  # 2x2 complex
    det: complex
    p_r0: float | None = None

    def inverse(self) -> np.ndarray:
        scale = max(1.0, float(np.max(np.abs(self.entries))))
        if abs(self.det) < 1e-12 * scale * scale:
            raise KreinSingular(
                f"det K = {self.det:.3e} at z={self.z}: z sits on the coupled spectrum"
            )
        (a, b), (c, d) = self.entries
        return np.array([[d, -b], [-c, a]], dtype=complex) / self.det


def krein_matrix(potential: Potential, bc: BoundaryData, z: float, ell: float,
                 rtol: float = DEFAULT_RTOL) -> KreinMatrix:
    """Coefficient matrix assembled from the boundary-value basis traces."""
    bv = basis_solutions(potential, z, ell, with_norms=False, rtol=rtol)
    e = bc.phase
    r12 = bc.r12
    k11 = bc.r22 / r12 - bv.dpsi1_right
    k12 = -e / r12 - bv.dpsi2_right
    k21 = -e.conjugate() / r12 + bv.dpsi1_left
    k22 = bc.r11 / r12 + bv.dpsi2_left
    entries = np.array([[k11, k12], [k21, k22]], dtype=complex)
    det = k11 * k22 - k12 * k21
    return KreinMatrix(z=float(z), ell=float(ell), entries=entries, det=det)


def _coth_plus_tanh(u: float) -> float:
    # coth(u) + tanh(u) = 2 coth(2u)
    if u > 20.0:
        return 2.0 * (1.0 + 2.0 * math.exp(-4.0 * u))
    return 2.0 / math.tanh(2.0 * u)


def _tanh_minus_coth(u: float) -> float:
    # tanh(u) - coth(u) = -2 / sinh(2u)
    if u > 20.0:
        return -4.0 * math.exp(-2.0 * u)
    return -2.0 / math.sinh(2.0 * u)


def free_krein_entries(bc: BoundaryData, k: float, ell: float) -> np.ndarray:
    """Closed-form free coefficient matrix entries at z = -k^2, any k > 0.

    The formula itself only needs -k^2 off the free Dirichlet spectrum
    (automatic for k > 0); invertibility at a *fixed* interval length is
    a separate question the caller must settle via the determinant.
    """
    u = k * ell
    diag = 0.5 * k * _coth_plus_tanh(u)
    off = 0.5 * k * _tanh_minus_coth(u)
    e = bc.phase
    r12 = bc.r12
    k11 = bc.r22 / r12 - diag
    k12 = -e / r12 - off
    k21 = -e.conjugate() / r12 - off
    k22 = bc.r11 / r12 - diag
    return np.array([[k11, k12], [k21, k22]], dtype=complex)


def krein_matrix_free(bc: BoundaryData, k: float, ell: float) -> KreinMatrix:
    """Closed-form coefficient matrix of the free operators at z = -k^2.

    Valid for k > sqrt(1 + N_R), which keeps -k^2 below the uniform
    lower bound of the free coupled operator for every interval length.
    """
    n_r = (abs(bc.r11) + abs(bc.r22) + 2.0) / abs(bc.r12)
    if k <= math.sqrt(1.0 + n_r):
        raise DomainError(
            f"krein_matrix_free: k={k} must exceed sqrt(1 + N_R) = {math.sqrt(1 + n_r):.6f}"
        )
    entries = free_krein_entries(bc, k, ell)
    det = entries[0, 0] * entries[1, 1] - entries[0, 1] * entries[1, 0]
    b = (bc.r11 + bc.r22) / bc.r12
    c = bc.r21 / bc.r12
    return KreinMatrix(z=-k * k, ell=float(ell), entries=entries, det=det,
                       p_r0=k * k - b * k + c)


class _TwoSidedSolutions:
    """The one-sided Dirichlet solutions y- and y+ with scaled sampling.

    y- has data (0, 1) at -ell, y+ has data (0, -1) at +ell; each is
    marched in its own growth direction.  Their (constant) Wronskian is
    evaluated at the middle of the interval.
    """

    def __init__(self, potential, z, ell, rtol=DEFAULT_RTOL):
        self.potential = potential
        self.z = float(z)
        self.ell = float(ell)
        self.marcher = _Marcher(potential, z, rtol)
        recs, self.minus_end = self.marcher.run(-ell, ell, 0.0, 1.0, stops=(0.0,))
        _, ym, pm, lm = recs[0]
        recs, self.plus_end = self.marcher.run(ell, -ell, 0.0, -1.0, stops=(0.0,))
        _, yp, pp, lp = recs[0]
        wm = ym * pp - pm * yp
        wl = lm + lp
        scale = max(abs(ym * pp), abs(pm * yp), 1e-300)
        if abs(wm) < 1e-12 * scale:
            raise DirichletEigenvalueHit(
                f"z={z} is numerically a Dirichlet eigenvalue (ell={ell})"
            )
        self.w_mant = wm
        self.w_log = wl

    def minus_at(self, xs):
        """(values, dvalues, logs) of y- at sorted xs."""
        recs, _ = self.marcher.run(-self.ell, self.ell, 0.0, 1.0, stops=xs)
        return (np.array([r[1] for r in recs]),
                np.array([r[2] for r in recs]),
                np.array([r[3] for r in recs]))

    def plus_at(self, xs):
        """(values, dvalues, logs) of y+ at sorted xs."""
        recs, _ = self.marcher.run(self.ell, -self.ell, 0.0, -1.0, stops=xs[::-1])
        return (np.array([r[1] for r in recs])[::-1],
                np.array([r[2] for r in recs])[::-1],
                np.array([r[3] for r in recs])[::-1])

    def psi_normalizers(self):
        """Scaled end values y-(ell) and y+(-ell) (both equal T12)."""
        ym, _, lm = self.minus_end
        yp, _, lp = self.plus_end
        return (ym, lm), (yp, lp)


@dataclass
class GreenKernel:
    """Integral kernel of (H - z)^{-1} on the interval.

    ``kind`` is 'dirichlet' or 'coupled'; conjugate-symmetric at real z
    and real symmetric for Dirichlet or phi = 0.
    """

    z: float
    ell: float
    kind: str
    _sol: _TwoSidedSolutions
    _rank2: tuple | None = None  # (coeff 2x2 complex, normalizers) for coupled

    def _g_dirichlet(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        union = np.unique(np.concatenate([xs, ys]))
        vm, _, lm = self._sol.minus_at(union)
        vp, _, lp = self._sol.plus_at(union)
        ix = np.searchsorted(union, xs)
        iy = np.searchsorted(union, ys)
        x_lt = np.minimum.outer(ix, iy)
        x_gt = np.maximum.outer(ix, iy)
        mant = -vm[x_lt] * vp[x_gt] / self._sol.w_mant
        logs = lm[x_lt] + lp[x_gt] - self._sol.w_log
        return mant * np.exp(logs)

    def _g_dirichlet_dx(self, xs, ys):
        """d/dx of the Dirichlet kernel (x != y; ties use the x >= y branch)."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        union = np.unique(np.concatenate([xs, ys]))
        vm, dvm, lm = self._sol.minus_at(union)
        vp, dvp, lp = self._sol.plus_at(union)
        ix = np.searchsorted(union, xs)
        iy = np.searchsorted(union, ys)
        right = np.greater_equal.outer(ix, iy)  # x >= y
        # x >= y:  dG/dx = -y-(y) y+'(x) / W ;  x < y:  dG/dx = -y-'(x) y+(y) / W
        mant = np.where(
            right,
            -vm[iy][None, :] * dvp[ix][:, None],
            -dvm[ix][:, None] * vp[iy][None, :],
        ) / self._sol.w_mant
        logs = np.where(
            right,
            lm[iy][None, :] + lp[ix][:, None],
            lm[ix][:, None] + lp[iy][None, :],
        ) - self._sol.w_log
        return mant * np.exp(logs)

    def _psi_at(self, xs, derivative=False):
        """psi1, psi2 samples (normalized one-sided solutions)."""
        (ym, lm), (yp, lp) = self._sol.psi_normalizers()
        vm, dvm, llm = self._sol.minus_at(xs)
        vp, dvp, llp = self._sol.plus_at(xs)
        if derivative:
            return dvm * np.exp(llm - lm) / ym, dvp * np.exp(llp - lp) / yp
        psi1 = vm * np.exp(llm - lm) / ym
        psi2 = vp * np.exp(llp - lp) / yp
        return psi1, psi2

    def on_grid(self, xs, ys=None) -> np.ndarray:
        """Kernel matrix G(xs[i], ys[j]); ys defaults to xs."""
        ys = xs if ys is None else ys
        g = self._g_dirichlet(xs, ys).astype(complex)
        if self._rank2 is not None:
            coeff = self._rank2
            p1x, p2x = self._psi_at(np.asarray(xs, dtype=float))
            p1y, p2y = self._psi_at(np.asarray(ys, dtype=float))
            g = g + (coeff[0, 0] * np.outer(p1x, p1y)
                     + coeff[0, 1] * np.outer(p1x, p2y)
                     + coeff[1, 0] * np.outer(p2x, p1y)
                     + coeff[1, 1] * np.outer(p2x, p2y))
        return g

    def dx_on_grid(self, xs, ys=None) -> np.ndarray:
        """d/dx of the kernel on a grid (one-sided x >= y on the diagonal)."""
        ys = xs if ys is None else ys
        g = self._g_dirichlet_dx(xs, ys).astype(complex)
        if self._rank2 is not None:
            coeff = self._rank2
            d1x, d2x = self._psi_at(np.asarray(xs, dtype=float), derivative=True)
            p1y, p2y = self._psi_at(np.asarray(ys, dtype=float))
            g = g + (coeff[0, 0] * np.outer(d1x, p1y)
                     + coeff[0, 1] * np.outer(d1x, p2y)
                     + coeff[1, 0] * np.outer(d2x, p1y)
                     + coeff[1, 1] * np.outer(d2x, p2y))
        return g

    def __call__(self, x: float, y: float) -> complex:
        return complex(self.on_grid(np.array([x]), np.array([y]))[0, 0])


def green_dirichlet(potential: Potential, z: float, ell: float,
                    rtol: float = DEFAULT_RTOL) -> GreenKernel:
    """Dirichlet resolvent kernel G(x,y) = -y-(x<) y+(x>) / W(y-, y+)."""
    sol = _TwoSidedSolutions(potential, z, ell, rtol)
    return GreenKernel(z=float(z), ell=float(ell), kind="dirichlet", _sol=sol)


def _coupled_coeff_krein(potential, bc, z, ell, rtol):
    km = krein_matrix(potential, bc, z, ell, rtol)
    return -km.inverse(), km


def _coupled_coeff_direct(potential, bc, z, ell, rtol):
    """Rank-two coefficients from direct endpoint matching.

    For a source point y, the corrected kernel g = G_D(.,y) + a psi1 +
    b psi2 must satisfy the coupled endpoint relation.  Since G_D(.,y)
    vanishes at both endpoints with derivative traces
    d/dx G_D(+l, y) = -psi1(y) and d/dx G_D(-l, y) = +psi2(y), the two
    relation rows read M [a, b]^T = [e R12 psi2(y), psi1(y) + e R22 psi2(y)]
    with e = exp(i phi); the right side is linear in (psi1(y), psi2(y)),
    so (a, b) = C (psi1(y), psi2(y)) for a fixed 2x2 matrix C.
    """
    bv = basis_solutions(potential, z, ell, with_norms=False, rtol=rtol)
    e = bc.phase
    m = np.array(
        [
            [1.0 - e * bc.r12 * bv.dpsi1_left, -e * (bc.r11 + bc.r12 * bv.dpsi2_left)],
            [bv.dpsi1_right - e * bc.r22 * bv.dpsi1_left,
             bv.dpsi2_right - e * (bc.r21 + bc.r22 * bv.dpsi2_left)],
        ],
        dtype=complex,
    )
    rhs = np.array(
        [
            [0.0 * 1j, e * bc.r12],
            [1.0 + 0.0j, e * bc.r22],
        ],
        dtype=complex,
    )
    return np.linalg.solve(m, rhs)


def green_coupled(potential: Potential, bc: BoundaryData, z: float, ell: float,
                  method: str = "krein", rtol: float = DEFAULT_RTOL) -> GreenKernel:
    """Coupled resolvent kernel; ``method`` picks the construction path."""
    sol = _TwoSidedSolutions(potential, z, ell, rtol)
    if method == "krein":
        coeff, _ = _coupled_coeff_krein(potential, bc, z, ell, rtol)
    elif method == "direct":
        coeff = _coupled_coeff_direct(potential, bc, z, ell, rtol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GreenKernel(z=float(z), ell=float(ell), kind="coupled", _sol=sol,
                       _rank2=np.asarray(coeff, dtype=complex))


def _default_probes(ell):
    return [
        lambda x: np.ones_like(x),
        lambda x: x / ell,
        lambda x: np.exp(-np.clip(x, -ell, ell) ** 2),
    ]


def krein_identity_residual(potential: Potential, bc: BoundaryData, z: float,
                            ell: float, probes=None,
                            rtol: float = DEFAULT_RTOL) -> float:
    """Consistency self-test of the resolvent identity.

    Applies (G_direct - G_dirichlet - P) to each probe and returns the
    largest ratio ||residual|| / ||probe||; the three kernels are the
    direct-matching coupled kernel, the Dirichlet kernel, and the
    explicit rank-two correction, so a nonzero value isolates an error
    in one of the two construction paths.
    """
    if probes is None:
        probes = _default_probes(ell)
    g_direct = green_coupled(potential, bc, z, ell, method="direct", rtol=rtol)
    g_dir = green_dirichlet(potential, z, ell, rtol=rtol)
    km = krein_matrix(potential, bc, z, ell, rtol=rtol)
    p_coeff = -km.inverse()

    # Output grid: composite GL nodes so the L2 norm is a quadrature.
    out_panels = np.linspace(-ell, ell, 9)
    xs, wx = [], []
    for lo, hi in zip(out_panels[:-1], out_panels[1:]):
        x, w = gl_nodes(lo, hi, 8)
        xs.append(x)
        wx.append(w)
    xs = np.concatenate(xs)
    wx = np.concatenate(wx)

    # Source panels split at every output point and breakpoint, so the
    # diagonal kink of each kernel always sits on a panel boundary.
    cuts = np.unique(np.concatenate([
        xs, np.array([-ell, ell]),
        np.array([b for b in potential.breakpoints if -ell < b < ell], dtype=float),
    ]))
    ys, wy = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        y, w = gl_nodes(lo, hi, 6)
        ys.append(y)
        wy.append(w)
    ys = np.concatenate(ys)
    wy = np.concatenate(wy)

    gd_mat = g_dir.on_grid(xs, ys)
    gc_mat = g_direct.on_grid(xs, ys)
    p1x, p2x = g_direct._psi_at(xs)
    p1y, p2y = g_direct._psi_at(ys)
    p_mat = (p_coeff[0, 0] * np.outer(p1x, p1y) + p_coeff[0, 1] * np.outer(p1x, p2y)
             + p_coeff[1, 0] * np.outer(p2x, p1y) + p_coeff[1, 1] * np.outer(p2x, p2y))
    diff = gc_mat - gd_mat - p_mat

    worst = 0.0
    for f in probes:
        fy = np.asarray(f(ys), dtype=complex)
        r = diff @ (wy * fy)
        nr = math.sqrt(float(np.real(np.conj(r) @ (wx * r))))
        nf = math.sqrt(float(np.real(np.conj(fy) @ (wy * fy))))
        worst = max(worst, nr / nf)
    return worst
