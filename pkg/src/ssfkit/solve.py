"""Propagation of -y'' + V y = z y: transfer matrices, the boundary-value
basis, and full-line scattering data.

Between potential breakpoints the system is integrated by an adaptive
Dormand-Prince 5(4) kernel (compiled when available); on exterior
segments, where V vanishes identically, the exact constant-coefficient
propagator is used.  States grow like exp(k|x|) for z << 0, so matrices
are carried as (mantissa, log_scale) pairs and the propagation is
restarted from the identity whenever the state norm passes a chunk
limit: the certified determinant is the product of the (well
conditioned) chunk determinants.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._slabs import IDENTITY, apply_vec, compose, det2, slab_transfer
from .errors import BranchAmbiguity, DirichletEigenvalueHit, DomainError, IntegrationError
from .model import Potential, negative_part_mass
from .quadrature import gl_nodes

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-12

# Chunk growth limit: det of a chunk matrix loses ~eps * limit^2 to
# cancellation, so 1e2 keeps certified determinants at the 1e-12 level.
_CHUNK_NORM = 1e2
_STATE_RENORM = 1e8

_STATUS_NORM_STOP = 1
_STATUS_UNDERFLOW = 2


@dataclass(frozen=True)
class TransferMatrix:
    """Map (y(-ell), y'(-ell)) -> (y(ell), y'(ell)), determinant one.

    The true matrix is ``mantissa * exp(log_scale)``; ``det`` is the
    certified determinant accumulated chunk-by-chunk (the determinant of
    the assembled mantissa cancels catastrophically once the scale is
    large, the chunk product does not).
    """

    z: float
    ell: float
    mantissa: tuple
    log_scale: float
    det: float

    @property
    def entries(self) -> np.ndarray:
        m = max(abs(v) for v in self.mantissa)
        if self.log_scale + math.log(max(m, 1e-300)) > 700.0:
            raise OverflowError(
                "transfer matrix entries overflow double precision; "
                "use .mantissa and .log_scale"
            )
        s = math.exp(self.log_scale)
        a, b, c, d = self.mantissa
        return np.array([[a * s, b * s], [c * s, d * s]])


@dataclass(frozen=True)
class BasisBoundaryValues:
    """Derivative traces and norms of the boundary-value basis.

    psi1 vanishes at -ell and equals 1 at +ell; psi2 the reverse.  The
    interior Wronskian W(psi1, psi2) equals -1/T12 identically.
    """

    z: float
    ell: float
    dpsi1_left: float
    dpsi1_right: float
    dpsi2_left: float
    dpsi2_right: float
    norms: tuple | None  # (||psi1||, ||psi2||) when requested


@dataclass(frozen=True)
class ScatteringDatum:
    k: float
    t: complex
    r: complex
    phase: float  # continuous branch of arg t, pinned to ~0 at large k


def _rk_segment(seg, z, rtol, atol):
    """Integrate one smooth segment from the identity, chunking on growth.

    Returns (mantissa, log_scale, det) for the segment transfer matrix.
    """
    M, L, D = IDENTITY, 0.0, 1.0
    x = seg.lo
    y1, p1, y2, p2 = 1.0, 0.0, 0.0, 1.0
    while True:
        x, y1, p1, y2, p2, status = kernels.propagate_linear(
            seg.kind, seg.params, z, x, seg.hi, y1, p1, y2, p2, rtol, atol, _CHUNK_NORM
        )
        if status == _STATUS_UNDERFLOW:
            raise IntegrationError(
                f"step underflow at x={x} (z={z}) while integrating segment {seg}"
            )
        chunk = (y1, y2, p1, p2)
        M, L = compose(chunk, 0.0, M, L)
        D *= det2(chunk)
        if status == 0:
            return M, L, D
        y1, p1, y2, p2 = 1.0, 0.0, 0.0, 1.0


def propagate_matrix(potential: Potential, z: float, lo: float, hi: float,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """Scaled transfer matrix of the equation over [lo, hi] (forward).

    Returns (mantissa, log_scale, certified_det).
    """
    M, L, D = IDENTITY, 0.0, 1.0
    for seg in potential.segments(lo, hi):
        if seg.exterior:
            m, l = slab_transfer(0.0, z, seg.hi - seg.lo)
            M, L = compose(m, l, M, L)
        else:
            m, l, d = _rk_segment(seg, z, rtol, atol)
            M, L = compose(m, l, M, L)
            D *= d
    return M, L, D


def transfer_matrix(potential: Potential, z: float, ell: float,
                    rtol: float = DEFAULT_RTOL) -> TransferMatrix:
    """Fundamental-solution transfer matrix over [-ell, ell]."""
    if ell <= 0:
        raise DomainError("transfer_matrix: ell must be positive")
    M, L, D = propagate_matrix(potential, z, -ell, ell, rtol)
    return TransferMatrix(z=float(z), ell=float(ell), mantissa=M, log_scale=L, det=D)


def dirichlet_characteristic(tm: TransferMatrix) -> float:
    """Scaled Dirichlet characteristic function: the (1,2) mantissa entry.

    Vanishes exactly on the Dirichlet spectrum; the positive factor
    exp(log_scale) is dropped, so signs and zeros are preserved.
    """
    return tm.mantissa[1]


def _check_not_dirichlet(tm: TransferMatrix):
    scale = max(abs(v) for v in tm.mantissa)
    if abs(tm.mantissa[1]) < 1e-12 * max(scale, 1e-300):
        raise DirichletEigenvalueHit(
            f"z={tm.z} is a Dirichlet eigenvalue of the interval operator (ell={tm.ell})"
        )


class _Marcher:
    """Single-solution propagation with state renormalization.

    Carries (y, y', log); exterior segments advance by the exact free
    slab, interior ones by the RK kernel.
    """

    def __init__(self, potential, z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
        self.potential = potential
        self.z = z
        self.rtol = rtol
        self.atol = atol

    def run(self, x_from, x_to, y0, p0, stops=()):
        """March from x_from to x_to, recording states at ``stops``.

        ``stops`` must be sorted in the march direction.  Returns
        (records, final) where records is a list of (x, y, p, log) and
        final is (y, p, log) at x_to.
        """
        forward = x_to >= x_from
        segs = self.potential.segments(min(x_from, x_to), max(x_from, x_to))
        if not forward:
            segs = segs[::-1]
        y, p, lg = float(y0), float(p0), 0.0
        records = []
        stop_iter = iter(stops)
        next_stop = next(stop_iter, None)
        x = x_from
        for seg in segs:
            seg_end = seg.hi if forward else seg.lo
            while next_stop is not None and (
                (forward and next_stop <= seg_end + 1e-15) or
                (not forward and next_stop >= seg_end - 1e-15)
            ):
                y, p, lg = self._advance(seg, x, next_stop, y, p, lg)
                x = next_stop
                records.append((x, y, p, lg))
                next_stop = next(stop_iter, None)
            y, p, lg = self._advance(seg, x, seg_end, y, p, lg)
            x = seg_end
        if next_stop is not None:
            raise ValueError("stops extend beyond the march interval")
        return records, (y, p, lg)

    def _advance(self, seg, x0, x1, y, p, lg):
        if x1 == x0:
            return y, p, lg
        if seg.exterior or seg.kind == 0:
            v0 = seg.params[0] if not seg.exterior else 0.0
            m, l = slab_transfer(v0, self.z, x1 - x0)
            y, p = apply_vec(m, y, p)
            lg += l
        else:
            while True:
                x0, y, p, _, _, status = kernels.propagate_linear(
                    seg.kind, seg.params, self.z, x0, x1, y, p, 0.0, 0.0,
                    self.rtol, self.atol, _STATE_RENORM,
                )
                if status == _STATUS_UNDERFLOW:
                    raise IntegrationError(f"step underflow at x={x0} (z={self.z})")
                if status != _STATUS_NORM_STOP:
                    break
                s = max(abs(y), abs(p))
                y, p, lg = y / s, p / s, lg + math.log(s)
        s = max(abs(y), abs(p))
        if s > _STATE_RENORM or 0.0 < s < 1.0 / _STATE_RENORM:
            y, p, lg = y / s, p / s, lg + math.log(s)
        return y, p, lg

    def run_exact_slabs(self, x_from, x_to, y0, p0):
        """March using exact slabs for *all* constant pieces (no RK).

        Only valid when every segment is constant; used by the Pruefer
        counting path for piecewise-constant potentials.
        """
        y, p, lg = float(y0), float(p0), 0.0
        forward = x_to >= x_from
        segs = self.potential.segments(min(x_from, x_to), max(x_from, x_to))
        if not forward:
            segs = segs[::-1]
        for seg in segs:
            if seg.kind != 0:
                raise ValueError("run_exact_slabs needs a piecewise-constant potential")
            d = (seg.hi - seg.lo) * (1.0 if forward else -1.0)
            m, l = slab_transfer(seg.params[0], self.z, d)
            y, p = apply_vec(m, y, p)
            lg += l
        return y, p, lg


def _sample_grid(potential, z, ell):
    """Composite GL panels resolving both V and the solution scale."""
    a = min(potential.support_halfwidth, ell)
    rate = max(1.0, math.sqrt(abs(z) + potential.bound))
    h = 4.0 / rate
    cuts = [-ell]
    if ell > a:
        n_ext = max(1, math.ceil((ell - a) / h))
        cuts += list(np.linspace(-ell, -a, n_ext + 1)[1:])
    interior = sorted({-a, a, *(b for b in potential.breakpoints if -a < b < a)})
    for lo, hi in zip(interior[:-1], interior[1:]):
        n_int = max(2, math.ceil((hi - lo) / h))
        cuts += list(np.linspace(lo, hi, n_int + 1)[1:])
    if ell > a:
        n_ext = max(1, math.ceil((ell - a) / h))
        cuts += list(np.linspace(a, ell, n_ext + 1)[1:])
    cuts = np.array(sorted(set(np.round(cuts, 15))))
    nodes, weights = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = gl_nodes(lo, hi, 32)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def basis_samples(potential: Potential, z: float, ell: float, xs,
                  rtol: float = DEFAULT_RTOL):
    """Values and derivatives of (psi1, psi2) at sorted points xs.

    psi1 is built from the forward column with data (0,1) at -ell,
    psi2 from the backward column with data (0,-1) at +ell; each is
    integrated in its growth direction and normalized at the far end,
    which keeps the samples accurate where the functions are small.
    """
    xs = np.asarray(xs, dtype=float)
    marcher = _Marcher(potential, z, rtol)
    rec_f, (yf, pf, lf) = marcher.run(-ell, ell, 0.0, 1.0, stops=xs)
    if yf == 0.0:
        raise DirichletEigenvalueHit(f"z={z} is a Dirichlet eigenvalue (ell={ell})")
    psi1 = np.array([y * math.exp(lg - lf) / yf for _, y, _, lg in rec_f])
    dpsi1 = np.array([p * math.exp(lg - lf) / yf for _, _, p, lg in rec_f])
    rec_b, (yb, pb, lb) = marcher.run(ell, -ell, 0.0, -1.0, stops=xs[::-1])
    if yb == 0.0:
        raise DirichletEigenvalueHit(f"z={z} is a Dirichlet eigenvalue (ell={ell})")
    psi2 = np.array([y * math.exp(lg - lb) / yb for _, y, _, lg in rec_b])[::-1]
    dpsi2 = np.array([p * math.exp(lg - lb) / yb for _, _, p, lg in rec_b])[::-1]
    return psi1, dpsi1, psi2, dpsi2


def basis_solutions(potential: Potential, z: float, ell: float,
                    with_norms: bool = True,
                    rtol: float = DEFAULT_RTOL) -> BasisBoundaryValues:
    """Boundary derivative traces (and optionally norms) of the basis.

    The four traces come from transfer-matrix entry ratios; the right
    traces of the complementary solutions use det T = 1, which avoids
    the catastrophic cancellation of forming T21 - T11 T22 / T12.
    """
    tm = transfer_matrix(potential, z, ell, rtol)
    _check_not_dirichlet(tm)
    m11, m12, m21, m22 = tm.mantissa
    inv_t12 = math.exp(-tm.log_scale) / m12 if tm.log_scale < 700 else 0.0
    vals = dict(
        dpsi1_left=inv_t12,
        dpsi1_right=m22 / m12,
        dpsi2_left=-m11 / m12,
        dpsi2_right=-inv_t12,
    )
    norms = None
    if with_norms:
        xs, ws = _sample_grid(potential, z, ell)
        psi1, _, psi2, _ = basis_samples(potential, z, ell, xs, rtol)
        norms = (
            math.sqrt(float(ws @ (psi1 * psi1))),
            math.sqrt(float(ws @ (psi2 * psi2))),
        )
    return BasisBoundaryValues(z=float(z), ell=float(ell), norms=norms, **vals)


def transmission(potential: Potential, k: float, rtol: float = DEFAULT_RTOL):
    """Transmission and reflection coefficients at wavenumber k > 0.

    A left-incident plane wave is matched through the support: the
    backward-propagated outgoing wave yields 1/t and r/t; the scale
    factor of the transfer matrix only affects |t|, never the phase.
    """
    if k <= 0:
        raise DomainError("transmission: k must be positive")
    a = potential.support_halfwidth
    z = k * k
    M, L, _ = propagate_matrix(potential, z, -a, a, rtol)
    m11, m12, m21, m22 = M
    # Inverse via det(true) = 1: T^{-1} = adj(mantissa) * exp(+L).
    u = cmath.exp(1j * k * a)
    psi = m22 * u - m12 * 1j * k * u
    dpsi = -m21 * u + m11 * 1j * k * u
    a_coef = 0.5 * (psi + dpsi / (1j * k)) * u          # (1/t) e^{-L}
    b_coef = 0.5 * (psi - dpsi / (1j * k)) * u.conjugate()  # (r/t) e^{-L}
    t = cmath.exp(-L) / a_coef if L < 700 else 0.0j
    r = b_coef / a_coef
    return t, r


def _principal(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def scattering_phases(potential: Potential, ks, rtol: float = DEFAULT_RTOL,
                      max_depth: int = 40):
    """Continuous transmission phase on a k-grid, continued downward.

    The branch is fixed in the Born regime at the top of the grid where
    arg t is already within (-pi/2, pi/2); walking down, any jump larger
    than pi/2 triggers midpoint refinement (BranchAmbiguity if a pair of
    samples cannot be reconciled within ``max_depth`` bisections).
    """
    ks = sorted(float(k) for k in ks)
    if not ks or ks[0] <= 0:
        raise DomainError("scattering_phases: need a nonempty grid of positive k")
    cache: dict[float, tuple] = {}

    def tr(k):
        if k not in cache:
            cache[k] = transmission(potential, k, rtol)
        return cache[k]

    def continued(k_hi, phase_hi, k_lo, depth=0):
        raw = cmath.phase(tr(k_lo)[0])
        delta = _principal(raw - phase_hi)
        if abs(delta) <= 0.5 * math.pi:
            return phase_hi + delta
        if depth >= max_depth:
            raise BranchAmbiguity(
                f"phase jump {delta:.3f} between k={k_hi} and k={k_lo} "
                "not resolvable by grid refinement"
            )
        mid = 0.5 * (k_hi + k_lo)
        phase_mid = continued(k_hi, phase_hi, mid, depth + 1)
        return continued(mid, phase_mid, k_lo, depth + 1)

    top = ks[-1]
    phase = _principal(cmath.phase(tr(top)[0]))
    result = {top: phase}
    for k_lo in reversed(ks[:-1]):
        k_hi = min(result)
        phase = continued(k_hi, result[k_hi], k_lo)
        result[k_lo] = phase
    out = []
    for k in ks:
        t, r = tr(k)
        out.append(ScatteringDatum(k=k, t=t, r=r, phase=result[k]))
    return out


def born_kmax(potential: Potential) -> float:
    """Top of the phase-continuation grid, deep in the Born regime."""
    return 50.0 * (1.0 + math.sqrt(negative_part_mass(potential)))


def jost_transmission(potential: Potential, k: float,
                      rtol: float = DEFAULT_RTOL) -> ScatteringDatum:
    """Scattering datum at one wavenumber with the continued phase branch."""
    kmax = max(born_kmax(potential), 2.0 * k)
    n = max(8, int(40 * (math.log(kmax / k) + 1.0)))
    grid = np.geomspace(k, kmax, n)
    return scattering_phases(potential, grid, rtol)[0]
