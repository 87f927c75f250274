"""Spectral shift functions on the interval and on the line, weighted
pairings against a closed registry of test functions, and the resolvent
trace-formula cross-check.

The finite-interval shift function is the difference of eigenvalue
counting functions of the free and perturbed operators (integer-valued,
zero below both spectra).  The full-line shift function combines the
bound-state count below zero with the continuous transmission phase
above: xi(lambda) = -arg t(sqrt(lambda)) / pi.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, UnboundedPairing
from .model import BoundaryData, Potential, bc_constants, negative_part_mass
from .quadrature import integrate
from .solve import DEFAULT_RTOL, born_kmax, scattering_phases
from .spectrum import (EigenvalueList, bound_states_line, eigenvalues_coupled,
                       eigenvalues_dirichlet)


@dataclass(frozen=True)
class TestFunction:
    """One entry of the closed test-function registry.

    ``support`` is None for the bounded (weighted-only) preset;
    ``breakpoints`` lists kinks the pairing quadrature must respect.
    """

    name: str
    fn: callable
    support: tuple | None
    bound: float
    breakpoints: tuple = ()

    def __call__(self, lam):
        return self.fn(np.asarray(lam, dtype=float))


def bump(a: float, b: float) -> TestFunction:
    """Smooth bump supported on [a, b], peak value 1."""
    if b <= a:
        raise DomainError("bump: need a < b")
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def fn(lam):
        t = (lam - mid) / half
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
        return out

    return TestFunction(f"bump:{a}:{b}", fn, (a, b), 1.0)


def truncated_gaussian(center: float, sigma: float, halfwidth: float) -> TestFunction:
    """Gaussian lowered to zero at center +- halfwidth (continuous, compact)."""
    if sigma <= 0 or halfwidth <= 0:
        raise DomainError("truncated_gaussian: need sigma > 0, halfwidth > 0")
    floor = math.exp(-0.5 * (halfwidth / sigma) ** 2)

    def fn(lam):
        t = (lam - center) / sigma
        out = np.exp(-0.5 * t * t) - floor
        return np.where(np.abs(lam - center) <= halfwidth, np.maximum(out, 0.0), 0.0)

    return TestFunction(
        f"truncated_gaussian:{center}:{sigma}:{halfwidth}",
        fn, (center - halfwidth, center + halfwidth), 1.0 - floor,
    )


def indicator(a: float, b: float) -> TestFunction:
    """Indicator of [a, b]: bounded Borel, boundaryless for Lebesgue measure."""
    if b <= a:
        raise DomainError("indicator: need a < b")

    def fn(lam):
        return np.where((lam >= a) & (lam <= b), 1.0, 0.0)

    return TestFunction(f"indicator:{a}:{b}", fn, (a, b), 1.0, breakpoints=(a, b))


def const_one() -> TestFunction:
    """f = 1: bounded and continuous, weighted pairings only."""
    return TestFunction("const_one", lambda lam: np.ones_like(lam), None, 1.0)


def make_test_function(spec: str) -> TestFunction:
    """Build a registry entry from its CLI form, e.g. ``bump:-1:9``."""
    parts = [p for p in spec.strip().split(":") if p != ""]
    name, args = parts[0], [float(p) for p in parts[1:]]
    makers = {"bump": bump, "truncated_gaussian": truncated_gaussian,
              "indicator": indicator, "const_one": const_one}
    if name not in makers:
        raise DomainError(f"unknown test function {name!r}; registry: {sorted(makers)}")
    try:
        return makers[name](*args)
    except TypeError as exc:
        raise DomainError(f"bad parameters for test function {name!r}: {exc}") from None


@dataclass(frozen=True)
class SsfFinite:
    """Counting-function difference for an interval operator pair."""

    eigs_free: EigenvalueList
    eigs_perturbed: EigenvalueList
    ell: float

    @property
    def lambda_max(self) -> float:
        return min(self.eigs_free.lambda_max, self.eigs_perturbed.lambda_max)

    @property
    def spectrum_floor(self) -> float:
        vals = self.eigs_free.values + self.eigs_perturbed.values
        return min(vals) if vals else 0.0

    def jumps(self) -> np.ndarray:
        return np.unique(np.concatenate([
            self.eigs_free.expanded(), self.eigs_perturbed.expanded()
        ]))

    def __call__(self, lam):
        scalar = np.isscalar(lam)
        lams = np.atleast_1d(np.asarray(lam, dtype=float))
        free = np.searchsorted(self.eigs_free.expanded(), lams, side="right")
        pert = np.searchsorted(self.eigs_perturbed.expanded(), lams, side="right")
        out = (free - pert).astype(int)
        return int(out[0]) if scalar else out


def ssf_finite(potential: Potential, bc: BoundaryData | None, ell: float,
               lambda_max: float, rtol: float = DEFAULT_RTOL) -> SsfFinite:
    """Shift function of the (coupled, or Dirichlet when bc is None) pair."""
    from .model import zero_potential
    zp = zero_potential(potential.support_halfwidth)
    if bc is None:
        free = eigenvalues_dirichlet(zp, ell, lambda_max, rtol)
        pert = eigenvalues_dirichlet(potential, ell, lambda_max, rtol)
    else:
        free = eigenvalues_coupled(zp, bc, ell, lambda_max, rtol)
        pert = eigenvalues_coupled(potential, bc, ell, lambda_max, rtol)
    return SsfFinite(eigs_free=free, eigs_perturbed=pert, ell=float(ell))


@dataclass(frozen=True)
class SsfLine:
    """Full-line shift function: bound-state steps plus scattering phase."""

    bound_states: EigenvalueList
    phase_grid: tuple  # ((k, phase), ...) ascending in k
    _interp: CubicSpline

    @property
    def min_sigma(self) -> float:
        return self.bound_states.values[0] if self.bound_states.values else 0.0

    @property
    def levinson_defect(self) -> float:
        """|xi(0+) - xi(0-)|; ~0 generic, ~1/2 at a threshold resonance."""
        k0, phase0 = self.phase_grid[0]
        return abs(-phase0 / math.pi - (-len(self.bound_states.expanded())))

    @property
    def levinson_flag(self) -> str:
        # In the transmission-phase realization the generic 1-d threshold
        # carries a half jump (arg t(0) = pi (n_b - 1/2)), so a defect of
        # 1/2 is the clean case; a vanishing defect signals a zero-energy
        # half-bound state.  Anything in between is suspicious.
        d = self.levinson_defect
        if abs(d - 0.5) <= 0.01:
            return "clean"
        if d <= 0.01:
            return "resonance"
        return "warn"

    def __call__(self, lam):
        scalar = np.isscalar(lam)
        lams = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.zeros_like(lams)
        neg = lams < 0.0
        if neg.any():
            bound = self.bound_states.expanded()
            out[neg] = -np.searchsorted(bound, lams[neg], side="right")
        pos = lams > 0.0
        if pos.any():
            ks = np.sqrt(lams[pos])
            k_lo, k_hi = self.phase_grid[0][0], self.phase_grid[-1][0]
            ks = np.clip(ks, k_lo, k_hi)
            out[pos] = -self._interp(ks) / math.pi
        zero = lams == 0.0
        if zero.any():
            out[zero] = -len(self.bound_states.expanded())
        return float(out[0]) if scalar else out


def default_k_grid(potential: Potential, k_top: float | None = None) -> np.ndarray:
    """Phase grid: geometric near threshold, fine to k=25, coarse to Born top."""
    kmax = born_kmax(potential)
    if k_top is not None:
        kmax = max(kmax, k_top)
    low = np.geomspace(1e-4, 0.1, 32, endpoint=False)
    mid_top = min(25.0, kmax)
    mid = np.arange(0.1, mid_top, 0.025)
    n_high = max(2, int(math.ceil(math.log(kmax / mid_top) / math.log(1.05))) + 1)
    high = np.geomspace(mid_top, kmax, n_high)
    return np.unique(np.concatenate([low, mid, high]))


def ssf_line(potential: Potential, k_grid=None,
             rtol: float = DEFAULT_RTOL) -> SsfLine:
    """Full-line shift function assembled from bound states and phases."""
    if k_grid is None:
        k_grid = default_k_grid(potential)
    bound = bound_states_line(potential, rtol=rtol)
    data = scattering_phases(potential, k_grid, rtol=rtol)
    ks = np.array([d.k for d in data])
    phases = np.array([d.phase for d in data])
    interp = CubicSpline(ks, phases, extrapolate=False)
    return SsfLine(bound_states=bound,
                   phase_grid=tuple(zip(ks.tolist(), phases.tolist())),
                   _interp=interp)


@dataclass(frozen=True)
class PairingResult:
    """Value of an (optionally weighted) pairing with certified error split."""

    value: float
    quadrature_error: float
    tail_bound: float
    lambda_cutoff: float


def _weighted(fn, weighted):
    if not weighted:
        return fn
    return lambda lam: fn(lam) / (1.0 + lam * lam)


def pairing(ssf, test_fn: TestFunction, weighted: bool = True,
            lambda_cutoff: float | None = None,
            abs_tol: float = 1e-10) -> PairingResult:
    """Integral of xi * f (divided by 1 + lambda^2 when weighted).

    Step-function-exact for interval shift functions: the integral is a
    sum of f-integrals between consecutive jump points.  For the line,
    the negative part is exact and the continuous part is integrated
    against the phase interpolant.  The reported value is within
    quadrature_error + tail_bound of the exact pairing.
    """
    if not weighted and test_fn.support is None:
        raise UnboundedPairing(
            f"unweighted pairing of {test_fn.name!r} needs compact support"
        )
    if isinstance(ssf, SsfFinite):
        return _pairing_finite(ssf, test_fn, weighted, lambda_cutoff, abs_tol)
    if isinstance(ssf, SsfLine):
        return _pairing_line(ssf, test_fn, weighted, lambda_cutoff, abs_tol)
    raise TypeError(f"pairing: unsupported shift-function type {type(ssf)!r}")


def _cutoffs(ssf_floor, horizon, test_fn, lambda_cutoff):
    hi = horizon if lambda_cutoff is None else min(lambda_cutoff, horizon)
    lo = ssf_floor
    if test_fn.support is not None:
        lo = max(lo, test_fn.support[0])
        hi = min(hi, test_fn.support[1])
    return lo, hi


def _pairing_finite(ssf, test_fn, weighted, lambda_cutoff, abs_tol):
    lo, hi = _cutoffs(ssf.spectrum_floor, ssf.lambda_max, test_fn, lambda_cutoff)
    if hi <= lo:
        return PairingResult(0.0, 0.0, 0.0, hi)
    jumps = ssf.jumps()
    cuts = np.unique(np.concatenate([
        [lo, hi], jumps[(jumps > lo) & (jumps < hi)],
        [b for b in test_fn.breakpoints if lo < b < hi],
    ]))
    f = _weighted(test_fn, weighted)
    total, err = 0.0, 0.0
    tol_per = abs_tol / max(1, len(cuts) - 1)
    for a, b in zip(cuts[:-1], cuts[1:]):
        xi = ssf(0.5 * (a + b))
        if xi == 0:
            continue
        v, e = integrate(f, a, b, abs_tol=tol_per)
        total += xi * v
        err += abs(xi) * e
    tail = 0.0
    needs_tail = test_fn.support is None or test_fn.support[1] > hi
    if weighted and needs_tail:
        window = ssf(np.linspace(max(lo, 0.8 * hi), hi, 64))
        xi_obs = float(np.max(np.abs(window)))
        tail = test_fn.bound * xi_obs * (0.5 * math.pi - math.atan(hi))
    return PairingResult(total, err, tail, float(hi))


def _pairing_line(ssf, test_fn, weighted, lambda_cutoff, abs_tol):
    k_top = ssf.phase_grid[-1][0]
    horizon = k_top * k_top
    lo, hi = _cutoffs(ssf.min_sigma, horizon, test_fn, lambda_cutoff)
    if hi <= lo:
        return PairingResult(0.0, 0.0, 0.0, hi)
    f = _weighted(test_fn, weighted)
    total, err = 0.0, 0.0
    # Negative half: step-function-exact between bound states.
    if lo < 0.0:
        bound = ssf.bound_states.expanded()
        cuts = np.unique(np.concatenate([
            [lo, min(hi, 0.0)], bound[(bound > lo) & (bound < min(hi, 0.0))],
            [b for b in test_fn.breakpoints if lo < b < min(hi, 0.0)],
        ]))
        for a, b in zip(cuts[:-1], cuts[1:]):
            xi = ssf(0.5 * (a + b))
            if xi == 0:
                continue
            v, e = integrate(f, a, b, abs_tol=abs_tol / max(2, len(cuts)))
            total += xi * v
            err += abs(xi) * e
    # Positive half: continuous phase against the interpolant.  The
    # integration runs in k = sqrt(lambda), where the phase is smooth
    # (in lambda it has a square-root cusp at threshold).
    if hi > 0.0:
        a = max(lo, ssf.phase_grid[0][0] ** 2)
        k_lo, k_hi = math.sqrt(a), math.sqrt(hi)
        bps = [math.sqrt(b) for b in test_fn.breakpoints if a < b < hi]

        def integrand_k(k):
            lam = k * k
            return ssf(lam) * f(lam) * 2.0 * k

        v, e = integrate(integrand_k, k_lo, k_hi, breakpoints=bps,
                         abs_tol=abs_tol, n=24)
        total += v
        err += e
    tail = 0.0
    needs_tail = test_fn.support is None or test_fn.support[1] > hi
    if weighted and needs_tail:
        xi_obs = abs(ssf(hi))
        tail = test_fn.bound * xi_obs * (0.5 * math.pi - math.atan(hi))
    return PairingResult(total, err, tail, float(hi))


@dataclass(frozen=True)
class TraceFormulaReport:
    lhs: float
    rhs: float
    residual: float
    tail_bound: float
    horizon: float


def trace_formula_report(potential: Potential, bc: BoundaryData, ell: float,
                         z: float, lambda_max: float = 400.0,
                         rtol: float = DEFAULT_RTOL) -> TraceFormulaReport:
    """Compare the two sides of the resolvent trace identity.

    LHS: sum over index-paired eigenvalues of the resolvent differences.
    RHS: -integral of xi(lambda) / (lambda - z)^2 by panel quadrature of
    the counting-difference evaluator.  Both are truncated at the same
    horizon (just below the first unpaired eigenvalue), so the exact
    identity maps the residual entirely onto numerical error.
    """
    cc = bc_constants(potential, bc)
    if z >= cc.lower_bound_interval:
        raise DomainError(
            f"trace formula requires z < {cc.lower_bound_interval} (got {z})"
        )
    ssf = ssf_finite(potential, bc, ell, lambda_max, rtol)
    pert = ssf.eigs_perturbed.expanded()
    free = ssf.eigs_free.expanded()
    n_pair = min(len(pert), len(free))
    lhs = float(np.sum(1.0 / (pert[:n_pair] - z) - 1.0 / (free[:n_pair] - z)))
    horizon = lambda_max
    for extra in (pert[n_pair:n_pair + 1], free[n_pair:n_pair + 1]):
        if len(extra):
            horizon = min(horizon, extra[0] - 1e-9 * max(1.0, abs(extra[0])))
    lo = ssf.spectrum_floor - 1.0
    jumps = ssf.jumps()
    cuts = np.unique(np.concatenate([[lo, horizon],
                                     jumps[(jumps > lo) & (jumps < horizon)]]))
    rhs, _ = 0.0, 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        xi = ssf(0.5 * (a + b))
        if xi == 0:
            continue
        v, _ = integrate(lambda lam: 1.0 / (lam - z) ** 2, a, b, abs_tol=1e-13)
        rhs -= xi * v
    window = ssf(np.linspace(0.8 * horizon, horizon, 64))
    xi_obs = float(np.max(np.abs(window)))
    tail = xi_obs / (horizon - z)
    residual = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return TraceFormulaReport(lhs=lhs, rhs=rhs, residual=residual,
                              tail_bound=tail, horizon=horizon)


def trace_formula_residual(potential: Potential, bc: BoundaryData, ell: float,
                           z: float, lambda_max: float = 400.0,
                           rtol: float = DEFAULT_RTOL) -> float:
    """Relative gap between the two sides of the trace identity."""
    return trace_formula_report(potential, bc, ell, z, lambda_max, rtol).residual
