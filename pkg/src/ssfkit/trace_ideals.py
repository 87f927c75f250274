"""Nystrom discretization of Birman-Schwinger-type operators u G v built
from the *free* resolvent kernels (line, Dirichlet interval, coupled
interval), Schatten norms, and the decay / convergence diagnostics.

Quadrature nodes live on the potential support: the sandwiching factors
u, v vanish elsewhere, so restricting there loses nothing, and it makes
the direct-sum extension of an interval operator by zero a literal no-op
in the discretization.  The symmetrized sqrt(w) scaling makes matrix
singular values approximate operator singular values directly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import svdvals

from .errors import DomainError, KreinSingular
from .krein import free_krein_entries
from .model import BoundaryData, Potential, factorize
from .quadrature import gl_nodes


@dataclass(frozen=True)
class DiscretizedOperator:
    """Quadrature matrix of a sandwiched free-resolvent operator.

    Square for the full Birman-Schwinger kinds; rectangular for the half
    factors, whose free leg ranges over an extended grid.
    """

    matrix: np.ndarray
    nodes: tuple          # row nodes
    weights: tuple
    col_nodes: tuple      # == nodes for the square kinds
    col_weights: tuple
    meaning: str          # bs_line | bs_dirichlet | bs_coupled | half_left | half_right
    z: float
    ell: float | None


def schatten_norm(op: DiscretizedOperator, p: int) -> float:
    """Trace norm (p=1) or Hilbert-Schmidt norm (p=2) of the matrix."""
    if p == 2:
        return float(np.linalg.norm(op.matrix, "fro"))
    if p == 1:
        return float(np.sum(svdvals(op.matrix)))
    raise DomainError(f"schatten_norm: p must be 1 or 2, got {p}")


def _kappa(z: float) -> float:
    if z >= 0.0:
        raise DomainError(f"free resolvent kernels need z < 0 (got z={z})")
    return math.sqrt(-z)


def green_line_free(z: float, x, y):
    """Free full-line kernel e^{-k|x-y|} / (2k) at z = -k^2."""
    k = _kappa(z)
    return np.exp(-k * np.abs(np.asarray(x) - np.asarray(y))) / (2.0 * k)


def green_dirichlet_free(z: float, ell: float, x, y):
    """Free Dirichlet interval kernel, overflow-safe at any k*ell."""
    k = _kappa(z)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    num = np.expm1(-2.0 * k * (ell + lo)) * np.expm1(-2.0 * k * (ell - hi))
    den = -2.0 * k * np.expm1(-4.0 * k * ell)
    return np.exp(-k * (hi - lo)) * num / den


def _psi_free(z: float, ell: float, x, m: int):
    """psi_m of the free problem: sinh(k(ell +- x)) / sinh(2 k ell)."""
    k = _kappa(z)
    s = np.asarray(x) if m == 1 else -np.asarray(x)
    return np.exp(k * (s - ell)) * np.expm1(-2.0 * k * (ell + s)) / np.expm1(-4.0 * k * ell)


def free_coupled_correction(bc: BoundaryData, z: float, ell: float):
    """Coefficients of the free rank-two kernel correction, -K^{-1}.

    Raises KreinSingular when -k^2 sits (numerically) on the coupled
    free spectrum at this interval length.
    """
    k = _kappa(z)
    entries = free_krein_entries(bc, k, ell)
    det = entries[0, 0] * entries[1, 1] - entries[0, 1] * entries[1, 0]
    scale = max(1.0, float(np.max(np.abs(entries))))
    if abs(det) < 1e-12 * scale * scale:
        raise KreinSingular(f"free coupled kernel singular at z={z}, ell={ell}")
    inv = np.array([[entries[1, 1], -entries[0, 1]],
                    [-entries[1, 0], entries[0, 0]]], dtype=complex) / det
    return -inv


def green_coupled_free(bc: BoundaryData, z: float, ell: float, x, y):
    """Free coupled interval kernel: Dirichlet plus rank-two correction."""
    coeff = free_coupled_correction(bc, z, ell)
    g = green_dirichlet_free(z, ell, x, y).astype(complex)
    p1x, p2x = _psi_free(z, ell, x, 1), _psi_free(z, ell, x, 2)
    p1y, p2y = _psi_free(z, ell, y, 1), _psi_free(z, ell, y, 2)
    return (g + coeff[0, 0] * p1x * p1y + coeff[0, 1] * p1x * p2y
            + coeff[1, 0] * p2x * p1y + coeff[1, 1] * p2x * p2y)


def _free_kernel(kind, bc, z, ell):
    if kind == "line":
        return lambda X, Y: green_line_free(z, X, Y)
    if kind == "dirichlet":
        return lambda X, Y: green_dirichlet_free(z, ell, X, Y)
    if kind == "coupled":
        if bc is None:
            raise DomainError("coupled kind needs BoundaryData")
        free_coupled_correction(bc, z, ell)  # fail fast if singular
        return lambda X, Y: green_coupled_free(bc, z, ell, X, Y)
    raise DomainError(f"unknown bc_kind {kind!r}")


def support_grid(potential: Potential, ell: float | None, n: int):
    """Composite GL nodes on the support (clipped to the interval)."""
    s = potential.support_halfwidth if ell is None else min(potential.support_halfwidth, ell)
    cuts = sorted({-s, s, *(b for b in potential.breakpoints if -s < b < s)})
    total = cuts[-1] - cuts[0]
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(4, int(round(n * (hi - lo) / total)))
        x, w = gl_nodes(lo, hi, m)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def discretize_bs(potential: Potential, bc_kind: str, z: float, ell: float | None,
                  n: int = 64, bc: BoundaryData | None = None) -> DiscretizedOperator:
    """Nystrom matrix of u (H0_kind - z)^{-1} v on the potential support.

    ``bc_kind`` is 'line', 'dirichlet', or 'coupled' (then ``bc`` is
    required); ``ell`` is ignored for the line kind.  Entries are
    sqrt(w_i) u(x_i) G(x_i, x_j) v(x_j) sqrt(w_j).
    """
    if n < 16:
        raise DomainError("discretize_bs: need n >= 16")
    if bc_kind == "line":
        ell_eff = None
    else:
        if ell is None or ell <= 0:
            raise DomainError("interval kinds need ell > 0")
        ell_eff = float(ell)
    kern = _free_kernel(bc_kind, bc, z, ell_eff)
    xs, ws = support_grid(potential, ell_eff, n)
    u, v = factorize(potential, xs)
    sw = np.sqrt(ws)
    mat = (sw * u)[:, None] * kern(xs[:, None], xs[None, :]) * (v * sw)[None, :]
    return DiscretizedOperator(
        matrix=np.asarray(mat), nodes=tuple(xs), weights=tuple(ws),
        col_nodes=tuple(xs), col_weights=tuple(ws),
        meaning=f"bs_{bc_kind}", z=float(z), ell=ell_eff,
    )


def _extended_grid(potential: Potential, z: float, ell: float, n: int):
    """Column grid for half factors: covers the interval plus line tails."""
    k = _kappa(z)
    a = potential.support_halfwidth
    reach = max(ell, a) + 40.0 / k
    cuts = sorted({-reach, reach, -ell, ell,
                   *(b for b in potential.breakpoints if -reach < b < reach)})
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(6, int(math.ceil((hi - lo) * k / 4.0)) * 8, n // 4)
        x, w = gl_nodes(lo, hi, min(m, 96))
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def discretize_half(potential: Potential, bc_kind: str, z: float, ell: float,
                    n: int = 64, bc: BoundaryData | None = None,
                    side: str = "left") -> DiscretizedOperator:
    """Half factor u G (side='left') or G v (side='right'), rectangular.

    The sandwiched leg lives on the support grid; the free leg on an
    extended grid covering the interval and the decaying line tails.
    Interval kernels are extended by zero outside (-ell, ell).
    """
    ell_eff = None if bc_kind == "line" else float(ell)
    kern = _free_kernel(bc_kind, bc, z, ell_eff)
    xs, ws = support_grid(potential, ell_eff, n)
    ys, wy = _extended_grid(potential, z, float(ell), n)
    u, v = factorize(potential, xs)
    inside = np.ones_like(ys, dtype=bool) if bc_kind == "line" else (np.abs(ys) < ell)
    if side == "left":
        g = kern(xs[:, None], ys[None, :]) * inside[None, :]
        mat = (np.sqrt(ws) * u)[:, None] * g * np.sqrt(wy)[None, :]
        rows, rw, cols, cw = xs, ws, ys, wy
    elif side == "right":
        g = kern(ys[:, None], xs[None, :]) * inside[:, None]
        mat = np.sqrt(wy)[:, None] * g * (v * np.sqrt(ws))[None, :]
        rows, rw, cols, cw = ys, wy, xs, ws
    else:
        raise DomainError("side must be 'left' or 'right'")
    return DiscretizedOperator(
        matrix=np.asarray(mat), nodes=tuple(rows), weights=tuple(rw),
        col_nodes=tuple(cols), col_weights=tuple(cw),
        meaning=f"half_{side}", z=float(z), ell=ell_eff,
    )


def stabilized_nodes(potential: Potential, bc_kind: str, z: float,
                     ell: float | None, bc: BoundaryData | None = None,
                     start: int = 64, tol: float = 1e-8, cap: int = 1024):
    """Double the node count until the trace norm stabilizes to ``tol``."""
    n = start
    prev = schatten_norm(discretize_bs(potential, bc_kind, z, ell, n, bc), 1)
    while n < cap:
        cur = schatten_norm(discretize_bs(potential, bc_kind, z, ell, 2 * n, bc), 1)
        if abs(cur - prev) <= tol:
            return 2 * n, cur
        prev, n = cur, 2 * n
    return n, prev


@dataclass(frozen=True)
class SeriesRow:
    mode: str
    kind: str
    parameter: float
    p: int
    norm: float
    n_nodes: int


def diagnostic_series(potential: Potential, bc: BoundaryData, mode: str,
                      ell: float = 2.0, z: float | None = None,
                      ks=(2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
                      ells=(2.0, 4.0, 8.0, 16.0, 32.0),
                      n: int = 128) -> list:
    """Decay and convergence diagnostics of the sandwiched free resolvents.

    mode 'z_to_minus_infinity': trace norms of the Dirichlet and coupled
    interval operators at z = -k^2 over the k ladder, fixed ell.

    mode 'ell_to_infinity': trace-norm distance of the interval operator
    (extended by zero) to the line operator, plus the Hilbert-Schmidt
    distances of both half factors, at fixed z over the ell ladder.
    """
    rows = []
    if mode == "z_to_minus_infinity":
        for kind in ("dirichlet", "coupled"):
            for k in ks:
                op = discretize_bs(potential, kind, -k * k, ell, n, bc)
                rows.append(SeriesRow(mode, kind, float(k), 1,
                                      schatten_norm(op, 1), len(op.nodes)))
        return rows
    if mode == "ell_to_infinity":
        if z is None:
            raise DomainError("ell_to_infinity mode needs z")
        for kind in ("dirichlet", "coupled"):
            for L in ells:
                full = discretize_bs(potential, kind, z, L, n, bc)
                line = discretize_bs(potential, "line", z, None, n)
                diff = DiscretizedOperator(
                    matrix=full.matrix - line.matrix, nodes=full.nodes,
                    weights=full.weights, col_nodes=full.col_nodes,
                    col_weights=full.col_weights, meaning="bs_diff",
                    z=float(z), ell=float(L),
                )
                rows.append(SeriesRow(mode, kind, float(L), 1,
                                      schatten_norm(diff, 1), len(full.nodes)))
                for side in ("left", "right"):
                    hi = discretize_half(potential, kind, z, L, n, bc, side)
                    hl = discretize_half(potential, "line", z, L, n, None, side)
                    d = hi.matrix - hl.matrix
                    rows.append(SeriesRow(f"{mode}_half_{side}", kind, float(L), 2,
                                          float(np.linalg.norm(d, "fro")),
                                          len(hi.nodes)))
        return rows
    raise DomainError(f"unknown diagnostic mode {mode!r}")
