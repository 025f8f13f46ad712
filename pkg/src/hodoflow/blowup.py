"""Gradient-catastrophe (blow-up) surfaces of the implicit solution.

The spatial gradient of the solved field is K^{-1} with

    K(t, M) = A^{-1}(1 - e^{-tA}) + (d phi/dM) e^{-tA}

so the solution blows up exactly where det K = 0, equivalently (multiplying by
det e^{tA}) where

    blowup_residual(t, M) = det( phi1(A,t) + d(phi)/dM ) = 0.

For the force matrices treated here this transcendental condition reduces to
algebra in one scalar:

* 1D:             t = log(1 - A phi'(M)) / A, real iff A phi'(M) < 1
* A = a*Id:       det(tau*Id + J) = 0 with tau = (e^{at}-1)/a  (polynomial)
* planar Coriolis: a sin(wt) + b cos(wt) + c = 0 with (a,b,c) from J
* A = diag(a1,a2): exponential polynomial in tau = e^{t a2/q} when a1/a2 = p/q

A *sheet* is one root branch sampled over a grid in M-space; absent entries
(no real root) record the violated reality condition.  min_blowup_time picks
the catastrophe: the infimum of positive blow-up times over all sheets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import matops
from .errors import DegenerateMatrixError
from .hodograph import hodograph_position, u_from_M

#: imaginary-part tolerance for accepting a polynomial root as real
_IMAG_TOL = 1e-9
#: residual tolerance for accepting a candidate blow-up time
_TIME_RESIDUAL_TOL = 1e-9


@dataclass
class BlowupSheet:
    """One root branch of the blow-up condition over an M-grid.

    t holds NaN where the branch has no real time; absent_reason says which
    reality condition failed.  branch_fn re-evaluates the branch at an
    off-grid M (used by the extremum refinement), tau holds the pre-time-map
    root values for the diagonal machinery.
    """

    branch: str
    axes: list
    points: np.ndarray
    t: np.ndarray
    tau: np.ndarray | None = None
    absent_reason: str = ""
    branch_fn: Callable | None = field(default=None, repr=False)

    @property
    def absent(self):
        return ~np.isfinite(self.t)

    def finite_positive(self):
        return np.isfinite(self.t) & (self.t > 1e-12)


@dataclass
class CoriolisABC:
    """Coefficients of a sin(wt) + b cos(wt) + c = w^2 * blow-up residual."""

    a: float
    b: float
    c: float


@dataclass
class Absent:
    """No real blow-up time; carries the violated reality condition."""

    reason: str


@dataclass
class Certificate:
    certified: bool
    reason: str
    worst_M: np.ndarray | None
    value: float


@dataclass
class BlowupExtremum:
    t_star: float
    M_star: np.ndarray
    x_star: np.ndarray
    u_star: np.ndarray
    branch: str


@dataclass
class NoBlowup:
    reason: str


def blowup_residual(problem, t, M):
    """det(phi1(A,t) + d(phi)/dM); zero on the blow-up set."""
    M = np.atleast_1d(np.asarray(M, dtype=float))
    P1 = matops.phi1(problem.spec.A, t)
    return float(np.linalg.det(P1 + problem.data.phi_jacobian(M)))


def K_matrix(problem, t, M):
    """Inverse spatial gradient: du/dx = K^{-1} away from the blow-up set."""
    M = np.atleast_1d(np.asarray(M, dtype=float))
    A = problem.spec.A
    Em = matops.mat_exp(A, -t)
    return -matops.phi1(A, -t) + problem.data.phi_jacobian(M) @ Em


def _scalar_multiple(A, tol=1e-12):
    """a such that A = a*Id, or None."""
    a = float(A[0, 0])
    if np.allclose(A, a * np.eye(A.shape[0]), atol=tol):
        return a
    return None


def _time_from_tau(a, tau):
    """Map root values tau = (e^{at}-1)/a to times; NaN where 1 + a*tau <= 0."""
    tau = np.asarray(tau, dtype=float)
    if a == 0.0:
        return tau.copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = a * tau
        t = np.where(arg > -1.0, np.log1p(np.maximum(arg, -1.0 + 1e-300)) / a, np.nan)
    return t


def _grid_points(data, M_grid, num):
    axes = data.m_grids(num) if M_grid is None else [np.asarray(g, dtype=float) for g in M_grid]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return axes, pts


def sheet_1d(problem, M_grid=None):
    """The single 1D blow-up sheet t(M) = log(1 - A phi'(M))/A over an M-grid."""
    data = problem.data
    a = float(problem.spec.A[0, 0])
    axes, pts = _grid_points(data, None if M_grid is None else [M_grid], problem.grid_num)
    tau = np.array([-data.phi_jacobian(p)[0, 0] for p in pts])
    t = _time_from_tau(a, tau)

    def branch_fn(M):
        return float(_time_from_tau(a, -data.phi_jacobian(np.atleast_1d(M))[0, 0]))

    return BlowupSheet(
        branch="1d",
        axes=axes,
        points=pts,
        t=t,
        tau=tau,
        absent_reason="A*phi'(M) >= 1 (no real blow-up time)",
        branch_fn=branch_fn,
    )


def _golden_min(f, a, b, tol=1e-12, max_iter=200):
    """Plain golden-section minimization on [a, b]; returns (x, f(x))."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def certify_no_blowup_1d(problem, num=2001):
    """Global no-blow-up certificate for 1D: A phi'(M) >= 1 on the whole domain.

    Minimizes s(M) = A*phi'(M) by dense grid plus golden-section refinement;
    Certified iff the minimum exceeds 1 (then 1 - A phi' <= 0 everywhere and
    the log in the sheet formula never has a positive argument).
    """
    data = problem.data
    a = float(problem.spec.A[0, 0])
    grid = data.m_grids(num)[0]
    vals = np.array([a * data.phi_jacobian(np.array([m]))[0, 0] for m in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    f = lambda m: a * data.phi_jacobian(np.array([m]))[0, 0]
    m_star, v_star = _golden_min(f, lo, hi)
    if vals[i] < v_star:
        m_star, v_star = grid[i], vals[i]
    if v_star > 1.0:
        return Certificate(
            certified=True,
            reason=f"min over M of A*phi'(M) = {v_star:.12g} > 1: no real blow-up time",
            worst_M=np.array([m_star]),
            value=float(v_star),
        )
    return Certificate(
        certified=False,
        reason=f"A*phi'(M) = {v_star:.12g} <= 1 at M = {m_star:.12g}",
        worst_M=np.array([m_star]),
        value=float(v_star),
    )


def _real_roots_poly(coeffs):
    """Real roots of a polynomial given by numpy-order coefficients."""
    coeffs = np.asarray(coeffs, dtype=float)
    nz = np.flatnonzero(np.abs(coeffs) > 0.0)
    if nz.size == 0:
        return np.array([])
    coeffs = coeffs[nz[0] :]
    if coeffs.size <= 1:
        return np.array([])
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= _IMAG_TOL * np.maximum(1.0, np.abs(roots.real))]
    return np.sort(real.real)


def sheets_diag(problem, M_grid=None):
    """Blow-up sheets for A = a*Id: roots of det(tau*Id + J_phi(M)) = 0.

    Returns n sheets labelled tau0 < tau1 < ... (roots sorted ascending per
    grid point); complex pairs leave NaN gaps.  Works for a = 0, where the
    time map is the identity t = tau.
    """
    spec, data = problem.spec, problem.data
    a = _scalar_multiple(spec.A)
    if a is None:
        raise ValueError("sheets_diag needs A to be a scalar multiple of the identity")
    n = spec.n
    axes, pts = _grid_points(data, M_grid, problem.grid_num)
    npts = pts.shape[0]
    taus = np.full((npts, n), np.nan)
    if n == 2:
        # det(tau*I + J) = tau^2 + tr(J) tau + det(J), vectorized over the grid
        tr = np.empty(npts)
        dt = np.empty(npts)
        for i, p in enumerate(pts):
            J = data.phi_jacobian(p)
            tr[i] = J[0, 0] + J[1, 1]
            dt[i] = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        disc = tr * tr - 4.0 * dt
        ok = disc >= -_IMAG_TOL * np.maximum(1.0, tr * tr)
        root = np.sqrt(np.maximum(disc, 0.0))
        taus[ok, 0] = 0.5 * (-tr[ok] - root[ok])
        taus[ok, 1] = 0.5 * (-tr[ok] + root[ok])
    else:
        for i, p in enumerate(pts):
            rr = _real_roots_poly(np.poly(-data.phi_jacobian(p)))
            taus[i, : min(n, rr.size)] = rr[:n]

    def make_branch_fn(idx):
        def branch_fn(M):
            M = np.atleast_1d(M)
            if not data.in_domain(M):
                return np.nan
            rr = _real_roots_poly(np.poly(-data.phi_jacobian(M)))
            if idx >= rr.size:
                return np.nan
            return float(_time_from_tau(a, rr[idx]))

        return branch_fn

    sheets = []
    for k in range(n):
        sheets.append(
            BlowupSheet(
                branch=f"tau{k}",
                axes=axes,
                points=pts,
                t=_time_from_tau(a, taus[:, k]),
                tau=taus[:, k],
                absent_reason="complex root pair or 1 + a*tau <= 0",
                branch_fn=make_branch_fn(k),
            )
        )
    return sheets


def _coriolis_omega(A, tol=1e-12):
    w = float(A[0, 1])
    ref = np.array([[0.0, w], [-w, 0.0]])
    if A.shape != (2, 2) or not np.allclose(A, ref, atol=tol) or w == 0.0:
        return None
    return w


def coriolis2d_abc(problem, M):
    """Trig coefficients of the planar-rotation blow-up condition at M.

    With J = d(phi)/dM and rotation rate w:
        a = w (J11 + J22),  b = w (J21 - J12) - 2,  c = -b + w^2 det J
    so that w^2 * blowup_residual(t, M) = a sin(wt) + b cos(wt) + c.
    """
    w = _coriolis_omega(problem.spec.A)
    if w is None:
        raise ValueError("coriolis2d_abc needs A = w*[[0,1],[-1,0]] with w != 0")
    J = problem.data.phi_jacobian(np.atleast_1d(M))
    a = w * (J[0, 0] + J[1, 1])
    b = w * (J[1, 0] - J[0, 1]) - 2.0
    c = -b + w * w * (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    return CoriolisABC(a=float(a), b=float(b), c=float(c))


def coriolis2d_times(abc, omega, k_range=(-2, 2)):
    """All real solutions t of a sin(wt) + b cos(wt) + c = 0 with phases
    shifted through the requested periods; Absent when a^2 + b^2 < c^2.

    Every returned time is re-verified against the trig equation to 1e-10.
    """
    a, b, c = abc.a, abc.b, abc.c
    scale = max(abs(a), abs(b), abs(c), 1.0)
    if abs(a) < 1e-14 * scale and abs(b) < 1e-14 * scale:
        raise ValueError("degenerate trigonometric equation: a = b = 0")
    aa = a * a + b * b
    disc = aa - c * c
    if disc < 0.0:
        return Absent(reason=f"a^2 + b^2 = {aa:.6g} < c^2 = {c * c:.6g}: no real phase")
    root = np.sqrt(max(disc, 0.0))
    sin_candidates = {(-a * c + abs(b) * root) / aa, (-a * c - abs(b) * root) / aa}
    thetas = []
    for s in sin_candidates:
        s = min(1.0, max(-1.0, s))
        for th in (np.arcsin(s), np.pi - np.arcsin(s)):
            if abs(a * np.sin(th) + b * np.cos(th) + c) <= 1e-10 * scale:
                thetas.append(th)
    times = []
    for th in thetas:
        for k in range(int(k_range[0]), int(k_range[1]) + 1):
            times.append((th + 2.0 * np.pi * k) / omega)
    times = sorted(set(round(t, 14) for t in times))
    # collapse near-duplicates from the two theta candidates meeting at +-pi/2
    out = []
    for t in times:
        if not out or abs(t - out[-1]) > 1e-12:
            out.append(float(t))
    return out


def sheets_coriolis2d(problem, M_grid=None, k_range=(-1, 3)):
    """First-positive-time blow-up sheet under planar rotation.

    One sheet: per grid point, the smallest positive root of the trig
    condition (NaN where the reality condition fails or no positive time
    falls inside the k window).
    """
    w = _coriolis_omega(problem.spec.A)
    if w is None:
        raise ValueError("sheets_coriolis2d needs A = w*[[0,1],[-1,0]] with w != 0")
    data = problem.data
    axes, pts = _grid_points(data, M_grid, problem.grid_num)

    def first_positive(M):
        M = np.atleast_1d(M)
        if not data.in_domain(M):
            return np.nan
        result = coriolis2d_times(coriolis2d_abc(problem, M), w, k_range)
        if isinstance(result, Absent):
            return np.nan
        pos = [t for t in result if t > 1e-12]
        return min(pos) if pos else np.nan

    t = np.array([first_positive(p) for p in pts])
    return [
        BlowupSheet(
            branch="coriolis_first",
            axes=axes,
            points=pts,
            t=t,
            absent_reason="a^2 + b^2 < c^2 or no positive time in the k window",
            branch_fn=first_positive,
        )
    ]


def _rationalize(r, max_denominator=64, tol=1e-9):
    fr = Fraction(r).limit_denominator(max_denominator)
    if abs(float(fr) - r) <= tol * max(1.0, abs(r)):
        return fr
    return None


def sheets_diag2(problem, M_grid=None, t_max=10.0, scan_step=1e-2):
    """Blow-up sheets for A = diag(a1, a2) in two dimensions.

    When a1/a2 is rational p/q (continued-fraction reconstruction, denominator
    <= 64) and the resulting polynomial in tau = e^{t a2 / q},

        tau^{p+q} + K1 tau^p + K2 tau^q + K3 = 0,
        K1 = a2 J22 - 1,  K2 = a1 J11 - 1,  K3 = 1 - a1 J11 - a2 J22 + a1 a2 det J,

    has degree <= 6, roots come from the companion matrix; otherwise each grid
    point is sign-scanned on [-t_max, t_max] with the given step and bisected.
    Every candidate time is re-verified against blowup_residual to 1e-9.
    a1 = a2 delegates to sheets_diag.
    """
    spec, data = problem.spec, problem.data
    A = spec.A
    if A.shape != (2, 2) or abs(A[0, 1]) > 0 or abs(A[1, 0]) > 0:
        raise ValueError("sheets_diag2 needs A = diag(a1, a2)")
    a1, a2 = float(A[0, 0]), float(A[1, 1])
    if a1 == a2:
        return sheets_diag(problem, M_grid)
    if a1 == 0.0 or a2 == 0.0:
        raise DegenerateMatrixError("diag(a1, a2) with a zero entry is rank-deficient")

    frac = _rationalize(a1 / a2)
    use_poly = False
    if frac is not None:
        p, q = frac.numerator, frac.denominator
        exps = np.array([p + q, p, q, 0])
        shift = -min(exps.min(), 0)
        degree = int(exps.max() + shift)
        use_poly = degree <= 6 and degree >= 1

    axes, pts = _grid_points(data, M_grid, problem.grid_num)

    def residual_at(ti, M):
        return blowup_residual(problem, ti, M)

    def times_poly(M):
        J = data.phi_jacobian(M)
        detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        K1 = a2 * J[1, 1] - 1.0
        K2 = a1 * J[0, 0] - 1.0
        K3 = 1.0 - a1 * J[0, 0] - a2 * J[1, 1] + a1 * a2 * detJ
        coeffs = np.zeros(degree + 1)
        for e, K in zip(exps + shift, (1.0, K1, K2, K3)):
            coeffs[degree - int(e)] += K
        out = []
        scale = max(1.0, abs(detJ))
        for tau in _real_roots_poly(coeffs):
            if tau <= 0.0:
                continue
            ti = (q / a2) * np.log(tau)
            if abs(residual_at(ti, M)) <= _TIME_RESIDUAL_TOL * scale:
                out.append(float(ti))
        return sorted(out)

    def times_scan(M):
        ts = np.arange(-t_max, t_max + scan_step, scan_step)
        vals = np.array([residual_at(ti, M) for ti in ts])
        out = []
        for i in range(1, ts.size):
            va, vb = vals[i - 1], vals[i]
            if va == 0.0:
                out.append(float(ts[i - 1]))
                continue
            if va * vb < 0.0:
                lo, hi, flo = ts[i - 1], ts[i], va
                while hi - lo > 1e-12:
                    mid = 0.5 * (lo + hi)
                    fm = residual_at(mid, M)
                    if fm == 0.0:
                        lo = hi = mid
                        break
                    if flo * fm < 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                out.append(float(0.5 * (lo + hi)))
        return sorted(out)

    times_of = times_poly if use_poly else times_scan

    all_times = [times_of(p) if data.in_domain(p) else [] for p in pts]
    n_sheets = max((len(ts) for ts in all_times), default=0)
    sheets = []
    for k in range(n_sheets):
        tk = np.array([ts[k] if k < len(ts) else np.nan for ts in all_times])

        def make_fn(idx):
            def branch_fn(M):
                M = np.atleast_1d(M)
                if not data.in_domain(M):
                    return np.nan
                ts = times_of(M)
                return ts[idx] if idx < len(ts) else np.nan

            return branch_fn

        sheets.append(
            BlowupSheet(
                branch=f"t{k}",
                axes=axes,
                points=pts,
                t=tk,
                absent_reason="no real root of the exponential polynomial"
                if use_poly
                else f"no sign change of the residual on [{-t_max}, {t_max}]",
                branch_fn=make_fn(k),
            )
        )
    return sheets


def sheet_extremum(sheet, mode="min", positive_only=False):
    """Grid extremum of a sheet's time values, golden-refined via branch_fn.

    Returns (t_extreme, M_at).  positive_only restricts to t > 0 entries.
    """
    t = sheet.t.copy()
    if positive_only:
        t[~sheet.finite_positive()] = np.nan
    if not np.any(np.isfinite(t)):
        return None
    sign = 1.0 if mode == "min" else -1.0
    vals = np.where(np.isfinite(t), sign * t, np.inf)
    i0 = int(np.argmin(vals))
    M0 = sheet.points[i0].copy()
    t0 = float(t[i0])
    if sheet.branch_fn is None:
        return t0, M0
    spacing = [float(ax[1] - ax[0]) if ax.size > 1 else 1.0 for ax in sheet.axes]
    bounds = [(ax[0], ax[-1]) for ax in sheet.axes]

    def f(Mv):
        ti = sheet.branch_fn(Mv)
        if ti is None or not np.isfinite(ti) or (positive_only and ti <= 0.0):
            return np.inf
        return sign * ti

    M = M0.copy()
    best = sign * t0
    for _ in range(40):
        improved = False
        for j in range(M.size):
            lo = max(bounds[j][0], M[j] - spacing[j])
            hi = min(bounds[j][1], M[j] + spacing[j])

            def f1(v, jj=j):
                Mv = M.copy()
                Mv[jj] = v
                return f(Mv)

            v_star, fv = _golden_min(f1, lo, hi, tol=1e-11)
            if fv < best - 1e-14:
                M[j] = v_star
                best = fv
                improved = True
        if not improved:
            break
    if not np.isfinite(best):
        return t0, M0
    return float(sign * best), M


def certify_branch_absent(problem, sheet):
    """Absence certificate for one diagonal-machinery sheet.

    The branch has no real time anywhere iff 1 + a*tau(M) <= 0 on the whole
    domain, i.e. sup_M a*tau(M) <= -1.  Needs the sheet's tau samples.
    """
    a = _scalar_multiple(problem.spec.A)
    if a is None or sheet.tau is None:
        raise ValueError("absence certificate needs A = a*Id and tau samples")
    vals = a * sheet.tau
    finite = np.isfinite(vals)
    if not np.any(finite):
        return Certificate(False, "no tau samples", None, np.nan)
    i0 = int(np.nanargmax(np.where(finite, vals, -np.inf)))
    sup = float(vals[i0])
    worst = sheet.points[i0].copy()
    if sup < -1.0:
        return Certificate(
            certified=True,
            reason=f"sup over M of A*tau(M) = {sup:.12g} < -1: reality condition "
            "1 + A*tau > 0 violated everywhere on the branch",
            worst_M=worst,
            value=sup,
        )
    return Certificate(
        certified=False,
        reason=f"A*tau(M) = {sup:.12g} >= -1 at M = {worst!r}",
        worst_M=worst,
        value=sup,
    )


def min_blowup_time(problem, sheets):
    """Catastrophe record: infimum of positive blow-up times over all sheets.

    Grid minimum refined by per-coordinate golden-section descent on the
    owning branch; returns NoBlowup when every sheet is Absent at positive
    times.
    """
    if isinstance(sheets, BlowupSheet):
        sheets = [sheets]
    best = None
    for sheet in sheets:
        res = sheet_extremum(sheet, mode="min", positive_only=True)
        if res is None:
            continue
        t_s, M_s = res
        if best is None or t_s < best[0]:
            best = (t_s, M_s, sheet.branch)
    if best is None:
        return NoBlowup(reason="every sheet is Absent at positive times")
    t_star, M_star, branch = best
    return BlowupExtremum(
        t_star=float(t_star),
        M_star=M_star,
        x_star=hodograph_position(problem, t_star, M_star),
        u_star=u_from_M(problem.spec, t_star, M_star),
        branch=branch,
    )
