"""Constructors for weighted-minimal surfaces.

Profiles come from a classical RK4 shooting integration of the
curvature balance specialised to the symmetric cases,

    rotational:             theta' = phi'(z) cos(theta) - sin(theta)/x
    translation-invariant:  theta' = phi'(z) cos(theta)

with x' = cos(theta), z' = sin(theta).  Axis-regular rotational starts
use the series x = s - (a^2/24) s^3, theta = (a/2) s + a(2b - a^2)/32 s^3
(a = phi'(z0), b = phi''(z0)) across the removable x = 0 singularity.

Graphs come from a damped Newton iteration on the second-order central
difference discretisation of  div(grad u / W) = phi'(u) / W,
W = sqrt(1 + |grad u|^2), with an analytically assembled Jacobian
including the -phi''(u)/W zeroth-order term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .potential import PotentialSpec, eval_potential
from .surface_geometry import (GraphPatch, ProfileCurve, ROTATIONAL,
                               TRANSLATION, sample_geometry,
                               phi_minimal_residual)


class DomainExitError(RuntimeError):
    """Integration or iteration left the weight's height domain."""


class AxisCollisionError(RuntimeError):
    """Rotational profile reached x = 0 with a non-axial tangent."""


@dataclass(frozen=True)
class AxisRegular:
    z0: float


@dataclass(frozen=True)
class PointStart:
    x0: float
    z0: float
    theta0: float


@dataclass
class ShootingConfig:
    start: object
    s_max: float
    step: float
    integrator_order: int = 4

    def __post_init__(self):
        if self.step <= 0 or self.s_max <= self.step:
            raise ValueError("need 0 < step < s_max")
        if self.integrator_order != 4:
            raise ValueError("only the 4th-order integrator is provided")


@dataclass
class NewtonConfig:
    tol_residual: float = 1e-10
    max_iters: int = 30
    damping: float = 0.5
    initial_guess: object = "harmonic"

    def __post_init__(self):
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping factor must lie in (0, 1]")


@dataclass
class SolveResult:
    surface: object
    residual: float
    iterations: int
    converged: bool
    diagnostics: str = ""


def _fast_d1(spec: PotentialSpec):
    """Scalar phi' closure for tight integration loops."""
    p = spec.params
    if spec.family == "Constant":
        return lambda z: 0.0
    if spec.family == "Linear":
        m = p["slope"]
        return lambda z: m
    if spec.family == "Quadratic":
        lam, beta = p["Lambda"], p["beta"]
        return lambda z: lam * z + beta
    if spec.family == "LogPower":
        a = p["a"]
        return lambda z: a / z
    lam, beta = p["Lambda"], p["beta"]
    coeffs = p["coefficients"]

    def d1(z):
        val = lam * z + beta
        for i, c in enumerate(coeffs, start=1):
            val += c * z ** (-i)
        return val

    return d1


def _integrate_profile(spec: PotentialSpec, kind: str, s0: float, y0, cfg):
    """RK4 on (x, z, theta) from arclength s0 with domain monitoring."""
    d1 = _fast_d1(spec)
    floor = spec.domain_left
    rotational = kind == ROTATIONAL

    def rhs(x, z, theta):
        ct = math.cos(theta)
        st = math.sin(theta)
        dtheta = d1(z) * ct
        if rotational:
            dtheta -= st / x
        return ct, st, dtheta

    h = cfg.step
    n_steps = int(round((cfg.s_max - s0) / h))
    xs = np.empty(n_steps + 1)
    zs = np.empty(n_steps + 1)
    ts = np.empty(n_steps + 1)
    x, z, t = y0
    xs[0], zs[0], ts[0] = x, z, t
    for k in range(n_steps):
        k1 = rhs(x, z, t)
        k2 = rhs(x + 0.5 * h * k1[0], z + 0.5 * h * k1[1], t + 0.5 * h * k1[2])
        k3 = rhs(x + 0.5 * h * k2[0], z + 0.5 * h * k2[1], t + 0.5 * h * k2[2])
        k4 = rhs(x + h * k3[0], z + h * k3[1], t + h * k3[2])
        x += (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        z += (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t += (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if z <= floor:
            raise DomainExitError(
                f"height {z:.6g} reached the domain boundary at step {k + 1}")
        if rotational and x < 1e-9:
            if abs(math.sin(t)) > 1e-6:
                raise AxisCollisionError(
                    f"profile hit the axis with theta = {t:.6g}")
            break
        xs[k + 1], zs[k + 1], ts[k + 1] = x, z, t
    else:
        return xs, zs, ts
    return xs[:k + 1], zs[:k + 1], ts[:k + 1]


def _profile_result(spec, curve: ProfileCurve) -> SolveResult:
    report = phi_minimal_residual(sample_geometry(curve, spec), spec)
    c_factor = report.max_abs_residual / curve.step**2
    return SolveResult(
        surface=curve,
        residual=report.max_abs_residual,
        iterations=len(curve) - 1,
        converged=True,
        diagnostics=f"minimality residual <= C step^2 with C = {c_factor:.3g}",
    )


def solve_rotational_profile(spec: PotentialSpec, cfg: ShootingConfig) -> SolveResult:
    """Integrate the rotationally symmetric profile of a weighted-minimal
    surface; axis-regular starts cross x = 0 by a series step."""
    if isinstance(cfg.start, AxisRegular):
        z0 = cfg.start.z0
        ev = eval_potential(spec, z0)
        a, b = ev.d1, ev.d2
        h = cfg.step
        th1 = a / 2.0
        th3 = a * (2.0 * b - a * a) / 32.0
        x1 = h - th1**2 * h**3 / 6.0
        z1 = z0 + th1 * h**2 / 2.0 + (th3 - th1**3 / 6.0) * h**4 / 4.0
        t1 = th1 * h + th3 * h**3
        xs, zs, ts = _integrate_profile(spec, ROTATIONAL, h, (x1, z1, t1), cfg)
        xs = np.concatenate([[0.0], xs])
        zs = np.concatenate([[z0], zs])
        ts = np.concatenate([[0.0], ts])
    elif isinstance(cfg.start, PointStart):
        if cfg.start.x0 <= 0.0:
            raise AxisCollisionError("point starts need x0 > 0; use AxisRegular")
        y0 = (cfg.start.x0, cfg.start.z0, cfg.start.theta0)
        xs, zs, ts = _integrate_profile(spec, ROTATIONAL, 0.0, y0, cfg)
    else:
        raise TypeError("start must be AxisRegular or PointStart")
    s = cfg.step * np.arange(len(xs))
    curve = ProfileCurve(s=s, x=xs, z=zs, theta=ts, kind=ROTATIONAL, step=cfg.step)
    return _profile_result(spec, curve)


def solve_translation_profile(spec: PotentialSpec, cfg: ShootingConfig) -> SolveResult:
    """Integrate the translation-invariant profile (ruled second direction)."""
    if not isinstance(cfg.start, PointStart):
        raise TypeError("translation-invariant profiles need a PointStart")
    y0 = (cfg.start.x0, cfg.start.z0, cfg.start.theta0)
    xs, zs, ts = _integrate_profile(spec, TRANSLATION, 0.0, y0, cfg)
    s = cfg.step * np.arange(len(xs))
    curve = ProfileCurve(s=s, x=xs, z=zs, theta=ts, kind=TRANSLATION, step=cfg.step)
    return _profile_result(spec, curve)


# ---------------------------------------------------------------------------
# graph Newton solver


def _pde_parts(u: np.ndarray, h: float):
    """Interior first/second differences of the grid function u."""
    p = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * h)
    q = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * h)
    r = (u[2:, 1:-1] - 2 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h**2
    s = (u[1:-1, 2:] - 2 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h**2
    t = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4 * h**2)
    return p, q, r, s, t


def graph_pde_residual(spec: PotentialSpec, u: np.ndarray, h: float) -> np.ndarray:
    """div(grad u / W) - phi'(u)/W at interior nodes."""
    p, q, r, s, t = _pde_parts(u, h)
    w2 = 1.0 + p**2 + q**2
    w = np.sqrt(w2)
    g = (1.0 + q**2) * r - 2.0 * p * q * t + (1.0 + p**2) * s
    d1 = eval_potential(spec, u[1:-1, 1:-1]).d1
    return g / (w2 * w) - d1 / w


def _graph_jacobian(spec: PotentialSpec, u: np.ndarray, h: float) -> sp.csr_matrix:
    nx, ny = u.shape
    p, q, r, s, t = _pde_parts(u, h)
    w2 = 1.0 + p**2 + q**2
    w = np.sqrt(w2)
    w3 = w2 * w
    w5 = w2 * w3
    g = (1.0 + q**2) * r - 2.0 * p * q * t + (1.0 + p**2) * s
    ev = eval_potential(spec, u[1:-1, 1:-1])
    f_r = (1.0 + q**2) / w3
    f_s = (1.0 + p**2) / w3
    f_t = -2.0 * p * q / w3
    f_p = (2.0 * p * s - 2.0 * q * t) / w3 - 3.0 * p * g / w5 + ev.d1 * p / w3
    f_q = (2.0 * q * r - 2.0 * p * t) / w3 - 3.0 * q * g / w5 + ev.d1 * q / w3
    f_u = -ev.d2 / w

    ii, jj = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
    row = (ii * ny + jj).ravel()
    interior = np.zeros(nx * ny, dtype=bool)
    interior[row] = True
    col_of = -np.ones(nx * ny, dtype=np.int64)
    col_of[row] = np.arange(row.size)

    stencil = [
        (1, 0, f_r / h**2 + f_p / (2 * h)),
        (-1, 0, f_r / h**2 - f_p / (2 * h)),
        (0, 1, f_s / h**2 + f_q / (2 * h)),
        (0, -1, f_s / h**2 - f_q / (2 * h)),
        (1, 1, f_t / (4 * h**2)),
        (-1, -1, f_t / (4 * h**2)),
        (1, -1, -f_t / (4 * h**2)),
        (-1, 1, -f_t / (4 * h**2)),
        (0, 0, -2.0 * f_r / h**2 - 2.0 * f_s / h**2 + f_u),
    ]
    rows, cols, vals = [], [], []
    for di, dj, coef in stencil:
        nbr = (ii + di) * ny + (jj + dj)
        keep = interior[nbr.ravel()]
        rows.append(col_of[row[keep]])
        cols.append(col_of[nbr.ravel()[keep]])
        vals.append(coef.ravel()[keep])
    n_int = row.size
    J = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_int, n_int))
    return J.tocsr()


def _harmonic_extension(u_bc: np.ndarray, h: float) -> np.ndarray:
    """Interior = discrete harmonic extension of the boundary values."""
    nx, ny = u_bc.shape
    ii, jj = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
    glob = (ii * ny + jj).ravel()
    interior = np.zeros(nx * ny, dtype=bool)
    interior[glob] = True
    col_of = -np.ones(nx * ny, dtype=np.int64)
    col_of[glob] = np.arange(glob.size)
    rows, cols, vals = [], [], []
    rhs = np.zeros(glob.size)
    u_flat = u_bc.ravel()
    for di, dj, coef in ((0, 0, 4.0), (1, 0, -1.0), (-1, 0, -1.0),
                         (0, 1, -1.0), (0, -1, -1.0)):
        nbr = ((ii + di) * ny + (jj + dj)).ravel()
        inside = interior[nbr]
        rows.append(np.arange(glob.size)[inside])
        cols.append(col_of[nbr[inside]])
        vals.append(np.full(inside.sum(), coef))
        rhs[~inside] -= coef * u_flat[nbr[~inside]]
    A = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(glob.size, glob.size)).tocsr()
    sol = spla.spsolve(A, rhs)
    u = u_bc.copy()
    u[1:-1, 1:-1] = sol.reshape(nx - 2, ny - 2)
    return u


def _initial_grid(cfg: NewtonConfig, X, Y, u_bc, h: float):
    guess = cfg.initial_guess
    u = u_bc.copy()
    if isinstance(guess, str) and guess == "harmonic":
        return _harmonic_extension(u_bc, h)
    if isinstance(guess, str) and guess == "zero":
        u[1:-1, 1:-1] = 0.0
        return u
    if isinstance(guess, tuple) and guess[0] == "paraboloid":
        a = float(guess[1])
        u[1:-1, 1:-1] = a * (X[1:-1, 1:-1] ** 2 + Y[1:-1, 1:-1] ** 2)
        return u
    if isinstance(guess, tuple) and guess[0] == "supplied":
        grid = np.asarray(guess[1], dtype=float)
        if grid.shape != u.shape:
            raise ValueError("supplied initial guess has the wrong shape")
        u[1:-1, 1:-1] = grid[1:-1, 1:-1]
        return u
    raise ValueError(f"unknown initial guess {guess!r}")


def solve_graph(spec: PotentialSpec, domain, h: float, boundary,
                cfg: NewtonConfig) -> SolveResult:
    """Damped Newton for the weighted-minimal graph with Dirichlet data.

    ``boundary`` is a callable (x, y) -> height evaluated on the edge
    nodes.  Convergence means max-norm PDE residual <= cfg.tol_residual;
    on failure the best iterate is returned with converged = False.
    """
    a, b, c, d = (float(v) for v in domain)
    nx = int(round((b - a) / h)) + 1
    ny = int(round((d - c) / h)) + 1
    if not (math.isclose(a + (nx - 1) * h, b, rel_tol=0, abs_tol=1e-9 * max(1, abs(b)))
            and math.isclose(c + (ny - 1) * h, d, rel_tol=0, abs_tol=1e-9 * max(1, abs(d)))):
        raise ValueError("h must divide both domain sides")
    xs = a + h * np.arange(nx)
    ys = c + h * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    u = np.zeros((nx, ny))
    mask_edge = np.zeros((nx, ny), dtype=bool)
    mask_edge[0, :] = mask_edge[-1, :] = True
    mask_edge[:, 0] = mask_edge[:, -1] = True
    u[mask_edge] = np.asarray(boundary(X[mask_edge], Y[mask_edge]), dtype=float)
    if np.any(u[mask_edge] <= spec.domain_left):
        raise DomainExitError("boundary heights leave the weight domain")
    u = _initial_grid(cfg, X, Y, u, h)
    if np.any(u <= spec.domain_left):
        raise DomainExitError("initial iterate leaves the weight domain")

    res = graph_pde_residual(spec, u, h)
    res_norm = float(np.abs(res).max())
    iters = 0
    stalled = False
    while res_norm > cfg.tol_residual and iters < cfg.max_iters and not stalled:
        J = _graph_jacobian(spec, u, h)
        delta = spla.spsolve(J, -res.ravel())
        step_len = 1.0
        accepted = False
        while step_len >= 2.0**-10:
            u_try = u.copy()
            u_try[1:-1, 1:-1] += step_len * delta.reshape(nx - 2, ny - 2)
            if np.all(u_try > spec.domain_left):
                res_try = graph_pde_residual(spec, u_try, h)
                try_norm = float(np.abs(res_try).max())
                if try_norm < res_norm:
                    accepted = True
                    break
            step_len *= cfg.damping
        if not accepted:
            stalled = True
            break
        u, res, res_norm = u_try, res_try, try_norm
        iters += 1

    patch = GraphPatch(domain=(a, b, c, d), h=h, u=u)
    converged = res_norm <= cfg.tol_residual
    return SolveResult(
        surface=patch,
        residual=res_norm,
        iterations=iters,
        converged=converged,
        diagnostics=f"PDE max-norm residual {res_norm:.3e} after {iters} Newton steps",
    )
