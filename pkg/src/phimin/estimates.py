"""Quantitative audits of weighted-minimal surface geometry.

The audits measure, at desk scale, the quantities whose qualitative
behaviour is known for mean-convex weighted-minimal surfaces:

* intrinsic area of geodesic disks against the 4 pi rho^2 bound,
  gated on the slope-smallness hypotheses 2 rho phi'(rho + mu(p)) < log 2
  and sqrt(|Gamma|) rho < 1;
* the normalised density phi(r) A(r) / (4 pi r^2) of extrinsic balls,
  which is monotone in r on a normalisation window 0 <= phi(eps) < 1;
* the curvature ratio sup |S| / phi'(mu), bounded for admissible weights;
* convexity: min K with the sup k2/eta diagnostic and hypothesis gates;
* rescaling sequences lambda (Sigma - p) compared on a fixed window to a
  limit model (plane, grim reaper profile, or bowl profile);
* the test-function inequalities |grad log|p|^2| <= 2 and
  Lap^phi log|p|^2 <= 2A + 1 used by drift maximum principles.

Intrinsic distances come from Dijkstra shortest paths on a refined
sample lattice whose neighbour template includes knight moves (the
metric error of the 8-template alone exceeds the flat-disk control).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .ilmanen import frame_quantities
from .potential import (PotentialSpec, eval_potential, normalized_for_window)
from .solvers import (AxisRegular, PointStart, ShootingConfig, SolveResult,
                      solve_rotational_profile, solve_translation_profile)
from .surface_geometry import (GeometryField, GraphPatch, ProfileCurve,
                               ResidualReport, ROTATIONAL, TRANSLATION,
                               drift_laplacian, sample_geometry, _make_report)

LOG2 = float(np.log(2.0))


class PatchExceededError(ValueError):
    """Requested ball or window leaves the sampled patch."""


class WindowUnderflowError(ValueError):
    """Rescaled data does not cover the comparison window."""


class OriginProximityError(ValueError):
    """All samples too close to the ambient origin for the log audit."""


# ---------------------------------------------------------------------------
# report types


@dataclass
class AreaReport:
    center_index: int
    rho: float
    hypothesis_ok: bool
    disk_area: float
    bound: float
    passed: bool


@dataclass
class DensityReport:
    center: np.ndarray
    radii: np.ndarray
    o_values: np.ndarray
    epsilon: float
    monotone: bool
    tolerance: np.ndarray
    o_values_weighted: np.ndarray = None  # non-standard comparison variant


@dataclass
class ConvexityReport:
    min_K: float
    min_k2: float
    theta_sup: float
    lambda_K_inf: float
    hypotheses: dict
    verdict: str


@dataclass
class BlowupStage:
    scale: float
    basepoint: np.ndarray
    slope_ratio: float
    hausdorff_distance: float
    c2_distance: float
    n_window_samples: int


@dataclass
class BlowupResult:
    model: str
    stages: list
    slope_constant: float

    @property
    def hausdorff_distance(self) -> float:
        return self.stages[-1].hausdorff_distance

    @property
    def c2_distance(self) -> float:
        return self.stages[-1].c2_distance


@dataclass
class IlmanenEstimateReport:
    sup_curvature_times_reach: float
    sup_curvature_times_spectral: float
    reach: float
    sectional_bound: float
    sup_conformal_curvature: float


# ---------------------------------------------------------------------------
# lattice distances on graph patches


def _graph_lattice(field: GeometryField, refine: int = 2):
    """Positions of the refined sample lattice of a graph patch.

    The height of inserted nodes is bilinear in the stored samples, so
    the lattice lives on the piecewise-linear interpolant surface.
    """
    patch: GraphPatch = field.source
    u = patch.u
    for _ in range(refine - 1):
        nx, ny = u.shape
        fine = np.empty((2 * nx - 1, 2 * ny - 1))
        fine[::2, ::2] = u
        fine[1::2, ::2] = 0.5 * (u[:-1, :] + u[1:, :])
        fine[::2, 1::2] = 0.5 * (u[:, :-1] + u[:, 1:])
        fine[1::2, 1::2] = 0.25 * (u[:-1, :-1] + u[1:, :-1] + u[:-1, 1:] + u[1:, 1:])
        u = fine
    h = patch.h / (2 ** (refine - 1))
    a, b, c, d = patch.domain
    nx, ny = u.shape
    xs = a + h * np.arange(nx)
    ys = c + h * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pos = np.stack([X, Y, u], axis=-1)
    return pos, h


_NEIGHBOR_TEMPLATE = ((1, 0), (0, 1), (1, 1), (1, -1),
                      (2, 1), (1, 2), (2, -1), (1, -2))


def _lattice_distances(pos: np.ndarray, sources, conformal_weight=None):
    """Multi-source Dijkstra distances on the knight-augmented lattice.

    pos has shape (nx, ny, 3); edge lengths are ambient chords, times
    the average conformal factor of the endpoints when supplied.
    """
    nx, ny, _ = pos.shape
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    rows, cols, vals = [], [], []
    flat = pos.reshape(n, 3)
    w = None if conformal_weight is None else conformal_weight.reshape(n)
    for di, dj in _NEIGHBOR_TEMPLATE:
        if dj >= 0:
            s_blk = idx[:nx - di, :ny - dj]
            d_blk = idx[di:, dj:]
        else:
            s_blk = idx[:nx - di, -dj:]
            d_blk = idx[di:, :ny + dj]
        s_flat = s_blk.ravel()
        d_flat = d_blk.ravel()
        lengths = np.linalg.norm(flat[d_flat] - flat[s_flat], axis=1)
        if w is not None:
            lengths = lengths * 0.5 * (w[s_flat] + w[d_flat])
        rows.append(s_flat)
        cols.append(d_flat)
        vals.append(lengths)
    graph = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    dist = _csgraph_dijkstra(graph, directed=False, indices=np.asarray(sources),
                             min_only=len(np.atleast_1d(sources)) > 1)
    if dist.ndim > 1:
        dist = dist[0]
    return dist.reshape(nx, ny)


def _cell_areas(pos: np.ndarray) -> np.ndarray:
    """Areas of lattice cells as two ambient triangles each."""
    p00 = pos[:-1, :-1]
    p10 = pos[1:, :-1]
    p01 = pos[:-1, 1:]
    p11 = pos[1:, 1:]
    a1 = 0.5 * np.linalg.norm(np.cross(p10 - p00, p01 - p00), axis=-1)
    a2 = 0.5 * np.linalg.norm(np.cross(p11 - p10, p11 - p01), axis=-1)
    return a1 + a2


# ---------------------------------------------------------------------------
# geodesic disk area audit


def geodesic_disk_area_check(field: GeometryField, p: int, rho: float,
                             spec: PotentialSpec, gamma: float) -> AreaReport:
    """Intrinsic area of the geodesic disk of radius rho about sample p
    against the 4 pi rho^2 bound, with the slope-smallness hypothesis gate.

    Distances: knight-template Dijkstra on the once-refined lattice for
    graphs; exact arclength from the axis sample of rotational profiles;
    the flat unrolling for translation-invariant profiles.
    """
    mu_p = float(field.mu[p])
    try:
        d1_at = eval_potential(spec, rho + mu_p).d1
        hypothesis_ok = (2.0 * rho * d1_at < LOG2) and (np.sqrt(abs(gamma)) * rho < 1.0)
    except Exception:
        hypothesis_ok = False

    if field.is_profile:
        area = _profile_disk_area(field, p, rho)
    else:
        area = _graph_disk_area(field, p, rho)
    bound = 4.0 * np.pi * rho**2
    return AreaReport(center_index=int(p), rho=float(rho),
                      hypothesis_ok=bool(hypothesis_ok),
                      disk_area=float(area), bound=float(bound),
                      passed=bool(area < bound))


def _profile_disk_area(field: GeometryField, p: int, rho: float) -> float:
    curve: ProfileCurve = field.source
    s = curve.s
    if curve.kind == ROTATIONAL:
        if not (p == 0 and curve.x[0] < 1e-10):
            raise ValueError(
                "rotational disk centers must be the axis sample (index 0)")
        if rho >= s[-1]:
            raise PatchExceededError("disk radius exceeds the sampled profile")
        # meridians through the pole are minimizing: distance = arclength
        ring = 2.0 * np.pi * curve.x
        inside = s <= rho
        k = int(np.sum(inside))
        area = float(np.trapezoid(ring[:k], dx=curve.step))
        # partial last interval, linear in the ring radius
        frac = (rho - s[k - 1]) / curve.step
        ring_rho = ring[k - 1] + frac * (ring[k] - ring[k - 1])
        area += 0.5 * (ring[k - 1] + ring_rho) * (rho - s[k - 1])
        return area
    # flat unrolling: the surface is isometric to the (s, y) plane
    if s[p] - rho < s[0] or s[p] + rho > s[-1]:
        raise PatchExceededError("disk radius exceeds the sampled profile")
    d = np.abs(s - s[p])
    chord = np.where(d < rho, 2.0 * np.sqrt(np.maximum(rho**2 - d**2, 0.0)), 0.0)
    return float(np.trapezoid(chord, dx=curve.step))


def _graph_disk_area(field: GeometryField, p: int, rho: float) -> float:
    patch: GraphPatch = field.source
    pos, h = _graph_lattice(field, refine=2)
    pi, pj = divmod(int(p), patch.ny)
    src = (2 * pi) * pos.shape[1] + 2 * pj
    dist = _lattice_distances(pos, [src])
    inside = dist < rho
    edge = np.zeros_like(inside)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    if np.any(inside & edge):
        raise PatchExceededError("geodesic disk touches the sample boundary")
    areas = _cell_areas(pos)
    corner_count = (inside[:-1, :-1].astype(float) + inside[1:, :-1]
                    + inside[:-1, 1:] + inside[1:, 1:])
    return float(np.sum(areas * corner_count / 4.0))


# ---------------------------------------------------------------------------
# density monotonicity audit


def density_monotonicity(field: GeometryField, q: int, radii, spec: PotentialSpec,
                         epsilon: float, weighted_variant: bool = False) -> DensityReport:
    """Normalised density phi(r) A(r) / (4 pi r^2) over increasing radii.

    A(r) is the area of the surface inside the Euclidean ball B(q, r);
    the weight is re-normalised so that phi(0) = 0 <= phi(eps) < 1.  The
    optional variant records int e^(phi o mu) dA / (4 pi r^2) instead of
    applying phi at the radius; it is a non-standard comparison value.
    """
    radii = np.asarray(sorted(float(r) for r in radii))
    if radii.size == 0 or radii[0] <= 0.0:
        raise ValueError("radii must be positive")
    if np.any(radii >= epsilon):
        raise ValueError("all radii must stay below the normalisation window")
    norm_spec = normalized_for_window(spec, epsilon)
    q_pos = field.positions[int(q)]

    areas = np.empty(radii.size)
    tols = np.empty(radii.size)
    weighted = np.empty(radii.size)
    for k, r in enumerate(radii):
        areas[k], tols[k], weighted[k] = _clipped_area(field, q_pos, r, norm_spec)
    phis = np.array([eval_potential(norm_spec, r).phi for r in radii])
    o_vals = phis * areas / (4.0 * np.pi * radii**2)
    o_tols = phis * tols / (4.0 * np.pi * radii**2)
    mono = all(o_vals[k + 1] >= o_vals[k] - (o_tols[k] + o_tols[k + 1])
               for k in range(radii.size - 1))
    return DensityReport(center=q_pos, radii=radii, o_values=o_vals,
                         epsilon=float(epsilon), monotone=bool(mono),
                         tolerance=o_tols,
                         o_values_weighted=(weighted / (4.0 * np.pi * radii**2)
                                            if weighted_variant else None))


def _clipped_area(field: GeometryField, q: np.ndarray, r: float,
                  norm_spec: PotentialSpec):
    """(area, clip tolerance, e^phi-weighted area) of the surface in B(q, r)."""
    if field.is_profile:
        curve: ProfileCurve = field.source
        mid = lambda a: 0.5 * (a[:-1] + a[1:])
        xm, zm = mid(curve.x), mid(curve.z)
        wm = np.exp(eval_potential(norm_spec, zm).phi)
        ds = curve.step
        if curve.kind == ROTATIONAL:
            qr = float(np.hypot(q[0], q[1]))
            dz2 = (zm - q[2]) ** 2
            if qr < 1e-12:
                inside = xm**2 + dz2 < r**2
                frac = inside.astype(float)
            else:
                # ring point distance: |P-q|^2 = x^2 + qr^2 + dz^2 - 2 x qr cos(v)
                cos_v = (xm**2 + qr**2 + dz2 - r**2) / (2.0 * xm * qr)
                frac = np.arccos(np.clip(cos_v, -1.0, 1.0)) / np.pi
            contrib = 2.0 * np.pi * xm * ds * frac
            # an axis start is an interior pole, not a patch boundary
            start_is_boundary = curve.x[0] > 1e-10
            if (frac[0] > 0.0 and start_is_boundary) or frac[-1] > 0.0:
                raise PatchExceededError("ball reaches the profile ends")
            tol = 2.0 * np.pi * r * ds  # boundary length times spacing
            return float(contrib.sum()), tol, float((wm * contrib).sum())
        d2 = (xm - q[0]) ** 2 + (zm - q[2]) ** 2
        chord = 2.0 * np.sqrt(np.maximum(r**2 - d2, 0.0))
        if chord[0] > 0.0 or chord[-1] > 0.0:
            raise PatchExceededError("ball reaches the profile ends")
        contrib = chord * ds
        tol = 2.0 * np.pi * r * ds
        return float(contrib.sum()), tol, float((wm * contrib).sum())

    pos, h = _graph_lattice(field, refine=2)
    areas = _cell_areas(pos)
    centers_mu = 0.25 * (pos[:-1, :-1, 2] + pos[1:, :-1, 2]
                         + pos[:-1, 1:, 2] + pos[1:, 1:, 2])
    # 4x4 subsample of each cell for the clipping fraction
    sub = np.linspace(1.0 / 8.0, 7.0 / 8.0, 4)
    frac = np.zeros(areas.shape)
    for sx in sub:
        for sy in sub:
            pt = ((1 - sx) * (1 - sy) * pos[:-1, :-1] + sx * (1 - sy) * pos[1:, :-1]
                  + (1 - sx) * sy * pos[:-1, 1:] + sx * sy * pos[1:, 1:])
            frac += (np.linalg.norm(pt - q, axis=-1) < r)
    frac /= 16.0
    boundary_cells = (frac > 0) & (frac < 1)
    edge = np.zeros_like(boundary_cells)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    if np.any((frac > 0) & edge):
        raise PatchExceededError("ball reaches the patch boundary")
    area = float(np.sum(areas * frac))
    tol = float(np.sum(areas[boundary_cells]) / 16.0) + 2.0 * r * h
    wcell = np.exp(eval_potential(norm_spec, centers_mu).phi)
    return area, tol, float(np.sum(areas * frac * wcell))


# ---------------------------------------------------------------------------
# curvature ratio and convexity


def curvature_ratio_sup(field: GeometryField, spec: PotentialSpec) -> float:
    """sup over samples of |S| / phi'(mu); requires phi' > 0 on the heights."""
    d1 = eval_potential(spec, field.mu).d1
    if np.any(d1 <= 0.0):
        raise ValueError("curvature ratio needs phi' > 0 on sampled heights")
    s_norm = np.sqrt(np.maximum(field.norm_s2(), 0.0))
    return float(np.max(s_norm / d1))


def convexity_report(field: GeometryField, spec: PotentialSpec,
                     tol: float) -> ConvexityReport:
    """Convexity audit: min K with hypothesis gates and the sup k2/eta
    diagnostic (k2 = larger principal curvature).

    Verdict semantics: when the weight hypotheses hold and the surface is
    mean convex, min K >= -tol is ConvexWithinTol; a failing gate yields
    HypothesesFail and the values are reported without assertion.
    """
    from .potential import check_conditions

    z_lo = max(float(field.mu.min()), spec.domain_left + 1e-9)
    z_hi = float(field.mu.max())
    if z_hi <= z_lo:
        z_hi = z_lo + 1.0
    cond = check_conditions(spec, z_lo, z_hi, 101)
    mean_convex = bool(np.max(field.H) <= tol)
    hypotheses = {
        "c1": cond.c1_holds,
        "cc3": cond.cc3_holds,
        "d3_nonpositive": cond.d3_nonpositive,
        "mean_convex": mean_convex,
    }
    k_hi = np.maximum(field.k1, field.k2)
    min_K = float(field.K.min())
    min_k2 = float(k_hi.min())
    pos_eta = field.eta > 1e-10
    theta_sup = float(np.max(k_hi[pos_eta] / field.eta[pos_eta])) if np.any(pos_eta) else float("-inf")
    lambda_K_inf = float(cond.lam * min_K)
    if not all(hypotheses.values()):
        verdict = "HypothesesFail"
    elif min_K >= -tol:
        verdict = "ConvexWithinTol"
    else:
        verdict = "NotConvex"
    return ConvexityReport(min_K=min_K, min_k2=min_k2, theta_sup=theta_sup,
                           lambda_K_inf=lambda_K_inf, hypotheses=hypotheses,
                           verdict=verdict)


# ---------------------------------------------------------------------------
# conformal curvature-times-distance report


def ilmanen_estimate_report(field: GeometryField, spec: PotentialSpec,
                            boundary) -> IlmanenEstimateReport:
    """Report-only sups of |S^phi| min(d_phi(p, boundary), R) and
    |S^phi| min(d_phi, pi / (2 sqrt(A))) with R, A from the sampled
    conformal curvature of the ambient space.

    d_phi uses conformal edge lengths e^(phi/2) x Euclidean; on profiles
    the meridian chain distance is used (an upper bound, adequate for a
    report-only sup).
    """
    boundary = np.asarray(sorted(set(int(b) for b in boundary)), dtype=np.int64)
    if boundary.size == 0:
        raise ValueError("boundary sample set is empty")
    ev = eval_potential(spec, field.mu)
    half_slope = 0.5 * ev.d1 * field.eta
    scale = np.exp(-ev.phi / 2.0)
    k1c = scale * (field.k1 + half_slope)
    k2c = scale * (field.k2 + half_slope)
    s_conf = np.sqrt(k1c**2 + k2c**2)

    conf = np.exp(ev.phi / 2.0)
    if field.is_profile:
        curve: ProfileCurve = field.source
        edge = 0.5 * (conf[:-1] + conf[1:]) * curve.step
        cum = np.concatenate([[0.0], np.cumsum(edge)])
        d_phi = np.min(np.abs(cum[:, None] - cum[None, boundary]), axis=1)
    else:
        patch: GraphPatch = field.source
        pos = field.positions.reshape(patch.nx, patch.ny, 3)
        d_phi = _lattice_distances(pos, boundary,
                                   conformal_weight=conf.reshape(patch.nx, patch.ny))
        d_phi = d_phi.ravel()

    heights = np.linspace(float(field.mu.min()), float(field.mu.max()), 65)
    sup_k = 0.0
    sup_grad = 0.0
    for z in heights:
        fq = frame_quantities(spec, z)
        off = ~np.eye(3, dtype=bool)
        sup_k = max(sup_k, float(np.abs(fq.sectional[off]).max()))
        sup_grad = max(sup_grad, float(np.abs(fq.curvature_gradient_e3[off]).max()))
    reach = 1.0 / (sup_k + np.sqrt(sup_grad)) if (sup_k + np.sqrt(sup_grad)) > 0 else np.inf
    spectral = np.pi / (2.0 * np.sqrt(sup_k)) if sup_k > 0 else np.inf

    sup1 = float(np.max(s_conf * np.minimum(d_phi, reach)))
    sup2 = float(np.max(s_conf * np.minimum(d_phi, spectral)))
    return IlmanenEstimateReport(
        sup_curvature_times_reach=sup1,
        sup_curvature_times_spectral=sup2,
        reach=float(reach),
        sectional_bound=float(sup_k),
        sup_conformal_curvature=float(s_conf.max()),
    )


# ---------------------------------------------------------------------------
# rescaling and blow-up comparison


def rescale_profile(curve: ProfileCurve, lam: float,
                    base_index: int = 0) -> ProfileCurve:
    """The profile of lambda (Sigma - p) about a sample p of the curve.

    Rotational curves must be rescaled about their axis sample so the
    result is again a profile; curvature fields of the resulting surface
    are exactly 1/lambda times the originals at matched samples.
    """
    if lam <= 0.0:
        raise ValueError("scale must be positive")
    if curve.kind == ROTATIONAL:
        if not (curve.x[base_index] < 1e-10):
            raise ValueError("rotational rescaling needs an axis basepoint")
        x_new = lam * curve.x
    else:
        x_new = lam * (curve.x - curve.x[base_index])
    return ProfileCurve(
        s=lam * (curve.s - curve.s[base_index]),
        x=x_new,
        z=lam * (curve.z - curve.z[base_index]),
        theta=curve.theta.copy(),
        kind=curve.kind,
        step=lam * curve.step,
    )


def _window_samples(curve: ProfileCurve, field: GeometryField, p: int,
                    lam: float, window: float):
    """Rescaled surface samples of lambda (Sigma - p) inside the window ball."""
    s_half = 1.5 * window / lam
    sel = np.abs(curve.s - curve.s[p]) <= s_half
    if curve.s[p] + s_half > curve.s[-1] or curve.s[p] - s_half < curve.s[0]:
        if not (curve.kind == ROTATIONAL and curve.s[p] - s_half < curve.s[0]
                and curve.x[0] < 1e-10):
            raise WindowUnderflowError("window exceeds the sampled profile")
    idx = np.where(sel)[0]
    base = field.positions[p]
    pts, etas, Hs, Ks = [], [], [], []
    if curve.kind == ROTATIONAL:
        x_p = curve.x[p]
        if x_p > 1e-10:
            v_half = min(np.pi, 1.5 * window / (lam * max(x_p - s_half, 1e-6)))
        else:
            v_half = np.pi
        vs = np.linspace(-v_half, v_half, 65)
        for i in idx:
            ring = np.stack([curve.x[i] * np.cos(vs), curve.x[i] * np.sin(vs),
                             np.full_like(vs, curve.z[i])], axis=1)
            q = lam * (ring - base)
            keep = np.linalg.norm(q, axis=1) <= window
            pts.append(q[keep])
            etas.append(np.full(keep.sum(), field.eta[i]))
            Hs.append(np.full(keep.sum(), field.H[i] / lam))
            Ks.append(np.full(keep.sum(), field.K[i] / lam**2))
    else:
        y_half = 1.5 * window / lam
        ys = np.linspace(-y_half, y_half, 65)
        for i in idx:
            line = np.stack([np.full_like(ys, curve.x[i]), ys,
                             np.full_like(ys, curve.z[i])], axis=1)
            q = lam * (line - base)
            keep = np.linalg.norm(q, axis=1) <= window
            pts.append(q[keep])
            etas.append(np.full(keep.sum(), field.eta[i]))
            Hs.append(np.full(keep.sum(), field.H[i] / lam))
            Ks.append(np.full(keep.sum(), field.K[i] / lam**2))
    pts = np.concatenate(pts)
    if pts.shape[0] < 16 or np.linalg.norm(pts, axis=1).max() < 0.8 * window:
        raise WindowUnderflowError("rescaled samples do not fill the window")
    return pts, np.concatenate(etas), np.concatenate(Hs), np.concatenate(Ks)


def _plane_distance(pts, etas, Hs, normals_eta_sign):
    centred = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    n_hat = vt[-1]
    if n_hat[2] * normals_eta_sign < 0:
        n_hat = -n_hat
    hausdorff = float(np.abs(centred @ n_hat).max())
    eta_plane = n_hat[2]
    c2 = float(max(np.abs(etas - eta_plane).max(), np.abs(Hs).max()))
    return hausdorff, c2


def _model_profile(model: str, c_slope: float, s_max: float, step: float):
    spec = PotentialSpec.linear(c_slope)
    cfg = ShootingConfig(
        start=AxisRegular(0.0) if model == "Bowl" else PointStart(0.0, 0.0, 0.0),
        s_max=s_max, step=step)
    if model == "Bowl":
        return spec, solve_rotational_profile(spec, cfg)
    return spec, solve_translation_profile(spec, cfg)


def _profile_model_distance(pts, etas, Hs, model: str, c_slope: float,
                            window: float):
    """Compare rescaled window samples to a soliton profile through 0."""
    step = min(2e-3, window / 200.0)
    spec, res = _model_profile(model, max(c_slope, 1e-8), 2.5 * window, step)
    curve: ProfileCurve = res.surface
    mfield = sample_geometry(curve, spec)
    if model == "Bowl":
        r_samp = np.hypot(pts[:, 0], pts[:, 1])
    else:
        r_samp = np.abs(pts[:, 0])
    z_model = np.interp(r_samp, curve.x, curve.z)
    eta_model = np.interp(r_samp, curve.x, mfield.eta)
    h_model = np.interp(r_samp, curve.x, mfield.H)
    hausdorff = float(np.abs(pts[:, 2] - z_model).max())
    c2 = float(max(np.abs(etas - eta_model).max(), np.abs(Hs - h_model).max()))
    return hausdorff, c2


def blowup_rescale(source, basepoints, scales, spec: PotentialSpec,
                   model: str, window: float = 1.0) -> BlowupResult:
    """Rescale lambda_n (Sigma - p_n) and compare to a limit model on a
    fixed window ball.

    ``source`` is a profile SolveResult (or ProfileCurve), or a list of
    them (one per stage) for sequences built from separate solves;
    ``basepoints`` are sample indices.  Curvatures of the rescaled data
    are the stored fields scaled by 1/lambda_n, and the slope ratio
    phi'(mu(p_n)) / lambda_n is recorded per stage with its final value
    as the limit-constant estimate.
    """
    if model not in ("Plane", "GrimReaper", "Bowl"):
        raise ValueError(f"unknown blow-up model {model!r}")
    scales = [float(s) for s in scales]
    basepoints = [int(p) for p in basepoints]
    if sorted(scales) != scales or any(s <= 0 for s in scales):
        raise ValueError("scales must be positive and increasing")
    if not isinstance(source, (list, tuple)):
        source = [source] * len(basepoints)
    if len(source) != len(basepoints) or len(scales) != len(basepoints):
        raise ValueError("need one source/basepoint per scale")

    stages = []
    ratio = float("nan")
    for src, p, lam in zip(source, basepoints, scales):
        curve = src.surface if isinstance(src, SolveResult) else src
        if not isinstance(curve, ProfileCurve):
            raise TypeError("blow-up comparison works on profile sources")
        field = sample_geometry(curve, spec)
        ratio = float(eval_potential(spec, field.mu[p]).d1 / lam)
        pts, etas, Hs, Ks = _window_samples(curve, field, p, lam, window)
        if model == "Plane":
            sign = np.sign(field.eta[p]) if field.eta[p] != 0 else 1.0
            hd, c2 = _plane_distance(pts, etas, Hs, sign)
        else:
            hd, c2 = _profile_model_distance(pts, etas, Hs, model, ratio, window)
        stages.append(BlowupStage(scale=lam, basepoint=field.positions[p],
                                  slope_ratio=ratio, hausdorff_distance=hd,
                                  c2_distance=c2, n_window_samples=len(pts)))
    return BlowupResult(model=model, stages=stages, slope_constant=ratio)


# ---------------------------------------------------------------------------
# drift maximum-principle test function


def omori_gamma_check(field: GeometryField, spec: PotentialSpec,
                      min_radius: float = 2.0):
    """Check |grad g| <= 2 and Lap^phi g <= 2A + 1 for g = 2 log |p|.

    A is sup mu phi'(mu) / |p|^2 over the qualifying samples; violations
    are reported as positive residual margins.  Samples with |p| below
    min_radius are ignored (the bound needs |p| >= 2).
    """
    r_amb = np.linalg.norm(field.positions, axis=1)
    margin = 2
    mask = field.interior_mask(margin) & (r_amb >= min_radius)
    if not np.any(mask):
        raise OriginProximityError("no samples far enough from the origin")

    p_normal = np.sum(field.positions * field.normal, axis=1)
    p_tan_sq = np.maximum(r_amb**2 - p_normal**2, 0.0)
    grad_gamma = 2.0 * np.sqrt(p_tan_sq) / r_amb**2
    res_grad = np.maximum(grad_gamma - 2.0, 0.0)

    gamma = 2.0 * np.log(r_amb)
    phi_mu = eval_potential(spec, field.mu).phi
    lap = drift_laplacian(field, gamma, phi_mu)
    if field.is_profile and field.source.kind == TRANSLATION:
        lap = lap + 2.0 / r_amb**2  # transverse part of the flat-chart Laplacian
    d1 = eval_potential(spec, field.mu).d1
    a_const = float(np.max(field.mu[mask] * d1[mask] / r_amb[mask] ** 2))
    res_lap = np.maximum(lap - (2.0 * a_const + 1.0), 0.0)

    rep_grad = _make_report("log_distance_gradient_bound", np.where(mask, res_grad, 0.0),
                            mask, field.grid_h, margin)
    rep_lap = _make_report("log_distance_drift_laplacian_bound",
                           np.where(mask, res_lap, 0.0), mask, field.grid_h, margin)
    return rep_grad, rep_lap
