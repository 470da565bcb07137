"""Planar geometry for the projected design cube.

The image of the cube [-1, 1]^D under an orthonormal 2-column projection is
a centrally symmetric convex polygon built from the projection's row
generators.  Stretch sampling covers the part of that polygon left empty by
projected random samples: boundary points of the data hull and of the
polygon are triangulated and exterior circumcenters become new active
coordinates, each lifted back to the cube with randomly drawn inactive
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .exceptions import DimensionError, DomainError, GeometryError


@dataclass
class Zonotope2D:
    """Convex polygon with counterclockwise vertices, no repeated endpoint."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or self.vertices.shape[0] < 3:
            raise GeometryError("polygon needs at least 3 two-dimensional vertices")

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Vectorized point-in-convex-polygon test (boundary counts as inside)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        verts = self.vertices
        nxt = np.roll(verts, -1, axis=0)
        edge = nxt - verts
        # Cross product of each edge with each point offset; all >= -tol for CCW.
        rel = pts[:, None, :] - verts[None, :, :]
        cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
        scale = np.maximum(np.linalg.norm(edge, axis=1), 1e-300)
        inside = np.all(cross / scale[None, :] >= -tol, axis=1)
        return inside if np.asarray(points).ndim > 1 else bool(inside[0])


def zonotope_vertices(basis: np.ndarray) -> Zonotope2D:
    """Polygon image of the unit cube under the 2-column projection ``basis``.

    Standard planar construction: flip the D generator rows into the upper
    half-plane, sort by angle, and walk the boundary starting from the sum
    of all downward flips; at most 2D vertices result.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != 2:
        raise DimensionError("projection basis must have exactly 2 columns")
    gens = basis.copy()
    norms = np.linalg.norm(gens, axis=1)
    gens = gens[norms > 1e-14]
    if gens.shape[0] < 2:
        raise GeometryError("projection is degenerate: fewer than two nonzero generators")
    flip = (gens[:, 1] < 0) | ((gens[:, 1] == 0) & (gens[:, 0] < 0))
    gens[flip] = -gens[flip]
    order = np.argsort(np.arctan2(gens[:, 1], gens[:, 0]), kind="stable")
    gens = gens[order]
    start = -np.sum(gens, axis=0)
    verts = [start]
    for g in gens:
        verts.append(verts[-1] + 2.0 * g)
    for g in gens:
        verts.append(verts[-1] - 2.0 * g)
    verts = np.asarray(verts[:-1])
    # Merge collinear corners produced by parallel generators.
    keep = []
    m = len(verts)
    for i in range(m):
        prev, cur, nxt = verts[i - 1], verts[i], verts[(i + 1) % m]
        cross = (cur[0] - prev[0]) * (nxt[1] - prev[1]) - (cur[1] - prev[1]) * (nxt[0] - prev[0])
        if abs(cross) > 1e-12:
            keep.append(i)
    if len(keep) < 3:
        raise GeometryError("projection image is degenerate (not a polygon)")
    return Zonotope2D(vertices=verts[keep])


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull; counterclockwise vertices, no repeat."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] < 3:
        raise GeometryError("need at least 3 distinct points for a hull")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 1e-14:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.asarray(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        raise GeometryError("points are collinear: hull is degenerate")
    return hull


def polygon_boundary_points(vertices: np.ndarray, n: int) -> np.ndarray:
    """``n`` points uniform in arc length along a closed polygon boundary."""
    if n < 1:
        raise DomainError("need at least one boundary point")
    verts = np.asarray(vertices, dtype=float)
    closed = np.vstack([verts, verts[:1]])
    seg = np.diff(closed, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if total <= 0:
        raise GeometryError("polygon has zero perimeter")
    targets = np.arange(n) * total / n
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
    return closed[idx] + frac[:, None] * seg[idx]


def _circumcircle(a, b, c):
    """Circumcenter and squared radius of a triangle, or None if degenerate."""
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < 1e-300:
        return None
    a2, b2, c2 = a @ a, b @ b, c @ c
    ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
    uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
    center = np.array([ux, uy])
    return center, float((a - center) @ (a - center))


def delaunay_triangulation(points: np.ndarray) -> list[tuple[int, int, int]]:
    """Incremental (Bowyer-Watson) Delaunay triangulation of planar points.

    Returns index triples into ``points``.  Inputs are assumed jittered
    against exact cocircularity by the caller.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 3:
        raise GeometryError("triangulation needs at least 3 points")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1.0)
    mid = (lo + hi) / 2.0
    super_pts = np.array(
        [
            [mid[0] - 20.0 * span, mid[1] - 10.0 * span],
            [mid[0] + 20.0 * span, mid[1] - 10.0 * span],
            [mid[0], mid[1] + 20.0 * span],
        ]
    )
    all_pts = np.vstack([pts, super_pts])
    s0, s1, s2 = n, n + 1, n + 2

    tris = {}

    def add_triangle(i, j, k):
        circ = _circumcircle(all_pts[i], all_pts[j], all_pts[k])
        if circ is not None:
            tris[(i, j, k)] = circ

    add_triangle(s0, s1, s2)
    for p in range(n):
        point = all_pts[p]
        bad = []
        for tri, (center, r2) in tris.items():
            diff = point - center
            if diff @ diff < r2 * (1.0 + 1e-12):
                bad.append(tri)
        edge_count = {}
        for tri in bad:
            i, j, k = tri
            for e in ((i, j), (j, k), (k, i)):
                key = (min(e), max(e))
                edge_count[key] = edge_count.get(key, 0) + 1
            del tris[tri]
        for (i, j), cnt in edge_count.items():
            if cnt == 1:
                add_triangle(i, j, p)
    return [tri for tri in tris if all(v < n for v in tri)]


@dataclass
class StretchSamples:
    """New designs stretched toward uncovered zonotope regions."""

    active: np.ndarray
    thetas_unit: np.ndarray
    thetas_raw: np.ndarray


def stretch_sample(
    basis: np.ndarray,
    thetas_unit: np.ndarray,
    zonotope: Zonotope2D,
    domain,
    n_boundary: int = 25,
    seed: int = 0,
) -> StretchSamples:
    """Propose designs whose projections fill the zonotope beyond the data hull.

    Boundary points of the projected-data hull and of the zonotope (uniform
    in arc length, ``n_boundary`` each) are triangulated; circumcenters
    falling outside the data hull but inside the zonotope become new active
    coordinates, each lifted with inactive coordinates drawn uniformly from
    the feasible slice.
    """
    basis = np.asarray(basis, dtype=float)
    unit = np.asarray(thetas_unit, dtype=float)
    projected = unit @ basis
    hull_verts = convex_hull_2d(projected)
    data_hull = Zonotope2D(vertices=hull_verts)

    rng = np.random.default_rng(seed)
    boundary = np.vstack(
        [
            polygon_boundary_points(hull_verts, n_boundary),
            polygon_boundary_points(zonotope.vertices, n_boundary),
        ]
    )
    # Tiny seeded jitter wards off exact cocircularity in the triangulation.
    boundary = boundary + 1e-9 * rng.standard_normal(boundary.shape)

    centers = []
    for i, j, k in delaunay_triangulation(boundary):
        circ = _circumcircle(boundary[i], boundary[j], boundary[k])
        if circ is None:
            continue
        center = circ[0]
        if not data_hull.contains(center, tol=-1e-12) and zonotope.contains(center, tol=1e-12):
            centers.append(center)
    if not centers:
        empty = np.empty((0, unit.shape[1]))
        return StretchSamples(active=np.empty((0, 2)), thetas_unit=empty, thetas_raw=empty)
    active = np.asarray(centers)

    sampler = InactiveSampler(basis, zonotope=zonotope)
    lifts = []
    for i, gamma in enumerate(active):
        zeta = sampler.sample(gamma, 1, seed=np.random.SeedSequence((seed, i)))[0]
        lifts.append(sampler.lift(gamma, zeta))
    lifted = np.asarray(lifts)
    raw = domain.from_unit(np.clip(lifted, -1.0, 1.0))
    return StretchSamples(active=active, thetas_unit=lifted, thetas_raw=raw)


class InactiveSampler:
    """Uniform draws of inactive coordinates feasible for a given active point.

    Rejection sampling from the coordinate-wise bounding box of the feasible
    slice; after 10,000 consecutive rejections, switches to a hit-and-run
    walk started from a linear-programming feasibility point.
    """

    def __init__(self, basis: np.ndarray, zonotope: Zonotope2D | None = None):
        self.basis = np.asarray(basis, dtype=float)
        d, r = self.basis.shape
        if r >= d:
            raise DimensionError("active dimension must be below the full dimension")
        self.complement = null_space(self.basis.T)
        if self.complement.shape[1] != d - r:
            raise GeometryError("could not build an orthonormal complement basis")
        self.zonotope = zonotope if zonotope is not None else (zonotope_vertices(self.basis) if r == 2 else None)
        # |zeta_i| over the cube is bounded by the complement column's 1-norm.
        self.box = np.sum(np.abs(self.complement), axis=0)

    def lift(self, gamma: np.ndarray, zeta: np.ndarray) -> np.ndarray:
        return self.basis @ np.asarray(gamma, dtype=float) + self.complement @ np.asarray(zeta, dtype=float)

    def sample(self, gamma: np.ndarray, n: int, seed=0) -> np.ndarray:
        gamma = np.asarray(gamma, dtype=float)
        if self.zonotope is not None and not self.zonotope.contains(gamma, tol=1e-9):
            raise DomainError("active coordinates fall outside the projected domain")
        rng = np.random.default_rng(seed)
        m = self.complement.shape[1]
        base = self.basis @ gamma
        out = np.empty((n, m))
        got = 0
        consecutive_rejects = 0
        while got < n and consecutive_rejects < 10_000:
            zeta = rng.uniform(-self.box, self.box)
            if np.max(np.abs(base + self.complement @ zeta)) <= 1.0:
                out[got] = zeta
                got += 1
                consecutive_rejects = 0
            else:
                consecutive_rejects += 1
        if got < n:
            out[got:] = self._hit_and_run(base, n - got, rng)
        return out

    def _hit_and_run(self, base: np.ndarray, n: int, rng) -> np.ndarray:
        zeta = self._feasibility_anchor(base)
        samples = np.empty((n, zeta.size))
        thin = 5
        total = 20 + n * thin  # short burn-in, then every thin-th state
        kept = 0
        for step in range(total):
            direction = rng.standard_normal(zeta.size)
            nrm = np.linalg.norm(direction)
            if nrm < 1e-300:
                continue
            direction /= nrm
            ray = self.complement @ direction
            resid_lo = -1.0 - (base + self.complement @ zeta)
            resid_hi = 1.0 - (base + self.complement @ zeta)
            lo, hi = -np.inf, np.inf
            for rj, lo_j, hi_j in zip(ray, resid_lo, resid_hi):
                if abs(rj) < 1e-14:
                    continue
                a, b = lo_j / rj, hi_j / rj
                if a > b:
                    a, b = b, a
                lo = max(lo, a)
                hi = min(hi, b)
            if not np.isfinite(lo) or not np.isfinite(hi) or hi < lo:
                lo = hi = 0.0
            zeta = zeta + rng.uniform(lo, hi) * direction
            if step >= 20 and (step - 20) % thin == 0 and kept < n:
                samples[kept] = zeta
                kept += 1
        while kept < n:
            samples[kept] = zeta
            kept += 1
        return samples

    def _feasibility_anchor(self, base: np.ndarray) -> np.ndarray:
        """Min-max-violation LP point: minimize s with |base + C zeta| <= s."""
        d = base.size
        m = self.complement.shape[1]
        a_ub = np.vstack(
            [
                np.hstack([self.complement, -np.ones((d, 1))]),
                np.hstack([-self.complement, -np.ones((d, 1))]),
            ]
        )
        b_ub = np.concatenate([-base, base])
        cost = np.zeros(m + 1)
        cost[-1] = 1.0
        res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * m + [(0, None)], method="highs")
        if not res.success or res.x[-1] > 1.0 + 1e-7:
            raise DomainError("active point has no feasible lift inside the cube")
        zeta = res.x[:-1]
        # Polish away LP tolerance: alternate projections between the cube
        # and the feasible affine slice (C' base = 0, so the slice projection
        # is just C' applied to the clipped lift).
        for _ in range(100):
            lift = base + self.complement @ zeta
            if np.max(np.abs(lift)) <= 1.0 + 1e-13:
                break
            zeta = self.complement.T @ np.clip(lift, -1.0, 1.0)
        return zeta


def sample_inactive(basis: np.ndarray, gamma: np.ndarray, n: int, seed=0) -> np.ndarray:
    """Functional wrapper: draw ``n`` feasible inactive coordinate vectors."""
    return InactiveSampler(basis).sample(gamma, n, seed=seed)
