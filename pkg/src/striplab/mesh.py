"""Simplicial meshes for the cylinder eigenproblems.

Two discretization paths:

* meridian (2D): disk cross-section with s-independent strip widths; the
  angular variable separates and each mode n gets a triangulation of the
  (r, z) rectangle [0, R] x [0, H].  Strip endpoints are forced mesh nodes
  and the z-lines are geometrically graded toward them, since eigenfunctions
  have square-root singularities at Dirichlet/Neumann junctions.
* extruded (3D): any cross-section and arbitrary (s-dependent) widths; a
  cross-section triangulation is extruded into prism layers, each split into
  three tetrahedra with a consistent lowest-index diagonal rule.  Lateral
  facets are classified by whether their centroid lies in the strip set,
  which keeps discrete Dirichlet sets nested whenever patterns are nested.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import MeshFormatError, MeshResolutionError, StripLabError
from .geometry import (CylinderGeometry, Disk, Polygon, StripPattern,
                       pattern_from_config, pattern_to_config)


class BoundaryTag(enum.IntEnum):
    BASIS_DIRICHLET = 0   # top basis, x3 = H
    BASIS_NEUMANN = 1     # bottom basis, x3 = 0
    LATERAL_DIRICHLET = 2
    LATERAL_NEUMANN = 3
    LATERAL_ROBIN = 4
    AXIS = 5              # r = 0 line, meridian meshes only


LATERAL_TAGS = (BoundaryTag.LATERAL_DIRICHLET, BoundaryTag.LATERAL_NEUMANN,
                BoundaryTag.LATERAL_ROBIN)


class LateralCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


_LATERAL_TAG_OF = {
    LateralCondition.DIRICHLET: BoundaryTag.LATERAL_DIRICHLET,
    LateralCondition.NEUMANN: BoundaryTag.LATERAL_NEUMANN,
    LateralCondition.ROBIN: BoundaryTag.LATERAL_ROBIN,
}


@dataclass(frozen=True)
class Grading:
    """Geometric grading toward strip endpoints: `levels` rungs shrinking by
    `ratio` each, so the wall-adjacent facet is base * ratio**levels."""

    levels: int = 4
    ratio: float = 0.5

    def __post_init__(self):
        if self.levels < 0 or not (0.0 < self.ratio < 1.0):
            raise StripLabError(f"invalid grading levels={self.levels} ratio={self.ratio}")


@dataclass(frozen=True)
class Mesh:
    dimension: int
    nodes: np.ndarray                # (n, 2) meridian (r, z) or (n, 3)
    elements: np.ndarray             # (m, 3) triangles or (m, 4) tets
    boundary_facets: np.ndarray      # (f, 2) or (f, 3) node indices
    facet_tags: np.ndarray           # (f,) BoundaryTag values
    mode_index: int = 0              # angular mode (meridian meshes)
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("nodes", "elements", "boundary_facets", "facet_tags"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def element_measures(self) -> np.ndarray:
        """Signed triangle areas / tet volumes."""
        v = self.nodes[self.elements]
        if self.dimension == 2:
            return 0.5 * ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                          - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        d3 = v[:, 3] - v[:, 0]
        return np.einsum("ij,ij->i", np.cross(d1, d2), d3) / 6.0

    def facet_measures(self) -> np.ndarray:
        v = self.nodes[self.boundary_facets]
        if self.dimension == 2:
            return np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)

    def boundary_measure(self, tag: BoundaryTag) -> float:
        return float(self.facet_measures()[self.facet_tags == tag].sum())

    def facet_centroids(self) -> np.ndarray:
        return self.nodes[self.boundary_facets].mean(axis=1)


# ---------------------------------------------------------------------------
# 1D graded subdivision
# ---------------------------------------------------------------------------

def _wall_sizes(h0: float, grading: Grading, coarse: float) -> list[float]:
    """Facet sizes marching away from a graded wall: h0*r^L .. h0*r, h0, then
    geometric growth up to `coarse`."""
    sizes = [h0 * grading.ratio**l for l in range(grading.levels, 0, -1)]
    s = h0
    while s < coarse * (1.0 - 1e-9):
        sizes.append(s)
        s = min(s / grading.ratio, coarse)
    return sizes


def graded_ticks(length: float, h: float, grading: Grading,
                 left: bool, right: bool, coarse: Optional[float] = None) -> np.ndarray:
    """Partition [0, length] with graded walls; returns monotone ticks incl. 0, length."""
    if length <= 0:
        raise StripLabError("segment length must be positive")
    coarse = max(h, coarse if coarse is not None else h)
    h0 = min(h, length / 4.0) if (left and right) else min(h, length / 2.0)
    left_sizes = _wall_sizes(h0, grading, coarse) if left else []
    right_sizes = _wall_sizes(h0, grading, coarse) if right else []

    total = sum(left_sizes) + sum(right_sizes)
    if total > 0.75 * length:
        # drop the largest rungs until the ladders fit, keeping the wall rungs
        while total > 0.75 * length and (len(left_sizes) + len(right_sizes)) > 2:
            if len(left_sizes) >= len(right_sizes) and left_sizes:
                total -= left_sizes.pop()
            else:
                total -= right_sizes.pop()
        if total > length:
            # degenerate short segment: scale everything to fit
            scale = length / (total * 1.25)
            left_sizes = [s * scale for s in left_sizes]
            right_sizes = [s * scale for s in right_sizes]
            total = sum(left_sizes) + sum(right_sizes)

    middle = length - total
    n_mid = max(1, int(round(middle / coarse))) if middle > 1e-12 * length else 0

    ticks = [0.0]
    for s in left_sizes:
        ticks.append(ticks[-1] + s)
    right_start = length - sum(right_sizes)
    if n_mid > 0:
        ticks.extend(np.linspace(ticks[-1], right_start, n_mid + 1)[1:].tolist())
    # right ladder: sizes march away from the right wall, so walk them largest first
    pos = right_start
    for s in reversed(right_sizes):
        pos += s
        ticks.append(pos)
    ticks[-1] = length
    out = np.array(ticks)
    if np.any(np.diff(out) <= 0):
        raise StripLabError("graded subdivision produced non-monotone ticks")
    return out


def _uniform_ticks(length: float, h: float) -> np.ndarray:
    n = max(1, int(round(length / h)))
    return np.linspace(0.0, length, n + 1)


# ---------------------------------------------------------------------------
# meridian meshes
# ---------------------------------------------------------------------------

def _strip_edges(pattern: StripPattern) -> list[tuple[float, float]]:
    """(z_lo, z_hi) per strip for s-independent patterns."""
    if not pattern.is_s_independent():
        raise MeshResolutionError("meridian path needs s-independent strip widths")
    eps = pattern.eps
    out = []
    for j in range(pattern.count):
        c = eps * math.pi * (j + 0.5)
        a = pattern.lower_profiles[j].value
        b = pattern.upper_profiles[j].value
        out.append((c - eps * a, c + eps * b))
    return out


def _meridian_z_ticks(pattern: StripPattern, h: float, grading: Grading,
                      coarse: Optional[float]) -> np.ndarray:
    H = pattern.geometry.height
    edges = _strip_edges(pattern)
    min_width = min(hi - lo for lo, hi in edges)
    if h > min_width * (1.0 + 1e-12):
        raise MeshResolutionError(
            f"element size h={h:.6g} exceeds the smallest strip width {min_width:.6g}; "
            f"minimum admissible h is {min_width:.6g}"
        )
    ticks = [0.0]
    prev = 0.0
    prev_graded = False
    segments = []
    for lo, hi in edges:
        segments.append((prev, lo, prev_graded, True, False))       # gap below strip
        segments.append((lo, hi, True, True, True))                 # strip interior
        prev, prev_graded = hi, True
    segments.append((prev, H, prev_graded, False, False))           # gap above last strip

    for z0, z1, left, right, is_strip in segments:
        if z1 - z0 <= 1e-14 * H:
            continue
        h_seg = min(h, (z1 - z0) / 4.0) if is_strip else h
        local = graded_ticks(z1 - z0, h_seg, grading, left, right,
                             coarse=None if is_strip else coarse)
        ticks.extend((z0 + local[1:]).tolist())
        ticks[-1] = z1
    return np.array(ticks)


def _rect_mesh(r_ticks: np.ndarray, z_ticks: np.ndarray):
    """Structured triangulation of the (r, z) rectangle; returns nodes, triangles."""
    nr, nz = len(r_ticks), len(z_ticks)
    rr, zz = np.meshgrid(r_ticks, z_ticks)       # shape (nz, nr)
    nodes = np.column_stack([rr.ravel(), zz.ravel()])

    iz, ir = np.meshgrid(np.arange(nz - 1), np.arange(nr - 1), indexing="ij")
    n00 = (iz * nr + ir).ravel()
    n10 = n00 + 1
    n01 = n00 + nr
    n11 = n01 + 1
    tris = np.empty((2 * len(n00), 3), dtype=np.int64)
    tris[0::2] = np.column_stack([n00, n10, n11])
    tris[1::2] = np.column_stack([n00, n11, n01])
    return nodes, tris


def _meridian_facets(nr: int, nz: int):
    """Boundary edges of the structured grid with their side labels."""
    facets = []
    sides = []
    for iz in range(nz - 1):                       # r = 0 (axis) and r = R
        facets.append((iz * nr, (iz + 1) * nr))
        sides.append("axis")
        facets.append((iz * nr + nr - 1, (iz + 1) * nr + nr - 1))
        sides.append("lateral")
    for ir in range(nr - 1):                       # z = 0 and z = H
        facets.append((ir, ir + 1))
        sides.append("bottom")
        facets.append(((nz - 1) * nr + ir, (nz - 1) * nr + ir + 1))
        sides.append("top")
    return np.array(facets, dtype=np.int64), sides


def _tag_meridian(nodes, facets, sides, lateral_tagger):
    tags = np.empty(len(facets), dtype=np.int64)
    for i, side in enumerate(sides):
        if side == "axis":
            tags[i] = BoundaryTag.AXIS
        elif side == "bottom":
            tags[i] = BoundaryTag.BASIS_NEUMANN
        elif side == "top":
            tags[i] = BoundaryTag.BASIS_DIRICHLET
        else:
            z_c = 0.5 * (nodes[facets[i, 0], 1] + nodes[facets[i, 1], 1])
            tags[i] = lateral_tagger(z_c)
    return tags


def build_meridian_mesh(pattern: StripPattern, n: int, h: float,
                        grading: Grading = Grading(),
                        coarse_h: Optional[float] = None) -> Mesh:
    """Meridian triangulation for angular mode n with strip endpoints as nodes.

    `h` is the z-resolution target at the lateral boundary (refused when it
    exceeds the smallest strip width); `coarse_h` optionally relaxes the
    element size away from the strips and in the radial direction.
    """
    if not isinstance(pattern.geometry.cross_section, Disk):
        raise MeshResolutionError("meridian path needs a disk cross-section")
    if h <= 0:
        raise MeshResolutionError("element size must be positive")
    R = pattern.geometry.cross_section.radius
    z_ticks = _meridian_z_ticks(pattern, h, grading, coarse_h)
    r_base = coarse_h if coarse_h is not None else h
    r_ticks = graded_ticks(R, min(r_base, R / 2.0), grading, left=False, right=True)
    nodes, tris = _rect_mesh(r_ticks, z_ticks)
    facets, sides = _meridian_facets(len(r_ticks), len(z_ticks))

    edges = _strip_edges(pattern)

    def tagger(z_c):
        for lo, hi in edges:
            if lo < z_c < hi:
                return BoundaryTag.LATERAL_DIRICHLET
        return BoundaryTag.LATERAL_NEUMANN

    tags = _tag_meridian(nodes, facets, sides, tagger)
    prov = {"kind": "meridian", "pattern": pattern_to_config(pattern), "n": n,
            "h": h, "grading": {"levels": grading.levels, "ratio": grading.ratio},
            "coarse_h": coarse_h}
    return Mesh(2, nodes, tris, facets, tags, mode_index=n, provenance=prov)


def build_limit_mesh(geometry: CylinderGeometry, lateral: LateralCondition,
                     n: int, h: float) -> Mesh:
    """Uniform meridian mesh with the whole lateral boundary tagged `lateral`."""
    if not isinstance(geometry.cross_section, Disk):
        raise MeshResolutionError("meridian limit mesh needs a disk cross-section")
    R = geometry.cross_section.radius
    H = geometry.height
    r_ticks = _uniform_ticks(R, h)
    z_ticks = _uniform_ticks(H, h)
    nodes, tris = _rect_mesh(r_ticks, z_ticks)
    facets, sides = _meridian_facets(len(r_ticks), len(z_ticks))
    tag = _LATERAL_TAG_OF[lateral]
    tags = _tag_meridian(nodes, facets, sides, lambda z: tag)
    prov = {"kind": "limit_meridian", "lateral": lateral.value, "n": n, "h": h,
            "radius": R, "height": H}
    return Mesh(2, nodes, tris, facets, tags, mode_index=n, provenance=prov)


# ---------------------------------------------------------------------------
# cross-section triangulations (for the extruded path)
# ---------------------------------------------------------------------------

def _disk_cross_section(radius: float, h: float):
    """Ring triangulation of the disk; returns nodes, triangles, boundary loop."""
    n_rings = max(1, int(round(radius / h)))
    nodes = [np.zeros(2)]
    ring_start = [0]
    counts = [1]
    for i in range(1, n_rings + 1):
        cnt = 6 * i
        ring_start.append(len(nodes))
        counts.append(cnt)
        angles = 2.0 * math.pi * np.arange(cnt) / cnt
        r = radius * i / n_rings
        for a in angles:
            nodes.append(np.array([r * math.cos(a), r * math.sin(a)]))
    nodes = np.array(nodes)

    tris = []
    # center fan
    for e in range(counts[1]):
        tris.append((0, ring_start[1] + e, ring_start[1] + (e + 1) % counts[1]))
    for i in range(1, n_rings):
        inner, n_in = ring_start[i], counts[i]
        outer, n_out = ring_start[i + 1], counts[i + 1]
        ii, io = 0, 0
        # march around both rings, always advancing the pointer whose next
        # node comes first in angle
        while ii < n_in or io < n_out:
            a_in = 2.0 * math.pi * (ii + 1) / n_in
            a_out = 2.0 * math.pi * (io + 1) / n_out
            cur_in = inner + (ii % n_in)
            cur_out = outer + (io % n_out)
            if io < n_out and (a_out <= a_in or ii >= n_in):
                nxt = outer + ((io + 1) % n_out)
                tris.append((cur_in, cur_out, nxt))
                io += 1
            else:
                nxt = inner + ((ii + 1) % n_in)
                tris.append((cur_out, nxt, cur_in))
                ii += 1
    tris = np.array(tris, dtype=np.int64)
    # enforce counterclockwise orientation
    v = nodes[tris]
    det = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
           - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    flip = det < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    boundary_loop = np.arange(ring_start[-1], ring_start[-1] + counts[-1])
    return nodes, tris, boundary_loop


def _point_in_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Even-odd rule, vectorized over pts."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_int = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < np.where(cond, x_int, np.inf))
    return inside


def _polygon_cross_section(poly: Polygon, h: float):
    from scipy.spatial import Delaunay

    verts = poly.vertices
    boundary_pts = []
    for i in range(len(verts)):
        p, q = verts[i], verts[(i + 1) % len(verts)]
        seg = np.linalg.norm(q - p)
        n_seg = max(1, int(math.ceil(seg / h)))
        for t in range(n_seg):
            boundary_pts.append(p + (q - p) * (t / n_seg))
    boundary_pts = np.array(boundary_pts)

    xmin, ymin = verts.min(axis=0)
    xmax, ymax = verts.max(axis=0)
    xs = np.arange(xmin + 0.5 * h, xmax, h)
    ys = np.arange(ymin + 0.5 * h, ymax, h)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    inside = _point_in_polygon(grid, verts)
    # keep interior points clear of the boundary so Delaunay stays well shaped
    keep = inside.copy()
    for i in np.nonzero(inside)[0]:
        d = np.min(np.linalg.norm(boundary_pts - grid[i], axis=1))
        if d < 0.5 * h:
            keep[i] = False
    pts = np.vstack([boundary_pts, grid[keep]])

    tri = Delaunay(pts)
    cent = pts[tri.simplices].mean(axis=1)
    good = _point_in_polygon(cent, verts)
    tris = tri.simplices[good].astype(np.int64)
    # enforce counterclockwise orientation
    v = pts[tris]
    det = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
           - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    flip = det < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    boundary_loop = np.arange(len(boundary_pts))
    return pts, tris, boundary_loop


def lateral_arclength(cross_section, pts: np.ndarray) -> np.ndarray:
    """Arclength coordinate of points on (or near) the cross-section boundary."""
    pts = np.atleast_2d(pts)
    if isinstance(cross_section, Disk):
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
        return theta * cross_section.radius
    verts = cross_section.vertices
    lens = cross_section.edge_lengths
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    best_d = np.full(len(pts), np.inf)
    best_s = np.zeros(len(pts))
    for i in range(len(verts)):
        p = verts[i]
        q = verts[(i + 1) % len(verts)]
        d = q - p
        t = np.clip(((pts - p) @ d) / (d @ d), 0.0, 1.0)
        proj = p + t[:, None] * d
        dist = np.linalg.norm(pts - proj, axis=1)
        closer = dist < best_d
        best_d[closer] = dist[closer]
        best_s[closer] = cum[i] + t[closer] * lens[i]
    return best_s


# ---------------------------------------------------------------------------
# extruded 3D meshes
# ---------------------------------------------------------------------------

def _extrude(cross_nodes, cross_tris, boundary_loop, z_ticks, cross_section):
    """Extrude a cross-section triangulation into tetrahedra.

    Layer-major node numbering; each prism splits into 3 tets along the
    lowest-global-index diagonals, which is conforming across neighbours.
    Returns nodes, tets, and facet lists (bottom/top/lateral with metadata).
    """
    npts = len(cross_nodes)
    n_layers = len(z_ticks) - 1
    nodes = np.empty((npts * len(z_ticks), 3))
    for li, z in enumerate(z_ticks):
        nodes[li * npts:(li + 1) * npts, :2] = cross_nodes
        nodes[li * npts:(li + 1) * npts, 2] = z

    tets = []
    for li in range(n_layers):
        base = li * npts
        top = (li + 1) * npts
        for tri in cross_tris:
            p, q, r = sorted(int(t) for t in tri)
            bp, bq, br = base + p, base + q, base + r
            tp, tq, tr = top + p, top + q, top + r
            tets.append((bp, bq, br, tr))
            tets.append((bp, bq, tr, tq))
            tets.append((bp, tq, tr, tp))
    tets = np.array(tets, dtype=np.int64)
    # orient all tets positively
    v = nodes[tets]
    vol = np.einsum("ij,ij->i", np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]),
                    v[:, 3] - v[:, 0])
    neg = vol < 0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]

    facets = []
    kinds = []   # "bottom" / "top" / "lateral"
    for tri in cross_tris:
        facets.append(tuple(int(t) for t in tri))
        kinds.append("bottom")
    top_base = n_layers * npts
    for tri in cross_tris:
        facets.append(tuple(top_base + int(t) for t in tri))
        kinds.append("top")

    loop = list(boundary_loop)
    n_loop = len(loop)
    for li in range(n_layers):
        base = li * npts
        top = (li + 1) * npts
        for e in range(n_loop):
            u, v_ = loop[e], loop[(e + 1) % n_loop]
            lo, hi = (u, v_) if u < v_ else (v_, u)
            # quad (b_lo, b_hi, t_hi, t_lo) split along the diagonal from the
            # lowest-index bottom node, matching the prism tetrahedra
            facets.append((base + lo, base + hi, top + hi))
            kinds.append("lateral")
            facets.append((base + lo, top + hi, top + lo))
            kinds.append("lateral")
    facets = np.array(facets, dtype=np.int64)
    return nodes, tets, facets, kinds


def _tag_extruded(nodes, facets, kinds, lateral_tagger, cross_section):
    tags = np.empty(len(facets), dtype=np.int64)
    lateral_idx = [i for i, k in enumerate(kinds) if k == "lateral"]
    for i, kind in enumerate(kinds):
        if kind == "bottom":
            tags[i] = BoundaryTag.BASIS_NEUMANN
        elif kind == "top":
            tags[i] = BoundaryTag.BASIS_DIRICHLET
    if lateral_idx:
        cent = nodes[facets[lateral_idx]].mean(axis=1)
        s = lateral_arclength(cross_section, cent[:, :2])
        z = cent[:, 2]
        lateral_tags = lateral_tagger(s, z)
        for j, i in enumerate(lateral_idx):
            tags[i] = lateral_tags[j]
    return tags


def _pattern_tagger(pattern: StripPattern):
    def tagger(s, z):
        member = pattern.contains(s, z)
        return np.where(member, int(BoundaryTag.LATERAL_DIRICHLET),
                        int(BoundaryTag.LATERAL_NEUMANN))
    return tagger


def _extruded_z_ticks(pattern: StripPattern, layers_per_half_period: int) -> np.ndarray:
    H = pattern.geometry.height
    eps = pattern.eps
    h_z = (eps * math.pi / 2.0) / layers_per_half_period
    if pattern.is_s_independent():
        edges = _strip_edges(pattern)
        ticks = [0.0]
        breakpoints = [lo_hi for e in edges for lo_hi in e] + [H]
        prev = 0.0
        for z in breakpoints:
            if z - prev > 1e-14 * H:
                n_seg = max(1, int(math.ceil((z - prev) / h_z)))
                # >= 2 layers inside every strip
                if any(abs(prev - lo) < 1e-12 and abs(z - hi) < 1e-12 for lo, hi in edges):
                    n_seg = max(2, n_seg)
                ticks.extend(np.linspace(prev, z, n_seg + 1)[1:].tolist())
            prev = z
        return np.array(ticks)
    lower, upper = pattern.widths_on_grid()
    min_width = float(eps * (lower + upper).min())
    if 2.0 * h_z > min_width:
        raise MeshResolutionError(
            f"layer height {h_z:.6g} too coarse: fewer than 2 layers would intersect "
            f"the thinnest strip (width {min_width:.6g}); increase layers_per_half_period"
        )
    return _uniform_ticks(H, h_z)


def build_extruded_mesh(pattern: StripPattern, h_cross: float,
                        layers_per_half_period: int = 4) -> Mesh:
    """Full 3D tetrahedral mesh of the cylinder with lateral facets tagged by
    centroid membership in the strip set."""
    if layers_per_half_period < 2:
        raise MeshResolutionError("layers_per_half_period must be >= 2")
    cs = pattern.geometry.cross_section
    if isinstance(cs, Disk):
        cross_nodes, cross_tris, loop = _disk_cross_section(cs.radius, h_cross)
    else:
        cross_nodes, cross_tris, loop = _polygon_cross_section(cs, h_cross)
    z_ticks = _extruded_z_ticks(pattern, layers_per_half_period)
    nodes, tets, facets, kinds = _extrude(cross_nodes, cross_tris, loop, z_ticks, cs)
    tags = _tag_extruded(nodes, facets, kinds, _pattern_tagger(pattern), cs)
    prov = {"kind": "extruded", "pattern": pattern_to_config(pattern),
            "h_cross": h_cross, "layers_per_half_period": layers_per_half_period}
    return Mesh(3, nodes, tets, facets, tags, mode_index=0, provenance=prov)


def build_extruded_mesh_uniform_lateral(geometry: CylinderGeometry,
                                        lateral: LateralCondition,
                                        h: float) -> Mesh:
    """Extruded mesh of the cylinder with a uniform lateral condition (limit problems)."""
    cs = geometry.cross_section
    if isinstance(cs, Disk):
        cross_nodes, cross_tris, loop = _disk_cross_section(cs.radius, h)
    else:
        cross_nodes, cross_tris, loop = _polygon_cross_section(cs, h)
    z_ticks = _uniform_ticks(geometry.height, h)
    nodes, tets, facets, kinds = _extrude(cross_nodes, cross_tris, loop, z_ticks, cs)
    tag = int(_LATERAL_TAG_OF[lateral])
    tags = _tag_extruded(nodes, facets, kinds,
                         lambda s, z: np.full(len(np.atleast_1d(s)), tag), cs)
    prov = {"kind": "extruded_limit", "lateral": lateral.value, "h": h}
    return Mesh(3, nodes, tets, facets, tags, mode_index=0, provenance=prov)


# ---------------------------------------------------------------------------
# retagging (shared-mesh comparisons)
# ---------------------------------------------------------------------------

def retag_lateral(mesh: Mesh, pattern: StripPattern) -> Mesh:
    """Reclassify lateral facets of `mesh` by centroid membership in `pattern`.

    Keeps nodes and elements identical, so spectra of retagged meshes are
    comparable through the discrete minimax principle.
    """
    tags = mesh.facet_tags.copy()
    lateral = np.isin(tags, LATERAL_TAGS)
    cent = mesh.nodes[mesh.boundary_facets[lateral]].mean(axis=1)
    if mesh.dimension == 2:
        member = pattern.contains(np.zeros(len(cent)), cent[:, 1])
    else:
        s = lateral_arclength(pattern.geometry.cross_section, cent[:, :2])
        member = pattern.contains(s, cent[:, 2])
    tags[lateral] = np.where(member, int(BoundaryTag.LATERAL_DIRICHLET),
                             int(BoundaryTag.LATERAL_NEUMANN))
    prov = dict(mesh.provenance)
    prov["retagged"] = pattern_to_config(pattern)
    return replace(mesh, facet_tags=tags, provenance=prov)


def retag_lateral_uniform(mesh: Mesh, lateral: LateralCondition) -> Mesh:
    tags = mesh.facet_tags.copy()
    mask = np.isin(tags, LATERAL_TAGS)
    tags[mask] = int(_LATERAL_TAG_OF[lateral])
    prov = dict(mesh.provenance)
    prov["retagged"] = lateral.value
    return replace(mesh, facet_tags=tags, provenance=prov)


# ---------------------------------------------------------------------------
# nested refinement
# ---------------------------------------------------------------------------

def refine_nested(mesh: Mesh) -> Mesh:
    """Uniform midpoint refinement (triangle -> 4, tet -> 8) preserving tags.

    The input node set is a prefix of the output's, so the coarse trial space
    is nested in the refined one.
    """
    nodes = list(mesh.nodes)
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in midpoint:
            midpoint[key] = len(nodes)
            nodes.append(0.5 * (mesh.nodes[a] + mesh.nodes[b]))
        return midpoint[key]

    elements = []
    if mesh.dimension == 2:
        for t in mesh.elements:
            v0, v1, v2 = (int(x) for x in t)
            m01, m12, m02 = mid(v0, v1), mid(v1, v2), mid(v0, v2)
            elements += [(v0, m01, m02), (m01, v1, m12), (m02, m12, v2), (m01, m12, m02)]
    else:
        for t in mesh.elements:
            v0, v1, v2, v3 = (int(x) for x in t)
            m01, m02, m03 = mid(v0, v1), mid(v0, v2), mid(v0, v3)
            m12, m13, m23 = mid(v1, v2), mid(v1, v3), mid(v2, v3)
            elements += [
                (v0, m01, m02, m03), (m01, v1, m12, m13),
                (m02, m12, v2, m23), (m03, m13, m23, v3),
                (m01, m02, m03, m13), (m01, m02, m12, m13),
                (m02, m03, m13, m23), (m02, m12, m13, m23),
            ]

    facets = []
    tags = []
    for f, tag in zip(mesh.boundary_facets, mesh.facet_tags):
        if mesh.dimension == 2:
            u, v = (int(x) for x in f)
            m = mid(u, v)
            facets += [(u, m), (m, v)]
            tags += [tag, tag]
        else:
            u, v, w = (int(x) for x in f)
            muv, mvw, muw = mid(u, v), mid(v, w), mid(u, w)
            facets += [(u, muv, muw), (muv, v, mvw), (muw, mvw, w), (muv, mvw, muw)]
            tags += [tag] * 4

    new_nodes = np.array(nodes)
    new_elements = np.array(elements, dtype=np.int64)
    if mesh.dimension == 3:
        v = new_nodes[new_elements]
        vol = np.einsum("ij,ij->i", np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]),
                        v[:, 3] - v[:, 0])
        neg = vol < 0
        new_elements[neg] = new_elements[neg][:, [0, 1, 3, 2]]
    prov = dict(mesh.provenance)
    prov["refinements"] = prov.get("refinements", 0) + 1
    return Mesh(mesh.dimension, new_nodes, new_elements,
                np.array(facets, dtype=np.int64), np.array(tags, dtype=np.int64),
                mode_index=mesh.mode_index, provenance=prov)


# ---------------------------------------------------------------------------
# conformity audit
# ---------------------------------------------------------------------------

def audit(mesh: Mesh, pattern: Optional[StripPattern] = None):
    """Raise StripLabError on conformity violations; optionally check that the
    lateral tagging is consistent with `pattern` membership."""
    measures = mesh.element_measures()
    if np.any(measures <= 0):
        raise StripLabError(f"{np.sum(measures <= 0)} elements with nonpositive measure")

    from collections import Counter
    face_count = Counter()
    if mesh.dimension == 2:
        for t in mesh.elements:
            a, b, c = (int(x) for x in t)
            for e in ((a, b), (b, c), (a, c)):
                face_count[tuple(sorted(e))] += 1
    else:
        for t in mesh.elements:
            a, b, c, d = (int(x) for x in t)
            for f in ((a, b, c), (a, b, d), (a, c, d), (b, c, d)):
                face_count[tuple(sorted(f))] += 1
    if any(v > 2 for v in face_count.values()):
        raise StripLabError("a facet is shared by more than two elements")
    boundary_faces = {f for f, cnt in face_count.items() if cnt == 1}
    tagged = [tuple(sorted(int(x) for x in f)) for f in mesh.boundary_facets]
    if len(set(tagged)) != len(tagged):
        raise StripLabError("duplicate boundary facet (multiple tags on one facet)")
    if set(tagged) != boundary_faces:
        raise StripLabError("tagged boundary facets do not match the element boundary")

    if pattern is not None:
        lateral = np.isin(mesh.facet_tags, (BoundaryTag.LATERAL_DIRICHLET,
                                            BoundaryTag.LATERAL_NEUMANN))
        cent = mesh.nodes[mesh.boundary_facets[lateral]].mean(axis=1)
        if mesh.dimension == 2:
            member = pattern.contains(np.zeros(len(cent)), cent[:, 1])
        else:
            s = lateral_arclength(pattern.geometry.cross_section, cent[:, :2])
            member = pattern.contains(s, cent[:, 2])
        want = np.where(member, int(BoundaryTag.LATERAL_DIRICHLET),
                        int(BoundaryTag.LATERAL_NEUMANN))
        got = mesh.facet_tags[lateral]
        if np.any(want != got):
            raise StripLabError("lateral tags inconsistent with pattern membership")


# ---------------------------------------------------------------------------
# plain-text mesh format
# ---------------------------------------------------------------------------

_FORMAT_HEADER = "striplab-mesh 1"


def save_mesh(mesh: Mesh, path):
    """Exact-decimal text format: node, element, and tagged facet tables."""
    with open(path, "w") as f:
        f.write(f"{_FORMAT_HEADER}\n")
        f.write(f"dim {mesh.dimension} mode {mesh.mode_index}\n")
        f.write(f"nodes {mesh.n_nodes}\n")
        for row in mesh.nodes:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")
        f.write(f"elements {len(mesh.elements)}\n")
        for row in mesh.elements:
            f.write(" ".join(str(int(x)) for x in row) + "\n")
        f.write(f"facets {len(mesh.boundary_facets)}\n")
        for row, tag in zip(mesh.boundary_facets, mesh.facet_tags):
            f.write(" ".join(str(int(x)) for x in row) + f" {int(tag)}\n")
        f.write("provenance " + json.dumps(mesh.provenance, sort_keys=True) + "\n")


def load_mesh(path) -> Mesh:
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != _FORMAT_HEADER:
        raise MeshFormatError(f"not a {_FORMAT_HEADER!r} file")
    try:
        _, dim, _, mode = lines[1].split()
        dim, mode = int(dim), int(mode)
        i = 2
        n_nodes = int(lines[i].split()[1]); i += 1
        nodes = np.array([[float(x) for x in lines[i + j].split()] for j in range(n_nodes)])
        i += n_nodes
        n_el = int(lines[i].split()[1]); i += 1
        elements = np.array([[int(x) for x in lines[i + j].split()] for j in range(n_el)],
                            dtype=np.int64)
        i += n_el
        n_f = int(lines[i].split()[1]); i += 1
        rows = [[int(x) for x in lines[i + j].split()] for j in range(n_f)]
        i += n_f
        facets = np.array([r[:-1] for r in rows], dtype=np.int64)
        tags = np.array([r[-1] for r in rows], dtype=np.int64)
        prov = {}
        if i < len(lines) and lines[i].startswith("provenance "):
            prov = json.loads(lines[i][len("provenance "):])
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"malformed mesh file: {exc}") from exc
    return Mesh(dim, nodes, elements, facets, tags, mode_index=mode, provenance=prov)
