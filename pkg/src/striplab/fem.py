"""P1 finite element assembly for the cylinder eigenproblems.

Meridian (mode n) bilinear forms on the (r, z) rectangle:

    K(u, v) = int (u_r v_r + u_z v_z) r dr dz + n^2 int u v / r dr dz
    M(u, v) = int u v r dr dz

plus an optional Robin boundary term A * R * int u v dz on lateral facets.
The r-weighted gradient and mass integrals are polynomial and are computed
exactly (so nested meshes give monotone eigenvalues, the discrete analog of
the eigenvalue minimax); only the n^2/r term needs quadrature, and the
3-point mid-edge rule keeps it away from the axis, where mid-edge points of
axis-touching triangles either have r > 0 or multiply basis pairs that are
eliminated with the axis nodes.

3D meshes use the exact closed-form P1 tetrahedron matrices.  Dirichlet
constraints are resolved by symmetric elimination (principal submatrix on
free nodes), which preserves the discrete minimax monotonicity used by the
bracket experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyConfigError
from .mesh import BoundaryTag, Mesh

# basis values at the mid-edge points (m01, m12, m02)
_MIDEDGE = np.array([[0.5, 0.0, 0.5],
                     [0.5, 0.5, 0.0],
                     [0.0, 0.5, 0.5]])


@dataclass(frozen=True)
class SparseOperatorPair:
    """Stiffness/mass pair on free nodes with the constraint bookkeeping.

    K includes the Robin boundary term when `robin_coefficient` is set; both
    matrices are CSR with both triangles stored and are exactly symmetric.
    """

    K: sp.csr_matrix
    M: sp.csr_matrix
    free_nodes: np.ndarray        # mesh node index per free DOF
    full_to_free: np.ndarray      # -1 for constrained nodes
    robin_coefficient: Optional[float] = None

    @property
    def n_free(self) -> int:
        return len(self.free_nodes)

    @property
    def constrained_nodes(self) -> np.ndarray:
        return np.nonzero(self.full_to_free < 0)[0]


def triangle_stiffness(coords: np.ndarray) -> np.ndarray:
    """Planar P1 stiffness matrix of one triangle (rows of coords = vertices)."""
    r, z = coords[:, 0], coords[:, 1]
    det = (r[1] - r[0]) * (z[2] - z[0]) - (r[2] - r[0]) * (z[1] - z[0])
    area = 0.5 * abs(det)
    b = np.array([z[1] - z[2], z[2] - z[0], z[0] - z[1]]) / det
    c = np.array([r[2] - r[1], r[0] - r[2], r[1] - r[0]]) / det
    return area * (np.outer(b, b) + np.outer(c, c))


def triangle_mass(coords: np.ndarray) -> np.ndarray:
    """Planar P1 mass matrix: (area/12) * (1 + delta_ij)."""
    r, z = coords[:, 0], coords[:, 1]
    det = (r[1] - r[0]) * (z[2] - z[0]) - (r[2] - r[0]) * (z[1] - z[0])
    area = 0.5 * abs(det)
    return area / 12.0 * (np.ones((3, 3)) + np.eye(3))


def _meridian_element_matrices(nodes, elements, n_mode):
    """Vectorized element stiffness/mass for the r-weighted meridian forms."""
    v = nodes[elements]                       # (m, 3, 2)
    r = v[:, :, 0]
    z = v[:, :, 1]
    det = ((r[:, 1] - r[:, 0]) * (z[:, 2] - z[:, 0])
           - (r[:, 2] - r[:, 0]) * (z[:, 1] - z[:, 0]))
    area = 0.5 * np.abs(det)

    b = np.stack([z[:, 1] - z[:, 2], z[:, 2] - z[:, 0], z[:, 0] - z[:, 1]], axis=1) / det[:, None]
    c = np.stack([r[:, 2] - r[:, 1], r[:, 0] - r[:, 2], r[:, 1] - r[:, 0]], axis=1) / det[:, None]
    grad = (np.einsum("ei,ej->eij", b, b) + np.einsum("ei,ej->eij", c, c))

    r_mid = r @ _MIDEDGE.T                    # radii at (m01, m12, m02)
    r_bar = r_mid.mean(axis=1)                # = (r0+r1+r2)/3, exact for int r
    K = grad * (area * r_bar)[:, None, None]

    # exact r-weighted P1 mass: M_ij = (A/60)(1+delta_ij)(r_i + r_j + r0+r1+r2);
    # exactness keeps discrete eigenvalues monotone across nested meshes
    r_sum = r.sum(axis=1)
    r_pair = r[:, :, None] + r[:, None, :] + r_sum[:, None, None]
    M = (np.ones((3, 3)) + np.eye(3))[None] * r_pair * (area / 60.0)[:, None, None]

    pp = np.einsum("im,jm->ijm", _MIDEDGE, _MIDEDGE)

    if n_mode > 0:
        with np.errstate(divide="ignore"):
            inv_r = np.where(r_mid > 0.0, 1.0 / np.where(r_mid > 0.0, r_mid, 1.0), 0.0)
        K = K + n_mode**2 * np.einsum("ijm,em->eij", pp, inv_r) * (area / 3.0)[:, None, None]
    return K, M


def _tet_element_matrices(nodes, elements):
    v = nodes[elements]                       # (m, 4, 3)
    d = v[:, 1:] - v[:, :1]                   # (m, 3, 3) edge matrix
    det = np.linalg.det(d)
    vol = np.abs(det) / 6.0
    inv = np.linalg.inv(d)                    # rows: gradients of lambda_1..3 are inv columns
    g = inv.transpose(0, 2, 1)                # (m, 3 grads, 3 comps) for lambda_1..3
    g0 = -g.sum(axis=1, keepdims=True)
    grads = np.concatenate([g0, g], axis=1)   # (m, 4, 3)
    K = np.einsum("eik,ejk->eij", grads, grads) * vol[:, None, None]
    M = (np.ones((4, 4)) + np.eye(4))[None] * (vol / 20.0)[:, None, None]
    return K, M


def _facet_mass(mesh, facet_idx):
    """Boundary mass matrices of the given facets (surface measure; meridian
    facets carry the lateral radius weight)."""
    f = mesh.boundary_facets[facet_idx]
    v = mesh.nodes[f]
    if mesh.dimension == 2:
        length = np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        r_facet = v[:, :, 0].mean(axis=1)     # lateral facets sit at r = R
        base = (np.ones((2, 2)) + np.eye(2)) / 6.0
        return base[None] * (length * r_facet)[:, None, None]
    area = 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return base[None] * area[:, None, None]


def _scatter(elements, local, n_nodes):
    """Sum local element matrices into a global CSR matrix."""
    m, k, _ = local.shape
    rows = np.repeat(elements, k, axis=1).ravel()
    cols = np.tile(elements, (1, k)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_nodes, n_nodes))
    return mat.tocsr()


def dirichlet_nodes(mesh: Mesh) -> np.ndarray:
    """Constrained nodes: on Dirichlet-tagged facets, plus the axis for modes n >= 1."""
    tags = mesh.facet_tags
    mask = (tags == BoundaryTag.BASIS_DIRICHLET) | (tags == BoundaryTag.LATERAL_DIRICHLET)
    if mesh.mode_index >= 1:
        mask = mask | (tags == BoundaryTag.AXIS)
    if not mask.any():
        return np.empty(0, dtype=np.int64)
    return np.unique(mesh.boundary_facets[mask].ravel())


def assemble(mesh: Mesh, robin_coefficient: Optional[float] = None) -> SparseOperatorPair:
    """Assemble the operator pair for `mesh` and eliminate Dirichlet nodes."""
    robin_facets = np.nonzero(mesh.facet_tags == BoundaryTag.LATERAL_ROBIN)[0]
    if len(robin_facets) and robin_coefficient is None:
        raise AssemblyConfigError(
            "mesh has Robin-tagged lateral facets but no Robin coefficient was supplied"
        )
    if robin_coefficient is not None and robin_coefficient < 0:
        raise AssemblyConfigError("Robin coefficient must be nonnegative")

    if mesh.dimension == 2:
        K_loc, M_loc = _meridian_element_matrices(mesh.nodes, mesh.elements, mesh.mode_index)
    else:
        K_loc, M_loc = _tet_element_matrices(mesh.nodes, mesh.elements)

    K = _scatter(mesh.elements, K_loc, mesh.n_nodes)
    M = _scatter(mesh.elements, M_loc, mesh.n_nodes)

    if len(robin_facets) and robin_coefficient:
        B_loc = _facet_mass(mesh, robin_facets) * robin_coefficient
        K = K + _scatter(mesh.boundary_facets[robin_facets], B_loc, mesh.n_nodes)

    constrained = dirichlet_nodes(mesh)
    full_to_free = np.full(mesh.n_nodes, -1, dtype=np.int64)
    free = np.setdiff1d(np.arange(mesh.n_nodes), constrained)
    full_to_free[free] = np.arange(len(free))

    K_ff = K[free][:, free].tocsr()
    M_ff = M[free][:, free].tocsr()
    K_ff.sort_indices()
    M_ff.sort_indices()
    free.setflags(write=False)
    full_to_free.setflags(write=False)
    return SparseOperatorPair(K_ff, M_ff, free, full_to_free,
                              robin_coefficient=robin_coefficient)


def quadratic_form_check(pair: SparseOperatorPair, u: np.ndarray):
    """Rayleigh-quotient hook: returns (u^T K u, u^T M u)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (pair.n_free,):
        raise AssemblyConfigError(f"vector of size {u.shape} does not match {pair.n_free} free DOFs")
    return float(u @ (pair.K @ u)), float(u @ (pair.M @ u))


def export_coo(matrix: sp.spmatrix, path):
    """Coordinate text format (row col value), for cross-checks with external tools."""
    coo = matrix.tocoo()
    with open(path, "w") as f:
        f.write(f"% {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{i} {j} {float(v)!r}\n")
