"""Multiscale displacement basis and the coarse pressure space.

Per coarse vertex neighborhood: a generalized eigenproblem on the full
local fine displacement space (elastic energy against a (lam+2mu)-
weighted mass), a pair of blockwise elasticity-harmonic partition-of-
unity fields driven by the bilinear hat of the vertex, and the nodewise
products of the two.  The coarse pressure space is the indicator basis
of the coarse cells.
"""

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fine_fem

_DENSE_EIG_LIMIT = 900  # local DOF count below which dense eigh is used


def _node_dofs(nodes):
    d = np.empty(2 * len(nodes), dtype=int)
    d[0::2] = 2 * nodes
    d[1::2] = 2 * nodes + 1
    return d


def _submat(M, rows, cols):
    return M.tocsr()[rows][:, cols]


def hat_value(grid, j, xy):
    """Bilinear hat of coarse vertex j evaluated at points xy."""
    X = grid.coarse_vertex_xy(j)
    H = grid.H
    xy = np.atleast_2d(xy)
    return (np.maximum(0.0, 1.0 - np.abs(xy[:, 0] - X[0]) / H)
            * np.maximum(0.0, 1.0 - np.abs(xy[:, 1] - X[1]) / H))


def local_displacement_eig(grid, med, j, J_u=None):
    """Smallest eigenpairs of the local energy/mass pencil on the vertex
    neighborhood.  J_u=None keeps the full local spectrum.

    Returns (eigvals, eigvecs, nb): eigvecs columns are s-orthonormal
    local DOF vectors (interleaved over nb.fine_nodes).
    """
    nb = grid.vertex_neighborhood(j)
    dofs = _node_dofs(nb.fine_nodes)
    A = _submat(fine_fem.assemble_elasticity(grid, med.lam, med.mu,
                                             nb.fine_cells), dofs, dofs)
    S = _submat(fine_fem.assemble_vector_mass(grid, med.lam + 2.0 * med.mu,
                                              nb.fine_cells), dofs, dofs)
    dim = len(dofs)
    if J_u is None:
        J_u = dim
    if not 1 <= J_u <= dim:
        raise ValueError(f"J_u={J_u} outside [1, {dim}] on vertex {j}")

    if dim <= _DENSE_EIG_LIMIT or J_u > dim - 2:
        vals, vecs = scipy.linalg.eigh(A.toarray(), S.toarray())
        vals, vecs = vals[:J_u], vecs[:, :J_u]
    else:
        # shift-invert with a small negative shift; A alone is singular
        # (rigid translations)
        sigma = -1e-3 * (A.diagonal().sum() / S.diagonal().sum())
        vals, vecs = spla.eigsh(A.tocsc(), k=J_u, M=S.tocsc(),
                                sigma=sigma, which="LM")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    vals = np.where(np.abs(vals) < 1e-10 * max(abs(vals[-1]), 1.0), 0.0, vals)
    vals = np.maximum(vals, 0.0)
    # enforce exact s-orthonormality (degenerate modes may come out skew)
    G = vecs.T @ (S @ vecs)
    L = scipy.linalg.cholesky(G, lower=True)
    vecs = scipy.linalg.solve_triangular(L, vecs.T, lower=True).T
    return vals, vecs, nb


def build_pou(grid, med, j):
    """Partition-of-unity pair for coarse vertex j.

    Solves, on each coarse block of the neighborhood, the homogeneous
    elasticity problem with hat-valued Dirichlet data in one component
    and zero in the other.  Returns (xi1, xi2, nb): each field has
    shape (len(nb.fine_nodes), 2).
    """
    nb = grid.vertex_neighborhood(j)
    xi1 = np.zeros((len(nb.fine_nodes), 2))
    xi2 = np.zeros((len(nb.fine_nodes), 2))

    for coarse_cell in nb.members:
        cells = grid.fine_cells_of_coarse_cell(coarse_cell)
        nodes = np.unique(grid.cell_nodes[cells])
        xy = grid.fine_node_xy(nodes)
        N, m = grid.N, grid.m
        CX, CY = coarse_cell % N, coarse_cell // N
        ix = nodes % (grid.n + 1)
        iy = nodes // (grid.n + 1)
        on_bnd = (ix == CX * m) | (ix == (CX + 1) * m) \
            | (iy == CY * m) | (iy == (CY + 1) * m)

        dofs = _node_dofs(nodes)
        A = _submat(fine_fem.assemble_elasticity(grid, med.lam, med.mu, cells),
                    dofs, dofs)
        bnd_dofs = np.repeat(on_bnd, 2)
        ii = np.flatnonzero(~bnd_dofs)
        bb = np.flatnonzero(bnd_dofs)
        A_II = A[ii][:, ii].tocsc()
        A_IB = A[ii][:, bb]
        lu = spla.splu(A_II)

        hat = hat_value(grid, j, xy)
        loc = nb.local_nodes(nodes)
        for target, comp in ((xi1, 0), (xi2, 1)):
            data = np.zeros(2 * len(nodes))
            data[bb[comp::2]] = hat[on_bnd]
            sol = data.copy()
            if len(ii):
                sol[ii] = lu.solve(-A_IB @ data[bb])
            target[loc, 0] = sol[0::2]
            target[loc, 1] = sol[1::2]
    return xi1, xi2, nb


def multiply_basis(pou, eigvecs):
    """Nodewise product of the POU multipliers with eigenfields.

    pou = (xi1, xi2); eigvecs columns are interleaved local DOF vectors.
    Returns columns of the same layout: x-components scaled by xi1's
    first component, y-components by xi2's second.
    """
    xi1, xi2 = pou
    out = np.empty_like(eigvecs)
    out[0::2, :] = xi1[:, 0][:, None] * eigvecs[0::2, :]
    out[1::2, :] = xi2[:, 1][:, None] * eigvecs[1::2, :]
    return out


class VertexBasis:
    """Eigenpairs, POU, and product fields of one coarse vertex."""

    def __init__(self, grid, med, j, J_u=None):
        self.vertex = j
        self.eigvals, eigvecs, self.nb = local_displacement_eig(
            grid, med, j, J_u)
        xi1, xi2, _ = build_pou(grid, med, j)
        self.pou = (xi1, xi2)
        self.fields = multiply_basis(self.pou, eigvecs)


class DisplacementOfflineBasis:
    """Product basis for every coarse vertex (up to max_modes eigenpairs
    each; truncation to a smaller J_u happens at prolongation time)."""

    def __init__(self, grid, med, max_modes=None):
        self.grid = grid
        self.vertex_bases = [VertexBasis(grid, med, j, max_modes)
                             for j in range(grid.num_coarse_vertices)]


def assemble_R_u(basis: DisplacementOfflineBasis, J_u=None):
    """Prolongation from offline displacement coefficients to fine DOFs.

    Returns (R_u, free_cols): free_cols masks out columns of boundary
    coarse vertices (u = 0 on the whole boundary in both models).
    """
    grid = basis.grid
    rows, cols, vals = [], [], []
    free = []
    col = 0
    for vb in basis.vertex_bases:
        keep = min(J_u, vb.fields.shape[1]) if J_u is not None \
            else vb.fields.shape[1]
        dofs = _node_dofs(vb.nb.fine_nodes)
        interior = not grid.coarse_vertex_is_boundary(vb.vertex)
        for k in range(keep):
            rows.append(dofs)
            cols.append(np.full(len(dofs), col))
            vals.append(vb.fields[:, k])
            free.append(interior)
            col += 1
    R_u = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * grid.num_fine_nodes, col)).tocsr()
    return R_u, np.array(free)


def build_coarse_pressure(grid):
    """Indicator prolongation from coarse-cell to fine-cell constants."""
    rows = np.arange(grid.num_fine_cells)
    cols = grid.coarse_cell_of_fine_cell
    return sp.coo_matrix(
        (np.ones(grid.num_fine_cells), (rows, cols)),
        shape=(grid.num_fine_cells, grid.num_coarse_cells)).tocsr()


def dump_basis(basis: DisplacementOfflineBasis, directory, J_u=None):
    """Write each vertex's product fields as DOF-vector field files."""
    import os
    from .medium import save_field
    os.makedirs(directory, exist_ok=True)
    grid = basis.grid
    for vb in basis.vertex_bases:
        keep = min(J_u, vb.fields.shape[1]) if J_u is not None \
            else vb.fields.shape[1]
        dofs = _node_dofs(vb.nb.fine_nodes)
        for k in range(keep):
            full = np.zeros(2 * grid.num_fine_nodes)
            full[dofs] = vb.fields[:, k]
            save_field(os.path.join(
                directory, f"displacement_vertex{vb.vertex:04d}_mode{k:02d}.txt"),
                full, rows=len(full), cols=1)
