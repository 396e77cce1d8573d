"""Fine-scale discrete spaces and sparse operator assembly.

Displacement: vector bilinear (Q1) elements, 2 DOFs per fine node,
interleaved (node k -> dofs 2k, 2k+1).  Velocity: lowest-order
Raviart-Thomas on rectangles, one normal-flux DOF per fine edge with
the global +x/+y normal convention.  Pressure: one constant per cell.

All integrands are polynomial with cellwise-constant coefficients, so
2x2 Gauss quadrature per cell is exact.
"""

import numpy as np
import scipy.sparse as sp

from .grid import GridHierarchy

_SIDES = ("left", "right", "bottom", "top")


class BoundarySpec:
    """Partition of the unit-square boundary into Gamma1 and Gamma2.

    Gamma1 carries (u = 0, p = 0); Gamma2 carries (u = 0, zero normal
    flux).  The two side lists must partition {left, right, bottom, top}.
    """

    def __init__(self, gamma1, gamma2):
        g1, g2 = set(gamma1), set(gamma2)
        if g1 & g2:
            raise ValueError(f"overlapping boundary portions: {g1 & g2}")
        if g1 | g2 != set(_SIDES):
            raise ValueError(f"boundary portions do not cover the boundary: "
                             f"{(g1 | g2)} vs {set(_SIDES)}")
        self.gamma1 = tuple(s for s in _SIDES if s in g1)
        self.gamma2 = tuple(s for s in _SIDES if s in g2)

    @classmethod
    def model1(cls):
        """Gamma1 empty: no-flux condition on the whole boundary."""
        return cls((), _SIDES)

    @classmethod
    def model2(cls):
        """Gamma2 empty: pressure condition on the whole boundary."""
        return cls(_SIDES, ())


class FineSpaces:
    """DOF counts and essential-BC masks for the fine spaces."""

    def __init__(self, grid: GridHierarchy, bspec: BoundarySpec):
        self.grid = grid
        self.bspec = bspec
        n = grid.n
        self.ndof_u = 2 * (n + 1) ** 2
        self.ndof_g = 2 * n * (n + 1)
        self.ndof_p = n ** 2

        # u = 0 on the whole boundary in both models
        self.free_u = np.ones(self.ndof_u, dtype=bool)
        bnodes = grid.boundary_fine_nodes()
        self.free_u[2 * bnodes] = False
        self.free_u[2 * bnodes + 1] = False

        # g.n = 0 only on Gamma2
        self.free_g = np.ones(self.ndof_g, dtype=bool)
        self.free_g[grid.boundary_fine_edges(bspec.gamma2)] = False


class OperatorSet:
    """Sparse discrete operators of the coupled variational system.

    A: elasticity; B: pressure-to-displacement coupling; C: its
    counterpart acting on pressure tests; D: storage mass; Ecoup:
    velocity divergence tested with pressure; J: weighted velocity
    mass; K: pressure tested with velocity divergence.  No boundary
    masks are applied here.
    """

    def __init__(self, A, B, C, D, Ecoup, J, K):
        self.A = A
        self.B = B
        self.C = C
        self.D = D
        self.Ecoup = Ecoup
        self.J = J
        self.K = K


def build_spaces(grid, bspec):
    return FineSpaces(grid, bspec)


# ---- element templates (unit reference cell, scaled on use) ------------

def _q1_templates():
    """Gradient-product templates for Q1 on the unit cell.

    Returns (K_mu, K_div, M_sc): K_mu[2a+i,2b+j] = int eps:eps of the
    vector shapes, K_div = int (div)(div), M_sc[a,b] = int Na Nb.
    """
    gp = np.array([0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)])
    K_mu = np.zeros((8, 8))
    K_div = np.zeros((8, 8))
    M_sc = np.zeros((4, 4))
    for x in gp:
        for y in gp:
            w = 0.25
            N = np.array([(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y])
            dNx = np.array([-(1 - y), (1 - y), -y, y])
            dNy = np.array([-(1 - x), -x, (1 - x), x])
            M_sc += w * np.outer(N, N)
            # strain of shape (a, i): eps_xx, eps_yy, eps_xy
            eps = np.zeros((8, 3))
            eps[0::2, 0] = dNx            # x-component shapes
            eps[0::2, 2] = 0.5 * dNy
            eps[1::2, 1] = dNy            # y-component shapes
            eps[1::2, 2] = 0.5 * dNx
            # eps:eps with doubled shear term
            K_mu += w * (np.outer(eps[:, 0], eps[:, 0])
                         + np.outer(eps[:, 1], eps[:, 1])
                         + 2.0 * np.outer(eps[:, 2], eps[:, 2]))
            dv = np.zeros(8)
            dv[0::2] = dNx
            dv[1::2] = dNy
            K_div += w * np.outer(dv, dv)
    return K_mu, K_div, M_sc


_K_MU, _K_DIV, _M_SC = _q1_templates()

# int over the unit cell of d(Na)/dx and d(Na)/dy
_DIVX = np.array([-0.5, 0.5, -0.5, 0.5])
_DIVY = np.array([-0.5, -0.5, 0.5, 0.5])

# RT0 per-direction mass block on the unit cell, edge order (L,R,B,T)
_RT_MASS = np.zeros((4, 4))
_RT_MASS[:2, :2] = [[1 / 3, 1 / 6], [1 / 6, 1 / 3]]
_RT_MASS[2:, 2:] = [[1 / 3, 1 / 6], [1 / 6, 1 / 3]]


def _udofs(cell_nodes):
    """Interleaved displacement DOFs per cell, shape (ncell, 8)."""
    d = np.empty((cell_nodes.shape[0], 8), dtype=int)
    d[:, 0::2] = 2 * cell_nodes
    d[:, 1::2] = 2 * cell_nodes + 1
    return d


def _scatter(dofs_r, dofs_c, elems, shape):
    nr, nc = elems.shape[1], elems.shape[2]
    rows = np.repeat(dofs_r, nc, axis=1).ravel()
    cols = np.tile(dofs_c, (1, nr)).ravel()
    return sp.coo_matrix((elems.ravel(), (rows, cols)), shape=shape).tocsr()


# ---- assembly routines -------------------------------------------------

def assemble_elasticity(grid, lam, mu, cells=None):
    """Stiffness of 2 mu eps(u):eps(v) + lam (div u)(div v)."""
    if cells is None:
        cells = np.arange(grid.num_fine_cells)
    lam = np.asarray(lam)[cells]
    mu = np.asarray(mu)[cells]
    elems = (2.0 * mu)[:, None, None] * _K_MU + lam[:, None, None] * _K_DIV
    dofs = _udofs(grid.cell_nodes[cells])
    ndof = 2 * grid.num_fine_nodes
    return _scatter(dofs, dofs, elems, (ndof, ndof))


def assemble_vector_mass(grid, coeff=None, cells=None):
    """Weighted vector Q1 mass matrix, coefficient constant per cell."""
    if cells is None:
        cells = np.arange(grid.num_fine_cells)
    c = np.ones(len(cells)) if coeff is None else np.asarray(coeff)[cells]
    Mv = np.zeros((8, 8))
    Mv[0::2, 0::2] = _M_SC
    Mv[1::2, 1::2] = _M_SC
    elems = (c * grid.h ** 2)[:, None, None] * Mv
    dofs = _udofs(grid.cell_nodes[cells])
    ndof = 2 * grid.num_fine_nodes
    return _scatter(dofs, dofs, elems, (ndof, ndof))


def assemble_coupling_B(grid, alpha):
    """B[v, q] = int alpha (div v) q, shape (ndof_u, ndof_p)."""
    cells = np.arange(grid.num_fine_cells)
    dv = np.empty(8)
    dv[0::2] = _DIVX
    dv[1::2] = _DIVY
    elems = (alpha * grid.h) * np.tile(dv, (len(cells), 1))[:, :, None]
    dofs_u = _udofs(grid.cell_nodes)
    dofs_p = cells[:, None]
    return _scatter(dofs_u, dofs_p, elems,
                    (2 * grid.num_fine_nodes, grid.num_fine_cells))


def assemble_coupling_C(grid, alpha):
    """C[q, v] = int alpha q (div v), shape (ndof_p, ndof_u)."""
    cells = np.arange(grid.num_fine_cells)
    dv = np.empty(8)
    dv[0::2] = _DIVX
    dv[1::2] = _DIVY
    elems = (alpha * grid.h) * np.tile(dv, (len(cells), 1))[:, None, :]
    dofs_u = _udofs(grid.cell_nodes)
    dofs_p = cells[:, None]
    return _scatter(dofs_p, dofs_u, elems,
                    (grid.num_fine_cells, 2 * grid.num_fine_nodes))


def assemble_velocity_mass(grid, coeff, cells=None):
    """Weighted RT0 mass matrix, cellwise-constant coefficient."""
    if cells is None:
        cells = np.arange(grid.num_fine_cells)
    c = np.asarray(coeff)
    c = c[cells] if c.ndim else np.full(len(cells), float(c))
    elems = (c * grid.h ** 2)[:, None, None] * _RT_MASS
    dofs = grid.cell_edges[cells]
    return _scatter(dofs, dofs, elems,
                    (grid.num_fine_edges, grid.num_fine_edges))


def assemble_div_K(grid):
    """K[z, q] = int (div z) q, shape (ndof_g, ndof_p); entries +-h."""
    cells = np.arange(grid.num_fine_cells)
    s = np.array([-1.0, 1.0, -1.0, 1.0])
    elems = grid.h * np.tile(s, (len(cells), 1))[:, :, None]
    return _scatter(grid.cell_edges, cells[:, None], elems,
                    (grid.num_fine_edges, grid.num_fine_cells))


def assemble_div_E(grid):
    """E[q, z] = int q (div z), shape (ndof_p, ndof_g)."""
    cells = np.arange(grid.num_fine_cells)
    s = np.array([-1.0, 1.0, -1.0, 1.0])
    elems = grid.h * np.tile(s, (len(cells), 1))[:, None, :]
    return _scatter(cells[:, None], grid.cell_edges, elems,
                    (grid.num_fine_cells, grid.num_fine_edges))


def assemble_divdiv(grid, cells=None):
    """Gram matrix of cellwise divergences, int (div g)(div z)."""
    if cells is None:
        cells = np.arange(grid.num_fine_cells)
    s = np.array([-1.0, 1.0, -1.0, 1.0])
    elems = np.tile(np.outer(s, s), (len(cells), 1, 1))
    dofs = grid.cell_edges[cells]
    return _scatter(dofs, dofs, elems,
                    (grid.num_fine_edges, grid.num_fine_edges))


def assemble_pressure_mass(grid, coeff=None):
    """Diagonal pressure mass, int coeff q p, coefficient per cell."""
    c = np.ones(grid.num_fine_cells) if coeff is None else np.asarray(coeff)
    return sp.diags(c * grid.h ** 2).tocsr()


def assemble_operators(spaces: FineSpaces, med) -> OperatorSet:
    """Assemble every bilinear operator of the coupled system (unmasked)."""
    grid = spaces.grid
    if med.ncells != grid.num_fine_cells:
        raise ValueError(f"medium has {med.ncells} cells, grid has "
                         f"{grid.num_fine_cells}")
    A = assemble_elasticity(grid, med.lam, med.mu)
    B = assemble_coupling_B(grid, med.alpha)
    C = assemble_coupling_C(grid, med.alpha)
    D = assemble_pressure_mass(grid, 1.0 / med.M)
    Ecoup = assemble_div_E(grid)
    J = assemble_velocity_mass(grid, med.nu / med.kappa)
    K = assemble_div_K(grid)
    return OperatorSet(A, B, C, D, Ecoup, J, K)


def assemble_load(spaces: FineSpaces, f, t=0.0):
    """Load vector over the pressure space: entry = f * cell area.

    f may be a flat per-cell array or a callable f(t) -> per-cell array.
    """
    grid = spaces.grid
    fc = f(t) if callable(f) else np.asarray(f, dtype=float)
    if fc.size != grid.num_fine_cells:
        raise ValueError("source has wrong number of cells")
    return fc * grid.h ** 2


def energy_norm(u, A):
    """sqrt(u^T A u); tiny negative round-off is clipped to zero."""
    return np.sqrt(max(float(u @ (A @ u)), 0.0))
