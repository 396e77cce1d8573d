"""Time stepping for the coupled displacement/velocity/pressure system.

Works on any OperatorSet plus boundary masks, so the same steppers run
the fine reference problem and the projected multiscale problem.  Two
schemes: a fixed-stress splitting (flow block first, then elasticity)
and a monolithic fully-coupled solve.  All essential boundary values
are homogeneous, so masked DOFs simply stay zero.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


@dataclass
class SchemeConfig:
    scheme: str = "fixed_stress"    # or "fully_coupled"
    T: float = 1.0
    J_t: int = 10

    def __post_init__(self):
        if self.scheme not in ("fixed_stress", "fully_coupled"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.J_t < 1 or self.T <= 0:
            raise ValueError("need J_t >= 1 and T > 0")

    @property
    def tau(self):
        return self.T / self.J_t


@dataclass
class SystemState:
    u: np.ndarray
    g: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def copy(self):
        return SystemState(self.u.copy(), self.g.copy(), self.p.copy(), self.t)


@dataclass
class Trajectory:
    states: list = field(default_factory=list)

    @property
    def final(self):
        return self.states[-1]


def _restrict(M, rows, cols):
    return M.tocsr()[rows][:, cols] if sp.issparse(M) else M[np.ix_(rows, cols)]


class _Solver:
    """Direct sparse factorization with iterative refinement.

    Refines to 1e-10 relative residual; high-contrast coefficients can
    otherwise leave a single LU backsolve short of that.
    """

    def __init__(self, M, name):
        self.M = M.tocsc()
        self.name = name
        try:
            self.lu = spla.splu(self.M)
        except RuntimeError:
            self.lu = None  # singular factorization; least-squares fallback

    def solve(self, rhs):
        scale = np.linalg.norm(rhs)
        if self.lu is not None:
            x = self.lu.solve(rhs)
            if scale == 0.0:
                return x
            for _ in range(3):
                r = rhs - self.M @ x
                if np.linalg.norm(r) <= 1e-10 * scale:
                    break
                x = x + self.lu.solve(r)
        if self.lu is None or not np.all(np.isfinite(x)) \
                or np.linalg.norm(self.M @ x - rhs) > 1e-6 * scale:
            # rank-deficient but consistent systems occur for
            # full-retention reduced spaces; take the min-norm solution
            x = np.linalg.lstsq(self.M.toarray(), rhs, rcond=None)[0]
        res = np.linalg.norm(self.M @ x - rhs)
        if scale > 0 and res > 1e-6 * scale:
            raise RuntimeError(
                f"{self.name} solve breakdown: relative residual {res / scale:.3e}")
        return x


class FixedStressStepper:
    """One step of the sequential splitting: coupled flow block, then
    elasticity driven by the fresh pressure."""

    def __init__(self, ops, free_u, free_g, tau):
        self.tau = tau
        self.free_u = free_u
        self.free_g = free_g
        iu = np.flatnonzero(free_u)
        ig = np.flatnonzero(free_g)
        ip = np.arange(ops.D.shape[0])
        self._iu, self._ig = iu, ig
        J_ff = _restrict(ops.J, ig, ig)
        K_fp = _restrict(ops.K, ig, ip)
        E_pf = _restrict(ops.Ecoup, ip, ig)
        flow = sp.bmat([[J_ff, -K_fp], [E_pf, ops.D / tau]], format="csc")
        self.flow = _Solver(flow, "flow block")
        self.elas = _Solver(_restrict(ops.A, iu, iu), "elasticity block")
        self.B_fp = _restrict(ops.B, iu, ip)
        self.C = ops.C
        self.D = ops.D
        self.ndof_u = ops.A.shape[0]
        self.ndof_g = ops.J.shape[0]

    def step(self, state, u_prev, load):
        tau, ig, iu = self.tau, self._ig, self._iu
        rhs_p = load - self.C @ ((state.u - u_prev) / tau) \
            + self.D @ (state.p / tau)
        rhs = np.concatenate([np.zeros(len(ig)), rhs_p])
        sol = self.flow.solve(rhs)
        g = np.zeros(self.ndof_g)
        g[ig] = sol[:len(ig)]
        p = sol[len(ig):]
        u = np.zeros(self.ndof_u)
        u[iu] = self.elas.solve(self.B_fp @ p)
        return SystemState(u, g, p, state.t + tau)


class FullyCoupledStepper:
    """One step of the monolithic three-field solve."""

    def __init__(self, ops, free_u, free_g, tau):
        self.tau = tau
        iu = np.flatnonzero(free_u)
        ig = np.flatnonzero(free_g)
        ip = np.arange(ops.D.shape[0])
        self._iu, self._ig = iu, ig
        A_ff = _restrict(ops.A, iu, iu)
        B_fp = _restrict(ops.B, iu, ip)
        J_ff = _restrict(ops.J, ig, ig)
        K_fp = _restrict(ops.K, ig, ip)
        C_pf = _restrict(ops.C, ip, iu)
        E_pf = _restrict(ops.Ecoup, ip, ig)
        mono = sp.bmat([
            [A_ff, None, -B_fp],
            [None, J_ff, -K_fp],
            [C_pf / tau, E_pf, ops.D / tau]], format="csc")
        self.mono = _Solver(mono, "monolithic block")
        self.C = ops.C
        self.D = ops.D
        self.ndof_u = ops.A.shape[0]
        self.ndof_g = ops.J.shape[0]

    def step(self, state, u_prev, load):
        tau, iu, ig = self.tau, self._iu, self._ig
        rhs_p = load + self.C @ (state.u / tau) + self.D @ (state.p / tau)
        rhs = np.concatenate([np.zeros(len(iu) + len(ig)), rhs_p])
        sol = self.mono.solve(rhs)
        u = np.zeros(self.ndof_u)
        g = np.zeros(self.ndof_g)
        u[iu] = sol[:len(iu)]
        g[ig] = sol[len(iu):len(iu) + len(ig)]
        p = sol[len(iu) + len(ig):]
        return SystemState(u, g, p, state.t + tau)


def initialize(ops, free_u, free_g, p0):
    """Consistent initial state from the prescribed initial pressure.

    u0 solves the elasticity relation against p0; g0 solves the Darcy
    relation against p0; the previous-step displacement is set to u0.
    """
    iu = np.flatnonzero(free_u)
    ig = np.flatnonzero(free_g)
    p0 = np.asarray(p0, dtype=float)
    u = np.zeros(ops.A.shape[0])
    if len(iu):
        u[iu] = _Solver(_restrict(ops.A, iu, iu), "initial elasticity").solve(
            _restrict(ops.B, iu, np.arange(len(p0))) @ p0)
    g = np.zeros(ops.J.shape[0])
    if len(ig):
        g[ig] = _Solver(_restrict(ops.J, ig, ig), "initial flow").solve(
            _restrict(ops.K, ig, np.arange(len(p0))) @ p0)
    state = SystemState(u, g, p0.copy(), 0.0)
    return state, u.copy()


def make_stepper(cfg: SchemeConfig, ops, free_u, free_g):
    cls = FixedStressStepper if cfg.scheme == "fixed_stress" \
        else FullyCoupledStepper
    return cls(ops, free_u, free_g, cfg.tau)


def run(cfg: SchemeConfig, ops, free_u, free_g, loads, p0,
        keep_history=True):
    """Advance J_t uniform steps from the initial pressure p0.

    loads: per-cell load vector, or callable(t) evaluated at the end of
    each step interval, or a list of J_t vectors.
    """
    stepper = make_stepper(cfg, ops, free_u, free_g)
    state, u_prev = initialize(ops, free_u, free_g, p0)
    traj = Trajectory([state.copy()])
    for k in range(cfg.J_t):
        t_next = (k + 1) * cfg.tau
        if callable(loads):
            load = loads(t_next)
        elif isinstance(loads, (list, tuple)):
            load = loads[k]
        else:
            load = loads
        new = stepper.step(state, u_prev, load)
        u_prev = state.u
        state = new
        if keep_history or k == cfg.J_t - 1:
            traj.states.append(state.copy())
    return traj
