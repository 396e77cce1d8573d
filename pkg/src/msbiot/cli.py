"""Scenario configuration, orchestration, and the command-line front end.

Config files are flat ``key = value`` text with ``#`` comments; CLI
flags override file keys.  Outputs per run: an errors CSV, field dumps,
a conservation summary, and a frozen copy of the resolved config.
"""

import argparse
import concurrent.futures
import os
import sys
from dataclasses import dataclass, asdict, replace

import numpy as np

from .grid import build_hierarchy
from . import medium as med_mod
from . import fine_fem
from . import time_integrator as ti
from . import ms_system
from . import diagnostics
from .displacement_offline import DisplacementOfflineBasis
from .velocity_offline import VelocityOfflineBasis


@dataclass
class ScenarioConfig:
    model: str = "model1"            # model1: no-flux boundary; model2: p=0
    N: int = 10
    n: int = 80                      # CI profile; the full study uses n=200
    J_u: int = 20
    J_g: int = 2
    J_t: int = 10
    T: float = 1.0
    scheme: str = "fixed_stress"
    spectral_problem: int = 1
    field: str = "blobs"             # file path, or generator name
    contrast: float = 1e4
    seed: int = 0
    eta: float = 0.2
    alpha: float = 0.9
    nu: float = 1.0
    outdir: str = "out"
    velocity_weight: str = "paper"

    def __post_init__(self):
        if self.model not in ("model1", "model2"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.spectral_problem not in (1, 2):
            raise ValueError("spectral_problem must be 1 or 2")


_INT_KEYS = {"N", "n", "J_u", "J_g", "J_t", "spectral_problem", "seed"}
_FLOAT_KEYS = {"T", "contrast", "eta", "alpha", "nu"}


def parse_config_file(path):
    """Flat key = value config text; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def _coerce(key, val):
    if key in _INT_KEYS:
        return int(val)
    if key in _FLOAT_KEYS:
        return float(val)
    return val


def config_from_sources(file_path=None, overrides=None):
    kwargs = {}
    if file_path:
        for k, v in parse_config_file(file_path).items():
            kwargs[k] = _coerce(k, v)
    for k, v in (overrides or {}).items():
        if v is not None:
            kwargs[k] = _coerce(k, v) if isinstance(v, str) else v
    return ScenarioConfig(**kwargs)


# ---- scenario data -----------------------------------------------------

def model1_source(grid):
    """+2 in the coarse cell at the origin, -2 in the opposite corner."""
    f = np.zeros(grid.num_fine_cells)
    f[grid.fine_cells_of_coarse_cell(0)] = 2.0
    f[grid.fine_cells_of_coarse_cell(grid.num_coarse_cells - 1)] = -2.0
    return f


def model2_source(grid):
    return np.ones(grid.num_fine_cells)


def initial_pressure(grid):
    """p0 = x y (1-x)(1-y) sampled at fine cell centers."""
    c = grid.fine_cell_center(np.arange(grid.num_fine_cells))
    x, y = c[:, 0], c[:, 1]
    return x * y * (1.0 - x) * (1.0 - y)


def resolve_field(cfg: ScenarioConfig, ncells):
    """Permeability field from a file path or a procedural generator."""
    if os.path.isfile(cfg.field):
        kappa = med_mod.load_field(cfg.field)
        if kappa.size != ncells:
            raise ValueError(f"field file has {kappa.size} cells, "
                             f"grid needs {ncells}")
        return kappa, os.path.basename(cfg.field)
    n = int(round(np.sqrt(ncells)))
    kappa = med_mod.generate_high_contrast(n, cfg.field, cfg.contrast,
                                           cfg.seed)
    return kappa, f"{cfg.field}:{cfg.contrast:g}:{cfg.seed}"


# ---- pipeline ----------------------------------------------------------

class Pipeline:
    """One grid/medium/operator setup with cached fine references and
    offline bases, so parameter sweeps only redo the cheap stages."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.grid = build_hierarchy(cfg.N, cfg.n)
        kappa, self.field_id = resolve_field(cfg, self.grid.num_fine_cells)
        self.med = med_mod.build_medium(kappa, cfg.eta, None, cfg.alpha, cfg.nu)
        self.bspec = fine_fem.BoundarySpec.model1() if cfg.model == "model1" \
            else fine_fem.BoundarySpec.model2()
        self.spaces = fine_fem.build_spaces(self.grid, self.bspec)
        self.ops = fine_fem.assemble_operators(self.spaces, self.med)
        source = model1_source(self.grid) if cfg.model == "model1" \
            else model2_source(self.grid)
        self.load = fine_fem.assemble_load(self.spaces, source)
        self.p0 = initial_pressure(self.grid)
        self._fine_cache = {}
        self._dbasis = None
        self._dbasis_modes = 0
        self._vbasis = None

    def fine_reference(self, J_t=None, scheme=None):
        key = (J_t or self.cfg.J_t, scheme or self.cfg.scheme)
        if key not in self._fine_cache:
            cfg = ti.SchemeConfig(key[1], self.cfg.T, key[0])
            self._fine_cache[key] = ti.run(
                cfg, self.ops, self.spaces.free_u, self.spaces.free_g,
                self.load, self.p0)
        return self._fine_cache[key]

    def displacement_basis(self, max_modes):
        have_full = self._dbasis is not None and self._dbasis_modes is None
        stale = self._dbasis is None or (
            not have_full and (max_modes is None
                               or max_modes > self._dbasis_modes))
        if stale:
            self._dbasis = DisplacementOfflineBasis(self.grid, self.med,
                                                    max_modes)
            self._dbasis_modes = max_modes
        return self._dbasis

    def velocity_basis(self):
        if self._vbasis is None:
            self._vbasis = VelocityOfflineBasis(self.grid, self.med,
                                                self.cfg.spectral_problem)
        return self._vbasis

    def solve_point(self, J_u=None, J_g=None, J_t=None):
        """Multiscale solve + diagnostics for one parameter point."""
        cfg = self.cfg
        J_u = cfg.J_u if J_u is None else J_u
        J_g = cfg.J_g if J_g is None else J_g
        J_t = cfg.J_t if J_t is None else J_t
        ms = ms_system.build_multiscale_space(
            self.grid, self.med, self.bspec, J_u, J_g, cfg.spectral_problem,
            dbasis=self.displacement_basis(J_u),
            vbasis=self.velocity_basis())
        scheme_cfg = ti.SchemeConfig(cfg.scheme, cfg.T, J_t)
        _, traj_f = ms_system.solve_multiscale(self.ops, ms, scheme_cfg,
                                               self.load, self.p0)
        fine = self.fine_reference(J_t)
        meta = {"N": cfg.N, "n": cfg.n, "Ju": J_u, "Jg": J_g, "Jt": J_t,
                "scheme": cfg.scheme, "field": self.field_id}
        ref = fine.final
        if max(np.abs(ref.u).max(), np.abs(ref.g).max(),
               np.abs(ref.p).max()) == 0.0:
            report = diagnostics.zero_report(meta)
        else:
            report = diagnostics.compute_errors(
                traj_f.final, ref, self.ops, self.grid, self.med,
                cfg.velocity_weight, meta)
        max_res, _ = ms_system.conservation_report(
            self.ops, ms.R_p, traj_f, self.load, scheme_cfg.tau, cfg.scheme)
        return report, max_res, traj_f


# ---- file outputs ------------------------------------------------------

def export_field(grid, kind, vector, path):
    """Write a state component in the field file format.

    kind: 'pressure' (per cell), 'displacement_x'/'displacement_y'
    (per node), 'velocity_magnitude' (cell average of the face field),
    or 'dof' (raw vector, one column).
    """
    n = grid.n
    if kind == "pressure":
        med_mod.save_field(path, vector, rows=n, cols=n)
    elif kind in ("displacement_x", "displacement_y"):
        comp = vector[0::2] if kind == "displacement_x" else vector[1::2]
        med_mod.save_field(path, comp, rows=n + 1, cols=n + 1)
    elif kind == "velocity_magnitude":
        e = grid.cell_edges
        gx = 0.5 * (vector[e[:, 0]] + vector[e[:, 1]])
        gy = 0.5 * (vector[e[:, 2]] + vector[e[:, 3]])
        med_mod.save_field(path, np.hypot(gx, gy), rows=n, cols=n)
    elif kind == "dof":
        med_mod.save_field(path, vector, rows=len(vector), cols=1)
    else:
        raise ValueError(f"unknown export kind {kind!r}")


def _write_outputs(outdir, cfg, reports, max_res, pipeline, traj_f):
    os.makedirs(outdir, exist_ok=True)
    diagnostics.write_csv(os.path.join(outdir, "errors.csv"), reports)
    with open(os.path.join(outdir, "config.txt"), "w") as fh:
        for k, v in asdict(cfg).items():
            fh.write(f"{k} = {v}\n")
    with open(os.path.join(outdir, "conservation.txt"), "w") as fh:
        fh.write(f"max_residual = {max_res:.6e}\n")
    grid = pipeline.grid
    final = traj_f.final
    export_field(grid, "pressure", final.p,
                 os.path.join(outdir, "pressure.txt"))
    export_field(grid, "displacement_x", final.u,
                 os.path.join(outdir, "displacement_x.txt"))
    export_field(grid, "displacement_y", final.u,
                 os.path.join(outdir, "displacement_y.txt"))
    export_field(grid, "velocity_magnitude", final.g,
                 os.path.join(outdir, "velocity_magnitude.txt"))


def run_scenario(cfg: ScenarioConfig, check=False):
    """Full pipeline for one configuration; returns (report, max_residual)."""
    try:
        pipeline = Pipeline(cfg)
    except Exception as exc:
        raise RuntimeError(f"[setup] {exc}") from exc
    try:
        report, max_res, traj_f = pipeline.solve_point()
    except Exception as exc:
        raise RuntimeError(f"[solve] {exc}") from exc
    try:
        _write_outputs(cfg.outdir, cfg, [report], max_res, pipeline, traj_f)
    except Exception as exc:
        raise RuntimeError(f"[output] {exc}") from exc
    ok = True
    if check:
        tol = 1e-9 * (np.abs(pipeline.load).max() + 1.0)
        ok = max_res <= tol
        if cfg.N == 10 and cfg.J_u >= 20:
            ok = ok and report.e_l2_p <= 0.1 and report.e_l2_u <= 0.1
    return report, max_res, ok


def run_sweep(cfg: ScenarioConfig, key, values):
    """Sweep one numeric parameter; offline stages are reused when only
    basis counts or the step count vary."""
    reports = []
    if key in ("J_u", "J_g", "J_t"):
        if key == "J_u":
            cfg = replace(cfg, J_u=max(values))
        pipeline = Pipeline(cfg)
        for v in values:
            report, max_res, _ = pipeline_point(pipeline, key, v)
            reports.append((v, report, max_res))
    else:
        workers = int(os.environ.get("MSBIOT_WORKERS", "1"))
        cfgs = [replace(cfg, **{key: v},
                        outdir=os.path.join(cfg.outdir, f"{key}_{v}"))
                for v in values]
        if workers > 1:
            with concurrent.futures.ProcessPoolExecutor(workers) as ex:
                results = list(ex.map(run_scenario, cfgs))
        else:
            results = [run_scenario(c) for c in cfgs]
        reports = [(v, r, m) for v, (r, m, _) in zip(values, results)]
    os.makedirs(cfg.outdir, exist_ok=True)
    diagnostics.write_csv(os.path.join(cfg.outdir, "sweep.csv"),
                          [r for _, r, _ in reports])
    return reports


def pipeline_point(pipeline, key, value):
    kwargs = {{"J_u": "J_u", "J_g": "J_g", "J_t": "J_t"}[key]: value}
    return pipeline.solve_point(**kwargs)


# ---- argparse front end ------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    for key in ("model", "scheme", "field", "outdir", "velocity_weight"):
        p.add_argument(f"--{key}")
    for key in sorted(_INT_KEYS):
        p.add_argument(f"--{key}", type=int)
    for key in sorted(_FLOAT_KEYS):
        p.add_argument(f"--{key}", type=float)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="msbiot",
        description="Mass-conservative multiscale poroelasticity solver")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario")
    _add_common(p_run)
    p_run.add_argument("--check", action="store_true",
                       help="exit nonzero if acceptance thresholds fail")
    p_sweep = sub.add_parser("sweep", help="sweep one parameter")
    _add_common(p_sweep)
    p_sweep.add_argument("--vary", required=True,
                         help="key=v1,v2,... e.g. J_u=4,8,12")
    args = parser.parse_args(argv)

    keys = [f.name for f in ScenarioConfig.__dataclass_fields__.values()]
    overrides = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    cfg = config_from_sources(args.config, overrides)

    if args.command == "run":
        report, max_res, ok = run_scenario(cfg, check=args.check)
        print(f"errors: u_l2={report.e_l2_u:.4g} u_a={report.e_a_u:.4g} "
              f"p_l2={report.e_l2_p:.4g} g_l2={report.e_l2_g:.4g}")
        print(f"max conservation residual: {max_res:.3e}")
        return 0 if ok else 1

    key, _, vals = args.vary.partition("=")
    if not vals:
        parser.error("--vary expects key=v1,v2,...")
    values = [int(v) if key in _INT_KEYS else float(v)
              for v in vals.split(",")]
    for v, report, max_res in run_sweep(cfg, key, values):
        print(f"{key}={v}: u_l2={report.e_l2_u:.4g} u_a={report.e_a_u:.4g} "
              f"p_l2={report.e_l2_p:.4g} g_l2={report.e_l2_g:.4g} "
              f"cons={max_res:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
