"""Error decay as the offline bases are enriched.

Reuses one pipeline (grid, medium, fine reference, offline eigenproblems)
and sweeps the number of displacement modes per coarse vertex and velocity
modes per coarse edge, printing a small convergence table for each.
"""

import argparse

from msbiot.cli import ScenarioConfig, Pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--n", type=int, default=40)
    args = ap.parse_args()

    cfg = ScenarioConfig(N=args.N, n=args.n)
    pipe = Pipeline(cfg)

    ju_values = (2, 4, 8, 12)
    pipe.displacement_basis(max(ju_values))
    pipe.velocity_basis()

    print("displacement enrichment (J_g fixed at "
          f"{cfg.J_g}):")
    print(f"{'J_u':>4} {'e_u':>10} {'e_a':>10} {'e_p':>10} {'e_g':>10}")
    for ju in ju_values:
        r, _, _ = pipe.solve_point(J_u=ju)
        print(f"{ju:>4} {r.e_l2_u:>10.5f} {r.e_a_u:>10.5f} "
              f"{r.e_l2_p:>10.5f} {r.e_l2_g:>10.5f}")

    print(f"\nvelocity enrichment (J_u fixed at {max(ju_values)}):")
    print(f"{'J_g':>4} {'e_g':>10} {'e_p':>10}")
    for jg in (1, 2, 3, 4):
        r, _, _ = pipe.solve_point(J_u=max(ju_values), J_g=jg)
        print(f"{jg:>4} {r.e_l2_g:>10.5f} {r.e_l2_p:>10.5f}")


if __name__ == "__main__":
    main()
