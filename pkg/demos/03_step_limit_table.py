"""Peak stable time steps for the published order-recovering weight vectors.

Computes the largest stable step (jacobian 1, unit speed) for the six
published (p, scheme, weights) combinations and compares s * tau against
the published values with a single global scale s fitted on the p=3 rk44
row. Two stability thresholds are shown: at the strict 1e-10 threshold
several published optima report a near-zero limit because their
semi-discrete operators carry small positive eigenvalue real parts
(1e-8..4.5e-4); at the 1e-4 threshold where the limits plateau, the
three p=3 rows line up at s = 0.5 to within 0.2 percent. The p=4 rows do
not reproduce under any tested reading of the correction system, which
tracks the internal sign inconsistencies of the published p=4 matrix.
"""

from gsfr import CorrectionParams, build_reference_element, build_scheme_operators, cfl_limit, solve_correction

TABLE = [
    (3, "rk33", [1, 1.274e-3, 1.438e-2, 7.848e-3], 0.385),
    (3, "rk44", [1, 2.069e-4, 2.336e-3, 2.336e-3], 0.390),
    (3, "rk55", [1, 6.952e-4, -6.158e-5, 2.336e-3], 0.443),
    (4, "rk33", [1, 4.833e-4, 2.336e-5, -1.438e-4, 2.637e-4], 0.431),
    (4, "rk44", [1, 1.624e-3, 2.637e-4, -2.637e-4, 2.637e-4], 0.430),
    (4, "rk55", [1, 1.624e-3, 1.274e-5, -2.637e-4, 8.859e-4], 0.354),
]

computed = {}
print(f"{'p':>2} {'scheme':>6} {'strict tau':>12} {'tau @1e-4':>12} {'published':>10}")
for p, rk, weights, published in TABLE:
    pair = solve_correction(CorrectionParams(p, weights))
    ops = build_scheme_operators(build_reference_element(p, pair), alpha=1.0, jacobian=1.0)
    strict = cfl_limit(ops, rk, k_samples=256).tau_max
    loose = cfl_limit(ops, rk, k_samples=256, rho_tol=1e-4).tau_max
    computed[(p, rk)] = loose
    print(f"{p:>2} {rk:>6} {strict:>12.3e} {loose:>12.4f} {published:>10.3f}")

scale = 0.390 / computed[(3, "rk44")]
print(f"\nglobal scale fitted on (p=3, rk44): s = {scale:.4f}")
for p, rk, _, published in TABLE:
    value = scale * computed[(p, rk)]
    rel = 100.0 * abs(value - published) / published
    print(f"  p={p} {rk}: s*tau = {value:.4f} vs {published:.3f}  ({rel:.2f}%)")

print("\nbaselines (plain-L2 weights), tau at the strict threshold:")
for p in (3, 4):
    pair = solve_correction(CorrectionParams(p, [1] + [0] * p))
    ops = build_scheme_operators(build_reference_element(p, pair), alpha=1.0, jacobian=1.0)
    for rk in ("rk33", "rk44", "rk55"):
        print(f"  p={p} {rk}: tau = {cfl_limit(ops, rk, k_samples=256).tau_max:.4f}")
