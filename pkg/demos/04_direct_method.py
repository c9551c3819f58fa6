# Recover the quartic and cubic parts of a noisy solution and compare with the bound.

from fe_stab import (
    Constant,
    ConvergenceCriteria,
    Diverged,
    dyadic_grid,
    extract_component,
    make_perturbed,
    make_polynomial,
    stabilize,
    sup_residual,
)

delta = 1e-3
f = make_perturbed(make_polynomial([0, 0, 0, 1, 1]), delta, seed=7)
grid = dyadic_grid(-2, 2, 10)

eps = sup_residual(f, grid).sup
print(f"measured sup |D_f| = {eps:.4f} (at most 287 * delta = {287 * delta})")

report = stabilize(f, Constant(eps), grid, s=-1)
print("a =", report.a_quartic, " b =", report.b_cubic)
print("iterations:", report.iterations_used)
print(f"grid error {report.grid_error:.2e}, bound {report.bound:.4f}, margin {report.margin:.4f}")

# iterating in the wrong direction blows up and is reported, not silently returned
try:
    extract_component(make_polynomial([0, 0, 0, 1]), 4, grid, 1, ConvergenceCriteria(max_iterations=20))
except Diverged as exc:
    print("Diverged:", exc, "differences", [f"{d:.0f}" for d in exc.diagnostics.differences])
