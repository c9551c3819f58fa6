# Walk the even and odd identity chains on solutions and on non-solutions.

from fe_stab import check_chain, check_symbolic, dyadic_grid, lookup, make_perturbed, make_polynomial

solution = make_polynomial([0, 0, 0, 2, -1])
reports = check_chain(solution)
print(f"{sum(r.passed for r in reports)}/{len(reports)} identities hold on {solution}")

print(lookup("2.6").terms)
print(check_symbolic(lookup("2.6"), make_polynomial([0, 0, 1])).to_json())

# noisy solutions are checked numerically with a triangle-inequality tolerance
noisy = make_perturbed(solution, 1e-4, seed=3)
grid = dyadic_grid(-1, 1, 4)
worst = max(check_chain(noisy, grid=grid), key=lambda r: r.max_abs / r.tol)
print("tightest identity:", worst.label, worst.max_abs, "<=", worst.tol)
