# Which polynomials does the mixed cubic-quartic operator annihilate?

from fractions import Fraction

from fe_stab import make_polynomial, residual_at, symbolic_residual

# a x^4 + b x^3 is a solution for every a, b: the expansion is the zero polynomial
f = make_polynomial([0, 0, 0, Fraction(-3, 7), Fraction(5, 2)])
print("D[f] for f =", f, "->", symbolic_residual(f))

# lower and higher monomials leave a fingerprint
for k in (0, 1, 2, 5, 6):
    mono = make_polynomial([0] * k + [1])
    print(f"D[x^{k}] =", symbolic_residual(mono))

# point evaluation agrees with the expansion, in exact arithmetic
x2 = make_polynomial([0, 0, 1])
print("D[x^2](1, 1) =", residual_at(x2, 1, 1))
print("D[1](x, y)   =", residual_at(make_polynomial([1]), Fraction(2, 3), 5))
