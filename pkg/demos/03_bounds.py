# Stability-bound series for the built-in control functions.

from fractions import Fraction

from fe_stab import Constant, PowerSum, closed_form_bound, combined_bound, select_direction

one = Fraction(1)

ev = combined_bound(Constant(one), one, -1)
print("constant control:", ev.total, "partial sum", float(ev.value), "terms", ev.terms_used)

for p in (-1, 0, 1, 2, 5, 8):
    phi = PowerSum(one, p)
    s = select_direction(phi)
    ev = combined_bound(phi, one, s)
    print(f"p={p:>2} s={s:+d} series={ev.total} closed form={closed_form_bound(phi, one)}")

# the band 3 <= p <= 4 has no admissible direction
try:
    select_direction(PowerSum(1, 3.5))
except Exception as exc:
    print(type(exc).__name__, exc)
