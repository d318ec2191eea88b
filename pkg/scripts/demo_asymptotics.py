"""Plant a singular expansion, push it through a meromorphic symbol, read it back."""
import numpy as np

from mellin_lab.asympt import AsymptoticType, plant_asymptotics, push_type, verify_push
from mellin_lab.merosym import rational_pole_symbol, scalar_symbol

P = AsymptoticType(((-1.0, 0), (-1.3 + 0.5j, 1)), gamma=1.0)
coeffs = [np.array([1.0]), np.array([0.4, -0.2j])]
# a pole of the symbol sitting on one of the exponents creates an extra log
f = scalar_symbol(lambda w: np.exp(w**2) / (w + 1.0), poles=rational_pole_symbol(1.0, -1.0).poles)

pred = push_type(f, P, coeffs)
for (p, m), c in zip(pred.type.points, pred.coeffs):
    print(f"p = {complex(p):.4f}  log order {m}  coefficients {np.round(c, 8)}")
rep = verify_push(f, P, coeffs)
print(rep.name, "passed" if rep.passed else "FAILED")
for key, val in rep.measured.items():
    if np.isscalar(val):
        print(f"  {key}: {val}")
