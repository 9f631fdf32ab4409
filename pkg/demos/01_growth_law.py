"""
Growth laws and the scalar identities behind the reaction step.

The linear law G(p) = a (P - p) makes every envelope tight.  Its inverse
H = (Id - G)^-1 is the pressure the tumour settles on for a given
potential, and the frozen-potential reaction is a logistic ODE that we can
step exactly, however stiff.
"""

import numpy as np

from brinkman_lab import H_inverse, exact_reaction_step, make_linear_growth, omega_exact
from brinkman_lab.selftest import perturbed_law

law = make_linear_growth(alpha_bar=1.0, p_max=1.0)
w = np.array([0.0, 0.25, 0.5, 1.0])
print("H(w) for the linear law:", H_inverse(law, w))          # (w + 1) / 2

# A cubic perturbation is still admissible; H is found by safeguarded Newton.
bent = perturbed_law()
print("H(w) for the perturbed law:", np.round(H_inverse(bent, w), 6))

# The logistic solution relaxes to a P / (1 + a) from any positive start.
for xi in (0.05, 0.5, 0.9):
    print(f"omega({xi}, t) at t = 0, 1, 5, 20:",
          np.round([omega_exact(law, xi, t) for t in (0, 1, 5, 20)], 5))

# The exact reaction step does not care how large k is.
for k in (20, 320, 1e5):
    p = exact_reaction_step(law, p0=0.05, W=0.6, k=k, dt=0.01)
    print(f"k = {k:>8g}: p after dt = 0.01 is {float(p):.6f}  (carrying capacity 0.8)")
