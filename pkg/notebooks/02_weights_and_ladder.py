# %% [markdown]
# The arctan weights, their grid certificates and the antiderivative
# ladder phi_[n], which grows like x^n / n! to the right and decays like
# e^{sqrt(eta) x} to the left.

# %%
import math

import numpy as np

from multisoliton.weights import (LeftArctan, RightArctan, WeightFamily, build_ladder,
                                  certify_ladder, certify_left_weight,
                                  certify_right_weight, ladder_eval,
                                  superpolynomial_weight, weight_eval)

# %%
for kappa in (0.25, 1.0):
    cert = certify_left_weight(kappa)
    print(f"left  kappa={kappa}: pass={cert.passed}  constants={cert.constants}")
for eta in (0.25, 0.5):
    cert = certify_right_weight(eta)
    print(f"right eta={eta}: pass={cert.passed}  kappa1={cert.constants['kappa1']:.6f}"
          f"  (2 sqrt(eta)/pi = {2 * math.sqrt(eta) / math.pi:.6f})")

# %%
w = build_ladder(WeightFamily(RightArctan(0.5)), 10)
print("refinement errors:", ["%.1e" % e for e in w.ladder.refinement_error])
print("ladder checks pass:", all(c.passed for c in certify_ladder(w)))

x = np.array([-10.0, 0.0, 10.0, 40.0])
for n in (1, 3, 10):
    v = ladder_eval(w, n, x)
    print(f"n={n:2d}", "  ".join(f"{a:.4e}" for a in v),
          f"  x^n/n! at 40: {40.0 ** n / math.factorial(n):.4e}")

# %%
xs = np.linspace(-5, 5, 5)
print("left weight  ", weight_eval(LeftArctan(1.0), xs))
print("right weight ", weight_eval(RightArctan(0.5), xs))
print("superpolynomial(2, 1, 3) =", superpolynomial_weight(2.0, 1, 3.0))
