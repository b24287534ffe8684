"""Speed functions, sphere shrinkers and the two terms of the maximum-principle argument.

Run with ``python3 demos/03_shrinker_terms.py``.
"""

# %%
import numpy as np

from sigmaflow.shrinker import (
    SigmaPower,
    SigmaRatio,
    SigmaSum,
    TestFunction,
    sample_constrained_tensor,
    sphere_radius,
    term1_general,
    term1_sigma_power,
    term2_sigma_power,
    term2_sigma_sum,
)

# %% [markdown]
# A speed exposes value, gradient, Hessian and the divided-difference
# quotient.  Spheres shrink self-similarly at a radius set by the speed.

# %%
F = SigmaPower(2, 1.5)
lam = np.array([0.8, 1.0, 1.3])
print("F =", F.value(lam), "grad =", F.gradient(lam))
print("quotient:\n", F.quotient(lam))
for G in (SigmaPower(1), SigmaPower(2), SigmaSum([1.0, 1.0]), SigmaRatio(2)):
    print(G, sphere_radius(G, 2))

# %% [markdown]
# TERM I: the general contraction against the closed form.

# %%
rng = np.random.default_rng(2)
batch = np.exp(rng.uniform(-1, 1, (5, 4)))
print(np.c_[term1_general(F, TestFunction(2), batch), term1_sigma_power(2, 1.5, batch)])

# %% [markdown]
# TERM II needs a gradient tensor at a critical point of the test function.
# On a pinched spectrum it stays nonnegative; both evaluation routes agree.

# %%
lam = np.array([0.95, 1.0, 0.9, 0.97])
for _ in range(3):
    h = sample_constrained_tensor(lam, 2, rng)
    res = term2_sigma_power(2, 1.0, lam, h)
    print(f"value={res.value:.6f} bracket={res.bracket:.12f} regrouped={res.decomposition:.12f}")
h = sample_constrained_tensor(lam, 4, rng)
print(term2_sigma_sum([1.0, 0.5, 0.2, 0.1], lam, h))
