"""Elementary symmetric functions and the E_k inequality.

Run with ``python3 demos/01_symmetric_functions.py``.
"""

# %% [markdown]
# ``sigma_all`` builds every elementary symmetric function of a spectrum in
# one prefix recurrence.  Restrictions ``s_k(lam | i)`` zero out entries.

# %%
import numpy as np

from sigmaflow.ineq import corollary23_value, interlace, lemma21_k2_oracle, lemma21_value
from sigmaflow.sampling import log_uniform_spectra
from sigmaflow.symfun import cone_membership, sigma, sigma_all, sigma_gradient, sigma_restricted

lam = np.array([1.0, 2.0, 3.0])
print("sigma_0..3:", sigma_all(lam))
print("sigma_2 without entries 0, 2:", sigma_restricted(2, lam, (0, 2)), " sigma_1 without entry 1:", sigma_restricted(1, lam, 1))
print("gradient of sigma_2:", sigma_gradient(2, lam))
print("sigma_4 on three entries:", sigma(4, lam))

# %% [markdown]
# Cone membership: the largest ``k`` with ``lam`` in ``Gamma_k``.

# %%
for v in ([1.0, 2.0, 3.0], [-1.0, 3.0, 3.0], [-1.0, -1.0, 1.0]):
    print(v, cone_membership(v))

# %% [markdown]
# ``E_k`` is nonnegative on the positive cone and vanishes at umbilic points.
# The sweep below looks at the normalized minimum over log-uniform samples.

# %%
rng = np.random.default_rng(0)
for n in (3, 5, 8):
    batch = log_uniform_spectra(n, 20_000, rng)
    mins = [np.min(lemma21_value(k, batch) / batch.sum(axis=1)) for k in range(2, n + 1)]
    print(f"n={n}: min E_k / s_1 over k = {min(mins):.3e}")
print("umbilic E_3:", lemma21_value(3, np.full(5, 2.0)))

# %% [markdown]
# For ``k = 2`` the corollary quantity has a sum-of-squares form; the two
# agree, and leaving the positive cone breaks the sign.

# %%
x = log_uniform_spectra(4, 5, rng)
print(np.c_[corollary23_value(2, x), lemma21_k2_oracle(x)])
print("(-1, 3, 3):", corollary23_value(2, [-1.0, 3.0, 3.0], unsafe=True))

# %% [markdown]
# Interlacing: the reciprocal roots ``mu`` of the derivative of
# ``prod(1 - lam_i x)`` satisfy ``(m+1) s_{m+1}(lam) = s_1(lam) s_m(mu)``.

# %%
lam = np.array([0.5, 1.0, 1.0, 4.0])
mu = interlace(lam).mu
print("mu =", mu)
m = np.arange(lam.size)
print((m + 1) * sigma_all(lam)[1:], lam.sum() * sigma_all(mu, lam.size - 1))
