"""Pinching ratios, certificates and the constants delta / theta.

Run with ``python3 demos/02_pinching.py``.
"""

# %%
import numpy as np

from sigmaflow.pinch import (
    CertificateParams,
    Theta_constant,
    certify_quadratic_inequality,
    check_condition,
    check_condition_batch,
    check_section5_ratios,
    delta_constant,
    delta_independent,
    theta_constant,
)
from sigmaflow.sampling import pinched_spectra

# %% [markdown]
# At an umbilic point every ratio equals ``n / (n - 1)``.  Spreading the
# spectrum pushes some ratio past ``1 + delta``.

# %%
print(check_condition(2, 1.0, np.full(4, 0.7)))
for top in (2.0, 3.0, 4.0):
    rep = check_condition(2, 1.0, [1.0, 1.0, 1.0, top])
    print(f"top={top}: ratio range [{rep.ratio_min:.4f}, {rep.ratio_max:.4f}] admissible={rep.admissible} witness={rep.witness}")

# %% [markdown]
# The constants.  ``delta(n, k)`` comes from a quadratic certificate whose
# margin is zero exactly at the constant.

# %%
for n in (3, 4, 6):
    row = {k: round(delta_constant(n, k), 6) for k in range(2, n)}
    print(f"n={n} delta={row} delta_indep={delta_independent(n):.6f} Theta={Theta_constant(n):.6f}")
    for k in range(2, n):
        cert = certify_quadratic_inequality(CertificateParams.for_k(n, k))
        print(f"   k={k} margin={cert.margin:+.1e} holds={cert.holds}")
print("theta(1, 3) =", theta_constant(1, 3), " theta(2, 3) =", theta_constant(2, 3))

# %% [markdown]
# A ``3 lam_min >= lam_max`` pinched spectrum always passes the ``k = 2``
# condition; a batch check makes that quick to see.

# %%
rng = np.random.default_rng(1)
for n in (3, 5, 8):
    ok, lo, hi = check_condition_batch(2, 1.0, pinched_spectra(n, 1 / 3, 10_000, rng))
    print(f"n={n}: {ok.mean():.0%} admissible, ratio range [{lo.min():.3f}, {hi.max():.3f}]")

# %% [markdown]
# The sum-of-sigmas case uses its own ratio family.

# %%
print(check_section5_ratios(2, np.full(4, 1.0)).admissible, check_section5_ratios(2, [1, 1, 1, 100]).admissible)
