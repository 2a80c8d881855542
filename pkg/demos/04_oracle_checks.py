# %% [markdown]
# # Uncertified cross-checks
#
# Plain midpoint sums and Monte Carlo estimates give independent views of
# the same integrals. They never feed the certificate.

# %%
from torus_lp import GridSpec, build_psi
from torus_lp import oracle

psi = build_psi()
spec = GridSpec(300)

for sign in (oracle.PLUS, oracle.MINUS):
    mid = oracle.riemann_estimate(psi, spec, 2.0, sign)
    mc = oracle.mc_estimate(psi, 2.0, sign, samples=500_000, seed=1)
    print(f"p=2 {sign:>5}: midpoint {mid.value:.6f}  monte carlo {mc.value:.6f} +- {mc.stderr:.1e}")

# %% [markdown]
# The full battery: derivative identity, monotonicity, Cauchy-Schwarz,
# dilation invariance and a few closed-form values.

# %%
for report in oracle.check_all(psi, spec, seed=1, mc_samples=200_000):
    print(report.line())
