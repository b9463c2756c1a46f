"""
Whitham symbol and dispersion relations
=======================================

The nonlocal operator F^{1/2} carries the full linear water-wave dispersion.
This script prints the symbol, then compares the water-wave frequency with
the classical and the improved Green-Naghdi relations.
"""

# %%
import numpy as np

from wgn.diagnostics import CLASSICAL_GN, IMPROVED_GN, dispersion_gn, dispersion_ww
from wgn.spectral import symbol_F

# F(t) = 3 (t / tanh t - 1) / t^2 with t = sqrt(mu) |xi|. It is 1 at the
# origin and decays like 3/t.
for t in [0.0, 0.1, 1.0, 10.0, 100.0]:
    print(f"t = {t:6.1f}   F = {symbol_F(t, 1.0):.6f}   F^1/2 = {symbol_F(t, 1.0, 0.5):.6f}")

# %%
# Frequencies at mu = 1. The classical model saturates at sqrt(3), the water
# waves do not.
xi = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
ww = dispersion_ww(xi, 1.0)
gn = dispersion_gn(xi, 1.0, *CLASSICAL_GN)
imp = dispersion_gn(xi, 1.0, *IMPROVED_GN)
print("\n   xi     omega_ww   classical    improved")
for row in zip(xi, ww, gn, imp):
    print("{:5.1f}  {:10.5f}  {:10.5f}  {:10.5f}".format(*row))

# %%
# Worst-case frequency error on [0, 10]
grid = np.linspace(0, 10, 1001)
ref = dispersion_ww(grid, 1.0)
for name, ps in [("classical", CLASSICAL_GN), ("improved", IMPROVED_GN)]:
    err = np.abs(dispersion_gn(grid, 1.0, *ps) - ref).max()
    print(f"{name:>10}: max |omega - omega_ww| = {err:.4f}")
