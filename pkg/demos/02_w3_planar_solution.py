# %% [markdown]
# Three qubits in a W state, encoded by H = X1X2 + X2X3.
# The single-qubit conditions confine every axis to the x-y plane; the pair
# conditions become 2x2 bilinear forms that close in a triangle. The solver
# finds the angles in closed form, and they match the trigonometric formulas
# coded in `closed_form_angles`.

# %%
import numpy as np

from localqcrb import LocalMeasurement, build_catalog_model, cfi, pair_coupling, qfi, solve_planar_three_qubit
from localqcrb.catalog import closed_form_angles

model = build_catalog_model("w3_xx")
print("lambda    a1       a2       a3     CFI/QFI   closed-form a2")
for lam in np.linspace(0.1, 1.5, 8):
    rep = solve_planar_three_qubit(model, lam)
    ratio = cfi(model, LocalMeasurement(rep.axes), lam) / qfi(model, lam)
    a = np.mod(rep.angles, np.pi)
    print(f"{lam:5.2f}  {a[0]:7.4f}  {a[1]:7.4f}  {a[2]:7.4f}  {ratio:.10f}  {np.mod(closed_form_angles(lam)[1], np.pi):7.4f}")

# %% [markdown]
# The pair matrix between the outer qubits has negative determinant for every
# lambda, which is what guarantees a real solution.

# %%
for lam in (0.0, 0.5, 1.0):
    t13 = pair_coupling(model, lam, 1, 3).matrix
    print(f"lambda={lam}: det T13 = {np.linalg.det(t13):+.6f}")
