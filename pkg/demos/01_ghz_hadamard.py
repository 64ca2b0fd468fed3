# %% [markdown]
# GHZ phase estimation: the M matrix is diagonal, so measuring every qubit
# in the Hadamard basis already reaches the quantum Fisher information N^2.

# %%
import numpy as np

from localqcrb import LocalMeasurement, build_catalog_model, cfi, classify_m, evolve_state, m_matrix, qfi

for n in range(2, 7):
    model = build_catalog_model("ghz", n)
    lam = 0.3
    m = m_matrix(model, lam)
    s = classify_m(m, evolve_state(model, lam))
    x_basis = LocalMeasurement(np.tile([1.0, 0.0, 0.0], (n, 1)))
    z_basis = LocalMeasurement(np.tile([0.0, 0.0, 1.0], (n, 1)))
    print(f"N={n}  M is {s.kind:9s} pair={s.ghz.indices}  QFI={qfi(model, lam):5.1f}"
          f"  CFI(x)={cfi(model, x_basis, lam):5.1f}  CFI(z)={cfi(model, z_basis, lam):.1f}")

# %% [markdown]
# Any common axis in the x-y plane works equally well: only the relative
# phase between |0..0> and |1..1> carries the parameter.

# %%
from localqcrb import hoc_residual

m = m_matrix(build_catalog_model("ghz", 4), 0.3)
for phi in np.linspace(0, np.pi, 5):
    axes = np.tile([np.cos(phi), np.sin(phi), 0.0], (4, 1))
    print(f"phi={phi:.3f}  max |Tr M A| = {hoc_residual(m, axes):.1e}")
