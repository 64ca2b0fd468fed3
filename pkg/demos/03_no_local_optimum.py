# %% [markdown]
# Adding YY couplings to the W3 model breaks local optimality at lambda = 0.
# With every axis forced into the x-y plane, each pair condition reads
# cos(b_j - b_k) = 0, and no three angles satisfy all three at once.

# %%
import numpy as np

from localqcrb import build_catalog_model, covariance_certificate, hoc_solve_numeric, lmcc_build, m_matrix, qfi, cfi

model = build_catalog_model("w3_xxyy_counter")
cert = covariance_certificate(model, 0.0)
print("certificate:", cert.note)
for pair, t in cert.pair_matrices.items():
    print(pair, np.round(t, 4).tolist())

# %% [markdown]
# The multistart search agrees: its best residual stays far from zero.

# %%
rep = hoc_solve_numeric(m_matrix(model, 0.0), restarts=100)
print(f"best residual over {rep.restarts_used} restarts: {rep.residual:.4f} ({rep.status})")

# %% [markdown]
# Classical communication fixes it: the adaptive tree reaches the QFI.

# %%
tree = lmcc_build(m_matrix(model, 0.0))
print(f"QFI={qfi(model, 0.0):.6f}  adaptive CFI={cfi(model, tree, 0.0):.6f}")
