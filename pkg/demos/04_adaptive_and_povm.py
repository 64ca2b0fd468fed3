# %% [markdown]
# For random pure models the adaptive (LMCC) tree always saturates the bound,
# while a fixed local measurement is only guaranteed for two qubits.

# %%
import numpy as np

from localqcrb import LocalMeasurement, cfi, hoc_solve_numeric, lmcc_build, m_matrix, qfi
from localqcrb.model import random_model

rng = np.random.default_rng(0)
for n in (2, 3, 4):
    model = random_model(n, rng)
    m = m_matrix(model, 0.2)
    tree = lmcc_build(m)
    rep = hoc_solve_numeric(m, restarts=10)
    local = cfi(model, LocalMeasurement(rep.axes), 0.2)
    print(f"N={n}  QFI={qfi(model, 0.2):8.4f}  LMCC CFI={cfi(model, tree, 0.2):8.4f}"
          f"  best fixed local CFI={local:8.4f} ({rep.status})")

# %% [markdown]
# A saturating three-outcome POVM can always be traded for a projective one
# built from its first outcome axis.

# %%
from localqcrb import LocalPovm, build_catalog_model, reduce_to_projective, saturation_check

angles = 0.4 + np.array([0, 2, 4]) * np.pi / 3
trine = np.array([[np.cos(a), np.sin(a), 0.0] for a in angles])
povm = LocalPovm([np.full(3, 2 / 3)] * 3, [trine] * 3)
m = m_matrix(build_catalog_model("ghz", 3), 0.25)
print("trine POVM saturates:", saturation_check(m, povm)[0])
print("projective reduction saturates:", saturation_check(m, reduce_to_projective(povm))[0])
