"""
How dthr trades centers for accuracy
====================================

Fix one side's dthr and sweep the other in steps of 0.02.  The same sweep is
available as ``fedpnn sweep``.
"""

from fedpnn.cli import plot_sweep, sweep_grid, sweep_rows, write_sweep_csv
from fedpnn.dataset import load_breast_cancer
from fedpnn.federation import FederationConfig

ds = load_breast_cancer()
cfg = FederationConfig(client_dthr=0.19, server_dthr=0.17, seed=0)

# %%
# Vary the server dthr with the client dthr held at 0.19.

rows = sweep_rows(ds, cfg, "server_dthr", sweep_grid(0.05, 0.25, 0.02))
for r in rows:
    if r[1] == "server":
        print(f"server dthr {r[0]:.2f}: AUC {r[3]:.3f}, meta centers ({r[4]}; {r[5]})")
plot_sweep(rows, "server_dthr", "server_sweep")

# %%
# Vary the client dthr with the server dthr held at 0.17.

rows = sweep_rows(ds, cfg, "client_dthr", sweep_grid(0.05, 0.29, 0.02))
write_sweep_csv(rows, "client_sweep.csv")
for r in rows:
    if r[1] == "client_1":
        print(f"client dthr {r[0]:.2f}: client_1 local AUC {r[2]:.3f}, centers ({r[4]}; {r[5]})")
plot_sweep(rows, "client_dthr", "client_sweep")
print("wrote client_sweep.csv and *_auc.svg / *_centers.svg")
