"""
Evolving clustering, one point at a time
========================================

ECM reads a stream once.  Each point either lands inside an existing
cluster, stretches the cheapest cluster to reach it, or starts a new one.
The ``dthr`` knob caps every radius and so controls how many clusters appear.
"""

import numpy as np

from fedpnn.ecm import EcmModel, ecm_fit

# %%
# A one-dimensional trace.  The second point is 0.2 away from the first
# cluster; with dthr = 0.2 that is within reach (0.2 <= 2 * 0.2), so the
# cluster widens to radius 0.1 and its center slides to 0.1.

model = EcmModel(dthr=0.2, dim=1)
for x, label in [(0.0, 0), (0.2, 1), (1.0, 0), (0.15, 0)]:
    model.update([x], label)
    print(f"after x={x:<4}: centers={model.centers.ravel().round(3)}, "
          f"radii={model.radii.round(3)}, counts={model.freqs.tolist()}")

# %%
# Two Gaussian blobs in the unit square.  Smaller dthr, more clusters.

rng = np.random.default_rng(0)
y = rng.integers(0, 2, 400)
X = np.clip(rng.normal(0.3 + 0.4 * y[:, None], 0.08, size=(400, 2)), 0, 1)

for dthr in (0.02, 0.05, 0.1, 0.2):
    m = ecm_fit(X, y, dthr)
    print(f"dthr={dthr:<5} clusters={len(m):>3}  max radius={m.radii.max():.3f}")

# %%
# Each cluster remembers how many points of each class it swallowed; the
# majority decides its label later on.

m = ecm_fit(X, y, 0.1)
print(m.freqs[:8])

# %%
# Plot the clusters as circles over the data.

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(5, 5))
ax.scatter(X[:, 0], X[:, 1], c=y, s=6, cmap="coolwarm", alpha=0.5)
for center, radius in zip(m.centers, m.radii):
    # radii are in sqrt(d)-normalized units
    ax.add_patch(plt.Circle(center, radius * np.sqrt(2), fill=False))
ax.set_aspect("equal")
fig.savefig("ecm_clusters.svg")
print("wrote ecm_clusters.svg")
