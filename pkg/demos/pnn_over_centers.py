"""
A Parzen classifier on cluster centers
======================================

The PNN puts a Gaussian bump on every stored pattern and predicts the class
with the larger average bump.  Storing ECM centers instead of raw rows
shrinks the pattern layer with little loss of accuracy.
"""

import time

from fedpnn.dataset import load_breast_cancer, normalize_apply, normalize_fit, stratified_split
from fedpnn.ecm import ecm_fit
from fedpnn.pnn import evaluate, pnn_from_clusters

ds = load_breast_cancer()
train, test = stratified_split(ds, 0.8, seed=0)
params = normalize_fit(train)
train, test = normalize_apply(params, train), normalize_apply(params, test)

# %%
# dthr = 0 keeps every distinct training row: a classic PNN.  Larger dthr
# trades patterns for speed.  "AUC" here is balanced accuracy.

for dthr in (0.0, 0.05, 0.1, 0.2, 0.3):
    model = ecm_fit(train.features, train.labels, dthr)
    pnn = pnn_from_clusters(model.clusters, sigma=0.1)
    t0 = time.perf_counter()
    auc = evaluate(pnn, test)
    print(f"dthr={dthr:<4}  patterns (neg, pos)={pnn.group_sizes}  AUC={auc:.3f}  "
          f"scoring time={1e3 * (time.perf_counter() - t0):.1f} ms")

# %%
# The bandwidth matters too.

model = ecm_fit(train.features, train.labels, 0.1)
for sigma in (0.02, 0.05, 0.1, 0.2, 0.4):
    print(f"sigma={sigma:<5} AUC={evaluate(pnn_from_clusters(model.clusters, sigma), test):.3f}")
