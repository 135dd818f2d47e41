"""Closed-form ridge classification and the dual/primal equivalence.

Trains the multi-class ridge classifier on separable synthetic blobs and
checks that the wide-data (dual) and tall-data (primal) closed forms agree.
"""

import numpy as np

from sopool.classifier import predict, train_ridge

rng = np.random.default_rng(1)

# three well-separated classes in 4 dimensions
centers = rng.normal(scale=8.0, size=(3, 4))
x_train, y_train, x_test, y_test = [], [], [], []
for c, center in enumerate(centers):
    pts = center + rng.normal(scale=0.2, size=(60, 4))
    x_train.append(pts[:50]); y_train += [f"class{c}"] * 50
    x_test.append(pts[50:]); y_test += [f"class{c}"] * 10

model = train_ridge(np.vstack(x_train), y_train, lam=1.0)
preds = predict(model, np.vstack(x_test))
acc = np.mean([p == t for p, t in zip(preds, y_test)])
print(f"blob test accuracy: {acc:.0%} ({len(y_test)} probes, lambda=1)")

# dual and primal closed forms coincide
n, d, lam = 8, 5, 1.0
x = rng.normal(size=(n, d))
y = np.eye(2)[[i % 2 for i in range(n)]]
primal = np.linalg.solve(x.T @ x + lam * np.eye(d), x.T @ y)
dual = x.T @ np.linalg.solve(x @ x.T + lam * np.eye(n), y)
print(f"dual vs primal max abs difference: {np.max(np.abs(primal - dual)):.2e}")

# descriptors are ~1e5-dimensional while N is a few hundred, so the
# library picks the dual O(N^3) solve automatically
wide = rng.normal(size=(30, 5000))
labels = [f"c{i % 3}" for i in range(30)]
model = train_ridge(wide, labels, lam=1.0)
print(f"wide fit: weights {model.weights.shape}, "
      f"train accuracy {np.mean(np.array(predict(model, wide)) == labels):.0%}")
