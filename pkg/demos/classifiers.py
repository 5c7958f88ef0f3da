"""Train each classifier family on one synthetic training set and inspect the models."""

import numpy as np

from dancehit.classifiers import KernelSpec, c45_fit, logistic_fit, nb_fit, ripper_fit, smo_fit
from dancehit.evaluation import auc_score
from dancehit.preprocess import standardize_apply, standardize_fit

rng = np.random.default_rng(3)
n = 300
X = rng.normal(size=(n, 4))
y = ((X[:, 0] > -0.2) | (X[:, 1] * X[:, 2] > 0.5)).astype(int)
train, test = np.arange(n) < 200, np.arange(n) >= 200
st = standardize_fit(X[train])
Ztr, Zte = standardize_apply(st, X[train]), standardize_apply(st, X[test])
names = ["a", "b", "c", "d"]

tree = c45_fit(Ztr, y[train], max_depth=4)
print(f"C4.5 depth {tree.depth()}:\n{tree.describe(names)}")
rules = ripper_fit(Ztr, y[train], feature_names=names)
print(f"RIPPER:\n{rules.describe()}")
models = {
    "C4.5": tree, "RIPPER": rules, "naive Bayes": nb_fit(Ztr, y[train]),
    "logistic": logistic_fit(Ztr, y[train]),
    "SVM poly d=2": smo_fit(Ztr, y[train], KernelSpec.polynomial(2), C=1.0),
    "SVM rbf": smo_fit(Ztr, y[train], KernelSpec.rbf(0.1), C=5.0),
}
for name, model in models.items():
    acc = np.mean(model.predict(Zte) == y[test])
    print(f"{name:>13}: held-out accuracy {acc:.3f}, AUC {auc_score(y[test], model.score(Zte)):.3f}")
