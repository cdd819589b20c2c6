"""Tour of the adaptive-rate catalog.

Each rate maps (comparator, outcome sequence) to a penalty: the regret a
strategy is allowed against that comparator on that data. Cheap comparators
(close to the prior, close to the reference expert, small norm) earn small
penalties; expensive ones pay for their complexity.
"""

import numpy as np

from regretlab import (
    AdaptiveRate,
    CoveringProfile,
    Distribution,
    RngSpec,
    norm_adaptive_rate,
    predictable_rate,
    spectral_rate,
)

gen = RngSpec(seed=0).generator()
n, k = 64, 4
losses = gen.random((n, k))
prior = Distribution.uniform(k)

print(f"outcome sequence: {n} rounds, {k} experts, iid uniform losses\n")

print("prior-relative rates (penalty grows with distance from the prior):")
kl_rate = AdaptiveRate("kl_radius", prior=prior)
pb_rate = AdaptiveRate("pac_bayes", prior=prior)
for label, f in [
    ("prior itself ", prior.weights),
    ("mild tilt    ", np.array([0.4, 0.3, 0.2, 0.1])),
    ("point mass   ", np.array([1.0, 0.0, 0.0, 0.0])),
]:
    print(f"  {label} kl-radius {kl_rate.evaluate(f, losses):8.2f}   "
          f"pac-bayes {pb_rate.evaluate(f, losses):8.2f}")

print("\nfixed-vs-best (expert 0 is the designated reference):")
fvb = AdaptiveRate("fixed_vs_best", fstar_index=0, class_size=k)
for label, f in [("the reference", np.array([1.0, 0, 0, 0])),
                 ("another expert", np.array([0, 0, 0, 1.0]))]:
    print(f"  {label:14s} -> {fvb.evaluate(f, losses):8.2f}")

print("\ndata-only spectral rate on unit-ball vectors (ignores the comparator):")
ys = gen.standard_normal((16, 3))
ys /= np.maximum(np.linalg.norm(ys, axis=1, keepdims=True), 1.0)
print(f"  random directions   -> {spectral_rate(ys, 3):8.2f}")
print(f"  one repeated vector -> {spectral_rate(np.tile(ys[0], (16, 1)), 3):8.2f}")

print("\ncomparator-norm rate (linear games on a smooth-normed space):")
for r in (1.0, 4.0, 64.0):
    print(f"  norm {r:5.1f} -> {norm_adaptive_rate(r, smoothness=1.0, n=256):10.2f}")

print("\npredictable-sequence rate: guessing the comparator well pays off")
profile = CoveringProfile("analytic_power_law", p=1.0)
f_vals = gen.random(n)
for label, centers in [("perfect guess", f_vals), ("zero guess", np.zeros(n))]:
    value = predictable_rate(f_vals, centers, profile, n)
    print(f"  {label:14s} -> {value:8.2f}")
