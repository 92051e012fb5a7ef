# coding: utf-8

# # Energy cost of a nonzero magnetization
#
# T(eps) is the set of spin vectors with |m|/N in [eps, 2 eps]. For each
# sample we take the best energy inside T(eps), subtract the global best, and
# divide by N. The gap is never positive. We check that it grows roughly like
# eps^2 and that the field response M(h) is flat at h = 0.
#
# At N = 20 the bands T(0.1) and T(0.2) share no level. At N = 16 they
# overlap, and the first ordering check has little power.

# In[1]:

from pspinlab import SK, EstimatorConfig
from pspinlab.experiments import field_curve, slice_decay

config = EstimatorConfig(n_samples=300, master_seed=3)
sd = slice_decay(SK, 20, (0.1, 0.2, 0.3, 0.4), config)
for eps, s in zip(sd.eps_grid, sd.gaps):
    print(f"eps = {eps:.1f}   gap = {s.mean:+.5f} +- {s.stderr:.5f}   gap/eps^2 = {s.mean / eps**2:+.3f}")
print("largest single-sample gap:", sd.max_gap)
print(f"fit gap = -c eps^2:  c = {sd.c_hat:.3f} +- {sd.c_se:.3f},  R^2 = {sd.r2:.3f}")
print("means ordered at 95%:", [o["ordered"] for o in sd.ordering])


# In[2]:

fc = field_curve(SK, 16, config=config)
for h, s in zip(fc.h_grid, fc.stats):
    print(f"h = {h:+.2f}   M = {s.mean:.4f} +- {s.stderr:.4f}")
print("per-sample convexity violations:", fc.convexity_violations)
print(f"slope at 0 (h = +-{fc.slope_h}): {fc.slope.mean:.5f} +- {fc.slope.stderr:.5f}")
