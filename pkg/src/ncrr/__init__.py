"""Non-convex regularized regression: exact 1-D proxes, coordinate descent and condition calculators."""
