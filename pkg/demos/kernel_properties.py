"""Look at the scalar kernel f(x, b) that drives the real-valued gradient.

The per-measurement gradient is f(a'z, b) a. Near the two roots x = +-b
the kernel behaves like a contraction toward the root; this script prints
a few values and then runs the numerical property checks.
"""
import numpy as np

from safpr.objective import kernel, verify_kernel_properties

b = 1.0
for x in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 4.0):
    print(f"f({x:+.1f}, 1) = {float(kernel(x, b)):+.6f}")

# f(1 + d, 1) / d stays in [0.18, 1] for small d
d = np.linspace(-0.2, 0.2, 9)
d = d[d != 0]
print("f(1+d,1)/d:", np.round(kernel(1 + d, 1.0) / d, 4))

report = verify_kernel_properties(samples=100_000, grid=10_000)
for prop, r in report.items():
    print(f"property {prop}: {'holds' if r['passed'] else 'VIOLATED'} (worst slack {r['margin']:.2e})")
