"""Property checks for Phi(t) = (log log t)^-alpha on a float grid and on a tower grid."""

import math

from tractforge.growth import loglog_alpha, parse_grid, theta_derivative_check, theta_properties

profile = loglog_alpha(1.0)
for spec in ("geometric:20:1e2:1e40", "loglog:30:2.75:1e8"):
    rep = theta_properties(profile, parse_grid(spec))
    verdicts = ", ".join(f"{k}={p.verdict}" for k, p in rep.properties.items())
    print(f"{spec}: {verdicts}")
    for flag in rep.flags:
        print("   ", flag)

for alpha in (0.5, 1.0, 2.0):
    t0 = math.exp(math.exp(alpha))
    grid = [t0 * 1.5 * 10 ** k for k in range(10)]
    d = theta_derivative_check(loglog_alpha(alpha), grid)
    print(f"alpha={alpha}: max relative error of Phi' {d.max_rel_error:.2e}")
