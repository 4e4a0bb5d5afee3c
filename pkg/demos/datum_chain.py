"""Generate 25 tower-scale wiggle records, validate them, and print the first few."""

from tractforge.growth import loglog_alpha
from tractforge.tract import datum_generate, datum_validate, range_bounds_certify

profile = loglog_alpha(1.0)
datum = datum_generate(profile, "1e6", C=30.0, nu0=60.0, N=25)
report = datum_validate(datum)
chains = [range_bounds_certify(datum, j) for j in range(len(datum.terms))]

for t in datum.terms[:4]:
    print(f"j={t.j}  r={t.r}  R={t.R}  log R - log r = {t.gap()}")
print(f"{len(report.lines)} checks, {len(report.failures())} failures")
print(f"range chains: {sum(c.passed for c in chains)}/{len(chains)} hold")
for flag in datum.flags:
    print("flag:", flag)

# a large C breaks the second chain at small r0
weak = datum_generate(profile, "100", C=300.0, N=1)
print(range_bounds_certify(weak, 0).text())
