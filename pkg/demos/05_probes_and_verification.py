"""Falsification probes and the full verification suite.

Run with:  python demos/05_probes_and_verification.py
"""
from polyharmonic import (Model, catalog, conjecture_probe, parse, run_suite,
                          suite_passed, weak_almansi_probe)

# Does H = r^2 lift every radial harmonic to a biharmonic function?  On flat
# space yes; on any curved profile the probe produces a concrete nonzero
# residual witness.
print(weak_almansi_probe(catalog("euclidean", 3)))
print()
print(weak_almansi_probe(Model(parse("sinh(r)"), 3)))

# Evidence for the tower conjecture r^k F on the (3,3) spherical join.
print()
print(conjecture_probe(3))

# The same suite backs the `polyharmonic verify-paper` subcommand:
# sixteen pass/fail identity checks plus the evidence-only probe.
print()
records = run_suite()
for record in records:
    print(record.line())
print("suite passed:", suite_passed(records))
