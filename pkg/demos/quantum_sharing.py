"""Share a qubit with an assisted scheme, reconstruct it for an authorized
coalition and measure what an unauthorized coalition learns.

Run: python3 demos/quantum_sharing.py
"""

import math

from aqss.access import DEALER, parse_access_structure
from aqss.engine import certify_leakage, quantum_reconstruct, quantum_share
from aqss.errors import UnauthorizedError
from aqss.plan import build_aqss_plan, describe

gamma = parse_access_structure("{ABC, BD, EFG}")
plan = build_aqss_plan(gamma)
print("plan:")
print(describe(plan.root))

secret = [math.cos(0.3), 1j * math.sin(0.3)]
alloc = quantum_share(plan, secret)
m = alloc.manifest()
print(f"\nfield q = {m['q']}, {m['sites']} sites, {m['terms']} stored amplitudes")
for party, sites in m["by_party"].items():
    print(f"  {party:>6}: sites {sites}")

for coalition in (["B", "D", DEALER], ["A", "B", "C", "E", "F", "G"], ["A", "C", "E"]):
    try:
        rec = quantum_reconstruct(alloc, coalition)
        print(f"\n{coalition}: reconstructed on site {rec.output_site}, fidelity {rec.fidelity:.12f}")
    except UnauthorizedError:
        rep = certify_leakage(plan, coalition)
        print(f"\n{coalition}: unauthorized; worst trace distance between "
              f"orthogonal secrets {rep.trace_distance:.2e}")
