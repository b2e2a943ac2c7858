"""The dealer keeps the quantum secret padded with a one-time Pauli key and
shares only the classical key among the players.

Run: python3 demos/encrypted_home_share.py
"""

import numpy as np

from aqss.access import DEALER, parse_access_structure
from aqss.engine import encrypted_reconstruct, encrypted_share, state_fidelity
from aqss.errors import UnauthorizedError
from aqss.quantum import prepare
from aqss.rng import stream

rng = stream(2024, "demo")
gamma = parse_access_structure("{AB, CD}")  # disjoint sets: no ordinary QSS exists
secret = prepare([2], [0.6, 0.8j])
enc = encrypted_share(gamma, secret, rng)
print("key bundles per player:", enc.manifest()["bundles"])
print("ciphertext amplitudes:", np.round(enc.ciphertext.amplitudes, 3))

for coalition in (["C", "D", DEALER], ["A", "C", DEALER]):
    try:
        out = encrypted_reconstruct(enc, coalition)
        print(f"{coalition}: fidelity {state_fidelity(out, secret):.12f}")
    except UnauthorizedError:
        print(f"{coalition}: cannot rebuild the key")
