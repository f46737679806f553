"""
Seed derivation.

Every random choice in a session descends from the session master seed along a named path, so a
whole run is a pure function of its configuration.
"""

from detritus import digest64, u64le

import numpy as np


# Path roots. Distinct roots keep the streams for different purposes independent.
POOL = 0
PARTY = 1
TAG = 2
ROUND = 3
NONCE = 4
BLOCKS = 5
MONTE_CARLO = 6
COLLUSION = 7


def derive_seed(master_seed, *path):
  """Derive a 64 bit seed from master_seed and a path of non-negative ints."""

  seq = np.random.SeedSequence([int(master_seed)] + [int(p) for p in path])
  return int(seq.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed, *path):
  """A numpy Generator keyed on (seed, *path)."""

  return np.random.default_rng([int(seed)] + [int(p) for p in path])


def combine_seeds(party_seeds, nonce):
  """Digest every party's seed plus the session nonce into the TTP selection seed.

  Changing any single input changes the output, so no one participant can compute it in advance.
  """

  return digest64(*([u64le(s) for s in party_seeds] + [u64le(nonce)]), person=b"encrypto-rr")
