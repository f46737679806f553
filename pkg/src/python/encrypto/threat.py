"""
Adversaries and the odds of a leak.

Three threats are simulated against real sessions:

- a coalition of parties pooling the functions they drew and every packet they ever held,
- a malicious TTP trying to tie the blocks it rebuilt to the parties that sent them,
- a party that arranged in advance to collude with one particular TTP.

The closed form for the total leak probability multiplies the chance that r parties turn
malicious, the share of packets they can decrypt and the chance that the compromised TTP is the
one picked:

    (1/m) * (r/n) * (r*X / (n*X)) = r^2 / (m * n^2)

which is 1/(m * n^2) for a single party. The coalition term also admits a literal reading with an
extra leading r inside the bracket:
(1/m) * (r/n) * (r * r*X / (n*X)) = r^3 / (m * n^2), which exceeds 1 once r^3 > m * n^2 and so
cannot be a probability. literal_leak_probability keeps that reading around for comparison; every
other function here uses the first.
"""

from __future__ import absolute_import

from collections import namedtuple
from fractions import Fraction
from functools import lru_cache
import itertools
import logging
import math

from detritus import chunked, group_by
from encrypto.config import SessionConfig
from encrypto.dissemination import init_session, run_dissemination, session_pool, shuffle_round
from encrypto.errors import (
  ConfigError,
  KnowledgeLeak,
  ProtocolError,
  TooFewParties,
  WrongFunction
)
from encrypto.harness import random_blocks
from encrypto.maskpool import decrypt_packet
from encrypto.seeds import COLLUSION, MONTE_CARLO, rng_for
from encrypto.ttp import (
  TtpNode,
  collect,
  reassemble,
  runtime_seed,
  select_ttp,
  select_ttp_many
)

import numpy as np
from scipy.stats import norm


log = logging.getLogger(__name__)

# Two sided 95% normal quantile.
Z95 = float(norm.ppf(0.975))

MC_CHUNK = 1 << 16

# Beyond this many coalitions of size r, Monte Carlo scores a random panel of them instead.
MAX_PANEL = 64

# Exact matching posteriors enumerate n! assignments.
MAX_EXACT_PARTIES = 8


class LeakEstimate(namedtuple("LeakEstimate", ["analytic", "empirical", "ci_halfwidth", "trials"])):
  """An analytic probability next to its Monte Carlo estimate and 95% half-width."""


class LinkabilityReport(namedtuple("LinkabilityReport",
                                   ["block_tags", "posteriors", "max_posterior"])):
  """
  What a malicious TTP can infer about who sent each block: one posterior over the n parties per
  rebuilt block, in block tag order.
  """


class AdversaryModel(object):
  """
  What a coalition knows: the functions its own members drew and every packet a member has held.

  It never learns any other function, and never sees the pool.
  """

  def __init__(self, coalition, ttp_compromised=None):
    self.coalition = frozenset(coalition)
    self.ttp_compromised = ttp_compromised
    self.functions = {}
    self.packets = set()

  def recruit(self, party):
    """Take on a member's drawn function."""

    if party.party_id not in self.coalition:
      raise KnowledgeLeak("party %d is not in the coalition" % (party.party_id,))
    self.functions[party.party_id] = party.drawn_function

  def observe(self, state):
    for party in state.parties:
      if party.party_id in self.coalition:
        self.packets.update(party.held)

  def check_hygiene(self, state):
    """Every known function must be the one its coalition member drew."""

    drawn = dict((p.party_id, p.drawn_function) for p in state.parties)
    for party_id, fn in self.functions.items():
      if party_id not in self.coalition or drawn.get(party_id) != fn:
        raise KnowledgeLeak("adversary holds function %d of party %d" % (fn.id, party_id))

  def decryptable(self):
    """The packets some known function actually decrypts."""

    got = set()
    for e in self.packets:
      for fn in self.functions.values():
        try:
          decrypt_packet(fn, e)
        except WrongFunction:
          continue
        got.add(e)
        break
    return frozenset(got)


def p_party_malicious(n):
  """P(x_n) = 1/n, equal for all parties."""

  if n < 1:
    raise ConfigError("need at least one party, got n=%d" % (n,))
  return Fraction(1, n)


def single_party_decrypt_fraction(X_r, total_packets):
  """The share of all packets one party can decrypt: its own."""

  if total_packets < 1:
    raise ConfigError("no packets at all")
  if not 0 < X_r <= total_packets:
    raise ConfigError("a party cannot own %d of %d packets" % (X_r, total_packets))
  return Fraction(X_r, total_packets)


def _check_leak_args(n, m, r, X):
  if n < 1 or m < 1 or X < 1:
    raise ConfigError("need n, m, X >= 1, got n=%d m=%d X=%d" % (n, m, X))
  if not 1 <= r <= n:
    raise ConfigError("a coalition of %d out of %d parties" % (r, n))


def total_leak_probability(n, m, r, X):
  """(1/m) * (r/n) * (r*X / (n*X)), that is r^2 / (m * n^2)."""

  _check_leak_args(n, m, r, X)
  return Fraction(1, m) * Fraction(r, n) * Fraction(r * X, n * X)


def literal_leak_probability(n, m, r, X):
  """The coalition formula read literally: r^3 / (m * n^2). Not bounded by 1."""

  _check_leak_args(n, m, r, X)
  return Fraction(1, m) * Fraction(r, n) * Fraction(r * r * X, n * X)


def leak_curve(n_min, n_max, m, X, r):
  """[(n, total_leak_probability)] for n in n_min..n_max."""

  if n_min < 3:
    raise TooFewParties("the curve starts at n=%d, below three parties" % (n_min,))
  if n_max < n_min:
    raise ConfigError("empty range %d..%d" % (n_min, n_max))
  return [(n, total_leak_probability(n, m, r, X)) for n in range(n_min, n_max + 1)]


def simulate_coalition(session, coalition):
  """Replay a session from the start and return every packet the coalition can decrypt.

  Holding a packet is not enough: without its function, which only its origin drew, it stays
  masked. So this comes out as exactly the coalition's own packets.
  """

  n = session.n
  coalition = frozenset(coalition)
  if not coalition <= set(range(n)):
    raise ConfigError("coalition %r is not a subset of the %d parties" % (sorted(coalition), n))

  adversary = AdversaryModel(coalition)
  replay = init_session(session.config, [p.block for p in session.parties])
  replay = replay._replace(rng_round_seed=session.rng_round_seed)
  for party in replay.parties:
    if party.party_id in coalition:
      adversary.recruit(party)

  while True:
    adversary.observe(replay)
    adversary.check_hygiene(session)
    if replay.round >= session.round:
      break
    replay = shuffle_round(replay)

  if sorted(replay.holders()) != sorted(session.holders()):
    raise ProtocolError("replay of the session diverged after %d rounds" % (replay.round,))
  return adversary.decryptable()


@lru_cache(maxsize=None)
def _assignments(n):
  return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def _matching_posterior(likelihood):
  """Marginals of the block->party assignment, given each party sent exactly one block."""

  n = likelihood.shape[0]
  perms = _assignments(n)
  weights = likelihood[np.arange(n), perms].prod(axis=1)
  marginals = np.zeros_like(likelihood)
  for b in range(n):
    np.add.at(marginals[b], perms[:, b], weights)
  return marginals / weights.sum()


def simulate_malicious_ttp(session):
  """What a compromised TTP can tell about block origins.

  The TTP sees who handed it each packet on the last hop, holds the pool and rebuilds every block.
  Its best inference runs the shuffle chain forward exactly: after R rounds a packet that started
  at party j sits at party k with probability (T^R)[j, k].
  """

  config = session.config
  n = session.n
  observed = session.holders()

  ttp = TtpNode(0, session_pool(config), (), n, config.packets_per_party)
  ttp = collect(ttp, [e for _sender, e in observed])
  blocks = reassemble(ttp)

  transition = np.full((n, n), 1.0 / n)
  reach = np.linalg.matrix_power(transition, session.round)

  senders = group_by(observed, lambda h: h[1].block_tag)
  tags = sorted(senders)
  likelihood = np.ones((len(tags), n))
  for b, tag in enumerate(tags):
    for sender, _e in senders[tag]:
      likelihood[b] *= reach[:, sender]

  if len(tags) == n and n <= MAX_EXACT_PARTIES:
    posterior = _matching_posterior(likelihood)
  else:
    posterior = likelihood / likelihood.sum(axis=1, keepdims=True)

  rows = tuple(tuple(float(p) for p in row) for row in posterior)
  log.debug("Malicious TTP view of %d blocks after %d rounds", len(blocks), session.round)
  return LinkabilityReport(tuple(tags), rows, max(max(row) for row in rows))


def _coalition_panel(n, r, rng):
  total = math.comb(n, r)
  if total <= MAX_PANEL:
    return [frozenset(c) for c in itertools.combinations(range(n), r)]
  return [frozenset(int(i) for i in rng.choice(n, size=r, replace=False))
          for _ in range(MAX_PANEL)]


def _estimate(analytic, total, total_sq, trials):
  empirical = total / trials
  variance = max(0.0, total_sq / trials - empirical * empirical)
  return LeakEstimate(float(analytic), empirical, Z95 * math.sqrt(variance / trials), trials)


def monte_carlo_leak(n, m, r, X, trials, seed, packet_size=None):
  """Estimate the total leak probability by simulation.

  Each trial flips a Bernoulli(r/n) for the coalition forming and picks a compromised TTP among m;
  runtime selection has to land on it. When both happen the trial scores the share of packets a
  random r-coalition can actually decrypt, as measured by simulate_coalition on a reference
  session. Trials run in chunks, each keyed on (seed, chunk index).
  """

  _check_leak_args(n, m, r, X)
  if trials < 1:
    raise ConfigError("need at least one trial")

  packet_size = packet_size or max(4, -(-16 // X))
  config = SessionConfig(n, m, X, packet_size, master_seed=seed)
  session = run_dissemination(init_session(config, random_blocks(config, seed, width=1)))

  panel = _coalition_panel(n, r, rng_for(seed, MONTE_CARLO))
  fractions = np.array([len(simulate_coalition(session, c)) / float(n * X) for c in panel])

  p_form = r / float(n)
  total = total_sq = 0.0
  for idx, (_start, count) in enumerate(chunked(trials, MC_CHUNK)):
    rng = rng_for(seed, MONTE_CARLO, idx)
    forms = rng.random(count) < p_form
    seeds = rng.integers(0, np.iinfo(np.uint64).max, size=count, dtype=np.uint64, endpoint=True)
    compromised = rng.integers(m, size=count)
    hit = select_ttp_many(m, seeds) == compromised
    scores = np.where(forms & hit, fractions[rng.integers(len(panel), size=count)], 0.0)
    total += float(scores.sum())
    total_sq += float(np.square(scores).sum())

  estimate = _estimate(total_leak_probability(n, m, r, X), total, total_sq, trials)
  log.info("Monte Carlo n=%d m=%d r=%d X=%d: %.6g (analytic %.6g) over %d trials",
           n, m, r, X, estimate.empirical, estimate.analytic, trials)
  return estimate


def simulate_party_ttp_collusion(n, m, target_ttp, sessions, seed, party_seed=0):
  """How often runtime selection hands the computation to a TTP a party colluded with beforehand.

  The colluding party fixes its own seed; everyone else's seed and the session nonce are fresh.
  The analytic rate is 1/m.
  """

  if n < 1 or sessions < 1:
    raise ConfigError("need n >= 1 and sessions >= 1")
  if not 0 <= target_ttp < m:
    raise ConfigError("no TTP %d among %d" % (target_ttp, m))

  rng = rng_for(seed, COLLUSION)
  hits = 0
  for _ in range(sessions):
    others = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    party_seeds = [party_seed] + [int(s) for s in others[:-1]]
    if select_ttp(m, runtime_seed(party_seeds, int(others[-1]))) == target_ttp:
      hits += 1

  return _estimate(Fraction(1, m), float(hits), float(hits), sessions)
