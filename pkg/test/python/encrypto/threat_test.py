"""
Tests for the leak formulas and the adversary simulations.
"""

from fractions import Fraction
import itertools

from encrypto.config import SessionConfig
from encrypto.dissemination import init_session, run_dissemination
from encrypto.errors import ConfigError, KnowledgeLeak, ProtocolError, TooFewParties
from encrypto.harness import random_blocks
from encrypto.threat import (
  Z95,
  AdversaryModel,
  leak_curve,
  literal_leak_probability,
  monte_carlo_leak,
  p_party_malicious,
  simulate_coalition,
  simulate_malicious_ttp,
  simulate_party_ttp_collusion,
  single_party_decrypt_fraction,
  total_leak_probability
)

from pytest import mark, raises


def disseminated(n, X=4, seed=0, rounds=None):
  config = SessionConfig(n, 1, X, max(4, -(-16 // X)), rounds=rounds, master_seed=seed)
  return run_dissemination(init_session(config, random_blocks(config, seed, width=1)))


def test_p_party_malicious():
  assert p_party_malicious(4) == 0.25
  assert p_party_malicious(1) == 1
  assert float(p_party_malicious(10)) == 0.1
  with raises(ConfigError):
    p_party_malicious(0)


def test_single_party_fraction():
  assert single_party_decrypt_fraction(4, 16) == 0.25
  assert single_party_decrypt_fraction(7, 7) == 1
  assert float(single_party_decrypt_fraction(4, 40)) == 0.1
  with raises(ConfigError):
    single_party_decrypt_fraction(0, 0)


def test_total_leak_probability():
  assert total_leak_probability(4, 4, 1, 4) == 0.015625
  assert total_leak_probability(6, 1, 6, 2) == 1
  assert float(total_leak_probability(10, 4, 1, 4)) == 0.0025
  with raises(ConfigError):
    total_leak_probability(3, 4, 4, 4)


def test_formulas_agree():
  for n, m, X in itertools.product(range(1, 12), range(1, 6), range(1, 5)):
    expected = p_party_malicious(n) * single_party_decrypt_fraction(X, n * X) * Fraction(1, m)
    assert total_leak_probability(n, m, 1, X) == expected


def test_literal_reading():
  assert literal_leak_probability(4, 4, 1, 4) == total_leak_probability(4, 4, 1, 4)
  assert literal_leak_probability(4, 4, 2, 4) == 2 * total_leak_probability(4, 4, 2, 4)
  assert literal_leak_probability(4, 1, 4, 4) == 4


def test_leak_curve():
  curve = leak_curve(3, 50, 4, 4, 1)
  assert [n for n, _ in curve] == list(range(3, 51))
  assert curve[0][1] == Fraction(1, 36)
  assert curve[1][1] == 0.015625
  assert float(curve[-1][1]) == 1e-4
  assert all(a[1] > b[1] for a, b in zip(curve, curve[1:]))


def test_leak_curve_too_few():
  with raises(TooFewParties):
    leak_curve(2, 10, 4, 4, 1)


def test_empty_coalition():
  assert simulate_coalition(disseminated(4), []) == frozenset()


@mark.parametrize("n", [4, 5, 6])
def test_every_coalition(n):
  session = disseminated(n, seed=n)
  origin = dict((p.party_id, p.held[0].block_tag) for p in init_session(
    session.config, [p.block for p in session.parties]).parties)
  every = session.held_packets()
  for r in range(n + 1):
    for coalition in itertools.combinations(range(n), r):
      tags = set(origin[i] for i in coalition)
      got = simulate_coalition(session, coalition)
      assert got == frozenset(e for e in every if e.block_tag in tags)
      assert len(got) == 4 * r


def test_coalition_follows_round_seed():
  config = SessionConfig(5, 1, 4, 4, master_seed=8)
  state = init_session(config, random_blocks(config, 8, width=1))
  session = run_dissemination(state._replace(rng_round_seed=12345))
  tags = set(state.parties[i].held[0].block_tag for i in [0, 2])
  got = simulate_coalition(session, [0, 2])
  assert got == frozenset(e for e in session.held_packets() if e.block_tag in tags)


def test_coalition_replay_must_match():
  session = disseminated(5, seed=9)
  src = next(p for p in session.parties if p.held)
  dst = session.parties[(src.party_id + 1) % 5]
  moved = list(session.parties)
  moved[src.party_id] = src._replace(held=src.held[1:])
  moved[dst.party_id] = dst._replace(held=dst.held + src.held[:1])
  with raises(ProtocolError):
    simulate_coalition(session._replace(parties=tuple(moved)), [0])


def test_coalition_outside_session():
  with raises(ConfigError):
    simulate_coalition(disseminated(3), [0, 5])


def test_knowledge_hygiene():
  session = disseminated(4)
  adversary = AdversaryModel([0])
  with raises(KnowledgeLeak):
    adversary.recruit(session.parties[1])

  adversary.recruit(session.parties[0])
  adversary.check_hygiene(session)
  adversary.functions[0] = session.parties[1].drawn_function
  with raises(KnowledgeLeak):
    adversary.check_hygiene(session)


def test_malicious_ttp_without_rounds():
  report = simulate_malicious_ttp(disseminated(4, rounds=0))
  assert report.max_posterior == 1.0
  assert len(report.posteriors) == 4
  for row in report.posteriors:
    assert sorted(row) == [0.0, 0.0, 0.0, 1.0]


def test_malicious_ttp_sees_uniform():
  total = 0.0
  sessions = 10 ** 4
  for seed in range(sessions):
    report = simulate_malicious_ttp(disseminated(5, X=1, seed=seed))
    for row in report.posteriors:
      assert abs(sum(row) - 1.0) < 1e-9
    total += report.max_posterior
  assert abs(total / sessions - 0.2) <= 0.05


def test_malicious_ttp_many_parties():
  report = simulate_malicious_ttp(disseminated(10, X=2, rounds=1))
  assert len(report.block_tags) == 10
  assert abs(report.max_posterior - 0.1) < 1e-9


def test_monte_carlo_matches():
  estimate = monte_carlo_leak(4, 4, 1, 4, 10 ** 6, 2024)
  assert estimate.analytic == 0.015625
  assert estimate.trials == 10 ** 6
  assert abs(estimate.empirical - 0.015625) <= 0.0005


def test_monte_carlo_single_trial():
  first = monte_carlo_leak(4, 4, 1, 4, 1, 99)
  assert first.empirical in (0.0, 0.25)
  assert monte_carlo_leak(4, 4, 1, 4, 1, 99) == first


def test_monte_carlo_certain_leak():
  estimate = monte_carlo_leak(5, 1, 5, 2, 1000, 3)
  assert estimate.empirical == 1.0
  assert estimate.ci_halfwidth == 0.0


@mark.parametrize("n,m,r", list(itertools.product([3, 4, 6, 8, 10], [1, 4], [1, 2])))
def test_monte_carlo_grid(n, m, r):
  estimate = monte_carlo_leak(n, m, r, 4, 10 ** 6, 7)
  stderr = estimate.ci_halfwidth / Z95
  assert abs(estimate.empirical - estimate.analytic) <= 3 * stderr


def test_monte_carlo_bad_args():
  with raises(ConfigError):
    monte_carlo_leak(4, 4, 1, 4, 0, 1)
  with raises(ConfigError):
    monte_carlo_leak(4, 4, 5, 4, 10, 1)


def test_party_ttp_collusion():
  estimate = simulate_party_ttp_collusion(5, 4, 2, 10 ** 4, 11, party_seed=12345)
  assert estimate.analytic == 0.25
  assert abs(estimate.empirical - 0.25) <= 4 * estimate.ci_halfwidth / Z95


def test_party_ttp_collusion_bad_target():
  with raises(ConfigError):
    simulate_party_ttp_collusion(5, 4, 4, 10, 1)
