"""
Tests for session configs and their validation.
"""

from encrypto.config import Aggregate, SessionConfig, load_config, validate_config
from encrypto.errors import (
  ConfigError,
  IndistinctFunctions,
  NoThirdParty,
  TooFewParties,
  UnequalPacketCounts,
  UnequalPacketSizes
)

from pytest import fixture, raises


SESSION = """\
--- !encrypto/session
n: 5
m: 4
packets_per_party: 4
packet_size: 16
rounds: 5
pool_size: 8
aggregate: mean
master_seed: 42
"""


@fixture
def write(tmp_path):
  def _write(text, name="session.yml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)

  return _write


def test_load_tagged(write):
  config = load_config(write(SESSION))
  assert config == SessionConfig(5, 4, 4, 16, rounds=5, pool_size=8, aggregate=Aggregate.MEAN,
                                 master_seed=42)


def test_load_untagged(write):
  config = load_config(write("n: 3\nm: 1\npackets_per_party: 2\npacket_size: 8\n"))
  assert config.effective_rounds == 3
  assert config.effective_pool_size == 3
  assert config.aggregate is Aggregate.SUM
  assert config.capacity == 16


def test_unknown_key(write):
  with raises(ConfigError):
    load_config(write(SESSION + "colour: blue\n"))


def test_nested_key(write):
  with raises(ConfigError):
    load_config(write("n: 3\nm: {a: 1}\npackets_per_party: 2\npacket_size: 8\n"))


def test_missing_key(write):
  with raises(ConfigError):
    load_config(write("n: 3\nm: 1\npackets_per_party: 2\n"))


def test_unreadable(tmp_path, write):
  with raises(ConfigError):
    load_config(str(tmp_path / "absent.yml"))
  with raises(ConfigError):
    load_config(write("n: [3\n"))
  with raises(ConfigError):
    load_config(write("- 1\n- 2\n"))


def test_too_few_parties():
  with raises(TooFewParties) as e:
    validate_config(SessionConfig(2, 1, 4, 8))
  assert str(e.value).startswith("assumption 7: ")


def test_indistinct_functions():
  with raises(IndistinctFunctions):
    validate_config(SessionConfig(4, 1, 4, 8, pool_size=3))


def test_no_third_party():
  with raises(NoThirdParty) as e:
    validate_config(SessionConfig(3, 0, 4, 8))
  assert e.value.assumption == 1


def test_valid_unchanged():
  config = SessionConfig(3, 2, 4, 8, aggregate=Aggregate.MAX, master_seed=9)
  assert validate_config(config) is config


def test_aggregate_names():
  assert validate_config(SessionConfig(3, 1, 4, 8, aggregate="min")).aggregate is Aggregate.MIN
  with raises(ConfigError):
    validate_config(SessionConfig(3, 1, 4, 8, aggregate="median"))


def test_per_party_lists():
  config = validate_config(SessionConfig(3, 1, [4, 4, 4], [8, 8, 8]))
  assert (config.packets_per_party, config.packet_size) == (4, 8)
  with raises(UnequalPacketCounts):
    validate_config(SessionConfig(3, 1, [4, 4, 5], 8))
  with raises(UnequalPacketSizes):
    validate_config(SessionConfig(3, 1, 4, [8, 16, 8]))
  with raises(UnequalPacketCounts):
    validate_config(SessionConfig(3, 1, [4, 4], 8))


def test_bad_numbers():
  for config in [SessionConfig(3, 1, 0, 8),
                 SessionConfig(3, 1, 4, 3),
                 SessionConfig(3, 1, 1, 4),
                 SessionConfig(3, 1, 4, 8, rounds=-1),
                 SessionConfig(3, 1, 4, 8, master_seed=-1),
                 SessionConfig(3, 1, 4, 8, master_seed=1 << 64),
                 SessionConfig(3, 1, 4, 8, trials=0),
                 SessionConfig(True, 1, 4, 8)]:
    with raises(ConfigError):
      validate_config(config)


def test_zero_rounds_allowed():
  assert validate_config(SessionConfig(3, 1, 4, 8, rounds=0)).effective_rounds == 0


def test_dict_echo():
  d = SessionConfig(3, 1, 4, 8, aggregate="max").dict()
  assert d["aggregate"] == "MAX"
  assert sorted(d) == sorted(SessionConfig._fields)
