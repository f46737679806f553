"""
Session configuration.

A session is configured by a flat YAML mapping whose keys are exactly the SessionConfig fields:

.. code-block:: yaml

   --- !encrypto/session
   n: 5
   m: 4
   packets_per_party: 4
   packet_size: 16
   rounds: 5
   pool_size: 8
   aggregate: sum
   master_seed: 42

The `!encrypto/session` tag is optional; an untagged mapping is read the same way.
"""

from __future__ import absolute_import

from collections import namedtuple
from enum import Enum
import logging

from detritus import U64_MAX
from encrypto.errors import (
  ConfigError,
  IndistinctFunctions,
  NoThirdParty,
  TooFewParties,
  UnequalPacketCounts,
  UnequalPacketSizes
)

import yaml


log = logging.getLogger(__name__)

MIN_PARTIES = 3

# Below 4 bytes, two pool functions agree on a whole packet often enough to make trial decryption
# ambiguous in practice.
MIN_PACKET_SIZE = 4


class Aggregate(Enum):
  SUM = "SUM"
  MEAN = "MEAN"
  MIN = "MIN"
  MAX = "MAX"

  @classmethod
  def parse(cls, value):
    if isinstance(value, cls):
      return value
    try:
      return cls(str(value).upper())
    except ValueError:
      raise ConfigError("unknown aggregate %r, expected one of %s"
                        % (value, ", ".join(a.value for a in cls)))


FIELDS = ["n", "m", "packets_per_party", "packet_size", "rounds", "pool_size", "aggregate",
          "master_seed", "trials"]


class SessionConfig(namedtuple("SessionConfig", FIELDS)):
  """
  Everything a session needs besides the parties' data.

  `rounds` and `pool_size` may be left as None, meaning n. `trials` is only read by analysis runs.
  """

  def __new__(cls, n, m, packets_per_party, packet_size, rounds=None, pool_size=None,
              aggregate=Aggregate.SUM, master_seed=0, trials=None):
    return super(SessionConfig, cls).__new__(cls, n, m, packets_per_party, packet_size, rounds,
                                             pool_size, aggregate, master_seed, trials)

  @property
  def x(self):
    return self.packets_per_party

  @property
  def effective_rounds(self):
    return self.n if self.rounds is None else self.rounds

  @property
  def effective_pool_size(self):
    return self.n if self.pool_size is None else self.pool_size

  @property
  def capacity(self):
    """Bytes available to one party's serialized block."""
    return self.packets_per_party * self.packet_size

  def dict(self):
    d = self._asdict()
    d["aggregate"] = Aggregate.parse(self.aggregate).value
    return d


def _is_int(value):
  return isinstance(value, int) and not isinstance(value, bool)


def _collapse(value, n, name, error):
  """Packet counts and sizes may be listed per party. They must all be equal."""

  if isinstance(value, (list, tuple)):
    if n is not None and _is_int(n) and len(value) != n:
      raise error("%s lists %d entries for %d parties" % (name, len(value), n))
    if len(set(value)) != 1:
      raise error("%s differ between parties: %r" % (name, list(value)))
    return value[0]
  return value


def validate_config(raw):
  """Check a SessionConfig against the protocol assumptions.

  Returns the config (with per-party lists collapsed to scalars), or raises the ConfigError
  naming the violated assumption.
  """

  n = raw.n
  if not _is_int(n):
    raise ConfigError("n must be an integer, got %r" % (n,))
  if n < MIN_PARTIES:
    raise TooFewParties("at least %d parties are required, got n=%d" % (MIN_PARTIES, n))

  x = _collapse(raw.packets_per_party, n, "packet counts", UnequalPacketCounts)
  size = _collapse(raw.packet_size, n, "packet sizes", UnequalPacketSizes)

  if not _is_int(raw.m) or raw.m < 1:
    raise NoThirdParty("the TTP pool needs m >= 1, got m=%r" % (raw.m,))
  if not _is_int(x) or x < 1:
    raise ConfigError("packets_per_party must be >= 1, got %r" % (x,))
  if not _is_int(size) or size < MIN_PACKET_SIZE:
    raise ConfigError("packet_size must be >= %d, got %r" % (MIN_PACKET_SIZE, size))
  if raw.rounds is not None and (not _is_int(raw.rounds) or raw.rounds < 0):
    raise ConfigError("rounds must be >= 0, got %r" % (raw.rounds,))
  if raw.pool_size is not None:
    if not _is_int(raw.pool_size):
      raise ConfigError("pool_size must be an integer, got %r" % (raw.pool_size,))
    if raw.pool_size < n:
      raise IndistinctFunctions("a pool of %d functions cannot give %d parties distinct functions"
                                % (raw.pool_size, n))
  if not _is_int(raw.master_seed) or not 0 <= raw.master_seed <= U64_MAX:
    raise ConfigError("master_seed must be a 64 bit unsigned integer, got %r" % (raw.master_seed,))
  if raw.trials is not None and (not _is_int(raw.trials) or raw.trials < 1):
    raise ConfigError("trials must be >= 1, got %r" % (raw.trials,))

  # Fewer than 8 bytes cannot even hold the length prefix.
  if x * size < 8:
    raise ConfigError("%d packets of %d bytes cannot hold a block" % (x, size))

  aggregate = Aggregate.parse(raw.aggregate)
  if (x, size, aggregate) != (raw.packets_per_party, raw.packet_size, raw.aggregate):
    return raw._replace(packets_per_party=x, packet_size=size, aggregate=aggregate)
  return raw


def config_from_mapping(data):
  """Build a SessionConfig from a flat mapping. Unknown or nested keys are errors."""

  if not isinstance(data, dict):
    raise ConfigError("a session config must be a flat mapping, got %s" % type(data).__name__)

  unknown = sorted(set(data) - set(FIELDS))
  if unknown:
    raise ConfigError("unknown config keys: %s" % ", ".join(map(str, unknown)))

  for key, value in data.items():
    if isinstance(value, dict):
      raise ConfigError("config key %r must not be nested" % (key,))

  missing = [k for k in ["n", "m", "packets_per_party", "packet_size"] if k not in data]
  if missing:
    raise ConfigError("missing config keys: %s" % ", ".join(missing))

  return SessionConfig(**data)


def make_proxy_ctor(ctor, **more):
  def _from_yaml(loader, node):
    d = loader.construct_mapping(node, deep=True)
    d.update(more)
    return ctor(d)

  return _from_yaml


yaml.SafeLoader.add_constructor("!encrypto/session", make_proxy_ctor(config_from_mapping))


def load_config(path):
  """Read and validate a session config file."""

  try:
    with open(path) as f:
      data = yaml.safe_load(f)
  except OSError as e:
    raise ConfigError("could not read %s: %s" % (path, e))
  except yaml.YAMLError as e:
    raise ConfigError("could not parse %s: %s" % (path, e))

  config = data if isinstance(data, SessionConfig) else config_from_mapping(data)
  log.debug("Loaded config %s: %r", path, config)
  return validate_config(config)
