"""
Every exception the simulator raises.

ConfigErrors are raised before a session starts and name the protocol assumption they violate.
ProtocolErrors abort a running session and get recorded in its transcript.
"""


class EncryptoError(Exception):
  """Base class for all simulator errors."""


class ConfigError(EncryptoError, ValueError):
  """A session or analysis was configured in a way the protocol does not admit."""

  assumption = None

  def __init__(self, message, assumption=None):
    if assumption is not None:
      self.assumption = assumption
    if self.assumption is not None:
      message = "assumption %d: %s" % (self.assumption, message)
    super(ConfigError, self).__init__(message)


class NoThirdParty(ConfigError):
  """There must be at least one TTP to compute the result."""
  assumption = 1


class IndistinctFunctions(ConfigError):
  """The pool is too small for every party to draw a different function."""
  assumption = 6


class TooFewParties(ConfigError):
  """At least three parties take part in a computation."""
  assumption = 7


class UnequalPacketCounts(ConfigError):
  """Every party makes the same number of packets."""
  assumption = 8


class UnequalPacketSizes(ConfigError):
  """Every party uses the same packet size."""
  assumption = 9


class ProtocolError(EncryptoError):
  """A running session had to abort."""


class PoolExhausted(ProtocolError):
  """Every function in the pool has already been drawn."""


class WrongFunction(ProtocolError):
  """The recovered payload does not match the packet checksum."""


class NoCandidate(ProtocolError):
  """No pool function decrypts the packet; it was corrupted or tampered with."""


class AmbiguousDecrypt(ProtocolError):
  """More than one pool function matches the packet checksum."""


class BlockOverflow(ProtocolError):
  """A data block does not fit in its packets."""


class IncompleteBlock(ProtocolError):
  """A block's packets are missing or duplicate an index."""


class CorruptBlock(ProtocolError):
  """A reassembled block has an impossible length prefix."""


class IncompleteCollection(ProtocolError):
  """The TTP did not receive exactly n * X packets."""


class TagCollision(ProtocolError):
  """Two blocks share a block tag."""


class ShapeError(ProtocolError):
  """Blocks have different numbers of values."""


class AggregateOverflow(ProtocolError, OverflowError):
  """The aggregate does not fit in 64 bits."""


class ChannelViolation(ProtocolError):
  """A message was lost, duplicated or read by someone other than its receiver."""


class KnowledgeLeak(ProtocolError):
  """An adversary was handed a function it never drew."""


class IoError(EncryptoError, OSError):
  """An artifact could not be written."""
