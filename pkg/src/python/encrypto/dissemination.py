"""
The party layer: breaking data blocks into packets and passing them around.

Each party serializes its block, cuts it into X packets under a fresh random block tag, masks
them with its drawn function and then, round after round, forwards every packet it holds to a
uniformly random party (itself included). After a few rounds no packet's holder says anything
about where it came from.
"""

from __future__ import absolute_import

from collections import namedtuple
import logging
import struct

from detritus import U64_MAX
from encrypto.errors import BlockOverflow, ConfigError, CorruptBlock, IncompleteBlock
from encrypto.maskpool import build_pool, draw_function, encrypt_packet, make_packet
from encrypto.seeds import PARTY, ROUND, TAG, derive_seed, rng_for

import numpy as np


log = logging.getLogger(__name__)

_PREFIX = struct.Struct("<Q")


class DataBlock(namedtuple("DataBlock", ["values"])):
  """A party's private input: a vector of 64 bit unsigned integers.

  Serialized as an 8 byte little endian byte-length prefix followed by the little endian values.
  """

  def __new__(cls, values):
    values = tuple(int(v) for v in values)
    for v in values:
      if not 0 <= v <= U64_MAX:
        raise ValueError("block value %d is not a 64 bit unsigned integer" % (v,))
    return super(DataBlock, cls).__new__(cls, values)

  def serialize(self):
    body = np.asarray(self.values, dtype="<u8").tobytes()
    return _PREFIX.pack(len(body)) + body

  def __repr__(self):
    return "<DataBlock of %d values>" % (len(self.values),)


class PartyState(namedtuple("PartyState", ["party_id", "block", "drawn_function", "held", "seed"])):
  """One party. `held` is every encrypted packet currently in its possession."""

  def __repr__(self):
    return "<Party %d holding %d>" % (self.party_id, len(self.held))


class SessionState(namedtuple("SessionState", ["config", "parties", "round", "rng_round_seed"])):
  """The party layer between dissemination rounds."""

  @property
  def n(self):
    return len(self.parties)

  def held_packets(self):
    return [e for p in self.parties for e in p.held]

  def holders(self):
    """Pairs of (holding party id, packet)."""
    return [(p.party_id, e) for p in self.parties for e in p.held]


def packetize(block, X, packet_size, block_tag):
  """Cut a block into exactly X packets of packet_size bytes, zero padding the tail."""

  if X < 1 or packet_size < 1:
    raise ConfigError("need X >= 1 and packet_size >= 1, got X=%r packet_size=%r"
                      % (X, packet_size))

  raw = block.serialize()
  capacity = X * packet_size
  if len(raw) > capacity:
    raise BlockOverflow("a %d byte block does not fit in %d packets of %d bytes"
                        % (len(raw), X, packet_size))

  raw = raw + b"\x00" * (capacity - len(raw))
  return [make_packet(block_tag, idx, raw[idx * packet_size:(idx + 1) * packet_size])
          for idx in range(X)]


def depacketize(packets):
  """Put a block back together from its packets, in any order."""

  if not packets:
    raise IncompleteBlock("no packets to reassemble")

  tags = set(p.block_tag for p in packets)
  if len(tags) != 1:
    raise IncompleteBlock("packets from %d different blocks" % (len(tags),))

  ordered = sorted(packets, key=lambda p: p.packet_index)
  indices = [p.packet_index for p in ordered]
  if indices != list(range(len(ordered))):
    raise IncompleteBlock("packet indices %r do not cover 0..%d exactly once"
                          % (indices, len(ordered) - 1))

  data = b"".join(p.payload for p in ordered)
  if len(data) < _PREFIX.size:
    raise CorruptBlock("%d bytes cannot hold a length prefix" % (len(data),))

  length = _PREFIX.unpack_from(data)[0]
  if length > len(data) - _PREFIX.size or length % 8:
    raise CorruptBlock("length prefix claims %d bytes, %d available"
                       % (length, len(data) - _PREFIX.size))

  body = data[_PREFIX.size:_PREFIX.size + length]
  return DataBlock(int(v) for v in np.frombuffer(body, dtype="<u8"))


def session_pool(config):
  """The function pool of a session. Every TTP rebuilds exactly this."""

  return build_pool(config.effective_pool_size, config.master_seed)


def init_session(config, blocks):
  """Steps 1-4: every party draws a function, packetizes and masks its block."""

  if len(blocks) != config.n:
    raise ConfigError("%d blocks for %d parties" % (len(blocks), config.n))

  # Parties see only what they draw; the pool itself stays on the TTP side.
  pool = session_pool(config)
  drawn = set()
  parties = []
  for party_id, block in enumerate(blocks):
    seed = derive_seed(config.master_seed, PARTY, party_id)
    fn = draw_function(pool, derive_seed(seed, 0), drawn)
    drawn.add(fn.id)

    tag = derive_seed(config.master_seed, TAG, party_id)
    packets = packetize(block, config.packets_per_party, config.packet_size, tag)
    held = tuple(encrypt_packet(fn, p) for p in packets)
    parties.append(PartyState(party_id, block, fn, held, seed))

  log.debug("Initialized %d parties with %d packets each", config.n, config.packets_per_party)
  return SessionState(config, tuple(parties), 0, derive_seed(config.master_seed, ROUND))


def party_address(party_id):
  return "party:%d" % (party_id,)


def plan_round(state):
  """The moves of the next round as (sender, receiver, packet) triples.

  Every held packet goes to an independent, uniformly random party, seeded by
  (rng_round_seed, round).
  """

  flat = state.holders()
  dest = rng_for(state.rng_round_seed, state.round).integers(state.n, size=len(flat))
  return [(src, int(d), e) for (src, e), d in zip(flat, dest)]


def shuffle_round(state, bus=None):
  """Step 5: forward every held packet once.

  When a SecureBus is given, the packets travel over it and each party drains its own mailbox.
  """

  moves = plan_round(state)
  held = [[] for _ in state.parties]

  if bus is None:
    for _src, dst, e in moves:
      held[dst].append(e)
  else:
    for src, dst, e in moves:
      bus.send(party_address(src), party_address(dst), "packet", e)
    for party in state.parties:
      for delivery in bus.mailbox(party_address(party.party_id)):
        with delivery as e:
          held[party.party_id].append(e)

  parties = tuple(p._replace(held=tuple(h)) for p, h in zip(state.parties, held))
  return state._replace(parties=parties, round=state.round + 1)


def run_dissemination(state, rounds=None, bus=None):
  """Step 6: repeat the shuffle `rounds` times, by default n."""

  if rounds is None:
    rounds = state.config.effective_rounds
  if rounds < 0:
    raise ConfigError("rounds must be >= 0, got %d" % (rounds,))

  for _ in range(rounds):
    state = shuffle_round(state, bus=bus)
  log.debug("Disseminated %d packets over %d rounds", len(state.held_packets()), rounds)
  return state
