"""
The computation layer: a pool of m TTPs, one of which is picked at run time.

Every TTP holds the same function pool. The chosen one receives all packets, trial-decrypts each
against the pool, groups them by block tag back into whole blocks and announces the aggregate.
It learns the blocks, but nothing that ties a block to the party it came from.
"""

from __future__ import absolute_import

from collections import namedtuple
import logging

from detritus import U64_MAX, group_by
from encrypto.config import Aggregate
from encrypto.dissemination import depacketize, session_pool
from encrypto.errors import (
  AggregateOverflow,
  IncompleteBlock,
  IncompleteCollection,
  NoThirdParty,
  ProtocolError,
  ShapeError,
  TagCollision
)
from encrypto.maskpool import trial_decrypt
from encrypto.seeds import NONCE, combine_seeds, derive_seed

import numpy as np


log = logging.getLogger(__name__)


class TtpNode(namedtuple("TtpNode", ["ttp_id", "pool", "inbox", "parties", "packets_per_party"])):
  """One third party. It decides how many parties and packets per party to expect."""

  @property
  def expected(self):
    return self.parties * self.packets_per_party

  def __repr__(self):
    return "<TtpNode %d inbox=%d>" % (self.ttp_id, len(self.inbox))


class PublicResult(namedtuple("PublicResult",
                              ["aggregate_kind", "values", "n_blocks", "announced"])):
  """The announced result of a computation."""


def ttp_address(ttp_id):
  return "ttp:%d" % (ttp_id,)


def session_nonce(config):
  return derive_seed(config.master_seed, NONCE)


def make_ttp_pool(config):
  """Build the m TTPs of a session, each with its own copy of the function pool."""

  if config.m < 1:
    raise NoThirdParty("the TTP pool needs m >= 1, got m=%r" % (config.m,))

  nodes = tuple(TtpNode(ttp_id, session_pool(config), (), config.n, config.packets_per_party)
                for ttp_id in range(config.m))
  if len(set(node.pool for node in nodes)) != 1:
    raise ProtocolError("TTP pools diverged")
  return nodes


def runtime_seed(party_seeds, nonce):
  """R_r's input: only computable once every party has contributed its seed."""

  return combine_seeds(party_seeds, nonce)


def select_ttp(m, combined_seed):
  """Step 7: pick the computing TTP."""

  if m < 1:
    raise NoThirdParty("cannot select from %d TTPs" % (m,))
  return int(combined_seed) % m


def select_ttp_many(m, combined_seeds):
  """select_ttp over an array of uint64 seeds."""

  if m < 1:
    raise NoThirdParty("cannot select from %d TTPs" % (m,))
  return np.asarray(combined_seeds, dtype=np.uint64) % np.uint64(m)


def collect(ttp, packets):
  """Step 8: the chosen TTP stores every packet sent to it."""

  packets = tuple(packets)
  if len(packets) != ttp.expected:
    raise IncompleteCollection("expected %d packets, received %d" % (ttp.expected, len(packets)))
  log.debug("TTP %d collected %d packets", ttp.ttp_id, len(packets))
  return ttp._replace(inbox=packets)


def reassemble(ttp):
  """Step 9: decrypt every packet against the pool and rebuild the blocks.

  Blocks come back ordered by block tag; arrival order and parties play no part.
  """

  X = ttp.packets_per_party
  groups = group_by(ttp.inbox, lambda e: e.block_tag)

  for tag, group in groups.items():
    if len(group) > X:
      raise TagCollision("block tag %016x carries %d packets, expected %d" % (tag, len(group), X))
    if len(group) < X:
      raise IncompleteBlock("block tag %016x carries %d packets, expected %d"
                            % (tag, len(group), X))

  blocks = []
  for tag in sorted(groups):
    packets = [trial_decrypt(ttp.pool, e)[1] for e in groups[tag]]
    blocks.append(depacketize(packets))

  log.debug("TTP %d reassembled %d blocks", ttp.ttp_id, len(blocks))
  return blocks


def compute_aggregate(blocks, kind):
  """Step 10: the elementwise aggregate of the blocks."""

  kind = Aggregate.parse(kind)
  if not blocks:
    raise ShapeError("nothing to aggregate")

  widths = set(len(b.values) for b in blocks)
  if len(widths) != 1:
    raise ShapeError("blocks have differing lengths %s" % (sorted(widths),))

  columns = list(zip(*(b.values for b in blocks)))
  if kind is Aggregate.SUM or kind is Aggregate.MEAN:
    sums = [sum(col) for col in columns]
    if kind is Aggregate.SUM:
      for s in sums:
        if s > U64_MAX:
          raise AggregateOverflow("sum %d exceeds 64 bits" % (s,))
      values = sums
    else:
      values = [s // len(blocks) for s in sums]
  elif kind is Aggregate.MIN:
    values = [min(col) for col in columns]
  else:
    values = [max(col) for col in columns]

  return PublicResult(kind, tuple(values), len(blocks), True)
