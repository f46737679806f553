"""
The pool of encrypting functions.

Each function is a keyed byte stream. A party masks a packet by adding the stream to the payload
byte by byte mod 256; the TTP, holding the whole pool, unmasks by subtracting. Nothing in an
encrypted packet says which function was used: a plaintext checksum travels in the clear and the
TTP tries every function in its pool until exactly one reproduces it.
"""

from __future__ import absolute_import

from collections import namedtuple
import hashlib
import logging
import struct
import zlib

from detritus import U64_MAX, u64le
from encrypto.errors import (
  AmbiguousDecrypt,
  ConfigError,
  NoCandidate,
  PoolExhausted,
  WrongFunction
)
from encrypto.seeds import POOL, derive_seed, rng_for

import numpy as np


log = logging.getLogger(__name__)

_STREAM_BLOCK = struct.Struct("<QQQ")
_STREAM_PERSON = b"encrypto-mask"


class MaskFunction(namedtuple("MaskFunction", ["id", "seed"])):
  """One encrypting function: its position in the pool and the seed keying its stream."""

  def __repr__(self):
    # Seeds are secret to the pool holders.
    return "<MaskFunction %d>" % (self.id,)


class FunctionPool(namedtuple("FunctionPool", ["master_seed", "functions"])):
  """The pool D, reproducible from master_seed alone."""

  @property
  def size(self):
    return len(self.functions)

  def __repr__(self):
    return "<FunctionPool of %d>" % (self.size,)


class Packet(namedtuple("Packet", ["block_tag", "packet_index", "payload", "checksum"])):
  """A plaintext fragment of a data block."""


class EncryptedPacket(namedtuple("EncryptedPacket",
                                 ["block_tag", "packet_index", "checksum", "masked_payload"])):
  """A masked packet. Its header names neither the party nor the function."""

  def __repr__(self):
    return "<EncryptedPacket %016x/%d>" % (self.block_tag, self.packet_index)


def checksum(payload):
  """CRC-32 of a plaintext payload."""

  return zlib.crc32(payload) & 0xFFFFFFFF


def make_packet(block_tag, packet_index, payload):
  payload = bytes(payload)
  return Packet(block_tag, packet_index, payload, checksum(payload))


def build_pool(size, master_seed):
  """Build a pool of `size` functions whose seeds all derive from master_seed."""

  if size < 1:
    raise ConfigError("a function pool needs at least one function")

  seeds, seen = [], set()
  for idx in range(size):
    seed = derive_seed(master_seed, POOL, idx)
    attempt = 0
    # Seeds must be pairwise distinct. A 64 bit collision is vanishingly rare but handled
    # deterministically all the same.
    while seed in seen:
      attempt += 1
      seed = derive_seed(master_seed, POOL, idx, attempt)
    seen.add(seed)
    seeds.append(seed)

  return FunctionPool(master_seed, tuple(MaskFunction(idx, seed) for idx, seed in enumerate(seeds)))


def draw_function(pool, draw_seed, already_drawn):
  """Blindly draw one function the caller has not drawn before.

  The draw is uniform over the remaining ids. Only the drawn function is handed back.
  """

  remaining = [f.id for f in pool.functions if f.id not in already_drawn]
  if not remaining:
    raise PoolExhausted("all %d functions have been drawn" % (pool.size,))

  pick = int(rng_for(draw_seed).integers(len(remaining)))
  return pool.functions[remaining[pick]]


def mask_values(fn, block_tag, packet_index, length):
  """The values V_r of fn for one packet: `length` pseudorandom bytes.

  The stream is BLAKE2b keyed with the function seed in counter mode over
  (block_tag, packet_index, counter).
  """

  if length <= 0:
    return b""

  key = u64le(fn.seed)
  out = bytearray()
  counter = 0
  while len(out) < length:
    h = hashlib.blake2b(_STREAM_BLOCK.pack(block_tag & U64_MAX, packet_index, counter),
                        key=key, person=_STREAM_PERSON)
    out += h.digest()
    counter += 1
  return bytes(out[:length])


def _add(payload, mask):
  return (np.frombuffer(payload, dtype=np.uint8) + np.frombuffer(mask, dtype=np.uint8)).tobytes()


def _sub(payload, mask):
  return (np.frombuffer(payload, dtype=np.uint8) - np.frombuffer(mask, dtype=np.uint8)).tobytes()


def encrypt_packet(fn, p):
  """S = P + V: mask the payload, copy the header verbatim."""

  mask = mask_values(fn, p.block_tag, p.packet_index, len(p.payload))
  return EncryptedPacket(p.block_tag, p.packet_index, p.checksum, _add(p.payload, mask))


def _unmask(fn, e):
  mask = mask_values(fn, e.block_tag, e.packet_index, len(e.masked_payload))
  return _sub(e.masked_payload, mask)


def decrypt_packet(fn, e):
  """Unmask e with fn, raising WrongFunction if the checksum does not come back."""

  payload = _unmask(fn, e)
  if checksum(payload) != e.checksum:
    raise WrongFunction("function %d does not decrypt %r" % (fn.id, e))
  return Packet(e.block_tag, e.packet_index, payload, e.checksum)


def trial_decrypt(pool, e):
  """Try every function in the pool and return the unique (function id, Packet) that fits."""

  candidates = []
  for fn in pool.functions:
    payload = _unmask(fn, e)
    if checksum(payload) == e.checksum:
      candidates.append((fn.id, Packet(e.block_tag, e.packet_index, payload, e.checksum)))

  if not candidates:
    raise NoCandidate("no function in the pool decrypts %r" % (e,))
  if len(candidates) > 1:
    raise AmbiguousDecrypt("functions %s all decrypt %r"
                           % (", ".join(str(c[0]) for c in candidates), e))
  return candidates[0]
