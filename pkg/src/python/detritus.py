"""
A bunch of stupid bits and bats in a vaguely functional style.
"""

from __future__ import absolute_import, print_function

from collections import OrderedDict
from functools import wraps
import hashlib
import struct


_U64 = struct.Struct("<Q")

U64_MAX = (1 << 64) - 1


def once(f):
  """Calls f once and only once. Future calls will yield the first result."""
  val = [None]

  @wraps(f)
  def inner(*args, **kwargs):
    if val[0] is None:
      val[0] = f(*args, **kwargs)
    return val[0]

  return inner


def group_by(coll, fn):
  """Group the elements of coll into lists keyed by fn, keys in order of first appearance."""

  acc = OrderedDict()
  for e in coll:
    acc.setdefault(fn(e), []).append(e)
  return acc


def chunked(total, size):
  """Yield (start, count) pairs covering range(total) in steps of at most size."""

  start = 0
  while start < total:
    count = min(size, total - start)
    yield start, count
    start += count


def u64le(value):
  """Pack an unsigned 64 bit integer, little endian."""

  return _U64.pack(value)


def digest64(*chunks, **kwargs):
  """A 64 bit BLAKE2b digest of the concatenated byte chunks, as an int.

  `person` may be given to separate digests used for different purposes.
  """

  h = hashlib.blake2b(digest_size=8, person=kwargs.get("person", b""))
  for chunk in chunks:
    h.update(chunk)
  return _U64.unpack(h.digest())[0]
