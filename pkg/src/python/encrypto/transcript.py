"""
Session transcripts.

A transcript keeps one event per protocol step. Events hold only public summaries (counts, the
chosen TTP, the announced result) plus a 64 bit digest of the step's full payload; the payload
itself is never stored. The transcript digest covers the config echo and every event, so replaying
a config reproduces it bit for bit.

Canonical serialization, all integers little endian:

  None       N
  bool       T | F
  int        I u64            (ints outside [0, 2^64) as J u64-length decimal-string)
  bytes      B u64-length data
  str        S u64-length utf8
  sequence   L u64-count items...
  mapping    D u64-count (key, value)... sorted by serialized key
  Enum       its value
"""

from __future__ import absolute_import

from collections import namedtuple
from enum import Enum
import json
import logging

from detritus import U64_MAX, digest64, u64le
from encrypto.errors import IoError


log = logging.getLogger(__name__)

STEPS = {
  1: "define parties",
  2: "define function pool",
  3: "draw functions",
  4: "packetize and mask",
  5: "disseminate",
  6: "repeat dissemination",
  7: "select ttp",
  8: "collect",
  9: "decrypt and reassemble",
  10: "compute and announce",
}


def canonical(obj):
  """The canonical byte serialization of a plain value."""

  if obj is None:
    return b"N"
  if isinstance(obj, bool):
    return b"T" if obj else b"F"
  if isinstance(obj, Enum):
    return canonical(obj.value)
  if isinstance(obj, int):
    if 0 <= obj <= U64_MAX:
      return b"I" + u64le(obj)
    text = str(obj).encode("ascii")
    return b"J" + u64le(len(text)) + text
  if isinstance(obj, (bytes, bytearray)):
    return b"B" + u64le(len(obj)) + bytes(obj)
  if isinstance(obj, str):
    text = obj.encode("utf-8")
    return b"S" + u64le(len(text)) + text
  if isinstance(obj, dict):
    items = sorted((canonical(k), canonical(v)) for k, v in obj.items())
    return b"D" + u64le(len(items)) + b"".join(k + v for k, v in items)
  if isinstance(obj, (list, tuple)):
    return b"L" + u64le(len(obj)) + b"".join(canonical(e) for e in obj)
  if isinstance(obj, (set, frozenset)):
    items = sorted(canonical(e) for e in obj)
    return b"L" + u64le(len(items)) + b"".join(items)
  raise TypeError("no canonical form for %r" % (type(obj),))


def payload_digest(payload):
  return digest64(canonical(payload), person=b"encrypto-event")


class Event(namedtuple("Event", ["step", "actor", "summary", "payload_digest"])):
  """One protocol step as it happened."""

  @property
  def name(self):
    return STEPS[self.step]

  def record(self):
    """The trace form: the payload only ever appears as its digest."""
    return {"step": self.step, "actor": self.actor, "payload_digest": "%016x" % self.payload_digest}


class Transcript(namedtuple("Transcript",
                            ["config", "events", "result", "error", "mismatch", "digest"])):
  """
  The record of one session. `error` is (step, error name, message) when the run aborted;
  `mismatch` is filled in by oracle checks that disagree.
  """

  @property
  def ok(self):
    return self.error is None

  @property
  def steps(self):
    return [e.step for e in self.events]


class Recorder(object):
  """Accumulates events for one session and seals them into a Transcript."""

  def __init__(self, config):
    self._config = config
    self._events = []

  def record(self, step, actor, summary, payload):
    event = Event(step, actor, summary, payload_digest(payload))
    log.debug("Step %d (%s) by %s: %r digest=%016x",
              step, STEPS[step], actor, summary, event.payload_digest)
    self._events.append(event)
    return event

  def _seal(self, result, error):
    chunks = [canonical(self._config.dict())]
    for e in self._events:
      chunks.append(canonical([e.step, e.actor, e.summary, e.payload_digest]))
    chunks.append(canonical(list(error) if error else None))
    digest = digest64(*chunks, person=b"encrypto-trans")
    return Transcript(self._config, tuple(self._events), result, error, None, digest)

  def finish(self, result):
    return self._seal(result, None)

  def fail(self, step, exc):
    log.warning("Session aborted at step %d (%s): %s", step, STEPS[step], exc)
    return self._seal(None, (step, type(exc).__name__, str(exc)))


def trace_lines(transcript):
  """One JSON record per line, the abort (if any) last."""

  for event in transcript.events:
    yield json.dumps(event.record(), sort_keys=True)
  if transcript.error:
    step, name, _message = transcript.error
    yield json.dumps({"step": step, "actor": "abort",
                      "payload_digest": "%016x" % payload_digest(name)}, sort_keys=True)


def write_trace(transcript, path):
  try:
    with open(path, "w") as f:
      for line in trace_lines(transcript):
        f.write(line + "\n")
  except OSError as e:
    raise IoError("could not write trace to %s: %s" % (path, e))
