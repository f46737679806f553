"""
The protocol driver.

run_protocol walks a session through all ten steps: the parties draw functions, packetize, mask
and disseminate; a TTP is picked at run time, collects everything, reassembles the blocks and
announces the aggregate. Every message between entities goes over a SecureBus, and every step
lands in the transcript.
"""

from __future__ import absolute_import

from collections import namedtuple
import csv
import logging

from encrypto.channel import SecureBus
from encrypto.config import validate_config
from encrypto.dissemination import (
  DataBlock,
  init_session,
  party_address,
  plan_round,
  shuffle_round
)
from encrypto.errors import BlockOverflow, ConfigError, IoError, PoolExhausted, ProtocolError
from encrypto.seeds import BLOCKS, rng_for
from encrypto.transcript import Recorder, payload_digest
from encrypto.ttp import (
  collect,
  compute_aggregate,
  make_ttp_pool,
  reassemble,
  runtime_seed,
  select_ttp,
  session_nonce,
  ttp_address
)


log = logging.getLogger(__name__)

# init_session covers steps 1-4; pin its failures on the step that raised them.
_INIT_STEP = {PoolExhausted: 3, BlockOverflow: 4}

HARNESS = "harness"


def _init_step(exc):
  for cls, step in _INIT_STEP.items():
    if isinstance(exc, cls):
      return step
  return 1


def run_protocol(config, blocks, before_collect=None):
  """Run one session end to end and return its Transcript.

  `before_collect`, if given, is handed the list of (sender, packet) pairs about to be sent to the
  chosen TTP and returns the list to actually send. It exists to rig failures in tests.
  """

  config = validate_config(config)
  blocks = [b if isinstance(b, DataBlock) else DataBlock(b) for b in blocks]
  recorder = Recorder(config)
  bus = SecureBus()
  parties = [party_address(i) for i in range(config.n)]

  step = 1
  try:
    try:
      state = init_session(config, blocks)
    except ProtocolError as e:
      step = _init_step(e)
      raise

    recorder.record(1, HARNESS, {"parties": config.n}, parties)

    step = 2
    ttps = make_ttp_pool(config)
    recorder.record(2, "ttp-pool", {"pool_size": ttps[0].pool.size, "ttps": config.m},
                    ttps[0].pool)

    step = 3
    recorder.record(3, "parties", {"draws": config.n},
                    [p.drawn_function for p in state.parties])

    step = 4
    recorder.record(4, "parties", {"packets": len(state.held_packets())}, state.held_packets())

    step = 5
    rounds = config.effective_rounds
    movements = []
    for _ in range(rounds):
      moves = plan_round(state)
      movements.append(payload_digest([(src, dst, e) for src, dst, e in moves]))
      state = shuffle_round(state, bus=bus)
    recorder.record(5, "parties", {"rounds": rounds, "moves": rounds * config.n * config.x},
                    movements)

    step = 6
    recorder.record(6, "parties", {"repeats": rounds}, state.holders())

    step = 7
    combined = runtime_seed([p.seed for p in state.parties], session_nonce(config))
    ttp_id = select_ttp(config.m, combined)
    bus.broadcast(HARNESS, parties, "selected-ttp", ttp_id)
    for address in parties:
      bus.receive_all(address)
    recorder.record(7, HARNESS, {"ttp": ttp_id, "m": config.m}, combined)

    step = 8
    outgoing = state.holders()
    if before_collect is not None:
      outgoing = before_collect(list(outgoing))
    for sender, e in outgoing:
      bus.send(party_address(sender), ttp_address(ttp_id), "packet", e)
    received = [e for _sender, e in bus.receive_all(ttp_address(ttp_id))]
    ttp = collect(ttps[ttp_id], received)
    recorder.record(8, ttp_address(ttp_id), {"inbox": len(ttp.inbox)}, ttp.inbox)

    step = 9
    reassembled = reassemble(ttp)
    recorder.record(9, ttp_address(ttp_id), {"blocks": len(reassembled)}, reassembled)

    step = 10
    result = compute_aggregate(reassembled, config.aggregate)
    bus.broadcast(ttp_address(ttp_id), parties, "result", result)
    for address in parties:
      bus.receive_all(address)
    bus.audit()
    recorder.record(10, ttp_address(ttp_id),
                    {"aggregate": result.aggregate_kind.value, "values": list(result.values),
                     "n_blocks": result.n_blocks},
                    result)

  except ProtocolError as e:
    return recorder.fail(step, e)

  log.info("Session %d: TTP %d announced %s over %d blocks",
           config.master_seed, ttp_id, result.aggregate_kind.value, result.n_blocks)
  return recorder.finish(result)


def plaintext_aggregate(config, blocks):
  """What the protocol should announce: the aggregate of the inputs, computed in the clear."""

  blocks = [b if isinstance(b, DataBlock) else DataBlock(b) for b in blocks]
  return compute_aggregate(blocks, validate_config(config).aggregate)


def check_against_oracle(config, blocks, before_collect=None):
  """Run the protocol and compare with the plaintext aggregate. Returns (ok, transcript).

  Aborts on either side come back as (False, transcript), never as exceptions. When the plaintext
  aggregate itself fails, the transcript's `mismatch` names the oracle's error.
  """

  try:
    expected, oracle_error = plaintext_aggregate(config, blocks), None
  except ProtocolError as e:
    expected, oracle_error = None, "%s: %s" % (type(e).__name__, e)

  transcript = run_protocol(config, blocks, before_collect=before_collect)
  if oracle_error is not None:
    announced = list(transcript.result.values) if transcript.ok else None
    log.error("Oracle failed with %s, protocol announced %r", oracle_error, announced)
    return False, transcript._replace(mismatch={"expected": None, "oracle_error": oracle_error,
                                                "announced": announced})
  if not transcript.ok:
    return False, transcript

  if transcript.result.values != expected.values:
    log.error("Oracle mismatch: expected %r, announced %r",
              expected.values, transcript.result.values)
    return False, transcript._replace(mismatch={"expected": list(expected.values),
                                                "announced": list(transcript.result.values)})
  return True, transcript


def verify_against_oracle(config, blocks, before_collect=None):
  """True iff the announced result equals the plaintext aggregate."""

  return check_against_oracle(config, blocks, before_collect=before_collect)[0]


def random_blocks(config, seed, width=None):
  """n reproducible random blocks, values below 2^32.

  `width` defaults to as many values as fit in one party's packets.
  """

  capacity = (config.packets_per_party * config.packet_size - 8) // 8
  width = capacity if width is None else width
  if width > capacity:
    raise ConfigError("%d values do not fit in %d bytes" % (width, capacity * 8 + 8))

  values = rng_for(seed, BLOCKS).integers(0, 1 << 32, size=(config.n, width))
  return [DataBlock(int(v) for v in row) for row in values]


CURVE_HEADER = ["n", "m", "x", "r", "analytic", "empirical", "ci_low", "ci_high"]


class CurvePoint(namedtuple("CurvePoint", ["n", "m", "x", "r", "analytic", "empirical",
                                           "ci_low", "ci_high"])):
  """One row of the leak curve. The empirical columns are None without Monte Carlo."""

  @classmethod
  def of(cls, n, m, x, r, analytic, estimate=None):
    if estimate is None:
      return cls(n, m, x, r, float(analytic), None, None, None)
    return cls(n, m, x, r, float(analytic), estimate.empirical,
               max(0.0, estimate.empirical - estimate.ci_halfwidth),
               min(1.0, estimate.empirical + estimate.ci_halfwidth))


def _fmt(value):
  return "" if value is None else "%.10g" % (value,)


def _parse(value):
  return None if value == "" else float(value)


def emit_curve(points, path):
  """Write the leak curve as CSV, probabilities to 10 significant digits."""

  points = list(points)
  if not points:
    raise ConfigError("no curve points to emit")

  try:
    with open(path, "w", newline="") as f:
      writer = csv.writer(f, lineterminator="\n")
      writer.writerow(CURVE_HEADER)
      for p in points:
        writer.writerow([p.n, p.m, p.x, p.r] + [_fmt(v) for v in p[4:]])
  except OSError as e:
    raise IoError("could not write curve to %s: %s" % (path, e))

  log.info("Wrote %d curve points to %s", len(points), path)
  return path


def read_curve(path):
  with open(path, newline="") as f:
    reader = csv.reader(f)
    header = next(reader)
    if header != CURVE_HEADER:
      raise ConfigError("%s is not a curve file" % (path,))
    return [CurvePoint(int(row[0]), int(row[1]), int(row[2]), int(row[3]),
                       *[_parse(v) for v in row[4:]])
            for row in reader]
