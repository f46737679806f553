"""
encrypto: run, verify and analyse Extended Encrypto_Random sessions.

  encrypto run --config session.yml [--seed S] [--blocks blocks.yml]
  encrypto verify --config session.yml --sessions K
  encrypto mc --n N --m M --r R --x X --trials T --seed S
  encrypto curve --n-min A --n-max B --m M --x X --r R --out curve.csv [--trials T --seed S]
  encrypto trace --config session.yml --out trace.jsonl [--seed S]

Exit codes: 0 success, 1 I/O error, 2 config error, 3 protocol abort, 4 verification mismatch.
"""

from __future__ import absolute_import, print_function

import argparse
import logging
import sys

from detritus import U64_MAX, once
from encrypto.config import load_config
from encrypto.dissemination import DataBlock
from encrypto.errors import ConfigError, IoError
from encrypto.harness import (
  CurvePoint,
  check_against_oracle,
  emit_curve,
  random_blocks,
  run_protocol
)
from encrypto.threat import leak_curve, monte_carlo_leak
from encrypto.transcript import write_trace

import colorlog
import jinja2
import progressbar
import yaml


log = logging.getLogger(__name__)

EXIT_OK = 0
# Outside the protocol outcomes: an output file could not be written.
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_MISMATCH = 4


TRANSCRIPT_RAW = """\
---
session: {{config.master_seed}}
parties: {{config.n}}
ttps: {{config.m}}
digest: {{"%016x"|format(transcript.digest)}}
{% if transcript.ok %}\
result:
  aggregate: {{transcript.result.aggregate_kind.value}}
  blocks: {{transcript.result.n_blocks}}
  values:
{% for v in transcript.result.values %}\
    - {{v}}
{% endfor %}\
{% else %}\
aborted:
  step: {{transcript.error[0]}}
  error: {{transcript.error[1]}}
  message: {{transcript.error[2]}}
{% endif %}\
steps:
{% for event in transcript.events %}\
  - {{event.step}}: {{event.name}} ({{event.actor}})
{% endfor %}\
"""

ESTIMATE_RAW = """\
---
n: {{n}}
m: {{m}}
r: {{r}}
x: {{x}}
trials: {{estimate.trials}}
analytic: {{"%.10g"|format(estimate.analytic)}}
empirical: {{"%.10g"|format(estimate.empirical)}}
ci95: [{{"%.10g"|format(estimate.empirical - estimate.ci_halfwidth)}}, \
{{"%.10g"|format(estimate.empirical + estimate.ci_halfwidth)}}]
"""

VERIFY_RAW = """\
---
sessions: {{sessions}}
passed: {{passed}}
aborted: {{aborted}}
mismatched: {{mismatched}}
"""


@once
def templates():
  return {
    "transcript": jinja2.Template(TRANSCRIPT_RAW),
    "estimate": jinja2.Template(ESTIMATE_RAW),
    "verify": jinja2.Template(VERIFY_RAW),
  }


args = argparse.ArgumentParser(
  prog="encrypto",
  epilog="exit codes: 0 success, 1 I/O error writing an output file, 2 config error, "
         "3 protocol abort, 4 verification mismatch")
args.add_argument("-v", "--verbose",
                  dest="verbose",
                  action="store_true",
                  default=False)
commands = args.add_subparsers(dest="command")
commands.required = True

run_args = commands.add_parser("run", help="run one session")
run_args.add_argument("-c", "--config", dest="config", required=True)
run_args.add_argument("--seed", dest="seed", type=int, default=None)
run_args.add_argument("--blocks", dest="blocks", default=None,
                      help="YAML list of per-party value lists")

verify_args = commands.add_parser("verify", help="check many sessions against the plaintext oracle")
verify_args.add_argument("-c", "--config", dest="config", required=True)
verify_args.add_argument("--sessions", dest="sessions", type=int, default=100)

mc_args = commands.add_parser("mc", help="Monte Carlo leak estimate")
mc_args.add_argument("--n", dest="n", type=int, required=True)
mc_args.add_argument("--m", dest="m", type=int, required=True)
mc_args.add_argument("--r", dest="r", type=int, default=1)
mc_args.add_argument("--x", dest="x", type=int, required=True)
mc_args.add_argument("--trials", dest="trials", type=int, default=10 ** 6)
mc_args.add_argument("--seed", dest="seed", type=int, default=0)

curve_args = commands.add_parser("curve", help="write the leak probability curve")
curve_args.add_argument("--n-min", dest="n_min", type=int, default=3)
curve_args.add_argument("--n-max", dest="n_max", type=int, default=50)
curve_args.add_argument("--m", dest="m", type=int, default=4)
curve_args.add_argument("--x", dest="x", type=int, default=4)
curve_args.add_argument("--r", dest="r", type=int, default=1)
curve_args.add_argument("--out", dest="out", required=True)
curve_args.add_argument("--trials", dest="trials", type=int, default=None)
curve_args.add_argument("--seed", dest="seed", type=int, default=0)

trace_args = commands.add_parser("trace", help="write a privacy-preserving session trace")
trace_args.add_argument("-c", "--config", dest="config", required=True)
trace_args.add_argument("--out", dest="out", required=True)
trace_args.add_argument("--seed", dest="seed", type=int, default=None)


def setup_logging(verbose=False):
  handler = colorlog.StreamHandler()
  handler.setFormatter(
    colorlog.ColoredFormatter("%(log_color)s %(asctime)s %(levelname)s %(process)d] %(module)s %(funcName)s: %(message)s"))

  root_logger = logging.getLogger()
  root_logger.handlers = [handler]
  root_logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def _load(opts):
  config = load_config(opts.config)
  seed = getattr(opts, "seed", None)
  if seed is not None:
    config = config._replace(master_seed=seed)
  return config


def _read_blocks(path):
  try:
    with open(path) as f:
      data = yaml.safe_load(f)
  except (OSError, yaml.YAMLError) as e:
    raise ConfigError("could not read blocks from %s: %s" % (path, e))
  if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
    raise ConfigError("%s must hold a list of value lists" % (path,))
  try:
    return [DataBlock(row) for row in data]
  except (TypeError, ValueError) as e:
    raise ConfigError("bad block in %s: %s" % (path, e))


def run(opts):
  config = _load(opts)
  blocks = _read_blocks(opts.blocks) if opts.blocks else random_blocks(config, config.master_seed)
  transcript = run_protocol(config, blocks)
  print(templates()["transcript"].render(config=config, transcript=transcript))
  return EXIT_OK if transcript.ok else EXIT_ABORT


def verify(opts):
  config = load_config(opts.config)
  bar = progressbar.ProgressBar(widgets=[
    " [", progressbar.Timer(), "] ",
    progressbar.Bar(),
    " (", progressbar.ETA(), ") ",
  ])

  passed = aborted = mismatched = 0
  for k in bar(range(opts.sessions)):
    session = config._replace(master_seed=(config.master_seed + k) & U64_MAX)
    ok, transcript = check_against_oracle(session, random_blocks(session, session.master_seed))
    if ok:
      passed += 1
    elif not transcript.ok:
      aborted += 1
      log.error("Session %d aborted at step %d: %s", session.master_seed, *transcript.error[::2])
    else:
      mismatched += 1
      log.error("Session %d mismatch: %r", session.master_seed, transcript.mismatch)

  print(templates()["verify"].render(sessions=opts.sessions, passed=passed, aborted=aborted,
                                     mismatched=mismatched))
  if aborted:
    return EXIT_ABORT
  return EXIT_MISMATCH if mismatched else EXIT_OK


def mc(opts):
  estimate = monte_carlo_leak(opts.n, opts.m, opts.r, opts.x, opts.trials, opts.seed)
  print(templates()["estimate"].render(n=opts.n, m=opts.m, r=opts.r, x=opts.x, estimate=estimate))
  return EXIT_OK


def curve(opts):
  points = []
  for n, analytic in leak_curve(opts.n_min, opts.n_max, opts.m, opts.x, opts.r):
    estimate = None
    if opts.trials:
      estimate = monte_carlo_leak(n, opts.m, opts.r, opts.x, opts.trials, opts.seed)
    points.append(CurvePoint.of(n, opts.m, opts.x, opts.r, analytic, estimate))
  emit_curve(points, opts.out)
  return EXIT_OK


def trace(opts):
  config = _load(opts)
  transcript = run_protocol(config, random_blocks(config, config.master_seed))
  write_trace(transcript, opts.out)
  return EXIT_OK if transcript.ok else EXIT_ABORT


COMMANDS = {
  "run": run,
  "verify": verify,
  "mc": mc,
  "curve": curve,
  "trace": trace,
}


def main(opts):
  setup_logging(opts.verbose)
  try:
    return COMMANDS[opts.command](opts)
  except ConfigError as e:
    log.error("%s", e)
    return EXIT_CONFIG
  except IoError as e:
    log.error("%s", e)
    return EXIT_IO


def entry():
  sys.exit(main(args.parse_args(sys.argv[1:])))


if __name__ == "__main__":
  entry()
