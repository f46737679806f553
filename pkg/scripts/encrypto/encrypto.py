#!/usr/bin/env python3
"""
ENCRYPTO. Run, verify and analyse Extended Encrypto_Random sessions.
"""

import sys

from encrypto.cli import args, main


if __name__ == "__main__":
  sys.exit(main(args.parse_args(sys.argv[1:])))
