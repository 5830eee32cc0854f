#!/usr/bin/env python3
"""Stand-in external model speaking the line-oriented wire protocol.

Reads one request line of three space-separated coordinates per line of
stdin and answers with one decimal per line. Works in both oneshot mode
(one line, then EOF) and stream mode (line-for-line until stdin closes).
"""

import math
import sys


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        x1, x2, x3 = (float(c) for c in line.split())
        y = math.sin(x1) + 7.0 * math.sin(x2) ** 2 + 0.1 * x3**4 * math.sin(x1)
        print(f"{y:.17g}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
