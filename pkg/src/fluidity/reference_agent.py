"""Reference external agent: echoes the observed signal as its prediction.

Speaks the line-delimited JSON protocol on stdin/stdout:

    python -m fluidity.reference_agent

Useful as a protocol conformance fixture and as a template for real agents.
"""

from __future__ import annotations

import json
import sys


def main() -> int:
    out = sys.stdout
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            continue
        if not isinstance(message, dict):
            continue
        kind = message.get("type")
        if kind == "hello":
            out.write(json.dumps({"type": "ready", "name": "echo"}) + "\n")
            out.flush()
        elif kind == "predict":
            signal = message.get("signal", 0.0)
            out.write(
                json.dumps({"type": "prediction", "value": signal, "tokens_used": 1}) + "\n"
            )
            out.flush()
        elif kind == "bye":
            break
    return 0


if __name__ == "__main__":
    sys.exit(main())
