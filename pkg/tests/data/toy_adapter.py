#!/usr/bin/env python3
"""Minimal protocol-conformant adapter used by the test suite.

Modes (first argv):
    echo        answer every query with a fixed valid hint (default)
    settings    answer with session settings instead of hints
    slow        sleep before answering, to exercise timeouts
    garbage     reply with a non-JSON line
    wrong-id    reply with a mismatched request id
    die         exit after the handshake
"""

import json
import sys
import time

MODE = sys.argv[1] if len(sys.argv) > 1 else "echo"

HINT = "/*+ Leading((a b)) HashJoin(a b) SeqScan(a) SeqScan(b) */"


def emit(doc):
    sys.stdout.write(json.dumps(doc) + "\n")
    sys.stdout.flush()


def main():
    for line in sys.stdin:
        request = json.loads(line)
        if "hello" in request:
            emit({"ready": 1, "name": f"toy-{MODE}"})
            if MODE == "die":
                return
            continue
        if MODE == "garbage":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if MODE == "slow":
            time.sleep(2.0)
        response_id = request["id"] + 100 if MODE == "wrong-id" else request["id"]
        if MODE == "settings":
            emit(
                {
                    "id": response_id,
                    "hints": "",
                    "settings": [["enable_nestloop", "off"], ["geqo", "off"]],
                    "meta": "toggles only",
                }
            )
            continue
        emit(
            {
                "id": response_id,
                "hints": HINT,
                "settings": [],
                "meta": f"echo of {request['query_id']}",
            }
        )


if __name__ == "__main__":
    main()
