#!/usr/bin/env python3
"""Stand-in for the psql binary, used to test the co-process driver framing.

Understands just enough: SELECT 1, SHOW/SET over a settings dict, an
intentional failure trigger, and the \\echo sentinel protocol including the
:ERROR variable substitution.
"""

import sys

settings = {"work_mem": "4MB", "geqo": "on", "statement_timeout": "0"}
last_error = False


def respond(line: str) -> None:
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def handle_sql(sql: str) -> None:
    global last_error
    last_error = False
    text = sql.strip().rstrip(";").strip()
    lowered = text.lower()
    if lowered == "select 1":
        respond("1")
    elif lowered.startswith("show "):
        name = text.split(None, 1)[1].lower()
        if name in settings:
            respond(settings[name])
        else:
            last_error = True
            sys.stderr.write(f'ERROR:  unrecognized configuration parameter "{name}"\n')
            sys.stderr.flush()
    elif lowered.startswith("set "):
        parts = text.split(None, 3)
        settings[parts[1].lower()] = parts[3].strip("'\"") if len(parts) > 3 else ""
    elif "provoke_timeout" in lowered:
        last_error = True
        sys.stderr.write("ERROR:  canceling statement due to statement timeout\n")
        sys.stderr.flush()
    elif "provoke_error" in lowered:
        last_error = True
        sys.stderr.write("ERROR:  boom\n")
        sys.stderr.flush()
    elif lowered.startswith("select pair"):
        respond("a|b")
        respond("c|d")


def main() -> None:
    for raw in sys.stdin:
        line = raw.rstrip("\n")
        if line.strip() == "\\q":
            return
        if line.startswith("\\echo "):
            payload = line[len("\\echo ") :]
            payload = payload.replace(":ERROR", "true" if last_error else "false")
            respond(payload)
            continue
        if line.strip():
            handle_sql(line)


if __name__ == "__main__":
    main()
