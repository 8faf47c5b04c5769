#!/usr/bin/env python3
"""Scripted stand-in for a CHC solver.

Usage: stub_solver.py TABLE BENCHMARK

TABLE is a JSON object mapping a benchmark file name to an action:
  "sat" / "unsat" / "unknown" / any text  -> printed as the first output line
  {"sleep": s, "then": "sat"}             -> sleep (wall) before printing
  {"spin": s, "then": "sat"}              -> burn CPU for s seconds first
  {"crash": code}                         -> exit with that status
  {"children": n, "sleep": s}             -> spawn n sleeping grandchildren, then sleep
Missing benchmarks default to the "*" entry, else "unknown".
"""

import json
import os
import subprocess
import sys
import time


def main():
    table = json.load(open(sys.argv[1]))
    name = os.path.basename(sys.argv[2])
    action = table.get(name, table.get("*", "unknown"))
    if isinstance(action, str):
        print(action)
        return 0
    if "crash" in action:
        return int(action["crash"])
    if "children" in action:
        for _ in range(int(action["children"])):
            # the table path tags grandchildren so tests can look for survivors
            subprocess.Popen([sys.executable, "-c", "import time; time.sleep(600)",
                              "stub-child", sys.argv[1]])
    if "spin" in action:
        end = time.process_time() + float(action["spin"])
        while time.process_time() < end:
            pass
    if "sleep" in action:
        time.sleep(float(action["sleep"]))
    print(action.get("then", "unknown"))
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
