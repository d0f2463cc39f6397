#!/usr/bin/env python3
"""Regenerate the gridworld fixtures.

The environment is a 3x6 cell grid (ids 0..17, row-major), moves E/W/N/S,
observations P at cell 8, Q at cell 15, G elsewhere (encoded 1.0/2.0/0.0),
corner cells 0/5/12/17 initial, cells 5/12 secret.

gridworld.json         open grid, every admissible move.
gridworld_c1.json      closed loop under controller 1: four trace lassos
                       (shortest path to cell 8 or 15, then cycle).
gridworld_c2.json      controller 2: the strategy from cell 17 detours via
                       cells 11/10/9 so its observations match cell 5's.

Each closed-loop trace is encoded as its own lasso (states keyed by
branch and step) because the controllers are path-dependent: merging
states by cell would add behaviors no controller run produces.
"""

import json
from pathlib import Path

COLS = 6
ROWS = 3
OBS = {8: 1.0, 15: 2.0}  # P=1.0, Q=2.0, G=0.0
INITIAL_CELLS = [0, 5, 12, 17]
SECRET_CELLS = [5, 12]
INPUTS = ["E", "W", "N", "S"]


def cell_output(cell: int) -> float:
    return OBS.get(cell, 0.0)


def open_grid() -> dict:
    states = [{"name": f"c{i}", "output": [cell_output(i)]} for i in range(ROWS * COLS)]
    transitions = []
    for cell in range(ROWS * COLS):
        row, col = divmod(cell, COLS)
        if col < COLS - 1:
            transitions.append([f"c{cell}", "E", f"c{cell + 1}"])
        if col > 0:
            transitions.append([f"c{cell}", "W", f"c{cell - 1}"])
        if row > 0:
            transitions.append([f"c{cell}", "N", f"c{cell - COLS}"])
        if row < ROWS - 1:
            transitions.append([f"c{cell}", "S", f"c{cell + COLS}"])
    return {
        "states": states,
        "inputs": INPUTS,
        "initial": [f"c{i}" for i in INITIAL_CELLS],
        "secret": [f"c{i}" for i in SECRET_CELLS],
        "transitions": transitions,
    }


# One lasso per trace: (cells, inputs between consecutive cells,
# (closing input, index of the loop entry)).
TRACE_0 = ([0, 1, 2, 8, 14, 15, 9], ["E", "E", "S", "S", "E", "N"], ("W", 3))
TRACE_12 = ([12, 13, 14, 8, 14, 15, 9], ["E", "E", "N", "S", "E", "N"], ("W", 3))
TRACE_5 = ([5, 4, 3, 2, 8, 14, 15, 9], ["W", "W", "W", "S", "S", "E", "N"], ("W", 4))
TRACE_17_C1 = ([17, 16, 15, 9, 8, 14], ["W", "W", "N", "W", "S"], ("E", 2))
TRACE_17_C2 = ([17, 11, 10, 9, 8, 14, 15, 9], ["N", "W", "W", "W", "S", "E", "N"], ("W", 4))


def closed_loop(traces) -> dict:
    states, initial, secret, transitions = [], [], [], []
    for cells, inputs, (close_input, entry) in traces:
        branch = cells[0]
        names = [f"{branch}:{i}:{cell}" for i, cell in enumerate(cells)]
        for name, cell in zip(names, cells):
            states.append({"name": name, "output": [cell_output(cell)]})
        initial.append(names[0])
        for i, cell in enumerate(cells):
            if cell in SECRET_CELLS:
                secret.append(names[i])
        for i, u in enumerate(inputs):
            transitions.append([names[i], u, names[i + 1]])
        transitions.append([names[-1], close_input, names[entry]])
    return {
        "states": states,
        "inputs": INPUTS,
        "initial": initial,
        "secret": secret,
        "transitions": transitions,
    }


def main() -> None:
    here = Path(__file__).parent
    docs = {
        "gridworld.json": open_grid(),
        "gridworld_c1.json": closed_loop([TRACE_0, TRACE_5, TRACE_12, TRACE_17_C1]),
        "gridworld_c2.json": closed_loop([TRACE_0, TRACE_5, TRACE_12, TRACE_17_C2]),
    }
    for name, doc in docs.items():
        (here / name).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
