"""
Running scenarios from the command line
=======================================

Each file under demos/scenarios is a JSON scenario; ``cfa run`` writes its
report into the directory given by ``--out``.  The same calls are made here through
``main`` so the exit codes are visible.
"""

import tempfile
from pathlib import Path

from constructive_fa.cli import main

here = Path(__file__).resolve().parent / "scenarios"
main(["list-kinds"])
with tempfile.TemporaryDirectory() as out:
    for scenario in sorted(here.glob("*.json")):
        code = main(["run", str(scenario), "--out", str(Path(out) / scenario.stem)])
        print(f"--> {scenario.name}: exit {code}\n")
