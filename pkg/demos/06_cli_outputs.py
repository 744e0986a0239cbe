"""The command line tool end to end on a bundled scenario.

Same as running
    energy-cpp plan <scenario> --out <dir>
    energy-cpp validate <scenario>
and then listing what was written.

Run: python3 demos/06_cli_outputs.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from energy_cpp import io
from energy_cpp.cli import main

scenario = next(p for p in io.bundled_scenarios() if p.stem == "island")
out = Path(tempfile.mkdtemp()) / "island"

main(["plan", str(scenario), "--out", str(out)])
for f in sorted(out.iterdir()):
    print(f"  {f.name:16s} {f.stat().st_size:7d} bytes")

summary = json.loads((out / "summary.json").read_text())
print(f"\nsummary: {summary['n_paths']} paths, E_max {summary['e_max_wh']:.2f} Wh")

print()
main(["validate", str(scenario)])
