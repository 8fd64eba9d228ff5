"""The built-in inequality suites, with the empirical constants they find.

Run with ``python3 demos/inequality_checks.py``. The same reports are
available as JSON from ``sharpadams verify``.
"""
import numpy as np

from sharpadams.verify import run_suite

for rep in run_suite("all", seed=7):
    line = f"{rep.name:22s} cases={rep.cases:6d}  pass={rep.passed!s:5s}  min slack={rep.min_slack: .3e}"
    if rep.empirical_constant is not None:
        line += f"  constant={rep.empirical_constant:.3e}"
        consts = np.array(rep.details["constants"])
        line += f"  spread over R={np.max(consts.max(1) / consts.min(1)):.2f}x"
    print(line)
