import json
import os
import subprocess
import sys

import numpy as np

from gradfiber import _jit
from gradfiber.perf import measure

SCRIPT = """
import json, numpy as np
from gradfiber import _jit
from gradfiber.checks import small_tension
from gradfiber.runner import run_scenario
res = run_scenario(small_tension(steps=3))
print(json.dumps({"numba": _jit.ENABLED, "F": res.trace["F"].tolist(),
                  "alpha": float(res.state.alpha.max())}))
"""


def _run(flag):
    env = dict(os.environ, GRADFIBER_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_pure_numpy_fallback_matches_compiled_run():
    fast, slow = _run("1"), _run("0")
    assert fast["numba"] is True and slow["numba"] is False
    assert np.allclose(fast["F"], slow["F"], rtol=1e-8)
    assert np.isclose(fast["alpha"], slow["alpha"], rtol=1e-6)


def test_benchmark_measurement_in_process():
    res = measure(n_points=8, repeat=1)
    assert res["numba"] == _jit.ENABLED
    assert res["kernel_s"] > 0 and res["assembly_s"] > 0 and np.isfinite(res["checksum"])
