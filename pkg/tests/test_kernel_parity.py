"""The compiled kernel and the pure-Python twin must agree bit for bit."""
from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from wiredrive import kernel
from wiredrive.kernel import _fallback

_speedups = pytest.importorskip(
    "wiredrive.kernel._speedups",
    reason="compiled kernel not built in this environment")


def random_batches(count: int = 200, seed: int = 7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(1, 9))
        yield (
            rng.uniform(0.1, 4.0, k),        # measured lengths
            rng.uniform(0.1, 4.0, k),        # reference lengths
            rng.uniform(-0.5, 0.5, k),       # rates
            rng.uniform(0.0, 200.0, k),      # feedforward
            rng.uniform(1.0, 250.0, k),      # per-wire maxima
            float(rng.uniform(0.0, 900.0)),  # kp
            float(rng.uniform(0.0, 300.0)),  # kd
            float(rng.uniform(0.01, 0.1)),   # pulley radius
            float(rng.uniform(0.5, 60.0)),   # torque denominator
        )


def test_backends_agree_bitwise_on_random_batches():
    for args in random_batches():
        fc, ic, sc = _speedups.pd_batch(*args)
        fp, ip, sp = _fallback.pd_batch(*args)
        assert fc.tobytes() == fp.tobytes()
        assert ic.tobytes() == ip.tobytes()
        assert np.array_equal(sc.astype(np.uint8), sp.astype(np.uint8))


def test_backends_agree_at_the_clamp_edges():
    l = np.array([1.0, 1.0, 2.0])
    l_ref = np.array([1.0, 1.2, 1.0])  # zero error / negative / huge
    l_rate = np.zeros(3)
    ff = np.array([0.0, 0.0, 0.0])
    f_max = np.array([180.0, 180.0, 180.0])
    args = (l, l_ref, l_rate, ff, f_max, 500.0, 50.0, 0.025, 10.0)
    fc, ic, sc = _speedups.pd_batch(*args)
    fp, ip, sp = _fallback.pd_batch(*args)
    assert fc.tobytes() == fp.tobytes()
    assert list(fc) == [0.0, 0.0, 180.0]
    assert list(sc) == [0, 1, 1]


def test_active_backend_is_the_compiled_one_by_default():
    # the suite runs with the extension built, so auto selection prefers it
    assert kernel.backend_name == "compiled"
    assert kernel.pd_batch is _speedups.pd_batch


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("WIREDRIVE_BACKEND", None)
    else:
        env["WIREDRIVE_BACKEND"] = env_value
    out = subprocess.run(
        [sys.executable, "-c",
         "from wiredrive import kernel; print(kernel.backend_name)"],
        capture_output=True, text=True, env=env)
    return out.returncode, out.stdout.strip(), out.stderr


def test_env_var_selects_the_python_backend():
    code, name, _ = _backend_in_subprocess("python")
    assert code == 0 and name == "python"


def test_env_var_selects_the_compiled_backend():
    code, name, _ = _backend_in_subprocess("compiled")
    assert code == 0 and name == "compiled"


def test_unrecognized_backend_name_fails_loudly():
    code, _, err = _backend_in_subprocess("turbo")
    assert code != 0
    assert "WIREDRIVE_BACKEND" in err


def test_forced_python_backend_reproduces_a_compiled_run_exactly():
    """End to end: backend choice must not change a single logged byte."""
    script = (
        "from wiredrive.cli import apply_overrides\n"
        "from wiredrive.engine import run, csv_text\n"
        "from wiredrive.model import scenario_from_dict, scenario_to_dict\n"
        "from wiredrive.scenarios import builtin_scenario\n"
        "doc = scenario_to_dict(builtin_scenario('pull_up'))\n"
        "apply_overrides(doc, [('sim.duration', 0.2)])\n"
        "import sys\n"
        "sys.stdout.write(csv_text(run(scenario_from_dict(doc)).log,"
        " full_rate=True))\n"
    )
    outputs = {}
    for backend in ("python", "compiled"):
        env = dict(os.environ, WIREDRIVE_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", script],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        outputs[backend] = proc.stdout
    assert outputs["python"] == outputs["compiled"]
