import os
import subprocess
import sys

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '../..'))


def run_selftest(extra_args=()):
    """Runs the pytest suites with the current interpreter; returns pytest's exit code."""
    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join(filter(None, [REPO_ROOT, env.get("PYTHONPATH")]))
    cmd = [sys.executable, "-m", "pytest", "tests", "-q", *extra_args]
    return subprocess.run(cmd, cwd=REPO_ROOT, env=env).returncode
