import datetime
import json
import os
import platform
import subprocess

import numpy as np

try:
    import psutil
except ImportError:
    psutil = None


class RunDiagnostics:
    """
    Host and interpreter facts attached to every run summary, so timings
    from different machines can be told apart.
    """

    def get_report(self):
        return {
            "timestamp": datetime.datetime.now().isoformat(),
            "host": platform.node(),
            "system": self._get_system_info(),
            "health_metrics": self._get_health_metrics(),
            "checks": self._run_checks(),
        }

    def _get_system_info(self):
        version = "Unknown"
        try:
            version = subprocess.check_output(
                ["git", "describe", "--tags", "--always", "--dirty"],
                cwd=os.path.dirname(__file__),
                stderr=subprocess.DEVNULL,
            ).decode().strip()
        except Exception:
            pass

        return {
            "python_version": platform.python_version(),
            "platform": platform.platform(),
            "machine": platform.machine(),
            "numpy_version": np.__version__,
            "source_version": version,
            "cpu_count": os.cpu_count(),
        }

    def _run_checks(self):
        return {
            "blas": self._check_blas(),
            "memory": self._check_memory(),
        }

    def _check_blas(self):
        """Tiny solve to confirm the linear algebra backend works."""
        try:
            M = np.array([[4.0, 1.0], [1.0, 3.0]])
            x = np.linalg.solve(M, np.array([1.0, 2.0]))
            ok = np.allclose(M @ x, [1.0, 2.0])
            return {"status": "Pass" if ok else "Fail"}
        except Exception as e:
            return {"status": "Fail", "error": str(e)}

    def _check_memory(self):
        if psutil:
            try:
                mem = psutil.virtual_memory()
                status = "Pass" if mem.percent < 95 else "Critical"
                return {"status": status, "usage_percent": mem.percent}
            except Exception as e:
                return {"status": "Error", "details": str(e)}
        return {"status": "Unknown", "error": "psutil missing"}

    def _get_health_metrics(self):
        """
        CPU and memory load with null safety; values stay None without psutil.
        """
        metrics = {
            "cpu_usage_percent": None,
            "memory_usage_percent": None,
            "process_rss_mb": None,
        }

        if psutil:
            try:
                metrics["cpu_usage_percent"] = psutil.cpu_percent(interval=None)
                metrics["memory_usage_percent"] = psutil.virtual_memory().percent
                metrics["process_rss_mb"] = psutil.Process().memory_info().rss / 2 ** 20
            except Exception:
                pass

        return metrics


if __name__ == "__main__":
    # Self-test when run directly
    print(json.dumps(RunDiagnostics().get_report(), indent=4))
