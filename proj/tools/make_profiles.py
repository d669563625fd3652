#!/usr/bin/env python3
"""Regenerates the synthetic profile stores under scenarios/.

Execution time follows t(f) = t_ref * (beta * f_ref / f + 1 - beta): beta is the
CPU-bound share of the work. Per-replica power is cores * util * (static + dyn * (f / f_ref)^exp).
"""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def curve(freqs, f_ref, t_ref, beta, cores, util, static, dyn, exp):
    points = []
    for f in freqs:
        t = t_ref * (beta * f_ref / f + 1 - beta)
        p = cores * util * (static + dyn * (f / f_ref) ** exp)
        points.append({
            "freq_mhz": f,
            "avg_exec_time_s": round(t, 9),
            "throughput_rps": round(1 / t, 9),
            "per_replica_power_w": round(p, 6),
            "cpu_utilization": util,
        })
    return points


def profile(fid, cores, mem, points):
    return {"function_id": fid, "cpu_cores": cores, "memory_mb": mem, "curve": points}


def cluster_store():
    freqs = list(range(2000, 3601, 200))
    spec = [
        # id, cores, memory, t at 3.6 GHz, beta, util
        ("cars", 1.0, 1024, 0.50, 0.90, 0.80),
        ("sha256", 1.0, 125, 0.30, 0.95, 0.98),
        ("sha256-half", 0.5, 125, 0.60, 0.95, 0.97),
        ("linpack", 1.0, 1024, 0.80, 0.92, 0.93),
        ("linpack-half", 0.5, 1024, 0.05, 0.92, 0.92),
        ("pdf", 0.5, 256, 0.0125, 0.60, 0.35),
    ]
    return [profile(fid, cores, mem, curve(freqs, 3600, t, beta, cores, util, 11.0, 8.4, 5.0))
            for fid, cores, mem, t, beta, util in spec]


def motivation_store():
    freqs = list(range(2200, 4201, 200))
    return [profile("batch-cpu", 1.0, 512, curve(freqs, 4000, 10.0, 0.9, 1.0, 1.0, 3.0, 11.0, 5.3))]


if __name__ == "__main__":
    for name, store in (("profiles.json", cluster_store()), ("motivation_profiles.json", motivation_store())):
        (OUT / name).write_text(json.dumps(store, indent=2) + "\n")
