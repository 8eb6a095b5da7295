"""Recover a signal from 40 of 70 samples, then sweep a small phase-transition grid."""

import numpy as np

from spectral_ht import (
    ExperimentConfig,
    ObservationSet,
    ProblemData,
    SolverConfig,
    extract_signal,
    nmse,
    observe,
    random_instance,
    run,
    run_phase_transition,
)

freqs = [0.1, 0.2, 0.32, 0.5, 0.63, 0.86]
sig = random_instance(70, 6, freqs=freqs, rng_seed=0)
omega = ObservationSet.random(70, 40, rng_seed=0)
data = ProblemData.build(omega, observe(sig, omega), 6)
z, trace = run(data, 6, SolverConfig(), truth=sig.samples)
print(f"status {trace.status} after {trace.iterations} iterations")
print(f"final NMSE {nmse(extract_signal(z, 70), sig.samples):.2e}")
for rec in trace.records[:: max(1, len(trace.records) // 8)]:
    print(f"  iter {rec.iter:4d}  hhat {rec.hhat:.3e}  |grad|^2 {rec.grad_norm_sq:.3e}  nmse {rec.nmse:.2e}")

cfg = ExperimentConfig.from_dict({
    "experiment": "phase_transition", "n": 32, "m": [8, 16, 24, 32], "k": [1, 3, 5, 7], "trials": 5,
})
_, rows, _ = run_phase_transition(cfg)
rates = {(m, k): r for m, k, r, _, _ in rows}
print("\nsuccess rate (rows M, columns K)")
print("      " + "".join(f"{k:>6d}" for k in cfg.k))
for m in cfg.m:
    print(f"{m:>6d}" + "".join(f"{rates[(m, k)]:6.1f}" for k in cfg.k))
