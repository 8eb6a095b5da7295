"""Monte Carlo experiment drivers producing CSV/JSON results.

Every trial is reproducible in isolation: its random streams come from
:func:`trial_seeds`, a pure function of ``(seed, m, k, trial)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import BadIndex, ConfigError, InputError, OutputExists
from .objective import ProblemData
from .signals import ObservationSet, identifiability_bounds, nmse, observe, random_instance
from .solver import SolverConfig, Status, extract_signal, run
from .structured import StructuredDims

EXPERIMENTS = ("convergence", "phase_transition", "timing", "single_solve")
DEFAULT_TIMING_GRID = (64, 256, 1024, 4096)
EXIT_CODES = {
    Status.GRAD_TOLERANCE_MET: 0,
    Status.MAX_ITERATIONS: 2,
    Status.LINE_SEARCH_STALLED: 3,
}


def _grid(value, name):
    if value is None:
        return None
    vals = (value,) if isinstance(value, (int, np.integer)) else tuple(value)
    if not vals:
        raise ConfigError(f"{name} grid is empty")
    if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in vals):
        raise ConfigError(f"{name} must be an integer or a list of integers")
    if any(v < 1 for v in vals):
        raise ConfigError(f"{name} values must be positive")
    return tuple(int(v) for v in vals)


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment description; ``n``, ``m`` and ``k`` accept an int or a list.

    For timing runs ``m`` defaults to ``floor(0.8 n)``, ``k`` to 6 and
    ``min_separation`` to ``1 / n``.  ``skip_infeasible`` marks phase
    transition pairs with ``k >= 2m/3`` instead of solving them.
    """

    experiment: str
    n: tuple | None = None
    m: tuple | None = None
    k: tuple | None = None
    trials: int = 1
    min_separation: float | None = 0.0
    success_nmse: float = 1e-6
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_path: str | None = None
    freqs: tuple | None = None
    skip_infeasible: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        for name in ("n", "m", "k"):
            object.__setattr__(self, name, _grid(getattr(self, name), name))
        if self.experiment == "timing":
            if self.n is None:
                object.__setattr__(self, "n", DEFAULT_TIMING_GRID)
            if self.k is None:
                object.__setattr__(self, "k", (6,))
            if self.min_separation == 0.0:
                object.__setattr__(self, "min_separation", None)
        elif self.experiment != "single_solve":
            for name in ("n", "m", "k"):
                if getattr(self, name) is None:
                    raise ConfigError(f"{self.experiment} needs {name!r}")
            if self.experiment == "convergence" and (len(self.n), len(self.m), len(self.k)) != (1, 1, 1):
                raise ConfigError("convergence takes a single n, m and k")
            if len(self.n) != 1:
                raise ConfigError(f"{self.experiment} takes a single n")
            if max(self.m) > self.n[0]:
                raise ConfigError(f"m = {max(self.m)} exceeds n = {self.n[0]}")
        if self.experiment == "timing" and self.m is not None:
            if len(self.m) != 1 or self.m[0] > min(self.n):
                raise ConfigError("timing takes at most one m, no larger than every n")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.success_nmse <= 0:
            raise ConfigError("success_nmse must be positive")
        if self.min_separation is not None and self.min_separation < 0:
            raise ConfigError("min_separation must be nonnegative")
        if self.freqs is not None:
            object.__setattr__(self, "freqs", tuple(float(f) for f in self.freqs))
            if self.k is not None and any(kk != len(self.freqs) for kk in self.k):
                raise ConfigError("len(freqs) must match k")

    @classmethod
    def from_dict(cls, d, experiment=None):
        d = dict(d)
        if experiment is not None:
            d["experiment"] = experiment
        if "experiment" not in d:
            raise ConfigError("config needs an 'experiment' field")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            d["solver"] = SolverConfig.from_dict(d.get("solver") or {})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver: {exc}") from exc
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path, experiment=None):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(obj, experiment)


@dataclass(frozen=True)
class TrialResult:
    m: int
    k: int
    trial_index: int
    seed: int
    success: bool
    nmse: float
    iterations: int
    wall_ms: float
    status: str
    ms_per_iter: float = math.nan
    n: int = 0


def trial_seeds(seed, m, k, trial):
    """``(signal_seed, omega_seed)`` drawn from ``SeedSequence([seed, m, k, trial])``."""
    a, b = np.random.SeedSequence([seed, m, k, trial]).generate_state(2)
    return int(a), int(b)


def solve_instance(n, m, k, trial, seed, solver, success_nmse, min_separation=0.0, freqs=None):
    """Generate, observe and solve one random instance; returns (TrialResult, trace)."""
    sig_seed, om_seed = trial_seeds(seed, m, k, trial)
    sep = 1.0 / n if min_separation is None else min_separation
    sig = random_instance(n, k, sep, rng_seed=sig_seed, freqs=freqs)
    omega = ObservationSet.random(n, m, rng_seed=om_seed)
    data = ProblemData.build(omega, observe(sig, omega), k, lam=solver.lam)
    z, trace = run(data, k, solver, truth=sig.samples)
    err = nmse(extract_signal(z, n), sig.samples)
    recs = trace.records
    per_iter = (recs[-1].wall_ms - recs[0].wall_ms) / (len(recs) - 1) if len(recs) > 1 else math.nan
    result = TrialResult(m, k, trial, sig_seed, bool(err <= success_nmse), err, trace.iterations,
                         recs[-1].wall_ms, str(trace.status), per_iter, n)
    return result, trace


def _trial_job(args):
    return solve_instance(*args)[0]


def _map(jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [_trial_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_trial_job, jobs))


def run_convergence(cfg):
    """Single solve with truth; rows ``(iter, nmse, hhat, grad_norm_sq)``."""
    n, m, k = cfg.n[0], cfg.m[0], cfg.k[0]
    _, trace = solve_instance(n, m, k, 0, cfg.seed, cfg.solver, cfg.success_nmse,
                              cfg.min_separation, cfg.freqs)
    header = ("iter", "nmse", "hhat", "grad_norm_sq")
    rows = [(r.iter, r.nmse, r.hhat, r.grad_norm_sq) for r in trace.records]
    return header, rows


def run_phase_transition(cfg):
    """Success rate and mean iteration count for every ``(m, k)`` pair."""
    n = cfg.n[0]
    pairs = [(m, k) for m in cfg.m for k in cfg.k]
    skipped = {(m, k) for m, k in pairs if cfg.skip_infeasible and k >= identifiability_bounds(m)[1]}
    jobs = [
        (n, m, k, t, cfg.seed, cfg.solver, cfg.success_nmse, cfg.min_separation, cfg.freqs)
        for m, k in pairs if (m, k) not in skipped
        for t in range(cfg.trials)
    ]
    results = _map(jobs, cfg.threads)
    by_pair = {}
    for r in results:
        by_pair.setdefault((r.m, r.k), []).append(r)
    header = ("m", "k", "success_rate", "mean_iters", "skipped")
    rows = []
    for m, k in pairs:
        if (m, k) in skipped:
            rows.append((m, k, 0.0, float(cfg.solver.max_iter), 1))
            continue
        rs = by_pair[(m, k)]
        rate = sum(r.success for r in rs) / len(rs)
        rows.append((m, k, rate, float(np.mean([r.iterations for r in rs])), 0))
    return header, rows, results


def run_timing(cfg):
    """Per-iteration wall time for each ``n``, averaged over successful trials.

    When no trial at some ``n`` succeeds, all its trials are averaged and the
    ``successes`` column shows 0.
    """
    k = cfg.k[0]
    jobs = []
    for n in cfg.n:
        m = cfg.m[0] if cfg.m is not None else int(math.floor(0.8 * n))
        jobs += [(n, m, k, t, cfg.seed, cfg.solver, cfg.success_nmse, cfg.min_separation, cfg.freqs)
                 for t in range(cfg.trials)]
    # timings are taken serially so trials do not compete for cores
    results = [_trial_job(j) for j in jobs]
    header = ("n", "mean_wall_ms_per_iter", "iters", "nmse", "successes")
    rows = []
    for n in cfg.n:
        rs = [r for r in results if r.n == n]
        ok = [r for r in rs if r.success] or rs
        rows.append((
            n,
            float(np.nanmean([r.ms_per_iter for r in ok])),
            float(np.mean([r.iterations for r in ok])),
            float(np.mean([r.nmse for r in ok])),
            sum(r.success for r in rs),
        ))
    return header, rows, results


def _field(obj, name, kind, path):
    if name not in obj:
        raise InputError(f"{path}: missing field {name!r}")
    v = obj[name]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise InputError(f"{path}: field {name!r} must be an integer")
    if kind is list and not isinstance(v, list):
        raise InputError(f"{path}: field {name!r} must be a list")
    return v


def read_instance(path):
    """Parse ``{"n", "omega", "observed", "k"}``; ``omega`` holds 1-based indices."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    n = _field(obj, "n", int, path)
    k = _field(obj, "k", int, path)
    omega = _field(obj, "omega", list, path)
    observed = _field(obj, "observed", list, path)
    if n < 1 or k < 1:
        raise InputError(f"{path}: 'n' and 'k' must be positive")
    for i, v in enumerate(omega):
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputError(f"{path}: field 'omega'[{i}] must be an integer")
    if len(observed) != len(omega):
        raise InputError(f"{path}: 'observed' has {len(observed)} entries, 'omega' has {len(omega)}")
    vals = np.empty(len(observed), dtype=complex)
    for i, pair in enumerate(observed):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise InputError(f"{path}: field 'observed'[{i}] must be a [re, im] pair of numbers")
        vals[i] = complex(pair[0], pair[1])
    try:
        om = ObservationSet(np.array(omega, dtype=np.int64), n)
    except BadIndex as exc:
        raise BadIndex(f"{path}: field 'omega': {exc}") from exc
    return om, vals, k


def write_instance(path, omega, observed, k, force=False):
    obj = {
        "n": int(omega.n),
        "omega": [int(i) for i in omega.indices],
        "observed": [[float(v.real), float(v.imag)] for v in observed],
        "k": int(k),
    }
    write_text(path, json.dumps(obj), force)


def run_single(cfg, input_path):
    """Solve one observed instance; returns ``(recovered, trace)``.

    The Hankel side is sized from ``n`` alone, so asking for ``k >= p``
    components raises SparsityTooLarge instead of silently enlarging ``p``.
    """
    omega, observed, k = read_instance(input_path)
    p = StructuredDims.for_signal(omega.n).p
    data = ProblemData.build(omega, observed, k, lam=cfg.solver.lam, p=p)
    z, trace = run(data, k, cfg.solver)
    return extract_signal(z, omega.n), trace


def single_outputs(out):
    """Recovered-signal JSON path and trace CSV path for an output stem."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix == ".json" else out
    return stem.with_suffix(".json"), Path(f"{stem}.trace.csv")


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def check_writable(paths, force=False):
    for p in paths:
        if Path(p).exists() and not force:
            raise OutputExists(f"{p} already exists; pass --force to overwrite")


def write_text(path, text, force=False):
    """Write atomically through a temporary file in the target directory."""
    path = Path(path)
    check_writable([path], force)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def results_json(results):
    return json.dumps([asdict(r) for r in results], indent=1)
