"""Seeded verification campaigns.

A campaign evaluates one inequality on ``trials`` random inputs. Trial ``i``
draws everything from stream ``stream_offset + i`` of ``seed``, so any trial
can be replayed from the report alone (:func:`replay_trial`). Trials run in
fixed chunks, so the report does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .entropy import (
    classical_entropy,
    classical_portrait_margin,
    relative_entropy_margin,
    ssa_margin,
    subadditivity_margin,
)
from .errors import ConfigError, ParseError, PortraitError
from .linalg import eig_hermitian
from .portrait import coarse_grain_batch, portrait_array, portrait_density, portrait_pair_via_embedding, qutrit_standard_maps
from .sampler import (
    BatchRng,
    Rng,
    coarse_grain_targets,
    probability_vectors,
    random_coarse_grain_map,
    random_count,
    random_density,
    random_merge_map,
    random_probability_vector,
)
from .tomography import OptimizerConfig, min_tomographic_entropy

SCHEMA = 1

INEQUALITIES = (
    "eq2a-shannon",
    "eq2a-renyi",
    "eq2a-tsallis",
    "eq6-subadditivity",
    "eq9-information",
    "eq10-relative",
    "ssa",
    "eq14-minimization",
    "portrait-positivity",
    "oracle-embedding",
)

_QUTRIT_ONLY = {"eq6-subadditivity", "eq9-information", "eq10-relative", "oracle-embedding"}
_NEEDS_ORDER = {"eq2a-renyi", "eq2a-tsallis"}
_DEFAULT_DIM = {"ssa": 8}
_CHUNK = {"eq14-minimization": 10}
_DEFAULT_CHUNK = 1000
_MAX_ERRORS_REPORTED = 20


@dataclass(frozen=True)
class CampaignConfig:
    inequality: str
    trials: int = 1000
    dim: int | None = None
    rank: int | None = None
    order: float | None = None
    seed: int = 0
    stream_offset: int = 0
    tolerance: float = 1e-10
    restarts: int = 20
    max_iters: int = 2000
    opt_tol: float = 1e-6
    # runtime options, not part of the experiment
    out: str | None = field(default=None, compare=False)
    format: str = field(default="json", compare=False)
    workers: int = field(default=1, compare=False)
    dump_margins: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.inequality not in INEQUALITIES:
            raise ConfigError(f"unknown inequality {self.inequality!r}; choose from {', '.join(INEQUALITIES)}")
        if self.dim is None:
            object.__setattr__(self, "dim", _DEFAULT_DIM.get(self.inequality, 3))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be > 0")
        if (self.order is not None) != (self.inequality in _NEEDS_ORDER):
            raise ConfigError(f"an order parameter is required for {sorted(_NEEDS_ORDER)} and only for them")
        if self.order is not None and (not self.order > 0 or abs(self.order - 1) <= 1e-9):
            raise ConfigError(f"order must be positive and different from 1, got {self.order}")
        if self.inequality in _QUTRIT_ONLY and self.dim != 3:
            raise ConfigError(f"{self.inequality} is defined for qutrits (dim 3)")
        if self.inequality == "ssa" and not 1 <= self.dim <= 8:
            raise ConfigError("ssa needs 1 <= dim <= 8")
        if self.inequality == "portrait-positivity" and self.dim < 2:
            raise ConfigError("portrait-positivity needs dim >= 2")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.rank is not None and not 1 <= self.rank <= self.dim:
            raise ConfigError(f"rank must lie in 1..{self.dim}")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.seed < 2**64 or not 0 <= self.stream_offset < 2**64:
            raise ConfigError("seed and stream offset must be unsigned 64-bit integers")

    def echo(self) -> dict:
        """The experiment-defining fields (runtime options excluded)."""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.compare}

    @classmethod
    def from_json(cls, obj: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, max_iters=self.max_iters, tol=self.opt_tol, seed=self.seed)


@dataclass
class CampaignReport:
    config: dict
    trials_run: int
    violations: int
    errored: int
    infinite_margins: int
    min_margin: float | None
    mean_margin: float | None
    max_margin: float | None
    worst_case: dict | None
    errors: list = field(default_factory=list)
    wall_time_s: float = 0.0
    schema: int = SCHEMA

    def to_json(self) -> dict:
        d = asdict(self)
        return {"schema": d.pop("schema"), **d}

    @classmethod
    def from_json(cls, obj: dict) -> "CampaignReport":
        if obj.get("schema") != SCHEMA:
            raise ParseError(f"unsupported report schema {obj.get('schema')!r}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ParseError(f"bad report: {exc}") from exc


# ---------------------------------------------------------------------------
# trials


def _kind(cfg: CampaignConfig) -> str:
    return cfg.inequality.split("-")[1]


def _draw_state(cfg: CampaignConfig, rng: Rng):
    rank = cfg.rank if cfg.rank is not None else random_count(cfg.dim, rng)
    return random_density(cfg.dim, rank, rng)


def trial_inputs(cfg: CampaignConfig, stream: int) -> dict:
    """Recreate the random inputs of one trial."""
    rng = Rng(cfg.seed, stream)
    if cfg.inequality.startswith("eq2a"):
        p = random_probability_vector(cfg.dim, rng)
        return {"p": p, "map": random_coarse_grain_map(cfg.dim, random_count(cfg.dim, rng), rng)}
    inputs = {"rho": _draw_state(cfg, rng)}
    if cfg.inequality == "portrait-positivity" and cfg.dim != 3:
        inputs["maps"] = (random_merge_map(cfg.dim, rng),)
    inputs["rng"] = rng
    return inputs


def _evaluate(cfg: CampaignConfig, inputs: dict) -> tuple[float, bool]:
    ineq = cfg.inequality
    if ineq.startswith("eq2a"):
        m = classical_portrait_margin(inputs["p"], inputs["map"], _kind(cfg), cfg.order)
        return m.margin, False
    rho = inputs["rho"]
    if ineq in ("eq6-subadditivity", "eq9-information"):
        margin, info = subadditivity_margin(rho)
        return (margin.margin if ineq == "eq6-subadditivity" else info), False
    if ineq == "eq10-relative":
        m = relative_entropy_margin(rho)
        return m.margin, m.infinite
    if ineq == "ssa":
        return ssa_margin(rho).margin, False
    if ineq == "eq14-minimization":
        return min_tomographic_entropy(rho, cfg.optimizer, rng=inputs["rng"]).certificate, False
    if ineq == "portrait-positivity":
        maps = inputs.get("maps") or qutrit_standard_maps()
        return min(float(eig_hermitian(portrait_array(m, rho)).eigenvalues[0]) for m in maps), False
    if ineq == "oracle-embedding":
        via_embedding = portrait_pair_via_embedding(rho)
        direct = [portrait_density(m, rho) for m in qutrit_standard_maps()]
        return -max(float(np.abs(a.matrix - b.matrix).max()) for a, b in zip(via_embedding, direct)), False
    raise ConfigError(f"unknown inequality {ineq!r}")


def replay_trial(cfg: CampaignConfig, stream: int) -> tuple[float, bool]:
    """Margin of a single trial, recomputed one trial at a time."""
    if cfg.inequality.startswith("eq2a"):
        # same kernel as the campaign, so the replay is exact to the last bit
        return float(_classical_chunk(cfg, np.array([stream], dtype=np.uint64))[0]), False
    return _evaluate(cfg, trial_inputs(cfg, stream))


def _classical_chunk(cfg: CampaignConfig, streams: np.ndarray) -> np.ndarray:
    d = cfg.dim
    rng = BatchRng(cfg.seed, streams)
    p = probability_vectors(rng, d)
    out_dims = 1 + np.floor(rng.uniform(1)[:, 0] * d).astype(np.int64)
    targets = coarse_grain_targets(rng, d, out_dims)
    coarse = coarse_grain_batch(targets, out_dims, p, width=d)
    kind = _kind(cfg)
    return classical_entropy(p, kind, cfg.order) - classical_entropy(coarse, kind, cfg.order)


def _run_chunk(cfg: CampaignConfig, start: int, stop: int):
    streams = np.arange(start, stop, dtype=np.uint64) + np.uint64(cfg.stream_offset)
    margins = np.full(stop - start, np.nan)
    infinite = np.zeros(stop - start, dtype=bool)
    errors = []
    if cfg.inequality.startswith("eq2a"):
        margins[:] = _classical_chunk(cfg, streams)
        return margins, infinite, errors
    for i, s in enumerate(streams):
        try:
            margins[i], infinite[i] = replay_trial(cfg, int(s))
        except (PortraitError, ArithmeticError) as exc:
            errors.append({"stream": int(s), "error": f"{type(exc).__name__}: {exc}"})
    return margins, infinite, errors


def _chunks(cfg: CampaignConfig) -> list[tuple[int, int]]:
    size = _CHUNK.get(cfg.inequality, _DEFAULT_CHUNK)
    return [(a, min(a + size, cfg.trials)) for a in range(0, cfg.trials, size)]


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    t0 = time.perf_counter()
    chunks = _chunks(cfg)
    if cfg.workers == 1 or len(chunks) == 1:
        results = [_run_chunk(cfg, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_chunk, [cfg] * len(chunks), *zip(*chunks)))
    margins = np.concatenate([r[0] for r in results])
    infinite = np.concatenate([r[1] for r in results])
    errors = [e for r in results for e in r[2]]

    errored = np.isnan(margins) & ~infinite
    finite = ~errored & ~infinite
    vals = margins[finite]
    violations = int(np.sum(vals < -cfg.tolerance))
    worst = None
    if vals.size:
        idx = int(np.flatnonzero(finite)[np.argmin(vals)])
        worst = {"seed": cfg.seed, "stream": cfg.stream_offset + idx, "margin": float(margins[idx])}
    report = CampaignReport(
        config=cfg.echo(),
        trials_run=int(margins.size),
        violations=violations,
        errored=int(errored.sum()),
        infinite_margins=int(infinite.sum()),
        min_margin=float(vals.min()) if vals.size else None,
        mean_margin=float(vals.mean()) if vals.size else None,
        max_margin=float(vals.max()) if vals.size else None,
        worst_case=worst,
        errors=errors[:_MAX_ERRORS_REPORTED],
        wall_time_s=time.perf_counter() - t0,
    )
    if cfg.dump_margins:
        _dump_margins(cfg, margins, infinite, errors, cfg.dump_margins)
    return report


def _dump_margins(cfg, margins, infinite, errors, path) -> None:
    by_stream = {e["stream"]: e["error"] for e in errors}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stream", "margin", "infinite", "error"])
        for i, (m, inf) in enumerate(zip(margins, infinite)):
            s = cfg.stream_offset + i
            w.writerow([s, "inf" if inf else repr(float(m)), int(inf), by_stream.get(s, "")])


# ---------------------------------------------------------------------------
# report files


_CSV_FIELDS = ("trials_run", "violations", "errored", "infinite_margins", "min_margin", "mean_margin", "max_margin", "wall_time_s")


def write_report(r: CampaignReport, path: str | Path, format: str = "json") -> None:
    path = Path(path)
    if format == "json":
        path.write_text(json.dumps(r.to_json(), indent=2) + "\n")
    elif format == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["aggregate", "value"])
            w.writerow(["inequality", r.config["inequality"]])
            for name in _CSV_FIELDS:
                v = getattr(r, name)
                w.writerow([name, "" if v is None else repr(v)])
            w.writerow(["worst_stream", "" if r.worst_case is None else r.worst_case["stream"]])
    else:
        raise ConfigError(f"unknown report format {format!r}")


def read_report(path: str | Path) -> CampaignReport:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return CampaignReport.from_json(obj)


def report_json_without_timing(r: CampaignReport) -> str:
    d = r.to_json()
    d.pop("wall_time_s")
    return json.dumps(d, indent=2)
