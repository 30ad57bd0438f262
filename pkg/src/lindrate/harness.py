"""Config-driven sweeps over time, convergence studies and result files."""
from __future__ import annotations

import dataclasses
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .circuits import CircuitParams, schrodinger_trace_formula, trace_formula_expectation
from .estimators import (
    _schrodinger_param_table,
    evolve,
    heisenberg_normalization,
    heisenberg_terms_from,
    reflection,
    sample_shots,
    schrodinger_terms,
)
from .lindblad import MAX_EXACT_DIM, LindbladModel, Picture
from .modular import ModularConfig
from .models import (
    CLParams,
    SpinHalfParams,
    build_grid_1d,
    caldeira_leggett_model,
    cl_setup,
    double_well_potential,
    spin_half_model,
)
from .operators import dag
from .problem import TransitionSetup

MODELS = ("spin_half", "caldeira_leggett")
EVOLVERS = ("exact", "modular", "rk4")
QUANTITIES = ("C", "Cdot", "both")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "spin_half"
    # spin-1/2
    mu: float = 0.1
    gamma: float = 1.0
    hbar: float = 1.0
    # Caldeira-Leggett
    cl_n: int = 4
    cl_mass: float = 1.0
    cl_kT: float = 0.0162
    cl_gamma: float = 0.1
    cl_hbar: float = 0.01
    region_a_lo: float = 0.125
    region_a_hi: float = 0.25
    region_b_lo: float = 0.75
    region_b_hi: float = 0.875
    # time grid
    t_start: float = 0.0
    t_end: float = 2.0
    t_count: int = 11
    # estimator
    evolver: str = "exact"
    steps: int = 25
    rk4_dt: float = 1e-3
    picture: str = "heisenberg"
    quantities: str = "both"
    shots: int | None = None
    seed: int | None = None
    out: str | None = None
    json: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError("model", f"must be one of {MODELS}, got {self.model!r}")
        if self.evolver not in EVOLVERS:
            raise ConfigError("evolver", f"must be one of {EVOLVERS}, got {self.evolver!r}")
        if self.quantities not in QUANTITIES:
            raise ConfigError("quantities", f"must be one of {QUANTITIES}, got {self.quantities!r}")
        try:
            Picture.parse(self.picture)
        except ValueError:
            raise ConfigError("picture", f"must be heisenberg or schrodinger, got {self.picture!r}") from None
        if self.t_count < 1:
            raise ConfigError("t_count", f"must be >= 1, got {self.t_count}")
        if not self.t_start <= self.t_end:
            raise ConfigError("t_start", f"must not exceed t_end ({self.t_start} > {self.t_end})")
        if self.t_start < 0:
            raise ConfigError("t_start", "must be non-negative")
        if self.steps < 1:
            raise ConfigError("steps", f"modular N must be >= 1, got {self.steps}")
        if not self.rk4_dt > 0:
            raise ConfigError("rk4_dt", "must be positive")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots", f"must be a positive integer, got {self.shots}")
        for name in ("mu", "gamma", "hbar", "cl_mass", "cl_kT", "cl_hbar"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if self.cl_gamma < 0:
            raise ConfigError("cl_gamma", "must be non-negative")
        if not 2 <= self.cl_n <= 7:
            raise ConfigError("cl_n", f"must be in [2, 7], got {self.cl_n}")

    @property
    def times(self) -> np.ndarray:
        if self.t_count == 1:
            return np.array([float(self.t_start)])
        return np.linspace(self.t_start, self.t_end, self.t_count)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


PRESETS = {
    "spin_half": {"model": "spin_half", "t_start": 0.0, "t_end": 2.0, "t_count": 11},
    # desk scale: 16 grid points, runs in seconds
    "cl_desk": {"model": "caldeira_leggett", "cl_n": 4, "evolver": "modular", "steps": 2000,
                "t_start": 0.0, "t_end": 6.0, "t_count": 13},
    # 32 grid points with 25,000 steps per time point; expect minutes per sweep
    "cl_full": {"model": "caldeira_leggett", "cl_n": 5, "evolver": "modular", "steps": 25000,
                "t_start": 0.0, "t_end": 6.0, "t_count": 13},
}


def _convert(name: str, raw):
    """Coerce a textual value to the type of config field ``name``."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in types:
        raise ConfigError(name, "unknown config key")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = str(types[name])
    if "None" in kind and text.lower() in ("", "none", "null"):
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
        if kind.startswith("bool"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r} as {kind}") from None
    return text


def parse_assignments(items: Iterable[str], source: str = "--set") -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(source, f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        out[key] = _convert(key, value)
    return out


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments are ignored."""
    lines = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                lines.append(line)
    return parse_assignments(lines, source=path)


def build_config(preset: str | None = None, file_values: dict | None = None, cli_values: dict | None = None) -> ExperimentConfig:
    """Layer defaults < preset < config file < command line."""
    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"must be one of {tuple(PRESETS)}, got {preset!r}")
        values.update(PRESETS[preset])
    for layer in (file_values or {}, cli_values or {}):
        for k, v in layer.items():
            values[k] = _convert(k, v)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None


# --------------------------------------------------------------------------
# running


@lru_cache(maxsize=8)
def build_problem(config: ExperimentConfig) -> tuple[LindbladModel, TransitionSetup]:
    if config.model == "spin_half":
        return spin_half_model(SpinHalfParams(config.mu, config.gamma, config.hbar))
    params = CLParams(config.cl_mass, config.cl_kT, config.cl_gamma, config.cl_hbar)
    grid = build_grid_1d(config.cl_n, params.hbar)
    v = double_well_potential(grid)
    model = caldeira_leggett_model(grid, params, v)
    setup = cl_setup(grid, params, v, (config.region_a_lo, config.region_a_hi), (config.region_b_lo, config.region_b_hi))
    return model, setup


@dataclass(frozen=True)
class ResultRow:
    t: float
    C_estimate: float | None
    Cdot_estimate: float | None
    C_oracle: float | None
    Cdot_oracle: float | None
    rel_err_C: float | None
    rel_err_Cdot: float | None
    success_probability: float
    standard_error: float | None = None
    standard_error_Cdot: float | None = None


COLUMNS = [f.name for f in fields(ResultRow)]


def relative_error(oracle: float | None, estimate: float | None) -> float | None:
    """``(oracle - estimate) / oracle``; ``None`` when undefined."""
    if oracle is None or estimate is None or oracle == 0:
        return None
    return (oracle - estimate) / oracle


def _sampled(value: float, bound: float, shots: int, seed) -> tuple[float, float]:
    if bound == 0:
        return 0.0, 0.0
    est = sample_shots(float(np.clip(value / bound, -1, 1)), shots, seed)
    return est.value * bound, est.standard_error * bound


def _heisenberg_point(config, model, setup, t, item_seed):
    mcfg = ModularConfig(config.steps, t, Picture.HEISENBERG) if config.evolver == "modular" else None
    (b_t,), prob = evolve(model, [setup.theta_B], t, Picture.HEISENBERG, config.evolver, mcfg, config.rk4_dt)
    terms = heisenberg_terms_from(model, setup, b_t, "trace_formula", prob)
    e_d = terms.E_D
    if config.shots is None:
        return terms.correlation, terms.rate, prob, None, None
    # every expectation value is measured as its own +-1 experiment
    hb = model.hbar
    plan = [("C", 1.0, CircuitParams(0.0)), ("H", 2.0 / hb, CircuitParams(-np.pi / 2, None, model.hamiltonian))]
    for l, ldl in zip(model.lindblads, model._ldl):
        plan += [("J", 1.0 / hb, CircuitParams(0.0, dag(l), l)), ("AC", -1.0 / hb, CircuitParams(0.0, None, ldl))]
    c_val = c_se = 0.0
    r_val, r_var = 0.0, 0.0
    for k, (kind, pref, params) in enumerate(plan):
        e = trace_formula_expectation(setup, b_t, params)
        v, se = _sampled(e, heisenberg_normalization(setup, b_t, params), config.shots, item_seed + [k])
        if kind == "C":
            c_val, c_se = v, se
        else:
            r_val += pref * v
            r_var += (pref * se) ** 2
    return c_val / (2 * e_d), r_val / (2 * e_d), prob, c_se / (2 * e_d), np.sqrt(r_var) / (2 * e_d)


def _schrodinger_point(config, model, setup, t, item_seed):
    mcfg = ModularConfig(config.steps, t, Picture.SCHRODINGER) if config.evolver == "modular" else None
    if config.shots is None:
        st = schrodinger_terms(model, setup, t, mcfg, config.evolver, rk4_dt=config.rk4_dt)
        return st.correlation, st.rate, 1.0, None, None
    gates = (np.eye(setup.dim), reflection(setup.theta_A))
    evolved, _ = evolve(model, [g @ setup.rho_eq for g in gates], t, Picture.SCHRODINGER, config.evolver, mcfg, config.rk4_dt)
    e_d = setup.population_A
    tr_b = float(np.trace(setup.theta_B).real)
    table = [("C", 1.0, CircuitParams(0.0))] + [(n, p, c) for n, p, c in _schrodinger_param_table(model)]
    c_val = c_var = r_val = r_var = 0.0
    k = 0
    for e_g in evolved:
        for name, pref, params in table:
            n_gate, m_gate = params.gates(setup.dim)
            bound = tr_b * np.linalg.norm(n_gate, 2) * np.linalg.norm(m_gate, 2)
            v, se = _sampled(schrodinger_trace_formula(setup.theta_B, e_g, params), bound, config.shots, item_seed + [k])
            k += 1
            if name == "C":
                c_val += v
                c_var += se**2
            else:
                r_val += pref * v
                r_var += (pref * se) ** 2
    return c_val / (2 * e_d), r_val / (2 * e_d), 1.0, np.sqrt(c_var) / (2 * e_d), np.sqrt(r_var) / (2 * e_d)


def _oracle(config, model, setup, t):
    if model.dim > MAX_EXACT_DIM:
        return None, None
    (b_t,), _ = evolve(model, [setup.theta_B], t, Picture.HEISENBERG, "exact")
    terms = heisenberg_terms_from(model, setup, b_t)
    return terms.correlation, terms.rate


def run_point(config: ExperimentConfig, index: int) -> ResultRow:
    """One time point; the shot seed derives from ``(seed, index)`` only."""
    model, setup = build_problem(config)
    t = float(config.times[index])
    item_seed = None if config.seed is None else [int(config.seed), int(index)]
    if item_seed is None and config.shots is not None:
        item_seed = [int(np.random.SeedSequence().entropy), int(index)]
    if Picture.parse(config.picture) is Picture.HEISENBERG:
        c, cdot, prob, se_c, se_cdot = _heisenberg_point(config, model, setup, t, item_seed)
    else:
        c, cdot, prob, se_c, se_cdot = _schrodinger_point(config, model, setup, t, item_seed)
    c_or, cdot_or = _oracle(config, model, setup, t)
    if config.quantities == "C":
        cdot = cdot_or = se_cdot = None
    elif config.quantities == "Cdot":
        c = c_or = se_c = None
    return ResultRow(
        t, c, cdot, c_or, cdot_or,
        relative_error(c_or, c), relative_error(cdot_or, cdot),
        float(prob), se_c, se_cdot,
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ResultRow]:
    """One ``ResultRow`` per time point, ordered by ``t``."""
    indices = range(config.t_count)
    if jobs <= 1 or config.t_count == 1:
        return [run_point(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_point, [config] * config.t_count, indices))


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list
    slope_C: float | None
    slope_Cdot: float | None


def loglog_slope(ns: Sequence[int], errors: Sequence[float | None]) -> float | None:
    pairs = [(n, abs(e)) for n, e in zip(ns, errors) if e is not None and e != 0]
    if len(pairs) < 2:
        return None
    x, y = np.log([p[0] for p in pairs]), np.log([p[1] for p in pairs])
    return float(np.polyfit(x, y, 1)[0])


def convergence_study(config: ExperimentConfig, n_list: Sequence[int], t_fixed: float, jobs: int = 1) -> ConvergenceTable:
    """Modular rel-errors against the exact oracle for each step count at ``t_fixed``."""
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ConfigError("n_list", "must be nonempty")
    if any(n < 1 for n in n_list) or n_list != sorted(n_list):
        raise ConfigError("n_list", "must be positive and sorted ascending")
    cfgs = [config.replace(evolver="modular", steps=n, t_start=t_fixed, t_end=t_fixed, t_count=1) for n in n_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, cfgs, [0] * len(cfgs)))
    else:
        results = [run_point(c, 0) for c in cfgs]
    rows = [(n, r.rel_err_C, r.rel_err_Cdot) for n, r in zip(n_list, results)]
    return ConvergenceTable(rows, loglog_slope(n_list, [r[1] for r in rows]), loglog_slope(n_list, [r[2] for r in rows]))


# --------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.12g}"


def metadata_lines(config: ExperimentConfig) -> list[str]:
    lines = [f"# lindrate version={__version__}"]
    lines += [f"# {f.name}={getattr(config, f.name)}" for f in fields(ExperimentConfig)]
    return lines


def rows_to_csv(rows: Sequence[ResultRow], config: ExperimentConfig) -> str:
    buf = io.StringIO()
    for line in metadata_lines(config):
        buf.write(line + "\n")
    buf.write(",".join(COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, c)) for c in COLUMNS) + "\n")
    return buf.getvalue()


def rows_to_json(rows: Sequence[ResultRow], config: ExperimentConfig) -> str:
    payload = {
        "version": __version__,
        "config": dataclasses.asdict(config),
        "rows": [{c: (None if getattr(r, c) is None else float(_fmt(getattr(r, c)))) for c in COLUMNS} for r in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def convergence_to_csv(table: ConvergenceTable, config: ExperimentConfig, t_fixed: float) -> str:
    buf = io.StringIO()
    for line in metadata_lines(config):
        buf.write(line + "\n")
    buf.write(f"# t_fixed={t_fixed}\n# slope_C={_fmt(table.slope_C)}\n# slope_Cdot={_fmt(table.slope_Cdot)}\n")
    buf.write("N,rel_err_C,rel_err_Cdot\n")
    for n, ec, ecd in table.rows:
        buf.write(f"{n},{_fmt(ec)},{_fmt(ecd)}\n")
    return buf.getvalue()
