"""Grid scans over run configurations, with flat tabular results.

Each command expands the config's scan axes into a cartesian grid (last
axis fastest, matching C order), evaluates one row per grid point, and
collects them into a :class:`Table`.  Rows are immutable tuples in grid
order no matter how many worker threads computed them, and every cell
is a plain float, int or string, so the CSV and JSON writers are trivial
and byte-reproducible.

A grid point that cannot be evaluated is not an error: the row keeps
``nan`` in the unavailable columns and carries exactly one flag naming
the innermost reason (priority order in :data:`FLAG_PRIORITY`).  A scan
whose rows are all flagged signals a domain problem to the CLI.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable

import numpy as np

from .battery import lifetime
from .clock import (
    LadderSpec,
    clock_metrics,
    ladder_rates,
    simulate_ticks,
    solve_first_passage,
)
from .config import SWEEPABLE, AxisSpec, OutputConfig, RunConfig
from .errors import (
    ConfigError,
    DegenerateRoot,
    GaplessMode,
    NoResonance,
    NotReachable,
    PassiveState,
    QuenchClockError,
    VanHoveSingularity,
    ZeroRates,
)
from .oracle import discrete_rates
from .rates import QubitCoupling, bias_condition, transition_rates
from .spectra import QuenchSpec

# Knuth's 64-bit golden-ratio step decorrelates per-row seeds.
_SEED_STEP = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

# One flag per row, first applicable wins.
FLAG_PRIORITY = (
    "invalid",
    "gapless",
    "no_resonance",
    "van_hove",
    "zero_rates",
    "condition_undefined",
    "multi_root",
    "passive",
    "zero_down_rate",
    "not_reachable",
)


@dataclass(frozen=True)
class Table:
    """A finished scan: schema tag, column names and row tuples."""

    schema: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    @property
    def all_flagged(self) -> bool:
        if "flag" not in self.columns or not self.rows:
            return False
        idx = self.columns.index("flag")
        return all(row[idx] != "" for row in self.rows)


def row_seed(base: int, index: int) -> int:
    """Per-row Monte Carlo seed: decorrelated, deterministic, order-free."""
    return (base + (index + 1) * _SEED_STEP) & _MASK64


def _axis_values(axis: AxisSpec) -> list[float]:
    if axis.steps == 1:
        return [float(axis.min)]
    return [float(v) for v in np.linspace(axis.min, axis.max, axis.steps)]


def grid_points(config: RunConfig) -> list[dict[str, float | int]]:
    """All grid points in row order; a single empty point when no axes."""
    points: list[dict[str, float | int]] = [{}]
    for axis in config.scan:
        coerce = SWEEPABLE[axis.name][2]
        values = []
        for v in _axis_values(axis):
            if coerce is int:
                if abs(v - round(v)) > 1e-9:
                    raise ConfigError(
                        f"scan.axes: {axis.name!r} is integer-valued but the "
                        f"grid contains {v!r}")
                values.append(int(round(v)))
            else:
                values.append(v)
        points = [dict(p, **{axis.name: v}) for p in points for v in values]
    return points


def _apply_point(config: RunConfig, values: dict[str, float | int]
                 ) -> tuple[QuenchSpec, QubitCoupling, LadderSpec]:
    m = config.model
    c = config.coupling
    lad = config.ladder
    get = values.get
    if m.kind == "ising":
        quench = QuenchSpec.ising(h_i=get("h_i", m.h_i), h_f=get("h_f", m.h_f),
                                  kappa=get("kappa", m.kappa))
    else:
        quench = QuenchSpec.xx_ring(V_i=get("v_i", m.v_i), V_f=get("v_f", m.v_f),
                                    t=get("t", m.t))
    coupling = QubitCoupling(epsilon0=get("epsilon0", c.epsilon0),
                             g_obs=get("g_obs", c.g_obs), L=get("L", c.L))
    eps_w = get("epsilon_w", lad.epsilon_w)
    if eps_w is None:
        eps_w = coupling.epsilon0
    ladder = LadderSpec(d=get("d", lad.d), epsilon_w=eps_w,
                        g=get("g", lad.g), Gamma=get("gamma", lad.gamma))
    return quench, coupling, ladder


_FLAG_OF_ERROR = (
    (GaplessMode, "gapless"),
    (NoResonance, "no_resonance"),
    (DegenerateRoot, "van_hove"),
    (VanHoveSingularity, "van_hove"),
    (ZeroRates, "zero_rates"),
    (PassiveState, "passive"),
    (NotReachable, "not_reachable"),
)


def _flag_of(exc: Exception) -> str:
    for cls, flag in _FLAG_OF_ERROR:
        if isinstance(exc, cls):
            return flag
    if isinstance(exc, (ValueError, QuenchClockError)):
        return "invalid"
    raise exc


def _pick_flag(candidates: Iterable[str]) -> str:
    seen = set(candidates)
    for flag in FLAG_PRIORITY:
        if flag in seen:
            return flag
    return ""


class _Point:
    """Lazily evaluated pieces of one grid point, with flag collection."""

    def __init__(self, config: RunConfig, values: dict[str, float | int]):
        self.values = values
        self.flags: list[str] = []
        self.quench = None
        self.coupling = None
        self.ladder = None
        self.rates = None
        self._rates_done = False
        try:
            self.quench, self.coupling, self.ladder = _apply_point(config, values)
        except (ValueError, ConfigError):
            self.flags.append("invalid")

    def note(self, exc: Exception) -> None:
        self.flags.append(_flag_of(exc))

    def ensure_rates(self):
        if self._rates_done or self.quench is None:
            return self.rates
        self._rates_done = True
        try:
            self.rates = transition_rates(self.quench, self.coupling)
        except QuenchClockError as exc:
            self.note(exc)
        return self.rates

    def flag(self) -> str:
        return _pick_flag(self.flags)


def _rates_cells(pt: _Point) -> dict[str, Any]:
    cells = {"gamma_up": math.nan, "gamma_down": math.nan,
             "chi_second": math.nan, "verdict": "",
             "condition_lhs": math.nan, "excluded_roots": 0}
    rates = pt.ensure_rates()
    if rates is None:
        return cells
    cells["gamma_up"] = rates.gamma_up
    cells["gamma_down"] = rates.gamma_down
    cells["chi_second"] = rates.chi_second
    cells["verdict"] = "active" if rates.is_active else "passive"
    cells["excluded_roots"] = rates.excluded_roots
    cond = bias_condition(pt.quench, pt.coupling.epsilon0)
    if cond.multi_root:
        pt.flags.append("multi_root")
    elif not cond.defined:
        pt.flags.append("condition_undefined")
    else:
        cells["condition_lhs"] = cond.lhs_per_root[0]
    return cells


def _clock_cells(pt: _Point, mc_trajectories: int, seed: int) -> dict[str, Any]:
    cells = {"p_up": math.nan, "p_down": math.nan, "nu_tick": math.nan,
             "accuracy_N": math.nan, "entropy_per_tick": math.nan,
             "relative_bias": math.nan, "tur_ratio": math.nan,
             "exact_N": math.nan, "exact_rate": math.nan}
    if mc_trajectories:
        cells["empirical_accuracy"] = math.nan
        cells["empirical_rate"] = math.nan
    rates = pt.ensure_rates()
    if rates is None:
        return cells
    try:
        lr = ladder_rates(rates, pt.ladder)
    except QuenchClockError as exc:
        pt.note(exc)
        return cells
    metrics = clock_metrics(lr, pt.ladder.d)
    cells["p_up"] = lr.p_up
    cells["p_down"] = lr.p_down
    cells["nu_tick"] = metrics.nu_tick
    cells["accuracy_N"] = metrics.accuracy_N
    cells["entropy_per_tick"] = metrics.entropy_per_tick
    cells["relative_bias"] = metrics.relative_bias
    cells["tur_ratio"] = metrics.tur_ratio
    if lr.p_down == 0.0:
        pt.flags.append("zero_down_rate")
    try:
        fp = solve_first_passage(lr, pt.ladder)
    except QuenchClockError as exc:
        pt.note(exc)
        return cells
    cells["exact_N"] = fp.exact_N
    cells["exact_rate"] = fp.exact_rate
    if mc_trajectories:
        # Sampling needs upward drift: against the bias the mean number of
        # jumps to the top grows exponentially with d, so passive points
        # keep nan and the flag says why.
        if lr.p_up > lr.p_down:
            stats = simulate_ticks(lr, pt.ladder, mc_trajectories, seed)
            cells["empirical_accuracy"] = stats.empirical_accuracy
            cells["empirical_rate"] = stats.empirical_rate
        else:
            pt.flags.append("passive")
    return cells


def _lifetime_cells(pt: _Point) -> dict[str, Any]:
    cells = {"available_energy": math.nan, "tick_energy": math.nan,
             "tick_budget": math.nan, "t_star": math.nan,
             "renewal_lifetime": math.nan, "formula_ratio": math.nan,
             "mean_tick_time": math.nan}
    if pt.quench is None:
        return cells
    try:
        rep = lifetime(pt.quench, pt.coupling, pt.ladder)
    except (QuenchClockError, ValueError) as exc:
        pt.note(exc)
        return cells
    cells["available_energy"] = rep.available_energy
    cells["tick_energy"] = rep.tick_energy
    cells["tick_budget"] = rep.tick_budget
    cells["t_star"] = rep.lifetime
    cells["renewal_lifetime"] = rep.renewal_lifetime
    cells["formula_ratio"] = rep.formula_ratio
    cells["mean_tick_time"] = rep.mean_tick_time
    return cells


_RATES_COLS = ("gamma_up", "gamma_down", "chi_second", "verdict",
               "condition_lhs", "excluded_roots")
_CLOCK_COLS = ("p_up", "p_down", "nu_tick", "accuracy_N", "entropy_per_tick",
               "relative_bias", "tur_ratio", "exact_N", "exact_rate")
_LIFE_COLS = ("available_energy", "tick_energy", "tick_budget", "t_star",
              "renewal_lifetime", "formula_ratio", "mean_tick_time")
_SCAN_COLS = ("gamma_up", "gamma_down", "verdict", "condition_lhs",
              "chi_second", "nu_tick", "accuracy_N", "entropy_per_tick",
              "exact_N", "t_star")


def _row_rates(config: RunConfig, index: int, values: dict) -> dict[str, Any]:
    pt = _Point(config, values)
    cells = _rates_cells(pt)
    cells["flag"] = pt.flag()
    return cells


def _row_clock(config: RunConfig, index: int, values: dict) -> dict[str, Any]:
    pt = _Point(config, values)
    cells = _clock_cells(pt, config.mc.n_trajectories,
                         row_seed(config.mc.seed, index))
    cells["flag"] = pt.flag()
    return cells


def _row_lifetime(config: RunConfig, index: int, values: dict) -> dict[str, Any]:
    pt = _Point(config, values)
    cells = _lifetime_cells(pt)
    cells["flag"] = pt.flag()
    return cells


def _row_scan(config: RunConfig, index: int, values: dict) -> dict[str, Any]:
    pt = _Point(config, values)
    rates = _rates_cells(pt)
    clock = _clock_cells(pt, 0, 0)
    life = _lifetime_cells(pt)
    merged = {**rates, **clock, **life}
    merged["flag"] = pt.flag()
    return merged


_COMMANDS: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "rates": (_row_rates, _RATES_COLS),
    "clock": (_row_clock, _CLOCK_COLS),
    "lifetime": (_row_lifetime, _LIFE_COLS),
    "scan": (_row_scan, _SCAN_COLS),
}


def run_scan(config: RunConfig, command: str, threads: int = 1) -> Table:
    """Evaluate ``command`` over the config's grid with a worker pool.

    Rows are emitted in grid order regardless of completion order, and
    every Monte Carlo row draws from a seed fixed by its grid index, so
    the result is identical for any thread count.
    """
    if command not in _COMMANDS:
        raise ValueError(f"unknown scan command {command!r}")
    evaluate, value_cols = _COMMANDS[command]
    points = grid_points(config)
    axis_names = tuple(a.name for a in config.scan)
    columns = list(axis_names)
    columns.extend(value_cols)
    if command == "clock" and config.mc.n_trajectories:
        columns.extend(("empirical_accuracy", "empirical_rate"))
    columns.append("flag")

    def work(item: tuple[int, dict]) -> tuple:
        index, values = item
        cells = evaluate(config, index, values)
        return tuple(values[name] for name in axis_names) + tuple(
            cells[name] for name in columns[len(axis_names):])

    items = list(enumerate(points))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, items))
    else:
        rows = [work(item) for item in items]
    return Table(schema=f"quenchclock.{command}.v1", columns=tuple(columns),
                 rows=tuple(rows))


def oracle_table(config: RunConfig) -> Table:
    """Refinement table of the finite-size check at the config's point."""
    quench, coupling, _ = _apply_point(config, {})
    report = discrete_rates(quench, coupling, L=config.oracle.L_oracle,
                            eta=config.oracle.eta, kernel=config.oracle.kernel)
    rows = tuple(
        (r.L, r.eta, r.gamma_up, r.gamma_down, r.rel_err_up, r.rel_err_down)
        for r in report.convergence_table)
    return Table(schema="quenchclock.oracle.v1",
                 columns=("L", "eta", "gamma_up", "gamma_down",
                          "rel_err_up", "rel_err_down"),
                 rows=rows)


def _format_cell(value: Any, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{precision}g")
    return str(value)


def write_csv(table: Table, precision: int) -> str:
    """Render a table as CSV with a versioned '#' header."""
    lines = [f"# schema: {table.schema}",
             "# columns: " + ",".join(table.columns),
             ",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_format_cell(v, precision) for v in row))
    return "\n".join(lines) + "\n"


def _json_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_json(table: Table) -> str:
    """Render a table as JSON; non-finite numbers become null."""
    doc = {"schema": table.schema, "columns": list(table.columns),
           "rows": [[_json_cell(v) for v in row] for row in table.rows]}
    return json.dumps(doc, indent=2) + "\n"


def render_table(table: Table, output: OutputConfig) -> str:
    if output.format == "json":
        return write_json(table)
    return write_csv(table, output.precision)
