"""Quantum clock powered by the steady state of a quenched spin chain.

The package follows the pipeline of the underlying physics: quench a
chain (:mod:`quenchclock.spectra`), read off golden-rule rates of an
attached probe (:mod:`quenchclock.rates`), run a ladder clock on the
rate imbalance (:mod:`quenchclock.clock`), and budget the chain as a
battery (:mod:`quenchclock.battery`).  :mod:`quenchclock.oracle` checks
the closed forms against brute-force finite-size sums, and
:mod:`quenchclock.cli` wires everything into a command line.
"""

from .battery import LifetimeReport, available_energy, lifetime
from .config import (
    AxisSpec,
    CouplingConfig,
    LadderConfig,
    McConfig,
    ModelConfig,
    OracleConfig,
    OutputConfig,
    RunConfig,
    apply_overrides,
    emit_config,
    load_config,
    parse_config,
)
from .clock import (
    ClockMetrics,
    FirstPassage,
    LadderRates,
    LadderSpec,
    MasterTrajectory,
    QubitSteadyState,
    TickStatistics,
    clock_metrics,
    evolve_master,
    ladder_rates,
    qubit_steady_state,
    resolve_gamma,
    sample_tick_times,
    simulate_ticks,
    solve_first_passage,
)
from .errors import (
    BadBroadening,
    ConditionUndefined,
    ConfigError,
    DegenerateRoot,
    GaplessMode,
    NoResonance,
    NotReachable,
    OutOfBand,
    PassiveState,
    QuenchClockError,
    TooLarge,
    UnstableStep,
    VanHoveSingularity,
    ZeroDownRate,
    ZeroRates,
)
from .oracle import (
    ConvergenceRow,
    OracleReport,
    SpectralFunction,
    chi_spectrum,
    dense_ed_correlator,
    discrete_rates,
    kernel_density,
)
from .scan import (
    Table,
    grid_points,
    oracle_table,
    render_table,
    row_seed,
    run_scan,
    write_csv,
    write_json,
)
from .rates import (
    BiasCondition,
    QubitCoupling,
    Rates,
    ResonanceRoots,
    RootContribution,
    SYMMETRY_FACTOR,
    bias_condition,
    chi_second_at,
    rates_ising,
    rates_xx,
    resonance_roots,
    transition_rates,
)
from .spectra import (
    DensityOfStates,
    EnergyRoot,
    ModeState,
    ModelKind,
    ModelSpec,
    QuenchSpec,
    band_edges,
    bogoliubov_angle,
    density_of_states,
    dispersion,
    energy_roots,
    group_velocity,
    mode_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
