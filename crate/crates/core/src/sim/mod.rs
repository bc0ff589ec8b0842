//! Configuration and seeded Monte Carlo sweeps over transmit power.

mod config;
mod output;
mod sweep;

pub use config::{
    dbm_to_watts, effective_symbol_energy, load_config, CodeConfig, GeometryConfig, PowerConfig,
    ReceiverConfig, RunConfig, Scheme, SimConfig, SystemConfig,
};
pub use output::{run_to_files, write_rows, write_trace, OutputPaths, CSV_HEADER};
pub use sweep::{
    build_code, run_sweep, run_sweep_with, stream_rng, PointFailure, ResultRow, SweepOutcome,
    TraceRecord,
};
