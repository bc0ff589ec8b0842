//! A short Monte Carlo sweep over transmit power, printed as CSV.
//!
//! Run with `RUST_LOG=info` to see per-point progress.

use ris_idd::sim::{run_sweep, write_rows, Scheme, SimConfig};

fn main() -> ris_idd::Result<()> {
    env_logger::init();
    let mut cfg = SimConfig::with_system(8, 16, 4);
    cfg.power.ptx_dbm = vec![6.0, 8.0, 10.0, 12.0];
    cfg.run.schemes = vec![Scheme::Mmse, Scheme::Idd, Scheme::RisIdd];
    cfg.run.frames_per_point = 40;
    cfg.run.master_seed = 2;

    let outcome = run_sweep(&cfg)?;
    write_rows(std::io::stdout().lock(), &outcome.rows).expect("stdout is writable");
    Ok(())
}
