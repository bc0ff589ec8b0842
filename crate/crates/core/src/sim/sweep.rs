use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{dbm_to_watts, effective_symbol_energy, Scheme, SimConfig};
use crate::channel::{build_channel_set, Geometry};
use crate::coding::{alist, construct_code, LdpcCode};
use crate::error::{Error, Result};
use crate::idd::{
    baseline_uncoded_detect, linear_sum_rate, message_errors, run_idd_frame, FrameContext, RisMode,
};
use crate::ris_optim::AltOptTrace;

// Random streams. Every stream is a ChaCha8 generator whose key holds the
// master seed and a domain tag and whose 64-bit stream id is a counter:
//
//   DATA_DOMAIN,          counter = frame       positions, fading, bits, noise
//   GEOMETRY_DOMAIN,      counter = 0           frozen user positions
//   RIS_DOMAIN + scheme,  counter = power << 32 | frame   RIS phase start
//
// The data stream ignores scheme and power, so every scheme and every power
// level sees the same channels, messages and noise for a given frame index.
const DATA_DOMAIN: u64 = 0;
const GEOMETRY_DOMAIN: u64 = 1;
const RIS_DOMAIN: u64 = 16;

/// Generator for one `(domain, counter)` pair under `master_seed`.
pub fn stream_rng(master_seed: u64, domain: u64, counter: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(counter);
    rng
}

/// One CSV line: aggregate over all frames of a `(scheme, power)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub ptx_dbm: f64,
    /// Receiver pass; uncoded schemes report a single pass `1`.
    pub idd_iteration: usize,
    pub ber: f64,
    pub sum_rate: f64,
    pub frames: usize,
    pub bit_errors: u64,
    pub seed: u64,
}

/// A point that was abandoned because a frame failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub scheme: Scheme,
    pub ptx_dbm: f64,
    pub frame: usize,
    pub message: String,
}

/// One objective value recorded by the RIS optimiser.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub scheme: Scheme,
    pub ptx_dbm: f64,
    pub frame: usize,
    /// `relaxed` or `truncated`.
    pub phase: &'static str,
    pub round: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<PointFailure>,
    pub traces: Vec<TraceRecord>,
}

struct FrameStats {
    /// Message bit errors summed over users, one entry per receiver pass.
    errors: Vec<u64>,
    sum_rate: Vec<f64>,
    trace: Option<AltOptTrace>,
}

struct Setup<'a> {
    config: &'a SimConfig,
    code: LdpcCode,
    frozen: Option<Geometry>,
    sigma_n2: f64,
}

impl Setup<'_> {
    fn frame(&self, scheme: Scheme, power_idx: usize, frame: usize) -> Result<FrameStats> {
        let cfg = self.config;
        let g = &cfg.geometry;
        let seed = cfg.run.master_seed;
        let ptx = cfg.power.ptx_dbm[power_idx];
        let e_x = effective_symbol_energy(ptx, cfg.code.rate);

        let mut data = stream_rng(seed, DATA_DOMAIN, frame as u64);
        let geometry = match &self.frozen {
            Some(geo) => geo.clone(),
            None => Geometry::sample(
                &mut data,
                g.ap_point(),
                g.ris_point(),
                cfg.system.k,
                g.user_center_x,
                g.user_radius,
            )?,
        };
        let cs = build_channel_set(
            &geometry,
            cfg.system.m,
            cfg.system.n,
            self.sigma_n2,
            e_x,
            &mut data,
        )?;
        let mode = if scheme.uses_ris() {
            RisMode::Optimized {
                max_rounds: cfg.receiver.ris_max_rounds,
                tol: cfg.receiver.ris_tol,
            }
        } else {
            RisMode::Off
        };
        let mut ris_rng = stream_rng(
            seed,
            RIS_DOMAIN + scheme.index(),
            ((power_idx as u64) << 32) | frame as u64,
        );
        let (ctx, trace) = FrameContext::prepare(cs, mode, &self.code, &mut data, &mut ris_rng)?;

        let (errors, sum_rate) = if scheme.is_iterative() {
            let res = run_idd_frame(
                &ctx,
                &self.code,
                cfg.receiver.idd_iterations,
                cfg.code.bp_iterations,
            )?;
            res.stats
                .iter()
                .map(|s| (s.bit_errors.iter().sum::<usize>() as u64, s.sum_rate))
                .unzip()
        } else {
            let words = baseline_uncoded_detect(&ctx);
            let errors: usize = message_errors(&self.code, &ctx, &words).iter().sum();
            (vec![errors as u64], vec![linear_sum_rate(&ctx)])
        };
        Ok(FrameStats {
            errors,
            sum_rate,
            trace: cfg.run.diagnostics.then_some(trace).flatten(),
        })
    }
}

/// Builds (or loads from the configured cache directory) the LDPC code.
pub fn build_code(config: &SimConfig) -> Result<LdpcCode> {
    let c = &config.code;
    match &c.cache_dir {
        Some(dir) => alist::load_or_construct(dir, c.n, c.rate, c.dv, c.dc, c.seed),
        None => construct_code(c.n, c.rate, c.dv, c.dc, c.seed),
    }
}

/// Runs every `(scheme, power)` point of the sweep and returns its rows.
pub fn run_sweep(config: &SimConfig) -> Result<SweepOutcome> {
    run_sweep_with(config, |_| Ok(()))
}

/// Like [`run_sweep`], handing each point's rows to `on_point` as soon as
/// the point finishes.
///
/// Frames of a point run in parallel on `config.run.workers` threads and
/// are reduced in frame order, so the rows do not depend on the thread
/// count.
pub fn run_sweep_with<F>(config: &SimConfig, mut on_point: F) -> Result<SweepOutcome>
where
    F: FnMut(&[ResultRow]) -> Result<()>,
{
    config.validate()?;
    let code = build_code(config)?;
    let g = &config.geometry;
    let frozen = if g.freeze_positions {
        let mut rng = stream_rng(config.run.master_seed, GEOMETRY_DOMAIN, 0);
        Some(Geometry::sample(
            &mut rng,
            g.ap_point(),
            g.ris_point(),
            config.system.k,
            g.user_center_x,
            g.user_radius,
        )?)
    } else {
        None
    };
    let setup = Setup {
        config,
        code,
        frozen,
        sigma_n2: dbm_to_watts(config.power.noise_dbm),
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.run.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let frames = config.run.frames_per_point;
    let info_bits = (frames * config.system.k * setup.code.k()) as f64;
    let mut outcome = SweepOutcome::default();

    for &scheme in &config.run.schemes {
        for (p, &ptx) in config.power.ptx_dbm.iter().enumerate() {
            let results: Vec<Result<FrameStats>> = pool.install(|| {
                (0..frames)
                    .into_par_iter()
                    .map(|f| setup.frame(scheme, p, f))
                    .collect()
            });

            let passes = if scheme.is_iterative() {
                config.receiver.idd_iterations
            } else {
                1
            };
            let mut errors = vec![0u64; passes];
            let mut rate = vec![0.0; passes];
            let mut failure = None;
            for (f, r) in results.into_iter().enumerate() {
                match r {
                    Ok(stats) => {
                        for i in 0..passes {
                            errors[i] += stats.errors[i];
                            rate[i] += stats.sum_rate[i];
                        }
                        if let Some(t) = stats.trace {
                            push_trace(&mut outcome.traces, scheme, ptx, f, &t);
                        }
                    }
                    Err(e) => {
                        failure = Some(PointFailure {
                            scheme,
                            ptx_dbm: ptx,
                            frame: f,
                            message: e.to_string(),
                        });
                        break;
                    }
                }
            }
            if let Some(fail) = failure {
                log::error!(
                    "{scheme} at {ptx} dBm abandoned (frame {}): {}",
                    fail.frame,
                    fail.message
                );
                outcome.failures.push(fail);
                continue;
            }

            let rows: Vec<ResultRow> = (0..passes)
                .map(|i| ResultRow {
                    scheme,
                    ptx_dbm: ptx,
                    idd_iteration: i + 1,
                    ber: errors[i] as f64 / info_bits,
                    sum_rate: rate[i] / frames as f64,
                    frames,
                    bit_errors: errors[i],
                    seed: config.run.master_seed,
                })
                .collect();
            log::info!(
                "{scheme} {ptx:>6.1} dBm: ber {:.3e}, sum-rate {:.3}",
                rows[passes - 1].ber,
                rows[passes - 1].sum_rate
            );
            on_point(&rows)?;
            outcome.rows.extend(rows);
        }
    }
    Ok(outcome)
}

fn push_trace(out: &mut Vec<TraceRecord>, scheme: Scheme, ptx: f64, frame: usize, t: &AltOptTrace) {
    let phases = [
        ("relaxed", &t.mse_history),
        ("truncated", &t.truncated_history),
    ];
    for (phase, history) in phases {
        out.extend(history.iter().enumerate().map(|(round, &mse)| TraceRecord {
            scheme,
            ptx_dbm: ptx,
            frame,
            phase,
            round: round + 1,
            mse,
        }));
    }
}
