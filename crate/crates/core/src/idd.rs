//! One block-fading frame through the iterative receiver.
//!
//! A frame carries one LDPC codeword per user, `n/2` QPSK slots, all seen
//! through the same channel realization. The RIS phases are designed from
//! the channel before transmission and stay fixed for the frame. The first
//! receiver pass detects without priors; later passes feed the decoder's
//! extrinsic LLRs back as soft symbols for interference cancellation and
//! for the per-slot MMSE filters.

use rand::Rng;

use crate::channel::{assemble_effective_channel, sample_cn, ChannelSet, PhaseVector};
use crate::coding::{bp_decode, hard_demap, map_bits_to_symbols, BpOutput, LdpcCode};
use crate::detection::{
    self, mmse_filter, mmse_matrix, sic_cancel, sinr_no_sic, sinr_sic, soft_symbols, Delta,
};
use crate::error::Result;
use crate::ris_optim::{alternate_optimize, AltOptTrace};
use crate::{CMatrix, CVector, Complex64};

/// How the RIS is driven during a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RisMode {
    /// No RIS: the effective channel is the direct link.
    Off,
    /// Phases from alternating MSE minimisation.
    Optimized { max_rounds: usize, tol: f64 },
}

/// Everything the receiver needs for one frame.
#[derive(Debug, Clone)]
pub struct FrameContext {
    pub cs: ChannelSet,
    pub phi: Option<PhaseVector>,
    pub h_eff: CMatrix,
    /// Linear MMSE filter bank for `h_eff`, `K x M`.
    pub w: CMatrix,
    pub messages: Vec<Vec<u8>>,
    pub tx_bits: Vec<Vec<u8>>,
    pub tx_symbols: Vec<Vec<Complex64>>,
    pub rx_slots: Vec<CVector>,
}

impl FrameContext {
    /// Designs the RIS for `cs` and transmits one random codeword per user.
    ///
    /// `frame_rng` drives messages and noise; `ris_rng` only seeds the
    /// phase initialisation, so two modes fed the same `frame_rng` see the
    /// same data and noise.
    pub fn prepare<R1, R2>(
        cs: ChannelSet,
        mode: RisMode,
        code: &LdpcCode,
        frame_rng: &mut R1,
        ris_rng: &mut R2,
    ) -> Result<(Self, Option<AltOptTrace>)>
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        let (phi, w, trace) = match mode {
            RisMode::Off => (None, mmse_matrix(&cs.h, cs.noise_ratio()), None),
            RisMode::Optimized { max_rounds, tol } => {
                let out = alternate_optimize(&cs, max_rounds, tol, ris_rng)?;
                (Some(out.phi), out.w, Some(out.trace))
            }
        };
        let h_eff = match &phi {
            Some(p) => assemble_effective_channel(&cs, p),
            None => cs.h.clone(),
        };
        let messages: Vec<Vec<u8>> = (0..cs.num_users())
            .map(|_| {
                (0..code.k())
                    .map(|_| frame_rng.random_range(0..2u8))
                    .collect()
            })
            .collect();
        Ok((
            Self::transmit(cs, phi, h_eff, w, messages, code, frame_rng),
            trace,
        ))
    }

    /// Encodes, maps and sends `messages` through `h_eff` with fresh noise.
    pub fn transmit<R: Rng + ?Sized>(
        cs: ChannelSet,
        phi: Option<PhaseVector>,
        h_eff: CMatrix,
        w: CMatrix,
        messages: Vec<Vec<u8>>,
        code: &LdpcCode,
        rng: &mut R,
    ) -> Self {
        assert_eq!(messages.len(), cs.num_users());
        let tx_bits: Vec<Vec<u8>> = messages.iter().map(|m| code.encode(m)).collect();
        let tx_symbols: Vec<Vec<Complex64>> = tx_bits
            .iter()
            .map(|b| map_bits_to_symbols(b, cs.e_x))
            .collect();
        let slots = code.n() / 2;
        let sigma = cs.sigma_n2.sqrt();
        let rx_slots = (0..slots)
            .map(|t| {
                let x = CVector::from_iterator(cs.num_users(), tx_symbols.iter().map(|s| s[t]));
                let noise = CVector::from_fn(cs.num_antennas(), |_, _| sample_cn(rng) * sigma);
                &h_eff * x + noise
            })
            .collect();
        Self {
            cs,
            phi,
            h_eff,
            w,
            messages,
            tx_bits,
            tx_symbols,
            rx_slots,
        }
    }

    pub fn num_users(&self) -> usize {
        self.cs.num_users()
    }

    pub fn num_slots(&self) -> usize {
        self.rx_slots.len()
    }
}

/// Detector output for a whole frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetection {
    /// Extrinsic LLRs `L_D`, `K x n`.
    pub llrs: Vec<Vec<f64>>,
    /// Post-SIC SINR per user, averaged over slots.
    pub sinr: Vec<f64>,
    /// `sum_k log2(1 + SINR_k)` averaged over slots.
    pub sum_rate: f64,
}

/// Soft detection of every slot given decoder extrinsics `priors`
/// (`K x n`, all zeros on the first pass).
pub fn detect_frame(ctx: &FrameContext, priors: &[Vec<f64>]) -> Result<FrameDetection> {
    let k_users = ctx.num_users();
    let slots = ctx.num_slots();
    assert_eq!(priors.len(), k_users);
    let e_x = ctx.cs.e_x;
    let nr = ctx.cs.noise_ratio();

    let mut llrs = vec![vec![0.0; 2 * slots]; k_users];
    let mut sinr = vec![0.0; k_users];
    let mut rate_acc = 0.0;

    // without priors every slot shares Delta = I, hence the same filters
    let uninformed = priors.iter().all(|p| p.iter().all(|&l| l == 0.0));
    let shared: Option<Vec<CVector>> = uninformed.then(|| {
        (0..k_users)
            .map(|k| mmse_filter(&ctx.h_eff, &Delta::identity(k_users, k), nr))
            .collect()
    });

    let mut slot_priors = vec![[0.0; 2]; k_users];
    let mut slot_sinr = vec![0.0; k_users];
    for (t, y) in ctx.rx_slots.iter().enumerate() {
        for (k, p) in slot_priors.iter_mut().enumerate() {
            *p = [priors[k][2 * t], priors[k][2 * t + 1]];
        }
        let soft = soft_symbols(&slot_priors, e_x);
        for k in 0..k_users {
            let y_k = sic_cancel(y, &ctx.h_eff, &soft, k);
            let w_k = match &shared {
                Some(ws) => ws[k].clone(),
                None => mmse_filter(&ctx.h_eff, &Delta::for_user(&soft, k, e_x), nr),
            };
            let d = detection::detect_user(&w_k, &y_k, &ctx.h_eff, k, slot_priors[k], e_x)?;
            llrs[k][2 * t] = d.extrinsic[0];
            llrs[k][2 * t + 1] = d.extrinsic[1];
            slot_sinr[k] = sinr_sic(d.mu, d.eta2, e_x);
            sinr[k] += slot_sinr[k];
        }
        rate_acc += detection::sum_rate(&slot_sinr);
    }
    let slots_f = slots as f64;
    sinr.iter_mut().for_each(|s| *s /= slots_f);
    Ok(FrameDetection {
        llrs,
        sinr,
        sum_rate: rate_acc / slots_f,
    })
}

/// Decodes each user's detector LLRs independently.
pub fn decode_users(code: &LdpcCode, llrs: &[Vec<f64>], bp_iterations: usize) -> Vec<BpOutput> {
    llrs.iter()
        .map(|l| bp_decode(code, l, bp_iterations))
        .collect()
}

/// Message bit errors per user for decoded or demapped codewords.
pub fn message_errors(code: &LdpcCode, ctx: &FrameContext, words: &[Vec<u8>]) -> Vec<usize> {
    words
        .iter()
        .zip(&ctx.messages)
        .map(|(w, m)| {
            code.extract_message(w)
                .iter()
                .zip(m)
                .filter(|(a, b)| a != b)
                .count()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    /// 1-based receiver pass.
    pub iteration: usize,
    pub bit_errors: Vec<usize>,
    pub ber: Vec<f64>,
    pub sinr: Vec<f64>,
    pub sum_rate: f64,
    pub decoder_converged: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IddFrameResult {
    pub stats: Vec<IterationStats>,
    /// Decoded messages after the last pass.
    pub decoded: Vec<Vec<u8>>,
}

/// Runs `idd_iterations` detector/decoder passes over one frame.
pub fn run_idd_frame(
    ctx: &FrameContext,
    code: &LdpcCode,
    idd_iterations: usize,
    bp_iterations: usize,
) -> Result<IddFrameResult> {
    assert!(
        idd_iterations >= 1,
        "at least one IDD iteration is required"
    );
    let mut priors = vec![vec![0.0; code.n()]; ctx.num_users()];
    let mut stats = Vec::with_capacity(idd_iterations);
    let mut decoded = Vec::new();
    for iteration in 1..=idd_iterations {
        let det = detect_frame(ctx, &priors)?;
        let outs = decode_users(code, &det.llrs, bp_iterations);
        let words: Vec<Vec<u8>> = outs.iter().map(|o| o.hard_bits.clone()).collect();
        let bit_errors = message_errors(code, ctx, &words);
        stats.push(IterationStats {
            iteration,
            ber: bit_errors
                .iter()
                .map(|&e| e as f64 / code.k() as f64)
                .collect(),
            bit_errors,
            sinr: det.sinr,
            sum_rate: det.sum_rate,
            decoder_converged: outs.iter().map(|o| o.converged).collect(),
        });
        decoded = words.iter().map(|w| code.extract_message(w)).collect();
        priors = outs.into_iter().map(|o| o.extrinsic).collect();
    }
    Ok(IddFrameResult { stats, decoded })
}

/// Hard QPSK decisions on the linear MMSE estimates `x^ = W y`, no
/// decoding. Returns the `n` coded bits of each user.
pub fn baseline_uncoded_detect(ctx: &FrameContext) -> Vec<Vec<u8>> {
    let estimates: Vec<CVector> = ctx.rx_slots.iter().map(|y| &ctx.w * y).collect();
    (0..ctx.num_users())
        .map(|k| {
            let symbols: Vec<Complex64> = estimates.iter().map(|x| x[k]).collect();
            hard_demap(&symbols)
        })
        .collect()
}

/// Sum-rate of the linear MMSE bank without cancellation.
pub fn linear_sum_rate(ctx: &FrameContext) -> f64 {
    let sinrs: Vec<f64> = (0..ctx.num_users())
        .map(|k| sinr_no_sic(&ctx.w, &ctx.h_eff, ctx.cs.e_x, ctx.cs.sigma_n2, k))
        .collect();
    detection::sum_rate(&sinrs)
}
