//! Two-phase encoding and decoding against a realized codebook set.
//!
//! Phase 1 carries (u-bin, encrypted w-bin low digit, w-bin remainder);
//! Phase 2 carries (v-bin, pad randomization index). The decoder recovers u
//! from the side information E, holds the ciphertext, then in Phase 2
//! recovers v from T, rebuilds the pad from kappa and the randomization
//! index, unwraps the w-bin and decodes w.

use serde::Serialize;

use crate::error::Result;
use crate::region::ScenarioConfig;
use crate::seed;

use super::books::{ChannelMode, CodebookSet};
use super::otp::{combine_key, join_w_bin, otp_add, otp_sub, split_w_bin};
use super::typicality::BoundContext;

const STREAM_SRC: u64 = 0x731;
const STREAM_L22: u64 = 0x732;
const STREAM_CH1: u64 = 0x733;
const STREAM_CH2: u64 = 0x734;
const STREAM_TRIAL: u64 = 0x735;

/// Phase-1 payload (all indices 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phase1Payload {
    /// Bin of the chosen u-word.
    pub l11: u64,
    /// One-time-padded low digit of the w-bin, in [1..N_K].
    pub c1: u64,
    /// Clear remainder of the w-bin, in [1..N_b2].
    pub b2: u64,
}

/// Phase-2 payload (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phase2Payload {
    /// Bin of the chosen v-word.
    pub l21: u64,
    /// Pad randomization index, uniform in [1..N_K1].
    pub l22: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EncodeOutcome {
    pub p1: Phase1Payload,
    pub p2: Phase2Payload,
    pub u_idx: u64,
    pub v_idx: u64,
    pub w_idx: u64,
    /// Bin of the chosen w-word, before the split.
    pub b_w: u64,
    pub b1: u64,
    pub k2: u64,
    pub k: u64,
    pub err_u: bool,
    pub err_v: bool,
    pub err_w: bool,
}

impl EncodeOutcome {
    pub fn encoder_error(&self) -> bool {
        self.err_u || self.err_v || self.err_w
    }
}

fn first_typical_in_book(book: &[u16], n: usize, bound: &BoundContext) -> Option<u64> {
    for (idx, word) in book.chunks_exact(n).enumerate() {
        if bound.is_typical(word) {
            return Some(idx as u64);
        }
    }
    None
}

/// Deterministic part of the encoder: everything except the draw of l22.
/// On a failed typicality search the level falls back to word 1 and the
/// corresponding error flag is set; indices and payloads are still produced.
pub fn encode_with_l22(cb: &CodebookSet, s: &[u16], l22: u64) -> EncodeOutcome {
    let n = cb.params.n;
    let delta = cb.params.delta;
    debug_assert_eq!(s.len(), n);

    let bound_u = cb.enc_su.bind(&[s], delta);
    let (u_idx, err_u) = match first_typical_in_book(&cb.u_book, n, &bound_u) {
        Some(i) => (i, false),
        None => (0, true),
    };
    let u_word = cb.u_word(u_idx);

    let v_level = cb.v_level(u_idx);
    let bound_v = cb.enc_usv.bind(&[u_word, s], delta);
    let (v_idx, err_v) = match first_typical_in_book(&v_level.words, n, &bound_v) {
        Some(i) => (i, false),
        None => (0, true),
    };
    let v_word = v_level.word(v_idx);

    let w_level = cb.w_level(u_idx, v_idx);
    let bound_w = cb.enc_uvsw.bind(&[u_word, v_word, s], delta);
    let (w_idx, err_w) = match first_typical_in_book(&w_level.words, n, &bound_w) {
        Some(i) => (i, false),
        None => (0, true),
    };

    let b_w = cb.bin_w.bin_of(w_idx) + 1;
    let (b1, b2) = split_w_bin(b_w, cb.dims.n_k);
    let k2 = v_level.kappa[v_idx as usize];
    let k = combine_key(l22, k2, cb.dims.n_k2);
    let c1 = otp_add(b1, k, cb.dims.n_k);
    EncodeOutcome {
        p1: Phase1Payload {
            l11: cb.bin_u.bin_of(u_idx) + 1,
            c1,
            b2,
        },
        p2: Phase2Payload {
            l21: cb.bin_v.bin_of(v_idx) + 1,
            l22,
        },
        u_idx,
        v_idx,
        w_idx,
        b_w,
        b1,
        k2,
        k,
        err_u,
        err_v,
        err_w,
    }
}

/// Full encoder: draws the pad randomization index from the trial stream.
pub fn encode(cb: &CodebookSet, s: &[u16], trial_seed: u64) -> EncodeOutcome {
    use rand::Rng;
    let mut rng = seed::rng_from(trial_seed, &[STREAM_L22]);
    let l22 = rng.gen_range(1..=cb.dims.n_k1);
    encode_with_l22(cb, s, l22)
}

/// Bin decode with candidates counted by distinct word content: exactly one
/// distinct typical content succeeds (smallest index wins); zero or two and
/// more fall back to the bin's first word, flagged.
fn decode_in_bin(cands: &[(u64, &[u16])], bound: &BoundContext, fallback: u64) -> (u64, bool) {
    let mut chosen: Option<(u64, &[u16])> = None;
    let mut ambiguous = false;
    for &(idx, word) in cands {
        if bound.is_typical(word) {
            match chosen {
                None => chosen = Some((idx, word)),
                Some((_, first)) => {
                    if first != word {
                        ambiguous = true;
                    }
                }
            }
        }
    }
    match chosen {
        Some((idx, _)) if !ambiguous => (idx, false),
        _ => (fallback, true),
    }
}

#[cfg(test)]
pub(crate) fn decode_in_bin_for_tests(
    cands: &[(u64, &[u16])],
    bound: &BoundContext,
    fallback: u64,
) -> (u64, bool) {
    decode_in_bin(cands, bound, fallback)
}

/// Ciphertext held between the phases, plus Phase-1 status.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeldState {
    pub c1: u64,
    pub b2: u64,
    pub u_idx: u64,
    pub dec1_err: bool,
    pub pipe_overflow: bool,
}

pub enum Phase1Input<'a> {
    /// Ideal bit pipe: the payload arrives verbatim.
    Ideal(&'a Phase1Payload),
    /// Random-coding mode: the raw channel output word.
    ChannelOutput(&'a [u16]),
}

pub enum Phase2Input<'a> {
    Ideal(&'a Phase2Payload),
    ChannelOutput(&'a [u16]),
}

fn x1_flat(cb: &CodebookSet, l11: u64, c1: u64, b2: u64) -> u64 {
    ((l11 - 1) * cb.dims.n_k + (c1 - 1)) * cb.dims.n_b2 + (b2 - 1)
}

fn x2_flat(cb: &CodebookSet, l21: u64, l22: u64) -> u64 {
    (l21 - 1) * cb.dims.n_k1 + (l22 - 1)
}

/// Decode the unique channel-codebook index jointly typical with `y`.
fn decode_channel_index(
    cb: &CodebookSet,
    book: &[u16],
    word_len: usize,
    test: &super::typicality::TypicalityTest,
    y: &[u16],
) -> (u64, bool) {
    let bound = test.bind(&[y], cb.params.delta);
    let mut found: Option<u64> = None;
    let mut err = false;
    for (idx, word) in book.chunks_exact(word_len).enumerate() {
        if bound.is_typical(word) {
            if found.is_some() {
                err = true;
                break;
            }
            found = Some(idx as u64);
        }
    }
    match found {
        Some(i) => (i, err),
        None => (0, true),
    }
}

/// Phase-1 decoding: recover u from the bin and the side information E,
/// reconstruct via h1, and hold the encrypted index for Phase 2.
pub fn decode_phase1(
    cb: &CodebookSet,
    input: Phase1Input<'_>,
    e: &[u16],
) -> (Vec<u16>, HeldState) {
    let n = cb.params.n;
    let (l11, c1, b2, mut dec_err, pipe_overflow) = match input {
        Phase1Input::Ideal(p) => (p.l11, p.c1, p.b2, false, cb.dims.pipe_overflow),
        Phase1Input::ChannelOutput(y) => {
            let book = cb.x1_book.as_ref().expect("random-code x1 book");
            let (flat, err) = decode_channel_index(
                cb,
                book,
                cb.dims.n1,
                cb.dec_x1.as_ref().expect("x1 test"),
                y,
            );
            let b2 = flat % cb.dims.n_b2 + 1;
            let rest = flat / cb.dims.n_b2;
            let c1 = rest % cb.dims.n_k + 1;
            let l11 = rest / cb.dims.n_k + 1;
            (l11, c1, b2, err, false)
        }
    };

    let bin = cb.bin_u.range(l11 - 1);
    let cands: Vec<(u64, &[u16])> = bin.clone().map(|j| (j, cb.u_word(j))).collect();
    let bound = cb.dec_eu.bind(&[e], cb.params.delta);
    let (u_idx, u_err) = decode_in_bin(&cands, &bound, bin.start);
    dec_err |= u_err;

    let ne = cb.sizes.e;
    let u_word = cb.u_word(u_idx);
    let shat1: Vec<u16> = (0..n)
        .map(|i| cb.h1[u_word[i] as usize * ne + e[i] as usize] as u16)
        .collect();
    (
        shat1,
        HeldState {
            c1,
            b2,
            u_idx,
            dec1_err: dec_err,
            pipe_overflow,
        },
    )
}

/// Phase-2 result: reconstruction, the decoded level indices and status.
#[derive(Debug, Clone)]
pub struct Phase2Outcome {
    pub shat2: Vec<u16>,
    pub v_idx: u64,
    pub w_idx: u64,
    pub dec2_err: bool,
}

/// Phase-2 decoding: recover v from T, rebuild the pad via kappa, unwrap the
/// w-bin and decode w; reconstruct via h2.
pub fn decode_phase2(
    cb: &CodebookSet,
    input: Phase2Input<'_>,
    t: &[u16],
    held: &HeldState,
) -> Phase2Outcome {
    let n = cb.params.n;
    let (l21, l22, mut dec_err) = match input {
        Phase2Input::Ideal(p) => (p.l21, p.l22, false),
        Phase2Input::ChannelOutput(y) => {
            let book = cb.x2_book.as_ref().expect("random-code x2 book");
            let (flat, err) = decode_channel_index(
                cb,
                book,
                cb.dims.n2,
                cb.dec_x2.as_ref().expect("x2 test"),
                y,
            );
            let l22 = flat % cb.dims.n_k1 + 1;
            let l21 = flat / cb.dims.n_k1 + 1;
            (l21, l22, err)
        }
    };

    let u_word = cb.u_word(held.u_idx);
    let v_level = cb.v_level(held.u_idx);
    let bin = cb.bin_v.range(l21 - 1);
    let cands: Vec<(u64, &[u16])> = bin.clone().map(|j| (j, v_level.word(j))).collect();
    let bound = cb.dec_utv.bind(&[u_word, t], cb.params.delta);
    let (v_idx, v_err) = decode_in_bin(&cands, &bound, bin.start);
    dec_err |= v_err;

    let k2_hat = v_level.kappa[v_idx as usize];
    let k_hat = combine_key(l22, k2_hat, cb.dims.n_k2);
    let b1_hat = otp_sub(held.c1, k_hat, cb.dims.n_k);
    let b_hat = join_w_bin(b1_hat, held.b2, cb.dims.n_k);
    let w_bin = if b_hat > cb.dims.n_w {
        dec_err = true;
        0
    } else {
        b_hat - 1
    };

    let v_word = v_level.word(v_idx);
    let w_level = cb.w_level(held.u_idx, v_idx);
    let wbin_range = cb.bin_w.range(w_bin);
    let wcands: Vec<(u64, &[u16])> = wbin_range.clone().map(|j| (j, w_level.word(j))).collect();
    let bound_w = cb.dec_uvtw.bind(&[u_word, v_word, t], cb.params.delta);
    let (w_idx, w_err) = decode_in_bin(&wcands, &bound_w, wbin_range.start);
    dec_err |= w_err;

    let (nv, nt) = (cb.sizes.v, cb.sizes.t);
    let w_word = w_level.word(w_idx);
    let shat2: Vec<u16> = (0..n)
        .map(|i| {
            cb.h2[(w_word[i] as usize * nv + v_word[i] as usize) * nt + t[i] as usize] as u16
        })
        .collect();
    Phase2Outcome {
        shat2,
        v_idx,
        w_idx,
        dec2_err: dec_err,
    }
}

/// Everything observed in one simulated transmission.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub s: Vec<u16>,
    pub t: Vec<u16>,
    pub e: Vec<u16>,
    pub enc: EncodeOutcome,
    pub x1: Option<Vec<u16>>,
    pub y1: Option<Vec<u16>>,
    pub x2: Option<Vec<u16>>,
    pub y2: Option<Vec<u16>>,
    pub shat1: Vec<u16>,
    pub shat2: Vec<u16>,
    pub dec1_err: bool,
    pub dec2_err: bool,
    pub pipe_overflow: bool,
    pub d1: f64,
    pub d2: f64,
}

/// Run one trial end to end; deterministic given the trial seed.
pub fn run_trial(cb: &CodebookSet, sc: &ScenarioConfig<f64>, trial_seed: u64) -> Result<TrialRecord> {
    let n = cb.params.n;
    let (s, t, e) = sc.src.sample_iid(n, seed::derive(trial_seed, &[STREAM_SRC]));
    let enc = encode(cb, &s, trial_seed);

    let (x1, y1, shat1, held) = match cb.params.channel_mode {
        ChannelMode::IdealPipe => {
            let (shat1, held) = decode_phase1(cb, Phase1Input::Ideal(&enc.p1), &e);
            (None, None, shat1, held)
        }
        ChannelMode::RandomCode => {
            let idx = x1_flat(cb, enc.p1.l11, enc.p1.c1, enc.p1.b2);
            let x = cb.x1_word(idx).to_vec();
            let y = sc.ch1.transmit(&x, seed::derive(trial_seed, &[STREAM_CH1]))?;
            let (shat1, held) = decode_phase1(cb, Phase1Input::ChannelOutput(&y), &e);
            (Some(x), Some(y), shat1, held)
        }
    };

    let (x2, y2, out2) = match cb.params.channel_mode {
        ChannelMode::IdealPipe => {
            let out = decode_phase2(cb, Phase2Input::Ideal(&enc.p2), &t, &held);
            (None, None, out)
        }
        ChannelMode::RandomCode => {
            let idx = x2_flat(cb, enc.p2.l21, enc.p2.l22);
            let x = cb.x2_word(idx).to_vec();
            let y = sc.ch2.transmit(&x, seed::derive(trial_seed, &[STREAM_CH2]))?;
            let out = decode_phase2(cb, Phase2Input::ChannelOutput(&y), &t, &held);
            (Some(x), Some(y), out)
        }
    };
    let shat2 = out2.shat2.clone();
    let dec2_err = out2.dec2_err;

    let nf = n as f64;
    let d1 = s
        .iter()
        .zip(&shat1)
        .map(|(&a, &b)| sc.distortion.d(a as usize, b as usize))
        .sum::<f64>()
        / nf;
    let d2 = s
        .iter()
        .zip(&shat2)
        .map(|(&a, &b)| sc.distortion.d(a as usize, b as usize))
        .sum::<f64>()
        / nf;

    Ok(TrialRecord {
        s,
        t,
        e,
        enc,
        x1,
        y1,
        x2,
        y2,
        shat1,
        shat2,
        dec1_err: held.dec1_err,
        dec2_err,
        pipe_overflow: held.pipe_overflow,
        d1,
        d2,
    })
}

/// Slim per-trial row for CSV export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub enc_err: bool,
    pub dec1_err: bool,
    pub dec2_err: bool,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub trials: usize,
    pub mean_d1: f64,
    pub mean_d2: f64,
    pub enc_err_rate: f64,
    pub dec1_err_rate: f64,
    pub dec2_err_rate: f64,
    pub pipe_overflow_rate: f64,
    pub n_k1: u64,
    pub n_k2: u64,
    /// Single-letter targets of the evaluated region point, for side-by-side
    /// reading of the Monte Carlo means.
    pub d1_bound: f64,
    pub d2_bound: f64,
    pub leakage_bound: f64,
    pub seed: u64,
}

/// Monte Carlo experiment over independent trials with per-trial derived
/// seeds; deterministic given the experiment seed.
pub fn run_experiment(
    cb: &CodebookSet,
    sc: &ScenarioConfig<f64>,
    trials: usize,
) -> Result<(ExperimentSummary, Vec<TrialRow>)> {
    assert!(trials >= 1, "at least one trial");
    let mut rows = Vec::with_capacity(trials);
    let mut sums = [0.0f64; 6];
    for trial in 0..trials {
        let trial_seed = seed::derive(cb.params.seed, &[STREAM_TRIAL, trial as u64]);
        let rec = run_trial(cb, sc, trial_seed)?;
        let row = TrialRow {
            trial,
            enc_err: rec.enc.encoder_error(),
            dec1_err: rec.dec1_err,
            dec2_err: rec.dec2_err,
            d1: rec.d1,
            d2: rec.d2,
        };
        sums[0] += rec.d1;
        sums[1] += rec.d2;
        sums[2] += row.enc_err as u8 as f64;
        sums[3] += row.dec1_err as u8 as f64;
        sums[4] += row.dec2_err as u8 as f64;
        sums[5] += rec.pipe_overflow as u8 as f64;
        rows.push(row);
    }
    let tf = trials as f64;
    Ok((
        ExperimentSummary {
            n: cb.params.n,
            n1: cb.dims.n1,
            n2: cb.dims.n2,
            trials,
            mean_d1: sums[0] / tf,
            mean_d2: sums[1] / tf,
            enc_err_rate: sums[2] / tf,
            dec1_err_rate: sums[3] / tf,
            dec2_err_rate: sums[4] / tf,
            pipe_overflow_rate: sums[5] / tf,
            n_k1: cb.dims.n_k1,
            n_k2: cb.dims.n_k2,
            d1_bound: cb.point.d1,
            d2_bound: cb.point.d2,
            leakage_bound: cb.point.leakage_lb,
            seed: cb.params.seed,
        },
        rows,
    ))
}
