//! Layered random codebooks with binning and the secret-key table.
//!
//! Book sizes follow the exponent recipe `⌈2^{n(I + delta)}⌉` words split
//! into `⌈2^{n(I_cond + 2 delta)}⌉` bins, where `I` is the description rate
//! of the level given its parents and `I_cond` additionally conditions on
//! the receiver side information; the quotient leaves roughly
//! `2^{n(I_side - delta)}` words per bin for the side information to resolve.
//! Child levels are drawn lazily per parent from per-parent derived seeds,
//! so materialization order never changes the books.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dmc::capacity;
use crate::error::{Error, Result};
use crate::prob::{assemble_joint, sample_index, AuxChannel, CondKernel, JointDist};
use crate::region::{
    evaluate_point_with_budgets, optimal_reconstructions, RegionPoint, ScenarioConfig,
};
use crate::seed;

use super::typicality::TypicalityTest;

/// Default cap on the nominal total number of codebook words.
pub const DEFAULT_BOOK_CAP: u64 = 1 << 24;

/// Capacity tolerance used when sizing the ideal pipe and channel books.
const BUILD_CAPACITY_TOL: f64 = 1e-9;

const STREAM_U: u64 = 0x75;
const STREAM_V: u64 = 0x76;
const STREAM_W: u64 = 0x77;
const STREAM_KAPPA: u64 = 0x6b;
const STREAM_X1: u64 = 0x7831;
const STREAM_X2: u64 = 0x7832;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    IdealPipe,
    RandomCode,
}

/// Simulation parameters for one experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    pub delta: f64,
    pub channel_mode: ChannelMode,
    pub seed: u64,
    #[serde(default = "default_book_cap")]
    pub book_cap: u64,
}

fn default_book_cap() -> u64 {
    DEFAULT_BOOK_CAP
}

impl SimParams {
    pub fn new(n: usize, delta: f64, channel_mode: ChannelMode, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::AlphabetMismatch {
                context: "blocklength must be at least 1".into(),
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::AlphabetMismatch {
                context: format!("typicality slack delta must be in (0,1), got {delta}"),
            });
        }
        Ok(Self {
            n,
            delta,
            channel_mode,
            seed,
            book_cap: DEFAULT_BOOK_CAP,
        })
    }
}

/// Balanced contiguous partition of `book` words into at most `requested`
/// bins: bins are surjective and sizes differ by at most one.
#[derive(Debug, Clone, Copy)]
pub struct Binning {
    pub book: u64,
    pub bins: u64,
    base: u64,
    extra: u64,
}

impl Binning {
    pub fn new(book: u64, requested: u64) -> Self {
        let bins = requested.clamp(1, book.max(1));
        Self {
            book,
            bins,
            base: book / bins,
            extra: book % bins,
        }
    }

    /// 0-based bin of a 0-based word index.
    pub fn bin_of(&self, idx: u64) -> u64 {
        let cut = self.extra * (self.base + 1);
        if idx < cut {
            idx / (self.base + 1)
        } else {
            self.extra + (idx - cut) / self.base
        }
    }

    /// 0-based index within the word's bin.
    pub fn within_of(&self, idx: u64) -> u64 {
        let cut = self.extra * (self.base + 1);
        if idx < cut {
            idx % (self.base + 1)
        } else {
            (idx - cut) % self.base
        }
    }

    /// Word-index range of a 0-based bin.
    pub fn range(&self, bin: u64) -> std::ops::Range<u64> {
        if bin < self.extra {
            let start = bin * (self.base + 1);
            start..start + self.base + 1
        } else {
            let start = self.extra * (self.base + 1) + (bin - self.extra) * self.base;
            start..start + self.base
        }
    }
}

/// All derived sizes of one codebook build.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BookDims {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub n_u_tilde: u64,
    pub n_u: u64,
    pub n_v_tilde: u64,
    pub n_v: u64,
    pub n_w_tilde: u64,
    pub n_w: u64,
    pub n_k1: u64,
    pub n_k2: u64,
    pub n_k: u64,
    pub n_b2: u64,
    pub x1_words: u64,
    pub x2_words: u64,
    /// log2 of the Phase-1 payload cardinality N_U * N_K * N_b2.
    pub phase1_payload_bits: f64,
    /// True when the ideal pipe cannot carry the Phase-1 payload within
    /// rho1 C1 per source symbol.
    pub pipe_overflow: bool,
}

/// ⌈2^bits⌉ with a snap to nearest for exponents that are integers up to
/// floating-point noise.
fn ceil_2pow(bits: f64) -> u64 {
    let v = bits.exp2();
    let nearest = v.round();
    let snapped = if (v - nearest).abs() < 1e-6 * nearest.max(1.0) {
        nearest
    } else {
        v.ceil()
    };
    snapped.max(1.0) as u64
}

fn ceil_ratio(a: f64) -> usize {
    (a - 1e-9).ceil().max(1.0) as usize
}

/// Exponents (in bits per symbol) that size the books.
#[derive(Debug, Clone, Copy)]
struct RateExponents {
    i_u_s: f64,
    i_u_s_given_e: f64,
    i_v_s_given_u: f64,
    i_v_s_given_tu: f64,
    i_w_s_given_uv: f64,
    i_w_s_given_uvt: f64,
    r_k1: f64,
    r_k2: f64,
}

#[allow(clippy::too_many_arguments)]
fn compute_dims(
    n: usize,
    delta: f64,
    rho1: f64,
    rho2: f64,
    ex: &RateExponents,
    mode: ChannelMode,
    c1: f64,
) -> BookDims {
    let nf = n as f64;
    let n_u_tilde = ceil_2pow(nf * (ex.i_u_s + delta));
    let n_u = ceil_2pow(nf * (ex.i_u_s_given_e + 2.0 * delta)).min(n_u_tilde);
    let n_v_tilde = ceil_2pow(nf * (ex.i_v_s_given_u + delta));
    let n_v = ceil_2pow(nf * (ex.i_v_s_given_tu + 2.0 * delta)).min(n_v_tilde);
    let n_w_tilde = ceil_2pow(nf * (ex.i_w_s_given_uv + delta));
    let n_w = ceil_2pow(nf * (ex.i_w_s_given_uvt + 2.0 * delta)).min(n_w_tilde);
    let n_k1 = ceil_2pow(nf * ex.r_k1.max(0.0));
    let n_k2 = ceil_2pow(nf * ex.r_k2.max(0.0));
    let n_k = n_k1 * n_k2;
    let n_b2 = n_w.div_ceil(n_k);
    let n1 = ceil_ratio(rho1 * nf);
    let n2 = ceil_ratio(rho2 * nf);
    let (x1_words, x2_words) = match mode {
        ChannelMode::IdealPipe => (0, 0),
        ChannelMode::RandomCode => (n_u * n_k * n_b2, n_v * n_k1),
    };
    let phase1_payload_bits = ((n_u * n_k * n_b2) as f64).log2();
    let pipe_overflow = phase1_payload_bits / n1 as f64 > c1 + 1e-9;
    BookDims {
        n,
        n1,
        n2,
        n_u_tilde,
        n_u,
        n_v_tilde,
        n_v,
        n_w_tilde,
        n_w,
        n_k1,
        n_k2,
        n_k,
        n_b2,
        x1_words,
        x2_words,
        phase1_payload_bits,
        pipe_overflow,
    }
}

fn total_words(d: &BookDims) -> u128 {
    let nu = d.n_u_tilde as u128;
    let nv = d.n_v_tilde as u128;
    let nw = d.n_w_tilde as u128;
    nu + nu * nv + nu * nv * nw + d.x1_words as u128 + d.x2_words as u128
}

/// One per-parent V level: codewords and the key table.
#[derive(Debug)]
pub(crate) struct VLevel {
    pub(crate) words: Vec<u16>,
    /// kappa maps each word (identified by its (bin, within-bin) slot) to a
    /// key symbol in [1..N_K2]; stored flat by word index.
    pub(crate) kappa: Vec<u64>,
    n: usize,
}

impl VLevel {
    pub(crate) fn word(&self, idx: u64) -> &[u16] {
        let n = self.n;
        &self.words[idx as usize * n..(idx as usize + 1) * n]
    }
}

#[derive(Debug)]
pub(crate) struct WLevel {
    pub(crate) words: Vec<u16>,
    n: usize,
}

impl WLevel {
    pub(crate) fn word(&self, idx: u64) -> &[u16] {
        let n = self.n;
        &self.words[idx as usize * n..(idx as usize + 1) * n]
    }
}

pub(crate) struct AlphabetSizes {
    pub s: usize,
    pub t: usize,
    pub e: usize,
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

/// The realized codebooks of one build, plus everything the encoder,
/// decoders and oracle need to run against them.
pub struct CodebookSet {
    pub dims: BookDims,
    pub params: SimParams,
    pub(crate) aux: AuxChannel<f64>,
    pub(crate) point: RegionPoint<f64>,
    pub(crate) h1: Vec<usize>,
    pub(crate) h2: Vec<usize>,
    pub(crate) sizes: AlphabetSizes,
    pub(crate) v_given_u: CondKernel<f64>,
    pub(crate) w_given_uv: CondKernel<f64>,
    pub(crate) enc_su: TypicalityTest,
    pub(crate) enc_usv: TypicalityTest,
    pub(crate) enc_uvsw: TypicalityTest,
    pub(crate) dec_eu: TypicalityTest,
    pub(crate) dec_utv: TypicalityTest,
    pub(crate) dec_uvtw: TypicalityTest,
    pub(crate) dec_x1: Option<TypicalityTest>,
    pub(crate) dec_x2: Option<TypicalityTest>,
    pub(crate) bin_u: Binning,
    pub(crate) bin_v: Binning,
    pub(crate) bin_w: Binning,
    pub(crate) u_book: Vec<u16>,
    pub(crate) v_levels: Mutex<HashMap<u64, Arc<VLevel>>>,
    pub(crate) w_levels: Mutex<HashMap<(u64, u64), Arc<WLevel>>>,
    pub(crate) x1_book: Option<Vec<u16>>,
    pub(crate) x2_book: Option<Vec<u16>>,
}

impl CodebookSet {
    pub fn region_point(&self) -> &RegionPoint<f64> {
        &self.point
    }

    pub fn aux(&self) -> &AuxChannel<f64> {
        &self.aux
    }

    /// Alphabet sizes as (|S|, |T|, |E|, |U|, |V|, |W|).
    pub fn alphabet_sizes(&self) -> (usize, usize, usize, usize, usize, usize) {
        let z = &self.sizes;
        (z.s, z.t, z.e, z.u, z.v, z.w)
    }

    pub(crate) fn u_word(&self, idx: u64) -> &[u16] {
        let n = self.params.n;
        &self.u_book[idx as usize * n..(idx as usize + 1) * n]
    }

    /// Per-parent V book, drawn on first touch from a parent-derived seed.
    pub(crate) fn v_level(&self, u_idx: u64) -> Arc<VLevel> {
        let mut cache = self.v_levels.lock().unwrap();
        if let Some(level) = cache.get(&u_idx) {
            return Arc::clone(level);
        }
        let n = self.params.n;
        let parent: Vec<u16> = self.u_word(u_idx).to_vec();
        let mut rng = seed::rng_from(self.params.seed, &[STREAM_V, u_idx]);
        let count = self.dims.n_v_tilde as usize;
        let mut words = Vec::with_capacity(count * n);
        for _ in 0..count {
            for &pu in &parent {
                words.push(self.v_given_u.sample(&[pu as usize], &mut rng) as u16);
            }
        }
        // Key table: one uniform map per (parent, bin), flattened by word.
        let mut kappa = vec![1u64; count];
        for bin in 0..self.bin_v.bins {
            let mut krng = seed::rng_from(self.params.seed, &[STREAM_KAPPA, u_idx, bin]);
            for idx in self.bin_v.range(bin) {
                kappa[idx as usize] = krng.gen_range(1..=self.dims.n_k2);
            }
        }
        let level = Arc::new(VLevel { words, kappa, n });
        cache.insert(u_idx, Arc::clone(&level));
        level
    }

    pub(crate) fn w_level(&self, u_idx: u64, v_idx: u64) -> Arc<WLevel> {
        let mut cache = self.w_levels.lock().unwrap();
        if let Some(level) = cache.get(&(u_idx, v_idx)) {
            return Arc::clone(level);
        }
        let n = self.params.n;
        let pu: Vec<u16> = self.u_word(u_idx).to_vec();
        let pv: Vec<u16> = self.v_level(u_idx).word(v_idx).to_vec();
        let mut rng = seed::rng_from(self.params.seed, &[STREAM_W, u_idx, v_idx]);
        let count = self.dims.n_w_tilde as usize;
        let mut words = Vec::with_capacity(count * n);
        for _ in 0..count {
            for i in 0..n {
                words.push(
                    self.w_given_uv
                        .sample(&[pu[i] as usize, pv[i] as usize], &mut rng)
                        as u16,
                );
            }
        }
        let level = Arc::new(WLevel { words, n });
        cache.insert((u_idx, v_idx), Arc::clone(&level));
        level
    }

    pub(crate) fn x1_word(&self, idx: u64) -> &[u16] {
        let n1 = self.dims.n1;
        let book = self.x1_book.as_ref().expect("x1 book in random-code mode");
        &book[idx as usize * n1..(idx as usize + 1) * n1]
    }

    pub(crate) fn x2_word(&self, idx: u64) -> &[u16] {
        let n2 = self.dims.n2;
        let book = self.x2_book.as_ref().expect("x2 book in random-code mode");
        &book[idx as usize * n2..(idx as usize + 1) * n2]
    }
}

/// Draw all codebooks for an (aux, scenario, parameters) triple.
pub fn build_codebooks(
    aux: &AuxChannel<f64>,
    sc: &ScenarioConfig<f64>,
    sp: &SimParams,
) -> Result<CodebookSet> {
    let joint = assemble_joint(&sc.src, aux)?;
    let cap1 = capacity(&sc.ch1, BUILD_CAPACITY_TOL)?;
    let cap2 = capacity(&sc.ch2, BUILD_CAPACITY_TOL)?;
    let rho1c1 = sc.rho1 * cap1.capacity;
    let rho2c2 = sc.rho2 * cap2.capacity;
    let point = evaluate_point_with_budgets(aux, sc, rho1c1, rho2c2)?;
    let ex = RateExponents {
        i_u_s: joint.mutual_info(&["U"], &["S"])?,
        i_u_s_given_e: point.terms.i_u_s_given_e,
        i_v_s_given_u: joint.cond_mutual_info(&["V"], &["S"], &["U"])?,
        i_v_s_given_tu: point.terms.i_v_s_given_tu,
        i_w_s_given_uv: joint.cond_mutual_info(&["W"], &["S"], &["U", "V"])?,
        i_w_s_given_uvt: point.terms.i_w_s_given_uvt,
        r_k1: point.r_k1,
        r_k2: point.r_k2,
    };
    let dims = compute_dims(
        sp.n,
        sp.delta,
        sc.rho1,
        sc.rho2,
        &ex,
        sp.channel_mode,
        cap1.capacity,
    );
    let words = total_words(&dims);
    if words > sp.book_cap as u128 {
        let mut max_n = 0usize;
        for cand in (1..sp.n).rev() {
            let d = compute_dims(
                cand,
                sp.delta,
                sc.rho1,
                sc.rho2,
                &ex,
                sp.channel_mode,
                cap1.capacity,
            );
            if total_words(&d) <= sp.book_cap as u128 {
                max_n = cand;
                break;
            }
        }
        return Err(Error::SizeExplosion {
            words,
            cap: sp.book_cap,
            max_n,
        });
    }

    let (recon, _, _) = optimal_reconstructions(&joint, &sc.distortion)?;
    let sizes = AlphabetSizes {
        s: sc.src.s_size(),
        t: sc.src.t_size(),
        e: sc.src.e_size(),
        u: aux.u_size(),
        v: aux.v_size(),
        w: aux.w_size(),
    };

    let p_u = joint.marginal(&["U"])?.mass().to_vec();
    let v_given_u = joint.conditional_kernel(&["U"], "V")?;
    let w_given_uv = joint.conditional_kernel(&["U", "V"], "W")?;

    let enc_su = TypicalityTest::new(&joint.marginal(&["S", "U"])?);
    let enc_usv = TypicalityTest::new(&joint.marginal(&["U", "S", "V"])?);
    let enc_uvsw = TypicalityTest::new(&joint.marginal(&["U", "V", "S", "W"])?);
    let dec_eu = TypicalityTest::new(&joint.marginal(&["E", "U"])?);
    let dec_utv = TypicalityTest::new(&joint.marginal(&["U", "T", "V"])?);
    let dec_uvtw = TypicalityTest::new(&joint.marginal(&["U", "V", "T", "W"])?);

    let mut rng = seed::rng_from(sp.seed, &[STREAM_U]);
    let mut u_book = Vec::with_capacity(dims.n_u_tilde as usize * sp.n);
    for _ in 0..dims.n_u_tilde {
        for _ in 0..sp.n {
            u_book.push(sample_index(&p_u, &mut rng) as u16);
        }
    }

    let (x1_book, x2_book, dec_x1, dec_x2) = match sp.channel_mode {
        ChannelMode::IdealPipe => (None, None, None, None),
        ChannelMode::RandomCode => {
            let mut r1 = seed::rng_from(sp.seed, &[STREAM_X1]);
            let mut x1 = Vec::with_capacity(dims.x1_words as usize * dims.n1);
            for _ in 0..dims.x1_words {
                for _ in 0..dims.n1 {
                    x1.push(sample_index(&cap1.input_dist, &mut r1) as u16);
                }
            }
            let mut r2 = seed::rng_from(sp.seed, &[STREAM_X2]);
            let mut x2 = Vec::with_capacity(dims.x2_words as usize * dims.n2);
            for _ in 0..dims.x2_words {
                for _ in 0..dims.n2 {
                    x2.push(sample_index(&cap2.input_dist, &mut r2) as u16);
                }
            }
            let t1 = TypicalityTest::new(&channel_joint(&cap1.input_dist, &sc.ch1)?);
            let t2 = TypicalityTest::new(&channel_joint(&cap2.input_dist, &sc.ch2)?);
            (Some(x1), Some(x2), Some(t1), Some(t2))
        }
    };

    Ok(CodebookSet {
        bin_u: Binning::new(dims.n_u_tilde, dims.n_u),
        bin_v: Binning::new(dims.n_v_tilde, dims.n_v),
        bin_w: Binning::new(dims.n_w_tilde, dims.n_w),
        dims,
        params: *sp,
        aux: aux.clone(),
        point,
        h1: recon.h1,
        h2: recon.h2,
        sizes,
        v_given_u,
        w_given_uv,
        enc_su,
        enc_usv,
        enc_uvsw,
        dec_eu,
        dec_utv,
        dec_uvtw,
        dec_x1,
        dec_x2,
        u_book,
        v_levels: Mutex::new(HashMap::new()),
        w_levels: Mutex::new(HashMap::new()),
        x1_book,
        x2_book,
    })
}

/// Joint (Y, X) law for channel-word decoding: the candidate axis is X.
fn channel_joint(input_dist: &[f64], ch: &crate::dmc::Channel<f64>) -> Result<JointDist<f64>> {
    let nx = ch.input_size();
    let ny = ch.output_size();
    let mut mass = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            mass[y * nx + x] = input_dist[x] * ch.row(x)[y];
        }
    }
    JointDist::new(
        vec![
            crate::prob::Axis::new("Y", ny),
            crate::prob::Axis::new("X", nx),
        ],
        mass,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::Channel;
    use crate::prob::SourceModel;
    use crate::region::DistortionMeasure;

    fn dsbs_scenario() -> ScenarioConfig<f64> {
        ScenarioConfig::new(
            SourceModel::binary_symmetric(0.1, 0.1).unwrap(),
            Channel::identity(2),
            Channel::identity(2),
            1.0,
            1.0,
            DistortionMeasure::hamming(2),
        )
        .unwrap()
    }

    #[test]
    fn binning_is_balanced_and_surjective() {
        for (book, requested) in [(7u64, 3u64), (19, 9), (8, 8), (5, 11), (1, 1)] {
            let b = Binning::new(book, requested);
            assert!(b.bins <= book);
            let mut seen = vec![0u64; b.bins as usize];
            for idx in 0..book {
                let bin = b.bin_of(idx);
                assert!(b.range(bin).contains(&idx));
                assert_eq!(b.range(bin).start + b.within_of(idx), idx);
                seen[bin as usize] += 1;
            }
            let min = *seen.iter().min().unwrap();
            let max = *seen.iter().max().unwrap();
            assert!(min >= 1, "every bin occupied");
            assert!(max - min <= 1, "bin sizes differ by at most one");
        }
    }

    #[test]
    fn independent_description_sizes_follow_the_exponents() {
        // U independent of S: I(U;S) = 0, n = 8, delta = 0.05 gives
        // 2^0.4 -> 2 words and 2^0.8 -> 2 bins.
        let sc = dsbs_scenario();
        let aux = AuxChannel::new(
            CondKernel::new(vec![2], 2, vec![0.5, 0.5, 0.5, 0.5]).unwrap(),
            CondKernel::deterministic(vec![2, 2], 1, |_| 0).unwrap(),
            CondKernel::deterministic(vec![2, 1, 2], 1, |_| 0).unwrap(),
        )
        .unwrap();
        let sp = SimParams::new(8, 0.05, ChannelMode::IdealPipe, 3).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        assert_eq!(cb.dims.n_u_tilde, 2);
        assert_eq!(cb.dims.n_u, 2);
    }

    #[test]
    fn book_sizes_match_ceiling_formulas_on_the_anchor() {
        // U const, V = S, W const on the doubly symmetric source.
        let sc = dsbs_scenario();
        let aux = AuxChannel::copies(2, false, true, false);
        let sp = SimParams::new(8, 0.2, ChannelMode::IdealPipe, 1).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        let joint = assemble_joint(&sc.src, &aux).unwrap();
        let n = 8.0f64;
        let exp = |bits: f64| -> u64 { ceil_2pow(bits) };
        let i_v_s_u = joint.cond_mutual_info(&["V"], &["S"], &["U"]).unwrap();
        let i_v_s_tu = joint.cond_mutual_info(&["V"], &["S"], &["T", "U"]).unwrap();
        assert_eq!(cb.dims.n_v_tilde, exp(n * (i_v_s_u + 0.2)));
        assert_eq!(cb.dims.n_v, exp(n * (i_v_s_tu + 0.4)));
        let r_k2 = cb.point.r_k2;
        assert_eq!(cb.dims.n_k2, exp(n * r_k2));
        assert_eq!(cb.dims.n_k1, 1);
        assert_eq!(cb.dims.n_b2, cb.dims.n_w.div_ceil(cb.dims.n_k));
    }

    #[test]
    fn constant_alphabets_yield_single_content_books_and_trivial_key() {
        let sc = dsbs_scenario();
        let aux = AuxChannel::copies(2, true, false, false); // V, W constant
        let sp = SimParams::new(6, 0.1, ChannelMode::IdealPipe, 9).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        assert_eq!(cb.dims.n_k2, 1);
        let level = cb.v_level(0);
        let first = level.word(0).to_vec();
        for j in 1..cb.dims.n_v_tilde {
            assert_eq!(level.word(j), &first[..], "all v-words identical");
        }
    }

    #[test]
    fn size_explosion_suggests_a_blocklength() {
        let sc = dsbs_scenario();
        let aux = AuxChannel::copies(2, true, true, true);
        let mut sp = SimParams::new(16, 0.4, ChannelMode::IdealPipe, 9).unwrap();
        sp.book_cap = 1 << 16;
        match build_codebooks(&aux, &sc, &sp) {
            Err(Error::SizeExplosion { max_n, .. }) => {
                assert!((1..16).contains(&max_n), "suggested n = {max_n}")
            }
            other => panic!("expected SIZE_EXPLOSION, got {:?}", other.map(|c| c.dims)),
        }
    }

    #[test]
    fn lazy_levels_are_reproducible() {
        let sc = dsbs_scenario();
        let aux = AuxChannel::copies(2, false, true, false);
        let sp = SimParams::new(6, 0.2, ChannelMode::IdealPipe, 42).unwrap();
        let a = build_codebooks(&aux, &sc, &sp).unwrap();
        let b = build_codebooks(&aux, &sc, &sp).unwrap();
        // touch in different orders
        let a1 = a.v_level(1).words.clone();
        let _ = a.v_level(0);
        let _ = b.v_level(0);
        let b1 = b.v_level(1).words.clone();
        assert_eq!(a1, b1);
        assert_eq!(a.u_book, b.u_book);
    }
}
