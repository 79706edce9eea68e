//! Independent brute-force verifiers.
//!
//! [`exact_leakage`] enumerates every source word, side-information word and
//! encoder-randomness value against the fixed realized codebook and computes
//! the n-letter leakage `(1/n) I(S^n; Y_1, E^n)` exactly; in ideal-pipe mode
//! the Phase-1 observation is the payload triple itself. [`secure_index`]
//! measures `log N_K2 - H(kappa(L) | E^n, U^n, l11, b(W^n))`, the key's
//! deviation from perfect secrecy against everything the Phase-1 observer
//! holds besides the pad itself. [`brute_mi`] recomputes conditional mutual
//! information straight from its definition, sharing no code with the
//! entropy-decomposition path it cross-checks.

use std::collections::HashMap;

use serde::Serialize;

use crate::codec::{encode_with_l22, ChannelMode, CodebookSet};
use crate::error::{Error, Result};
use crate::prob::JointDist;
use crate::real::Real;
use crate::region::ScenarioConfig;

/// Cap on enumerated joint outcomes.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_states: 1 << 26,
        }
    }
}

/// Exact-leakage report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LeakageReport {
    /// (1/n) I(S^n; Y_1, E^n) for the realized codebook, in bits/symbol.
    pub leakage_exact: f64,
    /// Single-letter lower bound evaluated for the same auxiliary triple.
    pub leakage_bound: f64,
    /// leakage_exact - leakage_bound.
    pub gap: f64,
    pub n: usize,
    pub seed: u64,
}

fn entropy_of_map<K>(map: &HashMap<K, f64>) -> f64 {
    let mut h = 0.0;
    for &p in map.values() {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Iterate all words of length `n` over an alphabet of the given size.
struct Words {
    current: Vec<u16>,
    size: u16,
    fresh: bool,
}

impl Words {
    fn new(n: usize, size: usize) -> Self {
        Self {
            current: vec![0; n],
            size: size as u16,
            fresh: true,
        }
    }
}

impl Iterator for Words {
    type Item = Vec<u16>;

    fn next(&mut self) -> Option<Vec<u16>> {
        if self.fresh {
            self.fresh = false;
            return Some(self.current.clone());
        }
        for i in (0..self.current.len()).rev() {
            self.current[i] += 1;
            if self.current[i] < self.size {
                return Some(self.current.clone());
            }
            self.current[i] = 0;
        }
        None
    }
}

fn word_prob(joint: &[f64], cols: usize, a: &[u16], b: &[u16]) -> f64 {
    let mut p = 1.0;
    for (&x, &y) in a.iter().zip(b) {
        p *= joint[x as usize * cols + y as usize];
        if p == 0.0 {
            return 0.0;
        }
    }
    p
}

/// Exact per-symbol Phase-1 leakage `(1/n) I(S^n; Y_1, E^n)` by enumeration
/// over source words, side information and the encoder's pad randomization.
pub fn exact_leakage(
    cb: &CodebookSet,
    sc: &ScenarioConfig<f64>,
    budget: &EnumerationBudget,
) -> Result<LeakageReport> {
    let n = cb.params.n;
    let ns = sc.src.s_size();
    let ne = sc.src.e_size();
    let n_k1 = cb.dims.n_k1;

    let s_words = (ns as u128).checked_pow(n as u32);
    let e_words = (ne as u128).checked_pow(n as u32);
    let states = match (s_words, e_words) {
        (Some(a), Some(b)) => a
            .checked_mul(b)
            .and_then(|x| x.checked_mul(n_k1 as u128))
            .unwrap_or(u128::MAX),
        _ => u128::MAX,
    };
    let states = match cb.params.channel_mode {
        ChannelMode::IdealPipe => states,
        ChannelMode::RandomCode => {
            let ny = (sc.ch1.output_size() as u128)
                .checked_pow(cb.dims.n1 as u32)
                .unwrap_or(u128::MAX);
            states.saturating_mul(ny)
        }
    };
    if states > budget.max_states as u128 {
        return Err(Error::BudgetExceeded {
            states,
            cap: budget.max_states,
        });
    }

    // per-symbol joint (S, E)
    let se = sc.src.joint_ste().marginal(&["S", "E"])?;
    let se_mass = se.mass().to_vec();

    // H(S^n) is exactly n H(S) for the i.i.d. source.
    let h_s_n: f64 = n as f64 * se.entropy(&["S"])?;

    // Observation identifiers: ideal pipe observes the payload triple;
    // random-code mode observes the channel output word.
    let mut p_obs_e: HashMap<(u64, Vec<u16>), f64> = HashMap::new();
    let mut p_s_obs_e: HashMap<(Vec<u16>, u64, Vec<u16>), f64> = HashMap::new();

    let l22_weight = 1.0 / n_k1 as f64;
    for s in Words::new(n, ns) {
        let mut payloads: Vec<u64> = Vec::with_capacity(n_k1 as usize);
        for l22 in 1..=n_k1 {
            let enc = encode_with_l22(cb, &s, l22);
            let id =
                ((enc.p1.l11 - 1) * cb.dims.n_k + (enc.p1.c1 - 1)) * cb.dims.n_b2 + (enc.p1.b2 - 1);
            payloads.push(id);
        }
        for e in Words::new(n, ne) {
            let p_se = word_prob(&se_mass, ne, &s, &e);
            if p_se == 0.0 {
                continue;
            }
            match cb.params.channel_mode {
                ChannelMode::IdealPipe => {
                    for &pid in &payloads {
                        let w = p_se * l22_weight;
                        *p_obs_e.entry((pid, e.clone())).or_insert(0.0) += w;
                        *p_s_obs_e.entry((s.clone(), pid, e.clone())).or_insert(0.0) += w;
                    }
                }
                ChannelMode::RandomCode => {
                    let n1 = cb.dims.n1;
                    let ny = sc.ch1.output_size();
                    for &pid in &payloads {
                        let x_word = cb.x1_word(pid).to_vec();
                        for y in Words::new(n1, ny) {
                            let p_y = word_prob(sc.ch1.transition(), ny, &x_word, &y);
                            if p_y == 0.0 {
                                continue;
                            }
                            let w = p_se * l22_weight * p_y;
                            let mut id = 0u64;
                            for &yy in &y {
                                id = id * ny as u64 + yy as u64;
                            }
                            *p_obs_e.entry((id, e.clone())).or_insert(0.0) += w;
                            *p_s_obs_e.entry((s.clone(), id, e.clone())).or_insert(0.0) += w;
                        }
                    }
                }
            }
        }
    }

    let i_bits = h_s_n + entropy_of_map(&p_obs_e) - entropy_of_map(&p_s_obs_e);
    let leakage_exact = i_bits / n as f64;
    let leakage_bound = cb.region_point().leakage_lb;
    Ok(LeakageReport {
        leakage_exact,
        leakage_bound,
        gap: leakage_exact - leakage_bound,
        n,
        seed: cb.params.seed,
    })
}

/// Exact secure index of the key table against the Phase-1 observer:
/// `log2 N_K2 - H(kappa(L) | E^n, U^n, l11, b(W^n))` in bits.
///
/// The conditioning holds everything the observer sees except the pad
/// itself (conditioning on the ciphertext would determine the key exactly,
/// trivializing the index); the clear remainder b2 is a function of b(W^n).
pub fn secure_index(
    cb: &CodebookSet,
    sc: &ScenarioConfig<f64>,
    budget: &EnumerationBudget,
) -> Result<f64> {
    let n = cb.params.n;
    let ns = sc.src.s_size();
    let ne = sc.src.e_size();
    let states = (ns as u128)
        .checked_pow(n as u32)
        .and_then(|a| a.checked_mul((ne as u128).pow(n as u32)))
        .unwrap_or(u128::MAX);
    if states > budget.max_states as u128 {
        return Err(Error::BudgetExceeded {
            states,
            cap: budget.max_states,
        });
    }
    if cb.dims.n_k2 == 1 {
        return Ok(0.0);
    }

    let se = sc.src.joint_ste().marginal(&["S", "E"])?;
    let se_mass = se.mass().to_vec();

    let mut cond: HashMap<(Vec<u16>, u64, u64), f64> = HashMap::new();
    let mut joint: HashMap<(Vec<u16>, u64, u64, u64), f64> = HashMap::new();
    for s in Words::new(n, ns) {
        let enc = encode_with_l22(cb, &s, 1);
        for e in Words::new(n, ne) {
            let p = word_prob(&se_mass, ne, &s, &e);
            if p == 0.0 {
                continue;
            }
            *cond.entry((e.clone(), enc.u_idx, enc.b_w)).or_insert(0.0) += p;
            *joint
                .entry((e.clone(), enc.u_idx, enc.b_w, enc.k2))
                .or_insert(0.0) += p;
        }
    }
    let h_k_given = entropy_of_map(&joint) - entropy_of_map(&cond);
    Ok((cb.dims.n_k2 as f64).log2() - h_k_given)
}

/// Conditional mutual information straight from the definition:
/// `I(a;b|c) = sum p(a,b,c) log2[ p(a,b,c) p(c) / (p(a,c) p(b,c)) ]`,
/// with all marginals accumulated by direct index arithmetic.
pub fn brute_mi<R: Real>(
    joint: &JointDist<R>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
    budget: &EnumerationBudget,
) -> Result<R> {
    let cells = joint.mass().len() as u128;
    if cells > budget.max_states as u128 {
        return Err(Error::BudgetExceeded {
            states: cells,
            cap: budget.max_states,
        });
    }
    for (i, set) in [a, b, c].iter().enumerate() {
        for name in set.iter() {
            joint.axis_index(name)?;
            for other in [a, b, c].iter().skip(i + 1) {
                if other.contains(name) {
                    return Err(Error::OverlappingSets {
                        name: (*name).into(),
                    });
                }
            }
        }
    }

    let sizes: Vec<usize> = joint.axes().iter().map(|ax| ax.size).collect();
    let pos = |names: &[&str]| -> Vec<usize> {
        names.iter().map(|n| joint.axis_index(n).unwrap()).collect()
    };
    let (ia, ib, ic) = (pos(a), pos(b), pos(c));

    let group_index = |digits: &[usize], axes: &[usize]| -> usize {
        let mut ix = 0usize;
        for &ax in axes {
            ix = ix * sizes[ax] + digits[ax];
        }
        ix
    };
    let table_len =
        |axes: &[usize]| -> usize { axes.iter().map(|&ax| sizes[ax]).product::<usize>().max(1) };

    let abc_axes: Vec<usize> = ia.iter().chain(&ib).chain(&ic).copied().collect();
    let ac_axes: Vec<usize> = ia.iter().chain(&ic).copied().collect();
    let bc_axes: Vec<usize> = ib.iter().chain(&ic).copied().collect();

    let mut p_abc = vec![R::zero(); table_len(&abc_axes)];
    let mut p_ac = vec![R::zero(); table_len(&ac_axes)];
    let mut p_bc = vec![R::zero(); table_len(&bc_axes)];
    let mut p_c = vec![R::zero(); table_len(&ic)];

    let mut digits = vec![0usize; sizes.len()];
    for &mass in joint.mass() {
        p_abc[group_index(&digits, &abc_axes)] += mass;
        p_ac[group_index(&digits, &ac_axes)] += mass;
        p_bc[group_index(&digits, &bc_axes)] += mass;
        p_c[group_index(&digits, &ic)] += mass;
        for i in (0..sizes.len()).rev() {
            digits[i] += 1;
            if digits[i] < sizes[i] {
                break;
            }
            digits[i] = 0;
        }
    }

    // One pass per distinct (a,b,c) cell of the grouped table.
    let mut total = R::zero();
    let mut digits = vec![0usize; sizes.len()];
    let mut seen = vec![false; p_abc.len()];
    loop {
        let iabc = group_index(&digits, &abc_axes);
        if !seen[iabc] {
            seen[iabc] = true;
            let p = p_abc[iabc];
            if p > R::zero() {
                let pc = p_c[group_index(&digits, &ic)];
                let pac = p_ac[group_index(&digits, &ac_axes)];
                let pbc = p_bc[group_index(&digits, &bc_axes)];
                total += p * ((p * pc) / (pac * pbc)).log2();
            }
        }
        let mut done = true;
        for i in (0..sizes.len()).rev() {
            digits[i] += 1;
            if digits[i] < sizes[i] {
                done = false;
                break;
            }
            digits[i] = 0;
        }
        if done {
            break;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_codebooks, ChannelMode, SimParams};
    use crate::dmc::Channel;
    use crate::prob::{assemble_joint, AuxChannel, CondKernel, SourceModel};
    use crate::region::{DistortionMeasure, ScenarioConfig};
    use crate::sampling;

    fn scenario(src: SourceModel<f64>) -> ScenarioConfig<f64> {
        let s = src.s_size();
        ScenarioConfig::new(
            src,
            Channel::identity(2),
            Channel::identity(2),
            1.0,
            1.0,
            DistortionMeasure::hamming(s),
        )
        .unwrap()
    }

    #[test]
    fn independent_side_info_and_constant_payload_leak_nothing() {
        // E independent of T (uniform rows), constant descriptions.
        let src = SourceModel::new(
            vec![0.5, 0.5],
            CondKernel::bsc(0.1).unwrap(),
            CondKernel::new(vec![2], 2, vec![0.5, 0.5, 0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let sc = scenario(src);
        let sp = SimParams::new(4, 0.2, ChannelMode::IdealPipe, 7).unwrap();
        let cb = build_codebooks(&AuxChannel::constant(2), &sc, &sp).unwrap();
        let report = exact_leakage(&cb, &sc, &EnumerationBudget::default()).unwrap();
        assert!(report.leakage_exact.abs() < 1e-9, "{}", report.leakage_exact);
    }

    #[test]
    fn copy_description_with_degenerate_side_info_reveals_everything() {
        // E is a single symbol; U = S delivered through singleton bins.
        let src = SourceModel::new(
            vec![0.5, 0.5],
            CondKernel::identity(2),
            CondKernel::deterministic(vec![2], 1, |_| 0).unwrap(),
        )
        .unwrap();
        let sc = ScenarioConfig::new(
            src,
            Channel::identity(2),
            Channel::identity(2),
            4.0, // wide pipe: every u-word its own bin
            1.0,
            DistortionMeasure::hamming(2),
        )
        .unwrap();
        let aux = AuxChannel::copies(2, true, false, false);
        let sp = SimParams::new(2, 0.9, ChannelMode::IdealPipe, 11).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        // precondition of the closed form: every source word is in the book
        let mut covered = [false; 4];
        for j in 0..cb.dims.n_u_tilde {
            let w = cb.u_word(j);
            covered[(w[0] * 2 + w[1]) as usize] = true;
        }
        assert!(covered.iter().all(|&c| c), "book covers all source words");
        assert_eq!(cb.dims.n_u, cb.dims.n_u_tilde, "singleton bins");
        let report = exact_leakage(&cb, &sc, &EnumerationBudget::default()).unwrap();
        assert!(
            (report.leakage_exact - 1.0).abs() < 1e-9,
            "{}",
            report.leakage_exact
        );
    }

    #[test]
    fn trivial_key_has_zero_secure_index() {
        let sc = scenario(SourceModel::binary_symmetric(0.1, 0.1).unwrap());
        let sp = SimParams::new(4, 0.2, ChannelMode::IdealPipe, 3).unwrap();
        let cb = build_codebooks(&AuxChannel::constant(2), &sc, &sp).unwrap();
        assert_eq!(cb.dims.n_k2, 1);
        assert_eq!(
            secure_index(&cb, &sc, &EnumerationBudget::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn secure_index_is_within_its_range() {
        let sc = scenario(SourceModel::binary_symmetric(0.1, 0.1).unwrap());
        let aux = AuxChannel::copies(2, false, true, false);
        let sp = SimParams::new(4, 0.3, ChannelMode::IdealPipe, 9).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        assert!(cb.dims.n_k2 > 1);
        let s = secure_index(&cb, &sc, &EnumerationBudget::default()).unwrap();
        let max = (cb.dims.n_k2 as f64).log2();
        assert!(s >= -1e-9 && s <= max + 1e-9, "index {s} outside [0, {max}]");
    }

    #[test]
    fn budget_is_enforced() {
        let sc = scenario(SourceModel::binary_symmetric(0.1, 0.1).unwrap());
        let sp = SimParams::new(4, 0.2, ChannelMode::IdealPipe, 7).unwrap();
        let cb = build_codebooks(&AuxChannel::constant(2), &sc, &sp).unwrap();
        let tiny = EnumerationBudget { max_states: 4 };
        match exact_leakage(&cb, &sc, &tiny) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected BUDGET_EXCEEDED, got {other:?}"),
        }
    }

    #[test]
    fn data_processing_floor_holds() {
        let sc = scenario(SourceModel::binary_symmetric(0.1, 0.1).unwrap());
        let aux = AuxChannel::copies(2, false, true, false);
        let sp = SimParams::new(4, 0.2, ChannelMode::IdealPipe, 5).unwrap();
        let cb = build_codebooks(&aux, &sc, &sp).unwrap();
        let report = exact_leakage(&cb, &sc, &EnumerationBudget::default()).unwrap();
        let joint = sc.src.joint_ste();
        let i_se = joint.mutual_info(&["S"], &["E"]).unwrap();
        assert!(report.leakage_exact >= i_se - 1e-9);
    }

    #[test]
    fn brute_mi_matches_entropy_decomposition() {
        let mut rng = crate::seed::rng_from(17, &[1]);
        for _ in 0..100 {
            let src = sampling::random_source::<f64>(2, 2, 2, &mut rng);
            let aux = sampling::random_aux::<f64>(2, 2, 2, 2, &mut rng);
            let j = assemble_joint(&src, &aux).unwrap();
            let direct =
                brute_mi(&j, &["V"], &["S"], &["T", "U"], &EnumerationBudget::default()).unwrap();
            let decomposed = j.cond_mutual_info(&["V"], &["S"], &["T", "U"]).unwrap();
            assert!((direct - decomposed).abs() < 1e-10);
        }
    }

    #[test]
    fn brute_mi_degenerate_queries() {
        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let j = assemble_joint(&src, &AuxChannel::constant(2)).unwrap();
        // Markov chain: I(S;E|T) = 0
        let v = brute_mi(&j, &["S"], &["E"], &["T"], &EnumerationBudget::default()).unwrap();
        assert!(v.abs() < 1e-12);
        // I(S;T) without conditioning matches the entropy route
        let v = brute_mi(&j, &["S"], &["T"], &[], &EnumerationBudget::default()).unwrap();
        let w = j.mutual_info(&["S"], &["T"]).unwrap();
        assert!((v - w).abs() < 1e-12);
    }
}
