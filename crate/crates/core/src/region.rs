//! Inner-bound evaluation: rate feasibility, key rates, leakage lower bound
//! and distortions for a candidate auxiliary triple (U, V, W).
//!
//! Two constraint systems are supported. `R1` checks the two phase-rate
//! inequalities
//!
//! ```text
//! I(U;S|E) + I(W;S|V,U,T) <= rho1 C1        I(V;S|T,U) <= rho2 C2
//! ```
//!
//! while `R2` checks
//!
//! ```text
//! I(U;S|E) <= rho1 C1
//! I(V;S|T,U) <= rho2 C2
//! I(U;S|E) + I(W,V;S|T,U) <= rho1 C1 + rho2 C2
//! ```
//!
//! Both share the leakage bound
//! `L >= I(U,E;S) + [I(W;S|T,U,V) - R_K1 - R_K2]^+` with the key rates
//!
//! ```text
//! R_K2 = I(V;T|U) - I(V;E|U)
//! R_K1 = 0                                        if I(V;T|E,U) >= I(W;S|T,V,U)
//!      = min{rho2 C2 - I(V;S|T,U),
//!            I(W;S|T,V,U) - I(V;T|E,U)}           otherwise
//! ```

use serde::{Deserialize, Serialize};

use crate::dmc::{capacity, Channel};
use crate::error::{Error, Result};
use crate::prob::{assemble_joint, AuxChannel, JointDist, SourceModel};
use crate::real::{r, Real};

/// Absolute slack tolerance for feasibility checks.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Capacity tolerance used when a scenario's rate budgets are evaluated.
pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    R1,
    R2,
}

/// Bounded nonnegative distortion matrix over source x reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure<R: Real> {
    s_size: usize,
    recon_size: usize,
    d: Vec<R>,
}

impl<R: Real> DistortionMeasure<R> {
    pub fn new(s_size: usize, recon_size: usize, d: Vec<R>) -> Result<Self> {
        if d.len() != s_size * recon_size {
            return Err(Error::InvalidDistortion {
                context: format!(
                    "matrix has {} entries, expected {}x{}",
                    d.len(),
                    s_size,
                    recon_size
                ),
            });
        }
        for &x in &d {
            if x < R::zero() || !x.is_finite() {
                return Err(Error::InvalidDistortion {
                    context: "entries must be finite and nonnegative".into(),
                });
            }
        }
        Ok(Self {
            s_size,
            recon_size,
            d,
        })
    }

    /// Hamming distortion with the reconstruction alphabet equal to S.
    pub fn hamming(s_size: usize) -> Self {
        let mut d = vec![R::one(); s_size * s_size];
        for s in 0..s_size {
            d[s * s_size + s] = R::zero();
        }
        Self {
            s_size,
            recon_size: s_size,
            d,
        }
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn recon_size(&self) -> usize {
        self.recon_size
    }

    pub fn d(&self, s: usize, s_hat: usize) -> R {
        self.d[s * self.recon_size + s_hat]
    }

    pub fn max_value(&self) -> R {
        self.d.iter().copied().fold(R::zero(), |a, b| a.max(b))
    }
}

/// One experiment setting: source triple, two channels, bandwidth
/// expansions and the distortion measure.
#[derive(Debug, Clone)]
pub struct ScenarioConfig<R: Real> {
    pub src: SourceModel<R>,
    pub ch1: Channel<R>,
    pub ch2: Channel<R>,
    pub rho1: R,
    pub rho2: R,
    pub distortion: DistortionMeasure<R>,
}

impl<R: Real> ScenarioConfig<R> {
    pub fn new(
        src: SourceModel<R>,
        ch1: Channel<R>,
        ch2: Channel<R>,
        rho1: R,
        rho2: R,
        distortion: DistortionMeasure<R>,
    ) -> Result<Self> {
        if rho1.is_nan() || rho2.is_nan() || rho1 <= R::zero() || rho2 <= R::zero() {
            return Err(Error::AlphabetMismatch {
                context: "bandwidth expansions must be positive".into(),
            });
        }
        if distortion.s_size() != src.s_size() {
            return Err(Error::AlphabetMismatch {
                context: "distortion matrix must cover the S alphabet".into(),
            });
        }
        Ok(Self {
            src,
            ch1,
            ch2,
            rho1,
            rho2,
            distortion,
        })
    }

    /// Rate budgets (rho1 C1, rho2 C2) in bits per source symbol.
    pub fn budgets(&self, tol: R) -> Result<(R, R)> {
        let c1 = capacity(&self.ch1, tol)?.capacity;
        let c2 = capacity(&self.ch2, tol)?.capacity;
        Ok((self.rho1 * c1, self.rho2 * c2))
    }
}

/// The mutual-information quantities entering the region inequalities.
///
/// `i_w_s_given_uvt` is the single value written as I(W;S|V,U,T) and
/// I(W;S|T,U,V) in different inequalities; the conditioning set is the same.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiTerms<R: Real> {
    pub i_u_s_given_e: R,
    pub i_w_s_given_uvt: R,
    pub i_v_s_given_tu: R,
    pub i_v_t_given_eu: R,
    pub i_v_t_given_u: R,
    pub i_v_e_given_u: R,
    pub i_vw_s_given_tu: R,
    pub i_ue_s: R,
}

impl<R: Real> MiTerms<R> {
    pub fn from_joint(joint: &JointDist<R>) -> Result<Self> {
        Ok(Self {
            i_u_s_given_e: joint.cond_mutual_info(&["U"], &["S"], &["E"])?,
            i_w_s_given_uvt: joint.cond_mutual_info(&["W"], &["S"], &["U", "V", "T"])?,
            i_v_s_given_tu: joint.cond_mutual_info(&["V"], &["S"], &["T", "U"])?,
            i_v_t_given_eu: joint.cond_mutual_info(&["V"], &["T"], &["E", "U"])?,
            i_v_t_given_u: joint.cond_mutual_info(&["V"], &["T"], &["U"])?,
            i_v_e_given_u: joint.cond_mutual_info(&["V"], &["E"], &["U"])?,
            i_vw_s_given_tu: joint.cond_mutual_info(&["V", "W"], &["S"], &["T", "U"])?,
            i_ue_s: joint.mutual_info(&["U", "E"], &["S"])?,
        })
    }
}

/// Per-constraint margins; a point is feasible when the relevant slacks are
/// all `>= -FEASIBILITY_SLACK`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintSlack<R: Real> {
    /// rho1 C1 - (I(U;S|E) + I(W;S|V,U,T))
    pub r1_phase1: R,
    /// rho2 C2 - I(V;S|T,U) (shared by both regions)
    pub phase2: R,
    /// rho1 C1 - I(U;S|E)
    pub r2_phase1: R,
    /// rho1 C1 + rho2 C2 - (I(U;S|E) + I(W,V;S|T,U))
    pub r2_sum: R,
}

/// A fully evaluated candidate point.
#[derive(Debug, Clone, Serialize)]
pub struct RegionPoint<R: Real> {
    pub terms: MiTerms<R>,
    pub r_k1: R,
    pub r_k2: R,
    /// Leakage lower bound: necessary term plus the positive part of the
    /// unkeyed excess.
    pub leakage_lb: R,
    /// Equivalent form trading the Phase-2 budget directly against the
    /// combined description rate; coincides with `leakage_lb` whenever
    /// `rho2 C2 >= I(V;S|T,U)`.
    pub leakage_alt: R,
    pub d1: R,
    pub d2: R,
    pub feasible_r1: bool,
    pub feasible_r2: bool,
    pub slack: ConstraintSlack<R>,
    pub rho1c1: R,
    pub rho2c2: R,
    pub zero_mass_contexts: (usize, usize),
}

impl<R: Real> RegionPoint<R> {
    pub fn feasible(&self, kind: RegionKind) -> bool {
        match kind {
            RegionKind::R1 => self.feasible_r1,
            RegionKind::R2 => self.feasible_r2,
        }
    }
}

/// Reconstruction maps chosen pointwise-optimally for a joint law.
#[derive(Debug, Clone)]
pub struct Reconstructions {
    /// ŝ = h1[u * |E| + e]
    pub h1: Vec<usize>,
    /// ŝ = h2[(w * |V| + v) * |T| + t]
    pub h2: Vec<usize>,
    /// Zero-probability contexts mapped to ŝ = 0 by convention (reported,
    /// not errored).
    pub zero_mass_h1: usize,
    pub zero_mass_h2: usize,
}

/// Pointwise-optimal reconstructions and the resulting expected distortions.
///
/// `h1(u,e) = argmin_ŝ Σ_s P(s|u,e) d(s,ŝ)` with ties to the smallest
/// reconstruction index; `h2` likewise on (w,v,t).
pub fn optimal_reconstructions<R: Real>(
    joint: &JointDist<R>,
    dm: &DistortionMeasure<R>,
) -> Result<(Reconstructions, R, R)> {
    let sue = joint.marginal(&["S", "U", "E"])?;
    let swvt = joint.marginal(&["S", "W", "V", "T"])?;
    let (h1, zero1, d1) = argmin_tables(&sue, dm);
    let (h2, zero2, d2) = argmin_tables(&swvt, dm);
    Ok((
        Reconstructions {
            h1,
            h2,
            zero_mass_h1: zero1,
            zero_mass_h2: zero2,
        },
        d1,
        d2,
    ))
}

/// Shared: first axis is S, remaining axes form the context.
fn argmin_tables<R: Real>(
    marg: &JointDist<R>,
    dm: &DistortionMeasure<R>,
) -> (Vec<usize>, usize, R) {
    let ns = marg.axes()[0].size;
    let n_ctx: usize = marg.axes()[1..].iter().map(|a| a.size).product();
    let mass = marg.mass();
    let mut table = vec![0usize; n_ctx];
    let mut zero_count = 0usize;
    let mut total = R::zero();
    for ctx in 0..n_ctx {
        // P(s, ctx) has stride n_ctx over s.
        let mut any_mass = false;
        let mut best = R::infinity();
        let mut best_hat = 0usize;
        for s_hat in 0..dm.recon_size() {
            let mut cost = R::zero();
            for s in 0..ns {
                let p = mass[s * n_ctx + ctx];
                if p > R::zero() {
                    any_mass = true;
                    cost += p * dm.d(s, s_hat);
                }
            }
            if cost < best {
                best = cost;
                best_hat = s_hat;
            }
        }
        if !any_mass {
            zero_count += 1;
            table[ctx] = 0;
        } else {
            table[ctx] = best_hat;
            total += best;
        }
    }
    (table, zero_count, total)
}

/// Key rates (R_K1, R_K2) for the given Phase-2 budget, in bits per symbol.
pub fn key_rates_from_terms<R: Real>(terms: &MiTerms<R>, rho2c2: R) -> (R, R) {
    let r_k2 = terms.i_v_t_given_u - terms.i_v_e_given_u;
    let r_k1 = if terms.i_v_t_given_eu >= terms.i_w_s_given_uvt {
        R::zero()
    } else {
        (rho2c2 - terms.i_v_s_given_tu).min(terms.i_w_s_given_uvt - terms.i_v_t_given_eu)
    };
    (r_k1, r_k2)
}

/// Key rates evaluated directly on an assembled joint.
pub fn key_rates<R: Real>(joint: &JointDist<R>, rho2c2: R) -> Result<(R, R)> {
    Ok(key_rates_from_terms(&MiTerms::from_joint(joint)?, rho2c2))
}

fn positive_part<R: Real>(x: R) -> R {
    x.max(R::zero())
}

/// Both leakage lower-bound forms: the keyed positive-part shape and the
/// budget-tradeoff rewriting. They agree whenever `rho2c2 >= I(V;S|T,U)`.
pub fn leakage_forms_from_terms<R: Real>(
    terms: &MiTerms<R>,
    r_k1: R,
    r_k2: R,
    rho2c2: R,
) -> (R, R) {
    let primary = terms.i_ue_s + positive_part(terms.i_w_s_given_uvt - r_k1 - r_k2);
    let alt =
        terms.i_ue_s + positive_part(terms.i_vw_s_given_tu - terms.i_v_t_given_eu - rho2c2);
    (primary, alt)
}

/// Leakage lower bound evaluated directly on an assembled joint.
pub fn leakage_lower_bound<R: Real>(joint: &JointDist<R>, rho2c2: R) -> Result<(R, R)> {
    let terms = MiTerms::from_joint(joint)?;
    let (r_k1, r_k2) = key_rates_from_terms(&terms, rho2c2);
    Ok(leakage_forms_from_terms(&terms, r_k1, r_k2, rho2c2))
}

/// Full evaluation against explicit rate budgets.
pub fn evaluate_point_with_budgets<R: Real>(
    aux: &AuxChannel<R>,
    sc: &ScenarioConfig<R>,
    rho1c1: R,
    rho2c2: R,
) -> Result<RegionPoint<R>> {
    let joint = assemble_joint(&sc.src, aux)?;
    let terms = MiTerms::from_joint(&joint)?;
    let (r_k1, r_k2) = key_rates_from_terms(&terms, rho2c2);
    let (leakage_lb, leakage_alt) = leakage_forms_from_terms(&terms, r_k1, r_k2, rho2c2);
    let (recon, d1, d2) = optimal_reconstructions(&joint, &sc.distortion)?;
    let slack = ConstraintSlack {
        r1_phase1: rho1c1 - (terms.i_u_s_given_e + terms.i_w_s_given_uvt),
        phase2: rho2c2 - terms.i_v_s_given_tu,
        r2_phase1: rho1c1 - terms.i_u_s_given_e,
        r2_sum: rho1c1 + rho2c2 - (terms.i_u_s_given_e + terms.i_vw_s_given_tu),
    };
    let eps = r::<R>(-FEASIBILITY_SLACK);
    Ok(RegionPoint {
        terms,
        r_k1,
        r_k2,
        leakage_lb,
        leakage_alt,
        d1,
        d2,
        feasible_r1: slack.r1_phase1 >= eps && slack.phase2 >= eps,
        feasible_r2: slack.r2_phase1 >= eps && slack.phase2 >= eps && slack.r2_sum >= eps,
        slack,
        rho1c1,
        rho2c2,
        zero_mass_contexts: (recon.zero_mass_h1, recon.zero_mass_h2),
    })
}

fn evaluate_point<R: Real>(aux: &AuxChannel<R>, sc: &ScenarioConfig<R>) -> Result<RegionPoint<R>> {
    let (rho1c1, rho2c2) = sc.budgets(r(DEFAULT_CAPACITY_TOL))?;
    evaluate_point_with_budgets(aux, sc, rho1c1, rho2c2)
}

/// Evaluate a point against the two-inequality system of region R1.
pub fn evaluate_point_r1<R: Real>(
    aux: &AuxChannel<R>,
    sc: &ScenarioConfig<R>,
) -> Result<RegionPoint<R>> {
    evaluate_point(aux, sc)
}

/// Evaluate a point against the three-inequality system of region R2.
///
/// The returned point carries both feasibility flags; this entry point exists
/// so call sites read as the region they target.
pub fn evaluate_point_r2<R: Real>(
    aux: &AuxChannel<R>,
    sc: &ScenarioConfig<R>,
) -> Result<RegionPoint<R>> {
    evaluate_point(aux, sc)
}

/// Per-point half of the R1 => R2 inclusion.
#[derive(Debug, Clone, Serialize)]
pub struct InclusionReport<R: Real> {
    pub feasible_r1: bool,
    pub feasible_r2: bool,
    /// True unless the point is R1-feasible yet R2-infeasible.
    pub implication_holds: bool,
    pub slack: ConstraintSlack<R>,
}

pub fn check_inclusion<R: Real>(
    aux: &AuxChannel<R>,
    sc: &ScenarioConfig<R>,
) -> Result<InclusionReport<R>> {
    let p = evaluate_point(aux, sc)?;
    Ok(InclusionReport {
        feasible_r1: p.feasible_r1,
        feasible_r2: p.feasible_r2,
        implication_holds: !p.feasible_r1 || p.feasible_r2,
        slack: p.slack,
    })
}
