//! Randomized invariant suites over a fixed scenario: leakage-form
//! equivalence, the key-rate identity, the R1 => R2 inclusion, and (when the
//! Phase-2 budget dominates, where the two systems describe the same
//! frontier) a gap comparison between the two region searches.

use serde::Serialize;

use crate::error::Result;
use crate::prob::assemble_joint;
use crate::region::{
    evaluate_point_with_budgets, key_rates_from_terms, leakage_forms_from_terms, MiTerms,
    RegionKind, ScenarioConfig, DEFAULT_CAPACITY_TOL,
};
use crate::sampling::random_aux;
use crate::search::{minimize_leakage, SearchParams};
use crate::seed;
use crate::Error;

#[derive(Debug, Clone, Serialize)]
pub struct TightRegionGapCell {
    pub d1_max: f64,
    pub d2_max: f64,
    pub best_r1: Option<f64>,
    pub best_r2: Option<f64>,
    /// best_r1 - best_r2 when both searches found a point.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    /// Pairs with rho2 C2 >= I(V;S|T,U), where the two leakage forms must
    /// coincide.
    pub equivalence_checked: usize,
    pub equivalence_max_dev: f64,
    pub key_identity_max_dev: f64,
    pub inclusion_feasible_r1: usize,
    pub inclusion_violations: usize,
    /// Positive-part sanity: leakage below the necessary term I(U,E;S).
    pub floor_violations: usize,
    /// Search-gap cells, present when rho2 C2 >= rho1 C1.
    pub tight_region_cells: Option<Vec<TightRegionGapCell>>,
    pub tight_region_skipped: Option<String>,
    pub seed: u64,
}

impl VerifyReport {
    /// Hard failures: any invariant out of tolerance.
    pub fn passed(&self) -> bool {
        self.equivalence_max_dev <= 1e-9
            && self.key_identity_max_dev <= 1e-10
            && self.inclusion_violations == 0
            && self.floor_violations == 0
            && self
                .tight_region_cells
                .as_ref()
                .map(|cells| {
                    cells
                        .iter()
                        .filter_map(|c| c.gap)
                        .all(|g| g <= 0.02 + 1e-9)
                })
                .unwrap_or(true)
    }
}

/// Run the randomized suites with `samples` random auxiliary triples on the
/// given scenario. Deterministic given the seed.
pub fn run_verify(
    sc: &ScenarioConfig<f64>,
    samples: usize,
    seed_value: u64,
    budget: usize,
) -> Result<VerifyReport> {
    let (rho1c1, rho2c2) = sc.budgets(DEFAULT_CAPACITY_TOL)?;
    let ns = sc.src.s_size();
    let mut rng = seed::rng_from(seed_value, &[0x7665]);

    let mut equivalence_checked = 0usize;
    let mut equivalence_max_dev = 0.0f64;
    let mut key_identity_max_dev = 0.0f64;
    let mut inclusion_feasible_r1 = 0usize;
    let mut inclusion_violations = 0usize;
    let mut floor_violations = 0usize;

    for _ in 0..samples {
        use rand::Rng;
        let nu = rng.gen_range(1..=ns + 1);
        let nv = rng.gen_range(1..=ns + 1);
        let nw = rng.gen_range(1..=ns + 1);
        let aux = random_aux::<f64>(ns, nu, nv, nw, &mut rng);
        let joint = assemble_joint(&sc.src, &aux)?;
        let terms = MiTerms::from_joint(&joint)?;

        let identity_dev =
            ((terms.i_v_t_given_u - terms.i_v_e_given_u) - terms.i_v_t_given_eu).abs();
        key_identity_max_dev = key_identity_max_dev.max(identity_dev);

        let (r_k1, r_k2) = key_rates_from_terms(&terms, rho2c2);
        let (primary, alt) = leakage_forms_from_terms(&terms, r_k1, r_k2, rho2c2);
        if rho2c2 >= terms.i_v_s_given_tu {
            equivalence_checked += 1;
            equivalence_max_dev = equivalence_max_dev.max((primary - alt).abs());
        }
        if primary < terms.i_ue_s - 1e-10 {
            floor_violations += 1;
        }

        let point = evaluate_point_with_budgets(&aux, sc, rho1c1, rho2c2)?;
        if point.feasible_r1 {
            inclusion_feasible_r1 += 1;
            if !point.feasible_r2 {
                inclusion_violations += 1;
            }
        }
    }

    // Tight-region gap: when rho2 C2 >= rho1 C1 the two systems describe
    // the same frontier, so the searches are compared at a few cells.
    let (tight_region_cells, tight_region_skipped) = if rho2c2 >= rho1c1 - 1e-12 {
        let baseline = evaluate_point_with_budgets(
            &crate::prob::AuxChannel::constant(ns),
            sc,
            rho1c1,
            rho2c2,
        )?;
        let cells_spec = [
            (baseline.d1, baseline.d2),
            (baseline.d1, 0.5 * baseline.d2),
        ];
        let mut cells = Vec::new();
        for (i, &(d1_max, d2_max)) in cells_spec.iter().enumerate() {
            let mut best = [None, None];
            for (k, kind) in [RegionKind::R1, RegionKind::R2].into_iter().enumerate() {
                let params = SearchParams {
                    region: kind,
                    budget,
                    seed: seed::derive(seed_value, &[0x636f, i as u64]),
                    aux_sizes: None,
                    max_sweeps: 12,
                };
                best[k] = match minimize_leakage(sc, d1_max, d2_max, &params) {
                    Ok((_, p)) => Some(p.leakage_lb),
                    Err(Error::NoFeasiblePoint) => None,
                    Err(e) => return Err(e),
                };
            }
            cells.push(TightRegionGapCell {
                d1_max,
                d2_max,
                best_r1: best[0],
                best_r2: best[1],
                gap: match (best[0], best[1]) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                },
            });
        }
        (Some(cells), None)
    } else {
        (
            None,
            Some(format!(
                "rho2 C2 = {rho2c2:.6} < rho1 C1 = {rho1c1:.6}; the tight-region comparison does not apply"
            )),
        )
    };

    Ok(VerifyReport {
        samples,
        equivalence_checked,
        equivalence_max_dev,
        key_identity_max_dev,
        inclusion_feasible_r1,
        inclusion_violations,
        floor_violations,
        tight_region_cells,
        tight_region_skipped,
        seed: seed_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::Channel;
    use crate::prob::SourceModel;
    use crate::region::DistortionMeasure;

    fn dsbs_scenario(rho1: f64, rho2: f64) -> ScenarioConfig<f64> {
        ScenarioConfig::new(
            SourceModel::binary_symmetric(0.1, 0.1).unwrap(),
            Channel::identity(2),
            Channel::identity(2),
            rho1,
            rho2,
            DistortionMeasure::hamming(2),
        )
        .unwrap()
    }

    #[test]
    fn default_scenario_passes_and_is_reproducible() {
        let sc = dsbs_scenario(1.0, 1.0);
        let a = run_verify(&sc, 100, 99, 2).unwrap();
        assert!(a.passed(), "{a:?}");
        assert!(a.tight_region_cells.is_some());
        let b = run_verify(&sc, 100, 99, 2).unwrap();
        assert_eq!(a.equivalence_max_dev, b.equivalence_max_dev);
        assert_eq!(a.key_identity_max_dev, b.key_identity_max_dev);
    }

    #[test]
    fn tight_region_check_is_skipped_when_phase2_budget_is_smaller() {
        let sc = dsbs_scenario(1.0, 0.5);
        let report = run_verify(&sc, 20, 5, 2).unwrap();
        assert!(report.tight_region_cells.is_none());
        assert!(report.tight_region_skipped.is_some());
        assert!(report.passed());
    }
}
