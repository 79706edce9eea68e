//! Search over auxiliary triples: leakage minimization under rate and
//! distortion constraints, and the distortion-leakage frontier sweep.
//!
//! The optimizer is projected coordinate descent over the stacked simplex
//! rows of the three kernels, multi-started from structured warm points
//! (constants and copy embeddings of S) plus random and multiplicatively
//! perturbed restarts. Every output is an achievable point of the requested
//! region; no global optimality is claimed.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{AuxChannel, CondKernel};
use crate::real::{r, Real};
use crate::region::{
    evaluate_point_with_budgets, RegionKind, RegionPoint, ScenarioConfig, DEFAULT_CAPACITY_TOL,
    FEASIBILITY_SLACK,
};
use crate::sampling::random_aux;
use crate::seed;

/// Penalty weight that dominates any leakage value for infeasible points.
const PENALTY: f64 = 1e4;

/// Largest auxiliary alphabet sizes the region ever needs; search beyond
/// them buys nothing.
pub fn aux_size_bounds(ns: usize) -> (usize, usize, usize) {
    let u = ns + 3;
    let v = (ns + 1) * (ns + 2) + 1;
    let w = ns * (ns + 3) * v + 1;
    (u, v, w)
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub region: RegionKind,
    /// Number of restarts.
    pub budget: usize,
    pub seed: u64,
    /// Auxiliary alphabet sizes; `None` defaults to |S|+1 each.
    pub aux_sizes: Option<(usize, usize, usize)>,
    /// Coordinate-descent sweep cap per restart.
    pub max_sweeps: usize,
}

impl SearchParams {
    pub fn new(region: RegionKind, budget: usize, seed: u64) -> Self {
        Self {
            region,
            budget,
            seed,
            aux_sizes: None,
            max_sweeps: 16,
        }
    }
}

/// A found point: leakage, winning restart index, the triple, its evaluation.
type Candidate<R> = (R, usize, AuxChannel<R>, RegionPoint<R>);

/// One frontier grid cell.
#[derive(Debug, Clone)]
pub struct FrontierCell<R: Real> {
    pub d1_max: R,
    pub d2_max: R,
    pub best: Option<(AuxChannel<R>, RegionPoint<R>)>,
    pub restarts_used: usize,
}

fn feasible_for_cell<R: Real>(p: &RegionPoint<R>, kind: RegionKind, d1_max: R, d2_max: R) -> bool {
    let eps = r::<R>(FEASIBILITY_SLACK);
    p.feasible(kind) && p.d1 <= d1_max + eps && p.d2 <= d2_max + eps
}

/// Penalized objective: leakage plus a large multiple of the constraint
/// violations, so descent first reaches feasibility and then trades leakage.
fn objective<R: Real>(p: &RegionPoint<R>, kind: RegionKind, d1_max: R, d2_max: R) -> R {
    let zero = R::zero();
    let mut violation = (zero - p.slack.phase2).max(zero)
        + (p.d1 - d1_max).max(zero)
        + (p.d2 - d2_max).max(zero);
    match kind {
        RegionKind::R1 => {
            violation += (zero - p.slack.r1_phase1).max(zero);
        }
        RegionKind::R2 => {
            violation +=
                (zero - p.slack.r2_phase1).max(zero) + (zero - p.slack.r2_sum).max(zero);
        }
    }
    p.leakage_lb + r::<R>(PENALTY) * violation
}

/// Copy embeddings of S into (possibly larger) auxiliary alphabets.
fn embedded_copies<R: Real>(
    ns: usize,
    sizes: (usize, usize, usize),
    u_copy: bool,
    v_copy: bool,
    w_copy: bool,
) -> AuxChannel<R> {
    let (nu, nv, nw) = sizes;
    let u = CondKernel::deterministic(vec![ns], nu, |ix| if u_copy { ix[0] } else { 0 }).unwrap();
    let v =
        CondKernel::deterministic(vec![nu, ns], nv, |ix| if v_copy { ix[1] } else { 0 }).unwrap();
    let w = CondKernel::deterministic(vec![nu, nv, ns], nw, |ix| if w_copy { ix[2] } else { 0 })
        .unwrap();
    AuxChannel::new(u, v, w).unwrap()
}

fn warm_starts<R: Real>(ns: usize, sizes: (usize, usize, usize)) -> Vec<AuxChannel<R>> {
    [
        (false, false, false),
        (true, false, false),
        (false, true, false),
        (false, false, true),
        (true, false, true),
        (true, true, false),
        (false, true, true),
        (true, true, true),
    ]
    .iter()
    .map(|&(u, v, w)| embedded_copies(ns, sizes, u, v, w))
    .collect()
}

// Small local standard-normal sampler (Box-Muller) to avoid an extra dep.
fn std_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn perturb_multiplicative<R: Real>(
    aux: &AuxChannel<R>,
    sigma: f64,
    rng: &mut impl Rng,
) -> AuxChannel<R> {
    let mut out = aux.clone();
    {
        let (u, v, w) = out.factors_mut();
        for k in [u, v, w] {
            let width = k.output_size();
            let rows = k.rows_mut();
            for row in rows.chunks_mut(width) {
                let mut total = R::zero();
                for x in row.iter_mut() {
                    // Keep a small floor so zero entries can re-enter the simplex.
                    let noise = (sigma * std_normal(rng)).exp();
                    *x = (*x + r::<R>(1e-6)) * r::<R>(noise);
                    total += *x;
                }
                for x in row.iter_mut() {
                    *x /= total;
                }
            }
        }
    }
    out
}

struct Descent<'a, R: Real> {
    sc: &'a ScenarioConfig<R>,
    rho1c1: R,
    rho2c2: R,
    kind: RegionKind,
    d1_max: R,
    d2_max: R,
}

impl<'a, R: Real> Descent<'a, R> {
    fn eval(&self, aux: &AuxChannel<R>) -> Result<(R, RegionPoint<R>)> {
        let p = evaluate_point_with_budgets(aux, self.sc, self.rho1c1, self.rho2c2)?;
        Ok((objective(&p, self.kind, self.d1_max, self.d2_max), p))
    }

    /// Projected coordinate descent over the rows of the three kernels.
    fn run(
        &self,
        start: AuxChannel<R>,
        max_sweeps: usize,
        rng: &mut impl Rng,
    ) -> Result<(AuxChannel<R>, RegionPoint<R>, R)> {
        let mut aux = start;
        let (mut best_obj, mut best_point) = self.eval(&aux)?;
        for _ in 0..max_sweeps {
            let mut improved = false;
            for factor in 0..3usize {
                let (n_rows, width) = {
                    let k = factor_ref(&aux, factor);
                    (k.n_rows(), k.output_size())
                };
                if width == 1 {
                    continue;
                }
                for row_idx in 0..n_rows {
                    let current: Vec<R> = factor_ref(&aux, factor)
                        .row_slice(row_idx)
                        .to_vec();
                    let mut best_row: Option<Vec<R>> = None;
                    let mut candidates: Vec<Vec<R>> = Vec::new();
                    // Pulls toward each vertex of the simplex.
                    for vertex in 0..width {
                        for &t in &[1.0, 0.5, 0.2] {
                            let t = r::<R>(t);
                            let mut cand = current
                                .iter()
                                .map(|&x| x * (R::one() - t))
                                .collect::<Vec<_>>();
                            cand[vertex] += t;
                            candidates.push(cand);
                        }
                    }
                    // Random multiplicative tilts.
                    for &sigma in &[0.7, 0.25] {
                        let mut cand: Vec<R> = current
                            .iter()
                            .map(|&x| {
                                let noise = (sigma * std_normal(rng)).exp();
                                (x + r::<R>(1e-9)) * r::<R>(noise)
                            })
                            .collect();
                        let total: R = cand.iter().copied().sum();
                        for x in cand.iter_mut() {
                            *x /= total;
                        }
                        candidates.push(cand);
                    }
                    for cand in candidates {
                        set_row(&mut aux, factor, row_idx, &cand);
                        let (obj, point) = self.eval(&aux)?;
                        if obj < best_obj - r::<R>(1e-13) {
                            best_obj = obj;
                            best_point = point;
                            best_row = Some(cand);
                            improved = true;
                        }
                    }
                    match best_row {
                        Some(rw) => set_row(&mut aux, factor, row_idx, &rw),
                        None => set_row(&mut aux, factor, row_idx, &current),
                    }
                }
            }
            if !improved {
                break;
            }
        }
        Ok((aux, best_point, best_obj))
    }
}

fn factor_ref<R: Real>(aux: &AuxChannel<R>, factor: usize) -> &CondKernel<R> {
    match factor {
        0 => aux.u_given_s(),
        1 => aux.v_given_us(),
        _ => aux.w_given_uvs(),
    }
}

fn set_row<R: Real>(aux: &mut AuxChannel<R>, factor: usize, row_idx: usize, row: &[R]) {
    let (u, v, w) = aux.factors_mut();
    let k = match factor {
        0 => u,
        1 => v,
        _ => w,
    };
    let width = k.output_size();
    let rows = k.rows_mut();
    rows[row_idx * width..(row_idx + 1) * width].copy_from_slice(row);
}

/// Best-found achievable point minimizing the leakage lower bound subject to
/// region feasibility and the distortion caps. Deterministic given the seed;
/// restarts run independently and the winner is the lowest leakage with ties
/// broken by restart index.
pub fn minimize_leakage<R: Real>(
    sc: &ScenarioConfig<R>,
    d1_max: R,
    d2_max: R,
    params: &SearchParams,
) -> Result<(AuxChannel<R>, RegionPoint<R>)> {
    let ns = sc.src.s_size();
    let sizes = params.aux_sizes.unwrap_or((ns + 1, ns + 1, ns + 1));
    let bounds = aux_size_bounds(ns);
    for (which, size, bound) in [
        ("U", sizes.0, bounds.0),
        ("V", sizes.1, bounds.1),
        ("W", sizes.2, bounds.2),
    ] {
        if size == 0 || size > bound {
            return Err(Error::AuxSizeTooLarge {
                which: match which {
                    "U" => "U",
                    "V" => "V",
                    _ => "W",
                },
                size,
                bound,
            });
        }
    }
    let (rho1c1, rho2c2) = sc.budgets(r(DEFAULT_CAPACITY_TOL))?;
    let descent = Descent {
        sc,
        rho1c1,
        rho2c2,
        kind: params.region,
        d1_max,
        d2_max,
    };
    let warm = warm_starts::<R>(ns, sizes);
    let n_warm = warm.len();

    let results: Vec<Option<Candidate<R>>> = (0..params.budget)
        .into_par_iter()
        .map(|restart| -> Result<Option<Candidate<R>>> {
            let mut rng = seed::rng_from(params.seed, &[0x5345_4152, restart as u64]);
            let start = if restart < n_warm {
                warm[restart].clone()
            } else if (restart - n_warm).is_multiple_of(2) {
                random_aux(ns, sizes.0, sizes.1, sizes.2, &mut rng)
            } else {
                perturb_multiplicative(&warm[restart % n_warm], 0.8, &mut rng)
            };
            let (aux, point, _) = descent.run(start, params.max_sweeps, &mut rng)?;
            if feasible_for_cell(&point, params.region, d1_max, d2_max) {
                Ok(Some((point.leakage_lb, restart, aux, point)))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<Candidate<R>> = None;
    for cand in results.into_iter().flatten() {
        best = match best {
            None => Some(cand),
            Some(cur) => {
                // strictly better leakage wins; ties go to the earlier restart
                if cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1) {
                    Some(cand)
                } else {
                    Some(cur)
                }
            }
        };
    }
    match best {
        Some((_, _, aux, point)) => Ok((aux, point)),
        None => Err(Error::NoFeasiblePoint),
    }
}

/// Leakage frontier over a distortion grid: `minimize_leakage` per cell with
/// per-cell derived seeds, then a cumulative-min pass in both grid directions
/// (feasible sets nest, so the best point for looser caps is admissible).
pub fn frontier_sweep<R: Real>(
    sc: &ScenarioConfig<R>,
    d1_grid: &[R],
    d2_grid: &[R],
    params: &SearchParams,
) -> Result<Vec<FrontierCell<R>>> {
    if d1_grid.is_empty() || d2_grid.is_empty() {
        return Err(Error::AlphabetMismatch {
            context: "frontier grids must be nonempty".into(),
        });
    }
    let mut d1s = d1_grid.to_vec();
    let mut d2s = d2_grid.to_vec();
    d1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d2s.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let (n1, n2) = (d1s.len(), d2s.len());
    let mut cells: Vec<FrontierCell<R>> = Vec::with_capacity(n1 * n2);
    for (i, &d1_max) in d1s.iter().enumerate() {
        for (j, &d2_max) in d2s.iter().enumerate() {
            let cell_params = SearchParams {
                seed: seed::derive(params.seed, &[0x4652, i as u64, j as u64]),
                ..params.clone()
            };
            let best = match minimize_leakage(sc, d1_max, d2_max, &cell_params) {
                Ok(found) => Some(found),
                Err(Error::NoFeasiblePoint) => None,
                Err(e) => return Err(e),
            };
            cells.push(FrontierCell {
                d1_max,
                d2_max,
                best,
                restarts_used: params.budget,
            });
        }
    }

    // Monotone post-processing: each cell inherits a strictly better
    // predecessor point (smaller caps) when one exists.
    for i in 0..n1 {
        for j in 0..n2 {
            let idx = i * n2 + j;
            for pred in [
                if i > 0 { Some((i - 1) * n2 + j) } else { None },
                if j > 0 { Some(i * n2 + j - 1) } else { None },
            ]
            .into_iter()
            .flatten()
            {
                let take = match (&cells[pred].best, &cells[idx].best) {
                    (Some((_, pp)), Some((_, cp))) => pp.leakage_lb < cp.leakage_lb,
                    (Some(_), None) => true,
                    _ => false,
                };
                if take {
                    cells[idx].best = cells[pred].best.clone();
                }
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::Channel;
    use crate::prob::SourceModel;
    use crate::region::DistortionMeasure;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

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
    fn lax_caps_give_the_necessary_leakage_floor() {
        let sc = dsbs_scenario();
        let params = SearchParams::new(RegionKind::R1, 4, 7);
        let (_, point) = minimize_leakage(&sc, 1.0, 1.0, &params).unwrap();
        let i_se = 1.0 - h2(0.18);
        assert!((point.leakage_lb - i_se).abs() < 1e-6, "{}", point.leakage_lb);
    }

    #[test]
    fn zero_distortion_forces_full_revelation() {
        let sc = dsbs_scenario();
        let params = SearchParams::new(RegionKind::R1, 6, 3);
        let (_, point) = minimize_leakage(&sc, 0.0, 0.0, &params).unwrap();
        // d1 = 0 needs (U,E) to determine S, so leakage = H(S) = 1; the
        // handcrafted U=S, W=S copy point achieves it.
        assert!(point.leakage_lb >= 1.0 - 1e-3, "{}", point.leakage_lb);
        assert!(point.leakage_lb <= 1.0 + 1e-9, "{}", point.leakage_lb);
        assert!(point.d1 <= 1e-9 && point.d2 <= 1e-9);
    }

    #[test]
    fn anchor_dominance_at_intermediate_caps() {
        let sc = dsbs_scenario();
        let params = SearchParams::new(RegionKind::R1, 6, 11);
        let (_, point) = minimize_leakage(&sc, 0.18, 0.0, &params).unwrap();
        // The V=S copy anchor is feasible here (d1 from E alone = 0.18,
        // d2 = 0) with leakage I(S;E) + 0.
        let anchor = 1.0 - h2(0.18);
        assert!(point.leakage_lb <= anchor + 1e-9, "{}", point.leakage_lb);
        // and never below the information-theoretic floor
        assert!(point.leakage_lb >= anchor - 1e-9);
    }

    #[test]
    fn no_feasible_point_is_reported() {
        // d2 = 0 demanded over a useless Phase-2 channel and a Phase-1
        // channel too weak to carry W: nothing is feasible.
        let sc = ScenarioConfig::new(
            SourceModel::binary_symmetric(0.1, 0.1).unwrap(),
            Channel::bsc(0.5).unwrap(),
            Channel::bsc(0.5).unwrap(),
            1.0,
            1.0,
            DistortionMeasure::hamming(2),
        )
        .unwrap();
        let params = SearchParams::new(RegionKind::R1, 3, 5);
        match minimize_leakage(&sc, 0.0, 0.0, &params) {
            Err(Error::NoFeasiblePoint) => {}
            other => panic!("expected NO_FEASIBLE_POINT, got {other:?}"),
        }
    }

    #[test]
    fn single_cell_frontier_matches_minimize() {
        let sc = dsbs_scenario();
        let params = SearchParams::new(RegionKind::R1, 4, 9);
        let cells = frontier_sweep(&sc, &[0.5], &[0.5], &params).unwrap();
        assert_eq!(cells.len(), 1);
        let cell_seed = seed::derive(params.seed, &[0x4652, 0, 0]);
        let direct = minimize_leakage(
            &sc,
            0.5,
            0.5,
            &SearchParams {
                seed: cell_seed,
                ..params
            },
        )
        .unwrap();
        let cell_point = &cells[0].best.as_ref().unwrap().1;
        assert_eq!(cell_point.leakage_lb, direct.1.leakage_lb);
    }

    #[test]
    fn frontier_is_monotone_in_the_caps() {
        let sc = dsbs_scenario();
        let params = SearchParams::new(RegionKind::R1, 4, 13);
        let cells = frontier_sweep(&sc, &[0.05, 0.18], &[0.02], &params).unwrap();
        let l_tight = cells[0].best.as_ref().unwrap().1.leakage_lb;
        let l_loose = cells[1].best.as_ref().unwrap().1.leakage_lb;
        assert!(l_tight >= l_loose - 1e-9);
    }

    #[test]
    fn aux_size_bounds_are_enforced() {
        let sc = dsbs_scenario();
        let mut params = SearchParams::new(RegionKind::R1, 2, 1);
        params.aux_sizes = Some((50, 3, 3));
        match minimize_leakage(&sc, 0.5, 0.5, &params) {
            Err(Error::AuxSizeTooLarge { which: "U", .. }) => {}
            other => panic!("expected AuxSizeTooLarge, got {other:?}"),
        }
    }
}
