//! Random instances for property suites and optimizer restarts.

use rand::Rng;

use crate::prob::{AuxChannel, CondKernel, SourceModel};
use crate::real::{r, Real};

/// Dirichlet(1,..,1) draw: exponentials normalized.
pub fn random_simplex_row<R: Real>(k: usize, rng: &mut impl Rng) -> Vec<R> {
    let mut row: Vec<f64> = (0..k).map(|_| -(rng.gen::<f64>().max(1e-300)).ln()).collect();
    let total: f64 = row.iter().sum();
    for x in &mut row {
        *x /= total;
    }
    row.into_iter().map(r::<R>).collect()
}

pub fn random_kernel<R: Real>(
    input_sizes: Vec<usize>,
    output_size: usize,
    rng: &mut impl Rng,
) -> CondKernel<R> {
    let n_rows: usize = input_sizes.iter().product();
    let mut rows = Vec::with_capacity(n_rows * output_size);
    for _ in 0..n_rows {
        rows.extend(random_simplex_row::<R>(output_size, rng));
    }
    CondKernel::new(input_sizes, output_size, rows).expect("random kernel is stochastic")
}

/// Random degraded source over the given alphabet sizes.
pub fn random_source<R: Real>(
    ns: usize,
    nt: usize,
    ne: usize,
    rng: &mut impl Rng,
) -> SourceModel<R> {
    SourceModel::new(
        random_simplex_row(ns, rng),
        random_kernel(vec![ns], nt, rng),
        random_kernel(vec![nt], ne, rng),
    )
    .expect("random source is valid")
}

/// Random factored auxiliary channel.
pub fn random_aux<R: Real>(
    ns: usize,
    nu: usize,
    nv: usize,
    nw: usize,
    rng: &mut impl Rng,
) -> AuxChannel<R> {
    AuxChannel::new(
        random_kernel(vec![ns], nu, rng),
        random_kernel(vec![nu, ns], nv, rng),
        random_kernel(vec![nu, nv, ns], nw, rng),
    )
    .expect("random aux is consistent")
}
