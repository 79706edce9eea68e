//! Discrete memoryless channels: capacity and symbol-wise simulation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::sample_index;
use crate::real::{r, Real};
use crate::seed;

/// Iteration cap for the capacity solver.
pub const CAPACITY_ITERATION_CAP: usize = 100_000;

/// A DMC given by a row-stochastic transition matrix P(y|x).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<R: Real> {
    input_size: usize,
    output_size: usize,
    transition: Vec<R>,
}

impl<R: Real> Channel<R> {
    pub fn new(input_size: usize, output_size: usize, transition: Vec<R>) -> Result<Self> {
        if input_size == 0 || output_size == 0 {
            return Err(Error::AlphabetMismatch {
                context: "channel alphabets must be nonempty".into(),
            });
        }
        if transition.len() != input_size * output_size {
            return Err(Error::AlphabetMismatch {
                context: format!(
                    "transition has {} entries, expected {}x{}",
                    transition.len(),
                    input_size,
                    output_size
                ),
            });
        }
        let ch = Self {
            input_size,
            output_size,
            transition,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        for x in 0..self.input_size {
            let row = self.row(x);
            let mut sum = R::zero();
            for &p in row {
                if p < R::zero() {
                    return Err(Error::RowNotStochastic {
                        what: "channel",
                        row: x,
                        sum: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
                sum += p;
            }
            if (sum - R::one()).abs() > R::prob_tol() {
                return Err(Error::RowNotStochastic {
                    what: "channel",
                    row: x,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    pub fn identity(n: usize) -> Self {
        let mut t = vec![R::zero(); n * n];
        for i in 0..n {
            t[i * n + i] = R::one();
        }
        Self::new(n, n, t).expect("identity channel")
    }

    pub fn bsc(p: R) -> Result<Self> {
        Self::new(2, 2, vec![R::one() - p, p, p, R::one() - p])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &[R] {
        &self.transition[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn transition(&self) -> &[R] {
        &self.transition
    }

    /// Pass a word through the channel symbol by symbol; deterministic given
    /// the seed.
    pub fn transmit(&self, xs: &[u16], seed: u64) -> Result<Vec<u16>> {
        let mut rng = seed::rng_from(seed, &[0x0044_4d43]);
        let mut ys = Vec::with_capacity(xs.len());
        for (position, &x) in xs.iter().enumerate() {
            let x = x as usize;
            if x >= self.input_size {
                return Err(Error::SymbolOutOfRange {
                    position,
                    symbol: x,
                    alphabet: self.input_size,
                });
            }
            ys.push(sample_index(self.row(x), &mut rng) as u16);
        }
        Ok(ys)
    }
}

/// Output of the capacity solver.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult<R: Real> {
    /// Capacity estimate in bits per channel use (the lower bound at stop).
    pub capacity: R,
    /// Capacity-achieving input distribution at stop.
    pub input_dist: Vec<R>,
    pub iterations: usize,
    /// Final duality-gap bound: max-row-divergence minus the lower bound.
    pub gap: R,
}

/// Channel capacity by alternating maximization with the standard
/// upper/lower bound stopping rule: stop once
/// `max_x D(P(.|x) || r) - sum_x p(x) D(P(.|x) || r) <= tol`.
///
/// Deterministic: always starts from the uniform input distribution.
pub fn capacity<R: Real>(ch: &Channel<R>, tol: R) -> Result<CapacityResult<R>> {
    assert!(tol > R::zero(), "capacity tolerance must be positive");
    let nx = ch.input_size();
    let ny = ch.output_size();
    let mut p = vec![R::one() / r::<R>(nx as f64); nx];
    let mut d = vec![R::zero(); nx];
    let mut gap = R::infinity();

    for it in 1..=CAPACITY_ITERATION_CAP {
        // Output marginal r(y) = sum_x p(x) W(y|x).
        let mut out = vec![R::zero(); ny];
        for (x, &px) in p.iter().enumerate() {
            for (oy, &ry) in out.iter_mut().zip(ch.row(x)) {
                *oy += px * ry;
            }
        }
        // Row divergences D(W(.|x) || r) in bits.
        let mut lower = R::zero();
        let mut upper = R::neg_infinity();
        for x in 0..nx {
            let row = ch.row(x);
            let mut dx = R::zero();
            for (py, oy) in row.iter().zip(&out) {
                if *py > R::zero() {
                    dx += *py * (*py / *oy).log2();
                }
            }
            d[x] = dx;
            lower += p[x] * dx;
            if dx > upper {
                upper = dx;
            }
        }
        gap = upper - lower;
        if gap <= tol {
            return Ok(CapacityResult {
                capacity: lower,
                input_dist: p,
                iterations: it,
                gap,
            });
        }
        // Multiplicative update p(x) <- p(x) 2^{D(x)} / Z.
        let mut z = R::zero();
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (*dx - lower).exp2();
            z += *px;
        }
        for px in p.iter_mut() {
            *px /= z;
        }
    }
    Err(Error::NoConvergence {
        iterations: CAPACITY_ITERATION_CAP,
        gap: gap.to_f64().unwrap_or(f64::NAN),
    })
}
