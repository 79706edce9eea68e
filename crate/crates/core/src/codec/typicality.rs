//! Strong typicality tests with per-cell multiplicative slack.
//!
//! A candidate word is tested against a reference joint law together with
//! already-fixed context words: cell counts must satisfy
//! `|N(ctx, cand) - N(ctx) P(cand | ctx)| <= max(delta * n * P(ctx, cand), 1)`
//! and cells of zero reference mass must not occur at all. Testing the
//! candidate against the context's own empirical makes a degenerate
//! description (constant alphabet, or an exact function of the context)
//! typical with probability one, which is what the layered encoder relies on.

use crate::prob::JointDist;

/// A reference law for one search level; the candidate axis is the last one.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    ctx_sizes: Vec<usize>,
    cand_size: usize,
    /// Dense joint over (ctx..., cand).
    p: Vec<f64>,
    /// Context marginal.
    p_ctx: Vec<f64>,
}

impl TypicalityTest {
    pub fn new(reference: &JointDist<f64>) -> Self {
        let axes = reference.axes();
        let cand_size = axes.last().expect("reference needs axes").size;
        let ctx_sizes: Vec<usize> = axes[..axes.len() - 1].iter().map(|a| a.size).collect();
        let p = reference.mass().to_vec();
        let n_ctx: usize = ctx_sizes.iter().product::<usize>().max(1);
        let mut p_ctx = vec![0.0; n_ctx];
        for (i, &v) in p.iter().enumerate() {
            p_ctx[i / cand_size] += v;
        }
        Self {
            ctx_sizes,
            cand_size,
            p,
            p_ctx,
        }
    }

    /// Bind fixed context words, precomputing per-cell count windows.
    pub fn bind<'a>(&'a self, ctx_words: &[&[u16]], delta: f64) -> BoundContext<'a> {
        assert_eq!(ctx_words.len(), self.ctx_sizes.len());
        let n = if ctx_words.is_empty() {
            0
        } else {
            ctx_words[0].len()
        };
        let mut ctx_idx = vec![0u32; n];
        for i in 0..n {
            let mut ix = 0usize;
            for (a, w) in ctx_words.iter().enumerate() {
                ix = ix * self.ctx_sizes[a] + w[i] as usize;
            }
            ctx_idx[i] = ix as u32;
        }
        let n_ctx = self.p_ctx.len();
        let mut ctx_counts = vec![0u32; n_ctx];
        for &c in &ctx_idx {
            ctx_counts[c as usize] += 1;
        }
        // an impossible context cell can never be repaired by any candidate
        let impossible = ctx_counts
            .iter()
            .zip(&self.p_ctx)
            .any(|(&cnt, &p)| cnt > 0 && p <= 0.0);

        let m = self.cand_size;
        let mut lo = vec![0i64; n_ctx * m];
        let mut hi = vec![0i64; n_ctx * m];
        for (c, (&cnt, &p_c)) in ctx_counts.iter().zip(&self.p_ctx).enumerate() {
            for b in 0..m {
                let cell = c * m + b;
                let p = self.p[cell];
                if p <= 0.0 {
                    lo[cell] = 0;
                    hi[cell] = 0;
                } else {
                    let reference = cnt as f64 * (p / p_c);
                    let slack = (delta * n as f64 * p).max(1.0);
                    lo[cell] = (reference - slack - 1e-9).ceil() as i64;
                    hi[cell] = (reference + slack + 1e-9).floor() as i64;
                }
            }
        }
        BoundContext {
            test: self,
            ctx_idx,
            impossible,
            lo,
            hi,
            counts: vec![0u32; n_ctx * m].into(),
        }
    }
}

/// A typicality test with the context words fixed; cheap per-candidate checks.
pub struct BoundContext<'a> {
    test: &'a TypicalityTest,
    ctx_idx: Vec<u32>,
    impossible: bool,
    lo: Vec<i64>,
    hi: Vec<i64>,
    counts: std::cell::RefCell<Vec<u32>>,
}

impl BoundContext<'_> {
    pub fn is_typical(&self, cand: &[u16]) -> bool {
        if self.impossible {
            return false;
        }
        let m = self.test.cand_size;
        let mut counts = self.counts.borrow_mut();
        counts.fill(0);
        for (i, &b) in cand.iter().enumerate() {
            let cell = self.ctx_idx[i] as usize * m + b as usize;
            counts[cell] += 1;
        }
        for (cell, &cnt) in counts.iter().enumerate() {
            let cnt = cnt as i64;
            if cnt < self.lo[cell] || cnt > self.hi[cell] {
                return false;
            }
        }
        true
    }
}

/// Marginal typicality of a single word against a distribution row:
/// `|N(a) - n p(a)| <= max(delta n p(a), 1)`, zero-mass symbols absent.
pub fn marginally_typical(word: &[u16], p: &[f64], delta: f64) -> bool {
    let n = word.len() as f64;
    let mut counts = vec![0u32; p.len()];
    for &x in word {
        counts[x as usize] += 1;
    }
    for (a, &cnt) in counts.iter().enumerate() {
        if p[a] <= 0.0 {
            if cnt > 0 {
                return false;
            }
            continue;
        }
        let slack = (delta * n * p[a]).max(1.0);
        if (cnt as f64 - n * p[a]).abs() > slack + 1e-9 {
            return false;
        }
    }
    true
}
