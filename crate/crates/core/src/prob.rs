//! Exact finite-alphabet probability calculus.
//!
//! [`JointDist`] is a dense tensor over named axes; entropies and mutual
//! informations are computed by exact summation in base-2 logs. The degraded
//! source triple lives in [`SourceModel`] and the auxiliary description
//! channel in [`AuxChannel`]; [`assemble_joint`] multiplies them into the
//! six-axis law over (S, T, E, U, V, W), which by construction satisfies both
//! Markov chains S-T-E and (U,V,W)-S-(T,E).

use rand::Rng;

use crate::error::{Error, Result};
use crate::real::{r, Real};
use crate::seed;

/// Default cap on dense tensor cells. Products of alphabet sizes beyond this
/// are rejected instead of allocated.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// Canonical axis names of an assembled joint.
pub const AXES_STEUVW: [&str; 6] = ["S", "T", "E", "U", "V", "W"];

/// A finite alphabet; symbols are `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::AlphabetMismatch {
                context: "alphabet size must be at least 1".into(),
            });
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// A named tensor axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            size,
        }
    }
}

/// Dense probability tensor over an ordered list of named axes.
///
/// Mass is stored row-major with the last axis fastest.
#[derive(Debug, Clone)]
pub struct JointDist<R: Real> {
    axes: Vec<Axis>,
    mass: Vec<R>,
}

impl<R: Real> JointDist<R> {
    pub fn new(axes: Vec<Axis>, mass: Vec<R>) -> Result<Self> {
        Self::with_cell_cap(axes, mass, DEFAULT_CELL_CAP)
    }

    pub fn with_cell_cap(axes: Vec<Axis>, mass: Vec<R>, cap: usize) -> Result<Self> {
        let mut cells: u128 = 1;
        for ax in &axes {
            if ax.size == 0 {
                return Err(Error::AlphabetMismatch {
                    context: format!("axis {} has size 0", ax.name),
                });
            }
            cells = cells.saturating_mul(ax.size as u128);
        }
        if cells > cap as u128 {
            return Err(Error::TensorTooLarge { cells, cap });
        }
        for (i, a) in axes.iter().enumerate() {
            for b in &axes[i + 1..] {
                if a.name == b.name {
                    return Err(Error::OverlappingSets {
                        name: a.name.clone(),
                    });
                }
            }
        }
        if mass.len() as u128 != cells {
            return Err(Error::AlphabetMismatch {
                context: format!("mass has {} cells, axes imply {}", mass.len(), cells),
            });
        }
        Ok(Self { axes, mass })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn mass(&self) -> &[R] {
        &self.mass
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis { name: name.into() })
    }

    /// Decompose a flat index into per-axis digits.
    fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.axes.len()];
        for i in (0..self.axes.len()).rev() {
            out[i] = flat % self.axes[i].size;
            flat /= self.axes[i].size;
        }
        out
    }

    /// Confirms nonnegativity and unit total mass, reporting the first
    /// offending cell otherwise.
    pub fn validate(&self) -> Result<()> {
        for (i, &p) in self.mass.iter().enumerate() {
            if p < R::zero() {
                return Err(Error::NegativeMass {
                    cell: self.digits(i),
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let total: R = self.mass.iter().copied().sum();
        if (total - R::one()).abs() > R::prob_tol() {
            return Err(Error::NotNormalized {
                total: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Marginal onto the named axes, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointDist<R>> {
        let keep: Vec<usize> = names
            .iter()
            .map(|n| self.axis_index(n))
            .collect::<Result<_>>()?;
        for (i, a) in keep.iter().enumerate() {
            if keep[i + 1..].contains(a) {
                return Err(Error::OverlappingSets {
                    name: self.axes[*a].name.clone(),
                });
            }
        }
        let out_axes: Vec<Axis> = keep.iter().map(|&i| self.axes[i].clone()).collect();
        let mut out_strides = vec![1usize; keep.len()];
        for i in (0..keep.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * out_axes[i + 1].size;
        }
        let out_len: usize = out_axes.iter().map(|a| a.size).product();
        let mut out_mass = vec![R::zero(); out_len.max(1)];

        // Per-axis contribution of each full-tensor digit to the output index.
        let full_sizes: Vec<usize> = self.axes.iter().map(|a| a.size).collect();
        let mut contrib = vec![0usize; self.axes.len()];
        for (k, &ax) in keep.iter().enumerate() {
            contrib[ax] = out_strides[k];
        }

        let mut digits = vec![0usize; self.axes.len()];
        let mut out_idx = 0usize;
        for &p in &self.mass {
            out_mass[out_idx] += p;
            // increment mixed-radix counter, maintaining out_idx incrementally
            for i in (0..full_sizes.len()).rev() {
                digits[i] += 1;
                out_idx += contrib[i];
                if digits[i] < full_sizes[i] {
                    break;
                }
                out_idx -= contrib[i] * full_sizes[i];
                digits[i] = 0;
            }
        }
        JointDist::with_cell_cap(out_axes, out_mass, usize::MAX)
    }

    fn entropy_of_mass(mass: &[R]) -> R {
        let mut h = R::zero();
        for &p in mass {
            if p > R::zero() {
                h -= p * p.log2();
            }
        }
        h
    }

    /// Entropy allowing the empty variable set (H() = 0).
    fn entropy_allow_empty(&self, vars: &[&str]) -> Result<R> {
        if vars.is_empty() {
            return Ok(R::zero());
        }
        let m = self.marginal(vars)?;
        Ok(Self::entropy_of_mass(&m.mass))
    }

    /// Joint entropy of the named axes in bits.
    pub fn entropy(&self, vars: &[&str]) -> Result<R> {
        if vars.is_empty() {
            return Err(Error::UnknownAxis {
                name: "(empty variable set)".into(),
            });
        }
        self.entropy_allow_empty(vars)
    }

    fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                for name in a.iter() {
                    if b.contains(name) {
                        return Err(Error::OverlappingSets {
                            name: (*name).into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// I(a;b) in bits.
    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<R> {
        Self::check_disjoint(&[a, b])?;
        let ab: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
        Ok(self.entropy_allow_empty(a)? + self.entropy_allow_empty(b)?
            - self.entropy_allow_empty(&ab)?)
    }

    /// I(a;b|c) in bits; with empty `c` this is exactly `mutual_info`.
    pub fn cond_mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<R> {
        Self::check_disjoint(&[a, b, c])?;
        let ac: Vec<&str> = a.iter().chain(c.iter()).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c.iter()).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b.iter()).chain(c.iter()).copied().collect();
        Ok(self.entropy_allow_empty(&ac)? + self.entropy_allow_empty(&bc)?
            - self.entropy_allow_empty(&abc)?
            - self.entropy_allow_empty(c)?)
    }

    /// Conditional kernel P(out | given), rows ordered by the given axes
    /// (row-major over their sizes). Zero-mass contexts get a uniform row.
    pub fn conditional_kernel(&self, given: &[&str], out: &str) -> Result<CondKernel<R>> {
        let mut names: Vec<&str> = given.to_vec();
        names.push(out);
        let m = self.marginal(&names)?;
        let out_size = m.axes.last().unwrap().size;
        let n_rows: usize = m.axes[..m.axes.len() - 1].iter().map(|a| a.size).product();
        let mut rows = Vec::with_capacity(n_rows * out_size);
        for row in 0..n_rows {
            let slice = &m.mass[row * out_size..(row + 1) * out_size];
            let total: R = slice.iter().copied().sum();
            if total > R::zero() {
                rows.extend(slice.iter().map(|&p| p / total));
            } else {
                rows.extend(std::iter::repeat_n(R::one() / r::<R>(out_size as f64), out_size));
            }
        }
        CondKernel::new(
            m.axes[..m.axes.len() - 1].iter().map(|a| a.size).collect(),
            out_size,
            rows,
        )
    }
}

/// Row-stochastic conditional kernel over tuple inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CondKernel<R: Real> {
    input_sizes: Vec<usize>,
    output_size: usize,
    rows: Vec<R>,
}

impl<R: Real> CondKernel<R> {
    pub fn new(input_sizes: Vec<usize>, output_size: usize, rows: Vec<R>) -> Result<Self> {
        let n_rows: usize = input_sizes.iter().product();
        if output_size == 0 || input_sizes.contains(&0) {
            return Err(Error::AlphabetMismatch {
                context: "kernel alphabets must be nonempty".into(),
            });
        }
        if rows.len() != n_rows * output_size {
            return Err(Error::AlphabetMismatch {
                context: format!(
                    "kernel has {} entries, expected {} rows x {} outputs",
                    rows.len(),
                    n_rows,
                    output_size
                ),
            });
        }
        let k = Self {
            input_sizes,
            output_size,
            rows,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        for row in 0..self.n_rows() {
            let slice = self.row_slice(row);
            let mut sum = R::zero();
            for &p in slice {
                if p < R::zero() {
                    return Err(Error::RowNotStochastic {
                        what: "kernel",
                        row,
                        sum: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
                sum += p;
            }
            if (sum - R::one()).abs() > R::prob_tol() {
                return Err(Error::RowNotStochastic {
                    what: "kernel",
                    row,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Deterministic kernel: output = map(inputs).
    pub fn deterministic(
        input_sizes: Vec<usize>,
        output_size: usize,
        map: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let n_rows: usize = input_sizes.iter().product();
        let mut rows = vec![R::zero(); n_rows * output_size];
        let mut idx = vec![0usize; input_sizes.len()];
        for row in 0..n_rows {
            let out = map(&idx);
            assert!(out < output_size, "deterministic map out of range");
            rows[row * output_size + out] = R::one();
            for i in (0..input_sizes.len()).rev() {
                idx[i] += 1;
                if idx[i] < input_sizes[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Self::new(input_sizes, output_size, rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::deterministic(vec![n], n, |i| i[0]).expect("identity kernel")
    }

    /// Binary symmetric kernel with crossover probability `p`.
    pub fn bsc(p: R) -> Result<Self> {
        Self::new(vec![2], 2, vec![R::one() - p, p, p, R::one() - p])
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn n_rows(&self) -> usize {
        self.input_sizes.iter().product()
    }

    pub fn row_slice(&self, row: usize) -> &[R] {
        &self.rows[row * self.output_size..(row + 1) * self.output_size]
    }

    pub fn rows_mut(&mut self) -> &mut Vec<R> {
        &mut self.rows
    }

    pub fn rows(&self) -> &[R] {
        &self.rows
    }

    fn row_of(&self, inputs: &[usize]) -> usize {
        debug_assert_eq!(inputs.len(), self.input_sizes.len());
        let mut row = 0usize;
        for (i, &x) in inputs.iter().enumerate() {
            row = row * self.input_sizes[i] + x;
        }
        row
    }

    pub fn prob(&self, inputs: &[usize], out: usize) -> R {
        self.rows[self.row_of(inputs) * self.output_size + out]
    }

    /// Draw an output symbol for the given inputs.
    pub fn sample(&self, inputs: &[usize], rng: &mut impl Rng) -> usize {
        let slice = self.row_slice(self.row_of(inputs));
        sample_index(slice, rng)
    }
}

/// Inverse-CDF draw from an unnormalized nonnegative row.
pub(crate) fn sample_index<R: Real>(row: &[R], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen::<f64>();
    let target = r::<R>(u);
    let mut acc = R::zero();
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    // Guard against accumulated rounding.
    row.len() - 1
}

/// Degraded source triple: S ~ p_s, T ~ t_given_s, E ~ e_given_t.
///
/// E is generated from T alone, so S-T-E is a Markov chain by construction.
#[derive(Debug, Clone)]
pub struct SourceModel<R: Real> {
    p_s: Vec<R>,
    t_given_s: CondKernel<R>,
    e_given_t: CondKernel<R>,
}

impl<R: Real> SourceModel<R> {
    pub fn new(p_s: Vec<R>, t_given_s: CondKernel<R>, e_given_t: CondKernel<R>) -> Result<Self> {
        let mut sum = R::zero();
        for &p in &p_s {
            if p < R::zero() {
                return Err(Error::RowNotStochastic {
                    what: "p_s",
                    row: 0,
                    sum: p.to_f64().unwrap_or(f64::NAN),
                });
            }
            sum += p;
        }
        if (sum - R::one()).abs() > R::prob_tol() {
            return Err(Error::RowNotStochastic {
                what: "p_s",
                row: 0,
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        if t_given_s.input_sizes() != [p_s.len()] {
            return Err(Error::AlphabetMismatch {
                context: "t_given_s input must be the S alphabet".into(),
            });
        }
        if e_given_t.input_sizes() != [t_given_s.output_size()] {
            return Err(Error::AlphabetMismatch {
                context: "e_given_t input must be the T alphabet".into(),
            });
        }
        Ok(Self {
            p_s,
            t_given_s,
            e_given_t,
        })
    }

    /// Doubly symmetric binary source: S ~ Bern(1/2), T = BSC(p1)(S),
    /// E = BSC(p2)(T).
    pub fn binary_symmetric(p1: R, p2: R) -> Result<Self> {
        Self::new(
            vec![r(0.5), r(0.5)],
            CondKernel::bsc(p1)?,
            CondKernel::bsc(p2)?,
        )
    }

    pub fn s_size(&self) -> usize {
        self.p_s.len()
    }

    pub fn t_size(&self) -> usize {
        self.t_given_s.output_size()
    }

    pub fn e_size(&self) -> usize {
        self.e_given_t.output_size()
    }

    pub fn p_s(&self) -> &[R] {
        &self.p_s
    }

    pub fn t_given_s(&self) -> &CondKernel<R> {
        &self.t_given_s
    }

    pub fn e_given_t(&self) -> &CondKernel<R> {
        &self.e_given_t
    }

    /// Joint law over (S, T, E).
    pub fn joint_ste(&self) -> JointDist<R> {
        let (ns, nt, ne) = (self.s_size(), self.t_size(), self.e_size());
        let mut mass = Vec::with_capacity(ns * nt * ne);
        for s in 0..ns {
            for t in 0..nt {
                for e in 0..ne {
                    mass.push(self.p_s[s] * self.t_given_s.prob(&[s], t) * self.e_given_t.prob(&[t], e));
                }
            }
        }
        JointDist::new(
            vec![Axis::new("S", ns), Axis::new("T", nt), Axis::new("E", ne)],
            mass,
        )
        .expect("source joint within cap")
    }

    /// `n` i.i.d. draws of (S, T, E); deterministic given the seed.
    pub fn sample_iid(&self, n: usize, seed: u64) -> (Vec<u16>, Vec<u16>, Vec<u16>) {
        let mut rng = seed::rng_from(seed, &[0x0053_5445]);
        let mut s = Vec::with_capacity(n);
        let mut t = Vec::with_capacity(n);
        let mut e = Vec::with_capacity(n);
        for _ in 0..n {
            let si = sample_index(&self.p_s, &mut rng);
            let ti = self.t_given_s.sample(&[si], &mut rng);
            let ei = self.e_given_t.sample(&[ti], &mut rng);
            s.push(si as u16);
            t.push(ti as u16);
            e.push(ei as u16);
        }
        (s, t, e)
    }
}

/// Factored auxiliary channel P(U|S) P(V|U,S) P(W|U,V,S).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxChannel<R: Real> {
    u_given_s: CondKernel<R>,
    v_given_us: CondKernel<R>,
    w_given_uvs: CondKernel<R>,
}

impl<R: Real> AuxChannel<R> {
    pub fn new(
        u_given_s: CondKernel<R>,
        v_given_us: CondKernel<R>,
        w_given_uvs: CondKernel<R>,
    ) -> Result<Self> {
        let s = u_given_s.input_sizes()[0];
        let u = u_given_s.output_size();
        let v = v_given_us.output_size();
        if v_given_us.input_sizes() != [u, s] {
            return Err(Error::AlphabetMismatch {
                context: "v_given_us inputs must be (U, S)".into(),
            });
        }
        if w_given_uvs.input_sizes() != [u, v, s] {
            return Err(Error::AlphabetMismatch {
                context: "w_given_uvs inputs must be (U, V, S)".into(),
            });
        }
        Ok(Self {
            u_given_s,
            v_given_us,
            w_given_uvs,
        })
    }

    /// All three descriptions constant (size-1 alphabets).
    pub fn constant(s_size: usize) -> Self {
        Self::new(
            CondKernel::deterministic(vec![s_size], 1, |_| 0).unwrap(),
            CondKernel::deterministic(vec![1, s_size], 1, |_| 0).unwrap(),
            CondKernel::deterministic(vec![1, 1, s_size], 1, |_| 0).unwrap(),
        )
        .unwrap()
    }

    /// Copies of S on selected descriptions, constants elsewhere.
    pub fn copies(s_size: usize, u_copy: bool, v_copy: bool, w_copy: bool) -> Self {
        let u_size = if u_copy { s_size } else { 1 };
        let v_size = if v_copy { s_size } else { 1 };
        let w_size = if w_copy { s_size } else { 1 };
        let u = if u_copy {
            CondKernel::identity(s_size)
        } else {
            CondKernel::deterministic(vec![s_size], 1, |_| 0).unwrap()
        };
        let v = CondKernel::deterministic(vec![u_size, s_size], v_size, |ix| {
            if v_copy {
                ix[1]
            } else {
                0
            }
        })
        .unwrap();
        let w = CondKernel::deterministic(vec![u_size, v_size, s_size], w_size, |ix| {
            if w_copy {
                ix[2]
            } else {
                0
            }
        })
        .unwrap();
        Self::new(u, v, w).unwrap()
    }

    pub fn s_size(&self) -> usize {
        self.u_given_s.input_sizes()[0]
    }

    pub fn u_size(&self) -> usize {
        self.u_given_s.output_size()
    }

    pub fn v_size(&self) -> usize {
        self.v_given_us.output_size()
    }

    pub fn w_size(&self) -> usize {
        self.w_given_uvs.output_size()
    }

    pub fn u_given_s(&self) -> &CondKernel<R> {
        &self.u_given_s
    }

    pub fn v_given_us(&self) -> &CondKernel<R> {
        &self.v_given_us
    }

    pub fn w_given_uvs(&self) -> &CondKernel<R> {
        &self.w_given_uvs
    }

    pub fn factors_mut(&mut self) -> (&mut CondKernel<R>, &mut CondKernel<R>, &mut CondKernel<R>) {
        (
            &mut self.u_given_s,
            &mut self.v_given_us,
            &mut self.w_given_uvs,
        )
    }
}

/// Joint law over (S, T, E, U, V, W):
/// p(s) t(t|s) e(e|t) u(u|s) v(v|u,s) w(w|u,v,s).
pub fn assemble_joint<R: Real>(src: &SourceModel<R>, aux: &AuxChannel<R>) -> Result<JointDist<R>> {
    if aux.s_size() != src.s_size() {
        return Err(Error::AlphabetMismatch {
            context: format!(
                "aux is over an S alphabet of size {}, source has {}",
                aux.s_size(),
                src.s_size()
            ),
        });
    }
    let (ns, nt, ne) = (src.s_size(), src.t_size(), src.e_size());
    let (nu, nv, nw) = (aux.u_size(), aux.v_size(), aux.w_size());
    let cells = ns
        .checked_mul(nt)
        .and_then(|c| c.checked_mul(ne))
        .and_then(|c| c.checked_mul(nu))
        .and_then(|c| c.checked_mul(nv))
        .and_then(|c| c.checked_mul(nw))
        .ok_or(Error::TensorTooLarge {
            cells: u128::MAX,
            cap: DEFAULT_CELL_CAP,
        })?;
    if cells > DEFAULT_CELL_CAP {
        return Err(Error::TensorTooLarge {
            cells: cells as u128,
            cap: DEFAULT_CELL_CAP,
        });
    }
    let mut mass = Vec::with_capacity(cells);
    for s in 0..ns {
        let ps = src.p_s()[s];
        for t in 0..nt {
            let pt = src.t_given_s().prob(&[s], t);
            for e in 0..ne {
                let pe = src.e_given_t().prob(&[t], e);
                let base = ps * pt * pe;
                for u in 0..nu {
                    let pu = aux.u_given_s().prob(&[s], u);
                    for v in 0..nv {
                        let pv = aux.v_given_us().prob(&[u, s], v);
                        let stem = base * pu * pv;
                        for w in 0..nw {
                            mass.push(stem * aux.w_given_uvs().prob(&[u, v, s], w));
                        }
                    }
                }
            }
        }
    }
    JointDist::new(
        vec![
            Axis::new("S", ns),
            Axis::new("T", nt),
            Axis::new("E", ne),
            Axis::new("U", nu),
            Axis::new("V", nv),
            Axis::new("W", nw),
        ],
        mass,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            return 0.0;
        }
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn uniform2x2() -> JointDist<f64> {
        JointDist::new(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.25; 4],
        )
        .unwrap()
    }

    #[test]
    fn validate_accepts_uniform() {
        assert!(uniform2x2().validate().is_ok());
    }

    #[test]
    fn validate_rejects_negative_cell() {
        let d = JointDist::new(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.5, 0.35, 0.25, -0.1],
        )
        .unwrap();
        match d.validate() {
            Err(Error::NegativeMass { cell, .. }) => assert_eq!(cell, vec![1, 1]),
            other => panic!("expected NEGATIVE_MASS, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_deficient_mass() {
        let d = JointDist::new(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.25, 0.25, 0.25, 0.249],
        )
        .unwrap();
        match d.validate() {
            Err(Error::NotNormalized { total }) => assert!((total - 0.999).abs() < 1e-12),
            other => panic!("expected NOT_NORMALIZED, got {other:?}"),
        }
    }

    #[test]
    fn cell_cap_is_enforced() {
        let axes = vec![
            Axis::new("A", 200),
            Axis::new("B", 200),
            Axis::new("C", 200),
        ];
        match JointDist::<f64>::new(axes, vec![]) {
            Err(Error::TensorTooLarge { .. }) => {}
            other => panic!("expected TensorTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn assemble_identity_kernels_is_diagonal() {
        let src = SourceModel::<f64>::new(
            vec![0.5, 0.5],
            CondKernel::identity(2),
            CondKernel::identity(2),
        )
        .unwrap();
        let aux = AuxChannel::copies(2, true, false, false);
        let j = assemble_joint(&src, &aux).unwrap();
        j.validate().unwrap();
        let m = j.marginal(&["S", "T", "E", "U"]).unwrap();
        for (flat, &p) in m.mass().iter().enumerate() {
            let ix = m.digits(flat);
            // mass sits on the s = t = e = u diagonal, P(s) = 1/2 per cell
            let expected = if ix.iter().all(|&x| x == ix[0]) { 0.5 } else { 0.0 };
            assert!((p - expected).abs() < 1e-15, "cell {ix:?} = {p}");
        }
    }

    #[test]
    fn assemble_dsbs_two_step_crossover() {
        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let j = assemble_joint(&src, &AuxChannel::constant(2)).unwrap();
        let se = j.marginal(&["S", "E"]).unwrap();
        let p_neq = se.mass()[1] + se.mass()[2];
        assert!((p_neq - 0.18).abs() < 1e-12);
    }

    #[test]
    fn assemble_rejects_malformed_kernel() {
        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        // u_given_s row sums 0.9
        let bad = CondKernel::<f64>::new(vec![2], 2, vec![0.5, 0.4, 0.5, 0.4]);
        match bad {
            Err(Error::RowNotStochastic { .. }) => {}
            other => panic!("expected RowNotStochastic, got {other:?}"),
        }
        // alphabet mismatch is its own error
        let aux3 = AuxChannel::<f64>::constant(3);
        match assemble_joint(&src, &aux3) {
            Err(Error::AlphabetMismatch { .. }) => {}
            other => panic!("expected ALPHABET_MISMATCH, got {other:?}"),
        }
    }

    #[test]
    fn entropy_examples() {
        let d = JointDist::<f64>::new(vec![Axis::new("S", 2)], vec![0.5, 0.5]).unwrap();
        assert!((d.entropy(&["S"]).unwrap() - 1.0).abs() < 1e-15);

        let d = JointDist::<f64>::new(vec![Axis::new("S", 2)], vec![0.89, 0.11]).unwrap();
        assert!((d.entropy(&["S"]).unwrap() - h2(0.11)).abs() < 1e-12);
        assert!((d.entropy(&["S"]).unwrap() - 0.49999).abs() < 1e-4);

        let d = JointDist::<f64>::new(vec![Axis::new("S", 3)], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.entropy(&["S"]).unwrap(), 0.0);

        match d.entropy(&["Q"]) {
            Err(Error::UnknownAxis { name }) => assert_eq!(name, "Q"),
            other => panic!("expected UNKNOWN_AXIS, got {other:?}"),
        }
    }

    #[test]
    fn mutual_info_examples() {
        // Y = X, uniform bit
        let copy = JointDist::<f64>::new(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert!((copy.mutual_info(&["X"], &["Y"]).unwrap() - 1.0).abs() < 1e-15);

        // independent
        assert!(uniform2x2().mutual_info(&["X"], &["Y"]).unwrap().abs() < 1e-15);

        // S ~ Bern(1/2), T via BSC(0.1)
        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let st = src.joint_ste();
        let i_st = st.mutual_info(&["S"], &["T"]).unwrap();
        assert!((i_st - (1.0 - h2(0.1))).abs() < 1e-12);
        assert!((i_st - 0.5310).abs() < 1e-4);

        match st.mutual_info(&["S"], &["S"]) {
            Err(Error::OverlappingSets { .. }) => {}
            other => panic!("expected OVERLAPPING_SETS, got {other:?}"),
        }
    }

    #[test]
    fn cond_mutual_info_examples() {
        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let j = assemble_joint(&src, &AuxChannel::copies(2, false, true, false)).unwrap();

        // Markov chain S-T-E forces I(S;E|T) = 0
        assert!(j.cond_mutual_info(&["S"], &["E"], &["T"]).unwrap().abs() < 1e-12);

        // U const, V = S: I(V;T|E,U) = I(S;T) - I(S;E) = h(0.18) - h(0.1)
        let got = j.cond_mutual_info(&["V"], &["T"], &["E", "U"]).unwrap();
        let expect = h2(0.18) - h2(0.1);
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.2111).abs() < 1e-4);

        // empty conditioning set reduces to mutual information exactly
        let a = j.cond_mutual_info(&["S"], &["T"], &[]).unwrap();
        let b = j.mutual_info(&["S"], &["T"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_iid_contracts() {
        let ident = SourceModel::<f64>::new(
            vec![0.5, 0.5],
            CondKernel::identity(2),
            CondKernel::identity(2),
        )
        .unwrap();
        let (s, t, e) = ident.sample_iid(64, 9);
        assert_eq!(s, t);
        assert_eq!(t, e);

        let src = SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let a = src.sample_iid(100, 1234);
        let b = src.sample_iid(100, 1234);
        assert_eq!(a, b);

        let n = 100_000;
        let (s, t, _) = src.sample_iid(n, 42);
        let mismatch = s.iter().zip(&t).filter(|(a, b)| a != b).count() as f64 / n as f64;
        assert!((mismatch - 0.1).abs() < 0.01, "empirical flip rate {mismatch}");
    }

    #[test]
    fn ste_marginal_is_independent_of_aux() {
        let src = SourceModel::<f64>::binary_symmetric(0.2, 0.05).unwrap();
        let a = assemble_joint(&src, &AuxChannel::constant(2)).unwrap();
        let b = assemble_joint(&src, &AuxChannel::copies(2, true, true, true)).unwrap();
        let ma = a.marginal(&["S", "T", "E"]).unwrap();
        let mb = b.marginal(&["S", "T", "E"]).unwrap();
        for (x, y) in ma.mass().iter().zip(mb.mass()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn works_in_f32_too() {
        let d = JointDist::<f32>::new(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.25; 4],
        )
        .unwrap();
        d.validate().unwrap();
        assert!((d.entropy(&["X", "Y"]).unwrap() - 2.0).abs() < 1e-5);
    }
}
