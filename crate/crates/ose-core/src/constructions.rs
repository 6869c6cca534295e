//! Generators for the sketching matrices under study: Count-Sketch, OSNAP,
//! dense Gaussian, and the Hadamard-block example whose columns carry exactly
//! 1/(8ε) entries of absolute value √(8ε).
//!
//! Every generator is a deterministic function of its spec. Column `c` draws
//! from a stream keyed by `(seed, c)`, so any subset of columns can be
//! regenerated independently of the rest — `ColumnSampler::column` and a full
//! `materialize` agree bit for bit. Monte Carlo sweeps exploit this to avoid
//! building n-column matrices when only a handful of columns are touched.

use crate::error::{Error, Result};
use crate::rng::{
    rademacher, rng_from, sample_distinct, DOMAIN_COUNTSKETCH, DOMAIN_GAUSSIAN, DOMAIN_OSNAP,
};
use crate::sparsemat::{DenseMatrix, SketchMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    CountSketch,
    Osnap,
    Gaussian,
    HadamardBlock,
}

impl std::fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstructionKind::CountSketch => "countsketch",
            ConstructionKind::Osnap => "osnap",
            ConstructionKind::Gaussian => "gaussian",
            ConstructionKind::HadamardBlock => "hadamard_block",
        };
        f.write_str(s)
    }
}

/// Parameters of one sketch draw. `s` is ignored for gaussian/hadamard_block,
/// `eps` is used by hadamard_block only, `seed` is ignored by the
/// deterministic hadamard_block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub eps: f64,
    pub seed: u64,
}

impl ConstructionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter(format!(
                "sketch dimensions must be positive, got {}x{}",
                self.m, self.n
            )));
        }
        match self.kind {
            ConstructionKind::Osnap => {
                if self.s == 0 || self.s > self.m {
                    return Err(Error::InvalidParameter(format!(
                        "osnap requires 1 <= s <= m, got s={} m={}",
                        self.s, self.m
                    )));
                }
            }
            ConstructionKind::HadamardBlock => {
                let b = hadamard_block_order(self.eps)?;
                if !self.m.is_multiple_of(b) {
                    return Err(Error::InvalidParameter(format!(
                        "hadamard block order {b} must divide m={}",
                        self.m
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Declared column sparsity of the resulting sketch.
    pub fn column_sparsity(&self) -> Result<usize> {
        Ok(match self.kind {
            ConstructionKind::CountSketch => 1,
            ConstructionKind::Osnap => self.s,
            ConstructionKind::Gaussian => self.m,
            ConstructionKind::HadamardBlock => hadamard_block_order(self.eps)?,
        })
    }
}

/// Block order b = 1/(8ε); must resolve exactly to a power of two.
pub fn hadamard_block_order(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let bf = 1.0 / (8.0 * eps);
    let b = bf.round();
    if b < 1.0 || (b - bf).abs() > 1e-9 * bf || !(b as u64).is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "1/(8*eps) = {bf} is not a power of two"
        )));
    }
    Ok(b as usize)
}

/// Lazily addressable sketch: `column(c)` regenerates column `c` exactly as
/// the full materialization would.
#[derive(Debug, Clone)]
pub struct ColumnSampler {
    spec: ConstructionSpec,
    block: usize,   // hadamard only
    scale: f64,     // per-kind entry magnitude
    inv_sqrt_m: f64, // gaussian std
}

impl ColumnSampler {
    pub fn new(spec: ConstructionSpec) -> Result<Self> {
        spec.validate()?;
        let (block, scale) = match spec.kind {
            ConstructionKind::CountSketch => (0, 1.0),
            ConstructionKind::Osnap => (0, 1.0 / (spec.s as f64).sqrt()),
            ConstructionKind::Gaussian => (0, 0.0),
            ConstructionKind::HadamardBlock => {
                let b = hadamard_block_order(spec.eps)?;
                (b, (8.0 * spec.eps).sqrt())
            }
        };
        Ok(Self {
            spec,
            block,
            scale,
            inv_sqrt_m: 1.0 / (spec.m as f64).sqrt(),
        })
    }

    pub fn spec(&self) -> &ConstructionSpec {
        &self.spec
    }

    /// Sorted (row, value) entries of column `c`.
    pub fn column(&self, c: usize) -> Vec<(usize, f64)> {
        debug_assert!(c < self.spec.n);
        let m = self.spec.m;
        match self.spec.kind {
            ConstructionKind::CountSketch => {
                let mut rng = rng_from(self.spec.seed, &[DOMAIN_COUNTSKETCH, c as u64]);
                let row = rng.random_range(0..m);
                vec![(row, rademacher(&mut rng))]
            }
            ConstructionKind::Osnap => {
                let mut rng = rng_from(self.spec.seed, &[DOMAIN_OSNAP, c as u64]);
                let rows = sample_distinct(&mut rng, m, self.spec.s);
                let mut entries: Vec<(usize, f64)> = rows
                    .into_iter()
                    .map(|r| (r, rademacher(&mut rng) * self.scale))
                    .collect();
                entries.sort_unstable_by_key(|&(r, _)| r);
                entries
            }
            ConstructionKind::Gaussian => {
                let mut rng = rng_from(self.spec.seed, &[DOMAIN_GAUSSIAN, c as u64]);
                (0..m)
                    .map(|r| {
                        let z: f64 = rng.sample(rand_distr::StandardNormal);
                        (r, z * self.inv_sqrt_m)
                    })
                    .collect()
            }
            ConstructionKind::HadamardBlock => {
                let b = self.block;
                let jm = c % m;
                let block_index = jm / b;
                let pos = jm % b;
                (0..b)
                    .map(|i| {
                        let sign = if (i & pos).count_ones().is_multiple_of(2) {
                            1.0
                        } else {
                            -1.0
                        };
                        (block_index * b + i, sign * self.scale)
                    })
                    .collect()
            }
        }
    }

    /// Full sparse materialization (not meaningful for gaussian).
    pub fn materialize(&self) -> Result<SketchMatrix> {
        let s = self.spec.column_sparsity()?;
        let columns = (0..self.spec.n).map(|c| self.column(c)).collect();
        SketchMatrix::new(self.spec.m, self.spec.n, s, columns)
    }
}

/// Count-Sketch: each column has a single ±1 entry at a uniform row.
pub fn gen_countsketch(m: usize, n: usize, seed: u64) -> Result<SketchMatrix> {
    let spec = ConstructionSpec {
        kind: ConstructionKind::CountSketch,
        m,
        n,
        s: 1,
        eps: 0.0,
        seed,
    };
    ColumnSampler::new(spec)?.materialize()
}

/// OSNAP: s distinct uniform rows per column, values ±1/√s (unit columns).
pub fn gen_osnap(m: usize, n: usize, s: usize, seed: u64) -> Result<SketchMatrix> {
    let spec = ConstructionSpec {
        kind: ConstructionKind::Osnap,
        m,
        n,
        s,
        eps: 0.0,
        seed,
    };
    ColumnSampler::new(spec)?.materialize()
}

/// Dense i.i.d. N(0, 1/m) matrix.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    let spec = ConstructionSpec {
        kind: ConstructionKind::Gaussian,
        m,
        n,
        s: 0,
        eps: 0.0,
        seed,
    };
    let sampler = ColumnSampler::new(spec)?;
    let mut out = DenseMatrix::zeros(m, n);
    for c in 0..n {
        for (r, v) in sampler.column(c) {
            out.set(r, c, v);
        }
    }
    Ok(out)
}

/// Horizontal concatenation of copies of an m×m block-diagonal matrix whose
/// diagonal blocks are √(8ε)·H with H a Sylvester-Hadamard matrix of order
/// b = 1/(8ε). Truncated at n columns.
pub fn gen_hadamard_block(eps: f64, m: usize, n: usize) -> Result<SketchMatrix> {
    let spec = ConstructionSpec {
        kind: ConstructionKind::HadamardBlock,
        m,
        n,
        s: 0,
        eps,
        seed: 0,
    };
    ColumnSampler::new(spec)?.materialize()
}
