//! Reducing Agler subspaces: kernel dependence tests, the radial boundary
//! limit of `K2`, and product factor extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agler::{
    closed_form_product, extremal_pair, random_feasible_pairs, sample_points, solve_constraints,
    Flavor, GramKernel, DEFAULT_SAMPLE_SEED,
};
use crate::error::{Error, Result};
use crate::innerfn::{BlaschkeJson, BlaschkeProduct, InnerFunction, ProductInner, RationalInner};
use crate::linalg::{c, C64};
use crate::poly2::{univariate_roots, Var};
#[cfg(test)]
use crate::poly2::BiPoly;
use crate::scalar::cis;
use crate::shiftop::{agler_split, block_structure_check, split_block_check, BLOCK_TOL};

pub const DEFAULT_DEPENDENCE_SAMPLES: usize = 50;
pub const DEFAULT_R_LADDER: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];
/// Rungs `1 − 10⁻ᵏ` are appended past the given ladder up to this `k`.
pub const MAX_RADIAL_EXPONENT: i32 = 10;
pub const DEFAULT_TAU_COUNT: usize = 8;
pub const DEFAULT_PROBE: (C64, C64) = (C64::new(0.1, 0.0), C64::new(0.0, 0.1));
pub const RADIAL_FINAL_TOL: f64 = 1e-5;
pub const RADIAL_SHRINK: f64 = 5.0;
pub const FACTOR_TOL: f64 = 1e-10;
pub const FACTOR_AGREEMENT_TOL: f64 = 1e-9;
/// Product kernels must be independent of the other variable to this level.
pub const PRODUCT_DEPENDENCE_TOL: f64 = 1e-10;
/// Non-product maximal kernels must vary with `z1` by more than this.
pub const WITNESS_DEPENDENCE_TOL: f64 = 1e-5;

const RADIUS: f64 = 0.8;

/// Largest change of `K(z, w)` when only the `var` coordinates of `z` and `w`
/// are redrawn, over `n_samples` random point pairs in `|·| ≤ 0.8`.
pub fn dependence_on(k: &GramKernel, var: Var, n_samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let r = RADIUS * rng.random::<f64>().sqrt();
        cis(std::f64::consts::TAU * rng.random::<f64>()) * r
    };
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let z = (draw(), draw());
        let w = (draw(), draw());
        let (a, b) = (draw(), draw());
        let (z2, w2) = match var {
            Var::Z1 => ((a, z.1), (b, w.1)),
            Var::Z2 => ((z.0, a), (w.0, b)),
        };
        worst = worst.max((k.eval(z, w) - k.eval(z2, w2)).norm());
    }
    worst
}

/// [`dependence_on`] the first coordinate; zero certifies that `K` is a
/// function of `z2` and `w̄2` alone, up to sampling.
pub fn depends_only_z2(k: &GramKernel, n_samples: usize) -> f64 {
    dependence_on(k, Var::Z1, n_samples, DEFAULT_SAMPLE_SEED)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialRow {
    pub tau: [f64; 2],
    /// Radii actually evaluated: the ladder plus any appended rungs.
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub pass: bool,
}

/// `|(1 − r²) K2((rτ, z2), (rτ, w2))|` along each ray.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialTable {
    pub r_ladder: Vec<f64>,
    pub probe: [[f64; 2]; 2],
    pub rows: Vec<RadialRow>,
    pub pass: bool,
}

/// `count` equispaced points on the unit circle, starting at 1.
pub fn equispaced_circle(count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| cis(std::f64::consts::TAU * k as f64 / count as f64))
        .collect()
}

fn shrinks(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] * RADIAL_SHRINK <= w[0])
}

fn ladder_decreases(values: &[f64]) -> bool {
    values.last().is_none_or(|&v| v <= RADIAL_FINAL_TOL) && shrinks(values)
}

/// Evaluates `|(1 − r²) K2((rτ, z2), (rτ, w2))|` on `r_ladder`. While the
/// last value is above [`RADIAL_FINAL_TOL`] and every step has shrunk by
/// [`RADIAL_SHRINK`], rungs `1 − (1 − r)/10` are appended, up to
/// `r = 1 − 10^-MAX_RADIAL_EXPONENT`.
pub fn radial_limit_check(k2: &GramKernel, taus: &[C64], r_ladder: &[f64], probe: (C64, C64)) -> RadialTable {
    let (z2, w2) = probe;
    let floor = 10f64.powi(-MAX_RADIAL_EXPONENT);
    let rows: Vec<RadialRow> = taus
        .iter()
        .map(|&tau| {
            let value = |r: f64| {
                let x = tau * r;
                let e = 1.0 - r;
                (k2.eval((x, z2), (x, w2)) * (e * (2.0 - e))).norm()
            };
            let mut r: Vec<f64> = r_ladder.to_vec();
            let mut values: Vec<f64> = r.iter().map(|&x| value(x)).collect();
            while let Some(&last) = r.last() {
                let next_gap = (1.0 - last) / 10.0;
                if ladder_decreases(&values) || !shrinks(&values) || next_gap < floor * 0.5 {
                    break;
                }
                let next = 1.0 - next_gap;
                r.push(next);
                values.push(value(next));
            }
            let pass = ladder_decreases(&values);
            RadialRow {
                tau: [tau.re, tau.im],
                r,
                values,
                pass,
            }
        })
        .collect();
    RadialTable {
        r_ladder: r_ladder.to_vec(),
        probe: [[z2.re, z2.im], [w2.re, w2.im]],
        pass: rows.iter().all(|r| r.pass),
        rows,
    }
}

/// Radial check with the default rays, ladder and probe.
pub fn radial_limit_default(k2: &GramKernel) -> RadialTable {
    radial_limit_check(k2, &equispaced_circle(DEFAULT_TAU_COUNT), &DEFAULT_R_LADDER, DEFAULT_PROBE)
}

/// Zeros of the reflection of a one-variable stable polynomial of declared
/// degree `deg`: `1/ā` for each root `a`, padded with zeros at the origin.
fn reflected_zeros(coeffs: &[C64], deg: usize) -> Option<Vec<C64>> {
    let mut zeros: Vec<C64> = univariate_roots(coeffs)
        .into_iter()
        .map(|a| c(1.0, 0.0) / a.conj())
        .collect();
    if zeros.len() > deg || zeros.iter().any(|a| a.norm() >= 1.0) {
        return None;
    }
    zeros.resize(deg, c(0.0, 0.0));
    Some(zeros)
}

/// Splits `θ = φ(z1) ψ(z2)` when `p` has a rank-one coefficient matrix. The
/// factors are checked against `θ` at 100 points of the bidisk.
pub fn extract_factors(theta: &RationalInner<f64>) -> Option<ProductInner<f64>> {
    let (m, n) = theta.degree();
    let (p1, p2) = theta.p().factor_rank1(FACTOR_TOL)?;
    let a: Vec<C64> = (0..=m).map(|i| p1.coeff(i, 0)).collect();
    let b: Vec<C64> = (0..=n).map(|j| p2.coeff(0, j)).collect();
    let phi0 = BlaschkeProduct::from_zeros(reflected_zeros(&a, m)?).ok()?;
    let psi0 = BlaschkeProduct::from_zeros(reflected_zeros(&b, n)?).ok()?;
    let one = c(1.0, 0.0);
    let ratio = theta.evaluate(one, one) / (phi0.evaluate(one) * psi0.evaluate(one));
    if !(ratio.norm() > 0.0) {
        return None;
    }
    let phi = BlaschkeProduct::new(phi0.zeros().to_vec(), ratio / ratio.norm()).ok()?;
    let f = ProductInner::new(phi, psi0);
    let agree = sample_points(DEFAULT_SAMPLE_SEED ^ 0xfac7, 100, 0.95)
        .into_iter()
        .all(|(z1, z2)| (theta.evaluate(z1, z2) - f.evaluate(z1, z2)).norm() <= FACTOR_AGREEMENT_TOL);
    agree.then_some(f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factorization {
    pub phi: BlaschkeJson,
    pub psi: BlaschkeJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducingVerdict {
    ReducingProduct,
    NonReducing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducingReport {
    /// `z1`-variation of the `K1` of the max1min2 pair.
    pub z1_dependence_of_k1: f64,
    /// `z2`-variation of the `K2` of the min1max2 pair (products only).
    pub z2_dependence_of_k2: Option<f64>,
    /// Smallest `z1`-variation of `K1` over random feasible pairs (non-products only).
    pub feasible_scan_min: Option<f64>,
    pub radial_limit_values: RadialTable,
    pub factorization: Option<Factorization>,
    /// Largest off-diagonal entry of `S_{z1}` in the split built from the pair.
    pub block_off_diagonal: f64,
    pub verdict: ReducingVerdict,
}

#[derive(Clone, Debug)]
pub struct ReducingOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub feasible_scan: usize,
    pub block_truncation: usize,
    pub grid_n: usize,
}

impl Default for ReducingOptions {
    fn default() -> Self {
        ReducingOptions {
            n_samples: DEFAULT_DEPENDENCE_SAMPLES,
            seed: DEFAULT_SAMPLE_SEED,
            feasible_scan: 20,
            block_truncation: 6,
            grid_n: 128,
        }
    }
}

fn inconsistent(msg: String) -> Error {
    Error::InconsistentVerdict(msg)
}

pub fn reducing_harness(theta: &RationalInner<f64>) -> Result<ReducingReport> {
    reducing_harness_with(theta, &ReducingOptions::default())
}

/// Classifies `θ` as a product (reducing pair exists) or not, and checks the
/// kernel witnesses against that classification.
pub fn reducing_harness_with(theta: &RationalInner<f64>, opts: &ReducingOptions) -> Result<ReducingReport> {
    let min_grid = 4 * (2 * opts.block_truncation + theta.degree().0 + theta.degree().1);
    let grid_n = opts.grid_n.max(min_grid.next_power_of_two());
    match extract_factors(theta) {
        Some(f) => {
            let (max, min) = closed_form_product(&f);
            let dep1 = dependence_on(&max.k1, Var::Z1, opts.n_samples, opts.seed);
            let dep2 = dependence_on(&min.k2, Var::Z2, opts.n_samples, opts.seed);
            let radial = radial_limit_default(&max.k2);
            let block = block_structure_check(&f, opts.block_truncation, grid_n)?;
            if dep1 > PRODUCT_DEPENDENCE_TOL {
                return Err(inconsistent(format!("product K1max depends on z1 ({dep1:e})")));
            }
            if dep2 > PRODUCT_DEPENDENCE_TOL {
                return Err(inconsistent(format!("product K2max depends on z2 ({dep2:e})")));
            }
            if !radial.pass {
                return Err(inconsistent("radial limit of K2min does not vanish".into()));
            }
            if !block.pass {
                return Err(inconsistent(format!(
                    "product split is not block diagonal (off-diagonal {:e})",
                    block.off_diagonal
                )));
            }
            Ok(ReducingReport {
                z1_dependence_of_k1: dep1,
                z2_dependence_of_k2: Some(dep2),
                feasible_scan_min: None,
                radial_limit_values: radial,
                factorization: Some(Factorization {
                    phi: BlaschkeJson::from_product(&f.phi),
                    psi: BlaschkeJson::from_product(&f.psi),
                }),
                block_off_diagonal: block.off_diagonal,
                verdict: ReducingVerdict::ReducingProduct,
            })
        }
        None => {
            let sys = solve_constraints(theta)?;
            let max = extremal_pair(&sys, Flavor::Max1Min2)?;
            let dep1 = dependence_on(&max.k1, Var::Z1, opts.n_samples, opts.seed);
            let radial = radial_limit_default(&max.k2);
            if dep1 <= WITNESS_DEPENDENCE_TOL {
                return Err(inconsistent(format!(
                    "non-product K1max is independent of z1 ({dep1:e})"
                )));
            }
            if !radial.pass {
                return Err(inconsistent("radial limit of K2min does not vanish".into()));
            }
            let mut scan = f64::INFINITY;
            for pair in random_feasible_pairs(&sys, opts.feasible_scan, opts.seed ^ 0x5ca7)? {
                scan = scan.min(dependence_on(&pair.k1, Var::Z1, opts.n_samples, opts.seed));
            }
            if scan <= WITNESS_DEPENDENCE_TOL {
                return Err(inconsistent(format!(
                    "a feasible K1 is independent of z1 ({scan:e})"
                )));
            }
            let split = agler_split(&InnerFunction::Rational(theta.clone()), &max, opts.block_truncation, grid_n)?;
            let block = split_block_check(&split)?;
            if block.off_diagonal <= BLOCK_TOL {
                return Err(inconsistent(format!(
                    "non-product split is block diagonal (off-diagonal {:e})",
                    block.off_diagonal
                )));
            }
            Ok(ReducingReport {
                z1_dependence_of_k1: dep1,
                z2_dependence_of_k2: None,
                feasible_scan_min: Some(scan),
                radial_limit_values: radial,
                factorization: None,
                block_off_diagonal: block.off_diagonal,
                verdict: ReducingVerdict::NonReducing,
            })
        }
    }
}
