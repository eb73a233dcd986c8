//! Commutators, numerical rank across truncation ladders, eigenvalue
//! clusters, and the rank-law harness.

use serde::Serialize;

use crate::agler::{closed_form_product, sample_points, DEFAULT_SAMPLE_SEED};
use crate::error::{Error, Result};
use crate::hardy::{TorusGrid, DEFAULT_GRID};
use crate::innerfn::{InnerFunction, ProductInner};
use crate::linalg::{asymmetry, c, hermitian_eigenvalues, max_abs, numerical_rank, singular_values, CMat, C64};
use crate::poly2::Var;
use crate::shiftop::{
    agler_split, backshift_theta_grid, build_frame, compress_commutator, kernel_grid, shift_by_formula,
    AglerSplit, OperatorLabel, OperatorMatrix, DEFAULT_DROP_TOL,
};

pub const DEFAULT_LADDER: [usize; 5] = [4, 6, 8, 10, 12];
pub const DEFAULT_RANK_TOL: f64 = 1e-7;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
pub const MIN_GAP: f64 = 1e4;
/// Largest singular value treated as an exactly zero commutator.
const ZERO_FLOOR: f64 = 1e-12;

/// `A*A − AA*`.
pub fn commutator(a: &OperatorMatrix) -> OperatorMatrix {
    let m = &a.entries;
    let entries = m.adjoint() * m - m * m.adjoint();
    let label = match a.label {
        OperatorLabel::SZ1 => OperatorLabel::CommutatorZ1,
        OperatorLabel::SZ2 => OperatorLabel::CommutatorZ2,
        _ => OperatorLabel::Custom,
    };
    OperatorMatrix {
        entries,
        frame_id: a.frame_id.clone(),
        label,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankRung {
    #[serde(rename = "D")]
    pub d: usize,
    pub sv: Vec<f64>,
    pub rank: usize,
    /// `σ_r / σ_{r+1}`; `None` when `σ_{r+1}` is zero or absent.
    pub gap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankVerdict {
    Stabilized(usize),
    Growing,
    Inconclusive,
}

impl RankVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            RankVerdict::Stabilized(_) => "stabilized",
            RankVerdict::Growing => "growing",
            RankVerdict::Inconclusive => "inconclusive",
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            RankVerdict::Stabilized(r) => Some(*r),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub ladder: Vec<RankRung>,
    pub verdict: RankVerdict,
    pub tol: f64,
}

#[derive(Serialize)]
struct RankReportJson<'a> {
    ladder: &'a [RankRung],
    verdict: &'static str,
    rank: Option<usize>,
    tol: f64,
}

impl Serialize for RankReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RankReportJson {
            ladder: &self.ladder,
            verdict: self.verdict.name(),
            rank: self.verdict.rank(),
            tol: self.tol,
        }
        .serialize(s)
    }
}

/// Rank of a singular-value list: zero below an absolute floor, otherwise
/// the count above `tol · σ₁`, with the gap after it.
pub fn rank_with_gap(sv: &[f64], tol: f64) -> (usize, Option<f64>) {
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= ZERO_FLOOR {
        return (0, None);
    }
    let r = numerical_rank(sv, tol);
    let gap = match sv.get(r) {
        Some(&next) if next > 0.0 => Some(sv[r - 1] / next),
        _ => None,
    };
    (r, gap)
}

/// Verdict over a finished ladder.
pub fn classify(ladder: &[RankRung]) -> RankVerdict {
    let n = ladder.len();
    if n >= 2 {
        let (a, b) = (&ladder[n - 2], &ladder[n - 1]);
        if a.rank == b.rank && b.gap.is_none_or(|g| g >= MIN_GAP) {
            return RankVerdict::Stabilized(b.rank);
        }
    }
    if n >= 4 && ladder.windows(2).all(|w| w[1].rank > w[0].rank) {
        return RankVerdict::Growing;
    }
    RankVerdict::Inconclusive
}

#[derive(Clone, Debug)]
pub struct RankOptions {
    pub ladder: Vec<usize>,
    pub tol: f64,
    pub grid_n: usize,
    pub drop_tol: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            ladder: DEFAULT_LADDER.to_vec(),
            tol: DEFAULT_RANK_TOL,
            grid_n: DEFAULT_GRID,
            drop_tol: DEFAULT_DROP_TOL,
        }
    }
}

/// Singular values of `[S*_{z_var}, S_{z_var}]` compressed to `(D, D)` frames
/// along the ladder.
pub fn rank_ladder(theta: &InnerFunction<f64>, var: Var, opts: &RankOptions) -> Result<RankReport> {
    let mut ladder = Vec::with_capacity(opts.ladder.len());
    for &d in &opts.ladder {
        let frame = build_frame(theta, d, d, opts.grid_n, opts.drop_tol)?;
        let cm = compress_commutator(&frame, var)?;
        let sv = singular_values(&cm.entries);
        let (rank, gap) = rank_with_gap(&sv, opts.tol);
        ladder.push(RankRung { d, sv, rank, gap });
    }
    let verdict = classify(&ladder);
    Ok(RankReport {
        ladder,
        verdict,
        tol: opts.tol,
    })
}

/// `[S*, S] K_w` for each sample point, built from the reproducing kernel, its
/// closed-form backward shift, and [`shift_by_formula`]. Returns the Gram
/// matrix `⟨h_j, h_i⟩`.
pub fn commutator_kernel_gram(
    theta: &InnerFunction<f64>,
    var: Var,
    points: &[(C64, C64)],
    grid_n: usize,
) -> Result<CMat> {
    let tg = theta.sample(grid_n)?;
    let bt = backshift_theta_grid(theta, var, grid_n)?;
    let one = c(1.0, 0.0);
    let mut hs = Vec::with_capacity(points.len());
    for &w in points {
        let kw = kernel_grid(theta, &tg, w);
        let tw = theta.evaluate(w.0, w.1).conj();
        let (wv, other) = match var {
            Var::Z1 => (w.0, w.1),
            Var::Z2 => (w.1, w.0),
        };
        let factor = TorusGrid::from_fn(grid_n, |z1, z2| {
            let zo = match var {
                Var::Z1 => z2,
                Var::Z2 => z1,
            };
            tw / (one - zo * other.conj())
        })?;
        let back = kw.scale(wv.conj()).sub(&factor.mul(&bt)?)?;
        let s_kw = shift_by_formula(&tg, &bt, &kw, var)?;
        let h = s_kw.backshift(var).sub(&shift_by_formula(&tg, &bt, &back, var)?)?;
        hs.push(h);
    }
    let k = hs.len();
    let mut gram = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = hs[j].inner_product(&hs[i])?;
        }
    }
    Ok(gram)
}

/// Number of Gram eigenvalues of `{[S*, S] K_w}` above `tol · λ_max`.
pub fn kernel_sampling_rank(
    theta: &InnerFunction<f64>,
    var: Var,
    points: &[(C64, C64)],
    grid_n: usize,
    tol: f64,
) -> Result<usize> {
    let gram = commutator_kernel_gram(theta, var, points, grid_n)?;
    let ev = hermitian_eigenvalues(&gram);
    let top = ev.last().copied().unwrap_or(0.0);
    if top <= ZERO_FLOOR * ZERO_FLOOR {
        return Ok(0);
    }
    Ok(ev.iter().filter(|&&v| v > tol * top).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Eigenvalues of a Hermitian matrix, normalized by the largest modulus,
/// grouped when consecutive values differ by at most `cluster_tol`. The
/// cluster at zero is left out.
pub fn eigen_multiplicities(a: &CMat, cluster_tol: f64) -> Result<Vec<Cluster>> {
    let scale = max_abs(a).max(1.0);
    let asym = asymmetry(a);
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian(asym));
    }
    let ev = hermitian_eigenvalues(a);
    let norm = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm <= ZERO_FLOOR {
        return Ok(Vec::new());
    }
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for &v in &ev {
        let x = v / norm;
        match out.last_mut() {
            Some((vals, last)) if x - *last <= cluster_tol => {
                vals.push(v);
                *last = x;
            }
            _ => out.push((vec![v], x)),
        }
    }
    Ok(out
        .into_iter()
        .map(|(vals, _)| Cluster {
            eigenvalue: vals.iter().sum::<f64>() / vals.len() as f64,
            multiplicity: vals.len(),
        })
        .filter(|cl| (cl.eigenvalue / norm).abs() > cluster_tol)
        .collect())
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    match nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 10_000) {
        Some(s) => s.eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default(),
        None => Vec::new(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSpectra {
    pub truncation: usize,
    /// Nonzero clusters of the commutator on the `z1`-invariant part.
    pub first: Vec<Cluster>,
    /// Nonzero clusters of the commutator on the complementary part.
    pub second: Vec<Cluster>,
    pub second_norm: f64,
}

/// Commutator spectra of `S_{z1}` restricted to the two parts of an Agler
/// split.
pub fn block_commutator_spectra(split: &AglerSplit, cluster_tol: f64) -> Result<BlockSpectra> {
    let c1 = split.first().commutator(Var::Z1)?;
    let c2 = split.second().commutator(Var::Z1)?;
    Ok(BlockSpectra {
        truncation: split.truncation(),
        first: eigen_multiplicities(&c1, cluster_tol)?,
        second: eigen_multiplicities(&c2, cluster_tol)?,
        second_norm: singular_values(&c2).first().copied().unwrap_or(0.0),
    })
}

/// [`block_commutator_spectra`] for a product along a ladder of truncations.
pub fn product_block_spectra(
    f: &ProductInner<f64>,
    ladder: &[usize],
    grid_n: usize,
    cluster_tol: f64,
) -> Result<Vec<BlockSpectra>> {
    let theta = InnerFunction::Product(f.clone());
    let (pair, _) = closed_form_product(f);
    ladder
        .iter()
        .map(|&d| block_commutator_spectra(&agler_split(&theta, &pair, d, grid_n)?, cluster_tol))
        .collect()
}

pub const POINT_SPECTRUM_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct PointSpectrumReport {
    pub zeros: Vec<[f64; 2]>,
    pub eigenvalues: Vec<[f64; 2]>,
    /// Largest distance from a zero of `φ` to the nearest block eigenvalue.
    pub max_distance: f64,
    pub pass: bool,
}

/// Eigenvalues of `S_{z1}` on the `K_φ ⊗ ψH²` part against the zeros of `φ`.
pub fn point_spectrum_check(f: &ProductInner<f64>, d: usize, grid_n: usize) -> Result<PointSpectrumReport> {
    if f.phi.degree() == 0 {
        return Err(Error::DegenerateInput("φ is constant".into()));
    }
    let theta = InnerFunction::Product(f.clone());
    let (pair, _) = closed_form_product(f);
    let split = agler_split(&theta, &pair, d, grid_n)?;
    let block = split.second().compress(Var::Z1)?;
    let ev = eigenvalues(&block);
    let max_distance = f
        .phi
        .zeros()
        .iter()
        .map(|a| ev.iter().map(|l| (l - a).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    Ok(PointSpectrumReport {
        zeros: f.phi.zeros().iter().map(|z| [z.re, z.im]).collect(),
        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
        max_distance,
        pass: max_distance <= POINT_SPECTRUM_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    Rank { rank: usize },
    Growing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "details", rename_all = "snake_case")]
pub enum HarnessVerdict {
    Consistent,
    Violation(String),
}

impl HarnessVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, HarnessVerdict::Consistent)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RankLawReport {
    pub degree: [usize; 2],
    pub prediction: Prediction,
    pub ladder: RankReport,
    pub sampling_rank: Option<usize>,
    pub verdict: HarnessVerdict,
}

/// Predicts the rank of `[S*₁, S₁]` from the degree `(m, n)` (rank `n` when
/// `m ≤ 1`, unbounded otherwise) and checks it against the truncation ladder
/// and, for finite predictions, the kernel-sampling rank.
pub fn rank_law_harness(theta: &InnerFunction<f64>, opts: &RankOptions) -> Result<RankLawReport> {
    let (m, n) = theta.degree();
    let ladder = rank_ladder(theta, Var::Z1, opts)?;
    let mut problems = Vec::new();
    let (prediction, sampling_rank) = if m <= 1 {
        for rung in &ladder.ladder {
            if rung.rank > n {
                problems.push(format!("rank {} at D = {} exceeds {n}", rung.rank, rung.d));
            }
        }
        if ladder.verdict != RankVerdict::Stabilized(n) {
            problems.push(format!("ladder verdict {:?}, expected rank {n}", ladder.verdict));
        }
        let count = (2 * (n + 2)).max(8);
        let pts = sample_points(DEFAULT_SAMPLE_SEED ^ 0x6b65_726e, count, 0.8);
        let sr = kernel_sampling_rank(theta, Var::Z1, &pts, opts.grid_n, opts.tol)?;
        if sr != n {
            problems.push(format!("kernel sampling rank {sr}, expected {n}"));
        }
        (Prediction::Rank { rank: n }, Some(sr))
    } else {
        if ladder.verdict != RankVerdict::Growing {
            problems.push(format!("ladder verdict {:?}, expected growing", ladder.verdict));
        }
        (Prediction::Growing, None)
    };
    let verdict = if problems.is_empty() {
        HarnessVerdict::Consistent
    } else {
        HarnessVerdict::Violation(problems.join("; "))
    };
    Ok(RankLawReport {
        degree: [m, n],
        prediction,
        ladder,
        sampling_rank,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innerfn::{make_rational_inner, BlaschkeProduct};
    use crate::poly2::BiPoly;

    fn product(phi: BlaschkeProduct<f64>, psi: BlaschkeProduct<f64>) -> InnerFunction<f64> {
        InnerFunction::Product(ProductInner::new(phi, psi))
    }

    fn op(m: CMat) -> OperatorMatrix {
        OperatorMatrix {
            entries: m,
            frame_id: "test".into(),
            label: OperatorLabel::Custom,
        }
    }

    fn quick() -> RankOptions {
        RankOptions {
            ladder: vec![2, 3, 4, 5],
            grid_n: 64,
            ..RankOptions::default()
        }
    }

    #[test]
    fn commutator_examples() {
        let id = CMat::identity(3, 3);
        assert_eq!(max_abs(&commutator(&op(id)).entries), 0.0);
        let shift = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let cm = commutator(&op(shift)).entries;
        let expect = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(max_abs(&(cm - expect)) < 1e-15);
        let normal = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(0.5, 0.0)]);
        let normal = &normal * c(0.0, 1.0);
        assert!(max_abs(&commutator(&op(normal)).entries) < 1e-12);
    }

    #[test]
    fn commutator_is_traceless_and_hermitian() {
        let a = CMat::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let cm = commutator(&op(a)).entries;
        assert!(asymmetry(&cm) <= 1e-12);
        assert!(cm.trace().norm() < 1e-10);
    }

    #[test]
    fn verdicts() {
        let rung = |d, rank, gap| RankRung {
            d,
            sv: vec![],
            rank,
            gap,
        };
        assert_eq!(classify(&[rung(4, 1, None), rung(6, 1, Some(1e9))]), RankVerdict::Stabilized(1));
        assert_eq!(classify(&[rung(4, 1, None), rung(6, 1, Some(10.0))]), RankVerdict::Inconclusive);
        let growing: Vec<_> = (0..4).map(|k| rung(4 + 2 * k, k + 1, None)).collect();
        assert_eq!(classify(&growing), RankVerdict::Growing);
        assert_eq!(classify(&growing[..3]), RankVerdict::Inconclusive);
    }

    #[test]
    fn rank_ladder_examples() {
        let z1z2 = product(BlaschkeProduct::power(1), BlaschkeProduct::power(1));
        assert_eq!(rank_ladder(&z1z2, Var::Z1, &quick()).unwrap().verdict, RankVerdict::Stabilized(1));
        let z2c = product(BlaschkeProduct::power(0), BlaschkeProduct::power(3));
        assert_eq!(rank_ladder(&z2c, Var::Z1, &quick()).unwrap().verdict, RankVerdict::Stabilized(3));
        let z1sq = product(BlaschkeProduct::power(2), BlaschkeProduct::power(1));
        let r = rank_ladder(&z1sq, Var::Z1, &quick()).unwrap();
        assert_eq!(r.verdict, RankVerdict::Growing, "{:?}", r.ladder.iter().map(|x| x.rank).collect::<Vec<_>>());
    }

    #[test]
    fn sampling_rank_examples() {
        let pts = sample_points(5, 8, 0.8);
        let z1z2 = product(BlaschkeProduct::power(1), BlaschkeProduct::power(1));
        assert_eq!(kernel_sampling_rank(&z1z2, Var::Z1, &pts, 64, 1e-7).unwrap(), 1);
        let z2 = product(BlaschkeProduct::power(0), BlaschkeProduct::power(1));
        assert_eq!(kernel_sampling_rank(&z2, Var::Z1, &pts, 64, 1e-7).unwrap(), 1);
        let four = InnerFunction::Rational(
            make_rational_inner(BiPoly::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]])).unwrap(),
        );
        assert_eq!(kernel_sampling_rank(&four, Var::Z1, &pts, 128, 1e-7).unwrap(), 1);
        assert_eq!(kernel_sampling_rank(&four, Var::Z2, &pts, 128, 1e-7).unwrap(), 1);
    }

    #[test]
    fn clusters() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0 + 1e-9, 0.0),
            c(0.0, 0.0),
            c(-0.5, 0.0),
        ]));
        let cl = eigen_multiplicities(&a, 1e-6).unwrap();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].multiplicity, 1);
        assert!((cl[0].eigenvalue + 0.5).abs() < 1e-12);
        assert_eq!(cl[1].multiplicity, 2);
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eigen_multiplicities(&b, 1e-6), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn block_commutators_for_products() {
        let f = ProductInner::new(
            BlaschkeProduct::power(1),
            BlaschkeProduct::from_zeros(vec![c(0.3, 0.0), c(-0.5, 0.2)]).unwrap(),
        );
        let spectra = product_block_spectra(&f, &[3, 5], 64, 1e-6).unwrap();
        for s in &spectra {
            assert_eq!(s.first.len(), 1);
            assert!((s.first[0].eigenvalue - 1.0).abs() < 1e-9);
            assert_eq!(s.first[0].multiplicity, 2);
            assert!(s.second_norm <= 1e-8);
        }
    }

    #[test]
    fn point_spectrum() {
        let f = ProductInner::new(
            BlaschkeProduct::from_zeros(vec![c(0.5, 0.0)]).unwrap(),
            BlaschkeProduct::power(1),
        );
        let r = point_spectrum_check(&f, 4, 64).unwrap();
        assert!(r.pass, "{r:?}");
        let f = ProductInner::new(
            BlaschkeProduct::from_zeros(vec![c(0.3, 0.0), c(-0.4, 0.0)]).unwrap(),
            BlaschkeProduct::power(1),
        );
        let r = point_spectrum_check(&f, 4, 64).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.eigenvalues.len(), 10);
    }

    #[test]
    fn harness_on_z1z2() {
        let z1z2 = product(BlaschkeProduct::power(1), BlaschkeProduct::power(1));
        let r = rank_law_harness(&z1z2, &quick()).unwrap();
        assert!(r.verdict.is_consistent(), "{:?}", r.verdict);
        assert_eq!(r.sampling_rank, Some(1));
        let json = serde_json::to_value(&r.ladder).unwrap();
        assert_eq!(json["verdict"], "stabilized");
        assert_eq!(json["rank"], 1);
        assert!(json["ladder"][0]["D"].is_number());
    }
}
