//! Agler decompositions `1 − θ(z)θ̄(w) = (1 − z1w̄1) K2 + (1 − z2w̄2) K1`.
//!
//! Kernels are stored as Gram matrices over monomials, divided by
//! `p(z) p̄(w)` where `θ = p̃ / p`. Clearing denominators turns the identity into
//! a linear system in the Hermitian Gram matrices `(G1, G2)`:
//!
//! `p p̄ − p̃ p̃̄ = (1 − z1w̄1) v2ᵀ G2 v̄2 + (1 − z2w̄2) v1ᵀ G1 v̄1`,
//!
//! with `v1` running over `z^α`, `α ≤ (m, n−1)`, and `v2` over `α ≤ (m−1, n)`.

pub mod sdp;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innerfn::{ProductInner, RationalInner};
use crate::linalg::{
    asymmetry, c, hermitian_basis, hermitian_coords, hermitian_eigenvalues, max_abs,
    solve_affine, CMat, RMat, RVec, C64,
};
use crate::poly2::{BiPoly, PolyJson, Var};
use crate::scalar::cis;
use sdp::{Block, Lmi};

type P = BiPoly<f64>;

pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed_a61e;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Max1Min2,
    Min1Max2,
    Generic,
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max1min2" => Ok(Flavor::Max1Min2),
            "min1max2" => Ok(Flavor::Min1Max2),
            "generic" => Ok(Flavor::Generic),
            _ => Err(Error::Input(format!("unknown flavor {s:?}"))),
        }
    }
}

/// `K(z, w) = v(z)ᵀ G v̄(w) / (p(z) p̄(w))` with `v` the monomials of degree
/// `≤ basis_degree`. A missing basis degree is the zero kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct GramKernel {
    pub denom: P,
    pub basis_degree: Option<(usize, usize)>,
    pub gram: CMat,
}

/// Monomials `z1^i z2^j`, `i ≤ d1`, `j ≤ d2`, indexed by `i (d2 + 1) + j`.
pub fn monomials(deg: (usize, usize), z1: C64, z2: C64) -> DVector<C64> {
    let (d1, d2) = deg;
    let mut out = DVector::zeros((d1 + 1) * (d2 + 1));
    let mut a = c(1.0, 0.0);
    for i in 0..=d1 {
        let mut b = a;
        for j in 0..=d2 {
            out[i * (d2 + 1) + j] = b;
            b *= z2;
        }
        a *= z1;
    }
    out
}

fn basis_size(deg: Option<(usize, usize)>) -> usize {
    deg.map_or(0, |(a, b)| (a + 1) * (b + 1))
}

impl GramKernel {
    pub fn new(denom: P, basis_degree: Option<(usize, usize)>, gram: CMat) -> Result<Self> {
        let k = basis_size(basis_degree);
        if gram.nrows() != k || gram.ncols() != k {
            return Err(Error::Input(format!(
                "Gram matrix is {}x{}, basis has {k} monomials",
                gram.nrows(),
                gram.ncols()
            )));
        }
        Ok(GramKernel {
            denom,
            basis_degree,
            gram,
        })
    }

    pub fn zero(denom: P) -> Self {
        GramKernel {
            denom,
            basis_degree: None,
            gram: CMat::zeros(0, 0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.basis_degree.is_none() || max_abs(&self.gram) == 0.0
    }

    /// `v(z)ᵀ G v̄(w) / (p(z) p̄(w))`.
    pub fn eval(&self, z: (C64, C64), w: (C64, C64)) -> C64 {
        let Some(deg) = self.basis_degree else {
            return c(0.0, 0.0);
        };
        let vz = monomials(deg, z.0, z.1);
        let vw = monomials(deg, w.0, w.1).map(|x| x.conj());
        let num = (vz.transpose() * &self.gram * vw)[(0, 0)];
        num / (self.denom.evaluate(z.0, z.1) * self.denom.evaluate(w.0, w.1).conj())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.gram)
    }

    /// Number of Gram eigenvalues above `tol · λ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let ev = self.eigenvalues();
        let top = ev.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        ev.iter().filter(|&&v| v > tol * top).count()
    }

    /// Hermitian to 1e-12 and PSD to `−1e-9 λ_max`.
    pub fn check(&self) -> Result<()> {
        let asym = asymmetry(&self.gram);
        if asym > 1e-12 * max_abs(&self.gram).max(1.0) {
            return Err(Error::NotHermitian(asym));
        }
        Ok(())
    }

    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let ev = self.eigenvalues();
        let top = ev.last().copied().unwrap_or(0.0).max(0.0);
        ev.first().is_none_or(|&lo| lo >= -rel_tol * top.max(1e-300))
    }

    /// Column-space functions: `q_k / p` for an orthonormal eigenbasis scaled
    /// by `√λ`, so that `K = Σ_k f_k(z) conj(f_k(w))`. Returns the numerator
    /// polynomials `q_k`.
    pub fn factor_numerators(&self, rel_tol: f64) -> Vec<P> {
        let Some(deg) = self.basis_degree else {
            return Vec::new();
        };
        let (vals, vecs) = crate::linalg::hermitian_eigen(&self.gram);
        let top = vals.last().copied().unwrap_or(0.0);
        let mut out = Vec::new();
        for (k, &lam) in vals.iter().enumerate().rev() {
            if top <= 0.0 || lam <= rel_tol * top {
                continue;
            }
            let s = lam.sqrt();
            out.push(P::from_fn(deg, |i, j| vecs[(i * (deg.1 + 1) + j, k)] * s));
        }
        out
    }

    pub fn to_json(&self) -> GramKernelJson {
        GramKernelJson {
            denom: self.denom.to_json_value(),
            basis_degree: self.basis_degree.map(|(a, b)| [a, b]),
            gram: (0..self.gram.nrows())
                .map(|i| {
                    (0..self.gram.ncols())
                        .map(|j| [self.gram[(i, j)].re, self.gram[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(v: &GramKernelJson) -> Result<Self> {
        let k = v.gram.len();
        if v.gram.iter().any(|r| r.len() != k) {
            return Err(Error::Input("Gram matrix is not square".into()));
        }
        let gram = CMat::from_fn(k, k, |i, j| c(v.gram[i][j][0], v.gram[i][j][1]));
        GramKernel::new(
            P::from_json_value(&v.denom)?,
            v.basis_degree.map(|[a, b]| (a, b)),
            gram,
        )
    }
}

pub fn kernel_eval(k: &GramKernel, z: (C64, C64), w: (C64, C64)) -> C64 {
    k.eval(z, w)
}

pub fn kernel_rank(k: &GramKernel, tol: f64) -> usize {
    k.rank(tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramKernelJson {
    pub denom: PolyJson,
    pub basis_degree: Option<[usize; 2]>,
    pub gram: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AglerPair {
    pub k1: GramKernel,
    pub k2: GramKernel,
    pub flavor: Flavor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AglerPairJson {
    pub flavor: Flavor,
    pub k1: GramKernelJson,
    pub k2: GramKernelJson,
}

impl AglerPair {
    pub fn to_json(&self) -> AglerPairJson {
        AglerPairJson {
            flavor: self.flavor,
            k1: self.k1.to_json(),
            k2: self.k2.to_json(),
        }
    }

    /// `|1 − θ(z)θ̄(w) − (1 − z1w̄1) K2 − (1 − z2w̄2) K1|` at one pair of points.
    pub fn identity_residual(&self, theta: &RationalInner<f64>, z: (C64, C64), w: (C64, C64)) -> f64 {
        let one = c(1.0, 0.0);
        let lhs = one - theta.evaluate(z.0, z.1) * theta.evaluate(w.0, w.1).conj();
        let rhs = (one - z.0 * w.0.conj()) * self.k2.eval(z, w)
            + (one - z.1 * w.1.conj()) * self.k1.eval(z, w);
        (lhs - rhs).norm()
    }
}

fn k1_degree(deg: (usize, usize)) -> Option<(usize, usize)> {
    (deg.1 > 0).then(|| (deg.0, deg.1 - 1))
}

fn k2_degree(deg: (usize, usize)) -> Option<(usize, usize)> {
    (deg.0 > 0).then(|| (deg.0 - 1, deg.1))
}

/// Right-hand side of the cleared identity as a Gram matrix over monomials of
/// degree `≤ (m, n)`.
fn apply_identity_map(deg: (usize, usize), g1: &CMat, g2: &CMat) -> CMat {
    let (m, n) = deg;
    let big = |i: usize, j: usize| i * (n + 1) + j;
    let mut out = CMat::zeros((m + 1) * (n + 1), (m + 1) * (n + 1));
    if let Some((d1, d2)) = k1_degree(deg) {
        let idx = |r: usize| (r / (d2 + 1), r % (d2 + 1));
        for r in 0..g1.nrows() {
            for s in 0..g1.ncols() {
                let ((i, j), (k, l)) = (idx(r), idx(s));
                let g = g1[(r, s)];
                out[(big(i, j), big(k, l))] += g;
                out[(big(i, j + 1), big(k, l + 1))] -= g;
            }
        }
        let _ = d1;
    }
    if let Some((d1, d2)) = k2_degree(deg) {
        let idx = |r: usize| (r / (d2 + 1), r % (d2 + 1));
        for r in 0..g2.nrows() {
            for s in 0..g2.ncols() {
                let ((i, j), (k, l)) = (idx(r), idx(s));
                let g = g2[(r, s)];
                out[(big(i, j), big(k, l))] += g;
                out[(big(i + 1, j), big(k + 1, l))] -= g;
            }
        }
        let _ = d1;
    }
    out
}

fn coeff_vector(p: &P) -> DVector<C64> {
    let (m, n) = p.degree();
    DVector::from_fn((m + 1) * (n + 1), |r, _| p.coeff(r / (n + 1), r % (n + 1)))
}

/// `p pᴴ − p̃ p̃ᴴ` over coefficient vectors.
fn identity_lhs(theta: &RationalInner<f64>) -> CMat {
    let a = coeff_vector(theta.p());
    let b = coeff_vector(theta.p_reflected());
    &a * a.adjoint() - &b * b.adjoint()
}

/// All Hermitian `(G1, G2)` solving the cleared identity, as
/// `offset + Σ x_i basis_i`.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub theta: RationalInner<f64>,
    pub offset: (CMat, CMat),
    pub basis: Vec<(CMat, CMat)>,
    pub residual: f64,
}

impl ConstraintSystem {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> (usize, usize) {
        self.theta.degree()
    }

    pub fn point(&self, x: &[f64]) -> (CMat, CMat) {
        let (mut g1, mut g2) = self.offset.clone();
        for (xi, (b1, b2)) in x.iter().zip(&self.basis) {
            g1 += b1.scale(*xi);
            g2 += b2.scale(*xi);
        }
        (g1, g2)
    }

    /// Max-entry residual of the cleared identity.
    pub fn linear_residual(&self, g1: &CMat, g2: &CMat) -> f64 {
        max_abs(&(identity_lhs(&self.theta) - apply_identity_map(self.degree(), g1, g2)))
    }

    pub fn pair(&self, g1: CMat, g2: CMat, flavor: Flavor) -> AglerPair {
        let deg = self.degree();
        let p = self.theta.p().clone();
        AglerPair {
            k1: GramKernel {
                denom: p.clone(),
                basis_degree: k1_degree(deg),
                gram: g1,
            },
            k2: GramKernel {
                denom: p,
                basis_degree: k2_degree(deg),
                gram: g2,
            },
            flavor,
        }
    }

    fn lmi(&self) -> Lmi {
        let mut blocks = Vec::new();
        if self.offset.0.nrows() > 0 {
            blocks.push(Block {
                offset: self.offset.0.clone(),
                dirs: self.basis.iter().map(|b| b.0.clone()).collect(),
            });
        }
        if self.offset.1.nrows() > 0 {
            blocks.push(Block {
                offset: self.offset.1.clone(),
                dirs: self.basis.iter().map(|b| b.1.clone()).collect(),
            });
        }
        Lmi {
            dim: self.dimension(),
            blocks,
        }
    }
}

pub fn solve_constraints(theta: &RationalInner<f64>) -> Result<ConstraintSystem> {
    let deg = theta.degree();
    if deg == (0, 0) {
        return Err(Error::DegenerateInput(
            "constant inner function has no Agler decomposition to compute".into(),
        ));
    }
    let k1 = basis_size(k1_degree(deg));
    let k2 = basis_size(k2_degree(deg));
    let h1 = hermitian_basis(k1);
    let h2 = hermitian_basis(k2);
    let params = h1.len() + h2.len();
    let z1 = CMat::zeros(k1, k1);
    let z2 = CMat::zeros(k2, k2);

    let images: Vec<Vec<f64>> = h1
        .iter()
        .map(|g| hermitian_coords(&apply_identity_map(deg, g, &z2)))
        .chain(
            h2.iter()
                .map(|g| hermitian_coords(&apply_identity_map(deg, &z1, g))),
        )
        .collect();
    let lhs = identity_lhs(theta);
    let rhs = RVec::from_vec(hermitian_coords(&lhs));
    let rows = rhs.len();
    let a = RMat::from_fn(rows, params, |r, k| images[k][r]);
    let sol = solve_affine(&a, &rhs, 1e-12);
    let scale = 1.0 + rhs.norm();
    if sol.residual > 1e-10 * scale {
        return Err(Error::InfeasibleIdentity(sol.residual));
    }

    let assemble = |x: &[f64]| -> (CMat, CMat) {
        let mut g1 = CMat::zeros(k1, k1);
        let mut g2 = CMat::zeros(k2, k2);
        for (xi, b) in x[..h1.len()].iter().zip(&h1) {
            g1 += b.scale(*xi);
        }
        for (xi, b) in x[h1.len()..].iter().zip(&h2) {
            g2 += b.scale(*xi);
        }
        (g1, g2)
    };
    let offset = assemble(sol.particular.as_slice());
    let basis = (0..sol.null_basis.ncols())
        .map(|k| assemble(sol.null_basis.column(k).into_owned().as_slice()))
        .collect();
    Ok(ConstraintSystem {
        theta: theta.clone(),
        offset,
        basis,
        residual: sol.residual,
    })
}

/// `D[j][k] = Σ_t N[j−t][k−t]` for `N = q qᴴ − q̃ q̃ᴴ`: Gram of the one-variable
/// kernel `(q(z) q̄(w) − q̃(z) q̃̄(w)) / (1 − z w̄)`, indices `< deg q`.
fn christoffel_darboux(q: &[C64]) -> CMat {
    let d = q.len() - 1;
    let qr: Vec<C64> = (0..=d).map(|i| q[d - i].conj()).collect();
    let nmat = CMat::from_fn(d + 1, d + 1, |j, k| q[j] * q[k].conj() - qr[j] * qr[k].conj());
    CMat::from_fn(d, d, |j, k| {
        (0..=j.min(k)).map(|t| nmat[(j - t, k - t)]).sum()
    })
}

fn outer(v: &[C64]) -> CMat {
    let col = DVector::from_column_slice(v);
    &col * col.adjoint()
}

fn univariate_coeffs(p: &P, var: Var) -> Vec<C64> {
    let (m, n) = p.degree();
    match var {
        Var::Z1 => (0..=m).map(|i| p.coeff(i, 0)).collect(),
        Var::Z2 => (0..=n).map(|j| p.coeff(0, j)).collect(),
    }
}

/// Closed-form extremal pairs of a product `φ(z1) ψ(z2)`, returned as
/// `(max1min2, min1max2)`:
///
/// * `K1max = (1 − ψψ̄)/(1 − z2w̄2)`, `K2min = ψψ̄ (1 − φφ̄)/(1 − z1w̄1)`,
/// * `K1min = φφ̄ (1 − ψψ̄)/(1 − z2w̄2)`, `K2max = (1 − φφ̄)/(1 − z1w̄1)`.
pub fn closed_form_product(f: &ProductInner<f64>) -> (AglerPair, AglerPair) {
    let theta = crate::innerfn::product_to_rational(f);
    let deg = theta.degree();
    let p = theta.p().clone();
    let qphi = univariate_coeffs(&f.phi.denominator(Var::Z1), Var::Z1);
    let qpsi = univariate_coeffs(&f.psi.denominator(Var::Z2), Var::Z2);
    let rev = |q: &[C64]| -> Vec<C64> { q.iter().rev().map(|x| x.conj()).collect() };
    let (rphi, rpsi) = (rev(&qphi), rev(&qpsi));

    let kernel = |deg: Option<(usize, usize)>, a: &dyn Fn() -> CMat, b: &dyn Fn() -> CMat| {
        match deg {
            None => GramKernel::zero(p.clone()),
            Some(d) => GramKernel {
                denom: p.clone(),
                basis_degree: Some(d),
                gram: a().kronecker(&b()),
            },
        }
    };
    let d_phi = || christoffel_darboux(&qphi);
    let d_psi = || christoffel_darboux(&qpsi);
    let k1max = kernel(k1_degree(deg), &|| outer(&qphi), &d_psi);
    let k1min = kernel(k1_degree(deg), &|| outer(&rphi), &d_psi);
    let k2min = kernel(k2_degree(deg), &d_phi, &|| outer(&rpsi));
    let k2max = kernel(k2_degree(deg), &d_phi, &|| outer(&qpsi));
    (
        AglerPair {
            k1: k1max,
            k2: k2min,
            flavor: Flavor::Max1Min2,
        },
        AglerPair {
            k1: k1min,
            k2: k2max,
            flavor: Flavor::Min1Max2,
        },
    )
}

/// Seeded points in the bidisk with coordinates of modulus `≤ radius`.
pub fn sample_points(seed: u64, count: usize, radius: f64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let r = radius * rng.random::<f64>().sqrt();
        cis(std::f64::consts::TAU * rng.random::<f64>()) * r
    };
    (0..count)
        .map(|_| {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            (a, b)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ExtremalOptions {
    pub seed: u64,
    pub objective_points: usize,
    pub radius: f64,
    pub purify_tol: f64,
    pub verify_feasible: usize,
    pub verify_points: usize,
    pub psd_tol: f64,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        ExtremalOptions {
            seed: DEFAULT_SAMPLE_SEED,
            objective_points: 32,
            radius: 0.8,
            purify_tol: 1e-5,
            verify_feasible: 20,
            verify_points: 40,
            psd_tol: 1e-7,
        }
    }
}

/// `Σ conj(v(x)) v(x)ᵀ / (|p(x)|² (1 − |x_var|²))`, so that `Re tr(G W)` is
/// `Σ K(x, x) / (1 − |x_var|²)`.
fn objective_weight(sys: &ConstraintSystem, deg: (usize, usize), var: Var, pts: &[(C64, C64)]) -> CMat {
    let k = (deg.0 + 1) * (deg.1 + 1);
    let mut w = CMat::zeros(k, k);
    for &(x1, x2) in pts {
        let v = monomials(deg, x1, x2);
        let pv = sys.theta.p().evaluate(x1, x2).norm_sqr();
        let xv = match var {
            Var::Z1 => x1,
            Var::Z2 => x2,
        };
        let weight = 1.0 / (pv * (1.0 - xv.norm_sqr()));
        w += v.map(|x| x.conj()) * v.transpose() * c(weight, 0.0);
    }
    w
}

/// Extremal Agler pair by linear-functional maximization over the solution
/// spectrahedron, followed by the sampled quotient-order check.
pub fn extremal_pair(sys: &ConstraintSystem, flavor: Flavor) -> Result<AglerPair> {
    extremal_pair_with(sys, flavor, &ExtremalOptions::default())
}

pub fn extremal_pair_with(
    sys: &ConstraintSystem,
    flavor: Flavor,
    opts: &ExtremalOptions,
) -> Result<AglerPair> {
    let deg = sys.degree();
    let lmi = sys.lmi();
    let x = if sys.dimension() == 0 {
        RVec::zeros(0)
    } else {
        let obj = match flavor {
            Flavor::Max1Min2 | Flavor::Min1Max2 => {
                let pts = sample_points(opts.seed, opts.objective_points, opts.radius);
                let (var, block_deg, pick): (Var, _, fn(&(CMat, CMat)) -> &CMat) = match flavor {
                    Flavor::Max1Min2 => (Var::Z1, k1_degree(deg), |b| &b.0),
                    _ => (Var::Z2, k2_degree(deg), |b| &b.1),
                };
                match block_deg {
                    None => RVec::zeros(sys.dimension()),
                    Some(bd) => {
                        let w = objective_weight(sys, bd, var, &pts);
                        RVec::from_iterator(
                            sys.dimension(),
                            sys.basis.iter().map(|b| (pick(b) * &w).trace().re),
                        )
                    }
                }
            }
            Flavor::Generic => RVec::zeros(sys.dimension()),
        };
        if obj.norm() == 0.0 {
            let interior = sdp::find_interior(&lmi)?;
            interior.reduced.lift(&interior.point)
        } else {
            sdp::maximize(&lmi, &obj, opts.purify_tol)?
        }
    };
    let (g1, g2) = sys.point(x.as_slice());
    let (g1, g2) = (crate::linalg::hermitian_part(&g1), crate::linalg::hermitian_part(&g2));
    let pair = sys.pair(g1, g2, flavor);
    for k in [&pair.k1, &pair.k2] {
        if !k.is_psd(1e-9) {
            return Err(Error::Solver(format!(
                "extremal Gram matrix is not PSD (min eigenvalue {:e})",
                k.eigenvalues().first().copied().unwrap_or(0.0)
            )));
        }
    }
    if flavor != Flavor::Generic && sys.dimension() > 0 {
        let worst = quotient_order_margin(sys, &pair, opts)?;
        if worst < -opts.psd_tol {
            return Err(Error::NotLoewnerMaximal(worst));
        }
    }
    Ok(pair)
}

/// Seeded random feasible pairs from barrier solves with random objectives.
pub fn random_feasible_pairs(sys: &ConstraintSystem, count: usize, seed: u64) -> Result<Vec<AglerPair>> {
    if sys.dimension() == 0 {
        return Ok(vec![sys.pair(sys.offset.0.clone(), sys.offset.1.clone(), Flavor::Generic); count]);
    }
    let interior = sdp::find_interior(&sys.lmi())?;
    let red = &interior.reduced;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let dir = RVec::from_fn(red.lmi.dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let z = if red.lmi.dim == 0 {
            interior.point.clone()
        } else {
            sdp::barrier_path(&red.lmi, &dir, interior.point.clone(), &sdp::ladder(1.0, 1e-4))?
        };
        let (g1, g2) = sys.point(red.lift(&z).as_slice());
        out.push(sys.pair(g1, g2, Flavor::Generic));
    }
    Ok(out)
}

/// Smallest eigenvalue over the sampled Gram matrices of
/// `(K2′ − K2min)/(1 − z2w̄2)` (or `(K1′ − K1min)/(1 − z1w̄1)` for min1max2)
/// across random feasible pairs.
pub fn quotient_order_margin(sys: &ConstraintSystem, pair: &AglerPair, opts: &ExtremalOptions) -> Result<f64> {
    let others = random_feasible_pairs(sys, opts.verify_feasible, opts.seed ^ 0x9e37_79b9)?;
    let pts = sample_points(opts.seed.wrapping_add(1), opts.verify_points, opts.radius);
    let mut worst = f64::INFINITY;
    for other in &others {
        let q = CMat::from_fn(pts.len(), pts.len(), |a, b| {
            let (z, w) = (pts[a], pts[b]);
            match pair.flavor {
                Flavor::Min1Max2 => {
                    (other.k1.eval(z, w) - pair.k1.eval(z, w)) / (c(1.0, 0.0) - z.0 * w.0.conj())
                }
                _ => (other.k2.eval(z, w) - pair.k2.eval(z, w)) / (c(1.0, 0.0) - z.1 * w.1.conj()),
            }
        });
        let lo = hermitian_eigenvalues(&q).first().copied().unwrap_or(0.0);
        worst = worst.min(lo);
    }
    Ok(worst)
}

/// Gram matrix of functions sampled at `n` equispaced points per torus
/// coordinate: `G[i][j] = mean f_i conj(f_j)`.
fn sampled_gram(values: &[Vec<C64>]) -> CMat {
    let r = values.len();
    let len = values.first().map_or(1, |v| v.len().max(1)) as f64;
    CMat::from_fn(r, r, |i, j| {
        values[i]
            .iter()
            .zip(&values[j])
            .map(|(a, b)| a * b.conj())
            .sum::<C64>()
            / len
    })
}

/// Restriction check for the factor functions `g_j = q_j / p` of `K`.
///
/// Freezing the `fixed` coordinate at a torus point `t` should map the span of
/// the `g_j` isometrically into one-variable `H²`. Returns the largest entry of
/// `Gram₁(g(·, t)) − Gram₂(g)` over the given `ts`, with both Gram matrices
/// computed from `n`-point trapezoid sums.
pub fn restriction_gram_defect(k: &GramKernel, fixed: Var, ts: &[C64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Input("grid size must be positive".into()));
    }
    let numerators = k.factor_numerators(1e-10);
    if numerators.is_empty() {
        return Ok(0.0);
    }
    let nodes: Vec<C64> = (0..n)
        .map(|j| cis(std::f64::consts::TAU * j as f64 / n as f64))
        .collect();
    let g = |q: &P, z1: C64, z2: C64| q.evaluate(z1, z2) / k.denom.evaluate(z1, z2);
    let full: Vec<Vec<C64>> = numerators
        .iter()
        .map(|q| {
            let mut v = Vec::with_capacity(n * n);
            for &a in &nodes {
                for &b in &nodes {
                    v.push(g(q, a, b));
                }
            }
            v
        })
        .collect();
    let reference = sampled_gram(&full);
    let mut worst = 0.0f64;
    for &t in ts {
        let slices: Vec<Vec<C64>> = numerators
            .iter()
            .map(|q| {
                nodes
                    .iter()
                    .map(|&x| match fixed {
                        Var::Z1 => g(q, t, x),
                        Var::Z2 => g(q, x, t),
                    })
                    .collect()
            })
            .collect();
        worst = worst.max(max_abs(&(sampled_gram(&slices) - &reference)));
    }
    Ok(worst)
}

/// Seeded points on the unit circle.
pub fn torus_points(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| cis(std::f64::consts::TAU * rng.random::<f64>()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innerfn::{make_rational_inner, product_to_rational, BlaschkeProduct};

    fn z1z2() -> RationalInner<f64> {
        make_rational_inner(P::constant(c(1.0, 0.0), (1, 1))).unwrap()
    }

    fn bl(zeros: &[f64]) -> BlaschkeProduct<f64> {
        BlaschkeProduct::from_zeros(zeros.iter().map(|&a| c(a, 0.0)).collect()).unwrap()
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|x| c(*x, 0.0))))
    }

    #[test]
    fn constraint_system_for_z1z2() {
        let sys = solve_constraints(&z1z2()).unwrap();
        assert_eq!(sys.dimension(), 1);
        // every solution is G1 = diag(1−t, t), G2 = diag(t, 1−t)
        for t in [-0.5, 0.0, 0.3, 1.0] {
            let g1 = diag(&[1.0 - t, t]);
            let g2 = diag(&[t, 1.0 - t]);
            assert!(sys.linear_residual(&g1, &g2) < 1e-14);
        }
        let (g1, g2) = sys.point(&[0.7]);
        assert!((g1[(0, 0)] + g1[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((g1[(0, 0)] - g2[(1, 1)]).norm() < 1e-12);
        assert!(g1[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn constraint_system_for_pure_z2_power() {
        let t = make_rational_inner(P::constant(c(1.0, 0.0), (0, 3))).unwrap();
        let sys = solve_constraints(&t).unwrap();
        assert_eq!(sys.dimension(), 0);
        let (g1, g2) = sys.point(&[]);
        assert!(max_abs(&(g1 - CMat::identity(3, 3))) < 1e-12);
        assert_eq!(g2.nrows(), 0);
    }

    #[test]
    fn constraint_system_for_non_product() {
        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let t = make_rational_inner(p).unwrap();
        let sys = solve_constraints(&t).unwrap();
        assert!(sys.residual <= 1e-10);
        let pair = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        for (z, w) in sample_points(7, 100, 0.9).chunks(2).map(|p| (p[0], p[1])) {
            assert!(pair.identity_residual(&t, z, w) <= 1e-8);
        }
    }

    #[test]
    fn extremal_pair_for_z1z2() {
        let sys = solve_constraints(&z1z2()).unwrap();
        let max = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        assert!(max_abs(&(&max.k1.gram - diag(&[1.0, 0.0]))) < 1e-10);
        assert!(max_abs(&(&max.k2.gram - diag(&[0.0, 1.0]))) < 1e-10);
        let v = max.k2.eval((c(0.5, 0.0), c(0.5, 0.0)), (c(0.5, 0.0), c(0.5, 0.0)));
        assert!((v - c(0.25, 0.0)).norm() < 1e-10);
        let min = extremal_pair(&sys, Flavor::Min1Max2).unwrap();
        assert!(max_abs(&(&min.k1.gram - diag(&[0.0, 1.0]))) < 1e-10);
        assert!(max_abs(&(&min.k2.gram - diag(&[1.0, 0.0]))) < 1e-10);
        assert_eq!(kernel_rank(&max.k1, 1e-8), 1);
        assert_eq!(kernel_rank(&max.k2, 1e-8), 1);
    }

    #[test]
    fn extremal_pair_for_z2_cubed_is_flavor_independent() {
        let t = make_rational_inner(P::constant(c(1.0, 0.0), (0, 3))).unwrap();
        let sys = solve_constraints(&t).unwrap();
        let a = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        let b = extremal_pair(&sys, Flavor::Min1Max2).unwrap();
        assert_eq!(a.k1.gram, b.k1.gram);
        assert_eq!(kernel_rank(&a.k1, 1e-8), 3);
        assert_eq!(kernel_rank(&a.k2, 1e-8), 0);
    }

    #[test]
    fn closed_form_examples() {
        let (max, min) = closed_form_product(&ProductInner::new(bl(&[0.0]), bl(&[0.0])));
        let z = (c(0.3, 0.1), c(-0.2, 0.4));
        let w = (c(0.5, -0.3), c(0.1, 0.6));
        assert!((max.k1.eval(z, w) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((max.k2.eval(z, w) - z.1 * w.1.conj()).norm() < 1e-14);
        assert!((min.k1.eval(z, w) - z.0 * w.0.conj()).norm() < 1e-14);
        assert!((min.k2.eval(z, w) - c(1.0, 0.0)).norm() < 1e-14);

        let (max, _) = closed_form_product(&ProductInner::new(bl(&[0.5]), bl(&[0.0])));
        let expect = z.1 * w.1.conj() * 0.75
            / ((c(1.0, 0.0) - z.0 * 0.5) * (c(1.0, 0.0) - w.0.conj() * 0.5));
        assert!((max.k2.eval(z, w) - expect).norm() < 1e-14);

        let (max, _) = closed_form_product(&ProductInner::new(bl(&[0.0]), BlaschkeProduct::power(2)));
        let zw = z.1 * w.1.conj();
        assert!((max.k1.eval(z, w) - (c(1.0, 0.0) + zw)).norm() < 1e-14);
        assert!((max.k2.eval(z, w) - zw * zw).norm() < 1e-14);
    }

    #[test]
    fn closed_forms_satisfy_identity() {
        let phi = BlaschkeProduct::new(vec![c(0.3, 0.0), c(-0.4, 0.0)], cis(0.7)).unwrap();
        let psi = BlaschkeProduct::new(vec![c(0.2, 0.5), c(-0.1, 0.0)], cis(-1.3)).unwrap();
        let f = ProductInner::new(phi, psi);
        let theta = product_to_rational(&f);
        let (a, b) = closed_form_product(&f);
        let sys = solve_constraints(&theta).unwrap();
        for pair in [&a, &b] {
            assert!(sys.linear_residual(&pair.k1.gram, &pair.k2.gram) < 1e-13);
            for (z, w) in sample_points(3, 40, 0.9).chunks(2).map(|p| (p[0], p[1])) {
                assert!(pair.identity_residual(&theta, z, w) < 1e-12);
            }
        }
    }

    #[test]
    fn solver_matches_closed_form_for_blaschke_factor() {
        let f = ProductInner::new(bl(&[0.5]), bl(&[0.0]));
        let sys = solve_constraints(&product_to_rational(&f)).unwrap();
        let (cmax, cmin) = closed_form_product(&f);
        let max = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        let min = extremal_pair(&sys, Flavor::Min1Max2).unwrap();
        assert!(max_abs(&(&max.k1.gram - &cmax.k1.gram)) < 1e-7);
        assert!(max_abs(&(&max.k2.gram - &cmax.k2.gram)) < 1e-7);
        assert!(max_abs(&(&min.k1.gram - &cmin.k1.gram)) < 1e-7);
        assert!(max_abs(&(&min.k2.gram - &cmin.k2.gram)) < 1e-7);
    }

    #[test]
    fn kernel_eval_basics() {
        let k = GramKernel::new(P::one(), Some((0, 0)), diag(&[1.0])).unwrap();
        assert!((k.eval((c(0.3, 0.0), c(0.1, 0.2)), (c(-0.5, 0.1), c(0.0, 0.0))) - c(1.0, 0.0)).norm() < 1e-15);
        let sys = solve_constraints(&z1z2()).unwrap();
        let (g1, g2) = sys.point(&[0.4]);
        let pair = sys.pair(g1, g2, Flavor::Generic);
        let (z, w) = ((c(0.3, 0.2), c(-0.1, 0.5)), (c(0.6, -0.2), c(0.2, 0.1)));
        assert!((pair.k1.eval(z, w) - pair.k1.eval(w, z).conj()).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let (max, _) = closed_form_product(&ProductInner::new(bl(&[0.5]), bl(&[0.0, 0.2])));
        let s = serde_json::to_string(&max.k1.to_json()).unwrap();
        let back = GramKernel::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, max.k1);
    }

    #[test]
    fn restriction_is_isometric() {
        let ts = torus_points(11, 5);
        let f = ProductInner::new(bl(&[0.25]), bl(&[0.3, -0.5]));
        let (max, _) = closed_form_product(&f);
        assert!(restriction_gram_defect(&max.k2, Var::Z2, &ts, 64).unwrap() < 1e-10);

        let theta = make_rational_inner(P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]])).unwrap();
        let sys = solve_constraints(&theta).unwrap();
        let pair = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        assert!(restriction_gram_defect(&pair.k2, Var::Z2, &ts, 64).unwrap() < 1e-7);
        assert!(restriction_gram_defect(&pair.k1, Var::Z1, &ts, 64).unwrap() < 1e-7);
    }
}
