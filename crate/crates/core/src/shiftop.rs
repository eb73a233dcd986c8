//! Truncations of the compressed shifts on `K_θ`.
//!
//! Functions in the model space are carried as analytic Fourier coefficients
//! on the `(N/2)²` quadrant of an `N × N` torus grid, row-major with rows
//! indexed by the power of `z1`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agler::{closed_form_product, AglerPair, GramKernel};
use crate::error::{Error, Result};
use crate::hardy::{self, TorusGrid};
use crate::innerfn::{backshift_theta, InnerFunction, ProductInner};
use crate::linalg::{c, hermitian_eigen, max_abs, CMat, C64};
use crate::poly2::Var;

pub const DEFAULT_DROP_TOL: f64 = 1e-8;

type Grid = TorusGrid<f64>;
type CVec = DVector<C64>;

fn to_col(g: &Grid) -> CVec {
    CVec::from_vec(g.analytic_coeffs())
}

fn to_grid(n: usize, col: impl Iterator<Item = C64>) -> Grid {
    let v: Vec<C64> = col.collect();
    TorusGrid::from_analytic_coeffs(n, &v).expect("quadrant length matches the grid")
}

/// Multiplication by `z_var` in coefficient space, truncated to the quadrant.
fn shift_col(col: &CVec, h: usize, var: Var) -> CVec {
    let mut out = CVec::zeros(h * h);
    for a in 0..h {
        for b in 0..h {
            let (da, db) = match var {
                Var::Z1 => (a + 1, b),
                Var::Z2 => (a, b + 1),
            };
            if da < h && db < h {
                out[da * h + db] = col[a * h + b];
            }
        }
    }
    out
}

/// Backward shift `(f − f|_{z_var=0}) / z_var` in coefficient space.
fn backshift_col(col: &CVec, h: usize, var: Var) -> CVec {
    let mut out = CVec::zeros(h * h);
    for a in 0..h {
        for b in 0..h {
            let (sa, sb) = match var {
                Var::Z1 => (a + 1, b),
                Var::Z2 => (a, b + 1),
            };
            if sa < h && sb < h {
                out[a * h + b] = col[sa * h + sb];
            }
        }
    }
    out
}

/// Orthonormal functions in `K_θ`, stored as coefficient columns.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    n: usize,
    theta: Grid,
    vectors: CMat,
}

impl OrthoBasis {
    pub fn new(n: usize, theta: Grid, vectors: CMat) -> Self {
        OrthoBasis { n, theta, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn theta_grid(&self) -> &Grid {
        &self.theta
    }

    pub fn member(&self, k: usize) -> Grid {
        to_grid(self.n, self.vectors.column(k).iter().copied())
    }

    /// `Σ_k c_k e_k` as a grid function.
    pub fn combination(&self, coeffs: &CVec) -> Grid {
        let col = &self.vectors * coeffs;
        to_grid(self.n, col.iter().copied())
    }

    /// Restriction to a range of columns.
    pub fn columns(&self, start: usize, count: usize) -> OrthoBasis {
        OrthoBasis {
            n: self.n,
            theta: self.theta.clone(),
            vectors: self.vectors.columns(start, count).into_owned(),
        }
    }

    /// `⟨e_k, e_j⟩` with entry `(j, k)`.
    pub fn gram(&self) -> CMat {
        self.vectors.adjoint() * &self.vectors
    }

    /// Columns `P_θ(z_var e_k)`.
    pub fn shift_images(&self, var: Var) -> Result<CMat> {
        let h = self.n / 2;
        let mut out = CMat::zeros(h * h, self.dim());
        for k in 0..self.dim() {
            let shifted = shift_col(&self.vectors.column(k).into_owned(), h, var);
            let g = to_grid(self.n, shifted.iter().copied()).project_model(&self.theta)?;
            out.set_column(k, &to_col(&g));
        }
        Ok(out)
    }

    /// Columns `T_{z̄_var} e_k`, which is `S*_{z_var} e_k` on `K_θ`.
    pub fn backshift_images(&self, var: Var) -> CMat {
        let h = self.n / 2;
        let mut out = CMat::zeros(h * h, self.dim());
        for k in 0..self.dim() {
            out.set_column(k, &backshift_col(&self.vectors.column(k).into_owned(), h, var));
        }
        out
    }

    /// `M[j][k] = ⟨P_θ(z_var e_k), e_j⟩`.
    pub fn compress(&self, var: Var) -> Result<CMat> {
        Ok(self.vectors.adjoint() * self.shift_images(var)?)
    }

    /// Plain multiplication `⟨z_var e_k, e_j⟩`, with no projection.
    pub fn multiplication(&self, var: Var) -> CMat {
        let h = self.n / 2;
        let mut shifted = CMat::zeros(h * h, self.dim());
        for k in 0..self.dim() {
            shifted.set_column(k, &shift_col(&self.vectors.column(k).into_owned(), h, var));
        }
        self.vectors.adjoint() * shifted
    }

    /// `⟨[S*, S] e_k, e_j⟩ = ⟨S e_k, S e_j⟩ − ⟨S* e_k, S* e_j⟩`: the
    /// compression of the commutator itself, free of edge effects from
    /// truncating `S` first.
    pub fn commutator(&self, var: Var) -> Result<CMat> {
        let s = self.shift_images(var)?;
        let b = self.backshift_images(var);
        Ok(s.adjoint() * &s - b.adjoint() * &b)
    }
}

/// `(D1 + 1)(D2 + 1)` minus the dimension of `θ H² ∩ {deg ≤ (D1, D2)}`.
pub fn expected_frame_dim(degree: (usize, usize), trunc: (usize, usize)) -> usize {
    let (m, n) = degree;
    let (d1, d2) = trunc;
    let inside = if d1 + 1 >= m + 1 && d2 + 1 >= n + 1 {
        (d1 + 1 - m) * (d2 + 1 - n)
    } else {
        0
    };
    (d1 + 1) * (d2 + 1) - inside
}

/// Orthonormalized projections `P_θ(z1^a z2^b)`, `a ≤ D1`, `b ≤ D2`.
#[derive(Clone, Debug)]
pub struct ModelSpaceFrame {
    theta: InnerFunction<f64>,
    trunc_degree: (usize, usize),
    drop_tol: f64,
    raw: CMat,
    transform: CMat,
    pivots: Vec<(usize, usize)>,
    basis: OrthoBasis,
}

impl ModelSpaceFrame {
    pub fn theta(&self) -> &InnerFunction<f64> {
        &self.theta
    }

    pub fn trunc_degree(&self) -> (usize, usize) {
        self.trunc_degree
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn grid_size(&self) -> usize {
        self.basis.n
    }

    /// Coefficient columns of `P_θ(z1^a z2^b)`, column `a (D2 + 1) + b`.
    pub fn raw_vectors(&self) -> &CMat {
        &self.raw
    }

    /// `basis = raw · transform`.
    pub fn ortho_transform(&self) -> &CMat {
        &self.transform
    }

    /// Monomials selected as pivots, in order.
    pub fn pivots(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn id(&self) -> String {
        let (m, n) = self.theta.degree();
        format!(
            "deg({m},{n})/D({},{})/N{}",
            self.trunc_degree.0, self.trunc_degree.1, self.basis.n
        )
    }
}

/// Pivoted Gram–Schmidt with one reorthogonalization pass on each pivot.
/// Returns the orthonormal columns, the transform from `raw`, and the pivot
/// column indices.
fn pivoted_orthonormalize(raw: &CMat, drop_tol: f64) -> (CMat, CMat, Vec<usize>) {
    let k = raw.ncols();
    let mut w = raw.clone();
    let mut t = CMat::identity(k, k);
    let mut active = vec![true; k];
    let mut qs: Vec<CVec> = Vec::new();
    let mut tqs: Vec<CVec> = Vec::new();
    let mut pivots = Vec::new();
    loop {
        let best = (0..k)
            .filter(|&j| active[j])
            .map(|j| (j, w.column(j).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let Some((j, norm)) = best else { break };
        if norm <= drop_tol {
            break;
        }
        active[j] = false;
        for (q, tq) in qs.iter().zip(&tqs) {
            let cf = q.dotc(&w.column(j));
            w.column_mut(j).axpy(-cf, q, c(1.0, 0.0));
            t.column_mut(j).axpy(-cf, tq, c(1.0, 0.0));
        }
        let norm = w.column(j).norm();
        if norm <= drop_tol {
            continue;
        }
        let q = w.column(j).unscale(norm);
        let tq = t.column(j).unscale(norm);
        for i in 0..k {
            if active[i] {
                let cf = q.dotc(&w.column(i));
                w.column_mut(i).axpy(-cf, &q, c(1.0, 0.0));
                t.column_mut(i).axpy(-cf, &tq, c(1.0, 0.0));
            }
        }
        qs.push(q);
        tqs.push(tq);
        pivots.push(j);
    }
    let len = raw.nrows();
    let basis = if qs.is_empty() {
        CMat::zeros(len, 0)
    } else {
        CMat::from_columns(&qs)
    };
    let transform = if tqs.is_empty() {
        CMat::zeros(k, 0)
    } else {
        CMat::from_columns(&tqs)
    };
    (basis, transform, pivots)
}

pub fn build_frame(
    theta: &InnerFunction<f64>,
    d1: usize,
    d2: usize,
    grid_n: usize,
    drop_tol: f64,
) -> Result<ModelSpaceFrame> {
    let (m, n) = theta.degree();
    let need = 4 * (d1 + d2 + m + n);
    if grid_n < need {
        return Err(Error::Input(format!(
            "grid size {grid_n} is below 4·(D1 + D2 + deg θ) = {need}"
        )));
    }
    let theta_grid = theta.sample(grid_n)?;
    let h = grid_n / 2;
    let count = (d1 + 1) * (d2 + 1);
    let mut raw = CMat::zeros(h * h, count);
    for a in 0..=d1 {
        for b in 0..=d2 {
            let mut col = vec![c(0.0, 0.0); h * h];
            col[a * h + b] = c(1.0, 0.0);
            let g = TorusGrid::from_analytic_coeffs(grid_n, &col)?.project_model(&theta_grid)?;
            raw.set_column(a * (d2 + 1) + b, &to_col(&g));
        }
    }
    let (vectors, transform, pivot_cols) = pivoted_orthonormalize(&raw, drop_tol);
    if vectors.ncols() == 0 {
        return Err(Error::DegenerateFrame);
    }
    let pivots = pivot_cols
        .iter()
        .map(|&j| (j / (d2 + 1), j % (d2 + 1)))
        .collect();
    Ok(ModelSpaceFrame {
        theta: theta.clone(),
        trunc_degree: (d1, d2),
        drop_tol,
        raw,
        transform,
        pivots,
        basis: OrthoBasis::new(grid_n, theta_grid, vectors),
    })
}

/// `K_w(z) = (1 − θ(z) conj θ(w)) / ((1 − z1 w̄1)(1 − z2 w̄2))` on the grid.
pub fn kernel_grid(theta: &InnerFunction<f64>, theta_grid: &Grid, w: (C64, C64)) -> Grid {
    let n = theta_grid.size();
    let tw = theta.evaluate(w.0, w.1).conj();
    let samples = (0..n * n)
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            let z1 = crate::scalar::root_of_unity::<f64>(j, n);
            let z2 = crate::scalar::root_of_unity::<f64>(k, n);
            (c(1.0, 0.0) - theta_grid.sample_at(j, k) * tw)
                / ((c(1.0, 0.0) - z1 * w.0.conj()) * (c(1.0, 0.0) - z2 * w.1.conj()))
        })
        .collect();
    TorusGrid::from_samples(n, samples).expect("size already validated")
}

/// Frame coefficients `⟨K_w, e_k⟩` of the reproducing kernel at `w`.
pub fn kernel_at(frame: &ModelSpaceFrame, w: (C64, C64)) -> CVec {
    let kw = kernel_grid(&frame.theta, &frame.basis.theta, w);
    frame.basis.vectors.adjoint() * to_col(&kw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorLabel {
    SZ1,
    SZ2,
    CommutatorZ1,
    CommutatorZ2,
    Custom,
}

impl OperatorLabel {
    pub fn shift(var: Var) -> Self {
        match var {
            Var::Z1 => OperatorLabel::SZ1,
            Var::Z2 => OperatorLabel::SZ2,
        }
    }

    pub fn commutator(var: Var) -> Self {
        match var {
            Var::Z1 => OperatorLabel::CommutatorZ1,
            Var::Z2 => OperatorLabel::CommutatorZ2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: CMat,
    pub frame_id: String,
    pub label: OperatorLabel,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn compress_shift(frame: &ModelSpaceFrame, var: Var) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix {
        entries: frame.basis.compress(var)?,
        frame_id: frame.id(),
        label: OperatorLabel::shift(var),
    })
}

/// Compression of `[S*_{z_var}, S_{z_var}]` to the frame.
pub fn compress_commutator(frame: &ModelSpaceFrame, var: Var) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix {
        entries: frame.basis.commutator(var)?,
        frame_id: frame.id(),
        label: OperatorLabel::commutator(var),
    })
}

/// Matrix of `T_{z̄_var}` on the frame, `⟨T_{z̄_var} e_k, e_j⟩`.
pub fn backshift_matrix(frame: &ModelSpaceFrame, var: Var) -> CMat {
    frame.basis.vectors.adjoint() * frame.basis.backshift_images(var)
}

/// `T_{z̄_var} θ` sampled on an `n × n` grid.
pub fn backshift_theta_grid(theta: &InnerFunction<f64>, var: Var, n: usize) -> Result<Grid> {
    let r = backshift_theta(&theta.to_rational(), var)?;
    hardy::sample_rational(&r, n)
}

/// `S_{z_var} f = z_var f − g θ`, where `g` collects the pairings of `f`
/// against `T_{z̄_var} θ` times powers of the other variable.
pub fn shift_by_formula(
    theta_grid: &Grid,
    backshifted_theta: &Grid,
    f: &Grid,
    var: Var,
) -> Result<Grid> {
    let dist = f.project_model(theta_grid)?.sub(f)?.norm();
    if dist > 1e-8 * f.norm().max(1.0) {
        return Err(Error::NotInModelSpace(dist));
    }
    let n = f.size();
    let h = n / 2;
    let pairing = f.mul(&backshifted_theta.conj())?;
    let mut g = vec![c(0.0, 0.0); h * h];
    for j in 0..h {
        match var {
            Var::Z1 => g[j] = pairing.coeff(0, j as isize),
            Var::Z2 => g[j * h] = pairing.coeff(j as isize, 0),
        }
    }
    let g = TorusGrid::from_analytic_coeffs(n, &g)?;
    f.shift(var).sub(&g.mul(theta_grid)?)
}

/// `[S*_{z_var}, S_{z_var}] f = T_{z̄}(P_θ(z f)) − P_θ(z T_{z̄} f)` on the grid.
pub fn apply_commutator(theta_grid: &Grid, f: &Grid, var: Var) -> Result<Grid> {
    let first = f.shift(var).project_model(theta_grid)?.backshift(var);
    let second = f.backshift(var).shift(var).project_model(theta_grid)?;
    first.sub(&second)
}

/// Column-space functions `q_k / p` of a Gram kernel, as coefficient columns.
fn kernel_functions(k: &GramKernel, n: usize, rel_tol: f64) -> Result<Vec<CVec>> {
    let p = &k.denom;
    k.factor_numerators(rel_tol)
        .into_iter()
        .map(|q| {
            let g = TorusGrid::from_fn(n, |z1, z2| q.evaluate(z1, z2) / p.evaluate(z1, z2))?;
            Ok(to_col(&g))
        })
        .collect()
}

/// `(G^{-1/2})` orthonormalization; `DegenerateFrame` if the columns are
/// numerically dependent.
fn symmetric_orthonormalize(u: &CMat) -> Result<CMat> {
    if u.ncols() == 0 {
        return Ok(u.clone());
    }
    let g = u.adjoint() * u;
    let (vals, vecs) = hermitian_eigen(&g);
    let top = vals.last().copied().unwrap_or(0.0);
    if vals.first().is_none_or(|&v| v <= 1e-12 * top) {
        return Err(Error::DegenerateFrame);
    }
    let inv_sqrt = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(1.0 / v.sqrt(), 0.0)),
    ));
    Ok(u * (&vecs * inv_sqrt * vecs.adjoint()))
}

/// `K_θ` split along an Agler pair: `z1^a f_i` (`a ≤ D`) spanning the part
/// generated by `K1`, then `z2^b g_j` (`b ≤ D`) for `K2`.
#[derive(Clone, Debug)]
pub struct AglerSplit {
    basis: OrthoBasis,
    s1_dim: usize,
    s2_dim: usize,
    truncation: usize,
    /// `max |⟨u, v⟩ − δ|` over the generating functions before
    /// orthonormalization within each part.
    pub orthonormality_defect: f64,
    /// `max |⟨u, v⟩|` with `u`, `v` from different parts.
    pub cross_gram: f64,
}

impl AglerSplit {
    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn s1_dim(&self) -> usize {
        self.s1_dim
    }

    pub fn s2_dim(&self) -> usize {
        self.s2_dim
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn first(&self) -> OrthoBasis {
        self.basis.columns(0, self.s1_dim)
    }

    pub fn second(&self) -> OrthoBasis {
        self.basis.columns(self.s1_dim, self.s2_dim)
    }
}

pub fn agler_split(
    theta: &InnerFunction<f64>,
    pair: &AglerPair,
    d: usize,
    grid_n: usize,
) -> Result<AglerSplit> {
    let theta_grid = theta.sample(grid_n)?;
    let h = grid_n / 2;
    let fs = kernel_functions(&pair.k1, grid_n, 1e-8)?;
    let gs = kernel_functions(&pair.k2, grid_n, 1e-8)?;
    let mut first = Vec::new();
    for f in &fs {
        let mut col = f.clone();
        for _ in 0..=d {
            first.push(col.clone());
            col = shift_col(&col, h, Var::Z1);
        }
    }
    let mut second = Vec::new();
    for g in &gs {
        let mut col = g.clone();
        for _ in 0..=d {
            second.push(col.clone());
            col = shift_col(&col, h, Var::Z2);
        }
    }
    let u1 = if first.is_empty() {
        CMat::zeros(h * h, 0)
    } else {
        CMat::from_columns(&first)
    };
    let u2 = if second.is_empty() {
        CMat::zeros(h * h, 0)
    } else {
        CMat::from_columns(&second)
    };
    let defect = |u: &CMat| {
        let g = u.adjoint() * u;
        let k = g.nrows();
        max_abs(&(g - CMat::identity(k, k)))
    };
    let orthonormality_defect = defect(&u1).max(defect(&u2));
    let cross_gram = max_abs(&(u1.adjoint() * &u2));
    let o1 = symmetric_orthonormalize(&u1)?;
    let o2 = symmetric_orthonormalize(&u2)?;
    let (s1_dim, s2_dim) = (o1.ncols(), o2.ncols());
    if s1_dim + s2_dim == 0 {
        return Err(Error::DegenerateFrame);
    }
    let mut vectors = CMat::zeros(h * h, s1_dim + s2_dim);
    vectors.columns_mut(0, s1_dim).copy_from(&o1);
    vectors.columns_mut(s1_dim, s2_dim).copy_from(&o2);
    Ok(AglerSplit {
        basis: OrthoBasis::new(grid_n, theta_grid, vectors),
        s1_dim,
        s2_dim,
        truncation: d,
        orthonormality_defect,
        cross_gram,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub s1_dim: usize,
    pub s2_dim: usize,
    /// Largest entry of the off-diagonal blocks of `S_{z1}`.
    pub off_diagonal: f64,
    pub orthonormality_defect: f64,
    pub cross_gram: f64,
    /// Distance of the first diagonal block from plain multiplication by `z1`.
    pub s1_block_deviation: Option<f64>,
    /// Distance of the second diagonal block from `P_{K_φ} T_{z1} ⊗ I`.
    pub s2_block_deviation: Option<f64>,
    pub pass: bool,
}

pub const BLOCK_TOL: f64 = 1e-8;

fn off_diagonal(m: &CMat, s1: usize) -> f64 {
    let k = m.nrows();
    let s2 = k - s1;
    let a = max_abs(&m.view((s1, 0), (s2, s1)).into_owned());
    let b = max_abs(&m.view((0, s1), (s1, s2)).into_owned());
    a.max(b)
}

/// `S_{z1}` in the basis of an Agler split; reports the coupling between
/// the two parts.
pub fn split_block_check(split: &AglerSplit) -> Result<BlockReport> {
    let m = split.basis.compress(Var::Z1)?;
    let off = off_diagonal(&m, split.s1_dim);
    Ok(BlockReport {
        s1_dim: split.s1_dim,
        s2_dim: split.s2_dim,
        off_diagonal: off,
        orthonormality_defect: split.orthonormality_defect,
        cross_gram: split.cross_gram,
        s1_block_deviation: None,
        s2_block_deviation: None,
        pass: off <= BLOCK_TOL,
    })
}

/// Block form of `S_{z1}` for `θ = φ(z1) ψ(z2)`: the split `K_ψ ⊗ H²` ⊕
/// `K_φ ⊗ ψ H²` from the closed-form kernels, the coupling between the
/// parts, and both diagonal blocks against their one-variable models.
pub fn block_structure_check(f: &ProductInner<f64>, d: usize, grid_n: usize) -> Result<BlockReport> {
    let theta = InnerFunction::Product(f.clone());
    let (pair, _) = closed_form_product(f);
    let split = agler_split(&theta, &pair, d, grid_n)?;
    let mut report = split_block_check(&split)?;
    let m = split.basis.compress(Var::Z1)?;
    let s1 = split.s1_dim;
    let s2 = split.s2_dim;

    let first = split.first();
    let plain = first.multiplication(Var::Z1);
    let dev1 = max_abs(&(m.view((0, 0), (s1, s1)).into_owned() - plain));

    let phi_grid = TorusGrid::from_fn(grid_n, |z1, _| f.phi.evaluate(z1))?;
    let second = split.second();
    let phi_model = OrthoBasis::new(grid_n, phi_grid, second.vectors.clone()).compress(Var::Z1)?;
    let dev2 = max_abs(&(m.view((s1, s1), (s2, s2)).into_owned() - phi_model));

    report.s1_block_deviation = Some(dev1);
    report.s2_block_deviation = Some(dev2);
    report.pass = report.off_diagonal <= BLOCK_TOL && dev1 <= BLOCK_TOL && dev2 <= BLOCK_TOL;
    Ok(report)
}

/// Random unit-norm combinations of basis members.
pub fn random_members(basis: &OrthoBasis, count: usize, seed: u64) -> Vec<Grid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = CVec::from_iterator(
                basis.dim(),
                (0..basis.dim()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
            );
            let norm = v.norm().max(1e-300);
            basis.combination(&v.unscale(norm))
        })
        .collect()
}

/// Largest `‖S f − P_θ(z_var f)‖` with `S f` from [`shift_by_formula`], over
/// random unit members of the frame.
pub fn shift_formula_defect(frame: &ModelSpaceFrame, var: Var, count: usize, seed: u64) -> Result<f64> {
    let n = frame.grid_size();
    let tg = &frame.basis.theta;
    let bt = backshift_theta_grid(&frame.theta, var, n)?;
    let mut worst = 0.0f64;
    for f in random_members(&frame.basis, count, seed) {
        let formula = shift_by_formula(tg, &bt, &f, var)?;
        let direct = f.shift(var).project_model(tg)?;
        worst = worst.max(formula.sub(&direct)?.norm());
    }
    Ok(worst)
}

/// For `f` in the `z1`-invariant part of a product split,
/// `‖[S*₁, S₁] f − P_θ f(0, z2)‖`, maximized over random unit members.
pub fn commutator_projection_defect(split: &AglerSplit, count: usize, seed: u64) -> Result<f64> {
    let first = split.first();
    let tg = &first.theta;
    let n = first.n;
    let h = n / 2;
    let mut worst = 0.0f64;
    for f in random_members(&first, count, seed) {
        let lhs = apply_commutator(tg, &f, Var::Z1)?;
        let coeffs = f.analytic_coeffs();
        let mut slice = vec![c(0.0, 0.0); h * h];
        slice[..h].copy_from_slice(&coeffs[..h]);
        let rhs = TorusGrid::from_analytic_coeffs(n, &slice)?.project_model(tg)?;
        worst = worst.max(lhs.sub(&rhs)?.norm());
    }
    Ok(worst)
}

/// With `K¹_w(z) = K1(z, w) / (1 − z1 w̄1)`: `‖[S*₁, S₁] K¹_w − P_θ K¹_w(0, ·)‖`
/// maximized over the given points.
pub fn commutator_kernel_defect(
    theta: &InnerFunction<f64>,
    k1: &GramKernel,
    points: &[(C64, C64)],
    grid_n: usize,
) -> Result<f64> {
    let tg = theta.sample(grid_n)?;
    let one = c(1.0, 0.0);
    let mut worst = 0.0f64;
    for &w in points {
        let kw = TorusGrid::from_fn(grid_n, |z1, z2| k1.eval((z1, z2), w) / (one - z1 * w.0.conj()))?;
        let lhs = apply_commutator(&tg, &kw, Var::Z1)?;
        let at_zero = TorusGrid::from_fn(grid_n, |_, z2| k1.eval((c(0.0, 0.0), z2), w))?;
        let rhs = at_zero.project_model(&tg)?;
        worst = worst.max(lhs.sub(&rhs)?.norm());
    }
    Ok(worst)
}
