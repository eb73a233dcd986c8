//! Dense bivariate polynomials over the complex numbers.
//!
//! A [`BiPoly`] stores the coefficient of `z1^i z2^j` at row `i`, column `j`, and
//! carries a *declared* bidegree `(m, n)` equal to the shape of the coefficient
//! array minus one. Reflection and everything built on it are taken relative to
//! the declared bidegree, so `1` declared at degree `(1, 1)` reflects to `z1 z2`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, modulus, root_of_unity, Scalar};

/// One of the two coordinate variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    Z1,
    Z2,
}

impl Var {
    pub fn from_index(i: usize) -> Option<Var> {
        match i {
            1 => Some(Var::Z1),
            2 => Some(Var::Z2),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Var::Z1 => 1,
            Var::Z2 => 2,
        }
    }

    pub fn other(self) -> Var {
        match self {
            Var::Z1 => Var::Z2,
            Var::Z2 => Var::Z1,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.index())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T: Scalar> {
    coeffs: DMatrix<Complex<T>>,
}

impl<T: Scalar> BiPoly<T> {
    /// Wraps a coefficient array; the declared degree is its shape minus one.
    ///
    /// # Panics
    /// If the array has no rows or no columns.
    pub fn new(coeffs: DMatrix<Complex<T>>) -> Self {
        assert!(
            coeffs.nrows() > 0 && coeffs.ncols() > 0,
            "coefficient array must be at least 1x1"
        );
        BiPoly { coeffs }
    }

    pub fn zero(degree: (usize, usize)) -> Self {
        BiPoly::new(DMatrix::from_element(degree.0 + 1, degree.1 + 1, czero()))
    }

    pub fn one() -> Self {
        Self::constant(cone(), (0, 0))
    }

    pub fn constant(c: Complex<T>, degree: (usize, usize)) -> Self {
        let mut p = Self::zero(degree);
        p.coeffs[(0, 0)] = c;
        p
    }

    /// `z1^i z2^j` at its own degree.
    pub fn monomial(i: usize, j: usize) -> Self {
        let mut p = Self::zero((i, j));
        p.coeffs[(i, j)] = cone();
        p
    }

    pub fn from_fn(degree: (usize, usize), f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        BiPoly::new(DMatrix::from_fn(degree.0 + 1, degree.1 + 1, f))
    }

    /// Builds from real coefficient rows (row `i` = power of `z1`).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        assert!(m > 0 && n > 0, "empty coefficient rows");
        Self::from_fn((m - 1, n - 1), |i, j| {
            let v = rows[i].get(j).copied().unwrap_or(0.0);
            Complex::new(T::lit(v), T::zero())
        })
    }

    /// Builds a polynomial in one variable from coefficients in increasing degree.
    pub fn univariate(var: Var, coeffs: &[Complex<T>]) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient list");
        let d = coeffs.len() - 1;
        match var {
            Var::Z1 => Self::from_fn((d, 0), |i, _| coeffs[i]),
            Var::Z2 => Self::from_fn((0, d), |_, j| coeffs[j]),
        }
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.coeffs.nrows() - 1, self.coeffs.ncols() - 1)
    }

    pub fn coeffs(&self) -> &DMatrix<Complex<T>> {
        &self.coeffs
    }

    /// Coefficient of `z1^i z2^j`, zero outside the declared box.
    pub fn coeff(&self, i: usize, j: usize) -> Complex<T> {
        if i < self.coeffs.nrows() && j < self.coeffs.ncols() {
            self.coeffs[(i, j)]
        } else {
            czero()
        }
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc.max(modulus(*c)))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == T::zero() && c.im == T::zero())
    }

    /// Smallest bidegree whose box holds every coefficient above `tol * max|c|`.
    pub fn true_degree(&self, tol: T) -> (usize, usize) {
        let cut = tol * self.max_abs_coeff();
        let (mut dm, mut dn) = (0, 0);
        for i in 0..self.coeffs.nrows() {
            for j in 0..self.coeffs.ncols() {
                if modulus(self.coeffs[(i, j)]) > cut {
                    dm = dm.max(i);
                    dn = dn.max(j);
                }
            }
        }
        (dm, dn)
    }

    /// Re-declares the degree, padding with zeros. Truncation only drops
    /// coefficients below `tol * max|c|`; otherwise `None`.
    pub fn with_degree(&self, degree: (usize, usize), tol: T) -> Option<Self> {
        let cut = tol * self.max_abs_coeff();
        for i in 0..self.coeffs.nrows() {
            for j in 0..self.coeffs.ncols() {
                if (i > degree.0 || j > degree.1) && modulus(self.coeffs[(i, j)]) > cut {
                    return None;
                }
            }
        }
        Some(Self::from_fn(degree, |i, j| self.coeff(i, j)))
    }

    /// `z1^m z2^n conj(p(1/conj z1, 1/conj z2))` at the declared degree.
    pub fn reflect(&self) -> Self {
        let (m, n) = self.degree();
        Self::from_fn((m, n), |i, j| self.coeffs[(m - i, n - j)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.degree(), other.degree());
        Self::from_fn((a.0.max(b.0), a.1.max(b.1)), |i, j| {
            self.coeff(i, j) + other.coeff(i, j)
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-cone::<T>()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.degree(), other.degree());
        let mut out = Self::zero((a.0 + b.0, a.1 + b.1));
        for i in 0..=a.0 {
            for j in 0..=a.1 {
                let c = self.coeffs[(i, j)];
                if c.re == T::zero() && c.im == T::zero() {
                    continue;
                }
                for k in 0..=b.0 {
                    for l in 0..=b.1 {
                        out.coeffs[(i + k, j + l)] += c * other.coeffs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        BiPoly::new(self.coeffs.map(|x| x * c))
    }

    /// Multiplies by `z_var^k`, raising the declared degree accordingly.
    pub fn shift(&self, var: Var, k: usize) -> Self {
        let (m, n) = self.degree();
        match var {
            Var::Z1 => Self::from_fn((m + k, n), |i, j| {
                if i >= k {
                    self.coeffs[(i - k, j)]
                } else {
                    czero()
                }
            }),
            Var::Z2 => Self::from_fn((m, n + k), |i, j| {
                if j >= k {
                    self.coeffs[(i, j - k)]
                } else {
                    czero()
                }
            }),
        }
    }

    /// Horner evaluation in `z2` for each row, then in `z1`.
    pub fn evaluate(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        let (m, n) = self.degree();
        let mut acc = czero();
        for i in (0..=m).rev() {
            let mut row = czero();
            for j in (0..=n).rev() {
                row = row * z2 + self.coeffs[(i, j)];
            }
            acc = acc * z1 + row;
        }
        acc
    }

    /// Coefficients, in increasing degree, of the one-variable polynomial
    /// obtained by fixing `var = value`.
    pub fn slice_coeffs(&self, var: Var, value: Complex<T>) -> Vec<Complex<T>> {
        let (m, n) = self.degree();
        match var {
            Var::Z1 => (0..=n)
                .map(|j| {
                    let mut acc = czero();
                    for i in (0..=m).rev() {
                        acc = acc * value + self.coeffs[(i, j)];
                    }
                    acc
                })
                .collect(),
            Var::Z2 => (0..=m)
                .map(|i| {
                    let mut acc = czero();
                    for j in (0..=n).rev() {
                        acc = acc * value + self.coeffs[(i, j)];
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Fixes `var = value`; the result is a polynomial in the other variable
    /// with declared degree zero in `var`.
    pub fn partial_evaluate(&self, var: Var, value: Complex<T>) -> Self {
        Self::univariate(var.other(), &self.slice_coeffs(var, value))
    }

    /// Stability on the closed bidisk with the default 512-point torus slices.
    pub fn is_stable_bidisk(&self, margin: T) -> Result<StabilityVerdict> {
        Ok(self.stability_report(margin, 512)?.verdict)
    }

    /// Slice-wise stability test.
    ///
    /// Roots of `p(τ, ·)` and `p(·, τ)` are computed for `grid` equispaced torus
    /// points `τ` in each variable, plus the interior slices through the origin.
    /// The minimal root modulus is then refined by golden-section search around
    /// the worst torus slice.
    pub fn stability_report(&self, margin: T, grid: usize) -> Result<StabilityReport<T>> {
        if self.max_abs_coeff() == T::zero() {
            return Err(Error::DegenerateInput("zero polynomial".into()));
        }
        let scale = self.max_abs_coeff();
        let origin_value = modulus(self.coeffs[(0, 0)]);
        if origin_value <= T::default_epsilon() * T::lit(64.0) * scale {
            return Ok(StabilityReport {
                verdict: StabilityVerdict::Unstable,
                min_root_modulus: Some(T::zero()),
            });
        }

        let mut best: Option<T> = None;
        let mut push = |r: Option<T>| {
            if let Some(r) = r {
                best = Some(match best {
                    Some(b) => b.min(r),
                    None => r,
                });
            }
        };

        for var in [Var::Z1, Var::Z2] {
            push(min_root_modulus(&self.slice_coeffs(var, czero())));
            let mut worst: Option<(usize, T)> = None;
            for k in 0..grid {
                let tau = root_of_unity::<T>(k, grid);
                if let Some(r) = min_root_modulus(&self.slice_coeffs(var, tau)) {
                    if worst.is_none_or(|(_, w)| r < w) {
                        worst = Some((k, r));
                    }
                }
            }
            if let Some((k, r)) = worst {
                push(Some(r));
                push(self.refine_slice_minimum(var, k, grid));
            }
        }

        let rho = best;
        let one = T::one();
        let verdict = match rho {
            None => StabilityVerdict::StrictlyStable,
            Some(r) if r > one + margin => StabilityVerdict::StrictlyStable,
            Some(r) if r >= one - margin => StabilityVerdict::BoundaryZero,
            Some(_) => StabilityVerdict::Unstable,
        };
        Ok(StabilityReport {
            verdict,
            min_root_modulus: rho,
        })
    }

    fn refine_slice_minimum(&self, var: Var, k: usize, grid: usize) -> Option<T> {
        let step = T::two_pi() / T::lit(grid as f64);
        let center = step * T::lit(k as f64);
        let f = |t: T| {
            min_root_modulus(&self.slice_coeffs(var, crate::scalar::cis(t)))
                .unwrap_or(T::max_value().unwrap_or(T::lit(1e300)))
        };
        let (mut a, mut b) = (center - step, center + step);
        let g = T::lit(0.618_033_988_749_894_9);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..40 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        Some(fc.min(fd))
    }

    /// Splits `p = p1(z1) p2(z2)` when the coefficient matrix has numerical
    /// rank one (`σ2 ≤ tol σ1`). The factors carry balanced magnitudes and
    /// `p2(0)` is rotated onto the nonnegative real axis.
    pub fn factor_rank1(&self, tol: T) -> Option<(BiPoly<T>, BiPoly<T>)> {
        let (m, n) = self.degree();
        if self.is_zero() {
            return None;
        }
        let svd = self.coeffs.clone().svd(true, true);
        let s = &svd.singular_values;
        let s1 = s[0];
        if s.len() > 1 && s[1] > tol * s1 {
            return None;
        }
        let u = svd.u.as_ref()?;
        let v_t = svd.v_t.as_ref()?;
        let root = Complex::new(s1.sqrt(), T::zero());
        let mut p1: Vec<Complex<T>> = (0..=m).map(|i| u[(i, 0)] * root).collect();
        let mut p2: Vec<Complex<T>> = (0..=n).map(|j| v_t[(0, j)] * root).collect();
        let lead = p2[0];
        let lead_mod = modulus(lead);
        if lead_mod > T::zero() {
            let phase = lead / Complex::new(lead_mod, T::zero());
            for c in p2.iter_mut() {
                *c /= phase;
            }
            for c in p1.iter_mut() {
                *c *= phase;
            }
        }
        Some((
            BiPoly::univariate(Var::Z1, &p1),
            BiPoly::univariate(Var::Z2, &p2),
        ))
    }

    pub fn to_json_value(&self) -> PolyJson {
        let (m, n) = self.degree();
        PolyJson {
            degree: [m, n],
            coeffs: (0..=m)
                .map(|i| {
                    (0..=n)
                        .map(|j| {
                            let c = self.coeffs[(i, j)];
                            [c.re.to_f64(), c.im.to_f64()]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json_value(v: &PolyJson) -> Result<Self> {
        let [m, n] = v.degree;
        if v.coeffs.len() != m + 1 || v.coeffs.iter().any(|r| r.len() != n + 1) {
            return Err(Error::Input(format!(
                "coefficient array does not match declared degree ({m},{n})"
            )));
        }
        Ok(Self::from_fn((m, n), |i, j| {
            let [re, im] = v.coeffs[i][j];
            Complex::new(T::lit(re), T::lit(im))
        }))
    }
}

impl<T: Scalar> fmt::Display for BiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, n) = self.degree();
        let mut first = true;
        for i in 0..=m {
            for j in 0..=n {
                let c = self.coeffs[(i, j)];
                if c.re == T::zero() && c.im == T::zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({:?}{:+?}i)", c.re, c.im)?;
                match (i, j) {
                    (0, 0) => {}
                    (i, 0) => write!(f, "·z1^{i}")?,
                    (0, j) => write!(f, "·z2^{j}")?,
                    (i, j) => write!(f, "·z1^{i}·z2^{j}")?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Wire format: `{"degree":[m,n],"coeffs":[[[re,im],...],...]}`, row `i` = power of `z1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub degree: [usize; 2],
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

impl<T: Scalar> Serialize for BiPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for BiPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = PolyJson::deserialize(d)?;
        BiPoly::from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    StrictlyStable,
    BoundaryZero,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport<T> {
    pub verdict: StabilityVerdict,
    /// `None` when no slice polynomial has a finite root.
    pub min_root_modulus: Option<T>,
}

/// Rational function `numerator / denominator`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn<T: Scalar> {
    pub numerator: BiPoly<T>,
    pub denominator: BiPoly<T>,
}

impl<T: Scalar> RationalFn<T> {
    pub fn new(numerator: BiPoly<T>, denominator: BiPoly<T>) -> Self {
        RationalFn {
            numerator,
            denominator,
        }
    }

    pub fn polynomial(p: BiPoly<T>) -> Self {
        RationalFn::new(p, BiPoly::one())
    }

    pub fn evaluate(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        self.numerator.evaluate(z1, z2) / self.denominator.evaluate(z1, z2)
    }
}

/// Roots of `Σ c_k x^k` as eigenvalues of the companion matrix.
///
/// Leading coefficients below `64 ε max|c|` are stripped first; the
/// corresponding roots are at infinity and are not reported.
pub fn univariate_roots<T: Scalar>(coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    let scale = coeffs.iter().fold(T::zero(), |a, c| a.max(modulus(*c)));
    if scale == T::zero() {
        return Vec::new();
    }
    let cut = T::default_epsilon() * T::lit(64.0) * scale;
    let mut deg = coeffs.len() - 1;
    while deg > 0 && modulus(coeffs[deg]) <= cut {
        deg -= 1;
    }
    let mut low = 0;
    while low < deg && modulus(coeffs[low]) <= cut {
        low += 1;
    }
    let mut roots = vec![czero::<T>(); low];
    let c = &coeffs[low..=deg];
    let d = c.len() - 1;
    let lead = c[d];
    match d {
        0 => {}
        1 => roots.push(-c[0] / lead),
        _ => {
            let mut companion = DMatrix::from_element(d, d, czero::<T>());
            for i in 1..d {
                companion[(i, i - 1)] = cone();
            }
            for i in 0..d {
                companion[(i, d - 1)] = -c[i] / lead;
            }
            match nalgebra::linalg::Schur::try_new(companion, T::default_epsilon(), 10_000) {
                Some(schur) => {
                    let (_, t) = schur.unpack();
                    roots.extend((0..d).map(|i| t[(i, i)]));
                }
                None => roots.extend(durand_kerner(c)),
            }
        }
    }
    roots
}

/// Simultaneous Weierstrass iteration; fallback when the QR sweep stalls.
fn durand_kerner<T: Scalar>(c: &[Complex<T>]) -> Vec<Complex<T>> {
    let d = c.len() - 1;
    let lead = c[d];
    let eval = |z: Complex<T>| c.iter().rev().fold(czero::<T>(), |acc, k| acc * z + k) / lead;
    let seed = Complex::new(T::lit(0.4), T::lit(0.9));
    let mut z: Vec<Complex<T>> = (0..d).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut moved = T::zero();
        for i in 0..d {
            let mut denom = cone::<T>();
            for j in 0..d {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(modulus(step));
        }
        if moved <= T::default_epsilon() {
            break;
        }
    }
    z
}

/// Smallest root modulus, `None` if the polynomial has no finite roots.
pub fn min_root_modulus<T: Scalar>(coeffs: &[Complex<T>]) -> Option<T> {
    univariate_roots(coeffs)
        .into_iter()
        .map(modulus)
        .reduce(|a, b| a.min(b))
}
