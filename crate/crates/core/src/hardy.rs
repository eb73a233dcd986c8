//! Hardy space of the bidisk, discretized on an `N × N` torus grid.
//!
//! Sample `(j, k)` holds `f(ω^j, ω^k)` with `ω = e^{2πi/N}`; spectrum entry
//! `(a, b)` holds the coefficient of `z1^a z2^b`. Indices `≥ N/2` stand for
//! negative frequencies.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::poly2::{BiPoly, RationalFn, StabilityVerdict, Var};
use crate::scalar::{czero, modulus, root_of_unity, Scalar};

pub const DEFAULT_GRID: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid<T: Scalar> {
    n: usize,
    samples: Vec<Complex<T>>,
    spectrum: Vec<Complex<T>>,
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Input(format!("grid size {n} is not a power of two ≥ 2")));
    }
    Ok(())
}

fn fft2<T: Scalar>(data: &mut [Complex<T>], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Signed frequency of a spectrum index.
#[inline]
pub fn signed_freq(idx: usize, n: usize) -> isize {
    if idx < n / 2 {
        idx as isize
    } else {
        idx as isize - n as isize
    }
}

#[inline]
fn wrap(freq: isize, n: usize) -> usize {
    freq.rem_euclid(n as isize) as usize
}

impl<T: Scalar> TorusGrid<T> {
    pub fn from_samples(n: usize, samples: Vec<Complex<T>>) -> Result<Self> {
        check_size(n)?;
        if samples.len() != n * n {
            return Err(Error::GridMismatch(n * n, samples.len()));
        }
        let mut spectrum = samples.clone();
        fft2(&mut spectrum, n, false);
        let scale = T::one() / T::lit((n * n) as f64);
        for c in spectrum.iter_mut() {
            *c = c.scale(scale);
        }
        Ok(TorusGrid {
            n,
            samples,
            spectrum,
        })
    }

    pub fn from_spectrum(n: usize, spectrum: Vec<Complex<T>>) -> Result<Self> {
        check_size(n)?;
        if spectrum.len() != n * n {
            return Err(Error::GridMismatch(n * n, spectrum.len()));
        }
        let mut samples = spectrum.clone();
        fft2(&mut samples, n, true);
        Ok(TorusGrid {
            n,
            samples,
            spectrum,
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        check_size(n)?;
        let roots: Vec<Complex<T>> = (0..n).map(|k| root_of_unity(k, n)).collect();
        let mut samples = Vec::with_capacity(n * n);
        for z1 in &roots {
            for z2 in &roots {
                samples.push(f(*z1, *z2));
            }
        }
        Self::from_samples(n, samples)
    }

    pub fn constant(n: usize, c: Complex<T>) -> Result<Self> {
        Self::from_fn(n, |_, _| c)
    }

    /// Function whose only nonzero coefficients are those of `p`.
    pub fn from_poly_coeffs(n: usize, p: &BiPoly<T>) -> Result<Self> {
        check_size(n)?;
        let (m, d) = p.degree();
        if m >= n / 2 || d >= n / 2 {
            return Err(Error::Input(format!(
                "degree ({m},{d}) does not fit the analytic quadrant of a {n}-grid"
            )));
        }
        let mut spec = vec![czero(); n * n];
        for i in 0..=m {
            for j in 0..=d {
                spec[i * n + j] = p.coeff(i, j);
            }
        }
        Self::from_spectrum(n, spec)
    }

    /// Rebuilds a function from its analytic-quadrant coefficients
    /// (`(N/2)²` entries, row-major, row = power of `z1`).
    pub fn from_analytic_coeffs(n: usize, coeffs: &[Complex<T>]) -> Result<Self> {
        check_size(n)?;
        let h = n / 2;
        if coeffs.len() != h * h {
            return Err(Error::GridMismatch(h * h, coeffs.len()));
        }
        let mut spec = vec![czero(); n * n];
        for a in 0..h {
            spec[a * n..a * n + h].copy_from_slice(&coeffs[a * h..a * h + h]);
        }
        Self::from_spectrum(n, spec)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn spectrum(&self) -> &[Complex<T>] {
        &self.spectrum
    }

    pub fn sample_at(&self, j: usize, k: usize) -> Complex<T> {
        self.samples[j * self.n + k]
    }

    /// Fourier coefficient of `z1^a z2^b` (negative powers allowed).
    pub fn coeff(&self, a: isize, b: isize) -> Complex<T> {
        let h = (self.n / 2) as isize;
        if a >= h || b >= h || a < -h || b < -h {
            return czero();
        }
        self.spectrum[wrap(a, self.n) * self.n + wrap(b, self.n)]
    }

    pub fn analytic_coeffs(&self) -> Vec<Complex<T>> {
        let (n, h) = (self.n, self.n / 2);
        let mut out = Vec::with_capacity(h * h);
        for a in 0..h {
            out.extend_from_slice(&self.spectrum[a * n..a * n + h]);
        }
        out
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// `(1/N²) Σ f conj(g)` over the grid.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.same_size(other)?;
        let mut acc = czero::<T>();
        for (f, g) in self.samples.iter().zip(&other.samples) {
            acc += *f * g.conj();
        }
        Ok(acc.unscale(T::lit((self.n * self.n) as f64)))
    }

    pub fn norm(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, f| acc + f.norm_sqr())
            .sqrt()
            / T::lit(self.n as f64)
    }

    pub fn max_abs(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, f| acc.max(modulus(*f)))
    }

    fn zip_samples(
        &self,
        other: &Self,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        self.same_size(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self::from_samples(self.n, samples)
    }

    fn zip_spectra(
        &self,
        other: &Self,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        self.same_size(other)?;
        let spectrum = self
            .spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self::from_spectrum(self.n, spectrum)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_samples(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_spectra(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_spectra(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        TorusGrid {
            n: self.n,
            samples: self.samples.iter().map(|x| *x * c).collect(),
            spectrum: self.spectrum.iter().map(|x| *x * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        let samples = self.samples.iter().map(|x| x.conj()).collect();
        Self::from_samples(self.n, samples).expect("size already validated")
    }

    fn filter_spectrum(&self, keep: impl Fn(isize, isize) -> bool) -> Self {
        let n = self.n;
        let mut spec = self.spectrum.clone();
        for a in 0..n {
            for b in 0..n {
                if !keep(signed_freq(a, n), signed_freq(b, n)) {
                    spec[a * n + b] = czero();
                }
            }
        }
        Self::from_spectrum(n, spec).expect("size already validated")
    }

    /// Zeroes every coefficient with a negative index in either variable.
    pub fn project_plus(&self) -> Self {
        self.filter_spectrum(|a, b| a >= 0 && b >= 0)
    }

    /// `P_θ f = f − θ · P₊(θ̄ f)`, with `theta` sampled on the same grid.
    pub fn project_model(&self, theta: &Self) -> Result<Self> {
        let inner = theta.conj().mul(self)?.project_plus();
        self.sub(&theta.mul(&inner)?)
    }

    /// Backward shift `(f − f|_{z_var = 0}) / z_var` of an analytic function.
    pub fn backshift(&self, var: Var) -> Self {
        let (n, h) = (self.n, self.n / 2);
        let mut spec = vec![czero(); n * n];
        for a in 0..h {
            for b in 0..h {
                let (src_a, src_b) = match var {
                    Var::Z1 => (a + 1, b),
                    Var::Z2 => (a, b + 1),
                };
                if src_a < h && src_b < h {
                    spec[a * n + b] = self.spectrum[src_a * n + src_b];
                }
            }
        }
        Self::from_spectrum(n, spec).expect("size already validated")
    }

    /// Multiplication by `z_var`, truncated to the analytic quadrant.
    pub fn shift(&self, var: Var) -> Self {
        let (n, h) = (self.n, self.n / 2);
        let mut spec = vec![czero(); n * n];
        for a in 0..h {
            for b in 0..h {
                let (dst_a, dst_b) = match var {
                    Var::Z1 => (a + 1, b),
                    Var::Z2 => (a, b + 1),
                };
                if dst_a < h && dst_b < h {
                    spec[dst_a * n + dst_b] = self.spectrum[a * n + b];
                }
            }
        }
        Self::from_spectrum(n, spec).expect("size already validated")
    }

    /// Largest modulus among Fourier coefficients with a negative index.
    pub fn negative_mass(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for a in 0..n {
            for b in 0..n {
                if signed_freq(a, n) < 0 || signed_freq(b, n) < 0 {
                    worst = worst.max(modulus(self.spectrum[a * n + b]));
                }
            }
        }
        worst
    }

    /// Evaluates the analytic part at an interior point of the bidisk.
    pub fn eval_interior(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        let (n, h) = (self.n, self.n / 2);
        let mut acc = czero::<T>();
        for a in (0..h).rev() {
            let mut row = czero::<T>();
            for b in (0..h).rev() {
                row = row * z2 + self.spectrum[a * n + b];
            }
            acc = acc * z1 + row;
        }
        acc
    }
}

pub fn sample_poly<T: Scalar>(p: &BiPoly<T>, n: usize) -> Result<TorusGrid<T>> {
    TorusGrid::from_fn(n, |z1, z2| p.evaluate(z1, z2))
}

/// Samples a rational function whose denominator is strictly stable.
pub fn sample_rational<T: Scalar>(f: &RationalFn<T>, n: usize) -> Result<TorusGrid<T>> {
    let verdict = f.denominator.is_stable_bidisk(T::lit(1e-9))?;
    if verdict != StabilityVerdict::StrictlyStable {
        return Err(Error::UnstableDenominator(format!("{verdict:?}")));
    }
    TorusGrid::from_fn(n, |z1, z2| f.evaluate(z1, z2))
}

/// `(f − f|_{z_var=0}) / z_var` as a rational function, with the `z_var`
/// factor cancelled exactly on the numerator coefficients.
pub fn backshift<T: Scalar>(f: &RationalFn<T>, var: Var) -> Result<RationalFn<T>> {
    let zero = czero::<T>();
    let num0 = f.numerator.partial_evaluate(var, zero);
    let den0 = f.denominator.partial_evaluate(var, zero);
    let top = f.numerator.mul(&den0).sub(&num0.mul(&f.denominator));
    let (m, n) = top.degree();
    let scale = T::one().max(top.max_abs_coeff());
    let slice: Vec<Complex<T>> = match var {
        Var::Z1 => (0..=n).map(|j| top.coeff(0, j)).collect(),
        Var::Z2 => (0..=m).map(|i| top.coeff(i, 0)).collect(),
    };
    let residual = slice.iter().fold(T::zero(), |a, b| a.max(modulus(*b)));
    if residual > T::lit(1e-10) * scale {
        return Err(Error::NonDivisible {
            var: var.index(),
            residual: residual.to_f64(),
        });
    }
    let numerator = match var {
        Var::Z1 if m == 0 => BiPoly::zero((0, n)),
        Var::Z1 => BiPoly::from_fn((m - 1, n), |i, j| top.coeff(i + 1, j)),
        Var::Z2 if n == 0 => BiPoly::zero((m, 0)),
        Var::Z2 => BiPoly::from_fn((m, n - 1), |i, j| top.coeff(i, j + 1)),
    };
    Ok(RationalFn::new(numerator, f.denominator.mul(&den0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type G = TorusGrid<f64>;
    type P = BiPoly<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn poly_grid(n: usize, rows: &[&[f64]]) -> G {
        sample_poly(&P::from_real_rows(rows), n).unwrap()
    }

    #[test]
    fn sample_examples() {
        let one = sample_poly(&P::one(), 8).unwrap();
        assert!(one.samples().iter().all(|s| (*s - c(1.0, 0.0)).norm() < 1e-15));

        let z1 = sample_poly(&P::monomial(1, 0), 4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let expect: Complex<f64> = root_of_unity(j, 4);
                assert!((z1.sample_at(j, k) - expect).norm() < 1e-15);
            }
        }

        let f = RationalFn::new(P::one(), P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]));
        let g = sample_rational(&f, 256).unwrap();
        assert!((g.max_abs() - 0.5).abs() < 1e-15);
        assert!((g.sample_at(0, 0) - c(0.5, 0.0)).norm() < 1e-15);

        let bad = RationalFn::new(P::one(), P::from_real_rows(&[&[2.0, -1.0], &[-1.0, 0.0]]));
        assert!(matches!(
            sample_rational(&bad, 16),
            Err(Error::UnstableDenominator(_))
        ));
    }

    #[test]
    fn inner_product_examples() {
        let n = 16;
        let z1z2 = sample_poly(&P::monomial(1, 1), n).unwrap();
        let z1 = sample_poly(&P::monomial(1, 0), n).unwrap();
        let z2 = sample_poly(&P::monomial(0, 1), n).unwrap();
        assert!((z1z2.inner_product(&z1z2).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        assert!(z1.inner_product(&z2).unwrap().norm() < 1e-15);

        let f = sample_rational(
            &RationalFn::new(P::one(), P::from_real_rows(&[&[4.0], &[-1.0]])),
            64,
        )
        .unwrap();
        let one = G::constant(64, c(1.0, 0.0)).unwrap();
        assert!((f.inner_product(&one).unwrap() - c(0.25, 0.0)).norm() < 1e-14);

        assert!(matches!(
            z1.inner_product(&G::constant(8, c(1.0, 0.0)).unwrap()),
            Err(Error::GridMismatch(16, 8))
        ));
    }

    #[test]
    fn project_plus_examples() {
        let n = 16;
        let zbar = G::from_fn(n, |z1, _| z1.conj()).unwrap();
        assert!(zbar.project_plus().max_abs() < 1e-15);

        let g = G::from_fn(n, |z1, z2| c(2.0, 0.0) + z1.conj() * z2).unwrap();
        let p = g.project_plus();
        assert!(p.samples().iter().all(|s| (*s - c(2.0, 0.0)).norm() < 1e-14));

        let g = G::from_fn(n, |z1, _| {
            let v = c(4.0, 0.0) - z1;
            c(v.norm_sqr(), 0.0)
        })
        .unwrap();
        let p = g.project_plus();
        assert!((p.coeff(0, 0) - c(17.0, 0.0)).norm() < 1e-13);
        assert!((p.coeff(1, 0) - c(-4.0, 0.0)).norm() < 1e-13);
        assert!(p.coeff(-1, 0).norm() < 1e-14);
        assert!((p.project_plus().sub(&p).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn project_model_examples() {
        let n = 16;
        let theta = sample_poly(&P::monomial(1, 1), n).unwrap();
        let one = poly_grid(n, &[&[1.0]]);
        let z1 = sample_poly(&P::monomial(1, 0), n).unwrap();
        assert!(one.project_model(&theta).unwrap().sub(&one).unwrap().max_abs() < 1e-14);
        assert!(theta.project_model(&theta).unwrap().max_abs() < 1e-14);
        assert!(z1.project_model(&theta).unwrap().sub(&z1).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn project_model_for_rational_inner() {
        let n = 64;
        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let theta = sample_rational(&RationalFn::new(p.reflect(), p.clone()), n).unwrap();
        let f = poly_grid(n, &[&[1.0, 0.5, -0.25], &[0.3, 0.0, 2.0]]);
        let pf = f.project_model(&theta).unwrap();
        let ppf = pf.project_model(&theta).unwrap();
        assert!(ppf.sub(&pf).unwrap().max_abs() < 1e-10);
        for a in 0..4 {
            for b in 0..4 {
                let g = theta.mul(&sample_poly(&P::monomial(a, b), n).unwrap()).unwrap();
                assert!(pf.inner_product(&g).unwrap().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn backshift_examples() {
        let f = RationalFn::polynomial(P::monomial(1, 1));
        let b = backshift(&f, Var::Z1).unwrap();
        for (z1, z2) in [(c(0.3, 0.1), c(-0.2, 0.5)), (c(0.0, 0.0), c(0.7, 0.0))] {
            assert!((b.evaluate(z1, z2) - z2).norm() < 1e-15);
        }
        let b = backshift(&RationalFn::polynomial(P::one()), Var::Z1).unwrap();
        assert!(b.numerator.is_zero());

        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let f = RationalFn::new(p.reflect(), p.clone());
        let b = backshift(&f, Var::Z1).unwrap();
        let n = 32;
        let mut err: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let (z1, z2) = (root_of_unity(j, n), root_of_unity(k, n));
                let expect = (f.evaluate(z1, z2) - f.evaluate(c(0.0, 0.0), z2)) / z1;
                err = err.max((b.evaluate(z1, z2) - expect).norm());
            }
        }
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn grid_backshift_matches_rational_backshift() {
        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let f = RationalFn::new(p.reflect(), p.clone());
        let n = 128;
        for var in [Var::Z1, Var::Z2] {
            let lhs = sample_rational(&f, n).unwrap().backshift(var);
            let rhs = sample_rational(&backshift(&f, var).unwrap(), n).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_interior_evaluation() {
        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let f = RationalFn::new(P::one(), p);
        let g = sample_rational(&f, 128).unwrap();
        let back = G::from_spectrum(128, g.spectrum().to_vec()).unwrap();
        let err = back
            .samples()
            .iter()
            .zip(g.samples())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(err < 1e-14);
        let z = (c(0.3, -0.2), c(-0.5, 0.4));
        assert!((g.eval_interior(z.0, z.1) - f.evaluate(z.0, z.1)).norm() < 1e-13);
        let quad = G::from_analytic_coeffs(128, &g.analytic_coeffs()).unwrap();
        assert!(quad.sub(&g).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn grid_doubling() {
        let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
        let f = RationalFn::new(p.reflect(), p.clone());
        let g1 = poly_grid(64, &[&[1.0, 2.0], &[0.0, -1.0]]);
        let g2 = poly_grid(128, &[&[1.0, 2.0], &[0.0, -1.0]]);
        let t1 = sample_rational(&f, 64).unwrap();
        let t2 = sample_rational(&f, 128).unwrap();
        let n1 = g1.project_model(&t1).unwrap().norm();
        let n2 = g2.project_model(&t2).unwrap().norm();
        assert!((n1 - n2).abs() <= 1e-9);
    }

    fn arb_coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)
    }

    fn from_coeffs(v: &[(f64, f64)]) -> P {
        P::from_fn((2, 2), |i, j| {
            let (re, im) = v[i * 3 + j];
            c(re, im)
        })
    }

    proptest! {
        #[test]
        fn parseval(v in arb_coeffs()) {
            let p = from_coeffs(&v);
            let g = sample_poly(&p, 16).unwrap();
            let lhs = g.inner_product(&g).unwrap().re;
            let rhs: f64 = v.iter().map(|(a, b)| a * a + b * b).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn project_model_is_self_adjoint(u in arb_coeffs(), v in arb_coeffs()) {
            let n = 64;
            let p = P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
            let theta = sample_rational(&RationalFn::new(p.reflect(), p.clone()), n).unwrap();
            let f = sample_poly(&from_coeffs(&u), n).unwrap();
            let g = sample_poly(&from_coeffs(&v), n).unwrap();
            let lhs = f.project_model(&theta).unwrap().inner_product(&g).unwrap();
            let rhs = f.inner_product(&g.project_model(&theta).unwrap()).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }
}
