//! Inner functions on the bidisk: finite Blaschke products in one variable,
//! products `φ(z1) ψ(z2)`, and rational inner functions `p̃ / p`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{self, TorusGrid};
use crate::poly2::{univariate_roots, BiPoly, PolyJson, RationalFn, StabilityVerdict, Var};
use crate::scalar::{cis, cone, czero, modulus, root_of_unity, Scalar};

/// `c · Π (z − a) / (1 − ā z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct<T: Scalar> {
    zeros: Vec<Complex<T>>,
    constant: Complex<T>,
}

impl<T: Scalar> BlaschkeProduct<T> {
    pub fn new(zeros: Vec<Complex<T>>, constant: Complex<T>) -> Result<Self> {
        let limit = T::one() - T::lit(1e-12);
        if let Some(a) = zeros.iter().find(|a| modulus(**a) >= limit) {
            return Err(Error::Input(format!(
                "Blaschke zero {a} is not in the open unit disk"
            )));
        }
        if (modulus(constant) - T::one()).abs() > T::lit(1e-14).max(T::default_epsilon() * T::lit(8.0))
        {
            return Err(Error::Input(format!(
                "Blaschke constant {constant} is not unimodular"
            )));
        }
        Ok(BlaschkeProduct { zeros, constant })
    }

    pub fn from_zeros(zeros: Vec<Complex<T>>) -> Result<Self> {
        Self::new(zeros, cone())
    }

    /// The identity `z`.
    pub fn identity() -> Self {
        BlaschkeProduct {
            zeros: vec![czero()],
            constant: cone(),
        }
    }

    /// `z^k`.
    pub fn power(k: usize) -> Self {
        BlaschkeProduct {
            zeros: vec![czero(); k],
            constant: cone(),
        }
    }

    pub fn zeros(&self) -> &[Complex<T>] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex<T> {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn evaluate(&self, z: Complex<T>) -> Complex<T> {
        self.zeros.iter().fold(self.constant, |acc, a| {
            acc * (z - a) / (cone::<T>() - a.conj() * z)
        })
    }

    /// `Π (1 − ā z)` as a polynomial in `var`.
    pub fn denominator(&self, var: Var) -> BiPoly<T> {
        self.zeros.iter().fold(BiPoly::one(), |acc, a| {
            acc.mul(&BiPoly::univariate(var, &[cone(), -a.conj()]))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductInner<T: Scalar> {
    pub phi: BlaschkeProduct<T>,
    pub psi: BlaschkeProduct<T>,
}

impl<T: Scalar> ProductInner<T> {
    pub fn new(phi: BlaschkeProduct<T>, psi: BlaschkeProduct<T>) -> Self {
        ProductInner { phi, psi }
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.phi.degree(), self.psi.degree())
    }

    pub fn evaluate(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        self.phi.evaluate(z1) * self.psi.evaluate(z2)
    }

    pub fn sample(&self, n: usize) -> Result<TorusGrid<T>> {
        TorusGrid::from_fn(n, |z1, z2| self.evaluate(z1, z2))
    }
}

/// `θ = p̃ / p` with `p` strictly stable on the closed bidisk.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalInner<T: Scalar> {
    p: BiPoly<T>,
    p_reflected: BiPoly<T>,
}

impl<T: Scalar> RationalInner<T> {
    pub fn p(&self) -> &BiPoly<T> {
        &self.p
    }

    pub fn p_reflected(&self) -> &BiPoly<T> {
        &self.p_reflected
    }

    pub fn degree(&self) -> (usize, usize) {
        self.p.degree()
    }

    pub fn evaluate(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        self.p_reflected.evaluate(z1, z2) / self.p.evaluate(z1, z2)
    }

    pub fn as_rational_fn(&self) -> RationalFn<T> {
        RationalFn::new(self.p_reflected.clone(), self.p.clone())
    }

    pub fn sample(&self, n: usize) -> Result<TorusGrid<T>> {
        TorusGrid::from_fn(n, |z1, z2| self.evaluate(z1, z2))
    }
}

/// Validates `p` and forms `θ = p̃ / p` at the declared degree of `p`.
pub fn make_rational_inner<T: Scalar>(p: BiPoly<T>) -> Result<RationalInner<T>> {
    let verdict = p.is_stable_bidisk(T::lit(1e-9))?;
    if verdict != StabilityVerdict::StrictlyStable {
        return Err(Error::UnstableDenominator(format!("{verdict:?}")));
    }
    let p_reflected = p.reflect();
    if share_slice_roots(&p, &p_reflected) {
        return Err(Error::CommonFactor);
    }
    Ok(RationalInner { p, p_reflected })
}

/// Common-factor detection: a shared factor shows up as a shared root of the
/// one-variable slices at every generic value of the other variable.
fn share_slice_roots<T: Scalar>(p: &BiPoly<T>, q: &BiPoly<T>) -> bool {
    let probes = [
        Complex::new(T::lit(0.371), T::lit(0.213)),
        Complex::new(T::lit(-0.583), T::lit(0.147)),
        Complex::new(T::lit(0.097), T::lit(-0.661)),
    ];
    let tol = T::lit(1e-8);
    [Var::Z1, Var::Z2].into_iter().any(|var| {
        probes.iter().all(|v| {
            let rp = univariate_roots(&p.slice_coeffs(var, *v));
            let rq = univariate_roots(&q.slice_coeffs(var, *v));
            rp.iter().any(|a| {
                rq.iter()
                    .any(|b| modulus(*a - *b) <= tol * (T::one() + modulus(*a)))
            })
        })
    })
}

/// `p = λ Π(1 − ā_i z1) Π(1 − b̄_j z2)` with `λ² = conj(c_φ c_ψ)`, so that
/// `p̃ / p = φ ψ` including the unimodular constants.
pub fn product_to_rational<T: Scalar>(f: &ProductInner<T>) -> RationalInner<T> {
    let c = f.phi.constant() * f.psi.constant();
    let lambda = cis(-c.im.atan2(c.re) / T::lit(2.0));
    let p = f
        .phi
        .denominator(Var::Z1)
        .mul(&f.psi.denominator(Var::Z2))
        .scale(lambda);
    let p_reflected = p.reflect();
    RationalInner { p, p_reflected }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InnerFunction<T: Scalar> {
    Product(ProductInner<T>),
    Rational(RationalInner<T>),
}

impl<T: Scalar> InnerFunction<T> {
    pub fn degree(&self) -> (usize, usize) {
        match self {
            InnerFunction::Product(f) => f.degree(),
            InnerFunction::Rational(f) => f.degree(),
        }
    }

    pub fn evaluate(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        match self {
            InnerFunction::Product(f) => f.evaluate(z1, z2),
            InnerFunction::Rational(f) => f.evaluate(z1, z2),
        }
    }

    pub fn to_rational(&self) -> RationalInner<T> {
        match self {
            InnerFunction::Product(f) => product_to_rational(f),
            InnerFunction::Rational(f) => f.clone(),
        }
    }

    pub fn sample(&self, n: usize) -> Result<TorusGrid<T>> {
        match self {
            InnerFunction::Product(f) => f.sample(n),
            InnerFunction::Rational(f) => f.sample(n),
        }
    }

    pub fn as_product(&self) -> Option<&ProductInner<T>> {
        match self {
            InnerFunction::Product(f) => Some(f),
            InnerFunction::Rational(_) => None,
        }
    }
}

/// `max ||f(τ)| − 1|` over the `n × n` torus grid.
pub fn torus_modulus_deviation<T: Scalar>(
    n: usize,
    f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
) -> T {
    let roots: Vec<Complex<T>> = (0..n).map(|k| root_of_unity(k, n)).collect();
    let mut worst = T::zero();
    for z1 in &roots {
        for z2 in &roots {
            worst = worst.max((modulus(f(*z1, *z2)) - T::one()).abs());
        }
    }
    worst
}

pub fn verify_inner<T: Scalar>(theta: &InnerFunction<T>, n: usize) -> T {
    torus_modulus_deviation(n, |z1, z2| theta.evaluate(z1, z2))
}

/// `(θ − θ|_{z_var = 0}) / z_var`.
pub fn backshift_theta<T: Scalar>(theta: &RationalInner<T>, var: Var) -> Result<RationalFn<T>> {
    hardy::backshift(&theta.as_rational_fn(), var)
}

/// Wire format of a one-variable Blaschke product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeJson {
    pub zeros: Vec<[f64; 2]>,
    #[serde(default = "unit")]
    pub c: [f64; 2],
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

impl BlaschkeJson {
    pub fn build<T: Scalar>(&self) -> Result<BlaschkeProduct<T>> {
        let cz = |v: &[f64; 2]| Complex::new(T::lit(v[0]), T::lit(v[1]));
        BlaschkeProduct::new(self.zeros.iter().map(cz).collect(), cz(&self.c))
    }

    pub fn from_product<T: Scalar>(b: &BlaschkeProduct<T>) -> Self {
        let pair = |z: &Complex<T>| [z.re.to_f64(), z.im.to_f64()];
        BlaschkeJson {
            zeros: b.zeros().iter().map(pair).collect(),
            c: pair(&b.constant()),
        }
    }
}

/// Function description as read from JSON. `quotient` describes an
/// arbitrary rational function, which need not be inner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSpec {
    Product { phi: BlaschkeJson, psi: BlaschkeJson },
    Rational { p: PolyJson },
    Quotient { num: PolyJson, den: PolyJson },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecTarget<T: Scalar> {
    Inner(InnerFunction<T>),
    Quotient(RationalFn<T>),
}

impl InnerSpec {
    pub fn build<T: Scalar>(&self) -> Result<SpecTarget<T>> {
        Ok(match self {
            InnerSpec::Product { phi, psi } => SpecTarget::Inner(InnerFunction::Product(
                ProductInner::new(phi.build()?, psi.build()?),
            )),
            InnerSpec::Rational { p } => SpecTarget::Inner(InnerFunction::Rational(
                make_rational_inner(BiPoly::from_json_value(p)?)?,
            )),
            InnerSpec::Quotient { num, den } => SpecTarget::Quotient(RationalFn::new(
                BiPoly::from_json_value(num)?,
                BiPoly::from_json_value(den)?,
            )),
        })
    }

    /// Builds an inner function, rejecting `quotient` specs.
    pub fn build_inner<T: Scalar>(&self) -> Result<InnerFunction<T>> {
        match self.build()? {
            SpecTarget::Inner(f) => Ok(f),
            SpecTarget::Quotient(_) => Err(Error::Input(
                "a quotient spec does not describe an inner function".into(),
            )),
        }
    }

    pub fn from_inner<T: Scalar>(f: &InnerFunction<T>) -> Self {
        match f {
            InnerFunction::Product(f) => InnerSpec::Product {
                phi: BlaschkeJson::from_product(&f.phi),
                psi: BlaschkeJson::from_product(&f.psi),
            },
            InnerFunction::Rational(f) => InnerSpec::Rational {
                p: f.p().to_json_value(),
            },
        }
    }
}
