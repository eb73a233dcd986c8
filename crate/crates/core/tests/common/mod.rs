#![allow(dead_code)]

use agler_core::innerfn::{BlaschkeProduct, InnerFunction, ProductInner};
use agler_core::linalg::c;
use agler_core::scalar::cis;
use proptest::prelude::*;

/// Blaschke products with at most `max_deg` zeros of modulus `≤ 0.8`.
pub fn blaschke(max_deg: usize) -> impl Strategy<Value = BlaschkeProduct<f64>> {
    blaschke_within(max_deg, 0.8)
}

/// Zeros of modulus below `radius`. Grids of size `N` alias at about `radius^N`.
pub fn blaschke_within(max_deg: usize, radius: f64) -> impl Strategy<Value = BlaschkeProduct<f64>> {
    (
        proptest::collection::vec((0.0f64..radius, 0.0f64..std::f64::consts::TAU), 0..=max_deg),
        0.0f64..std::f64::consts::TAU,
    )
        .prop_map(|(zeros, phase)| {
            let zeros = zeros.into_iter().map(|(r, t)| cis(t) * r).collect();
            BlaschkeProduct::new(zeros, cis(phase)).unwrap()
        })
}

pub fn blaschke_exact(deg: usize) -> impl Strategy<Value = BlaschkeProduct<f64>> {
    proptest::collection::vec((0.0f64..0.8, 0.0f64..std::f64::consts::TAU), deg).prop_map(|zeros| {
        BlaschkeProduct::from_zeros(zeros.into_iter().map(|(r, t)| cis(t) * r).collect()).unwrap()
    })
}

/// Non-constant products with zeros of modulus `≤ 0.8`.
pub fn product(max_phi: usize, max_psi: usize) -> impl Strategy<Value = ProductInner<f64>> {
    product_within(max_phi, max_psi, 0.8)
}

/// Non-constant products with zeros of modulus below `radius`.
pub fn product_within(max_phi: usize, max_psi: usize, radius: f64) -> impl Strategy<Value = ProductInner<f64>> {
    (blaschke_within(max_phi, radius), blaschke_within(max_psi, radius))
        .prop_filter("constant", |(a, b)| a.degree() + b.degree() > 0)
        .prop_map(|(a, b)| ProductInner::new(a, b))
}

pub fn as_inner(f: &ProductInner<f64>) -> InnerFunction<f64> {
    InnerFunction::Product(f.clone())
}

pub fn unit() -> agler_core::C64 {
    c(1.0, 0.0)
}
