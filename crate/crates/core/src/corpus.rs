//! The bundled test functions.

use crate::error::Result;
use crate::innerfn::{make_rational_inner, BlaschkeProduct, InnerFunction, ProductInner};
use crate::linalg::c;
use crate::poly2::BiPoly;
use crate::scalar::cis;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub function: InnerFunction<f64>,
}

fn blaschke(zeros: &[(f64, f64)], phase: f64) -> BlaschkeProduct<f64> {
    BlaschkeProduct::new(zeros.iter().map(|&(re, im)| c(re, im)).collect(), cis(phase))
        .expect("corpus zeros lie in the disk")
}

fn product(phi: BlaschkeProduct<f64>, psi: BlaschkeProduct<f64>) -> InnerFunction<f64> {
    InnerFunction::Product(ProductInner::new(phi, psi))
}

fn rational(p: BiPoly<f64>) -> Result<InnerFunction<f64>> {
    Ok(InnerFunction::Rational(make_rational_inner(p)?))
}

/// Twelve functions: `z1 z2`, `z2^n` for `n = 1..4`, two rational inner
/// functions given by their denominators, four Blaschke products up to
/// degree `(2, 2)`, and `z1² z2`.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = vec![CorpusEntry {
        name: "z1z2",
        function: product(BlaschkeProduct::power(1), BlaschkeProduct::power(1)),
    }];
    for (n, name) in [(1, "z2"), (2, "z2_pow2"), (3, "z2_pow3"), (4, "z2_pow4")] {
        out.push(CorpusEntry {
            name,
            function: product(BlaschkeProduct::power(0), BlaschkeProduct::power(n)),
        });
    }
    out.push(CorpusEntry {
        name: "four_minus_z1_minus_z2",
        function: rational(BiPoly::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]))
            .expect("stable"),
    });
    out.push(CorpusEntry {
        name: "two_minus_z1_times_three_minus_z2",
        function: rational(BiPoly::from_real_rows(&[&[6.0, -2.0], &[-3.0, 1.0]]))
            .expect("stable"),
    });
    out.push(CorpusEntry {
        name: "blaschke_1_1",
        function: product(blaschke(&[(0.5, 0.0)], 0.0), BlaschkeProduct::power(1)),
    });
    out.push(CorpusEntry {
        name: "blaschke_1_2",
        function: product(
            blaschke(&[(0.25, 0.0)], 0.0),
            blaschke(&[(0.3, 0.0), (-0.5, 0.2)], 0.0),
        ),
    });
    out.push(CorpusEntry {
        name: "blaschke_2_1",
        function: product(
            blaschke(&[(0.3, 0.0), (-0.4, 0.0)], 0.0),
            BlaschkeProduct::power(1),
        ),
    });
    out.push(CorpusEntry {
        name: "blaschke_2_2",
        function: product(
            blaschke(&[(0.4, 0.0), (0.0, -0.3)], 0.5),
            blaschke(&[(0.2, 0.0), (-0.5, 0.0)], -0.8),
        ),
    });
    out.push(CorpusEntry {
        name: "z1_pow2_z2",
        function: product(BlaschkeProduct::power(2), BlaschkeProduct::power(1)),
    });
    out
}

pub fn by_name(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name == name)
}
