pub mod agler;
pub mod analysis;
pub mod corpus;
pub mod error;
pub mod hardy;
pub mod innerfn;
pub mod linalg;
pub mod poly2;
pub mod reducing;
pub mod scalar;
pub mod shiftop;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Scalar;

pub type C64 = Complex<f64>;
pub type BiPoly = poly2::BiPoly<f64>;
pub type RationalFn = poly2::RationalFn<f64>;
pub type TorusGrid = hardy::TorusGrid<f64>;
pub type BlaschkeProduct = innerfn::BlaschkeProduct<f64>;
pub type ProductInner = innerfn::ProductInner<f64>;
pub type RationalInner = innerfn::RationalInner<f64>;
pub type InnerFunction = innerfn::InnerFunction<f64>;
