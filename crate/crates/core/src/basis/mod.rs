//! Polynomial bases and quadrature.

pub mod dubiner;
pub mod legendre;
pub mod monomial;
pub mod quadrature;
pub mod rtn;
pub mod scalar;

pub use dubiner::OrthoBasis;
pub use legendre::LegendreTimeBasis;
pub use monomial::MonomialBasis;
pub use quadrature::{gauss_legendre, triangle_rule, LineRule, TriangleRule};
pub use rtn::{rtn_dim, RtnElement};
pub use scalar::{poly_dim, ScalarShape};
