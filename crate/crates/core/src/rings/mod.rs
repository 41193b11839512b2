//! Coefficient rings with a valuation, behind one trait consumed by the
//! linear algebra layer.
//!
//! Three models are provided:
//!
//! * [`HahnSeries`]: finite-support series `Σ a_γ t^γ` with rational
//!   exponents over a small finite field, with an optional per-element
//!   precision cutoff (exponents at or above the cutoff are unknown),
//! * [`PadicRational`]: `ℚ` carrying the `p`-adic valuation (exact),
//! * [`XiSeries`]: truncated Laurent series in `ξ` with rational
//!   coefficients, `v(ξ) = 1`.
//!
//! Precision propagates pessimistically: sums keep the worse cutoff,
//! products shift each cutoff by the other factor's valuation, inversion
//! costs twice the valuation. Elements whose stored terms all vanish while
//! the cutoff is finite are *indeterminate*: indistinguishable from zero.

mod finite_field;
mod hahn;
mod padic;
mod xi;

pub use finite_field::{FFElem, FiniteField};
pub use hahn::HahnSeries;
pub use padic::PadicRational;
pub use xi::XiSeries;

use std::fmt;

use crate::error::Result;
use crate::rat::ValBound;

/// Elements of a valuation ring (given inside its fraction field) with
/// enough structure for Smith reduction: exact arithmetic where possible,
/// explicit precision bookkeeping where not.
pub trait ValuedRing: Clone + PartialEq + fmt::Debug + fmt::Display + Sized {
    /// Known to be zero exactly (not merely to working precision).
    fn is_exact_zero(&self) -> bool;

    /// All stored terms vanish but the precision cutoff is finite.
    fn is_indeterminate(&self) -> bool;

    /// Exact valuation. `Inf` for an exact zero, `PrecisionExhausted` for an
    /// indeterminate element.
    fn valuation(&self) -> Result<ValBound>;

    /// Always-available lower bound: the valuation when known, the cutoff
    /// for indeterminate elements, `Inf` for exact zeros.
    fn val_lb(&self) -> ValBound;

    /// Additive and multiplicative units in the same context (field, prime,
    /// cutoff conventions) as `self`.
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;

    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Result<Self>;

    /// Inverse in the fraction field. Exact inputs with more than one term
    /// fall back to a deep default cutoff (their inverses have infinite
    /// support).
    fn invert(&self) -> Result<Self>;

    /// Canonical representative of the image in the residue field; requires
    /// `v ≥ 0` and enough precision to read the constant term.
    fn residue_rep(&self) -> Result<Self>;

    /// True when arithmetic involving both operands is well defined
    /// (same coefficient field / prime).
    fn same_context(&self, other: &Self) -> bool;
}

/// Relative depth used when an exact element must be inverted through a
/// truncated geometric series.
pub(crate) const DEFAULT_REL_PREC: i64 = 48;
