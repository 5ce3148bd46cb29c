//! k-step Fibonacci/Lucas sequences over arbitrary-precision integers and the
//! inverse ratios `phi(m) = L[N-2] / L[N-1]` they converge to.
//!
//! The ratio is taken between the last two computed terms, not as a formal
//! limit. Its truncation error is of order `(|r2| / r1)^N`, where `r1` is the
//! dominant root of the characteristic polynomial and `r2` the next largest;
//! at the default 100 terms this is far below any displayed digit for every
//! order up to at least 40.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::decimal::FixedDecimal;
use crate::{paper_k, Error, Result};

pub const DEFAULT_TERM_COUNT: usize = 100;
pub const DEFAULT_DIGITS: u32 = 30;
/// Largest decimal precision accepted by [`phi`].
pub const MAX_DIGITS: u32 = 10_000;
/// Digits shown by the published tables.
pub const DISPLAY_DIGITS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSpec {
    order: usize,
    initial_values: Vec<BigUint>,
    term_count: usize,
}

impl RecurrenceSpec {
    pub fn new(order: usize, initial_values: Vec<BigUint>, term_count: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::validation(
                "order",
                format!("must be at least 2, got {order}"),
            ));
        }
        if initial_values.len() != order {
            return Err(Error::validation(
                "initial_values",
                format!(
                    "expected {order} values for order {order}, got {}",
                    initial_values.len()
                ),
            ));
        }
        if initial_values.iter().all(Zero::is_zero) {
            return Err(Error::validation("initial_values", "must not all be zero"));
        }
        if term_count < order + 2 {
            return Err(Error::validation(
                "term_count",
                format!(
                    "must be at least order + 2 = {}, got {term_count}",
                    order + 2
                ),
            ));
        }
        Ok(Self {
            order,
            initial_values,
            term_count,
        })
    }

    /// All-ones initial values, the usual k-step Fibonacci convention.
    pub fn ones(order: usize, term_count: usize) -> Result<Self> {
        Self::new(order, vec![BigUint::one(); order], term_count)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn initial_values(&self) -> &[BigUint] {
        &self.initial_values
    }

    pub fn term_count(&self) -> usize {
        self.term_count
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigSequence {
    pub spec: RecurrenceSpec,
    pub terms: Vec<BigUint>,
}

impl BigSequence {
    /// `terms[N-2] / terms[N-1]` rounded to `digits` decimals.
    pub fn tail_ratio(&self, digits: u32) -> FixedDecimal {
        let n = self.terms.len();
        FixedDecimal::from_ratio(&self.terms[n - 2], &self.terms[n - 1], digits)
    }
}

/// Generates `spec.term_count` terms of the order-`m` recurrence.
///
/// A running window sum keeps generation linear in the number of terms:
/// `L[n+1] = 2 L[n] - L[n-m]`.
pub fn generate_sequence(spec: &RecurrenceSpec) -> BigSequence {
    let m = spec.order;
    let mut terms = Vec::with_capacity(spec.term_count);
    terms.extend(spec.initial_values.iter().cloned());
    let mut window: BigUint = terms.iter().sum();
    while terms.len() < spec.term_count {
        let next = window.clone();
        window += &next;
        window -= &terms[terms.len() - m];
        terms.push(next);
    }
    BigSequence {
        spec: spec.clone(),
        terms,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiValue {
    pub order: usize,
    pub value: FixedDecimal,
    pub digits: u32,
    pub terms_used: usize,
}

impl PhiValue {
    pub fn paper_k(&self) -> usize {
        paper_k(self.order)
    }

    /// Six significant digits, trailing zeros trimmed (`0.51879`, `0.5`).
    pub fn display(&self) -> String {
        self.value.display_significant(DISPLAY_DIGITS)
    }
}

fn check_digits(digits: u32) -> Result<()> {
    if digits < DISPLAY_DIGITS {
        return Err(Error::validation(
            "digits",
            format!("must be at least {DISPLAY_DIGITS}, got {digits}"),
        ));
    }
    if digits > MAX_DIGITS {
        return Err(Error::validation(
            "digits",
            format!("exceeds the maximum of {MAX_DIGITS}, got {digits}"),
        ));
    }
    Ok(())
}

/// Inverse ratio of the all-ones order-`order` sequence after `term_count`
/// terms.
pub fn phi(order: usize, term_count: usize, digits: u32) -> Result<PhiValue> {
    check_digits(digits)?;
    let spec = RecurrenceSpec::ones(order, term_count)?;
    let seq = generate_sequence(&spec);
    Ok(PhiValue {
        order,
        value: seq.tail_ratio(digits),
        digits,
        terms_used: term_count,
    })
}

/// [`phi`] for every order `2..=max_order`, in ascending order.
pub fn phi_scan(max_order: usize, term_count: usize, digits: u32) -> Result<Vec<PhiValue>> {
    if max_order < 2 {
        return Err(Error::validation(
            "max_order",
            format!("must be at least 2, got {max_order}"),
        ));
    }
    (2..=max_order)
        .into_par_iter()
        .map(|m| phi(m, term_count, digits))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Difference {
    /// Order of the minuend; the entry is `phi(order) - phi(order + 1)`.
    pub order: usize,
    pub value: FixedDecimal,
}

impl Difference {
    pub fn paper_k(&self) -> usize {
        paper_k(self.order)
    }

    pub fn display(&self) -> String {
        self.value.display_significant(DISPLAY_DIGITS)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DifferenceSequence {
    pub entries: Vec<Difference>,
}

impl DifferenceSequence {
    /// True when every entry is positive and each is smaller than the last.
    pub fn is_positive_and_decreasing(&self) -> bool {
        self.entries.iter().all(|d| d.value.is_positive())
            && self.entries.windows(2).all(|w| w[1].value < w[0].value)
    }

    /// `entry[i+1] / entry[i]` as floats.
    pub fn consecutive_ratios(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].value.to_f64() / w[0].value.to_f64())
            .collect()
    }
}

/// Successive differences `phi(m) - phi(m + 1)` of a scan.
///
/// The inputs must cover consecutive orders in ascending order.
pub fn difference_sequence(phis: &[PhiValue]) -> Result<DifferenceSequence> {
    if phis.len() < 2 {
        return Err(Error::validation(
            "phis",
            format!("need at least 2 values, got {}", phis.len()),
        ));
    }
    let mut entries = Vec::with_capacity(phis.len() - 1);
    for pair in phis.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.order <= a.order {
            return Err(Error::validation(
                "phis",
                format!(
                    "orders must be strictly ascending ({} then {})",
                    a.order, b.order
                ),
            ));
        }
        if b.order != a.order + 1 {
            return Err(Error::validation(
                "phis",
                format!("orders must be consecutive ({} then {})", a.order, b.order),
            ));
        }
        entries.push(Difference {
            order: a.order,
            value: &a.value - &b.value,
        });
    }
    Ok(DifferenceSequence { entries })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub tolerance: f64,
    /// Smallest order with `|phi - 1/2| < tolerance`, if any.
    pub converged_order: Option<usize>,
    pub phis: Vec<PhiValue>,
    pub differences: DifferenceSequence,
}

impl ConvergenceReport {
    pub fn converged_paper_k(&self) -> Option<usize> {
        self.converged_order.map(paper_k)
    }
}

/// Scans orders `2..=max_order` for the first `phi` within `tolerance` of 1/2.
///
/// Precision is raised above `digits` when needed so that the comparison is
/// never decided by rounding: a `phi` rounded to fewer decimals than the
/// tolerance resolves would read as exactly 0.5.
pub fn convergence_scan(
    tolerance: f64,
    max_order: usize,
    term_count: usize,
    digits: u32,
) -> Result<ConvergenceReport> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::validation(
            "tolerance",
            format!("must be positive and finite, got {tolerance}"),
        ));
    }
    let needed = (-tolerance.log10()).ceil().max(0.0) as u32 + 5;
    let digits = digits.max(needed).min(MAX_DIGITS);
    let phis = phi_scan(max_order, term_count, digits)?;
    let half = FixedDecimal::new(5, 1);
    let converged_order = phis
        .iter()
        .find(|p| (&p.value - &half).abs().to_f64() < tolerance)
        .map(|p| p.order);
    let differences = difference_sequence(&phis)?;
    Ok(ConvergenceReport {
        tolerance,
        converged_order,
        phis,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(values: &[u64]) -> Vec<BigUint> {
        values.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn fibonacci_terms() {
        let seq = generate_sequence(&RecurrenceSpec::ones(2, 10).unwrap());
        assert_eq!(seq.terms, big(&[1, 1, 2, 3, 5, 8, 13, 21, 34, 55]));
    }

    #[test]
    fn tribonacci_terms() {
        let seq = generate_sequence(&RecurrenceSpec::ones(3, 8).unwrap());
        assert_eq!(seq.terms, big(&[1, 1, 1, 3, 5, 9, 17, 31]));
    }

    #[test]
    fn lucas_terms() {
        let spec = RecurrenceSpec::new(2, big(&[1, 3]), 6).unwrap();
        assert_eq!(generate_sequence(&spec).terms, big(&[1, 3, 4, 7, 11, 18]));
    }

    #[test]
    fn rejects_bad_specs() {
        let field = |r: Result<RecurrenceSpec>| match r {
            Err(Error::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        };
        assert_eq!(field(RecurrenceSpec::ones(1, 10)), "order");
        assert_eq!(
            field(RecurrenceSpec::new(3, big(&[1, 1]), 10)),
            "initial_values"
        );
        assert_eq!(
            field(RecurrenceSpec::new(2, big(&[0, 0]), 10)),
            "initial_values"
        );
        assert_eq!(field(RecurrenceSpec::ones(4, 5)), "term_count");
    }

    #[test]
    fn high_order_terms_exceed_u64() {
        let seq = generate_sequence(&RecurrenceSpec::ones(20, 100).unwrap());
        assert!(seq.terms[99].bits() > 64);
    }

    #[test]
    fn table_values() {
        assert_eq!(phi(2, 100, 6).unwrap().display(), "0.618034");
        assert_eq!(phi(3, 100, 6).unwrap().display(), "0.543689");
        assert_eq!(phi(10, 100, 6).unwrap().display(), "0.500245");
    }

    #[test]
    fn phi_rejects_excess_precision() {
        assert!(matches!(
            phi(2, 100, MAX_DIGITS + 1),
            Err(Error::Validation {
                field: "digits",
                ..
            })
        ));
        assert!(phi(2, 100, 5).is_err());
    }

    #[test]
    fn scan_covers_every_order() {
        let scan = phi_scan(5, 100, 6).unwrap();
        let shown: Vec<_> = scan.iter().map(PhiValue::display).collect();
        assert_eq!(shown, ["0.618034", "0.543689", "0.51879", "0.50866"]);
        assert_eq!(phi_scan(2, 100, 6).unwrap().len(), 1);
        assert!(phi_scan(1, 100, 6).is_err());
    }

    #[test]
    fn differences_need_consecutive_orders() {
        let scan = phi_scan(4, 100, 30).unwrap();
        let swapped = vec![scan[1].clone(), scan[0].clone()];
        assert!(difference_sequence(&swapped).is_err());
        let dup = vec![scan[0].clone(), scan[0].clone()];
        assert!(difference_sequence(&dup).is_err());
        let gap = vec![scan[0].clone(), scan[2].clone()];
        assert!(difference_sequence(&gap).is_err());
        assert!(difference_sequence(&scan[..1]).is_err());
    }

    #[test]
    fn difference_entries() {
        let diffs = difference_sequence(&phi_scan(7, 100, 30).unwrap()).unwrap();
        assert_eq!(diffs.entries[0].display(), "0.074345");
        assert_eq!(diffs.entries[4].display(), "0.0021212");
        assert_eq!(diffs.entries[4].paper_k(), 5);
    }

    #[test]
    fn convergence_examples() {
        let report = convergence_scan(5e-7, 31, 100, 6).unwrap();
        assert_eq!(report.converged_order, Some(19));
        assert_eq!(report.converged_paper_k(), Some(18));

        assert_eq!(
            convergence_scan(0.1, 31, 100, 6).unwrap().converged_order,
            Some(3)
        );
        assert_eq!(
            convergence_scan(1e-30, 30, 100, 6).unwrap().converged_order,
            None
        );
        assert!(convergence_scan(0.0, 30, 100, 6).is_err());
    }
}
