//! Companion matrices of the k-step recurrences and their complete spectra.
//!
//! The order-`m` matrix has ones across its first row and on the
//! subdiagonal. Its characteristic polynomial is
//! `x^m - x^(m-1) - ... - x - 1`, so the eigenproblem is solved as a
//! polynomial root-finding problem: Durand-Kerner simultaneous iteration for
//! all roots at once, then Newton polishing (double-double for high orders).

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::{Dd, DdComplex};
use crate::{paper_k, Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 20;

/// Imaginary parts below this (relative to the modulus) after simultaneous
/// iteration mark a root as real; it is then polished on the real line.
const REAL_SPLIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectraConfig {
    pub max_order: usize,
    /// Required bound on `|p(root)|` for every root.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    /// Simultaneous iteration stops once every root moves less than this.
    pub step_tolerance: f64,
    pub polish_steps: usize,
    /// Orders above this are polished in double-double arithmetic. `None`
    /// keeps every order in plain `f64`.
    pub extended_polish_above: Option<usize>,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
            residual_tolerance: 1e-12,
            max_iterations: 500,
            step_tolerance: 1e-14,
            polish_steps: 3,
            // An f64 root already leaves |p| > 1e-12 from order 14 on.
            extended_polish_above: Some(12),
        }
    }
}

/// The 0/1 companion matrix of the order-`m` recurrence, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompanionMatrix {
    order: usize,
    entries: Vec<u8>,
}

impl CompanionMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Zero-based `(row, col)` access.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.order + col]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries
            .chunks(self.order)
            .map(<[u8]>::to_vec)
            .collect()
    }

    /// Applies the matrix to a state vector `(L[n-1], ..., L[n-m])`,
    /// producing `(L[n], ..., L[n-m+1])`.
    pub fn apply(&self, state: &[u128]) -> Vec<u128> {
        assert_eq!(state.len(), self.order);
        self.entries
            .chunks(self.order)
            .map(|row| {
                row.iter()
                    .zip(state)
                    .filter(|(&a, _)| a == 1)
                    .map(|(_, &x)| x)
                    .sum()
            })
            .collect()
    }
}

fn check_order(order: usize, max_order: usize) -> Result<()> {
    if !(2..=max_order).contains(&order) {
        return Err(Error::validation(
            "order",
            format!("must lie in 2..={max_order}, got {order}"),
        ));
    }
    Ok(())
}

impl SpectraConfig {
    pub fn companion(&self, order: usize) -> Result<CompanionMatrix> {
        check_order(order, self.max_order)?;
        let mut entries = vec![0u8; order * order];
        entries[..order].fill(1);
        for row in 1..order {
            entries[row * order + row - 1] = 1;
        }
        Ok(CompanionMatrix { order, entries })
    }

    pub fn eigenvalues(&self, order: usize) -> Result<EigenvalueSet> {
        check_order(order, self.max_order)?;
        if !(self.residual_tolerance > 0.0) {
            return Err(Error::validation(
                "tolerance",
                format!("must be positive, got {}", self.residual_tolerance),
            ));
        }
        solve(&characteristic_polynomial(order), self)
    }

    pub fn phi_points(&self, orders: RangeInclusive<usize>) -> Result<Vec<PhiPoint>> {
        if orders.is_empty() {
            return Err(Error::validation("orders", "range is empty"));
        }
        check_order(*orders.start(), self.max_order)?;
        check_order(*orders.end(), self.max_order)?;
        let per_order: Vec<Vec<PhiPoint>> = orders
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|m| self.eigenvalues(m).map(|set| set.phi_points()))
            .collect::<Result<_>>()?;
        Ok(per_order.into_iter().flatten().collect())
    }
}

pub fn build_companion(order: usize) -> Result<CompanionMatrix> {
    SpectraConfig::default().companion(order)
}

/// `x^m - x^(m-1) - ... - 1`, coefficients from the leading term down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacteristicPolynomial {
    pub order: usize,
    pub coefficients: Vec<i64>,
}

pub fn characteristic_polynomial(order: usize) -> CharacteristicPolynomial {
    assert!(order >= 2, "order must be at least 2");
    let mut coefficients = vec![-1; order + 1];
    coefficients[0] = 1;
    CharacteristicPolynomial {
        order,
        coefficients,
    }
}

impl CharacteristicPolynomial {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c as f64)
    }

    pub fn eval_i128(&self, x: i128) -> i128 {
        self.coefficients
            .iter()
            .fold(0, |acc, &c| acc * x + c as i128)
    }

    /// Value and derivative at `x` by Horner's scheme.
    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coefficients {
            dp = dp * x + p;
            p = p * x + c as f64;
        }
        (p, dp)
    }

    pub fn eval_dd(&self, x: DdComplex) -> DdComplex {
        self.eval_with_derivative_dd(x).0
    }

    fn eval_with_derivative_dd(&self, x: DdComplex) -> (DdComplex, DdComplex) {
        let mut p = DdComplex::ZERO;
        let mut dp = DdComplex::ZERO;
        for &c in &self.coefficients {
            dp = dp * x + p;
            p = p * x + DdComplex::from_complex(Complex64::new(c as f64, 0.0));
        }
        (p, dp)
    }

    fn eval_real_dd(&self, x: Dd) -> (Dd, Dd) {
        let mut p = Dd::ZERO;
        let mut dp = Dd::ZERO;
        for &c in &self.coefficients {
            dp = dp * x + p;
            p = p * x + Dd::from_f64(c as f64);
        }
        (p, dp)
    }
}

/// All roots of one characteristic polynomial.
///
/// `roots` are the nearest `f64` values; `tails` hold the remaining
/// double-double correction (zero when polished in plain `f64`), and
/// `residuals[i] = |p(roots[i] + tails[i])|` evaluated in double-double.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenvalueSet {
    pub order: usize,
    pub roots: Vec<Complex64>,
    pub tails: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub iterations_used: usize,
}

impl EigenvalueSet {
    pub fn root_dd(&self, i: usize) -> DdComplex {
        DdComplex::from_parts(self.roots[i], self.tails[i])
    }

    /// The real root outside the unit circle (roots are sorted by modulus).
    pub fn dominant(&self) -> Complex64 {
        self.roots[0]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        let s = (0..self.roots.len()).fold(DdComplex::ZERO, |acc, i| acc + self.root_dd(i));
        s.to_complex()
    }

    pub fn product(&self) -> Complex64 {
        let p = (0..self.roots.len()).fold(DdComplex::ONE, |acc, i| acc * self.root_dd(i));
        p.to_complex()
    }

    /// Inverses `1/root`, one point per root, in root order.
    pub fn phi_points(&self) -> Vec<PhiPoint> {
        (0..self.roots.len())
            .map(|i| PhiPoint {
                paper_k: paper_k(self.order),
                order: self.order,
                n: i + 1,
                value: self.root_dd(i).inv().to_complex(),
                source_root: self.roots[i],
                residual: self.residuals[i],
            })
            .collect()
    }
}

pub fn eigenvalues(order: usize, tolerance: f64) -> Result<EigenvalueSet> {
    SpectraConfig {
        residual_tolerance: tolerance,
        ..SpectraConfig::default()
    }
    .eigenvalues(order)
}

/// One inverse eigenvalue `1/lambda_(k,n)` with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiPoint {
    pub paper_k: usize,
    pub order: usize,
    /// 1-based index of the source root in canonical order.
    pub n: usize,
    pub value: Complex64,
    pub source_root: Complex64,
    pub residual: f64,
}

impl PhiPoint {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

pub fn phi_points(orders: RangeInclusive<usize>) -> Result<Vec<PhiPoint>> {
    SpectraConfig::default().phi_points(orders)
}

/// Descending modulus, then ascending principal argument.
fn canonical_order(a: &DdComplex, b: &DdComplex) -> Ordering {
    let (za, zb) = (a.to_complex(), b.to_complex());
    b.norm_sqr()
        .to_f64()
        .total_cmp(&a.norm_sqr().to_f64())
        .then_with(|| za.arg().total_cmp(&zb.arg()))
}

fn durand_kerner(
    poly: &CharacteristicPolynomial,
    config: &SpectraConfig,
) -> Result<(Vec<Complex64>, usize)> {
    let m = poly.order;
    // Cauchy bound: 1 + max |a_i| = 2 for these monic polynomials.
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..m).map(|j| seed.powu(j as u32) * 2.0).collect();

    for iteration in 1..=config.max_iterations {
        let mut max_step = 0.0f64;
        for i in 0..m {
            let denom = (0..m)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            let step = poly.eval(z[i]) / denom;
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm());
            } else {
                max_step = f64::INFINITY;
            }
        }
        if max_step < config.step_tolerance {
            return Ok((z, iteration));
        }
    }

    let residuals: Vec<f64> = z.iter().map(|&r| poly.eval(r).norm()).collect();
    Err(Error::NonConvergence {
        order: m,
        iterations: config.max_iterations,
        worst_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
    })
}

fn polish_real(poly: &CharacteristicPolynomial, x: f64, steps: usize, extended: bool) -> Dd {
    let mut x = Dd::from_f64(x);
    for _ in 0..steps {
        if extended {
            let (p, dp) = poly.eval_real_dd(x);
            if dp.hi == 0.0 {
                break;
            }
            x = x - p / dp;
        } else {
            let (p, dp) = poly.eval_with_derivative(Complex64::new(x.hi, 0.0));
            if dp.re == 0.0 {
                break;
            }
            x = Dd::from_f64(x.hi - p.re / dp.re);
        }
    }
    x
}

fn polish_complex(
    poly: &CharacteristicPolynomial,
    z: Complex64,
    steps: usize,
    extended: bool,
) -> DdComplex {
    if extended {
        let mut z = DdComplex::from_complex(z);
        for _ in 0..steps {
            let (p, dp) = poly.eval_with_derivative_dd(z);
            if dp.norm_sqr().hi == 0.0 {
                break;
            }
            z = z - p / dp;
        }
        z
    } else {
        let mut z = z;
        for _ in 0..steps {
            let (p, dp) = poly.eval_with_derivative(z);
            if dp.norm_sqr() == 0.0 {
                break;
            }
            z -= p / dp;
        }
        DdComplex::from_complex(z)
    }
}

fn solve(poly: &CharacteristicPolynomial, config: &SpectraConfig) -> Result<EigenvalueSet> {
    let m = poly.order;
    let extended = config.extended_polish_above.is_some_and(|t| m > t);
    let (raw, iterations_used) = durand_kerner(poly, config)?;

    // Real coefficients: real roots are polished on the real axis so they
    // carry an exactly zero imaginary part, and complex roots are emitted as
    // exact conjugate pairs.
    let is_real = |z: &Complex64| z.im.abs() <= REAL_SPLIT * z.norm().max(1.0);
    let upper: Vec<Complex64> = raw
        .iter()
        .copied()
        .filter(|z| !is_real(z) && z.im > 0.0)
        .collect();
    let lower = raw.iter().filter(|z| !is_real(z) && z.im < 0.0).count();

    let mut roots: Vec<DdComplex> = Vec::with_capacity(m);
    for z in raw.iter().filter(|z| is_real(z)) {
        let x = polish_real(poly, z.re, config.polish_steps, extended);
        roots.push(DdComplex::new(x, Dd::ZERO));
    }
    if upper.len() == lower {
        for &z in &upper {
            let w = polish_complex(poly, z, config.polish_steps, extended);
            roots.push(w);
            roots.push(w.conj());
        }
    } else {
        for z in raw.iter().filter(|z| !is_real(z)) {
            roots.push(polish_complex(poly, *z, config.polish_steps, extended));
        }
    }
    roots.sort_by(canonical_order);

    let residuals: Vec<f64> = roots.iter().map(|&r| poly.eval_dd(r).norm()).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst < config.residual_tolerance) {
        return Err(Error::NonConvergence {
            order: m,
            iterations: iterations_used,
            worst_residual: worst,
            residuals,
        });
    }

    Ok(EigenvalueSet {
        order: m,
        roots: roots.iter().map(|r| r.to_complex()).collect(),
        tails: roots.iter().map(|r| r.tail()).collect(),
        residuals,
        iterations_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_patterns() {
        assert_eq!(
            build_companion(2).unwrap().rows(),
            vec![vec![1, 1], vec![1, 0]]
        );
        assert_eq!(
            build_companion(3).unwrap().rows(),
            vec![vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]
        );
        assert!(build_companion(1).is_err());
        assert!(build_companion(21).is_err());
    }

    #[test]
    fn companion_advances_the_recurrence() {
        let a = build_companion(3).unwrap();
        // (L2, L1, L0) = (1, 1, 1) -> (3, 1, 1) -> (5, 3, 1)
        let s = a.apply(&[1, 1, 1]);
        assert_eq!(s, vec![3, 1, 1]);
        assert_eq!(a.apply(&s), vec![5, 3, 1]);
    }

    #[test]
    fn polynomial_coefficients() {
        assert_eq!(characteristic_polynomial(2).coefficients, vec![1, -1, -1]);
        assert_eq!(
            characteristic_polynomial(3).coefficients,
            vec![1, -1, -1, -1]
        );
        for m in 2..=20 {
            let p = characteristic_polynomial(m);
            assert_eq!(p.eval_i128(2), 1, "p(2) for order {m}");
            assert_eq!(p.eval_i128(1), 1 - m as i128);
            assert_eq!(*p.coefficients.last().unwrap(), -1);
        }
    }

    #[test]
    fn golden_pair() {
        let set = eigenvalues(2, 1e-12).unwrap();
        let s5 = 5f64.sqrt();
        assert!((set.roots[0].re - (1.0 + s5) / 2.0).abs() < 1e-12);
        assert!((set.roots[1].re - (1.0 - s5) / 2.0).abs() < 1e-12);
        assert_eq!(set.roots[0].im, 0.0);
        assert_eq!(set.roots[1].im, 0.0);
    }

    #[test]
    fn tribonacci_constant() {
        let set = eigenvalues(3, 1e-12).unwrap();
        assert!((set.dominant().re - 1.839_286_755_214_161).abs() < 1e-12);
        assert_eq!(set.roots[1], set.roots[2].conj());
    }

    #[test]
    fn plain_f64_polish_cannot_meet_the_target_at_order_20() {
        let config = SpectraConfig {
            extended_polish_above: None,
            ..SpectraConfig::default()
        };
        assert!(matches!(
            config.eigenvalues(20),
            Err(Error::NonConvergence { order: 20, .. })
        ));
        assert!(config.eigenvalues(8).is_ok());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let config = SpectraConfig {
            max_iterations: 2,
            ..SpectraConfig::default()
        };
        match config.eigenvalues(10) {
            Err(Error::NonConvergence { residuals, .. }) => assert_eq!(residuals.len(), 10),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn points_per_order() {
        let pts = phi_points(2..=2).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].value.re - 0.618_033_988_749_895).abs() < 1e-15);
        assert!((pts[1].value.re + 1.618_033_988_749_895).abs() < 1e-15);
        assert_eq!((pts[0].paper_k, pts[0].n), (1, 1));
        assert_eq!(phi_points(2..=20).unwrap().len(), 209);
        assert!(phi_points(1..=3).is_err());
    }
}
