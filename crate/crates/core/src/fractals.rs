//! Escape-time kernels for the quadratic family `z -> z^2 + c`.
//!
//! Counting convention: the map is applied first and the modulus checked
//! afterwards, so the count is the smallest `n >= 1` with `|z_n| > bailout`.
//! An orbit that never exceeds the bailout within the budget reports
//! `max_iterations + 1` and is declared a member. Membership is therefore
//! always "member at budget N": points close to the boundary can be false
//! members at any finite budget.
//!
//! The Julia test here is a test for the *filled* Julia set (points whose
//! orbit stays bounded). The Julia set proper is its boundary.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::spectra::PhiPoint;
use crate::{Error, Result};

pub const DEFAULT_MAX_ITERATIONS: u32 = 1000;
pub const DEFAULT_BAILOUT: f64 = 2.0;
/// Largest grid [`render_grid`] will allocate.
pub const DEFAULT_PIXEL_BUDGET: usize = 1 << 26;

/// Tolerance on the imaginary part for the `c = -2` segment oracle.
pub const SEGMENT_ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscapeSettings {
    pub max_iterations: u32,
    pub bailout: f64,
    /// Stop early once the orbit revisits a stored point bit-for-bit. Such an
    /// orbit is periodic in floating point and can never escape, so the
    /// verdict and count are unchanged.
    pub cycle_detection: bool,
}

impl Default for EscapeSettings {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            bailout: DEFAULT_BAILOUT,
            cycle_detection: false,
        }
    }
}

impl EscapeSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::validation("max_iterations", "must be at least 1"));
        }
        if !(self.bailout >= 2.0 && self.bailout.is_finite()) {
            return Err(Error::validation(
                "bailout",
                format!(
                    "must be a finite radius of at least 2, got {}",
                    self.bailout
                ),
            ));
        }
        Ok(())
    }

    pub fn with_max_iterations(self, max_iterations: u32) -> Self {
        Self {
            max_iterations,
            ..self
        }
    }

    pub fn with_bailout(self, bailout: f64) -> Self {
        Self { bailout, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticParams {
    pub c: Complex64,
    pub z0: Complex64,
    pub settings: EscapeSettings,
}

impl QuadraticParams {
    pub fn new(c: Complex64, z0: Complex64, settings: EscapeSettings) -> Result<Self> {
        settings.validate()?;
        if !c.is_finite() {
            return Err(Error::validation("c", "must be finite"));
        }
        if !z0.is_finite() {
            return Err(Error::validation("z0", "must be finite"));
        }
        Ok(Self { c, z0, settings })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscapeResult {
    pub iterations: u32,
    pub escaped: bool,
    /// `|z|` at the last iterate computed.
    pub final_modulus: f64,
}

/// Iterates `z -> z^2 + c` from `z0`. `params` are assumed validated.
pub fn escape_iterate(params: &QuadraticParams) -> EscapeResult {
    let QuadraticParams { c, z0, settings } = *params;
    let mut z = z0;
    // Brent-style cycle check state.
    let mut saved = z;
    let mut power = 1u32;
    let mut lap = 0u32;
    for n in 1..=settings.max_iterations {
        z = z * z + c;
        let modulus = z.norm();
        if modulus > settings.bailout {
            return EscapeResult {
                iterations: n,
                escaped: true,
                final_modulus: modulus,
            };
        }
        if settings.cycle_detection {
            if z == saved {
                break;
            }
            lap += 1;
            if lap == power {
                saved = z;
                power = power.saturating_mul(2);
                lap = 0;
            }
        }
    }
    EscapeResult {
        iterations: settings.max_iterations + 1,
        escaped: false,
        final_modulus: z.norm(),
    }
}

fn iterate(c: Complex64, z0: Complex64, settings: EscapeSettings) -> EscapeResult {
    escape_iterate(&QuadraticParams { c, z0, settings })
}

/// Whether the orbit of 0 under `z^2 + c` stays within radius 2 for
/// `max_iterations` steps.
pub fn mandelbrot_member(c: Complex64, max_iterations: u32) -> (bool, EscapeResult) {
    let settings = EscapeSettings::default().with_max_iterations(max_iterations);
    let result = iterate(c, Complex64::new(0.0, 0.0), settings);
    (!result.escaped, result)
}

pub fn julia_iteration_count(c: Complex64, z0: Complex64, max_iterations: u32) -> u32 {
    let settings = EscapeSettings::default().with_max_iterations(max_iterations);
    iterate(c, z0, settings).iterations
}

/// A member set of the quadratic family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SetSpec {
    /// Parameters `c` whose critical orbit stays bounded.
    Mandelbrot,
    /// The filled Julia set of `z^2 + c`.
    Julia(Complex64),
}

impl SetSpec {
    /// Escape result for a point of the plane under this set's dynamics.
    pub fn escape(&self, point: Complex64, settings: EscapeSettings) -> EscapeResult {
        match *self {
            SetSpec::Mandelbrot => iterate(point, Complex64::new(0.0, 0.0), settings),
            SetSpec::Julia(c) => iterate(c, point, settings),
        }
    }

    /// Closed-form membership where one is known: the real slice of the
    /// Mandelbrot set is `[-2, 1/4]`, and the filled Julia set of
    /// `z^2 - 2` is the segment `[-2, 2]`.
    pub fn oracle(&self, point: Complex64) -> Option<bool> {
        match *self {
            SetSpec::Mandelbrot if point.im == 0.0 => Some((-2.0..=0.25).contains(&point.re)),
            SetSpec::Julia(c) if c == Complex64::new(-2.0, 0.0) => {
                Some(point.im.abs() <= SEGMENT_ORACLE_TOLERANCE && point.re.abs() <= 2.0)
            }
            _ => None,
        }
    }
}

fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{},{}", z.re, z.im)
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Mandelbrot => f.write_str("mandelbrot"),
            SetSpec::Julia(c) => write!(f, "julia:{}", format_complex(*c)),
        }
    }
}

impl Serialize for SetSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses `RE` or `RE,IM` into a complex number.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let mut parts = text.split(',');
    let re = parts.next()?.trim().parse().ok()?;
    let im = match parts.next() {
        Some(p) => p.trim().parse().ok()?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return None;
    }
    let z = Complex64::new(re, im);
    z.is_finite().then_some(z)
}

impl FromStr for SetSpec {
    type Err = Error;

    /// `mandelbrot`, `julia:-1` or `julia:-0.8,0.156`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("mandelbrot") {
            return Ok(SetSpec::Mandelbrot);
        }
        if let Some(c) = s.strip_prefix("julia:") {
            return parse_complex(c)
                .map(SetSpec::Julia)
                .ok_or_else(|| Error::validation("set", format!("bad julia parameter {c:?}")));
        }
        Err(Error::validation(
            "set",
            format!("expected `mandelbrot` or `julia:RE[,IM]`, got {s:?}"),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipRecord {
    pub point: PhiPoint,
    pub set: SetSpec,
    pub result: EscapeResult,
    pub member: bool,
    pub oracle: Option<bool>,
    /// The oracle and the escape-time verdict disagree.
    pub boundary_suspect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetSummary {
    pub set: SetSpec,
    pub members: usize,
    pub total: usize,
    pub max_iterations: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub settings: EscapeSettings,
    /// Set-major: all points for the first set, then the next.
    pub records: Vec<MembershipRecord>,
    pub summaries: Vec<SetSummary>,
}

impl MembershipReport {
    pub fn records_for<'a>(
        &'a self,
        set: &'a SetSpec,
    ) -> impl Iterator<Item = &'a MembershipRecord> {
        self.records.iter().filter(move |r| r.set == *set)
    }

    /// Iteration counts for one set, in point order.
    pub fn counts(&self, set: &SetSpec) -> Vec<u32> {
        self.records_for(set).map(|r| r.result.iterations).collect()
    }

    pub fn summary(&self, set: &SetSpec) -> Option<&SetSummary> {
        self.summaries.iter().find(|s| s.set == *set)
    }

    pub fn boundary_suspects(&self) -> usize {
        self.records.iter().filter(|r| r.boundary_suspect).count()
    }
}

pub fn classify_points(
    points: &[PhiPoint],
    sets: &[SetSpec],
    settings: EscapeSettings,
) -> Result<MembershipReport> {
    settings.validate()?;
    if points.is_empty() {
        return Err(Error::validation("points", "no points to classify"));
    }
    if sets.is_empty() {
        return Err(Error::validation("sets", "no sets given"));
    }
    let pairs: Vec<(SetSpec, &PhiPoint)> = sets
        .iter()
        .flat_map(|s| points.iter().map(move |p| (*s, p)))
        .collect();
    let records: Vec<MembershipRecord> = pairs
        .into_par_iter()
        .map(|(set, point)| {
            let result = set.escape(point.value, settings);
            let member = !result.escaped;
            let oracle = set.oracle(point.value);
            MembershipRecord {
                point: point.clone(),
                set,
                result,
                member,
                oracle,
                boundary_suspect: oracle.is_some_and(|o| o != member),
            }
        })
        .collect();
    let summaries = sets
        .iter()
        .map(|set| SetSummary {
            set: *set,
            members: records.iter().filter(|r| r.set == *set && r.member).count(),
            total: points.len(),
            max_iterations: settings.max_iterations,
        })
        .collect();
    Ok(MembershipReport {
        settings,
        records,
        summaries,
    })
}

/// A rectangular window of the plane sampled at pixel centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    pub columns: usize,
    pub rows: usize,
    pub settings: EscapeSettings,
    pub mode: GridMode,
}

pub type GridMode = SetSpec;

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        if !self.center.is_finite() {
            return Err(Error::validation("center", "must be finite"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::validation("width", "must be positive"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::validation("height", "must be positive"));
        }
        if self.columns == 0 {
            return Err(Error::validation("columns", "must be positive"));
        }
        if self.rows == 0 {
            return Err(Error::validation("rows", "must be positive"));
        }
        Ok(())
    }

    /// Centre of pixel `(column, row)`; row 0 is the top edge.
    pub fn pixel_to_complex(&self, column: usize, row: usize) -> Complex64 {
        let fx = (column as f64 + 0.5) / self.columns as f64 - 0.5;
        let fy = 0.5 - (row as f64 + 0.5) / self.rows as f64;
        Complex64::new(
            self.center.re + self.width * fx,
            self.center.im + self.height * fy,
        )
    }

    /// Continuous pixel coordinates `(x, y)` of a point, matching
    /// [`Self::pixel_to_complex`] (pixel centres sit at half-integers).
    pub fn complex_to_pixel(&self, z: Complex64) -> (f64, f64) {
        let x = ((z.re - self.center.re) / self.width + 0.5) * self.columns as f64;
        let y = (0.5 - (z.im - self.center.im) / self.height) * self.rows as f64;
        (x, y)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z.re - self.center.re).abs() <= self.width / 2.0
            && (z.im - self.center.im).abs() <= self.height / 2.0
    }
}

/// Row-major iteration counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationGrid {
    pub columns: usize,
    pub rows: usize,
    pub counts: Vec<u32>,
}

impl IterationGrid {
    pub fn get(&self, column: usize, row: usize) -> u32 {
        self.counts[row * self.columns + column]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.counts[row * self.columns..(row + 1) * self.columns]
    }
}

pub fn render_grid(spec: &GridSpec) -> Result<IterationGrid> {
    render_grid_with_budget(spec, DEFAULT_PIXEL_BUDGET)
}

pub fn render_grid_with_budget(spec: &GridSpec, pixel_budget: usize) -> Result<IterationGrid> {
    spec.validate()?;
    let requested = spec.columns.saturating_mul(spec.rows);
    if requested > pixel_budget {
        return Err(Error::GridTooLarge {
            requested,
            budget: pixel_budget,
        });
    }
    let mut counts = vec![0u32; requested];
    counts
        .par_chunks_mut(spec.columns)
        .enumerate()
        .for_each(|(row, line)| {
            for (column, cell) in line.iter_mut().enumerate() {
                let z = spec.pixel_to_complex(column, row);
                *cell = spec.mode.escape(z, spec.settings).iterations;
            }
        });
    Ok(IterationGrid {
        columns: spec.columns,
        rows: spec.rows,
        counts,
    })
}
