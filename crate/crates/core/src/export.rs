//! Table, point-cloud and image emitters.
//!
//! Floats are written with Rust's shortest round-trip formatting, so CSV and
//! JSON files re-read into bit-identical values and are byte-stable across
//! runs.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fractals::{GridSpec, IterationGrid, MembershipReport};
use crate::sequences::{BigSequence, DifferenceSequence, PhiValue};
use crate::spectra::{EigenvalueSet, PhiPoint};
use crate::{paper_k, Result};

/// Total point count quoted by the reference results; no contiguous range
/// of orders produces it, so emitted clouds report their own total next to
/// it.
pub const REFERENCE_POINT_COUNT: usize = 155;
/// Mandelbrot member count quoted alongside [`REFERENCE_POINT_COUNT`].
pub const REFERENCE_MANDELBROT_MEMBERS: usize = 54;

#[derive(Debug, Serialize)]
struct TermRow {
    index: usize,
    term: String,
}

pub fn write_sequence_csv<W: Write>(seq: &BigSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (index, term) in seq.terms.iter().enumerate() {
        w.serialize(TermRow {
            index,
            term: term.to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SequenceJson {
    order_m: usize,
    paper_k: usize,
    initial_values: Vec<String>,
    terms: Vec<String>,
}

pub fn write_sequence_json<W: Write>(seq: &BigSequence, mut out: W) -> Result<()> {
    let doc = SequenceJson {
        order_m: seq.spec.order(),
        paper_k: paper_k(seq.spec.order()),
        initial_values: seq
            .spec
            .initial_values()
            .iter()
            .map(ToString::to_string)
            .collect(),
        terms: seq.terms.iter().map(ToString::to_string).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct PhiRow {
    pub paper_k: usize,
    pub order_m: usize,
    pub phi: String,
    pub phi_display: String,
}

impl From<&PhiValue> for PhiRow {
    fn from(p: &PhiValue) -> Self {
        PhiRow {
            paper_k: p.paper_k(),
            order_m: p.order,
            phi: p.value.to_string(),
            phi_display: p.display(),
        }
    }
}

pub fn write_phis_csv<W: Write>(phis: &[PhiValue], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in phis {
        w.serialize(PhiRow::from(p))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_phis_json<W: Write>(phis: &[PhiValue], mut out: W) -> Result<()> {
    let rows: Vec<PhiRow> = phis.iter().map(PhiRow::from).collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct DifferenceRow {
    pub paper_k: usize,
    pub order_m: usize,
    pub difference: String,
    pub difference_display: String,
}

fn difference_rows(diffs: &DifferenceSequence) -> Vec<DifferenceRow> {
    diffs
        .entries
        .iter()
        .map(|d| DifferenceRow {
            paper_k: d.paper_k(),
            order_m: d.order,
            difference: d.value.to_string(),
            difference_display: d.display(),
        })
        .collect()
}

pub fn write_differences_csv<W: Write>(diffs: &DifferenceSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in difference_rows(diffs) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_differences_json<W: Write>(diffs: &DifferenceSequence, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &difference_rows(diffs))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RootRow {
    pub paper_k: usize,
    pub order_m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

fn root_rows(set: &EigenvalueSet) -> impl Iterator<Item = RootRow> + '_ {
    set.roots
        .iter()
        .zip(&set.residuals)
        .enumerate()
        .map(|(i, (z, &residual))| RootRow {
            paper_k: paper_k(set.order),
            order_m: set.order,
            n: i + 1,
            re: z.re,
            im: z.im,
            residual,
        })
}

pub fn write_eigen_csv<W: Write>(sets: &[EigenvalueSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for set in sets {
        for row in root_rows(set) {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EigenJson {
    paper_k: usize,
    order_m: usize,
    iterations_used: usize,
    max_residual: f64,
    roots: Vec<RootRow>,
}

pub fn write_eigen_json<W: Write>(sets: &[EigenvalueSet], mut out: W) -> Result<()> {
    let docs: Vec<EigenJson> = sets
        .iter()
        .map(|set| EigenJson {
            paper_k: paper_k(set.order),
            order_m: set.order,
            iterations_used: set.iterations_used,
            max_residual: set.max_residual(),
            roots: root_rows(set).collect(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &docs)?;
    writeln!(out)?;
    Ok(())
}

/// One point of the cloud as stored on disk. `re`/`im` are the point
/// `1/lambda`; the source root is optional on input and recomputed when
/// absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub paper_k: usize,
    pub order_m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_im: Option<f64>,
}

impl PointRow {
    fn from_point(p: &PhiPoint, with_root: bool) -> Self {
        PointRow {
            paper_k: p.paper_k,
            order_m: p.order,
            n: p.n,
            re: p.value.re,
            im: p.value.im,
            residual: p.residual,
            root_re: with_root.then_some(p.source_root.re),
            root_im: with_root.then_some(p.source_root.im),
        }
    }

    pub fn into_point(self) -> PhiPoint {
        let value = Complex64::new(self.re, self.im);
        let source_root = match (self.root_re, self.root_im) {
            (Some(re), Some(im)) => Complex64::new(re, im),
            // Real points have real roots; keep the imaginary part +0.
            _ if self.im == 0.0 => Complex64::new(self.re.recip(), 0.0),
            _ => value.inv(),
        };
        PhiPoint {
            paper_k: self.paper_k,
            order: self.order_m,
            n: self.n,
            value,
            source_root,
            residual: self.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudMetadata {
    pub orders: (usize, usize),
    pub total: usize,
    pub reference_total: usize,
    pub matches_reference_total: bool,
}

impl CloudMetadata {
    pub fn new(orders: &RangeInclusive<usize>, total: usize) -> Self {
        CloudMetadata {
            orders: (*orders.start(), *orders.end()),
            total,
            reference_total: REFERENCE_POINT_COUNT,
            matches_reference_total: total == REFERENCE_POINT_COUNT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub metadata: CloudMetadata,
    pub points: Vec<PointRow>,
}

impl PointCloud {
    pub fn new(orders: &RangeInclusive<usize>, points: &[PhiPoint]) -> Self {
        PointCloud {
            metadata: CloudMetadata::new(orders, points.len()),
            points: points
                .iter()
                .map(|p| PointRow::from_point(p, true))
                .collect(),
        }
    }

    pub fn into_points(self) -> Vec<PhiPoint> {
        self.points.into_iter().map(PointRow::into_point).collect()
    }
}

pub fn write_points_csv<W: Write>(points: &[PhiPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(PointRow::from_point(p, true))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points_json<W: Write>(cloud: &PointCloud, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, cloud)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_points_json<R: Read>(input: R) -> Result<Vec<PhiPoint>> {
    let cloud: PointCloud = serde_json::from_reader(input)?;
    Ok(cloud.into_points())
}

pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<PhiPoint>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<PointRow>()
        .map(|row| Ok(row?.into_point()))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ClassificationRow {
    pub paper_k: usize,
    pub order_m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub set: String,
    pub iterations: u32,
    pub member: bool,
    /// `member`/`non-member` from a closed-form oracle, `boundary-suspect`
    /// when it disagrees with the escape-time verdict, `none` otherwise.
    pub oracle: &'static str,
}

pub fn classification_rows(report: &MembershipReport) -> Vec<ClassificationRow> {
    report
        .records
        .iter()
        .map(|r| ClassificationRow {
            paper_k: r.point.paper_k,
            order_m: r.point.order,
            n: r.point.n,
            re: r.point.value.re,
            im: r.point.value.im,
            set: r.set.to_string(),
            iterations: r.result.iterations,
            member: r.member,
            oracle: match (r.oracle, r.boundary_suspect) {
                (Some(_), true) => "boundary-suspect",
                (Some(true), false) => "member",
                (Some(false), false) => "non-member",
                (None, _) => "none",
            },
        })
        .collect()
}

pub fn write_classification_csv<W: Write>(report: &MembershipReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in classification_rows(report) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_classification_json<W: Write>(report: &MembershipReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

const PGM_MAX: u32 = 65_535;
const PGM_LINE: usize = 70;

/// Plain (P2) greymap of raw iteration counts; `maxval` is the member count
/// `max_iterations + 1`, rescaled when it exceeds the format's limit.
pub fn write_pgm<W: Write>(grid: &IterationGrid, max_iterations: u32, mut out: W) -> Result<()> {
    let top = max_iterations.saturating_add(1);
    let maxval = top.min(PGM_MAX);
    writeln!(out, "P2")?;
    writeln!(out, "{} {}", grid.columns, grid.rows)?;
    writeln!(out, "{maxval}")?;
    for row in 0..grid.rows {
        let mut line = String::new();
        for &count in grid.row(row) {
            let v = if top > PGM_MAX {
                (count as u64 * PGM_MAX as u64 / top as u64) as u32
            } else {
                count.min(maxval)
            };
            let text = v.to_string();
            if !line.is_empty() && line.len() + 1 + text.len() > PGM_LINE {
                writeln!(out, "{line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&text);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn bit_length(n: u32) -> u32 {
    32 - n.leading_zeros()
}

/// Grey level for a pixel: members black, fast escapes white, banded by
/// the bit length of the count in between.
fn shade(count: u32, max_iterations: u32) -> u8 {
    if count > max_iterations {
        return 0;
    }
    let bands = bit_length(max_iterations + 1).max(1);
    let band = bit_length(count).min(bands);
    (255 - (band * 200) / bands) as u8
}

/// SVG of the rendered window with the point cloud drawn on top.
///
/// The backdrop is encoded as horizontal runs of equal shade. Only points
/// inside the window are drawn; each marker carries its `(k, n)` provenance
/// in `data-` attributes and a `<title>`.
pub fn write_svg_overlay<W: Write>(
    spec: &GridSpec,
    grid: &IterationGrid,
    points: &[PhiPoint],
    mut out: W,
) -> Result<()> {
    let (w, h) = (grid.columns, grid.rows);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    )?;
    writeln!(
        out,
        r#"<desc>{} window centre ({}, {}) size {} x {}, budget {}</desc>"#,
        spec.mode,
        spec.center.re,
        spec.center.im,
        spec.width,
        spec.height,
        spec.settings.max_iterations
    )?;
    writeln!(
        out,
        r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##
    )?;
    writeln!(out, r#"<g id="backdrop">"#)?;
    for row in 0..h {
        let line = grid.row(row);
        let mut start = 0;
        while start < w {
            let level = shade(line[start], spec.settings.max_iterations);
            let mut end = start + 1;
            while end < w && shade(line[end], spec.settings.max_iterations) == level {
                end += 1;
            }
            if level != 255 {
                writeln!(
                    out,
                    r##"<rect x="{start}" y="{row}" width="{}" height="1" fill="#{level:02x}{level:02x}{level:02x}"/>"##,
                    end - start
                )?;
            }
            start = end;
        }
    }
    writeln!(out, "</g>")?;

    let radius = (w.max(h) as f64 / 150.0).max(1.5);
    writeln!(
        out,
        r##"<g id="points" fill="#d62728" stroke="#ffffff" stroke-width="{:.3}">"##,
        radius / 3.0
    )?;
    for p in points.iter().filter(|p| spec.contains(p.value)) {
        let (x, y) = spec.complex_to_pixel(p.value);
        writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" data-paper-k="{}" data-n="{}"><title>phi({},{}) = {} {:+}i</title></circle>"#,
            p.paper_k, p.n, p.paper_k, p.n, p.value.re, p.value.im
        )?;
    }
    writeln!(out, "</g>")?;
    writeln!(out, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractals::{render_grid, EscapeSettings, SetSpec};
    use crate::spectra::phi_points;

    #[test]
    fn pgm_header_and_wrapping() {
        let grid = IterationGrid {
            columns: 40,
            rows: 2,
            counts: vec![1001; 80],
        };
        let mut buf = Vec::new();
        write_pgm(&grid, 1000, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("40 2"));
        assert_eq!(lines.next(), Some("1001"));
        assert!(text.lines().all(|l| l.len() <= 70));
        let values: Vec<&str> = text
            .lines()
            .skip(3)
            .flat_map(str::split_whitespace)
            .collect();
        assert_eq!(values.len(), 80);
    }

    #[test]
    fn pgm_rescales_large_budgets() {
        let grid = IterationGrid {
            columns: 2,
            rows: 1,
            counts: vec![100_001, 1],
        };
        let mut buf = Vec::new();
        write_pgm(&grid, 100_000, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("P2\n2 1\n65535\n65535 0\n"), "{text}");
    }

    #[test]
    fn shades() {
        assert_eq!(shade(1001, 1000), 0);
        assert!(shade(1, 1000) > shade(500, 1000));
        assert!(shade(500, 1000) > 0);
    }

    #[test]
    fn points_json_round_trip_is_exact() {
        let orders = 2..=6;
        let points = phi_points(orders.clone()).unwrap();
        let cloud = PointCloud::new(&orders, &points);
        assert_eq!(cloud.metadata.total, 20);
        assert!(!cloud.metadata.matches_reference_total);
        let mut buf = Vec::new();
        write_points_json(&cloud, &mut buf).unwrap();
        assert_eq!(read_points_json(buf.as_slice()).unwrap(), points);
    }

    #[test]
    fn points_csv_round_trip_keeps_values() {
        let points = phi_points(2..=4).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&points, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("paper_k,order_m,n,re,im,residual,root_re,root_im\n"));
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), points);
    }

    #[test]
    fn svg_marks_points_inside_the_window() {
        let spec = GridSpec {
            center: Complex64::new(0.0, 0.0),
            width: 2.0,
            height: 2.0,
            columns: 20,
            rows: 20,
            settings: EscapeSettings::default().with_max_iterations(50),
            mode: SetSpec::Julia(Complex64::new(-1.0, 0.0)),
        };
        let grid = render_grid(&spec).unwrap();
        let points = phi_points(2..=2).unwrap();
        let mut buf = Vec::new();
        write_svg_overlay(&spec, &grid, &points, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        assert!(svg.contains(r#"data-paper-k="1" data-n="1""#));
        // -1.618 lies outside the window.
        assert!(!svg.contains(r#"data-paper-k="1" data-n="2""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
