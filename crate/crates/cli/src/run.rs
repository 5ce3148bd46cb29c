use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use multinacci::export::{self, PointCloud, REFERENCE_MANDELBROT_MEMBERS, REFERENCE_POINT_COUNT};
use multinacci::fractals::{self, parse_complex, EscapeSettings, GridSpec, SetSpec};
use multinacci::sequences::{self, RecurrenceSpec, DEFAULT_DIGITS, DEFAULT_TERM_COUNT};
use multinacci::spectra::{SpectraConfig, DEFAULT_MAX_ORDER};
use multinacci::{order_from_paper_k, paper_k};
use num_complex::Complex64;

use crate::args::{
    ClassifyArgs, Cli, Command, EigenArgs, EscapeArgs, Format, OrderArg, OrderRangeArg, Output,
    PhiArgs, PointsArgs, RenderArgs, SeqArgs,
};
use crate::config::ConfigFile;
use crate::error::CliError;

const DEFAULT_MAX_PAPER_K: usize = 30;
const DEFAULT_ORDERS: RangeInclusive<usize> = 2..=DEFAULT_MAX_ORDER;
const DEFAULT_COLUMNS: usize = 700;
const CONVERGENCE_SCAN_LIMIT: usize = 64;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(threads) = cfg.pick(cli.threads, "threads")? {
        if threads == 0 {
            return Err(CliError::usage("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage("threads", e.to_string()))?;
    }
    match cli.command {
        Command::Seq(args) => seq(args, &cfg),
        Command::Phis(args) => phis(args, &cfg),
        Command::Diffs(args) => diffs(args, &cfg),
        Command::Eigen(args) => eigen(args, &cfg),
        Command::Points(args) => points(args, &cfg),
        Command::Classify(args) => classify(args, &cfg),
        Command::Render(args) => render(args, &cfg),
    }
}

/// Where an artifact goes once rendered.
struct Sink {
    format: Format,
    path: Option<PathBuf>,
}

impl Sink {
    fn resolve(
        out: Output,
        cfg: &ConfigFile,
        command: &str,
        allowed: &[Format],
    ) -> Result<Self, CliError> {
        let format = match out.format {
            Some(f) => f,
            None => match cfg.raw("format") {
                Some(text) => parse_format(text)?,
                None => allowed[0],
            },
        };
        if !allowed.contains(&format) {
            let names: Vec<_> = allowed.iter().map(|f| f.name()).collect();
            return Err(CliError::usage(
                "format",
                format!(
                    "{command} writes {}, not {}",
                    names.join(" or "),
                    format.name()
                ),
            ));
        }
        let path = out.output.or_else(|| cfg.raw("output").map(PathBuf::from));
        Ok(Sink { format, path })
    }

    fn write(&self, bytes: &[u8], summary: &str) -> Result<(), CliError> {
        match &self.path {
            Some(path) => {
                fs::write(path, bytes).map_err(|e| {
                    CliError::usage("output", format!("cannot write {}: {e}", path.display()))
                })?;
                println!("{summary} -> {}", path.display());
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                eprintln!("{summary}");
            }
        }
        Ok(())
    }
}

fn parse_format(text: &str) -> Result<Format, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        "pgm" => Ok(Format::Pgm),
        "svg" => Ok(Format::Svg),
        other => Err(CliError::usage(
            "format",
            format!("unknown format {other:?}"),
        )),
    }
}

fn resolve_order(arg: &OrderArg, cfg: &ConfigFile) -> Result<Option<usize>, CliError> {
    let order = cfg.pick(arg.order, "order")?;
    let k = cfg.pick(arg.paper_k, "paper-k")?;
    match (order, k) {
        (Some(_), Some(_)) => Err(CliError::usage("order", "give either --order or --paper-k")),
        (Some(m), None) => Ok(Some(m)),
        (None, Some(0)) => Err(CliError::usage("paper-k", "must be at least 1")),
        (None, Some(k)) => Ok(Some(order_from_paper_k(k))),
        (None, None) => Ok(None),
    }
}

/// `a..b` and `a..=b` (both inclusive) or a single value.
fn parse_range(text: &str, flag: &'static str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::usage(flag, format!("expected a range like 2..20, got {text:?}"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let range = match text.split_once("..") {
        Some((a, b)) => parse(a)?..=parse(b.trim_start_matches('='))?,
        None => {
            let v = parse(text)?;
            v..=v
        }
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

fn resolve_range(
    arg: &OrderRangeArg,
    cfg: &ConfigFile,
) -> Result<Option<RangeInclusive<usize>>, CliError> {
    let orders = cfg.pick_string(arg.orders.clone(), "orders");
    let ks = cfg.pick_string(arg.paper_ks.clone(), "paper-ks");
    match (orders, ks) {
        (Some(_), Some(_)) if arg.orders.is_some() && arg.paper_ks.is_some() => Err(
            CliError::usage("orders", "give either --orders or --paper-ks"),
        ),
        (Some(text), _) if arg.paper_ks.is_none() => Ok(Some(parse_range(&text, "orders")?)),
        (_, Some(text)) => {
            let ks = parse_range(&text, "paper-ks")?;
            if *ks.start() == 0 {
                return Err(CliError::usage("paper-ks", "paper indices start at 1"));
            }
            Ok(Some(
                order_from_paper_k(*ks.start())..=order_from_paper_k(*ks.end()),
            ))
        }
        (Some(text), None) => Ok(Some(parse_range(&text, "orders")?)),
        (None, None) => Ok(None),
    }
}

fn render_to_vec<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> multinacci::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn seq(args: SeqArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let sink = Sink::resolve(args.out, cfg, "seq", &[Format::Csv, Format::Json])?;
    let order = resolve_order(&args.order, cfg)?
        .ok_or_else(|| CliError::usage("order", "seq needs --order or --paper-k"))?;
    let terms = cfg.pick(args.terms, "terms")?.unwrap_or(DEFAULT_TERM_COUNT);
    let spec = match cfg.pick_string(args.init, "init") {
        Some(text) => {
            let values = text
                .split(',')
                .map(|v| v.trim().parse())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    CliError::usage(
                        "init",
                        format!("expected nonnegative integers, got {text:?}"),
                    )
                })?;
            RecurrenceSpec::new(order, values, terms)?
        }
        None => RecurrenceSpec::ones(order, terms)?,
    };
    let seq = sequences::generate_sequence(&spec);
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Json => export::write_sequence_json(&seq, buf),
        _ => export::write_sequence_csv(&seq, buf),
    })?;
    let summary = format!(
        "seq: {} terms of order {order} (paper_k {}), last term has {} digits",
        seq.terms.len(),
        paper_k(order),
        seq.terms.last().map(|t| t.to_string().len()).unwrap_or(0)
    );
    sink.write(&bytes, &summary)
}

struct PhiRange {
    max_order: usize,
    terms: usize,
    digits: u32,
    tolerance: Option<f64>,
}

fn resolve_phi_range(args: &PhiArgs, cfg: &ConfigFile) -> Result<PhiRange, CliError> {
    let max_order = match (
        cfg.pick(args.max_order, "max-order")?,
        cfg.pick(args.max_paper_k, "max-paper-k")?,
    ) {
        (Some(m), None) => m,
        (None, Some(k)) => order_from_paper_k(k),
        (Some(m), Some(_)) if args.max_order.is_some() => m,
        (_, Some(k)) => order_from_paper_k(k),
        (None, None) => order_from_paper_k(DEFAULT_MAX_PAPER_K),
    };
    if max_order < 2 {
        return Err(CliError::usage("max-paper-k", "must be at least 1"));
    }
    Ok(PhiRange {
        max_order,
        terms: cfg.pick(args.terms, "terms")?.unwrap_or(DEFAULT_TERM_COUNT),
        digits: cfg.pick(args.digits, "digits")?.unwrap_or(DEFAULT_DIGITS),
        tolerance: cfg.pick(args.tolerance, "tolerance")?,
    })
}

fn convergence_note(range: &PhiRange, scan_to: usize) -> Result<String, CliError> {
    let Some(tol) = range.tolerance else {
        return Ok(String::new());
    };
    let report = sequences::convergence_scan(tol, scan_to, range.terms, range.digits)?;
    Ok(match report.converged_order {
        Some(m) => format!(
            "; |phi - 1/2| < {tol:e} first at paper_k {} (order {m})",
            paper_k(m)
        ),
        None => format!("; |phi - 1/2| < {tol:e} not reached by order {scan_to}"),
    })
}

fn phis(args: PhiArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let range = resolve_phi_range(&args, cfg)?;
    let sink = Sink::resolve(args.out, cfg, "phis", &[Format::Csv, Format::Json])?;
    let values = sequences::phi_scan(range.max_order, range.terms, range.digits)?;
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Json => export::write_phis_json(&values, buf),
        _ => export::write_phis_csv(&values, buf),
    })?;
    let summary = format!(
        "phis: {} rows, paper_k 1..{} (order 2..{}), {} terms, {} digits{}",
        values.len(),
        paper_k(range.max_order),
        range.max_order,
        range.terms,
        range.digits,
        convergence_note(&range, range.max_order.max(CONVERGENCE_SCAN_LIMIT))?
    );
    sink.write(&bytes, &summary)
}

fn diffs(args: PhiArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let range = resolve_phi_range(&args, cfg)?;
    let sink = Sink::resolve(args.out, cfg, "diffs", &[Format::Csv, Format::Json])?;
    // Entry k needs phi at k and k + 1.
    let values = sequences::phi_scan(range.max_order + 1, range.terms, range.digits)?;
    let table = sequences::difference_sequence(&values)?;
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Json => export::write_differences_json(&table, buf),
        _ => export::write_differences_csv(&table, buf),
    })?;
    let trend = if table.is_positive_and_decreasing() {
        "positive and decreasing"
    } else {
        "NOT positive and decreasing"
    };
    let summary = format!(
        "diffs: {} rows, paper_k 1..{}, {trend}, {} digits{}",
        table.entries.len(),
        paper_k(range.max_order),
        range.digits,
        convergence_note(&range, (range.max_order + 1).max(CONVERGENCE_SCAN_LIMIT))?
    );
    sink.write(&bytes, &summary)
}

fn spectra_config(tolerance: Option<f64>) -> SpectraConfig {
    let mut config = SpectraConfig::default();
    if let Some(t) = tolerance {
        config.residual_tolerance = t;
    }
    config
}

fn eigen(args: EigenArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let sink = Sink::resolve(args.out, cfg, "eigen", &[Format::Json, Format::Csv])?;
    let orders = match (
        resolve_order(&args.order, cfg)?,
        resolve_range(&args.range, cfg)?,
    ) {
        (Some(m), None) => m..=m,
        (None, Some(r)) => r,
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "order",
                "give a single order or a range, not both",
            ))
        }
        (None, None) => DEFAULT_ORDERS,
    };
    let tolerance = cfg.pick(args.tolerance, "tolerance")?;
    let config = spectra_config(tolerance);
    let sets = orders
        .clone()
        .map(|m| config.eigenvalues(m))
        .collect::<multinacci::Result<Vec<_>>>()?;
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Csv => export::write_eigen_csv(&sets, buf),
        _ => export::write_eigen_json(&sets, buf),
    })?;
    let roots: usize = sets.iter().map(|s| s.roots.len()).sum();
    let worst = sets.iter().map(|s| s.max_residual()).fold(0.0, f64::max);
    let summary = format!(
        "eigen: orders {}..{} (paper_k {}..{}), {roots} roots, max residual {worst:.3e}",
        orders.start(),
        orders.end(),
        paper_k(*orders.start()),
        paper_k(*orders.end()),
    );
    sink.write(&bytes, &summary)
}

fn count_note(total: usize) -> String {
    if total == REFERENCE_POINT_COUNT {
        String::new()
    } else {
        format!(" (reference total {REFERENCE_POINT_COUNT} differs)")
    }
}

fn points(args: PointsArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let sink = Sink::resolve(args.out, cfg, "points", &[Format::Json, Format::Csv])?;
    let orders = resolve_range(&args.range, cfg)?.unwrap_or(DEFAULT_ORDERS);
    let pts = SpectraConfig::default().phi_points(orders.clone())?;
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Csv => export::write_points_csv(&pts, buf),
        _ => export::write_points_json(&PointCloud::new(&orders, &pts), buf),
    })?;
    let summary = format!(
        "points: {} points from orders {}..{}{}",
        pts.len(),
        orders.start(),
        orders.end(),
        count_note(pts.len())
    );
    sink.write(&bytes, &summary)
}

fn escape_settings(args: &EscapeArgs, cfg: &ConfigFile) -> Result<EscapeSettings, CliError> {
    let defaults = EscapeSettings::default();
    let settings = EscapeSettings {
        max_iterations: cfg
            .pick(args.max_iter, "max-iter")?
            .unwrap_or(defaults.max_iterations),
        bailout: cfg
            .pick(args.bailout, "bailout")?
            .unwrap_or(defaults.bailout),
        cycle_detection: cfg.switch(args.cycle_detection, "cycle-detection")?,
    };
    settings.validate()?;
    Ok(settings)
}

fn parse_set(text: &str) -> Result<SetSpec, CliError> {
    text.parse().map_err(|_| {
        CliError::usage(
            "set",
            format!("expected mandelbrot or julia:RE[,IM], got {text:?}"),
        )
    })
}

fn load_points(path: &Path) -> Result<Vec<multinacci::PhiPoint>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::usage("input", format!("cannot open {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let pts = if is_csv {
        export::read_points_csv(file)
    } else {
        export::read_points_json(file)
    };
    pts.map_err(|e| CliError::usage("input", format!("{}: {e}", path.display())))
}

fn classify(args: ClassifyArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let sink = Sink::resolve(args.out, cfg, "classify", &[Format::Csv, Format::Json])?;
    let settings = escape_settings(&args.escape, cfg)?;
    let set_texts = if !args.sets.is_empty() {
        args.sets
    } else if let Some(text) = cfg.raw("set") {
        text.split(';').map(str::to_string).collect()
    } else {
        vec!["mandelbrot".into(), "julia:-1".into(), "julia:-2".into()]
    };
    let sets = set_texts
        .iter()
        .map(|t| parse_set(t))
        .collect::<Result<Vec<_>, _>>()?;

    let input = args.input.or_else(|| cfg.raw("input").map(PathBuf::from));
    let pts = match input {
        Some(path) => load_points(&path)?,
        None => {
            let orders = resolve_range(&args.range, cfg)?.unwrap_or(DEFAULT_ORDERS);
            SpectraConfig::default().phi_points(orders)?
        }
    };
    let report = fractals::classify_points(&pts, &sets, settings)?;
    let bytes = render_to_vec(|buf| match sink.format {
        Format::Json => export::write_classification_json(&report, buf),
        _ => export::write_classification_csv(&report, buf),
    })?;

    let mut parts: Vec<String> = report
        .summaries
        .iter()
        .map(|s| {
            let mut text = format!(
                "{}: {}/{} members at budget {}",
                s.set, s.members, s.total, s.max_iterations
            );
            if s.set == SetSpec::Mandelbrot {
                text.push_str(&format!(
                    " (reference: {REFERENCE_MANDELBROT_MEMBERS} of {REFERENCE_POINT_COUNT}{})",
                    if s.total == REFERENCE_POINT_COUNT {
                        ""
                    } else {
                        "; point counts differ"
                    }
                ));
            }
            text
        })
        .collect();
    parts.push(format!("{} boundary-suspect", report.boundary_suspects()));
    let summary = format!("classify: {} points; {}", pts.len(), parts.join("; "));
    sink.write(&bytes, &summary)
}

fn render(args: RenderArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let sink = Sink::resolve(args.out, cfg, "render", &[Format::Pgm, Format::Svg])?;
    let settings = escape_settings(&args.escape, cfg)?;
    let mode = match cfg.pick_string(args.set, "set") {
        Some(text) => parse_set(&text)?,
        None => SetSpec::Mandelbrot,
    };
    let (default_center, default_width, default_height) = match mode {
        SetSpec::Mandelbrot => (Complex64::new(-0.5, 0.0), 4.0, 3.5),
        SetSpec::Julia(_) => (Complex64::new(0.0, 0.0), 4.0, 3.0),
    };
    let center = match cfg.pick_string(args.center, "center") {
        Some(text) => parse_complex(&text)
            .ok_or_else(|| CliError::usage("center", format!("expected RE,IM, got {text:?}")))?,
        None => default_center,
    };
    let width = cfg.pick(args.width, "width")?.unwrap_or(default_width);
    let height = cfg.pick(args.height, "height")?.unwrap_or(default_height);
    let columns = cfg
        .pick(args.columns, "columns")?
        .unwrap_or(DEFAULT_COLUMNS);
    let rows = match cfg.pick(args.rows, "rows")? {
        Some(r) => r,
        None if width > 0.0 && height > 0.0 => {
            ((columns as f64 * height / width).round() as usize).max(1)
        }
        None => 1,
    };
    let spec = GridSpec {
        center,
        width,
        height,
        columns,
        rows,
        settings,
        mode,
    };
    let grid = fractals::render_grid(&spec)?;
    let members = grid
        .counts
        .iter()
        .filter(|&&n| n > settings.max_iterations)
        .count();

    let (bytes, overlay) = match sink.format {
        Format::Svg => {
            let orders = resolve_range(&args.range, cfg)?.unwrap_or(DEFAULT_ORDERS);
            let pts = SpectraConfig::default().phi_points(orders)?;
            let shown = pts.iter().filter(|p| spec.contains(p.value)).count();
            let bytes = render_to_vec(|buf| export::write_svg_overlay(&spec, &grid, &pts, buf))?;
            (bytes, format!(", {shown}/{} points overlaid", pts.len()))
        }
        _ => (
            render_to_vec(|buf| export::write_pgm(&grid, settings.max_iterations, buf))?,
            String::new(),
        ),
    };
    let summary = format!(
        "render: {mode} {columns}x{rows} around ({}, {}), {members} member pixels at budget {}{overlay}",
        center.re, center.im, settings.max_iterations
    );
    sink.write(&bytes, &summary)
}
