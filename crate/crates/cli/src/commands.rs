use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use eigenshrink::loss::{parse_loss_list, Norm, Pivot};
use eigenshrink::shrinker::{
    asy_shift, asy_slope, asy_slope_hat, ppi, selfcheck, shrink, tabulate, SelfCheckOptions, ShiftSource,
    ShrinkerMethod, SlopeSource,
};
use eigenshrink::sim::{apply_shrinker, run_study, LossEvaluation, ShrinkerChoice, SimConfig};
use eigenshrink::{AspectRatio, Error, LossId, SpikeGeometry};
use nalgebra::DMatrix;

use crate::output::{sig9, Cell, Table};
use crate::{CliError, Command, EvaluationArg, MethodArg, ReportKind, ShrinkerArg, Spacing};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Shrink { loss, gamma, values, input, matrix, method, out } => {
            let gamma = AspectRatio::new(gamma)?;
            let losses = losses(&loss)?;
            let method = match method {
                MethodArg::Auto => ShrinkerMethod::Auto,
                MethodArg::Closed => ShrinkerMethod::ClosedForm,
                MethodArg::Numeric => ShrinkerMethod::Numeric,
            };
            let table = if let Some(path) = matrix {
                let [loss] = losses[..] else {
                    return Err(CliError::Usage("--matrix takes exactly one loss".into()));
                };
                shrink_matrix(&read_matrix(&path)?, gamma, loss)?
            } else {
                let lambdas = match (values, input) {
                    (Some(v), None) => parse_numbers(&v)?,
                    (None, Some(path)) => read_column(&path)?,
                    _ => return Err(CliError::Usage("give --values, --input or --matrix".into())),
                };
                shrink_rows(&lambdas, gamma, &losses, method)?
            };
            table.emit(out.format, out.output.as_deref())
        }
        Command::Tabulate { loss, gamma, min, max, count, spacing, out } => {
            let grid = grid(min, max, count, spacing)?;
            tabulate_table(&grid, AspectRatio::new(gamma)?, &losses(&loss)?)?.emit(out.format, out.output.as_deref())
        }
        Command::Report { kind, loss, gamma, at_lambda, ell, out } => {
            report(kind, &losses(&loss)?, AspectRatio::new(gamma)?, at_lambda, ell)?
                .emit(out.format, out.output.as_deref())
        }
        Command::Simulate { n, p, spikes, loss, reps, seed, shrinker, table, evaluation, allow_large, out } => {
            let mut config = SimConfig::new(n, p, parse_numbers(&spikes)?);
            config.losses = losses(&loss)?;
            config.replications = reps;
            config.seed = seed;
            config.allow_large = allow_large;
            config.evaluation = match evaluation {
                EvaluationArg::Reduced => LossEvaluation::Reduced,
                EvaluationArg::Full => LossEvaluation::Full,
            };
            config.shrinker = match (shrinker, table) {
                (ShrinkerArg::Optimal, None) => ShrinkerChoice::Optimal,
                (ShrinkerArg::Hard, None) => ShrinkerChoice::HardThreshold,
                (ShrinkerArg::Table, Some(path)) => ShrinkerChoice::Table(read_knots(&path)?),
                (ShrinkerArg::Table, None) => return Err(CliError::Usage("--shrinker table needs --table".into())),
                (_, Some(_)) => return Err(CliError::Usage("--table is only used with --shrinker table".into())),
            };
            simulate(&config)?.emit(out.format, out.output.as_deref())
        }
        Command::Selfcheck { points, tol, inject_fault, output } => {
            let inject_fault = inject_fault.map(|s| s.parse::<LossId>()).transpose().map_err(usage)?;
            let opts = SelfCheckOptions { points, tol, inject_fault, ..SelfCheckOptions::default() };
            let (text, passed) = selfcheck_report(&opts)?;
            write_text(&text, output.as_deref())?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Failed("selfcheck failed".into()))
            }
        }
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn losses(spec: &str) -> Result<Vec<LossId>, CliError> {
    parse_loss_list(spec).map_err(usage)
}

fn write_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// The loss ids laid out as norm × pivot, then the statistical losses.
pub fn loss_grid() -> String {
    let mut s = String::new();
    for norm in Norm::ALL {
        let row: Vec<String> = Pivot::ALL.iter().map(|&p| LossId::NormPivot(norm, p).to_string()).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    let stats: Vec<String> =
        LossId::all().into_iter().filter(|l| matches!(l, LossId::Statistical(_))).map(|l| l.to_string()).collect();
    writeln!(s, "{}", stats.join(" ")).unwrap();
    s
}

fn parse_number(s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: '{s}'")))
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_number).collect()
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Numeric CSV rows of exactly `width` fields (any width if `None`). A first
/// row that does not parse is taken to be a header.
fn read_rows(path: &Path, width: Option<usize>) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |line: usize, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let mut rows = Vec::new();
    for (i, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| bad(i + 1, e.to_string()))?;
        if let Some(w) = width {
            if rec.len() != w {
                return Err(bad(i + 1, format!("expected {w} column(s), found {}", rec.len())));
            }
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(bad(i + 1, format!("non-numeric field in {:?}", rec.iter().collect::<Vec<_>>()))),
        }
    }
    Ok(rows)
}

fn read_column(path: &Path) -> Result<Vec<f64>, CliError> {
    Ok(read_rows(path, Some(1))?.into_iter().map(|r| r[0]).collect())
}

fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    Ok(read_rows(path, Some(2))?.into_iter().map(|r| (r[0], r[1])).collect())
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let rows = read_rows(path, None)?;
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(CliError::Usage(format!("{}: expected a square matrix", path.display())));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

fn shrink_rows(
    lambdas: &[f64],
    gamma: AspectRatio,
    losses: &[LossId],
    method: ShrinkerMethod,
) -> Result<Table, CliError> {
    let multi = losses.len() > 1;
    let mut header = vec!["lambda", "ell", "cos2", "eta", "method"];
    if multi {
        header.insert(0, "loss");
    }
    let mut table = Table::new(header);
    for &loss in losses {
        for &lambda in lambdas {
            let r = shrink(lambda, gamma, loss, method)?;
            let (ell, cos2, label) = if r.in_bulk {
                (Cell::Empty, Cell::Empty, "bulk")
            } else {
                let g = SpikeGeometry::from_lambda(lambda, gamma)?;
                (Cell::Num(g.ell), Cell::Num(g.c2), r.method_used.label())
            };
            let mut row = vec![Cell::Num(lambda), ell, cos2, Cell::Num(r.eta), Cell::Text(label.into())];
            if multi {
                row.insert(0, Cell::Text(loss.to_string()));
            }
            table.push(row);
        }
    }
    Ok(table)
}

fn shrink_matrix(s: &DMatrix<f64>, gamma: AspectRatio, loss: LossId) -> Result<Table, CliError> {
    let out = apply_shrinker(s, gamma, loss)?;
    let p = out.nrows();
    let mut table = Table::new((1..=p).map(|j| format!("c{j}")));
    for i in 0..p {
        table.push((0..p).map(|j| Cell::Num(out[(i, j)])).collect());
    }
    Ok(table)
}

fn grid(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    if !min.is_finite() || min <= 0.0 || !max.is_finite() || max < min {
        return Err(CliError::Usage(format!("grid needs 0 < min <= max, got [{min}, {max}]")));
    }
    if count == 0 {
        return Err(CliError::Usage("grid count must be at least 1".into()));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / step;
            match spacing {
                Spacing::Linear => min + (max - min) * t,
                Spacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
            }
        })
        .collect())
}

fn tabulate_table(grid: &[f64], gamma: AspectRatio, losses: &[LossId]) -> Result<Table, CliError> {
    let mut header = vec!["lambda".to_string()];
    header.extend(losses.iter().map(|l| l.to_string()));
    let columns = losses.iter().map(|&l| tabulate(l, gamma, grid)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(header);
    for (i, &lambda) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(lambda)];
        row.extend(columns.iter().map(|c| Cell::Num(c[i].1)));
        table.push(row);
    }
    Ok(table)
}

fn slope_label(s: SlopeSource) -> &'static str {
    match s {
        SlopeSource::ClosedForm => "closed",
        SlopeSource::LimitEquation => "limit-equation",
        SlopeSource::Approximate => "approximate",
    }
}

fn report(
    kind: ReportKind,
    losses: &[LossId],
    gamma: AspectRatio,
    at_lambda: f64,
    ell: f64,
) -> Result<Table, CliError> {
    let mut table = match kind {
        ReportKind::Slopes => Table::new(["loss", "slope", "source"]),
        ReportKind::SlopeHat => Table::new(["loss", "lambda", "slope_hat"]),
        ReportKind::Shifts => Table::new(["loss", "shift", "source"]),
        ReportKind::Ppi => Table::new(["loss", "ell", "ppi"]),
    };
    for &loss in losses {
        let id = Cell::Text(loss.to_string());
        let row = match kind {
            ReportKind::Slopes => {
                let s = asy_slope(loss, gamma)?;
                vec![id, Cell::Num(s.value), Cell::Text(slope_label(s.source).into())]
            }
            ReportKind::SlopeHat => vec![id, Cell::Num(at_lambda), Cell::Num(asy_slope_hat(loss, gamma, at_lambda)?)],
            ReportKind::Shifts => match asy_shift(loss, gamma, at_lambda) {
                Ok(s) => {
                    let src = match s.source {
                        ShiftSource::ClosedForm => "closed",
                        ShiftSource::Approximate => "approximate",
                    };
                    vec![id, Cell::Num(s.value), Cell::Text(src.into())]
                }
                Err(Error::UndefinedShift(_)) => vec![id, Cell::Text("undefined".into()), Cell::Empty],
                Err(e) => return Err(e.into()),
            },
            ReportKind::Ppi => vec![id, Cell::Num(ell), Cell::Num(ppi(loss, ell, gamma)?)],
        };
        table.push(row);
    }
    Ok(table)
}

fn simulate(config: &SimConfig) -> Result<Table, CliError> {
    let summary = run_study(config)?;
    if summary.failed > 0 {
        eprintln!(
            "eigenshrink: {} of {} replicates failed; first error: {}",
            summary.failed,
            config.replications,
            summary.first_error.as_ref().map(|e| e.to_string()).unwrap_or_default()
        );
    }
    let mut table =
        Table::new(["metric", "target", "mean", "std_error", "predicted", "rel_deviation", "z_score", "replicates"]);
    for row in summary.rows() {
        table.push(vec![
            Cell::Text(row.metric.into()),
            Cell::Text(row.target.clone()),
            Cell::Num(row.stats.mean),
            Cell::opt(row.stats.se),
            Cell::opt(row.predicted),
            Cell::opt(row.rel_dev()),
            Cell::opt(row.z()),
            Cell::Int(row.stats.count as u64),
        ]);
    }
    Ok(table)
}

fn selfcheck_report(opts: &SelfCheckOptions) -> Result<(String, bool), CliError> {
    let report = selfcheck(opts)?;
    let mut kinds: Vec<&str> = Vec::new();
    for c in &report.cases {
        if !kinds.contains(&c.check) {
            kinds.push(c.check);
        }
    }
    let mut s = String::new();
    writeln!(s, "{:<20} {:>7} {:>7}", "check", "cases", "failed").unwrap();
    for k in &kinds {
        let cases = report.cases.iter().filter(|c| c.check == *k);
        let total = cases.clone().count();
        let failed = cases.filter(|c| !c.passed).count();
        writeln!(s, "{k:<20} {total:>7} {failed:>7}").unwrap();
    }
    for c in report.failures() {
        writeln!(
            s,
            "FAIL {} loss={} gamma={} lambda={} expected={} actual={}",
            c.check,
            c.loss,
            sig9(c.gamma),
            sig9(c.lambda),
            sig9(c.expected),
            sig9(c.actual)
        )
        .unwrap();
    }
    let passed = report.passed();
    writeln!(s, "selfcheck: {} ({} cases)", if passed { "PASS" } else { "FAIL" }, report.cases.len()).unwrap();
    Ok((s, passed))
}
