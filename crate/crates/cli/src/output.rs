use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use blockenc::par;
use blockenc::report::ExperimentReport;

use crate::config::{CliError, CliResult, ExperimentConfig, Format};
use crate::pipelines::Run;

pub fn render(run: &Run, format: Format, timing: bool) -> String {
    match (format, &run.csv) {
        (Format::Json, _) => run.report.to_json(timing) + "\n",
        (Format::Csv, Some(table)) => table.clone(),
        (Format::Csv, None) => run.report.to_csv(timing),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so the target never holds a partial report.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `dir/name.ext` becomes `dir/name.<tag>.ext`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn sweep_value(raw: &str) -> Option<Value> {
    let x: f64 = raw.parse().ok()?;
    if !x.is_finite() {
        return None;
    }
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Some(Value::from(x as i64))
    } else {
        Some(Value::from(x))
    }
}

/// Numeric columns of one report: deltas, top-level result scalars and the
/// ledger.
fn aggregate_row(report: &ExperimentReport) -> BTreeMap<String, String> {
    let mut row = BTreeMap::new();
    for (k, v) in &report.oracle_deltas {
        row.insert(format!("delta.{k}"), format!("{v:e}"));
    }
    if let Value::Object(m) = &report.result {
        for (k, v) in m {
            if let Some(x) = v.as_f64() {
                row.insert(format!("result.{k}"), format!("{x:e}"));
            }
        }
    }
    let l = &report.ledger;
    row.insert("ledger.queries".into(), l.queries.to_string());
    row.insert("ledger.depth".into(), format!("{:e}", l.depth));
    row.insert("ledger.success_probability".into(), format!("{:e}", l.success_probability));
    row
}

pub fn aggregate_csv(axis: &str, tokens: &[&str], reports: &[&ExperimentReport]) -> String {
    let rows: Vec<_> = reports.iter().map(|r| aggregate_row(r)).collect();
    let columns: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![axis.to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    w.write_record(&header).expect("in-memory csv");
    for (tok, row) in tokens.iter().zip(&rows) {
        let mut rec = vec![tok.to_string()];
        rec.extend(columns.iter().map(|c| row.get(*c).cloned().unwrap_or_default()));
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writer emits UTF-8")
}

/// Runs the config once per value of `axis`, concurrently. Reports are only
/// written once every run has succeeded; the aggregate comes last.
pub fn sweep<F>(cfg: &ExperimentConfig, axis: &str, values: &str, timing: bool, run: F) -> CliResult<()>
where
    F: Fn(&ExperimentConfig) -> CliResult<Run> + Sync + Send,
{
    let tokens: Vec<&str> = values.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let mut configs = Vec::with_capacity(tokens.len());
    for tok in &tokens {
        let v = sweep_value(tok)
            .ok_or_else(|| CliError::Validation(format!("sweep value `{tok}` for `{axis}` is not a number")))?;
        let mut c = cfg.clone();
        c.parameters.insert(axis.to_string(), v);
        configs.push(c);
    }
    let runs = par::map(&configs, &run).into_iter().collect::<CliResult<Vec<Run>>>()?;
    if let Some(out) = &cfg.output {
        for (tok, r) in tokens.iter().zip(&runs) {
            write_atomic(&tagged(out, &format!("{axis}-{tok}")), &render(r, cfg.format, timing))?;
        }
    }
    let reports: Vec<&ExperimentReport> = runs.iter().map(|r| &r.report).collect();
    let agg = aggregate_csv(axis, &tokens, &reports);
    match &cfg.output {
        Some(out) => write_atomic(&out.with_file_name(sweep_name(out)), &agg),
        None => emit(None, &agg),
    }
}

fn sweep_name(out: &Path) -> String {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{stem}.sweep.csv")
}
