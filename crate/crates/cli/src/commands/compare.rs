use std::path::{Path, PathBuf};

use clap::Args;

use super::output;
use crate::error::{invalid, CliError, CliResult};
use crate::table::{read_column, Column, Table};

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// CSV inputs as PATH or PATH:COLUMN. The first one is the reference.
    #[arg(num_args = 2.., required = true)]
    pub inputs: Vec<String>,
    /// Fail (exit 3) when any relative error exceeds this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Only reference values at or above this FER enter the gate.
    #[arg(long, default_value_t = 1e-4)]
    pub min_fer: f64,
    /// Joined table; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_input(spec: &str) -> CliResult<(PathBuf, Option<String>)> {
    if Path::new(spec).is_file() {
        return Ok((spec.into(), None));
    }
    match spec.rsplit_once(':') {
        Some((path, col)) if Path::new(path).is_file() => Ok((path.into(), Some(col.to_string()))),
        _ => Err(invalid(format!("`{spec}` is neither a file nor FILE:COLUMN"))),
    }
}

fn same_snr(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// Place `col` on the reference grid.
fn align(reference: &[f64], col: &Column) -> CliResult<Vec<Option<f64>>> {
    let mut out = vec![None; reference.len()];
    for (&db, &v) in col.snr_db.iter().zip(&col.values) {
        let i = reference.iter().position(|&r| same_snr(r, db)).ok_or_else(|| {
            invalid(format!(
                "grid mismatch: {} has {db} dB, which the reference lacks",
                col.label
            ))
        })?;
        out[i] = v;
    }
    Ok(out)
}

pub fn relative_error(value: f64, reference: f64) -> Option<f64> {
    (reference > 0.0 && value.is_finite()).then(|| (value / reference - 1.0).abs())
}

pub fn run(args: &CompareArgs) -> CliResult<()> {
    if let Some(t) = args.tolerance {
        if !(t >= 0.0) {
            return Err(invalid("--tolerance must be non-negative"));
        }
    }
    let mut columns = Vec::new();
    for spec in &args.inputs {
        let (path, col) = parse_input(spec)?;
        columns.push(read_column(&path, col.as_deref())?);
    }
    let mut seen = std::collections::HashSet::new();
    for (i, c) in columns.iter_mut().enumerate() {
        if !seen.insert(c.label.clone()) {
            c.label = format!("{}#{}", c.label, i + 1);
        }
    }
    let reference = &columns[0];
    let mut table = Table::new(reference.snr_db.clone());
    table.push(reference.label.clone(), reference.values.clone());
    let aligned = columns[1..]
        .iter()
        .map(|c| align(&reference.snr_db, c).map(|v| (c.label.clone(), v)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut worst: Option<(f64, String, f64)> = None;
    let mut gated = 0usize;
    for (label, values) in &aligned {
        table.push(label.clone(), values.clone());
    }
    for (label, values) in &aligned {
        let errs: Vec<Option<f64>> = values
            .iter()
            .zip(&reference.values)
            .map(|(v, r)| match (v, r) {
                (Some(v), Some(r)) => relative_error(*v, *r),
                _ => None,
            })
            .collect();
        for (i, e) in errs.iter().enumerate() {
            let gate = reference.values[i].is_some_and(|r| r >= args.min_fer);
            if let (Some(e), true) = (e, gate) {
                gated += 1;
                if worst.as_ref().is_none_or(|w| *e > w.0) {
                    worst = Some((*e, label.clone(), reference.snr_db[i]));
                }
            }
        }
        table.push(format!("relerr_{label}"), errs);
    }
    table.write_csv(output(args.out.as_deref())?)?;

    match &worst {
        Some((e, label, db)) => eprintln!(
            "{gated} points with reference FER >= {:e}; worst relative error {:.2}% ({label} at {db} dB)",
            args.min_fer,
            e * 100.0
        ),
        None => eprintln!("no points with reference FER >= {:e}", args.min_fer),
    }
    if let Some(tol) = args.tolerance {
        match worst {
            None => return Err(invalid("nothing to gate: no overlapping points above --min-fer")),
            Some((e, label, db)) if e > tol => {
                return Err(CliError::Gate(format!(
                    "{label} at {db} dB is off by {:.2}% (tolerance {:.2}%)",
                    e * 100.0,
                    tol * 100.0
                )))
            }
            _ => {}
        }
    }
    Ok(())
}
