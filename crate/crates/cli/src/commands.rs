//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ldg_core::bounds::{audit_field, triangle_report, BoundAudit};
use ldg_core::moments::{build_quadrature, q_from_psi, summarize, Distribution};
use ldg_core::solver::io::{read_field, write_field_string};
use ldg_core::solver::{minimize_multistart, SolverError};

use crate::config::RunConfig;
use crate::{CliError, ExitStatus};

/// Default output directory of `minimize`.
pub const DEFAULT_OUT_DIR: &str = "ldg-out";

pub const PHASE_HEADER: &str = "T,a,s_plus,s_minus,f_plus,f_minus,regime";

/// Command-line values that take precedence over the config.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub slack: Option<f64>,
}

/// Where file outputs go, if anywhere.
#[derive(Clone, Debug)]
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Output { dir }
    }

    fn write_to(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(dir) => Self::write_to(dir, name, contents),
            None => Ok(()),
        }
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn phase_regime(l: &ldg_core::bulk::Landau) -> &'static str {
    if l.a < l.transition_a() {
        "below-NI"
    } else if l.a <= l.superheating_a() {
        "metastable"
    } else {
        "isotropic-only"
    }
}

pub fn phase_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let m = cfg.material()?;
    let mut csv = String::from(PHASE_HEADER);
    csv.push('\n');
    for t in cfg.temperatures()? {
        let l = m.landau(t);
        let r = ldg_core::bulk::stationary_scalars(&m, t);
        writeln!(
            csv,
            "{t},{},{},{},{},{},{}",
            l.a,
            cell(r.s_plus),
            cell(r.s_minus),
            cell(r.f_at_plus),
            cell(r.f_at_minus),
            phase_regime(&l)
        )
        .expect("writing to a string");
    }
    Ok(csv)
}

pub fn phase(cfg: &RunConfig, out: &Output) -> Result<ExitStatus, CliError> {
    let csv = phase_csv(cfg)?;
    out.write("phase.csv", &csv)?;
    print!("{csv}");
    Ok(ExitStatus::Ok)
}

pub fn triangles(cfg: &RunConfig, out: &Output) -> Result<ExitStatus, CliError> {
    let m = cfg.material()?;
    let reports = cfg.temperatures()?.into_iter().map(|t| triangle_report(&m, t)).collect::<Result<Vec<_>, _>>()?;
    let json = to_json(&reports);
    out.write("triangles.json", &json)?;
    print!("{json}");
    Ok(ExitStatus::Ok)
}

fn audit_status(audit: &BoundAudit) -> ExitStatus {
    match (audit.satisfied, audit.hypothesis_met) {
        (true, _) => ExitStatus::Ok,
        (false, true) => ExitStatus::AuditFailed,
        (false, false) => ExitStatus::HypothesisNotMet,
    }
}

#[derive(Serialize)]
struct MinimizeSummary<'a> {
    report: &'a ldg_core::solver::SolveReport,
    audit: &'a BoundAudit,
}

pub fn minimize(cfg: &RunConfig, over: &Overrides, out: &Output) -> Result<ExitStatus, CliError> {
    let m = cfg.material()?;
    let t = cfg.single_temperature()?;
    let functional = cfg.functional(&m, t)?;
    let grid = cfg.grid()?;
    let boundary = cfg.boundary_field(grid)?;
    let mut solver = cfg.solver(functional, &m)?;
    if let Some(seed) = over.seed {
        solver.seed = seed;
    }
    if let Some(slack) = over.slack {
        solver.slack = slack;
    }
    solver.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let (field, report) = minimize_multistart(&boundary, &solver).map_err(|e| match e {
        SolverError::Divergence { .. } => CliError::Divergence(e),
        other => CliError::Usage(other.to_string()),
    })?;
    let audit = audit_field(&field, &solver.functional, solver.slack)?;

    let dir = out.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Output::write_to(&dir, "field.ldgq1", &write_field_string(&field))?;
    Output::write_to(&dir, "report.json", &to_json(&report))?;
    Output::write_to(&dir, "audit.json", &to_json(&audit))?;
    print!("{}", to_json(&MinimizeSummary { report: &report, audit: &audit }));

    Ok(if !report.converged { ExitStatus::NotConverged } else { audit_status(&audit) })
}

pub fn verify(path: &Path, cfg: &RunConfig, over: &Overrides, out: &Output) -> Result<ExitStatus, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let field = read_field(std::io::BufReader::new(file)).map_err(|e| match e {
        ldg_core::solver::io::FieldIoError::Io(io) => CliError::io(path, io),
        other => CliError::Input { path: path.display().to_string(), message: other.to_string() },
    })?;
    let m = cfg.material()?;
    let t = cfg.single_temperature()?;
    let functional = cfg.functional(&m, t)?;
    let slack = over.slack.or(cfg.solver.as_ref().and_then(|s| s.slack)).unwrap_or(1e-3);
    if !(slack.is_finite() && slack >= 0.0) {
        return Err(CliError::Usage(format!("slack must be nonnegative, got {slack}")));
    }
    let audit = audit_field(&field, &functional, slack)?;
    let json = to_json(&audit);
    out.write("audit.json", &json)?;
    print!("{json}");
    Ok(audit_status(&audit))
}

/// Reads `theta,phi,value` rows in radians. A leading header row, blank
/// lines and `#` comments are skipped.
pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_samples(&text).map_err(|message| CliError::Input { path: path.display().to_string(), message })
}

pub fn parse_samples(text: &str) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(format!("line {line}: expected 3 fields, found {}", record.len()));
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let v = match parsed {
            Ok(v) => v,
            Err(_) if n == 0 => continue,
            Err(_) => return Err(format!("line {line}: expected three numbers")),
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format!("line {line}: non-finite value"));
        }
        if v[2] < 0.0 {
            return Err(format!("line {line}: negative density {}", v[2]));
        }
        samples.push((v[0], v[1], v[2]));
    }
    if samples.is_empty() {
        return Err("no samples".into());
    }
    Ok(samples)
}

pub fn moments(path: &Path, level: usize, out: &Output) -> Result<ExitStatus, CliError> {
    let samples = read_samples(path)?;
    let input = |e: ldg_core::moments::MomentsError| CliError::Input { path: path.display().to_string(), message: e.to_string() };
    let quad = build_quadrature(level).map_err(|e| CliError::Usage(e.to_string()))?;
    let psi = Distribution::from_samples(&quad, &samples).map_err(input)?;
    let q = q_from_psi(&psi, &quad).map_err(input)?;
    let json = to_json(&summarize(&q));
    out.write("moments.json", &json)?;
    print!("{json}");
    Ok(ExitStatus::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_skip_header_and_comments() {
        let s = parse_samples("theta,phi,value\n# note\n0.1, 0.2, 3\n\n1,2,0\n").unwrap();
        assert_eq!(s, vec![(0.1, 0.2, 3.0), (1.0, 2.0, 0.0)]);
    }

    #[test]
    fn samples_reject_negative_with_line() {
        let err = parse_samples("0,0,1\n0,1,-2\n").unwrap_err();
        assert!(err.contains("line 2") && err.contains("negative"), "{err}");
    }

    #[test]
    fn samples_reject_garbage_after_first_row() {
        assert!(parse_samples("0,0,1\na,b,c\n").is_err());
        assert!(parse_samples("0,0\n").is_err());
        assert!(parse_samples("theta,phi,value\n").is_err());
    }

    #[test]
    fn phase_rows_and_blank_cells() {
        let cfg = RunConfig::parse("[temperature]\nstart = 45.0\nstop = 50.0\nstep = 5.0\n").unwrap();
        let csv = phase_csv(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], PHASE_HEADER);
        assert_eq!(lines.len(), 3);
        let row45: Vec<&str> = lines[1].split(',').collect();
        let s: f64 = row45[2].parse().unwrap();
        assert!((s - 0.9143).abs() < 1e-3, "{s}");
        assert_eq!(row45[6], "below-NI");
        let row50: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(&row50[2..6], &["", "", "", ""]);
        assert_eq!(row50[6], "isotropic-only");
    }
}
