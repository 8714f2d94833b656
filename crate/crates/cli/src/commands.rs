use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ridgepca::monte_carlo::empirical_risk_prepared;
use ridgepca::risk::lambda_sweep;
use ridgepca::{
    inflation_certificate, scenario_grid, Method, NoiseModel, PreparedDesign, RotatedProblem,
    SweepRow,
};
use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::plot::{render_svg, PlotError};
use crate::table::{sweep_csv, verify_csv, EmpiricalColumns};
use crate::{ExitStatus, Options};

/// Default seed for the built-in scenario battery.
pub const BATTERY_SEED: u64 = 20_240_601;
/// Monte Carlo agreement band, in standard errors.
pub const AGREEMENT_SIGMAS: f64 = 4.0;
/// Relative slack added to the band so that noiseless runs (standard error 0)
/// tolerate rounding between the simulated and closed-form evaluations.
pub const AGREEMENT_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot render plot: {0}")]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Model(#[from] ridgepca::Error),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Write { .. } => ExitStatus::IoError,
            CliError::Plot(_) => ExitStatus::IoError,
            _ => ExitStatus::ConfigError,
        }
    }
}

fn load(path: &Path, opts: &Options) -> Result<Experiment, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = opts.seed {
        cfg.override_seed(seed);
    }
    Ok(cfg.build()?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to `path`, or to stdout when there is no path.
fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => std::io::stdout()
            .lock()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn emit_table(exp: &Experiment, opts: &Options, csv: &str) -> Result<(), CliError> {
    let out = opts.out.as_deref().or(exp.output.csv.as_deref());
    emit(out, csv)?;
    if let Some(plot) = opts.plot.as_deref().or(exp.output.plot.as_deref()) {
        write_file(plot, &render_svg(csv)?)?;
    }
    Ok(())
}

fn analytic_rows(exp: &Experiment) -> Result<(PreparedDesign, Vec<SweepRow>), CliError> {
    let design = PreparedDesign::new(exp.instance.clone())?;
    let rotated = design.rotated_problem()?;
    let rows = lambda_sweep(&rotated, &exp.lambdas)?.rows;
    Ok((design, rows))
}

/// `sweep <config>`: analytic risk table.
pub fn sweep(config: &Path, opts: &Options) -> Result<ExitStatus, CliError> {
    let exp = load(config, opts)?;
    let (_, rows) = analytic_rows(&exp)?;
    emit_table(&exp, opts, &sweep_csv(&rows))?;
    Ok(ExitStatus::Success)
}

/// `verify <config>`: Monte Carlo estimates against the closed forms.
pub fn verify(config: &Path, opts: &Options) -> Result<ExitStatus, CliError> {
    verify_with_oracle(config, opts, |row| (row.ridge_risk, row.pca_risk))
}

fn within_band(empirical: f64, se: f64, analytic: f64) -> bool {
    (empirical - analytic).abs() <= AGREEMENT_SIGMAS * se + AGREEMENT_FLOOR * analytic.abs()
}

/// [`verify`] with the analytic reference replaced by `oracle`, which maps a
/// sweep row to the expected `(ridge, pca)` risks.
pub fn verify_with_oracle<F>(config: &Path, opts: &Options, oracle: F) -> Result<ExitStatus, CliError>
where
    F: Fn(&SweepRow) -> (f64, f64),
{
    let exp = load(config, opts)?;
    let mc = match &exp.monte_carlo {
        Some(mc) if mc.enabled => mc.clone(),
        _ => {
            return Err(CliError::Usage(
                "verify needs an enabled \"monte_carlo\" block in the config".into(),
            ))
        }
    };
    let (design, rows) = analytic_rows(&exp)?;
    let noise = NoiseModel::for_instance(mc.noise.into(), design.instance());
    let mut out = Vec::with_capacity(rows.len());
    let mut all_agree = true;
    for row in rows {
        let ridge = empirical_risk_prepared(&design, Method::Ridge, row.lambda, &noise, mc.trials, mc.seed)?;
        let pca = empirical_risk_prepared(&design, Method::PcaOls, row.lambda, &noise, mc.trials, mc.seed)?;
        let (ridge_ref, pca_ref) = oracle(&row);
        let agrees = within_band(ridge.mean, ridge.std_error, ridge_ref)
            && within_band(pca.mean, pca.std_error, pca_ref);
        all_agree &= agrees;
        out.push((
            row,
            EmpiricalColumns {
                ridge: ridge.mean,
                ridge_se: ridge.std_error,
                pca: pca.mean,
                pca_se: pca.std_error,
                agrees,
            },
        ));
    }
    emit_table(&exp, opts, &verify_csv(&out))?;
    Ok(if all_agree {
        ExitStatus::Success
    } else {
        ExitStatus::Failure
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worst {
    pub value: f64,
    pub lambda: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub pairs: usize,
    pub violations: usize,
    pub worst_ratio: Worst,
    pub worst_term_ratio: Worst,
}

impl CertifyReport {
    fn new() -> Self {
        let empty = Worst {
            value: f64::NEG_INFINITY,
            lambda: f64::NAN,
            source: String::new(),
        };
        Self {
            pairs: 0,
            violations: 0,
            worst_ratio: empty.clone(),
            worst_term_ratio: empty,
        }
    }

    pub fn add(&mut self, problem: &RotatedProblem, lambdas: &[f64], source: &str) -> Result<(), CliError> {
        for &lambda in lambdas {
            let cert = inflation_certificate(problem, lambda)?;
            self.pairs += 1;
            if !cert.bound_holds {
                self.violations += 1;
            }
            // NaN never compares greater, so treat it as a violation above
            if cert.overall_ratio > self.worst_ratio.value || cert.overall_ratio.is_nan() {
                self.worst_ratio = Worst {
                    value: cert.overall_ratio,
                    lambda,
                    source: source.to_string(),
                };
            }
            if cert.max_term_ratio > self.worst_term_ratio.value || cert.max_term_ratio.is_nan() {
                self.worst_term_ratio = Worst {
                    value: cert.max_term_ratio,
                    lambda,
                    source: source.to_string(),
                };
            }
        }
        Ok(())
    }

    pub fn bound_holds(&self) -> bool {
        self.violations == 0 && self.pairs > 0
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "certified pairs: {}", self.pairs);
        let _ = writeln!(
            s,
            "worst overall ratio: {} at lambda = {} ({})",
            crate::table::format_number(self.worst_ratio.value),
            crate::table::format_number(self.worst_ratio.lambda),
            self.worst_ratio.source
        );
        let _ = writeln!(
            s,
            "worst per-term ratio: {} at lambda = {} ({})",
            crate::table::format_number(self.worst_term_ratio.value),
            crate::table::format_number(self.worst_term_ratio.lambda),
            self.worst_term_ratio.source
        );
        let _ = writeln!(
            s,
            "bound (ratio <= 4): {}",
            if self.bound_holds() {
                "holds".to_string()
            } else {
                format!("VIOLATED in {} pair(s)", self.violations)
            }
        );
        s
    }
}

/// `certify [<config>] [--battery]`.
pub fn certify(config: Option<&Path>, battery: bool, opts: &Options) -> Result<ExitStatus, CliError> {
    if config.is_none() && !battery {
        return Err(CliError::Usage(
            "certify needs a config path, --battery, or both".into(),
        ));
    }
    let mut report = CertifyReport::new();
    if let Some(path) = config {
        let exp = load(path, opts)?;
        let rotated = RotatedProblem::from_instance(&exp.instance)?;
        report.add(&rotated, &exp.lambdas, &path.display().to_string())?;
    }
    if battery {
        for scenario in scenario_grid(opts.seed.unwrap_or(BATTERY_SEED))? {
            let rotated = RotatedProblem::from_instance(&scenario.instance)?;
            report.add(&rotated, &scenario.lambdas, &scenario.name)?;
        }
    }
    emit(opts.out.as_deref(), &report.render())?;
    Ok(if report.bound_holds() {
        ExitStatus::Success
    } else {
        ExitStatus::Failure
    })
}
