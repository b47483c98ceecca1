//! Command-line surface: build machines, emit matrices and fidelity tables,
//! run the verification suite, all with reproducible seeded randomness.
//!
//! Reports serialize to JSON (raw f64, bitwise round-trip) or CSV (values at
//! 15 significant digits). Exit codes: 0 success, 1 verification failure,
//! 2 usage error.

mod verify;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cv::{self, covariance_residual_cv, optimal_chi, parse_seed_spec, FockSpace};
use crate::dilation::{build_unitary, golden_ancilla_d2, golden_unitary_d2};
use crate::linalg::{c, Matrix};
use crate::transpose::{
    anticlone_equivalence_check, optimal_map, OptimalTransposeMachine,
};
use crate::{Error, Result, DEFAULT_TOL};

pub use verify::run_all_checks;

/// Displacement amplitude probed by the `cv` covariance diagnostic.
pub const COVARIANCE_PROBE_ALPHA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Finite,
    Dilate,
    Cv,
    Verify,
}

impl std::fmt::Display for CommandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CommandKind::Finite => "finite",
            CommandKind::Dilate => "dilate",
            CommandKind::Cv => "cv",
            CommandKind::Verify => "verify",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitKind {
    Choi,
    Kraus,
    Isometry,
    Unitary,
    Ancilla,
    Chi,
}

/// Everything a run depends on; identical configs produce identical reports
/// up to wall-clock time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dim: Option<usize>,
    pub cutoff: usize,
    pub seed_spec: String,
    pub tolerance: f64,
    pub samples: usize,
    pub rng_seed: u64,
    pub output_format: OutputFormat,
    pub output_path: Option<String>,
    pub emit: Vec<EmitKind>,
    pub strict: bool,
}

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            dim: None,
            cutoff: 20,
            seed_spec: "vacuum".into(),
            tolerance: DEFAULT_TOL,
            samples: 50,
            rng_seed: 0,
            output_format: OutputFormat::Json,
            output_path: None,
            emit: Vec::new(),
            strict: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Usage("tolerance must be positive".into()));
        }
        if self.samples < 1 {
            return Err(Error::Usage("samples must be at least 1".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::Usage("cutoff must be at least 2".into()));
        }
        match self.command {
            CommandKind::Finite if self.dim.unwrap_or(0) < 1 => {
                return Err(Error::Usage("finite requires --dim >= 1".into()));
            }
            CommandKind::Dilate if self.dim.unwrap_or(0) < 2 => {
                return Err(Error::Usage("dilate requires --dim >= 2".into()));
            }
            _ => {}
        }
        let allowed: &[EmitKind] = match self.command {
            CommandKind::Finite => &[EmitKind::Choi, EmitKind::Kraus, EmitKind::Isometry],
            CommandKind::Dilate => &[EmitKind::Unitary, EmitKind::Ancilla],
            CommandKind::Cv => &[EmitKind::Chi],
            CommandKind::Verify => &[],
        };
        for kind in &self.emit {
            if !allowed.contains(kind) {
                return Err(Error::Usage(format!(
                    "--emit {kind:?} is not available for `{}`",
                    self.command
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

/// Outcome of one CLI run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub fidelities: Vec<NamedValue>,
    pub diagnostics: Vec<NamedValue>,
    pub checks: Vec<CheckResult>,
    pub flags: BTreeMap<String, bool>,
    pub warnings: Vec<String>,
    pub matrices: BTreeMap<String, Matrix>,
    pub wall_clock_ms: u64,
}

impl Report {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            command: cfg.command.to_string(),
            config: cfg.clone(),
            fidelities: Vec::new(),
            diagnostics: Vec::new(),
            checks: Vec::new(),
            flags: BTreeMap::new(),
            warnings: Vec::new(),
            matrices: BTreeMap::new(),
            wall_clock_ms: 0,
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }

    fn push_check(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            residual,
            pass: residual <= tolerance,
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV rows `section,name,...`; numbers carry 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("section,name,value,pass\n");
        for f in &self.fidelities {
            out.push_str(&format!("fidelity,{},{},\n", f.name, sig15(f.value)));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("diagnostic,{},{},\n", d.name, sig15(d.value)));
        }
        for c in &self.checks {
            out.push_str(&format!("check,{},{},{}\n", c.name, sig15(c.residual), c.pass));
        }
        for (name, value) in &self.flags {
            out.push_str(&format!("flag,{name},{value},\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning,{},,\n", w.replace(',', ";")));
        }
        for (name, m) in &self.matrices {
            out.push_str(&format!("matrix,{name},rows={};cols={},\n", m.rows(), m.cols()));
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let z = m.get(i, j);
                    out.push_str(&format!(
                        "entry,{name},{i};{j};{};{},\n",
                        sig15(z.re),
                        sig15(z.im)
                    ));
                }
            }
        }
        out.push_str(&format!("meta,wall_clock_ms,{},\n", self.wall_clock_ms));
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Run one configured command and produce its report.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.command {
        CommandKind::Finite => run_finite(cfg)?,
        CommandKind::Dilate => run_dilate(cfg)?,
        CommandKind::Cv => run_cv(cfg)?,
        CommandKind::Verify => run_verify(cfg)?,
    };
    report.wall_clock_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Exit code the report maps to under the CLI contract.
pub fn exit_code(cfg: &RunConfig, report: &Report) -> i32 {
    if !report.all_checks_pass() {
        return 1;
    }
    if cfg.strict && !report.warnings.is_empty() {
        return 1;
    }
    0
}

fn run_finite(cfg: &RunConfig) -> Result<Report> {
    let d = cfg.dim.expect("validated");
    let mut report = Report::new(cfg);
    let machine = OptimalTransposeMachine::new(d);
    report.fidelities.push(NamedValue {
        name: "optimal_transpose_fidelity".into(),
        value: machine.fidelity(),
    });
    report.fidelities.push(NamedValue {
        name: "clone_fidelity".into(),
        value: (d as f64 + 3.0) / (2.0 * (d as f64 + 1.0)),
    });
    report.push_check(
        "kraus_completeness",
        machine.kraus().completeness_residual(),
        cfg.tolerance,
    );
    let min = machine.choi().min_eigenvalue()?;
    report.push_check("choi_cp", (-min).max(0.0), cfg.tolerance);
    report.push_check("choi_tp", machine.choi().tp_residual(), cfg.tolerance);
    report.push_check(
        "stinespring_isometry",
        machine.isometry().isometry_residual(),
        cfg.tolerance,
    );
    report.push_check(
        "anticlone_equivalence",
        anticlone_equivalence_check(d, cfg.samples, cfg.rng_seed)?,
        cfg.tolerance,
    );
    for kind in &cfg.emit {
        match kind {
            EmitKind::Choi => {
                report
                    .matrices
                    .insert("choi".into(), machine.choi().matrix().clone());
            }
            EmitKind::Kraus => {
                for (index, op) in machine.kraus().operators().iter().enumerate() {
                    let (m, n) = (index / d, index % d);
                    report.matrices.insert(format!("kraus_{m}_{n}"), op.clone());
                }
            }
            EmitKind::Isometry => {
                report
                    .matrices
                    .insert("isometry".into(), machine.isometry().matrix().clone());
            }
            _ => unreachable!("validated"),
        }
    }
    Ok(report)
}

fn run_dilate(cfg: &RunConfig) -> Result<Report> {
    let d = cfg.dim.expect("validated");
    let mut report = Report::new(cfg);
    let dilation = build_unitary(d)?;
    report.fidelities.push(NamedValue {
        name: "optimal_transpose_fidelity".into(),
        value: crate::transpose::optimal_fidelity(d),
    });
    report.push_check("unitarity", dilation.unitarity_residual(), cfg.tolerance);
    report.push_check(
        "ancilla_normalization",
        (dilation.ancilla().vector_norm() - 1.0).abs(),
        cfg.tolerance,
    );
    let mut worst = 0.0f64;
    for s in 0..cfg.samples.min(10) as u64 {
        let rho =
            crate::linalg::haar_random_state_with(d, &mut crate::linalg::stream_rng(cfg.rng_seed, s));
        let via_u = dilation.transpose_state(&rho)?;
        worst = worst.max(via_u.max_abs_diff(&optimal_map(d, &rho)?));
    }
    report.push_check("transpose_extraction", worst, cfg.tolerance);
    if d == 2 {
        let exact = dilation.unitary() == &golden_unitary_d2();
        report.flags.insert("golden_matrix_match".into(), exact);
        report.push_check(
            "golden_ancilla",
            dilation.ancilla().max_abs_diff(&golden_ancilla_d2()),
            cfg.tolerance,
        );
    }
    for kind in &cfg.emit {
        match kind {
            EmitKind::Unitary => {
                report.matrices.insert("unitary".into(), dilation.unitary().clone());
            }
            EmitKind::Ancilla => {
                report.matrices.insert("ancilla".into(), dilation.ancilla().clone());
            }
            _ => unreachable!("validated"),
        }
    }
    Ok(report)
}

fn run_cv(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.cutoff;
    let mut report = Report::new(cfg);
    let seed = parse_seed_spec(&cfg.seed_spec, n)?;
    let space = FockSpace::new(n)?;
    if seed.leakage() > space.tol_leak {
        report.warnings.push(format!(
            "seed leakage {:.3e} exceeds tol_leak {:.3e}; raise the cutoff",
            seed.leakage(),
            space.tol_leak
        ));
    }
    let map = optimal_chi(&seed, n)?;
    if map.is_degenerate(cfg.tolerance) {
        report.warnings.push(format!(
            "top eigenvalue is degenerate (gap {:.3e}); chi chosen by deterministic tie-break",
            map.eigenvalue_gap()
        ));
    }
    report.fidelities.push(NamedValue { name: "fidelity".into(), value: map.fidelity() });
    report
        .diagnostics
        .push(NamedValue { name: "lambda_max".into(), value: map.lambda_max() });
    report.diagnostics.push(NamedValue {
        name: "eigenvalue_gap".into(),
        value: map.eigenvalue_gap(),
    });
    report
        .diagnostics
        .push(NamedValue { name: "seed_leakage".into(), value: seed.leakage() });
    report.diagnostics.push(NamedValue {
        name: "covariance_residual_alpha_0.3".into(),
        value: covariance_residual_cv(&map, &seed, c(COVARIANCE_PROBE_ALPHA, 0.0))?,
    });
    report.diagnostics.push(NamedValue {
        name: "choi_tp_residual_level0".into(),
        value: cv::choi_tp_residual_block(&map, 1),
    });
    let fidelity = cv::cv_fidelity(&seed, &map)?;
    report.push_check(
        "rayleigh_identity",
        (fidelity - map.lambda_max() / 2.0).abs(),
        cfg.tolerance,
    );
    report.push_check(
        "chi_normalization",
        (map.chi().vector_norm() - 1.0).abs(),
        cfg.tolerance,
    );
    let bs = cv::beam_splitter(n);
    report.push_check(
        "beam_splitter_unitarity",
        bs.adjoint().mul(&bs).diff_norm(&Matrix::identity(n * n)),
        cfg.tolerance,
    );
    for kind in &cfg.emit {
        match kind {
            EmitKind::Chi => {
                report.matrices.insert("chi".into(), map.chi().clone());
            }
            _ => unreachable!("validated"),
        }
    }
    Ok(report)
}

fn run_verify(cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    for d in 1..=6usize {
        report.fidelities.push(NamedValue {
            name: format!("optimal_transpose_fidelity_d{d}"),
            value: crate::transpose::optimal_fidelity(d),
        });
    }
    report.checks = run_all_checks(cfg);
    Ok(report)
}

/// Cap the rayon pool from `ANTIMAP_THREADS`; call once at startup. Results
/// are identical at any thread count, the cap only bounds resource use.
pub fn init_thread_pool() {
    if let Ok(value) = std::env::var("ANTIMAP_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
            _ => eprintln!("warning: ignoring invalid ANTIMAP_THREADS value `{value}`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: CommandKind) -> RunConfig {
        let mut cfg = RunConfig::defaults(command);
        cfg.samples = 10;
        cfg
    }

    #[test]
    fn finite_reports_the_closed_form_fidelity() {
        let mut config = cfg(CommandKind::Finite);
        config.dim = Some(2);
        let report = execute(&config).unwrap();
        let f = &report.fidelities[0];
        assert_eq!(f.name, "optimal_transpose_fidelity");
        assert!((f.value - 2.0 / 3.0).abs() < 1e-15);
        assert!(report.all_checks_pass());
        assert_eq!(exit_code(&config, &report), 0);
    }

    #[test]
    fn finite_scalar_case() {
        let mut config = cfg(CommandKind::Finite);
        config.dim = Some(1);
        let report = execute(&config).unwrap();
        assert_eq!(report.fidelities[0].value, 1.0);
        assert!(report.all_checks_pass());
    }

    #[test]
    fn finite_emits_d_squared_kraus_operators() {
        let mut config = cfg(CommandKind::Finite);
        config.dim = Some(4);
        config.emit = vec![EmitKind::Kraus];
        let report = execute(&config).unwrap();
        let kraus: Vec<_> = report.matrices.keys().filter(|k| k.starts_with("kraus_")).collect();
        assert_eq!(kraus.len(), 16);
        let completeness = report.checks.iter().find(|c| c.name == "kraus_completeness").unwrap();
        assert!(completeness.residual <= 1e-12);
    }

    #[test]
    fn finite_requires_a_dimension() {
        let config = cfg(CommandKind::Finite);
        assert!(matches!(execute(&config), Err(Error::Usage(_))));
    }

    #[test]
    fn dilate_golden_flag_for_qubits() {
        let mut config = cfg(CommandKind::Dilate);
        config.dim = Some(2);
        config.emit = vec![EmitKind::Ancilla];
        let report = execute(&config).unwrap();
        assert_eq!(report.flags.get("golden_matrix_match"), Some(&true));
        let phi = report.matrices.get("ancilla").unwrap();
        assert!(phi.max_abs_diff(&golden_ancilla_d2()) < 1e-15);
        assert!(report.all_checks_pass());
    }

    #[test]
    fn dilate_unitarity_for_qutrits() {
        let mut config = cfg(CommandKind::Dilate);
        config.dim = Some(3);
        let report = execute(&config).unwrap();
        let unitarity = report.checks.iter().find(|c| c.name == "unitarity").unwrap();
        assert!(unitarity.residual <= 1e-12);
    }

    #[test]
    fn dilate_rejects_scalars() {
        let mut config = cfg(CommandKind::Dilate);
        config.dim = Some(1);
        assert!(matches!(execute(&config), Err(Error::Usage(_))));
    }

    #[test]
    fn cv_vacuum_fidelity_is_one_half() {
        let mut config = cfg(CommandKind::Cv);
        config.cutoff = 20;
        let report = execute(&config).unwrap();
        assert!((report.fidelities[0].value - 0.5).abs() < 1e-8);
        assert!(report.all_checks_pass());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn cv_coherent_seed_close_to_one_half() {
        let mut config = cfg(CommandKind::Cv);
        config.cutoff = 20;
        config.seed_spec = "coherent:0.4,0".into();
        config.emit = vec![EmitKind::Chi];
        let report = execute(&config).unwrap();
        assert!((report.fidelities[0].value - 0.5).abs() < 1e-3);
        assert_eq!(report.matrices.get("chi").unwrap().rows(), 20);
    }

    #[test]
    fn cv_squeezed_seed_satisfies_the_rayleigh_identity() {
        let mut config = cfg(CommandKind::Cv);
        config.cutoff = 30;
        config.seed_spec = "squeezed:0.2".into();
        let report = execute(&config).unwrap();
        let rayleigh = report.checks.iter().find(|c| c.name == "rayleigh_identity").unwrap();
        assert!(rayleigh.residual <= 1e-10);
    }

    #[test]
    fn cv_rejects_bad_seed_specs() {
        let mut config = cfg(CommandKind::Cv);
        config.seed_spec = "thermal:3".into();
        assert!(matches!(execute(&config), Err(Error::SeedSpec(_))));
    }

    #[test]
    fn cv_strict_turns_leakage_into_failure() {
        let mut config = cfg(CommandKind::Cv);
        config.cutoff = 8;
        config.seed_spec = "coherent:2.0,0".into();
        let report = execute(&config).unwrap();
        assert!(!report.warnings.is_empty());
        assert_eq!(exit_code(&config, &report), 0);
        config.strict = true;
        let report = execute(&config).unwrap();
        assert_eq!(exit_code(&config, &report), 1);
    }

    #[test]
    fn emit_kind_validation() {
        let mut config = cfg(CommandKind::Cv);
        config.emit = vec![EmitKind::Unitary];
        assert!(matches!(execute(&config), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_tolerance_is_a_usage_error() {
        let mut config = cfg(CommandKind::Verify);
        config.tolerance = 0.0;
        assert!(matches!(execute(&config), Err(Error::Usage(_))));
    }

    #[test]
    fn json_report_round_trips() {
        let mut config = cfg(CommandKind::Finite);
        config.dim = Some(2);
        config.emit = vec![EmitKind::Choi];
        let report = execute(&config).unwrap();
        let json = report.to_json();
        let parsed: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.matrices.get("choi"), report.matrices.get("choi"));
        assert_eq!(parsed.checks, report.checks);
    }

    #[test]
    fn csv_report_has_15_digit_values() {
        let mut config = cfg(CommandKind::Finite);
        config.dim = Some(2);
        config.output_format = OutputFormat::Csv;
        let report = execute(&config).unwrap();
        let csv = report.to_csv();
        assert!(csv.contains("fidelity,optimal_transpose_fidelity,6.66666666666667e-1"));
    }
}
