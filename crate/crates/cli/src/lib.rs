//! Argument handling and report rendering for the `birat` binary.

use std::fmt::Write as _;

use birat_core::automap::{
    dynamical_degree_estimate, elementary_builder, henon_builder, quadratic_henon,
    transposed_henon_builder, AffineAutomorphism, DEFAULT_TERM_BUDGET,
};
use birat_core::blowup::{canonical_resolution, ResolutionConfig, DEFAULT_STEP_BUDGET};
use birat_core::picard::{report_for_resolution, IndexConfig, IndexReport};
use birat_core::scalar::{format_scalar, parse_scalar, rat};
use birat_core::{parse_poly, Error, Scalar, Vars};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "birat",
    version,
    about = "Canonical resolutions and divisor indices of plane polynomial automorphisms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the canonical resolution and print the blow-up ledger.
    Resolve(RunArgs),
    /// Compute the intersection identities and index bounds.
    Indices(RunArgs),
    /// Recompute the reference table of degrees and effective indices.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builder {
    /// (y, y^d + b + a*x)
    Henon,
    /// (y + a*x^d, x)
    Transposed,
    /// (x, y + a*x^d)
    Elementary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of iterates used for the degree sequence.
    #[arg(long, default_value_t = 5)]
    pub iterates: usize,
    /// Seed for the random lines used to read multiplicities.
    #[arg(long, env = "BIRAT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Maximum number of blow-ups.
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub step_budget: usize,
    /// Maximum number of terms in an iterate.
    #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
    pub term_budget: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_enum, conflicts_with = "map")]
    pub builder: Option<Builder>,
    /// Rational parameter `a`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub a: String,
    /// Rational parameter `b` (Hénon maps only).
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub b: String,
    /// Degree of the builder map.
    #[arg(long)]
    pub d: Option<u32>,
    /// Explicit map and inverse as "P1; P2; Q1; Q2".
    #[arg(long)]
    pub map: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub b: String,
    #[command(flatten)]
    pub common: Common,
}

/// Outcome of a command: text for stdout and the process exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Exit code for a pipeline error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotInverse { .. } => 3,
        Error::BudgetExceeded { .. } | Error::StepBudgetExceeded { .. } => 4,
        Error::NonRationalIndeterminacy { .. }
        | Error::DegreeTooLow { .. }
        | Error::Syntax { .. }
        | Error::UnknownVariable { .. }
        | Error::VariableMismatch { .. }
        | Error::ConstantMap
        | Error::DegenerateParameter(_)
        | Error::UniquenessViolated { .. }
        | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Syntax { .. } => "Syntax",
        Error::UnknownVariable { .. } => "UnknownVariable",
        Error::VariableMismatch { .. } => "VariableMismatch",
        Error::DegreeTooSmall { .. } => "DegreeTooSmall",
        Error::ExactnessViolation(_) => "ExactnessViolation",
        Error::NotInverse { .. } => "NotInverse",
        Error::ConstantMap => "ConstantMap",
        Error::DegenerateParameter(_) => "DegenerateParameter",
        Error::BudgetExceeded { .. } => "BudgetExceeded",
        Error::NonRationalIndeterminacy { .. } => "NonRationalIndeterminacy",
        Error::UniquenessViolated { .. } => "UniquenessViolated",
        Error::DegreeTooLow { .. } => "DegreeTooLow",
        Error::DuplicateCenter(_) => "DuplicateCenter",
        Error::StepBudgetExceeded { .. } => "StepBudgetExceeded",
        Error::GenericityFailure(_) => "GenericityFailure",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::InfeasibleAtZero => "InfeasibleAtZero",
        Error::HyperplaneCoefficient(_) => "HyperplaneCoefficient",
        Error::InvalidArgument(_) => "InvalidArgument",
    }
}

/// Renders an error for stderr in the requested format.
pub fn render_error(err: &Error, format: Format) -> String {
    match format {
        Format::Text => format!("error [{}]: {err}", error_kind(err)),
        Format::Json => serde_json::json!({
            "error": error_kind(err),
            "message": err.to_string(),
            "exit_code": exit_code(err),
        })
        .to_string(),
    }
}

impl Command {
    pub fn format(&self) -> Format {
        match self {
            Command::Resolve(r) | Command::Indices(r) => r.common.format,
            Command::Table(t) => t.common.format,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Resolve(args) => cmd_resolve(args),
        Command::Indices(args) => cmd_indices(args),
        Command::Table(args) => cmd_table(args),
    }
}

pub fn build_map(args: &RunArgs) -> Result<AffineAutomorphism, Error> {
    if let Some(text) = &args.map {
        return AffineAutomorphism::parse(text);
    }
    let a = parse_scalar(&args.a)?;
    let b = parse_scalar(&args.b)?;
    match args.builder.unwrap_or(Builder::Henon) {
        Builder::Henon => match args.d.unwrap_or(2) {
            2 => quadratic_henon(&a, &b),
            d => {
                let q = parse_poly(&format!("y^{d} + {}", format_scalar(&b)), &Vars::xy())?;
                henon_builder(&q, &a)
            }
        },
        Builder::Transposed => transposed_henon_builder(args.d.unwrap_or(3), &a),
        Builder::Elementary => elementary_builder(args.d.unwrap_or(2), &a),
    }
}

fn resolution_config(common: &Common) -> ResolutionConfig {
    ResolutionConfig {
        step_budget: common.step_budget,
        seed: common.seed,
    }
}

fn index_config(common: &Common) -> IndexConfig {
    IndexConfig {
        resolution: resolution_config(common),
        iterates: common.iterates,
        term_budget: common.term_budget,
        ..IndexConfig::default()
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn cmd_resolve(args: &RunArgs) -> Result<Outcome, Error> {
    let phi = build_map(args)?;
    let res = canonical_resolution(&phi, &resolution_config(&args.common))?;
    let stdout = match args.common.format {
        Format::Json => to_json(&serde_json::json!({
            "map": phi.to_map_string(),
            "degree": phi.degree(),
            "resolution": res,
        })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "map        {}", phi.to_map_string());
            let _ = writeln!(s, "degree     {}", phi.degree());
            let _ = writeln!(s, "regular    {}", res.regular);
            let _ = writeln!(s, "n, m, i0   {}, {}, {}", res.n, res.m, res.i0);
            if res.swapped {
                let _ = writeln!(s, "families   taken from the inverse map so that n <= m");
            }
            let _ = writeln!(s, "Z(phi)     {}", res.proper_points.0);
            let _ = writeln!(s, "Z(phi^-1)  {}", res.proper_points.1);
            let _ = writeln!(s, "blow-ups");
            let _ = writeln!(s, "  label  parent  on H   mult phi  mult phi^-1  center");
            for r in &res.records {
                let parent = r.parent_label.map_or("-".to_string(), |l| l.to_string());
                let _ = writeln!(
                    s,
                    "  {:<6} {:<7} {:<6} {:<9} {:<12} {}",
                    r.label.to_string(),
                    parent,
                    r.on_h,
                    r.mult_psi,
                    r.mult_psi_prime,
                    r.center
                );
            }
            s
        }
    };
    Ok(Outcome { stdout, code: 0 })
}

fn index_report_for(phi: &AffineAutomorphism, common: &Common) -> Result<IndexReport, Error> {
    let config = index_config(common);
    let estimate = dynamical_degree_estimate(phi, config.iterates, config.term_budget)?;
    let res = canonical_resolution(phi, &config.resolution)?;
    report_for_resolution(phi, &res, &estimate, &config)
}

pub fn cmd_indices(args: &RunArgs) -> Result<Outcome, Error> {
    let phi = build_map(args)?;
    let report = index_report_for(&phi, &args.common)?;
    let stdout = match args.common.format {
        Format::Json => to_json(&report),
        Format::Text => render_report(&report),
    };
    Ok(Outcome { stdout, code: 0 })
}

fn join(v: &[Scalar]) -> String {
    v.iter().map(format_scalar).collect::<Vec<_>>().join(", ")
}

pub fn render_report(r: &IndexReport) -> String {
    let c = &r.coefficients;
    let mut s = String::new();
    let _ = writeln!(s, "map          {}", r.map);
    let _ = writeln!(s, "degree       {}", r.degree);
    let degrees: Vec<String> = r
        .delta_estimate
        .degrees
        .iter()
        .map(u32::to_string)
        .collect();
    let _ = writeln!(s, "degrees      [{}]", degrees.join(", "));
    match &r.delta_estimate.exact {
        Some(delta) => {
            let _ = writeln!(s, "delta        {}", format_scalar(delta));
        }
        None => {
            let _ = writeln!(
                s,
                "delta        ~{:.6} (not stabilized)",
                r.delta_estimate.approximate
            );
        }
    }
    let _ = writeln!(s, "regular      {}", r.regular);
    let _ = writeln!(s, "n, m, i0     {}, {}, {}", r.n, r.m, r.i0);
    let _ = writeln!(s, "basis        {}", r.basis.join(", "));
    let _ = writeln!(s, "b, c, e      {}, {}, {}", c.b, c.c, c.e);
    let _ = writeln!(s, "b_i          [{}]", join(&c.b_vec));
    let _ = writeln!(s, "c_i          [{}]", join(&c.c_vec));
    let _ = writeln!(s, "b'_j         [{}]", join(&c.bp_vec));
    let _ = writeln!(s, "c'_j         [{}]", join(&c.cp_vec));
    let _ = writeln!(s, "a_i          [{}]", join(&c.a_vec));
    let _ = writeln!(s, "a'_j         [{}]", join(&c.ap_vec));
    let failed: Vec<&str> = r
        .identity_checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let _ = writeln!(
        s,
        "identities   {}/{} pass",
        r.identity_checks.len() - failed.len(),
        r.identity_checks.len()
    );
    for check in r.identity_checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(s, "  FAIL {}: {} != {}", check.name, check.lhs, check.rhs);
    }
    let _ = writeln!(
        s,
        "α(φ,amp) ≤ {} on this resolution (witness {})",
        r.ample_bound.bound, r.ample_bound.witness
    );
    for w in &r.ample_bound.samples {
        let _ = writeln!(
            s,
            "  D({}).{} = {}",
            w.alpha, r.ample_bound.witness, w.intersection
        );
    }
    match &r.eff_exact {
        Some(eff) => {
            let _ = writeln!(
                s,
                "α(φ,eff) = {} on the canonical resolution",
                format_scalar(eff)
            );
        }
        None => {
            let _ = writeln!(
                s,
                "α(φ,eff) in [{}, {}] on the canonical resolution",
                format_scalar(&r.eff_lower),
                format_scalar(&r.eff_upper)
            );
        }
    }
    if let Some(predicted) = &r.delta_comparison.predicted {
        let verdict = match r.delta_comparison.matches {
            Some(true) => "equal",
            Some(false) => "different",
            None => "undecided",
        };
        let _ = writeln!(
            s,
            "delta + 1/deg = {} ({verdict})",
            format_scalar(predicted)
        );
    }
    let _ = writeln!(
        s,
        "threshold    -(a_n + a'_m)/3 = {}",
        format_scalar(&r.polyhedrality_threshold)
    );
    let _ = writeln!(s, "effective cone verdict: {:?}", r.cone_verdict);
    s
}

#[derive(Serialize)]
struct Reference {
    degree: u32,
    delta: String,
    eff: String,
}

#[derive(Serialize)]
struct TableRow {
    family: &'static str,
    map: String,
    degree: u32,
    delta: Option<String>,
    eff_lower: String,
    eff_upper: String,
    eff: Option<String>,
    identities_pass: bool,
    reference: Reference,
    matches: bool,
}

#[derive(Serialize)]
struct TableOutput {
    parameters: serde_json::Value,
    iterates: usize,
    seed: u64,
    rows: Vec<TableRow>,
    all_match: bool,
}

/// The reference rows: family, degree and effective index.
pub fn reference_rows() -> [(&'static str, u32, Scalar); 3] {
    [
        ("(y, y^2 + b + a*x)", 2, rat(5, 2)),
        ("(y + a*x^3, x)", 3, rat(10, 3)),
        ("(y + a*x^4, x)", 4, rat(17, 4)),
    ]
}

pub fn cmd_table(args: &TableArgs) -> Result<Outcome, Error> {
    let a = parse_scalar(&args.a)?;
    let b = parse_scalar(&args.b)?;
    let maps = [
        quadratic_henon(&a, &b)?,
        transposed_henon_builder(3, &a)?,
        transposed_henon_builder(4, &a)?,
    ];
    let mut rows = Vec::new();
    for (phi, (family, degree, eff)) in maps.iter().zip(reference_rows()) {
        let report = index_report_for(phi, &args.common)?;
        let delta_ref = Scalar::from_integer(degree.into());
        let matches = report.degree == degree
            && report.delta_estimate.exact.as_ref() == Some(&delta_ref)
            && report.eff_exact.as_ref() == Some(&eff);
        rows.push(TableRow {
            family,
            map: report.map.clone(),
            degree: report.degree,
            delta: report.delta_estimate.exact.as_ref().map(format_scalar),
            eff_lower: format_scalar(&report.eff_lower),
            eff_upper: format_scalar(&report.eff_upper),
            eff: report.eff_exact.as_ref().map(format_scalar),
            identities_pass: report.all_identities_pass(),
            reference: Reference {
                degree,
                delta: format_scalar(&delta_ref),
                eff: format_scalar(&eff),
            },
            matches,
        });
    }
    let all_match = rows.iter().all(|r| r.matches);
    let stdout = match args.common.format {
        Format::Json => to_json(&TableOutput {
            parameters: serde_json::json!({ "a": format_scalar(&a), "b": format_scalar(&b) }),
            iterates: args.common.iterates,
            seed: args.common.seed,
            rows,
            all_match,
        }),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "a = {}, b = {}", format_scalar(&a), format_scalar(&b));
            let _ = writeln!(
                s,
                "{:<20} {:>6} {:>6} {:>9}   {:<14} status",
                "map", "degree", "delta", "eff", "reference"
            );
            for r in &rows {
                let reference = format!(
                    "({}, {}, {})",
                    r.reference.degree, r.reference.delta, r.reference.eff
                );
                let eff = r
                    .eff
                    .clone()
                    .unwrap_or_else(|| format!("[{}, {}]", r.eff_lower, r.eff_upper));
                let _ = writeln!(
                    s,
                    "{:<20} {:>6} {:>6} {:>9}   {:<14} {}",
                    r.family,
                    r.degree,
                    r.delta.as_deref().unwrap_or("?"),
                    eff,
                    reference,
                    if r.matches { "ok" } else { "MISMATCH" }
                );
            }
            s
        }
    };
    Ok(Outcome {
        stdout,
        code: if all_match { 0 } else { 5 },
    })
}
