use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qpoly", version, about = "q-polygamma functionals: evaluation, certification and exact verification")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key = value file presetting the precision budget.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Target relative error.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Working precision in decimal digits.
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Series term cap.
    #[arg(long, global = true)]
    pub max_terms: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a q-function or functional at one point.
    Eval(EvalArgs),
    /// Certify complete monotonicity of G_m or F_{r,m,n,s}.
    Certify(CertifyArgs),
    /// Run an exact or high-precision inequality sweep.
    Verify(VerifyArgs),
    /// Evaluate the auxiliary analytic quantities.
    Props(PropsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FnName {
    #[value(name = "gamma_q")]
    #[serde(rename = "gamma_q")]
    GammaQ,
    #[value(name = "psi_q")]
    #[serde(rename = "psi_q")]
    PsiQ,
    #[value(name = "psi_q_m")]
    #[serde(rename = "psi_q_m")]
    PsiQM,
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
    #[value(name = "F_deriv")]
    #[serde(rename = "F_deriv")]
    FDeriv,
    #[value(name = "G_deriv")]
    #[serde(rename = "G_deriv")]
    GDeriv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    pub func: FnName,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TargetName {
    #[value(name = "G")]
    G,
    #[value(name = "F")]
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Grid,
    Both,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub target: TargetName,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    /// Last series coefficient swept.
    #[arg(long, default_value_t = 200)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    pub method: Method,
    /// Coefficients above -abs_slack count as nonnegative.
    #[arg(long, default_value_t = 1e-30)]
    pub abs_slack: f64,
    #[arg(long, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    /// Grid base points; defaults to every lattice point.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Highest difference order on the grid.
    #[arg(long, default_value_t = 8)]
    pub k_diff: usize,
    /// Relative slack of the grid check.
    #[arg(long, default_value_t = 1e-9)]
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum LemmaName {
    #[value(name = "2.1", alias = "conv")]
    #[serde(rename = "2.1")]
    Conv,
    #[value(name = "proof-steps")]
    #[serde(rename = "proof-steps")]
    ProofSteps,
    #[value(name = "power-sums")]
    #[serde(rename = "power-sums")]
    PowerSums,
    #[value(name = "ratio")]
    #[serde(rename = "ratio")]
    Ratio,
    #[value(name = "weights")]
    #[serde(rename = "weights")]
    Weights,
    #[value(name = "t-sum")]
    #[serde(rename = "t-sum")]
    TSum,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub lemma: LemmaName,
    #[arg(long)]
    pub r_max: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long)]
    pub m_max: Option<u32>,
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Also sweep quadruples outside the proven regimes (2.1 only).
    #[arg(long)]
    pub empirical: bool,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    /// Single T for proof-steps.
    #[arg(long = "t")]
    pub t: Option<u32>,
    #[arg(long)]
    pub t_max: Option<u32>,
    /// Single n for the ratio inequality.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Vec<f64>,
    /// Grid size for weight_u monotonicity.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum PropName {
    #[value(name = "h")]
    #[serde(rename = "h")]
    H,
    #[value(name = "weight-u")]
    #[serde(rename = "weight-u")]
    WeightU,
    #[value(name = "chain")]
    #[serde(rename = "chain")]
    Chain,
    #[value(name = "constants")]
    #[serde(rename = "constants")]
    Constants,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    #[arg(long, value_enum)]
    pub what: PropName,
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
}
