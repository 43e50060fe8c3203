//! The `ribbonlab` command-line driver.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive or window too small,
//! 3 usage error or invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cohomology::{picard_dimension, ribbon_cohomology, CohomologyError, LevelStack};
use crate::geometry::{
    forward_krichever, noncoherent_chain, order_group, GeometricDatum, GeometryError, Kind,
    NodalCubicRing,
};
use crate::json::{pair_from_json, pair_to_json, to_sorted_json};
use crate::local2d::Window2D;
use crate::schur::{check_schur_pair, hilbert_function, point_ideal_check, SchurError, SchurPair, Verdict};
use crate::series::Field;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ribbonlab", version, about = "Exact Schur pair and ribbon cohomology computations")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Coefficient field: Q or Fp:<prime>
    #[arg(long, global = true, env = "RIBBONLAB_FIELD", default_value = "Q")]
    pub field: String,
    #[arg(long, global = true, default_value_t = -4, allow_negative_numbers = true)]
    pub t_lo: i64,
    #[arg(long, global = true, default_value_t = 4, allow_negative_numbers = true)]
    pub t_hi: i64,
    #[arg(long, global = true, default_value_t = -8, allow_negative_numbers = true)]
    pub u_lo: i64,
    #[arg(long, global = true, default_value_t = 8, allow_negative_numbers = true)]
    pub u_hi: i64,
    #[arg(long, global = true, default_value_t = 2, allow_negative_numbers = true)]
    pub m_t: i64,
    #[arg(long, global = true, default_value_t = 2, allow_negative_numbers = true)]
    pub m_u: i64,
    /// Truncation bound for Čech section spaces
    #[arg(long, global = true, default_value_t = 12, allow_negative_numbers = true)]
    pub bound: i64,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the Schur pair of a built-in example
    Build {
        /// p2-line, even-variant, nilpotent (nodal-cubic is rejected)
        example: String,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        twist: i64,
    },
    /// Check a pair file
    Check {
        pair: PathBuf,
    },
    /// Compute a report
    Report {
        #[command(subcommand)]
        which: ReportCommand,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ExampleArgs {
    #[arg(long, default_value = "p2-line")]
    pub example: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub twist: i64,
}

#[derive(Subcommand, Debug)]
pub enum ReportCommand {
    /// Hilbert function of the degree-j slice, and the point ideal check
    Hilbert {
        #[arg(long, default_value_t = 1)]
        j: i64,
        #[arg(long, default_value_t = 6)]
        max_n: i64,
        /// Read the pair from a file instead of building an example
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Which space of the pair: a or w
        #[arg(long, default_value = "a")]
        space: String,
        #[command(flatten)]
        example: ExampleArgs,
    },
    /// Cohomology of the level stack of an example
    Cohomology {
        /// Deepest level i (levels 0..=i)
        #[arg(long, default_value_t = 2)]
        i: usize,
        #[command(flatten)]
        example: ExampleArgs,
    },
    /// Dimensions of the unipotent Picard part for i = 1..=max_i
    Picard {
        #[arg(long, default_value_t = 5)]
        max_i: usize,
        #[command(flatten)]
        example: ExampleArgs,
    },
    /// Non-stabilizing chain of ideals on the nodal cubic
    DemoNoncoherent {
        #[arg(long, default_value_t = 3)]
        max_k: i64,
        #[arg(long, default_value_t = 6, allow_negative_numbers = true)]
        degree_bound: i64,
    },
    /// Orders of invertible elements
    OrderGroup {
        #[command(flatten)]
        example: ExampleArgs,
    },
}

/// Validated configuration shared by all commands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub field: Field,
    pub window: Window2D,
    pub bound: i64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<RunConfig, Failure> {
        let field: Field = a.field.parse().map_err(|e| Failure::usage(format!("{e}")))?;
        let window = Window2D::new(a.t_lo, a.t_hi, a.u_lo, a.u_hi, a.m_t, a.m_u)
            .map_err(|e| Failure::usage(format!("{e}")))?;
        if a.bound < 2 {
            return Err(Failure::usage("bound must be at least 2"));
        }
        Ok(RunConfig {
            field,
            window,
            bound: a.bound,
            out: a.out.clone(),
        })
    }
}

/// An error with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(m: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }

    pub fn window(m: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INCONCLUSIVE,
            message: m.into(),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::WindowTooSmall(_) | GeometryError::Schur(SchurError::WindowTooSmall(_)) => {
                Failure::window(e.to_string())
            }
            GeometryError::Schur(s) => s.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<SchurError> for Failure {
    fn from(e: SchurError) -> Self {
        match e {
            SchurError::WindowTooSmall(_)
            | SchurError::Fredholm(crate::fredholm::FredholmError::WindowTooSmall { .. }) => {
                Failure::window(e.to_string())
            }
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<CohomologyError> for Failure {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::BoundTooSmall { .. } => Failure::window(e.to_string()),
            other => Failure::usage(other.to_string()),
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn datum(ex: &ExampleArgs, field: Field) -> Result<GeometricDatum, Failure> {
    let kind = Kind::parse(&ex.example, ex.twist).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(GeometricDatum::new(kind, field))
}

fn with_config(report: impl Serialize, command: &str, cfg: &RunConfig, window: &Window2D) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable");
    let config = json!({
        "field": cfg.field,
        "window": window,
        "bound": cfg.bound,
    });
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), json!(command));
        map.insert("config".into(), config);
    }
    v
}

/// Output text and exit code of one invocation.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

fn load_pair(path: &PathBuf) -> Result<SchurPair, Failure> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    pair_from_json(&s).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = RunConfig::from_args(&cli.config)?;
    match &cli.command {
        Command::Build { example, twist } => {
            let kind = Kind::parse(example, *twist).map_err(|e| Failure::usage(e.to_string()))?;
            let g = GeometricDatum::new(kind, cfg.field);
            let p = forward_krichever(&g, &cfg.window)?;
            Ok(Outcome {
                text: pair_to_json(&p),
                code: EXIT_PASS,
            })
        }
        Command::Check { pair } => {
            let p = load_pair(pair)?;
            let r = check_schur_pair(&p)?;
            let code = verdict_code(r.verdict);
            let cfg = RunConfig {
                field: p.field(),
                ..cfg
            };
            let v = with_config(&r, "check", &cfg, p.window());
            Ok(Outcome {
                text: to_sorted_json(&v),
                code,
            })
        }
        Command::Report { which } => report(which, &cfg),
    }
}

fn report(which: &ReportCommand, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match which {
        ReportCommand::Hilbert {
            j,
            max_n,
            pair,
            space,
            example,
        } => {
            if *j < 1 || *max_n < 0 {
                return Err(Failure::usage("need j ≥ 1 and max-n ≥ 0"));
            }
            let p = match pair {
                Some(path) => load_pair(path)?,
                None => forward_krichever(&datum(example, cfg.field)?, &cfg.window)?,
            };
            let l = match space.as_str() {
                "a" | "A" => p.a(),
                "w" | "W" => p.w(),
                other => return Err(Failure::usage(format!("unknown space `{other}`, expected a or w"))),
            };
            let table = (0..=*max_n)
                .map(|n| hilbert_function(l, *j, n))
                .collect::<Result<Vec<_>, _>>()?;
            let point = point_ideal_check(l, *max_n)?;
            let code = verdict_code(point.verdict);
            let body = json!({
                "j": j,
                "max_n": max_n,
                "space": space.to_lowercase(),
                "table": table,
                "point_ideal": point,
            });
            Ok(Outcome {
                text: to_sorted_json(&with_config(body, "report hilbert", cfg, p.window())),
                code,
            })
        }
        ReportCommand::Cohomology { i, example } => {
            let g = datum(example, cfg.field)?;
            let m = match g.kind {
                Kind::NodalCubic => return Err(Failure::usage("nodal-cubic has no level stack here")),
                Kind::P2Line { twist } | Kind::EvenVariant { twist } | Kind::Nilpotent { twist } => twist,
            };
            let stack = LevelStack::from_datum(cfg.field, m, g.selfint(), *i);
            let r = ribbon_cohomology(&stack, cfg.bound)?;
            let code = if r.transition_surjective { EXIT_PASS } else { EXIT_FAIL };
            let mut v = with_config(&r, "report cohomology", cfg, &cfg.window);
            v["example"] = json!(g.kind.name());
            v["i"] = json!(i);
            Ok(Outcome {
                text: to_sorted_json(&v),
                code,
            })
        }
        ReportCommand::Picard { max_i, example } => {
            let g = datum(example, cfg.field)?;
            let reports = (1..=*max_i)
                .map(|i| picard_dimension(&g, i, cfg.bound))
                .collect::<Result<Vec<_>, _>>()?;
            let table: Vec<usize> = reports.iter().map(|r| r.dimension).collect();
            let d = -g.selfint();
            let body = json!({
                "example": g.kind.name(),
                "table": table,
                "d": d,
                "reports": reports,
            });
            Ok(Outcome {
                text: to_sorted_json(&with_config(body, "report picard", cfg, &cfg.window)),
                code: EXIT_PASS,
            })
        }
        ReportCommand::DemoNoncoherent { max_k, degree_bound } => {
            if *max_k < 1 {
                return Err(Failure::usage("max-k must be positive"));
            }
            // The t-range is widened to cover [−max_k − 1, 1) when needed.
            let w = cfg.window;
            let window = Window2D {
                t_lo: w.t_lo.min(-max_k - 1),
                t_hi: w.t_hi.max(1),
                ..w
            };
            let ring = NodalCubicRing::new(*degree_bound, cfg.field);
            let r = noncoherent_chain(&ring, *max_k, &window).map_err(|e| match e {
                GeometryError::DegreeTooSmall(_) => Failure::usage(e.to_string()),
                other => other.into(),
            })?;
            let diffs: Vec<i64> = r.dims.windows(2).map(|p| p[1] as i64 - p[0] as i64).collect();
            let increasing = diffs.iter().all(|d| *d > 0);
            let mut v = with_config(&r, "report demo-noncoherent", cfg, &window);
            v["differences"] = json!(diffs);
            v["strictly_increasing"] = json!(increasing);
            Ok(Outcome {
                text: to_sorted_json(&v),
                code: if increasing { EXIT_PASS } else { EXIT_FAIL },
            })
        }
        ReportCommand::OrderGroup { example } => {
            let g = datum(example, cfg.field)?;
            let r = order_group(&g, &cfg.window)?;
            let mut v = with_config(&r, "report order-group", cfg, &cfg.window);
            v["example"] = json!(g.kind.name());
            Ok(Outcome {
                text: to_sorted_json(&v),
                code: EXIT_PASS,
            })
        }
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_PASS;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let text = format!("{}\n", out.text);
            let written = match &cli.config.out {
                Some(path) => std::fs::write(path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => out.code,
                Err(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
