//! `hitchin`: batch front end over the coordinate kernel. Every verb writes
//! one JSON document; failures are reported as JSON on stderr.
//!
//! Exit codes: 0 success, 1 malformed input, 2 a mathematical precondition
//! failed, 3 the atlas or a reconstruction is inconsistent, 4 an identity or
//! relation check failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hitchin::atlas::LiftAtlas;
use hitchin::coords::CoordinateVector;
use hitchin::fixtures;
use hitchin::identities::check_identities;
use hitchin::invariants::{full_coordinates, InvariantError};
use hitchin::lamination::{Lamination, LaminationComplex};
use hitchin::polytope::{affine_dimension, check_membership, global_relation_residual, sample_interior, PolytopeError};
use hitchin::representation::{RepError, Representation};
use hitchin::scalar::with_parse_precision;
use hitchin::synthesis::{reconstruct, SynthesisError};
use hitchin::Scalar;
use rug::Float;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hitchin", version, about = "Coordinates for Hitchin representations of closed surface groups")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Bits of precision for floats and logarithms.
    #[arg(long, global = true, default_value_t = 256)]
    precision: u32,
    /// Reject decimal inputs and keep every computation rational.
    #[arg(long, global = true)]
    exact: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Float results may deviate by at most 2^-TOLERANCE.
    #[arg(long, global = true, default_value_t = 128)]
    tolerance: u32,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Surface {
    /// A built-in fixture: `pants` or `single-leaf`.
    #[arg(long, conflicts_with_all = ["lamination", "atlas"])]
    fixture: Option<String>,
    #[arg(long, requires = "atlas")]
    lamination: Option<PathBuf>,
    #[arg(long, requires = "lamination")]
    atlas: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the combinatorics of a lamination file.
    ValidateLamination {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        fixture: Option<String>,
    },
    /// Compute the coordinates of a representation.
    Invariants {
        #[command(flatten)]
        surface: Surface,
        /// Representation JSON. Defaults to the fixture's Fuchsian representation.
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Lift the fixture's Fuchsian representation to this rank.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Check coordinates against the closed leaf equalities and inequalities.
    CheckPolytope {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        coords: PathBuf,
    },
    /// Draw a rational interior point of the polytope.
    Sample {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        n: usize,
    },
    /// Rebuild a representation from coordinates.
    Reconstruct {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        coords: PathBuf,
    },
    /// Sample, reconstruct, recompute and compare.
    Roundtrip {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        n: usize,
        /// Number of consecutive seeds to run, starting at --seed.
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// Randomized exact checks of the ratio identities.
    Identities {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Replace every k-th draw by a degenerate tuple.
        #[arg(long)]
        inject_degenerate: Option<usize>,
    },
    /// Residual of the global relation among shears and triangle invariants.
    Relations {
        #[command(flatten)]
        surface: Surface,
        /// Coordinates JSON. Defaults to the fixture's Fuchsian lift at rank --n.
        #[arg(long)]
        coords: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

/// A failed run: exit code plus a JSON error document.
struct Failure {
    code: u8,
    kind: String,
    detail: Value,
}

impl Failure {
    fn new(code: u8, kind: &str, detail: impl Into<Value>) -> Failure {
        Failure { code, kind: kind.to_string(), detail: detail.into() }
    }

    fn parse(detail: impl ToString) -> Failure {
        Failure::new(1, "MalformedInput", detail.to_string())
    }
}

/// A finished run: the report and the exit code it implies.
struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: Value) -> Report {
        Report { value, code: 0 }
    }
}

fn variant(e: &impl std::fmt::Debug) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

impl From<RepError> for Failure {
    fn from(e: RepError) -> Failure {
        let code = match e {
            RepError::UnknownGenerator(_) | RepError::MalformedWord(_) | RepError::DimensionMismatch(_) => 3,
            _ => 2,
        };
        Failure::new(code, &variant(&e), e.to_string())
    }
}

impl From<InvariantError> for Failure {
    fn from(e: InvariantError) -> Failure {
        match e {
            InvariantError::Representation(r) => r.into(),
            InvariantError::NotHitchinCompatible(report) => {
                Failure::new(2, "NotHitchinCompatible", serde_json::to_value(&report).expect("serializable"))
            }
            InvariantError::MissingAnnotation(_) | InvariantError::AtlasMismatch(_) | InvariantError::Lamination(_) => {
                Failure::new(3, &variant(&e), e.to_string())
            }
            _ => Failure::new(2, &variant(&e), e.to_string()),
        }
    }
}

impl From<SynthesisError> for Failure {
    fn from(e: SynthesisError) -> Failure {
        match e {
            SynthesisError::Representation(r) => r.into(),
            SynthesisError::MembershipFailed(report) => {
                Failure::new(2, "MembershipFailed", serde_json::to_value(&report).expect("serializable"))
            }
            SynthesisError::RelatorViolation(_) | SynthesisError::BadPath(_) => {
                Failure::new(3, &variant(&e), e.to_string())
            }
            SynthesisError::Incomplete(_) => Failure::new(1, "Incomplete", e.to_string()),
            _ => Failure::new(2, &variant(&e), e.to_string()),
        }
    }
}

impl From<PolytopeError> for Failure {
    fn from(e: PolytopeError) -> Failure {
        let code = if matches!(e, PolytopeError::SamplingFailed(_)) { 2 } else { 1 };
        Failure::new(code, &variant(&e), e.to_string())
    }
}

struct Context {
    config: RunConfig,
}

impl Context {
    fn read<T: DeserializeOwned>(&self, path: &Path) -> Result<T, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        with_parse_precision(self.config.precision, || serde_json::from_str(&text))
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
    }

    fn require_exact(&self, exact: bool, what: &str) -> Result<(), Failure> {
        if self.config.exact && !exact {
            return Err(Failure::new(1, "NotExact", format!("{what} contains non-rational values")));
        }
        Ok(())
    }

    fn lamination(&self, complex: LaminationComplex) -> Result<Lamination, Failure> {
        let report = complex.validate();
        if !report.valid {
            return Err(Failure::new(
                1,
                "InvalidLamination",
                serde_json::to_value(&report.violations).expect("serializable"),
            ));
        }
        Lamination::new(complex).map_err(|e| Failure::new(1, "InvalidLamination", e.to_string()))
    }

    fn surface(&self, s: &Surface) -> Result<(Lamination, LiftAtlas, Option<fixtures::Fixture>), Failure> {
        match (&s.fixture, &s.lamination, &s.atlas) {
            (Some(name), _, _) => {
                let f = load_fixture(name)?;
                Ok((f.lamination.clone(), f.atlas.clone(), Some(f)))
            }
            (None, Some(l), Some(a)) => {
                let lam = self.lamination(self.read(l)?)?;
                let atlas: LiftAtlas = self.read(a)?;
                let problems = atlas.check(&lam);
                if !problems.is_empty() {
                    return Err(Failure::new(3, "AtlasMismatch", problems));
                }
                Ok((lam, atlas, None))
            }
            _ => Err(Failure::parse("pass --fixture or both --lamination and --atlas")),
        }
    }

    fn coords(&self, path: &Path) -> Result<CoordinateVector, Failure> {
        let c: CoordinateVector = self.read(path)?;
        self.require_exact(c.is_exact(), "coordinates")?;
        Ok(c)
    }

    /// `|x - 1|` (or `|x|`) is within the tolerance; exact values must be equal.
    fn close_to(&self, x: &Scalar, target: &Scalar) -> bool {
        if x.is_exact() && target.is_exact() {
            return x == target;
        }
        let tol = Float::with_val(self.config.precision, Float::i_exp(1, -(self.config.tolerance as i32)));
        (x - target).is_negligible(&tol)
    }

    fn run(&self, command: &Command) -> Result<Report, Failure> {
        let prec = self.config.precision;
        match command {
            Command::ValidateLamination { file, fixture } => {
                let complex = match (file, fixture) {
                    (Some(p), _) => self.read::<LaminationComplex>(p)?,
                    (None, Some(name)) => load_fixture(name)?.lamination.complex().clone(),
                    (None, None) => return Err(Failure::parse("pass a lamination file or --fixture")),
                };
                let report = complex.validate();
                let code = if report.valid { 0 } else { 2 };
                Ok(Report { value: serde_json::to_value(&report).expect("serializable"), code })
            }
            Command::Invariants { surface, rep, n } => {
                let (lam, atlas, fixture) = self.surface(surface)?;
                let rep: Representation = match (rep, fixture) {
                    (Some(p), _) => self.read(p)?,
                    (None, Some(f)) => f.fuchsian.symmetric_power(*n)?,
                    (None, None) => return Err(Failure::parse("pass --rep")),
                };
                self.require_exact(rep.is_exact(), "representation")?;
                let coords = full_coordinates(&rep, &lam, &atlas, prec)?;
                Ok(Report::ok(coords.to_json_with_logs(prec)))
            }
            Command::CheckPolytope { surface, coords } => {
                let (lam, _, _) = self.surface(surface)?;
                let coords = self.coords(coords)?;
                let report = check_membership(&coords, &lam, prec);
                let dim = affine_dimension(&lam, coords.n);
                let code = if report.pass { 0 } else { 2 };
                let value = json!({
                    "pass": report.pass,
                    "violations": report.violations,
                    "dimension": dim,
                });
                Ok(Report { value, code })
            }
            Command::Sample { surface, n } => {
                let (lam, _, _) = self.surface(surface)?;
                let coords = sample_interior(&lam, *n, self.config.seed)?;
                Ok(Report::ok(coords.to_json_with_logs(prec)))
            }
            Command::Reconstruct { surface, coords } => {
                let (lam, atlas, _) = self.surface(surface)?;
                let coords = self.coords(coords)?;
                let rep = reconstruct(&coords, &lam, &atlas, prec)?;
                Ok(Report::ok(serde_json::to_value(&rep).expect("serializable")))
            }
            Command::Roundtrip { surface, n, samples } => self.roundtrip(surface, *n, *samples),
            Command::Identities { n, trials, inject_degenerate } => {
                let report = check_identities(*n, *trials, self.config.seed, *inject_degenerate);
                let code = if report.pass() { 0 } else { 4 };
                Ok(Report { value: serde_json::to_value(&report).expect("serializable"), code })
            }
            Command::Relations { surface, coords, n } => {
                let (lam, atlas, fixture) = self.surface(surface)?;
                let coords = match (coords, fixture) {
                    (Some(p), _) => self.coords(p)?,
                    (None, Some(f)) => full_coordinates(&f.fuchsian.symmetric_power(*n)?, &lam, &atlas, prec)?,
                    (None, None) => return Err(Failure::parse("pass --coords")),
                };
                let residuals = global_relation_residual(&coords, &lam)?;
                let pass = residuals.iter().all(|r| self.close_to(r, &Scalar::one()));
                let value = json!({ "n": coords.n, "pass": pass, "residuals": residuals });
                Ok(Report { value, code: if pass { 0 } else { 4 } })
            }
        }
    }

    fn roundtrip(&self, surface: &Surface, n: usize, samples: u64) -> Result<Report, Failure> {
        let prec = self.config.precision;
        let (lam, atlas, _) = self.surface(surface)?;
        let mut runs = Vec::new();
        let mut worst = Scalar::zero();
        for seed in self.config.seed..self.config.seed + samples {
            let exact = sample_interior(&lam, n, seed)?;
            let input = if self.config.exact { exact.clone() } else { exact.to_float(prec) };
            let rep = reconstruct(&input, &lam, &atlas, prec)?;
            let mut back = full_coordinates(&rep, &lam, &atlas, prec)?;
            back.lengths.clear();
            let dev = back
                .max_deviation(&exact)
                .ok_or_else(|| Failure::new(3, "CoordinateMismatch", "coordinate keys differ"))?;
            if dev > worst {
                worst = dev.clone();
            }
            runs.push(json!({ "seed": seed, "deviation": dev }));
        }
        let pass = self.close_to(&worst, &Scalar::zero());
        let value = json!({
            "lamination": lam.name(),
            "n": n,
            "mode": if self.config.exact { "exact" } else { "float" },
            "precision": prec,
            "tolerance": format!("2^-{}", self.config.tolerance),
            "runs": runs,
            "max_deviation": worst,
            "pass": pass,
        });
        Ok(Report { value, code: if pass { 0 } else { 3 } })
    }
}

fn load_fixture(name: &str) -> Result<fixtures::Fixture, Failure> {
    fixtures::load(name)
        .ok_or_else(|| Failure::parse(format!("unknown fixture {name:?}; known: {}", fixtures::NAMES.join(", "))))
}

fn emit(config: &RunConfig, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match &config.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(1, "Io", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = Context { config: cli.config };
    let result = ctx.run(&cli.command).and_then(|r| emit(&ctx.config, &r.value).map(|_| r.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let doc = json!({ "error": f.kind, "detail": f.detail });
            eprintln!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            ExitCode::from(f.code)
        }
    }
}
