//! Command-line front end: certificate check, cover search, Hessian screening, witness
//! search, the independence test and small density/fuzzy-matrix utilities.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use rhostar::certificate::{
    bundled_text, coefficient_breakdown, pairs_to_sum, parse_certificate_text, verify_identity, Certificate, Transcript,
};
use rhostar::cover::{
    canonicalize_cover, cover_matrix, decompose_fto_a, expected_cover_counts, four_term_expressions, fuzzy_matrix,
    fuzzy_matrix_sum, repeat_count, search_covers, solve_cover, zero_count, ConstantCover, CoverRecord, LengthProfile,
    SearchOptions,
};
use rhostar::flag::quarter_turn;
use rhostar::perm::{formal_density, parse_permutation, FormalSum, Permutation, Symmetry};
use rhostar::permuton::{
    h_hessian, h_hessian_interpolated, monte_carlo_density, step_density_formal, witness_search, Direction,
    HessianReport, StepPermuton, WitnessOptions,
};
use rhostar::scalar::{format_rational, parse_rational, rational_to_f64};
use rhostar::stat::{independence_test, SampleSeries};
use rhostar::{Rational, RationalMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SAMPLES: usize = 200_000;

#[derive(Parser, Debug)]
#[command(name = "rhostar", version, about = "Exact computations around the ρ* permutation statistic")]
pub struct Cli {
    #[command(subcommand)]
    command: Mode,
}

#[derive(clap::Args, Debug)]
struct Output {
    /// Print JSON instead of a summary; with a path, write the JSON there
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    json: Option<Option<PathBuf>>,
}

#[derive(Subcommand, Debug)]
enum Mode {
    /// Check the sum-of-squares identity behind d(ρ*, μ) ≥ 11/24
    VerifyCertificate {
        #[command(flatten)]
        output: Output,
        /// Read the certificate from a text transcript instead of the built-in data
        #[arg(long, value_name = "FILE")]
        text: Option<PathBuf>,
        /// Itemize the coefficient of one permutation of order 6
        #[arg(long, value_name = "PERM")]
        breakdown: Option<String>,
    },
    /// Search for non-vanishing constant covers
    #[command(group(ArgGroup::new("what").required(true).args(["profile", "screening"])))]
    Covers {
        #[command(flatten)]
        output: Output,
        /// Term orders, e.g. 4,4,3,2
        #[arg(long)]
        profile: Option<LengthProfile>,
        /// The mixed four-term expressions plus every five-term profile
        #[arg(long)]
        screening: bool,
        /// Maximum number of search nodes
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Stop after this many rows (refutation mode)
        #[arg(long)]
        max_depth: Option<usize>,
        /// Use the row search even for latin-square profiles
        #[arg(long)]
        generic: bool,
    },
    /// Gradient and Hessian of h_{ρ,n} at the uniform permuton
    #[command(group(ArgGroup::new("input").required(true).args(["covers", "rho"])))]
    HessianScreen {
        #[command(flatten)]
        output: Output,
        /// Cover catalogue as written by `covers --json`
        #[arg(long, value_name = "FILE")]
        covers: Option<PathBuf>,
        /// A linear combination such as 3(2143)+3(3412)+2(123)+2(321); repeatable
        #[arg(long)]
        rho: Vec<FormalSum>,
        /// Grid size of the perturbation
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Route::Analytic)]
        route: Route,
    },
    /// Search for a step permuton μ with d(ρ, μ) < d(ρ, λ) or > d(ρ, λ)
    Witness {
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        rho: FormalSum,
        #[arg(long, value_parser = parse_direction)]
        dir: Direction,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid sizes to try, e.g. 2,3,4,5
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6, 7, 8])]
        grids: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        /// Only search permutons fixed by this symmetry
        #[arg(long, value_enum)]
        invariant: Option<SymmetryArg>,
    },
    /// Monte Carlo test of independence based on d(ρ*, π_n)
    IndependenceTest {
        #[command(flatten)]
        output: Output,
        /// CSV file with two numeric columns x,y
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 2000)]
        shuffles: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Break ties uniformly at random (seeded) instead of failing
        #[arg(long)]
        break_ties: bool,
    },
    /// Density of a pattern (or combination) in a permutation or step permuton
    #[command(group(ArgGroup::new("pattern").required(true).args(["sigma", "rho"])))]
    #[command(group(ArgGroup::new("host").required(true).args(["pi", "permuton", "uniform"])))]
    Density {
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        rho: Option<FormalSum>,
        #[arg(long)]
        pi: Option<String>,
        /// JSON file {"weights": [[...], ...]} with rational entries as strings or numbers
        #[arg(long, value_name = "FILE")]
        permuton: Option<PathBuf>,
        /// Uniform step permuton on this grid
        #[arg(long, value_name = "GRID")]
        uniform: Option<usize>,
        /// Also estimate the density by sampling (step permutons only)
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Fuzzy permutation matrix F_σ^{↑n}
    #[command(group(ArgGroup::new("pattern").required(true).args(["sigma", "rho"])))]
    Fuzzy {
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        sigma: Option<String>,
        /// Sum of fuzzy matrices of a combination
        #[arg(long)]
        rho: Option<FormalSum>,
        #[arg(long)]
        n: usize,
        /// Also build the cover matrix A_σ^{↑n} and check A = F + c·J
        #[arg(long)]
        cover: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Analytic,
    Interpolated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SymmetryArg {
    Reverse,
    Complement,
    Inverse,
    HalfTurn,
    AntiTranspose,
}

impl From<SymmetryArg> for Symmetry {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Reverse => Symmetry::REVERSE,
            SymmetryArg::Complement => Symmetry::COMPLEMENT,
            SymmetryArg::Inverse => Symmetry::INVERSE,
            SymmetryArg::HalfTurn => Symmetry::HALF_TURN,
            SymmetryArg::AntiTranspose => Symmetry::ANTI_TRANSPOSE,
        }
    }
}

impl Mode {
    fn output(&self) -> &Output {
        match self {
            Mode::VerifyCertificate { output, .. }
            | Mode::Covers { output, .. }
            | Mode::HessianScreen { output, .. }
            | Mode::Witness { output, .. }
            | Mode::IndependenceTest { output, .. }
            | Mode::Density { output, .. }
            | Mode::Fuzzy { output, .. } => output,
        }
    }
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: rhostar::Error| e.to_string())
}

/// Where results go: a summary, JSON on stdout, or JSON to a file plus the summary.
struct Sink<'a> {
    json: Option<Option<PathBuf>>,
    out: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(&mut self, value: &impl Serialize, summary: impl FnOnce() -> String) -> anyhow::Result<()> {
        match &self.json {
            None => write!(self.out, "{}", summary())?,
            Some(None) => writeln!(self.out, "{}", serde_json::to_string_pretty(value)?)?,
            Some(Some(path)) => {
                std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
                write!(self.out, "{}", summary())?;
            }
        }
        Ok(())
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let mut sink = Sink { json: cli.command.output().json.clone(), out };
    match dispatch(cli.command, &mut sink) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            match e.downcast_ref::<rhostar::Error>() {
                Some(rhostar::Error::BudgetExceeded(_) | rhostar::Error::IdentityViolated(_)) => EXIT_FAILED,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(mode: Mode, sink: &mut Sink) -> anyhow::Result<bool> {
    match mode {
        Mode::VerifyCertificate { output: _, text, breakdown } => verify_certificate(text.as_deref(), breakdown.as_deref(), sink),
        Mode::Covers { output: _, profile, screening, budget, max_depth, generic } => {
            let opts = SearchOptions { budget, max_depth, force_generic: generic };
            match profile {
                Some(p) => covers(&p, &opts, sink),
                None if screening => screening_catalogue(&opts, sink),
                None => unreachable!("clap enforces the group"),
            }
        }
        Mode::HessianScreen { output: _, covers, rho, n, route } => hessian_screen(covers.as_deref(), rho, n, route, sink),
        Mode::Witness { output: _, rho, dir, seed, grids, workers, restarts, steps, invariant } => {
            let opts = WitnessOptions { seed, grids, restarts, steps, workers, invariant: invariant.map(Into::into) };
            witness(&rho, dir, &opts, sink)
        }
        Mode::IndependenceTest { output: _, input, shuffles, seed, break_ties } => {
            let file = std::fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let sample = SampleSeries::read_csv(file)?;
            let report = independence_test(&sample, shuffles, seed, break_ties)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            sink.emit(&report, || text)?;
            Ok(true)
        }
        Mode::Density { output: _, sigma, rho, pi, permuton, uniform, samples, seed } => {
            let rho = match (sigma, rho) {
                (Some(s), _) => FormalSum::single(Rational::from_integer(1.into()), parse_permutation(&s)?),
                (None, Some(r)) => r,
                (None, None) => unreachable!("clap enforces the group"),
            };
            density(&rho, pi.as_deref(), permuton.as_deref(), uniform, samples, seed, sink)
        }
        Mode::Fuzzy { output: _, sigma, rho, n, cover } => fuzzy(sigma.as_deref(), rho.as_ref(), n, cover, sink),
    }
}

#[derive(Serialize)]
struct CertificateOutput {
    #[serde(flatten)]
    report: rhostar::certificate::VerificationReport,
    transcript_agrees: bool,
    quarter_turn: bool,
    z_equalities: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<rhostar::certificate::CoefficientBreakdown>,
}

fn verify_certificate(text: Option<&Path>, breakdown: Option<&str>, sink: &mut Sink) -> anyhow::Result<bool> {
    let transcript = match text {
        Some(path) => {
            let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_certificate_text(&raw)?
        }
        None => Transcript::embedded(),
    };
    // The bundled text is an independent transcription of the compiled-in constants.
    let transcript_agrees = parse_certificate_text(bundled_text())? == Transcript::embedded();
    let cert = Certificate::from_transcript(&transcript);
    let report = verify_identity(&cert)?;
    let quarter = cert.x.iter().zip(&cert.y).all(|(x, y)| &quarter_turn(x) == y);
    let z_ok = cert.x.len() > 1 && cert.x[1] == pairs_to_sum(&transcript.z1) && cert.y[1] == pairs_to_sum(&transcript.z2);
    let breakdown = breakdown.map(|w| coefficient_breakdown(&cert, &parse_permutation(w)?)).transpose()?;
    let pass = report.pass && transcript_agrees && quarter && z_ok;
    let output = CertificateOutput { report, transcript_agrees, quarter_turn: quarter, z_equalities: z_ok, breakdown };
    sink.emit(&output, || {
        let r = &output.report;
        let mut s = String::new();
        let _ = writeln!(s, "coefficients checked: {} (target {})", r.coefficients.len(), r.target);
        let _ = writeln!(s, "identity holds: {} ({} residuals)", r.identity_holds, r.residuals.len());
        let _ = writeln!(s, "positive definite: {} (minors {})", r.positive_definite, r.minors.join(", "));
        let eig: Vec<String> = r.eigenvalues.iter().map(|e| format!("{e:.1}")).collect();
        let _ = writeln!(s, "eigenvalues of 112·M: {}", eig.join(", "));
        let _ = writeln!(s, "bundled text agrees: {}", output.transcript_agrees);
        let _ = writeln!(s, "quarter turn x_i -> y_i: {}", output.quarter_turn);
        let _ = writeln!(s, "x_2 = z_1, y_2 = z_2: {}", output.z_equalities);
        if let Some(b) = &output.breakdown {
            let _ = writeln!(s, "coefficient of {}: d(ρ*, π) = {}", b.perm, b.projected);
            for c in &b.contributions {
                let _ = writeln!(
                    s,
                    "  {}{}{}: {} · {} · {}",
                    c.family, c.i, c.j, c.multiplicity, c.m_entry, c.product_coefficient
                );
            }
            let _ = writeln!(s, "  result {}", b.result);
        }
        let _ = writeln!(s, "{}", if pass { "PASS" } else { "FAIL" });
        s
    })?;
    Ok(pass)
}

/// Proper covers plus one basis per reducible permutation set.
fn catalogue(result: &rhostar::cover::SearchResult) -> anyhow::Result<Vec<CoverRecord>> {
    let mut records: Vec<CoverRecord> = result.covers.iter().map(CoverRecord::from).collect();
    for set in &result.reducible {
        records.extend(solve_cover(set, result.n)?.iter().map(CoverRecord::from));
    }
    Ok(records)
}

fn covers(profile: &LengthProfile, opts: &SearchOptions, sink: &mut Sink) -> anyhow::Result<bool> {
    let result = search_covers(profile, opts)?;
    let records = catalogue(&result)?;
    sink.emit(&records, || {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "profile {}: {} covers up to symmetry ({} sets, {} reducible)",
            result.profile,
            result.covers.len(),
            result.raw_count,
            result.reducible.len()
        );
        for l in &result.levels {
            let _ = writeln!(s, "  row {}: generated {}, kept {}", l.depth, l.generated, l.survivors);
        }
        if !result.complete {
            let _ = writeln!(s, "  stopped at row {} (incomplete)", result.levels.len());
        }
        for c in &result.covers {
            let _ = writeln!(s, "  c = {}: {}", format_rational(&c.c), c);
        }
        s
    })?;
    Ok(true)
}

/// Covers whose Hessian decides forcing: the mixed four-term list and all five-term profiles.
fn screening_set(opts: &SearchOptions) -> anyhow::Result<Vec<CoverRecord>> {
    let mut out: Vec<CoverRecord> = four_term_expressions()
        .iter()
        .map(|rho| CoverRecord::from(&canonicalize_cover(&ConstantCover::from_formal(rho, rho.max_order()))))
        .collect();
    for (profile, _) in expected_cover_counts().into_iter().filter(|(p, _)| p.len() == 5) {
        let result = search_covers(&profile, opts)?;
        out.extend(result.covers.iter().map(CoverRecord::from));
    }
    Ok(out)
}

fn screening_catalogue(opts: &SearchOptions, sink: &mut Sink) -> anyhow::Result<bool> {
    let records = screening_set(opts)?;
    sink.emit(&records, || {
        let mut s = format!("{} covers\n", records.len());
        for r in &records {
            let _ = writeln!(s, "  {}", r.canonical);
        }
        s
    })?;
    Ok(true)
}

#[derive(Serialize)]
struct ScreenEntry {
    terms: String,
    gradient_zero: bool,
    has_positive: bool,
    has_negative: bool,
    adhoc_needed: bool,
    inertia: rhostar::matrix::Inertia,
}

impl ScreenEntry {
    fn new(rho: &FormalSum, r: &HessianReport) -> Self {
        ScreenEntry {
            terms: rho.to_string(),
            gradient_zero: r.gradient_zero(),
            has_positive: r.has_positive(),
            has_negative: r.has_negative(),
            // A nonzero gradient or a saddle already rules out forcing.
            adhoc_needed: r.gradient_zero() && !(r.has_positive() && r.has_negative()),
            inertia: r.inertia,
        }
    }
}

fn hessian_screen(
    covers: Option<&Path>,
    mut rhos: Vec<FormalSum>,
    n: usize,
    route: Route,
    sink: &mut Sink,
) -> anyhow::Result<bool> {
    if let Some(path) = covers {
        let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let records: Vec<CoverRecord> = serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
        rhos.extend(records.into_iter().map(|r| r.terms));
    }
    let entries = rhos
        .par_iter()
        .map(|rho| {
            let report = match route {
                Route::Analytic => h_hessian(rho, n)?,
                Route::Interpolated => h_hessian_interpolated(rho, n)?,
            };
            Ok(ScreenEntry::new(rho, &report))
        })
        .collect::<rhostar::Result<Vec<_>>>()?;
    sink.emit(&entries, || {
        let adhoc = entries.iter().filter(|e| e.adhoc_needed).count();
        let mut s = format!("{} screened, {} need an ad hoc permuton\n", entries.len(), adhoc);
        for e in entries.iter().filter(|e| e.adhoc_needed) {
            let _ = writeln!(s, "  {} (+{} -{} 0:{})", e.terms, e.inertia.positive, e.inertia.negative, e.inertia.zero);
        }
        s
    })?;
    Ok(true)
}

fn witness(rho: &FormalSum, dir: Direction, opts: &WitnessOptions, sink: &mut Sink) -> anyhow::Result<bool> {
    let Some(w) = witness_search(rho, dir, opts)? else {
        sink.emit(&Value::Null, || "no witness found\n".to_string())?;
        return Ok(false);
    };
    sink.emit(&w, || {
        let mut s = format!(
            "grid {}: d(ρ, μ) = {} ≈ {:.6e}, target {}\n",
            w.permuton.grid(),
            format_rational(&w.value),
            rational_to_f64(&w.value),
            format_rational(&w.target)
        );
        for row in w.permuton.weight_strings() {
            let _ = writeln!(s, "  {}", row.join(" "));
        }
        s
    })?;
    Ok(true)
}

fn read_permuton(path: &Path) -> anyhow::Result<StepPermuton<Rational>> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&raw)?;
    let rows = v.get("weights").unwrap_or(&v).as_array().ok_or_else(|| anyhow!("weights must be an array of rows"))?;
    let cell = |c: &Value| -> anyhow::Result<Rational> {
        match c {
            Value::String(s) => Ok(parse_rational(s)?),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or(0).into())),
            Value::Number(n) => Rational::from_float(n.as_f64().unwrap_or(f64::NAN)).ok_or_else(|| anyhow!("bad weight {n}")),
            other => bail!("bad weight {other}"),
        }
    };
    let parsed = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| anyhow!("row must be an array"))?.iter().map(cell).collect())
        .collect::<anyhow::Result<Vec<Vec<Rational>>>>()?;
    if parsed.iter().any(|r| r.len() != parsed.len()) {
        bail!("weights must be square");
    }
    Ok(StepPermuton::new(RationalMatrix::from_rows(parsed))?)
}

fn density(
    rho: &FormalSum,
    pi: Option<&str>,
    permuton: Option<&Path>,
    uniform: Option<usize>,
    samples: Option<usize>,
    seed: u64,
    sink: &mut Sink,
) -> anyhow::Result<bool> {
    let mut out = serde_json::Map::new();
    out.insert("rho".into(), json!(rho.to_string()));
    let value = if let Some(word) = pi {
        let pi = parse_permutation(word)?;
        out.insert("pi".into(), json!(pi.to_string()));
        Some(formal_density(rho, &pi))
    } else {
        let mu = match (permuton, uniform) {
            (Some(path), _) => read_permuton(path)?,
            (None, Some(g)) if g > 0 => StepPermuton::uniform(g),
            _ => bail!("grid must be positive"),
        };
        out.insert("grid".into(), json!(mu.grid()));
        let exact = match step_density_formal(rho, &mu) {
            Ok(v) => Some(v),
            Err(rhostar::Error::BudgetExceeded(_)) => None,
            Err(e) => return Err(e.into()),
        };
        // Too large for the exact sum: estimate instead unless a sample size was given.
        let samples = samples.or(exact.is_none().then_some(DEFAULT_SAMPLES));
        if let Some(m) = samples {
            let mu_f = mu.to_f64();
            let (mut mean, mut var) = (0.0, 0.0);
            for (k, (sigma, c)) in rho.iter().enumerate() {
                let (m_i, se) = monte_carlo_density(sigma, &mu_f, m, seed.wrapping_add(k as u64));
                let c = rational_to_f64(c);
                mean += c * m_i;
                var += (c * se).powi(2);
            }
            out.insert("monte_carlo".into(), json!({ "mean": mean, "se": var.sqrt(), "samples": m }));
        }
        exact
    };
    out.insert("density".into(), json!(value.as_ref().map(format_rational)));
    out.insert("density_f64".into(), json!(value.as_ref().map(rational_to_f64)));
    let out = Value::Object(out);
    sink.emit(&out, || {
        let mut s = match &value {
            Some(v) => format!("{}\n", format_rational(v)),
            None => "exact value out of budget\n".to_string(),
        };
        if let Some(mc) = out.get("monte_carlo") {
            let _ = writeln!(s, "monte carlo {:.6} ± {:.6}", mc["mean"], mc["se"]);
        }
        s
    })?;
    Ok(true)
}

fn fuzzy(sigma: Option<&str>, rho: Option<&FormalSum>, n: usize, cover: bool, sink: &mut Sink) -> anyhow::Result<bool> {
    let (label, f, sigma) = match (sigma, rho) {
        (Some(w), _) => {
            let s = parse_permutation(w)?;
            (s.to_string(), fuzzy_matrix(&s, n)?, Some(s))
        }
        (None, Some(r)) => (r.to_string(), fuzzy_matrix_sum(r, n)?, None),
        (None, None) => unreachable!("clap enforces the group"),
    };
    let mut out = json!({
        "pattern": label,
        "n": n,
        "fuzzy": f.to_string_rows(),
        "zero_count": zero_count(&f),
        "repeat_count": repeat_count(&f),
    });
    let mut ok = true;
    if cover {
        let s: &Permutation = sigma.as_ref().ok_or_else(|| anyhow!("--cover needs --sigma"))?;
        let a = cover_matrix(s, n)?;
        let c = decompose_fto_a(s, n)?;
        let shifted = a.sub(&f);
        ok = shifted.is_constant(&c);
        out["cover"] = json!(a.to_string_rows());
        out["constant"] = json!(format_rational(&c));
        out["decomposition_holds"] = json!(ok);
    }
    sink.emit(&out, || {
        let mut s = format!("F for {label}, n = {n}\n");
        for row in f.to_string_rows() {
            let _ = writeln!(s, "  {}", row.join(" "));
        }
        if let Some(c) = out.get("constant") {
            let _ = writeln!(s, "A = F + {} J: {}", c.as_str().unwrap_or("?"), ok);
        }
        s
    })?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rho: &str) -> ScreenEntry {
        let rho: FormalSum = rho.parse().unwrap();
        ScreenEntry::new(&rho, &h_hessian(&rho, 3).unwrap())
    }

    #[test]
    fn sink_routes_summary_and_json() {
        let mut buf = Vec::new();
        Sink { json: None, out: &mut buf }.emit(&json!({"a": 1}), || "summary\n".into()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "summary\n");
        let mut buf = Vec::new();
        Sink { json: Some(None), out: &mut buf }.emit(&json!({"a": 1}), || unreachable!()).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["a"], 1);
    }

    #[test]
    fn adhoc_flag_needs_flat_gradient_and_one_sign() {
        // ν has zero gradient and zero Hessian: no sign pair, so it would need a witness.
        let nu = report("12+21");
        assert!(nu.gradient_zero && !nu.has_positive && !nu.has_negative && nu.adhoc_needed);
        // A single pattern has a nonzero gradient.
        let single = report("12");
        assert!(!single.gradient_zero && !single.adhoc_needed);
    }

    #[test]
    fn permuton_files_accept_strings_and_numbers() {
        let dir = std::env::temp_dir().join(format!("rhostar-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.json");
        std::fs::write(&path, r#"[["1/2", 0.5], [0.5, "1/2"]]"#).unwrap();
        let mu = read_permuton(&path).unwrap();
        assert_eq!(mu.grid(), 2);
        std::fs::write(&path, r#"{"weights": [["1", "0"]]}"#).unwrap();
        assert!(read_permuton(&path).is_err());
        std::fs::write(&path, r#"{"weights": [["1", "1"], ["0", "0"]]}"#).unwrap();
        assert!(read_permuton(&path).is_err());
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["rhostar", "density", "--sigma", "12", "--uniform", "0"], &mut out, &mut err);
        assert_eq!(code, EXIT_USAGE);
        let code = run(["rhostar", "covers", "--profile", "4,4,3,3,2", "--budget", "5"], &mut out, &mut err);
        assert_eq!(code, EXIT_FAILED);
        assert!(String::from_utf8(err).unwrap().contains("budget"));
    }
}
