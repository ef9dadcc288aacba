//! Command-line front end: subcommands, run configuration, result files
//! and manifests.
//!
//! Every run writes its tables into the output directory together with
//! `manifest.json`, which records the configuration, its hash, the code
//! and cache versions, the wall time and a digest of every file written.
//! Everything except the wall time is a function of the configuration and
//! the cache, so identical runs produce identical bytes.

use crate::analytic::afe::afe_central_value_with;
use crate::analytic::{afe_central_value, dedekind_zeta_half, AfeKernel, GammaFactor, KernelG, SmoothWeight};
use crate::arith::SpfSieve;
use crate::counting::{
    polya_vinogradov_check, predicted_count, predicted_field_count, sieve_to_maximal, smoothed_count, smoothed_max_count,
    suborder_tree_count, suborder_zeta_coeffs, weighted_switching_check, CongruenceWeight, OrbitSet, PV_RATIO_BOUND,
};
use crate::error::{Error, Result};
use crate::forms::{cached_orbits, enumerate_orbits, BinaryCubicForm, CACHE_VERSION};
use crate::fourier::{verify_prime, InvariantFunction};
use crate::local::{is_maximal, switching_check_with, SplittingType};
use crate::stats::{
    family_averages, family_lvalues, ma_pa, moment_trend, nonvanishing, one_level_density, theta_row, DensityTestFunction,
    Family, LocalSpec, DEFAULT_PRIME_CUT,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "CUBICSTAT_CACHE";
pub const DEFAULT_CACHE_DIR: &str = "cubicstat-cache";

/// The X grid used by `moment`, `density` and `nonvanishing` by default.
pub const DEFAULT_X_GRID: [f64; 4] = [31_622.776601683792, 100_000.0, 316_227.76601683791, 1_000_000.0];

#[derive(Parser, Debug)]
#[command(name = "cubicstat", version, about = "Counts and central L-values of cubic fields from binary cubic forms")]
pub struct Cli {
    /// Directory for result tables and the manifest.
    #[arg(long, global = true, default_value = "cubicstat-out")]
    pub out: PathBuf,
    /// Orbit and central-value cache [default: $CUBICSTAT_CACHE, else ./cubicstat-cache].
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Worker threads for enumeration (0 lets rayon decide).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Read the run configuration from a JSON file instead of the command line.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Enumerate GL2(Z)-orbits of binary cubic forms by discriminant.
    Enumerate(EnumerateArgs),
    /// Smoothed orbit and field counts against the residue predictions.
    Count(CountArgs),
    /// Inclusion-exclusion sieve to maximal forms, checked against the direct sum.
    SieveVerify(SieveArgs),
    /// Mori matrix, orthogonality identities and closed-form transform values.
    FourierVerify(FourierArgs),
    /// Remainders in the cubic Polya-Vinogradov analogue.
    PvCheck(PvArgs),
    /// Suborder counts of one cubic field.
    Suborders(SubordersArgs),
    /// Central values L(1/2, rho_K) for the fields of a family in a discriminant window.
    Lvalue(LvalueArgs),
    /// Agreement of two AFE kernels and of the Dedekind zeta oracle.
    AfeVerify(AfeArgs),
    /// First moment of central values over a family.
    Moment(FamilyArgs),
    /// 1-level density through the explicit formula, and theta averages.
    Density(DensityArgs),
    /// Sign counts of central values.
    Nonvanishing(FamilyArgs),
    /// Exact-identity battery: Fourier, switching, sieve.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::Count(_) => "count",
            Command::SieveVerify(_) => "sieve-verify",
            Command::FourierVerify(_) => "fourier-verify",
            Command::PvCheck(_) => "pv-check",
            Command::Suborders(_) => "suborders",
            Command::Lvalue(_) => "lvalue",
            Command::AfeVerify(_) => "afe-verify",
            Command::Moment(_) => "moment",
            Command::Density(_) => "density",
            Command::Nonvanishing(_) => "nonvanishing",
            Command::Selftest(_) => "selftest",
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EnumerateArgs {
    /// Enumerate orbits with 0 < |Delta| < max-disc.
    #[arg(long)]
    pub max_disc: u64,
    /// +1 or -1; both signs when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<i32>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CountArgs {
    /// Scale X of the smooth weight Psi(|Delta|/X).
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Local conditions and sign, e.g. `-1;5:3` or JSON.
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub sigma: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SieveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub sigma: String,
    /// Largest squarefree q in the inclusion-exclusion (default: no cut).
    #[arg(long)]
    pub q_cut: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FourierArgs {
    /// Primes to verify.
    #[arg(long = "p", value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<u64>,
    /// Also compare against the O(p^8) brute-force transform.
    #[arg(long)]
    pub brute: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PvArgs {
    #[arg(long = "p", value_delimiter = ',', default_value = "5,7,11")]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub sign: i32,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SubordersArgs {
    /// A maximal irreducible form `a,b,c,d` for the field.
    #[arg(long, allow_hyphen_values = true)]
    pub form: String,
    /// Count suborders of index at most z.
    #[arg(long)]
    pub z: u64,
    /// Also count by walking the subring tree.
    #[arg(long)]
    pub tree: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LvalueArgs {
    #[arg(long, default_value_t = 0)]
    pub disc_min: u64,
    /// Fields with disc-min <= |Delta| < disc-max.
    #[arg(long)]
    pub disc_max: u64,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub sigma: String,
    /// G in the AFE kernel: one or gaussian.
    #[arg(long, default_value = "one")]
    pub kernel: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AfeArgs {
    #[arg(long, default_value_t = 10_000)]
    pub max_disc: u64,
    /// Fields per sign.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FamilyArgs {
    /// Local conditions; must require an inert prime.
    #[arg(long, default_value = "-1;127:3", allow_hyphen_values = true)]
    pub sigma: String,
    /// Values of X (default 10^4.5, 10^5, 10^5.5, 10^6).
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Orbit range backing the central values (default 2 max X).
    #[arg(long)]
    pub max_disc: Option<u64>,
    #[arg(long, default_value = "one")]
    pub kernel: String,
    /// Primes kept explicitly in the Euler products for C_Sigma.
    #[arg(long, default_value_t = DEFAULT_PRIME_CUT)]
    pub prime_cut: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// Support radius a of the Fourier transform of the test function.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub support: f64,
    /// fejer (triangular transform) or bump.
    #[arg(long, default_value = "fejer")]
    pub test: String,
    /// Primes p for the theta_K(p^2) averages.
    #[arg(long, value_delimiter = ',', default_value = "5,7")]
    pub theta_primes: Vec<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SelftestArgs {
    /// Discriminant bound for the switching and sieve identities.
    #[arg(long, default_value_t = 5000)]
    pub x: u64,
}

/// Everything that determines a run's output. The cache location and
/// thread count do not affect results and are kept out of the hash.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing)]
    pub threads: usize,
    #[serde(default, skip_serializing)]
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&self.command).expect("config serializes");
        hex(&Sha256::digest(s.as_bytes()))
    }

    /// Check every field before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let sign = |s: i32| {
            if s == 1 || s == -1 {
                Ok(())
            } else {
                Err(Error::Config(format!("sign must be +1 or -1, got {s}")))
            }
        };
        match &self.command {
            Command::Enumerate(a) => {
                if let Some(s) = a.sign {
                    sign(s)?;
                }
            }
            Command::Count(a) => {
                positive("x", a.x)?;
                LocalSpec::parse(&a.sigma)?;
            }
            Command::SieveVerify(a) => {
                positive("x", a.x)?;
                LocalSpec::parse(&a.sigma)?;
            }
            Command::FourierVerify(a) => {
                for &p in &a.primes {
                    if !crate::arith::is_prime(p) {
                        return Err(Error::Config(format!("{p} is not prime")));
                    }
                }
            }
            Command::PvCheck(a) => {
                positive("x", a.x)?;
                sign(a.sign)?;
                if a.k == 0 {
                    return Err(Error::Config("k must be at least 1".into()));
                }
            }
            Command::Suborders(a) => {
                parse_form(&a.form)?;
            }
            Command::Lvalue(a) => {
                LocalSpec::parse(&a.sigma)?;
                kernel_g(&a.kernel)?;
                if a.disc_min > a.disc_max {
                    return Err(Error::Config("disc-min exceeds disc-max".into()));
                }
            }
            Command::AfeVerify(_) | Command::Selftest(_) => {}
            Command::Moment(f) | Command::Nonvanishing(f) => {
                f.check()?;
            }
            Command::Density(d) => {
                d.family.check()?;
                d.test_function()?.validate()?;
            }
        }
        Ok(())
    }
}

impl FamilyArgs {
    fn grid(&self) -> Vec<f64> {
        if self.x.is_empty() {
            DEFAULT_X_GRID.to_vec()
        } else {
            self.x.clone()
        }
    }

    fn spec(&self) -> Result<LocalSpec> {
        let spec = LocalSpec::parse(&self.sigma)?;
        spec.validate()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        self.spec()?;
        kernel_g(&self.kernel)?;
        for x in self.grid() {
            if !(x.is_finite() && x > 1.0) {
                return Err(Error::Config(format!("X values must exceed 1, got {x}")));
            }
        }
        Ok(())
    }

    /// Default orbit range: the support of Psi(|Delta|/X) for the largest X.
    fn orbit_range(&self) -> u64 {
        self.max_disc.unwrap_or_else(|| (2.0 * self.grid().iter().cloned().fold(0.0, f64::max)).ceil() as u64)
    }
}

impl DensityArgs {
    fn test_function(&self) -> Result<DensityTestFunction> {
        match self.test.as_str() {
            "fejer" => Ok(DensityTestFunction::fejer(self.support)),
            "bump" => Ok(DensityTestFunction::Bump { a: self.support }),
            other => Err(Error::Config(format!("unknown test function '{other}' (fejer, bump)"))),
        }
    }
}

fn kernel_g(name: &str) -> Result<KernelG> {
    match KernelG::from_name(name)? {
        KernelG::PoleCancel => Err(Error::Config("pole-cancel is reserved for the Dedekind zeta oracle".into())),
        g => Ok(g),
    }
}

fn parse_form(s: &str) -> Result<BinaryCubicForm> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("form must be a,b,c,d, got '{s}'")))?;
    if v.len() != 4 {
        return Err(Error::Config(format!("form must have four coefficients, got '{s}'")));
    }
    Ok(BinaryCubicForm::new(v[0], v[1], v[2], v[3]))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cache directory from the flag, then the environment, then the default.
pub fn cache_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

#[derive(Serialize)]
struct FileDigest {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config: &'a RunConfig,
    config_hash: String,
    version: &'static str,
    cache_version: u32,
    wall_time_seconds: f64,
    outputs: Vec<FileDigest>,
}

/// Result files of one run.
struct Outputs {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileDigest { file: name.to_string(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    /// A CSV table; `header` is written when there are no rows.
    fn csv<T: Serialize>(&mut self, name: &str, header: &[&str], rows: &[T]) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        if rows.is_empty() {
            w.write_record(header).map_err(io)?;
        }
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }
}

/// Outcome of a subcommand that checks something.
#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub enum Outcome {
    Ok,
    ChecksFailed,
}

/// Parse-free entry point: run a configuration and write results into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<Outcome> {
    config.validate()?;
    let start = Instant::now();
    let cache = cache_dir(config.cache_dir.as_deref());
    let mut o = Outputs::new(out)?;
    let outcome = match &config.command {
        Command::Enumerate(a) => run_enumerate(a, &cache, &mut o)?,
        Command::Count(a) => run_count(a, &cache, &mut o)?,
        Command::SieveVerify(a) => run_sieve(a, &cache, &mut o)?,
        Command::FourierVerify(a) => run_fourier(a, &mut o)?,
        Command::PvCheck(a) => run_pv(a, &cache, &mut o)?,
        Command::Suborders(a) => run_suborders(a, &mut o)?,
        Command::Lvalue(a) => run_lvalue(a, &cache, &mut o)?,
        Command::AfeVerify(a) => run_afe(a, &mut o)?,
        Command::Moment(a) => run_moment(a, &cache, &mut o)?,
        Command::Density(a) => run_density(a, &cache, &mut o)?,
        Command::Nonvanishing(a) => run_nonvanishing(a, &cache, &mut o)?,
        Command::Selftest(a) => run_selftest(a, &mut o)?,
    };
    let manifest = Manifest {
        command: config.command.name(),
        config,
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION"),
        cache_version: CACHE_VERSION,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: std::mem::take(&mut o.files),
    };
    let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    std::fs::write(out.join("manifest.json"), s)?;
    Ok(outcome)
}

/// Binary entry point.
pub fn main_with(cli: Cli) -> ExitCode {
    let config = match (&cli.config, &cli.command) {
        (Some(path), None) => match std::fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|s| serde_json::from_str::<RunConfig>(&s).map_err(|e| Error::Config(e.to_string())))
        {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        (None, Some(cmd)) => RunConfig { command: cmd.clone(), threads: 0, cache_dir: None },
        _ => {
            eprintln!("error: give exactly one of a subcommand or --config FILE");
            return ExitCode::from(2);
        }
    };
    let config = RunConfig {
        threads: if cli.threads > 0 { cli.threads } else { config.threads },
        cache_dir: cli.cache.clone().or(config.cache_dir),
        ..config
    };
    if config.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match run(&config, &cli.out) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => {
            eprintln!("some checks failed; see {}", cli.out.display());
            ExitCode::from(1)
        }
        Err(e @ Error::PartialData(_)) => {
            eprintln!("partial data: {e}");
            eprintln!("extend the cached range with --max-disc or run `cubicstat enumerate` first");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn signs(s: Option<i32>) -> Vec<i32> {
    match s {
        Some(s) => vec![s],
        None => vec![1, -1],
    }
}

#[derive(Serialize)]
struct OrbitRow {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    disc: i64,
    stab: u32,
    irreducible: bool,
    maximal: bool,
}

fn run_enumerate(a: &EnumerateArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let mut counts = Vec::new();
    for s in signs(a.sign) {
        let set = OrbitSet::new(s, a.max_disc, cached_orbits(cache, s, a.max_disc)?);
        let rows: Vec<OrbitRow> = set
            .records
            .iter()
            .zip(&set.maximal)
            .map(|(r, &m)| OrbitRow {
                a: r.form.a,
                b: r.form.b,
                c: r.form.c,
                d: r.form.d,
                disc: r.disc,
                stab: r.stab,
                irreducible: r.irreducible,
                maximal: m,
            })
            .collect();
        let fields = rows.iter().filter(|r| r.irreducible && r.maximal).count();
        counts.push(serde_json::json!({"sign": s, "orbits": rows.len(), "fields": fields}));
        let name = format!("orbits_{}.csv", if s > 0 { "pos" } else { "neg" });
        o.csv(&name, &["a", "b", "c", "d", "disc", "stab", "irreducible", "maximal"], &rows)?;
    }
    o.json("enumerate.json", &serde_json::json!({"max_disc": a.max_disc, "signs": counts}))?;
    Ok(Outcome::Ok)
}

fn orbit_set_for(cache: &Path, sign: i32, x: f64, psi: &SmoothWeight) -> Result<OrbitSet> {
    let x_max = (psi.support.1 * x).ceil() as u64;
    OrbitSet::load(cache, sign, x_max)
}

fn run_count(a: &CountArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let spec = LocalSpec::parse(&a.sigma)?;
    let psi = SmoothWeight::bump();
    let set = orbit_set_for(cache, spec.sign, a.x, &psi)?;
    let w = spec.weight();
    let all = smoothed_count(&set, &w, &psi, a.x)?;
    let fields = smoothed_max_count(&set, &w, &psi, a.x, true)?;
    let pred = predicted_count(&w, &psi, a.x, spec.sign).gl2();
    let fpred = predicted_field_count(&w, &psi, a.x, spec.sign).gl2();
    o.json(
        "count.json",
        &serde_json::json!({
            "spec": spec.to_string(),
            "x": a.x,
            "orbit_sum": all,
            "orbit_prediction": {"main": pred.main, "secondary": pred.secondary, "total": pred.total()},
            "orbit_relative_error": all / pred.total() - 1.0,
            "field_sum": fields,
            "field_prediction": {"main": fpred.main, "secondary": fpred.secondary, "total": fpred.total()},
            "field_relative_error": fields / fpred.total() - 1.0,
        }),
    )?;
    Ok(Outcome::Ok)
}

fn run_sieve(a: &SieveArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let spec = LocalSpec::parse(&a.sigma)?;
    let psi = SmoothWeight::bump();
    let set = orbit_set_for(cache, spec.sign, a.x, &psi)?;
    let rep = sieve_to_maximal(&set, &spec.weight(), &psi, a.x, a.q_cut.unwrap_or(set.x_max))?;
    o.csv("sieve.csv", &["q", "mu", "orbits", "weighted", "exact_times6"], &rep.rows)?;
    o.json(
        "sieve.json",
        &serde_json::json!({
            "spec": spec.to_string(),
            "x": a.x,
            "exact": rep.exact(),
            "exact_inclusion_exclusion": rep.exact_inclusion_exclusion,
            "exact_direct": rep.exact_direct,
            "inclusion_exclusion": rep.inclusion_exclusion,
            "direct": rep.direct,
            "davenport_constant": rep.davenport_constant,
        }),
    )?;
    Ok(if rep.exact() { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn run_fourier(a: &FourierArgs, o: &mut Outputs) -> Result<Outcome> {
    let mut reports = Vec::new();
    let mut ok = true;
    for &p in &a.primes {
        let r = verify_prime(p, a.brute)?;
        ok &= r.orthogonality.iter().all(|t| t.holds) && r.orbit_sizes_match && r.bounds_hold;
        ok &= r.matrix_matches_brute_force.unwrap_or(true);
        reports.push(r);
    }
    o.json("fourier.json", &reports)?;
    Ok(if ok { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn run_pv(a: &PvArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let psi = SmoothWeight::bump();
    let set = orbit_set_for(cache, a.sign, a.x, &psi)?;
    let rows = a.primes.iter().map(|&p| polya_vinogradov_check(&set, p, a.k, &psi, a.x)).collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    o.csv("pv.csv", &["p", "k", "sign", "x", "lhs", "main", "secondary", "remainder", "ratio"], &rows)?;
    o.json("pv.json", &serde_json::json!({"bound": PV_RATIO_BOUND, "max_ratio": worst, "within_bound": worst < PV_RATIO_BOUND}))?;
    Ok(if worst < PV_RATIO_BOUND { Outcome::Ok } else { Outcome::ChecksFailed })
}

#[derive(Serialize)]
struct SuborderRow {
    index: u64,
    coefficient: i64,
    cumulative: i64,
}

fn run_suborders(a: &SubordersArgs, o: &mut Outputs) -> Result<Outcome> {
    let f = parse_form(&a.form)?;
    if !is_maximal(&f)? {
        return Err(Error::InvalidInput(format!("{f} is not maximal; give the form of O_K")));
    }
    let coeffs = suborder_zeta_coeffs(&f, a.z as usize)?;
    let mut total = 0;
    let rows: Vec<SuborderRow> = (1..=a.z)
        .map(|m| {
            total += coeffs[m as usize];
            SuborderRow { index: m, coefficient: coeffs[m as usize], cumulative: total }
        })
        .collect();
    o.csv("suborders.csv", &["index", "coefficient", "cumulative"], &rows)?;
    let tree = if a.tree { Some(suborder_tree_count(&f, a.z)?) } else { None };
    let agrees = tree.map(|t| t as i64 == total);
    o.json(
        "suborders.json",
        &serde_json::json!({"form": f.to_string(), "disc": f.disc() as i64, "z": a.z, "count": total, "tree_count": tree, "agrees": agrees}),
    )?;
    Ok(if agrees == Some(false) { Outcome::ChecksFailed } else { Outcome::Ok })
}

#[derive(Serialize)]
struct LvalueRow {
    field_disc: i64,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    #[serde(rename = "L_half")]
    l_half: f64,
    #[serde(rename = "S_f")]
    s_f: f64,
    converged: bool,
    tail_bound: f64,
}

const LVALUE_HEADER: [&str; 9] = ["field_disc", "a", "b", "c", "d", "L_half", "S_f", "converged", "tail_bound"];

fn run_lvalue(a: &LvalueArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let spec = LocalSpec::parse(&a.sigma)?;
    let kernel = AfeKernel::for_sign(spec.sign, kernel_g(&a.kernel)?)?;
    let mut rows = Vec::new();
    if a.disc_max > a.disc_min.max(1) {
        let set = OrbitSet::new(spec.sign, a.disc_max, cached_orbits(cache, spec.sign, a.disc_max)?);
        let fields: Vec<(BinaryCubicForm, i64)> = crate::stats::family_fields(&set, &spec)
            .into_iter()
            .filter(|f| f.1.unsigned_abs() >= a.disc_min)
            .collect();
        let n = crate::analytic::afe::terms_needed(&kernel, 1.0 / (a.disc_max as f64).sqrt());
        let sieve = SpfSieve::new(n as u64 + 1);
        for (form, disc) in fields {
            let l = afe_central_value_with(&form, &kernel, &sieve)?;
            rows.push(LvalueRow {
                field_disc: disc,
                a: form.a,
                b: form.b,
                c: form.c,
                d: form.d,
                l_half: l.l_half,
                s_f: l.s_f,
                converged: l.converged,
                tail_bound: l.tail_bound,
            });
        }
    }
    o.csv("lvalue.csv", &LVALUE_HEADER, &rows)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct AfeRow {
    disc: i64,
    form: String,
    l_one: f64,
    l_gaussian: f64,
    zeta_k_half: f64,
    kernel_difference: f64,
    zeta_difference: f64,
}

fn run_afe(a: &AfeArgs, o: &mut Outputs) -> Result<Outcome> {
    let mut rows = Vec::new();
    for sign in [1, -1] {
        let one = AfeKernel::for_sign(sign, KernelG::One)?;
        let gauss = AfeKernel::for_sign(sign, KernelG::Gaussian)?;
        let dk = AfeKernel::new(GammaFactor::dedekind_for_sign(sign), KernelG::PoleCancel)?;
        let z = crate::analytic::special::zeta(0.5);
        let mut taken = 0;
        for r in enumerate_orbits(a.max_disc, sign)? {
            if taken == a.count {
                break;
            }
            if !r.irreducible || !is_maximal(&r.form)? {
                continue;
            }
            taken += 1;
            let l1 = afe_central_value(&r.form, &one)?.l_half;
            let l2 = afe_central_value(&r.form, &gauss)?.l_half;
            let zk = dedekind_zeta_half(&r.form, &dk)?;
            rows.push(AfeRow {
                disc: r.disc,
                form: r.form.to_string(),
                l_one: l1,
                l_gaussian: l2,
                zeta_k_half: zk,
                kernel_difference: (l1 - l2).abs(),
                zeta_difference: (z * l1 - zk).abs(),
            });
        }
    }
    let kd = rows.iter().map(|r| r.kernel_difference).fold(0.0, f64::max);
    let zd = rows.iter().map(|r| r.zeta_difference).fold(0.0, f64::max);
    let pass = kd < 1e-8 && zd < 1e-6;
    o.csv("afe.csv", &["disc", "form", "l_one", "l_gaussian", "zeta_k_half", "kernel_difference", "zeta_difference"], &rows)?;
    o.json("afe.json", &serde_json::json!({"fields": rows.len(), "max_kernel_difference": kd, "max_zeta_difference": zd, "pass": pass}))?;
    Ok(if pass { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn load_family(a: &FamilyArgs, cache: &Path) -> Result<(Family, AfeKernel)> {
    let spec = a.spec()?;
    let kernel = AfeKernel::for_sign(spec.sign, kernel_g(&a.kernel)?)?;
    let x_max = a.orbit_range();
    let set = OrbitSet::load(cache, spec.sign, x_max)?;
    let fields = family_lvalues(cache, &set, &spec, &kernel)?;
    Ok((Family { spec, x_max, fields }, kernel))
}

/// `{C_sigma, C_prime_sigma, A_of_X, D_of_X}` plus command-specific detail.
#[derive(Serialize)]
struct Summary {
    spec: String,
    #[serde(rename = "C_sigma")]
    c_sigma: f64,
    #[serde(rename = "C_prime_sigma")]
    c_prime_sigma: f64,
    #[serde(rename = "A_of_X")]
    a_of_x: Vec<serde_json::Value>,
    #[serde(rename = "D_of_X")]
    d_of_x: Vec<serde_json::Value>,
    detail: serde_json::Value,
}

fn run_moment(a: &FamilyArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let (family, kernel) = load_family(a, cache)?;
    let psi = SmoothWeight::bump();
    let fa = family_averages(&family.spec, a.prime_cut)?;
    let trend = moment_trend(&family, &fa, &kernel, &psi, &a.grid())?;
    o.csv(
        "moment.csv",
        &[
            "x",
            "fields",
            "a_sigma",
            "a_normalized",
            "prediction",
            "main_sum",
            "secondary_sum",
            "smoothed_count",
            "max_tail_bound",
        ],
        &trend.rows,
    )?;
    let mapa = a
        .grid()
        .into_iter()
        .filter(|&x| 3.0 * x <= family.x_max as f64)
        .map(|x| ma_pa(&family, x))
        .collect::<Result<Vec<_>>>()?;
    o.csv("ma_pa.csv", &["x", "ma", "pa", "a_wide", "holds"], &mapa)?;
    let summary = Summary {
        spec: family.spec.to_string(),
        c_sigma: fa.c_sigma,
        c_prime_sigma: fa.c_prime_sigma,
        a_of_x: trend
            .rows
            .iter()
            .map(|r| serde_json::json!({"x": r.x, "A": r.a_sigma, "A_normalized": r.a_normalized, "prediction": r.prediction}))
            .collect(),
        d_of_x: Vec::new(),
        detail: serde_json::json!({
            "family_averages": fa,
            "slope": trend.slope,
            "intercept": trend.intercept,
            "relative_slope_error": trend.relative_slope_error,
            "pole": trend.pole,
            "corrected_slope": trend.corrected_slope,
            "corrected_relative_error": trend.corrected_relative_error,
            "max_three_term_error": trend.max_three_term_error,
        }),
    };
    o.json("summary.json", &summary)?;
    Ok(if mapa.iter().all(|r| r.holds) { Outcome::Ok } else { Outcome::ChecksFailed })
}

#[derive(Serialize)]
struct DensityCsvRow {
    x: f64,
    fields: usize,
    log_conductor: f64,
    z1: f64,
    z2: f64,
    density: f64,
    prediction: f64,
}

fn run_density(a: &DensityArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let (family, _) = load_family(&a.family, cache)?;
    let psi = SmoothWeight::bump();
    let phi = a.test_function()?;
    let (c, cp) = crate::stats::c_sigma_constants(&family.spec)?;
    let mut rows = Vec::new();
    let mut thetas = Vec::new();
    for x in a.family.grid() {
        let r = one_level_density(&family, &phi, &psi, x)?;
        rows.push(DensityCsvRow {
            x: r.x,
            fields: r.fields,
            log_conductor: r.log_conductor,
            z1: r.z1,
            z2: r.z2,
            density: r.density,
            prediction: r.prediction,
        });
        for &p in &a.theta_primes {
            thetas.push(theta_row(&family, &psi, x, p, 2)?);
        }
    }
    o.csv("density.csv", &["x", "fields", "log_conductor", "z1", "z2", "density", "prediction"], &rows)?;
    o.csv("theta.csv", &["p", "m", "x", "average", "local_mean"], &thetas)?;
    let summary = Summary {
        spec: family.spec.to_string(),
        c_sigma: c,
        c_prime_sigma: cp,
        a_of_x: Vec::new(),
        d_of_x: rows.iter().map(|r| serde_json::json!({"x": r.x, "D": r.density, "prediction": r.prediction})).collect(),
        detail: serde_json::json!({"test_function": phi, "theta": thetas}),
    };
    o.json("summary.json", &summary)?;
    Ok(Outcome::Ok)
}

fn run_nonvanishing(a: &FamilyArgs, cache: &Path, o: &mut Outputs) -> Result<Outcome> {
    let (family, _) = load_family(a, cache)?;
    let (c, cp) = crate::stats::c_sigma_constants(&family.spec)?;
    let rows = a.grid().into_iter().map(|x| nonvanishing(&family, x)).collect::<Result<Vec<_>>>()?;
    o.csv(
        "nonvanishing.csv",
        &["x", "fields", "positive", "negative", "undetermined", "delta", "delta_positive", "proportion_nonzero"],
        &rows,
    )?;
    let summary = Summary {
        spec: family.spec.to_string(),
        c_sigma: c,
        c_prime_sigma: cp,
        a_of_x: Vec::new(),
        d_of_x: Vec::new(),
        detail: serde_json::json!({"nonvanishing": rows}),
    };
    o.json("summary.json", &summary)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn run_selftest(a: &SelftestArgs, o: &mut Outputs) -> Result<Outcome> {
    let mut checks = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13] {
        let r = verify_prime(p, p <= 5)?;
        let pass = r.orthogonality.iter().all(|t| t.holds)
            && r.orbit_sizes_match
            && r.bounds_hold
            && r.matrix_matches_brute_force.unwrap_or(true);
        checks.push(Check {
            name: format!("fourier p={p}"),
            pass,
            detail: format!("brute force: {:?}", r.matrix_matches_brute_force),
        });
    }
    let simple = InvariantFunction::from_ints([0, 0, 5, 1, 2, 3]);
    let not_simple = InvariantFunction::from_ints([1, 2, 0, 1, 1, 3]);
    let psi = SmoothWeight::bump();
    for sign in [1, -1] {
        let orbits = enumerate_orbits(a.x, sign)?;
        for q in [1u64, 2, 3, 5, 6, 7, 10] {
            let r = switching_check_with(q, a.x, sign, &orbits)?;
            checks.push(Check {
                name: format!("switching q={q} sign={sign}"),
                pass: r.equal() && r.pair_stab_mismatches == 0,
                detail: format!("{} vs {} (x6), {} pairs", r.lhs_times6, r.rhs_times6, r.pairs_checked),
            });
        }
        for (q, w) in [
            (2u64, CongruenceWeight::trivial().with(2, simple.clone())),
            (6, CongruenceWeight::trivial().with(2, simple.clone()).with(3, not_simple.clone())),
        ] {
            let r = weighted_switching_check(q, &w, a.x, &orbits)?;
            checks.push(Check {
                name: format!("weighted switching q={q} d={} e={} sign={sign}", r.d, r.e),
                pass: r.equal(),
                detail: format!("{} vs {} (x6)", r.lhs_times6, r.rhs_times6),
            });
        }
        let set = OrbitSet::new(sign, a.x, orbits);
        let inert5 = CongruenceWeight::trivial().with(5, CongruenceWeight::allowed_types(&[SplittingType::Inert3]));
        for (name, w) in [("trivial", CongruenceWeight::trivial()), ("inert at 5", inert5)] {
            let r = sieve_to_maximal(&set, &w, &psi, a.x as f64 / 2.0, a.x)?;
            checks.push(Check {
                name: format!("sieve {name} sign={sign}"),
                pass: r.exact(),
                detail: format!("{} vs {} (x6)", r.exact_inclusion_exclusion, r.exact_direct),
            });
        }
    }
    let all = checks.iter().all(|c| c.pass);
    o.json("selftest.json", &serde_json::json!({"pass": all, "checks": checks}))?;
    Ok(if all { Outcome::Ok } else { Outcome::ChecksFailed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let cli = Cli::try_parse_from(["cubicstat", "moment", "--sigma", "-1;127:3", "--x", "1e5,2e5"]).unwrap();
        let cfg = RunConfig { command: cli.command.unwrap(), threads: 4, cache_dir: None };
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.starts_with("{\"command\":\"moment\""));
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back.command, cfg.command);
        assert_eq!(back.hash(), cfg.hash());
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_configs_are_rejected() {
        for args in [
            vec!["cubicstat", "count", "--x", "-5"],
            vec!["cubicstat", "moment", "--sigma", "-1;4:3"],
            vec!["cubicstat", "moment", "--sigma", "-1"],
            vec!["cubicstat", "density", "--support", "0.5"],
            vec!["cubicstat", "lvalue", "--disc-max", "10", "--kernel", "pole-cancel"],
            vec!["cubicstat", "pv-check", "--x", "1e4", "--k", "0"],
        ] {
            let cli = Cli::try_parse_from(&args).unwrap();
            let cfg = RunConfig { command: cli.command.unwrap(), threads: 0, cache_dir: None };
            assert!(cfg.validate().is_err(), "{args:?}");
        }
    }
}
