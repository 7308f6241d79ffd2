//! Command-line pipeline: `coeffs → enumerate → symbols → stats/constants → verify`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coeffs::{CoeffTable, FormConfig, FormSpec, SourceConfig};
use crate::constants;
use crate::enumerate::{enumerate_q, CuspFraction};
use crate::error::{Error, Result};
use crate::modsym::{evaluate_fractions, period_lattice_estimate, SymbolEvaluator};
use crate::quadfield::Field;
use crate::stats::{
    bound_diagnostic, mgf_scan, normal_cdf, normalized_values, summarize, variance_regression, windowed_slopes,
    LinearFit, MgfReport, Normalization, StatsSummary, SymbolSample,
};
use crate::verify::{self, Check, DEFAULT_XGRID};

pub const CACHE_ENV: &str = "BIANCHI_CACHE_DIR";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "bianchi", version, about = "Modular symbols of Bianchi newforms and their statistics")]
pub struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build (or fetch from the cache) the Hecke coefficient table of a form.
    Coeffs {
        #[arg(long)]
        form: PathBuf,
        /// Also write the table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the fraction set Q_d(X) as CSV.
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "1")]
        divisor: String,
        #[arg(long)]
        xmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the modular symbol of every fraction in a fraction CSV.
    Symbols {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        fractions: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Multiplier of the balanced split height.
        #[arg(long, default_value_t = 1.0)]
        split: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Moments, variance law, normality and MGF diagnostics of a symbol CSV.
    Stats(StatsArgs),
    /// Covolume, index, Petersson norm and the predicted variance constant.
    Constants {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 4)]
        mesh: usize,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the acceptance checks; exits with 1 if any fails.
    Verify {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_XGRID)]
        xgrid: Vec<f64>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub symbols: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_XGRID)]
    pub xgrid: Vec<f64>,
    /// `auto` uses the fitted variance slope of each group.
    #[arg(long, default_value = "auto")]
    pub c_value: String,
    #[arg(long)]
    pub report: PathBuf,
    /// Per-X curves; defaults to the report path with `.curves.csv`.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Histogram of normalized symbols at the largest X; defaults to `.hist.csv`.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Subtract the sample mean before normalizing.
    #[arg(long)]
    pub center: bool,
    /// Normalize each symbol by `√(C log |c|)` instead of `√(C log X)`.
    #[arg(long)]
    pub per_denominator: bool,
}

/// Everything that determines an output, hashed into its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: BTreeMap<&'static str, serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: RunConfig,
}

impl RunConfig {
    fn new(command: &'static str) -> RunConfig {
        RunConfig { command, params: BTreeMap::new() }
    }

    fn with(mut self, key: &'static str, v: impl Serialize) -> RunConfig {
        self.params.insert(key, serde_json::to_value(v).expect("plain data"));
        self
    }

    pub fn provenance(self) -> Provenance {
        let config_hash = sha256_hex(&serde_json::to_vec(&self).expect("plain data"));
        Provenance { tool: "bianchi", version: VERSION, config_hash, config: self }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn form_hash(cfg: &FormConfig) -> String {
    sha256_hex(&serde_json::to_vec(cfg).expect("plain data"))
}

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".bianchi-cache"))
}

/// Loads a form, reusing a cached coefficient table keyed by the config hash.
pub fn load_form(path: &Path) -> Result<FormSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read form config {}: {e}", path.display())))?;
    let cfg: FormConfig = serde_json::from_str(&text)?;
    Field::new(cfg.field)?;
    if let SourceConfig::Table { .. } = cfg.source {
        return FormSpec::from_config(&cfg, path.parent());
    }
    let cached = cache_dir().join(format!("{}.json", form_hash(&cfg)));
    if cached.exists() {
        if let Ok(t) = CoeffTable::load(&cached) {
            let w = cfg.w.clone();
            return FormSpec::new(t, &w, cfg);
        }
    }
    let loaded = FormSpec::from_config(&cfg, path.parent())?;
    fs::create_dir_all(cache_dir())?;
    loaded.table.save(&cached)?;
    Ok(loaded)
}

fn csv_writer(path: &Path, prov: &Provenance) -> Result<csv::Writer<BufWriter<File>>> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# {} {} config {}", prov.tool, prov.version, prov.config_hash)?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f))
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn read_fractions(path: &Path, f: Field) -> Result<Vec<CuspFraction>> {
    let mut out = Vec::new();
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let col = |i: usize| rec.get(i).ok_or(Error::Parse { line, msg: format!("missing column {i}") });
        let absc: f64 = col(2)?.parse().map_err(|_| Error::Parse { line, msg: "bad absc".into() })?;
        out.push(CuspFraction { a: f.parse_int(col(0)?)?, c: f.parse_int(col(1)?)?, absc, klass: f.parse_int(col(3)?)? });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SymbolRow {
    pub klass: String,
    pub absc: f64,
    pub value: f64,
}

pub fn read_symbols(path: &Path) -> Result<Vec<SymbolRow>> {
    let mut out = Vec::new();
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column '{name}'") })
    };
    let (ia, ik, is) = (idx("absc")?, idx("class")?, idx("symbol")?);
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or(Error::Parse { line, msg: "bad number".into() })
        };
        out.push(SymbolRow { klass: rec[ik].to_string(), absc: num(ia)?, value: num(is)? });
    }
    Ok(out)
}

fn cmd_coeffs(form: &Path, out: Option<&Path>) -> Result<()> {
    let loaded = load_form(form)?;
    if let Some(out) = out {
        loaded.table.save(out)?;
    }
    println!(
        "field d={} level {}: {} coefficients up to norm {} (config {})",
        loaded.field.d(),
        loaded.level,
        loaded.table.len(),
        loaded.config.norm_bound,
        form_hash(&loaded.config)
    );
    Ok(())
}

fn cmd_enumerate(d: i64, level: &str, divisor: &str, xmax: f64, out: &Path) -> Result<()> {
    let f = Field::new(d)?;
    let n = f.parse_int(level)?;
    let dv = f.parse_int(divisor)?;
    let set = enumerate_q(n, dv, xmax)?;
    let prov = RunConfig::new("enumerate")
        .with("field", d)
        .with("level", n.to_string())
        .with("divisor", dv.canonical().to_string())
        .with("xmax", xmax)
        .provenance();
    let mut w = csv_writer(out, &prov)?;
    w.write_record(["a", "c", "absc", "class"]).map_err(csv_err)?;
    for r in &set.items {
        w.write_record([r.a.to_string(), r.c.to_string(), r.absc.to_string(), r.klass.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    println!("{} fractions with |c| < {xmax}", set.len());
    Ok(())
}

fn cmd_symbols(form: &Path, fractions: &Path, tol: f64, split: f64, out: &Path) -> Result<()> {
    let spec = load_form(form)?;
    let items = read_fractions(fractions, spec.field)?;
    let ev = SymbolEvaluator::new(&spec, tol)?;
    let vals = evaluate_fractions(&ev, &items, split)?;
    let input = fs::read(fractions)?;
    let prov = RunConfig::new("symbols")
        .with("form", &spec.config)
        .with("form_hash", form_hash(&spec.config))
        .with("fractions_sha256", sha256_hex(&input))
        .with("tol", tol)
        .with("split", split)
        .provenance();
    let mut w = csv_writer(out, &prov)?;
    w.write_record(["a", "c", "absc", "class", "symbol", "err", "terms"]).map_err(csv_err)?;
    for (r, v) in items.iter().zip(&vals) {
        w.write_record([
            r.a.to_string(),
            r.c.to_string(),
            r.absc.to_string(),
            r.klass.to_string(),
            v.value.to_string(),
            v.err.to_string(),
            v.terms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    println!("{} symbols written to {}", vals.len(), out.display());
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupStats {
    pub group: String,
    pub variance_fit: Option<LinearFit>,
    pub windowed_slopes: Vec<f64>,
    /// `(X, variance)` on the grid.
    pub variance_points: Vec<(f64, f64)>,
    /// Normalization constant; `None` when the group has no positive variance slope.
    pub c_used: Option<f64>,
    /// Why no normalization constant was available.
    pub note: Option<String>,
    pub per_x: Vec<StatsSummary>,
    pub mgf: Option<MgfReport>,
    pub bound_ratio_per_x: Vec<f64>,
    /// `Ω` and residual when every value lies on a lattice `ΩZ`.
    pub period_lattice: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub provenance: Provenance,
    pub groups: Vec<GroupStats>,
}

fn group_stats(name: String, sample: &SymbolSample, xgrid: &[f64], c_value: Option<f64>, a: &StatsArgs) -> Result<GroupStats> {
    let mut points = Vec::new();
    for &x in xgrid {
        let s = sample.below(x);
        if s.len() >= 2 {
            points.push((x, crate::stats::moments(&s.values)?.1));
        }
    }
    let regression = variance_regression(&points);
    let (c, note) = match (c_value, &regression) {
        (Some(c), _) => (Some(c), None),
        (None, Ok(f)) if f.slope > 0.0 => (Some(f.slope), None),
        (None, Ok(_)) => (None, Some("no positive variance slope".to_string())),
        (None, Err(e)) => (None, Some(e.to_string())),
    };
    let fit = regression.ok();
    let xmax = xgrid.iter().copied().fold(0.0, f64::max);
    let top = sample.below(xmax);
    let mut gs = GroupStats {
        group: name,
        windowed_slopes: windowed_slopes(&points, 3),
        variance_points: points,
        variance_fit: fit,
        c_used: c,
        note,
        per_x: Vec::new(),
        mgf: None,
        bound_ratio_per_x: Vec::new(),
        period_lattice: period_lattice_estimate(&top.values).ok().filter(|&(o, r)| r <= 1e-4 * o),
    };
    let Some(c) = c else { return Ok(gs) };
    for &x in xgrid {
        let s = sample.below(x);
        if s.len() < 2 {
            continue;
        }
        gs.per_x.push(summarize(&s, &Normalization { c, x, center: a.center, per_denominator: a.per_denominator })?);
        gs.bound_ratio_per_x.push(bound_diagnostic(&s)?.0);
    }
    if top.len() >= 2 {
        let scale = (c * xmax.ln()).sqrt();
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.5 / scale / 20.0).collect();
        gs.mgf = Some(mgf_scan(&top.values, xmax, c, &grid, 1e-3 / scale, a.center)?);
    }
    Ok(gs)
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    let c_value = match a.c_value.as_str() {
        "auto" => None,
        s => Some(s.parse::<f64>().ok().filter(|c| *c > 0.0).ok_or_else(|| {
            Error::InvalidInput(format!("--c-value must be 'auto' or a positive number, got '{s}'"))
        })?),
    };
    let mut xgrid = a.xgrid.clone();
    xgrid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rows = read_symbols(&a.symbols)?;
    let mut groups: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &rows {
        for g in [format!("class {}", r.klass), "all".to_string()] {
            let e = groups.entry(g).or_default();
            e.0.push(r.value);
            e.1.push(r.absc);
        }
    }
    let mut out = Vec::new();
    for (name, (values, absc)) in groups {
        out.push(group_stats(name, &SymbolSample::new(values, absc), &xgrid, c_value, a)?);
    }
    let input = fs::read(&a.symbols)?;
    let prov = RunConfig::new("stats")
        .with("symbols_sha256", sha256_hex(&input))
        .with("xgrid", &xgrid)
        .with("c_value", &a.c_value)
        .with("bins", a.bins)
        .with("center", a.center)
        .with("per_denominator", a.per_denominator)
        .provenance();

    let curves = a.curves.clone().unwrap_or_else(|| sibling(&a.report, ".curves.csv"));
    let mut w = csv_writer(&curves, &prov)?;
    w.write_record(["group", "x", "n", "mean", "variance", "ks", "bound_ratio"]).map_err(csv_err)?;
    for g in &out {
        for (s, b) in g.per_x.iter().zip(&g.bound_ratio_per_x) {
            w.write_record([
                g.group.clone(),
                s.x.to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.variance.to_string(),
                s.ks_distance.to_string(),
                b.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;

    let hist = a.histogram.clone().unwrap_or_else(|| sibling(&a.report, ".hist.csv"));
    let mut w = csv_writer(&hist, &prov)?;
    w.write_record(["group", "lo", "hi", "count", "normal_expected"]).map_err(csv_err)?;
    let xmax = *xgrid.last().ok_or_else(|| Error::InvalidInput("empty --xgrid".into()))?;
    for g in &out {
        let (values, absc): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| g.group == "all" || g.group == format!("class {}", r.klass)).map(|r| (r.value, r.absc)).unzip();
        let s = SymbolSample::new(values, absc).below(xmax);
        let Some(c) = g.c_used else { continue };
        if s.len() < 2 {
            continue;
        }
        let z = normalized_values(&s, &Normalization { c, x: xmax, center: a.center, per_denominator: a.per_denominator })?;
        let (lo, hi, nb) = (-4.0, 4.0, a.bins.max(1));
        let width = (hi - lo) / nb as f64;
        let mut counts = vec![0u64; nb];
        for v in &z {
            let k = ((v - lo) / width).floor();
            if k >= 0.0 && (k as usize) < nb {
                counts[k as usize] += 1;
            }
        }
        for (k, n) in counts.iter().enumerate() {
            let (a0, a1) = (lo + k as f64 * width, lo + (k + 1) as f64 * width);
            let expect = z.len() as f64 * (normal_cdf(a1) - normal_cdf(a0));
            w.write_record([g.group.clone(), a0.to_string(), a1.to_string(), n.to_string(), expect.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;

    for g in &out {
        match (g.per_x.last(), g.c_used) {
            (Some(s), Some(c)) => {
                println!("{}: n={} var={:.6} C={:.6} KS={:.4}", g.group, s.n, s.variance, c, s.ks_distance)
            }
            _ => println!("{}: {}; moments only", g.group, g.note.as_deref().unwrap_or("no normalization constant")),
        }
        if let Some((o, _)) = g.period_lattice {
            println!("{}: values lie on {:.8}Z", g.group, o);
        }
    }
    write_json(&a.report, &StatsReport { provenance: prov, groups: out })
}

#[derive(Serialize)]
struct ConstantsOutput {
    provenance: Provenance,
    constants: constants::ConstantsReport,
}

fn cmd_constants(form: &Path, mesh: usize, report: &Path) -> Result<()> {
    let spec = load_form(form)?;
    let rep = constants::constants_report(&spec, mesh)?;
    let prov = RunConfig::new("constants")
        .with("form", &spec.config)
        .with("form_hash", form_hash(&spec.config))
        .with("mesh", mesh)
        .provenance();
    println!("{}", serde_json::to_string_pretty(&rep)?);
    write_json(report, &ConstantsOutput { provenance: prov, constants: rep })
}

#[derive(Serialize)]
struct VerifyOutput {
    provenance: Provenance,
    checks: Vec<Check>,
}

fn cmd_verify(form: &Path, xgrid: &[f64], tol: f64, seed: u64, report: Option<&Path>) -> Result<bool> {
    let spec = load_form(form)?;
    let checks = verify::run_all(&spec, xgrid, tol, seed)?;
    for c in &checks {
        println!("[{}] {:>2} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    let ok = checks.iter().all(|c| c.passed);
    println!("{}/{} criteria passed", checks.iter().filter(|c| c.passed).count(), checks.len());
    if let Some(p) = report {
        let prov = RunConfig::new("verify")
            .with("form", &spec.config)
            .with("form_hash", form_hash(&spec.config))
            .with("xgrid", xgrid)
            .with("tol", tol)
            .with("seed", seed)
            .provenance();
        write_json(p, &VerifyOutput { provenance: prov, checks })?;
    }
    Ok(ok)
}

/// Runs a parsed command; `Ok(false)` means a verification criterion failed.
pub fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set thread count: {e}")))?;
    }
    match &cli.command {
        Command::Coeffs { form, out } => cmd_coeffs(form, out.as_deref())?,
        Command::Enumerate { field, level, divisor, xmax, out } => cmd_enumerate(*field, level, divisor, *xmax, out)?,
        Command::Symbols { form, fractions, tol, split, out } => cmd_symbols(form, fractions, *tol, *split, out)?,
        Command::Stats(a) => cmd_stats(a)?,
        Command::Constants { form, mesh, report } => cmd_constants(form, *mesh, report)?,
        Command::Verify { form, xgrid, tol, seed, report } => return cmd_verify(form, xgrid, *tol, *seed, report.as_deref()),
    }
    Ok(true)
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
