mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use aperiodica::autocorr::{autocorrelation, DEFAULT_CLUSTER_TOL};
use aperiodica::cutproject::{preset, CutProjectScheme, SchemeConfig, Window, PRESET_NAMES};
use aperiodica::diffraction::{compare_spectra, empirical_spectrum, empirical_spectrum_at, SpectrumMethod};
use aperiodica::io::{load_points, read_spectrum_csv, save_coloured, save_points};
use aperiodica::pointset::{
    almost_period_defect, delone_report, meyer_check, poisson_sample, MeyerOptions, PointSet,
};
use aperiodica::substitution::{generate_substitution_points, match_model_set, RuleConfig, SubstitutionRule};
use clap::error::{ContextKind, ErrorKind};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::{write_json, write_measure, write_periods, write_spectrum, Format, PeriodRow, Sidecar};

/// Bad input from the user: exit status 2.
#[derive(Debug)]
struct ConfigError {
    field: String,
    msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(field: &str, msg: impl fmt::Display) -> anyhow::Error {
    ConfigError { field: field.into(), msg: msg.to_string().replace('\n', " ") }.into()
}

fn presets_help() -> String {
    format!("Presets: {}", PRESET_NAMES.join(", "))
}

#[derive(Parser, Debug)]
#[command(name = "aperiodica", version, about = "Aperiodic point sets, their autocorrelation and diffraction")]
#[command(after_help = presets_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a model set, a lattice or a Poisson control sample
    Generate(GenerateArgs),
    /// Generate a 1D point set from a substitution rule
    Substitute(SubstituteArgs),
    /// Delone constants and Meyer check of a point file
    Analyze(AnalyzeArgs),
    /// Autocorrelation measure of a point file
    Autocorr(AutocorrArgs),
    /// Empirical Bragg intensities of a point file
    DiffractEmpirical(EmpiricalArgs),
    /// Closed-form diffraction of a model set
    DiffractAnalytic(AnalyticArgs),
    /// Statistical almost periods of a point file
    AlmostPeriods(PeriodArgs),
    /// Match the peaks of two spectrum files
    Compare(CompareArgs),
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct SchemeSource {
    #[arg(long, help = presets_help(), conflicts_with = "scheme")]
    preset: Option<String>,
    /// JSON file with physical_dim, internal_dim, basis and window
    #[arg(long)]
    scheme: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct GenerateArgs {
    #[command(flatten)]
    source: SchemeSource,
    /// I.i.d. uniform points with the given density and seed
    #[arg(long, num_args = 2, value_names = ["DENSITY", "SEED"], conflicts_with_all = ["preset", "scheme"])]
    random_poisson: Option<Vec<String>>,
    /// Dimension of the Poisson sample
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    label: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct SubstituteArgs {
    /// JSON rule: {"alphabet": [...], "rules": {...}, "lengths": "perron" | [...]}
    #[arg(long, conflicts_with = "preset")]
    rule: Option<PathBuf>,
    /// Built-in rule whose tiles match the model set of the same name:
    /// fibonacci or silver_mean
    #[arg(long)]
    preset: Option<String>,
    /// Seed symbol (default: first letter of the alphabet)
    #[arg(long)]
    seed_symbol: Option<char>,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 0.0)]
    origin: f64,
    /// Also match against the model set of the preset
    #[arg(long, requires = "preset")]
    check: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct AnalyzeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    probe_spacing: f64,
    /// Difference-set radius of the Meyer check
    #[arg(long, default_value_t = 10.0)]
    meyer_cutoff: f64,
    #[arg(long)]
    gap_threshold: Option<f64>,
    #[arg(long, default_value_t = 64)]
    f_max: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct AutocorrArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    cutoff: f64,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
    cluster_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct EmpiricalArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Reciprocal points of this scheme are the candidates
    #[command(flatten)]
    source: SchemeSource,
    /// Point file of wave vectors to use as candidates
    #[arg(long, conflicts_with_all = ["preset", "scheme"])]
    k_file: Option<PathBuf>,
    #[arg(long)]
    k_radius: Option<f64>,
    #[arg(long, default_value_t = 30)]
    index_bound: i64,
    #[arg(long, default_value_t = 0.0)]
    floor: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct AnalyticArgs {
    #[command(flatten)]
    source: SchemeSource,
    #[arg(long)]
    k_radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    floor: f64,
    #[arg(long, default_value_t = 30)]
    index_bound: i64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short, long, default_value = "analytic.csv")]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct PeriodArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Default: largest |t| plus twice the covering radius
    #[arg(long)]
    guard: Option<f64>,
    /// Point file of candidate shifts
    #[arg(long, conflicts_with_all = ["preset", "scheme", "star_bound"])]
    candidates: Option<PathBuf>,
    /// Lift candidates from this scheme's window instead of the sample
    #[command(flatten)]
    source: SchemeSource,
    /// Keep lifted candidates with |t*| at most this
    #[arg(long)]
    star_bound: Option<f64>,
    /// Keep candidates with |t| at most this
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    /// Reference spectrum; relative errors are taken against it
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    ktol: f64,
    #[arg(short, long, default_value = "compare.json")]
    output: PathBuf,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be a positive number, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be a non-negative number, got {v}")))
    }
}

fn read_points(field: &str, path: &Path) -> Result<PointSet> {
    load_points(path).map_err(|e| config_err(field, format!("{}: {e}", path.display())))
}

fn resolve_scheme(src: &SchemeSource) -> Result<Option<(CutProjectScheme, Window, String)>> {
    if let Some(name) = &src.preset {
        let p = preset(name).map_err(|e| config_err("preset", e))?;
        return Ok(Some((p.scheme, p.window, p.name)));
    }
    if let Some(path) = &src.scheme {
        let text = fs::read_to_string(path).map_err(|e| config_err("scheme", format!("{}: {e}", path.display())))?;
        let cfg: SchemeConfig = serde_json::from_str(&text).map_err(|e| config_err("scheme", e))?;
        let (scheme, window) = cfg.build().map_err(|e| config_err("scheme", format!("{}: {e}", e.name())))?;
        return Ok(Some((scheme, window, path.display().to_string())));
    }
    Ok(None)
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let radius = positive("radius", a.radius)?;
    let mut seed = None;
    let ps = if let Some(vals) = &a.random_poisson {
        let density: f64 = vals[0].parse().map_err(|_| config_err("random-poisson", "DENSITY must be a number"))?;
        positive("random-poisson", density)?;
        let s: u64 = vals[1].parse().map_err(|_| config_err("random-poisson", "SEED must be an unsigned integer"))?;
        if a.dim == 0 {
            return Err(config_err("dim", "must be at least 1"));
        }
        seed = Some(s);
        poisson_sample(a.dim, density, radius, s)?
    } else {
        let (scheme, window, name) = resolve_scheme(&a.source)?
            .ok_or_else(|| config_err("preset", "one of --preset, --scheme or --random-poisson is required"))?;
        let ps = scheme.generate_model_set(&window, radius)?;
        ps.with_label(name)
    };
    let ps = match &a.label {
        Some(l) => ps.with_label(l.clone()),
        None => ps,
    };
    save_points(&a.output, &ps)?;
    let mut side = Sidecar::new("generate", a, seed)?;
    side.set("points", ps.len())?;
    side.set("density", ps.density())?;
    side.write(&a.output)
}

fn builtin_rule(name: &str) -> Result<SubstitutionRule> {
    let built = match name {
        "fibonacci" => SubstitutionRule::new(&[('a', "ab"), ('b', "a")])
            .and_then(|r| r.with_lengths(vec![(1.0 + 5f64.sqrt()) / 2.0, 1.0])),
        "silver_mean" => SubstitutionRule::new(&[('a', "aab"), ('b', "a")])
            .and_then(|r| r.with_lengths(vec![1.0 + 2f64.sqrt(), 1.0])),
        _ => return Err(config_err("preset", format!("no substitution rule named {name:?} (fibonacci, silver_mean)"))),
    };
    Ok(built?)
}

fn substitute(a: &SubstituteArgs) -> Result<()> {
    positive("tol", a.tol)?;
    if !a.origin.is_finite() {
        return Err(config_err("origin", "must be finite"));
    }
    let rule = match (&a.rule, &a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| config_err("rule", format!("{}: {e}", path.display())))?;
            let cfg: RuleConfig = serde_json::from_str(&text).map_err(|e| config_err("rule", e))?;
            cfg.build().map_err(|e| config_err("rule", format!("{}: {e}", e.name())))?
        }
        (None, Some(name)) => builtin_rule(name)?,
        (None, None) => return Err(config_err("rule", "one of --rule or --preset is required")),
    };
    let seed = a.seed_symbol.unwrap_or(rule.alphabet()[0]);
    if !rule.alphabet().contains(&seed) {
        return Err(config_err("seed-symbol", format!("{seed:?} is not in the alphabet")));
    }
    let cs = generate_substitution_points(&rule, seed, a.iterations, a.origin)?;
    save_coloured(&a.output, &cs)?;
    let mut side = Sidecar::new("substitute", a, None)?;
    side.set("points", cs.len())?;
    side.set("eigenvalue", rule.eigenvalue())?;
    side.set("lengths", rule.lengths())?;
    side.set("letter_frequencies", rule.letter_frequencies()?)?;
    if a.check {
        let name = a.preset.as_deref().unwrap_or_default();
        let p = preset(name).map_err(|e| config_err("preset", e))?;
        let reach = cs.positions().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let ps = p.scheme.generate_model_set(&p.window, reach + 10.0)?;
        side.set("match", match_model_set(&cs, &ps, a.tol)?)?;
    }
    side.write(&a.output)
}

#[derive(Serialize)]
struct AnalyzeReport {
    points: usize,
    dimension: usize,
    sample_radius: f64,
    delone: aperiodica::pointset::DeloneReport,
    meyer: aperiodica::pointset::MeyerReport,
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    positive("probe-spacing", a.probe_spacing)?;
    positive("meyer-cutoff", a.meyer_cutoff)?;
    let mut opts = MeyerOptions { f_max: a.f_max, ..MeyerOptions::default() };
    if let Some(g) = a.gap_threshold {
        opts.gap_threshold = non_negative("gap-threshold", g)?;
    }
    let ps = read_points("input", &a.input)?;
    let report = AnalyzeReport {
        points: ps.len(),
        dimension: ps.dim(),
        sample_radius: ps.sample_radius(),
        delone: delone_report(&ps, a.probe_spacing)?,
        meyer: meyer_check(&ps, a.meyer_cutoff, opts)?,
    };
    write_json(&a.output, &report)?;
    Sidecar::new("analyze", a, None)?.write(&a.output)
}

fn autocorr(a: &AutocorrArgs) -> Result<()> {
    positive("cutoff", a.cutoff)?;
    positive("cluster-tol", a.cluster_tol)?;
    let ps = read_points("input", &a.input)?;
    let g = autocorrelation(&ps, a.cutoff, a.cluster_tol)?;
    let mut side = Sidecar::new("autocorr", a, None)?;
    write_measure(&a.output, &g, a.format, &mut side)?;
    side.set("atoms", g.atoms.len())?;
    side.write(&a.output)
}

fn diffract_empirical(a: &EmpiricalArgs) -> Result<()> {
    non_negative("floor", a.floor)?;
    let ps = read_points("input", &a.input)?;
    let spectrum = if let Some(path) = &a.k_file {
        let ks = read_points("k-file", path)?;
        empirical_spectrum(&ps, &ks.to_vecs(), a.floor)?
    } else {
        let (scheme, _, _) = resolve_scheme(&a.source)?
            .ok_or_else(|| config_err("preset", "one of --preset, --scheme or --k-file is required"))?;
        let k_radius = positive("k-radius", a.k_radius.ok_or_else(|| config_err("k-radius", "required with a scheme"))?)?;
        if a.index_bound < 1 {
            return Err(config_err("index-bound", "must be at least 1"));
        }
        empirical_spectrum_at(&ps, &scheme.reciprocal_points(k_radius, a.index_bound), a.floor)?
    };
    write_spectrum(&a.output, &spectrum, a.format)?;
    let mut side = Sidecar::new("diffract-empirical", a, None)?;
    side.set("method", spectrum.method)?;
    side.set("sample_radius_used", spectrum.sample_radius_used)?;
    side.set("peaks", spectrum.len())?;
    side.write(&a.output)
}

fn diffract_analytic(a: &AnalyticArgs) -> Result<()> {
    positive("k-radius", a.k_radius)?;
    non_negative("floor", a.floor)?;
    if a.index_bound < 1 {
        return Err(config_err("index-bound", "must be at least 1"));
    }
    let (scheme, window, _) =
        resolve_scheme(&a.source)?.ok_or_else(|| config_err("preset", "one of --preset or --scheme is required"))?;
    let spectrum = scheme.analytic_diffraction(&window, a.k_radius, a.index_bound, a.floor)?;
    write_spectrum(&a.output, &spectrum, a.format)?;
    let mut side = Sidecar::new("diffract-analytic", a, None)?;
    side.set("method", spectrum.method)?;
    side.set("sample_radius_used", spectrum.sample_radius_used)?;
    side.set("peaks", spectrum.len())?;
    side.set("density", scheme.window_density(&window))?;
    side.write(&a.output)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn almost_periods(a: &PeriodArgs) -> Result<()> {
    non_negative("epsilon", a.epsilon)?;
    let ps = read_points("input", &a.input)?;
    let t_max = a.t_max.map(|t| non_negative("t-max", t)).transpose()?;
    let within = |t: &[f64]| t_max.is_none_or(|m| norm(t) <= m);
    let mut cands: Vec<Vec<f64>> = if let Some(path) = &a.candidates {
        read_points("candidates", path)?.to_vecs()
    } else if let Some((scheme, window, _)) = resolve_scheme(&a.source)? {
        let star = positive("star-bound", a.star_bound.ok_or_else(|| config_err("star-bound", "required with a scheme"))?)?;
        let reach = positive("t-max", t_max.ok_or_else(|| config_err("t-max", "required with a scheme"))?)?;
        scheme
            .generate_lifted(&window, reach)?
            .into_iter()
            .filter(|l| norm(&l.internal) <= star)
            .map(|l| l.physical)
            .collect()
    } else {
        if t_max.is_none() {
            return Err(config_err("t-max", "required when candidates come from the sample"));
        }
        ps.to_vecs()
    };
    cands.retain(|t| within(t));
    cands.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(t) = cands.iter().find(|t| t.len() != ps.dim()) {
        return Err(config_err("candidates", format!("dimension {} does not match the sample ({})", t.len(), ps.dim())));
    }
    let guard = match a.guard {
        Some(g) => non_negative("guard", g)?,
        None => {
            let far = cands.iter().map(|t| norm(t)).fold(0.0, f64::max);
            far + 2.0 * delone_report(&ps, 0.05)?.covering_radius
        }
    };
    let threshold = a.epsilon * ps.density();
    let mut rows = Vec::with_capacity(cands.len());
    for t in cands {
        let defect = almost_period_defect(&ps, &t, guard)?;
        rows.push(PeriodRow { kept: defect <= threshold, t, defect });
    }
    write_periods(&a.output, &rows, ps.dim(), a.format)?;
    let mut side = Sidecar::new("almost-periods", a, None)?;
    side.set("guard_used", guard)?;
    side.set("threshold", threshold)?;
    side.set("candidates", rows.len())?;
    side.set("kept", rows.iter().filter(|r| r.kept).count())?;
    if ps.dim() == 1 {
        let kept: Vec<f64> = rows.iter().filter(|r| r.kept).map(|r| r.t[0]).collect();
        let gap = kept.windows(2).map(|w| w[1] - w[0]).fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
        side.set("max_gap", gap)?;
    }
    side.write(&a.output)
}

/// Method and radius come from the spectrum's sidecar when there is one.
fn read_spectrum(field: &str, path: &Path) -> Result<aperiodica::diffraction::DiffractionSpectrum> {
    let side: Option<serde_json::Value> =
        fs::read_to_string(output::sidecar_path(path)).ok().and_then(|s| serde_json::from_str(&s).ok());
    let method = match side.as_ref().and_then(|v| v["method"].as_str()) {
        Some("analytic") => SpectrumMethod::Analytic,
        Some("smoothed") => SpectrumMethod::Smoothed,
        _ => SpectrumMethod::Empirical,
    };
    let radius = side.as_ref().and_then(|v| v["sample_radius_used"].as_f64());
    let file = fs::File::open(path).map_err(|e| config_err(field, format!("{}: {e}", path.display())))?;
    read_spectrum_csv(std::io::BufReader::new(file), method, radius)
        .map_err(|e| config_err(field, format!("{}: {e}", path.display())))
}

fn compare(a: &CompareArgs) -> Result<()> {
    positive("ktol", a.ktol)?;
    let sa = read_spectrum("a", &a.a)?;
    let sb = read_spectrum("b", &a.b)?;
    let report = compare_spectra(&sa, &sb, a.ktol)?;
    write_json(&a.output, &report)?;
    let mut side = Sidecar::new("compare", a, None)?;
    side.set("max_rel_intensity_error", report.max_rel_intensity_error)?;
    side.set("matched", report.matched_pairs.len())?;
    side.write(&a.output)
}

fn set_threads() -> Result<()> {
    let Ok(raw) = std::env::var("APERIODICA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| config_err("APERIODICA_THREADS", format!("expected a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    set_threads()?;
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Substitute(a) => substitute(a),
        Command::Analyze(a) => analyze(a),
        Command::Autocorr(a) => autocorr(a),
        Command::DiffractEmpirical(a) => diffract_empirical(a),
        Command::DiffractAnalytic(a) => diffract_analytic(a),
        Command::AlmostPeriods(a) => almost_periods(a),
        Command::Compare(a) => compare(a),
    }
}

/// Clap's message squeezed onto one line, without the usage block.
fn clap_diagnostic(e: &clap::Error) -> String {
    let text = e.to_string();
    let head: Vec<&str> = text.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
    let mut line = head.join(" ");
    if let Some(arg) = e.get(ContextKind::InvalidArg) {
        if !line.contains(&arg.to_string()) {
            line = format!("{line} ({arg})");
        }
    }
    line
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", clap_diagnostic(&e));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("error: {c}");
                return ExitCode::from(2);
            }
            match e.downcast_ref::<aperiodica::Error>() {
                Some(err) => eprintln!("error: {}: {err}", err.name()),
                None => eprintln!("error: {}", format!("{e:#}").replace('\n', " ")),
            }
            ExitCode::from(3)
        }
    }
}
