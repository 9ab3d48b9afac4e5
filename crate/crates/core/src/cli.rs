//! Command-line front end. Every subcommand reads its inputs from flags and
//! files and writes one deterministic output (stdout unless `--output`).
//! Diagnostics go to stderr.
//!
//! Exit codes: 0 success, 2 usage error, 1 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::closed_form::{preset, preset_rows, sample_gated, Family, PresetKey};
use crate::daub_reference::{cascade_scaling, cascade_wavelet, daubechies_filter, MAX_LEVELS};
use crate::error::Error;
use crate::format::sig17;
use crate::inharmonic::{inharmonic_table, write_table_csv};
use crate::scalogram::{
    center_frequency, cwt, detect_tones, two_tone, write_scalogram_csv, CenterMethod, ScaleGrid,
};
use crate::sine_fit::{goodness, lm_fit, parse_family, Kind, LmOptions, ModelFile, SumOfSines};
use crate::spectrum::{dft_oracle, eq16_deviation, eq16_grid, exact_grid, linear_grid};
use crate::waveform::SampledWaveform;

#[derive(Debug, Parser)]
#[command(name = "daublet", version, about = "Closed-form Daubechies wavelets: references, fits, spectra, scalograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cascade-algorithm reference waveform as `t,value` CSV.
    Gen(GenArgs),
    /// Levenberg-Marquardt fit of a cascade waveform; writes a JSON model.
    Fit(FitArgs),
    /// Samples a gated closed-form model as `t,value` CSV.
    Eval(EvalArgs),
    /// Analytic or DFT spectrum as `omega,real,imag,magnitude` CSV.
    Spectrum(SpectrumArgs),
    /// Deviation of each frequency from the harmonic grid k·2π/T.
    Inharm(InharmArgs),
    /// CWT scalogram with a closed-form kernel, plus detected tones.
    Cwt(CwtArgs),
    /// The shipped coefficient tables, verbatim, with checksums.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Wavelet,
    Scaling,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Wavelet => Kind::Wavelet,
            KindArg::Scaling => Kind::Scaling,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Eq16,
    Exact,
    Dft,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Center {
    Dominant,
    Dft,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Shipped preset, e.g. db4-wavelet.
    #[arg(long)]
    preset: Option<String>,
    /// JSON model file.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Daubechies family dbN, N in 1..=10.
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value = "wavelet")]
    kind: KindArg,
    /// Cascade levels J; grid step 2^-J.
    #[arg(long, default_value_t = 10)]
    levels: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Daubechies family dbN, N in 1..=10.
    #[arg(long)]
    family: String,
    /// Number of sine terms [default: 8 for wavelet, 10 for scaling].
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, value_enum, default_value = "wavelet")]
    kind: KindArg,
    /// Cascade levels J of the target.
    #[arg(long, default_value_t = 10)]
    levels: u32,
    /// `auto` (spectral initialization) or a JSON model file.
    #[arg(long, default_value = "auto")]
    init: String,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Fit report JSON file (default: stderr).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Sampling step; must be at most T/16.
    #[arg(long)]
    dt: f64,
    /// Cascade levels J of the reference used for the R² report.
    #[arg(long, default_value_t = 10)]
    levels: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    /// Upper end of the frequency grid [default: 3·max(b_k)].
    #[arg(long)]
    omega_max: Option<f64>,
    /// Grid points on [0, omega-max] (eq16, exact).
    #[arg(long, default_value_t = 4096)]
    points: usize,
    /// Sampling step for the dft method [default: T/16384].
    #[arg(long)]
    dt: Option<f64>,
    /// Zero-padding factor for the dft method.
    #[arg(long, default_value_t = 4)]
    zero_pad: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct InharmArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Comma-separated harmonic indices, one per term in ascending frequency
    /// order [default: nearest integer of b/(2π/T)].
    #[arg(long, value_delimiter = ',')]
    k_assignment: Option<Vec<usize>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "signal_source", required = true, multiple = false, args = ["signal", "two_tone"])]
struct CwtArgs {
    /// Input signal as `t,value` CSV on a uniform grid.
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Built-in test signal `f1,f2,duration,dt`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    two_tone: Option<Vec<f64>>,
    /// Kernel preset.
    #[arg(long, default_value = "db4-wavelet", conflicts_with = "model")]
    preset: String,
    /// Kernel JSON model file (instead of --preset).
    #[arg(long)]
    model: Option<PathBuf>,
    /// `auto` (64 log scales spanning [2/duration, 0.5/dt]),
    /// `log:MIN:MAX:COUNT`, or a comma-separated ascending list.
    #[arg(long, default_value = "auto")]
    scales: String,
    /// Center-frequency estimate used to map scales to frequencies.
    #[arg(long, value_enum, default_value = "dominant")]
    center: Center,
    /// Number of tones to detect.
    #[arg(long, default_value_t = 2)]
    tones: usize,
    /// Tone report JSON file (default: stderr).
    #[arg(long)]
    tones_output: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct TablesArgs {
    /// db4, db6 or db8 [default: all].
    #[arg(long)]
    family: Option<String>,
    /// [default: both]
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{flag}: {msg}"))
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Inharm(a) => inharm(a),
        Command::Cwt(a) => run_cwt(a),
        Command::Tables(a) => tables(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(out: &OutputArgs, bytes: &[u8]) -> Outcome<()> {
    write_to(out.output.as_deref(), bytes, false)
}

fn write_to(path: Option<&Path>, bytes: &[u8], stderr: bool) -> Outcome<()> {
    let res = match path {
        Some(p) => fs::write(p, bytes),
        None if stderr => std::io::stderr().write_all(bytes),
        None => std::io::stdout().write_all(bytes),
    };
    res.map_err(|e| Failure::Numeric(e.into()))
}

fn read_text(flag: &str, path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| usage(flag, format!("{}: {e}", path.display())))
}

fn read_model(flag: &str, path: &Path) -> Outcome<ModelFile> {
    let text = read_text(flag, path)?;
    ModelFile::from_json(&text).map_err(|e| usage(flag, format!("{}: {e}", path.display())))
}

fn load_model(src: &ModelSource) -> Outcome<ModelFile> {
    match (&src.preset, &src.model) {
        (Some(name), _) => {
            let key: PresetKey = name.parse().map_err(|e| usage("--preset", e))?;
            Ok(ModelFile::new(key.family.name(), key.kind, &preset(key)))
        }
        (None, Some(path)) => read_model("--model", path),
        (None, None) => Err(Failure::Usage("one of --preset or --model is required".into())),
    }
}

fn parse_order(flag: &str, family: &str) -> Outcome<usize> {
    parse_family(family).ok_or_else(|| usage(flag, format!("expected dbN, got `{family}`")))
}

fn cascade(order: usize, kind: Kind, levels: u32) -> Outcome<SampledWaveform> {
    let spec = daubechies_filter(order)?;
    Ok(match kind {
        Kind::Wavelet => cascade_wavelet(&spec, levels)?,
        Kind::Scaling => cascade_scaling(&spec, levels)?,
    })
}

fn waveform_bytes(wave: &SampledWaveform, format: Format) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => wave.write_csv(&mut buf)?,
        Format::Json => {
            let values: Vec<String> = wave.values().iter().map(|v| sig17(*v)).collect();
            writeln!(
                buf,
                "{{\"t0\":{},\"dt\":{},\"values\":[{}]}}",
                sig17(wave.t0()),
                sig17(wave.dt()),
                values.join(",")
            )
            .map_err(Error::from)?;
        }
    }
    Ok(buf)
}

fn gen(a: GenArgs) -> Outcome<()> {
    let order = parse_order("--family", &a.family)?;
    let wave = cascade(order, a.kind.into(), a.levels)?;
    emit(&a.out, &waveform_bytes(&wave, a.format)?)
}

fn fit(a: FitArgs) -> Outcome<()> {
    let order = parse_order("--family", &a.family)?;
    let kind: Kind = a.kind.into();
    let terms = a.terms.unwrap_or(match kind {
        Kind::Wavelet => 8,
        Kind::Scaling => 10,
    });
    let init = match a.init.as_str() {
        "auto" => None,
        path => {
            let m = read_model("--init", Path::new(path))?.model()?;
            if m.len() != terms {
                return Err(usage("--init", format!("model has {} terms but --terms is {terms}", m.len())));
            }
            Some(m)
        }
    };
    let target = cascade(order, kind, a.levels)?;
    let options = LmOptions { max_iters: a.max_iters, ..LmOptions::default() };
    let (model, mut report) = lm_fit(&target, terms, init.as_ref(), &options)?;
    let support = (2 * order - 1) as f64;
    let model = SumOfSines::new(model.terms().to_vec(), support)?;
    report.cost_trace.clear();

    let file = ModelFile::new(format!("db{order}"), kind, &model);
    emit(&a.out, file.to_json()?.as_bytes())?;
    let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    text.push('\n');
    write_to(a.report.as_deref(), text.as_bytes(), true)
}

fn eval(a: EvalArgs) -> Outcome<()> {
    let file = load_model(&a.source)?;
    let model = file.model()?;
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(usage("--dt", format!("must be positive, got {}", a.dt)));
    }
    let wave = sample_gated(&model, a.dt)?;
    emit(&a.out, &waveform_bytes(&wave, a.format)?)?;

    if let Some(order) = file.daubechies_order() {
        if a.levels == 0 || a.levels > MAX_LEVELS {
            return Err(usage("--levels", format!("must be 1..={MAX_LEVELS}")));
        }
        let reference = cascade(order, file.kind, a.levels)?;
        let report = goodness(&model, &reference)?;
        let text = json!({
            "reference": format!("cascade db{order} {} J={}", file.kind, a.levels),
            "r_squared": report.r_squared,
            "rmse": report.rmse,
        });
        eprintln!("{text}");
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Outcome<()> {
    let model = load_model(&a.source)?.model()?;
    let max_b = model.terms().iter().map(|t| t.frequency.abs()).fold(0.0, f64::max);
    let omega_max = match a.omega_max {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => return Err(usage("--omega-max", format!("must be positive, got {w}"))),
        None if max_b > 0.0 => 3.0 * max_b,
        None => return Err(usage("--omega-max", "required when every frequency is zero")),
    };
    let mut buf = Vec::new();
    let grid = match a.method {
        Method::Exact => exact_grid(&model, linear_grid(0.0, omega_max, a.points)?)?,
        Method::Eq16 => {
            let omegas = linear_grid(0.0, omega_max, a.points)?;
            let dev = eq16_deviation(&model, &omegas);
            writeln!(buf, "# eq16_relative_l2_vs_exact={}", sig17(dev)).map_err(Error::from)?;
            eprintln!("eq16 relative L2 distance from |exact| on [0, {omega_max}]: {dev:.6}");
            eq16_grid(&model, omegas)?
        }
        Method::Dft => {
            let dt = a.dt.unwrap_or(model.support() / 16384.0);
            let wave = sample_gated(&model, dt)?;
            if a.zero_pad == 0 {
                return Err(usage("--zero-pad", "must be at least 1"));
            }
            dft_oracle(&wave, a.zero_pad * wave.len())?.restrict(0.0, omega_max)
        }
    };
    grid.write_csv(&mut buf)?;
    emit(&a.out, &buf)
}

fn inharm(a: InharmArgs) -> Outcome<()> {
    let model = load_model(&a.source)?.model()?.sorted_by_frequency();
    let rows = match &a.k_assignment {
        Some(ks) if ks.len() != model.len() => {
            return Err(usage(
                "--k-assignment",
                format!("{} entries for {} terms", ks.len(), model.len()),
            ))
        }
        Some(ks) => inharmonic_table(&model, Some(ks)).map_err(|e| usage("--k-assignment", e))?,
        None => inharmonic_table(&model, None)?,
    };
    let mut buf = Vec::new();
    write_table_csv(&rows, &mut buf)?;
    emit(&a.out, &buf)
}

fn parse_scales(spec: &str, signal: &SampledWaveform, fc: f64) -> Outcome<ScaleGrid> {
    let dt = signal.dt();
    let bad = |msg: String| usage("--scales", msg);
    if spec == "auto" {
        return Ok(ScaleGrid::for_signal(signal, fc)?);
    }
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected log:MIN:MAX:COUNT, got `{spec}`")));
        }
        let min: f64 = parts[0].parse().map_err(|_| bad(format!("bad MIN `{}`", parts[0])))?;
        let max: f64 = parts[1].parse().map_err(|_| bad(format!("bad MAX `{}`", parts[1])))?;
        let count: usize = parts[2].parse().map_err(|_| bad(format!("bad COUNT `{}`", parts[2])))?;
        return ScaleGrid::log_spaced(min, max, count, dt).map_err(|e| bad(e.to_string()));
    }
    let scales = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad scale `{s}`"))))
        .collect::<Outcome<Vec<f64>>>()?;
    ScaleGrid::new(scales, dt).map_err(|e| bad(e.to_string()))
}

fn run_cwt(a: CwtArgs) -> Outcome<()> {
    let signal = match (&a.signal, &a.two_tone) {
        (Some(path), _) => {
            let text = read_text("--signal", path)?;
            SampledWaveform::read_csv(text.as_bytes())
                .map_err(|e| usage("--signal", format!("{}: {e}", path.display())))?
        }
        (None, Some(v)) => match v.as_slice() {
            &[f1, f2, duration, dt] => two_tone(f1, f2, duration, dt)?,
            _ => return Err(usage("--two-tone", "expected f1,f2,duration,dt")),
        },
        (None, None) => return Err(Failure::Usage("one of --signal or --two-tone is required".into())),
    };
    let kernel = match &a.model {
        Some(path) => read_model("--model", path)?.model()?,
        None => preset(a.preset.parse().map_err(|e| usage("--preset", e))?),
    };
    let method = match a.center {
        Center::Dominant => CenterMethod::DominantTerm,
        Center::Dft => CenterMethod::DftPeak,
    };
    let fc = center_frequency(&kernel, method)?;
    let scales = parse_scales(&a.scales, &signal, fc)?;
    if a.tones == 0 || a.tones > scales.len() {
        return Err(usage("--tones", format!("must be 1..={}", scales.len())));
    }
    let gram = cwt(&signal, &scales, &kernel)?;
    let mut buf = Vec::new();
    write_scalogram_csv(&gram, &mut buf)?;
    emit(&a.out, &buf)?;

    let report = detect_tones(&gram, fc, a.tones)?;
    if !report.complete {
        eprintln!("warning: found {} of {} requested tones", report.tones.len(), a.tones);
    }
    write_to(a.tones_output.as_deref(), report.to_json()?.as_bytes(), true)
}

/// SHA-256 of a preset's rows rendered as `a,b,c` lines.
fn rows_checksum(key: PresetKey) -> String {
    let mut h = Sha256::new();
    for [a, b, c] in preset_rows(key) {
        h.update(format!("{a},{b},{c}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

fn tables(a: TablesArgs) -> Outcome<()> {
    let family: Option<Family> = match &a.family {
        Some(f) => Some(f.parse().map_err(|e| usage("--family", e))?),
        None => None,
    };
    let kind: Option<Kind> = a.kind.map(Into::into);
    let keys: Vec<PresetKey> = PresetKey::all()
        .into_iter()
        .filter(|k| family.is_none_or(|f| f == k.family) && kind.is_none_or(|x| x == k.kind))
        .collect();

    let mut buf = Vec::new();
    match a.format {
        Format::Csv => {
            for key in &keys {
                writeln!(buf, "# {key} sha256={}", rows_checksum(*key)).map_err(Error::from)?;
            }
            writeln!(buf, "family,kind,k,a,b,c").map_err(Error::from)?;
            for key in &keys {
                for (i, [x, y, z]) in preset_rows(*key).iter().enumerate() {
                    writeln!(buf, "{},{},{},{x},{y},{z}", key.family, key.kind, i + 1).map_err(Error::from)?;
                }
            }
        }
        Format::Json => {
            let files: Vec<ModelFile> =
                keys.iter().map(|k| ModelFile::new(k.family.name(), k.kind, &preset(*k))).collect();
            let text = if let [one] = files.as_slice() {
                one.to_json()?
            } else {
                let mut s = serde_json::to_string_pretty(&files).map_err(Error::from)?;
                s.push('\n');
                s
            };
            buf.extend_from_slice(text.as_bytes());
        }
    }
    emit(&a.out, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["daublet", "--help"]), 0);
        assert_eq!(run(["daublet", "tables", "--help"]), 0);
        assert_eq!(run(["daublet"]), 2);
        assert_eq!(run(["daublet", "tables", "--bogus"]), 2);
        assert_eq!(run(["daublet", "gen", "--family", "dbx"]), 2);
        assert_eq!(run(["daublet", "gen", "--family", "db11", "-o", "/dev/null"]), 1);
        assert_eq!(run(["daublet", "eval", "--preset", "db4-wavelet", "--model", "x.json", "--dt", "0.01"]), 2);
        assert_eq!(run(["daublet", "eval", "--preset", "db4-wavelet", "--dt", "1.0"]), 1);
    }

    #[test]
    fn checksums_differ_between_presets() {
        let sums: std::collections::HashSet<_> = PresetKey::all().into_iter().map(rows_checksum).collect();
        assert_eq!(sums.len(), 6);
    }
}
