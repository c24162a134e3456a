//! Experiment configuration: per-experiment defaults, a flat `key = value`
//! config-file format, and the precedence rule *flags over file over
//! defaults*. Every resolved value remembers where it came from so the
//! report header can print full provenance.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::cli::thresholds::{DEFAULT_REPLICAS, DEFAULT_SEED};
use crate::{Error, Result};

/// Instance size, given either as an exact edge count or as a target
/// edge density ρ (in which case m = ⌊ρ n² / 2⌋).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeSpec {
    EdgeCount(u64),
    Density(f64),
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Json => write!(f, "json"),
            OutputFormat::Csv => write!(f, "csv"),
        }
    }
}

/// Where a resolved configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Flag => write!(f, "flag"),
            Source::File => write!(f, "file"),
            Source::Default => write!(f, "default"),
        }
    }
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    pub size: SizeSpec,
    pub kappa: f64,
    pub seed: u64,
    pub samples: u64,
    pub replicas: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// (key, rendered value, source) triples for the report header.
    pub provenance: Vec<(String, String, Source)>,
}

impl ExperimentConfig {
    /// Edge density implied by the size spec at the configured n.
    pub fn rho(&self) -> f64 {
        match self.size {
            SizeSpec::Density(rho) => rho,
            SizeSpec::EdgeCount(m) => 2.0 * m as f64 / (self.n as f64 * self.n as f64),
        }
    }

    /// Edge count at an arbitrary size n along a sweep. An explicit
    /// edge count is honored at the configured n; other sizes scale by
    /// the implied density via m = ⌊ρ n² / 2⌋.
    pub fn edges_at(&self, n: usize) -> u64 {
        match self.size {
            SizeSpec::EdgeCount(m) if n == self.n => m,
            _ => (self.rho() * n as f64 * n as f64 / 2.0).floor() as u64,
        }
    }
}

/// Optional overrides collected from one layer (command line or file).
#[derive(Debug, Clone, Default)]
pub struct Overlay {
    pub n: Option<usize>,
    pub m: Option<u64>,
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

struct Defaults {
    n: usize,
    size: SizeSpec,
    kappa: f64,
    samples: u64,
    replicas: usize,
}

/// The experiments the harness knows how to run.
pub const EXPERIMENT_NAMES: [&str; 6] = [
    "exact-small",
    "degree-gamma",
    "edge-poisson",
    "density-convergence",
    "spag-check",
    "ui-diagnostic",
];

fn defaults_for(experiment: &str) -> Result<Defaults> {
    let d = match experiment {
        "exact-small" => Defaults {
            n: 2,
            size: SizeSpec::EdgeCount(2),
            kappa: 1.0,
            samples: 1,
            replicas: 1,
        },
        "degree-gamma" => Defaults {
            n: 400,
            size: SizeSpec::Density(2.0),
            kappa: 1.5,
            samples: 1,
            replicas: DEFAULT_REPLICAS,
        },
        "edge-poisson" => Defaults {
            n: 200,
            size: SizeSpec::Density(2.0),
            kappa: 1.5,
            samples: 10_000,
            replicas: DEFAULT_REPLICAS,
        },
        "density-convergence" => Defaults {
            n: 400,
            size: SizeSpec::Density(2.0),
            kappa: 1.5,
            samples: 100_000,
            replicas: 1,
        },
        "spag-check" => Defaults {
            n: 2,
            size: SizeSpec::Density(2.0),
            kappa: 1.0,
            samples: 1,
            replicas: 1,
        },
        "ui-diagnostic" => Defaults {
            n: 300,
            size: SizeSpec::Density(2.0),
            kappa: 1.5,
            samples: 1,
            replicas: DEFAULT_REPLICAS,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown experiment '{other}' (expected one of: {})",
                EXPERIMENT_NAMES.join(", ")
            )));
        }
    };
    Ok(d)
}

/// Parse a flat `key = value` config file. Blank lines and lines whose
/// first non-space character is '#' are ignored; unknown keys are
/// rejected so typos cannot silently fall through to defaults.
pub fn parse_config_file(text: &str) -> Result<Overlay> {
    let mut overlay = Overlay::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {lineno}: expected 'key = value', got '{line}'"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::Parse(format!("config line {lineno}: empty value for '{key}'")));
        }
        let bad = |what: &str| Error::Parse(format!("config line {lineno}: invalid {what} '{value}'"));
        match key {
            "n" => overlay.n = Some(value.parse().map_err(|_| bad("n"))?),
            "m" => overlay.m = Some(value.parse().map_err(|_| bad("m"))?),
            "rho" => overlay.rho = Some(value.parse().map_err(|_| bad("rho"))?),
            "kappa" => overlay.kappa = Some(value.parse().map_err(|_| bad("kappa"))?),
            "seed" => overlay.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "samples" => overlay.samples = Some(value.parse().map_err(|_| bad("samples"))?),
            "replicas" => overlay.replicas = Some(value.parse().map_err(|_| bad("replicas"))?),
            "out" => overlay.out = Some(PathBuf::from(value)),
            "format" => {
                overlay.format = Some(match value {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    _ => return Err(bad("format (json|csv)")),
                });
            }
            other => {
                return Err(Error::Parse(format!("config line {lineno}: unknown key '{other}'")));
            }
        }
    }
    Ok(overlay)
}

/// Read and parse a config file from disk.
pub fn load_config_file(path: &Path) -> Result<Overlay> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_file(&text)
}

/// Resolve a final configuration from command-line flags, an optional
/// config file, and per-experiment defaults. Flags beat the file, the
/// file beats defaults; m and rho are resolved as a pair (a layer that
/// sets either one owns the size, so the two are never mixed across
/// layers).
pub fn resolve(experiment: &str, flags: &Overlay, file: &Overlay) -> Result<ExperimentConfig> {
    let defaults = defaults_for(experiment)?;
    let mut provenance: Vec<(String, String, Source)> = Vec::new();
    provenance.push(("experiment".into(), experiment.to_string(), Source::Flag));

    fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> (T, Source) {
        match (flag, file) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::File),
            (None, None) => (default, Source::Default),
        }
    }

    let (n, n_src) = pick(flags.n, file.n, defaults.n);
    provenance.push(("n".into(), n.to_string(), n_src));

    let (size, size_src) = match (flags.m, flags.rho, file.m, file.rho) {
        (Some(_), Some(_), _, _) => {
            return Err(Error::InvalidParameter(
                "give either an edge count or a density, not both".into(),
            ));
        }
        (Some(m), None, _, _) => (SizeSpec::EdgeCount(m), Source::Flag),
        (None, Some(rho), _, _) => (SizeSpec::Density(rho), Source::Flag),
        (None, None, Some(_), Some(_)) => {
            return Err(Error::InvalidParameter(
                "config file sets both m and rho; give one".into(),
            ));
        }
        (None, None, Some(m), None) => (SizeSpec::EdgeCount(m), Source::File),
        (None, None, None, Some(rho)) => (SizeSpec::Density(rho), Source::File),
        (None, None, None, None) => (defaults.size, Source::Default),
    };
    match size {
        SizeSpec::EdgeCount(m) => provenance.push(("m".into(), m.to_string(), size_src)),
        SizeSpec::Density(rho) => provenance.push(("rho".into(), rho.to_string(), size_src)),
    }

    let (kappa, kappa_src) = pick(flags.kappa, file.kappa, defaults.kappa);
    provenance.push(("kappa".into(), kappa.to_string(), kappa_src));

    let (seed, seed_src) = pick(flags.seed, file.seed, DEFAULT_SEED);
    provenance.push(("seed".into(), seed.to_string(), seed_src));

    let (samples, samples_src) = pick(flags.samples, file.samples, defaults.samples);
    provenance.push(("samples".into(), samples.to_string(), samples_src));

    let (replicas, replicas_src) = pick(flags.replicas, file.replicas, defaults.replicas);
    provenance.push(("replicas".into(), replicas.to_string(), replicas_src));

    let (format, format_src) = pick(flags.format, file.format, OutputFormat::default());
    provenance.push(("format".into(), format.to_string(), format_src));

    let (out, out_src) = match (&flags.out, &file.out) {
        (Some(p), _) => (Some(p.clone()), Source::Flag),
        (None, Some(p)) => (Some(p.clone()), Source::File),
        (None, None) => (None, Source::Default),
    };
    provenance.push((
        "out".into(),
        out.as_ref().map_or_else(|| "(stdout)".into(), |p| p.display().to_string()),
        out_src,
    ));

    let cfg = ExperimentConfig {
        experiment: experiment.to_string(),
        n,
        size,
        kappa,
        seed,
        samples,
        replicas,
        out,
        format,
        provenance,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !cfg.kappa.is_finite() || cfg.kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "strength parameter must be a positive finite number, got {}",
            cfg.kappa
        )));
    }
    match cfg.size {
        SizeSpec::EdgeCount(0) => {
            return Err(Error::InvalidParameter("edge count must be at least 1".into()));
        }
        SizeSpec::Density(rho) if !(rho.is_finite() && rho > 0.0) => {
            return Err(Error::InvalidParameter(format!(
                "density must be a positive finite number, got {rho}"
            )));
        }
        _ => {}
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if cfg.replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be at least 1".into()));
    }
    if cfg.edges_at(cfg.n) == 0 {
        return Err(Error::InvalidParameter(
            "resolved edge count is zero; increase n or the density".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in_when_nothing_is_given() {
        let cfg = resolve("degree-gamma", &Overlay::default(), &Overlay::default()).unwrap();
        assert_eq!(cfg.n, 400);
        assert_eq!(cfg.size, SizeSpec::Density(2.0));
        assert_eq!(cfg.kappa, 1.5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.replicas, 10);
        assert_eq!(cfg.format, OutputFormat::Json);
        let n_row = cfg.provenance.iter().find(|(k, _, _)| k == "n").unwrap();
        assert_eq!(n_row.2, Source::Default);
    }

    #[test]
    fn flags_beat_file_beats_defaults() {
        let file = parse_config_file("n = 100\nkappa = 2.5\nseed = 11\n").unwrap();
        let flags = Overlay { n: Some(50), ..Overlay::default() };
        let cfg = resolve("degree-gamma", &flags, &file).unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.kappa, 2.5);
        assert_eq!(cfg.seed, 11);
        let n_row = cfg.provenance.iter().find(|(k, _, _)| k == "n").unwrap();
        assert_eq!(n_row.2, Source::Flag);
        let k_row = cfg.provenance.iter().find(|(k, _, _)| k == "kappa").unwrap();
        assert_eq!(k_row.2, Source::File);
        let s_row = cfg.provenance.iter().find(|(k, _, _)| k == "samples").unwrap();
        assert_eq!(s_row.2, Source::Default);
    }

    #[test]
    fn edge_count_density_equivalence() {
        let flags = Overlay { n: Some(10), rho: Some(2.0), ..Overlay::default() };
        let cfg = resolve("degree-gamma", &flags, &Overlay::default()).unwrap();
        assert_eq!(cfg.edges_at(10), 100);
        assert_eq!(cfg.edges_at(5), 25);
        assert_eq!(cfg.rho(), 2.0);

        let flags = Overlay { n: Some(10), m: Some(100), ..Overlay::default() };
        let cfg = resolve("degree-gamma", &flags, &Overlay::default()).unwrap();
        assert_eq!(cfg.edges_at(10), 100);
        assert_eq!(cfg.rho(), 2.0);
        // A sweep away from the configured n falls back to the implied density.
        assert_eq!(cfg.edges_at(20), 400);
    }

    #[test]
    fn size_layers_never_mix() {
        // The file owns the size only if the flags set neither m nor rho.
        let file = parse_config_file("m = 30\n").unwrap();
        let flags = Overlay { n: Some(10), rho: Some(1.0), ..Overlay::default() };
        let cfg = resolve("degree-gamma", &flags, &file).unwrap();
        assert_eq!(cfg.size, SizeSpec::Density(1.0));

        let file = parse_config_file("m = 30\nrho = 1.5\n").unwrap();
        assert!(resolve("degree-gamma", &Overlay::default(), &file).is_err());

        let flags = Overlay { m: Some(3), rho: Some(1.0), ..Overlay::default() };
        assert!(resolve("degree-gamma", &flags, &Overlay::default()).is_err());
    }

    #[test]
    fn config_file_round_trips_and_rejects_garbage() {
        let overlay = parse_config_file(
            "# comment\n\nn = 12\nm=33\nkappa = 0.5\nformat = csv\nout = /tmp/r.csv\n",
        )
        .unwrap();
        assert_eq!(overlay.n, Some(12));
        assert_eq!(overlay.m, Some(33));
        assert_eq!(overlay.kappa, Some(0.5));
        assert_eq!(overlay.format, Some(OutputFormat::Csv));
        assert_eq!(overlay.out, Some(PathBuf::from("/tmp/r.csv")));

        assert!(parse_config_file("bogus_key = 1\n").is_err());
        assert!(parse_config_file("n 12\n").is_err());
        assert!(parse_config_file("n =\n").is_err());
        assert!(parse_config_file("kappa = abc\n").is_err());
    }

    #[test]
    fn invalid_resolved_configs_are_rejected() {
        let z = Overlay::default();
        let mk = |f: &dyn Fn(&mut Overlay)| {
            let mut o = Overlay::default();
            f(&mut o);
            o
        };
        assert!(resolve("no-such-experiment", &z, &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.n = Some(0)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.kappa = Some(0.0)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.kappa = Some(f64::NAN)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.rho = Some(-1.0)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.m = Some(0)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.replicas = Some(0)), &z).is_err());
        assert!(resolve("degree-gamma", &mk(&|o| o.samples = Some(0)), &z).is_err());
        // n = 1 with rho small enough that ⌊ρ/2⌋ = 0 edges.
        let o = Overlay { n: Some(1), rho: Some(0.5), ..Overlay::default() };
        assert!(resolve("degree-gamma", &o, &z).is_err());
    }
}
