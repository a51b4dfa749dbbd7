//! Run configuration: documented key=value file, environment override for
//! the cache path, and command-line flag overrides (flags win).

use std::path::PathBuf;

use mds_core::TruncationPlan;

/// Output format for command reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

/// Fully resolved run configuration.
///
/// Documented ranges (violations are config errors, exit 2):
///
/// * `d_max`, `n_max`: 1 ..= 200000 — truncation caps for series sums.
/// * `tolerance`: >= 0 — requested tail ceiling; 0 means report-only.
/// * `contour`: 1.2 ..= 2.4 — contour abscissa for critical-line work.
/// * `spacing`: 0.05 ..= 1.0 — mean-square lattice spacing.
/// * `cache`: path to the binary L-value cache (optional).
/// * `format`: json | csv.
/// * `seed`: any u64 — seeds every randomized check.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d_max: u64,
    pub n_max: u64,
    pub tolerance: f64,
    pub contour: f64,
    pub spacing: f64,
    pub cache: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d_max: 20_000,
            n_max: 20_000,
            tolerance: 0.0,
            contour: 2.0,
            spacing: 0.2,
            cache: None,
            format: OutputFormat::Json,
            seed: 271_828,
        }
    }
}

/// Flag-level overrides (None = not given on the command line).
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub d_max: Option<u64>,
    pub n_max: Option<u64>,
    pub tolerance: Option<f64>,
    pub contour: Option<f64>,
    pub spacing: Option<f64>,
    pub cache: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Resolve the effective configuration: defaults, then the config file,
    /// then the `MDS_CACHE` environment variable (cache path only), then
    /// command-line flags.  Later sources win.
    pub fn resolve(
        file: Option<&str>,
        env_cache: Option<String>,
        flags: &Overrides,
    ) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if let Some(text) = file {
            cfg.apply_file(text)?;
        }
        if let Some(path) = env_cache {
            cfg.cache = Some(PathBuf::from(path));
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got '{line}'", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err =
                |what: &str| format!("line {}: bad {what} value '{value}'", lineno + 1);
            match key {
                "d_max" => self.d_max = value.parse().map_err(|_| parse_err("d_max"))?,
                "n_max" => self.n_max = value.parse().map_err(|_| parse_err("n_max"))?,
                "tolerance" => {
                    self.tolerance = value.parse().map_err(|_| parse_err("tolerance"))?
                }
                "contour" => self.contour = value.parse().map_err(|_| parse_err("contour"))?,
                "spacing" => self.spacing = value.parse().map_err(|_| parse_err("spacing"))?,
                "cache" => self.cache = Some(PathBuf::from(value)),
                "format" => self.format = OutputFormat::parse(value)?,
                "seed" => self.seed = value.parse().map_err(|_| parse_err("seed"))?,
                other => {
                    return Err(format!(
                        "line {}: unknown config key '{other}' (known: d_max, n_max, \
                         tolerance, contour, spacing, cache, format, seed)",
                        lineno + 1
                    ))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: &Overrides) -> Result<(), String> {
        if let Some(v) = flags.d_max {
            self.d_max = v;
        }
        if let Some(v) = flags.n_max {
            self.n_max = v;
        }
        if let Some(v) = flags.tolerance {
            self.tolerance = v;
        }
        if let Some(v) = flags.contour {
            self.contour = v;
        }
        if let Some(v) = flags.spacing {
            self.spacing = v;
        }
        if let Some(v) = &flags.cache {
            self.cache = Some(v.clone());
        }
        if let Some(v) = &flags.format {
            self.format = OutputFormat::parse(v)?;
        }
        if let Some(v) = flags.seed {
            self.seed = v;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), String> {
        if self.d_max == 0 || self.d_max > 200_000 {
            return Err(format!("d_max {} outside 1..=200000", self.d_max));
        }
        if self.n_max == 0 || self.n_max > 200_000 {
            return Err(format!("n_max {} outside 1..=200000", self.n_max));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(format!("tolerance {} must be finite and >= 0", self.tolerance));
        }
        if !(1.2..=2.4).contains(&self.contour) {
            return Err(format!("contour {} outside 1.2..=2.4", self.contour));
        }
        if !(0.05..=1.0).contains(&self.spacing) {
            return Err(format!("spacing {} outside 0.05..=1.0", self.spacing));
        }
        Ok(())
    }

    pub fn plan(&self) -> TruncationPlan {
        TruncationPlan { d_max: self.d_max, n_max: self.n_max, tail_bound: self.tolerance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_validation() {
        let cfg = RunConfig::resolve(None, None, &Overrides::default()).unwrap();
        assert_eq!(cfg.d_max, 20_000);
        assert_eq!(cfg.format, OutputFormat::Json);
    }

    #[test]
    fn file_then_env_then_flags() {
        let file = "d_max = 500\ncache = /tmp/a.bin\nseed=9\n# comment\n\nformat = csv\n";
        let flags = Overrides { seed: Some(11), ..Overrides::default() };
        let cfg = RunConfig::resolve(Some(file), Some("/tmp/b.bin".into()), &flags).unwrap();
        assert_eq!(cfg.d_max, 500);
        assert_eq!(cfg.cache.as_deref(), Some(std::path::Path::new("/tmp/b.bin")));
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn unknown_keys_and_bad_ranges_are_rejected() {
        assert!(RunConfig::resolve(Some("widget = 3\n"), None, &Overrides::default())
            .unwrap_err()
            .contains("unknown config key"));
        assert!(RunConfig::resolve(Some("contour = 9\n"), None, &Overrides::default())
            .unwrap_err()
            .contains("contour"));
        assert!(RunConfig::resolve(Some("d_max\n"), None, &Overrides::default())
            .unwrap_err()
            .contains("key=value"));
    }
}
