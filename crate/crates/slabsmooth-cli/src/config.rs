//! Layered run configuration: defaults < config file < command-line
//! flags, with a canonical manifest that reproduces the run exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use slabsmooth::{McmcConfig, PriorConfig};

use crate::CliError;

/// The five pipelines the binary can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FitGlobal,
    FitLocal,
    DofCurve,
    TheoryDensity,
    Simulate,
}

impl Command {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "fit-global" => Ok(Command::FitGlobal),
            "fit-local" => Ok(Command::FitLocal),
            "dof-curve" => Ok(Command::DofCurve),
            "theory-density" => Ok(Command::TheoryDensity),
            "simulate" => Ok(Command::Simulate),
            other => Err(CliError::usage(format!(
                "unknown command '{other}' (expected fit-global, fit-local, dof-curve, theory-density, or simulate)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::FitGlobal => "fit-global",
            Command::FitLocal => "fit-local",
            Command::DofCurve => "dof-curve",
            Command::TheoryDensity => "theory-density",
            Command::Simulate => "simulate",
        }
    }

    /// Keys this command accepts.
    #[rustfmt::skip]
    fn allowed_keys(&self) -> &'static [&'static str] {
        match self {
            Command::FitGlobal => &[
                "input", "mean", "n", "noise-sd", "x-min", "x-max", "amplitude", "frequency",
                "phase", "level", "split", "coeffs", "levels",
                "a1", "a2", "v0", "iters", "burnin", "thin", "seed",
                "degree", "kernel-index",
            ],
            Command::FitLocal | Command::DofCurve => &[
                "input", "mean", "n", "noise-sd", "x-min", "x-max", "amplitude", "frequency",
                "phase", "level", "split", "coeffs", "levels",
                "a1", "a2", "v0", "iters", "burnin", "thin", "seed",
                "degree", "bandwidth", "min-neighbors", "jobs",
            ],
            Command::TheoryDensity => &[
                "a1", "a2", "v0", "w", "z-sq", "grid-points", "quad-points",
            ],
            Command::Simulate => &[
                "input", "mean", "n", "noise-sd", "x-min", "x-max", "amplitude", "frequency",
                "phase", "level", "split", "coeffs", "levels",
                "a1", "a2", "v0", "iters", "burnin", "thin", "seed",
                "scenario", "fit", "degree", "degree-alt", "bandwidth", "min-neighbors",
                "jobs", "n-signals", "signal-strength",
            ],
        }
    }
}

/// Resolved key=value settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    settings: BTreeMap<String, String>,
}

fn put_default(map: &mut BTreeMap<String, String>, key: &str, value: &str) {
    map.entry(key.to_string())
        .or_insert_with(|| value.to_string());
}

/// Parse a plain key=value config file ('#' comments, blank lines ok).
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Merge file settings and flag settings (flags win), validate the
    /// key set against the command, and fill defaults.
    pub fn resolve(
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> Result<RunConfig, CliError> {
        let mut merged = file;
        for (k, v) in flags {
            merged.insert(k, v);
        }
        let command = Command::parse(
            merged
                .remove("command")
                .ok_or_else(|| {
                    CliError::usage("no command given (use --command or a config file)")
                })?
                .as_str(),
        )?;

        let allowed = command.allowed_keys();
        for key in merged.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "option '{key}' is not valid with {}",
                    command.name()
                )));
            }
        }

        let mut settings = merged;
        // Chain and prior defaults shared by the fitting commands.
        match command {
            Command::FitGlobal | Command::Simulate => {
                put_default(&mut settings, "iters", "5000");
                put_default(&mut settings, "burnin", "1000");
            }
            Command::FitLocal | Command::DofCurve => {
                put_default(&mut settings, "iters", "2000");
                put_default(&mut settings, "burnin", "500");
            }
            Command::TheoryDensity => {}
        }
        match command {
            Command::TheoryDensity => {
                put_default(&mut settings, "a1", "5");
                put_default(&mut settings, "a2", "50");
                put_default(&mut settings, "v0", "0.005");
                put_default(&mut settings, "w", "0.1");
                put_default(&mut settings, "z-sq", "0.1,0.45,1.32,2.71,3.84,6.63");
                put_default(&mut settings, "grid-points", "512");
                put_default(&mut settings, "quad-points", "128");
            }
            _ => {
                put_default(&mut settings, "a1", "5");
                put_default(&mut settings, "a2", "50");
                put_default(&mut settings, "v0", "0.005");
                put_default(&mut settings, "thin", "1");
                put_default(&mut settings, "seed", "0");
            }
        }
        match command {
            Command::FitGlobal => {
                put_default(&mut settings, "degree", "10");
            }
            Command::FitLocal | Command::DofCurve => {
                put_default(&mut settings, "degree", "3");
                put_default(&mut settings, "jobs", "1");
            }
            Command::Simulate => {
                put_default(&mut settings, "scenario", "curve");
                put_default(&mut settings, "jobs", "1");
            }
            Command::TheoryDensity => {}
        }
        // Scenario presets (simulate only).
        match settings.get("scenario").map(String::as_str) {
            Some("sparse-signal") => {
                put_default(&mut settings, "n", "400");
                put_default(&mut settings, "noise-sd", "1");
                put_default(&mut settings, "degree", "20");
                put_default(&mut settings, "n-signals", "5");
                put_default(&mut settings, "signal-strength", "5");
            }
            Some("overparam") => {
                put_default(&mut settings, "mean", "sine");
                put_default(&mut settings, "n", "200");
                put_default(&mut settings, "noise-sd", "0.3");
                put_default(&mut settings, "degree", "25");
                put_default(&mut settings, "degree-alt", "10");
            }
            Some("curve") => {
                put_default(&mut settings, "fit", "global");
                if settings.get("fit").map(String::as_str) == Some("local") {
                    put_default(&mut settings, "degree", "3");
                } else {
                    put_default(&mut settings, "degree", "10");
                }
            }
            _ => {}
        }
        // Synthetic-generator defaults once a mean function is in play.
        if let Some(mean) = settings.get("mean").cloned() {
            put_default(&mut settings, "n", "200");
            put_default(&mut settings, "noise-sd", "0.1");
            put_default(&mut settings, "x-min", "0");
            put_default(&mut settings, "x-max", "1");
            match mean.as_str() {
                "sine" => {
                    put_default(&mut settings, "amplitude", "1");
                    put_default(&mut settings, "frequency", "3.141592653589793");
                    put_default(&mut settings, "phase", "0");
                }
                "flat-then-sine" => {
                    put_default(&mut settings, "amplitude", "1");
                    put_default(&mut settings, "frequency", "3.141592653589793");
                    put_default(&mut settings, "level", "0");
                    let mid = match (
                        settings.get("x-min").and_then(|v| v.parse::<f64>().ok()),
                        settings.get("x-max").and_then(|v| v.parse::<f64>().ok()),
                    ) {
                        (Some(lo), Some(hi)) => 0.5 * (lo + hi),
                        _ => 0.5,
                    };
                    put_default(&mut settings, "split", &format!("{mid}"));
                }
                "polynomial" => put_default(&mut settings, "coeffs", "0"),
                "piecewise-flat" => put_default(&mut settings, "levels", "0,1"),
                _ => {}
            }
        }
        // Local fits default their window floor off the resolved degree,
        // recorded here so the manifest carries every effective value.
        let local_fit = matches!(command, Command::FitLocal | Command::DofCurve)
            || (command == Command::Simulate
                && settings.get("fit").map(String::as_str) == Some("local"));
        if local_fit {
            if let Some(d) = settings.get("degree").and_then(|v| v.parse::<usize>().ok()) {
                put_default(&mut settings, "min-neighbors", &format!("{}", d + 3));
            }
        }
        Ok(RunConfig { command, settings })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::usage(format!("{} requires --{key}", self.command.name())))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|raw| {
                raw.parse::<f64>()
                    .map_err(|_| CliError::usage(format!("--{key}: '{raw}' is not a number")))
            })
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.require(key)?;
        Ok(self.get_f64(key)?.expect("key present"))
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|raw| {
                raw.parse::<usize>()
                    .map_err(|_| CliError::usage(format!("--{key}: '{raw}' is not a count")))
            })
            .transpose()
    }

    pub fn require_usize(&self, key: &str) -> Result<usize, CliError> {
        self.require(key)?;
        Ok(self.get_usize(key)?.expect("key present"))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.get(key)
            .map(|raw| {
                raw.parse::<u64>()
                    .map_err(|_| CliError::usage(format!("--{key}: '{raw}' is not an integer")))
            })
            .transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|piece| {
                piece
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::usage(format!("--{key}: '{piece}' is not a number")))
            })
            .collect()
    }

    pub fn prior(&self) -> Result<PriorConfig, CliError> {
        Ok(PriorConfig {
            a1: self.require_f64("a1")?,
            a2: self.require_f64("a2")?,
            v0: self.require_f64("v0")?,
        })
    }

    pub fn mcmc(&self) -> Result<McmcConfig, CliError> {
        Ok(McmcConfig {
            n_iter: self.require_usize("iters")?,
            burn_in: self.require_usize("burnin")?,
            thin: self.require_usize("thin")?,
            seed: self.get_u64("seed")?.unwrap_or(0),
        })
    }

    /// Deterministic 8-hex-digit tag derived from the resolved settings
    /// (FNV-1a). Execution-only knobs (the job count) never change the
    /// results, so they do not change the tag either.
    pub fn tag(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut feed = |text: &str| {
            for byte in text.bytes() {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        };
        feed(self.command.name());
        for (k, v) in &self.settings {
            if k == "jobs" {
                continue;
            }
            feed(k);
            feed("=");
            feed(v);
            feed("\n");
        }
        format!("{:08x}", (hash >> 32) as u32 ^ hash as u32)
    }

    /// Canonical manifest: a config file that reproduces this run.
    pub fn manifest(&self) -> String {
        let mut out = String::from("# slabsmooth run manifest; rerun with --config <this file>\n");
        let _ = writeln!(out, "command={}", self.command.name());
        for (k, v) in &self.settings {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}
