//! Flat key-value scenario configuration.
//!
//! The format is line-oriented `key = value` with `#` comments, chosen so
//! sweep inputs diff cleanly and parse in any language. `Display` and
//! `FromStr` round-trip losslessly (floats print in shortest round-trip
//! form).

use std::fmt;
use std::str::FromStr;

/// Probe or ancilla state family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Fock(usize),
    Lossy(f64),
    Gaussian(f64),
    Gkp,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Fock(n) => write!(f, "fock:{n}"),
            Family::Lossy(l) => write!(f, "lossy:{l}"),
            Family::Gaussian(a) => write!(f, "gaussian:{a}"),
            Family::Gkp => write!(f, "gkp"),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "gkp" {
            return Ok(Family::Gkp);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("family `{s}` needs the form kind:value (or `gkp`)"))?;
        match kind {
            "fock" => arg
                .parse::<usize>()
                .map(Family::Fock)
                .map_err(|e| format!("fock photon number: {e}")),
            "lossy" => {
                let l: f64 = arg.parse().map_err(|e| format!("loss rate: {e}"))?;
                if !(0.0..=1.0).contains(&l) {
                    return Err(format!("loss rate {l} outside [0, 1]"));
                }
                Ok(Family::Lossy(l))
            }
            "gaussian" => {
                let a: f64 = arg.parse().map_err(|e| format!("squeeze parameter: {e}"))?;
                if a <= 0.0 {
                    return Err(format!("squeeze parameter {a} must be positive"));
                }
                Ok(Family::Gaussian(a))
            }
            other => Err(format!("unknown state family `{other}`")),
        }
    }
}

/// Which ancilla accompanies the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ancilla {
    Same,
    Family(Family),
}

impl fmt::Display for Ancilla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ancilla::Same => write!(f, "same"),
            Ancilla::Family(fam) => write!(f, "{fam}"),
        }
    }
}

impl FromStr for Ancilla {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "same" {
            Ok(Ancilla::Same)
        } else {
            s.parse().map(Ancilla::Family)
        }
    }
}

/// Conditioning mode for the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Post-select the fixed outcome (y_x, y_p).
    Point(f64, f64),
    /// Average over all outcomes.
    Bayes,
    /// Post-select the disc |y| <= r.
    Window(f64),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Point(x, p) => write!(f, "{x},{p}"),
            Outcome::Bayes => write!(f, "bayes"),
            Outcome::Window(r) => write!(f, "window:{r}"),
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "bayes" {
            return Ok(Outcome::Bayes);
        }
        if let Some(r) = s.strip_prefix("window:") {
            let r: f64 = r.parse().map_err(|e| format!("window radius: {e}"))?;
            if r <= 0.0 {
                return Err(format!("window radius {r} must be positive"));
            }
            return Ok(Outcome::Window(r));
        }
        let (x, p) = s
            .split_once(',')
            .ok_or_else(|| format!("outcome `{s}` needs the form yx,yp (or `bayes`)"))?;
        let x: f64 = x.trim().parse().map_err(|e| format!("outcome y_x: {e}"))?;
        let p: f64 = p.trim().parse().map_err(|e| format!("outcome y_p: {e}"))?;
        Ok(Outcome::Point(x, p))
    }
}

/// Prior variance: one value or a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    Single(f64),
    Sweep {
        min: f64,
        max: f64,
        points: usize,
        log: bool,
    },
}

impl PriorSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            PriorSpec::Single(v) => vec![v],
            PriorSpec::Sweep {
                min,
                max,
                points,
                log,
            } => {
                if log {
                    dispest_core::sweeps::log_grid(min, max, points)
                } else {
                    let step = (max - min) / (points - 1) as f64;
                    (0..points).map(|i| min + step * i as f64).collect()
                }
            }
        }
    }
}

/// A complete sweep scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub probe: Family,
    pub ancilla: Ancilla,
    pub prior: PriorSpec,
    pub outcome: Outcome,
    pub seed: u64,
    pub n_cut: usize,
    pub tol: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            probe: Family::Fock(1),
            ancilla: Ancilla::Same,
            prior: PriorSpec::Sweep {
                min: 0.05,
                max: 10.0,
                points: 60,
                log: true,
            },
            outcome: Outcome::Point(0.0, 0.0),
            seed: 7,
            n_cut: 40,
            tol: 1e-9,
        }
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "probe = {}", self.probe)?;
        writeln!(f, "ancilla = {}", self.ancilla)?;
        match self.prior {
            PriorSpec::Single(v) => writeln!(f, "prior_v = {v}")?,
            PriorSpec::Sweep {
                min,
                max,
                points,
                log,
            } => {
                writeln!(f, "v_min = {min}")?;
                writeln!(f, "v_max = {max}")?;
                writeln!(f, "v_points = {points}")?;
                writeln!(f, "v_scale = {}", if log { "log" } else { "linear" })?;
            }
        }
        writeln!(f, "outcome = {}", self.outcome)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "n_cut = {}", self.n_cut)?;
        writeln!(f, "tol = {}", self.tol)
    }
}

impl FromStr for ScenarioConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = ScenarioConfig::default();
        let mut v_min: Option<f64> = None;
        let mut v_max: Option<f64> = None;
        let mut v_points: Option<usize> = None;
        let mut v_log: Option<bool> = None;
        let mut prior_single: Option<f64> = None;

        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "probe" => cfg.probe = value.parse()?,
                "ancilla" => cfg.ancilla = value.parse()?,
                "prior_v" => prior_single = Some(parse_f64(key, value)?),
                "v_min" => v_min = Some(parse_f64(key, value)?),
                "v_max" => v_max = Some(parse_f64(key, value)?),
                "v_points" => {
                    v_points =
                        Some(value.parse().map_err(|e| format!("v_points: {e}"))?)
                }
                "v_scale" => {
                    v_log = Some(match value {
                        "log" => true,
                        "linear" => false,
                        other => return Err(format!("v_scale must be log|linear, got {other}")),
                    })
                }
                "outcome" => cfg.outcome = value.parse()?,
                "seed" => cfg.seed = value.parse().map_err(|e| format!("seed: {e}"))?,
                "n_cut" => cfg.n_cut = value.parse().map_err(|e| format!("n_cut: {e}"))?,
                "tol" => cfg.tol = parse_f64(key, value)?,
                other => return Err(format!("unknown key `{other}`")),
            }
        }

        cfg.prior = match (prior_single, v_min, v_max) {
            (Some(v), None, None) => PriorSpec::Single(v),
            (None, Some(min), Some(max)) => {
                if !(min > 0.0 && max > min) {
                    return Err(format!("sweep bounds must satisfy 0 < v_min < v_max, got [{min}, {max}]"));
                }
                PriorSpec::Sweep {
                    min,
                    max,
                    points: v_points.unwrap_or(60),
                    log: v_log.unwrap_or(true),
                }
            }
            (None, None, None) => cfg.prior,
            _ => return Err("give either prior_v or the v_min/v_max sweep keys, not both".into()),
        };
        if let PriorSpec::Single(v) = cfg.prior {
            if v <= 0.0 {
                return Err(format!("prior_v must be positive, got {v}"));
            }
        }
        Ok(cfg)
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value.parse().map_err(|e| format!("{key}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_losslessly() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_string();
        let parsed: ScenarioConfig = text.parse().unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn exotic_values_round_trip() {
        let cfg = ScenarioConfig {
            probe: Family::Lossy(0.08900000000000001),
            ancilla: Ancilla::Family(Family::Gaussian(2.5000000000000004)),
            prior: PriorSpec::Single(0.1234567890123456),
            outcome: Outcome::Window(std::f64::consts::SQRT_2),
            seed: u64::MAX,
            n_cut: 17,
            tol: 3.0000000000000004e-10,
        };
        let parsed: ScenarioConfig = cfg.to_string().parse().unwrap();
        assert_eq!(parsed, cfg);

        let cfg2 = ScenarioConfig {
            probe: Family::Gkp,
            outcome: Outcome::Point(-1.5, 2.25),
            ..ScenarioConfig::default()
        };
        let parsed2: ScenarioConfig = cfg2.to_string().parse().unwrap();
        assert_eq!(parsed2, cfg2);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# scenario\nprobe = fock:2\n\nancilla = same # matched pair\nprior_v = 1.5\noutcome = bayes\n";
        let cfg: ScenarioConfig = text.parse().unwrap();
        assert_eq!(cfg.probe, Family::Fock(2));
        assert_eq!(cfg.prior, PriorSpec::Single(1.5));
        assert_eq!(cfg.outcome, Outcome::Bayes);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!("probe = fock".parse::<ScenarioConfig>().is_err());
        assert!("probe = lossy:1.5".parse::<ScenarioConfig>().is_err());
        assert!("prior_v = -1".parse::<ScenarioConfig>().is_err());
        assert!("v_min = 1\nv_max = 0.5".parse::<ScenarioConfig>().is_err());
        assert!("prior_v = 1\nv_min = 0.1\nv_max = 2".parse::<ScenarioConfig>().is_err());
        assert!("nonsense = 3".parse::<ScenarioConfig>().is_err());
    }
}
