//! Flat key-value run configuration with dotted section keys.
//!
//! Frequencies and rates are entered as ordinary frequencies in MHz (the
//! value `f` of a quantity written `2*pi*f rad/us`); the parser performs the
//! `2*pi` conversion once, at this boundary. Lines are `key = value`; `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use chiralpump::{DecayRates, InitialStateSpec, ModelParams, SolverConfig, SweepParameter};

/// A configuration problem: exit code 2 territory.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Which Hamiltonian a simulation run integrates.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Full four-level interaction-picture model.
    Interaction,
    /// Second-order effective four-level model.
    Effective,
    /// Reduced three-level model on (L, R, A).
    Reduced,
    /// Explicitly time-dependent lab-frame model (unitary only).
    Lab,
}

impl HamiltonianKind {
    pub fn dim(&self) -> usize {
        match self {
            HamiltonianKind::Reduced => 3,
            _ => 4,
        }
    }
}

/// Fully parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelParams,
    pub rates: DecayRates,
    pub initial: InitialStateSpec,
    pub solver: SolverConfig,
    pub hamiltonian: HamiltonianKind,
    /// Time grid for `simulate`: `(stop_us, points)`.
    pub times: Option<(f64, usize)>,
    pub output: Option<String>,
    pub sweep: Option<SweepSection>,
}

/// The `sweep.*` section.
#[derive(Clone, Debug)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    /// Grid in library units (rad/us for frequency-like parameters).
    pub grid: Vec<f64>,
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return err(format!(
                    "line {}: expected 'key = value', got '{}'",
                    lineno + 1,
                    line
                ));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() || value.is_empty() {
                return err(format!("line {}: empty key or value", lineno + 1));
            }
            if let Some((_, first)) = map.get(&key) {
                return err(format!(
                    "line {}: duplicate key '{}' (first set on line {})",
                    lineno + 1,
                    key,
                    first + 1
                ));
            }
            map.insert(key, (value, lineno + 1));
        }
        Ok(Self {
            map,
            used: std::cell::RefCell::new(Vec::new()),
        })
    }

    fn raw(&self, key: &str) -> Option<&(String, usize)> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key)
    }

    fn f64_at(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => err(format!("{key} (line {line}): expected a finite number, got '{v}'")),
            },
        }
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64_at(key)?
            .ok_or_else(|| ConfigError(format!("{key}: required key is missing")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_at(key)?.unwrap_or(default))
    }

    fn usize_at(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<usize>() {
                Ok(x) => Ok(Some(x)),
                _ => err(format!(
                    "{key} (line {line}): expected a non-negative integer, got '{v}'"
                )),
            },
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => err(format!("{key} (line {line}): expected true or false, got '{v}'")),
            },
        }
    }

    fn string_at(&self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.clone())
    }

    fn check_all_used(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .map
            .keys()
            .filter(|k| !used.iter().any(|u| u == *k))
            .map(|k| k.as_str())
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            err(format!("unknown key(s): {}", unknown.join(", ")))
        }
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v < 0.0 {
        err(format!("{key}: must be non-negative, got {v}"))
    } else {
        Ok(v)
    }
}

/// Parse and validate a configuration file body.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = Entries::parse(text)?;

    let eta = non_negative("model.eta_mhz", e.require_f64("model.eta_mhz")?)?;
    let omega_s = non_negative("model.omega_s_mhz", e.require_f64("model.omega_s_mhz")?)?;
    let omega_0 = non_negative("model.omega_0_mhz", e.require_f64("model.omega_0_mhz")?)?;
    let delta = e.require_f64("model.delta_mhz")?;
    let omega_a = match e.string_at("model.omega_a_mhz") {
        None => return err("model.omega_a_mhz: required key is missing (number or 'matched')"),
        Some(v) if v == "matched" => {
            if delta == 0.0 {
                return err(
                    "model.omega_a_mhz: 'matched' requires model.delta_mhz != 0".to_string(),
                );
            }
            omega_s * omega_0 / delta
        }
        Some(v) => match v.parse::<f64>() {
            Ok(x) if x.is_finite() => non_negative("model.omega_a_mhz", x)?,
            _ => {
                return err(format!(
                    "model.omega_a_mhz: expected a number or 'matched', got '{v}'"
                ))
            }
        },
    };
    let phi = e.f64_or("model.phi_rad", 0.0)?;
    let lab_s = e.f64_or("model.lab_omega_s_mhz", 500.0)?;
    let lab_a = e.f64_or("model.lab_omega_a_mhz", 1500.0)?;

    let hamiltonian = match e
        .string_at("model.hamiltonian")
        .unwrap_or_else(|| "interaction".to_string())
        .as_str()
    {
        "interaction" => HamiltonianKind::Interaction,
        "effective" => HamiltonianKind::Effective,
        "reduced" => HamiltonianKind::Reduced,
        "lab" => HamiltonianKind::Lab,
        other => {
            return err(format!(
                "model.hamiltonian: expected interaction|effective|reduced|lab, got '{other}'"
            ))
        }
    };

    let mut model = ModelParams::new(
        TAU * eta,
        TAU * omega_0,
        TAU * omega_s,
        TAU * omega_a,
        phi,
        TAU * delta,
    )
    .map_err(|e| ConfigError(format!("model: {e}")))?;
    model.lab_omega_s = TAU * lab_s;
    model.lab_omega_a = TAU * lab_a;

    let gamma_s = non_negative("rates.gamma_s_mhz", e.f64_or("rates.gamma_s_mhz", 0.0)?)?;
    let gamma_a = non_negative("rates.gamma_a_mhz", e.f64_or("rates.gamma_a_mhz", 0.0)?)?;
    let gamma_sa = non_negative("rates.gamma_sa_mhz", e.f64_or("rates.gamma_sa_mhz", 0.0)?)?;
    let gamma_phi = non_negative("rates.gamma_phi_mhz", e.f64_or("rates.gamma_phi_mhz", 0.0)?)?;
    let rates = DecayRates::new(
        TAU * gamma_s,
        TAU * gamma_a,
        TAU * gamma_sa,
        TAU * gamma_phi,
    )
    .map_err(|e| ConfigError(format!("rates: {e}")))?;

    let x = e.f64_or("initial.x", 0.5)?;
    if !(0.0..=1.0).contains(&x) {
        return err(format!("initial.x: must lie in [0, 1], got {x}"));
    }
    let initial = match e
        .string_at("initial.kind")
        .unwrap_or_else(|| "chiral_mix".to_string())
        .as_str()
    {
        "chiral_mix" => InitialStateSpec::ChiralMix(x),
        "pm_mix" => InitialStateSpec::PmMix(x),
        other => {
            return err(format!(
                "initial.kind: expected chiral_mix or pm_mix, got '{other}'"
            ))
        }
    };

    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        rel_tol: e.f64_or("solver.rel_tol", defaults.rel_tol)?,
        abs_tol: e.f64_or("solver.abs_tol", defaults.abs_tol)?,
        max_step: e.f64_or("solver.max_step_us", defaults.max_step)?,
        hermitize_each_step: e.bool_or(
            "solver.hermitize_each_step",
            defaults.hermitize_each_step,
        )?,
        steady_window_tol: e.f64_or("solver.steady_window_tol", defaults.steady_window_tol)?,
    };
    solver
        .validate()
        .map_err(|e| ConfigError(format!("solver: {e}")))?;

    let times = match (e.f64_at("times.stop_us")?, e.usize_at("times.points")?) {
        (None, None) => None,
        (Some(stop), Some(points)) => {
            if stop <= 0.0 {
                return err(format!("times.stop_us: must be positive, got {stop}"));
            }
            if points < 2 {
                return err(format!("times.points: must be at least 2, got {points}"));
            }
            Some((stop, points))
        }
        _ => return err("times: set both times.stop_us and times.points (or neither)"),
    };

    let output = e.string_at("output.path");

    let sweep = match e.string_at("sweep.parameter") {
        None => {
            // Reserve the section keys so partial sweep sections are flagged.
            for k in ["sweep.start", "sweep.stop", "sweep.points", "sweep.scale"] {
                if e.raw(k).is_some() {
                    return err(format!("{k}: set sweep.parameter as well"));
                }
            }
            None
        }
        Some(name) => {
            let parameter: SweepParameter = name
                .parse()
                .map_err(|e| ConfigError(format!("sweep.parameter: {e}")))?;
            let start = e.require_f64("sweep.start")?;
            let stop = e.require_f64("sweep.stop")?;
            let points = e
                .usize_at("sweep.points")?
                .ok_or_else(|| ConfigError("sweep.points: required key is missing".into()))?;
            if points < 1 {
                return err("sweep.points: must be at least 1".to_string());
            }
            if points > 1 && stop <= start {
                return err(format!(
                    "sweep: stop ({stop}) must exceed start ({start}) for multi-point grids"
                ));
            }
            let scale = e
                .string_at("sweep.scale")
                .unwrap_or_else(|| "linear".to_string());
            // Frequency-like parameters are entered in MHz.
            let unit = match parameter {
                SweepParameter::InitX => 1.0,
                _ => TAU,
            };
            let grid: Vec<f64> = match scale.as_str() {
                "linear" => {
                    if points == 1 {
                        vec![unit * start]
                    } else {
                        (0..points)
                            .map(|k| {
                                unit * (start + (stop - start) * k as f64 / (points - 1) as f64)
                            })
                            .collect()
                    }
                }
                "log" => {
                    if start <= 0.0 {
                        return err("sweep.start: log scale requires positive start".to_string());
                    }
                    if points == 1 {
                        vec![unit * start]
                    } else {
                        let (la, lb) = (start.log10(), stop.log10());
                        (0..points)
                            .map(|k| {
                                unit * 10f64
                                    .powf(la + (lb - la) * k as f64 / (points - 1) as f64)
                            })
                            .collect()
                    }
                }
                other => {
                    return err(format!(
                        "sweep.scale: expected linear or log, got '{other}'"
                    ))
                }
            };
            Some(SweepSection { parameter, grid })
        }
    };

    e.check_all_used()?;
    Ok(RunConfig {
        model,
        rates,
        initial,
        solver,
        hamiltonian,
        times,
        output,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
model.eta_mhz = 0.02
model.omega_s_mhz = 1.0
model.omega_0_mhz = 1.0
model.omega_a_mhz = matched
model.delta_mhz = 50.0
";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert!((cfg.model.delta - TAU * 50.0).abs() < 1e-12);
        assert!((cfg.model.omega_a - TAU * 0.02).abs() < 1e-12);
        assert_eq!(cfg.hamiltonian, HamiltonianKind::Interaction);
        assert_eq!(cfg.initial, InitialStateSpec::ChiralMix(0.5));
        assert_eq!(cfg.rates, DecayRates::zero());
        assert!(cfg.times.is_none());
    }

    #[test]
    fn rejects_negative_rate_with_field_path() {
        let text = format!("{MINIMAL}rates.gamma_s_mhz = -0.1\n");
        let e = parse_config(&text).unwrap_err();
        assert!(e.0.contains("rates.gamma_s_mhz"), "{}", e.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{MINIMAL}model.bogus = 3\n");
        let e = parse_config(&text).unwrap_err();
        assert!(e.0.contains("model.bogus"), "{}", e.0);
    }

    #[test]
    fn rejects_duplicates_and_malformed_lines() {
        let text = format!("{MINIMAL}model.eta_mhz = 0.03\n");
        assert!(parse_config(&text).unwrap_err().0.contains("duplicate"));
        assert!(parse_config("nonsense\n").unwrap_err().0.contains("line 1"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{MINIMAL}initial.x = 0.25 # inline\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.initial, InitialStateSpec::ChiralMix(0.25));
    }

    #[test]
    fn matched_requires_nonzero_delta() {
        let text = MINIMAL.replace("model.delta_mhz = 50.0", "model.delta_mhz = 0.0");
        let e = parse_config(&text).unwrap_err();
        assert!(e.0.contains("matched"), "{}", e.0);
    }

    #[test]
    fn sweep_section_builds_angular_grid() {
        let text = format!(
            "{MINIMAL}sweep.parameter = delta\nsweep.start = 25\nsweep.stop = 75\nsweep.points = 3\n"
        );
        let cfg = parse_config(&text).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.grid.len(), 3);
        assert!((sweep.grid[1] - TAU * 50.0).abs() < 1e-9);
    }

    #[test]
    fn partial_sweep_section_is_flagged() {
        let text = format!("{MINIMAL}sweep.start = 25\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn init_x_sweep_is_dimensionless() {
        let text = format!(
            "{MINIMAL}sweep.parameter = init_x\nsweep.start = 0\nsweep.stop = 1\nsweep.points = 3\n"
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.sweep.unwrap().grid, vec![0.0, 0.5, 1.0]);
    }
}
