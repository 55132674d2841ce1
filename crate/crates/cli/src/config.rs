//! Flat-key experiment configuration: one `section.key = value` pair per
//! line, `#` comments. Parse errors carry the offending line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sapi_core::model::{self, EquilibriumState, ModelSystem};
use sapi_core::pvm::{PvmScheme, ViscosityScheme};
use sapi_core::rhs::BoundaryCondition;
use sapi_core::stability::IntegratorKind;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError {
        message: msg.into(),
    }
}

/// Raw key-value view of a config file.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected 'section.key = value'", lineno + 1)))?;
            let key = key.trim();
            if !key.contains('.') {
                return Err(err(format!(
                    "line {}: key '{key}' must be section-qualified (section.key)",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), (value.trim().to_string(), lineno + 1));
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.values.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| err(format!("missing required key '{key}'")))
    }

    pub fn optional(&self, key: &str) -> Option<&str> {
        self.get(key).map(|(v, _)| v.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let (v, line) = self
            .get(key)
            .ok_or_else(|| err(format!("missing required key '{key}'")))?;
        parse_f64(v).map_err(|e| err(format!("line {line}, key '{key}': {e}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => {
                parse_f64(v).map_err(|e| err(format!("line {line}, key '{key}': {e}")))
            }
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => parse_f64(v)
                .map(Some)
                .map_err(|e| err(format!("line {line}, key '{key}': {e}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let (v, line) = self
            .get(key)
            .ok_or_else(|| err(format!("missing required key '{key}'")))?;
        v.parse::<usize>()
            .map_err(|e| err(format!("line {line}, key '{key}': {e}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|e| err(format!("line {line}, key '{key}': {e}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(err(format!(
                    "line {line}, key '{key}': expected a boolean, got '{other}'"
                ))),
            },
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (v, line) = self
            .get(key)
            .ok_or_else(|| err(format!("missing required key '{key}'")))?;
        v.split(',')
            .map(|s| parse_f64(s.trim()).map_err(|e| err(format!("line {line}, key '{key}': {e}"))))
            .collect()
    }

    pub fn f64_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        if self.get(key).is_none() {
            return Ok(None);
        }
        self.f64_list(key).map(Some)
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        "pi" => Ok(std::f64::consts::PI),
        _ => v.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// Which balance-law model an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Scalar { a: f64 },
    Hme { m: usize },
    HmeLinearized { m: usize, rho: f64, u: f64, theta: f64 },
    Hsm { m: usize },
}

/// Fully parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model_kind: ModelKind,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub eps_left: f64,
    pub eps_right: f64,
    pub split_x: f64,
    pub scheme: PvmScheme,
    pub cfl: f64,
    pub integrator: IntegratorKind,
    /// Fill missing integrator parameters from the closed-form bounds.
    pub integrator_auto: bool,
    pub dt: Option<f64>,
    pub delta_t: Option<f64>,
    pub k: usize,
    pub delta_t_left: Option<f64>,
    pub delta_t_right: Option<f64>,
    pub k_left: Option<usize>,
    pub k_right: Option<usize>,
    pub end_time: f64,
    pub boundary: BoundaryCondition,
    pub snapshots: Vec<f64>,
    pub initial: InitialData,
    pub quad_points: usize,
    pub containment_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// left state for x < split_x, right state otherwise
    Riemann {
        left: Vec<f64>,
        right: Vec<f64>,
        split_x: f64,
    },
    Uniform(Vec<f64>),
    /// (rho, u, theta, 0, ..., 0) everywhere
    Equilibrium,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let model_kind = match raw.require("model.kind")? {
            "scalar" => ModelKind::Scalar {
                a: raw.f64_or("model.a", 1.0)?,
            },
            "hme" => ModelKind::Hme {
                m: raw.usize("model.m")?,
            },
            "hme_linearized" => ModelKind::HmeLinearized {
                m: raw.usize("model.m")?,
                rho: raw.f64_or("model.rho", 1.0)?,
                u: raw.f64_or("model.u", 0.0)?,
                theta: raw.f64_or("model.theta", 1.0)?,
            },
            "hsm" => ModelKind::Hsm {
                m: raw.usize("model.m")?,
            },
            other => return Err(err(format!("unknown model.kind '{other}'"))),
        };

        let scheme = match raw.require("scheme.kind")? {
            "upwind" => PvmScheme::Upwind,
            "lax_friedrichs" | "lf" => PvmScheme::LaxFriedrichs,
            "force" => PvmScheme::Force,
            other => return Err(err(format!("unknown scheme.kind '{other}'"))),
        };

        let integrator = match raw.optional("integrator.kind").unwrap_or("fe") {
            "fe" => IntegratorKind::Fe,
            "pfe" => IntegratorKind::Pfe,
            "afe" => IntegratorKind::Afe,
            "apfe" => IntegratorKind::Apfe,
            "appfe" => IntegratorKind::Appfe,
            other => return Err(err(format!("unknown integrator.kind '{other}'"))),
        };

        let boundary = match raw.optional("simulation.boundary").unwrap_or("periodic") {
            "periodic" => BoundaryCondition::Periodic,
            "zero_gradient" => BoundaryCondition::ZeroGradient,
            other => return Err(err(format!("unknown simulation.boundary '{other}'"))),
        };

        let initial = match raw.optional("initial.kind").unwrap_or("equilibrium") {
            "riemann" => InitialData::Riemann {
                left: raw.f64_list("initial.left")?,
                right: raw.f64_list("initial.right")?,
                split_x: raw.f64_or("initial.split_x", 0.0)?,
            },
            "uniform" => InitialData::Uniform(raw.f64_list("initial.state")?),
            "equilibrium" => InitialData::Equilibrium,
            other => return Err(err(format!("unknown initial.kind '{other}'"))),
        };

        let cfg = Self {
            model_kind,
            x_min: raw.f64("grid.x_min")?,
            x_max: raw.f64("grid.x_max")?,
            n_cells: raw.usize("grid.n_cells")?,
            eps_left: raw.f64("relaxation.eps_left")?,
            eps_right: raw.f64("relaxation.eps_right")?,
            split_x: raw.f64_or("relaxation.split_x", 0.0)?,
            scheme,
            cfl: raw.f64_or("scheme.cfl", 0.5)?,
            integrator,
            integrator_auto: raw.bool_or("integrator.auto", false)?,
            dt: raw.f64_opt("integrator.dt")?,
            delta_t: raw.f64_opt("integrator.delta_t")?,
            k: raw.usize_or("integrator.k", 1)?,
            delta_t_left: raw.f64_opt("integrator.delta_t_left")?,
            delta_t_right: raw.f64_opt("integrator.delta_t_right")?,
            k_left: match raw.optional("integrator.k_left") {
                Some(_) => Some(raw.usize("integrator.k_left")?),
                None => None,
            },
            k_right: match raw.optional("integrator.k_right") {
                Some(_) => Some(raw.usize("integrator.k_right")?),
                None => None,
            },
            end_time: raw.f64_or("simulation.end_time", 0.1)?,
            boundary,
            snapshots: raw
                .f64_list_opt("simulation.snapshots")?
                .unwrap_or_default(),
            initial,
            quad_points: raw.usize_or("quadrature.points", 3)?,
            containment_tol: raw.f64_or("analysis.containment_tol", 1e-9)?,
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::load(path)?)
    }

    pub fn build_model(&self) -> Result<ModelSystem, sapi_core::Error> {
        match self.model_kind {
            ModelKind::Scalar { a } => Ok(model::scalar_model(a)),
            ModelKind::Hme { m } => model::hme_model(m),
            ModelKind::HmeLinearized { m, rho, u, theta } => {
                let eq = EquilibriumState::new(rho, u, theta)?;
                model::hme_linearized(&eq, m)
            }
            ModelKind::Hsm { m } => model::hsm_model(m),
        }
    }

    pub fn viscosity(&self) -> Result<ViscosityScheme, sapi_core::Error> {
        ViscosityScheme::new(self.scheme, self.cfl)
    }

    /// Serialize back to the flat-key format (round-trip for run metadata).
    pub fn to_flat_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        match self.model_kind {
            ModelKind::Scalar { a } => {
                push("model.kind", "scalar".into());
                push("model.a", fmt_f64(a));
            }
            ModelKind::Hme { m } => {
                push("model.kind", "hme".into());
                push("model.m", m.to_string());
            }
            ModelKind::HmeLinearized { m, rho, u, theta } => {
                push("model.kind", "hme_linearized".into());
                push("model.m", m.to_string());
                push("model.rho", fmt_f64(rho));
                push("model.u", fmt_f64(u));
                push("model.theta", fmt_f64(theta));
            }
            ModelKind::Hsm { m } => {
                push("model.kind", "hsm".into());
                push("model.m", m.to_string());
            }
        }
        push("grid.x_min", fmt_f64(self.x_min));
        push("grid.x_max", fmt_f64(self.x_max));
        push("grid.n_cells", self.n_cells.to_string());
        push("relaxation.eps_left", fmt_f64(self.eps_left));
        push("relaxation.eps_right", fmt_f64(self.eps_right));
        push("relaxation.split_x", fmt_f64(self.split_x));
        push("scheme.kind", self.scheme.name().into());
        push("scheme.cfl", fmt_f64(self.cfl));
        push("integrator.kind", self.integrator.name().into());
        push("integrator.auto", self.integrator_auto.to_string());
        if let Some(v) = self.dt {
            push("integrator.dt", fmt_f64(v));
        }
        if let Some(v) = self.delta_t {
            push("integrator.delta_t", fmt_f64(v));
        }
        push("integrator.k", self.k.to_string());
        if let Some(v) = self.delta_t_left {
            push("integrator.delta_t_left", fmt_f64(v));
        }
        if let Some(v) = self.delta_t_right {
            push("integrator.delta_t_right", fmt_f64(v));
        }
        if let Some(v) = self.k_left {
            push("integrator.k_left", v.to_string());
        }
        if let Some(v) = self.k_right {
            push("integrator.k_right", v.to_string());
        }
        push("simulation.end_time", fmt_f64(self.end_time));
        push(
            "simulation.boundary",
            match self.boundary {
                BoundaryCondition::Periodic => "periodic".into(),
                BoundaryCondition::ZeroGradient => "zero_gradient".into(),
            },
        );
        if !self.snapshots.is_empty() {
            push(
                "simulation.snapshots",
                self.snapshots
                    .iter()
                    .map(|t| fmt_f64(*t))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        match &self.initial {
            InitialData::Riemann {
                left,
                right,
                split_x,
            } => {
                push("initial.kind", "riemann".into());
                push(
                    "initial.left",
                    left.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
                );
                push(
                    "initial.right",
                    right.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
                );
                push("initial.split_x", fmt_f64(*split_x));
            }
            InitialData::Uniform(state) => {
                push("initial.kind", "uniform".into());
                push(
                    "initial.state",
                    state.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
                );
            }
            InitialData::Equilibrium => push("initial.kind", "equilibrium".into()),
        }
        push("quadrature.points", self.quad_points.to_string());
        push("analysis.containment_tol", fmt_f64(self.containment_tol));
        out
    }
}

/// Shortest decimal form that round-trips the double exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v}");
    if s.parse::<f64>() == Ok(v) {
        s
    } else {
        format!("{v:.17e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# reference spectrum setup
model.kind = hme_linearized
model.m = 4
model.rho = 1
model.u = pi
model.theta = 1
grid.x_min = -1
grid.x_max = 1
grid.n_cells = 100
relaxation.eps_left = 1e-4
relaxation.eps_right = 1e-3
relaxation.split_x = 0
scheme.kind = upwind
scheme.cfl = 0.75
";

    #[test]
    fn parses_sample() {
        let raw = RawConfig::parse(SAMPLE).unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.n_cells, 100);
        assert_eq!(cfg.scheme, PvmScheme::Upwind);
        assert_eq!(cfg.cfl, 0.75);
        match cfg.model_kind {
            ModelKind::HmeLinearized { m, u, .. } => {
                assert_eq!(m, 4);
                assert_eq!(u, std::f64::consts::PI);
            }
            other => panic!("unexpected model {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "model.kind = hme_linearized\nmodel.m = not_a_number\n";
        let raw = RawConfig::parse(bad).unwrap();
        let e = ExperimentConfig::from_raw(&raw).unwrap_err();
        assert!(e.message.contains("line 2"), "{}", e.message);
        assert!(e.message.contains("model.m"), "{}", e.message);
    }

    #[test]
    fn round_trip_through_flat_text() {
        let raw = RawConfig::parse(SAMPLE).unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        let text = cfg.to_flat_text();
        let cfg2 = ExperimentConfig::from_raw(&RawConfig::parse(&text).unwrap()).unwrap();
        assert_eq!(cfg.n_cells, cfg2.n_cells);
        assert_eq!(cfg.cfl, cfg2.cfl);
        assert_eq!(cfg.eps_left, cfg2.eps_left);
        assert_eq!(cfg.model_kind, cfg2.model_kind);
    }
}
