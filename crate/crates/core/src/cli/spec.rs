//! Problem files: one JSON object tagged by `kind`.

use serde::{Deserialize, Serialize};

use super::{CliError, Kind};

/// Side of the anchor for `deriv` and `integrate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSpec {
    #[default]
    Left,
    Right,
}

impl SideSpec {
    fn is_left(&self) -> bool {
        *self == SideSpec::Left
    }
}

/// `deriv` and `integrate`: an expression in `x`, evaluated at `x` and
/// optionally tabulated at `points`. `a` is the anchor: the left end, or the
/// right end when `side` is `right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub f: String,
    pub alpha: f64,
    pub a: f64,
    pub x: f64,
    #[serde(default, skip_serializing_if = "SideSpec::is_left")]
    pub side: SideSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

fn default_grid_points() -> usize {
    201
}

fn default_samples() -> usize {
    21
}

fn default_extremal_tol() -> f64 {
    1e-5
}

/// `extremal` and `dubois`: `L(x, y, v)` on `[a, b]` with fixed ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalSpec {
    pub lagrangian: String,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub ya: f64,
    pub yb: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_extremal_tol")]
    pub tol: f64,
}

fn default_balance_tol() -> f64 {
    1e-4
}

/// `noether-check`: a transformation family with generators in `(x, y)`,
/// checked on the extremal of the given problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoetherSpec {
    pub lagrangian: String,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub ya: f64,
    pub yb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<String>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_balance_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalSpec {
    Fixed(f64),
    Free,
}

fn default_dynamics() -> String {
    "v".into()
}

/// `control`: minimize `∫ L(x, y, v)` subject to `D^α y = φ(x, y, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub lagrangian: String,
    #[serde(default = "default_dynamics")]
    pub dynamics: String,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub ya: f64,
    pub terminal: TerminalSpec,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_extremal_tol")]
    pub tol: f64,
}

fn default_extrapolation() -> String {
    "richardson".into()
}

fn default_demo_samples() -> usize {
    51
}

fn default_demo_tol() -> f64 {
    1e-3
}

/// `dissipative-demo`: `m x'' + γ x' = −U'(x)` recovered from windowed
/// friction actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipativeSpec {
    pub m: f64,
    pub gamma: f64,
    pub potential: String,
    pub x0: f64,
    pub v0: f64,
    pub horizon: f64,
    pub widths: Vec<f64>,
    #[serde(default = "default_extrapolation")]
    pub extrapolation: String,
    #[serde(default = "default_demo_samples")]
    pub samples: usize,
    #[serde(default = "default_demo_tol")]
    pub tol: f64,
}

fn default_2d_tol() -> f64 {
    1e-6
}

/// `green-check`: Green's theorem for `f, g` of `(x1, x2)` on
/// `[a, b] × [c, d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenSpec {
    pub f: String,
    pub g: String,
    pub alpha: f64,
    pub rect: [f64; 4],
    #[serde(default = "default_2d_tol")]
    pub tol: f64,
}

/// `el2d-check`: the 2-D Euler–Lagrange residual of `L(x1, x2, y, v1, v2)`
/// along `y(x1, x2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct El2dSpec {
    pub lagrangian: String,
    pub y: String,
    pub alpha: f64,
    pub rect: [f64; 4],
    #[serde(default = "default_2d_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Deriv(OperatorSpec),
    Integrate(OperatorSpec),
    Extremal(ExtremalSpec),
    Dubois(ExtremalSpec),
    NoetherCheck(NoetherSpec),
    Control(ControlSpec),
    DissipativeDemo(DissipativeSpec),
    GreenCheck(GreenSpec),
    #[serde(rename = "el2d-check")]
    El2dCheck(El2dSpec),
}

impl ProblemSpec {
    pub fn kind(&self) -> Kind {
        match self {
            ProblemSpec::Deriv(_) => Kind::Deriv,
            ProblemSpec::Integrate(_) => Kind::Integrate,
            ProblemSpec::Extremal(_) => Kind::Extremal,
            ProblemSpec::Dubois(_) => Kind::Dubois,
            ProblemSpec::NoetherCheck(_) => Kind::NoetherCheck,
            ProblemSpec::Control(_) => Kind::Control,
            ProblemSpec::DissipativeDemo(_) => Kind::DissipativeDemo,
            ProblemSpec::GreenCheck(_) => Kind::GreenCheck,
            ProblemSpec::El2dCheck(_) => Kind::El2dCheck,
        }
    }

    /// The problem each subcommand runs when no file is given.
    pub fn default_for(kind: Kind) -> Self {
        let dirichlet = ExtremalSpec {
            lagrangian: "v^2".into(),
            alpha: 0.5,
            a: 0.0,
            b: 1.0,
            ya: 0.0,
            yb: 1.0,
            grid_points: default_grid_points(),
            samples: default_samples(),
            tol: default_extremal_tol(),
        };
        match kind {
            Kind::Deriv => ProblemSpec::Deriv(OperatorSpec {
                f: "x^2".into(),
                alpha: 0.5,
                a: 0.0,
                x: 1.0,
                side: SideSpec::Left,
                points: Some(vec![0.25, 0.5, 1.0, 2.0]),
            }),
            Kind::Integrate => ProblemSpec::Integrate(OperatorSpec {
                f: "x^2".into(),
                alpha: 0.5,
                a: 0.0,
                x: 1.0,
                side: SideSpec::Left,
                points: Some(vec![0.25, 0.5, 1.0, 2.0]),
            }),
            Kind::Extremal => ProblemSpec::Extremal(dirichlet),
            Kind::Dubois => ProblemSpec::Dubois(dirichlet),
            Kind::NoetherCheck => ProblemSpec::NoetherCheck(NoetherSpec {
                lagrangian: "v^2".into(),
                alpha: 0.5,
                a: 0.0,
                b: 1.0,
                ya: 0.0,
                yb: 1.0,
                tau: None,
                xi: Some("x^0.5".into()),
                gauge: Some("y".into()),
                grid_points: default_grid_points(),
                samples: default_samples(),
                tol: default_balance_tol(),
            }),
            Kind::Control => ProblemSpec::Control(ControlSpec {
                lagrangian: "v^2/2 + y^2/2".into(),
                dynamics: default_dynamics(),
                alpha: 1.0,
                a: 0.0,
                b: 2.0,
                ya: 1.5,
                terminal: TerminalSpec::Free,
                grid_points: default_grid_points(),
                samples: default_samples(),
                tol: default_extremal_tol(),
            }),
            Kind::DissipativeDemo => ProblemSpec::DissipativeDemo(DissipativeSpec {
                m: 1.0,
                gamma: 0.5,
                potential: "x^2/2".into(),
                x0: 1.0,
                v0: 0.0,
                horizon: 5.0,
                widths: vec![0.2, 0.1, 0.05, 0.025],
                extrapolation: default_extrapolation(),
                samples: default_demo_samples(),
                tol: default_demo_tol(),
            }),
            Kind::GreenCheck => ProblemSpec::GreenCheck(GreenSpec {
                f: "x1*x2^2".into(),
                g: "x1^2*x2 + x1*x2^3".into(),
                alpha: 0.5,
                rect: [0.0, 1.0, 0.0, 1.0],
                tol: default_2d_tol(),
            }),
            Kind::El2dCheck => ProblemSpec::El2dCheck(El2dSpec {
                lagrangian: "v1^2 + v2^2".into(),
                y: "x1^0.5".into(),
                alpha: 0.5,
                rect: [0.0, 1.0, 0.0, 1.0],
                tol: default_2d_tol(),
            }),
        }
    }

    /// Replaces the certificate tolerance.
    pub fn set_tol(&mut self, tol: f64) {
        match self {
            ProblemSpec::Deriv(_) | ProblemSpec::Integrate(_) => {}
            ProblemSpec::Extremal(s) | ProblemSpec::Dubois(s) => s.tol = tol,
            ProblemSpec::NoetherCheck(s) => s.tol = tol,
            ProblemSpec::Control(s) => s.tol = tol,
            ProblemSpec::DissipativeDemo(s) => s.tol = tol,
            ProblemSpec::GreenCheck(s) => s.tol = tol,
            ProblemSpec::El2dCheck(s) => s.tol = tol,
        }
    }
}

/// Parses a problem file. Syntax and type errors carry the line and column
/// reported by the JSON reader.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        if let Some(rest) = message.strip_prefix("missing field `") {
            if let Some(name) = rest.split('`').next() {
                return CliError::MissingField(name.to_string());
            }
        }
        if message.starts_with("missing field") {
            return CliError::MissingField(message);
        }
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

/// Pretty-printed JSON form of a problem, accepted back by [`parse_spec`].
pub fn render_spec(spec: &ProblemSpec) -> String {
    let mut s = serde_json::to_string_pretty(spec).expect("problem specs serialize");
    s.push('\n');
    s
}
