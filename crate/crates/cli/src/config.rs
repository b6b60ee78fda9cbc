//! Fully resolved run configurations and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jumpvex::analysis::LcpOptions;
use jumpvex::mc::MCConfig;
use jumpvex::model::MeasureSpec;
use jumpvex::pide::{default_grid_spec, GridSpec, SchemeConfig, Spacing};
use jumpvex::{Model, Payoff};
use serde::{Deserialize, Serialize};

use crate::args::{
    BermudanArgs, CheckArgs, Command, CompareArgs, ConvexityArgs, CounterexampleArgs, GridArgs, LcpArgs, McArgs,
    MethodArg, PriceArgs, SchemeArgs, SpacingArg, TruncateArgs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fd,
    Mc,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Fd => Method::Fd,
            MethodArg::Mc => Method::Mc,
        }
    }
}

/// Everything a command needs, with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum RunConfig {
    Price {
        model: Model,
        payoff: String,
        x0: f64,
        horizon: f64,
        method: Method,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSpec<f64>>,
        scheme: SchemeConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mc: Option<MCConfig>,
        error_estimate: bool,
        dump_paths: usize,
    },
    Check {
        model: Model,
        x_samples: Vec<f64>,
        t_samples: Vec<f64>,
        z_samples: Vec<f64>,
    },
    Convexity {
        model: Model,
        payoff: String,
        horizon: f64,
        grid: GridSpec<f64>,
        scheme: SchemeConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Compare {
        model_hi: Model,
        model_lo: Model,
        payoff: String,
        horizon: f64,
        method: Method,
        grid: GridSpec<f64>,
        scheme: SchemeConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mc: Option<MCConfig>,
        x_points: Vec<f64>,
    },
    Lcp {
        model: Model,
        x_points: Vec<f64>,
        t_points: Vec<f64>,
        widths: Vec<f64>,
        options: LcpOptions,
    },
    Counterexample {
        horizon: f64,
        grid: GridSpec<f64>,
        scheme: SchemeConfig,
        mc: MCConfig,
        /// Chord endpoints and the interior probe point.
        left: f64,
        probe: f64,
        right: f64,
    },
    Truncate {
        model: Model,
        n: u32,
        x_grid: Vec<f64>,
        z_intervals: usize,
        t_grid: Vec<f64>,
        out_file: String,
    },
    Bermudan {
        model: Model,
        payoff: String,
        x0: f64,
        horizon: f64,
        dates: Vec<f64>,
        grid: GridSpec<f64>,
        scheme: SchemeConfig,
    },
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Price { .. } => "price",
            RunConfig::Check { .. } => "check",
            RunConfig::Convexity { .. } => "convexity",
            RunConfig::Compare { .. } => "compare",
            RunConfig::Lcp { .. } => "lcp",
            RunConfig::Counterexample { .. } => "counterexample",
            RunConfig::Truncate { .. } => "truncate",
            RunConfig::Bermudan { .. } => "bermudan",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// Output files, relative to `out_dir`.
    pub outputs: Vec<String>,
    pub threads: usize,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    Model::from_json(&text).with_context(|| format!("model {}", path.display()))
}

pub fn parse_payoff(text: &str) -> Result<Payoff> {
    text.parse::<Payoff>().with_context(|| format!("payoff '{text}'"))
}

fn scheme_config(args: &SchemeArgs) -> SchemeConfig {
    let mut s = SchemeConfig::default();
    if let Some(z) = args.z_nodes {
        s.z_quadrature_nodes = z;
    }
    if let Some(k) = args.startup_steps {
        s.smoothing_startup_steps = k;
    }
    s
}

fn mc_config(args: &McArgs) -> MCConfig {
    let mut c = MCConfig::default();
    if let Some(n) = args.paths {
        c.n_paths = n;
    }
    if let Some(n) = args.steps {
        c.n_steps = n;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    c.antithetic = args.antithetic;
    c
}

fn override_grid(mut spec: GridSpec<f64>, args: &GridArgs) -> GridSpec<f64> {
    if let Some(v) = args.x_min {
        spec.x_min = v;
    }
    if let Some(v) = args.x_max {
        spec.x_max = v;
    }
    if let Some(v) = args.n_x {
        spec.n_x = v;
    }
    if let Some(v) = args.n_t {
        spec.n_t = v;
    }
    match args.spacing {
        Some(SpacingArg::Uniform) => spec.spacing = Spacing::Uniform,
        Some(SpacingArg::Geometric) => spec.spacing = Spacing::Geometric,
        None => {}
    }
    spec
}

fn resolve_grid(
    model: &Model,
    payoff: &Payoff,
    x0: f64,
    horizon: f64,
    scheme: &SchemeConfig,
    args: &GridArgs,
) -> Result<GridSpec<f64>> {
    let spec = default_grid_spec(model, payoff, x0, horizon, scheme)?;
    Ok(override_grid(spec, args))
}

fn anchor_for(payoff: &Payoff, x0: Option<f64>) -> f64 {
    x0.or(payoff.reference_level()).unwrap_or(1.0)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let r = (b / a).ln();
    (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a * (r * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Parses `geom:a,b,n`, `uniform:a,b,n` or a plain comma-separated list.
pub fn parse_x_grid(text: &str) -> Result<Vec<f64>> {
    let numbers = |body: &str| -> Result<Vec<f64>> {
        body.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("x grid: not a number '{p}'"))
            })
            .collect()
    };
    let ranged = |body: &str| -> Result<(f64, f64, usize)> {
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 3 {
            bail!("x grid: expected a,b,count in '{text}'");
        }
        let a = parts[0].trim().parse::<f64>().context("x grid start")?;
        let b = parts[1].trim().parse::<f64>().context("x grid end")?;
        let n = parts[2].trim().parse::<usize>().context("x grid count")?;
        if n < 2 || !(a > 0.0 && b > a) {
            bail!("x grid: need 0 < a < b and count >= 2");
        }
        Ok((a, b, n))
    };
    if let Some(body) = text.strip_prefix("geom:") {
        let (a, b, n) = ranged(body)?;
        Ok(geomspace(a, b, n))
    } else if let Some(body) = text.strip_prefix("uniform:") {
        let (a, b, n) = ranged(body)?;
        Ok(linspace(a, b, n))
    } else {
        numbers(text)
    }
}

fn default_labels(model: &Model) -> Result<Vec<f64>> {
    if model.measure.is_finite_activity() {
        return Ok(model
            .measure
            .quadrature(SchemeConfig::default().z_quadrature_nodes)?
            .nodes);
    }
    let (a, b) = model.measure.finite_window().unwrap_or((1e-3, 1e3));
    Ok(geomspace(a, b, 65))
}

/// Uniform grid on which 0.5, 0.6 and 1.0 are nodes.
pub fn counterexample_grid(horizon: f64) -> GridSpec<f64> {
    GridSpec {
        spacing: Spacing::Uniform,
        x_min: 0.05,
        x_max: 3.05,
        n_x: 601,
        n_t: ((horizon * 400.0).ceil() as usize + 1).max(65),
        anchor: None,
    }
}

pub fn resolve(command: &Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Price(a) => resolve_price(a)?,
        Command::Check(a) => resolve_check(a)?,
        Command::Convexity(a) => resolve_convexity(a)?,
        Command::Compare(a) => resolve_compare(a)?,
        Command::Lcp(a) => resolve_lcp(a)?,
        Command::Counterexample(a) => resolve_counterexample(a),
        Command::Truncate(a) => resolve_truncate(a)?,
        Command::Bermudan(a) => resolve_bermudan(a)?,
    })
}

fn resolve_price(a: &PriceArgs) -> Result<RunConfig> {
    let model = load_model(&a.model)?;
    let payoff = parse_payoff(&a.payoff)?;
    let scheme = scheme_config(&a.scheme);
    let method = Method::from(a.method);
    let grid = match method {
        Method::Fd => Some(resolve_grid(&model, &payoff, a.x0, a.horizon, &scheme, &a.grid)?),
        Method::Mc => None,
    };
    let mc = (method == Method::Mc).then(|| mc_config(&a.mc));
    Ok(RunConfig::Price {
        model,
        payoff: payoff.to_string(),
        x0: a.x0,
        horizon: a.horizon,
        method,
        grid,
        scheme,
        mc,
        error_estimate: !a.no_error_estimate,
        dump_paths: if method == Method::Mc { a.dump_paths } else { 0 },
    })
}

fn resolve_check(a: &CheckArgs) -> Result<RunConfig> {
    let model = load_model(&a.model)?;
    let z_samples = match &a.z {
        Some(z) => z.clone(),
        None => default_labels(&model)?,
    };
    Ok(RunConfig::Check {
        x_samples: a.x.clone().unwrap_or_else(|| geomspace(0.05, 20.0, 241)),
        t_samples: a.t.clone().unwrap_or_else(|| linspace(0.0, a.horizon, 5)),
        z_samples,
        model,
    })
}

fn resolve_convexity(a: &ConvexityArgs) -> Result<RunConfig> {
    let model = load_model(&a.model)?;
    let payoff = parse_payoff(&a.payoff)?;
    let scheme = scheme_config(&a.scheme);
    let x0 = anchor_for(&payoff, a.x0);
    let grid = resolve_grid(&model, &payoff, x0, a.horizon, &scheme, &a.grid)?;
    Ok(RunConfig::Convexity {
        model,
        payoff: payoff.to_string(),
        horizon: a.horizon,
        grid,
        scheme,
        tolerance: a.tolerance,
    })
}

fn resolve_compare(a: &CompareArgs) -> Result<RunConfig> {
    let model_hi = load_model(&a.model_hi)?;
    let model_lo = load_model(&a.model_lo)?;
    let payoff = parse_payoff(&a.payoff)?;
    let scheme = scheme_config(&a.scheme);
    let x0 = anchor_for(&payoff, a.x0);
    // size the shared grid for the model with the larger jumps
    let g_hi = resolve_grid(&model_hi, &payoff, x0, a.horizon, &scheme, &a.grid)?;
    let g_lo = resolve_grid(&model_lo, &payoff, x0, a.horizon, &scheme, &a.grid)?;
    let grid = GridSpec {
        x_max: g_hi.x_max.max(g_lo.x_max),
        n_t: g_hi.n_t.max(g_lo.n_t),
        ..g_hi
    };
    let method = Method::from(a.method);
    Ok(RunConfig::Compare {
        model_hi,
        model_lo,
        payoff: payoff.to_string(),
        horizon: a.horizon,
        method,
        grid,
        scheme,
        mc: (method == Method::Mc).then(|| mc_config(&a.mc)),
        x_points: a.x.clone().unwrap_or_else(|| vec![x0]),
    })
}

fn resolve_lcp(a: &LcpArgs) -> Result<RunConfig> {
    let mut options = LcpOptions::default();
    if let Some(z) = a.z_nodes {
        options.z_quadrature_nodes = z;
    }
    Ok(RunConfig::Lcp {
        model: load_model(&a.model)?,
        x_points: a.x.clone(),
        t_points: a.t.clone(),
        widths: a.widths.clone(),
        options,
    })
}

fn resolve_counterexample(a: &CounterexampleArgs) -> RunConfig {
    RunConfig::Counterexample {
        horizon: a.horizon,
        grid: override_grid(counterexample_grid(a.horizon), &a.grid),
        scheme: SchemeConfig::default(),
        mc: mc_config(&a.mc),
        left: 0.5,
        probe: 0.6,
        right: 1.0,
    }
}

fn resolve_truncate(a: &TruncateArgs) -> Result<RunConfig> {
    let model = load_model(&a.model)?;
    if matches!(model.measure, MeasureSpec::LebesgueUnit) {
        bail!("model '{}' already has a finite label measure", model.label);
    }
    let out_file = a
        .out
        .file_name()
        .context("--out must name a file")?
        .to_string_lossy()
        .into_owned();
    Ok(RunConfig::Truncate {
        model,
        n: a.n,
        x_grid: parse_x_grid(&a.x_grid)?,
        z_intervals: a.z_intervals.unwrap_or(64),
        t_grid: a.t_grid.clone().unwrap_or_else(|| vec![0.0]),
        out_file,
    })
}

fn resolve_bermudan(a: &BermudanArgs) -> Result<RunConfig> {
    let model = load_model(&a.model)?;
    let payoff = parse_payoff(&a.payoff)?;
    let scheme = scheme_config(&a.scheme);
    let x0 = anchor_for(&payoff, a.x0);
    let grid = resolve_grid(&model, &payoff, x0, a.horizon, &scheme, &a.grid)?;
    Ok(RunConfig::Bermudan {
        model,
        payoff: payoff.to_string(),
        x0,
        horizon: a.horizon,
        dates: a.dates.clone(),
        grid,
        scheme,
    })
}
