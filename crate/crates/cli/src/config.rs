//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # problem
//! dimension = 3
//! r_max = 40
//! nodes = 4000
//! masses = 1
//! term = -1.5 4
//! term = 1 5
//! # charges from a plateau profile
//! recipe_v = 1
//! recipe_omega = 0.5
//! recipe_radius = 8
//! ```
//!
//! Lists are whitespace separated. `term` may repeat; every other key may
//! appear at most once. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::PathBuf;

use semilinear_core::solver::Preconditioner;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Auto,
    TestProfile,
    Gaussian,
    File,
}

impl InitKind {
    fn as_str(self) -> &'static str {
        match self {
            InitKind::Auto => "auto",
            InitKind::TestProfile => "test_profile",
            InitKind::Gaussian => "gaussian",
            InitKind::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub exponents: Vec<f64>,
}

/// Charge plateau recipe: `C_i = ω_i ‖u_{r,i}‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChargeSpec {
    Explicit(Vec<f64>),
    Recipe(Recipe),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub energy_stall_tolerance: f64,
    pub stall_window: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub init: InitKind,
    pub init_v: Option<Vec<f64>>,
    pub init_radius: Option<f64>,
    pub init_amplitudes: Option<Vec<f64>>,
    pub init_widths: Option<Vec<f64>>,
    pub init_file: Option<PathBuf>,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    pub absolute_value: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iterations: 20_000,
            gradient_tolerance: 1e-7,
            energy_stall_tolerance: 1e-12,
            stall_window: 50,
            initial_step: 1e-2,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            init: InitKind::Auto,
            init_v: None,
            init_radius: None,
            init_amplitudes: None,
            init_widths: None,
            init_file: None,
            seed: 0,
            preconditioner: Preconditioner::Sobolev,
            absolute_value: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub r_max: f64,
    pub nodes: usize,
    pub masses: Vec<f64>,
    pub terms: Vec<Term>,
    pub charges: Option<ChargeSpec>,
    pub solver: SolverSettings,
    pub h1_box: f64,
    pub h1_samples: usize,
    pub h1_tolerance: f64,
    /// `(v, ω)` for the hylomorphy scan and the H3 check.
    pub scan_v: Option<Vec<f64>>,
    pub scan_omega: Option<Vec<f64>>,
    pub scan_radii: Option<Vec<f64>>,
    /// Multipliers applied to the base charges by the `scan` subcommand.
    pub charge_factors: Vec<f64>,
    /// Input profile for `rearrange`.
    pub profile: Option<PathBuf>,
    pub output_stem: String,
}

/// 5 geometric factors from `2^{-1/2}` to `2^{1/2}`.
pub fn default_charge_factors() -> Vec<f64> {
    (-2..=2).map(|i| 2f64.powf(i as f64 / 4.0)).collect()
}

fn err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        message: msg.into(),
    }
}

fn parse_f64(line: usize, key: &str, s: &str) -> Result<f64, CliError> {
    let x: f64 = s
        .parse()
        .map_err(|_| err(line, format!("{key}: '{s}' is not a number")))?;
    if !x.is_finite() {
        return Err(err(line, format!("{key}: '{s}' is not finite")));
    }
    Ok(x)
}

fn parse_list(line: usize, key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let v = s
        .split_whitespace()
        .map(|t| parse_f64(line, key, t))
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(err(line, format!("{key}: empty list")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| err(line, format!("{key}: '{s}' is not a nonnegative integer")))
}

fn parse_bool(line: usize, key: &str, s: &str) -> Result<bool, CliError> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(line, format!("{key}: '{s}' is not a boolean"))),
    }
}

#[derive(Default)]
struct Raw {
    dimension: Option<usize>,
    r_max: Option<f64>,
    nodes: Option<usize>,
    masses: Option<Vec<f64>>,
    terms: Vec<(usize, Vec<f64>)>,
    charges: Option<Vec<f64>>,
    recipe_v: Option<Vec<f64>>,
    recipe_omega: Option<Vec<f64>>,
    recipe_radius: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = Raw::default();
        let mut cfg_solver = SolverSettings::default();
        let mut seen = std::collections::HashSet::new();
        let mut h1_box = 3.0;
        let mut h1_samples = 61;
        let mut h1_tolerance = 0.0;
        let mut scan_v = None;
        let mut scan_omega = None;
        let mut scan_radii = None;
        let mut charge_factors = default_charge_factors();
        let mut profile = None;
        let mut output_stem = "result".to_string();

        for (idx, full) in text.lines().enumerate() {
            let line = idx + 1;
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(line, format!("{key}: missing value")));
            }
            if key != "term" && !seen.insert(key.to_string()) {
                return Err(err(line, format!("duplicate key '{key}'")));
            }
            let s = &mut cfg_solver;
            match key {
                "dimension" => raw.dimension = Some(parse_int(line, key, value)?),
                "r_max" => raw.r_max = Some(parse_f64(line, key, value)?),
                "nodes" => raw.nodes = Some(parse_int(line, key, value)?),
                "masses" => raw.masses = Some(parse_list(line, key, value)?),
                "term" => raw.terms.push((line, parse_list(line, key, value)?)),
                "charges" => raw.charges = Some(parse_list(line, key, value)?),
                "recipe_v" => raw.recipe_v = Some(parse_list(line, key, value)?),
                "recipe_omega" => raw.recipe_omega = Some(parse_list(line, key, value)?),
                "recipe_radius" => raw.recipe_radius = Some(parse_f64(line, key, value)?),
                "max_iterations" => s.max_iterations = parse_int(line, key, value)?,
                "gradient_tolerance" => s.gradient_tolerance = parse_f64(line, key, value)?,
                "energy_stall_tolerance" => s.energy_stall_tolerance = parse_f64(line, key, value)?,
                "stall_window" => s.stall_window = parse_int(line, key, value)?,
                "initial_step" => s.initial_step = parse_f64(line, key, value)?,
                "shrink" => s.shrink = parse_f64(line, key, value)?,
                "sufficient_decrease" => s.sufficient_decrease = parse_f64(line, key, value)?,
                "init" => {
                    s.init = match value {
                        "auto" => InitKind::Auto,
                        "test_profile" => InitKind::TestProfile,
                        "gaussian" => InitKind::Gaussian,
                        "file" => InitKind::File,
                        _ => return Err(err(line, format!("init: unknown mode '{value}'"))),
                    }
                }
                "init_v" => s.init_v = Some(parse_list(line, key, value)?),
                "init_radius" => s.init_radius = Some(parse_f64(line, key, value)?),
                "init_amplitudes" => s.init_amplitudes = Some(parse_list(line, key, value)?),
                "init_widths" => s.init_widths = Some(parse_list(line, key, value)?),
                "init_file" => s.init_file = Some(PathBuf::from(value)),
                "seed" => s.seed = parse_int(line, key, value)?,
                "preconditioner" => {
                    s.preconditioner = match value {
                        "sobolev" => Preconditioner::Sobolev,
                        "none" => Preconditioner::None,
                        _ => return Err(err(line, format!("preconditioner: unknown '{value}'"))),
                    }
                }
                "absolute_value" => s.absolute_value = parse_bool(line, key, value)?,
                "h1_box" => h1_box = parse_f64(line, key, value)?,
                "h1_samples" => h1_samples = parse_int(line, key, value)?,
                "h1_tolerance" => h1_tolerance = parse_f64(line, key, value)?,
                "scan_v" => scan_v = Some(parse_list(line, key, value)?),
                "scan_omega" => scan_omega = Some(parse_list(line, key, value)?),
                "scan_radii" => scan_radii = Some(parse_list(line, key, value)?),
                "charge_factors" => charge_factors = parse_list(line, key, value)?,
                "profile" => profile = Some(PathBuf::from(value)),
                "output_stem" => {
                    if value.contains(['/', '\\']) {
                        return Err(err(line, "output_stem must be a plain file name"));
                    }
                    output_stem = value.to_string()
                }
                _ => return Err(err(line, format!("unknown key '{key}'"))),
            }
        }

        let missing = |k: &str| err(0, format!("missing required key '{k}'"));
        let masses = raw.masses.ok_or_else(|| missing("masses"))?;
        let k = masses.len();
        let terms = raw
            .terms
            .into_iter()
            .map(|(line, v)| {
                if v.len() != k + 1 {
                    return Err(err(
                        line,
                        format!(
                            "term needs a coefficient and {k} exponents, got {} numbers",
                            v.len()
                        ),
                    ));
                }
                Ok(Term {
                    coefficient: v[0],
                    exponents: v[1..].to_vec(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let charges = match (
            raw.charges,
            raw.recipe_v,
            raw.recipe_omega,
            raw.recipe_radius,
        ) {
            (Some(c), None, None, None) => Some(ChargeSpec::Explicit(c)),
            (None, Some(v), Some(omega), Some(radius)) => {
                Some(ChargeSpec::Recipe(Recipe { v, omega, radius }))
            }
            (None, None, None, None) => None,
            (Some(_), ..) => {
                return Err(err(
                    0,
                    "give either 'charges' or the recipe_* keys, not both",
                ))
            }
            _ => {
                return Err(err(
                    0,
                    "recipe needs all of recipe_v, recipe_omega, recipe_radius",
                ))
            }
        };

        let cfg = RunConfig {
            dimension: raw.dimension.ok_or_else(|| missing("dimension"))?,
            r_max: raw.r_max.ok_or_else(|| missing("r_max"))?,
            nodes: raw.nodes.ok_or_else(|| missing("nodes"))?,
            masses,
            terms,
            charges,
            solver: cfg_solver,
            h1_box,
            h1_samples,
            h1_tolerance,
            scan_v,
            scan_omega,
            scan_radii,
            charge_factors,
            profile,
            output_stem,
        };
        cfg.check_lengths()?;
        Ok(cfg)
    }

    pub fn components(&self) -> usize {
        self.masses.len()
    }

    fn check_lengths(&self) -> Result<(), CliError> {
        let k = self.components();
        let mut lists: Vec<(&str, Option<&Vec<f64>>)> = vec![
            ("init_v", self.solver.init_v.as_ref()),
            ("init_amplitudes", self.solver.init_amplitudes.as_ref()),
            ("init_widths", self.solver.init_widths.as_ref()),
            ("scan_v", self.scan_v.as_ref()),
            ("scan_omega", self.scan_omega.as_ref()),
        ];
        match &self.charges {
            Some(ChargeSpec::Explicit(c)) => lists.push(("charges", Some(c))),
            Some(ChargeSpec::Recipe(r)) => {
                lists.push(("recipe_v", Some(&r.v)));
                lists.push(("recipe_omega", Some(&r.omega)));
            }
            None => {}
        }
        for (name, list) in lists {
            if let Some(l) = list {
                if l.len() != k {
                    return Err(err(
                        0,
                        format!("{name} has {} entries, expected {k}", l.len()),
                    ));
                }
            }
        }
        if self.scan_v.is_some() != self.scan_omega.is_some() {
            return Err(err(0, "scan_v and scan_omega must be given together"));
        }
        if let Some(ChargeSpec::Recipe(r)) = &self.charges {
            if r.radius + 1.0 >= self.r_max {
                return Err(err(
                    0,
                    format!(
                        "recipe_radius + 1 = {} must be below r_max = {}",
                        r.radius + 1.0,
                        self.r_max
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal configuration.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("dimension", self.dimension.to_string());
        kv("r_max", format!("{:?}", self.r_max));
        kv("nodes", self.nodes.to_string());
        kv("masses", list(&self.masses));
        for t in &self.terms {
            kv(
                "term",
                format!("{:?} {}", t.coefficient, list(&t.exponents)),
            );
        }
        match &self.charges {
            Some(ChargeSpec::Explicit(c)) => kv("charges", list(c)),
            Some(ChargeSpec::Recipe(r)) => {
                kv("recipe_v", list(&r.v));
                kv("recipe_omega", list(&r.omega));
                kv("recipe_radius", format!("{:?}", r.radius));
            }
            None => {}
        }
        let s = &self.solver;
        kv("max_iterations", s.max_iterations.to_string());
        kv("gradient_tolerance", format!("{:?}", s.gradient_tolerance));
        kv(
            "energy_stall_tolerance",
            format!("{:?}", s.energy_stall_tolerance),
        );
        kv("stall_window", s.stall_window.to_string());
        kv("initial_step", format!("{:?}", s.initial_step));
        kv("shrink", format!("{:?}", s.shrink));
        kv(
            "sufficient_decrease",
            format!("{:?}", s.sufficient_decrease),
        );
        kv("init", s.init.as_str().to_string());
        if let Some(v) = &s.init_v {
            kv("init_v", list(v));
        }
        if let Some(r) = s.init_radius {
            kv("init_radius", format!("{r:?}"));
        }
        if let Some(v) = &s.init_amplitudes {
            kv("init_amplitudes", list(v));
        }
        if let Some(v) = &s.init_widths {
            kv("init_widths", list(v));
        }
        if let Some(p) = &s.init_file {
            kv("init_file", p.display().to_string());
        }
        kv("seed", s.seed.to_string());
        kv(
            "preconditioner",
            match s.preconditioner {
                Preconditioner::Sobolev => "sobolev",
                Preconditioner::None => "none",
            }
            .to_string(),
        );
        kv("absolute_value", s.absolute_value.to_string());
        kv("h1_box", format!("{:?}", self.h1_box));
        kv("h1_samples", self.h1_samples.to_string());
        kv("h1_tolerance", format!("{:?}", self.h1_tolerance));
        if let Some(v) = &self.scan_v {
            kv("scan_v", list(v));
        }
        if let Some(v) = &self.scan_omega {
            kv("scan_omega", list(v));
        }
        if let Some(v) = &self.scan_radii {
            kv("scan_radii", list(v));
        }
        kv("charge_factors", list(&self.charge_factors));
        if let Some(p) = &self.profile {
            kv("profile", p.display().to_string());
        }
        kv("output_stem", self.output_stem.clone());
        out
    }
}
