use std::path::{Path, PathBuf};

use semilinear_core::conditions::{
    charge_from_profile, default_radii, hylomorphy_row, threshold_radius, ScanRow,
    VerificationReport,
};
use semilinear_core::functional::Residual;
use semilinear_core::potential::{H3Search, H3Witness};
use semilinear_core::rearrange::{rearrangement_report, RearrangeReport, RearrangeTolerances};
use semilinear_core::solver::{
    minimize, scan_charge, InitMode, SolveOptions, SolveResult, TerminationReason,
};
use semilinear_core::{
    ChargeVector, ConditionReport, Frequencies, GrowthData, Monomial, PotentialSpec, RadialGrid,
};
use serde::Serialize;

use crate::config::{ChargeSpec, InitKind, RunConfig};
use crate::output::{num, profile_csv, read_profile_csv, to_json, write_atomic, SCHEMA};
use crate::{CliError, EXIT_CHECK_FAILED, VERSION};

pub struct Context {
    pub cfg: RunConfig,
    /// Directory of the config file; relative input paths resolve against it.
    pub base: PathBuf,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn write(&self, suffix: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out.join(format!("{}{suffix}", self.cfg.output_stem));
        write_atomic(&path, contents)?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct Header<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: String,
}

impl<'a> Header<'a> {
    fn new(command: &'a str, cfg: &RunConfig) -> Self {
        Header {
            schema: SCHEMA,
            tool: "semilinear",
            version: VERSION,
            command,
            config: cfg.echo(),
        }
    }
}

pub fn build_grid(cfg: &RunConfig) -> Result<RadialGrid, CliError> {
    Ok(RadialGrid::new(cfg.dimension, cfg.r_max, cfg.nodes)?)
}

pub fn build_spec(cfg: &RunConfig) -> Result<PotentialSpec, CliError> {
    let terms = cfg
        .terms
        .iter()
        .map(|t| Monomial::new(t.coefficient, t.exponents.clone()))
        .collect();
    Ok(PotentialSpec::new(cfg.masses.clone(), terms)?)
}

pub fn build_charges(cfg: &RunConfig, grid: &RadialGrid) -> Result<ChargeVector, CliError> {
    match &cfg.charges {
        Some(ChargeSpec::Explicit(c)) => Ok(ChargeVector::new(c.clone())?),
        Some(ChargeSpec::Recipe(r)) => Ok(charge_from_profile(
            grid,
            &r.v,
            &Frequencies(r.omega.clone()),
            r.radius,
        )?),
        None => Err(CliError::Config {
            line: 0,
            message: "no charges: give 'charges' or the recipe_* keys".into(),
        }),
    }
}

fn require<T: Clone>(value: &Option<T>, key: &str, mode: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::Config {
        line: 0,
        message: format!("init = {mode} needs '{key}'"),
    })
}

pub fn build_options(ctx: &Context, grid: &RadialGrid) -> Result<SolveOptions, CliError> {
    let s = &ctx.cfg.solver;
    let init = match s.init {
        InitKind::Auto => InitMode::Auto,
        InitKind::TestProfile => InitMode::TestProfile {
            v: require(&s.init_v, "init_v", "test_profile")?,
            r: require(&s.init_radius, "init_radius", "test_profile")?,
        },
        InitKind::Gaussian => InitMode::Gaussian {
            amplitudes: require(&s.init_amplitudes, "init_amplitudes", "gaussian")?,
            widths: require(&s.init_widths, "init_widths", "gaussian")?,
        },
        InitKind::File => {
            let p = require(&s.init_file, "init_file", "file")?;
            InitMode::Values(read_profile_csv(
                &ctx.resolve(&p),
                grid,
                ctx.cfg.components(),
            )?)
        }
    };
    Ok(SolveOptions {
        max_iterations: s.max_iterations,
        gradient_tolerance: s.gradient_tolerance,
        energy_stall_tolerance: s.energy_stall_tolerance,
        stall_window: s.stall_window,
        initial_step: s.initial_step,
        shrink: s.shrink,
        sufficient_decrease: s.sufficient_decrease,
        init,
        seed: s.seed,
        preconditioner: s.preconditioner,
        absolute_value: s.absolute_value,
        ..SolveOptions::default()
    })
}

fn witness_search(cfg: &RunConfig) -> H3Search {
    H3Search {
        candidates: cfg.scan_v.iter().cloned().collect(),
        seed: cfg.solver.seed,
        ..H3Search::default()
    }
}

// ---------------------------------------------------------------- check

#[derive(Serialize)]
struct H2Out {
    growth: Option<GrowthData>,
    report: ConditionReport,
}

#[derive(Serialize)]
struct H3Out {
    configured: Option<ConditionReport>,
    witness: Option<H3Witness>,
    pass: bool,
}

#[derive(Serialize)]
struct CheckOut<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    h1: ConditionReport,
    h2: H2Out,
    h3: H3Out,
    all_pass: bool,
}

pub fn check(ctx: &Context) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let spec = build_spec(cfg)?;
    let h1 = spec.check_h1(cfg.h1_box, cfg.h1_samples, cfg.h1_tolerance)?;
    let (growth, h2) = spec.check_h2(cfg.dimension)?;
    let configured = match (&cfg.scan_v, &cfg.scan_omega) {
        (Some(v), Some(w)) => Some(spec.check_h3(v, w)?.1),
        _ => None,
    };
    let witness = spec.find_h3_witness(&witness_search(cfg));
    let h3_pass = configured.as_ref().is_some_and(|r| r.pass) || witness.is_some();
    let all_pass = h1.pass && h2.pass && h3_pass;

    let flag = |b: bool| if b { "pass" } else { "FAIL" };
    ctx.say(format!("{:<4} {:<6} {}", "cond", "result", "detail"));
    ctx.say(format!(
        "{:<4} {:<6} min sampled F = {:.6e}",
        "H1",
        flag(h1.pass),
        h1.margin
    ));
    let h2_detail = match &growth {
        Some(g) => format!("p = {}, q = {}, margin {:.3e}", g.p, g.q, h2.margin),
        None => h2.notes.join("; "),
    };
    ctx.say(format!("{:<4} {:<6} {}", "H2", flag(h2.pass), h2_detail));
    let h3_detail = match &witness {
        Some(w) => format!("witness v = {:?}, omega = {:?}", w.v, w.omega),
        None => "no witness found".to_string(),
    };
    ctx.say(format!("{:<4} {:<6} {}", "H3", flag(h3_pass), h3_detail));

    let report = CheckOut {
        header: Header::new("check", cfg),
        h1,
        h2: H2Out { growth, report: h2 },
        h3: H3Out {
            configured,
            witness,
            pass: h3_pass,
        },
        all_pass,
    };
    let path = ctx.write("_check.json", &to_json(&report)?)?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(if all_pass { 0 } else { EXIT_CHECK_FAILED })
}

// ---------------------------------------------------------------- solve

#[derive(Serialize)]
struct SolveOut<'a> {
    energy: f64,
    omega: &'a [f64],
    charges: &'a [f64],
    el_residuals: &'a [Residual],
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
    termination: &'a TerminationReason,
    verification: &'a VerificationReport,
    coercivity_violations: usize,
    init: &'a str,
}

impl<'a> From<&'a SolveResult> for SolveOut<'a> {
    fn from(r: &'a SolveResult) -> Self {
        SolveOut {
            energy: r.energy,
            omega: &r.omega.0,
            charges: &r.charges,
            el_residuals: &r.el_residuals,
            gradient_norm: r.gradient_norm,
            iterations: r.iterations,
            converged: r.converged,
            termination: &r.termination,
            verification: &r.verification,
            coercivity_violations: r.coercivity_violations,
            init: &r.init,
        }
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    #[serde(flatten)]
    result: SolveOut<'a>,
    profile_csv: String,
}

fn summary(r: &SolveResult) -> String {
    let margin: Vec<String> = r
        .verification
        .hylomorphy_margins
        .iter()
        .map(|m| format!("{m:.4e}"))
        .collect();
    format!(
        "{} after {} iterations: E = {:.10e}, omega = {:?}, 2E - mC = [{}], all checks {}",
        r.termination.label(),
        r.iterations,
        r.energy,
        r.omega.0,
        margin.join(", "),
        if r.verification.all_pass() {
            "pass"
        } else {
            "do not pass"
        }
    )
}

pub fn solve(ctx: &Context) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let grid = build_grid(cfg)?;
    let spec = build_spec(cfg)?;
    let c = build_charges(cfg, &grid)?;
    let opts = build_options(ctx, &grid)?;
    let res = minimize(&grid, &spec, &c, &opts)?;
    ctx.say(summary(&res));

    let csv_name = format!("{}_profile.csv", cfg.output_stem);
    let csv = ctx.write("_profile.csv", &profile_csv(&grid, &res.fields))?;
    let report = SolveReport {
        header: Header::new("solve", cfg),
        result: SolveOut::from(&res),
        profile_csv: csv_name,
    };
    let json = ctx.write(".json", &to_json(&report)?)?;
    ctx.say(format!("wrote {} and {}", json.display(), csv.display()));
    Ok(0)
}

// ---------------------------------------------------------------- scan

#[derive(Serialize)]
struct ScanEntry<'a> {
    factor: f64,
    charges: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<SolveOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ScanReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    rows: Vec<ScanEntry<'a>>,
}

pub fn scan(ctx: &Context) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let grid = build_grid(cfg)?;
    let spec = build_spec(cfg)?;
    let base = build_charges(cfg, &grid)?;
    let opts = build_options(ctx, &grid)?;
    let charges = cfg
        .charge_factors
        .iter()
        .map(|f| ChargeVector::new(base.as_slice().iter().map(|c| c * f).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let results = scan_charge(&grid, &spec, &charges, &opts)?;

    let k = cfg.components();
    let mut csv = String::from("factor");
    for i in 1..=k {
        csv.push_str(&format!(",C_{i}"));
    }
    csv.push_str(",E");
    for i in 1..=k {
        csv.push_str(&format!(",omega_{i}"));
    }
    for i in 1..=k {
        csv.push_str(&format!(",margin_{i}"));
    }
    csv.push_str(",converged,termination\n");

    let mut rows = Vec::new();
    for ((f, c), res) in cfg.charge_factors.iter().zip(&charges).zip(&results) {
        csv.push_str(&num(*f));
        for x in c.as_slice() {
            csv.push_str(&format!(",{}", num(*x)));
        }
        match res {
            Ok(r) => {
                ctx.say(format!("factor {f:.4}: {}", summary(r)));
                csv.push_str(&format!(",{}", num(r.energy)));
                for x in r.omega.0.iter().chain(&r.verification.hylomorphy_margins) {
                    csv.push_str(&format!(",{}", num(*x)));
                }
                csv.push_str(&format!(",{},{}\n", r.converged, r.termination.label()));
                rows.push(ScanEntry {
                    factor: *f,
                    charges: c.as_slice().to_vec(),
                    result: Some(SolveOut::from(r)),
                    error: None,
                });
            }
            Err(e) => {
                ctx.say(format!("factor {f:.4}: error: {e}"));
                csv.push_str(&",".repeat(1 + 2 * k));
                csv.push_str(",false,error\n");
                rows.push(ScanEntry {
                    factor: *f,
                    charges: c.as_slice().to_vec(),
                    result: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let csv_path = ctx.write("_scan.csv", &csv)?;
    let report = ScanReport {
        header: Header::new("scan", cfg),
        rows,
    };
    let json = ctx.write("_scan.json", &to_json(&report)?)?;
    ctx.say(format!(
        "wrote {} and {}",
        json.display(),
        csv_path.display()
    ));
    Ok(0)
}

// ---------------------------------------------------------------- hylomorphy

#[derive(Serialize)]
struct RowOut {
    r: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    row: Option<ScanRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct HylomorphyReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    v: Option<Vec<f64>>,
    omega: Option<Vec<f64>>,
    source: &'static str,
    rows: Vec<RowOut>,
    threshold_radius: Option<f64>,
    summary: String,
}

pub fn hylomorphy(ctx: &Context) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let grid = build_grid(cfg)?;
    let spec = build_spec(cfg)?;
    let (pair, source) = match (&cfg.scan_v, &cfg.scan_omega) {
        (Some(v), Some(w)) => (Some((v.clone(), w.clone())), "config"),
        _ => (
            spec.find_h3_witness(&witness_search(cfg))
                .map(|w| (w.v, w.omega)),
            "witness search",
        ),
    };
    let mut radii = cfg
        .scan_radii
        .clone()
        .unwrap_or_else(|| default_radii(cfg.r_max));
    radii.sort_by(f64::total_cmp);

    let k = cfg.components();
    let mut csv = String::from("r");
    for i in 1..=k {
        csv.push_str(&format!(",C_{i}"));
    }
    csv.push_str(",E,E_normalized");
    for i in 1..=k {
        csv.push_str(&format!(",margin_{i}"));
    }
    csv.push('\n');

    let mut rows = Vec::new();
    if let Some((v, w)) = &pair {
        let omega = Frequencies(w.clone());
        for &r in &radii {
            csv.push_str(&num(r));
            match hylomorphy_row(&grid, &spec, v, &omega, r) {
                Ok(row) => {
                    let vals = row
                        .charges
                        .iter()
                        .chain([&row.energy, &row.normalized_energy])
                        .chain(&row.margins);
                    for x in vals {
                        csv.push_str(&format!(",{}", num(*x)));
                    }
                    rows.push(RowOut {
                        r,
                        row: Some(row),
                        error: None,
                    });
                }
                Err(e) => {
                    csv.push_str(&",".repeat(2 + 2 * k));
                    ctx.say(format!("r = {r}: {e}"));
                    rows.push(RowOut {
                        r,
                        row: None,
                        error: Some(e.to_string()),
                    });
                }
            }
            csv.push('\n');
        }
    }
    let ok: Vec<ScanRow> = rows.iter().filter_map(|r| r.row.clone()).collect();
    let threshold = threshold_radius(&ok);
    let summary = match (&pair, threshold) {
        (None, _) => "no H3 witness; no admissible r found".to_string(),
        (Some(_), None) => "no admissible r found".to_string(),
        (Some(_), Some(r)) => format!("all margins negative for scanned r >= {r}"),
    };
    ctx.say(&summary);

    let csv_path = ctx.write("_hylomorphy.csv", &csv)?;
    let report = HylomorphyReport {
        header: Header::new("hylomorphy", cfg),
        v: pair.as_ref().map(|p| p.0.clone()),
        omega: pair.as_ref().map(|p| p.1.clone()),
        source,
        rows,
        threshold_radius: threshold,
        summary,
    };
    let json = ctx.write("_hylomorphy.json", &to_json(&report)?)?;
    ctx.say(format!(
        "wrote {} and {}",
        json.display(),
        csv_path.display()
    ));
    Ok(0)
}

// ---------------------------------------------------------------- rearrange

#[derive(Serialize)]
struct RearrangeOut<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    input: String,
    report: RearrangeReport,
}

pub fn rearrange(ctx: &Context) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let grid = build_grid(cfg)?;
    let spec = build_spec(cfg)?;
    let input = cfg.profile.as_ref().ok_or_else(|| CliError::Config {
        line: 0,
        message: "rearrange needs 'profile'".into(),
    })?;
    let u = read_profile_csv(&ctx.resolve(input), &grid, cfg.components())?;
    let (star, report) = rearrangement_report(&grid, &spec, &u, RearrangeTolerances::default())?;
    for (i, (l2, d)) in report.l2.iter().zip(&report.dirichlet).enumerate() {
        ctx.say(format!(
            "u_{}: L2 {:.6e} -> {:.6e}, Dirichlet {:.6e} -> {:.6e}",
            i + 1,
            l2.before,
            l2.after,
            d.before,
            d.after
        ));
    }
    for t in &report.coupling {
        ctx.say(format!(
            "term {} {:?}: {:.6e} -> {:.6e} {}",
            t.term,
            t.exponents,
            t.integral.before,
            t.integral.after,
            if t.pass { "ok" } else { "DECREASED" }
        ));
    }
    ctx.say(format!(
        "all properties {}",
        if report.pass { "hold" } else { "do not hold" }
    ));

    let csv = ctx.write("_rearranged.csv", &profile_csv(&grid, &star))?;
    let out = RearrangeOut {
        header: Header::new("rearrange", cfg),
        input: input.display().to_string(),
        report,
    };
    let json = ctx.write("_rearrange.json", &to_json(&out)?)?;
    ctx.say(format!("wrote {} and {}", json.display(), csv.display()));
    Ok(0)
}
