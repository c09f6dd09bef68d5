use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hivdde::dde::{DdeError, SolverConfig};
use hivdde::equilibria::{
    classify_roots, disease_free, g_curve, i_star_limit, s_star_limits, solve_endemic, sweep_table, sweep_tau,
    RootCase, WeightRegime,
};
use hivdde::estimation::{
    builtin_uganda, fit_grid, fit_summary_table, load_dataset, overlay_table, Dataset, EstimationError, FitProblem,
    FitResult, FreeParams, NmConfig,
};
use hivdde::model::{
    parse_param_file, simulate as run_full, simulate_si, write_param_file, FittedRow, FixedParams, ModelParams, State,
    UGANDA_FIXED,
};
use hivdde::stability::{
    dfe_stability, eigenvalues_5x5, endemic_stable_u0, jacobian_u0, persistence_bounds, SpectrumReport,
};
use hivdde::table::{Format, Table};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{AnalyzeArgs, Common, FitArgs, OutputFormat, SiArgs, SimulateArgs, SweepArgs};
use crate::CliError;

const STATE_NAMES: [&str; 6] = ["S0", "S1", "S2", "Z", "I", "R"];

fn config(msg: impl ToString) -> CliError {
    CliError::Config(msg.to_string())
}

fn solver(e: DdeError) -> CliError {
    CliError::Solver(e.to_string())
}

fn estimation(e: EstimationError) -> CliError {
    match e {
        EstimationError::Solver(e) => solver(e),
        EstimationError::Dataset(e) => CliError::Data(e.to_string()),
        EstimationError::Optimizer(e) => CliError::Optimizer(e.to_string()),
        e @ EstimationError::NonpositiveParameter(_) => config(e),
    }
}

impl Common {
    /// Built-in fit row, then the parameter file, then `--set` and `--delay`.
    fn resolve_params(&self) -> Result<ModelParams, CliError> {
        let row = FittedRow::for_delay(self.fit_row)
            .ok_or_else(|| config(format!("no published fit row for u = {}", self.fit_row)))?;
        let mut p = ModelParams::uganda(row);
        if let Some(path) = &self.params {
            let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            p = parse_param_file(&text, p).map_err(|e| config(format!("{}: {e}", path.display())))?;
        }
        let mut lines = String::new();
        for kv in &self.overrides {
            if !kv.contains('=') {
                return Err(config(format!("--set expects KEY=VALUE, got `{kv}`")));
            }
            writeln!(lines, "{kv}").expect("write to String");
        }
        if let Some(u) = self.delay {
            writeln!(lines, "u = {u}").expect("write to String");
        }
        parse_param_file(&lines, p).map_err(|e| config(format!("--set/--delay: {e}")))
    }

    fn solver(&self, default: SolverConfig) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            rel_tol: self.rtol.unwrap_or(default.rel_tol),
            abs_tol: self.atol.unwrap_or(default.abs_tol),
            ..default
        };
        cfg.validate().map_err(config)?;
        Ok(cfg)
    }

    fn format(&self) -> Format {
        match self.format {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::JsonLines => Format::JsonLines,
        }
    }

    fn init_pool(&self) -> Result<(), CliError> {
        if let Some(n) = self.jobs {
            if n == 0 {
                return Err(config("--jobs must be >= 1"));
            }
            // A pool already built in this process is fine to keep.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(())
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| config(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn write_table(&self, stem: &str, table: &Table) -> Result<PathBuf, CliError> {
        let format = self.format();
        let path = self.out_dir()?.join(format!("{stem}.{}", format.extension()));
        let file = fs::File::create(&path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        table
            .write(std::io::BufWriter::new(file), format)
            .map_err(|e| config(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir()?.join(name);
        fs::write(&path, text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| config(format!("{what}: cannot parse `{x}`"))))
        .collect()
}

fn parse_array<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let v = parse_list(s, what)?;
    v.try_into()
        .map_err(|v: Vec<f64>| config(format!("{what}: expected {N} values, got {}", v.len())))
}

/// `t0:t1:dt` into sample times, always ending exactly at `t1`.
pub fn parse_tspan(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [t0, t1, dt] = parts[..] else {
        return Err(config(format!("--tspan expects t0:t1:dt, got `{s}`")));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| config(format!("--tspan: cannot parse `{x}`")));
    let (t0, t1, dt) = (num(t0)?, num(t1)?, num(dt)?);
    if !(t1 > t0 && dt > 0.0 && t0.is_finite() && t1.is_finite()) {
        return Err(config("--tspan needs t1 > t0 and dt > 0"));
    }
    let n = ((t1 - t0) / dt * (1.0 + 1e-12)).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).filter(|&t| t < t1).collect();
    ts.push(t1);
    Ok(ts)
}

/// `lo:hi:n,log|lin`.
pub fn parse_grid(s: &str, default_log: bool) -> Result<Vec<f64>, CliError> {
    let (range, kind) = match s.split_once(',') {
        Some((r, k)) => (r, k.trim()),
        None => (s, if default_log { "log" } else { "lin" }),
    };
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(config(format!("grid expects lo:hi:n, got `{s}`")));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| config(format!("grid: bad lower bound `{lo}`")))?;
    let hi: f64 = hi.trim().parse().map_err(|_| config(format!("grid: bad upper bound `{hi}`")))?;
    let n: usize = n.trim().parse().map_err(|_| config(format!("grid: bad count `{n}`")))?;
    if !(hi >= lo && n >= 1 && lo.is_finite() && hi.is_finite()) {
        return Err(config("grid needs lo <= hi and n >= 1"));
    }
    let frac = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
    match kind {
        "lin" => Ok((0..n).map(|k| lo + (hi - lo) * frac(k)).collect()),
        "log" if lo > 0.0 => Ok((0..n).map(|k| lo * (hi / lo).powf(frac(k))).collect()),
        "log" => Err(config("log grid needs lo > 0")),
        other => Err(config(format!("grid spacing must be log or lin, got `{other}`"))),
    }
}

fn initial_state(x0: Option<&str>) -> Result<State, CliError> {
    match x0 {
        None => Ok(State::uganda_1992()),
        Some(s) => {
            let v = parse_array::<6>(s, "--x0")?;
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(config("--x0 components must be finite and >= 0"));
            }
            Ok(State::from_full(&v))
        }
    }
}

fn load_data(spec: &str) -> Result<Dataset, CliError> {
    if spec == "builtin" {
        return Ok(builtin_uganda());
    }
    load_dataset(Path::new(spec)).map_err(|e| CliError::Data(format!("{spec}: {e}")))
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let c = &a.common;
    let p = c.resolve_params()?;
    let cfg = c.solver(SolverConfig::default())?;
    let ts = parse_tspan(&a.tspan)?;
    let x0 = initial_state(a.x0.as_deref())?;
    let data = a.data.as_deref().map(load_data).transpose()?;
    let traj = run_full(&p, &x0, (ts[0], *ts.last().expect("nonempty")), &cfg).map_err(solver)?;
    c.write_table("trajectory", &traj.to_table(&ts, &STATE_NAMES).map_err(solver)?)?;
    if let Some(ds) = data {
        c.write_table("overlay", &overlay_table(&traj, &ds).map_err(estimation)?)?;
    }
    Ok(())
}

pub fn si(a: &SiArgs) -> Result<(), CliError> {
    let c = &a.common;
    let p = c.resolve_params()?;
    let cfg = c.solver(SolverConfig::default())?;
    let ts = parse_tspan(&a.tspan)?;
    let [s0, i0] = parse_array::<2>(&a.x0, "--x0")?;
    if !(s0 >= 0.0 && i0 >= 0.0) {
        return Err(config("--x0 components must be >= 0"));
    }
    let traj = simulate_si(&p, s0, i0, (ts[0], *ts.last().expect("nonempty")), &cfg).map_err(solver)?;
    c.write_table("si", &traj.to_table(&ts, &["S0", "I"]).map_err(solver)?)?;
    Ok(())
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let c = &a.common;
    c.init_pool()?;
    let p = c.resolve_params()?;
    let ds = load_data(&a.data)?;
    let delays = match &a.delays {
        Some(s) => parse_list(s, "--delays")?,
        None => vec![p.u],
    };
    if delays.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
        return Err(config("delays must be finite and >= 0"));
    }
    let guess = FreeParams::from_array(parse_array::<4>(&a.guess, "--guess")?);
    let fixed = FixedParams {
        b: p.b,
        mu: p.mu,
        d: p.d,
        gamma1: p.gamma1,
        gamma2: p.gamma2,
        ..UGANDA_FIXED
    };
    let base = FitProblem::uganda(p.u);
    let problem = FitProblem {
        fixed,
        initial: initial_state(a.x0.as_deref())?,
        solver: c.solver(base.solver)?,
        ..base
    };
    let nm = NmConfig {
        max_iter: a.max_iter,
        ..NmConfig::default()
    };
    let results: Vec<FitResult> = fit_grid(&problem, &ds, &delays, &guess, &nm)
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(estimation)?;

    for r in &results {
        let stem = format!("u{}", r.u);
        c.write_table(&format!("trace_{stem}"), &r.trace_table())?;
        c.write_text(&format!("fit_{stem}.params"), &write_param_file(&problem.with_delay(r.u).params(&r.params)))?;
        println!(
            "u = {}: beta0 = {:.6}, eta = {:.6}, gamma0 = {:.6}, q = {:.6}, tau = {:.6}, sse = {:.6}, iterations = {}{}",
            r.u,
            r.params.beta0,
            r.params.eta,
            r.params.gamma0,
            r.params.q,
            r.tau(),
            r.sse,
            r.iterations,
            if r.converged { "" } else { " (not converged)" }
        );
    }
    c.write_table("fit_summary", &fit_summary_table(&results))?;
    let json = serde_json::to_string_pretty(&results).map_err(config)?;
    c.write_text("fit.json", &json)?;
    let stalled: Vec<f64> = results.iter().filter(|r| !r.converged).map(|r| r.u).collect();
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(CliError::Optimizer(format!(
            "no convergence within {} iterations for u = {stalled:?}",
            a.max_iter
        )))
    }
}

fn fmt_state(s: &State) -> String {
    format!("({:.4}, {:.4}, {:.4}, {:.4}, {:.4})", s.s0, s.s1, s.s2, s.z, s.i)
}

fn spectrum_lines(out: &mut String, report: &SpectrumReport) {
    for z in &report.eigenvalues {
        writeln!(out, "    {:+.6e} {:+.6e}i", z.re, z.im).expect("write to String");
    }
    writeln!(out, "  max real part {:.6e}: {}", report.max_real_part, if report.stable { "stable" } else { "unstable" })
        .expect("write to String");
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let c = &a.common;
    let p = c.resolve_params()?;
    let dq = p.derived();
    let e0 = disease_free(&p);
    let roots = classify_roots(&p).map_err(config)?;
    let endemic = solve_endemic(&p).map_err(config)?;
    let dfe = dfe_stability(&p);
    let p0 = p.with_delay(0.0);
    let spectrum = if endemic.is_some() {
        endemic_stable_u0(&p0).map_err(config)?
    } else {
        eigenvalues_5x5(&jacobian_u0(&e0.state, &p0)).map_err(config)?
    };
    let bounds = persistence_bounds(&p).ok();
    let regime = WeightRegime::of(&p);
    let limits = s_star_limits(&p).ok();
    let i_inf = i_star_limit(&p).ok();

    let label = if p.beta_max() <= dq.d0 {
        "disease-free globally attracting: max(beta0, beta1, beta2) <= D0"
    } else if p.beta0 > dq.d0 {
        "endemic: beta0 > D0, the infection persists"
    } else {
        match roots.case {
            RootCase::TwoRoots => "bistable: beta0 < D0 with two endemic roots",
            RootCase::BoundaryUnique => "threshold: tangent or boundary root",
            _ => "subthreshold: beta0 <= D0, no endemic equilibrium",
        }
    };
    let regime_label = match regime {
        WeightRegime::BelowD0 => "relative infection weight below D0: I* -> 0 as tau -> inf, tau I* bounded",
        WeightRegime::EqualD0 => "relative infection weight equal to D0: I* -> 0 as tau -> inf",
        WeightRegime::AboveD0 => "relative infection weight above D0: I* -> I_inf > 0 as tau -> inf",
    };

    let mut out = String::new();
    let w = &mut out;
    macro_rules! line {
        ($($t:tt)*) => { writeln!(w, $($t)*).expect("write to String") };
    }
    line!("case: {label}");
    line!("D0 = {:.4} ({:e})", dq.d0, dq.d0);
    line!("R0 = {:.4}", dq.r0);
    line!("tau = q/eta = {:.4}", dq.tau);
    line!("relative infection weight = {:.6}", dq.rel_weight);
    line!("E0 = {}", fmt_state(&e0.state));
    line!("roots of G(I) = mu + d: {:?}", roots.case);
    for (r, s) in roots.roots.iter().zip(&roots.slopes) {
        line!("  I = {r:.6}, dG/dI = {s:+.6e}");
    }
    if let Some(i) = roots.i_max {
        line!("  I_max = {i:.6}");
    }
    match &endemic {
        Some(e) => line!("E* = {}", fmt_state(&e.state)),
        None => line!("E* = none"),
    }
    line!("DFE: {:?}", dfe.verdict);
    line!("u = 0 spectrum at {}:", if endemic.is_some() { "E*" } else { "E0" });
    spectrum_lines(w, &spectrum);
    match bounds {
        Some(b) => line!("persistence bounds: ({:.4}, {:.4})", b.weak_lower, b.upper),
        None => line!("persistence bounds: not applicable"),
    }
    line!("large-tau regime: {regime_label}");
    if let Some(i) = i_inf {
        line!("  I_inf = {i:.6}");
    }
    print!("{out}");
    c.write_text("report.txt", &out)?;

    let report = json!({
        "case": label,
        "params": p,
        "derived": dq,
        "disease_free": e0,
        "roots": roots,
        "endemic": endemic,
        "dfe": dfe,
        "spectrum_u0": spectrum,
        "persistence_bounds": bounds,
        "weight_regime": regime,
        "tau_limits": limits,
    });
    c.write_text("report.json", &serde_json::to_string_pretty(&report).map_err(config)?)?;
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let c = &a.common;
    c.init_pool()?;
    let p = c.resolve_params()?;

    let curve = g_curve(&p, p.b / (p.mu + p.d), a.g_points);
    let g = curve.column("G").expect("G column");
    let target = p.mu + p.d;
    let crossings = g.windows(2).filter(|w| (w[0] - target).signum() != (w[1] - target).signum()).count();
    c.write_table("g_curve", &curve)?;
    println!("G crosses mu + d {crossings} time(s) on the sampled grid");

    if p.beta0 > p.d0() {
        let taus = parse_grid(&a.tau_grid, true)?;
        let rows = sweep_tau(&p, &taus).map_err(config)?;
        c.write_table("tau_sweep", &sweep_table(&rows))?;
    } else {
        println!("tau sweep skipped: beta0 <= D0");
    }

    if let Some(spec) = &a.beta0_scan {
        let grid = parse_grid(spec, false)?;
        let d0 = p.d0();
        let base = p.with_delay(0.0);
        let samples: Vec<(f64, f64)> = grid
            .par_iter()
            .filter(|&&b| b > d0)
            .map(|&beta0| {
                endemic_stable_u0(&ModelParams { beta0, ..base })
                    .map(|r| (beta0, r.max_real_part))
                    .map_err(config)
            })
            .collect::<Result<_, _>>()?;
        let mut table = Table::new(["beta0", "max_real_part", "stable"]);
        for &(b, m) in &samples {
            table
                .push(vec![b, m, if m < 0.0 { 1.0 } else { 0.0 }])
                .expect("three columns");
        }
        c.write_table("beta0_scan", &table)?;
        match samples.iter().find(|s| s.1 >= 0.0) {
            Some((b, _)) => println!("first unstable beta0 = {b:.6e}"),
            None => println!(
                "no unstable beta0 found up to the scan cap {:.6e}",
                grid.last().copied().unwrap_or(f64::NAN)
            ),
        }
    }
    Ok(())
}
