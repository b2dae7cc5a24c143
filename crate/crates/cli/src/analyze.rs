use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context as _;
use clap::{Args, Subcommand, ValueEnum};
use groth_core::en_analysis::{en_integral, en_monte_carlo, ratio_curve, v_n};
use groth_core::matrix::random_gram;
use groth_core::rng::derive_seed;
use groth_core::special::{c_m, c_m_quadrature, gamma_n, DEFAULT_INNER_ORDER};
use groth_core::{hardness_reduction_check, positive_type_expand, round_rank_n, solve_sdp_relaxation, SolverConfig};
use serde::Serialize;
use serde_json::json;

use crate::commands::config;
use crate::report::{AnalysisReport, Status};
use crate::Context;

/// Points at which `analyze en` cross-checks the quadrature by Monte Carlo.
const CROSS_CHECK_T: [f64; 5] = [-0.9, -0.5, 0.0, 0.4, 0.8];

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// γ(n) and c(n) = 1/γ(n) for n = 1..n_max.
    Gamma(GammaArgs),
    /// c(m) from the Γ closed form against the quadrature ratio.
    Cm(CmArgs),
    /// E_n(t) and (1 − E_n(t))/(1 − t) on a grid, with a Monte Carlo check.
    En(EnArgs),
    /// v(n) and its minimizer.
    Vn(VnArgs),
    /// Jacobi coefficients of a kernel on S^{m−1}.
    Postype(PostypeArgs),
    /// Reduction inequality for a rounded solution of a random instance.
    Reduction(ReductionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GammaArgs {
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CmArgs {
    #[arg(long, default_value_t = 50)]
    pub m_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EnArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Write the curve as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Monte Carlo samples per cross-check point.
    #[arg(long, default_value_t = 1_000_000)]
    pub mc: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct VnArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// arcsin t − t/γ(m)
    Arcsin,
    /// E_n(t) for n = --en-n
    En,
}

#[derive(Debug, Args, Serialize)]
pub struct PostypeArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 30)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Kernel::Arcsin)]
    pub kernel: Kernel,
    #[arg(long, default_value_t = 3)]
    pub en_n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ReductionArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Rank of the random gram instance (default m).
    #[arg(long)]
    pub r: Option<usize>,
}

pub fn run(ctx: &Context, cmd: &AnalyzeCommand) -> anyhow::Result<Status> {
    match cmd {
        AnalyzeCommand::Gamma(a) => gamma(ctx, a),
        AnalyzeCommand::Cm(a) => cm(ctx, a),
        AnalyzeCommand::En(a) => en(ctx, a),
        AnalyzeCommand::Vn(a) => vn(ctx, a),
        AnalyzeCommand::Postype(a) => postype(ctx, a),
        AnalyzeCommand::Reduction(a) => reduction(ctx, a),
    }
}

fn gamma(ctx: &Context, args: &GammaArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze gamma", config(ctx, args));
    let rows = report.timed("compute", || {
        (1..=args.n_max)
            .map(|n| {
                let g = gamma_n(n)?;
                eprintln!("γ({n}) = {g:.12}");
                Ok(json!({ "n": n, "gamma": g, "c": 1.0 / g }))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    report.results = json!({ "table": rows });
    report.emit()?;
    Ok(Status::Ok)
}

fn cm(ctx: &Context, args: &CmArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze cm", config(ctx, args));
    let rows = report.timed("compute", || {
        (2..=args.m_max)
            .map(|m| {
                let closed = c_m(m)?;
                let quad = c_m_quadrature(m, DEFAULT_INNER_ORDER)?;
                Ok((m, closed, quad))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let max_diff = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max);
    let passed = max_diff <= ctx.tol.tol_quad;
    report.results = json!({
        "table": rows.iter().map(|&(m, c, q)| json!({ "m": m, "closed_form": c, "quadrature": q })).collect::<Vec<_>>(),
        "max_abs_diff": max_diff,
        "passed": passed,
    });
    eprintln!("c(m), m = 2..{}: max |closed − quadrature| = {max_diff:.2e}", args.m_max);
    report.emit()?;
    Ok(Status::gate(passed))
}

fn en(ctx: &Context, args: &EnArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze en", config(ctx, args));
    let curve = report.timed("curve", || ratio_curve(args.n, args.grid))?;
    if let Some(path) = &args.csv {
        let write = || -> std::io::Result<()> {
            let mut w = BufWriter::new(fs::File::create(path)?);
            writeln!(w, "t,en_value,ratio")?;
            for p in &curve {
                let ratio = p.ratio.map(|r| format!("{r:e}")).unwrap_or_default();
                writeln!(w, "{:e},{:e},{ratio}", p.t, p.en_value)?;
            }
            w.flush()
        };
        write().with_context(|| format!("writing {}", path.display()))?;
    }

    let checks = report.timed("monte_carlo", || {
        CROSS_CHECK_T
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let q = en_integral(args.n, t)?;
                let mc = en_monte_carlo(args.n, t, args.mc, derive_seed(ctx.seed, i as u64))?;
                let ok = (q - mc.mean).abs() <= ctx.tol.tol_sigma * mc.stderr;
                Ok(json!({ "t": t, "quadrature": q, "mc_mean": mc.mean, "mc_stderr": mc.stderr, "agrees": ok }))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let passed = checks.iter().all(|c| c["agrees"] == true);
    let min_ratio = curve.iter().filter_map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let max_abs = curve.iter().map(|p| p.en_value.abs()).fold(0.0, f64::max);

    report.results = json!({
        "curve": curve,
        "min_grid_ratio": min_ratio,
        "max_abs_en": max_abs,
        "cross_check": checks,
        "passed": passed,
    });
    eprintln!(
        "E_{} on {} points: min ratio {min_ratio:.6}, Monte Carlo cross-check {}",
        args.n,
        args.grid,
        if passed { "pass" } else { "FAIL" }
    );
    report.emit()?;
    Ok(Status::gate(passed))
}

fn vn(ctx: &Context, args: &VnArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze vn", config(ctx, args));
    let v = report.timed("minimize", || v_n(args.n))?;
    report.results = serde_json::to_value(&v)?;
    eprintln!("v({}) = {:.6} at t = {:.6}", args.n, v.value, v.minimizer);
    if let Some(p) = &v.second_local_min {
        eprintln!("note: second local minimum {:.6} at t = {:.6}", p.ratio.unwrap_or(f64::NAN), p.t);
    }
    report.emit()?;
    Ok(Status::Ok)
}

fn postype(ctx: &Context, args: &PostypeArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze postype", config(ctx, args));
    let e = report.timed("expand", || match args.kernel {
        Kernel::Arcsin => {
            let c = c_m(args.m)?;
            positive_type_expand(|t: f64| t.asin() - c * t, args.m, args.degree)
        }
        Kernel::En => {
            en_integral(args.en_n, 0.0)?;
            positive_type_expand(|t| en_integral(args.en_n, t).unwrap_or(f64::NAN), args.m, args.degree)
        }
    })?;
    let min = e.min_coefficient();
    let passed = e.is_positive_type(ctx.tol.tol_coef);
    report.results = json!({
        "expansion": e,
        "min_coefficient": min,
        "passed": passed,
    });
    eprintln!(
        "{:?} kernel on S^{}: {} coefficients, min {min:.3e}, residual {:.3e}: {}",
        args.kernel,
        args.m - 1,
        args.degree + 1,
        e.residual,
        if passed { "positive type" } else { "NEGATIVE coefficient" }
    );
    report.emit()?;
    Ok(Status::gate(passed))
}

fn reduction(ctx: &Context, args: &ReductionArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("analyze reduction", config(ctx, args));
    let a = random_gram(args.m, args.r.unwrap_or(args.m), ctx.seed)?;
    report.inputs = json!({ "digest": a.digest(), "m": a.order() });
    let cfg = SolverConfig { seed: ctx.seed, tol: ctx.tol.tol_solver, psd_tol: ctx.tol.tol_psd, ..Default::default() };
    let g = report.timed("solve", || solve_sdp_relaxation(&a, &cfg))?;
    let s = report.timed("round", || round_rank_n(&a, &g, args.n, ctx.seed))?;
    let rep = report.timed("check", || hardness_reduction_check(&a, &s))?;
    let passed = rep.passed();
    report.results = json!({
        "relaxation_objective": g.objective,
        "rounded_objective": s.objective,
        "reduction": rep,
        "passed": passed,
    });
    eprintln!(
        "reduction n = {}, m = {}: lhs {:.8} rhs {:.8} margin {:.3e}, λ_min {:.3e}: {}",
        args.n,
        args.m,
        rep.lhs,
        rep.rhs,
        rep.margin,
        rep.min_eig,
        if passed { "pass" } else { "FAIL" }
    );
    report.emit()?;
    Ok(Status::gate(passed))
}
