use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context as _};
use groth_core::matrix::{
    laplacian, load_edge_list, load_matrix, random_gram, save_matrix, validate_psd, MatrixFormat, PsdMatrix,
    WeightedGraph,
};
use groth_core::rng::derive_seed;
use groth_core::{
    best_of_rounds, expected_ratio_estimate, gamma_n, solve_sdp_relaxation, GramSolution, SolverConfig, VectorSet,
};
use serde::Serialize;
use serde_json::json;

use crate::report::{AnalysisReport, Status};
use crate::{Context, GenArgs, Kind, MatrixArgs, RoundArgs, SolveArgs, SolverArgs};

/// Stream index reserved for the Monte Carlo ratio estimate, so it does not
/// reuse the best-of-R roundings.
const MC_STREAM: u64 = u64::MAX;

pub fn config(ctx: &Context, args: &impl Serialize) -> serde_json::Value {
    json!({ "seed": ctx.seed, "tolerances": ctx.tol, "args": args })
}

fn parse_format(format: &Option<String>) -> anyhow::Result<Option<MatrixFormat>> {
    format.as_deref().map(str::parse).transpose().map_err(Into::into)
}

pub fn gen(ctx: &Context, args: &GenArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("gen", config(ctx, args));
    let a = report.timed("generate", || -> anyhow::Result<PsdMatrix> {
        Ok(match args.kind {
            Kind::Ones => PsdMatrix::ones(args.m)?,
            Kind::Identity => PsdMatrix::identity(args.m)?,
            Kind::Gram => random_gram(args.m, args.r.unwrap_or(args.m), ctx.seed)?,
            Kind::Laplacian => {
                let g = match &args.edges {
                    Some(path) => load_edge_list(path, Some(args.m))
                        .with_context(|| format!("reading edge list {}", path.display()))?,
                    None => WeightedGraph::cycle(args.m)?,
                };
                laplacian(&g)
            }
        })
    })?;
    save_matrix(&a, &args.out, parse_format(&args.format)?)
        .with_context(|| format!("writing {}", args.out.display()))?;

    report.inputs = json!({ "digest": a.digest(), "m": a.order() });
    report.results = json!({ "path": args.out, "digest": a.digest(), "scale": a.scale() });
    eprintln!("wrote {:?} matrix, m = {}, to {}", args.kind, a.order(), args.out.display());
    eprintln!("digest {}", a.digest());
    report.emit()?;
    Ok(Status::Ok)
}

/// Loads and certifies the input. Returns `None` after emitting the report
/// if certification fails.
fn load_certified(
    ctx: &Context,
    input: &MatrixArgs,
    report: &mut AnalysisReport,
) -> anyhow::Result<Option<PsdMatrix>> {
    let a = report
        .timed("load", || load_matrix(&input.matrix, parse_format(&input.format)?).map_err(anyhow::Error::from))
        .with_context(|| format!("loading {}", input.matrix.display()))?;
    report.inputs = json!({ "path": input.matrix, "digest": a.digest(), "m": a.order() });
    if input.skip_psd_check {
        return Ok(Some(a));
    }
    let psd = report.timed("certify", || validate_psd(&a, ctx.tol.tol_psd))?;
    if !psd.pass {
        report.results = json!({ "psd": psd });
        eprintln!(
            "matrix is not PSD: λ_min = {:e} below −{:e}·{:e}",
            psd.min_eigenvalue, psd.tol, psd.scale
        );
        report.emit()?;
        return Ok(None);
    }
    Ok(Some(a.certify(ctx.tol.tol_psd)?))
}

fn solver_config(ctx: &Context, s: &SolverArgs) -> SolverConfig {
    SolverConfig {
        k: s.k,
        tol: ctx.tol.tol_solver,
        max_sweeps: s.max_sweeps,
        restarts: s.restarts,
        seed: ctx.seed,
        check_psd: false,
        psd_tol: ctx.tol.tol_psd,
        record_trace: false,
    }
}

fn solution_json(g: &GramSolution) -> serde_json::Value {
    json!({
        "objective": g.objective,
        "k": g.k,
        "sweeps": g.iterations,
        "restart": g.restart,
        "converged": g.converged,
    })
}

pub fn solve(ctx: &Context, args: &SolveArgs) -> anyhow::Result<Status> {
    let mut report = AnalysisReport::new("solve", config(ctx, args));
    let Some(a) = load_certified(ctx, &args.input, &mut report)? else {
        return Ok(Status::PsdFailure);
    };
    let cfg = solver_config(ctx, &args.solver);
    let g = report.timed("solve", || solve_sdp_relaxation(&a, &cfg))?;
    if let Some(path) = &args.dump_gram {
        write_vectors(&g.vectors, path).with_context(|| format!("writing {}", path.display()))?;
    }
    report.results = solution_json(&g);
    report.results["restarts"] = json!(cfg.restarts);

    eprintln!(
        "objective {:.10} (k = {}, {} sweeps, restart {}{})",
        g.objective,
        g.k,
        g.iterations,
        g.restart,
        if g.converged { "" } else { ", NOT converged" }
    );
    report.emit()?;
    Ok(if g.converged { Status::Ok } else { Status::NotConverged })
}

pub fn round(ctx: &Context, args: &RoundArgs) -> anyhow::Result<Status> {
    if args.n < 1 {
        bail!("--n must be at least 1");
    }
    let mut report = AnalysisReport::new("round", config(ctx, args));
    let Some(a) = load_certified(ctx, &args.input, &mut report)? else {
        return Ok(Status::PsdFailure);
    };

    let mut status = Status::Ok;
    let g = match &args.gram {
        Some(path) => {
            let vs = read_vectors(path).with_context(|| format!("reading {}", path.display()))?;
            GramSolution::from_vectors(&a, vs)?
        }
        None => {
            let cfg = solver_config(ctx, &args.solver);
            let g = report.timed("solve", || solve_sdp_relaxation(&a, &cfg))?;
            if !g.converged {
                status = Status::NotConverged;
            }
            g
        }
    };

    let best = report.timed("round", || best_of_rounds(&a, &g, args.n, args.trials, ctx.seed))?;
    let est = report.timed("monte_carlo", || {
        expected_ratio_estimate(&a, &g, args.n, args.mc, derive_seed(ctx.seed, MC_STREAM))
    })?;
    let gamma = gamma_n(args.n)?;
    let best_ratio = best.objective / g.objective;
    let bound = gamma - ctx.tol.tol_sigma * est.stderr;
    let passed = est.mean >= bound;

    report.results = json!({
        "relaxation": solution_json(&g),
        "best_objective": best.objective,
        "best_seed": best.seed_used,
        "best_ratio": best_ratio,
        "gamma": gamma,
        "best_ratio_margin": best_ratio - gamma,
        "mean_ratio": est.mean,
        "stderr": est.stderr,
        "samples": est.samples,
        "statistical_bound": bound,
        "passed": passed,
    });
    eprintln!(
        "rank {} rounding: best {:.8} (ratio {:.6}), mean ratio {:.6} ± {:.2e} vs γ({}) = {:.6}: {}",
        args.n,
        best.objective,
        best_ratio,
        est.mean,
        est.stderr,
        args.n,
        gamma,
        if passed { "pass" } else { "FAIL" }
    );
    report.emit()?;
    Ok(status.and(Status::gate(passed)))
}

fn write_vectors(vs: &VectorSet, path: &Path) -> anyhow::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in vs.iter() {
        let line: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn read_vectors(path: &Path) -> anyhow::Result<VectorSet> {
    let text = fs::read_to_string(path)?;
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|x| x.trim().parse::<f64>().with_context(|| format!("row {}: bad number {x:?}", i + 1)))
                .collect::<anyhow::Result<Vec<f64>>>()
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(VectorSet::from_rows(&rows)?)
}
