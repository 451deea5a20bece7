//! One function per subcommand; each returns its files in memory.

use persistence_core::bench::{
    build_inner_cuboid, check_directed_rv, check_distance_claim, check_fluctuation, check_hlms_ratio, check_kolmogorov,
    inclusion_row, inclusion_threshold, projection_bound_audit, CheckRow, FarSet, InnerCuboid, SegmentParams,
};
use persistence_core::engine::{exponent_fit, make_schedule, splitting_estimate, ScheduleKind, SplittingOptions};
use persistence_core::geometry::{
    direction_grid, exponent_report, nonstandard_exponent, persistence_exponent, projection_exponent_bound, r_star,
    ConvexBody, DEFAULT_DELTAS, DEFAULT_TOL,
};
use persistence_core::linalg::normalized;
use persistence_core::path::{build_skeleton, cost_heuristic, skeleton_as_measure};
use persistence_core::rng::derive_seed;
use persistence_core::sampler::{RVModel, SampleBatch};
use serde::Serialize;

use crate::config::{BenchBlock, ExperimentConfig, ModeSpec, ScheduleSpec};
use crate::output::{svg_line_plot, Artifacts};
use crate::Failure;

pub const CHECKS: [&str; 7] = ["inclusions", "distance", "fluctuation", "kolmogorov", "directed", "hlms", "audit"];

/// Files plus the failure that stopped the command, if any.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub warnings: Vec<String>,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn done(artifacts: Artifacts, warnings: Vec<String>) -> Self {
        Outcome { artifacts, warnings, failure: None }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct ExponentRow {
    record: &'static str,
    delta: f64,
    r: f64,
    exponent: f64,
    direction: String,
}

pub fn exponent(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let spec = cfg.model_spec()?;
    spec.check_hypotheses()?;
    let alpha = spec.alpha()?;
    let body = cfg.body_spec()?.build()?;
    if spec.dimension().is_some_and(|d| d != body.dimension()) {
        return Err(Failure::Config("model and body dimensions differ".into()));
    }
    let block = cfg.exponent.clone().unwrap_or(crate::config::ExponentBlock { deltas: None, grid_density: 64, tol: None });
    let mut warnings = Vec::new();
    if let Some(atoms) = spec.atoms() {
        warnings.push(format!(
            "angular measure is atomic ({atoms} atoms): the exponent formula assumes an absolutely continuous \
             angular law; use the one-dimensional or product-of-intervals formulas instead"
        ));
    }
    let deltas = block.deltas.clone().unwrap_or(DEFAULT_DELTAS.to_vec());
    let tol = block.tol.unwrap_or(DEFAULT_TOL);
    let report = exponent_report(&body, alpha, &deltas, tol)?;
    let mut rows = vec![ExponentRow {
        record: "r_star",
        delta: 0.0,
        r: report.r_star,
        exponent: report.exponent,
        direction: join(&report.phi_star),
    }];
    for &(delta, r) in &report.delta_curve {
        let exponent = persistence_exponent(r, alpha).unwrap_or(f64::INFINITY);
        rows.push(ExponentRow { record: "relaxed", delta, r, exponent, direction: String::new() });
    }
    let bound = projection_exponent_bound(&body, alpha, block.grid_density)?;
    rows.push(ExponentRow {
        record: "projection_bound",
        delta: 0.0,
        r: bound.interval.1 / bound.interval.0,
        exponent: bound.exponent,
        direction: join(&bound.direction),
    });
    if spec.mode == ModeSpec::NonstandardProduct {
        if let Some(intervals) = cfg.body_spec()?.positive_box() {
            let triples: Vec<(f64, f64, f64)> =
                intervals.iter().zip(&spec.components).map(|(&(a, b), c)| (a, b, c.alpha)).collect();
            rows.push(ExponentRow {
                record: "product",
                delta: 0.0,
                r: f64::NAN,
                exponent: nonstandard_exponent(&triples)?,
                direction: String::new(),
            });
        } else {
            warnings.push("product law on a body that is not a positive box: only the general formula is reported".into());
        }
    }
    let mut artifacts = Artifacts::default();
    artifacts.csv("exponent.csv", &rows)?;
    Ok(Outcome::done(artifacts, warnings))
}

/// Exponent the engine output is compared with.
fn theory_phi(cfg: &ExperimentConfig, model: &RVModel, body: &ConvexBody) -> Result<f64, Failure> {
    let spec = cfg.model_spec()?;
    if spec.mode == ModeSpec::NonstandardProduct {
        if let Some(intervals) = cfg.body_spec()?.positive_box() {
            let triples: Vec<(f64, f64, f64)> =
                intervals.iter().zip(&spec.components).map(|(&(a, b), c)| (a, b, c.alpha)).collect();
            return Ok(nonstandard_exponent(&triples)?);
        }
    }
    let rs = r_star(body, 0.0, DEFAULT_TOL)?;
    Ok(persistence_exponent(rs.r, model.alpha)?)
}

#[derive(Serialize)]
struct LevelRow {
    i: usize,
    u_i: u64,
    fraction: f64,
    survivors: u64,
}

#[derive(Serialize)]
struct EstimateRow {
    n: u64,
    log_p: f64,
    se: f64,
}

#[derive(Serialize)]
struct FitRow {
    slope: f64,
    se: f64,
    r2: f64,
    theory_phi: f64,
}

pub fn estimate(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome, Failure> {
    let block = cfg.estimate.as_ref().ok_or_else(|| Failure::Config("[estimate] block is required".into()))?;
    if block.n_grid.is_empty() || block.n_grid.contains(&0) {
        return Err(Failure::Config("estimate.n_grid must be non-empty and positive".into()));
    }
    let (model, body) = cfg.model_and_body()?;
    let phi = theory_phi(cfg, &model, &body)?;
    let mut grid = block.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let n = *grid.last().expect("non-empty");
    let default_ref = || -> Result<f64, Failure> { Ok(r_star(&body, 0.0, DEFAULT_TOL)?.r) };
    let (kind, c1, r_ref) = match block.schedule {
        ScheduleSpec::Geometric { c1, r_ref } => (ScheduleKind::Geometric, c1, r_ref),
        ScheduleSpec::Upper { c1, eta, r_ref } => (ScheduleKind::Upper { eta }, c1, r_ref),
        ScheduleSpec::Lower { c1, rho, r_ref } => (ScheduleKind::Lower { rho }, c1, r_ref),
    };
    let r_ref = match r_ref {
        Some(r) => r,
        None => default_ref()?,
    };
    let schedule = make_schedule(kind, r_ref, c1, n)?;
    let options = SplittingOptions { effort: block.effort, macros: block.macros, checkpoints: grid.clone(), constraint_start: 1 };
    let result = splitting_estimate(&model, &body, &schedule, &options, seed)?;

    let curve = result.log_curve();
    let levels: Vec<LevelRow> = curve
        .iter()
        .enumerate()
        .map(|(i, &(t, _, _))| LevelRow { i, u_i: t, fraction: result.per_level_fraction[i], survivors: result.survivors[i] })
        .collect();
    let estimates: Vec<EstimateRow> = grid
        .iter()
        .map(|&t| {
            let (log_p, se) = result.log_at(t).unwrap_or((f64::NEG_INFINITY, f64::NAN));
            EstimateRow { n: t, log_p, se }
        })
        .collect();
    let points: Vec<(f64, f64)> =
        estimates.iter().filter(|e| e.log_p.is_finite()).map(|e| (e.n as f64, e.log_p)).collect();
    let mut warnings = Vec::new();
    let fit = match exponent_fit(&points) {
        Ok(f) => FitRow { slope: f.slope, se: f.slope_se, r2: f.r2, theory_phi: phi },
        Err(e) => {
            warnings.push(format!("no quadratic fit: {e}"));
            FitRow { slope: f64::NAN, se: f64::NAN, r2: f64::NAN, theory_phi: phi }
        }
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("levels.csv", &levels)?;
    artifacts.csv("estimates.csv", &estimates)?;
    artifacts.csv("fit.csv", &[fit])?;
    let failure = result.extinct_at.map(|j| {
        Failure::Runtime(format!("all particles died by stage {j} (time {}); estimate is unavailable beyond it", result.stage_ends[j]))
    });
    Ok(Outcome { artifacts, warnings, failure })
}

#[derive(Serialize)]
struct SkeletonRow {
    k: u64,
    height: f64,
}

#[derive(Serialize)]
struct AtomRow {
    i: usize,
    t_i: u64,
    j_i: f64,
}

#[derive(Serialize)]
struct PathSummary {
    a: f64,
    b: f64,
    c1: u64,
    n: u64,
    k_n: usize,
    cost: f64,
}

pub fn path(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let p = cfg.path.as_ref().ok_or_else(|| Failure::Config("[path] block is required".into()))?;
    let skel = build_skeleton(p.a, p.b, p.c1, p.n)?;
    let sampled = skel.log_sampled(p.points);
    let skeleton: Vec<SkeletonRow> = sampled.iter().map(|&(k, height)| SkeletonRow { k, height }).collect();
    let atoms: Vec<AtomRow> = skeleton_as_measure(&skel)
        .into_iter()
        .enumerate()
        .map(|(i, (t_i, j_i))| AtomRow { i: i + 1, t_i, j_i })
        .collect();
    let cost = match p.alpha {
        Some(alpha) => cost_heuristic(&skel, alpha)?,
        None => f64::NAN,
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("skeleton.csv", &skeleton)?;
    artifacts.csv("atoms.csv", &atoms)?;
    artifacts.csv("path_summary.csv", &[PathSummary { a: p.a, b: p.b, c1: p.c1, n: p.n, k_n: skel.k_n, cost }])?;
    if p.svg {
        let path: Vec<(f64, f64)> = sampled.iter().map(|&(k, h)| (k as f64, h)).collect();
        let lower: Vec<(f64, f64)> = sampled.iter().map(|&(k, _)| (k as f64, p.a * k as f64)).collect();
        let upper: Vec<(f64, f64)> = sampled.iter().map(|&(k, _)| (k as f64, p.b * k as f64)).collect();
        let svg = svg_line_plot("plateau-and-jump skeleton", &[("path", path), ("a k", lower), ("b k", upper)], true, true);
        artifacts.raw("skeleton.svg", svg.into_bytes());
    }
    Ok(Outcome::done(artifacts, Vec::new()))
}

#[derive(Serialize)]
struct CheckCsv {
    check: String,
    parameters: String,
    statistic: f64,
    threshold: f64,
    pass: String,
    margin: f64,
}

impl CheckCsv {
    fn from_row(row: CheckRow, below: bool) -> Self {
        let pass = match (row.pass, below) {
            (true, _) => "true",
            (false, true) => "below-threshold",
            (false, false) => "false",
        };
        CheckCsv {
            check: row.check,
            parameters: row.parameters,
            statistic: row.statistic,
            threshold: row.threshold,
            pass: pass.into(),
            margin: row.margin,
        }
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("bench.{name} is required by the selected checks")))
}

struct Geometry {
    body: ConvexBody,
    r: f64,
    phi_star: Vec<f64>,
}

fn segment_params(b: &BenchBlock, alpha: f64, geo: &Geometry) -> Result<(SegmentParams, InnerCuboid), Failure> {
    let eps = need(b.epsilon, "epsilon")?;
    let inner = build_inner_cuboid(&geo.body, &geo.phi_star, eps)?;
    let params = SegmentParams::new(eps, need(b.rho, "rho")?, need(b.delta, "delta")?, alpha, b.c1.unwrap_or(1.0), inner.r_epsilon)?;
    Ok((params, inner))
}

pub fn bench(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome, Failure> {
    let b = cfg.bench.as_ref().ok_or_else(|| Failure::Config("[bench] block is required".into()))?;
    if b.checks.is_empty() {
        return Err(Failure::Config("bench.checks must name at least one check".into()));
    }
    if let Some(bad) = b.checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(Failure::Config(format!("unknown check '{bad}'; expected one of {}", CHECKS.join(", "))));
    }
    let geometry = || -> Result<Geometry, Failure> {
        let body = cfg.body_spec()?.build()?;
        let rs = r_star(&body, 0.0, DEFAULT_TOL)?;
        Ok(Geometry { body, r: rs.r, phi_star: rs.phi_star })
    };
    let model = || -> Result<RVModel, Failure> { cfg.model_spec()?.build() };
    let mut rows: Vec<CheckCsv> = Vec::new();
    let mut failure = None;
    for (idx, name) in b.checks.iter().enumerate() {
        let check_seed = derive_seed(seed, idx as u64, 0);
        let mut found = Vec::new();
        let result = (|| -> Result<(), Failure> {
            let rows = &mut found;
            match name.as_str() {
                "inclusions" => {
                    let geo = geometry()?;
                    let alpha = cfg.model_spec()?.alpha()?;
                    let (params, inner) = segment_params(b, alpha, &geo)?;
                    let [first, last] = need(b.i_range, "i_range")?;
                    let threshold = inclusion_threshold(&params, &inner.cuboid);
                    for i in first.max(2)..=last {
                        let below = threshold.is_none_or(|t| i < t);
                        let p = format!("i={i};epsilon={};rho={};delta={}", params.epsilon, params.rho, params.delta);
                        match inclusion_row(i, &params, &inner.cuboid) {
                            Ok(r) => {
                                let stat = r.tilde_margin.min(r.hat_margin);
                                let mut row = CheckRow::at_least("inclusion", format!("{p};m_i={}", r.m_i), stat, 0.0);
                                row.pass = r.pass;
                                rows.push(CheckCsv::from_row(row, below));
                                let star = CheckRow::at_least("star-inclusion", format!("{p};m_i={}", r.m_i), r.star_margin, 0.0);
                                rows.push(CheckCsv::from_row(star, below));
                            }
                            Err(_) => {
                                let row = CheckRow { check: "inclusion".into(), parameters: p, statistic: f64::NAN, threshold: 0.0, pass: false, margin: f64::NAN };
                                rows.push(CheckCsv::from_row(row, below));
                            }
                        }
                    }
                }
                "distance" => {
                    let geo = geometry()?;
                    let [first, last] = need(b.i_range, "i_range")?;
                    let eta = need(b.eta, "eta")?;
                    let claim = check_distance_claim(&geo.body, geo.r, eta, b.c1.unwrap_or(1.0), first.max(1), last)?;
                    for r in &claim.rows {
                        let below = claim.threshold.is_none_or(|t| r.i < t);
                        let row = CheckRow::at_least("distance", format!("i={};eta={eta};u_i={}", r.i, r.u_i), r.ratio, 1e-9);
                        rows.push(CheckCsv::from_row(row, below));
                    }
                    let mut summary = CheckRow::at_least("distance-infimum", format!("eta={eta};converged={}", claim.converged), claim.infimum, 1e-9);
                    summary.pass = claim.pass;
                    rows.push(CheckCsv::from_row(summary, false));
                }
                "fluctuation" => {
                    let geo = geometry()?;
                    let m = model()?;
                    let (params, _) = segment_params(b, m.alpha, &geo)?;
                    let size = need(b.m, "m")?;
                    let rep = check_fluctuation(&m, &params, size, need(b.reps, "reps")?, check_seed)?;
                    let mut row = CheckRow::at_least(
                        "fluctuation",
                        format!("m={size};window={};horizon={};se={}", rep.window, rep.horizon, rep.se),
                        rep.probability,
                        rep.threshold,
                    );
                    row.pass = rep.pass;
                    rows.push(CheckCsv::from_row(row, false));
                }
                "kolmogorov" => {
                    let m = model()?;
                    let (size, x) = (need(b.m, "m")?, need(b.x, "x")?);
                    let rep = check_kolmogorov(&m, size, x, need(b.reps, "reps")?, check_seed, b.constant_bound.unwrap_or(10.0))?;
                    let row = CheckRow::at_most(
                        "kolmogorov",
                        format!("m={size};x={x};lhs={};lhs_se={};shape={}", rep.lhs, rep.lhs_se, rep.shape),
                        rep.constant,
                        rep.constant_bound,
                    );
                    rows.push(CheckCsv::from_row(row, false));
                }
                "directed" => {
                    let m = model()?;
                    let dirs = match &b.directions {
                        Some(d) => d
                            .iter()
                            .map(|u| normalized(u).ok_or_else(|| Failure::Config("direction must be non-zero".into())))
                            .collect::<Result<Vec<_>, _>>()?,
                        None => direction_grid(m.dimension, 8),
                    };
                    let samples = b.samples.unwrap_or(1_000_000);
                    let k = b.k.unwrap_or(samples / 100);
                    for (j, u) in dirs.iter().enumerate() {
                        let rep = check_directed_rv(&m, u, samples, k, derive_seed(check_seed, j as u64, 0))?;
                        let (c, se) = rep.constant();
                        let row = CheckRow::at_most(
                            "directed-hill",
                            format!("u={};alpha={};constant={c};constant_se={se}", join(u), m.alpha),
                            (rep.hill.alpha - m.alpha).abs(),
                            0.15,
                        );
                        rows.push(CheckCsv::from_row(row, false));
                    }
                }
                "hlms" => {
                    let m = model()?;
                    let grid = b.n_grid.clone().ok_or_else(|| Failure::Config("bench.n_grid is required by hlms".into()))?;
                    let radius = b.far_radius.unwrap_or(1.0);
                    let out = check_hlms_ratio(&m, &FarSet::Exterior { radius }, &grid, need(b.reps, "reps")?, check_seed)?;
                    for r in out {
                        let mu = r.mu.unwrap_or(f64::NAN);
                        let row = CheckRow::at_most(
                            "hlms-ratio",
                            format!("n={};radius={radius};ratio={};se={};mu={mu}", r.n, r.ratio, r.se),
                            (r.ratio / mu - 1.0).abs(),
                            0.15,
                        );
                        rows.push(CheckCsv::from_row(row, false));
                    }
                }
                "audit" => {
                    let geo = geometry()?;
                    let m = model()?;
                    let n = b.n.unwrap_or(100);
                    let rep = projection_bound_audit(&geo.body, &m, b.grid_density.unwrap_or(64), n, b.effort.unwrap_or(2000), check_seed)?;
                    let se = rep.log_full.1.hypot(rep.log_projected.1);
                    let se = if se.is_finite() { se } else { 0.0 };
                    let mut row = CheckRow::at_least(
                        "projection-inequality",
                        format!("n={n};c={};log_full={};log_projected={}", join(&rep.direction), rep.log_full.0, rep.log_projected.0),
                        rep.log_projected.0 - rep.log_full.0,
                        0.0 - 3.0 * se,
                    );
                    row.pass = rep.holds;
                    rows.push(CheckCsv::from_row(row, false));
                    let gap = CheckRow::at_least(
                        "projection-gap",
                        format!("phi={};bound={}", rep.phi, rep.bound.exponent),
                        rep.gap,
                        0.0,
                    );
                    rows.push(CheckCsv::from_row(gap, false));
                }
                _ => unreachable!("names validated above"),
            }
            Ok(())
        })();
        rows.extend(found);
        if let Err(f) = result {
            rows.push(CheckCsv {
                check: name.clone(),
                parameters: f.to_string(),
                statistic: f64::NAN,
                threshold: f64::NAN,
                pass: "error".into(),
                margin: f64::NAN,
            });
            failure.get_or_insert(f);
        }
    }
    let mut artifacts = Artifacts::default();
    artifacts.csv("checks.csv", &rows)?;
    Ok(Outcome { artifacts, warnings: Vec::new(), failure })
}

pub fn sample(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome, Failure> {
    let count = cfg.sample.as_ref().ok_or_else(|| Failure::Config("[sample] block is required".into()))?.count;
    let model = cfg.model_spec()?.build()?;
    let batch = SampleBatch::generate(&model, count, seed);
    let header: Vec<String> = (1..=batch.dimension).map(|j| format!("x_{j}")).collect();
    let rows: Vec<Vec<String>> = batch.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
    let mut artifacts = Artifacts::default();
    artifacts.csv_records("samples.csv", &header, &rows)?;
    Ok(Outcome::done(artifacts, Vec::new()))
}
