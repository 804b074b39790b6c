use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::fit::{fit_convergence, ConvergenceFit};
use super::scenario::{neumann_reference, MetricMode, Scenario, ScenarioName};
use super::verdict::{scenario_verdicts, Verdict};
use crate::eigen::{simplicity_guard, solve_lowest, EigenResult, GapCheck};
use crate::error::{Error, Result};
use crate::fem::{
    assemble, upper_bound_check, BoundaryCondition, MassKind, OperatorPair, UpperBoundReport,
};
use crate::mesh::{
    build_ball_mesh, build_handlebody_mesh, build_multi_collar_mesh, build_sphere_mesh,
    build_torus_mesh, mesh_audit, AuditReport, SimplicialMesh,
};
use crate::metric::{
    degenerate_metric, reference_metric, smoothed_metric, EdgeLengthMetric, SmoothingProfile,
};
use crate::morse::classify_critical_vertices;
use crate::nodal::{
    component_census, extract_zero_set, nodal_domains, profile_error, CensusMode, CensusReport,
    Expectation, NodalComplex, NodalSoup, ProfileFit, DEFAULT_ZERO_SHIFT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseSummary {
    pub counts_by_index: Vec<usize>,
    pub degenerate: usize,
    pub betti_reference: Vec<usize>,
    pub pass: bool,
    /// Vertices of the nodal domain the points were restricted to.
    pub domain_vertices: usize,
    /// Critical points on the whole manifold, by index.
    pub total_counts_by_index: Vec<usize>,
}

/// Collar in which a nodal component lies, by majority of its cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPlacement {
    pub component: usize,
    pub collar: Option<usize>,
    pub collar_mean: Option<f64>,
    pub euler_char: i64,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub config_hash: String,
    pub seed: u64,
    pub k: usize,
    pub eps: f64,
    pub lambda: f64,
    pub mu: Option<f64>,
    pub rel_error: Option<f64>,
    pub backward_error: f64,
    pub profile: Option<ProfileFit>,
    pub census: Option<CensusReport>,
    pub placements: Vec<ComponentPlacement>,
    pub nodal_domain_count: usize,
    pub morse: Option<MorseSummary>,
    pub solve_seconds: f64,
    pub analysis_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRun {
    pub eps: f64,
    pub lambdas: Vec<f64>,
    pub backward_errors: Vec<f64>,
    pub iterations: usize,
    pub guard: GapCheck,
    pub upper_bound: Option<UpperBoundReport>,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedCheck {
    pub eps: f64,
    pub delta: f64,
    pub order: u32,
    pub lambdas: Vec<f64>,
    pub census_pass: Vec<bool>,
    /// Why the check could not run.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFit {
    pub k: usize,
    pub fit: ConvergenceFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub config_hash: String,
    pub seed: u64,
    pub vertices: usize,
    pub cells: usize,
    pub audit: AuditReport,
    /// `mu_k` for `k = 0..=l`.
    pub targets: Vec<f64>,
    pub retry: Option<String>,
    pub runs: Vec<EpsRun>,
    pub convergence: Vec<KFit>,
    pub smoothed: Option<SmoothedCheck>,
    pub verdicts: Vec<Verdict>,
    pub caveats: Vec<String>,
    pub total_seconds: f64,
}

impl ScenarioReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn guard_pass(&self) -> bool {
        self.runs.iter().all(|r| r.guard.pass)
    }

    pub fn fit(&self, k: usize) -> Option<&ConvergenceFit> {
        self.convergence.iter().find(|f| f.k == k).map(|f| &f.fit)
    }

    /// Record `k` at every eps, in sweep order.
    pub fn series(&self, k: usize) -> Vec<&SweepRecord> {
        self.runs
            .iter()
            .filter_map(|r| r.records.iter().find(|x| x.k == k))
            .collect()
    }
}

pub fn build_scenario_mesh(sc: &Scenario) -> Result<SimplicialMesh> {
    let collar = sc.collars.first();
    match sc.name {
        ScenarioName::MainS3 => build_sphere_mesh(sc.n, sc.refinement, collar),
        ScenarioName::MainT3Nonseparating => build_torus_mesh(sc.n, sc.divisions, collar),
        ScenarioName::MultiCollar => {
            build_multi_collar_mesh(sc.n, sc.refinement, &sc.collars, sc.gap)
        }
        ScenarioName::PayneBall => build_ball_mesh(sc.n, sc.refinement, &sc.collars[0]),
        ScenarioName::MorseHandlebody => {
            if sc.n != 3 {
                return Err(Error::Config(
                    "morse_handlebody is three-dimensional".into(),
                ));
            }
            let spec = sc
                .handlebody
                .as_ref()
                .ok_or_else(|| Error::Config("missing handlebody spec".into()))?;
            build_handlebody_mesh(spec)
        }
        ScenarioName::FlatSanity2d => build_torus_mesh(2, sc.divisions, None),
    }
}

fn boundary_condition(sc: &Scenario) -> BoundaryCondition {
    if sc.name == ScenarioName::PayneBall {
        BoundaryCondition::Dirichlet
    } else {
        BoundaryCondition::Closed
    }
}

/// Number of near-zero modes added by collars that the exterior barely
/// connects.
fn extra_low_modes(sc: &Scenario) -> usize {
    if sc.name == ScenarioName::MultiCollar {
        sc.collars.len() - 1
    } else {
        0
    }
}

/// Records `k = 0..=record_top`.
fn record_top(sc: &Scenario) -> usize {
    sc.l + extra_low_modes(sc)
}

fn targets(sc: &Scenario) -> Vec<f64> {
    match sc.name {
        ScenarioName::MultiCollar => std::iter::once(0.0)
            .chain(
                sc.collars
                    .iter()
                    .take(sc.l)
                    .map(|c| neumann_reference(c, 1).mu[1]),
            )
            .collect(),
        ScenarioName::FlatSanity2d => {
            let period = 1.0;
            let first = (2.0 * std::f64::consts::PI / period).powi(2);
            (0..=sc.l)
                .map(|k| if k == 0 { 0.0 } else { first })
                .collect()
        }
        _ => neumann_reference(&sc.collars[0], sc.l).mu,
    }
}

/// Metric for one sweep point; the smoothing width doubles until the
/// metric is realizable when no width is configured.
fn sweep_metric(
    sc: &Scenario,
    mode: MetricMode,
    g0: &EdgeLengthMetric,
    mesh: &SimplicialMesh,
    eps: f64,
) -> Result<(EdgeLengthMetric, Option<f64>)> {
    match mode {
        MetricMode::Degenerate => Ok((degenerate_metric(g0, mesh, eps)?, None)),
        MetricMode::Smoothed => {
            let mut delta = sc.smoothing_delta();
            for _ in 0..4 {
                let profile = SmoothingProfile::new(eps, delta, sc.smoothing_order)?;
                match smoothed_metric(g0, mesh, &profile) {
                    Ok(g) => return Ok((g, Some(delta))),
                    Err(Error::Unrealizable { .. }) if sc.delta.is_none() => delta *= 2.0,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Config(format!(
                "no realizable smoothing width up to {delta}"
            )))
        }
    }
}

/// Replaces values on Dirichlet vertices by a small multiple of the mean of
/// their free neighbours, so the zero set does not run along `dM`.
fn fill_dirichlet(
    mesh: &SimplicialMesh,
    ops: &OperatorPair,
    full: &mut [f64],
    neighbors: &[Vec<usize>],
) {
    let mut free = vec![true; mesh.num_vertices()];
    for &v in &ops.constrained_vertices {
        free[v] = false;
    }
    for &v in &ops.constrained_vertices {
        let vals: Vec<f64> = neighbors[v]
            .iter()
            .filter(|&&w| free[w])
            .map(|&w| full[w])
            .collect();
        if !vals.is_empty() {
            full[v] = 1e-3 * vals.iter().sum::<f64>() / vals.len() as f64;
        }
    }
}

fn placements(mesh: &SimplicialMesh, nc: &NodalComplex) -> Vec<ComponentPlacement> {
    let ncol = mesh.collar_count().max(1);
    let mut votes = vec![vec![0usize; ncol + 1]; nc.components.len()];
    for p in &nc.pieces {
        let slot = mesh.region[p.cell]
            .collar_index()
            .map_or(ncol, |i| i.min(ncol - 1));
        votes[p.component][slot] += 1;
    }
    nc.components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let best = (0..=ncol)
                .max_by_key(|&s| (votes[i][s], std::cmp::Reverse(s)))
                .unwrap_or(ncol);
            ComponentPlacement {
                component: i,
                collar: (best < ncol && votes[i][best] > 0).then_some(best),
                collar_mean: c.collar_mean,
                euler_char: c.euler_char,
                closed: c.closed,
            }
        })
        .collect()
}

fn census_expectation(sc: &Scenario, k: usize) -> Option<Expectation> {
    let tol = sc.tolerances.position_tol;
    match sc.name {
        ScenarioName::MainS3 | ScenarioName::PayneBall => {
            let chi = sc.collars[0].sigma_model.euler_characteristic()?;
            Some(Expectation::copies(k, chi, tol, CensusMode::Exact))
        }
        ScenarioName::MainT3Nonseparating => {
            let chi = sc.collars[0].sigma_model.euler_characteristic()?;
            Some(Expectation::copies(k, chi, tol, CensusMode::Containment))
        }
        ScenarioName::MorseHandlebody => {
            let genus = sc.betti.get(1).copied().unwrap_or(2) as i64;
            Some(Expectation::copies(
                k,
                2 - 2 * genus,
                tol,
                CensusMode::Exact,
            ))
        }
        ScenarioName::MultiCollar => Some(Expectation {
            positions: vec![0.0],
            euler_char: sc.collars[0].sigma_model.euler_characteristic()?,
            position_tol: tol,
            mode: CensusMode::Containment,
            require_closed: true,
        }),
        ScenarioName::FlatSanity2d => None,
    }
}

fn morse_summary(
    sc: &Scenario,
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    u: &[f64],
) -> Result<MorseSummary> {
    let mut u = u.to_vec();
    let inner: f64 = (0..mesh.num_vertices())
        .filter(|&v| mesh.collar_x[v].is_some_and(|x| x < -0.5))
        .map(|v| u[v])
        .sum();
    if inner > 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let domains = nodal_domains(mesh, metric, &u, DEFAULT_ZERO_SHIFT)?;
    let lowest = (0..u.len())
        .min_by(|&a, &b| u[a].total_cmp(&u[b]))
        .unwrap_or(0);
    let d = domains.vertex_domain[lowest];
    let keep: Vec<bool> = domains.vertex_domain.iter().map(|&x| x == d).collect();
    let full = classify_critical_vertices(mesh, &u)?;
    let restricted = full.restricted_to(&keep).with_betti(&sc.betti)?;
    Ok(MorseSummary {
        degenerate: restricted.num_degenerate(),
        pass: restricted.morse_pass && restricted.num_degenerate() == 0,
        counts_by_index: restricted.counts_by_index,
        betti_reference: restricted.betti_reference,
        domain_vertices: keep.iter().filter(|&&b| b).count(),
        total_counts_by_index: full.counts_by_index,
    })
}

struct Context<'a> {
    sc: &'a Scenario,
    mesh: &'a SimplicialMesh,
    hash: &'a str,
    targets: &'a [f64],
    neighbors: Vec<Vec<usize>>,
}

impl Context<'_> {
    fn solve(&self, metric: &EdgeLengthMetric) -> Result<(OperatorPair, EigenResult, f64)> {
        let t = Instant::now();
        let ops = assemble(
            self.mesh,
            metric,
            boundary_condition(self.sc),
            MassKind::Consistent,
        )?;
        let count = record_top(self.sc)
            + 2
            + if self.sc.name == ScenarioName::FlatSanity2d {
                3
            } else {
                0
            };
        let res = solve_lowest(&ops, count, self.sc.tolerances.eig_tol, self.sc.seed)?;
        Ok((ops, res, t.elapsed().as_secs_f64()))
    }

    fn full_vector(&self, ops: &OperatorPair, v: &[f64]) -> Vec<f64> {
        let mut full = ops.to_full(v);
        fill_dirichlet(self.mesh, ops, &mut full, &self.neighbors);
        full
    }

    fn census(
        &self,
        metric: &EdgeLengthMetric,
        u: &[f64],
        k: usize,
    ) -> Result<(Option<CensusReport>, Vec<ComponentPlacement>)> {
        let Some(exp) = census_expectation(self.sc, k) else {
            return Ok((None, Vec::new()));
        };
        let nc = extract_zero_set(self.mesh, metric, u, DEFAULT_ZERO_SHIFT)?;
        let places = placements(self.mesh, &nc);
        Ok((Some(component_census(&nc, &exp)), places))
    }

    fn run_eps(
        &self,
        eps: f64,
        metric: &EdgeLengthMetric,
        g0: &EdgeLengthMetric,
    ) -> Result<EpsRun> {
        let sc = self.sc;
        let (ops, res, solve_seconds) = self.solve(metric)?;
        let guard = simplicity_guard(&res.lambdas, record_top(sc) + 1, sc.tolerances.gap_min)?;
        let upper_bound = match sc.name {
            ScenarioName::MainS3 | ScenarioName::MainT3Nonseparating | ScenarioName::PayneBall => {
                Some(upper_bound_check(
                    self.mesh,
                    g0,
                    metric,
                    sc.collars[0].gamma,
                    sc.l,
                    boundary_condition(sc),
                )?)
            }
            _ => None,
        };
        let mut records = Vec::new();
        for k in 0..=record_top(sc) {
            let t = Instant::now();
            let u = self.full_vector(&ops, &res.vectors[k]);
            let lambda = res.lambdas[k];
            let mu = self.targets.get(k).copied();
            let rel_error = mu.filter(|&m| m > 0.0).map(|m| (lambda - m).abs() / m);
            let (mut profile, mut census, mut places, mut morse) = (None, None, Vec::new(), None);
            let mut domain_count = 1;
            if k > 0 {
                domain_count = nodal_domains(self.mesh, metric, &u, DEFAULT_ZERO_SHIFT)?.count;
                let (c, p) = self.census(metric, &u, k)?;
                census = c;
                places = p;
                if sc.name == ScenarioName::MultiCollar {
                    if k <= sc.l {
                        profile =
                            profile_error(self.mesh, metric, &u, Some(sc.collars[k - 1].label), 1)
                                .ok();
                    }
                } else if !sc.collars.is_empty() && k <= sc.l {
                    profile = Some(profile_error(self.mesh, metric, &u, None, k)?);
                }
                if k == 1 && !sc.betti.is_empty() {
                    morse = Some(morse_summary(sc, self.mesh, metric, &u)?);
                }
            }
            records.push(SweepRecord {
                config_hash: self.hash.to_string(),
                seed: sc.seed,
                k,
                eps,
                lambda,
                mu,
                rel_error,
                backward_error: res.backward_errors[k],
                profile,
                census,
                placements: places,
                nodal_domain_count: domain_count,
                morse,
                solve_seconds,
                analysis_seconds: t.elapsed().as_secs_f64(),
            });
        }
        Ok(EpsRun {
            eps,
            lambdas: res.lambdas.clone(),
            backward_errors: res.backward_errors.clone(),
            iterations: res.iterations,
            guard,
            upper_bound,
            records,
        })
    }
}

/// Census of the smoothed metric at `eps`.
fn smoothed_check(cx: &Context<'_>, g0: &EdgeLengthMetric, eps: f64) -> Result<SmoothedCheck> {
    let sc = cx.sc;
    let (g, delta) = sweep_metric(sc, MetricMode::Smoothed, g0, cx.mesh, eps)?;
    let (ops, res, _) = cx.solve(&g)?;
    let mut census_pass = Vec::new();
    for k in 1..=sc.l {
        let u = cx.full_vector(&ops, &res.vectors[k + extra_low_modes(sc)]);
        census_pass.push(cx.census(&g, &u, k)?.0.is_some_and(|c| c.pass));
    }
    Ok(SmoothedCheck {
        eps,
        delta: delta.unwrap_or(0.0),
        order: sc.smoothing_order,
        lambdas: res.lambdas,
        census_pass,
        error: None,
    })
}

fn run_once(sc: &Scenario) -> Result<ScenarioReport> {
    let start = Instant::now();
    let hash = sc.config_hash();
    let mesh = build_scenario_mesh(sc)
        .map_err(|e| e.context(format!("{}: building the mesh", sc.name)))?;
    let audit = mesh_audit(&mesh);
    if !audit.pass {
        return Err(Error::Audit(audit.violations).context(format!("{}: mesh audit", sc.name)));
    }
    let g0 = reference_metric(&mesh, &sc.collars)?;
    let targets = targets(sc);
    let cx = Context {
        sc,
        mesh: &mesh,
        hash: &hash,
        targets: &targets,
        neighbors: mesh.vertex_neighbors(),
    };
    let mut runs = Vec::new();
    let mut caveats = vec![format!(
        "fixed mesh of {} vertices and {} cells; errors below the discretization floor are not attributed to eps",
        mesh.num_vertices(),
        mesh.num_cells()
    )];
    if sc.eps_list.is_empty() {
        runs.push(
            cx.run_eps(1.0, &g0, &g0)
                .map_err(|e| e.context(format!("{}: uniform metric", sc.name)))?,
        );
    }
    for &eps in &sc.eps_list {
        let (g, _) = sweep_metric(sc, sc.metric, &g0, &mesh, eps)?;
        runs.push(
            cx.run_eps(eps, &g, &g0)
                .map_err(|e| e.context(format!("{}: eps = {eps}", sc.name)))?,
        );
    }
    let convergence = if sc.eps_list.is_empty() {
        Vec::new()
    } else {
        (1..targets.len())
            .map(|k| KFit {
                k,
                fit: fit_convergence(
                    &runs
                        .iter()
                        .map(|r| (r.eps, (r.lambdas[k] - targets[k]).abs()))
                        .collect::<Vec<_>>(),
                ),
            })
            .collect()
    };
    let smoothed = match (sc.eps_list.last(), sc.metric) {
        (Some(&eps), MetricMode::Degenerate) => Some(smoothed_check(&cx, &g0, eps).unwrap_or_else(
            |e| SmoothedCheck {
                eps,
                delta: sc.smoothing_delta(),
                order: sc.smoothing_order,
                lambdas: Vec::new(),
                census_pass: Vec::new(),
                error: Some(e.to_string()),
            },
        )),
        _ => None,
    };
    if sc.name == ScenarioName::MorseHandlebody {
        caveats.push(
            "PL lower-link critical points stand in for smooth non-degenerate critical points"
                .into(),
        );
    }
    if sc.name == ScenarioName::PayneBall {
        caveats.push("Dirichlet vertices take 1e-3 times their free-neighbour mean before zero-set extraction".into());
    }
    let mut report = ScenarioReport {
        scenario: sc.clone(),
        config_hash: hash,
        seed: sc.seed,
        vertices: mesh.num_vertices(),
        cells: mesh.num_cells(),
        audit,
        targets,
        retry: None,
        runs,
        convergence,
        smoothed,
        verdicts: Vec::new(),
        caveats,
        total_seconds: 0.0,
    };
    report.verdicts = scenario_verdicts(&report);
    report.total_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn retry_applies(sc: &Scenario) -> bool {
    matches!(
        sc.name,
        ScenarioName::MainS3
            | ScenarioName::MainT3Nonseparating
            | ScenarioName::MultiCollar
            | ScenarioName::PayneBall
    )
}

/// Runs the eps sweep of `sc`. A failed simplicity guard triggers one
/// rerun with every collar radius reduced by 20%.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport> {
    sc.validate()?;
    let report = run_once(sc)?;
    if report.guard_pass() || !retry_applies(sc) {
        return Ok(report);
    }
    let mut smaller = sc.clone();
    for c in smaller.collars.iter_mut() {
        c.r *= 0.8;
    }
    let mut retried = run_once(&smaller)?;
    retried.retry = Some(format!(
        "simplicity guard failed for config {}; rerun with r = {:.4}",
        report.config_hash, smaller.collars[0].r
    ));
    Ok(retried)
}

/// [`run_scenario`] for scenarios with several collars.
pub fn multi_collar_scenario(sc: &Scenario) -> Result<ScenarioReport> {
    if sc.name != ScenarioName::MultiCollar {
        return Err(Error::Config(format!(
            "{} is not a multi-collar scenario",
            sc.name
        )));
    }
    run_scenario(sc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalExport {
    pub scenario: ScenarioName,
    pub config_hash: String,
    pub k: usize,
    pub eps: f64,
    pub lambda: f64,
    pub soup: NodalSoup,
}

/// Zero sets of `u_1..u_record_top` at `eps` as triangle/segment soups.
pub fn nodal_export(sc: &Scenario, eps: f64) -> Result<Vec<NodalExport>> {
    sc.validate()?;
    let hash = sc.config_hash();
    let mesh = build_scenario_mesh(sc)?;
    let g0 = reference_metric(&mesh, &sc.collars)?;
    let targets = targets(sc);
    let cx = Context {
        sc,
        mesh: &mesh,
        hash: &hash,
        targets: &targets,
        neighbors: mesh.vertex_neighbors(),
    };
    let g = if sc.eps_list.is_empty() {
        g0
    } else {
        sweep_metric(sc, sc.metric, &g0, &mesh, eps)?.0
    };
    let (ops, res, _) = cx.solve(&g)?;
    (1..=record_top(sc))
        .map(|k| {
            let u = cx.full_vector(&ops, &res.vectors[k]);
            let nc = extract_zero_set(&mesh, &g, &u, DEFAULT_ZERO_SHIFT)?;
            Ok(NodalExport {
                scenario: sc.name,
                config_hash: hash.clone(),
                k,
                eps,
                lambda: res.lambdas[k],
                soup: nc.to_soup(&mesh),
            })
        })
        .collect()
}
