use serde::{Deserialize, Serialize};

use super::run::{ScenarioReport, SweepRecord};
use super::scenario::ScenarioName;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Index into the sweep of the smallest eps before the floor of `k`.
fn last_pre_floor(r: &ScenarioReport, k: usize) -> Option<usize> {
    r.fit(k).and_then(|f| f.pre_floor_points.checked_sub(1))
}

fn smallest(r: &ScenarioReport, k: usize) -> Option<&SweepRecord> {
    r.series(k).last().copied()
}

fn guard(r: &ScenarioReport) -> Verdict {
    let failing: Vec<String> = r
        .runs
        .iter()
        .filter(|x| !x.guard.pass)
        .map(|x| format!("eps {} at k = {:?}", x.eps, x.guard.failing_k))
        .collect();
    Verdict::new(
        "simplicity_guard",
        failing.is_empty(),
        if failing.is_empty() {
            format!("gap >= {} at every eps", r.scenario.tolerances.gap_min)
        } else {
            format!("failed: {}", failing.join("; "))
        },
    )
}

fn eigen_targets(r: &ScenarioReport, ks: &[(usize, f64)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(k, tol) in ks {
        let rel: Vec<f64> = r
            .series(k)
            .iter()
            .map(|x| x.rel_error.unwrap_or(f64::NAN))
            .collect();
        let (ok, monotone) = match last_pre_floor(r, k) {
            Some(i) if i >= 1 => (rel[i] <= tol, rel[..=i].windows(2).all(|w| w[1] < w[0])),
            _ => (false, false),
        };
        pass &= ok && monotone;
        parts.push(format!(
            "k={k}: rel errors {} (pre-floor points {}, monotone {monotone}, tol {tol})",
            fmt_list(&rel),
            r.fit(k).map_or(0, |f| f.pre_floor_points)
        ));
    }
    Verdict::new("eigenvalue_targets", pass, parts.join("; "))
}

fn convergence_order(r: &ScenarioReport, k: usize, min_order: f64) -> Verdict {
    match r.fit(k) {
        Some(f) => Verdict::new(
            "convergence_order",
            f.order.is_some_and(|o| o >= min_order),
            format!(
                "k={k}: order {:?} over {} pre-floor points ({}), floor eps {:?}, required >= {min_order}",
                f.order, f.pre_floor_points, f.status, f.floor_eps
            ),
        ),
        None => Verdict::new("convergence_order", false, "no fit".into()),
    }
}

fn sandwich(r: &ScenarioReport, l: usize) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=l {
        let mut excess = Vec::new();
        let mut below = true;
        for run in &r.runs {
            let Some(ub) = &run.upper_bound else { continue };
            let Some(entry) = ub.entries.iter().find(|e| e.k == k) else {
                continue;
            };
            below &= run.lambdas[k] <= entry.bound * (1.0 + 1e-9);
            excess.push(entry.bound - entry.mu);
        }
        let positive = excess.iter().all(|&e| e > 0.0);
        let decreasing = excess.windows(2).all(|w| w[1].abs() < w[0].abs());
        pass &= below && positive && decreasing && !excess.is_empty();
        parts.push(format!(
            "k={k}: lambda <= bound {below}, bound - mu {} (positive {positive}, |bound - mu| decreasing {decreasing})",
            fmt_list(&excess)
        ));
    }
    Verdict::new("min_max_sandwich", pass, parts.join("; "))
}

fn census_at_smallest(r: &ScenarioReport, name: &str, ks: &[usize]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for &k in ks {
        match smallest(r, k).and_then(|x| x.census.as_ref().map(|c| (x, c))) {
            Some((rec, c)) => {
                pass &= c.pass;
                let failed: Vec<String> = c
                    .checks
                    .iter()
                    .filter(|x| !x.pass)
                    .map(|x| format!("{} ({})", x.name, x.detail))
                    .collect();
                parts.push(format!(
                    "k={k} at eps {}: {} components, {} extra{}",
                    rec.eps,
                    rec.placements.len(),
                    c.extra_components.len(),
                    if failed.is_empty() {
                        String::new()
                    } else {
                        format!(", failed: {}", failed.join(", "))
                    }
                ));
            }
            None => {
                pass = false;
                parts.push(format!("k={k}: no census"));
            }
        }
    }
    Verdict::new(name, pass, parts.join("; "))
}

fn courant(r: &ScenarioReport, exact: &[(usize, usize)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in &r.runs {
        for rec in run.records.iter().filter(|x| x.k > 0) {
            if rec.nodal_domain_count > rec.k + 1 {
                pass = false;
                parts.push(format!(
                    "k={} at eps {} has {} domains",
                    rec.k, rec.eps, rec.nodal_domain_count
                ));
            }
        }
    }
    for &(k, want) in exact {
        let got = smallest(r, k).map_or(0, |x| x.nodal_domain_count);
        pass &= got == want;
        parts.push(format!(
            "k={k}: {got} domains at the smallest eps (expected {want})"
        ));
    }
    Verdict::new("courant", pass, parts.join("; "))
}

fn profile_convergence(r: &ScenarioReport, k: usize) -> Verdict {
    let errs: Vec<f64> = r
        .series(k)
        .iter()
        .map(|x| x.profile.map_or(f64::NAN, |p| p.rel_l2_error))
        .collect();
    let tol = r.scenario.tolerances.profile_tol;
    let at = last_pre_floor(r, k).unwrap_or(errs.len().saturating_sub(1));
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let ok = errs.get(at).is_some_and(|&e| e <= tol);
    Verdict::new(
        "profile_convergence",
        ok && monotone,
        format!(
            "k={k}: rel L2 errors {} (monotone {monotone}, tol {tol} at sweep index {at})",
            fmt_list(&errs)
        ),
    )
}

fn multi_collar(r: &ScenarioReport, shift: usize, name: &str) -> Verdict {
    let l = r.scenario.l;
    let tol = r.scenario.tolerances.position_tol;
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=l {
        let target = r.targets[k];
        let Some(rec) = smallest(r, k + shift) else {
            pass = false;
            continue;
        };
        let rel = (rec.lambda - target).abs() / target;
        let label = r.scenario.collars[k - 1].label;
        let placed = rec.placements.iter().any(|p| {
            p.collar == Some(label) && p.closed && p.collar_mean.is_some_and(|m| m.abs() <= tol)
        });
        pass &= rel <= 0.08 && placed;
        parts.push(format!(
            "lambda_{} = {:.5} vs {:.5} (rel {:.4}), component in collar {label}: {placed}",
            k + shift,
            rec.lambda,
            target,
            rel
        ));
    }
    Verdict::new(name, pass, parts.join("; "))
}

fn morse(r: &ScenarioReport) -> Verdict {
    match smallest(r, 1).and_then(|x| x.morse.as_ref()) {
        Some(m) => {
            let c = &m.counts_by_index;
            let pass = c.first().is_some_and(|&x| x >= 1)
                && c.get(1).is_some_and(|&x| x >= 2)
                && m.degenerate == 0;
            Verdict::new(
                "morse_betti",
                pass,
                format!(
                    "counts {:?} in a domain of {} vertices, {} degenerate, Betti {:?} (whole manifold {:?})",
                    c, m.domain_vertices, m.degenerate, m.betti_reference, m.total_counts_by_index
                ),
            )
        }
        None => Verdict::new("morse_betti", false, "no Morse analysis".into()),
    }
}

fn flat_torus(r: &ScenarioReport) -> Verdict {
    let Some(run) = r.runs.first() else {
        return Verdict::new("flat_torus_spectrum", false, "no run".into());
    };
    let target = r.targets[1];
    let h = 1.0 / r.scenario.divisions as f64;
    let tol = (2.0 * std::f64::consts::PI * h).powi(2);
    let rel: Vec<f64> = run.lambdas[1..5]
        .iter()
        .map(|x| (x - target).abs() / target)
        .collect();
    let pass = run.lambdas[0].abs() < 1e-8 && rel.iter().all(|&e| e <= tol);
    Verdict::new(
        "flat_torus_spectrum",
        pass,
        format!(
            "lambda_1..4 rel errors {} vs (2 pi h)^2 = {tol:.4e}",
            fmt_list(&rel)
        ),
    )
}

pub(crate) fn scenario_verdicts(r: &ScenarioReport) -> Vec<Verdict> {
    let l = r.scenario.l;
    match r.scenario.name {
        ScenarioName::MainS3 => vec![
            guard(r),
            eigen_targets(r, &[(1, 0.05), (2, 0.08)]),
            convergence_order(r, 1, 0.4),
            sandwich(r, l.min(2)),
            census_at_smallest(r, "nodal_census", &(1..=l).collect::<Vec<_>>()),
            courant(r, &[(1, 2), (2, 3)]),
            profile_convergence(r, 1),
        ],
        ScenarioName::MainT3Nonseparating => {
            vec![guard(r), census_at_smallest(r, "torus_component", &[1])]
        }
        ScenarioName::MultiCollar => vec![
            guard(r),
            multi_collar(r, 0, "multi_collar_targets"),
            multi_collar(
                r,
                r.scenario.collars.len() - 1,
                "multi_collar_targets_shifted",
            ),
        ],
        ScenarioName::PayneBall => vec![guard(r), census_at_smallest(r, "payne_nodal_set", &[1])],
        ScenarioName::MorseHandlebody => vec![morse(r)],
        ScenarioName::FlatSanity2d => vec![flat_torus(r)],
    }
}
