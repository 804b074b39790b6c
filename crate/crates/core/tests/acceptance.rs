//! Acceptance run: every criterion prints one PASS/FAIL line. Failing
//! criteria are reported, not asserted, so the build stays green; the
//! process only fails if a scenario cannot run at all.

use std::collections::HashMap;
use std::time::Instant;

use nodal_forge::lab::{
    cayley_menger, dense_agreement, flat_torus, run_scenario, sphere_convergence, Scenario,
    ScenarioName, ScenarioReport, Verdict,
};

fn find<'a>(r: &'a ScenarioReport, name: &str) -> Option<&'a Verdict> {
    r.verdicts.iter().find(|v| v.name == name)
}

fn all_of(id: &str, title: &str, parts: &[Option<&Verdict>]) -> String {
    let pass = parts.iter().all(|v| v.is_some_and(|v| v.pass));
    let detail: Vec<String> = parts
        .iter()
        .map(|v| match v {
            Some(v) => format!(
                "[{} {}] {}",
                v.name,
                if v.pass { "ok" } else { "failed" },
                v.detail
            ),
            None => "[missing verdict]".to_string(),
        })
        .collect();
    line(id, title, pass, &detail.join(" "))
}

fn line(id: &str, title: &str, pass: bool, detail: &str) -> String {
    format!(
        "{} {id:>3} {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    )
}

fn main() {
    let start = Instant::now();
    let names = [
        ScenarioName::MainS3,
        ScenarioName::MainT3Nonseparating,
        ScenarioName::MultiCollar,
        ScenarioName::PayneBall,
        ScenarioName::MorseHandlebody,
    ];
    let reports: HashMap<ScenarioName, Result<ScenarioReport, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|&n| {
                (
                    n,
                    s.spawn(move || run_scenario(&Scenario::builtin(n)).map_err(|e| e.to_string())),
                )
            })
            .collect();
        handles
            .into_iter()
            .map(|(n, h)| (n, h.join().expect("scenario thread")))
            .collect()
    });

    let mut lines = Vec::new();
    let unavailable = |id: &str,
                       title: &str,
                       n: ScenarioName,
                       lines: &mut Vec<String>|
     -> Option<ScenarioReport> {
        match &reports[&n] {
            Ok(r) => Some(r.clone()),
            Err(e) => {
                lines.push(line(id, title, false, &format!("{n} did not run: {e}")));
                None
            }
        }
    };

    if let Some(r) = unavailable("1", "eigenvalue targets", ScenarioName::MainS3, &mut lines) {
        let guard = find(&r, "simplicity_guard");
        let mut l1 = all_of(
            "1",
            "eigenvalue targets",
            &[guard, find(&r, "eigenvalue_targets")],
        );
        l1.push_str(&format!(
            " [runtime {:.1} s, {} cells]",
            r.total_seconds, r.cells
        ));
        lines.push(l1);
        lines.push(all_of(
            "2",
            "convergence order",
            &[find(&r, "convergence_order")],
        ));
        lines.push(all_of(
            "3",
            "min-max sandwich",
            &[find(&r, "min_max_sandwich")],
        ));
        lines.push(all_of(
            "4",
            "nodal census and Courant",
            &[find(&r, "nodal_census"), find(&r, "courant")],
        ));
        lines.push(all_of(
            "11",
            "profile convergence",
            &[find(&r, "profile_convergence")],
        ));
    }
    if let Some(r) = unavailable(
        "5",
        "non-separating torus component",
        ScenarioName::MainT3Nonseparating,
        &mut lines,
    ) {
        lines.push(all_of(
            "5",
            "non-separating torus component",
            &[find(&r, "simplicity_guard"), find(&r, "torus_component")],
        ));
    }
    if let Some(r) = unavailable(
        "6",
        "multi-collar targets",
        ScenarioName::MultiCollar,
        &mut lines,
    ) {
        lines.push(all_of(
            "6",
            "multi-collar targets",
            &[
                find(&r, "simplicity_guard"),
                find(&r, "multi_collar_targets"),
            ],
        ));
        lines.push(all_of(
            "6b",
            "multi-collar targets above the extra near-zero modes (supplementary)",
            &[find(&r, "multi_collar_targets_shifted")],
        ));
    }
    if let Some(r) = unavailable(
        "7",
        "interior nodal set in the ball",
        ScenarioName::PayneBall,
        &mut lines,
    ) {
        lines.push(all_of(
            "7",
            "interior nodal set in the ball",
            &[find(&r, "simplicity_guard"), find(&r, "payne_nodal_set")],
        ));
    }
    if let Some(r) = unavailable(
        "8",
        "critical points in the handlebody domain",
        ScenarioName::MorseHandlebody,
        &mut lines,
    ) {
        lines.push(all_of(
            "8",
            "critical points in the handlebody domain",
            &[find(&r, "morse_betti")],
        ));
    }

    match dense_agreement(6, 1e-8) {
        Ok(v) => lines.push(all_of("9", "iterative vs dense eigenvalues", &[Some(&v)])),
        Err(e) => lines.push(line(
            "9",
            "iterative vs dense eigenvalues",
            false,
            &e.to_string(),
        )),
    }
    let fem: Vec<Result<Verdict, String>> = vec![
        sphere_convergence(&[2, 3, 4, 5], 1.8).map_err(|e| e.to_string()),
        flat_torus(2, &[8, 16, 32, 64], 1.8).map_err(|e| e.to_string()),
        flat_torus(3, &[6, 12, 24], 1.8).map_err(|e| e.to_string()),
        Ok(cayley_menger()),
    ];
    match fem.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(vs) => lines.push(all_of(
            "10",
            "FEM verification",
            &vs.iter().map(Some).collect::<Vec<_>>(),
        )),
        Err(e) => lines.push(line("10", "FEM verification", false, &e)),
    }

    lines.sort_by_key(|l| {
        let id = l[5..8].trim();
        let num: String = id.chars().take_while(|c| c.is_ascii_digit()).collect();
        (num.parse::<u32>().unwrap_or(99), id.to_string())
    });
    println!("acceptance criteria");
    for l in &lines {
        println!("{l}");
    }
    let passed = lines.iter().filter(|l| l.starts_with("PASS")).count();
    println!(
        "{passed}/{} lines pass, {:.1} s total",
        lines.len(),
        start.elapsed().as_secs_f64()
    );
}
