use serde::{Deserialize, Serialize};

use super::NodalComplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusMode {
    /// The zero set must consist of exactly the expected components.
    Exact,
    /// The expected components must be present; others are reported.
    Containment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    /// Expected collar positions, one per component.
    pub positions: Vec<f64>,
    /// Euler characteristic of every expected component.
    pub euler_char: i64,
    pub position_tol: f64,
    pub mode: CensusMode,
    /// Matched components must be closed, orientable and away from `dM`.
    #[serde(default)]
    pub require_closed: bool,
}

impl Expectation {
    /// Components at `(1 + 2i - k) / k`, `i = 0..k`.
    pub fn copies(k: usize, euler_char: i64, position_tol: f64, mode: CensusMode) -> Self {
        Self {
            positions: copy_positions(k),
            euler_char,
            position_tol,
            mode,
            require_closed: true,
        }
    }
}

/// Collar positions `(1 + 2i - k) / k` of the zeros of `cos(k pi (x + 1) / 2)`.
pub fn copy_positions(k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| (1.0 + 2.0 * i as f64 - k as f64) / k as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub pass: bool,
    pub checks: Vec<CensusCheck>,
    /// Component ids matched to the expected positions, in order.
    pub matched: Vec<Option<usize>>,
    /// Components that matched nothing.
    pub extra_components: Vec<usize>,
}

/// Compares the components of `nc` with the expectation.
pub fn component_census(nc: &NodalComplex, expected: &Expectation) -> CensusReport {
    let mut checks = Vec::new();
    let mut taken = vec![false; nc.components.len()];
    let mut matched = Vec::with_capacity(expected.positions.len());
    for &target in &expected.positions {
        let best = nc
            .components
            .iter()
            .enumerate()
            .filter(|(i, c)| !taken[*i] && c.inside_collar)
            .filter_map(|(i, c)| c.collar_mean.map(|m| (i, (m - target).abs())))
            .filter(|&(_, d)| d <= expected.position_tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = best {
            taken[i] = true;
        }
        matched.push(best.map(|(i, _)| i));
    }
    let extra: Vec<usize> = (0..nc.components.len()).filter(|&i| !taken[i]).collect();

    if expected.mode == CensusMode::Exact {
        checks.push(CensusCheck {
            name: "component_count".into(),
            pass: nc.components.len() == expected.positions.len(),
            detail: format!(
                "{} found, {} expected",
                nc.components.len(),
                expected.positions.len()
            ),
        });
    }
    for (target, m) in expected.positions.iter().zip(&matched) {
        let (pass, detail) = match m {
            Some(i) => {
                let c = &nc.components[*i];
                (
                    true,
                    format!(
                        "component {i} at x = {:.4}",
                        c.collar_mean.unwrap_or(f64::NAN)
                    ),
                )
            }
            None => (false, "no component within tolerance".into()),
        };
        checks.push(CensusCheck {
            name: format!("position {target:+.4}"),
            pass,
            detail,
        });
        if let Some(i) = m {
            let c = &nc.components[*i];
            checks.push(CensusCheck {
                name: format!("euler_char at {target:+.4}"),
                pass: c.euler_char == expected.euler_char,
                detail: format!("chi = {}, expected {}", c.euler_char, expected.euler_char),
            });
            if expected.require_closed {
                checks.push(CensusCheck {
                    name: format!("closed at {target:+.4}"),
                    pass: c.closed && c.orientable && !c.touches_boundary,
                    detail: format!(
                        "closed = {}, orientable = {}, touches_boundary = {}",
                        c.closed, c.orientable, c.touches_boundary
                    ),
                });
            }
        }
    }
    CensusReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
        matched,
        extra_components: extra,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_positions_formula() {
        assert_eq!(copy_positions(1), vec![0.0]);
        assert_eq!(copy_positions(2), vec![-0.5, 0.5]);
        let p3 = copy_positions(3);
        assert!((p3[0] + 2.0 / 3.0).abs() < 1e-15 && p3[1].abs() < 1e-15);
    }

    #[test]
    fn empty_complex_fails_count() {
        let nc = NodalComplex {
            dim: 3,
            points: Vec::new(),
            pieces: Vec::new(),
            components: Vec::new(),
        };
        let r = component_census(&nc, &Expectation::copies(1, 2, 0.1, CensusMode::Exact));
        assert!(!r.pass);
        assert!(r
            .checks
            .iter()
            .any(|c| c.name == "component_count" && !c.pass));
    }
}
