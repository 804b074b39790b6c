use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::{validate_collar_family, CollarSpec, HandlebodySpec, SigmaModel};
use crate::nodal::copy_positions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    MainS3,
    MainT3Nonseparating,
    MultiCollar,
    PayneBall,
    MorseHandlebody,
    FlatSanity2d,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::MainS3,
        ScenarioName::MainT3Nonseparating,
        ScenarioName::MultiCollar,
        ScenarioName::PayneBall,
        ScenarioName::MorseHandlebody,
        ScenarioName::FlatSanity2d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::MainS3 => "main_s3",
            ScenarioName::MainT3Nonseparating => "main_t3_nonseparating",
            ScenarioName::MultiCollar => "multi_collar",
            ScenarioName::PayneBall => "payne_ball",
            ScenarioName::MorseHandlebody => "morse_handlebody",
            ScenarioName::FlatSanity2d => "flat_sanity_2d",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Factor `eps` on every exterior cell.
    Degenerate,
    /// Polynomial transition of width `delta` from the collar.
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Backward-error tolerance of the eigensolver.
    pub eig_tol: f64,
    /// Largest relative `L^2` profile error accepted at the smallest eps.
    pub profile_tol: f64,
    /// Collar-coordinate tolerance of the census.
    pub position_tol: f64,
    /// Smallest relative gap accepted by the simplicity guard.
    pub gap_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-8,
            profile_tol: 0.1,
            position_tol: 0.1,
            gap_min: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub n: usize,
    /// Number of prescribed eigenfunctions.
    pub l: usize,
    pub collars: Vec<CollarSpec>,
    /// Strictly decreasing, in `(0, 1)`.
    pub eps_list: Vec<f64>,
    pub metric: MetricMode,
    /// Smoothing width; one collar layer when absent.
    pub delta: Option<f64>,
    pub smoothing_order: u32,
    /// Cross-section refinement level (icosphere or cross-polytope level).
    pub refinement: usize,
    /// Grid divisions per axis for the torus scenarios.
    pub divisions: usize,
    /// Exterior length between consecutive collars.
    pub gap: f64,
    pub handlebody: Option<HandlebodySpec>,
    /// Betti numbers of the domain checked by the Morse count; empty
    /// disables the Morse analysis.
    pub betti: Vec<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Built-in configuration for `name`.
    pub fn builtin(name: ScenarioName) -> Self {
        let eps_list = vec![0.2, 0.1, 0.05, 0.02];
        let base = Self {
            name,
            n: 3,
            l: 2,
            collars: Vec::new(),
            eps_list,
            metric: MetricMode::Degenerate,
            delta: None,
            smoothing_order: 3,
            refinement: 2,
            divisions: 0,
            gap: 0.0,
            handlebody: None,
            betti: Vec::new(),
            seed: 1,
            tolerances: Tolerances::default(),
        };
        match name {
            ScenarioName::MainS3 => Self {
                collars: vec![CollarSpec::new(SigmaModel::Sphere2, 0.4, 30)],
                refinement: 3,
                ..base
            },
            ScenarioName::MainT3Nonseparating => Self {
                l: 1,
                collars: vec![CollarSpec::new(SigmaModel::Torus2, 0.3, 16)],
                divisions: 24,
                ..base
            },
            ScenarioName::MultiCollar => Self {
                collars: vec![
                    CollarSpec::new(SigmaModel::Sphere2, 0.4, 16),
                    CollarSpec::new(SigmaModel::Sphere2, 0.4, 13)
                        .with_gamma(0.8)
                        .with_label(1),
                ],
                eps_list: vec![0.2, 0.1, 0.05, 0.02, 0.01, 0.005],
                gap: 0.5,
                ..base
            },
            ScenarioName::PayneBall => Self {
                l: 1,
                collars: vec![CollarSpec::new(SigmaModel::Sphere2, 0.5, 16)],
                ..base
            },
            ScenarioName::MorseHandlebody => {
                let hb = HandlebodySpec::genus_two();
                let layers = (2.0 * hb.half_width / hb.spacing).round() as usize;
                Self {
                    l: 1,
                    collars: vec![CollarSpec::new(
                        SigmaModel::Custom,
                        hb.tube_radius,
                        layers.max(4),
                    )],
                    eps_list: vec![0.2, 0.1, 0.05],
                    handlebody: Some(hb),
                    betti: vec![1, 2, 0, 0],
                    ..base
                }
            }
            ScenarioName::FlatSanity2d => Self {
                n: 2,
                l: 1,
                eps_list: Vec::new(),
                divisions: 32,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n == 2 || self.n == 3) {
            return Err(Error::Config(format!("n must be 2 or 3, got {}", self.n)));
        }
        if self.l == 0 {
            return Err(Error::Config("l must be at least 1".into()));
        }
        for w in self.eps_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Config("eps_list must be strictly decreasing".into()));
            }
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Config("eps values must lie in (0, 1)".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(Error::Config("delta must be positive".into()));
            }
        }
        let t = &self.tolerances;
        if !(t.eig_tol > 0.0 && t.profile_tol > 0.0 && t.position_tol > 0.0 && t.gap_min >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let need_collar = self.name != ScenarioName::FlatSanity2d;
        if need_collar {
            if self.collars.is_empty() {
                return Err(Error::Config(format!("{} needs a collar", self.name)));
            }
            if self.eps_list.is_empty() {
                return Err(Error::Config("eps_list is empty".into()));
            }
        } else if !self.collars.is_empty() {
            return Err(Error::Config("flat_sanity_2d takes no collar".into()));
        }
        if self.name == ScenarioName::MultiCollar {
            if self.collars.len() < 2 {
                return Err(Error::Config(
                    "multi_collar needs at least two collars".into(),
                ));
            }
            validate_collar_family(&self.collars)?;
            if self.l > self.collars.len() {
                return Err(Error::Config(
                    "multi_collar needs one collar per prescribed eigenvalue".into(),
                ));
            }
        } else if self.collars.len() > 1 {
            return Err(Error::Config(format!(
                "{} takes a single collar",
                self.name
            )));
        }
        let l_check = if self.name == ScenarioName::MultiCollar {
            1
        } else {
            self.l
        };
        for c in &self.collars {
            c.validate(l_check)?;
        }
        if self.name == ScenarioName::MorseHandlebody {
            if self.handlebody.is_none() {
                return Err(Error::Config(
                    "morse_handlebody needs a handlebody spec".into(),
                ));
            }
            if !self.betti.is_empty() && self.betti.len() != self.n + 1 {
                return Err(Error::Config(format!("betti needs {} entries", self.n + 1)));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Smoothing width: the configured `delta` or one collar layer.
    pub fn smoothing_delta(&self) -> f64 {
        self.delta
            .unwrap_or_else(|| self.collars.first().map_or(0.1, CollarSpec::layer_spacing))
    }

    /// Parses a TOML configuration; fields left out take the values of the
    /// built-in scenario named in `name`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.into_scenario()
    }
}

/// TOML form of [`Scenario`]. Only `name` is required.
///
/// ```toml
/// name = "main_s3"          # built-in scenario supplying the defaults
/// n = 3                     # manifold dimension, 2 or 3
/// l = 2                     # prescribed eigenfunctions
/// eps_list = [0.2, 0.1]     # strictly decreasing, in (0, 1)
/// metric = "degenerate"     # or "smoothed"
/// delta = 0.1               # smoothing width
/// smoothing_order = 3       # vanishing derivatives at the junctions
/// refinement = 2            # cross-section refinement
/// divisions = 24            # torus grid divisions per axis
/// gap = 0.5                 # exterior length between collars
/// betti = [1, 2, 0, 0]      # Morse reference, empty to disable
/// seed = 1
///
/// [[collars]]               # replaces the built-in collar list
/// sigma_model = "sphere2"   # circle | sphere2 | torus2 | custom
/// r = 0.4
/// gamma = 1.0
/// layers = 16
/// label = 0
///
/// [tolerances]
/// eig_tol = 1e-8
/// profile_tol = 0.1
/// position_tol = 0.1
/// gap_min = 0.05
///
/// [handlebody]              # morse_handlebody only
/// periods = [4.2, 2.8, 1.8]
/// spacing = 0.1
/// circles = [[1.31, 1.41, 0.93, 0.62], [2.89, 1.43, 0.93, 0.62]]
/// tube_radius = 0.3
/// half_width = 0.2
/// tangential_scale = 0.3
/// ```
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub collars: Option<Vec<CollarSpec>>,
    pub eps_list: Option<Vec<f64>>,
    pub metric: Option<MetricMode>,
    pub delta: Option<f64>,
    pub smoothing_order: Option<u32>,
    pub refinement: Option<usize>,
    pub divisions: Option<usize>,
    pub gap: Option<f64>,
    pub handlebody: Option<HandlebodySpec>,
    pub betti: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub tolerances: Option<Tolerances>,
}

impl ScenarioConfig {
    pub fn into_scenario(self) -> Result<Scenario> {
        let mut sc = Scenario::builtin(self.name.parse()?);
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { sc.$field = v; })*
            };
        }
        take!(
            n,
            l,
            collars,
            eps_list,
            metric,
            smoothing_order,
            refinement,
            divisions,
            gap,
            betti,
            seed,
            tolerances
        );
        if self.delta.is_some() {
            sc.delta = self.delta;
        }
        if self.handlebody.is_some() {
            sc.handlebody = self.handlebody;
        }
        sc.validate()?;
        Ok(sc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannReference {
    /// `mu_k = k^2 pi^2 / (4 Gamma^2)` for `k = 0..=l`.
    pub mu: Vec<f64>,
    /// Zeros of `cos(k pi (x + 1) / 2)` in collar units, for `k = 0..=l`.
    pub positions: Vec<Vec<f64>>,
}

/// Neumann eigenvalues and nodal positions of the collar `(-1, 1)` with
/// stretch `Gamma`.
pub fn neumann_reference(collar: &CollarSpec, l: usize) -> NeumannReference {
    let g2 = collar.gamma * collar.gamma;
    NeumannReference {
        mu: (0..=l)
            .map(|k| (k * k) as f64 * PI * PI / (4.0 * g2))
            .collect(),
        positions: (0..=l).map(copy_positions).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let c = CollarSpec::new(SigmaModel::Sphere2, 0.4, 16);
        let r = neumann_reference(&c, 2);
        assert!((r.mu[1] - 2.467_401_100_272_34).abs() < 1e-12);
        assert!((r.mu[2] - 9.869_604_401_089_36).abs() < 1e-12);
        assert_eq!(r.positions[1], vec![0.0]);
        assert_eq!(r.positions[2], vec![-0.5, 0.5]);
        let r = neumann_reference(&c.with_gamma(0.8), 1);
        assert!((r.mu[1] - 3.855_314_219_175_53).abs() < 1e-9);
    }

    #[test]
    fn builtins_validate() {
        for name in ScenarioName::ALL {
            Scenario::builtin(name).validate().unwrap();
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
    }

    #[test]
    fn toml_overrides() {
        let sc = Scenario::from_toml("name = \"main_s3\"\neps_list = [0.3, 0.1]\nseed = 9\n[tolerances]\neig_tol = 1e-9\nprofile_tol = 0.2\nposition_tol = 0.1\ngap_min = 0.05\n").unwrap();
        assert_eq!(sc.eps_list, vec![0.3, 0.1]);
        assert_eq!(sc.seed, 9);
        assert_eq!(sc.tolerances.eig_tol, 1e-9);
        assert_eq!(sc.collars, Scenario::builtin(ScenarioName::MainS3).collars);
        assert!(Scenario::from_toml("name = \"main_s3\"\neps_list = [0.1, 0.2]").is_err());
        assert!(Scenario::from_toml("name = \"nope\"").is_err());
        assert!(Scenario::from_toml("name = \"main_s3\"\nbogus = 1").is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = Scenario::builtin(ScenarioName::MainS3);
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 2;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn constraint_on_r() {
        let mut sc = Scenario::builtin(ScenarioName::MainS3);
        sc.collars[0].r = 0.5;
        assert!(sc.validate().is_err());
    }
}
