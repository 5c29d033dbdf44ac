use std::path::{Path, PathBuf};

use fil::basis::QuadParams;
use fil::error::FilError;
use fil::interpolate::{parse_grid, TestFunction};
use fil::nodes::{EpsGenerator, Perturbation};
use fil::perturb_op::WeightScheme;
use fil::scalar::Precision;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run depends on. `out` and `jobs` do not affect results and
/// are left out of the hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub n_max: usize,
    /// Operator truncation; defaults to n_max.
    pub truncation: Option<usize>,
    pub weight: WeightScheme,
    pub eps: EpsGenerator,
    /// Frequency-side perturbation; defaults to eps.
    pub delta: Option<EpsGenerator>,
    /// "a:b:step"
    pub grid: String,
    /// Uniform jitter of the grid points, in units of the step.
    pub jitter: f64,
    pub seed: u64,
    pub quad: QuadParams,
    pub precision: Precision,
    pub function: TestFunction,
    /// Tolerance of the interpolation delta checks.
    pub tol: f64,
    pub neumann_tol: f64,
    pub neumann_terms: usize,
    /// Node sequence for `nodes`: "scaled:a" (x_n = a√n) or "file:PATH".
    pub sequence: Option<String>,
    pub count: usize,
    pub p: f64,
    pub q: f64,
    /// Upper index of the gap-functional window; 0 uses the whole sequence.
    pub window: usize,
    pub match_d: f64,
    pub match_c: f64,
    /// Decay-fit grid for `bounds`, "0:b:step".
    pub decay_grid: String,
    /// Circle radii for the growth estimates.
    pub radii: Vec<f64>,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            n_max: 16,
            truncation: None,
            weight: WeightScheme::Polynomial { s: 5.0 },
            eps: EpsGenerator::Zero,
            delta: None,
            grid: "-3:3:0.05".into(),
            jitter: 0.0,
            seed: 0,
            quad: QuadParams::default(),
            precision: Precision::Extended,
            function: TestFunction::Gaussian { a: 1.0 },
            tol: 1e-7,
            neumann_tol: 1e-15,
            neumann_terms: 1000,
            sequence: None,
            count: 400,
            p: 2.0,
            q: 2.0,
            window: 0,
            match_d: 4.0,
            match_c: 1.0,
            decay_grid: "0:20:0.05".into(),
            radii: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            out: PathBuf::from("fil-out"),
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, FilError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| FilError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or(self.n_max)
    }

    pub fn perturbation(&self) -> Perturbation {
        Perturbation { eps: self.eps.clone(), delta: self.delta.clone() }
    }

    /// Evaluation grid, jittered when `jitter` > 0.
    pub fn grid_points(&self) -> Result<Vec<f64>, FilError> {
        let mut g = parse_grid(&self.grid)?;
        if self.jitter > 0.0 && g.len() > 1 {
            let step = g[1] - g[0];
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for x in &mut g {
                *x += self.jitter * step * rng.random_range(-1.0..1.0);
            }
        }
        Ok(g)
    }

    /// Hex SHA-256 of the canonical JSON form, without `out` and `jobs`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.jobs = 0;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out = PathBuf::from("/elsewhere");
        b.jobs = 7;
        assert_eq!(a.hash(), b.hash());
        b.n_max = 13;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig::default();
        c.eps = EpsGenerator::Power { a: 0.01, alpha: 1.5 };
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
        let partial: RunConfig = serde_json::from_str(r#"{"n_max": 4}"#).unwrap();
        assert_eq!(partial.n_max, 4);
        assert!(serde_json::from_str::<RunConfig>(r#"{"nmax": 4}"#).is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let mut c = RunConfig { jitter: 0.3, seed: 9, ..RunConfig::default() };
        let a = c.grid_points().unwrap();
        assert_eq!(a, c.grid_points().unwrap());
        c.seed = 10;
        assert_ne!(a, c.grid_points().unwrap());
    }
}
