use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchSource {
    Axis,
    Planar,
    Both,
}

/// Weights of the heuristic profile prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorWeights {
    pub proximity: f64,
    pub area: f64,
    pub compactness: f64,
    pub provenance: f64,
}

impl Default for PriorWeights {
    fn default() -> Self {
        PriorWeights {
            proximity: 0.5,
            area: 0.2,
            compactness: 0.2,
            provenance: 0.1,
        }
    }
}

/// Every knob of the reconstruction. All fields are optional in JSON config
/// files; missing fields take the defaults below. Lengths are in normalized
/// units (the target's longest bounding-box side is 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub seed: u64,

    // sketch planes
    pub sketch_source: SketchSource,
    pub slice_offset: f64,
    pub n_slices: usize,
    pub cluster_angle_deg: f64,
    /// Fraction of total surface area a planar cluster must reach.
    pub min_cluster_area: f64,
    pub cluster_offset_tol: f64,

    // loops and primitives
    pub loop_resample_n: usize,
    pub min_loop_area: f64,
    pub min_loop_length: f64,
    /// Primitive fit tolerance relative to loop diameter.
    pub fit_tolerance: f64,

    // prior
    pub use_prior: bool,
    pub prior_budget: usize,
    pub prior_weights: PriorWeights,

    // candidate sweeps
    pub cd_threshold: f64,
    pub translation_step: f64,
    /// Sweep samples on each side of the sketch plane.
    pub sweep_samples: usize,
    /// Minimum finite-difference slope of the cap error that marks the
    /// onset of overshoot after a stable end.
    pub slope_threshold: f64,
    pub target_samples: usize,
    pub candidate_samples: usize,

    // assembly
    pub iou_resolution: usize,
    pub residual_threshold: f64,
    pub max_residual_iters: usize,

    // finishing
    pub finishing: bool,
    pub finishing_min_turn_deg: f64,
    pub finishing_probe: f64,
    pub finishing_evals: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            seed: 0,
            sketch_source: SketchSource::Both,
            slice_offset: 0.05,
            n_slices: 5,
            cluster_angle_deg: 5.0,
            min_cluster_area: 0.01,
            cluster_offset_tol: 0.02,
            loop_resample_n: 128,
            min_loop_area: 1e-4,
            min_loop_length: 1e-2,
            fit_tolerance: 0.005,
            use_prior: true,
            prior_budget: 100,
            prior_weights: PriorWeights::default(),
            cd_threshold: 0.01,
            translation_step: 0.01,
            sweep_samples: 64,
            slope_threshold: 1e-4,
            target_samples: 8192,
            candidate_samples: 2048,
            iou_resolution: 64,
            residual_threshold: 0.02,
            max_residual_iters: 3,
            finishing: true,
            finishing_min_turn_deg: 30.0,
            finishing_probe: 0.05,
            finishing_evals: 20,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("slice_offset", self.slice_offset),
            ("cluster_angle_deg", self.cluster_angle_deg),
            ("min_cluster_area", self.min_cluster_area),
            ("cluster_offset_tol", self.cluster_offset_tol),
            ("min_loop_area", self.min_loop_area),
            ("min_loop_length", self.min_loop_length),
            ("fit_tolerance", self.fit_tolerance),
            ("cd_threshold", self.cd_threshold),
            ("translation_step", self.translation_step),
            ("slope_threshold", self.slope_threshold),
            ("residual_threshold", self.residual_threshold),
            ("finishing_probe", self.finishing_probe),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be a positive number")));
            }
        }
        if self.n_slices == 0 {
            return Err(Error::Config("n_slices must be at least 1".into()));
        }
        if self.loop_resample_n < 8 {
            return Err(Error::Config("loop_resample_n must be at least 8".into()));
        }
        if self.sweep_samples < 8 {
            return Err(Error::Config("sweep_samples must be at least 8".into()));
        }
        if self.iou_resolution < 16 {
            return Err(Error::Config("iou_resolution must be at least 16".into()));
        }
        if self.prior_budget == 0 {
            return Err(Error::Config("prior_budget must be at least 1".into()));
        }
        if self.target_samples == 0 || self.candidate_samples == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FitConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_gives_defaults() {
        assert_eq!(FitConfig::from_json("{}").unwrap(), FitConfig::default());
    }

    #[test]
    fn partial_json_overrides() {
        let cfg = FitConfig::from_json(r#"{"n_slices": 3, "sketch_source": "axis"}"#).unwrap();
        assert_eq!(cfg.n_slices, 3);
        assert_eq!(cfg.sketch_source, SketchSource::Axis);
        assert_eq!(cfg.cd_threshold, 0.01);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(FitConfig::from_json(r#"{"cd_threshold": -1}"#).is_err());
        assert!(FitConfig::from_json(r#"{"sketch_source": "both_ways"}"#).is_err());
        assert!(FitConfig::from_json(r#"{"unknown": 1}"#).is_err());
    }
}
