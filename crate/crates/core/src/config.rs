//! Analysis parameters shared by the frequency, blow-up, and strata
//! machinery. Slack constants were fixed once by a convergence study on
//! the closed-form catalog and live here rather than inline.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Geometric ratio between consecutive profile radii.
    pub radius_ratio: f64,
    /// Smallest profile radius, in cells.
    pub min_radius_cells: f64,
    /// Radius r* = (this) * h at which the frequency is read off.
    pub kappa_radius_cells: f64,
    /// Half-width, in log r, of the centered window used for the
    /// logarithmic derivative of H.
    pub log_window: f64,
    /// Monotonicity slack for phi: max(abs, cells * h / r).
    pub mono_slack_abs: f64,
    pub mono_slack_cells: f64,
    /// Exponent slack on both sides of the H-ratio growth bounds.
    pub growth_slack_exponent: f64,
    /// H below this multiple of the field scale marks a profile
    /// degenerate.
    pub h_floor: f64,
    /// Number of smallest radii entering the secondary linear fit of phi.
    pub kappa_fit_radii: usize,
    /// Disagreement between phi(r*) and the fit intercept beyond which
    /// the profile is flagged.
    pub kappa_fit_gate: f64,

    /// Sphere-fit radii for the quadratic blow-up, in cells.
    pub quad_fit_cells: Vec<f64>,
    /// Sphere-fit radii for the cubic fit, in cells.
    pub cubic_fit_cells: Vec<f64>,
    /// Second blow-up label gates: ordinary at or above, anomalous
    /// within [anomalous_lo, ordinary).
    pub ordinary_threshold: f64,
    pub anomalous_lo: f64,

    /// Frequency bands for stratification.
    pub regular_band: [f64; 2],
    pub quadratic_band: [f64; 2],
    pub cubic_band: [f64; 2],
    /// Gamma_{>=7/2}: kappa at least this, and within seven_half_dist of
    /// the admissible set.
    pub seven_half_min: f64,
    pub seven_half_dist: f64,
    /// Gamma_* candidates: kappa above this and farther than star_dist
    /// from the admissible set.
    pub star_min: f64,
    pub star_dist: f64,
    /// Minimum distance from the box boundary for classification.
    pub clearance_min: f64,

    /// Cleaning-radius cap and floor (floor in cells).
    pub cleaning_r_cap: f64,
    pub cleaning_r_floor_cells: f64,

    /// Solver defaults used when analyses need a contact threshold.
    pub solver_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            radius_ratio: 1.1,
            min_radius_cells: 4.0,
            kappa_radius_cells: 6.0,
            log_window: 0.05,
            mono_slack_abs: 0.02,
            mono_slack_cells: 5.0,
            growth_slack_exponent: 0.05,
            h_floor: 1e-30,
            kappa_fit_radii: 5,
            kappa_fit_gate: 0.1,
            quad_fit_cells: vec![8.0, 12.0, 16.0],
            cubic_fit_cells: vec![8.0, 12.0, 16.0, 20.0, 24.0],
            ordinary_threshold: 2.5,
            anomalous_lo: 1.9,
            regular_band: [1.4, 1.6],
            quadratic_band: [1.9, 2.1],
            cubic_band: [2.9, 3.1],
            seven_half_min: 3.4,
            seven_half_dist: 0.1,
            star_min: 1.6,
            star_dist: 0.15,
            clearance_min: 0.25,
            cleaning_r_cap: 0.4,
            cleaning_r_floor_cells: 4.0,
            solver_tol: crate::solver::DEFAULT_TOL,
        }
    }
}

impl AnalysisConfig {
    /// Monotonicity slack at radius r on a grid of spacing h.
    pub fn mono_slack(&self, h: f64, r: f64) -> f64 {
        self.mono_slack_abs.max(self.mono_slack_cells * h / r)
    }

    pub fn contact_threshold(&self, h: f64) -> f64 {
        (10.0 * self.solver_tol).max(h * h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_and_slack() {
        let cfg = AnalysisConfig::default();
        let s = serde_json::to_string(&cfg).unwrap();
        let back: AnalysisConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back.radius_ratio, cfg.radius_ratio);
        // Slack is 0.02 at large radii, 5h/r at small ones.
        assert_eq!(cfg.mono_slack(0.01, 1.0), 0.05);
        assert_eq!(cfg.mono_slack(0.01, 5.0), 0.02);
        // Partial configs fill in defaults.
        let partial: AnalysisConfig = serde_json::from_str(r#"{"log_window":0.07}"#).unwrap();
        assert_eq!(partial.log_window, 0.07);
        assert_eq!(partial.radius_ratio, cfg.radius_ratio);
    }
}
