//! Almgren frequency function machinery.
//!
//! For a field w on B_1 let H(r) = r^{-n} int_{dB_r} w^2 and
//! D(r) = r^{1-n} int_{B_r} |grad w|^2, and phi(r) = D(r)/H(r). For
//! solutions, integration by parts gives H'(r)/H(r) = (2/r) phi(r)
//! exactly (the w Delta w term vanishes pointwise), so phi is computed
//! here as a centered logarithmic derivative of H over a short window
//! in log r:
//!
//!   phi(r) ~ [ln H(r e^l) - ln H(r e^-l)] / (4 l).
//!
//! This is an average of the true phi over the window, so it inherits
//! monotonicity, is exact on homogeneous fields, and avoids the O(h/r)
//! noise of cell-counted volume quadrature at small radii. The reported
//! D is phi * H, the Green-identity value of the ball integral; the
//! direct volume quadrature in `geometry` serves as an independent
//! cross-check (see tests).
//!
//! For differences w = u - p with p a quadratic profile, Delta w is a
//! measure on the contact set and H'(r)/H(r) = (2/r)(phi(r) + F(r))
//! with F(r) = [r^{1-n} int_{B_r} w Delta w] / [r^{-n} int_{dB_r} w^2].
//! F is evaluated from the discrete Laplacian of u at contact nodes
//! (w Delta w = -p Delta u there) and subtracted. The difference is
//! sampled at the nodes before interpolating, so the smooth part of p
//! cancels exactly where it is largest.

use crate::catalog::QuadraticProfile;
use crate::config::AnalysisConfig;
use crate::error::{CoreError, Result};
use crate::geometry::{sphere_point_count, sphere_quadrature_fn, Point, ScalarField};

/// Sampled r -> (H, D, phi, F) curves plus the extrapolated frequency.
#[derive(Clone, Debug)]
pub struct FrequencyProfile {
    pub center: Point,
    pub radii: Vec<f64>,
    pub h_vals: Vec<f64>,
    pub d_vals: Vec<f64>,
    pub phi: Vec<f64>,
    /// Contact-measure correction, present only for difference profiles.
    pub f_vals: Option<Vec<f64>>,
    /// Frequency read off at r* (or the small-radius fit intercept when
    /// the two agree).
    pub kappa_hat: Option<f64>,
    /// Intercept of the linear-in-r fit of phi over the smallest radii.
    pub kappa_fit: Option<f64>,
    /// Monotonicity respected and H above the degeneracy floor.
    pub reliable: bool,
    /// Whether phi(r*) and the fit intercept disagreed beyond the gate.
    pub kappa_flagged: bool,
    pub mono_violations: usize,
}

impl FrequencyProfile {
    pub fn phi_at_nearest(&self, r: f64) -> Option<(f64, f64)> {
        let idx = self
            .radii
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - r).abs().partial_cmp(&(b.1 - r).abs()).expect("finite radii"))?
            .0;
        Some((self.radii[idx], self.phi[idx]))
    }
}

/// Node-exact difference u - p, as a field on the same grid.
pub fn difference_field(u: &ScalarField, p: &QuadraticProfile) -> ScalarField {
    let g = u.grid();
    let mut w = u.clone();
    for iz in 0..g.vertical_nodes() {
        for iy in 0..g.ny() {
            for ix in 0..g.nodes() {
                let idx = g.index(ix, iy, iz);
                w.values_mut()[idx] -= p.evaluate(g.node_point(ix, iy, iz));
            }
        }
    }
    w
}

struct ProfileJob<'a> {
    field: &'a ScalarField,
    center: Point,
    /// (distance to center, w Delta w cell mass) per contact node,
    /// sorted by distance; empty for bare fields.
    contact_terms: Vec<(f64, f64)>,
}

impl ProfileJob<'_> {
    /// Raw surface integral of the squared value at radius r.
    fn h_raw(&self, r: f64) -> f64 {
        let g = self.field.grid();
        sphere_quadrature_fn(
            g.thin_dim(),
            self.center,
            r,
            sphere_point_count(r, g.spacing()),
            |x| {
                let v = self.field.interpolate_unchecked(x);
                v * v
            },
        )
    }

    /// int_{B_r} w Delta w, from the contact-node prefix sums.
    fn w_laplacian_mass(&self, r: f64) -> f64 {
        let end = self.contact_terms.partition_point(|(d, _)| *d <= r);
        self.contact_terms[..end].iter().map(|(_, m)| m).sum()
    }
}

/// Frequency profile of a solved or closed-form sampled field about a
/// center, out to r_max.
pub fn frequency_profile(
    field: &ScalarField,
    center: Point,
    r_max: f64,
    cfg: &AnalysisConfig,
) -> Result<FrequencyProfile> {
    let job = ProfileJob { field, center, contact_terms: Vec::new() };
    build_profile(job, r_max, cfg, false)
}

/// Frequency profile of w = u - p with the F(r) contact correction.
pub fn w_frequency_profile(
    u: &ScalarField,
    p: &QuadraticProfile,
    center: Point,
    r_max: f64,
    cfg: &AnalysisConfig,
) -> Result<FrequencyProfile> {
    let w = difference_field(u, p);
    let contact_terms = contact_measure_terms(u, p, center, cfg);
    let job = ProfileJob { field: &w, center, contact_terms };
    build_profile(job, r_max, cfg, true)
}

fn contact_measure_terms(
    u: &ScalarField,
    p: &QuadraticProfile,
    center: Point,
    cfg: &AnalysisConfig,
) -> Vec<(f64, f64)> {
    let g = u.grid();
    let h = g.spacing();
    let threshold = cfg.contact_threshold(h);
    let cell_measure = h.powi(g.thin_dim() as i32 + 1);
    let mut terms = Vec::new();
    for iy in 0..g.ny() {
        for ix in 0..g.nodes() {
            let boundary =
                ix == 0 || ix + 1 == g.nodes() || (g.thin_dim() == 2 && (iy == 0 || iy + 1 == g.ny()));
            if boundary {
                continue;
            }
            if u.value(ix, iy, 0) > threshold {
                continue;
            }
            let node = g.node_point(ix, iy, 0);
            let lap = crate::solver::reflected_thin_laplacian(&g, u.values(), ix, iy);
            let d = dist(node, center);
            // w Delta w = -p Delta u on the contact set.
            terms.push((d, -p.evaluate(node) * lap * cell_measure));
        }
    }
    terms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
    terms
}

fn dist(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn build_profile(
    job: ProfileJob<'_>,
    r_max: f64,
    cfg: &AnalysisConfig,
    with_f: bool,
) -> Result<FrequencyProfile> {
    let g = job.field.grid();
    let h = g.spacing();
    let n = g.thin_dim() as i32;
    let r_min = cfg.min_radius_cells * h;
    let lambda = cfg.log_window;
    g.check_ball(job.center, r_min)?;
    g.check_ball(job.center, r_max * lambda.exp())
        .map_err(|_| CoreError::BallExitsBox { center: job.center, r: r_max })?;

    let mut radii = Vec::new();
    let mut r = r_min;
    while r <= r_max * (1.0 + 1e-12) {
        radii.push(r);
        r *= cfg.radius_ratio;
    }
    if radii.len() < 3 {
        return Err(CoreError::Precondition(format!(
            "radius range [{r_min:.4}, {r_max:.4}] leaves fewer than 3 profile radii"
        )));
    }

    let scale = job.field.max_abs();
    let floor = cfg.h_floor * scale * scale;

    let mut h_vals = Vec::with_capacity(radii.len());
    let mut d_vals = Vec::with_capacity(radii.len());
    let mut phi = Vec::with_capacity(radii.len());
    let mut f_vals = Vec::with_capacity(radii.len());
    let mut degenerate = false;

    for &r in &radii {
        let (h_r, phi_r, f_r) = phi_at(&job, r, n, lambda, with_f);
        if !h_r.is_finite() || h_r <= floor {
            degenerate = true;
        }
        h_vals.push(h_r);
        phi.push(phi_r);
        d_vals.push(phi_r * h_r);
        f_vals.push(f_r);
    }

    if degenerate {
        return Ok(FrequencyProfile {
            center: job.center,
            radii,
            h_vals,
            d_vals,
            phi,
            f_vals: with_f.then_some(f_vals),
            kappa_hat: None,
            kappa_fit: None,
            reliable: false,
            kappa_flagged: false,
            mono_violations: 0,
        });
    }

    let mut mono_violations = 0;
    for j in 0..phi.len() - 1 {
        if phi[j + 1] < phi[j] - cfg.mono_slack(h, radii[j]) {
            mono_violations += 1;
        }
    }

    // kappa extrapolation: phi at r* = kappa_radius_cells * h, plus a
    // linear-in-r fit over the smallest radii; the intercept wins when
    // the two agree within the gate.
    let r_star = (cfg.kappa_radius_cells * h).min(r_max / lambda.exp());
    let (_, phi_star, _) = phi_at(&job, r_star, n, lambda, with_f);
    let m = cfg.kappa_fit_radii.min(radii.len());
    let kappa_fit = linear_fit_intercept(&radii[..m], &phi[..m]);
    let kappa_flagged = match kappa_fit {
        Some(b) => !phi_star.is_finite() || (b - phi_star).abs() >= cfg.kappa_fit_gate,
        None => true,
    };
    let kappa_hat = if kappa_flagged { phi_star } else { kappa_fit.unwrap() };

    Ok(FrequencyProfile {
        center: job.center,
        radii,
        h_vals,
        d_vals,
        phi,
        f_vals: with_f.then_some(f_vals),
        kappa_hat: kappa_hat.is_finite().then_some(kappa_hat),
        kappa_fit,
        reliable: mono_violations == 0,
        kappa_flagged,
        mono_violations,
    })
}

/// H(r), phi(r) (windowed log-derivative minus the F correction), F(r).
fn phi_at(job: &ProfileJob<'_>, r: f64, n: i32, lambda: f64, with_f: bool) -> (f64, f64, f64) {
    let r_hi = r * lambda.exp();
    let r_lo = r * (-lambda).exp();
    let h_raw_hi = job.h_raw(r_hi);
    let h_raw_lo = job.h_raw(r_lo);
    let h_mid = job.h_raw(r) * r.powi(-n);
    if h_raw_hi <= 0.0 || h_raw_lo <= 0.0 || h_mid <= 0.0 {
        return (h_mid, f64::NAN, f64::NAN);
    }
    let mut phi = (h_raw_hi.ln() - h_raw_lo.ln()) / (4.0 * lambda) - 0.5 * n as f64;
    let f_r = if with_f {
        let mass = job.w_laplacian_mass(r);
        let f = r.powi(1 - n) * mass / h_mid;
        phi -= f;
        f
    } else {
        0.0
    };
    (h_mid, phi, f_r)
}

fn linear_fit_intercept(x: &[f64], y: &[f64]) -> Option<f64> {
    let slope = linear_fit_slope(x, y)?;
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    Some((sy - slope * sx) / n)
}

/// Least-squares slope of y against x.
pub(crate) fn linear_fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Verifies the two-sided growth bound
/// (R/r)^{2 phi(r)} <= H(R)/H(r) <= (R/r)^{2 phi(R)}, each side with
/// multiplicative slack (R/r)^{slack}. Radii snap to the nearest
/// profile entries.
pub fn growth_check(
    profile: &FrequencyProfile,
    r: f64,
    big_r: f64,
    cfg: &AnalysisConfig,
) -> (bool, bool) {
    let Some((r, phi_r, h_r)) = snap(profile, r) else { return (false, false) };
    let Some((big_r, phi_big, h_big)) = snap(profile, big_r) else { return (false, false) };
    if big_r <= r {
        return (true, true);
    }
    let ratio = h_big / h_r;
    let q = big_r / r;
    let slack = cfg.growth_slack_exponent;
    let lower_ok = ratio >= q.powf(2.0 * phi_r - slack);
    let upper_ok = ratio <= q.powf(2.0 * phi_big + slack);
    (lower_ok, upper_ok)
}

/// Growth bound for difference profiles: the upper side carries the
/// constant C_delta = exp((phi(R) - phi(r)) / (2 delta)) coming from
/// sqrt(t) <= delta t + C_delta applied to the F-term integral.
pub fn growth_check_w(
    profile: &FrequencyProfile,
    r: f64,
    big_r: f64,
    delta: f64,
    cfg: &AnalysisConfig,
) -> (bool, bool) {
    let Some((r, phi_r, h_r)) = snap(profile, r) else { return (false, false) };
    let Some((big_r, phi_big, h_big)) = snap(profile, big_r) else { return (false, false) };
    if big_r <= r {
        return (true, true);
    }
    let ratio = h_big / h_r;
    let q = big_r / r;
    let slack = cfg.growth_slack_exponent;
    let c_delta = ((phi_big - phi_r).max(0.0) / (2.0 * delta)).exp();
    let lower_ok = ratio >= q.powf(2.0 * phi_r - slack);
    let upper_ok = ratio <= c_delta * q.powf(2.0 * phi_big + delta + slack);
    (lower_ok, upper_ok)
}

fn snap(profile: &FrequencyProfile, r: f64) -> Option<(f64, f64, f64)> {
    let idx = profile
        .radii
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - r).abs().partial_cmp(&(b.1 - r).abs()).expect("finite radii"))?
        .0;
    let phi = profile.phi[idx];
    if !phi.is_finite() {
        return None;
    }
    Some((profile.radii[idx], phi, profile.h_vals[idx]))
}
