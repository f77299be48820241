//! Closed-form homogeneous solutions used as boundary data, golden
//! references, and classification targets.
//!
//! In two ambient dimensions the admissible homogeneities form
//! S = {1, 3/2, 2, 3, 7/2, 4, ...} = N u (2N - 1/2). Writing
//! zeta = x'.e + i|z| with branch argument in [0, pi]:
//!
//!   - half-integer kappa: Re zeta^kappa,
//!   - even integer kappa: Re zeta^kappa,
//!   - odd integer kappa: -Im zeta^kappa (vanishes on the thin space).
//!
//! Quadratic profiles are p(x) = x'.A'x' - Tr(A') z^2 with A' symmetric
//! positive semidefinite (the class of admissible first blow-ups at
//! frequency-2 points). Cubic profiles are p3(x) = |z| (a z^2 - x'.A x')
//! with a >= 0 and A symmetric PSD; harmonicity off the thin space
//! forces Tr A = 3a, and the constructor checks that with a
//! finite-difference oracle instead of assuming it.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Point;

/// Admissible homogeneities in two ambient dimensions:
/// every integer >= 1 plus the half-integers 3/2, 7/2, 11/2, ...
pub fn nearest_homogeneity(kappa: f64) -> f64 {
    let int = kappa.round().max(1.0);
    // Half-integer family 2m - 1/2, m >= 1.
    let m = ((kappa + 0.5) / 2.0).round().max(1.0);
    let half = 2.0 * m - 0.5;
    if (kappa - int).abs() <= (kappa - half).abs() {
        int
    } else {
        half
    }
}

/// Whether `kappa` lies within `tol` of the admissible set; returns the
/// nearest admissible element alongside.
pub fn admissible_homogeneity(kappa: f64, tol: f64) -> (bool, f64) {
    let nearest = nearest_homogeneity(kappa);
    ((kappa - nearest).abs() <= tol, nearest)
}

/// Symmetric matrix on the thin space (n in {1, 2}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ThinMatrix {
    n: usize,
    m: [[f64; 2]; 2],
}

impl ThinMatrix {
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        assert!(n == 1 || n == 2);
        let mut m = [[0.0; 2]; 2];
        for (i, &e) in entries.iter().enumerate() {
            m[i][i] = e;
        }
        ThinMatrix { n, m }
    }

    /// Builds from entries, symmetrizing the off-diagonal part.
    pub fn new(n: usize, entries: [[f64; 2]; 2]) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(CoreError::InvalidProfile(format!("thin matrix dimension {n}")));
        }
        let mut m = entries;
        let off = 0.5 * (entries[0][1] + entries[1][0]);
        m[0][1] = off;
        m[1][0] = off;
        if n == 1 {
            m[0][1] = 0.0;
            m[1][0] = 0.0;
            m[1][1] = 0.0;
        }
        Ok(ThinMatrix { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn quad_form(&self, t: [f64; 2]) -> f64 {
        if self.n == 1 {
            self.m[0][0] * t[0] * t[0]
        } else {
            self.m[0][0] * t[0] * t[0] + 2.0 * self.m[0][1] * t[0] * t[1] + self.m[1][1] * t[1] * t[1]
        }
    }

    /// Eigenvalues in ascending order (second entry unused for n = 1).
    pub fn eigenvalues(&self) -> [f64; 2] {
        if self.n == 1 {
            [self.m[0][0], f64::INFINITY]
        } else {
            let (a, b, d) = (self.m[0][0], self.m[0][1], self.m[1][1]);
            let mean = 0.5 * (a + d);
            let disc = (0.5 * (a - d)).hypot(b);
            [mean - disc, mean + disc]
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Clamps negative eigenvalues to zero; returns the new matrix and
    /// the largest eigenvalue shift applied.
    pub fn clip_psd(&self) -> (ThinMatrix, f64) {
        if self.n == 1 {
            let shift = (-self.m[0][0]).max(0.0);
            (ThinMatrix::diag(&[self.m[0][0].max(0.0)]), shift)
        } else {
            let [l0, l1] = self.eigenvalues();
            if l0 >= 0.0 {
                return (*self, 0.0);
            }
            // Eigenvector for l0 of [[a, b], [b, d]].
            let (a, b, d) = (self.m[0][0], self.m[0][1], self.m[1][1]);
            let (vx, vy) = if b.abs() > 1e-300 {
                (l0 - d, b)
            } else if a <= d {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            let norm = vx.hypot(vy);
            let (vx, vy) = (vx / norm, vy / norm);
            let c0 = l0.max(0.0);
            let c1 = l1.max(0.0);
            // Reassemble c0 v v^T + c1 w w^T with w perpendicular to v.
            let (wx, wy) = (-vy, vx);
            let m = [
                [c0 * vx * vx + c1 * wx * wx, c0 * vx * vy + c1 * wx * wy],
                [c0 * vx * vy + c1 * wx * wy, c0 * vy * vy + c1 * wy * wy],
            ];
            let shift = (c0 - l0).max(c1 - l1.max(0.0));
            (ThinMatrix { n: 2, m }, shift)
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for ThinMatrix {
    type Error = CoreError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n != 1 && n != 2 || rows.iter().any(|r| r.len() != n) {
            return Err(CoreError::InvalidProfile(format!(
                "thin matrix must be 1x1 or 2x2, got {n} rows"
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidProfile("thin matrix entries must be finite".into()));
        }
        let mut m = [[0.0; 2]; 2];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[i][j] = v;
            }
        }
        if n == 2 && (m[0][1] - m[1][0]).abs() > 1e-9 * (1.0 + m[0][1].abs()) {
            return Err(CoreError::InvalidProfile("thin matrix must be symmetric".into()));
        }
        ThinMatrix::new(n, m)
    }
}

impl From<ThinMatrix> for Vec<Vec<f64>> {
    fn from(t: ThinMatrix) -> Self {
        (0..t.n).map(|i| (0..t.n).map(|j| t.m[i][j]).collect()).collect()
    }
}

/// Two-dimensional homogeneous solution extended along a thin direction
/// `e`: u(x) depends on (x'.e, |z|) only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneSolution {
    pub kappa: f64,
    pub direction: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HomogeneityKind {
    HalfInteger,
    EvenInteger,
    OddInteger,
}

impl HalfPlaneSolution {
    pub fn new(kappa: f64, direction: [f64; 2]) -> Result<Self> {
        let (ok, nearest) = admissible_homogeneity(kappa, 1e-9);
        if !ok {
            return Err(CoreError::InvalidProfile(format!(
                "homogeneity {kappa} is not admissible (nearest is {nearest})"
            )));
        }
        let norm = direction[0].hypot(direction[1]);
        if norm < 1e-12 {
            return Err(CoreError::InvalidProfile("direction must be nonzero".into()));
        }
        Ok(HalfPlaneSolution {
            kappa: nearest,
            direction: [direction[0] / norm, direction[1] / norm],
        })
    }

    fn kind(&self) -> HomogeneityKind {
        if (self.kappa - self.kappa.round()).abs() > 1e-9 {
            HomogeneityKind::HalfInteger
        } else if (self.kappa.round() as i64) % 2 == 0 {
            HomogeneityKind::EvenInteger
        } else {
            HomogeneityKind::OddInteger
        }
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        let s = self.direction[0] * x[0] + self.direction[1] * x[1];
        let z = x[2].abs();
        let rr = s.hypot(z);
        if rr == 0.0 {
            return 0.0;
        }
        let th = z.atan2(s); // branch argument in [0, pi]
        let amp = rr.powf(self.kappa);
        match self.kind() {
            HomogeneityKind::HalfInteger | HomogeneityKind::EvenInteger => {
                amp * (self.kappa * th).cos()
            }
            HomogeneityKind::OddInteger => -amp * (self.kappa * th).sin(),
        }
    }
}

/// Even, 2-homogeneous, harmonic polynomial parameterized by its
/// thin-space part: p(x) = x'.A'x' - Tr(A') z^2. Membership in the
/// admissible class additionally requires A' PSD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProfile {
    pub matrix: ThinMatrix,
}

/// Eigenvalue floor for the thin-space nonnegativity test.
pub const P2_MEMBERSHIP_TOL: f64 = 1e-10;

impl QuadraticProfile {
    pub fn new(matrix: ThinMatrix) -> Self {
        QuadraticProfile { matrix }
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        self.matrix.quad_form([x[0], x[1]]) - self.matrix.trace() * x[2] * x[2]
    }

    /// Nonnegativity on the thin space, as an eigenvalue bound.
    pub fn is_member(&self) -> bool {
        self.matrix.is_psd(P2_MEMBERSHIP_TOL)
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

/// Cubic profile p3(x) = |z| (a z^2 - x'.A x'), vanishing identically
/// on the thin space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicProfile {
    pub a: f64,
    pub matrix: ThinMatrix,
}

impl CubicProfile {
    /// Derives the vertical coefficient from the matrix, which is the
    /// normalization harmonicity forces: a = Tr(A) / 3.
    pub fn from_matrix(matrix: ThinMatrix) -> Self {
        CubicProfile { a: matrix.trace() / 3.0, matrix }
    }

    /// Builds from both parameters and verifies harmonicity off the
    /// thin space with the finite-difference oracle. The oracle, not a
    /// hard-coded relation, is what ties `a` to Tr(A).
    pub fn new(a: f64, matrix: ThinMatrix) -> Result<Self> {
        let p = CubicProfile { a, matrix };
        let scale = sup_on_unit_sphere(matrix.n(), |x| p.evaluate(x)).max(1e-12);
        let mut worst: f64 = 0.0;
        for &x in sample_points_off_thin(matrix.n()).iter() {
            worst = worst.max(fd_laplacian(|y| p.evaluate(y), x, matrix.n(), 1e-4).abs());
        }
        if worst > 1e-6 * scale {
            return Err(CoreError::InvalidProfile(format!(
                "cubic profile is not harmonic off the thin space \
                 (residual {worst:.3e}; a = {a}, Tr A = {})",
                matrix.trace()
            )));
        }
        Ok(p)
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        let z = x[2].abs();
        z * (self.a * z * z - self.matrix.quad_form([x[0], x[1]]))
    }

    /// Residual of the harmonicity-derived trace relation.
    pub fn trace_residual(&self) -> f64 {
        self.matrix.trace() - 3.0 * self.a
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

/// Any catalog profile, serialized as a tagged JSON object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Profile {
    Halfplane(HalfPlaneSolution),
    Quadratic(QuadraticProfile),
    Cubic(CubicProfile),
}

impl Profile {
    pub fn evaluate(&self, x: Point) -> f64 {
        match self {
            Profile::Halfplane(p) => p.evaluate(x),
            Profile::Quadratic(p) => p.evaluate(x),
            Profile::Cubic(p) => p.evaluate(x),
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            Profile::Halfplane(p) => p.kappa,
            Profile::Quadratic(_) => 2.0,
            Profile::Cubic(_) => 3.0,
        }
    }

    /// Distance from a thin-space point to the profile's own free
    /// boundary (the boundary of its contact set). One-sided difference
    /// quotients degrade there, so the validator keeps a margin.
    fn free_boundary_margin(&self, thin: [f64; 2]) -> f64 {
        match self {
            Profile::Halfplane(p) => match p.kind() {
                // Contact {s <= 0} (half-integer) or {s = 0} (even):
                // either way the interface is {s = 0}.
                HomogeneityKind::HalfInteger | HomogeneityKind::EvenInteger => {
                    (p.direction[0] * thin[0] + p.direction[1] * thin[1]).abs()
                }
                // Contact is the whole thin space: no free boundary.
                HomogeneityKind::OddInteger => f64::INFINITY,
            },
            Profile::Quadratic(p) => {
                // Zero set of x'.A'x' is the kernel of A'; distance to it
                // is the norm of the component in the positive eigenspace.
                let m = p.matrix;
                if m.n() == 1 {
                    if m.get(0, 0).abs() > 1e-12 {
                        thin[0].abs()
                    } else {
                        f64::INFINITY
                    }
                } else {
                    let [l0, l1] = m.eigenvalues();
                    if l1.abs() <= 1e-12 {
                        return f64::INFINITY; // p == 0 on the thin space
                    }
                    // Orthonormal eigenvectors of the 2x2 form.
                    let (a, b, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
                    let vec_for = |l: f64| -> [f64; 2] {
                        if b.abs() > 1e-12 {
                            let v = [l - d, b];
                            let nrm = v[0].hypot(v[1]);
                            [v[0] / nrm, v[1] / nrm]
                        } else if (a - l).abs() < (d - l).abs() {
                            [1.0, 0.0]
                        } else {
                            [0.0, 1.0]
                        }
                    };
                    let mut dist2 = 0.0;
                    for (l, v) in [(l0, vec_for(l0)), (l1, vec_for(l1))] {
                        if l.abs() > 1e-12 {
                            let c = v[0] * thin[0] + v[1] * thin[1];
                            dist2 += c * c;
                        }
                    }
                    dist2.sqrt()
                }
            }
            Profile::Cubic(_) => f64::INFINITY,
        }
    }
}

/// Seven-point (or five-point) finite-difference Laplacian of a closed
/// form at `x`, with step `step`. The stencil must not cross the thin
/// space.
pub fn fd_laplacian(f: impl Fn(Point) -> f64, x: Point, n: usize, step: f64) -> f64 {
    let mut acc = 0.0;
    let center = f(x);
    for axis in [0, 2].iter().copied().chain(if n == 2 { Some(1) } else { None }) {
        let mut xp = x;
        let mut xm = x;
        xp[axis] += step;
        xm[axis] -= step;
        acc += f(xp) + f(xm) - 2.0 * center;
    }
    acc / (step * step)
}

fn sup_on_unit_sphere(n: usize, f: impl Fn(Point) -> f64) -> f64 {
    let mut sup: f64 = 0.0;
    crate::geometry::sphere_quadrature_fn(n, [0.0; 3], 1.0, 512, |x| {
        sup = sup.max(f(x).abs());
        0.0
    });
    sup
}

fn sample_points_off_thin(n: usize) -> Vec<Point> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pts = Vec::with_capacity(64);
    while pts.len() < 64 {
        let x = [
            rng.gen_range(-0.8..0.8),
            if n == 2 { rng.gen_range(-0.8..0.8) } else { 0.0 },
            rng.gen_range(0.25f64..0.8) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
        ];
        pts.push(x);
    }
    pts
}

/// One sampled check of `validate_solution`.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl ValidationCheck {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

/// Report of the sampled optimality-system checks for a profile.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub scale: f64,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.max_violation))
    }
}

/// Checks, by seeded sampling and finite differences at step 1e-4:
/// harmonicity off the thin space, nonnegativity on the thin space, a
/// nonnegative contact pressure, complementarity, and the claimed
/// homogeneity. Violations are scaled by the profile's magnitude on the
/// unit sphere. Interior harmonicity is sampled at |z| >= 0.2 and the
/// thin-space derivative checks keep a margin of 0.1 from the profile's
/// own free boundary; closer in, difference quotients of the
/// non-smooth solutions are ill-conditioned rather than wrong.
pub fn validate_solution(profile: &Profile, samples: usize) -> ValidationReport {
    use rand::Rng;
    use rand::SeedableRng;

    let samples = samples.max(1000);
    let n = match profile {
        Profile::Halfplane(_) => 2, // direction may mix both thin axes
        Profile::Quadratic(p) => p.n(),
        Profile::Cubic(p) => p.n(),
    };
    let step = 1e-4;
    let tol = 1e-6;
    let kappa = profile.kappa();
    let scale = sup_on_unit_sphere(n, |x| profile.evaluate(x)).max(1e-12);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xace);

    // (i) harmonicity off the thin space
    let mut harmonicity: f64 = 0.0;
    for _ in 0..samples {
        let x = [
            rng.gen_range(-0.7..0.7),
            if n == 2 { rng.gen_range(-0.7..0.7) } else { 0.0 },
            rng.gen_range(0.2f64..0.7) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
        ];
        harmonicity = harmonicity.max(fd_laplacian(|y| profile.evaluate(y), x, n, step).abs());
    }

    // Thin-space checks (ii)-(iv).
    let mut thin_negativity: f64 = 0.0;
    let mut pressure_sign: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    let contact_tol = 1e-8 * scale;
    for _ in 0..samples {
        let thin = [
            rng.gen_range(-0.9..0.9),
            if n == 2 { rng.gen_range(-0.9..0.9) } else { 0.0 },
        ];
        let x = [thin[0], thin[1], 0.0];
        let v = profile.evaluate(x);
        thin_negativity = thin_negativity.max(-v);
        if profile.free_boundary_margin(thin) < 0.1 {
            continue;
        }
        // One-sided second-order vertical derivative at z = 0+.
        let v1 = profile.evaluate([thin[0], thin[1], step]);
        let v2 = profile.evaluate([thin[0], thin[1], 2.0 * step]);
        let dz = (4.0 * v1 - v2 - 3.0 * v) / (2.0 * step);
        if v <= contact_tol {
            // (iii) contact pressure: -dz >= 0
            pressure_sign = pressure_sign.max(dz);
        }
        // (iv) complementarity: min(p, -dz) = 0
        complementarity = complementarity.max((v / scale).min(-dz / scale).abs() * scale);
    }

    // (v) homogeneity
    let mut homogeneity: f64 = 0.0;
    for _ in 0..samples {
        let x = [
            rng.gen_range(-0.45..0.45),
            if n == 2 { rng.gen_range(-0.45..0.45) } else { 0.0 },
            rng.gen_range(-0.45..0.45),
        ];
        let base = profile.evaluate(x);
        for lambda in [0.5, 2.0] {
            let scaled = profile.evaluate([lambda * x[0], lambda * x[1], lambda * x[2]]);
            homogeneity = homogeneity.max((scaled - lambda.powf(kappa) * base).abs());
        }
    }

    ValidationReport {
        scale,
        checks: vec![
            ValidationCheck { name: "harmonic_off_thin_space", max_violation: harmonicity / scale, tolerance: tol },
            ValidationCheck { name: "nonnegative_on_thin_space", max_violation: thin_negativity / scale, tolerance: tol },
            ValidationCheck { name: "contact_pressure_sign", max_violation: pressure_sign / scale, tolerance: tol },
            ValidationCheck { name: "complementarity", max_violation: complementarity / scale, tolerance: tol },
            ValidationCheck { name: "homogeneity", max_violation: homogeneity / scale, tolerance: tol },
        ],
    }
}

/// The reference catalog exercised by validation and acceptance runs.
pub fn reference_catalog(n: usize) -> Vec<Profile> {
    let mut out = Vec::new();
    for kappa in [1.0, 1.5, 2.0, 3.0, 3.5, 4.0] {
        out.push(Profile::Halfplane(HalfPlaneSolution::new(kappa, [1.0, 0.0]).unwrap()));
    }
    if n == 2 {
        out.push(Profile::Halfplane(
            HalfPlaneSolution::new(1.5, [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]).unwrap(),
        ));
        out.push(Profile::Quadratic(QuadraticProfile::new(ThinMatrix::diag(&[1.0, 1.0]))));
        out.push(Profile::Quadratic(QuadraticProfile::new(ThinMatrix::diag(&[1.0, 0.0]))));
        out.push(Profile::Quadratic(QuadraticProfile::new(
            ThinMatrix::new(2, [[1.0, 0.4], [0.4, 0.7]]).unwrap(),
        )));
        out.push(Profile::Cubic(CubicProfile::from_matrix(ThinMatrix::diag(&[1.5, 1.5]))));
        out.push(Profile::Cubic(CubicProfile::from_matrix(ThinMatrix::diag(&[3.0, 0.0]))));
    } else {
        out.push(Profile::Quadratic(QuadraticProfile::new(ThinMatrix::diag(&[1.0]))));
        out.push(Profile::Cubic(CubicProfile::from_matrix(ThinMatrix::diag(&[3.0]))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn admissible_set_examples() {
        assert_eq!(admissible_homogeneity(1.5, 0.05), (true, 1.5));
        assert_eq!(admissible_homogeneity(2.6, 0.05), (false, 3.0));
        assert_eq!(admissible_homogeneity(3.5, 0.01), (true, 3.5));
        assert_eq!(admissible_homogeneity(5.4, 0.2), (true, 5.5));
        assert_eq!(nearest_homogeneity(0.3), 1.0);
    }

    #[test]
    fn half_plane_three_halves_values() {
        let p = HalfPlaneSolution::new(1.5, [1.0, 0.0]).unwrap();
        assert!((p.evaluate([1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(p.evaluate([-1.0, 0.0, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn quadratic_profile_closed_form() {
        let p = QuadraticProfile::new(ThinMatrix::diag(&[1.0]));
        let (x, z) = (0.3, 0.7);
        assert_eq!(p.evaluate([x, 0.0, z]), x * x - z * z);
    }

    #[test]
    fn cubic_profile_vanishes_on_thin_space() {
        let p = CubicProfile::from_matrix(ThinMatrix::diag(&[3.0]));
        for x in [-0.9, -0.2, 0.0, 0.55] {
            assert_eq!(p.evaluate([x, 0.0, 0.0]), 0.0);
        }
    }

    #[test]
    fn cubic_trace_relation_resolved_by_oracle() {
        // The harmonicity oracle accepts Tr A = 3a and rejects Tr A = a.
        assert!(CubicProfile::new(1.0, ThinMatrix::diag(&[3.0])).is_ok());
        assert!(CubicProfile::new(1.0, ThinMatrix::diag(&[1.0])).is_err());
        let p = CubicProfile::from_matrix(ThinMatrix::diag(&[1.5, 1.5]));
        assert!(p.trace_residual().abs() < 1e-12);
        assert!(CubicProfile::new(p.a, p.matrix).is_ok());
    }

    #[test]
    fn catalog_profiles_all_validate() {
        for n in [1, 2] {
            for profile in reference_catalog(n) {
                let report = validate_solution(&profile, 1500);
                assert!(
                    report.is_valid(),
                    "profile {profile:?} failed: {:?}",
                    report.checks
                );
                assert!(report.max_violation() <= 1e-6);
            }
        }
    }

    #[test]
    fn non_psd_cubic_fails_pressure_check() {
        // A with a negative direction makes -dz p < 0 somewhere on the
        // contact set (the whole thin space).
        let bad = Profile::Cubic(CubicProfile::from_matrix(ThinMatrix::diag(&[-3.0])));
        let report = validate_solution(&bad, 1500);
        assert!(!report.is_valid());
        let pressure = report.checks.iter().find(|c| c.name == "contact_pressure_sign").unwrap();
        assert!(!pressure.passed());
    }

    #[test]
    fn degenerate_quadratic_contact_is_a_plane() {
        // diag(1, 0) in n = 2: contact set {x1 = 0}, still a valid profile.
        let p = Profile::Quadratic(QuadraticProfile::new(ThinMatrix::diag(&[1.0, 0.0])));
        let report = validate_solution(&p, 1500);
        assert!(report.is_valid(), "{:?}", report.checks);
        // Direct evaluation on a thin-space grid: zero exactly on {x1 = 0}.
        for y in [-0.8, -0.1, 0.4, 0.9] {
            assert_eq!(p.evaluate([0.0, y, 0.0]), 0.0);
            assert!(p.evaluate([0.5, y, 0.0]) > 0.0);
        }
    }

    #[test]
    fn seven_half_validates_to_tolerance() {
        let p = Profile::Halfplane(HalfPlaneSolution::new(3.5, [1.0, 0.0]).unwrap());
        let report = validate_solution(&p, 2000);
        assert!(report.is_valid(), "{:?}", report.checks);
        assert!(report.max_violation() <= 1e-6);
    }

    #[test]
    fn profile_json_roundtrip() {
        let profiles = reference_catalog(2);
        for p in profiles {
            let s = serde_json::to_string(&p).unwrap();
            let back: Profile = serde_json::from_str(&s).unwrap();
            assert_eq!(p, back);
        }
        let parsed: Profile =
            serde_json::from_str(r#"{"type":"quadratic","matrix":[[1.0,0.0],[0.0,2.0]]}"#).unwrap();
        assert_eq!(parsed.kappa(), 2.0);
    }

    proptest! {
        #[test]
        fn exact_homogeneity_under_scaling(
            kappa_idx in 0usize..6,
            x in -0.45f64..0.45,
            z in -0.45f64..0.45,
        ) {
            let kappa = [1.0, 1.5, 2.0, 3.0, 3.5, 4.0][kappa_idx];
            let p = HalfPlaneSolution::new(kappa, [1.0, 0.0]).unwrap();
            let base = p.evaluate([x, 0.0, z]);
            for lambda in [0.5f64, 2.0] {
                let scaled = p.evaluate([lambda * x, 0.0, lambda * z]);
                let want = lambda.powf(kappa) * base;
                prop_assert!((scaled - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }

        #[test]
        fn psd_clip_is_idempotent_and_psd(
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            d in -2.0f64..2.0,
        ) {
            let m = ThinMatrix::new(2, [[a, b], [b, d]]).unwrap();
            let (clipped, shift) = m.clip_psd();
            prop_assert!(clipped.is_psd(1e-12));
            prop_assert!(shift >= 0.0);
            let (again, shift2) = clipped.clip_psd();
            prop_assert!(shift2 <= 1e-12);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((again.get(i, j) - clipped.get(i, j)).abs() <= 1e-12);
                }
            }
        }
    }
}
