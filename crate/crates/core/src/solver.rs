//! Projected successive over-relaxation for the discrete thin obstacle
//! problem with Dirichlet data on the box boundary.
//!
//! Interior nodes get the standard (2n+3)-point Laplacian update with
//! over-relaxation; thin-plane nodes use the even-reflection stencil
//! (vertical neighbor counted twice) followed by projection onto
//! u >= 0. Sweeps run in a fixed lexicographic order, so identical
//! problems produce bit-identical results.

use serde::{Deserialize, Serialize};

use crate::catalog::Profile;
use crate::error::{CoreError, Result};
use crate::geometry::{Grid, Point, ScalarField};

/// Boundary datum on the box boundary, evaluated pointwise. Data are
/// plain closed forms; only their restriction to the boundary matters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum {
    Profile(Profile),
    Builtin(BuiltinDatum),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BuiltinDatum {
    Constant { value: f64 },
    /// min(1, 2|z|)^2: vanishes on the thin space, equals 1 on the
    /// boundary portion {|z| >= 1/2}. The canonical monotone-family
    /// perturbation.
    HarmonicLift,
    Scaled { factor: f64, term: Box<Datum> },
    Sum { terms: Vec<Datum> },
    /// Thin-space translation x' -> x' - offset of the inner datum.
    Translated { offset: [f64; 2], term: Box<Datum> },
}

impl Datum {
    pub fn constant(value: f64) -> Self {
        Datum::Builtin(BuiltinDatum::Constant { value })
    }

    pub fn harmonic_lift() -> Self {
        Datum::Builtin(BuiltinDatum::HarmonicLift)
    }

    pub fn profile(p: Profile) -> Self {
        Datum::Profile(p)
    }

    pub fn scaled(factor: f64, term: Datum) -> Self {
        Datum::Builtin(BuiltinDatum::Scaled { factor, term: Box::new(term) })
    }

    pub fn sum(terms: Vec<Datum>) -> Self {
        Datum::Builtin(BuiltinDatum::Sum { terms })
    }

    pub fn translated(offset: [f64; 2], term: Datum) -> Self {
        Datum::Builtin(BuiltinDatum::Translated { offset, term: Box::new(term) })
    }

    /// g0 + t * psi, the monotone-family member.
    pub fn affine(g0: &Datum, t: f64, psi: &Datum) -> Self {
        Datum::sum(vec![g0.clone(), Datum::scaled(t, psi.clone())])
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        match self {
            Datum::Profile(p) => p.evaluate(x),
            Datum::Builtin(b) => match b {
                BuiltinDatum::Constant { value } => *value,
                BuiltinDatum::HarmonicLift => {
                    let t = (2.0 * x[2].abs()).min(1.0);
                    t * t
                }
                BuiltinDatum::Scaled { factor, term } => factor * term.evaluate(x),
                BuiltinDatum::Sum { terms } => terms.iter().map(|t| t.evaluate(x)).sum(),
                BuiltinDatum::Translated { offset, term } => {
                    term.evaluate([x[0] - offset[0], x[1] - offset[1], x[2]])
                }
            },
        }
    }
}

/// Seeded generator of boundary data that are nonnegative on the thin
/// space: translated half-plane solutions of frequency 3/2, a PSD
/// quadratic, a downward pull -c|z| (zero on the thin space, so the
/// contact set is usually nontrivial), and a small positive constant.
pub fn random_datum(n: usize, seed: u64) -> Datum {
    use crate::catalog::{HalfPlaneSolution, QuadraticProfile, ThinMatrix};
    use rand::Rng;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for _ in 0..2 {
        let dir = if n == 2 {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            [th.cos(), th.sin()]
        } else {
            [if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0]
        };
        let amp = rng.gen_range(0.2..0.6);
        let offset = [
            rng.gen_range(-0.4..0.4),
            if n == 2 { rng.gen_range(-0.4..0.4) } else { 0.0 },
        ];
        let hp = Datum::profile(Profile::Halfplane(HalfPlaneSolution::new(1.5, dir).unwrap()));
        terms.push(Datum::translated(offset, Datum::scaled(amp, hp)));
    }
    let quad = if n == 2 {
        let (c, s) = {
            let th = rng.gen_range(0.0..std::f64::consts::PI);
            (th.cos(), th.sin())
        };
        let (l0, l1) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        ThinMatrix::new(
            2,
            [
                [l0 * c * c + l1 * s * s, (l0 - l1) * c * s],
                [(l0 - l1) * c * s, l0 * s * s + l1 * c * c],
            ],
        )
        .unwrap()
    } else {
        ThinMatrix::diag(&[rng.gen_range(0.0..1.0)])
    };
    let quad_amp = rng.gen_range(0.1..0.5);
    let quad_off = [
        rng.gen_range(-0.3..0.3),
        if n == 2 { rng.gen_range(-0.3..0.3) } else { 0.0 },
    ];
    terms.push(Datum::translated(
        quad_off,
        Datum::scaled(quad_amp, Datum::profile(Profile::Quadratic(QuadraticProfile::new(quad)))),
    ));
    // -c |z|: the frequency-1 solution, scaled.
    let pull = rng.gen_range(0.3..0.9);
    terms.push(Datum::scaled(
        pull,
        Datum::profile(Profile::Halfplane(HalfPlaneSolution::new(1.0, [1.0, 0.0]).unwrap())),
    ));
    terms.push(Datum::constant(rng.gen_range(0.0..0.15)));
    Datum::sum(terms)
}

/// Discrete Signorini problem on a grid.
#[derive(Clone, Debug)]
pub struct SignoriniProblem {
    pub grid: Grid,
    pub datum: Datum,
    pub omega: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Record the discrete Dirichlet energy after every sweep.
    pub record_energy: bool,
}

pub const DEFAULT_OMEGA: f64 = 1.9;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 50_000;

impl SignoriniProblem {
    pub fn new(grid: Grid, datum: Datum) -> Self {
        SignoriniProblem {
            grid,
            datum,
            omega: DEFAULT_OMEGA,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            record_energy: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega > 1.0 && self.omega < 2.0) {
            return Err(CoreError::Precondition(format!("omega = {} not in (1, 2)", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(CoreError::Precondition(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }

    /// Numerically-zero threshold for the contact mask: separates
    /// "numerically zero" from "small positive"; h^3 tracks the cubic
    /// worst-case growth of degenerate solutions near the free boundary.
    pub fn contact_threshold(&self) -> f64 {
        let h = self.grid.spacing();
        (10.0 * self.tol).max(h * h * h)
    }
}

/// Residuals of the discrete optimality system, in the units stated by
/// the solver contract (the PDE residual is a discrete Laplacian,
/// bounded by tol * h^-2 on success).
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub pde: f64,
    pub complementarity: f64,
    pub negativity: f64,
}

/// Converged solution plus diagnostics.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub field: ScalarField,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Per thin-plane node (iy * N + ix): u <= contact threshold.
    pub contact_mask: Vec<bool>,
    pub contact_threshold: f64,
    pub tol: f64,
    pub energy_trace: Option<Vec<f64>>,
}

impl SolveResult {
    pub fn grid(&self) -> Grid {
        self.field.grid()
    }

    pub fn is_contact(&self, ix: usize, iy: usize) -> bool {
        self.contact_mask[self.grid().thin_index(ix, iy)]
    }
}

/// Runs PSOR sweeps until the max nodal update drops below tol * h^2.
pub fn solve(problem: &SignoriniProblem) -> Result<SolveResult> {
    problem.validate()?;
    let g = problem.grid;
    let (nx, ny, nv) = (g.nodes(), g.ny(), g.vertical_nodes());
    let h = g.spacing();
    let n = g.thin_dim();
    let omega = problem.omega;
    let inv_degree = 1.0 / (2.0 * (n + 1) as f64);

    let mut u = init_values(problem)?;
    let mut energy = problem.record_energy.then(Vec::new);

    let threshold = problem.tol * h * h;
    let mut iterations = 0;
    let mut max_update = f64::INFINITY;
    let sx = 1isize;
    let sy = nx as isize;
    let sz = (nx * ny) as isize;

    while iterations < problem.max_iters {
        max_update = 0.0;
        for iz in 0..nv {
            let boundary_z = iz + 1 == nv;
            for iy in 0..ny {
                let boundary_y = n == 2 && (iy == 0 || iy + 1 == ny);
                if boundary_z || boundary_y {
                    continue;
                }
                let row = (iz * ny + iy) * nx;
                for ix in 1..nx - 1 {
                    let idx = row + ix;
                    let i = idx as isize;
                    let mut nb = u[(i - sx) as usize] + u[(i + sx) as usize];
                    if n == 2 {
                        nb += u[(i - sy) as usize] + u[(i + sy) as usize];
                    }
                    let old = u[idx];
                    let new = if iz == 0 {
                        // Even reflection: the vertical neighbor counts twice,
                        // then project onto the obstacle u >= 0.
                        nb += 2.0 * u[(i + sz) as usize];
                        let gs = nb * inv_degree;
                        (old + omega * (gs - old)).max(0.0)
                    } else {
                        nb += u[(i - sz) as usize] + u[(i + sz) as usize];
                        let gs = nb * inv_degree;
                        old + omega * (gs - old)
                    };
                    u[idx] = new;
                    let delta = (new - old).abs();
                    if delta > max_update {
                        max_update = delta;
                    }
                }
            }
        }
        iterations += 1;
        if let Some(tr) = energy.as_mut() {
            tr.push(dirichlet_energy_of(&g, &u));
        }
        if max_update < threshold {
            break;
        }
    }

    let field = ScalarField::from_values(g, u).expect("buffer sized for grid");
    let result = finish(problem, field, iterations, energy);
    if max_update >= threshold {
        return Err(CoreError::NonConvergence {
            iterations,
            max_update,
            partial: Box::new(result),
        });
    }
    Ok(result)
}

fn init_values(problem: &SignoriniProblem) -> Result<Vec<f64>> {
    let g = problem.grid;
    let (nx, ny, nv) = (g.nodes(), g.ny(), g.vertical_nodes());
    let n = g.thin_dim();
    let mut u = vec![0.0; g.num_nodes()];

    let eval = |ix: usize, iy: usize, iz: usize| -> f64 {
        problem.datum.evaluate(g.node_point(ix, iy, iz))
    };

    // Boundary nodes take the datum; interior nodes start from the
    // transfinite interpolation of the side faces on each z-slice,
    // clamped to the obstacle on the thin plane.
    for iz in 0..nv {
        for iy in 0..ny {
            for ix in 0..nx {
                let boundary = ix == 0
                    || ix + 1 == nx
                    || iz + 1 == nv
                    || (n == 2 && (iy == 0 || iy + 1 == ny));
                let v = if boundary {
                    let v = eval(ix, iy, iz);
                    if !v.is_finite() {
                        return Err(CoreError::InvalidDatum(format!(
                            "datum not finite at boundary node ({ix}, {iy}, {iz})"
                        )));
                    }
                    v
                } else {
                    let s = ix as f64 / (nx - 1) as f64;
                    if n == 1 {
                        (1.0 - s) * eval(0, 0, iz) + s * eval(nx - 1, 0, iz)
                    } else {
                        let t = iy as f64 / (nx - 1) as f64;
                        (1.0 - s) * eval(0, iy, iz) + s * eval(nx - 1, iy, iz)
                            + (1.0 - t) * eval(ix, 0, iz)
                            + t * eval(ix, nx - 1, iz)
                            - ((1.0 - s) * (1.0 - t) * eval(0, 0, iz)
                                + s * (1.0 - t) * eval(nx - 1, 0, iz)
                                + (1.0 - s) * t * eval(0, nx - 1, iz)
                                + s * t * eval(nx - 1, nx - 1, iz))
                    }
                };
                let idx = g.index(ix, iy, iz);
                u[idx] = if iz == 0 && !boundary { v.max(0.0) } else { v };
            }
        }
    }
    Ok(u)
}

fn finish(
    problem: &SignoriniProblem,
    field: ScalarField,
    iterations: usize,
    energy_trace: Option<Vec<f64>>,
) -> SolveResult {
    let g = problem.grid;
    let (nx, ny, nv) = (g.nodes(), g.ny(), g.vertical_nodes());
    let n = g.thin_dim();
    let h = g.spacing();
    let h2 = h * h;
    let threshold = problem.contact_threshold();
    let u = field.values();

    let mut contact = vec![false; g.thin_nodes()];
    let mut pde: f64 = 0.0;
    let mut compl: f64 = 0.0;
    let mut neg: f64 = 0.0;

    for iy in 0..ny {
        for ix in 0..nx {
            let v = u[g.index(ix, iy, 0)];
            contact[g.thin_index(ix, iy)] = v <= threshold;
            neg = neg.max(-v);
            let boundary = ix == 0 || ix + 1 == nx || (n == 2 && (iy == 0 || iy + 1 == ny));
            if boundary {
                continue;
            }
            // min(u, -dz u) with dz u the half-step one-sided derivative
            // implied by the reflected stencil.
            let lap = reflected_thin_laplacian(&g, u, ix, iy);
            let dz = 0.5 * h * lap;
            compl = compl.max(v.min(-dz).abs());
        }
    }
    for iz in 1..nv - 1 {
        for iy in 0..ny {
            for ix in 0..nx {
                let boundary = ix == 0 || ix + 1 == nx || (n == 2 && (iy == 0 || iy + 1 == ny));
                if boundary {
                    continue;
                }
                let i = g.index(ix, iy, iz);
                let mut lap = u[i - 1] + u[i + 1] - 2.0 * u[i];
                if n == 2 {
                    lap += u[i - nx] + u[i + nx] - 2.0 * u[i];
                }
                let stride_z = nx * ny;
                lap += u[i - stride_z] + u[i + stride_z] - 2.0 * u[i];
                pde = pde.max((lap / h2).abs());
            }
        }
    }

    SolveResult {
        field,
        iterations,
        residuals: Residuals { pde, complementarity: compl, negativity: neg },
        contact_mask: contact,
        contact_threshold: threshold,
        tol: problem.tol,
        energy_trace,
    }
}

/// Full symmetric discrete Laplacian at a thin node, using the even
/// reflection for the ghost value below the plane. For converged
/// solutions it approximates the surface density (2/h) dz u(x, 0+).
pub fn reflected_thin_laplacian(g: &Grid, u: &[f64], ix: usize, iy: usize) -> f64 {
    let h2 = g.spacing() * g.spacing();
    let i = g.index(ix, iy, 0);
    let stride_z = g.nodes() * g.ny();
    let mut lap = u[i - 1] + u[i + 1] - 2.0 * u[i];
    if g.thin_dim() == 2 {
        lap += u[i - g.nodes()] + u[i + g.nodes()] - 2.0 * u[i];
    }
    lap += 2.0 * u[i + stride_z] - 2.0 * u[i];
    lap / h2
}

/// Max positive reflected Laplacian across interior thin nodes; for a
/// converged solution this stays at the residual level (the solution
/// is superharmonic across the thin space).
pub fn verify_superharmonicity(result: &SolveResult) -> f64 {
    let g = result.grid();
    let u = result.field.values();
    let n = g.thin_dim();
    let (nx, ny) = (g.nodes(), g.ny());
    let mut worst: f64 = f64::NEG_INFINITY;
    for iy in 0..ny {
        for ix in 1..nx - 1 {
            if n == 2 && (iy == 0 || iy + 1 == ny) {
                continue;
            }
            worst = worst.max(reflected_thin_laplacian(&g, u, ix, iy));
        }
    }
    worst
}

/// Discrete Dirichlet energy of the reflected field (stored half
/// doubled): sum over cells of |grad_h u|^2 * h^{n+1}.
pub fn dirichlet_energy(field: &ScalarField) -> f64 {
    dirichlet_energy_of(&field.grid(), field.values())
}

fn dirichlet_energy_of(g: &Grid, u: &[f64]) -> f64 {
    let (nx, ny, nv) = (g.nodes(), g.ny(), g.vertical_nodes());
    let n = g.thin_dim();
    let h = g.spacing();
    let mut acc = 0.0;
    if n == 1 {
        let inv = 1.0 / (2.0 * h);
        for kz in 0..nv - 1 {
            for kx in 0..nx - 1 {
                let a = g.index(kx, 0, kz);
                let b = g.index(kx, 0, kz + 1);
                let gx = (u[a + 1] - u[a] + u[b + 1] - u[b]) * inv;
                let gz = (u[b] - u[a] + u[b + 1] - u[a + 1]) * inv;
                acc += gx * gx + gz * gz;
            }
        }
        2.0 * acc * h * h
    } else {
        let inv = 1.0 / (4.0 * h);
        for kz in 0..nv - 1 {
            for ky in 0..ny - 1 {
                for kx in 0..nx - 1 {
                    let c = [
                        u[g.index(kx, ky, kz)],
                        u[g.index(kx + 1, ky, kz)],
                        u[g.index(kx, ky + 1, kz)],
                        u[g.index(kx + 1, ky + 1, kz)],
                        u[g.index(kx, ky, kz + 1)],
                        u[g.index(kx + 1, ky, kz + 1)],
                        u[g.index(kx, ky + 1, kz + 1)],
                        u[g.index(kx + 1, ky + 1, kz + 1)],
                    ];
                    let gx = (c[1] - c[0] + c[3] - c[2] + c[5] - c[4] + c[7] - c[6]) * inv;
                    let gy = (c[2] - c[0] + c[3] - c[1] + c[6] - c[4] + c[7] - c[5]) * inv;
                    let gz = (c[4] - c[0] + c[5] - c[1] + c[6] - c[2] + c[7] - c[3]) * inv;
                    acc += gx * gx + gy * gy + gz * gz;
                }
            }
        }
        2.0 * acc * h * h * h
    }
}

/// Diagnostic for the strong comparison principle between two ordered
/// solutions vanishing at a common thin point.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub max_diff: f64,
    /// Estimated frequency of the smaller solution at the common zero,
    /// when a profile could be extracted.
    pub v_frequency: Option<f64>,
    /// Whether the two fields coincide within 10x solver tolerance, as
    /// the principle predicts when the frequency hypothesis holds.
    pub coincide: bool,
}

pub fn compare_ordered(u: &SolveResult, v: &SolveResult, x0: Point) -> Result<ComparisonReport> {
    let g = u.grid();
    if v.grid() != g {
        return Err(CoreError::Precondition("compare_ordered requires a common grid".into()));
    }
    let tol = u.tol.max(v.tol);
    let mut max_diff: f64 = 0.0;
    for (a, b) in u.field.values().iter().zip(v.field.values()) {
        if a - b < -tol {
            return Err(CoreError::Precondition(format!(
                "fields are not ordered: u - v = {:.3e} < -tol",
                a - b
            )));
        }
        max_diff = max_diff.max((a - b).abs());
    }
    let u0 = u.field.interpolate(x0)?;
    let v0 = v.field.interpolate(x0)?;
    if u0.abs() > 10.0 * tol || v0.abs() > 10.0 * tol {
        return Err(CoreError::Precondition(format!(
            "fields do not vanish at the common point (u = {u0:.3e}, v = {v0:.3e})"
        )));
    }
    let cfg = crate::config::AnalysisConfig::default();
    let clearance = 1.0 - x0[0].abs().max(if g.thin_dim() == 2 { x0[1].abs() } else { 0.0 });
    let r_max = (0.95 * clearance).min(0.5);
    let v_frequency = crate::frequency::frequency_profile(&v.field, x0, r_max, &cfg)
        .ok()
        .and_then(|p| p.kappa_hat);
    Ok(ComparisonReport { max_diff, v_frequency, coincide: max_diff <= 10.0 * tol })
}
