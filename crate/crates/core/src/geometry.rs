//! Box-domain grids with even reflection across the thin space.
//!
//! The computational domain is Q = [-1,1]^n x [0,1] for thin dimension
//! n in {1, 2}. Fields are even in the last coordinate, so only the
//! upper half z in [0,1] is stored; evaluation at z < 0 reads the
//! reflected value. The thin space {z = 0} is a grid plane, and one
//! spacing h = 2/(N-1) applies to every axis (the vertical axis carries
//! (N-1)/2 intervals).
//!
//! Points are always `[x1, x2, z]`; for n = 1 the second entry is
//! ignored and should be zero. The vertical coordinate is the last one.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Ambient coordinates `[x1, x2, z]` (x2 unused when n = 1).
pub type Point = [f64; 3];

/// Minimum radius, in cells, for spherical quantities. Below this,
/// interpolation noise dominates the quadrature.
pub const MIN_RADIUS_CELLS: f64 = 4.0;

const GEOM_EPS: f64 = 1e-12;

/// Uniform grid on Q = [-1,1]^n x [0,1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    nodes: usize,
}

impl Grid {
    /// `n` is the thin dimension (1 or 2); `nodes` the per-axis node
    /// count (odd, >= 33) on the thin axes.
    pub fn new(n: usize, nodes: usize) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(CoreError::InvalidGrid(format!("thin dimension {n} not in {{1, 2}}")));
        }
        if nodes < 33 || nodes % 2 == 0 {
            return Err(CoreError::InvalidGrid(format!("nodes = {nodes} must be odd and >= 33")));
        }
        Ok(Grid { n, nodes })
    }

    pub fn thin_dim(&self) -> usize {
        self.n
    }

    /// Nodes per thin axis.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.nodes - 1) as f64
    }

    /// Nodes along the vertical axis, covering [0, 1] at the same spacing.
    pub fn vertical_nodes(&self) -> usize {
        (self.nodes - 1) / 2 + 1
    }

    /// Extent of the second thin axis (1 when n = 1).
    pub fn ny(&self) -> usize {
        if self.n == 2 {
            self.nodes
        } else {
            1
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes * self.ny() * self.vertical_nodes()
    }

    pub fn thin_nodes(&self) -> usize {
        self.nodes * self.ny()
    }

    pub fn thin_coord(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.spacing()
    }

    pub fn vertical_coord(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.ny() + iy) * self.nodes + ix
    }

    #[inline]
    pub fn thin_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nodes + ix
    }

    pub fn node_point(&self, ix: usize, iy: usize, iz: usize) -> Point {
        let y = if self.n == 2 { self.thin_coord(iy) } else { 0.0 };
        [self.thin_coord(ix), y, self.vertical_coord(iz)]
    }

    /// Checks that B_r(center) stays inside the box (after reflection)
    /// and that r is above the resolution floor.
    pub fn check_ball(&self, center: Point, r: f64) -> Result<()> {
        let min = MIN_RADIUS_CELLS * self.spacing();
        if r < min {
            return Err(CoreError::ResolutionTooCoarse { r, min });
        }
        let mut inside = center[0].abs() + r <= 1.0 + GEOM_EPS;
        if self.n == 2 {
            inside &= center[1].abs() + r <= 1.0 + GEOM_EPS;
        }
        inside &= center[2].abs() + r <= 1.0 + GEOM_EPS;
        if inside {
            Ok(())
        } else {
            Err(CoreError::BallExitsBox { center, r })
        }
    }

    fn contains(&self, x: Point) -> bool {
        let mut ok = x[0].abs() <= 1.0 + GEOM_EPS && x[2].abs() <= 1.0 + GEOM_EPS;
        if self.n == 2 {
            ok &= x[1].abs() <= 1.0 + GEOM_EPS;
        } else {
            ok &= x[1].abs() <= GEOM_EPS;
        }
        ok
    }
}

/// Grid-sampled scalar field, even in the last coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.num_nodes()] }
    }

    /// Samples `f` at every stored node (upper half only; evenness is
    /// implied, not checked).
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        let mut field = ScalarField::zeros(grid);
        for iz in 0..grid.vertical_nodes() {
            for iy in 0..grid.ny() {
                for ix in 0..grid.nodes() {
                    field.values[grid.index(ix, iy, iz)] = f(grid.node_point(ix, iy, iz));
                }
            }
        }
        field
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(CoreError::InvalidGrid(format!(
                "value buffer of length {} does not match grid ({} nodes)",
                values.len(),
                grid.num_nodes()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.grid.index(ix, iy, iz)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Multilinear interpolation from the 2^(n+1) enclosing nodes.
    /// Exact on multilinear functions; z < 0 reads the reflected value.
    pub fn interpolate(&self, x: Point) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(CoreError::OutOfDomain { point: x });
        }
        Ok(self.interpolate_unchecked(x))
    }

    /// Interpolation without the domain check; coordinates are clamped
    /// to the box. Callers must have validated the enclosing ball.
    #[inline]
    pub(crate) fn interpolate_unchecked(&self, x: Point) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let nx = g.nodes();
        let nv = g.vertical_nodes();

        let (ix, tx) = cell_frac((x[0] + 1.0) / h, nx);
        let (iz, tz) = cell_frac(x[2].abs() / h, nv);

        if g.n == 2 {
            let (iy, ty) = cell_frac((x[1] + 1.0) / h, nx);
            let mut acc = 0.0;
            for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
                for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                    let base = g.index(ix, iy + dy, iz + dz);
                    let row = wz * wy;
                    acc += row * ((1.0 - tx) * self.values[base] + tx * self.values[base + 1]);
                }
            }
            acc
        } else {
            let b0 = g.index(ix, 0, iz);
            let b1 = g.index(ix, 0, iz + 1);
            (1.0 - tz) * ((1.0 - tx) * self.values[b0] + tx * self.values[b0 + 1])
                + tz * ((1.0 - tx) * self.values[b1] + tx * self.values[b1 + 1])
        }
    }

    /// Raw surface integral of the field over the sphere of radius `r`
    /// (trapezoid rule on the circle for n = 1, latitude-longitude
    /// product rule for n = 2). Callers apply the r^{-n} normalization.
    pub fn sphere_quadrature(&self, center: Point, r: f64) -> Result<f64> {
        self.grid.check_ball(center, r)?;
        Ok(sphere_quadrature_fn(
            self.grid.thin_dim(),
            center,
            r,
            sphere_point_count(r, self.grid.spacing()),
            |x| self.interpolate_unchecked(x),
        ))
    }

    /// Raw integral of |grad field|^2 over the ball B_r(center): sum of
    /// centered-difference gradients at the centers of grid cells lying
    /// in the ball, times cell volume. Cells are enumerated on both
    /// sides of the thin space (the reflected half reads mirrored
    /// values), which doubles the stored half exactly for thin centers.
    pub fn ball_quadrature_grad_sq(&self, center: Point, r: f64) -> Result<f64> {
        self.grid.check_ball(center, r)?;
        let g = &self.grid;
        let h = g.spacing();
        let nx = g.nodes();
        let nv = g.vertical_nodes() as isize;
        let r2 = r * r;

        let cell_range = |c: f64, lo: isize, hi: isize| -> (isize, isize) {
            let a = (((c - r) + 1.0) / h - 0.5).floor() as isize;
            let b = (((c + r) + 1.0) / h - 0.5).ceil() as isize;
            (a.max(lo), b.min(hi))
        };
        let (x0, x1) = cell_range(center[0], 0, nx as isize - 2);
        let kz0 = ((center[2] - r) / h - 0.5).floor() as isize;
        let kz1 = ((center[2] + r) / h - 0.5).ceil() as isize;
        let (z0, z1) = (kz0.max(1 - nv), kz1.min(nv - 2));

        let mut acc = 0.0;
        if g.n == 1 {
            let inv = 1.0 / (2.0 * h);
            for kz in z0..=z1 {
                let cz = (kz as f64 + 0.5) * h - center[2];
                // Node row indices for the two cell corners, reflected.
                let (ka, kb) = (kz.unsigned_abs(), (kz + 1).unsigned_abs());
                for kx in x0..=x1 {
                    let cx = -1.0 + (kx as f64 + 0.5) * h - center[0];
                    if cx * cx + cz * cz > r2 {
                        continue;
                    }
                    let i = kx as usize;
                    let v00 = self.values[g.index(i, 0, ka)];
                    let v10 = self.values[g.index(i + 1, 0, ka)];
                    let v01 = self.values[g.index(i, 0, kb)];
                    let v11 = self.values[g.index(i + 1, 0, kb)];
                    let gx = (v10 - v00 + v11 - v01) * inv;
                    let gz = (v01 - v00 + v11 - v10) * inv;
                    acc += gx * gx + gz * gz;
                }
            }
            Ok(acc * h * h)
        } else {
            let (y0, y1) = cell_range(center[1], 0, nx as isize - 2);
            let inv = 1.0 / (4.0 * h);
            for kz in z0..=z1 {
                let cz = (kz as f64 + 0.5) * h - center[2];
                let (ka, kb) = (kz.unsigned_abs(), (kz + 1).unsigned_abs());
                for ky in y0..=y1 {
                    let cy = -1.0 + (ky as f64 + 0.5) * h - center[1];
                    if cy * cy + cz * cz > r2 {
                        continue;
                    }
                    for kx in x0..=x1 {
                        let cx = -1.0 + (kx as f64 + 0.5) * h - center[0];
                        if cx * cx + cy * cy + cz * cz > r2 {
                            continue;
                        }
                        let (i, j) = (kx as usize, ky as usize);
                        let c = [
                            self.values[g.index(i, j, ka)],
                            self.values[g.index(i + 1, j, ka)],
                            self.values[g.index(i, j + 1, ka)],
                            self.values[g.index(i + 1, j + 1, ka)],
                            self.values[g.index(i, j, kb)],
                            self.values[g.index(i + 1, j, kb)],
                            self.values[g.index(i, j + 1, kb)],
                            self.values[g.index(i + 1, j + 1, kb)],
                        ];
                        let gx = (c[1] - c[0] + c[3] - c[2] + c[5] - c[4] + c[7] - c[6]) * inv;
                        let gy = (c[2] - c[0] + c[3] - c[1] + c[6] - c[4] + c[7] - c[5]) * inv;
                        let gz = (c[4] - c[0] + c[5] - c[1] + c[6] - c[2] + c[7] - c[3]) * inv;
                        acc += gx * gx + gy * gy + gz * gz;
                    }
                }
            }
            Ok(acc * h * h * h)
        }
    }

    /// Serializes as a single JSON header line followed by the raw
    /// little-endian f64 node values. Round-trips bit-identically.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let header = FieldHeader {
            n: self.grid.thin_dim(),
            nodes: self.grid.nodes(),
            h: self.grid.spacing(),
            symmetry: "even".to_string(),
        };
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut header_bytes = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            header_bytes.push(byte[0]);
            if header_bytes.len() > 4096 {
                return Err(CoreError::FieldFormat("header line exceeds 4096 bytes".into()));
            }
        }
        let header: FieldHeader = serde_json::from_slice(&header_bytes)?;
        let grid = Grid::new(header.n, header.nodes)?;
        if (header.h - grid.spacing()).abs() > GEOM_EPS {
            return Err(CoreError::FieldFormat(format!(
                "header spacing {} does not match 2/(N-1) = {}",
                header.h,
                grid.spacing()
            )));
        }
        if header.symmetry != "even" {
            return Err(CoreError::FieldFormat(format!("unsupported symmetry {:?}", header.symmetry)));
        }
        let mut values = vec![0.0; grid.num_nodes()];
        let mut buf = [0u8; 8];
        for v in values.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        ScalarField::from_values(grid, values)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    n: usize,
    #[serde(rename = "N")]
    nodes: usize,
    h: f64,
    symmetry: String,
}

#[inline]
fn cell_frac(u: f64, size: usize) -> (usize, f64) {
    let max_cell = size - 2;
    let i = u.floor();
    if i < 0.0 {
        (0, 0.0)
    } else if i as usize > max_cell {
        (max_cell, 1.0)
    } else {
        (i as usize, u - i)
    }
}

/// Number of quadrature points per great circle at radius `r` on a grid
/// of spacing `h`.
pub fn sphere_point_count(r: f64, h: f64) -> usize {
    let m = (4.0 * std::f64::consts::PI * r / h).ceil() as usize;
    m.max(64)
}

/// Surface quadrature of an arbitrary function over the sphere of
/// radius `r`: trapezoid rule on equispaced circle points for n = 1,
/// longitude-trapezoid x midpoint-in-cos(theta) product rule for n = 2.
/// Returns the raw (unnormalized) surface integral.
pub fn sphere_quadrature_fn(
    n: usize,
    center: Point,
    r: f64,
    points: usize,
    mut f: impl FnMut(Point) -> f64,
) -> f64 {
    use std::f64::consts::PI;
    if n == 1 {
        let m = points;
        let w = 2.0 * PI * r / m as f64;
        let mut acc = 0.0;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            acc += f([center[0] + r * th.cos(), 0.0, center[2] + r * th.sin()]);
        }
        acc * w
    } else {
        let m_phi = points;
        let m_th = (points / 2).max(32);
        let w = r * r * (2.0 / m_th as f64) * (2.0 * PI / m_phi as f64);
        let mut acc = 0.0;
        for kt in 0..m_th {
            let s = -1.0 + (kt as f64 + 0.5) * 2.0 / m_th as f64;
            let sin_th = (1.0 - s * s).sqrt();
            for kp in 0..m_phi {
                let phi = 2.0 * PI * kp as f64 / m_phi as f64;
                acc += f([
                    center[0] + r * sin_th * phi.cos(),
                    center[1] + r * sin_th * phi.sin(),
                    center[2] + r * s,
                ]);
            }
        }
        acc * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1() -> Grid {
        Grid::new(1, 129).unwrap()
    }

    fn grid2() -> Grid {
        Grid::new(2, 65).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(3, 65).is_err());
        assert!(Grid::new(1, 64).is_err());
        assert!(Grid::new(1, 31).is_err());
    }

    #[test]
    fn node_coordinates_reproduce_exactly() {
        let g = grid1();
        let h = g.spacing();
        assert_eq!(g.thin_coord(0), -1.0);
        assert_eq!(g.thin_coord(g.nodes() - 1), -1.0 + (g.nodes() - 1) as f64 * h);
        assert_eq!(g.vertical_coord(0), 0.0);
        assert_eq!(g.vertical_coord(g.vertical_nodes() - 1), 1.0);
        // The thin space is a grid plane.
        assert_eq!(g.vertical_nodes(), (g.nodes() - 1) / 2 + 1);
    }

    #[test]
    fn interpolation_constant_field() {
        for g in [grid1(), grid2()] {
            let f = ScalarField::from_fn(g, |_| 1.0);
            let y = if g.thin_dim() == 2 { 0.21 } else { 0.0 };
            assert_eq!(f.interpolate([0.137, y, 0.4]).unwrap(), 1.0);
        }
    }

    #[test]
    fn interpolation_exact_on_coordinate_function() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0]);
        let h = g.spacing();
        let x = -1.0 + 37.3 * h;
        let v = f.interpolate([x, 0.0, 0.55]).unwrap();
        assert!((v - x).abs() < 1e-14, "got {v}, want {x}");
    }

    #[test]
    fn interpolation_reflects_evenly() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0] + x[2]);
        let up = f.interpolate([0.3, 0.0, 0.41]).unwrap();
        let down = f.interpolate([0.3, 0.0, -0.41]).unwrap();
        assert_eq!(up, down);
    }

    #[test]
    fn interpolation_quadratic_error_bound() {
        // Midway between nodes the error of multilinear interpolation of
        // x^2 is exactly h^2/4; 100 random points stay within that bound.
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0]);
        let h = g.spacing();
        let mut rng = make_rng(7);
        for _ in 0..100 {
            let x = rng_in(&mut rng, -0.99, 0.99);
            let z = rng_in(&mut rng, 0.0, 0.99);
            let v = f.interpolate([x, 0.0, z]).unwrap();
            assert!((v - x * x).abs() <= h * h / 4.0 + 1e-15);
        }
    }

    #[test]
    fn interpolation_out_of_domain() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |_| 0.0);
        assert!(matches!(f.interpolate([1.5, 0.0, 0.0]), Err(CoreError::OutOfDomain { .. })));
        assert!(matches!(f.interpolate([0.0, 0.0, 1.2]), Err(CoreError::OutOfDomain { .. })));
    }

    #[test]
    fn circle_circumference() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |_| 1.0);
        let got = f.sphere_quadrature([0.0; 3], 0.5).unwrap();
        assert!((got - std::f64::consts::PI).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn sphere_area() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |_| 1.0);
        let r = 0.5;
        let got = f.sphere_quadrature([0.0; 3], r).unwrap();
        let want = 4.0 * std::f64::consts::PI * r * r;
        assert!((got - want).abs() < 1e-9 * want, "got {got}, want {want}");
    }

    #[test]
    fn sphere_quadrature_parity_cancellation() {
        // x^2 - z^2 integrates to zero over circles (mean of cos 2theta).
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0] - x[2] * x[2]);
        let got = f.sphere_quadrature([0.0; 3], 0.4).unwrap();
        assert!(got.abs() < 1e-8, "got {got}");
    }

    #[test]
    fn sphere_quadrature_against_dense_oracle() {
        // (x^2 - z^2)^2 on the circle of radius ~1, against a brute-force
        // quadrature of the closed form with 1e6 points.
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0] - x[2] * x[2]);
        let r = 0.995;
        let got = f.sphere_quadrature([0.0; 3], r).unwrap();
        let oracle = sphere_quadrature_fn(1, [0.0; 3], r, 1_000_000, |x| {
            let p = x[0] * x[0] - x[2] * x[2];
            p * p
        });
        // The interpolated square differs from the exact square only
        // through the O(h^2) sampling error.
        assert!(
            (got - oracle).abs() <= 1e-4 * oracle.abs(),
            "got {got}, oracle {oracle}"
        );
    }

    #[test]
    fn sphere_quadrature_rejects_small_radius_and_escape() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |_| 1.0);
        let h = g.spacing();
        assert!(matches!(
            f.sphere_quadrature([0.0; 3], 3.0 * h),
            Err(CoreError::ResolutionTooCoarse { .. })
        ));
        assert!(matches!(
            f.sphere_quadrature([0.9, 0.0, 0.0], 0.5),
            Err(CoreError::BallExitsBox { .. })
        ));
    }

    #[test]
    fn ball_gradient_constant_is_zero() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |_| 3.25);
        assert_eq!(f.ball_quadrature_grad_sq([0.0; 3], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn ball_gradient_linear_gives_disc_area() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| x[0]);
        let r = 0.5;
        let got = f.ball_quadrature_grad_sq([0.0; 3], r).unwrap();
        let want = std::f64::consts::PI * r * r;
        assert!((got - want).abs() < 0.02 * want, "got {got}, want {want}");
    }

    #[test]
    fn ball_gradient_matches_closed_form_for_half_plane_solution() {
        // u = Re (x + i|z|)^{3/2} has |grad u|^2 = (9/4) |x|, so the raw
        // integral over B_r is (3 pi / 2) r^3.
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| {
            let (s, z) = (x[0], x[2].abs());
            let rr = (s * s + z * z).sqrt();
            let th = z.atan2(s);
            rr.powf(1.5) * (1.5 * th).cos()
        });
        let r = 0.5;
        let got = f.ball_quadrature_grad_sq([0.0; 3], r).unwrap();
        let want = 1.5 * std::f64::consts::PI * r * r * r;
        assert!((got - want).abs() < 0.03 * want, "got {got}, want {want}");
    }

    #[test]
    fn quadrature_scaling_of_multilinear_quadratic() {
        // x1*x2 is multilinear, hence represented exactly; the raw
        // surface integral of its square must scale as r^{n+4}.
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| x[0] * x[1]);
        let h = g.spacing();
        let mut consts = Vec::new();
        let mut r = 4.0 * h;
        while r <= 0.9 {
            let raw = f.sphere_quadrature([0.0; 3], r).unwrap();
            consts.push(raw / r.powi(6));
            r *= 1.25;
        }
        let (lo, hi) = consts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo - 1.0 <= 0.01, "drift {}", hi / lo - 1.0);
    }

    #[test]
    fn refinement_improves_smooth_quadrature() {
        let exact = |x: Point| (1.3 * x[0]).sin() * (1.3 * x[2]).cosh();
        let r = 0.55;
        let oracle = sphere_quadrature_fn(1, [0.0; 3], r, 500_000, |x| exact(x) * exact(x));
        let err = |nodes: usize| {
            let g = Grid::new(1, nodes).unwrap();
            let f = ScalarField::from_fn(g, exact);
            let got = sphere_quadrature_fn(1, [0.0; 3], r, 500_000, |x| {
                let v = f.interpolate_unchecked(x);
                v * v
            });
            (got - oracle).abs()
        };
        let coarse = err(65);
        let fine = err(129);
        assert!(coarse / fine >= 3.0, "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn field_roundtrip_bit_identical() {
        let g = grid1();
        let f = ScalarField::from_fn(g, |x| (x[0] * 17.0).sin() + x[2]);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = ScalarField::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(f, back);
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    fn make_rng(seed: u64) -> impl rand::Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn rng_in(rng: &mut impl rand::Rng, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * rng.gen::<f64>()
    }

    proptest! {
        #[test]
        fn interpolation_exact_on_multilinear(
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            c in -2.0f64..2.0,
            d in -2.0f64..2.0,
            px in -0.999f64..0.999,
            pz in -0.999f64..0.999,
        ) {
            // Even multilinear in (x, z): a + b x + (c + d x)|z|.
            let g = Grid::new(1, 65).unwrap();
            let f = ScalarField::from_fn(g, |x| a + b * x[0] + (c + d * x[0]) * x[2].abs());
            let want = a + b * px + (c + d * px) * pz.abs();
            let got = f.interpolate([px, 0.0, pz]).unwrap();
            prop_assert!((got - want).abs() < 1e-12);
        }

        #[test]
        fn quadrature_linear_and_positive(
            alpha in -3.0f64..3.0,
            r in 0.2f64..0.8,
        ) {
            let g = Grid::new(1, 65).unwrap();
            let f = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (x[0] * 2.0).cos() + x[2] * x[2]);
            let fs = ScalarField::from_fn(g, |x| alpha * (1.0 + 0.3 * (x[0] * 2.0).cos() + x[2] * x[2]));
            let q = f.sphere_quadrature([0.0;3], r).unwrap();
            let qs = fs.sphere_quadrature([0.0;3], r).unwrap();
            prop_assert!((qs - alpha * q).abs() <= 1e-12 * q.abs().max(1.0));
            // Positive on nonnegative integrands.
            prop_assert!(q > 0.0);
        }
    }
}
