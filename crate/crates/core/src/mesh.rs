//! One-dimensional meshes, time grids and piecewise-constant cell fields.
//!
//! A [`Mesh1D`] is a list of strictly increasing face coordinates
//! `x_{i+1/2}` together with one collocation point `x_i` per cell. The
//! transport and conservation-law schemes read the mesh as one period of a
//! periodic line (the period is `faces[M] - faces[0]`); the heat scheme reads
//! it as a partition of a bounded interval with Dirichlet ends.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Faces and collocation points of a 1D mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeshDocument")]
pub struct Mesh1D {
    faces: Vec<f64>,
    points: Vec<f64>,
}

#[derive(Deserialize)]
struct MeshDocument {
    faces: Vec<f64>,
    points: Vec<f64>,
}

impl TryFrom<MeshDocument> for Mesh1D {
    type Error = Error;

    fn try_from(doc: MeshDocument) -> Result<Self> {
        Mesh1D::new(doc.faces, doc.points)
    }
}

/// The three spacing families attached to a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Spacings {
    /// `x_i - x_{i-1}` (periodic wrap for `i = 0`).
    pub h_half: Vec<f64>,
    /// `(x_{i+1} - x_{i-1}) / 2` (periodic wrap at both ends).
    pub h_center: Vec<f64>,
    /// Cell widths `x_{i+1/2} - x_{i-1/2}`.
    pub widths: Vec<f64>,
}

impl Mesh1D {
    /// Builds a mesh after checking that faces increase strictly and every
    /// point lies strictly inside its cell.
    pub fn new(faces: Vec<f64>, points: Vec<f64>) -> Result<Self> {
        if faces.len() < 2 {
            return Err(Error::InvalidMesh("need at least two faces".into()));
        }
        if points.len() + 1 != faces.len() {
            return Err(Error::InvalidMesh(format!(
                "{} faces require {} points, got {}",
                faces.len(),
                faces.len() - 1,
                points.len()
            )));
        }
        if faces.iter().chain(&points).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("non-finite coordinate".into()));
        }
        for (i, (w, p)) in faces.windows(2).zip(&points).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidMesh(format!(
                    "faces not strictly increasing at cell {i}"
                )));
            }
            if !(w[0] < *p && *p < w[1]) {
                return Err(Error::InvalidMesh(format!(
                    "point {p} outside cell {i} = ]{}, {}[",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { faces, points })
    }

    /// Equispaced faces on `[a, b]` with points at cell midpoints.
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
        }
        if cells == 0 {
            return Err(Error::InvalidArgument("cell count must be positive".into()));
        }
        let h = (b - a) / cells as f64;
        let mut faces: Vec<f64> = (0..cells).map(|i| a + i as f64 * h).collect();
        faces.push(b);
        let points = midpoints(&faces);
        Self::new(faces, points)
    }

    /// Points alternating spacings `h/2` and `h`, starting at `x_0 = a`, on
    /// the period `[a, b)`. Faces sit at point midpoints, so every cell is
    /// `](x_{i-1} + x_i)/2, (x_i + x_{i+1})/2[` and every centered spacing
    /// equals `3h/4`.
    pub fn alternating(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("need h > 0, got {h}")));
        }
        let length = b - a;
        let pair = 1.5 * h;
        let pairs = (length / pair).round();
        if pairs < 1.0 || (pairs * pair - length).abs() > 1e-9 * length {
            return Err(Error::InvalidArgument(format!(
                "length {length} is not a multiple of 3h/2 = {pair}"
            )));
        }
        let pairs = pairs as usize;
        let mut points = Vec::with_capacity(2 * pairs);
        for k in 0..pairs {
            let base = a + k as f64 * pair;
            points.push(base);
            points.push(base + 0.5 * h);
        }
        let m = points.len();
        let mut faces = Vec::with_capacity(m + 1);
        faces.push(0.5 * (points[m - 1] - length + points[0]));
        faces.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        faces.push(0.5 * (points[m - 1] + b));
        Self::new(faces, points)
    }

    /// Random cell widths drawn in `[1, ratio_bound]` (then rescaled to fill
    /// `[a, b]`), points at midpoints.
    ///
    /// Widths come from SplitMix64 seeded with `seed`: each draw takes the top
    /// 53 bits of `next_u64()` as `U = (bits >> 11) * 2^-53` and sets
    /// `w_i = 1 + (ratio_bound - 1) U`. Faces are `a + (b - a) S_k / S_M`
    /// with `S_k` the running sum, and the last face is `b` exactly.
    pub fn random(a: f64, b: f64, cells: usize, ratio_bound: f64, seed: u64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
        }
        if cells == 0 {
            return Err(Error::InvalidArgument("cell count must be positive".into()));
        }
        if !(ratio_bound >= 1.0) || !ratio_bound.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ratio bound must be >= 1, got {ratio_bound}"
            )));
        }
        let mut rng = SplitMix64::seed_from_u64(seed);
        let widths: Vec<f64> = (0..cells)
            .map(|_| 1.0 + (ratio_bound - 1.0) * unit_draw(&mut rng))
            .collect();
        let total: f64 = widths.iter().sum();
        let mut faces = Vec::with_capacity(cells + 1);
        let mut running = 0.0;
        faces.push(a);
        for w in &widths[..cells - 1] {
            running += w;
            faces.push(a + (b - a) * (running / total));
        }
        faces.push(b);
        let points = midpoints(&faces);
        Self::new(faces, points)
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cells(&self) -> usize {
        self.points.len()
    }

    /// Length of one period, `faces[M] - faces[0]`.
    pub fn period(&self) -> f64 {
        self.faces[self.faces.len() - 1] - self.faces[0]
    }

    /// Point of the cell left of `i` on the periodic line (shifted by one
    /// period when `i = 0`).
    pub fn left_point(&self, i: usize) -> f64 {
        if i == 0 {
            self.points[self.cells() - 1] - self.period()
        } else {
            self.points[i - 1]
        }
    }

    /// Point of the cell right of `i` on the periodic line.
    pub fn right_point(&self, i: usize) -> f64 {
        if i + 1 == self.cells() {
            self.points[0] + self.period()
        } else {
            self.points[i + 1]
        }
    }

    pub fn widths(&self) -> Vec<f64> {
        self.faces.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn spacings(&self) -> Spacings {
        let m = self.cells();
        let h_half = (0..m).map(|i| self.points[i] - self.left_point(i)).collect();
        let h_center = (0..m)
            .map(|i| 0.5 * (self.right_point(i) - self.left_point(i)))
            .collect();
        Spacings {
            h_half,
            h_center,
            widths: self.widths(),
        }
    }

    /// Largest point spacing `max_i (x_i - x_{i-1})`, the `h` of the
    /// finite-difference setting.
    pub fn max_spacing(&self) -> f64 {
        self.spacings().h_half.into_iter().fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings()
            .h_half
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_width(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        self.widths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Mesh on the points `(x_i + x_{i+1})/2`, with the old points as its
    /// faces. Its `h_half[i]` equals this mesh's `h_center[i]`.
    pub fn midpoint_shift(&self) -> Mesh1D {
        let m = self.cells();
        let points: Vec<f64> = (0..m)
            .map(|i| 0.5 * (self.points[i] + self.right_point(i)))
            .collect();
        let mut faces = self.points.clone();
        faces.push(self.points[0] + self.period());
        Self::new(faces, points).expect("midpoints of a valid mesh form a valid mesh")
    }

    /// Wraps `x` into the period `[faces[0], faces[M])`.
    pub fn wrap(&self, x: f64) -> f64 {
        wrap_into(x, self.faces[0], self.period())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Wraps `x` into `[origin, origin + period)`.
pub fn wrap_into(x: f64, origin: f64, period: f64) -> f64 {
    let y = origin + (x - origin).rem_euclid(period);
    // rem_euclid can round up to exactly `period`
    if y >= origin + period {
        origin
    } else {
        y
    }
}

fn midpoints(faces: &[f64]) -> Vec<f64> {
    faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

pub(crate) fn unit_draw(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform time grid `t_n = n dt`, `dt = T/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    final_time: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 time steps, got {steps}"
            )));
        }
        Ok(Self {
            final_time,
            steps,
            dt: final_time / steps as f64,
        })
    }

    /// Fewest steps (at least 2) whose `dt` does not exceed `max_dt`.
    pub fn with_max_step(final_time: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "maximal step must be positive, got {max_dt}"
            )));
        }
        let steps = ((final_time / max_dt) * (1.0 - 1e-14)).ceil().max(2.0) as usize;
        Self::new(final_time, steps)
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.final_time
        } else {
            n as f64 * self.dt
        }
    }
}

/// Piecewise-constant function on a mesh at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField<'m> {
    mesh: &'m Mesh1D,
    values: Vec<f64>,
    time: f64,
}

impl<'m> CellField<'m> {
    pub fn new(mesh: &'m Mesh1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != mesh.cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} cells",
                values.len(),
                mesh.cells()
            )));
        }
        Ok(Self { mesh, values, time })
    }

    /// Samples `f` at the collocation points.
    pub fn sample(mesh: &'m Mesh1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh.points().iter().map(|&x| f(x)).collect();
        Self { mesh, values, time }
    }

    pub fn zeros(mesh: &'m Mesh1D, time: f64) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.cells()],
            time,
        }
    }

    pub fn mesh(&self) -> &'m Mesh1D {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `sum_i |K_i| u_i`.
    pub fn integral(&self) -> f64 {
        self.mesh
            .widths()
            .iter()
            .zip(&self.values)
            .map(|(w, u)| w * u)
            .sum()
    }
}
