//! The regular pentagon, Minkowski differences of rotated copies, and the
//! constraint and verification samples of (x, α) space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::rotate;

/// Tolerance of the strict half-plane tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Points closer than this (relative to the extent) are merged by [`ConvexPolygon::hull`].
pub const MERGE_TOL: f64 = 1e-9;

/// Rotational symmetry order of the pentagon.
pub const SYMMETRY_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    /// Validates a counter-clockwise, strictly convex vertex list.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegeneratePolygon(format!("{n} vertices")));
        }
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c <= BOUNDARY_TOL {
                return Err(Error::DegeneratePolygon(format!("turn at vertex {} has cross product {c:e}", (i + 1) % n)));
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Convex hull by Andrew's monotone chain; collinear and repeated
    /// points are dropped.
    pub fn hull(points: &[[f64; 2]]) -> Result<Self> {
        let extent = points.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
        let tol = MERGE_TOL * extent.max(1.0);
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for p in points {
            if !pts.iter().any(|q| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol) {
                pts.push(*p);
            }
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        if pts.len() < 3 {
            return Err(Error::DegeneratePolygon(format!("{} distinct points", pts.len())));
        }
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= BOUNDARY_TOL {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= BOUNDARY_TOL {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon::new(lower)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    /// Supporting lines of the edges, in vertex order.
    pub fn facets(&self) -> Vec<Facet> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                let normal = [dy / len, -dx / len];
                Facet { normal, offset: normal[0] * a[0] + normal[1] * a[1] }
            })
            .collect()
    }

    pub fn contains_interior(&self, x: [f64; 2]) -> bool {
        self.facets().iter().all(|f| f.signed_distance(x) < -BOUNDARY_TOL)
    }

    pub fn scaled(&self, s: f64) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|v| [s * v[0], s * v[1]]).collect() }
    }
}

/// Half-plane `normal · x ≤ offset` with unit outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl Facet {
    pub fn signed_distance(&self, x: [f64; 2]) -> f64 {
        self.normal[0] * x[0] + self.normal[1] * x[1] - self.offset
    }

    pub fn normal_angle(&self) -> f64 {
        self.normal[1].atan2(self.normal[0])
    }
}

pub fn contains_interior(p: &ConvexPolygon, x: [f64; 2]) -> bool {
    p.contains_interior(x)
}

/// Regular pentagon with vertices `scale · (1/2)(cos 2πk/5, sin 2πk/5)`.
pub fn pentagon(scale: f64) -> Result<ConvexPolygon> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("pentagon scale {scale} must be positive")));
    }
    Ok(ConvexPolygon {
        vertices: (0..SYMMETRY_ORDER)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / SYMMETRY_ORDER as f64;
                [0.5 * scale * t.cos(), 0.5 * scale * t.sin()]
            })
            .collect(),
    })
}

pub fn pentagon_area(scale: f64) -> f64 {
    0.625 * scale * scale * (2.0 * PI / 5.0).sin()
}

/// `scale · (K − A(α)K)` as the hull of the 25 vertex differences.
pub fn minkowski_difference(alpha: f64, scale: f64) -> ConvexPolygon {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let k = pentagon(scale).expect("positive scale");
    let mut pts = Vec::with_capacity(25);
    for y in k.vertices() {
        for z in k.vertices() {
            let rz = rotate(alpha, *z);
            pts.push([y[0] - rz[0], y[1] - rz[1]]);
        }
    }
    ConvexPolygon::hull(&pts).expect("difference of pentagons is two-dimensional")
}

/// Whether `K°` and `(x + A(α)K)°` are disjoint for the scaled pentagon.
pub fn copies_disjoint(x: [f64; 2], alpha: f64, scale: f64) -> bool {
    !minkowski_difference(alpha, scale).contains_interior(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleTag {
    Constraint,
    Verification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: [f64; 2],
    pub rho: f64,
    pub theta: f64,
    pub alpha: f64,
    pub tag: SampleTag,
}

impl SamplePoint {
    pub fn new(x: [f64; 2], alpha: f64, tag: SampleTag) -> Self {
        let rho = x[0].hypot(x[1]);
        let theta = if rho == 0.0 { 0.0 } else { x[1].atan2(x[0]) };
        SamplePoint { x, rho, theta, alpha, tag }
    }
}

/// `count` equally spaced values on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

fn angle_key(a: f64) -> (f64, f64) {
    (a.abs(), -a)
}

fn better(a: f64, b: f64) -> bool {
    let (ka, kb) = (angle_key(a), angle_key(b));
    if (ka.0 - kb.0).abs() > BOUNDARY_TOL {
        ka.0 < kb.0
    } else {
        ka.1 < kb.1
    }
}

/// The two adjacent facets used by the symmetry-reduced sample: the facet
/// whose outward normal is closest to the positive x-axis (ties toward
/// positive angle) and its neighbour with the smaller normal angle.
pub fn sample_facets(p: &ConvexPolygon) -> [Facet; 2] {
    let facets = p.facets();
    let n = facets.len();
    let angles: Vec<f64> = facets.iter().map(Facet::normal_angle).collect();
    let mut first = 0;
    for i in 1..n {
        if better(angles[i], angles[first]) {
            first = i;
        }
    }
    let prev = (first + n - 1) % n;
    let next = (first + 1) % n;
    let second = if better(angles[prev], angles[next]) { prev } else { next };
    [facets[first], facets[second]]
}

/// Grid points of `[−1, 1]²` with `ρ ≤ 1` on the far side of one of the two
/// sample facets of `K − A(α)K`, for `alpha_count` values of α in `[−π/5, 0]`.
pub fn constraint_sample(alpha_count: usize, grid_n: usize) -> Result<Vec<SamplePoint>> {
    if alpha_count < 2 || grid_n < 2 {
        return Err(Error::InvalidParameter(format!(
            "constraint sample needs alpha_count >= 2 and grid_n >= 2, got {alpha_count} and {grid_n}"
        )));
    }
    let grid = linspace(-1.0, 1.0, grid_n);
    let mut out = Vec::new();
    for alpha in linspace(-PI / 5.0, 0.0, alpha_count) {
        let md = minkowski_difference(alpha, 1.0);
        let facets = sample_facets(&md);
        for &x1 in &grid {
            for &x2 in &grid {
                let x = [x1, x2];
                if x1.hypot(x2) > 1.0 {
                    continue;
                }
                if facets.iter().any(|f| f.signed_distance(x) >= -BOUNDARY_TOL) {
                    out.push(SamplePoint::new(x, alpha, SampleTag::Constraint));
                }
            }
        }
    }
    Ok(out)
}

/// One α value of the verification grid with its (possibly shrunk)
/// Minkowski difference.
#[derive(Debug, Clone)]
pub struct VerificationSlice {
    pub alpha: f64,
    facets: Vec<Facet>,
    grid: Vec<f64>,
    rho_max: f64,
}

impl VerificationSlice {
    fn keeps(&self, x: [f64; 2]) -> bool {
        x[0].hypot(x[1]) <= self.rho_max && !self.facets.iter().all(|f| f.signed_distance(x) < -BOUNDARY_TOL)
    }

    pub fn points(&self) -> impl Iterator<Item = SamplePoint> + '_ {
        self.grid.iter().flat_map(move |&x1| {
            self.grid.iter().filter_map(move |&x2| {
                let x = [x1, x2];
                self.keeps(x).then(|| SamplePoint::new(x, self.alpha, SampleTag::Verification))
            })
        })
    }
}

/// Deterministic stream over α ∈ [−π/5, π/5] × a `grid_n²` grid of
/// `[−1, 1]²`, keeping points with `ρ ≤ 1` outside `scale · (K − A(α)K)°`.
#[derive(Debug, Clone)]
pub struct VerificationSample {
    pub alpha_count: usize,
    pub grid_n: usize,
    pub scale: f64,
    pub margin: f64,
}

pub fn verification_sample(alpha_count: usize, grid_n: usize, scale: f64) -> VerificationSample {
    VerificationSample { alpha_count, grid_n, scale, margin: 0.0 }
}

impl VerificationSample {
    /// Widens the kept region by `margin`: the disc grows to `1 + margin`
    /// and the excluded difference shrinks inward by `margin`. Every point of
    /// the unwidened region then lies within the covering radius of a kept
    /// grid point.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin.max(0.0);
        self
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        linspace(-PI / 5.0, PI / 5.0, self.alpha_count)
    }

    pub fn grid_step(&self) -> f64 {
        if self.grid_n < 2 {
            2.0
        } else {
            2.0 / (self.grid_n - 1) as f64
        }
    }

    pub fn alpha_step(&self) -> f64 {
        if self.alpha_count < 2 {
            0.0
        } else {
            2.0 * PI / 5.0 / (self.alpha_count - 1) as f64
        }
    }

    pub fn slices(&self) -> Vec<VerificationSlice> {
        let grid = linspace(-1.0, 1.0, self.grid_n);
        self.alpha_values()
            .into_iter()
            .map(|alpha| {
                let facets = minkowski_difference(alpha, self.scale)
                    .facets()
                    .into_iter()
                    .map(|f| Facet { normal: f.normal, offset: f.offset - self.margin })
                    .collect();
                VerificationSlice { alpha, facets, grid: grid.clone(), rho_max: 1.0 + self.margin }
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = SamplePoint> {
        self.slices().into_iter().flat_map(|s| s.points().collect::<Vec<_>>())
    }

    pub fn count(&self) -> usize {
        self.slices().iter().map(|s| s.points().count()).sum()
    }
}

/// CSV of Minkowski-difference vertices: `alpha,vx,vy`.
pub fn minkowski_vertices_csv(alpha_count: usize) -> String {
    let mut s = String::from("alpha,vx,vy\n");
    for alpha in linspace(-PI / 5.0, 0.0, alpha_count) {
        for v in minkowski_difference(alpha, 1.0).vertices() {
            s.push_str(&format!("{alpha},{},{}\n", v[0], v[1]));
        }
    }
    s
}

/// CSV of the region `{(x, α) : x ∉ (K − A(α)K)°, ρ ≤ 1}` on a grid:
/// `x1,x2,alpha`.
pub fn region_csv(alpha_count: usize, grid_n: usize) -> String {
    let mut s = String::from("x1,x2,alpha\n");
    for p in verification_sample(alpha_count, grid_n, 1.0).iter() {
        s.push_str(&format!("{},{},{}\n", p.x[0], p.x[1], p.alpha));
    }
    s
}
