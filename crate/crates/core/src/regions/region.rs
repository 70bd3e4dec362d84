//! Rate regions and their two-dimensional boundaries.

use std::io::Write;

use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-12;

/// Half-plane `coefficients . r <= cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumBound {
    pub coefficients: Vec<f64>,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Empty,
    /// Box clipped by half-planes.
    Polytope,
    /// Union of boxes `[0, c]` over the listed corners.
    BoxUnion(Vec<Vec<f64>>),
    /// Convex polygon given by its boundary.
    Hull,
}

/// A region of rate tuples in the non-negative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    dims: usize,
    axis_bounds: Vec<f64>,
    sum_bounds: Vec<SumBound>,
    shape: Shape,
    /// Counter-clockwise boundary starting at the origin (two dimensions).
    boundary: Vec<[f64; 2]>,
}

impl RateRegion {
    pub fn empty(dims: usize) -> Self {
        Self {
            dims,
            axis_bounds: vec![0.0; dims],
            sum_bounds: Vec::new(),
            shape: Shape::Empty,
            boundary: Vec::new(),
        }
    }

    /// `{0 <= r_k <= axis_bounds[k]} ∩ {c . r <= cap}`.
    pub fn polytope(axis_bounds: Vec<f64>, sum_bounds: Vec<SumBound>) -> Result<Self> {
        let dims = axis_bounds.len();
        if dims == 0 {
            return Err(Error::DimensionMismatch("region needs at least one axis".into()));
        }
        if sum_bounds.iter().any(|b| b.coefficients.len() != dims) {
            return Err(Error::DimensionMismatch("sum bound of wrong dimension".into()));
        }
        if axis_bounds.iter().any(|&b| b < 0.0) || sum_bounds.iter().any(|b| b.cap < 0.0) {
            return Ok(Self::empty(dims));
        }
        let boundary = if dims == 2 {
            let [a, b] = [axis_bounds[0], axis_bounds[1]];
            let mut poly = vec![[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]];
            for s in &sum_bounds {
                poly = clip(&poly, s.coefficients[0], s.coefficients[1], s.cap);
            }
            dedupe(poly)
        } else {
            Vec::new()
        };
        Ok(Self {
            dims,
            axis_bounds,
            sum_bounds,
            shape: Shape::Polytope,
            boundary,
        })
    }

    /// Union of the boxes `[0, c]`. Dominated corners are dropped.
    pub fn box_union(corners: Vec<Vec<f64>>, dims: usize) -> Result<Self> {
        if corners.iter().any(|c| c.len() != dims) {
            return Err(Error::DimensionMismatch("corner of wrong dimension".into()));
        }
        let corners: Vec<Vec<f64>> = corners
            .into_iter()
            .map(|c| c.into_iter().map(|v| v.max(0.0)).collect())
            .collect();
        let pareto = pareto_front(&corners);
        if pareto.is_empty() {
            return Ok(Self::empty(dims));
        }
        let mut axis_bounds = vec![0.0; dims];
        for c in &pareto {
            for (b, &v) in axis_bounds.iter_mut().zip(c) {
                *b = f64::max(*b, v);
            }
        }
        let boundary = if dims == 2 { staircase(&pareto) } else { Vec::new() };
        Ok(Self {
            dims,
            axis_bounds,
            sum_bounds: Vec::new(),
            shape: Shape::BoxUnion(pareto),
            boundary,
        })
    }

    /// Convex hull of the origin and the given points in two dimensions.
    pub fn hull(points: &[[f64; 2]]) -> Self {
        let snap = |v: f64| (v.max(0.0) / GEOM_TOL).round() * GEOM_TOL;
        let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [snap(p[0]), snap(p[1])]).collect();
        pts.push([0.0, 0.0]);
        let boundary = convex_hull(pts);
        let mut axis_bounds = vec![0.0, 0.0];
        for p in &boundary {
            axis_bounds[0] = f64::max(axis_bounds[0], p[0]);
            axis_bounds[1] = f64::max(axis_bounds[1], p[1]);
        }
        Self {
            dims: 2,
            axis_bounds,
            sum_bounds: Vec::new(),
            shape: Shape::Hull,
            boundary,
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.shape == Shape::Empty
    }

    /// Largest achievable value of each rate.
    pub fn axis_bounds(&self) -> &[f64] {
        &self.axis_bounds
    }

    pub fn sum_bounds(&self) -> &[SumBound] {
        &self.sum_bounds
    }

    /// Pareto corners of a box union.
    pub fn corners(&self) -> Option<&[Vec<f64>]> {
        match &self.shape {
            Shape::BoxUnion(c) => Some(c),
            _ => None,
        }
    }

    /// Boundary polygon, counter-clockwise from the origin.
    pub fn boundary(&self) -> &[[f64; 2]] {
        &self.boundary
    }

    /// Maximal sum rate over the region.
    pub fn max_sum_rate(&self) -> f64 {
        match &self.shape {
            Shape::Empty => 0.0,
            Shape::BoxUnion(c) => c.iter().map(|v| v.iter().sum::<f64>()).fold(0.0, f64::max),
            Shape::Hull => self.boundary.iter().map(|p| p[0] + p[1]).fold(0.0, f64::max),
            Shape::Polytope => {
                if self.dims == 2 {
                    self.boundary.iter().map(|p| p[0] + p[1]).fold(0.0, f64::max)
                } else {
                    let axes: f64 = self.axis_bounds.iter().sum();
                    self.sum_bounds
                        .iter()
                        .filter(|b| b.coefficients.iter().all(|&c| c == 1.0))
                        .map(|b| b.cap)
                        .fold(axes, f64::min)
                }
            }
        }
    }

    pub fn contains(&self, r: &[f64], tol: f64) -> bool {
        if r.len() != self.dims || r.iter().any(|&v| v < -tol) {
            return false;
        }
        match &self.shape {
            Shape::Empty => false,
            Shape::Polytope => {
                r.iter().zip(&self.axis_bounds).all(|(v, b)| *v <= b + tol)
                    && self.sum_bounds.iter().all(|s| {
                        s.coefficients.iter().zip(r).map(|(c, v)| c * v).sum::<f64>() <= s.cap + tol
                    })
            }
            Shape::BoxUnion(corners) => corners
                .iter()
                .any(|c| c.iter().zip(r).all(|(cv, rv)| *rv <= cv + tol)),
            Shape::Hull => {
                let b = &self.boundary;
                if b.len() < 3 {
                    return b.iter().any(|p| (p[0] - r[0]).abs() <= tol && (p[1] - r[1]).abs() <= tol)
                        || on_segments(b, r, tol);
                }
                (0..b.len()).all(|i| {
                    let p = b[i];
                    let q = b[(i + 1) % b.len()];
                    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                    cross(p, q, [r[0], r[1]]) >= -tol * len.max(1e-300)
                })
            }
        }
    }
}

fn on_segments(b: &[[f64; 2]], r: &[f64], tol: f64) -> bool {
    b.windows(2).any(|w| {
        let (p, q) = (w[0], w[1]);
        let len2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        if len2 == 0.0 {
            return false;
        }
        let t = ((r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1])) / len2;
        let t = t.clamp(0.0, 1.0);
        let d = ((p[0] + t * (q[0] - p[0]) - r[0]).powi(2) + (p[1] + t * (q[1] - p[1]) - r[1]).powi(2)).sqrt();
        d <= tol
    })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Sutherland-Hodgman clip of a convex polygon by `c0 x + c1 y <= cap`.
fn clip(poly: &[[f64; 2]], c0: f64, c1: f64, cap: f64) -> Vec<[f64; 2]> {
    let inside = |p: &[f64; 2]| c0 * p[0] + c1 * p[1] <= cap + GEOM_TOL;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (ci, ni) = (inside(&cur), inside(&next));
        if ci {
            out.push(cur);
        }
        if ci != ni {
            let fc = c0 * cur[0] + c1 * cur[1] - cap;
            let fnx = c0 * next[0] + c1 * next[1] - cap;
            let t = fc / (fc - fnx);
            out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
        }
    }
    out
}

fn dedupe(poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let close = |a: &[f64; 2], b: &[f64; 2]| (a[0] - b[0]).abs() <= GEOM_TOL && (a[1] - b[1]).abs() <= GEOM_TOL;
    let mut out: Vec<[f64; 2]> = Vec::new();
    for p in poly {
        if out.last().is_none_or(|l| !close(l, &p)) {
            out.push(p);
        }
    }
    while out.len() > 1 && close(&out[0], out.last().unwrap()) {
        out.pop();
    }
    out
}

fn pareto_front(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dominated = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).all(|(x, y)| x <= y) && a != b;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if points.iter().any(|q| dominated(p, q)) || out.contains(p) {
            continue;
        }
        out.push(p.clone());
    }
    out.sort_by(|a, b| b[0].total_cmp(&a[0]).then(a[1..].partial_cmp(&b[1..]).unwrap()));
    out
}

/// Boundary of a two-dimensional union of boxes, from the origin along the
/// first axis and back along the second.
fn staircase(pareto: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let mut v = vec![[0.0, 0.0], [pareto[0][0], 0.0]];
    for (i, c) in pareto.iter().enumerate() {
        v.push([c[0], c[1]]);
        if let Some(next) = pareto.get(i + 1) {
            v.push([next[0], c[1]]);
        }
    }
    v.push([0.0, pareto[pareto.len() - 1][1]]);
    dedupe(v)
}

/// Andrew's monotone chain, counter-clockwise from the lowest-leftmost
/// point, collinear points removed.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= GEOM_TOL && (a[1] - b[1]).abs() <= GEOM_TOL);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= GEOM_TOL {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= GEOM_TOL {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Boundary points for export: the polygon vertices with each edge
/// subdivided into `resolution` pieces. Two-dimensional regions only.
pub fn export_region(region: &RateRegion, resolution: usize) -> Result<Vec<[f64; 2]>> {
    if region.dims() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "boundary export needs a two-sender region, got {} rates",
            region.dims()
        )));
    }
    if resolution == 0 {
        return Err(Error::OutOfRange("resolution must be at least 1".into()));
    }
    let b = region.boundary();
    if b.len() <= 1 {
        return Ok(b.to_vec());
    }
    let mut out = Vec::with_capacity(b.len() * resolution);
    for i in 0..b.len() {
        let p = b[i];
        let q = b[(i + 1) % b.len()];
        for s in 0..resolution {
            let t = s as f64 / resolution as f64;
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    Ok(out)
}

/// Writes points as a two-column CSV table with header `r1,r2`.
pub fn write_csv<W: Write>(points: &[[f64; 2]], mut out: W) -> std::io::Result<()> {
    writeln!(out, "r1,r2")?;
    for p in points {
        writeln!(out, "{:.9},{:.9}", p[0], p[1])?;
    }
    Ok(())
}
