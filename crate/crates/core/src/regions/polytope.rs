//! Polytopes `{c >= 0 : A c = b}` described by a particular solution and an
//! orthonormal basis of the null space of `A`.

use nalgebra::{DMatrix, DVector};

const RANK_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// Least-norm solution of `A c = b`.
    pub origin: DVector<f64>,
    /// Columns span the null space of `A`.
    pub null: DMatrix<f64>,
    /// Orthonormal rows spanning the row space of `A`.
    basis: DMatrix<f64>,
    /// `basis * c` on the affine set.
    target: DVector<f64>,
}

/// Orthogonalizes `v` against `basis` twice, returning the remainder.
fn orthogonalize(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for _ in 0..2 {
        for q in basis {
            let d = q.dot(&r);
            r.axpy(-d, q, 1.0);
        }
    }
    r
}

impl Polytope {
    /// Builds the polytope. All constraint rows must have non-negative
    /// coefficients, which lets zero right-hand sides pin variables to zero.
    /// Returns `None` when the affine system is inconsistent.
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>, dim: usize) -> Option<Polytope> {
        let mut fixed_zero = vec![false; dim];
        for (row, &b) in rows.iter().zip(&rhs) {
            if b.abs() <= 1e-15 {
                for (j, &v) in row.iter().enumerate() {
                    if v > 0.0 {
                        fixed_zero[j] = true;
                    }
                }
            }
        }
        let mut all_rows = rows;
        let mut all_rhs = rhs;
        for (j, &z) in fixed_zero.iter().enumerate() {
            if z {
                let mut r = vec![0.0; dim];
                r[j] = 1.0;
                all_rows.push(r);
                all_rhs.push(0.0);
            }
        }
        let m = all_rows.len();
        let a = DMatrix::from_fn(m, dim, |i, j| all_rows[i][j]);
        let b = DVector::from_vec(all_rhs);

        // Row basis by Gram-Schmidt, taking the row with the largest
        // remainder first so near-dependent rows are dropped last.
        let scale = (0..m).map(|i| a.row(i).norm()).fold(0.0, f64::max).max(1.0);
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut target: Vec<f64> = Vec::new();
        let mut pending: Vec<(DVector<f64>, f64)> = (0..m).map(|i| (a.row(i).transpose(), b[i])).collect();
        loop {
            let mut best: Option<(usize, f64, DVector<f64>, f64)> = None;
            for (i, (row, rhs)) in pending.iter().enumerate() {
                let mut r = orthogonalize(row, &basis);
                // Carry the right-hand side through the same elimination.
                let proj: Vec<f64> = basis.iter().map(|q| q.dot(row)).collect();
                let t = *rhs - proj.iter().zip(&target).map(|(c, tq)| c * tq).sum::<f64>();
                let norm = r.norm();
                if best.as_ref().is_none_or(|bst| norm > bst.1) {
                    r /= norm.max(f64::MIN_POSITIVE);
                    best = Some((i, norm, r, t / norm.max(f64::MIN_POSITIVE)));
                }
            }
            match best {
                Some((i, norm, q, t)) if norm > RANK_TOL * scale => {
                    pending.swap_remove(i);
                    basis.push(q);
                    target.push(t);
                }
                _ => break,
            }
        }
        let r = basis.len();
        let basis_m = DMatrix::from_fn(r, dim, |i, j| basis[i][j]);
        let target_v = DVector::from_vec(target);
        let origin = basis_m.transpose() * &target_v;
        let residual = (&a * &origin - &b).amax();
        if residual > FEAS_TOL {
            return None;
        }
        let mut null_cols: Vec<DVector<f64>> = Vec::new();
        let mut all = basis.clone();
        for j in 0..dim {
            let e = DVector::from_fn(dim, |i, _| if i == j { 1.0 } else { 0.0 });
            let v = orthogonalize(&e, &all);
            let norm = v.norm();
            if norm > 1e-8 {
                let v = v / norm;
                all.push(v.clone());
                null_cols.push(v);
            }
            if all.len() == dim {
                break;
            }
        }
        let null = DMatrix::from_fn(dim, null_cols.len(), |i, j| null_cols[j][i]);
        Some(Polytope {
            a,
            b,
            origin,
            null,
            basis: basis_m,
            target: target_v,
        })
    }

    pub fn null_dim(&self) -> usize {
        self.null.ncols()
    }

    pub fn point(&self, z: &[f64]) -> DVector<f64> {
        let mut c = self.origin.clone();
        for (j, &zj) in z.iter().enumerate() {
            c.axpy(zj, &self.null.column(j), 1.0);
        }
        c
    }

    /// Largest constraint violation `max(-c_i)` and affine residual.
    pub fn violation(&self, c: &DVector<f64>) -> f64 {
        let neg = c.iter().map(|&v| -v).fold(0.0, f64::max);
        let res = (&self.a * c - &self.b).amax();
        neg.max(res)
    }

    fn project_affine(&self, c: &DVector<f64>) -> DVector<f64> {
        c - self.basis.transpose() * (&self.basis * c - &self.target)
    }

    /// Euclidean projection onto the polytope by Dykstra's alternating
    /// scheme between the affine set and the non-negative orthant.
    pub fn project(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut x = c.clone();
        let mut p = DVector::zeros(c.len());
        let mut q = DVector::zeros(c.len());
        for _ in 0..5000 {
            let y = self.project_affine(&(&x + &p));
            p = &x + &p - &y;
            let prev = x.clone();
            x = (&y + &q).map(|v| v.max(0.0));
            q = &y + &q - &x;
            if (&x - &prev).amax() < 1e-14 && self.violation(&x) < 1e-12 {
                break;
            }
        }
        // Final cleanup: snap to the affine set and clip rounding noise.
        let y = self.project_affine(&x);
        y.map(|v| if v < 0.0 && v > -1e-9 { 0.0 } else { v })
    }

    /// Vertices of `{z : origin + N z >= 0}` for null dimension one or two.
    pub fn low_dim_vertices(&self) -> Vec<Vec<f64>> {
        let d = self.origin.len();
        let k = self.null_dim();
        let rows: Vec<(f64, Vec<f64>)> = (0..d)
            .map(|i| (self.origin[i], (0..k).map(|j| self.null[(i, j)]).collect::<Vec<f64>>()))
            .filter(|(_, n)| n.iter().any(|v| v.abs() > 1e-12))
            .collect();
        let feasible = |z: &[f64]| -> bool {
            (0..d).all(|i| {
                let v = self.origin[i] + (0..k).map(|j| self.null[(i, j)] * z[j]).sum::<f64>();
                v >= -1e-10
            })
        };
        let mut out = Vec::new();
        match k {
            0 => out.push(vec![]),
            1 => {
                for (c, n) in &rows {
                    let z = vec![-c / n[0]];
                    if feasible(&z) {
                        out.push(z);
                    }
                }
            }
            2 => {
                for i in 0..rows.len() {
                    for j in i + 1..rows.len() {
                        let (ci, ni) = &rows[i];
                        let (cj, nj) = &rows[j];
                        let det = ni[0] * nj[1] - ni[1] * nj[0];
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        let z0 = (-ci * nj[1] + cj * ni[1]) / det;
                        let z1 = (-cj * ni[0] + ci * nj[0]) / det;
                        let z = vec![z0, z1];
                        if feasible(&z) {
                            out.push(z);
                        }
                    }
                }
            }
            _ => {}
        }
        if out.is_empty() && k > 0 && rows.is_empty() {
            // Unbounded directions cannot occur for probability vectors.
            out.push(vec![0.0; k]);
        }
        out
    }
}

/// Projected gradient descent with step halving. `eval` returns `None`
/// outside the admissible set, so only admissible iterates are accepted.
/// The flag is false when the iteration cap was hit.
pub(crate) fn projected_descent(
    poly: &Polytope,
    mut c: DVector<f64>,
    eval: impl Fn(&DVector<f64>) -> Option<f64>,
    grad: impl Fn(&DVector<f64>) -> DVector<f64>,
    max_iters: usize,
) -> (f64, DVector<f64>, bool) {
    let mut f = eval(&c).expect("start is admissible");
    let mut step = 0.1;
    for _ in 0..max_iters {
        let g = grad(&c);
        let mut moved = false;
        while step > 1e-12 {
            let trial = poly.project(&(&c - &g * step));
            if let Some(ft) = eval(&trial) {
                if ft < f - 1e-15 {
                    let small = (&trial - &c).amax() < 1e-13;
                    c = trial;
                    f = ft;
                    step *= 2.0;
                    moved = !small;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            return (f, c, true);
        }
    }
    (f, c, false)
}
