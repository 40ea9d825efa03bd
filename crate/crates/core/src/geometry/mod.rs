//! Convex input sets and their images: boxes, zonotopes, H- and V-polytopes,
//! the Pontryagin difference and the P-norm extremal quantities.

mod extremal;
pub(crate) mod lp;

pub use extremal::{
    pnorm_max_box_image, pnorm_max_vertices, pnorm_min_boundary, pnorm_min_box_boundary, Extremum,
};

use itertools_lite::combinations;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{rank, Matrix, Vector};

const DEDUP_TOL: f64 = 1e-9;

/// Support function `h(a) = max {aᵀx : x ∈ set}` evaluated on raw slices.
pub trait SupportFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn support(&self, a: &[f64]) -> f64;
    /// A maximizer of `aᵀx` over the set (ties resolved by lowest index).
    fn support_point(&self, a: &[f64], out: &mut [f64]);
    /// Identifies the exposed face used by `support_point`; changes mark
    /// switching instants of a bang-bang control.
    fn face_id(&self, a: &[f64]) -> u64;
}

/// Origin-symmetric box `∏ [−wᵢ, wᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperBox {
    half_widths: Vec<f64>,
}

impl HyperBox {
    /// Zero half-widths are accepted and describe a degenerate (pinned) input.
    pub fn new(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::DimensionMismatch(
                "box half-widths must be finite and non-negative".into(),
            ));
        }
        Ok(Self { half_widths })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            half_widths: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            half_widths: self.half_widths.iter().map(|w| w * factor).collect(),
        }
    }

    pub fn support(&self, a: &Vector) -> f64 {
        self.half_widths
            .iter()
            .zip(a.iter())
            .map(|(w, x)| w * x.abs())
            .sum()
    }

    /// All `2^dim` corner points.
    pub fn corners(&self) -> Vec<Vector> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                Vector::from_fn(d, |i, _| {
                    if mask >> i & 1 == 1 {
                        self.half_widths[i]
                    } else {
                        -self.half_widths[i]
                    }
                })
            })
            .collect()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.iter()
            .zip(&self.half_widths)
            .all(|(xi, w)| xi.abs() <= w + tol)
    }
}

/// Zonotope `{Σ αᵢ gᵢ : |αᵢ| ≤ 1}` centred at the origin.
#[derive(Debug, Clone, Serialize)]
pub struct Zonotope {
    dim: usize,
    generators: Vec<Vector>,
}

impl Zonotope {
    pub fn new(dim: usize, generators: Vec<Vector>) -> Result<Self> {
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch("generator length".into()));
        }
        if generators.iter().any(|g| g.iter().any(|x| !x.is_finite())) {
            return Err(Error::DimensionMismatch("non-finite generator".into()));
        }
        Ok(Self { dim, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn negated(&self) -> Self {
        Self {
            dim: self.dim,
            generators: self.generators.iter().map(|g| -g).collect(),
        }
    }

    pub fn support(&self, a: &Vector) -> f64 {
        self.generators.iter().map(|g| g.dot(a).abs()).sum()
    }

    pub fn generator_matrix(&self) -> Matrix {
        if self.generators.is_empty() {
            return Matrix::zeros(self.dim, 0);
        }
        Matrix::from_columns(&self.generators)
    }

    /// Points `Σ sᵢ gᵢ` for every sign pattern `s` (generator count ≤ 20).
    pub fn sign_pattern_points(&self) -> Vec<Vector> {
        let k = self.generators.len();
        (0..1usize << k)
            .map(|mask| {
                let mut x = Vector::zeros(self.dim);
                for (i, g) in self.generators.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        x += g;
                    } else {
                        x -= g;
                    }
                }
                x
            })
            .collect()
    }
}

impl SupportFunction for Zonotope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, a: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|g| dot(g.as_slice(), a).abs())
            .sum()
    }

    fn support_point(&self, a: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for g in &self.generators {
            let s = if dot(g.as_slice(), a) >= 0.0 {
                1.0
            } else {
                -1.0
            };
            for (o, gi) in out.iter_mut().zip(g.iter()) {
                *o += s * gi;
            }
        }
    }

    fn face_id(&self, a: &[f64]) -> u64 {
        self.generators
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, g)| {
                if dot(g.as_slice(), a) >= 0.0 {
                    acc | 1 << i
                } else {
                    acc
                }
            })
    }
}

/// Image of a box under a linear map, as a zonotope.
pub fn image_box(bmat: &Matrix, bx: &HyperBox) -> Result<Zonotope> {
    if bmat.ncols() != bx.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} columns, box has dimension {}",
            bmat.ncols(),
            bx.dim()
        )));
    }
    let generators = bmat
        .column_iter()
        .zip(bx.half_widths())
        .map(|(c, w)| c.into_owned() * *w)
        .collect();
    Zonotope::new(bmat.nrows(), generators)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Facet {
    /// Unit outward normal.
    pub normal: Vector,
    pub offset: f64,
}

/// `{x : aᵢᵀx ≤ bᵢ}` with unit normals.
#[derive(Debug, Clone, Serialize)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
}

impl HPolytope {
    /// Normalizes each row to a unit normal; zero rows are rejected.
    pub fn new(dim: usize, rows: Vec<(Vector, f64)>) -> Result<Self> {
        let mut facets = Vec::with_capacity(rows.len());
        for (a, b) in rows {
            if a.len() != dim {
                return Err(Error::DimensionMismatch("facet normal length".into()));
            }
            let norm = a.norm();
            if !norm.is_finite() || norm == 0.0 || !b.is_finite() {
                return Err(Error::DimensionMismatch("degenerate facet row".into()));
            }
            facets.push(Facet {
                normal: a / norm,
                offset: b / norm,
            });
        }
        Ok(Self { dim, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.facets
            .iter()
            .all(|f| f.normal.dot(x) <= f.offset + tol)
    }

    /// Smallest facet offset: positive iff the origin is interior.
    pub fn min_offset(&self) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn support(&self, a: &Vector) -> Result<f64> {
        let rows: Vec<(&[f64], f64)> = self
            .facets
            .iter()
            .map(|f| (f.normal.as_slice(), f.offset))
            .collect();
        lp::maximize(a.as_slice(), &rows).map(|(v, _)| v)
    }

    pub fn check_bounded(&self) -> Result<()> {
        for i in 0..self.dim {
            for s in [1.0, -1.0] {
                let mut e = Vector::zeros(self.dim);
                e[i] = s;
                self.support(&e)?;
            }
        }
        Ok(())
    }

    /// Radius of the largest Euclidean ball inside the set (any centre).
    pub fn chebyshev_radius(&self) -> Result<f64> {
        let rows: Vec<(Vec<f64>, f64)> = self
            .facets
            .iter()
            .map(|f| {
                let mut r: Vec<f64> = f.normal.iter().copied().collect();
                r.push(1.0);
                (r, f.offset)
            })
            .collect();
        let mut rows: Vec<(&[f64], f64)> = rows.iter().map(|(a, b)| (a.as_slice(), *b)).collect();
        let mut cap = vec![0.0; self.dim + 1];
        cap[self.dim] = 1.0;
        // Cap the radius so a degenerate slab does not look unbounded.
        rows.push((cap.as_slice(), 1e12));
        let mut c = vec![0.0; self.dim + 1];
        c[self.dim] = 1.0;
        lp::maximize(&c, &rows).map(|(v, _)| v)
    }

    /// Drops facets whose removal leaves the support in their own normal
    /// unchanged.
    pub fn remove_redundant(&self) -> Result<Self> {
        let mut keep: Vec<bool> = vec![true; self.facets.len()];
        for k in 0..self.facets.len() {
            let rows: Vec<(&[f64], f64)> = self
                .facets
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k && keep[*j])
                .map(|(_, f)| (f.normal.as_slice(), f.offset))
                .collect();
            let fk = &self.facets[k];
            let needed = match lp::maximize(fk.normal.as_slice(), &rows) {
                Ok((v, _)) => v > fk.offset + 1e-9 * (1.0 + fk.offset.abs()),
                Err(Error::UnboundedSet) => true,
                Err(e) => return Err(e),
            };
            keep[k] = needed;
        }
        Ok(Self {
            dim: self.dim,
            facets: self
                .facets
                .iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(f, _)| f.clone())
                .collect(),
        })
    }
}

/// Vertex list of a bounded polytope.
#[derive(Debug, Clone, Serialize)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Vector>,
}

impl VPolytope {
    pub fn new(dim: usize, vertices: Vec<Vector>) -> Self {
        Self { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn support(&self, a: &Vector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn argmax(&self, a: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let val = dot(v.as_slice(), a);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        best
    }
}

impl SupportFunction for VPolytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, a: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v.as_slice(), a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn support_point(&self, a: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.vertices[self.argmax(a)].as_slice());
    }

    fn face_id(&self, a: &[f64]) -> u64 {
        self.argmax(a) as u64
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vector orthogonal to the rows of an `(n−1)×n` matrix, by cofactors.
fn cofactor_normal(rows: &[&Vector], n: usize) -> Vector {
    if n == 1 {
        return Vector::from_element(1, 1.0);
    }
    let m = Matrix::from_fn(n - 1, n, |i, j| rows[i][j]);
    Vector::from_fn(n, |j, _| {
        let minor = m.clone().remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Facet description of a full-dimensional zonotope (dimension ≤ 4).
pub fn zonotope_to_hrep(z: &Zonotope) -> Result<HPolytope> {
    let n = z.dim();
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let gens: Vec<&Vector> = z.generators().iter().filter(|g| g.norm() > 0.0).collect();
    if rank(&z.generator_matrix(), 1e-10) < n {
        return Err(Error::DegenerateZonotope(n));
    }
    let scale = gens.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut normals: Vec<Vector> = Vec::new();
    for subset in combinations(gens.len(), n - 1) {
        let rows: Vec<&Vector> = subset.iter().map(|&i| gens[i]).collect();
        let a = cofactor_normal(&rows, n);
        let norm = a.norm();
        if norm <= 1e-12 * scale.powi(n as i32 - 1) {
            continue;
        }
        let a = a / norm;
        for cand in [a.clone(), -a] {
            if !normals.iter().any(|m| (m - &cand).norm() <= DEDUP_TOL) {
                normals.push(cand);
            }
        }
    }
    let rows = normals
        .into_iter()
        .map(|a| {
            let b = z.support(&a);
            (a, b)
        })
        .collect();
    HPolytope::new(n, rows)?.remove_redundant()
}

/// Result of a Pontryagin difference.
#[derive(Debug, Clone, Serialize)]
pub struct Difference {
    pub set: HPolytope,
    /// Some shifted offset is non-positive: the set is empty, lower
    /// dimensional, or has the origin on its boundary.
    pub degenerate: bool,
}

/// `outer ⊖ subtrahend = {z : z + y ∈ outer ∀ y ∈ subtrahend}`.
pub fn pontryagin_diff(outer: &HPolytope, subtrahend: &Zonotope) -> Result<Difference> {
    if outer.dim() != subtrahend.dim() {
        return Err(Error::DimensionMismatch(format!(
            "outer dimension {}, subtrahend dimension {}",
            outer.dim(),
            subtrahend.dim()
        )));
    }
    let rows: Vec<(Vector, f64)> = outer
        .facets()
        .iter()
        .map(|f| (f.normal.clone(), f.offset - subtrahend.support(&f.normal)))
        .collect();
    let degenerate = rows.iter().any(|(_, b)| *b <= 1e-12);
    let set = HPolytope::new(outer.dim(), rows)?;
    let set = if degenerate {
        set
    } else {
        set.remove_redundant()?
    };
    Ok(Difference { set, degenerate })
}

/// All vertices of a bounded, full-dimensional polytope (dimension ≤ 4).
pub fn vertices(p: &HPolytope) -> Result<VPolytope> {
    let n = p.dim();
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    p.check_bounded()?;
    let facets = p.facets();
    let mut out: Vec<Vector> = Vec::new();
    for subset in combinations(facets.len(), n) {
        let m = Matrix::from_fn(n, n, |i, j| facets[subset[i]].normal[j]);
        if m.determinant().abs() <= 1e-10 {
            continue;
        }
        let rhs = Vector::from_fn(n, |i, _| facets[subset[i]].offset);
        let Some(x) = m.lu().solve(&rhs) else {
            continue;
        };
        let scale = 1.0 + x.amax();
        if !facets
            .iter()
            .all(|f| f.normal.dot(&x) <= f.offset + 1e-9 * scale)
        {
            continue;
        }
        if !out.iter().any(|v| (v - &x).norm() <= 1e-8 * scale) {
            out.push(x);
        }
    }
    if out.len() < n + 1 {
        return Err(Error::DegenerateSet(format!(
            "{} vertices in R^{}",
            out.len(),
            n
        )));
    }
    let base = out[0].clone();
    let diffs = Matrix::from_columns(&out.iter().skip(1).map(|v| v - &base).collect::<Vec<_>>());
    if rank(&diffs, 1e-9) < n {
        return Err(Error::DegenerateSet(
            "vertices are affinely dependent".into(),
        ));
    }
    Ok(VPolytope::new(n, out))
}

/// Containment of a zonotope in the interior of an H-polytope.
#[derive(Debug, Clone, Serialize)]
pub struct Containment {
    pub contained: bool,
    /// Smallest `bᵢ − h_inner(aᵢ)` over the facets.
    pub min_slack: f64,
    pub facet_index: usize,
}

pub fn contains_in_interior(inner: &Zonotope, outer: &HPolytope, margin: f64) -> Containment {
    let (facet_index, min_slack) = outer
        .facets()
        .iter()
        .enumerate()
        .map(|(i, f)| (i, f.offset - inner.support(&f.normal)))
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    Containment {
        contained: min_slack >= margin,
        min_slack,
        facet_index,
    }
}

/// Index combinations without pulling in a dependency.
mod itertools_lite {
    pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if k > n {
            return out;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.clone());
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                return out;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}
