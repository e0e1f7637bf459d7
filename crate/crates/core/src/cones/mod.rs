//! Proper convex cones: nonnegative orthants, finitely generated cones,
//! positive semidefinite cones and their products.
//!
//! Points of a PSD cone of side `n` are stored as the row-major upper
//! triangle of a symmetric matrix, unscaled. Dual vectors use the same
//! layout and are paired through `⟨Z, A⟩ = tr(AZ)`, which gives every
//! off-diagonal entry weight 2. A linear form `Σ c_k z_k` therefore
//! corresponds to the dual vector with halved off-diagonal coefficients
//! (see [`Cone::linear_form_to_dual`]).

mod lp;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, lambda_min, DenseMatrix};
use crate::poly::{default_var_names, MatrixVarIndex};
use crate::tolerance::ToleranceProfile;

pub use lp::feasible as lp_feasible;

/// Margin added to every interior sample.
pub const SAMPLE_DELTA: f64 = 1e-3;

const MAX_FACET_DIM: usize = 6;
const MAX_FACET_SUBSETS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeSpec", into = "ConeSpec")]
pub enum Cone {
    Orthant { n: usize },
    Polyhedral(PolyhedralCone),
    Psd { n: usize },
    Product(Vec<Cone>),
}

/// `cone(v₁, …, v_k)`, spanning and pointed. For dimension ≤ 6 the unit
/// extreme rays of the dual cone are enumerated once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    dim: usize,
    generators: Vec<Vec<f64>>,
    dual_rays: Option<Vec<Vec<f64>>>,
}

impl PolyhedralCone {
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// Unit facet normals, when they were enumerated.
    pub fn dual_rays(&self) -> Option<&[Vec<f64>]> {
        self.dual_rays.as_deref()
    }

    fn new(generators: Vec<Vec<f64>>) -> Result<Self> {
        let dim = generators.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidCone("no generators".into()));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::InvalidCone("generators have different lengths".into()));
        }
        if generators.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCone("non-finite generator entry".into()));
        }
        if generators.iter().any(|g| norm2(g) == 0.0) {
            return Err(Error::InvalidCone("zero generator".into()));
        }
        if lp::rank(&generators) < dim {
            return Err(Error::InvalidCone("generators do not span the ambient space".into()));
        }
        let columns = transpose(&generators);
        for g in &generators {
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            if lp::feasible(&columns, &neg).is_some() {
                return Err(Error::InvalidCone("cone is not pointed".into()));
            }
        }
        let dual_rays = if dim <= MAX_FACET_DIM {
            enumerate_facets(&generators, dim)
        } else {
            None
        };
        Ok(Self {
            dim,
            generators,
            dual_rays,
        })
    }

    fn center(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for g in &self.generators {
            let norm = norm2(g);
            for (ck, gk) in c.iter_mut().zip(g) {
                *ck += gk / norm;
            }
        }
        let norm = norm2(&c);
        c.into_iter().map(|v| v / norm).collect()
    }

    fn contains_interior(&self, p: &[f64], tol: f64) -> bool {
        match &self.dual_rays {
            Some(rays) => rays.iter().all(|u| dot(u, p) > tol),
            None => {
                let c = self.center();
                let shifted: Vec<f64> = p.iter().zip(&c).map(|(a, b)| a - tol.max(1e-12) * b).collect();
                lp::feasible(&transpose(&self.generators), &shifted).is_some()
            }
        }
    }
}

fn enumerate_facets(generators: &[Vec<f64>], dim: usize) -> Option<Vec<Vec<f64>>> {
    let k = generators.len();
    if binomial(k, dim - 1) > MAX_FACET_SUBSETS {
        return None;
    }
    let unit: Vec<Vec<f64>> = generators
        .iter()
        .map(|g| {
            let n = norm2(g);
            g.iter().map(|v| v / n).collect()
        })
        .collect();
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for subset in Combinations::new(k, dim - 1) {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&j| unit[j].clone()).collect();
        let Some(u) = lp::null_vector(&rows, dim) else {
            continue;
        };
        let s: Vec<f64> = unit.iter().map(|g| dot(&u, g)).collect();
        let oriented = if s.iter().all(|&v| v >= -1e-9) {
            u
        } else if s.iter().all(|&v| v <= 1e-9) {
            u.iter().map(|v| -v).collect()
        } else {
            continue;
        };
        if !rays
            .iter()
            .any(|r| r.iter().zip(&oriented).all(|(a, b)| (a - b).abs() <= 1e-9))
        {
            rays.push(oriented);
        }
    }
    Some(rays)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            first: true,
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let k = self.idx.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        self.done = true;
        None
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.first().map_or(0, Vec::len);
    (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// Symmetric matrix from its row-major upper triangle.
pub fn svec_to_matrix(n: usize, p: &[f64]) -> DenseMatrix {
    let idx = MatrixVarIndex::new(n);
    DenseMatrix::from_fn(n, n, |i, j| Complex64::new(p[idx.index(i, j)], 0.0))
}

/// Row-major upper triangle of the real part of a square matrix.
pub fn matrix_to_svec(m: &DenseMatrix) -> Vec<f64> {
    let idx = MatrixVarIndex::new(m.rows());
    (0..idx.len())
        .map(|k| {
            let (i, j) = idx.pair(k);
            m[(i, j)].re
        })
        .collect()
}

fn psd_lambda_min(n: usize, p: &[f64]) -> f64 {
    lambda_min(&svec_to_matrix(n, p), &ToleranceProfile::default()).expect("symmetric by construction")
}

// Smallest eigenpair of a real symmetric matrix with a real unit eigenvector.
fn psd_min_eigvec(n: usize, a: &[f64]) -> (f64, Vec<f64>) {
    let e = hermitian_eigen(&svec_to_matrix(n, a), &ToleranceProfile::default())
        .expect("symmetric by construction");
    let col: Vec<Complex64> = (0..n).map(|i| e.vectors[(i, 0)]).collect();
    let pivot = col
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let v: Vec<f64> = col.iter().map(|z| (z * phase).re).collect();
    let norm = norm2(&v);
    (e.values[0], v.into_iter().map(|x| x / norm).collect())
}

impl Cone {
    pub fn orthant(n: usize) -> Result<Cone> {
        if n == 0 {
            return Err(Error::InvalidCone("orthant of dimension 0".into()));
        }
        Ok(Cone::Orthant { n })
    }

    pub fn psd(n: usize) -> Result<Cone> {
        if n == 0 {
            return Err(Error::InvalidCone("psd cone of side 0".into()));
        }
        Ok(Cone::Psd { n })
    }

    pub fn polyhedral(generators: Vec<Vec<f64>>) -> Result<Cone> {
        Ok(Cone::Polyhedral(PolyhedralCone::new(generators)?))
    }

    /// `K₁ × K₂` with nested products flattened.
    pub fn product(a: Cone, b: Cone) -> Cone {
        let mut factors = Vec::new();
        for c in [a, b] {
            match c {
                Cone::Product(fs) => factors.extend(fs),
                other => factors.push(other),
            }
        }
        Cone::Product(factors)
    }

    pub fn product_of(factors: Vec<Cone>) -> Result<Cone> {
        let mut it = factors.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidCone("empty product".into()))?;
        Ok(it.fold(first, Cone::product))
    }

    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { n } => *n,
            Cone::Polyhedral(p) => p.dim,
            Cone::Psd { n } => n * (n + 1) / 2,
            Cone::Product(fs) => fs.iter().map(Cone::dim).sum(),
        }
    }

    /// Leaf cones with the offset of their first coordinate.
    pub fn leaves(&self) -> Vec<(usize, &Cone)> {
        let mut out = Vec::new();
        let mut offset = 0;
        self.collect_leaves(&mut offset, &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, offset: &mut usize, out: &mut Vec<(usize, &'a Cone)>) {
        match self {
            Cone::Product(fs) => {
                for f in fs {
                    f.collect_leaves(offset, out);
                }
            }
            leaf => {
                out.push((*offset, leaf));
                *offset += leaf.dim();
            }
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Shape(format!(
                "vector of length {} for a cone of dimension {}",
                p.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `p ∈ int K`, decided with margin `tol`.
    pub fn contains_interior(&self, p: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.leaves().into_iter().all(|(off, leaf)| {
            let q = &p[off..off + leaf.dim()];
            match leaf {
                Cone::Orthant { .. } => q.iter().all(|&v| v > tol),
                Cone::Polyhedral(pc) => pc.contains_interior(q, tol),
                Cone::Psd { n } => psd_lambda_min(*n, q) > tol,
                Cone::Product(_) => unreachable!("leaves are not products"),
            }
        }))
    }

    /// `a ∈ int K*` for a dual vector `a`.
    pub fn dual_contains_interior(&self, a: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(a)?;
        Ok(self.leaves().into_iter().all(|(off, leaf)| {
            let q = &a[off..off + leaf.dim()];
            match leaf {
                Cone::Orthant { .. } => q.iter().all(|&v| v > tol),
                Cone::Polyhedral(pc) => {
                    let na = norm2(q);
                    pc.generators
                        .iter()
                        .all(|g| dot(q, g) > tol * na * norm2(g))
                }
                Cone::Psd { n } => psd_lambda_min(*n, q) > tol,
                Cone::Product(_) => unreachable!("leaves are not products"),
            }
        }))
    }

    /// Minimum of `⟨a, r⟩` over normalized generating rays `r` of `K`,
    /// with a minimizing ray. The minimum is positive iff `a ∈ int K*` and
    /// nonnegative iff `a ∈ K*`.
    pub fn dual_min_ray(&self, a: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(a)?;
        let mut best = (f64::INFINITY, vec![0.0; self.dim()]);
        for (off, leaf) in self.leaves() {
            let q = &a[off..off + leaf.dim()];
            let (value, local) = match leaf {
                Cone::Orthant { .. } => {
                    let (k, v) = q
                        .iter()
                        .copied()
                        .enumerate()
                        .min_by(|x, y| x.1.total_cmp(&y.1))
                        .expect("nonempty");
                    let mut r = vec![0.0; q.len()];
                    r[k] = 1.0;
                    (v, r)
                }
                Cone::Polyhedral(pc) => pc
                    .generators
                    .iter()
                    .map(|g| {
                        let n = norm2(g);
                        let r: Vec<f64> = g.iter().map(|v| v / n).collect();
                        (dot(q, &r), r)
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .expect("nonempty"),
                Cone::Psd { n } => {
                    let (lambda, v) = psd_min_eigvec(*n, q);
                    let m = DenseMatrix::from_fn(*n, *n, |i, j| Complex64::new(v[i] * v[j], 0.0));
                    (lambda, matrix_to_svec(&m))
                }
                Cone::Product(_) => unreachable!("leaves are not products"),
            };
            if value < best.0 {
                let mut r = vec![0.0; self.dim()];
                r[off..off + leaf.dim()].copy_from_slice(&local);
                best = (value, r);
            }
        }
        Ok(best)
    }

    /// Dual pairing `⟨a, p⟩`, with weight 2 on PSD off-diagonal entries.
    pub fn pairing(&self, a: &[f64], p: &[f64]) -> Result<f64> {
        self.check_dim(a)?;
        self.check_dim(p)?;
        let w = self.pairing_weights();
        Ok(a.iter().zip(p).zip(&w).map(|((x, y), w)| w * x * y).sum())
    }

    fn pairing_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0; self.dim()];
        for (off, leaf) in self.leaves() {
            if let Cone::Psd { n } = leaf {
                let idx = MatrixVarIndex::new(*n);
                for k in 0..idx.len() {
                    let (i, j) = idx.pair(k);
                    if i != j {
                        w[off + k] = 2.0;
                    }
                }
            }
        }
        w
    }

    /// Dual vector `a` with `⟨a, p⟩ = Σ c_k p_k` for every `p`.
    pub fn linear_form_to_dual(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(c)?;
        let w = self.pairing_weights();
        Ok(c.iter().zip(&w).map(|(x, w)| x / w).collect())
    }

    /// A fixed interior point: all-ones, the identity, or the normalized sum
    /// of unit generators.
    pub fn center(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (off, leaf) in self.leaves() {
            let local = match leaf {
                Cone::Orthant { n } => vec![1.0; *n],
                Cone::Polyhedral(pc) => pc.center(),
                Cone::Psd { n } => matrix_to_svec(&DenseMatrix::identity(*n)),
                Cone::Product(_) => unreachable!("leaves are not products"),
            };
            out[off..off + leaf.dim()].copy_from_slice(&local);
        }
        out
    }

    /// A random interior point with margin at least [`SAMPLE_DELTA`].
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (off, leaf) in self.leaves() {
            let mut gauss = || -> f64 { rng.sample(StandardNormal) };
            let local = match leaf {
                Cone::Orthant { n } => (0..*n).map(|_| gauss().abs() + SAMPLE_DELTA).collect(),
                Cone::Polyhedral(pc) => {
                    let lambdas: Vec<f64> = pc
                        .generators
                        .iter()
                        .map(|_| gauss().abs() + SAMPLE_DELTA)
                        .collect();
                    let mut p = vec![0.0; pc.dim];
                    for (l, g) in lambdas.iter().zip(&pc.generators) {
                        for (pk, gk) in p.iter_mut().zip(g) {
                            *pk += l * gk;
                        }
                    }
                    let factor = match &pc.dual_rays {
                        Some(rays) => {
                            let margin = rays.iter().map(|u| dot(u, &p)).fold(f64::INFINITY, f64::min);
                            (SAMPLE_DELTA / margin).max(1.0)
                        }
                        None => {
                            let spread = norm2(&pc.center().iter().map(|v| v * pc.generators.len() as f64).collect::<Vec<_>>());
                            lambdas
                                .iter()
                                .zip(&pc.generators)
                                .map(|(l, g)| SAMPLE_DELTA / (l * norm2(g) * spread.max(1e-300)))
                                .fold(1.0, f64::max)
                        }
                    };
                    p.into_iter().map(|v| v * factor).collect()
                }
                Cone::Psd { n } => {
                    let n = *n;
                    let g: Vec<f64> = (0..n * n).map(|_| gauss()).collect();
                    let m = DenseMatrix::from_fn(n, n, |i, j| {
                        let s: f64 = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum();
                        Complex64::new(s + if i == j { SAMPLE_DELTA } else { 0.0 }, 0.0)
                    });
                    matrix_to_svec(&m)
                }
                Cone::Product(_) => unreachable!("leaves are not products"),
            };
            out[off..off + leaf.dim()].copy_from_slice(&local);
        }
        out
    }

    /// Default variable names: `z1…zn` for orthant and polyhedral factors,
    /// `z11, z12, …` for PSD factors; a product whose factor names collide
    /// falls back to `z1…zN`.
    pub fn var_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (_, leaf) in self.leaves() {
            match leaf {
                Cone::Psd { n } => names.extend(MatrixVarIndex::new(*n).names("z")),
                other => names.extend(default_var_names(other.dim())),
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return default_var_names(self.dim());
        }
        names
    }

    pub fn from_json(text: &str) -> Result<Cone> {
        let spec: ConeSpec = serde_json::from_str(text)?;
        Cone::try_from(spec)
    }

    /// Parses `orthant:N`, `psd:N`, `poly:[[..],..]`, `poly:@file.json`
    /// (generator list or descriptor), a JSON descriptor, `prod:A,B,..`, or
    /// `*`-separated products.
    pub fn parse(text: &str) -> Result<Cone> {
        let text = text.trim();
        if text.starts_with('{') {
            return Cone::from_json(text);
        }
        let parts = split_top_level(text, '*');
        if parts.len() > 1 {
            let factors = parts.into_iter().map(Cone::parse).collect::<Result<Vec<_>>>()?;
            return Cone::product_of(factors);
        }
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidCone(format!("cannot parse cone '{text}'")))?;
        let size = || {
            arg.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidCone(format!("bad size '{arg}'")))
        };
        match kind.trim() {
            "orthant" => Cone::orthant(size()?),
            "psd" => Cone::psd(size()?),
            "prod" | "product" => {
                let factors = split_top_level(arg, ',')
                    .into_iter()
                    .map(Cone::parse)
                    .collect::<Result<Vec<_>>>()?;
                Cone::product_of(factors)
            }
            "poly" | "polyhedral" => match arg.trim().strip_prefix('@') {
                Some(path) => {
                    let body = std::fs::read_to_string(path)
                        .map_err(|e| Error::InvalidCone(format!("{path}: {e}")))?;
                    if body.trim_start().starts_with('{') {
                        Cone::from_json(&body)
                    } else {
                        Cone::polyhedral(serde_json::from_str(&body)?)
                    }
                }
                None => Cone::polyhedral(serde_json::from_str(arg)?),
            },
            other => Err(Error::InvalidCone(format!("unknown cone kind '{other}'"))),
        }
    }
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// JSON descriptor of a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConeSpec {
    Orthant { n: usize },
    Polyhedral { generators: Vec<Vec<f64>> },
    Psd { n: usize },
    Product { factors: Vec<ConeSpec> },
}

impl TryFrom<ConeSpec> for Cone {
    type Error = Error;

    fn try_from(spec: ConeSpec) -> Result<Cone> {
        match spec {
            ConeSpec::Orthant { n } => Cone::orthant(n),
            ConeSpec::Psd { n } => Cone::psd(n),
            ConeSpec::Polyhedral { generators } => Cone::polyhedral(generators),
            ConeSpec::Product { factors } => Cone::product_of(
                factors
                    .into_iter()
                    .map(Cone::try_from)
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

impl From<Cone> for ConeSpec {
    fn from(c: Cone) -> ConeSpec {
        match c {
            Cone::Orthant { n } => ConeSpec::Orthant { n },
            Cone::Psd { n } => ConeSpec::Psd { n },
            Cone::Polyhedral(p) => ConeSpec::Polyhedral {
                generators: p.generators,
            },
            Cone::Product(fs) => ConeSpec::Product {
                factors: fs.into_iter().map(ConeSpec::from).collect(),
            },
        }
    }
}
