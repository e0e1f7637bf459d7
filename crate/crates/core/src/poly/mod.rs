//! Sparse multivariate polynomials with complex coefficients.
//!
//! A [`MultiPoly`] carries its variable names; binary operations require the
//! two operands to use the same names in the same order. Coefficients whose
//! modulus is at most [`COEFF_ZERO_TOL`] are dropped after every operation,
//! so the zero polynomial is exactly the empty term map.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unistab::UniPoly;

pub use parse::parse;

/// Absolute pruning threshold for canonical term maps.
pub const COEFF_ZERO_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Complex64>,
}

/// Default variable names `z1, …, zn`.
pub fn default_var_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("z{k}")).collect()
}

impl MultiPoly {
    pub fn zero(vars: Vec<String>) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Vec<String>, c: Complex64) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(vec![0; n], c)])
    }

    /// The polynomial `z_k`.
    pub fn var(vars: Vec<String>, k: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[k] = 1;
        Self::from_terms(vars, [(e, ONE)])
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, summing
    /// repeated exponents. Panics if an exponent has the wrong length.
    pub fn from_terms(
        vars: Vec<String>,
        terms: impl IntoIterator<Item = (Monomial, Complex64)>,
    ) -> Self {
        let mut map: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length");
            *map.entry(e).or_insert(ZERO) += c;
        }
        let mut p = Self { vars, terms: map };
        p.canonicalize();
        p
    }

    /// Real linear form `Σ a_k z_k + b`.
    pub fn linear(vars: Vec<String>, a: &[f64], b: Complex64) -> Self {
        let n = vars.len();
        assert_eq!(a.len(), n);
        let mut terms = vec![(vec![0; n], b)];
        for (k, &ak) in a.iter().enumerate() {
            let mut e = vec![0; n];
            e[k] = 1;
            terms.push((e, Complex64::new(ak, 0.0)));
        }
        Self::from_terms(vars, terms)
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.norm() > COEFF_ZERO_TOL);
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, e: &[u32]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Degree in the single variable `k`.
    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|e| e[k]).max().unwrap_or(0)
    }

    /// Σ |c| over all coefficients.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_coeff_diff(&self, other: &MultiPoly) -> f64 {
        let mut keys: Vec<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.dedup();
        keys.into_iter()
            .map(|e| (self.coefficient(e) - other.coefficient(e)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|x| x == d),
        }
    }

    fn check_vars(&self, other: &MultiPoly) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VariableMismatch(self.vars.clone(), other.vars.clone()));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert(ZERO) += c;
        }
        let mut p = Self {
            vars: self.vars.clone(),
            terms,
        };
        p.canonicalize();
        Ok(p)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(-ONE)
    }

    pub fn scale(&self, s: Complex64) -> MultiPoly {
        let mut p = Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        };
        p.canonicalize();
        p
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Monomial = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(ZERO) += ca * cb;
            }
        }
        let mut p = Self {
            vars: self.vars.clone(),
            terms,
        };
        p.canonicalize();
        Ok(p)
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.vars.clone(), ONE);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).expect("same variables");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same variables");
            }
        }
        acc
    }

    /// Splits `h = g + i·f` coefficientwise into real polynomials `(g, f)`.
    pub fn real_imag_parts(&self) -> (MultiPoly, MultiPoly) {
        let part = |pick: fn(&Complex64) -> f64| {
            MultiPoly::from_terms(
                self.vars.clone(),
                self.terms
                    .iter()
                    .map(|(e, c)| (e.clone(), Complex64::new(pick(c), 0.0))),
            )
        };
        (part(|c| c.re), part(|c| c.im))
    }

    /// `g + i·f` for real `g = self` and `f`.
    pub fn plus_i_times(&self, f: &MultiPoly) -> Result<MultiPoly> {
        self.add(&f.scale(Complex64::new(0.0, 1.0)))
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars(), "point dimension");
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(self.nvars());
        for (k, z) in point.iter().enumerate() {
            let d = self.degree_in(k) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(ONE);
            for j in 0..d {
                row.push(row[j] * z);
            }
            powers.push(row);
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (k, &ek)| acc * powers[k][ek as usize])
            })
            .sum()
    }

    pub fn eval_real(&self, point: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&z)
    }

    /// Coefficients of `t ↦ f(x + t·y)` for real `x`, `y`.
    pub fn restrict_line(&self, x: &[f64], y: &[f64]) -> UniPoly {
        let base: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let dir: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.restrict_line_complex(&base, &dir)
    }

    /// Coefficients of `t ↦ f(base + t·dir)`, by exact binomial expansion
    /// of each factor `(base_k + t·dir_k)^e`.
    pub fn restrict_line_complex(&self, base: &[Complex64], dir: &[Complex64]) -> UniPoly {
        assert_eq!(base.len(), self.nvars(), "base point dimension");
        assert_eq!(dir.len(), self.nvars(), "direction dimension");
        let deg = self.degree() as usize;
        let mut out = vec![ZERO; deg + 1];
        // (base_k + t dir_k)^e for every (k, e) that occurs
        let mut cache: BTreeMap<(usize, u32), Vec<Complex64>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut acc = vec![*c];
            for (k, &ek) in e.iter().enumerate() {
                if ek == 0 {
                    continue;
                }
                let factor = cache
                    .entry((k, ek))
                    .or_insert_with(|| binomial_power(base[k], dir[k], ek));
                acc = convolve(&acc, factor);
            }
            for (j, a) in acc.into_iter().enumerate() {
                out[j] += a;
            }
        }
        UniPoly::new(out)
    }

    /// Substitutes the given variables (by index) and drops them.
    pub fn substitute_partial(&self, assignments: &BTreeMap<usize, Complex64>) -> Result<MultiPoly> {
        if let Some((&k, _)) = assignments.iter().find(|(&k, _)| k >= self.nvars()) {
            return Err(Error::Shape(format!(
                "variable index {k} out of range for {} variables",
                self.nvars()
            )));
        }
        let keep: Vec<usize> = (0..self.nvars())
            .filter(|k| !assignments.contains_key(k))
            .collect();
        let vars: Vec<String> = keep.iter().map(|&k| self.vars[k].clone()).collect();
        let terms = self.terms.iter().map(|(e, c)| {
            let coeff = assignments
                .iter()
                .fold(*c, |acc, (&k, z)| acc * z.powu(e[k]));
            (keep.iter().map(|&k| e[k]).collect::<Monomial>(), coeff)
        });
        Ok(MultiPoly::from_terms(vars, terms))
    }

    /// [`MultiPoly::substitute_partial`] keyed by variable name.
    pub fn substitute_named(&self, assignments: &[(&str, Complex64)]) -> Result<MultiPoly> {
        let mut by_index = BTreeMap::new();
        for (name, z) in assignments {
            let k = self
                .vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::UnknownVariable {
                    name: name.to_string(),
                    pos: 0,
                })?;
            by_index.insert(k, *z);
        }
        self.substitute_partial(&by_index)
    }

    /// `∂f/∂z_k`.
    pub fn partial(&self, k: usize) -> MultiPoly {
        let terms = self.terms.iter().filter(|(e, _)| e[k] > 0).map(|(e, c)| {
            let mut d = e.clone();
            d[k] -= 1;
            (d, c * e[k] as f64)
        });
        MultiPoly::from_terms(self.vars.clone(), terms)
    }

    /// `Σ_k v_k ∂f/∂z_k`.
    pub fn directional_derivative(&self, v: &[f64]) -> MultiPoly {
        assert_eq!(v.len(), self.nvars(), "direction dimension");
        let mut terms: Vec<(Monomial, Complex64)> = Vec::new();
        for (e, c) in &self.terms {
            for (k, &vk) in v.iter().enumerate() {
                if e[k] == 0 || vk == 0.0 {
                    continue;
                }
                let mut d = e.clone();
                d[k] -= 1;
                terms.push((d, c * (e[k] as f64 * vk)));
            }
        }
        MultiPoly::from_terms(self.vars.clone(), terms)
    }

    /// Appends a fresh variable that does not occur in any term.
    pub fn with_extra_var(&self, name: &str) -> MultiPoly {
        let mut vars = self.vars.clone();
        vars.push(name.to_string());
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e = e.clone();
            e.push(0);
            (e, *c)
        });
        MultiPoly::from_terms(vars, terms)
    }

    /// Same terms, new names. Panics on a length mismatch.
    pub fn renamed(&self, vars: Vec<String>) -> MultiPoly {
        assert_eq!(vars.len(), self.nvars());
        MultiPoly {
            vars,
            terms: self.terms.clone(),
        }
    }

    /// Splits a polynomial of degree ≤ 1 into its linear coefficients and
    /// constant term.
    pub fn linear_parts(&self) -> Result<(Vec<Complex64>, Complex64)> {
        let d = self.degree();
        if d > 1 {
            return Err(Error::NotLinear(d));
        }
        let n = self.nvars();
        let mut a = vec![ZERO; n];
        let mut b = ZERO;
        for (e, c) in &self.terms {
            match e.iter().position(|&x| x == 1) {
                Some(k) => a[k] = *c,
                None => b = *c,
            }
        }
        Ok((a, b))
    }

    /// Renames `z_k` to the diagonal matrix variable `z_kk` of an `n×n`
    /// symmetric matrix of variables.
    pub fn diag_substitution(&self) -> MultiPoly {
        let n = self.nvars();
        let index = MatrixVarIndex::new(n);
        let terms = self.terms.iter().map(|(e, c)| {
            let mut m = vec![0; index.len()];
            for (k, &ek) in e.iter().enumerate() {
                m[index.index(k, k)] = ek;
            }
            (m, *c)
        });
        MultiPoly::from_terms(index.names("z"), terms)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<MultiPoly> {
        let n = json.vars.len();
        if let Some(t) = json.terms.iter().find(|t| t.exp.len() != n) {
            return Err(Error::Shape(format!(
                "term exponent {:?} has length {}, expected {n}",
                t.exp,
                t.exp.len()
            )));
        }
        Ok(MultiPoly::from_terms(
            json.vars.clone(),
            json.terms
                .iter()
                .map(|t| (t.exp.clone(), Complex64::new(t.re, t.im))),
        ))
    }
}

/// `W_v(f, g) = ∂_v f · g − f · ∂_v g` for real polynomials.
pub fn wronskian_v(f: &MultiPoly, g: &MultiPoly, v: &[f64]) -> Result<MultiPoly> {
    f.check_vars(g)?;
    if !f.is_real() || !g.is_real() {
        return Err(Error::NonReal);
    }
    let left = f.directional_derivative(v).mul(g)?;
    let right = f.mul(&g.directional_derivative(v))?;
    left.sub(&right)
}

fn binomial_power(b: Complex64, d: Complex64, e: u32) -> Vec<Complex64> {
    let e = e as usize;
    let mut out = Vec::with_capacity(e + 1);
    let mut binom = 1.0f64;
    for j in 0..=e {
        out.push(b.powu((e - j) as u32) * d.powu(j as u32) * binom);
        binom = binom * (e - j) as f64 / (j + 1) as f64;
    }
    out
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Flat indexing of the upper triangle of a symmetric `n×n` matrix of
/// variables, row-major: `(0,0), (0,1), …, (0,n-1), (1,1), …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixVarIndex {
    n: usize,
}

impl MatrixVarIndex {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Number of flat variables, `n(n+1)/2`.
    pub fn len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Flat index of entry `(i, j)`; symmetric in its arguments.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < self.n, "matrix index out of range");
        // rows 0..i contribute n, n−1, …, n−i+1 entries
        i * self.n - i * (i.saturating_sub(1)) / 2 + (j - i)
    }

    /// Inverse of [`MatrixVarIndex::index`].
    pub fn pair(&self, k: usize) -> (usize, usize) {
        assert!(k < self.len(), "flat index out of range");
        let mut start = 0;
        for i in 0..self.n {
            let row_len = self.n - i;
            if k < start + row_len {
                return (i, i + (k - start));
            }
            start += row_len;
        }
        unreachable!()
    }

    /// Variable names `{prefix}{i}{j}` (1-based); `{prefix}{i}_{j}` when `n ≥ 10`.
    pub fn names(&self, prefix: &str) -> Vec<String> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.pair(k);
                if self.n >= 10 {
                    format!("{prefix}{}_{}", i + 1, j + 1)
                } else {
                    format!("{prefix}{}{}", i + 1, j + 1)
                }
            })
            .collect()
    }
}

/// Wire format `{ "vars": [...], "terms": [ {"exp": [..], "re": r, "im": s} ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_real(c.im))
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("({}{}{}i)", fmt_real(c.re), sign, fmt_real(c.im.abs()))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Monomial, &Complex64)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(k, &p)| {
                    if p == 1 {
                        self.vars[k].clone()
                    } else {
                        format!("{}^{p}", self.vars[k])
                    }
                })
                .collect();
            let (negative, c) = if c.im == 0.0 && c.re < 0.0 {
                (true, -c)
            } else {
                (false, *c)
            };
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if monomial.is_empty() {
                write!(f, "{}", fmt_coeff(c))?;
            } else if c == ONE {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff(c), monomial.join("*"))?;
            }
        }
        Ok(())
    }
}
