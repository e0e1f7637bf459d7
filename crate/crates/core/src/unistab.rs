//! Univariate polynomials: roots, stability, real-rootedness and interlacing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::ToleranceProfile;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EPS: f64 = f64::EPSILON;

/// Ascending coefficients; trailing (high-degree) coefficients below
/// `coeff_zero_tol · max(1, ‖c‖∞)` are trimmed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Complex64>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::new_with_tol(coeffs, ToleranceProfile::default().coeff_zero_tol)
    }

    pub fn new_with_tol(mut coeffs: Vec<Complex64>, tol: f64) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        while coeffs.last().is_some_and(|c| c.norm() <= tol * scale) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `lead · Π (t − r)`.
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Self {
        let mut c = vec![lead];
        for r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn from_real_roots(roots: &[f64], lead: f64) -> Self {
        let r: Vec<Complex64> = roots.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_roots(&r, Complex64::new(lead, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree after trimming; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.re)
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, k: usize| p.coeffs.get(k).copied().unwrap_or(ZERO);
        UniPoly::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// `λ·f + μ·g`.
    pub fn combine(f: &UniPoly, lambda: f64, g: &UniPoly, mu: f64) -> UniPoly {
        f.scale(Complex64::new(lambda, 0.0))
            .add(&g.scale(Complex64::new(mu, 0.0)))
    }

    /// Real and imaginary coefficient parts `(g, f)` with `p = g + i·f`.
    pub fn real_imag_parts(&self) -> (UniPoly, UniPoly) {
        (
            UniPoly::new(self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect()),
            UniPoly::new(self.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect()),
        )
    }

    /// Cauchy bound: every root has modulus below `1 + max |c_k / c_n|`.
    pub fn cauchy_bound(&self) -> f64 {
        if self.degree() == 0 {
            return 1.0;
        }
        let lead = self.leading().norm();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max)
    }

    fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

/// Roots with multiplicity, using the default tolerance profile.
pub fn roots(p: &UniPoly) -> Result<Vec<Complex64>> {
    roots_with(p, &ToleranceProfile::default())
}

/// Roots with multiplicity via Aberth–Ehrlich iteration. Runs that miss the
/// residual bound are restarted from rotated and rescaled starting circles;
/// numerically split clusters that pass a derivative test are snapped to
/// their centroid.
pub fn roots_with(p: &UniPoly, tols: &ToleranceProfile) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = p.degree();
    // exact zeros at the origin
    let shift = p.coeffs.iter().take_while(|c| **c == ZERO).count();
    let reduced = UniPoly {
        coeffs: p.coeffs[shift..].to_vec(),
    };
    let mut out = vec![ZERO; shift];
    let m = reduced.degree();
    if m == 1 {
        out.push(-reduced.coeffs[0] / reduced.coeffs[1]);
    } else if m > 1 {
        let norm: f64 = p.coeffs.iter().map(|c| c.norm()).sum();
        let accept = |r: &[Complex64]| {
            r.iter().all(|z| {
                reduced.eval(*z).norm()
                    <= tols.root_tol * norm * z.norm().max(1.0).powi(n as i32)
            })
        };
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for attempt in 0..6 {
            let found = aberth(&reduced, attempt);
            let worst = found
                .iter()
                .map(|z| reduced.eval(*z).norm() / (norm * z.norm().max(1.0).powi(n as i32)))
                .fold(0.0, f64::max);
            if accept(&found) {
                best = Some((worst, found));
                break;
            }
            if best.as_ref().is_none_or(|(w, _)| worst < *w) {
                best = Some((worst, found));
            }
        }
        out.extend(snap_clusters(&reduced, best.expect("at least one attempt").1));
    }
    Ok(out)
}

fn aberth(p: &UniPoly, attempt: usize) -> Vec<Complex64> {
    let n = p.degree();
    let dp = p.derivative();
    let lead = p.leading().norm();
    let c0 = p.coeffs[0].norm();
    let radius = (c0 / lead).powf(1.0 / n as f64) * [1.0, 0.5, 2.0, 1.0, 0.25, 4.0][attempt % 6];
    let offset = 0.4 + 0.7 * attempt as f64;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + offset))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..800 {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let pv = p.eval(zk);
            let bound = 8.0 * EPS * p.abs_eval(zk.norm());
            if pv.norm() <= bound {
                done[k] = true;
                continue;
            }
            let dv = dp.eval(zk);
            let ratio = if dv == ZERO {
                Complex64::new(1e-8 * zk.norm().max(1.0), 1e-8)
            } else {
                pv / dv
            };
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = zk - z[j];
                    if d == ZERO {
                        ZERO
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let corr = if denom == ZERO { ratio } else { ratio / denom };
            z[k] = zk - corr;
            if corr.norm() <= 2.0 * EPS * z[k].norm() {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

// Single-linkage clusters whose diameter is consistent with a numerically
// split root of that multiplicity and whose centroid annihilates the first
// m−1 derivatives are replaced by m copies of the centroid.
fn snap_clusters(p: &UniPoly, roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let radius = |m: usize, c: Complex64| {
        10.0 * (1e-14f64).powf(1.0 / m as f64) * c.norm().max(1.0)
    };
    let mut label: Vec<usize> = (0..n).collect();
    let find = |label: &mut Vec<usize>, mut i: usize| {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    };
    let link = 5e-3 * roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= link {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut owner = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut label, i);
        if owner[r] == usize::MAX {
            owner[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[owner[r]].push(i);
    }
    let mut out = Vec::with_capacity(n);
    for g in groups {
        let m = g.len();
        if m == 1 {
            out.push(roots[g[0]]);
            continue;
        }
        let mut centroid = g.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        let diameter = g
            .iter()
            .flat_map(|&i| g.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (roots[i] - roots[j]).norm())
            .fold(0.0, f64::max);
        let mut derivs = vec![p.clone()];
        for _ in 0..m {
            let next = derivs.last().expect("nonempty").derivative();
            derivs.push(next);
        }
        // a root of multiplicity m is a simple root of the (m−1)-th derivative
        let (dm1, dm) = (&derivs[m - 1], &derivs[m]);
        let start = centroid;
        for _ in 0..8 {
            let denom = dm.eval(centroid);
            if denom == ZERO {
                break;
            }
            let step = dm1.eval(centroid) / denom;
            centroid -= step;
            if step.norm() <= 4.0 * EPS * centroid.norm().max(1.0) {
                break;
            }
        }
        let vanishes = (centroid - start).norm() <= radius(m, start)
            && derivs[..m].iter().all(|d| {
                let scale = d.abs_eval(centroid.norm()).max(EPS);
                d.eval(centroid).norm() <= 1e-6 * scale
            });
        if diameter <= radius(m, centroid) && vanishes {
            out.extend(std::iter::repeat_n(centroid, m));
        } else {
            out.extend(g.iter().map(|&i| roots[i]));
        }
    }
    out
}

/// True iff `p` is nonzero and every root `r` satisfies
/// `Im r ≤ tol · max(1, |r|)`. Nonzero constants are stable.
pub fn is_stable_univariate(p: &UniPoly, tol: f64) -> bool {
    if p.is_zero() {
        return false;
    }
    match roots(p) {
        Ok(r) => r.iter().all(|z| z.im <= tol * z.norm().max(1.0)),
        Err(_) => false,
    }
}

/// True iff every root has `|Im r| ≤ tol · max(1, |r|)`; nonzero constants
/// count as real-rooted, the zero polynomial does not.
pub fn is_real_rooted(p: &UniPoly, tol: f64) -> bool {
    real_roots(p, tol).is_some()
}

/// Sorted real parts of the roots when all roots are real within `tol`.
pub fn real_roots(p: &UniPoly, tol: f64) -> Option<Vec<f64>> {
    if p.is_zero() {
        return None;
    }
    let r = roots(p).ok()?;
    if r.iter().any(|z| z.im.abs() > tol * z.norm().max(1.0)) {
        return None;
    }
    let mut re: Vec<f64> = r.into_iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    Some(re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterlaceKind {
    /// Alternation holds with `f`'s roots in the position demanded by the
    /// leading-coefficient signs: `f` interlaces `g` properly.
    Proper,
    /// `g` interlaces `f` properly, but not the other way round.
    ProperReversed,
    /// Alternation holds strictly but in neither proper orientation.
    Strict,
    /// Alternation holds with ties but in neither proper orientation.
    NonStrict,
    IdenticalRoots,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlaceReport {
    pub kind: InterlaceKind,
    /// No two roots (within or across the polynomials) closer than the
    /// merge tolerance.
    pub strict: bool,
    pub roots_f: Vec<f64>,
    pub roots_g: Vec<f64>,
}

impl InterlaceReport {
    pub fn interlaces(&self) -> bool {
        self.kind != InterlaceKind::None
    }
}

/// `top[0] ≥ other[0] ≥ top[1] ≥ other[1] ≥ …` on descending sequences.
fn chain_holds(top: &[f64], other: &[f64], slack: f64) -> bool {
    if top.len() != other.len() && top.len() != other.len() + 1 {
        return false;
    }
    let mut merged = Vec::with_capacity(top.len() + other.len());
    for k in 0..top.len() {
        merged.push(top[k]);
        if k < other.len() {
            merged.push(other[k]);
        }
    }
    merged.windows(2).all(|w| w[0] >= w[1] - slack)
}

fn properly(rf: &[f64], rg: &[f64], lf: f64, lg: f64, slack: f64) -> bool {
    let desc = |v: &[f64]| {
        let mut d = v.to_vec();
        d.reverse();
        d
    };
    let (a, b) = (desc(rf), desc(rg));
    if lf.signum() == lg.signum() {
        chain_holds(&b, &a, slack)
    } else {
        chain_holds(&a, &b, slack)
    }
}

/// Classifies how the real roots of `f` and `g` alternate.
pub fn interlacing(f: &UniPoly, g: &UniPoly, tols: &ToleranceProfile) -> InterlaceReport {
    let none = |rf: Vec<f64>, rg: Vec<f64>| InterlaceReport {
        kind: InterlaceKind::None,
        strict: false,
        roots_f: rf,
        roots_g: rg,
    };
    let (rf, rg) = match (real_roots(f, tols.real_root_tol), real_roots(g, tols.real_root_tol)) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => return none(a.unwrap_or_default(), b.unwrap_or_default()),
    };
    if rf.len().abs_diff(rg.len()) > 1 {
        return none(rf, rg);
    }
    let slack = tols.root_merge_tol;
    let mut all: Vec<f64> = rf.iter().chain(&rg).copied().collect();
    all.sort_by(f64::total_cmp);
    let strict = all.windows(2).all(|w| w[1] - w[0] > slack);
    let identical =
        rf.len() == rg.len() && rf.iter().zip(&rg).all(|(a, b)| (a - b).abs() <= slack);
    let (lf, lg) = (f.leading().re, g.leading().re);
    let kind = if identical {
        InterlaceKind::IdenticalRoots
    } else if properly(&rf, &rg, lf, lg, slack) {
        InterlaceKind::Proper
    } else if properly(&rg, &rf, lg, lf, slack) {
        InterlaceKind::ProperReversed
    } else {
        let desc = |v: &[f64]| v.iter().rev().copied().collect::<Vec<f64>>();
        let (a, b) = (desc(&rf), desc(&rg));
        if chain_holds(&a, &b, slack) || chain_holds(&b, &a, slack) {
            if strict {
                InterlaceKind::Strict
            } else {
                InterlaceKind::NonStrict
            }
        } else {
            InterlaceKind::None
        }
    };
    InterlaceReport {
        kind,
        strict,
        roots_f: rf,
        roots_g: rg,
    }
}

/// `W(f, g) = f′g − g′f`.
pub fn wronskian(f: &UniPoly, g: &UniPoly) -> UniPoly {
    f.derivative().mul(g).sub(&g.derivative().mul(f))
}

/// True iff `W(f, g) ≤ 0` on the real line, up to
/// `sign_tol · max(1, ‖f‖∞‖g‖∞)`. The Wronskian is sampled on a Chebyshev
/// grid over `[−R, R]` (R above every root of f, g and W) and at the real
/// critical points of W; outside the interval its leading term decides.
pub fn wronskian_sign_leq0(f: &UniPoly, g: &UniPoly, tols: &ToleranceProfile) -> bool {
    let w = wronskian(f, g);
    if w.is_zero() {
        return true;
    }
    let bound = tols.sign_tol * (f.max_abs_coeff() * g.max_abs_coeff()).max(1.0);
    let lead = w.leading().re;
    if w.degree() > 0 && (w.degree() % 2 == 1 || lead > 0.0) {
        return false;
    }
    let r = 1.0 + f.cauchy_bound().max(g.cauchy_bound()).max(w.cauchy_bound());
    const GRID: usize = 256;
    let mut max_val = (0..=GRID)
        .map(|k| w.eval_real(r * (PI * k as f64 / GRID as f64).cos()))
        .fold(f64::NEG_INFINITY, f64::max);
    let dw = w.derivative();
    if !dw.is_zero() && dw.degree() > 0 {
        if let Ok(crit) = roots(&dw) {
            for z in crit {
                if z.im.abs() <= 1e-6 * z.norm().max(1.0) {
                    max_val = max_val.max(w.eval_real(z.re));
                }
            }
        }
    }
    max_val <= bound
}
