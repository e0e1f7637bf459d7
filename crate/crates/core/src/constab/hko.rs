//! Pairs of real polynomials `(f, g)`: the lift `g + w·f`, the real pencil
//! `λf + μg`, directional Wronskians and the split `h = g + i·f`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::search::{line_point, line_roots};
use super::{
    check_k_stability, complex_norm, draw_rng, witness_ok, Certificate, SamplingConfig, Status,
    Verdict,
};
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::poly::{wronskian_v, MultiPoly};
use crate::unistab::{interlacing, roots_with, wronskian, InterlaceKind};

const C1: Complex64 = Complex64::new(1.0, 0.0);

fn require_real_pair(f: &MultiPoly, g: &MultiPoly) -> Result<()> {
    if f.vars() != g.vars() {
        return Err(Error::VariableMismatch(f.vars().to_vec(), g.vars().to_vec()));
    }
    if !f.is_real() || !g.is_real() {
        return Err(Error::NonReal);
    }
    Ok(())
}

fn fresh_name(vars: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while vars.contains(&name) {
        name.push('_');
    }
    name
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbLiftReport {
    /// `g + i·f` over `K`.
    pub complex_side: Verdict,
    /// `g + w·f` over `K × R≥0`.
    pub lifted_side: Verdict,
    pub consistent: bool,
}

/// Checks `g + i·f` over `K` against `g + w·f` over `K × R≥0`; the two are
/// stable together or not at all.
pub fn hb_lift_check(
    f: &MultiPoly,
    g: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
) -> Result<HbLiftReport> {
    require_real_pair(f, g)?;
    let h = g.plus_i_times(f)?;
    let w = fresh_name(f.vars(), "w");
    let fw = f.with_extra_var(&w);
    let gw = g.with_extra_var(&w);
    let wvar = MultiPoly::var(fw.vars().to_vec(), f.nvars());
    let lifted = gw.add(&wvar.mul(&fw)?)?;
    let lifted_cone = Cone::product(cone.clone(), Cone::orthant(1)?);
    let complex_side = check_k_stability(&h, cone, cfg)?;
    let mut lifted_side = check_k_stability(&lifted, &lifted_cone, cfg)?;
    // a root z of g + i·f is the root (z, i) of g + w·f
    if complex_side.status.is_negative() && !lifted_side.status.is_negative() {
        if let Some(z) = &complex_side.witness {
            let mut zw = z.clone();
            zw.push(Complex64::new(0.0, 1.0));
            if witness_ok(&lifted, &lifted_cone, &zw, &cfg.tols) {
                lifted_side = derived(&lifted, zw, "root of g + i f with w = i", cfg);
            }
        }
    }
    let consistent = complex_side.status.is_negative() == lifted_side.status.is_negative();
    Ok(HbLiftReport {
        complex_side,
        lifted_side,
        consistent,
    })
}

fn derived(p: &MultiPoly, z: Vec<Complex64>, source: &str, cfg: &SamplingConfig) -> Verdict {
    Verdict {
        status: Status::Falsified,
        witness: None,
        certificate: Some(Certificate::DerivedRoot {
            source: source.to_string(),
        }),
        samples: 0,
        seed: cfg.seed,
        residual: None,
        max_root_imag: None,
    }
    .with_witness(p, z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilMember {
    pub lambda: f64,
    pub mu: f64,
    /// `λf + μg` is the zero polynomial, which the pencil condition allows.
    pub zero: bool,
    pub verdict: Verdict,
    /// Added by a line search rather than taken from the grid.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilReport {
    pub members: Vec<PencilMember>,
    pub g_plus_if: Verdict,
    pub f_plus_ig: Verdict,
    /// No member of the pencil was shown unstable.
    pub pencil_clean: bool,
    /// At least one of `g + i·f`, `f + i·g` was not shown unstable.
    pub side_clean: bool,
    pub consistent: bool,
}

/// 32 directions on the unit circle together with the two axes.
pub fn default_pencil_grid() -> Vec<(f64, f64)> {
    let mut grid: Vec<(f64, f64)> = vec![(1.0, 0.0), (0.0, 1.0)];
    for k in 0..32 {
        let t = 2.0 * PI * k as f64 / 32.0;
        let (s, c) = t.sin_cos();
        let p = (round_tiny(c), round_tiny(s));
        if !grid.contains(&p) {
            grid.push(p);
        }
    }
    grid
}

fn round_tiny(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

fn combine(f: &MultiPoly, lambda: f64, g: &MultiPoly, mu: f64) -> MultiPoly {
    f.scale(Complex64::new(lambda, 0.0))
        .add(&g.scale(Complex64::new(mu, 0.0)))
        .expect("same variables")
}

/// Tests every pencil member `λf + μg` on the grid together with `g + i·f`
/// and `f + i·g`. Witness lines are shared: a pencil witness yields side
/// witnesses on the same real line, and two side witnesses are joined by a
/// path of lines along which the roots of `f` and `g` must stop
/// interlacing, which yields an explicit unstable pencil member.
pub fn pencil_hko_check(
    f: &MultiPoly,
    g: &MultiPoly,
    cone: &Cone,
    grid: Option<&[(f64, f64)]>,
    cfg: &SamplingConfig,
) -> Result<PencilReport> {
    require_real_pair(f, g)?;
    if f.is_zero() && g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let default_grid = default_pencil_grid();
    let grid = grid.unwrap_or(&default_grid);
    let g_if = g.plus_i_times(f)?;
    let f_ig = f.plus_i_times(g)?;
    let mut g_plus_if = check_k_stability(&g_if, cone, cfg)?;
    let mut f_plus_ig = check_k_stability(&f_ig, cone, cfg)?;
    let mut members = Vec::with_capacity(grid.len());
    for &(lambda, mu) in grid {
        let p = combine(f, lambda, g, mu);
        let (zero, verdict) = if p.is_zero() {
            (
                true,
                Verdict {
                    status: Status::IdenticallyZero,
                    witness: None,
                    certificate: Some(Certificate::ZeroPolynomial),
                    samples: 0,
                    seed: cfg.seed,
                    residual: None,
                    max_root_imag: None,
                },
            )
        } else {
            (false, check_k_stability(&p, cone, cfg)?)
        };
        members.push(PencilMember {
            lambda,
            mu,
            zero,
            verdict,
            derived: false,
        });
    }

    // pencil witness line ⇒ both sides have roots on it
    let pencil_line = members
        .iter()
        .find(|m| m.verdict.status.is_negative())
        .and_then(|m| m.verdict.witness.as_ref().map(|z| (split(z), m.lambda, m.mu)));
    if let Some(((x, y), lambda, mu)) = pencil_line {
        let source = format!("line of pencil member ({lambda:.6}, {mu:.6})");
        for (side, poly) in [(&mut g_plus_if, &g_if), (&mut f_plus_ig, &f_ig)] {
            if !side.status.is_negative() {
                if let Some(z) = upper_root_on_line(poly, cone, cfg, &x, &y) {
                    *side = derived(poly, z, &source, cfg);
                }
            }
        }
    }

    let pencil_clean = |ms: &[PencilMember]| ms.iter().all(|m| !m.verdict.status.is_negative());
    if pencil_clean(&members) && g_plus_if.status.is_negative() && f_plus_ig.status.is_negative() {
        let l1 = g_plus_if.witness.as_deref().map(split);
        let l2 = f_plus_ig.witness.as_deref().map(split);
        if let (Some(l1), Some(l2)) = (l1, l2) {
            if let Some((lambda, mu, z)) = member_between(f, g, cone, cfg, &l1, &l2) {
                let p = combine(f, lambda, g, mu);
                members.push(PencilMember {
                    lambda,
                    mu,
                    zero: false,
                    verdict: derived(&p, z, "interlacing breaks between side witness lines", cfg),
                    derived: true,
                });
            }
        }
    }

    let pencil_clean = pencil_clean(&members);
    let side_clean = !g_plus_if.status.is_negative() || !f_plus_ig.status.is_negative();
    Ok(PencilReport {
        members,
        g_plus_if,
        f_plus_ig,
        pencil_clean,
        side_clean,
        consistent: pencil_clean == side_clean,
    })
}

type Line = (Vec<f64>, Vec<f64>);

fn split(z: &[Complex64]) -> Line {
    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
}

/// Root of `t ↦ p(x + t·y)` in the upper half-plane, as a validated witness.
fn upper_root_on_line(
    p: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    x: &[f64],
    y: &[f64],
) -> Option<Vec<Complex64>> {
    match line_roots(p, x, y, cfg) {
        None => {
            let z = line_point(x, y, Complex64::new(0.0, 1.0));
            witness_ok(p, cone, &z, &cfg.tols).then_some(z)
        }
        Some((_, rs)) => rs
            .into_iter()
            .filter(|r| r.im > 0.0)
            .map(|r| line_point(x, y, r))
            .find(|z| witness_ok(p, cone, z, &cfg.tols)),
    }
}

/// An unstable pencil member visible on the line `(x, y)`.
fn member_on_line(
    f: &MultiPoly,
    g: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    x: &[f64],
    y: &[f64],
) -> Option<(f64, f64, Vec<Complex64>)> {
    let ft = f.restrict_line(x, y);
    let gt = g.restrict_line(x, y);
    let mut candidates: Vec<f64> = vec![0.0, PI / 2.0];
    if !ft.is_zero() && !gt.is_zero() {
        // f̃ ∝ g̃ makes this member vanish on the line
        candidates.push((-ft.leading().re).atan2(gt.leading().re));
        // a double root of λf̃ + μg̃ sits at every critical point of f̃/g̃;
        // turning (λ, μ) slightly past it pushes the pair off the real axis
        let w = wronskian(&ft, &gt);
        if w.degree() > 0 {
            for t in roots_with(&w, &cfg.tols).unwrap_or_default() {
                if t.im.abs() > 1e-6 * t.norm().max(1.0) {
                    continue;
                }
                // (λ, μ) ∝ (g̃(t), −f̃(t))
                let theta = (-ft.eval_real(t.re)).atan2(gt.eval_real(t.re));
                for delta in [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3] {
                    candidates.push(theta + delta);
                    candidates.push(theta - delta);
                }
            }
        }
    }
    for k in 0..32 {
        candidates.push(PI * k as f64 / 32.0);
    }
    for theta in candidates {
        // (λ, μ) = (cos θ, sin θ)
        let (mu, lambda) = theta.sin_cos();
        let p = combine(f, lambda, g, mu);
        if p.is_zero() {
            continue;
        }
        if let Some(z) = upper_root_on_line(&p, cone, cfg, x, y) {
            return Some((lambda, mu, z));
        }
    }
    None
}

fn orientation(f: &MultiPoly, g: &MultiPoly, cfg: &SamplingConfig, x: &[f64], y: &[f64]) -> InterlaceKind {
    let ft = f.restrict_line(x, y);
    let gt = g.restrict_line(x, y);
    if ft.is_zero() || gt.is_zero() {
        return InterlaceKind::None;
    }
    interlacing(&ft, &gt, &cfg.tols).kind
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| (1.0 - s) * u + s * v).collect()
}

/// Walks from `l1` to `l2` through lines with interior directions, bisecting
/// on the orientation of interlacing until it breaks.
fn member_between(
    f: &MultiPoly,
    g: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    l1: &Line,
    l2: &Line,
) -> Option<(f64, f64, Vec<Complex64>)> {
    for (x, y) in [l1, l2] {
        if let Some(m) = member_on_line(f, g, cone, cfg, x, y) {
            return Some(m);
        }
    }
    let at = |s: f64| (lerp(&l1.0, &l2.0, s), lerp(&l1.1, &l2.1, s));
    let (mut lo, mut hi) = (0.0, 1.0);
    let k_lo = orientation(f, g, cfg, &l1.0, &l1.1);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (x, y) = at(mid);
        let kind = orientation(f, g, cfg, &x, &y);
        let broken = !matches!(kind, InterlaceKind::Proper | InterlaceKind::ProperReversed);
        if broken {
            if let Some(m) = member_on_line(f, g, cone, cfg, &x, &y) {
                return Some(m);
            }
        }
        if kind == k_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    [lo, hi].into_iter().find_map(|s| {
        let (x, y) = at(s);
        member_on_line(f, g, cone, cfg, &x, &y)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WronskianViolation {
    pub direction: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WronskianReport {
    pub directions: Vec<Vec<f64>>,
    /// Directions were sampled from `int K` instead of taken from generators.
    pub sampled_directions: bool,
    pub points: usize,
    pub passes: bool,
    pub max_value: f64,
    /// First few points with `W_v(f, g) > 0`.
    pub violations: Vec<WronskianViolation>,
}

const SAMPLED_DIRECTIONS: usize = 16;
const MAX_VIOLATIONS: usize = 8;

/// Directions for the Wronskian test: generators of orthant and polyhedral
/// factors, or sampled interior points when a PSD factor is present.
fn wronskian_directions(cone: &Cone, cfg: &SamplingConfig) -> (Vec<Vec<f64>>, bool) {
    let leaves = cone.leaves();
    if leaves.iter().any(|(_, l)| matches!(l, Cone::Psd { .. })) {
        let dirs = (0..SAMPLED_DIRECTIONS)
            .map(|j| {
                let mut rng = draw_rng(cfg.seed ^ 0x5752_4f4e_534b_4941, j);
                cone.sample_interior(&mut rng)
            })
            .collect();
        return (dirs, true);
    }
    let n = cone.dim();
    let mut dirs = Vec::new();
    for (off, leaf) in leaves {
        let local: Vec<Vec<f64>> = match leaf {
            Cone::Orthant { n } => (0..*n)
                .map(|k| {
                    let mut e = vec![0.0; *n];
                    e[k] = 1.0;
                    e
                })
                .collect(),
            Cone::Polyhedral(pc) => pc.generators().to_vec(),
            _ => unreachable!("psd handled above; leaves are not products"),
        };
        for v in local {
            let mut full = vec![0.0; n];
            full[off..off + v.len()].copy_from_slice(&v);
            dirs.push(full);
        }
    }
    (dirs, false)
}

/// Tests `W_v(f, g) = ∂_v f · g − f · ∂_v g ≤ 0` at `n_points` Gaussian
/// points for every direction `v`. A positive value disproves the sign
/// condition; passing is evidence only.
pub fn wronskian_certificate(
    f: &MultiPoly,
    g: &MultiPoly,
    cone: &Cone,
    n_points: usize,
    cfg: &SamplingConfig,
) -> Result<WronskianReport> {
    require_real_pair(f, g)?;
    if f.nvars() != cone.dim() {
        return Err(Error::Shape("polynomial and cone dimensions differ".into()));
    }
    let (directions, sampled) = wronskian_directions(cone, cfg);
    let normal = Normal::new(0.0, cfg.sigma).expect("positive sigma");
    let points: Vec<Vec<f64>> = (0..n_points)
        .map(|j| {
            let mut rng = draw_rng(cfg.seed, j);
            (0..f.nvars()).map(|_| normal.sample(&mut rng)).collect()
        })
        .collect();
    let base = f.coeff_l1() * g.coeff_l1();
    let deg = (f.degree() + g.degree()) as i32;
    let mut max_value = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (k, v) in directions.iter().enumerate() {
        let w = wronskian_v(f, g, v)?;
        let vnorm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        for x in &points {
            let value = w.eval_real(x).re;
            let xz: Vec<Complex64> = x.iter().map(|&a| C1 * a).collect();
            let scale = base * vnorm * complex_norm(&xz).max(1.0).powi(deg);
            max_value = max_value.max(value);
            if value > cfg.tols.sign_tol * scale.max(1.0) && violations.len() < MAX_VIOLATIONS {
                violations.push(WronskianViolation {
                    direction: k,
                    point: x.clone(),
                    value,
                });
            }
        }
    }
    Ok(WronskianReport {
        directions,
        sampled_directions: sampled,
        points: n_points,
        passes: violations.is_empty(),
        max_value: if max_value.is_finite() { max_value } else { 0.0 },
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub h: Verdict,
    /// Real part; `None` when it vanishes.
    pub g: Option<Verdict>,
    /// Imaginary part; `None` when it vanishes.
    pub f: Option<Verdict>,
    /// False when `h` was not shown unstable but a nonzero part was.
    pub consistent: bool,
}

/// Splits `h = g + i·f` and checks `h`, `g` and `f`; when `h` is K-stable
/// each part is K-stable or zero.
pub fn decompose_check(h: &MultiPoly, cone: &Cone, cfg: &SamplingConfig) -> Result<DecomposeReport> {
    let (g, f) = h.real_imag_parts();
    let hv = check_k_stability(h, cone, cfg)?;
    let gv = if g.is_zero() { None } else { Some(check_k_stability(&g, cone, cfg)?) };
    let fv = if f.is_zero() { None } else { Some(check_k_stability(&f, cone, cfg)?) };
    let part_negative = [&gv, &fv]
        .into_iter()
        .flatten()
        .any(|v| v.status.is_negative());
    Ok(DecomposeReport {
        consistent: hv.status.is_negative() || !part_negative,
        h: hv,
        g: gv,
        f: fv,
    })
}
