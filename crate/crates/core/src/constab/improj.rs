use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::{draw_rng, falsify_k_stability, SamplingConfig, Verdict};
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::unistab::roots_with;

/// Points of the imaginary projection `{Im z : f(z) = 0}`.
///
/// Each draw picks a free variable among those `f` depends on, fixes the
/// others to random complex values whose real and imaginary parts lie in
/// the per-variable `bounds`, and records `Im z` for every root in the free
/// variable. Stops after `n_points` points (or `50·n_points` draws).
pub fn imaginary_projection_sample(
    f: &MultiPoly,
    n_points: usize,
    bounds: &[(f64, f64)],
    cfg: &SamplingConfig,
) -> Result<Vec<Vec<f64>>> {
    if f.is_zero() || f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let n = f.nvars();
    if bounds.len() != n {
        return Err(Error::Shape(format!("{} bounds for {n} variables", bounds.len())));
    }
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::Shape("each bound must be a finite interval lo ≤ hi".into()));
    }
    let active: Vec<usize> = (0..n).filter(|&k| f.degree_in(k) > 0).collect();
    let mut cloud = Vec::with_capacity(n_points);
    let max_draws = n_points.saturating_mul(50).max(1);
    for draw in 0..max_draws {
        if cloud.len() >= n_points {
            break;
        }
        let mut rng = draw_rng(cfg.seed, draw);
        let free = active[draw % active.len()];
        let mut fixed = BTreeMap::new();
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if k != free {
                let re = if lo < hi { rng.random_range(lo..hi) } else { lo };
                let im = if lo < hi { rng.random_range(lo..hi) } else { lo };
                fixed.insert(k, Complex64::new(re, im));
            }
        }
        let reduced = f.substitute_partial(&fixed)?;
        // only the free variable is left
        let uni = reduced.restrict_line(&[0.0], &[1.0]);
        if uni.degree() == 0 {
            continue;
        }
        let Ok(rs) = roots_with(&uni, &cfg.tols) else {
            continue;
        };
        for r in rs {
            if cloud.len() >= n_points {
                break;
            }
            let point: Vec<f64> = (0..n)
                .map(|k| if k == free { r.im } else { fixed[&k].im })
                .collect();
            cloud.push(point);
        }
    }
    Ok(cloud)
}

/// Fixes `z_k = a_k + i·b_k` for `k` in `fixed` and searches the remaining
/// variables over `k2`. K-stability over `K1 × K2` survives this
/// specialization whenever `b ∈ int K1`, so a falsified result here refutes
/// the full polynomial.
pub fn specialize_stability_check(
    f: &MultiPoly,
    fixed: &[usize],
    a: &[f64],
    b: &[f64],
    k1: &Cone,
    k2: &Cone,
    cfg: &SamplingConfig,
) -> Result<Verdict> {
    let n = f.nvars();
    if fixed.len() != a.len() || fixed.len() != b.len() || fixed.len() != k1.dim() {
        return Err(Error::Shape("fixed variables, a, b and K1 must agree in length".into()));
    }
    if n != k1.dim() + k2.dim() {
        return Err(Error::Shape(format!(
            "{n} variables but K1 × K2 has dimension {}",
            k1.dim() + k2.dim()
        )));
    }
    if fixed.iter().any(|&k| k >= n) || (1..fixed.len()).any(|j| fixed[..j].contains(&fixed[j])) {
        return Err(Error::Shape("fixed variable indices must be distinct and in range".into()));
    }
    if !k1.contains_interior(b, 0.0)? {
        return Err(Error::NotInterior);
    }
    let subs: BTreeMap<usize, Complex64> = fixed
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&k, (&re, &im))| (k, Complex64::new(re, im)))
        .collect();
    let reduced = f.substitute_partial(&subs)?;
    falsify_k_stability(&reduced, k2, cfg)
}
