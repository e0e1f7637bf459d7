use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{draw_rng, witness_ok, Certificate, SamplingConfig, Status, Verdict, WitnessMethod};
use crate::cones::Cone;
use crate::poly::MultiPoly;
use crate::unistab::{roots_with, UniPoly};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) struct Found {
    pub z: Vec<Complex64>,
    pub method: WitnessMethod,
}

/// Everything one draw needs: the random line and the two tube directions.
pub(crate) struct Draw {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y2: Vec<f64>,
    pub axis: usize,
}

pub(crate) fn make_draw(cone: &Cone, cfg: &SamplingConfig, index: usize) -> Draw {
    let n = cone.dim();
    let mut rng = draw_rng(cfg.seed, index);
    let normal = Normal::new(0.0, cfg.sigma).expect("positive sigma");
    let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let y = cone.sample_interior(&mut rng);
    let y2 = cone.sample_interior(&mut rng);
    Draw {
        x,
        y,
        y2,
        axis: index % n,
    }
}

fn newton_polish(u: &UniPoly, r: Complex64) -> Complex64 {
    let d = u.derivative().eval(r);
    let v = u.eval(r);
    if d.norm() == 0.0 {
        return r;
    }
    let step = v / d;
    // damped: halve until the residual does not grow
    let mut s = 1.0;
    for _ in 0..4 {
        let cand = r - step * s;
        if u.eval(cand).norm() <= v.norm() {
            return cand;
        }
        s *= 0.5;
    }
    r
}

/// Roots of the restriction `t ↦ f(x + t·y)`, or `None` if it vanishes.
pub(crate) fn line_roots(f: &MultiPoly, x: &[f64], y: &[f64], cfg: &SamplingConfig) -> Option<(UniPoly, Vec<Complex64>)> {
    let u = f.restrict_line(x, y);
    if u.is_zero() {
        return None;
    }
    let r = if u.degree() == 0 {
        Vec::new()
    } else {
        roots_with(&u, &cfg.tols).unwrap_or_default()
    };
    Some((u, r))
}

/// Witness from a root `t` of the real-line restriction: `x + t·y`.
pub(crate) fn line_point(x: &[f64], y: &[f64], t: Complex64) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| Complex64::new(*a, 0.0) + t * b).collect()
}

/// Probes a single real line; reports the witness and the largest |Im| of
/// the restriction's roots.
pub(crate) fn probe_line(
    f: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    homogeneous: bool,
    x: &[f64],
    y: &[f64],
) -> (Option<Found>, f64) {
    let tols = &cfg.tols;
    let Some((u, rs)) = line_roots(f, x, y, cfg) else {
        let z = line_point(x, y, I);
        let found = witness_ok(f, cone, &z, tols).then_some(Found {
            z,
            method: WitnessMethod::VanishingLine,
        });
        return (found, 0.0);
    };
    let max_imag = rs.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
    for r in &rs {
        let band = tols.stab_tol * r.norm().max(1.0);
        let (t, sign, method) = if r.im > band {
            (newton_polish(&u, *r), 1.0, WitnessMethod::RealLine)
        } else if homogeneous && r.im < -band {
            (newton_polish(&u, *r), -1.0, WitnessMethod::Reflected)
        } else {
            continue;
        };
        let z: Vec<Complex64> = line_point(x, y, t).into_iter().map(|c| c * sign).collect();
        if witness_ok(f, cone, &z, tols) {
            return (Some(Found { z, method }), max_imag);
        }
    }
    (None, max_imag)
}

/// Probes `s ↦ f(x + i·y + s·u)` for a real direction `u`.
pub(crate) fn probe_tube(
    f: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Option<Found> {
    let base: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let dir: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let uni = f.restrict_line_complex(&base, &dir);
    if uni.is_zero() {
        return witness_ok(f, cone, &base, &cfg.tols).then_some(Found {
            z: base,
            method: WitnessMethod::VanishingLine,
        });
    }
    if uni.degree() == 0 {
        return None;
    }
    for s in roots_with(&uni, &cfg.tols).unwrap_or_default() {
        let s = newton_polish(&uni, s);
        let z: Vec<Complex64> = base.iter().zip(&dir).map(|(b, d)| b + s * d).collect();
        if witness_ok(f, cone, &z, &cfg.tols) {
            return Some(Found {
                z,
                method: WitnessMethod::Tube,
            });
        }
    }
    None
}

pub(crate) fn probe(
    f: &MultiPoly,
    cone: &Cone,
    cfg: &SamplingConfig,
    homogeneous: bool,
    index: usize,
) -> (Option<Found>, f64) {
    let d = make_draw(cone, cfg, index);
    let (found, max_imag) = probe_line(f, cone, cfg, homogeneous, &d.x, &d.y);
    if found.is_some() {
        return (found, max_imag);
    }
    let chord: Vec<f64> = d.y2.iter().zip(&d.y).map(|(a, b)| a - b).collect();
    let mut axis = vec![0.0; cone.dim()];
    axis[d.axis] = 1.0;
    for u in [chord, axis] {
        if let Some(w) = probe_tube(f, cone, cfg, &d.x, &d.y, &u) {
            return (Some(w), max_imag);
        }
    }
    (None, max_imag)
}

pub(crate) fn run(f: &MultiPoly, cone: &Cone, cfg: &SamplingConfig, homogeneous: bool) -> Verdict {
    // nonnegative f64 bit patterns order like the values
    let max_imag = AtomicU64::new(0f64.to_bits());
    let task = |i: usize| {
        let (found, m) = probe(f, cone, cfg, homogeneous, i);
        max_imag.fetch_max(m.to_bits(), Ordering::Relaxed);
        found.map(|w| (i, w))
    };
    let hit = match cfg.threads {
        Some(1) => (0..cfg.samples).find_map(task),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| (0..cfg.samples).into_par_iter().find_map_first(task)),
            Err(_) => (0..cfg.samples).find_map(task),
        },
        None => (0..cfg.samples).into_par_iter().find_map_first(task),
    };
    match hit {
        Some((draw, w)) => Verdict {
            samples: draw + 1,
            ..Verdict::bare(
                Status::Falsified,
                Some(Certificate::SampledRoot {
                    draw,
                    method: w.method,
                }),
                cfg,
            )
        }
        .with_witness(f, w.z),
        None => Verdict {
            samples: cfg.samples,
            max_root_imag: Some(f64::from_bits(max_imag.load(Ordering::Relaxed))),
            ..Verdict::bare(Status::NotFalsified, None, cfg)
        },
    }
}
