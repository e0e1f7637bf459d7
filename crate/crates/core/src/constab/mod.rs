//! K-stability: `f(z) ≠ 0` whenever `Im z ∈ int K`.
//!
//! Degree ≤ 1 polynomials are decided exactly ([`linear_k_stability`]).
//! Everything else is searched for counterexamples ([`falsify_k_stability`]);
//! a sampling check can falsify but never certify, and [`Verdict`] keeps
//! that distinction explicit.
//!
//! Every draw `i` owns the random stream `(seed, i)`, so serial and parallel
//! runs visit the same lines, and the witness from the lowest draw index is
//! reported.

mod hko;
mod improj;
mod search;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::tolerance::ToleranceProfile;

pub use hko::{
    decompose_check, hb_lift_check, pencil_hko_check, wronskian_certificate, DecomposeReport,
    HbLiftReport, PencilMember, PencilReport, WronskianReport, WronskianViolation,
};
pub use improj::{imaginary_projection_sample, specialize_stability_check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    CertifiedStable,
    CertifiedUnstable,
    Falsified,
    NotFalsified,
    /// A sufficient criterion did not apply; nothing is claimed.
    NotCertified,
    IdenticallyZero,
}

impl Status {
    /// A counterexample or exact instability proof exists.
    pub fn is_negative(self) -> bool {
        matches!(self, Status::CertifiedUnstable | Status::Falsified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    ZeroPolynomial,
    NonzeroConstant {
        value: Complex64,
    },
    /// `sign·a ∈ int K*`; `margin` is the smallest pairing with a unit ray.
    DualInterior {
        sign: i8,
        margin: f64,
    },
    /// `sign·a` on the boundary of `K*` and `sign·Im b ≥ 0`.
    DualBoundary {
        sign: i8,
        margin: f64,
        imag_b: f64,
    },
    /// Neither sign condition holds; the witness solves `⟨a, y⟩ = −Im b`.
    LinearUnstable {
        min_pairing: f64,
        max_pairing: f64,
        imag_b: f64,
    },
    /// Root found on a sampled line or tube.
    SampledRoot {
        draw: usize,
        method: WitnessMethod,
    },
    /// Witness transported from a related polynomial's witness line.
    DerivedRoot {
        source: String,
    },
    PsdBlocks {
        lambda_min: f64,
        b_hermitian_residual: f64,
    },
    IndefiniteBlocks {
        lambda_min: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMethod {
    /// Root `α + iβ`, `β > 0`, of `t ↦ f(x + t·y)`.
    RealLine,
    /// Root with `β < 0` of a homogeneous restriction, reflected through
    /// `z ↦ −z`.
    Reflected,
    /// Root `s` of `s ↦ f(x + i·y + s·u)` for a real direction `u`.
    Tube,
    /// The restriction vanishes identically, so `f(x + i·y) = 0`.
    VanishingLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Vec<Complex64>>,
    pub certificate: Option<Certificate>,
    pub samples: usize,
    pub seed: u64,
    /// `|f(witness)|` when a witness is present.
    pub residual: Option<f64>,
    /// Largest `|Im|` over all real-line restriction roots seen, when every
    /// draw ran to completion.
    pub max_root_imag: Option<f64>,
}

impl Verdict {
    pub(crate) fn bare(status: Status, certificate: Option<Certificate>, cfg: &SamplingConfig) -> Self {
        Self {
            status,
            witness: None,
            certificate,
            samples: 0,
            seed: cfg.seed,
            residual: None,
            max_root_imag: None,
        }
    }

    fn with_witness(mut self, f: &MultiPoly, z: Vec<Complex64>) -> Self {
        self.residual = Some(f.eval(&z).norm());
        self.witness = Some(z);
        self
    }

    /// Rechecks a witness: `|f(z)| ≤ residual_tol · scale` and
    /// `Im z ∈ int K` with margin `witness_margin`. Verdicts without a
    /// witness pass trivially.
    pub fn verify(&self, f: &MultiPoly, cone: &Cone, tols: &ToleranceProfile) -> Result<bool> {
        match &self.witness {
            None => Ok(true),
            Some(z) => {
                if z.len() != f.nvars() || z.len() != cone.dim() {
                    return Err(Error::Shape("witness dimension".into()));
                }
                Ok(witness_ok(f, cone, z, tols))
            }
        }
    }
}

/// Sampling parameters shared by every search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    /// Standard deviation of the real parts `x`.
    pub sigma: f64,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs serially.
    pub threads: Option<usize>,
    pub tols: ToleranceProfile,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            sigma: 2.0,
            threads: None,
            tols: ToleranceProfile::default(),
        }
    }
}

impl SamplingConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }
}

/// Random stream for draw `index`.
pub fn draw_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub(crate) fn complex_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Scale of `|f(z)|`: `Σ|c| · max(1, ‖z‖)^deg`.
pub(crate) fn residual_scale(f: &MultiPoly, z: &[Complex64]) -> f64 {
    f.coeff_l1().max(f64::MIN_POSITIVE) * complex_norm(z).max(1.0).powi(f.degree() as i32)
}

pub(crate) fn witness_ok(f: &MultiPoly, cone: &Cone, z: &[Complex64], tols: &ToleranceProfile) -> bool {
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return false;
    }
    let im: Vec<f64> = z.iter().map(|c| c.im).collect();
    if !cone.contains_interior(&im, tols.witness_margin).unwrap_or(false) {
        return false;
    }
    f.eval(z).norm() <= tols.residual_tol * residual_scale(f, z)
}

fn check_dims(f: &MultiPoly, cone: &Cone) -> Result<()> {
    if f.nvars() != cone.dim() {
        return Err(Error::Shape(format!(
            "polynomial has {} variables but the cone has dimension {}",
            f.nvars(),
            cone.dim()
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact decision for `f = Σ a_k z_k + b` with real `a`.
///
/// For `a ≠ 0`, `f` is K-stable iff `a ∈ K*` with `Im b ≥ 0`, or `−a ∈ K*`
/// with `Im b ≤ 0`. In particular, for real `b` it suffices that `a` lies
/// in the closed dual cone, not only its interior. A complex constant term
/// is rejected unless `allow_complex_b` is set.
pub fn linear_k_stability(
    f: &MultiPoly,
    cone: &Cone,
    allow_complex_b: bool,
    cfg: &SamplingConfig,
) -> Result<Verdict> {
    check_dims(f, cone)?;
    let (a_c, b) = f.linear_parts()?;
    if a_c.iter().any(|c| c.im != 0.0) {
        return Err(Error::NonReal);
    }
    if b.im != 0.0 && !allow_complex_b {
        return Err(Error::NonReal);
    }
    let a: Vec<f64> = a_c.iter().map(|c| c.re).collect();
    let tol = cfg.tols.sign_tol;
    let norm_a = dot(&a, &a).sqrt();
    if norm_a == 0.0 {
        return Ok(if b == Complex64::new(0.0, 0.0) {
            let z: Vec<Complex64> = cone.center().iter().map(|&y| Complex64::new(0.0, y)).collect();
            Verdict::bare(Status::CertifiedUnstable, Some(Certificate::ZeroPolynomial), cfg)
                .with_witness(f, z)
        } else {
            Verdict::bare(
                Status::CertifiedStable,
                Some(Certificate::NonzeroConstant { value: b }),
                cfg,
            )
        });
    }
    let dual = cone.linear_form_to_dual(&a)?;
    let neg_dual: Vec<f64> = dual.iter().map(|v| -v).collect();
    let (min_pair, min_ray) = cone.dual_min_ray(&dual)?;
    let (neg_min, max_ray) = cone.dual_min_ray(&neg_dual)?;
    let max_pair = -neg_min;
    let band = tol * norm_a;
    let stable = |sign: i8, margin: f64| {
        Verdict::bare(
            Status::CertifiedStable,
            Some(Certificate::DualInterior { sign, margin }),
            cfg,
        )
    };
    if min_pair > band {
        return Ok(stable(1, min_pair));
    }
    if -max_pair > band {
        return Ok(stable(-1, -max_pair));
    }
    let in_dual = min_pair >= -band;
    let in_neg_dual = -max_pair >= -band;
    if in_dual && b.im >= 0.0 {
        return Ok(Verdict::bare(
            Status::CertifiedStable,
            Some(Certificate::DualBoundary { sign: 1, margin: min_pair, imag_b: b.im }),
            cfg,
        ));
    }
    if in_neg_dual && b.im <= 0.0 {
        return Ok(Verdict::bare(
            Status::CertifiedStable,
            Some(Certificate::DualBoundary { sign: -1, margin: -max_pair, imag_b: b.im }),
            cfg,
        ));
    }
    // interior points on either side of the hyperplane ⟨a, y⟩ = 0
    let center = cone.center();
    let a_center = dot(&a, &center);
    let push = |ray: &[f64], value: f64| -> Option<Vec<f64>> {
        if value == 0.0 {
            return None;
        }
        let eta = if a_center * value < 0.0 {
            (0.5 * value.abs() / a_center.abs()).min(1.0)
        } else {
            1.0
        };
        let y: Vec<f64> = ray.iter().zip(&center).map(|(r, c)| r + eta * c).collect();
        let v = dot(&a, &y);
        (v * value > 0.0).then_some(y)
    };
    let y_neg = if min_pair < 0.0 { push(&min_ray, min_pair) } else { None }
        .or_else(|| (a_center < 0.0).then(|| center.clone()));
    let y_pos = if max_pair > 0.0 { push(&max_ray, max_pair) } else { None }
        .or_else(|| (a_center > 0.0).then(|| center.clone()));
    let target = -b.im;
    let scaled = |y: &[f64]| -> Vec<f64> {
        let s = target / dot(&a, y);
        y.iter().map(|v| v * s).collect()
    };
    let y = match (target.partial_cmp(&0.0), &y_neg, &y_pos) {
        (Some(std::cmp::Ordering::Greater), _, Some(yp)) => scaled(yp),
        (Some(std::cmp::Ordering::Less), Some(yn), _) => scaled(yn),
        (_, Some(yn), Some(yp)) => {
            let (vn, vp) = (dot(&a, yn), dot(&a, yp));
            let s = (target - vn) / (vp - vn);
            yn.iter().zip(yp).map(|(n, p)| n + s * (p - n)).collect()
        }
        _ => {
            return Err(Error::InvalidCone(
                "could not place an interior point on the zero set of the linear form".into(),
            ))
        }
    };
    let xs = -b.re / (norm_a * norm_a);
    let z: Vec<Complex64> = a
        .iter()
        .zip(&y)
        .map(|(ak, yk)| Complex64::new(xs * ak, *yk))
        .collect();
    Ok(Verdict::bare(
        Status::CertifiedUnstable,
        Some(Certificate::LinearUnstable {
            min_pairing: min_pair,
            max_pairing: max_pair,
            imag_b: b.im,
        }),
        cfg,
    )
    .with_witness(f, z))
}

/// Searches for `z` with `f(z) = 0` and `Im z ∈ int K` over `cfg.samples`
/// draws. Each draw probes the real line `t ↦ f(x + t·y)` and two complex
/// tubes `s ↦ f(x + i·y + s·u)`; for homogeneous `f` it also reflects
/// lower half-plane roots through `z ↦ −z`.
pub fn falsify_k_stability(f: &MultiPoly, cone: &Cone, cfg: &SamplingConfig) -> Result<Verdict> {
    check_dims(f, cone)?;
    if f.is_zero() {
        return Ok(zero_verdict(f, cone, cfg));
    }
    if f.is_constant() {
        let value = f.coefficient(&vec![0; f.nvars()]);
        return Ok(Verdict::bare(
            Status::CertifiedStable,
            Some(Certificate::NonzeroConstant { value }),
            cfg,
        ));
    }
    Ok(search::run(f, cone, cfg, f.is_homogeneous()))
}

fn zero_verdict(f: &MultiPoly, cone: &Cone, cfg: &SamplingConfig) -> Verdict {
    let z: Vec<Complex64> = cone.center().iter().map(|&y| Complex64::new(0.0, y)).collect();
    Verdict::bare(Status::CertifiedUnstable, Some(Certificate::ZeroPolynomial), cfg).with_witness(f, z)
}

/// Exact linear decision when `f` has degree ≤ 1 and a real linear part
/// (complex constant terms allowed), sampling search otherwise.
pub fn check_k_stability(f: &MultiPoly, cone: &Cone, cfg: &SamplingConfig) -> Result<Verdict> {
    check_dims(f, cone)?;
    if f.is_zero() {
        return Ok(zero_verdict(f, cone, cfg));
    }
    if f.degree() <= 1 {
        let (a, _) = f.linear_parts()?;
        if a.iter().all(|c| c.im == 0.0) {
            return linear_k_stability(f, cone, true, cfg);
        }
    }
    falsify_k_stability(f, cone, cfg)
}

/// For homogeneous `f`, K-stability is hyperbolicity with respect to every
/// `e ∈ int K`: `f(e) ≠ 0` and `t ↦ f(x + t·e)` real-rooted. Shares its
/// probes with [`falsify_k_stability`], so the two agree draw for draw.
pub fn hyperbolicity_check(f: &MultiPoly, cone: &Cone, cfg: &SamplingConfig) -> Result<Verdict> {
    check_dims(f, cone)?;
    if !f.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    falsify_k_stability(f, cone, cfg)
}

#[cfg(test)]
mod tests;
