use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place.
///
/// Matrix tolerances are relative to the Frobenius norm of the matrix under
/// test; polynomial tolerances are absolute unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    /// Hermitian symmetry residual, relative to `‖m‖_F`.
    pub hermitian_tol: f64,
    /// Eigen-decomposition accuracy and PSD boundary band, relative to `‖m‖_F`.
    pub eig_tol: f64,
    /// Singular pivot threshold for LU, relative to `‖m‖_F`.
    pub pivot_tol: f64,
    /// Coefficients with modulus at or below this are dropped.
    pub coeff_zero_tol: f64,
    /// Root residual bound `|p(r)| <= root_tol * ‖p‖ * max(1,|r|)^deg`.
    pub root_tol: f64,
    /// Roots closer than this are merged when classifying interlacing.
    pub root_merge_tol: f64,
    /// One-sided slack for univariate stability: `Im(r) <= stab_tol * max(1,|r|)`.
    pub stab_tol: f64,
    /// Two-sided slack for real-rootedness: `|Im(r)| <= real_root_tol * max(1,|r|)`.
    pub real_root_tol: f64,
    /// Wronskian sign slack, relative to the magnitude of the evaluated terms.
    pub sign_tol: f64,
    /// Witness residual bound `|f(w)| <= residual_tol * Σ|c| * max(1,‖w‖)^deg`.
    pub residual_tol: f64,
    /// Interior offset δ used by cone samplers.
    pub interior_delta: f64,
    /// Minimal interior margin of a witness' imaginary part.
    pub witness_margin: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            eig_tol: 1e-10,
            pivot_tol: 1e-12,
            coeff_zero_tol: 1e-12,
            root_tol: 1e-8,
            root_merge_tol: 1e-7,
            stab_tol: 1e-9,
            real_root_tol: 1e-9,
            sign_tol: 1e-9,
            residual_tol: 1e-6,
            interior_delta: 1e-3,
            witness_margin: 5e-4,
        }
    }
}

impl ToleranceProfile {
    /// Override a single field by name; returns `false` for an unknown name.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "hermitian_tol" => &mut self.hermitian_tol,
            "eig_tol" => &mut self.eig_tol,
            "pivot_tol" => &mut self.pivot_tol,
            "coeff_zero_tol" => &mut self.coeff_zero_tol,
            "root_tol" => &mut self.root_tol,
            "root_merge_tol" => &mut self.root_merge_tol,
            "stab_tol" => &mut self.stab_tol,
            "real_root_tol" => &mut self.real_root_tol,
            "sign_tol" => &mut self.sign_tol,
            "residual_tol" => &mut self.residual_tol,
            "interior_delta" => &mut self.interior_delta,
            "witness_margin" => &mut self.witness_margin,
            _ => return false,
        };
        *slot = value;
        true
    }
}
