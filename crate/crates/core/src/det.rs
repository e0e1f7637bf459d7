//! Determinantal polynomials `f(Z) = det(Σ A_ij z_ij + B)` on symmetric
//! matrix variables, block matrices and the Khatri-Rao product.
//!
//! Matrix variables follow the upper-triangle convention of
//! [`MatrixVarIndex`]: `z_ij = z_ji`, so for `i < j` the coefficient matrix
//! of `z_ij` is `A_ij + A_ji`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constab::{draw_rng, Certificate, SamplingConfig, Status, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{determinant, lambda_min, psd_band, DenseMatrix, PsdClass};
pub use crate::linalg::{matrix_from_json_value, matrix_to_json_value, EntryJson, MatrixJson};
use crate::poly::{MatrixVarIndex, MultiPoly};
use crate::tolerance::ToleranceProfile;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An `n1 × n2` grid of `p × q` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    n1: usize,
    n2: usize,
    p: usize,
    q: usize,
    /// Row-major over the grid.
    blocks: Vec<DenseMatrix>,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<Vec<DenseMatrix>>) -> Result<Self> {
        let n1 = blocks.len();
        let n2 = blocks.first().map_or(0, Vec::len);
        if n1 == 0 || n2 == 0 {
            return Err(Error::Shape("empty block grid".into()));
        }
        if blocks.iter().any(|row| row.len() != n2) {
            return Err(Error::Shape("ragged block grid".into()));
        }
        let (p, q) = (blocks[0][0].rows(), blocks[0][0].cols());
        if p == 0 || q == 0 {
            return Err(Error::Shape("empty blocks".into()));
        }
        if blocks.iter().flatten().any(|b| b.rows() != p || b.cols() != q) {
            return Err(Error::Shape("blocks must share one shape".into()));
        }
        Ok(Self {
            n1,
            n2,
            p,
            q,
            blocks: blocks.into_iter().flatten().collect(),
        })
    }

    /// Square grid `n × n` of `d × d` blocks given by `f(i, j)`.
    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize, usize) -> DenseMatrix) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| (0..n).map(|j| f(i, j)).collect())
                .collect::<Vec<Vec<_>>>(),
        )
        .and_then(|m| {
            if m.p != d || m.q != d {
                Err(Error::Shape(format!("expected {d}x{d} blocks")))
            } else {
                Ok(m)
            }
        })
    }

    /// Every entry of `m` as a `1 × 1` block.
    pub fn from_scalars(m: &DenseMatrix) -> Self {
        Self {
            n1: m.rows(),
            n2: m.cols(),
            p: 1,
            q: 1,
            blocks: m.entries().iter().map(|&z| DenseMatrix::from_vec(1, 1, vec![z]).expect("1x1")).collect(),
        }
    }

    /// Cuts `m` into `p × q` blocks.
    pub fn from_flat(m: &DenseMatrix, p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 || !m.rows().is_multiple_of(p) || !m.cols().is_multiple_of(q) {
            return Err(Error::Shape(format!(
                "{}x{} matrix does not split into {p}x{q} blocks",
                m.rows(),
                m.cols()
            )));
        }
        let (n1, n2) = (m.rows() / p, m.cols() / q);
        let blocks = (0..n1 * n2)
            .map(|k| {
                let (bi, bj) = (k / n2, k % n2);
                DenseMatrix::from_fn(p, q, |r, c| m[(bi * p + r, bj * q + c)])
            })
            .collect();
        Ok(Self { n1, n2, p, q, blocks })
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn block(&self, i: usize, j: usize) -> &DenseMatrix {
        &self.blocks[i * self.n2 + j]
    }

    /// The `(n1·p) × (n2·q)` matrix.
    pub fn flatten(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n1 * self.p, self.n2 * self.q, |r, c| {
            self.block(r / self.p, c / self.q)[(r % self.p, c % self.q)]
        })
    }

    /// `n` and `d` for a square grid of square blocks.
    pub fn square_dims(&self) -> Result<(usize, usize)> {
        if self.n1 != self.n2 || self.p != self.q {
            return Err(Error::Shape(format!(
                "expected a square grid of square blocks, got {}x{} of {}x{}",
                self.n1, self.n2, self.p, self.q
            )));
        }
        Ok((self.n1, self.p))
    }

    /// Largest `|A_ij − A_ji^H|` over all entries.
    pub fn hermitian_residual(&self) -> f64 {
        self.flatten().hermitian_residual()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BlockMatrixJson = serde_json::from_str(text)?;
        Self::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BlockMatrixJson::from(self.clone())).expect("serializable")
    }
}

/// Parses `[[1, 0], [0, [2, -1]]]`.
pub fn matrix_from_json(text: &str) -> Result<DenseMatrix> {
    let rows: MatrixJson = serde_json::from_str(text)?;
    matrix_from_json_value(&rows)
}

/// Wire format `{"n": 2, "d": 2, "blocks": [[B11, B12], [B21, B22]]}`;
/// `n` and `d` are optional and checked when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub blocks: Vec<Vec<MatrixJson>>,
}

impl TryFrom<BlockMatrixJson> for BlockMatrix {
    type Error = Error;

    fn try_from(raw: BlockMatrixJson) -> Result<Self> {
        let blocks = raw
            .blocks
            .iter()
            .map(|row| row.iter().map(matrix_from_json_value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let m = BlockMatrix::new(blocks)?;
        if raw.n.is_some_and(|n| n != m.n1 || n != m.n2) {
            return Err(Error::Shape("\"n\" does not match the block grid".into()));
        }
        if raw.d.is_some_and(|d| d != m.p || d != m.q) {
            return Err(Error::Shape("\"d\" does not match the block shape".into()));
        }
        Ok(m)
    }
}

impl From<BlockMatrix> for BlockMatrixJson {
    fn from(m: BlockMatrix) -> Self {
        let square = m.n1 == m.n2 && m.p == m.q;
        Self {
            n: square.then_some(m.n1),
            d: square.then_some(m.p),
            blocks: (0..m.n1)
                .map(|i| (0..m.n2).map(|j| matrix_to_json_value(m.block(i, j))).collect())
                .collect(),
        }
    }
}

/// `A ⊗ B`: the block matrix `(a_ij · B)`.
pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (p, q) = (b.rows(), b.cols());
    DenseMatrix::from_fn(a.rows() * p, a.cols() * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// Blockwise Kronecker product `(A_ij ⊗ B_ij)`.
pub fn khatri_rao(a: &BlockMatrix, b: &BlockMatrix) -> Result<BlockMatrix> {
    if a.grid() != b.grid() {
        return Err(Error::Shape(format!(
            "block grids differ: {:?} and {:?}",
            a.grid(),
            b.grid()
        )));
    }
    let blocks = a
        .blocks
        .iter()
        .zip(&b.blocks)
        .map(|(x, y)| kronecker(x, y))
        .collect();
    Ok(BlockMatrix {
        n1: a.n1,
        n2: a.n2,
        p: a.p * b.p,
        q: a.q * b.q,
        blocks,
    })
}

fn require_hermitian(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<()> {
    let residual = m.hermitian_residual();
    let bound = tols.hermitian_tol * m.frobenius_norm().max(1.0);
    if residual > bound {
        return Err(Error::NotHermitian { residual, bound });
    }
    Ok(())
}

fn classify(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<(PsdClass, f64)> {
    let l = lambda_min(m, tols)?;
    Ok((PsdClass::from_lambda_min(l, psd_band(m, tols)), l))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiuReport {
    pub a: PsdClass,
    pub b: PsdClass,
    /// Every diagonal block `A_ii` is positive definite.
    pub a_diagonal_blocks_pd: bool,
    pub product: PsdClass,
    pub product_lambda_min: f64,
    /// `A, B ⪰ 0`, so `A∗B ⪰ 0` must follow.
    pub psd_premise: bool,
    /// `A ⪰ 0` with PD diagonal blocks and `B ≻ 0`, so `A∗B ≻ 0` must follow.
    pub pd_premise: bool,
    /// Both implications hold on this instance.
    pub consistent: bool,
}

/// Classifies `A`, `B` and `A∗B` and checks that positive (semi)definiteness
/// carries over to the Khatri-Rao product.
pub fn liu_psd_check(a: &BlockMatrix, b: &BlockMatrix, tols: &ToleranceProfile) -> Result<LiuReport> {
    let (fa, fb) = (a.flatten(), b.flatten());
    if a.n1 != a.n2 || a.p != a.q || b.p != b.q {
        return Err(Error::Shape("expected square grids of square blocks".into()));
    }
    require_hermitian(&fa, tols)?;
    require_hermitian(&fb, tols)?;
    let product = khatri_rao(a, b)?.flatten();
    let (ca, _) = classify(&fa, tols)?;
    let (cb, _) = classify(&fb, tols)?;
    let (cp, lp) = classify(&product, tols)?;
    let mut diag_pd = true;
    for i in 0..a.n1 {
        diag_pd &= classify(a.block(i, i), tols)?.0 == PsdClass::PositiveDefinite;
    }
    let psd_premise = ca.is_psd() && cb.is_psd();
    let pd_premise = ca.is_psd() && diag_pd && cb == PsdClass::PositiveDefinite;
    let consistent = (!psd_premise || cp.is_psd()) && (!pd_premise || cp == PsdClass::PositiveDefinite);
    Ok(LiuReport {
        a: ca,
        b: cb,
        a_diagonal_blocks_pd: diag_pd,
        product: cp,
        product_lambda_min: lp,
        psd_premise,
        pd_premise,
        consistent,
    })
}

fn check_pencil_shapes(y: &DenseMatrix, a: &BlockMatrix) -> Result<(usize, usize)> {
    let (n, d) = a.square_dims()?;
    if y.rows() != n || y.cols() != n {
        return Err(Error::Shape(format!(
            "Y is {}x{} but A has a {n}x{n} block grid",
            y.rows(),
            y.cols()
        )));
    }
    Ok((n, d))
}

/// `(1_{1×n} ⊗ I_d) · (Y∗A) · (1_{n×1} ⊗ I_d)`.
pub fn flanked_khatri_rao(y: &DenseMatrix, a: &BlockMatrix) -> Result<DenseMatrix> {
    let (n, d) = check_pencil_shapes(y, a)?;
    let ones_row = DenseMatrix::from_fn(1, n, |_, _| ONE);
    let ones_col = DenseMatrix::from_fn(n, 1, |_, _| ONE);
    let left = kronecker(&ones_row, &DenseMatrix::identity(d));
    let right = kronecker(&ones_col, &DenseMatrix::identity(d));
    let ya = khatri_rao(&BlockMatrix::from_scalars(y), a)?.flatten();
    left.matmul(&ya)?.matmul(&right)
}

/// `Σ_ij y_ij A_ij`.
pub fn assemble_coefficient(y: &DenseMatrix, a: &BlockMatrix) -> Result<DenseMatrix> {
    let (n, d) = check_pencil_shapes(y, a)?;
    let mut q = DenseMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            q = q.add(&a.block(i, j).scale(y[(i, j)]))?;
        }
    }
    #[cfg(debug_assertions)]
    {
        let flanked = flanked_khatri_rao(y, a)?;
        let scale = q.frobenius_norm().max(1.0);
        debug_assert!(
            q.max_abs_diff(&flanked) <= 1e-10 * scale,
            "flanked Khatri-Rao form disagrees with the double sum"
        );
    }
    Ok(q)
}

/// Largest `n` and `d` that [`expand_det_polynomial`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionCap {
    pub max_n: usize,
    pub max_d: usize,
}

impl Default for ExpansionCap {
    fn default() -> Self {
        Self { max_n: 4, max_d: 4 }
    }
}

impl ExpansionCap {
    pub fn allows(&self, n: usize, d: usize) -> bool {
        n <= self.max_n && d <= self.max_d
    }
}

/// Coefficient matrix of each flat variable: `A_ii`, or `A_ij + A_ji` for
/// `i < j`.
pub fn variable_coefficients(a: &BlockMatrix) -> Result<Vec<DenseMatrix>> {
    let (n, _) = a.square_dims()?;
    let idx = MatrixVarIndex::new(n);
    (0..idx.len())
        .map(|k| {
            let (i, j) = idx.pair(k);
            if i == j {
                Ok(a.block(i, i).clone())
            } else {
                a.block(i, j).add(a.block(j, i))
            }
        })
        .collect()
}

fn det_poly(m: &[Vec<MultiPoly>], rows: &[usize], cols: &mut Vec<usize>) -> MultiPoly {
    let r = rows[0];
    if rows.len() == 1 {
        return m[r][cols[0]].clone();
    }
    let mut acc = MultiPoly::zero(m[0][0].vars().to_vec());
    for pos in 0..cols.len() {
        let c = cols.remove(pos);
        let minor = det_poly(m, &rows[1..], cols);
        cols.insert(pos, c);
        if m[r][c].is_zero() || minor.is_zero() {
            continue;
        }
        let term = m[r][c].mul(&minor).expect("shared variables");
        acc = if pos % 2 == 0 { acc.add(&term) } else { acc.sub(&term) }.expect("shared variables");
    }
    acc
}

/// `det(Σ A_ij z_ij + B)` expanded by cofactors over the linear entries, in
/// the variables of `Cone::psd(n)`.
pub fn expand_det_polynomial(a: &BlockMatrix, b: &DenseMatrix, cap: ExpansionCap) -> Result<MultiPoly> {
    let (n, d) = a.square_dims()?;
    if b.rows() != d || b.cols() != d {
        return Err(Error::Shape(format!("B must be {d}x{d}")));
    }
    if !cap.allows(n, d) {
        return Err(Error::ExpansionCap {
            n,
            d,
            max_n: cap.max_n,
            max_d: cap.max_d,
        });
    }
    let idx = MatrixVarIndex::new(n);
    let vars = idx.names("z");
    let coeffs = variable_coefficients(a)?;
    let entries: Vec<Vec<MultiPoly>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let constant = (vec![0u32; idx.len()], b[(r, c)]);
                    let linear = coeffs.iter().enumerate().map(|(k, m)| {
                        let mut e = vec![0u32; idx.len()];
                        e[k] = 1;
                        (e, m[(r, c)])
                    });
                    MultiPoly::from_terms(vars.clone(), linear.chain([constant]))
                })
                .collect()
        })
        .collect();
    let rows: Vec<usize> = (0..d).collect();
    let mut cols = rows.clone();
    Ok(det_poly(&entries, &rows, &mut cols))
}

const ZERO_TEST_POINTS: usize = 8;

/// Whether `det(Σ A_ij z_ij + B)` vanishes identically: by expansion within
/// the cap, otherwise by evaluation at random complex symmetric points.
pub fn det_is_identically_zero(a: &BlockMatrix, b: &DenseMatrix, tols: &ToleranceProfile) -> Result<bool> {
    let (n, d) = a.square_dims()?;
    if ExpansionCap::default().allows(n, d) {
        return Ok(expand_det_polynomial(a, b, ExpansionCap::default())?.is_zero());
    }
    let coeffs = variable_coefficients(a)?;
    for k in 0..ZERO_TEST_POINTS {
        let mut rng = draw_rng(0x6465_7465_7276_616c, k);
        let mut m = b.clone();
        for c in &coeffs {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m = m.add(&c.scale(z))?;
        }
        if determinant(&m, tols)? != ZERO {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sufficient test: `A ⪰ 0` with Hermitian `B` makes
/// `det(Σ A_ij z_ij + B)` psd-stable or identically zero. Never claims
/// instability; an indefinite `A` yields [`Status::NotCertified`].
pub fn psd_blocks_certify(a: &BlockMatrix, b: &DenseMatrix, tols: &ToleranceProfile) -> Result<Verdict> {
    let (_, d) = a.square_dims()?;
    if b.rows() != d || b.cols() != d {
        return Err(Error::Shape(format!("B must be {d}x{d}")));
    }
    let flat = a.flatten();
    require_hermitian(&flat, tols)?;
    require_hermitian(b, tols)?;
    let cfg = SamplingConfig {
        samples: 0,
        tols: *tols,
        ..SamplingConfig::default()
    };
    let (class, lmin) = classify(&flat, tols)?;
    if class == PsdClass::Indefinite {
        return Ok(Verdict::bare(
            Status::NotCertified,
            Some(Certificate::IndefiniteBlocks { lambda_min: lmin }),
            &cfg,
        ));
    }
    let status = if det_is_identically_zero(a, b, tols)? {
        Status::IdenticallyZero
    } else {
        Status::CertifiedStable
    };
    Ok(Verdict::bare(
        status,
        Some(Certificate::PsdBlocks {
            lambda_min: lmin,
            b_hermitian_residual: b.hermitian_residual(),
        }),
        &cfg,
    ))
}

/// `ε_k = 2^{−k}` for `k = 1..=20`.
pub fn default_epsilon_schedule() -> Vec<f64> {
    (1..=20).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationStep {
    pub epsilon: f64,
    pub lambda_min: f64,
    pub diagonal_blocks_pd: bool,
    pub status: Status,
    /// Largest coefficient difference to the unperturbed expansion.
    pub coeff_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub base_class: PsdClass,
    pub steps: Vec<PerturbationStep>,
    /// Every `A + ε·I` is PD with PD diagonal blocks and certifies.
    pub all_certified: bool,
    /// `coeff_diff / ε` stays bounded, i.e. the coefficients converge
    /// linearly; `None` beyond the expansion cap.
    pub converges: Option<bool>,
}

impl PerturbationReport {
    pub fn passes(&self) -> bool {
        self.all_certified && self.converges != Some(false)
    }
}

/// Approximates a PSD block matrix by `A + ε·I` (identity added to each
/// diagonal block), certifies each approximation and tracks how the
/// expanded coefficients approach those of `A`.
pub fn perturbed_certify(
    a: &BlockMatrix,
    b: &DenseMatrix,
    schedule: &[f64],
    tols: &ToleranceProfile,
) -> Result<PerturbationReport> {
    let (n, d) = a.square_dims()?;
    let flat = a.flatten();
    require_hermitian(&flat, tols)?;
    let (base_class, lmin) = classify(&flat, tols)?;
    if base_class == PsdClass::Indefinite {
        return Err(Error::Indefinite { lambda_min: lmin });
    }
    let cap = ExpansionCap::default();
    let base = if cap.allows(n, d) {
        Some(expand_det_polynomial(a, b, cap)?)
    } else {
        None
    };
    let mut eps_list: Vec<f64> = Vec::with_capacity(schedule.len() + 1);
    if base_class == PsdClass::PositiveDefinite {
        eps_list.push(0.0);
    }
    eps_list.extend(schedule.iter().copied().filter(|e| *e > 0.0));
    let mut steps = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        let shift = DenseMatrix::identity(d).scale(Complex64::new(eps, 0.0));
        let ak = BlockMatrix::from_fn(n, d, |i, j| {
            if i == j {
                a.block(i, i).add(&shift).expect("same shape")
            } else {
                a.block(i, j).clone()
            }
        })?;
        let (class, l) = classify(&ak.flatten(), tols)?;
        let mut diag_pd = true;
        for i in 0..n {
            diag_pd &= classify(ak.block(i, i), tols)?.0 == PsdClass::PositiveDefinite;
        }
        let verdict = psd_blocks_certify(&ak, b, tols)?;
        let coeff_diff = match &base {
            Some(f) => Some(expand_det_polynomial(&ak, b, cap)?.max_coeff_diff(f)),
            None => None,
        };
        steps.push(PerturbationStep {
            epsilon: eps,
            lambda_min: l,
            diagonal_blocks_pd: diag_pd && class == PsdClass::PositiveDefinite,
            status: verdict.status,
            coeff_diff,
        });
    }
    let all_certified = steps
        .iter()
        .all(|s| s.diagonal_blocks_pd && s.status == Status::CertifiedStable);
    let converges = base.as_ref().map(|_| {
        let ratios: Vec<f64> = steps
            .iter()
            .filter(|s| s.epsilon > 0.0)
            .filter_map(|s| s.coeff_diff.map(|c| c / s.epsilon))
            .collect();
        match ratios.first() {
            None => true,
            // the difference is a polynomial in ε without constant term
            Some(&r0) => ratios.iter().all(|&r| r <= 2.0 * r0 + 1e-9),
        }
    });
    Ok(PerturbationReport {
        base_class,
        steps,
        all_certified,
        converges,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalReport {
    /// `perm[new] = old`: position `k·n + i` of the permuted matrix holds
    /// row `i·d + k` of `flatten(A)`.
    pub permutation: Vec<usize>,
    /// `A_k = ((A_ij)_kk)_{i,j}`.
    pub blocks: Vec<DenseMatrix>,
    pub block_classes: Vec<PsdClass>,
    /// `P^T A P` is exactly block diagonal with blocks `A_k`.
    pub permuted_block_diagonal: bool,
    pub whole: PsdClass,
    pub whole_lambda_min: f64,
    pub agree: bool,
    /// For `n = 2`: `a_k^11 ≥ 0`, `a_k^22 ≥ 0` and
    /// `a_k^11 a_k^22 − |a_k^12|² ≥ 0`, per `k`.
    pub scalar_conditions: Option<Vec<bool>>,
}

/// Permutation matrix `P` with `(P^T M P)[a, b] = M[perm[a], perm[b]]`.
pub fn permutation_matrix(perm: &[usize]) -> DenseMatrix {
    let m = perm.len();
    DenseMatrix::from_fn(m, m, |r, c| if perm[c] == r { ONE } else { ZERO })
}

/// For a block matrix with diagonal blocks, decides PSD-ness through the
/// `d` matrices `A_k` of `k`-th diagonal entries and cross-checks the
/// whole matrix. All classifications share the band of the whole matrix.
pub fn diagonal_block_criterion(a: &BlockMatrix, tols: &ToleranceProfile) -> Result<DiagonalReport> {
    let (n, d) = a.square_dims()?;
    for i in 0..n {
        for j in 0..n {
            let blk = a.block(i, j);
            for r in 0..d {
                for c in 0..d {
                    if r != c && blk[(r, c)].norm() > tols.coeff_zero_tol {
                        return Err(Error::NonDiagonalBlock(i, j));
                    }
                }
            }
        }
    }
    let flat = a.flatten();
    require_hermitian(&flat, tols)?;
    let band = psd_band(&flat, tols);
    let permutation: Vec<usize> = (0..n * d).map(|new| (new % n) * d + new / n).collect();
    let p = permutation_matrix(&permutation);
    let permuted = p.transpose().matmul(&flat)?.matmul(&p)?;
    let blocks: Vec<DenseMatrix> = (0..d)
        .map(|k| DenseMatrix::from_fn(n, n, |i, j| a.block(i, j)[(k, k)]))
        .collect();
    let expected = DenseMatrix::from_fn(n * d, n * d, |r, c| {
        if r / n == c / n {
            blocks[r / n][(r % n, c % n)]
        } else {
            ZERO
        }
    });
    let permuted_block_diagonal = permuted == expected;
    let block_classes = blocks
        .iter()
        .map(|b| Ok(PsdClass::from_lambda_min(lambda_min(b, tols)?, band)))
        .collect::<Result<Vec<_>>>()?;
    let whole_lambda_min = lambda_min(&flat, tols)?;
    let whole = PsdClass::from_lambda_min(whole_lambda_min, band);
    let agree = block_classes.iter().all(|c| c.is_psd()) == whole.is_psd();
    let scalar_conditions = (n == 2).then(|| {
        blocks
            .iter()
            .map(|b| {
                let (a11, a22, a12) = (b[(0, 0)].re, b[(1, 1)].re, b[(0, 1)]);
                a11 >= -band && a22 >= -band && a11 * a22 - a12.norm_sqr() >= -band * band.max(1.0)
            })
            .collect()
    });
    Ok(DiagonalReport {
        permutation,
        blocks,
        block_classes,
        permuted_block_diagonal,
        whole,
        whole_lambda_min,
        agree,
        scalar_conditions,
    })
}
