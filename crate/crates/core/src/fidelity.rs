//! Exact dynamical fidelity `F(ε,t) = F[ρ_S(0,t), ρ_S(ε,t)]` and the
//! extraction of its ε-expansion coefficients.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{kraus_epsilon_derivatives, slice_rows};
use crate::codes::{dfs_membership, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{inner, reduced_from_pure, ComplexMatrix, DensityMatrix, HermitianEigen, StateVector};
use crate::operators::{assemble_joint_hamiltonian, ModelSpec};
use crate::quadrature::integrate_doubling;

/// Eigenvalues of the reference state at or below this are outside its support.
pub const SUPPORT_TOL: f64 = 1e-13;
/// ε used by [`extract_f1`].
pub const F1_STEP: f64 = 1e-4;

pub const DEFAULT_EPS_GRID: [f64; 3] = [2.5e-4, 5e-4, 1e-3];
pub const DEFAULT_T_GRID: [f64; 3] = [0.02, 0.04, 0.08];
/// Relative fit residual above which a χ fit is flagged.
pub const FIT_RESIDUAL_THRESHOLD: f64 = 1e-3;
/// Largest `1 − F` on the grid for which the leading-order model is trusted.
pub const MAX_GRID_INFIDELITY: f64 = 1e-4;
/// Relative change allowed when the boson cutoff is raised by two.
pub const CUTOFF_REL_TOL: f64 = 1e-6;

/// `[tr √(√ρ σ √ρ)]²`, evaluated on the support of `ρ`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between {}- and {}-dimensional states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let eig = rho.matrix().eigh()?;
    let support: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > SUPPORT_TOL).collect();
    // √ρ restricted to its support: columns √λ_k v_k
    let half = ComplexMatrix::from_fn(rho.dim(), support.len(), |r, c| {
        eig.vectors[(r, support[c])] * eig.values[support[c]].sqrt()
    });
    let reduced = half.adjoint().matmul(sigma.matrix()).matmul(&half).hermitian_part();
    let mu = reduced.eigh()?;
    if let Some(&low) = mu.values.first() {
        if low < -crate::linalg::PSD_CLAMP_TOL {
            return Err(Error::NotPsd(low));
        }
    }
    let tr: f64 = mu.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}

/// `2(1 − √F)`.
pub fn bures_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * (1.0 - uhlmann_fidelity(rho, sigma)?.max(0.0).sqrt()))
}

/// `(F, 1 − F)` between the register marginals of two normalized joint
/// vectors (each a `dS × dB` array `X`, `Y`, system index slowest).
///
/// By Uhlmann's theorem `√F = max_W |⟨X, Y W⟩| = ‖X†Y‖₁` over bath unitaries
/// `W`; the maximizer is the polar factor of `X†Y`. The infidelity is then
/// `D(2 − D)` with `D = ‖X − Y W‖²/2 = 1 − √F`, computed from the vector
/// difference so that it keeps full relative precision as `F → 1`. Only a
/// `dB × dB` singular value decomposition is needed, and no square roots of
/// small eigenvalues are taken.
pub fn purified_fidelity(reference: &[C64], other: &[C64], dim_b: usize) -> Result<(f64, f64)> {
    if reference.len() != other.len() || dim_b == 0 || !reference.len().is_multiple_of(dim_b) {
        return Err(Error::Dimension(format!(
            "joint vectors of length {} and {} with bath dimension {dim_b}",
            reference.len(),
            other.len()
        )));
    }
    let mut k = nalgebra::DMatrix::<C64>::zeros(dim_b, dim_b);
    for (x, y) in reference.chunks(dim_b).zip(other.chunks(dim_b)) {
        for i in 0..dim_b {
            for j in 0..dim_b {
                k[(i, j)] += x[i].conj() * y[j];
            }
        }
    }
    let svd = k.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("singular value decomposition failed".into())),
    };
    // K = U Σ V†, W = V U†
    let w = v_t.adjoint() * u.adjoint();
    let mut dist = 0.0;
    for (x, y) in reference.chunks(dim_b).zip(other.chunks(dim_b)) {
        for i in 0..dim_b {
            let mut yw = C64::new(0.0, 0.0);
            for j in 0..dim_b {
                yw += y[j] * w[(j, i)];
            }
            dist += (x[i] - yw).norm_sqr();
        }
    }
    let d = (0.5 * dist).min(1.0);
    Ok(((1.0 - d) * (1.0 - d), d * (2.0 - d)))
}

/// Joint propagator `e^{-itH(ε)}` in diagonal form.
pub struct JointEvolution {
    eig: HermitianEigen,
    dim_s: usize,
    dim_b: usize,
    phi0: StateVector,
}

impl JointEvolution {
    pub fn new(m: &ModelSpec, epsilon: f64) -> Result<Self> {
        let h = assemble_joint_hamiltonian(m, epsilon)?;
        Ok(Self {
            eig: h.eigh()?,
            dim_s: m.system_dim(),
            dim_b: m.bath_dim(),
            phi0: m.bath_initial().clone(),
        })
    }

    /// `e^{-itH}(|ψ⟩⊗|φ₀⟩)`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<Vec<C64>> {
        if psi.dim() != self.dim_s {
            return Err(Error::Dimension(format!(
                "initial state of dimension {} for a {}-dimensional register",
                psi.dim(),
                self.dim_s
            )));
        }
        let joint = psi.kron(&self.phi0);
        Ok(self.eig.apply_fn_to_vec(|l| C64::new(0.0, -l * t).exp(), joint.amplitudes()))
    }

    pub fn bath_dim(&self) -> usize {
        self.dim_b
    }

    pub fn reduced_state(&self, psi: &StateVector, t: f64) -> Result<DensityMatrix> {
        let out = self.evolve(psi, t)?;
        let rho = reduced_from_pure(&out, self.dim_s, self.dim_b)?;
        Ok(DensityMatrix::from_matrix_unchecked(rho.hermitian_part()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelitySample {
    pub epsilon: f64,
    pub t: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    /// `1 − F`, computed without cancellation when the reference is pure.
    pub infidelity: f64,
}

pub fn dynamical_fidelity(m: &ModelSpec, psi0: &StateVector, epsilon: f64, t: f64) -> Result<FidelitySample> {
    Ok(fidelity_grid(m, psi0, &[epsilon], &[t])?.remove(0))
}

/// `F(ε,t)` for every pair of the grids, ε-major.
pub fn fidelity_grid(
    m: &ModelSpec,
    psi0: &StateVector,
    eps: &[f64],
    ts: &[f64],
) -> Result<Vec<FidelitySample>> {
    m.check_capacity()?;
    let reference = JointEvolution::new(m, 0.0)?;
    let refs: Vec<Vec<C64>> = ts.par_iter().map(|&t| reference.evolve(psi0, t)).collect::<Result<_>>()?;
    let rows: Vec<Vec<FidelitySample>> = eps
        .par_iter()
        .map(|&e| {
            let evo = JointEvolution::new(m, e)?;
            ts.iter()
                .zip(&refs)
                .map(|(&t, r)| {
                    let (fidelity, infidelity) = purified_fidelity(r, &evo.evolve(psi0, t)?, evo.bath_dim())?;
                    Ok(FidelitySample { epsilon: e, t, fidelity, infidelity })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `dF/dε` at ε = 0 from central differences at `h` and `h/2` combined by one
/// Richardson step.
pub fn extract_f1(m: &ModelSpec, psi0: &StateVector, t: f64) -> Result<f64> {
    let h = F1_STEP;
    let f = fidelity_grid(m, psi0, &[h, -h, h / 2.0, -h / 2.0], &[t])?;
    let d_h = (f[1].infidelity - f[0].infidelity) / (2.0 * h);
    let d_half = (f[3].infidelity - f[2].infidelity) / h;
    Ok((4.0 * d_half - d_h) / 3.0)
}

fn require_dfs(m: &ModelSpec, psi0: &StateVector, t: f64) -> Result<()> {
    let report = dfs_membership(std::slice::from_ref(psi0), &m.unperturbed(), &[t], MEMBERSHIP_TOL)?;
    if !report.passed {
        return Err(Error::Precondition(format!(
            "initial state must lie in a decoherence-free subspace of the unperturbed model \
             (A_j|psi> = g_j exp(-itH_S)|psi> violated by {:.3e})",
            report.max_residual.max(report.max_norm_deviation)
        )));
    }
    Ok(())
}

/// `⟨ψ|O†O|ψ⟩ − |⟨ψ|O|ψ⟩|²` for a dense operator.
fn dense_variance(op: &ComplexMatrix, psi: &StateVector) -> f64 {
    let w = op.mul_vec(psi.amplitudes());
    inner(&w, &w).re - inner(psi.amplitudes(), &w).norm_sqr()
}

/// `F⁽²⁾(t) = −Σ_i σ²_ψ[U†A_i⁽¹⁾]` with `U = e^{-itH_S}`.
pub fn f2_from_kraus(m: &ModelSpec, psi0: &StateVector, t: f64) -> Result<f64> {
    require_dfs(m, psi0, t)?;
    if m.v().is_zero() {
        return Ok(0.0);
    }
    let exp = kraus_epsilon_derivatives(m, t, 1)?;
    let hs = m.h_s().to_dense_with_limit(usize::BITS as usize)?;
    let u_dag = crate::linalg::expm_hermitian(&hs, C64::new(0.0, t))?;
    let f2 = -exp.order1.iter().map(|a| dense_variance(&u_dag.matmul(a), psi0)).sum::<f64>();
    debug_assert!(f2 <= 1e-12);
    Ok(f2)
}

/// Interaction-picture first-order Kraus operators
/// `A_i^{I(1)}(t) = −i ∫₀ᵗ ⟨φ_i|e^{it'H₀} V e^{-it'H₀}|φ₀⟩ dt'`, with node
/// doubling until the entries change by at most `quad_tol`.
pub fn interaction_kraus_first_order(m: &ModelSpec, t: f64, quad_tol: f64) -> Result<Vec<ComplexMatrix>> {
    let dim_s = m.system_dim();
    let dim_b = m.bath_dim();
    let d = m.joint_dim();
    let eig = m.h0_dense()?.eigh()?;
    let w = &eig.vectors;
    let phi0 = m.bath_initial().amplitudes();
    let right = ComplexMatrix::from_fn(d, dim_s, |r, s| {
        if r / dim_b == s {
            phi0[r % dim_b]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let y = w.adjoint().matmul(&right);
    let v_tilde = w.adjoint().matmul(&m.v_dense()?).matmul(w);
    let lambda = &eig.values;
    let integrate = |rule: &[(f64, f64)]| -> Result<ComplexMatrix> {
        let mut acc = ComplexMatrix::zeros(d, dim_s);
        for &(tau, weight) in rule {
            let phase: Vec<C64> = lambda.iter().map(|&l| C64::new(0.0, l * tau).exp()).collect();
            let z = ComplexMatrix::from_fn(d, dim_s, |r, c| phase[r].conj() * y[(r, c)]);
            let z = v_tilde.matmul(&z);
            acc += &ComplexMatrix::from_fn(d, dim_s, |r, c| phase[r] * z[(r, c)] * weight);
        }
        Ok(acc)
    };
    let (integral, _) = integrate_doubling(0.0, t, quad_tol, integrate, |a, b| a.max_abs_diff(b))?;
    let full = w.matmul(&integral).scale(C64::new(0.0, -1.0));
    Ok(slice_rows(&full, dim_s, &m.bath_basis()))
}

/// `F⁽²⁾` from the interaction-picture Kraus operators.
pub fn f2_interaction(m: &ModelSpec, psi0: &StateVector, t: f64, quad_tol: f64) -> Result<f64> {
    require_dfs(m, psi0, t)?;
    if m.v().is_zero() {
        return Ok(0.0);
    }
    let ops = interaction_kraus_first_order(m, t, quad_tol)?;
    Ok(-ops.iter().map(|a| dense_variance(a, psi0)).sum::<f64>())
}

/// `F⁽²⁾ = −∫∫ Σ_αβ B_αβ(t',t'') S_αβ(t',t'')` for models without
/// system–bath coupling.
pub fn f2_correlation_integral(m: &ModelSpec, psi0: &StateVector, t: f64, quad_tol: f64) -> Result<f64> {
    if !m.h_sb().is_zero() {
        return Err(Error::Precondition(
            "correlation-integral form needs H_SB = 0; use f2_interaction instead".into(),
        ));
    }
    if psi0.dim() != m.system_dim() {
        return Err(Error::Dimension("initial state does not match the register".into()));
    }
    let terms = m.v().terms();
    if terms.is_empty() {
        return Ok(0.0);
    }
    let hs = m.h_s().to_dense_with_limit(usize::BITS as usize)?.eigh()?;
    let hb = m.h_b().eigh()?;
    let psi = psi0.amplitudes();
    let phi0 = m.bath_initial().amplitudes();
    let k = terms.len();
    let integrate = |rule: &[(f64, f64)]| -> Result<f64> {
        let cols = rule.len() * k;
        let mut s_cols = Vec::with_capacity(cols);
        let mut b_cols = Vec::with_capacity(cols);
        let mut weights = Vec::with_capacity(cols);
        for &(tau, w) in rule {
            let fwd = |l: f64| C64::new(0.0, -l * tau).exp();
            let back = |l: f64| C64::new(0.0, l * tau).exp();
            let psi_t = hs.apply_fn_to_vec(fwd, psi);
            let phi_t = hb.apply_fn_to_vec(fwd, phi0);
            for term in terms {
                s_cols.push(hs.apply_fn_to_vec(back, &term.system.apply(&psi_t)?));
                b_cols.push(hb.apply_fn_to_vec(back, &term.bath.mul_vec(&phi_t)));
                weights.push(w);
            }
        }
        let gram = |v: &[Vec<C64>]| {
            let mat = ComplexMatrix::from_fn(v[0].len(), v.len(), |r, c| v[c][r]);
            mat.adjoint().matmul(&mat)
        };
        let gs = gram(&s_cols);
        let gb = gram(&b_cols);
        let means: Vec<C64> = s_cols.iter().map(|s| inner(psi, s)).collect();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..cols {
            for b in 0..cols {
                acc += weights[a] * weights[b] * gb[(a, b)] * (gs[(a, b)] - means[a].conj() * means[b]);
            }
        }
        Ok(-acc.re)
    };
    Ok(integrate_doubling(0.0, t, quad_tol, integrate, |a, b| (a - b).abs())?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesFit {
    /// Largest `|F(ε) − F(−ε)| / 2ε` on the grid.
    pub f1_slope: f64,
    pub chi_fit: f64,
    /// Coefficient `c` of the model `(1−F)/(ε²t²) = χ + c t²`.
    pub t2_coefficient: f64,
    /// Largest deviation from the fitted model relative to `χ`.
    pub fit_residual: f64,
    pub flagged: bool,
    pub max_infidelity: f64,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub samples: Vec<FidelitySample>,
}

/// Brute-force χ from the fidelity on an (ε, t) grid. Each ε is mirrored to
/// −ε so that odd orders cancel.
pub fn fit_chi(m: &ModelSpec, psi0: &StateVector, eps_grid: &[f64], t_grid: &[f64]) -> Result<SeriesFit> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidData("epsilon grid must be nonempty and positive".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidData("time grid must be positive".into()));
    }
    let mut distinct = t_grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidData("time grid needs at least two distinct values".into()));
    }
    let signed: Vec<f64> = eps_grid.iter().flat_map(|&e| [e, -e]).collect();
    let samples = fidelity_grid(m, psi0, &signed, t_grid)?;
    let nt = t_grid.len();
    let mut points = Vec::new();
    let mut f1_slope = 0.0f64;
    let mut max_infidelity = 0.0f64;
    for (k, &e) in eps_grid.iter().enumerate() {
        for (j, &t) in t_grid.iter().enumerate() {
            let plus = samples[2 * k * nt + j].infidelity;
            let minus = samples[(2 * k + 1) * nt + j].infidelity;
            f1_slope = f1_slope.max((plus - minus).abs() / (2.0 * e));
            max_infidelity = max_infidelity.max(plus).max(minus);
            points.push((t * t, (plus + minus) / (2.0 * e * e * t * t)));
        }
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let chi_fit = my - slope * mx;
    let fit_residual = points
        .iter()
        .map(|&(x, y)| (y - chi_fit - slope * x).abs())
        .fold(0.0, f64::max)
        / chi_fit.abs().max(f64::MIN_POSITIVE);
    Ok(SeriesFit {
        f1_slope,
        chi_fit,
        t2_coefficient: slope,
        fit_residual,
        flagged: fit_residual > FIT_RESIDUAL_THRESHOLD || max_infidelity > MAX_GRID_INFIDELITY,
        max_infidelity,
        eps_grid: eps_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        samples,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CutoffCheck {
    pub cutoff: usize,
    pub value: f64,
    pub refined_cutoff: usize,
    pub refined_value: f64,
    pub rel_change: f64,
    pub passed: bool,
}

/// Recomputes a cutoff-dependent quantity at `cutoff + 2`.
pub fn cutoff_convergence(cutoff: usize, quantity: impl Fn(usize) -> Result<f64>) -> Result<CutoffCheck> {
    let value = quantity(cutoff)?;
    let refined_value = quantity(cutoff + 2)?;
    let rel_change = (refined_value - value).abs() / value.abs().max(f64::MIN_POSITIVE);
    Ok(CutoffCheck {
        cutoff,
        value,
        refined_cutoff: cutoff + 2,
        refined_value,
        rel_change,
        passed: rel_change <= CUTOFF_REL_TOL,
    })
}
