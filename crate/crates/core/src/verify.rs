//! Invariant suites over seeded random models and the built-in examples.
//!
//! Each suite expands into independent checks. Checks run in parallel on the
//! current rayon pool and are reported in a fixed order, so a given seed
//! always yields the same report.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    apply_channel, completeness_residual, extract_kraus, extract_kraus_in_basis, kraus_epsilon_derivatives,
    rho1_identity_residual,
};
use crate::codes::{dfs_membership, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::examples::{Example, ExampleConfig, ExampleModel, SINGLET_TRIPLET_N4_CHI};
use crate::fidelity::{
    extract_f1, f2_correlation_integral, f2_from_kraus, f2_interaction, fidelity_grid, uhlmann_fidelity,
    JointEvolution,
};
use crate::linalg::{DensityMatrix, StateVector};
use crate::lindblad::lindblad_f1;
use crate::propagate::{reduced_purity, JointHamiltonian};
use crate::quadrature::DEFAULT_QUAD_TOL;
use crate::random::{random_basis, random_lindblad, random_model, random_state, rng_for, RandomModel};
use crate::susceptibility::chi_analytic;

pub const SUITES: [&str; 11] = [
    "kraus-norm",
    "completeness",
    "bath-basis",
    "f1",
    "lindblad-f1",
    "rho1",
    "dfs",
    "picture",
    "small-t",
    "bures",
    "chi",
];

pub const SAMPLE_TIMES: [f64; 3] = [0.1, 0.5, 1.0];
pub const ORDER_TOL: f64 = 1e-8;
pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const F1_TOL: f64 = 1e-6;
pub const RHO1_TOL: f64 = 1e-7;
pub const PURITY_TOL: f64 = 1e-9;
pub const PICTURE_TOL: f64 = 1e-7;
pub const SMALL_T: f64 = 1e-3;
pub const SMALL_T_TOL: f64 = 1e-4;
pub const BURES_EPS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
pub const BURES_TOL: f64 = 1e-2;
pub const CHI_REL_TOL: f64 = 1e-10;
/// Smallest reduced-state impurity accepted as evidence that a random
/// initial state is not decoherence-free.
pub const MIN_IMPURITY: f64 = 1e-6;

/// Offset of the random streams used inside checks (extra states, bases).
const AUX_STREAM: u64 = 1 << 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bound {
    /// Passes when `value ≤ tol`.
    #[serde(rename = "le")]
    Upper,
    /// Passes when `value ≥ tol`.
    #[serde(rename = "ge")]
    Lower,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn from_result(suite: &'static str, name: String, bound: Bound, tol: f64, value: Result<f64>) -> Self {
        match value {
            Ok(value) => {
                let passed = match bound {
                    Bound::Upper => value <= tol,
                    Bound::Lower => value >= tol,
                };
                Self { suite, name, value, bound, tol, passed, error: None }
            }
            Err(e) => Self { suite, name, value: f64::NAN, bound, tol, passed: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub random_models: usize,
    pub lindblad_models: usize,
    /// Suites to run; all when empty.
    pub only: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: crate::random::DEFAULT_SEED, random_models: 20, lindblad_models: 10, only: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<&'static str>,
    pub total: usize,
    pub failed: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

type Task = Box<dyn Fn() -> Vec<Check> + Send + Sync>;

fn one(suite: &'static str, name: String, bound: Bound, tol: f64, f: impl Fn() -> Result<f64> + Send + Sync + 'static) -> Task {
    Box::new(move || vec![Check::from_result(suite, name.clone(), bound, tol, f())])
}

fn many(f: impl Fn() -> Vec<Check> + Send + Sync + 'static) -> Task {
    Box::new(f)
}

fn models(cfg: &VerifyConfig) -> Result<Vec<std::sync::Arc<RandomModel>>> {
    (0..cfg.random_models as u64)
        .map(|i| random_model(cfg.seed, i).map(std::sync::Arc::new))
        .collect()
}

fn model_label(r: &RandomModel) -> String {
    format!("model {:02} (n={}, dB={})", r.index, r.spec.n_qubits(), r.spec.bath_dim())
}

fn kraus_norm(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for r in models(cfg)? {
        for t in SAMPLE_TIMES {
            let r = r.clone();
            tasks.push(many(move || {
                let label = format!("{} t={t}", model_label(&r));
                let exp = kraus_epsilon_derivatives(&r.spec, t, 2);
                let (first, second) = match exp {
                    Ok(e) => (Ok(e.first_order_residual()), Ok(e.second_order_residual().unwrap_or(f64::NAN))),
                    Err(e) => (Err(Error::Numerical(e.to_string())), Err(e)),
                };
                vec![
                    Check::from_result("kraus-norm", format!("{label} first order"), Bound::Upper, ORDER_TOL, first),
                    Check::from_result("kraus-norm", format!("{label} second order"), Bound::Upper, ORDER_TOL, second),
                ]
            }));
        }
    }
    Ok(tasks)
}

fn completeness(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for r in models(cfg)? {
        for eps in [0.0, 0.3] {
            let r = r.clone();
            tasks.push(one(
                "completeness",
                format!("{} eps={eps} t=0.5 sum A^dag A", model_label(&r)),
                Bound::Upper,
                COMPLETENESS_TOL,
                move || Ok(completeness_residual(&extract_kraus(&r.spec, eps, 0.5)?)),
            ));
        }
        let seed = cfg.seed;
        tasks.push(one(
            "completeness",
            format!("{} channel output positivity", model_label(&r)),
            Bound::Upper,
            COMPLETENESS_TOL,
            move || {
                let mut rng = rng_for(seed, AUX_STREAM + r.index);
                let rho = DensityMatrix::from_pure(&random_state(&mut rng, r.spec.system_dim()));
                let out = apply_channel(&extract_kraus(&r.spec, 0.3, 0.5)?, &rho)?;
                let min = out.matrix().eigh()?.values.into_iter().fold(f64::INFINITY, f64::min);
                Ok((-min).max(0.0))
            },
        ));
    }
    Ok(tasks)
}

fn bath_basis(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let seed = cfg.seed;
    Ok(models(cfg)?
        .into_iter()
        .map(|r| {
            one(
                "bath-basis",
                format!("{} fidelity from two Kraus sets", model_label(&r)),
                Bound::Upper,
                1e-10,
                move || {
                    let (eps, t) = (0.05, 0.5);
                    let mut rng = rng_for(seed, AUX_STREAM + r.index);
                    let other = random_basis(&mut rng, r.spec.bath_dim(), None);
                    let rho = DensityMatrix::from_pure(&r.psi0);
                    let fid = |basis: &crate::linalg::ComplexMatrix| -> Result<f64> {
                        let a = apply_channel(&extract_kraus_in_basis(&r.spec, 0.0, t, basis)?, &rho)?;
                        let b = apply_channel(&extract_kraus_in_basis(&r.spec, eps, t, basis)?, &rho)?;
                        uhlmann_fidelity(&a, &b)
                    };
                    Ok((fid(&r.spec.bath_basis())? - fid(&other)?).abs())
                },
            )
        })
        .collect())
}

fn f1(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for r in models(cfg)? {
        let rr = r.clone();
        tasks.push(one(
            "f1",
            format!("{} initial state decoheres (1 - purity at t=1)", model_label(&r)),
            Bound::Lower,
            MIN_IMPURITY,
            move || {
                let evo = JointEvolution::new(&rr.spec, 0.0)?;
                Ok(1.0 - reduced_purity(&evo.evolve(&rr.psi0, 1.0)?, evo.bath_dim()))
            },
        ));
        for t in SAMPLE_TIMES {
            let r = r.clone();
            tasks.push(one("f1", format!("{} t={t} |F1|", model_label(&r)), Bound::Upper, F1_TOL, move || {
                Ok(extract_f1(&r.spec, &r.psi0, t)?.abs())
            }));
        }
    }
    Ok(tasks)
}

fn lindblad(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for i in 0..cfg.lindblad_models as u64 {
        let r = std::sync::Arc::new(random_lindblad(cfg.seed, i)?);
        for t in SAMPLE_TIMES {
            let r = r.clone();
            let name = format!(
                "lindblad {:02} (N={}, jumps={}, rank={}) t={t} |F1|",
                r.index,
                r.model.dim(),
                r.model.jumps().len(),
                r.rank
            );
            tasks.push(one("lindblad-f1", name, Bound::Upper, F1_TOL, move || {
                Ok(lindblad_f1(&r.model, &r.rho0, t)?.abs())
            }));
        }
    }
    Ok(tasks)
}

fn rho1(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for r in models(cfg)? {
        for t in SAMPLE_TIMES {
            let r = r.clone();
            tasks.push(one("rho1", format!("{} t={t}", model_label(&r)), Bound::Upper, RHO1_TOL, move || {
                rho1_identity_residual(&r.spec, &DensityMatrix::from_pure(&r.psi0), t)
            }));
        }
    }
    Ok(tasks)
}

/// Times at which the decoherence-free property is sampled.
pub const DFS_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const DFS_CUTOFF: usize = 3;

fn dfs() -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for ex in Example::ALL {
        for blocks in 1..=3 {
            let n = blocks * ex.code().n_physical;
            let m = std::sync::Arc::new(ExampleModel::new(ex, ExampleConfig::new(n).with_cutoff(DFS_CUTOFF))?);
            let label = format!("{} n={n} cutoff {DFS_CUTOFF}", ex.name());
            let mm = m.clone();
            tasks.push(one("dfs", format!("{label} 1 - purity"), Bound::Upper, PURITY_TOL, move || {
                let spec = mm.unperturbed()?;
                let h = JointHamiltonian::new(&spec, 0.0)?;
                let joint = mm.state.vector.kron(spec.bath_initial());
                let mut worst = 0.0f64;
                for t in DFS_TIMES {
                    let out = h.evolve(joint.amplitudes(), t)?;
                    worst = worst.max((1.0 - reduced_purity(&out, spec.bath_dim())).abs());
                }
                Ok(worst)
            }));
            tasks.push(many(move || {
                let report = m
                    .unperturbed()
                    .and_then(|s| dfs_membership(std::slice::from_ref(&m.state.vector), &s, &DFS_TIMES, MEMBERSHIP_TOL));
                let (res, norm) = match report {
                    Ok(r) => (Ok(r.max_residual), Ok(r.max_norm_deviation)),
                    Err(e) => (Err(Error::Numerical(e.to_string())), Err(e)),
                };
                vec![
                    Check::from_result("dfs", format!("{label} membership residual"), Bound::Upper, MEMBERSHIP_TOL, res),
                    Check::from_result("dfs", format!("{label} sum |g_j|^2 - 1"), Bound::Upper, PURITY_TOL, norm),
                ]
            }));
        }
    }
    tasks.push(one(
        "dfs",
        "span{|00>,|11>} under collective dephasing fails membership".into(),
        Bound::Lower,
        MEMBERSHIP_TOL,
        || {
            let m = ExampleModel::new(Example::DephasingPair, ExampleConfig::new(2).with_cutoff(DFS_CUTOFF))?;
            let basis = [StateVector::basis(4, 0)?, StateVector::basis(4, 3)?];
            Ok(dfs_membership(&basis, &m.unperturbed()?, &DFS_TIMES, MEMBERSHIP_TOL)?.max_residual)
        },
    ));
    Ok(tasks)
}

/// Examples used by the picture, small-t and Bures suites.
const SMALL_EXAMPLES: [(Example, usize); 3] =
    [(Example::DephasingPair, 2), (Example::DephasingPair, 4), (Example::SingletTriplet, 4)];

fn picture() -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for (ex, n) in SMALL_EXAMPLES {
        let m = std::sync::Arc::new(ExampleModel::new(ex, ExampleConfig::new(n))?);
        for t in [0.1, 0.5] {
            let mm = m.clone();
            tasks.push(one(
                "picture",
                format!("{} n={n} t={t} Schrodinger vs interaction", ex.name()),
                Bound::Upper,
                PICTURE_TOL,
                move || {
                    let spec = mm.spec()?;
                    let psi = &mm.state.vector;
                    Ok((f2_from_kraus(&spec, psi, t)? - f2_interaction(&spec, psi, t, DEFAULT_QUAD_TOL)?).abs())
                },
            ));
            let mm = m.clone();
            tasks.push(one(
                "picture",
                format!("{} n={n} t={t} H_SB=0 correlation integral vs interaction", ex.name()),
                Bound::Upper,
                PICTURE_TOL,
                move || {
                    let spec = mm.without_coupling()?;
                    let psi = &mm.state.vector;
                    Ok((f2_correlation_integral(&spec, psi, t, DEFAULT_QUAD_TOL)?
                        - f2_interaction(&spec, psi, t, DEFAULT_QUAD_TOL)?)
                    .abs())
                },
            ));
        }
    }
    Ok(tasks)
}

fn smallest_examples() -> Result<Vec<std::sync::Arc<ExampleModel>>> {
    [(Example::DephasingPair, 2), (Example::SingletTriplet, 4)]
        .into_iter()
        .map(|(ex, n)| ExampleModel::new(ex, ExampleConfig::new(n)).map(std::sync::Arc::new))
        .collect()
}

fn small_t() -> Result<Vec<Task>> {
    Ok(smallest_examples()?
        .into_iter()
        .map(|m| {
            one(
                "small-t",
                format!("{} n={} -F2/t^2 vs chi at t={SMALL_T}", m.example.name(), m.config.n),
                Bound::Upper,
                SMALL_T_TOL,
                move || {
                    let spec = m.spec()?;
                    let chi = chi_analytic(&m.state.vector, spec.v(), spec.bath_initial())?;
                    let f2 = f2_from_kraus(&spec, &m.state.vector, SMALL_T)?;
                    Ok(((-f2 / (SMALL_T * SMALL_T)) - chi).abs() / chi)
                },
            )
        })
        .collect())
}

/// `2(1 − √F) / (−F⁽²⁾ε²)` for each ε of [`BURES_EPS`] at time `t`.
pub fn bures_ratios(m: &ExampleModel, t: f64) -> Result<Vec<f64>> {
    let spec = m.spec()?;
    let psi = &m.state.vector;
    let f2 = f2_from_kraus(&spec, psi, t)?;
    if f2 >= 0.0 {
        return Err(Error::Numerical(format!("second-order coefficient {f2} is not negative")));
    }
    Ok(fidelity_grid(&spec, psi, &BURES_EPS, &[t])?
        .iter()
        .map(|s| 2.0 * s.infidelity / (1.0 + s.fidelity.sqrt()) / (-f2 * s.epsilon * s.epsilon))
        .collect())
}

fn bures() -> Result<Vec<Task>> {
    Ok(smallest_examples()?
        .into_iter()
        .map(|m| {
            let name = format!("{} n={} t=0.5 Bures ratio at eps={}", m.example.name(), m.config.n, BURES_EPS[3]);
            one("bures", name, Bound::Upper, BURES_TOL, move || Ok((bures_ratios(&m, 0.5)?[3] - 1.0).abs()))
        })
        .collect())
}

fn chi_checks(cfg: &VerifyConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    let mut cases: Vec<(Example, usize, f64)> =
        [2, 4, 6, 8, 10, 12].map(|n| (Example::DephasingPair, n, (n * n) as f64)).to_vec();
    cases.extend([8, 12, 16].map(|n| (Example::SingletTriplet, n, 4.0 * n as f64 / 3.0)));
    cases.push((Example::SingletTriplet, 4, SINGLET_TRIPLET_N4_CHI));
    for (ex, n, want) in cases {
        tasks.push(one("chi", format!("{} n={n} closed form", ex.name()), Bound::Upper, CHI_REL_TOL, move || {
            let m = ExampleModel::new(ex, ExampleConfig::new(n))?;
            let spec = m.spec()?;
            Ok((chi_analytic(&m.state.vector, spec.v(), spec.bath_initial())? - want).abs() / want)
        }));
    }
    for r in models(cfg)? {
        tasks.push(one("chi", format!("{} chi nonnegative", model_label(&r)), Bound::Lower, -1e-10, move || {
            chi_analytic(&r.psi0, r.spec.v(), r.spec.bath_initial())
        }));
    }
    Ok(tasks)
}

fn suite_tasks(name: &str, cfg: &VerifyConfig) -> Result<Vec<Task>> {
    match name {
        "kraus-norm" => kraus_norm(cfg),
        "completeness" => completeness(cfg),
        "bath-basis" => bath_basis(cfg),
        "f1" => f1(cfg),
        "lindblad-f1" => lindblad(cfg),
        "rho1" => rho1(cfg),
        "dfs" => dfs(),
        "picture" => picture(),
        "small-t" => small_t(),
        "bures" => bures(),
        "chi" => chi_checks(cfg),
        other => Err(Error::Config(format!("unknown suite '{other}' (known: {})", SUITES.join(", ")))),
    }
}

/// Resolves the suite filter, rejecting unknown names before any work.
pub fn select_suites(only: &[String]) -> Result<Vec<&'static str>> {
    if only.is_empty() {
        return Ok(SUITES.to_vec());
    }
    for name in only {
        if !SUITES.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown suite '{name}' (known: {})", SUITES.join(", "))));
        }
    }
    Ok(SUITES.iter().copied().filter(|s| only.iter().any(|o| o == s)).collect())
}

pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = select_suites(&cfg.only)?;
    let mut tasks = Vec::new();
    for s in &suites {
        tasks.extend(suite_tasks(s, cfg)?);
    }
    let checks: Vec<Check> = tasks.par_iter().flat_map_iter(|t| t()).collect();
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport { seed: cfg.seed, suites, total: checks.len(), failed, passed: failed == 0, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_rejects_unknown_and_keeps_order() {
        assert!(select_suites(&["nope".into()]).is_err());
        let s = select_suites(&["rho1".into(), "f1".into()]).unwrap();
        assert_eq!(s, vec!["f1", "rho1"]);
        assert_eq!(select_suites(&[]).unwrap().len(), SUITES.len());
    }

    #[test]
    fn small_suites_pass_and_are_deterministic() {
        let cfg = VerifyConfig { random_models: 4, lindblad_models: 3, only: vec!["kraus-norm".into(), "lindblad-f1".into()], ..Default::default() };
        let a = run(&cfg).unwrap();
        assert!(a.passed, "{:#?}", a.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(a.total, 4 * 3 * 2 + 3 * 3);
        let b = run(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.checks.iter().all(|c| c.suite == "kraus-norm" || c.suite == "lindblad-f1"));
    }

    #[test]
    fn errors_become_failed_checks() {
        let c = Check::from_result("x", "y".into(), Bound::Upper, 1.0, Err(Error::Config("bad".into())));
        assert!(!c.passed && c.value.is_nan() && c.error.is_some());
        let c = Check::from_result("x", "y".into(), Bound::Lower, 1.0, Ok(2.0));
        assert!(c.passed);
    }
}
