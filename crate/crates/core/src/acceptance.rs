//! The built-in acceptance suite: ten seeded checks covering strength,
//! the compatibility measure, symmetry reconstruction and determinism.
//!
//! Outcomes contain only values computed from the seed, so two runs with the
//! same [`SuiteConfig`] serialize to identical bytes. Wall-clock timings are
//! kept in a separate list.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{ComplexMatrix, DensityOperator, Operator, PureState};
use crate::measure::{example_measure, is_compatible, measure_symmetric, MeasureConfig};
use crate::preserver::{
    adversarial_suite, apply_symmetry, rank_via_compatibility, transition_prob, verify_theorem_with,
    DEFAULT_SYMMETRY_TOL,
};
use crate::sample::{
    derive_seed, rng_from_seed, sample_density, sample_density_in, sample_effect, sample_isometry, sample_pure,
    sample_pure_in, sample_symmetry,
};
use crate::strength::{strength, strength_oracle, two_state_formula};

pub const DEFAULT_DIMS: [usize; 5] = [2, 3, 4, 5, 6];

/// Tolerances checked by the suite.
pub const ORACLE_TOL: f64 = 1e-7;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const MEASURE_BELOW_TOL: f64 = 2e-3;
pub const MEASURE_ABOVE_TOL: f64 = 1e-9;
pub const DISJOINT_VALUE_TOL: f64 = 1e-6;
pub const PHASE_OVERLAP_TOL: f64 = 1e-9;
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Restarts used where a criterion only needs a feasible certificate.
const LIGHT_RESTARTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Dimensions for the strength sweep and the invariance suite.
    pub dims: Vec<usize>,
    pub quick: bool,
    pub execution: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, dims: DEFAULT_DIMS.to_vec(), quick: false, execution: Execution::default() }
    }
}

struct Sizes {
    strength_pairs: usize,
    closed_form: usize,
    pure_pairs: usize,
    support_pairs: usize,
    symmetric_pairs: usize,
    symmetries: usize,
    adversarial_mixed: usize,
    rank_states: usize,
    invariance: usize,
}

impl Sizes {
    fn of(quick: bool) -> Self {
        if quick {
            Sizes {
                strength_pairs: 100,
                closed_form: 50,
                pure_pairs: 10,
                support_pairs: 10,
                symmetric_pairs: 4,
                symmetries: 20,
                adversarial_mixed: 4,
                rank_states: 40,
                invariance: 40,
            }
        } else {
            Sizes {
                strength_pairs: 500,
                closed_form: 200,
                pure_pairs: 50,
                support_pairs: 50,
                symmetric_pairs: 20,
                symmetries: 100,
                adversarial_mixed: 8,
                rank_states: 200,
                invariance: 200,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest deviation seen, in the units of the criterion's tolerance.
    pub worst: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionTiming {
    pub id: usize,
    pub elapsed_ms: f64,
    pub budget_ms: Option<f64>,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub outcomes: Vec<CriterionOutcome>,
    pub timings: Vec<CriterionTiming>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed) && self.timings.iter().all(|t| t.within_budget)
    }

    /// Seed-determined part of the report.
    pub fn payload(&self) -> String {
        serde_json::to_string(&self.outcomes).expect("outcomes serialize")
    }

    /// One line per criterion.
    pub fn lines(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .zip(&self.timings)
            .map(|(o, t)| {
                let status = if o.passed && t.within_budget { "PASS" } else { "FAIL" };
                let budget = if t.within_budget { "" } else { " (over time budget)" };
                format!(
                    "[{status}] criterion {:>2}: {} - {}/{} ok, worst {:.3e}, {:.0} ms{budget}; {}",
                    o.id,
                    o.name,
                    o.cases - o.failures,
                    o.cases,
                    o.worst,
                    t.elapsed_ms,
                    o.note
                )
            })
            .collect()
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
    errors: usize,
    first_error: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, deviation: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if deviation.is_finite() {
            self.worst = self.worst.max(deviation);
        }
    }

    fn record_error(&mut self, e: Error) {
        self.cases += 1;
        self.failures += 1;
        self.errors += 1;
        self.first_error.get_or_insert_with(|| e.to_string());
    }

    fn outcome(self, id: usize, name: &str, note: String) -> CriterionOutcome {
        let note = match &self.first_error {
            Some(e) => format!("{note}; {} errored, first: {e}", self.errors),
            None => note,
        };
        CriterionOutcome {
            id,
            name: name.to_string(),
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            note,
        }
    }
}

fn collect(results: Vec<Result<(bool, f64)>>) -> Tally {
    let mut t = Tally::default();
    for r in results {
        match r {
            Ok((ok, dev)) => t.record(ok, dev),
            Err(e) => t.record_error(e),
        }
    }
    t
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidConfig("empty dimension list".into()));
    }
    for &d in dims {
        if !(2..=6).contains(&d) {
            return Err(Error::UnsupportedDimension { dim: d, min: 2, max: 6 });
        }
    }
    Ok(())
}

/// Runs every criterion.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    check_dims(&cfg.dims)?;
    let sizes = Sizes::of(cfg.quick);
    let mut outcomes = Vec::with_capacity(10);
    let mut timings = Vec::with_capacity(10);
    let budgets: [Option<f64>; 10] = [Some(30_000.0), None, Some(300_000.0), None, None, None, None, None, None, None];

    for id in 1..=10 {
        let start = Instant::now();
        let outcome = match id {
            1 => strength_oracle_agreement(cfg, &sizes),
            2 => closed_form(cfg, &sizes),
            3 => pure_consistency(cfg, &sizes),
            4 => support_consistency(cfg, &sizes),
            5 => symmetry_of_measure(cfg, &sizes),
            6 => round_trip(cfg, &sizes),
            7 => adversarial_rejection(cfg, &sizes),
            8 => rank_detection(cfg, &sizes),
            9 => invariance(cfg, &sizes),
            _ => determinism(cfg),
        };
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        let budget_ms = budgets[id - 1];
        outcomes.push(outcome);
        timings.push(CriterionTiming {
            id,
            elapsed_ms,
            budget_ms,
            within_budget: budget_ms.is_none_or(|b| elapsed_ms < b),
        });
    }
    Ok(SuiteReport { outcomes, timings })
}

fn case_seed(cfg: &SuiteConfig, criterion: u64, i: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, criterion), i as u64)
}

/// Criterion 1: closed-form strength against the bisection oracle.
fn strength_oracle_agreement(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.strength_pairs, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 1, i));
        let d = cfg.dims[i % cfg.dims.len()];
        let rank = 1 + (i / cfg.dims.len()) % d;
        let t = sample_effect(&mut rng, d, rank)?;
        // alternate generic rays with rays inside the support
        let phi = if i % 2 == 0 { sample_pure(&mut rng, d) } else { sample_pure_in(&mut rng, &t.spectrum().support_vectors()) };
        let s = strength(&t, &phi)?.value;
        let o = strength_oracle(&t, &phi, 1e-12)?;
        let dev = (s - o).abs();
        Ok((dev <= ORACLE_TOL, dev))
    });
    collect(results).outcome(1, "strength oracle agreement", format!("dims {:?}, ranks 1..d", cfg.dims))
}

/// Criterion 2: two-state closed form.
fn closed_form(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.closed_form, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 2, i));
        let d = 2 + i % 5;
        let lambda = 0.02 + 0.46 * rand::Rng::random::<f64>(&mut rng);
        let mu = 1.0 - lambda;
        let pq = sample_isometry(&mut rng, d, 2);
        let a = DensityOperator::from_spectrum(&[mu, lambda], &ComplexMatrix::from_columns(&[pq.column(1).into_owned(), pq.column(0).into_owned()]))?;
        let p = PureState::normalized(pq.column(0).into_owned())?;
        let q = PureState::normalized(pq.column(1).into_owned())?;
        let r = match i % 10 {
            0 => p.clone(),
            1 => q.clone(),
            _ => sample_pure_in(&mut rng, &pq),
        };
        let overlap = transition_prob(&p, &r)?;
        let formula = two_state_formula(lambda, mu, overlap)?;
        let s = strength(&a, &r)?.value;
        let mut dev = (formula - s).abs();
        let mut ok = dev <= CLOSED_FORM_TOL;
        if i % 10 <= 1 {
            let endpoint = if i % 10 == 0 { lambda } else { mu };
            let exact = two_state_formula(lambda, mu, if i % 10 == 0 { 1.0 } else { 0.0 })?;
            ok &= exact.to_bits() == endpoint.to_bits();
            dev = dev.max((exact - endpoint).abs());
        }
        Ok((ok, dev))
    });
    collect(results).outcome(2, "two-state closed form", "every tenth case at tr PR = 1 and at tr PR = 0".into())
}

/// Criterion 3: squared measure against strength for pure second argument.
fn pure_consistency(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.pure_pairs, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 3, i));
        let d = 2 + i % 2;
        let rank = 1 + (i / 2) % d;
        let a = sample_density(&mut rng, d, rank)?;
        let phi = sample_pure_in(&mut rng, &a.spectrum().support_vectors());
        let s = strength(&a, &phi)?.value;
        let mcfg = MeasureConfig { execution: Execution::Sequential, ..MeasureConfig::with_seed(case_seed(cfg, 103, i)) };
        let r = example_measure(&a, &phi.to_density(), &mcfg)?;
        let v2 = r.value * r.value;
        let ok = v2 >= s - MEASURE_BELOW_TOL && v2 <= s + MEASURE_ABOVE_TOL;
        Ok((ok, (v2 - s).abs()))
    });
    collect(results).outcome(3, "measure squared matches strength", "dims 2-3, default restarts".into())
}

/// Criterion 4: compatibility detection and the zero set of the measure.
fn support_consistency(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let n = sizes.support_pairs;
    let results = map_indexed(2 * n, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 4, i));
        let d = 2 + i % 3;
        let mcfg = MeasureConfig {
            restarts: LIGHT_RESTARTS,
            execution: Execution::Sequential,
            ..MeasureConfig::with_seed(case_seed(cfg, 104, i))
        };
        let u = crate::sample::sample_unitary(&mut rng, d);
        if i < n {
            // disjoint supports: split an orthonormal basis
            let ka = 1 + i % (d - 1);
            let kb = 1 + (i / 3) % (d - ka);
            let a = sample_density_in(&mut rng, &u.columns(0, ka).into_owned(), ka)?;
            let b = sample_density_in(&mut rng, &u.columns(ka, kb).into_owned(), kb)?;
            let compatible = is_compatible(&a, &b)?;
            let r = example_measure(&a, &b, &mcfg)?;
            Ok((!compatible && r.value <= DISJOINT_VALUE_TOL, r.value))
        } else {
            // a shared direction plus independent extra directions on each side
            let shared = u.columns(0, 1).into_owned();
            let extra = (d - 1).min(1 + i % 2);
            let a_basis = ComplexMatrix::from_columns(&[shared.column(0).into_owned(), u.column(1).into_owned()]);
            let b_cols: Vec<_> = std::iter::once(shared.column(0).into_owned())
                .chain((0..extra).map(|j| u.column(d - 1 - j).into_owned()))
                .collect();
            let b_basis = ComplexMatrix::from_columns(&b_cols);
            let a = sample_density_in(&mut rng, &a_basis, 2)?;
            let b = sample_density_in(&mut rng, &b_basis, b_basis.ncols())?;
            let compatible = is_compatible(&a, &b)?;
            let r = example_measure(&a, &b, &mcfg)?;
            Ok((compatible && r.value > 0.0 && r.residual <= mcfg.feas_tol, r.residual))
        }
    });
    collect(results).outcome(4, "zero set of the measure", format!("{n} disjoint and {n} intersecting pairs"))
}

/// Criterion 5: exact symmetry of the symmetrized measure.
fn symmetry_of_measure(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.symmetric_pairs, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 5, i));
        let d = 2 + i % 2;
        let a = sample_density(&mut rng, d, 1 + i % d)?;
        let b = sample_density(&mut rng, d, 1 + (i / 2) % d)?;
        let mcfg = MeasureConfig {
            restarts: LIGHT_RESTARTS,
            execution: Execution::Sequential,
            ..MeasureConfig::with_seed(case_seed(cfg, 105, i))
        };
        let x = measure_symmetric(&a, &b, &mcfg)?.value;
        let y = measure_symmetric(&b, &a, &mcfg)?.value;
        Ok((x.to_bits() == y.to_bits(), (x - y).abs()))
    });
    collect(results).outcome(5, "measure symmetry", "bitwise comparison of both argument orders".into())
}

/// Criterion 6: reconstruction from symmetry-induced transforms.
fn round_trip(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.symmetries, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 6, i));
        let d = 2 + i % 7;
        let anti = i % 2 == 1;
        let s = sample_symmetry(&mut rng, d, anti);
        let out = verify_theorem_with(&s, d, 4, case_seed(cfg, 106, i), DEFAULT_SYMMETRY_TOL, Execution::Sequential)?;
        let rec = out.symmetry.ok_or(Error::OutsideDomain)?;
        let overlap = rec.phase_overlap(&s)?;
        let ok = out.verdict
            && out.max_error <= DEFAULT_SYMMETRY_TOL
            && rec.is_antiunitary() == anti
            && overlap >= 1.0 - PHASE_OVERLAP_TOL;
        Ok((ok, out.max_error.max(1.0 - overlap)))
    });
    let half = sizes.symmetries / 2;
    collect(results).outcome(6, "symmetry round trip", format!("{half} unitary, {half} antiunitary, dims 2-8"))
}

/// Criterion 7: every adversarial transform is rejected.
fn adversarial_rejection(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let cases = adversarial_suite(derive_seed(cfg.seed, 7));
    let results = map_indexed(cases.len(), cfg.execution, |i| -> Result<(bool, f64)> {
        let case = &cases[i];
        match verify_theorem_with(
            case.transform.as_ref(),
            case.dim,
            sizes.adversarial_mixed,
            case_seed(cfg, 107, i),
            DEFAULT_SYMMETRY_TOL,
            Execution::Sequential,
        ) {
            Ok(out) => Ok((!out.verdict, 0.0)),
            Err(Error::NotASymmetry { .. }) => Ok((true, 0.0)),
            Err(e) => Err(e),
        }
    });
    let n = cases.len();
    collect(results).outcome(7, "adversarial rejection", format!("{n} cases"))
}

/// Criterion 8: rank from compatibility equals spectral rank.
fn rank_detection(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.rank_states, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 8, i));
        let d = 2 + i % 4;
        let rank = 1 + (i / 4) % d;
        let a = sample_density(&mut rng, d, rank)?;
        let detected = rank_via_compatibility(&a, 0, case_seed(cfg, 108, i));
        let expected = a.numerical_rank();
        Ok((detected == expected, (detected as f64 - expected as f64).abs()))
    });
    collect(results).outcome(8, "rank via compatibility", "dims 2-5, all ranks".into())
}

/// Criterion 9: invariance of strength, transition probability and
/// compatibility under symmetries.
fn invariance(cfg: &SuiteConfig, sizes: &Sizes) -> CriterionOutcome {
    let results = map_indexed(sizes.invariance, cfg.execution, |i| -> Result<(bool, f64)> {
        let mut rng = rng_from_seed(case_seed(cfg, 9, i));
        let d = cfg.dims[i % cfg.dims.len()];
        let s = sample_symmetry(&mut rng, d, i % 2 == 1);
        let a = sample_density(&mut rng, d, 1 + (i / 2) % d)?;
        let b = if i % 3 == 0 {
            // shares no support with a when a is rank deficient
            let kernel = a.spectrum().kernel_vectors();
            if kernel.ncols() > 0 { sample_density_in(&mut rng, &kernel, 1)? } else { sample_density(&mut rng, d, 1)? }
        } else {
            sample_density(&mut rng, d, 1 + i % d)?
        };
        let phi = if i % 2 == 0 { sample_pure_in(&mut rng, &a.spectrum().support_vectors()) } else { sample_pure(&mut rng, d) };
        let p = sample_pure(&mut rng, d);
        let q = sample_pure(&mut rng, d);

        let sa = apply_symmetry(&s, &a)?;
        let sb = apply_symmetry(&s, &b)?;
        let strength_dev = (strength(&sa, &s.apply_vector(&phi)?)?.value - strength(&a, &phi)?.value).abs();
        let tp_dev = (transition_prob(&s.apply_vector(&p)?, &s.apply_vector(&q)?)? - transition_prob(&p, &q)?).abs();
        let compat_same = is_compatible(&sa, &sb)? == is_compatible(&a, &b)?;
        let dev = strength_dev.max(tp_dev);
        Ok((dev <= INVARIANCE_TOL && compat_same, dev))
    });
    collect(results).outcome(9, "symmetry invariance", format!("dims {:?}, unitary and antiunitary", cfg.dims))
}

/// Criterion 10: a reduced suite run twice, once in each execution mode when
/// both are available, must produce identical payloads.
fn determinism(cfg: &SuiteConfig) -> CriterionOutcome {
    let reduced = |execution: Execution| {
        let c = SuiteConfig { execution, quick: true, ..cfg.clone() };
        let sizes = Sizes { strength_pairs: 40, closed_form: 20, pure_pairs: 4, symmetric_pairs: 2, symmetries: 6, rank_states: 12, invariance: 12, ..Sizes::of(true) };
        let outcomes = vec![
            strength_oracle_agreement(&c, &sizes),
            closed_form(&c, &sizes),
            pure_consistency(&c, &sizes),
            symmetry_of_measure(&c, &sizes),
            round_trip(&c, &sizes),
            rank_detection(&c, &sizes),
            invariance(&c, &sizes),
        ];
        serde_json::to_string(&outcomes).expect("outcomes serialize")
    };
    let first = reduced(cfg.execution);
    let other = if Execution::is_parallel_available() {
        match cfg.execution {
            Execution::Parallel => Execution::Sequential,
            Execution::Sequential => Execution::Parallel,
        }
    } else {
        cfg.execution
    };
    let second = reduced(other);
    let mut t = Tally::default();
    t.record(first == second, 0.0);
    t.outcome(10, "determinism", format!("{} payload bytes compared", first.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dims() {
        let cfg = SuiteConfig { dims: vec![1, 2], ..SuiteConfig::default() };
        assert!(run_suite(&cfg).is_err());
        let cfg = SuiteConfig { dims: vec![], ..SuiteConfig::default() };
        assert!(run_suite(&cfg).is_err());
    }
}
