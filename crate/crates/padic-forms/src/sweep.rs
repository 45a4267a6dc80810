//! Systematic grid certification: enumerate coefficient instances, classify
//! each, and back every verdict with exact evidence.
//!
//! For each `(shape, delta1, delta2, eps1, eps2)` on the grid the pipeline
//! runs:
//!
//! * `CounterexampleExists` — build and certify the witness triple; when
//!   the determinant is a unit, additionally certify that the all-uniform
//!   triple is independent;
//! * `IdempotentForced` — certify the canonical idempotent triple, then run
//!   the counterexample search and require it to come back empty;
//! * `DegenerateForced` — run the counterexample search (violations would
//!   be independent triples that are not all degenerate);
//! * `Singular` — counted, nothing to certify.
//!
//! Instances are processed in parallel; all failures are collected as data
//! rather than aborting the run.

use crate::classifier::{classify, Verdict};
use crate::finite::{CyclicGroup, FiniteDistribution};
use crate::forms::{NormalizedForms, Shape};
use crate::padic::PAdicScalar;
use crate::parallel;
use crate::verifier::{
    independence_exact, search_counterexample, warm_candidate_pool, FiniteForms,
};
use crate::witness::{build_witness_with, forced_instance_examples, model_exponent};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Grid and evidence parameters for one sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub prime: u64,
    /// Coefficient valuations range over `0..=max_valuation`.
    pub max_valuation: u32,
    /// Unit parts range over `1..unit_bound`, coprime to `p` (exclusive
    /// bound; defaults to `p^2`).
    pub unit_bound: u64,
    /// Random-candidate budget for the forced-verdict search.
    pub budget: usize,
    /// Fixed model exponent; default is `max coefficient valuation + 2`,
    /// chosen per instance.
    pub exponent_override: Option<u32>,
    /// Also certify the canonical triples (all-uniform at unit determinant,
    /// Haar-layered for deep forced instances).
    pub check_canonical: bool,
    /// Emit one record per instance (large grids produce large reports).
    pub include_records: bool,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(prime: u64, max_valuation: u32) -> Self {
        SweepConfig {
            prime,
            max_valuation,
            unit_bound: prime * prime,
            budget: 8,
            exponent_override: None,
            check_canonical: true,
            include_records: false,
            seed: 0,
        }
    }
}

/// Verdict tally over a sweep.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub idempotent_forced: usize,
    pub degenerate_forced: usize,
    pub counterexample_exists: usize,
    pub singular: usize,
}

/// One failed certification or search, with enough context to replay it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepFailure {
    pub shape: Shape,
    pub coefficients: [String; 4],
    /// Pipeline stage that failed: `classify`, `witness`, `canonical`, or
    /// `search`.
    pub stage: String,
    pub message: String,
}

/// One classified instance (emitted only with `include_records`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub shape: Shape,
    pub coefficients: [String; 4],
    pub verdict: Verdict,
    pub q: Option<i64>,
    pub k: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub prime: u64,
    pub max_valuation: u32,
    pub unit_bound: u64,
    pub budget: usize,
    pub instances: usize,
    pub counts: VerdictCounts,
    /// Counterexample verdicts whose witness bundle certified.
    pub witnesses_certified: usize,
    /// Canonical idempotent triples certified independent.
    pub canonical_triples_verified: usize,
    /// Forced verdicts whose counterexample search came back empty.
    pub searches_clean: usize,
    pub failures: Vec<SweepFailure>,
    pub records: Vec<InstanceRecord>,
}

/// All grid instances: both shapes, coefficients `p^a * u` with
/// `a <= max_valuation` and unit `u < unit_bound`.  Canonical Shape2
/// instances require `eps1` to be a non-unit, so its valuation starts at 1
/// there (shape-2 normal forms always have that property).
pub fn enumerate_instances(cfg: &SweepConfig) -> Vec<(Shape, [PAdicScalar; 4])> {
    let p = cfg.prime;
    let units: Vec<u64> = (1..cfg.unit_bound).filter(|u| u % p != 0).collect();
    let coeffs_from = |min_val: u32| -> Vec<PAdicScalar> {
        let mut out = Vec::new();
        for a in min_val..=cfg.max_valuation {
            for &u in &units {
                out.push(PAdicScalar::from_parts(
                    false,
                    a as i64,
                    BigUint::from(u),
                    p,
                ));
            }
        }
        out
    };
    let any = coeffs_from(0);
    let nonunit = coeffs_from(1);
    let mut instances = Vec::new();
    for shape in [Shape::Shape1, Shape::Shape2] {
        let eps1_range: &[PAdicScalar] = match shape {
            Shape::Shape1 => &any,
            Shape::Shape2 => &nonunit,
        };
        for d1 in &any {
            for d2 in &any {
                for e1 in eps1_range {
                    for e2 in &any {
                        instances.push((shape, [d1.clone(), d2.clone(), e1.clone(), e2.clone()]));
                    }
                }
            }
        }
    }
    instances
}

struct InstanceOutcome {
    verdict: Option<Verdict>,
    witness_ok: bool,
    canonical_ok: usize,
    search_ok: bool,
    failures: Vec<SweepFailure>,
    record: Option<InstanceRecord>,
}

/// Runs the full grid, in parallel across instances.
pub fn run_sweep(cfg: &SweepConfig) -> SweepReport {
    // Pre-build the shared candidate pools so parallel workers don't race.
    for n in 2..=(cfg.exponent_override.unwrap_or(cfg.max_valuation + 2)) {
        warm_candidate_pool(CyclicGroup::new(cfg.prime, n), cfg.budget);
    }
    let instances = enumerate_instances(cfg);
    let outcomes = parallel::map_collect(&instances, |(shape, coeffs)| {
        process_instance(cfg, *shape, coeffs)
    });
    let mut report = SweepReport {
        prime: cfg.prime,
        max_valuation: cfg.max_valuation,
        unit_bound: cfg.unit_bound,
        budget: cfg.budget,
        instances: instances.len(),
        counts: VerdictCounts::default(),
        witnesses_certified: 0,
        canonical_triples_verified: 0,
        searches_clean: 0,
        failures: Vec::new(),
        records: Vec::new(),
    };
    for outcome in outcomes {
        match outcome.verdict {
            Some(Verdict::IdempotentForced) => report.counts.idempotent_forced += 1,
            Some(Verdict::DegenerateForced) => report.counts.degenerate_forced += 1,
            Some(Verdict::CounterexampleExists) => report.counts.counterexample_exists += 1,
            Some(Verdict::Singular) => report.counts.singular += 1,
            None => {}
        }
        report.witnesses_certified += outcome.witness_ok as usize;
        report.canonical_triples_verified += outcome.canonical_ok;
        report.searches_clean += outcome.search_ok as usize;
        report.failures.extend(outcome.failures);
        if let Some(r) = outcome.record {
            report.records.push(r);
        }
    }
    report
}

fn coefficient_strings(coeffs: &[PAdicScalar; 4]) -> [String; 4] {
    [
        coeffs[0].to_string(),
        coeffs[1].to_string(),
        coeffs[2].to_string(),
        coeffs[3].to_string(),
    ]
}

fn process_instance(cfg: &SweepConfig, shape: Shape, coeffs: &[PAdicScalar; 4]) -> InstanceOutcome {
    let labels = coefficient_strings(coeffs);
    let mut out = InstanceOutcome {
        verdict: None,
        witness_ok: false,
        canonical_ok: 0,
        search_ok: false,
        failures: Vec::new(),
        record: None,
    };
    let fail = |failures: &mut Vec<SweepFailure>, stage: &str, message: String| {
        failures.push(SweepFailure {
            shape,
            coefficients: labels.clone(),
            stage: stage.to_string(),
            message,
        });
    };
    let nf = match NormalizedForms::from_parts(
        shape,
        coeffs[0].clone(),
        coeffs[1].clone(),
        coeffs[2].clone(),
        coeffs[3].clone(),
    ) {
        Ok(nf) => nf,
        Err(e) => {
            fail(&mut out.failures, "classify", e.to_string());
            return out;
        }
    };
    let cls = match classify(&nf) {
        Ok(c) => c,
        Err(e) => {
            fail(&mut out.failures, "classify", e.to_string());
            return out;
        }
    };
    out.verdict = Some(cls.verdict);
    if cfg.include_records {
        out.record = Some(InstanceRecord {
            shape,
            coefficients: labels.clone(),
            verdict: cls.verdict,
            q: cls.q,
            k: cls.k,
        });
    }
    if cls.verdict == Verdict::Singular {
        return out;
    }
    let n = cfg.exponent_override.unwrap_or_else(|| model_exponent(&nf));
    // A per-instance seed, derived deterministically from the coefficients.
    let seed = labels.iter().fold(cfg.seed, |acc, s| {
        s.bytes()
            .fold(acc, |a, b| a.wrapping_mul(31).wrapping_add(b as u64))
    });
    match cls.verdict {
        Verdict::CounterexampleExists => {
            if cfg.check_canonical && cls.q == Some(0) {
                check_uniform_triple(&nf, n, &mut out, &labels);
            }
            match build_witness_with(&nf, Some(n), None) {
                Ok(bundle) if bundle.report.independent => out.witness_ok = true,
                Ok(bundle) => fail(
                    &mut out.failures,
                    "witness",
                    format!("uncertified bundle: {:?}", bundle.report),
                ),
                Err(e) => fail(&mut out.failures, "witness", e.to_string()),
            }
        }
        Verdict::IdempotentForced => {
            if cfg.check_canonical {
                match forced_instance_examples(&nf) {
                    Ok(_) => out.canonical_ok += 1,
                    Err(e) => fail(&mut out.failures, "canonical", e.to_string()),
                }
            }
            run_search(&nf, n, cls.verdict, cfg, seed, &mut out, &labels)
        }
        Verdict::DegenerateForced => run_search(&nf, n, cls.verdict, cfg, seed, &mut out, &labels),
        Verdict::Singular => unreachable!("handled above"),
    }
    out
}

/// At unit determinant the reduced matrix is invertible and the all-uniform
/// triple must be independent.
fn check_uniform_triple(
    nf: &NormalizedForms,
    n: u32,
    out: &mut InstanceOutcome,
    labels: &[String; 4],
) {
    let step = || -> Result<bool, String> {
        let forms = FiniteForms::from_normalized(nf, n).map_err(|e| e.to_string())?;
        let uniform = FiniteDistribution::uniform(forms.group());
        let report =
            independence_exact(&forms, [&uniform, &uniform, &uniform]).map_err(|e| e.to_string())?;
        Ok(report.independent)
    };
    match step() {
        Ok(true) => out.canonical_ok += 1,
        Ok(false) => out.failures.push(SweepFailure {
            shape: nf.shape(),
            coefficients: labels.clone(),
            stage: "canonical".to_string(),
            message: "all-uniform triple not independent at unit determinant".to_string(),
        }),
        Err(message) => out.failures.push(SweepFailure {
            shape: nf.shape(),
            coefficients: labels.clone(),
            stage: "canonical".to_string(),
            message,
        }),
    }
}

/// Forced verdicts must survive the counterexample search: any violation
/// found is recorded as a failure.
#[allow(clippy::too_many_arguments)]
fn run_search(
    nf: &NormalizedForms,
    n: u32,
    verdict: Verdict,
    cfg: &SweepConfig,
    seed: u64,
    out: &mut InstanceOutcome,
    labels: &[String; 4],
) {
    let step = || -> Result<bool, String> {
        let forms = FiniteForms::from_normalized(nf, n).map_err(|e| e.to_string())?;
        let outcome =
            search_counterexample(&forms, verdict, cfg.budget, seed).map_err(|e| e.to_string())?;
        Ok(outcome.violation.is_some())
    };
    match step() {
        Ok(false) => out.search_ok = true,
        Ok(true) => out.failures.push(SweepFailure {
            shape: nf.shape(),
            coefficients: labels.clone(),
            stage: "search".to_string(),
            message: "search found a violation of a forced verdict".to_string(),
        }),
        Err(message) => out.failures.push(SweepFailure {
            shape: nf.shape(),
            coefficients: labels.clone(),
            stage: "search".to_string(),
            message,
        }),
    }
}
