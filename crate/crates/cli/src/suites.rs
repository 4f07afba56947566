//! Suite runners: each builds the needed objects from the scenario config,
//! runs the corresponding core machinery and packs a RunReport.

use serde::Serialize;
use serde_json::{json, Value};

use oddform_core::formideal::validate_off;
use oddform_core::levels::{
    conjugation_invariance_check, k_exponent, lower_level, minimality_check, sandwich_check,
    upper_level_of_group, ExponentMode,
};
use oddform_core::proofcheck::{run_proofcheck, ProofcheckMode};
use oddform_core::relations::{run_relations, RelationsMode};
use oddform_core::report::{off_value, Finding, SuiteOutcome};
use oddform_core::{Error, HermitianCtx};

use crate::config::ScenarioConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Cases {
    pub pass: u64,
    pub fail: u64,
    pub skip: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub version: String,
    pub seed: u64,
    pub mode: String,
    pub cases: Cases,
    pub findings: Vec<Finding>,
    pub data: Value,
}

impl RunReport {
    fn from_outcome(suite: &str, seed: u64, mode: &str, out: SuiteOutcome, data: Value) -> Self {
        let fail = out.failures() as u64;
        RunReport {
            suite: suite.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            mode: mode.into(),
            cases: Cases {
                pass: out.cases - fail - out.skipped,
                fail,
                skip: out.skipped,
            },
            findings: out.findings,
            data,
        }
    }

    pub fn failures(&self) -> u64 {
        self.cases.fail
    }

    /// Canonical JSON text: serde_json object maps are ordered, so the
    /// output is byte-identical across runs and worker counts.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serialises");
        let mut s = serde_json::to_string_pretty(&v).expect("report prints");
        s.push('\n');
        s
    }
}

pub enum SweepMode {
    Exhaustive,
    Sampled(u64),
}

pub fn run_validate(cfg: &ScenarioConfig, seed: u64) -> RunReport {
    let mut out = SuiteOutcome::default();
    let mut data = json!({});
    'run: {
        let ctx = match cfg.context() {
            Ok(c) => {
                out.record(None);
                c
            }
            Err(e) => {
                out.record(Some(Finding::fail("validate.context", json!({"error": e.to_string()}))));
                break 'run;
            }
        };
        let delta = match cfg.delta(&ctx) {
            Ok(d) => {
                out.record(None);
                d
            }
            Err(e) => {
                out.record(Some(Finding::fail("validate.delta", json!({"error": e.to_string()}))));
                break 'run;
            }
        };
        match cfg.off(&ctx, &delta) {
            Ok(p) => match validate_off(&ctx, &delta, &p) {
                Ok(()) => {
                    out.record(None);
                    data = json!({
                        "ring_size": ctx.size(),
                        "n": ctx.n(),
                        "delta_size": delta.len(),
                        "level": off_value(&ctx, &p),
                    });
                }
                Err(e) => out.record(Some(Finding::fail(
                    "validate.level",
                    json!({"error": e.to_string()}),
                ))),
            },
            Err(e) => out.record(Some(Finding::fail(
                "validate.level",
                json!({"error": e.to_string()}),
            ))),
        }
    }
    RunReport::from_outcome("validate", seed, "exact", out, data)
}

pub fn run_relations_suite(
    cfg: &ScenarioConfig,
    seed: u64,
    mode: SweepMode,
) -> Result<RunReport, Error> {
    let ctx = cfg.context()?;
    let delta = cfg.delta(&ctx)?;
    let (rmode, label) = match mode {
        SweepMode::Exhaustive => (RelationsMode::Exhaustive, "exhaustive"),
        SweepMode::Sampled(count) => (RelationsMode::Sampled { count, seed }, "sampled"),
    };
    let out = run_relations(&ctx, &delta, rmode);
    Ok(RunReport::from_outcome("relations", seed, label, out, json!({})))
}

pub fn run_closure_suite(cfg: &ScenarioConfig, seed: u64) -> Result<RunReport, Error> {
    let ctx = cfg.context()?;
    let delta = cfg.delta(&ctx)?;
    let p = cfg.off(&ctx, &delta)?;
    let mut out = SuiteOutcome::default();
    let data;
    match cfg.subgroup(&ctx, &delta, &p) {
        Ok((group, _)) => {
            out.record(None);
            data = json!({"order": group.order(), "budget_hit": false});
        }
        Err(Error::BudgetExceeded { partial }) => {
            out.record(Some(Finding::fail(
                "closure.budget",
                json!({"partial": partial}),
            )));
            data = json!({"order": partial, "budget_hit": true});
        }
        Err(e) => return Err(e),
    }
    Ok(RunReport::from_outcome("closure", seed, "exact", out, data))
}

fn level_context(
    cfg: &ScenarioConfig,
) -> Result<
    (
        HermitianCtx,
        oddform_core::FormParam,
        oddform_core::OddFormIdeal,
        oddform_core::GroupSet,
        Vec<oddform_core::UMatrix>,
    ),
    Error,
> {
    let ctx = cfg.context()?;
    let delta = cfg.delta(&ctx)?;
    let p = cfg.off(&ctx, &delta)?;
    let (group, ambient) = cfg.subgroup(&ctx, &delta, &p)?;
    Ok((ctx, delta, p, group, ambient))
}

pub fn run_levels_suite(cfg: &ScenarioConfig, seed: u64) -> Result<RunReport, Error> {
    let (ctx, delta, _p, group, ambient) = level_context(cfg)?;
    let mut out = SuiteOutcome::default();

    let upper = upper_level_of_group(&ctx, &delta, &group)?;
    match validate_off(&ctx, &delta, &upper) {
        Ok(()) => out.record(None),
        Err(e) => out.record(Some(Finding::fail(
            "levels.upper_valid",
            json!({"error": e.to_string()}),
        ))),
    }
    let lower = lower_level(&ctx, &delta, &group, &ambient)?;
    match validate_off(&ctx, &delta, &lower) {
        Ok(()) => out.record(None),
        Err(e) => out.record(Some(Finding::fail(
            "levels.lower_valid",
            json!({"error": e.to_string()}),
        ))),
    }
    let contained = oddform_core::formideal::off_subset(&lower, &upper);
    out.record(if contained {
        None
    } else {
        Some(Finding::fail("levels.lower_in_upper", json!({})))
    });

    // conjugation invariance over a few seeded elementary matrices
    let mut rng = oddform_core::rng::seed_rng(seed, "levels.taus", 0);
    let taus: Vec<oddform_core::UMatrix> = (0..4)
        .map(|_| oddform_core::rng::random_word(&ctx, &ambient, 1, &mut rng))
        .collect();
    match conjugation_invariance_check(&ctx, &delta, &group, &taus) {
        Ok(true) => out.record(None),
        Ok(false) => out.record(Some(Finding::fail("levels.conjugation_invariance", json!({})))),
        Err(e) => out.record(Some(Finding::fail(
            "levels.conjugation_invariance",
            json!({"error": e.to_string()}),
        ))),
    }
    match minimality_check(&ctx, &delta, &group) {
        Ok(true) => out.record(None),
        Ok(false) => out.record(Some(Finding::fail("levels.minimality", json!({})))),
        Err(Error::UnsupportedRing) => out.skip(),
        Err(e) => out.record(Some(Finding::fail(
            "levels.minimality",
            json!({"error": e.to_string()}),
        ))),
    }

    let data = json!({
        "order": group.order(),
        "lower": off_value(&ctx, &lower),
        "upper": off_value(&ctx, &upper),
        "mode": "exact",
    });
    Ok(RunReport::from_outcome("levels", seed, "exact", out, data))
}

pub fn run_sandwich_suite(cfg: &ScenarioConfig, seed: u64) -> Result<RunReport, Error> {
    let (ctx, delta, _p, group, ambient) = level_context(cfg)?;
    let k = match cfg.k {
        Some(k) => k,
        None => k_exponent(ctx.n(), 1, ExponentMode::Single)? as u32,
    };
    let ideal = cfg.ideal(&ctx)?;
    let rep = sandwich_check(&ctx, &delta, &group, &ambient, &ideal, k)?;
    let mut out = SuiteOutcome::default();
    for (name, ok) in [
        ("eu_in_H", rep.checks.eu_in_h),
        ("H_in_CU", rep.checks.h_in_cu),
        ("lower_in_upper", rep.checks.lower_in_upper),
        ("remark67", rep.checks.remark_equivalence),
    ] {
        out.record(if ok {
            None
        } else {
            Some(Finding::fail(format!("sandwich.{name}"), json!({"k": k})))
        });
    }
    let data = json!({
        "lower": off_value(&ctx, &rep.lower),
        "upper": off_value(&ctx, &rep.upper),
        "checks": {
            "eu_in_H": rep.checks.eu_in_h,
            "H_in_CU": rep.checks.h_in_cu,
            "lower_in_upper": rep.checks.lower_in_upper,
            "remark67": rep.checks.remark_equivalence,
        },
        "k": k,
        "mode": "exact",
    });
    Ok(RunReport::from_outcome("sandwich", seed, "exact", out, data))
}

pub fn run_proofcheck_suite(
    cfg: &ScenarioConfig,
    seed: u64,
    mode: SweepMode,
) -> Result<RunReport, Error> {
    let ctx = cfg.context()?;
    let delta = cfg.delta(&ctx)?;
    let p = cfg.off(&ctx, &delta)?;
    let (pmode, label) = match mode {
        SweepMode::Exhaustive => (ProofcheckMode::Exhaustive, "exhaustive"),
        SweepMode::Sampled(count) => (ProofcheckMode::Sampled { count }, "sampled"),
    };
    let out = run_proofcheck(&ctx, &delta, &p, pmode, seed);
    Ok(RunReport::from_outcome("proofcheck", seed, label, out, json!({})))
}
