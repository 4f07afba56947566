//! Scenario configuration: one JSON file describes the ring context, the
//! form parameter, an optional odd form ideal and an optional subgroup.
//! Element strings use the canonical forms of the core crate and round-trip
//! bit-exactly.

use serde::{Deserialize, Serialize};

use oddform_core::formideal::{full_off, ideal_closure, make_off, Ideal, OddFormIdeal};
use oddform_core::heisenberg::{delta_max, delta_min, param_closure, FormParam, HeisElem, Twist};
use oddform_core::report::MatrixJson;
use oddform_core::subgroup::{closure, eu_generators, normal_closure, GroupSet, DEFAULT_BUDGET};
use oddform_core::unitary::UMatrix;
use oddform_core::{Error, HermitianCtx, Result, RingSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub kind: String,
    #[serde(default)]
    pub gens: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdealSpec {
    #[serde(default)]
    pub gens: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OmegaSpec {
    #[serde(default)]
    pub gens: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    /// "eu-full" or "eu-level"
    Named(String),
    Matrices(Vec<MatrixJson>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub seed: SeedSpec,
    #[serde(default = "default_ambient")]
    pub ambient: String,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub budget: Option<usize>,
}

fn default_ambient() -> String {
    "eu-full".into()
}

fn default_mode() -> String {
    "normal".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub ring: RingSpec,
    #[serde(default)]
    pub delta: Option<DeltaSpec>,
    #[serde(default)]
    pub ideal: Option<IdealSpec>,
    #[serde(default)]
    pub omega: Option<OmegaSpec>,
    #[serde(default)]
    pub subgroup: Option<SubgroupSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub k: Option<u32>,
}

impl ScenarioConfig {
    pub fn load(path: &std::path::Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed config: {e}"))
    }

    pub fn context(&self) -> Result<HermitianCtx> {
        HermitianCtx::new(&self.ring)
    }

    pub fn delta(&self, ctx: &HermitianCtx) -> Result<FormParam> {
        match &self.delta {
            None => Ok(delta_max(ctx)),
            Some(spec) => match spec.kind.as_str() {
                "max" => Ok(delta_max(ctx)),
                "min" => Ok(delta_min(ctx)),
                "generated" => {
                    let gens = self.parse_heis_list(ctx, &spec.gens)?;
                    param_closure(ctx, &gens, Twist::Pos)
                }
                other => Err(Error::MalformedSpec(format!("unknown delta kind {other:?}"))),
            },
        }
    }

    fn parse_heis_list(&self, ctx: &HermitianCtx, raw: &[[String; 2]]) -> Result<Vec<HeisElem>> {
        raw.iter()
            .map(|[x, y]| Ok(HeisElem::new(ctx.parse_elem(x)?, ctx.parse_elem(y)?)))
            .collect()
    }

    pub fn ideal(&self, ctx: &HermitianCtx) -> Result<Ideal> {
        match &self.ideal {
            None => Ok(Ideal::whole(ctx)),
            Some(spec) => {
                let gens: Result<Vec<_>> =
                    spec.gens.iter().map(|s| ctx.parse_elem(s)).collect();
                Ok(ideal_closure(ctx, &gens?))
            }
        }
    }

    /// The configured odd form ideal: the given ideal with the omega
    /// generators, defaulting to the full level (R, Delta).
    pub fn off(&self, ctx: &HermitianCtx, delta: &FormParam) -> Result<OddFormIdeal> {
        if self.ideal.is_none() && self.omega.is_none() {
            return Ok(full_off(ctx, delta));
        }
        let ideal = self.ideal(ctx)?;
        let omega_gens = match &self.omega {
            None => Vec::new(),
            Some(spec) => self.parse_heis_list(ctx, &spec.gens)?,
        };
        make_off(ctx, delta, &ideal, &omega_gens)
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Builds the configured subgroup. Returns the group together with the
    /// ambient generator list used for normal closures and level checks.
    pub fn subgroup(
        &self,
        ctx: &HermitianCtx,
        delta: &FormParam,
        p: &OddFormIdeal,
    ) -> Result<(GroupSet, Vec<UMatrix>)> {
        let full = full_off(ctx, delta);
        let ambient_gens = eu_generators(ctx, delta, &full);
        let spec = self
            .subgroup
            .as_ref()
            .ok_or(Error::MalformedSpec("config has no subgroup section".into()))?;
        let seed: Vec<UMatrix> = match &spec.seed {
            SeedSpec::Named(name) => match name.as_str() {
                "eu-full" => ambient_gens.clone(),
                "eu-level" => eu_generators(ctx, delta, p),
                other => {
                    return Err(Error::MalformedSpec(format!("unknown seed name {other:?}")))
                }
            },
            SeedSpec::Matrices(ms) => ms
                .iter()
                .map(|m| m.to_matrix(ctx))
                .collect::<Result<Vec<_>>>()?,
        };
        let budget = spec.budget.unwrap_or_else(|| self.budget());
        let level_gens;
        let group = match spec.mode.as_str() {
            "closure" => closure(ctx, &seed, budget)?,
            "normal" => {
                let ambient: &[UMatrix] = match spec.ambient.as_str() {
                    "eu-full" => &ambient_gens,
                    "eu-level" => {
                        level_gens = eu_generators(ctx, delta, p);
                        &level_gens
                    }
                    other => {
                        return Err(Error::MalformedSpec(format!(
                            "unknown ambient {other:?}"
                        )))
                    }
                };
                normal_closure(ctx, &seed, ambient, budget)?
            }
            other => return Err(Error::MalformedSpec(format!("unknown mode {other:?}"))),
        };
        Ok((group, ambient_gens))
    }
}
