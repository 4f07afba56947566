//! Findings, suite outcomes and the canonical JSON forms for matrices and
//! odd form ideals. Reports serialise through `serde_json::Value`, whose
//! object maps are ordered, so identical runs yield byte-identical output.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formideal::OddFormIdeal;
use crate::heisenberg::HeisElem;
use crate::ring::HermitianCtx;
use crate::unitary::UMatrix;

/// One failed (or informational) case with enough data to reproduce it.
#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub id: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Value>,
    pub verdict: bool,
}

impl Finding {
    pub fn fail(id: impl Into<String>, params: Value) -> Finding {
        Finding {
            id: id.into(),
            params,
            lhs: None,
            rhs: None,
            verdict: false,
        }
    }

    pub fn info(id: impl Into<String>, params: Value) -> Finding {
        Finding {
            id: id.into(),
            params,
            lhs: None,
            rhs: None,
            verdict: true,
        }
    }

    pub fn with_sides(mut self, lhs: Value, rhs: Value) -> Finding {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }

    pub fn is_failure(&self) -> bool {
        !self.verdict
    }
}

/// Aggregate of one suite run: total case count and the findings, sorted
/// for deterministic output.
#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub cases: u64,
    pub skipped: u64,
    pub findings: Vec<Finding>,
}

impl SuiteOutcome {
    pub fn record(&mut self, finding: Option<Finding>) {
        self.cases += 1;
        if let Some(f) = finding {
            self.findings.push(f);
        }
    }

    pub fn skip(&mut self) {
        self.cases += 1;
        self.skipped += 1;
    }

    pub fn merge(&mut self, other: SuiteOutcome) {
        self.cases += other.cases;
        self.skipped += other.skipped;
        self.findings.extend(other.findings);
    }

    pub fn failures(&self) -> usize {
        self.findings.iter().filter(|f| f.is_failure()).count()
    }

    pub fn sort(&mut self) {
        self.findings
            .sort_by(|a, b| (&a.id, a.params.to_string()).cmp(&(&b.id, b.params.to_string())));
    }
}

/// Matrix exchange format: rows of canonical element strings in Theta
/// position order (1..n, 0, -n..-1). Normative for all file interchange.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<String>>,
}

impl MatrixJson {
    pub fn from_matrix(ctx: &HermitianCtx, m: &UMatrix) -> MatrixJson {
        let d = m.dim();
        let rows = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| ctx.format_elem(m.get_pos(r, c)))
                    .collect()
            })
            .collect();
        MatrixJson { n: m.n(), rows }
    }

    pub fn to_matrix(&self, ctx: &HermitianCtx) -> Result<UMatrix> {
        if self.n != ctx.n() {
            return Err(Error::ContextMismatch);
        }
        let d = 2 * self.n + 1;
        if self.rows.len() != d || self.rows.iter().any(|r| r.len() != d) {
            return Err(Error::MalformedSpec("matrix rows have wrong shape".into()));
        }
        let mut m = UMatrix::zero(ctx);
        let idx = crate::unitary::theta(self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                m.set(idx[r], idx[c], ctx.parse_elem(s)?);
            }
        }
        Ok(m)
    }
}

pub fn matrix_value(ctx: &HermitianCtx, m: &UMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(ctx, m)).expect("matrix serialises")
}

pub fn heis_value(ctx: &HermitianCtx, a: HeisElem) -> Value {
    json!([ctx.format_elem(a.x), ctx.format_elem(a.y)])
}

/// {"ideal": [...], "omega": [[x, y], ...]} with canonical element strings.
pub fn off_value(ctx: &HermitianCtx, p: &OddFormIdeal) -> Value {
    json!({
        "ideal": p.ideal.iter().map(|e| ctx.format_elem(e)).collect::<Vec<_>>(),
        "omega": p.omega.iter().map(|a| heis_value(ctx, *a)).collect::<Vec<_>>(),
    })
}
