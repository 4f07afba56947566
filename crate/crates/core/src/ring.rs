//! Finite commutative rings with involution, symmetry and the element mu.
//!
//! A context packs the whole ring into lookup tables (the supported rings
//! have at most [`MAX_RING_SIZE`] elements), so every arithmetic operation
//! is a table read and every structural axiom can be checked exhaustively.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ring cardinality. Keeps the Heisenberg group (|R|^2
/// elements) and all fixpoint closures comfortably enumerable.
pub const MAX_RING_SIZE: usize = 16;

/// Handle of a ring element: an index into the context tables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RingElement(pub(crate) u8);

impl RingElement {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingKind {
    /// Z/m with the canonical residues 0..m-1.
    Modular { m: u32 },
    /// (Z/m)[w]/(w^2 + 1); the element a + b*w is the index pair (a, b).
    GaussianModular { m: u32 },
    /// Explicit addition and multiplication tables over indices 0..size-1.
    Table {
        add: Vec<Vec<usize>>,
        mul: Vec<Vec<usize>>,
        one: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvolutionKind {
    Identity,
    /// w -> -w on a gaussian modular ring.
    GaussianConjugation,
    #[serde(untagged)]
    Table { table: Vec<usize> },
}

/// Declarative description of a Hermitian ring; the canonical scenario-file
/// schema. Element strings use decimal residues for modular rings,
/// `a+b*w` for gaussian ones and `#k` for table rings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub ring: RingKind,
    pub involution: InvolutionKind,
    pub lambda: String,
    pub mu: String,
    pub n: usize,
}

impl RingSpec {
    pub fn modular(m: u32, lambda: &str, mu: &str, n: usize) -> Self {
        RingSpec {
            ring: RingKind::Modular { m },
            involution: InvolutionKind::Identity,
            lambda: lambda.to_string(),
            mu: mu.to_string(),
            n,
        }
    }

    pub fn gaussian(m: u32, lambda: &str, mu: &str, n: usize) -> Self {
        RingSpec {
            ring: RingKind::GaussianModular { m },
            involution: InvolutionKind::GaussianConjugation,
            lambda: lambda.to_string(),
            mu: mu.to_string(),
            n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum CtxKind {
    Modular(u32),
    Gaussian(u32),
    Table,
}

/// A validated Hermitian ring context: the finite commutative ring R, the
/// involution `bar`, the symmetry `lambda`, the element `mu` and the
/// dimension parameter `n`. Immutable after construction; all operations
/// are pure table reads, so contexts can be shared freely across threads.
#[derive(Clone, Debug)]
pub struct HermitianCtx {
    size: usize,
    n: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    bar: Vec<u8>,
    unit: Vec<bool>,
    zero: RingElement,
    one: RingElement,
    lambda: RingElement,
    mu: RingElement,
    lambda_inv: RingElement,
    mu_bar: RingElement,
    kind: CtxKind,
}

impl HermitianCtx {
    /// Builds and fully validates a context: the involution axioms, the
    /// symmetry condition bar(bar(x)) = lambda*x*bar(lambda), the identity
    /// lambda*bar(lambda) = 1 and mu = bar(mu)*lambda are all checked
    /// exhaustively over the ring.
    pub fn new(spec: &RingSpec) -> Result<Self> {
        let ctx = Self::build(spec)?;
        ctx.validate()?;
        Ok(ctx)
    }

    /// Builds the tables but skips the Hermitian-ring validation. Intended
    /// for negative-control fault injection; everything downstream may
    /// legitimately fail on such a context.
    pub fn new_unchecked(spec: &RingSpec) -> Result<Self> {
        Self::build(spec)
    }

    fn build(spec: &RingSpec) -> Result<Self> {
        if spec.n < 3 {
            return Err(Error::MalformedSpec(format!(
                "n must be at least 3, got {}",
                spec.n
            )));
        }
        let (size, add, mul, one, kind) = match &spec.ring {
            RingKind::Modular { m } => {
                let m = *m as usize;
                if m < 2 || m > MAX_RING_SIZE {
                    return Err(Error::MalformedSpec(format!(
                        "modular ring needs 2 <= m <= {MAX_RING_SIZE}, got {m}"
                    )));
                }
                let mut add = vec![0u8; m * m];
                let mut mul = vec![0u8; m * m];
                for a in 0..m {
                    for b in 0..m {
                        add[a * m + b] = ((a + b) % m) as u8;
                        mul[a * m + b] = ((a * b) % m) as u8;
                    }
                }
                (m, add, mul, 1usize, CtxKind::Modular(m as u32))
            }
            RingKind::GaussianModular { m } => {
                let m = *m as usize;
                if m < 2 || m * m > MAX_RING_SIZE {
                    return Err(Error::MalformedSpec(format!(
                        "gaussian ring needs 2 <= m and m^2 <= {MAX_RING_SIZE}, got m = {m}"
                    )));
                }
                let size = m * m;
                // index (a, b) -> a*m + b represents a + b*w, w^2 = -1
                let idx = |a: usize, b: usize| a * m + b;
                let mut add = vec![0u8; size * size];
                let mut mul = vec![0u8; size * size];
                for a1 in 0..m {
                    for b1 in 0..m {
                        for a2 in 0..m {
                            for b2 in 0..m {
                                let i = idx(a1, b1);
                                let j = idx(a2, b2);
                                add[i * size + j] = idx((a1 + a2) % m, (b1 + b2) % m) as u8;
                                // (a1 + b1*w)(a2 + b2*w) = (a1*a2 - b1*b2) + (a1*b2 + b1*a2)*w
                                let re = ((a1 * a2) % m + m - (b1 * b2) % m) % m;
                                let im = (a1 * b2 + b1 * a2) % m;
                                mul[i * size + j] = idx(re, im) as u8;
                            }
                        }
                    }
                }
                (size, add, mul, idx(1, 0), CtxKind::Gaussian(m as u32))
            }
            RingKind::Table { add, mul, one } => {
                let size = add.len();
                if size < 2 || size > MAX_RING_SIZE {
                    return Err(Error::MalformedSpec(format!(
                        "table ring needs 2 <= size <= {MAX_RING_SIZE}, got {size}"
                    )));
                }
                let flatten = |t: &Vec<Vec<usize>>, name: &str| -> Result<Vec<u8>> {
                    if t.len() != size {
                        return Err(Error::MalformedSpec(format!("{name} table is not square")));
                    }
                    let mut out = Vec::with_capacity(size * size);
                    for row in t {
                        if row.len() != size {
                            return Err(Error::MalformedSpec(format!(
                                "{name} table is not square"
                            )));
                        }
                        for &v in row {
                            if v >= size {
                                return Err(Error::MalformedSpec(format!(
                                    "{name} table entry {v} out of range"
                                )));
                            }
                            out.push(v as u8);
                        }
                    }
                    Ok(out)
                };
                let add = flatten(add, "addition")?;
                let mul = flatten(mul, "multiplication")?;
                if *one >= size {
                    return Err(Error::MalformedSpec("unit index out of range".into()));
                }
                (size, add, mul, *one, CtxKind::Table)
            }
        };

        let at = |t: &[u8], a: usize, b: usize| t[a * size + b] as usize;

        // Ring axioms. Cheap for modular/gaussian kinds, essential for tables.
        let mut zero = None;
        for z in 0..size {
            if (0..size).all(|x| at(&add, z, x) == x) {
                zero = Some(z);
                break;
            }
        }
        let zero = zero.ok_or_else(|| Error::MalformedSpec("no additive identity".into()))?;
        for a in 0..size {
            for b in 0..size {
                if at(&add, a, b) != at(&add, b, a) || at(&mul, a, b) != at(&mul, b, a) {
                    return Err(Error::MalformedSpec(
                        "ring tables are not commutative".into(),
                    ));
                }
                for c in 0..size {
                    if at(&add, at(&add, a, b), c) != at(&add, a, at(&add, b, c))
                        || at(&mul, at(&mul, a, b), c) != at(&mul, a, at(&mul, b, c))
                        || at(&mul, a, at(&add, b, c)) != at(&add, at(&mul, a, b), at(&mul, a, c))
                    {
                        return Err(Error::MalformedSpec(
                            "ring tables are not associative/distributive".into(),
                        ));
                    }
                }
            }
        }
        if (0..size).any(|x| at(&mul, one, x) != x) || one == zero {
            return Err(Error::MalformedSpec("unit element is not a unit".into()));
        }
        let mut neg = vec![0u8; size];
        for a in 0..size {
            let mut found = false;
            for b in 0..size {
                if at(&add, a, b) == zero {
                    neg[a] = b as u8;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::MalformedSpec(format!("element {a} has no negative")));
            }
        }

        let bar: Vec<u8> = match &spec.involution {
            InvolutionKind::Identity => (0..size as u8).collect(),
            InvolutionKind::GaussianConjugation => {
                let m = match kind {
                    CtxKind::Gaussian(m) => m as usize,
                    _ => {
                        return Err(Error::MalformedSpec(
                            "gaussian conjugation needs a gaussian ring".into(),
                        ))
                    }
                };
                (0..size)
                    .map(|i| {
                        let (a, b) = (i / m, i % m);
                        (a * m + (m - b) % m) as u8
                    })
                    .collect()
            }
            InvolutionKind::Table { table } => {
                if table.len() != size || table.iter().any(|&v| v >= size) {
                    return Err(Error::MalformedSpec("involution table malformed".into()));
                }
                let mut seen = vec![false; size];
                for &v in table {
                    if seen[v] {
                        return Err(Error::MalformedSpec(
                            "involution table is not a bijection".into(),
                        ));
                    }
                    seen[v] = true;
                }
                table.iter().map(|&v| v as u8).collect()
            }
        };

        // bar must be a ring anti-isomorphism fixing 1 (here: a homomorphism,
        // since R is commutative).
        if bar[one] as usize != one {
            return Err(Error::MalformedSpec("involution does not fix 1".into()));
        }
        for a in 0..size {
            for b in 0..size {
                if bar[at(&add, a, b)] as usize != at(&add, bar[a] as usize, bar[b] as usize)
                    || bar[at(&mul, a, b)] as usize != at(&mul, bar[b] as usize, bar[a] as usize)
                {
                    return Err(Error::MalformedSpec(
                        "involution is not a ring anti-isomorphism".into(),
                    ));
                }
            }
        }

        let mut unit = vec![false; size];
        for a in 0..size {
            unit[a] = (0..size).any(|b| at(&mul, a, b) == one);
        }

        let mut ctx = HermitianCtx {
            size,
            n: spec.n,
            add,
            mul,
            neg,
            bar,
            unit,
            zero: RingElement(zero as u8),
            one: RingElement(one as u8),
            lambda: RingElement(0),
            mu: RingElement(0),
            lambda_inv: RingElement(0),
            mu_bar: RingElement(0),
            kind,
        };
        ctx.lambda = ctx.parse_elem(&spec.lambda)?;
        ctx.mu = ctx.parse_elem(&spec.mu)?;
        ctx.mu_bar = ctx.bar(ctx.mu);
        // bar(lambda) is the inverse of lambda whenever the context is valid;
        // new_unchecked keeps it as a best-effort value.
        ctx.lambda_inv = ctx.bar(ctx.lambda);
        Ok(ctx)
    }

    fn validate(&self) -> Result<()> {
        if !self.unit[self.lambda.index()] {
            return Err(Error::NonUnitLambda);
        }
        // bar(bar(x)) = lambda * x * bar(lambda) for every x
        let lam_bar = self.bar(self.lambda);
        for x in self.elements() {
            let lhs = self.bar(self.bar(x));
            let rhs = self.mul(self.mul(self.lambda, x), lam_bar);
            if lhs != rhs {
                return Err(Error::InvalidSymmetry);
            }
        }
        if self.mul(self.lambda, lam_bar) != self.one {
            // implied by the symmetry condition at x = 1, kept as its own gate
            return Err(Error::InvalidSymmetry);
        }
        if self.mu != self.mul(self.bar(self.mu), self.lambda) {
            return Err(Error::InvalidMu);
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Dimension parameter n (the group lives on 2n+1 coordinates).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Same ring, different dimension parameter.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::MalformedSpec(format!("n must be at least 3, got {n}")));
        }
        let mut ctx = self.clone();
        ctx.n = n;
        Ok(ctx)
    }

    pub fn zero(&self) -> RingElement {
        self.zero
    }

    pub fn one(&self) -> RingElement {
        self.one
    }

    pub fn lambda(&self) -> RingElement {
        self.lambda
    }

    pub fn mu(&self) -> RingElement {
        self.mu
    }

    /// bar(mu); the mu of the inverse Hermitian ring.
    pub fn mu_bar(&self) -> RingElement {
        self.mu_bar
    }

    /// bar(lambda) = lambda^{-1}.
    pub fn lambda_inv(&self) -> RingElement {
        self.lambda_inv
    }

    #[inline]
    pub fn add(&self, a: RingElement, b: RingElement) -> RingElement {
        RingElement(self.add[a.index() * self.size + b.index()])
    }

    #[inline]
    pub fn mul(&self, a: RingElement, b: RingElement) -> RingElement {
        RingElement(self.mul[a.index() * self.size + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: RingElement) -> RingElement {
        RingElement(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: RingElement, b: RingElement) -> RingElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn bar(&self, a: RingElement) -> RingElement {
        RingElement(self.bar[a.index()])
    }

    pub fn is_unit(&self, a: RingElement) -> bool {
        self.unit[a.index()]
    }

    pub fn inv(&self, a: RingElement) -> Option<RingElement> {
        self.elements().find(|&b| self.mul(a, b) == self.one)
    }

    pub fn is_zero(&self, a: RingElement) -> bool {
        a == self.zero
    }

    /// Product of a slice, left to right; 1 on empty input.
    pub fn product(&self, xs: &[RingElement]) -> RingElement {
        xs.iter().fold(self.one, |acc, &x| self.mul(acc, x))
    }

    /// lambda^e for the small exponents generated by epsilon-arithmetic.
    /// Anything outside -2..=2 is a hard error so indexing bugs surface
    /// instead of silently computing powers.
    pub fn lambda_power(&self, e: i64) -> Result<RingElement> {
        let l = self.lambda;
        let li = self.lambda_inv;
        Ok(match e {
            0 => self.one,
            1 => l,
            -1 => li,
            2 => self.mul(l, l),
            -2 => self.mul(li, li),
            _ => return Err(Error::UnsupportedExponent(e)),
        })
    }

    /// Deterministic canonical-order enumeration of the whole ring.
    pub fn elements(&self) -> impl Iterator<Item = RingElement> {
        (0..self.size as u8).map(RingElement)
    }

    /// Checked element handle from a raw index (boundary use).
    pub fn elem_from_index(&self, idx: usize) -> Result<RingElement> {
        if idx < self.size {
            Ok(RingElement(idx as u8))
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<RingElement> {
        let s = s.trim();
        let err = || Error::ParseElement(s.to_string());
        match self.kind {
            CtxKind::Modular(m) => {
                let v: i64 = s.parse().map_err(|_| err())?;
                Ok(RingElement(v.rem_euclid(m as i64) as u8))
            }
            CtxKind::Gaussian(m) => {
                let m = m as i64;
                let (a, b) = parse_gaussian(s).ok_or_else(err)?;
                let (a, b) = (a.rem_euclid(m), b.rem_euclid(m));
                Ok(RingElement((a * m + b) as u8))
            }
            CtxKind::Table => {
                let idx: usize = s.strip_prefix('#').ok_or_else(err)?.parse().map_err(|_| err())?;
                self.elem_from_index(idx)
            }
        }
    }

    /// Canonical string form; round-trips bit-exactly through `parse_elem`.
    pub fn format_elem(&self, a: RingElement) -> String {
        match self.kind {
            CtxKind::Modular(_) => format!("{}", a.index()),
            CtxKind::Gaussian(m) => {
                let m = m as usize;
                let (re, im) = (a.index() / m, a.index() % m);
                if im == 0 {
                    format!("{re}")
                } else {
                    format!("{re}+{im}*w")
                }
            }
            CtxKind::Table => format!("#{}", a.index()),
        }
    }

    pub fn display<'a>(&'a self, a: RingElement) -> impl fmt::Display + 'a {
        struct D<'a>(&'a HermitianCtx, RingElement);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.format_elem(self.1))
            }
        }
        D(self, a)
    }
}

fn parse_gaussian(s: &str) -> Option<(i64, i64)> {
    // accepted shapes: "a", "a+b*w", "b*w", "w", "-w", with signed decimals
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = compact.parse::<i64>() {
        return Some((v, 0));
    }
    let parse_w = |t: &str| -> Option<i64> {
        let t = t.strip_suffix('w')?;
        let t = t.strip_suffix('*').unwrap_or(t);
        match t {
            "" | "+" => Some(1),
            "-" => Some(-1),
            _ => t.parse().ok(),
        }
    };
    if let Some(b) = parse_w(&compact) {
        if !compact.contains('+') && compact.matches('-').count() <= 1 {
            return Some((0, b));
        }
    }
    // split at the last '+' or '-' that is not the leading sign
    let bytes = compact.as_bytes();
    for pos in (1..bytes.len()).rev() {
        let c = bytes[pos] as char;
        if c == '+' || c == '-' {
            let a: i64 = compact[..pos].parse().ok()?;
            let rest = &compact[pos..];
            let b = parse_w(rest)?;
            return Some((a, b));
        }
    }
    None
}

/// Ready-made desk-scale contexts used throughout the test rigs.
pub mod contexts {
    use super::*;

    /// F_2 with the identity involution, lambda = mu = 1.
    pub fn f2(n: usize) -> HermitianCtx {
        HermitianCtx::new(&RingSpec::modular(2, "1", "1", n)).expect("F2 context is valid")
    }

    /// Z/4 with the identity involution, lambda = 1, mu = 2.
    pub fn z4(n: usize) -> HermitianCtx {
        HermitianCtx::new(&RingSpec::modular(4, "1", "2", n)).expect("Z4 context is valid")
    }

    /// Z/4 with the identity involution, lambda = 3, mu = 0. The only stock
    /// context with a nontrivial symmetry; exercises the lambda powers.
    pub fn z4_lambda3(n: usize) -> HermitianCtx {
        HermitianCtx::new(&RingSpec::modular(4, "3", "0", n)).expect("Z4 lambda=3 context is valid")
    }

    /// The gaussian ring (Z/3)[w]/(w^2+1) = GF(9) with conjugation w -> -w.
    pub fn g3(n: usize) -> HermitianCtx {
        HermitianCtx::new(&RingSpec::gaussian(3, "1", "1", n)).expect("G3 context is valid")
    }
}
