//! The Heisenberg group over a Hermitian ring and its odd form parameters,
//! including the twisted variants entering the extra short transvections.
//!
//! Elements are pairs (x, y) with the product
//! `(x1,y1) + (x2,y2) = (x1+x2, y1+y2 - bar(x1) mu x2)`. The twisted group
//! (twist `Neg`) is the Heisenberg group of the inverse Hermitian ring; by
//! commutativity it differs only in using bar(mu) and bar(lambda).

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ring::{HermitianCtx, RingElement};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HeisElem {
    pub x: RingElement,
    pub y: RingElement,
}

impl HeisElem {
    pub fn new(x: RingElement, y: RingElement) -> Self {
        HeisElem { x, y }
    }
}

/// Which of the two Heisenberg structures an operation refers to:
/// `Pos` is the group of (R, bar, lambda, mu), `Neg` the one of the inverse
/// Hermitian ring.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Twist {
    Pos,
    Neg,
}

impl Twist {
    pub fn flip(self) -> Twist {
        match self {
            Twist::Pos => Twist::Neg,
            Twist::Neg => Twist::Pos,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Twist::Pos => 1,
            Twist::Neg => -1,
        }
    }

    /// Twist selected by a sign value (an epsilon or a product of epsilons).
    pub fn from_sign(s: i32) -> Twist {
        debug_assert!(s == 1 || s == -1);
        if s == 1 {
            Twist::Pos
        } else {
            Twist::Neg
        }
    }
}

#[inline]
fn mu_of(ctx: &HermitianCtx, k: Twist) -> RingElement {
    match k {
        Twist::Pos => ctx.mu(),
        Twist::Neg => ctx.mu_bar(),
    }
}

#[inline]
fn lambda_of(ctx: &HermitianCtx, k: Twist) -> RingElement {
    match k {
        Twist::Pos => ctx.lambda(),
        Twist::Neg => ctx.lambda_inv(),
    }
}

pub fn hzero(ctx: &HermitianCtx) -> HeisElem {
    HeisElem::new(ctx.zero(), ctx.zero())
}

/// Group product in the (possibly twisted) Heisenberg group.
pub fn hplus(ctx: &HermitianCtx, a: HeisElem, b: HeisElem, k: Twist) -> HeisElem {
    let cross = ctx.mul(ctx.mul(ctx.bar(a.x), mu_of(ctx, k)), b.x);
    HeisElem::new(ctx.add(a.x, b.x), ctx.sub(ctx.add(a.y, b.y), cross))
}

/// Group inverse: -(x,y) = (-x, -y - bar(x) mu x).
pub fn hminus(ctx: &HermitianCtx, a: HeisElem, k: Twist) -> HeisElem {
    let sq = ctx.mul(ctx.mul(ctx.bar(a.x), mu_of(ctx, k)), a.x);
    HeisElem::new(ctx.neg(a.x), ctx.sub(ctx.neg(a.y), sq))
}

/// a - b, i.e. a + (-b), in left-to-right reading.
pub fn hsub(ctx: &HermitianCtx, a: HeisElem, b: HeisElem, k: Twist) -> HeisElem {
    hplus(ctx, a, hminus(ctx, b, k), k)
}

/// Scalar action (x,y) o r = (x r, bar(r) y r). Identical for both twists
/// over a commutative ring.
pub fn hcirc(ctx: &HermitianCtx, a: HeisElem, r: RingElement) -> HeisElem {
    HeisElem::new(ctx.mul(a.x, r), ctx.mul(ctx.mul(ctx.bar(r), a.y), r))
}

/// Left-to-right fold of hplus over a list.
pub fn hsum(ctx: &HermitianCtx, terms: &[HeisElem], k: Twist) -> HeisElem {
    terms
        .iter()
        .fold(hzero(ctx), |acc, &t| hplus(ctx, acc, t, k))
}

/// Trace map bar(x) mu x + y + bar(y) lambda of the (twisted) structure.
pub fn trace(ctx: &HermitianCtx, a: HeisElem, k: Twist) -> RingElement {
    let t1 = ctx.mul(ctx.mul(ctx.bar(a.x), mu_of(ctx, k)), a.x);
    let t3 = ctx.mul(ctx.bar(a.y), lambda_of(ctx, k));
    ctx.add(ctx.add(t1, a.y), t3)
}

/// The elementwise twist (x, y) -> (x, bar(lambda) y); maps the untwisted
/// structure onto the twisted one.
pub fn twist_elem(ctx: &HermitianCtx, a: HeisElem) -> HeisElem {
    HeisElem::new(a.x, ctx.mul(ctx.lambda_inv(), a.y))
}

/// Inverse of [`twist_elem`].
pub fn untwist_elem(ctx: &HermitianCtx, a: HeisElem) -> HeisElem {
    HeisElem::new(a.x, ctx.mul(ctx.lambda(), a.y))
}

/// Applies the twist matching the target sign: identity when `to` is `Pos`.
pub fn twist_to(ctx: &HermitianCtx, a: HeisElem, to: Twist) -> HeisElem {
    match to {
        Twist::Pos => a,
        Twist::Neg => twist_elem(ctx, a),
    }
}

pub fn twist_set(ctx: &HermitianCtx, s: &BTreeSet<HeisElem>) -> BTreeSet<HeisElem> {
    s.iter().map(|&a| twist_elem(ctx, a)).collect()
}

pub fn untwist_set(ctx: &HermitianCtx, s: &BTreeSet<HeisElem>) -> BTreeSet<HeisElem> {
    s.iter().map(|&a| untwist_elem(ctx, a)).collect()
}

/// An odd form parameter: a submodule of the (twisted) Heisenberg group
/// between Delta_min and Delta_max, stored as an explicit element set.
/// Equality compares twist and elements; the generator list is provenance.
#[derive(Clone, Debug)]
pub struct FormParam {
    twist: Twist,
    elems: BTreeSet<HeisElem>,
    gens: Vec<HeisElem>,
}

impl PartialEq for FormParam {
    fn eq(&self, other: &Self) -> bool {
        self.twist == other.twist && self.elems == other.elems
    }
}

impl Eq for FormParam {}

impl FormParam {
    pub fn twist(&self) -> Twist {
        self.twist
    }

    pub fn elems(&self) -> &BTreeSet<HeisElem> {
        &self.elems
    }

    pub fn gens(&self) -> &[HeisElem] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, a: HeisElem) -> bool {
        self.elems.contains(&a)
    }

    /// Membership in the twisted set `Delta^{-1} = {(x,y) : (x, bar y) in Delta}`
    /// when `self` is untwisted, and symmetrically for the inverse direction.
    pub fn contains_twisted(&self, ctx: &HermitianCtx, a: HeisElem) -> bool {
        self.elems.contains(&HeisElem::new(a.x, ctx.bar(a.y)))
    }

    /// Membership of `a` viewed as an element of Delta^k relative to this
    /// parameter's own twist.
    pub fn contains_signed(&self, ctx: &HermitianCtx, a: HeisElem, k: Twist) -> bool {
        if k == self.twist {
            self.contains(a)
        } else {
            self.contains_twisted(ctx, a)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = HeisElem> + '_ {
        self.elems.iter().copied()
    }
}

/// Delta_min^(k) = {(0, x - bar(x) lambda_k) | x in R}.
pub fn delta_min_set(ctx: &HermitianCtx, k: Twist) -> BTreeSet<HeisElem> {
    let lam = lambda_of(ctx, k);
    ctx.elements()
        .map(|x| HeisElem::new(ctx.zero(), ctx.sub(x, ctx.mul(ctx.bar(x), lam))))
        .collect()
}

/// Delta_max^(k) = ker(trace).
pub fn delta_max_set(ctx: &HermitianCtx, k: Twist) -> BTreeSet<HeisElem> {
    let mut out = BTreeSet::new();
    for x in ctx.elements() {
        for y in ctx.elements() {
            let a = HeisElem::new(x, y);
            if trace(ctx, a, k) == ctx.zero() {
                out.insert(a);
            }
        }
    }
    out
}

pub fn delta_min_k(ctx: &HermitianCtx, k: Twist) -> FormParam {
    FormParam {
        twist: k,
        elems: delta_min_set(ctx, k),
        gens: Vec::new(),
    }
}

pub fn delta_max_k(ctx: &HermitianCtx, k: Twist) -> FormParam {
    let elems = delta_max_set(ctx, k);
    let gens = elems.iter().copied().collect();
    FormParam {
        twist: k,
        elems,
        gens,
    }
}

pub fn delta_min(ctx: &HermitianCtx) -> FormParam {
    delta_min_k(ctx, Twist::Pos)
}

pub fn delta_max(ctx: &HermitianCtx) -> FormParam {
    delta_max_k(ctx, Twist::Pos)
}

/// Fixpoint closure of a set under hplus, hminus and the scalar action.
pub(crate) fn close_heis_set(
    ctx: &HermitianCtx,
    start: BTreeSet<HeisElem>,
    k: Twist,
) -> BTreeSet<HeisElem> {
    let mut set = start;
    set.insert(hzero(ctx));
    let mut frontier: Vec<HeisElem> = set.iter().copied().collect();
    while let Some(a) = frontier.pop() {
        let push = |set: &mut BTreeSet<HeisElem>, frontier: &mut Vec<HeisElem>, e: HeisElem| {
            if set.insert(e) {
                frontier.push(e);
            }
        };
        push(&mut set, &mut frontier, hminus(ctx, a, k));
        for r in ctx.elements() {
            push(&mut set, &mut frontier, hcirc(ctx, a, r));
        }
        let snapshot: Vec<HeisElem> = set.iter().copied().collect();
        for b in snapshot {
            push(&mut set, &mut frontier, hplus(ctx, a, b, k));
            push(&mut set, &mut frontier, hplus(ctx, b, a, k));
        }
    }
    set
}

/// Smallest odd form parameter of twist `k` containing the generators.
/// Generators must already lie in Delta_max^(k).
pub fn param_closure(ctx: &HermitianCtx, gens: &[HeisElem], k: Twist) -> Result<FormParam> {
    for &g in gens {
        if trace(ctx, g, k) != ctx.zero() {
            return Err(Error::GeneratorOutsideDeltaMax);
        }
    }
    let mut start = delta_min_set(ctx, k);
    start.extend(gens.iter().copied());
    let elems = close_heis_set(ctx, start, k);
    // trace is a module homomorphism, so the closure cannot escape ker(trace)
    debug_assert!(elems.iter().all(|&a| trace(ctx, a, k) == ctx.zero()));
    Ok(FormParam {
        twist: k,
        elems,
        gens: gens.to_vec(),
    })
}

/// Elementwise twist of a whole parameter; lands in the opposite structure.
pub fn twist_param(ctx: &HermitianCtx, d: &FormParam) -> FormParam {
    let (map, gens): (BTreeSet<HeisElem>, Vec<HeisElem>) = match d.twist {
        Twist::Pos => (
            d.elems.iter().map(|&a| twist_elem(ctx, a)).collect(),
            d.gens.iter().map(|&a| twist_elem(ctx, a)).collect(),
        ),
        Twist::Neg => (
            d.elems.iter().map(|&a| untwist_elem(ctx, a)).collect(),
            d.gens.iter().map(|&a| untwist_elem(ctx, a)).collect(),
        ),
    };
    FormParam {
        twist: d.twist.flip(),
        elems: map,
        gens,
    }
}

/// J(Delta): the first-coordinate projection, a right ideal of R.
pub fn jdelta(d: &FormParam) -> BTreeSet<RingElement> {
    d.elems.iter().map(|a| a.x).collect()
}

pub fn jset(s: &BTreeSet<HeisElem>) -> BTreeSet<RingElement> {
    s.iter().map(|a| a.x).collect()
}

/// Expansion identity for (a,b) o (sum of x_i): the product of the
/// individual actions times a correction from the pairwise cross terms.
pub fn sum_expansion_check(
    ctx: &HermitianCtx,
    a: HeisElem,
    xs: &[RingElement],
    k: Twist,
) -> bool {
    let total = xs.iter().fold(ctx.zero(), |acc, &x| ctx.add(acc, x));
    let lhs = hcirc(ctx, a, total);

    let mut rhs = hzero(ctx);
    for &x in xs {
        rhs = hplus(ctx, rhs, hcirc(ctx, a, x), k);
    }
    let lam_k = lambda_of(ctx, k);
    let mut cross = ctx.zero();
    for i in 0..xs.len() {
        for j in 0..i {
            let t = ctx.mul(ctx.mul(ctx.bar(xs[i]), a.y), xs[j]);
            cross = ctx.add(cross, ctx.sub(t, ctx.mul(ctx.bar(t), lam_k)));
        }
    }
    rhs = hplus(ctx, rhs, HeisElem::new(ctx.zero(), cross), k);
    lhs == rhs
}
