//! Involution-invariant ideals, relative odd form parameters, odd form
//! ideals and the star / colon calculus on them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::heisenberg::{
    close_heis_set, hcirc, hzero, FormParam, HeisElem, Twist,
};
use crate::ring::{HermitianCtx, RingElement};

/// An involution-invariant ideal of R, stored as an explicit element set.
/// Equality compares the element sets; the generator list is provenance.
#[derive(Clone, Debug)]
pub struct Ideal {
    elems: BTreeSet<RingElement>,
    gens: Vec<RingElement>,
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.elems == other.elems
    }
}

impl Eq for Ideal {}

impl Ideal {
    pub fn contains(&self, a: RingElement) -> bool {
        self.elems.contains(&a)
    }

    pub fn elems(&self) -> &BTreeSet<RingElement> {
        &self.elems
    }

    pub fn gens(&self) -> &[RingElement] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn is_zero(&self, ctx: &HermitianCtx) -> bool {
        self.elems.len() == 1 && self.elems.contains(&ctx.zero())
    }

    pub fn is_whole(&self, ctx: &HermitianCtx) -> bool {
        self.elems.len() == ctx.size()
    }

    pub fn iter(&self) -> impl Iterator<Item = RingElement> + '_ {
        self.elems.iter().copied()
    }

    pub fn zero(ctx: &HermitianCtx) -> Ideal {
        Ideal {
            elems: [ctx.zero()].into_iter().collect(),
            gens: Vec::new(),
        }
    }

    pub fn whole(ctx: &HermitianCtx) -> Ideal {
        Ideal {
            elems: ctx.elements().collect(),
            gens: vec![ctx.one()],
        }
    }

    pub fn is_subset(&self, other: &Ideal) -> bool {
        self.elems.is_subset(&other.elems)
    }
}

fn close_ideal_set(ctx: &HermitianCtx, start: BTreeSet<RingElement>) -> BTreeSet<RingElement> {
    let mut set = start;
    set.insert(ctx.zero());
    let mut frontier: Vec<RingElement> = set.iter().copied().collect();
    while let Some(a) = frontier.pop() {
        let push = |set: &mut BTreeSet<RingElement>, fr: &mut Vec<RingElement>, e| {
            if set.insert(e) {
                fr.push(e);
            }
        };
        push(&mut set, &mut frontier, ctx.neg(a));
        push(&mut set, &mut frontier, ctx.bar(a));
        for r in ctx.elements() {
            push(&mut set, &mut frontier, ctx.mul(a, r));
        }
        let snapshot: Vec<RingElement> = set.iter().copied().collect();
        for b in snapshot {
            push(&mut set, &mut frontier, ctx.add(a, b));
        }
    }
    set
}

/// Smallest involution-invariant ideal containing the generators.
pub fn ideal_closure(ctx: &HermitianCtx, gens: &[RingElement]) -> Ideal {
    let start: BTreeSet<RingElement> = gens.iter().copied().collect();
    Ideal {
        elems: close_ideal_set(ctx, start),
        gens: gens.to_vec(),
    }
}

/// Ideal generated by the pairwise products.
pub fn ideal_product(ctx: &HermitianCtx, a: &Ideal, b: &Ideal) -> Ideal {
    let gens: Vec<RingElement> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .map(|(x, y)| ctx.mul(x, y))
        .collect();
    ideal_closure(ctx, &gens)
}

/// k-fold product, with the convention that the zeroth power is R.
pub fn ideal_power(ctx: &HermitianCtx, a: &Ideal, k: u32) -> Ideal {
    let mut out = Ideal::whole(ctx);
    for _ in 0..k {
        out = ideal_product(ctx, &out, a);
    }
    out
}

/// The quotient {x in R : x B <= A}.
pub fn ideal_quotient(ctx: &HermitianCtx, a: &Ideal, b: &Ideal) -> Ideal {
    let elems: BTreeSet<RingElement> = ctx
        .elements()
        .filter(|&x| b.iter().all(|j| a.contains(ctx.mul(x, j))))
        .collect();
    let gens = elems.iter().copied().collect();
    Ideal { elems, gens }
}

/// The right ideal I~ = {x in R : bar(J(Delta)) mu x <= I}.
pub fn tilde_ideal(
    ctx: &HermitianCtx,
    delta: &FormParam,
    ideal: &Ideal,
) -> BTreeSet<RingElement> {
    let j: BTreeSet<RingElement> = delta.iter().map(|a| a.x).collect();
    ctx.elements()
        .filter(|&x| {
            j.iter()
                .all(|&d| ideal.contains(ctx.mul(ctx.mul(ctx.bar(d), ctx.mu()), x)))
        })
        .collect()
}

/// Omega_min^I: closure of {(0, x - bar(x) lambda) | x in I} together with
/// the generated submodule Delta o I.
pub fn omega_min(ctx: &HermitianCtx, delta: &FormParam, ideal: &Ideal) -> BTreeSet<HeisElem> {
    debug_assert_eq!(delta.twist(), Twist::Pos);
    let mut start: BTreeSet<HeisElem> = ideal
        .iter()
        .map(|x| HeisElem::new(ctx.zero(), ctx.sub(x, ctx.mul(ctx.bar(x), ctx.lambda()))))
        .collect();
    for d in delta.iter() {
        for a in ideal.iter() {
            start.insert(hcirc(ctx, d, a));
        }
    }
    close_heis_set(ctx, start, Twist::Pos)
}

/// Omega_max^I = Delta intersected with I~ x I.
pub fn omega_max(ctx: &HermitianCtx, delta: &FormParam, ideal: &Ideal) -> BTreeSet<HeisElem> {
    debug_assert_eq!(delta.twist(), Twist::Pos);
    let tilde = tilde_ideal(ctx, delta, ideal);
    delta
        .iter()
        .filter(|a| tilde.contains(&a.x) && ideal.contains(a.y))
        .collect()
}

/// An odd form ideal (I, Omega) of (R, Delta).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddFormIdeal {
    pub ideal: Ideal,
    pub omega: BTreeSet<HeisElem>,
}

impl OddFormIdeal {
    pub fn omega_contains(&self, a: HeisElem) -> bool {
        self.omega.contains(&a)
    }

    /// Membership in Omega^{-1} = {(x, y) : (x, bar y) in Omega}.
    pub fn omega_contains_twisted(&self, ctx: &HermitianCtx, a: HeisElem) -> bool {
        self.omega.contains(&HeisElem::new(a.x, ctx.bar(a.y)))
    }

    /// Membership of `a` in Omega^k.
    pub fn omega_contains_signed(&self, ctx: &HermitianCtx, a: HeisElem, k: Twist) -> bool {
        match k {
            Twist::Pos => self.omega_contains(a),
            Twist::Neg => self.omega_contains_twisted(ctx, a),
        }
    }

    /// First-coordinate projection J(Omega).
    pub fn j_omega(&self) -> BTreeSet<RingElement> {
        self.omega.iter().map(|a| a.x).collect()
    }
}

/// Builds (I, Omega) with Omega the closure of Omega_min^I and the given
/// generators; the generators must lie in Omega_max^I.
pub fn make_off(
    ctx: &HermitianCtx,
    delta: &FormParam,
    ideal: &Ideal,
    omega_gens: &[HeisElem],
) -> Result<OddFormIdeal> {
    let omax = omega_max(ctx, delta, ideal);
    for g in omega_gens {
        if !omax.contains(g) {
            return Err(Error::GeneratorOutsideOmegaMax);
        }
    }
    let mut start = omega_min(ctx, delta, ideal);
    start.extend(omega_gens.iter().copied());
    let omega = close_heis_set(ctx, start, Twist::Pos);
    if !omega.is_subset(&omax) {
        return Err(Error::ClosureEscapesOmegaMax);
    }
    Ok(OddFormIdeal {
        ideal: ideal.clone(),
        omega,
    })
}

/// The zero odd form ideal ({0}, {(0,0)}).
pub fn zero_off(ctx: &HermitianCtx) -> OddFormIdeal {
    OddFormIdeal {
        ideal: Ideal::zero(ctx),
        omega: [hzero(ctx)].into_iter().collect(),
    }
}

/// The full odd form ideal (R, Delta).
pub fn full_off(ctx: &HermitianCtx, delta: &FormParam) -> OddFormIdeal {
    OddFormIdeal {
        ideal: Ideal::whole(ctx),
        omega: delta.elems().clone(),
    }
}

/// (I, Omega) * J = (IJ, Omega_min^{IJ} + Omega o J).
pub fn off_star(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    j: &Ideal,
) -> Result<OddFormIdeal> {
    let ij = ideal_product(ctx, &p.ideal, j);
    let mut start = omega_min(ctx, delta, &ij);
    for w in p.omega.iter() {
        for jv in j.iter() {
            start.insert(hcirc(ctx, *w, jv));
        }
    }
    let omega = close_heis_set(ctx, start, Twist::Pos);
    if !omega.is_subset(&omega_max(ctx, delta, &ij)) {
        return Err(Error::ClosureEscapesOmegaMax);
    }
    Ok(OddFormIdeal { ideal: ij, omega })
}

/// (I, Omega) : J = (I : J, Omega_min^{I:J} + {a in Omega_max^{I:J} : a o J <= Omega}).
pub fn off_colon(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    j: &Ideal,
) -> Result<OddFormIdeal> {
    let iq = ideal_quotient(ctx, &p.ideal, j);
    let omax = omega_max(ctx, delta, &iq);
    let mut start = omega_min(ctx, delta, &iq);
    for &a in omax.iter() {
        if j.iter().all(|jv| p.omega.contains(&hcirc(ctx, a, jv))) {
            start.insert(a);
        }
    }
    let omega = close_heis_set(ctx, start, Twist::Pos);
    if !omega.is_subset(&omax) {
        return Err(Error::ClosureEscapesOmegaMax);
    }
    Ok(OddFormIdeal { ideal: iq, omega })
}

/// Componentwise containment of odd form ideals.
pub fn off_subset(p: &OddFormIdeal, q: &OddFormIdeal) -> bool {
    p.ideal.is_subset(&q.ideal) && p.omega.is_subset(&q.omega)
}

/// Re-validates all odd-form-ideal invariants by fixpoint re-closure.
pub fn validate_off(ctx: &HermitianCtx, delta: &FormParam, p: &OddFormIdeal) -> Result<()> {
    let reclosed = close_ideal_set(ctx, p.ideal.elems().clone());
    if &reclosed != p.ideal.elems() {
        return Err(Error::LevelNotFormIdeal("ideal part is not an ideal"));
    }
    let omin = omega_min(ctx, delta, &p.ideal);
    let omax = omega_max(ctx, delta, &p.ideal);
    if !omin.is_subset(&p.omega) {
        return Err(Error::LevelNotFormIdeal("omega does not contain omega_min"));
    }
    if !p.omega.is_subset(&omax) {
        return Err(Error::LevelNotFormIdeal("omega escapes omega_max"));
    }
    let reclosed = close_heis_set(ctx, p.omega.clone(), Twist::Pos);
    if reclosed != p.omega {
        return Err(Error::LevelNotFormIdeal("omega is not closed"));
    }
    Ok(())
}

/// Every odd form ideal of the context, by brute enumeration. Intended for
/// tiny rings; errors out above |R| = 4.
pub fn enumerate_offs(ctx: &HermitianCtx, delta: &FormParam) -> Result<Vec<OddFormIdeal>> {
    if ctx.size() > 4 {
        return Err(Error::UnsupportedRing);
    }
    let all: Vec<RingElement> = ctx.elements().collect();
    let mut ideals: Vec<Ideal> = Vec::new();
    for mask in 0..(1usize << all.len()) {
        let gens: Vec<RingElement> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &e)| e)
            .collect();
        let c = ideal_closure(ctx, &gens);
        if !ideals.contains(&c) {
            ideals.push(c);
        }
    }
    let mut out = Vec::new();
    for ideal in ideals {
        let omin = omega_min(ctx, delta, &ideal);
        let omax = omega_max(ctx, delta, &ideal);
        let free: Vec<HeisElem> = omax.difference(&omin).copied().collect();
        if free.len() > 16 {
            return Err(Error::UnsupportedRing);
        }
        let mut omegas: Vec<BTreeSet<HeisElem>> = Vec::new();
        for mask in 0..(1usize << free.len()) {
            let mut set = omin.clone();
            for (i, &e) in free.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set.insert(e);
                }
            }
            let closed = close_heis_set(ctx, set.clone(), Twist::Pos);
            if closed == set && !omegas.contains(&set) {
                omegas.push(set);
            }
        }
        for omega in omegas {
            out.push(OddFormIdeal {
                ideal: ideal.clone(),
                omega,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{delta_max, delta_min};
    use crate::ring::contexts::*;

    fn el(ctx: &HermitianCtx, s: &str) -> RingElement {
        ctx.parse_elem(s).unwrap()
    }

    fn he(ctx: &HermitianCtx, x: &str, y: &str) -> HeisElem {
        HeisElem::new(el(ctx, x), el(ctx, y))
    }

    #[test]
    fn ideal_closure_examples() {
        let z4 = z4(3);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        assert_eq!(i2.len(), 2);
        assert!(i2.contains(z4.zero()) && i2.contains(el(&z4, "2")));
        assert!(ideal_closure(&z4, &[]).is_zero(&z4));
        let g3 = g3(3);
        assert!(ideal_closure(&g3, &[el(&g3, "1+1*w")]).is_whole(&g3));
    }

    #[test]
    fn ideal_product_power_quotient() {
        let z4 = z4(3);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        assert!(ideal_power(&z4, &i2, 2).is_zero(&z4));
        assert!(ideal_power(&z4, &i2, 0).is_whole(&z4));
        assert_eq!(ideal_product(&z4, &i2, &Ideal::whole(&z4)), i2, "A * R = A");
        let q = ideal_quotient(&z4, &Ideal::zero(&z4), &i2);
        assert_eq!(q.elems(), i2.elems());
        assert_eq!(
            ideal_quotient(&z4, &i2, &Ideal::whole(&z4)).elems(),
            i2.elems()
        );
        assert!(ideal_quotient(&z4, &Ideal::whole(&z4), &i2).is_whole(&z4));
        // powers decrease
        for ctx in [f2(3), z4, g3(3)] {
            for gen in ctx.elements() {
                let i = ideal_closure(&ctx, &[gen]);
                for k in 0..4 {
                    let a = ideal_power(&ctx, &i, k);
                    let b = ideal_power(&ctx, &i, k + 1);
                    assert!(b.is_subset(&a));
                }
            }
        }
    }

    #[test]
    fn tilde_examples() {
        let f2 = f2(3);
        let t = tilde_ideal(&f2, &delta_max(&f2), &Ideal::zero(&f2));
        assert_eq!(t.len(), 2, "J(delta_max) = 0 over F2, so the condition is vacuous");
        let z4 = z4(3);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        let t = tilde_ideal(&z4, &delta_max(&z4), &i2);
        assert_eq!(t.len(), 4);
        for ctx in [f2, z4] {
            let dmax = delta_max(&ctx);
            for gen in ctx.elements() {
                let i = ideal_closure(&ctx, &[gen]);
                let t = tilde_ideal(&ctx, &dmax, &i);
                assert!(i.elems().is_subset(&t), "I <= I~ always");
            }
        }
    }

    #[test]
    fn omega_bounds_examples() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        assert_eq!(
            omega_min(&f2, &dmax, &Ideal::zero(&f2)).len(),
            1,
            "zero level has trivial omega_min"
        );
        assert_eq!(omega_min(&f2, &dmax, &Ideal::whole(&f2)), *dmax.elems());

        let z4 = z4(3);
        let dmax4 = delta_max(&z4);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        let omax = omega_max(&z4, &dmax4, &i2);
        let expect: BTreeSet<HeisElem> = dmax4
            .iter()
            .filter(|a| a.y == z4.zero() || a.y == el(&z4, "2"))
            .collect();
        assert_eq!(omax, expect);

        // monotone in the ideal
        for ctx in [f2, z4] {
            let dmax = delta_max(&ctx);
            let zero = Ideal::zero(&ctx);
            let whole = Ideal::whole(&ctx);
            assert!(omega_min(&ctx, &dmax, &zero).is_subset(&omega_min(&ctx, &dmax, &whole)));
            assert!(omega_max(&ctx, &dmax, &zero).is_subset(&omega_max(&ctx, &dmax, &whole)));
        }
    }

    #[test]
    fn make_off_and_validate() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let zero = make_off(&f2, &dmax, &Ideal::zero(&f2), &[]).unwrap();
        assert_eq!(zero, zero_off(&f2));
        validate_off(&f2, &dmax, &zero).unwrap();

        let full = make_off(&f2, &dmax, &Ideal::whole(&f2), &[]).unwrap();
        assert_eq!(full.omega, *dmax.elems(), "omega_min at full level is already delta");
        validate_off(&f2, &dmax, &full).unwrap();

        let z4 = z4(3);
        let dmax4 = delta_max(&z4);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        let p = make_off(&z4, &dmax4, &i2, &[he(&z4, "2", "2")]).unwrap();
        validate_off(&z4, &dmax4, &p).unwrap();
        for r in z4.elements() {
            assert!(p.omega_contains(hcirc(&z4, he(&z4, "2", "2"), r)));
        }
        assert_eq!(
            make_off(&z4, &dmax4, &i2, &[he(&z4, "1", "1")]).err(),
            Some(Error::GeneratorOutsideOmegaMax)
        );
    }

    #[test]
    fn star_and_colon_unit_laws() {
        let z4 = z4(3);
        let dmax = delta_max(&z4);
        let i2 = ideal_closure(&z4, &[el(&z4, "2")]);
        let p = make_off(&z4, &dmax, &i2, &[he(&z4, "2", "2")]).unwrap();
        let whole = Ideal::whole(&z4);

        let star = off_star(&z4, &dmax, &p, &whole).unwrap();
        assert_eq!(star, p, "P * R = P");
        let colon = off_colon(&z4, &dmax, &p, &whole).unwrap();
        assert_eq!(colon, p, "P : R = P");

        let star0 = off_star(&z4, &dmax, &p, &Ideal::zero(&z4)).unwrap();
        assert_eq!(star0, zero_off(&z4));
        let z = zero_off(&z4);
        assert_eq!(off_colon(&z4, &dmax, &z, &whole).unwrap(), z);

        // star with the proper ideal {0,2}
        let s = off_star(&z4, &dmax, &p, &i2).unwrap();
        assert!(s.ideal.is_zero(&z4));
        validate_off(&z4, &dmax, &s).unwrap();
        assert!(off_subset(&s, &p), "P * J <= P for J <= R");
    }

    #[test]
    fn galois_adjunction_exhaustive_f2() {
        for delta in [delta_max(&f2(3)), delta_min(&f2(3))] {
            let f2 = f2(3);
            let offs = enumerate_offs(&f2, &delta).unwrap();
            let ideals = [Ideal::zero(&f2), Ideal::whole(&f2)];
            for u in &offs {
                for l in &offs {
                    for k in &ideals {
                        let star = off_star(&f2, &delta, u, k).unwrap();
                        let colon = off_colon(&f2, &delta, l, k).unwrap();
                        assert_eq!(
                            off_subset(&star, l),
                            off_subset(u, &colon),
                            "star/colon adjunction"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn off_subset_basics() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let z = zero_off(&f2);
        let full = full_off(&f2, &dmax);
        assert!(off_subset(&z, &z));
        assert!(off_subset(&z, &full));
        assert!(!off_subset(&full, &z));
    }

    #[test]
    fn enumerate_offs_f2() {
        let f2 = f2(3);
        let offs = enumerate_offs(&f2, &delta_max(&f2)).unwrap();
        // ideals {0} and F2; over {0} only the trivial omega, over F2 only delta_max
        assert_eq!(offs.len(), 2);
        for p in &offs {
            validate_off(&f2, &delta_max(&f2), p).unwrap();
        }
    }
}
