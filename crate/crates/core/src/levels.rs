//! Lower and upper congruence levels of a subgroup and the sandwich
//! verdicts relating them: elementary-at-star-level membership on one side,
//! full-congruence membership on the other, plus the colon reformulation.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formideal::{
    ideal_closure, ideal_power, off_colon, off_star, off_subset, omega_max, omega_min,
    validate_off, Ideal, OddFormIdeal,
};
use crate::heisenberg::{
    close_heis_set, hcirc, hminus, hplus, hsub, jdelta, FormParam, HeisElem, Twist,
};
use crate::ring::{HermitianCtx, RingElement};
use crate::subgroup::{
    cu_conditions, eu_generators, orbit_contained, packed_cu_and_nu, GroupSet,
};
use crate::unitary::{eps, form_q, t_extra, t_short, theta_hb, UMatrix};

/// Exponent table for the sandwich theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentMode {
    /// One normalisation step.
    Single,
    /// A subnormal chain of the given defect.
    Chain,
}

/// k = 12 (n = 3) or 10 (n >= 4) for a single step; the chain closed forms
/// are (12^d - 1)/11 - 1 and (10^d - 1)/9 - 1.
pub fn k_exponent(n: usize, d: u32, mode: ExponentMode) -> Result<u64> {
    if n < 3 {
        return Err(Error::BadArguments("dimension parameter must be at least 3"));
    }
    let base: u64 = if n == 3 { 12 } else { 10 };
    match mode {
        ExponentMode::Single => Ok(base),
        ExponentMode::Chain => {
            if d < 1 {
                return Err(Error::BadArguments("chain defect must be at least 1"));
            }
            let p = base
                .checked_pow(d)
                .ok_or(Error::BadArguments("chain exponent overflows"))?;
            Ok((p - 1) / (base - 1) - 1)
        }
    }
}

struct Harvest {
    y: BTreeSet<RingElement>,
    z: BTreeSet<HeisElem>,
}

fn harvest_one(ctx: &HermitianCtx, delta: &FormParam, s: &UMatrix, out: &mut Harvest) {
    let hb = theta_hb(ctx.n());
    let jd: Vec<RingElement> = jdelta(delta).into_iter().collect();
    for &i in &hb {
        for &j in &hb {
            if i == j {
                continue;
            }
            out.y.insert(s.get(i, j));
            out.y.insert(ctx.sub(s.get(i, i), s.get(j, j)));
        }
    }
    for &i in &hb {
        for &d in &jd {
            out.y.insert(ctx.mul(s.get(i, 0), d));
            out.y.insert(ctx.mul(ctx.mul(ctx.bar(d), ctx.mu()), s.get(0, i)));
        }
    }
    for &j in &hb {
        let diff = ctx.sub(s.get(0, 0), s.get(j, j));
        for &d in &jd {
            for &d2 in &jd {
                out.y
                    .insert(ctx.mul(ctx.mul(ctx.mul(ctx.bar(d), ctx.mu()), diff), d2));
            }
        }
    }
    for &j in &hb {
        out.z.insert(form_q(ctx, &s.col(j)));
    }
    let one0 = HeisElem::new(ctx.one(), ctx.zero());
    let q0 = hsub(ctx, form_q(ctx, &s.col(0)), one0, Twist::Pos);
    for &i in &hb {
        for yz in delta.iter() {
            let e = hplus(
                ctx,
                hplus(ctx, hcirc(ctx, q0, yz.x), yz, Twist::Pos),
                hminus(ctx, hcirc(ctx, yz, s.get(i, i)), Twist::Pos),
                Twist::Pos,
            );
            out.z.insert(e);
        }
    }
}

fn assemble_upper(
    ctx: &HermitianCtx,
    delta: &FormParam,
    h: Harvest,
) -> Result<OddFormIdeal> {
    let y: Vec<RingElement> = h.y.into_iter().collect();
    let ideal = ideal_closure(ctx, &y);
    let mut start = omega_min(ctx, delta, &ideal);
    for z in h.z {
        for r in ctx.elements() {
            start.insert(hcirc(ctx, z, r));
        }
    }
    let omega = close_heis_set(ctx, start, Twist::Pos);
    if !omega.is_subset(&omega_max(ctx, delta, &ideal)) {
        return Err(Error::ClosureEscapesOmegaMax);
    }
    Ok(OddFormIdeal { ideal, omega })
}

fn is_maximal_level(ctx: &HermitianCtx, delta: &FormParam, p: &OddFormIdeal) -> bool {
    p.ideal.is_whole(ctx) && p.omega == *delta.elems()
}

/// Upper level of an explicit element list. The list need not be a closed
/// subgroup; callers pass full closures for exact levels or sampled words
/// for a certified lower bound. Every element must be unitary.
pub fn upper_level(
    ctx: &HermitianCtx,
    delta: &FormParam,
    elems: &[UMatrix],
) -> Result<OddFormIdeal> {
    let mut h = Harvest {
        y: BTreeSet::new(),
        z: BTreeSet::new(),
    };
    for s in elems {
        if !crate::unitary::is_unitary_l36(ctx, delta, s)? {
            return Err(Error::NotUnitary);
        }
        harvest_one(ctx, delta, s, &mut h);
    }
    assemble_upper(ctx, delta, h)
}

/// Upper level of a packed group. Harvests the generators first: if they
/// already force the maximal level (R, Delta), the sweep over the whole
/// element set is skipped, which is the common case for large groups.
pub fn upper_level_of_group(
    ctx: &HermitianCtx,
    delta: &FormParam,
    h: &GroupSet,
) -> Result<OddFormIdeal> {
    let mut acc = Harvest {
        y: BTreeSet::new(),
        z: BTreeSet::new(),
    };
    for g in h.gens() {
        harvest_one(ctx, delta, &g.unpack(ctx), &mut acc);
    }
    let from_gens = assemble_upper(ctx, delta, acc)?;
    if is_maximal_level(ctx, delta, &from_gens) {
        return Ok(from_gens);
    }

    let keys = h.sorted_keys();
    let dim = h.dim();
    let harvested = keys
        .par_chunks(4096)
        .map(|chunk| {
            let mut local = Harvest {
                y: BTreeSet::new(),
                z: BTreeSet::new(),
            };
            for &k in chunk {
                let m = crate::packed::Gf2Mat::from_key(dim, k).unpack(ctx);
                harvest_one(ctx, delta, &m, &mut local);
            }
            local
        })
        .reduce(
            || Harvest {
                y: BTreeSet::new(),
                z: BTreeSet::new(),
            },
            |mut a, b| {
                a.y.extend(b.y);
                a.z.extend(b.z);
                a
            },
        );
    assemble_upper(ctx, delta, harvested)
}

/// The four transvection families whose conjugates must lie in H for a ring
/// element x to enter the lower-level ideal.
fn lower_ideal_family(
    ctx: &HermitianCtx,
    delta: &FormParam,
    x: RingElement,
) -> Result<Vec<UMatrix>> {
    let hb = theta_hb(ctx.n());
    let mut fam = Vec::new();
    for &i in &hb {
        for &j in &hb {
            if i == j || i == -j {
                continue;
            }
            for r in ctx.elements() {
                let t = t_short(ctx, i, j, ctx.mul(x, r))?;
                if !t.is_identity(ctx) {
                    fam.push(t);
                }
            }
        }
    }
    let twisted = crate::heisenberg::twist_param(ctx, delta);
    for &i in &hb {
        let pool = if eps(i) == -1 { delta } else { &twisted };
        for r in ctx.elements() {
            let w = ctx.mul(x, r);
            let lam = ctx.lambda_power(-eps(i) as i64)?;
            let y = ctx.sub(w, ctx.mul(ctx.bar(w), lam));
            let t = t_extra(ctx, delta, i, HeisElem::new(ctx.zero(), y))?;
            if !t.is_identity(ctx) {
                fam.push(t);
            }
            for alpha in pool.iter() {
                for w in [ctx.mul(x, r), ctx.mul(ctx.bar(x), r)] {
                    let t = t_extra(ctx, delta, i, hcirc(ctx, alpha, w))?;
                    if !t.is_identity(ctx) {
                        fam.push(t);
                    }
                }
            }
        }
    }
    Ok(fam)
}

/// Lower level L(H): the greatest odd form ideal whose relative elementary
/// subgroup lies inside H. The universal quantifier over elementary
/// conjugators is realised as conjugation-orbit containment.
pub fn lower_level(
    ctx: &HermitianCtx,
    delta: &FormParam,
    h: &GroupSet,
    ambient: &[UMatrix],
) -> Result<OddFormIdeal> {
    let budget = crate::subgroup::DEFAULT_BUDGET;
    let mut ideal_elems: BTreeSet<RingElement> = BTreeSet::new();
    for x in ctx.elements() {
        let fam = lower_ideal_family(ctx, delta, x)?;
        if orbit_contained(ctx, &fam, ambient, h, budget)? {
            ideal_elems.insert(x);
        }
    }
    let raw: Vec<RingElement> = ideal_elems.iter().copied().collect();
    let ideal = ideal_closure(ctx, &raw);
    if ideal.elems() != &ideal_elems {
        return Err(Error::LevelNotFormIdeal(
            "lower-level element set is not an ideal",
        ));
    }

    let omax = omega_max(ctx, delta, &ideal);
    let mut member_pairs: BTreeSet<HeisElem> = BTreeSet::new();
    for &yz in &omax {
        let mut fam = Vec::new();
        let mut ok = true;
        for i in theta_hb(ctx.n()) {
            let arg_base = if eps(i) == -1 {
                yz
            } else {
                HeisElem::new(yz.x, ctx.bar(yz.y))
            };
            for r in ctx.elements() {
                let t = t_extra(ctx, delta, i, hcirc(ctx, arg_base, r))?;
                if !t.is_identity(ctx) {
                    fam.push(t);
                }
            }
        }
        if !fam.is_empty() {
            ok = orbit_contained(ctx, &fam, ambient, h, budget)?;
        }
        if ok {
            member_pairs.insert(yz);
        }
    }
    let mut start = omega_min(ctx, delta, &ideal);
    start.extend(member_pairs.iter().copied());
    let omega = close_heis_set(ctx, start, Twist::Pos);
    if !omega.is_subset(&omax) {
        return Err(Error::LevelNotFormIdeal("lower-level omega escapes omega_max"));
    }
    let p = OddFormIdeal { ideal, omega };
    validate_off(ctx, delta, &p)?;
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichChecks {
    /// Every preelementary generator at level U(H) * I^k is a member of H.
    pub eu_in_h: bool,
    /// Every element of H passes full-congruence membership at level U(H).
    pub h_in_cu: bool,
    /// L(H) is contained in U(H).
    pub lower_in_upper: bool,
    /// The three sandwich statements (elementary containment, star
    /// containment in L(H), colon containment of U(H)) agree pairwise.
    pub remark_equivalence: bool,
}

impl SandwichChecks {
    pub fn all(&self) -> bool {
        self.eu_in_h && self.h_in_cu && self.lower_in_upper && self.remark_equivalence
    }
}

#[derive(Clone, Debug)]
pub struct LevelReport {
    pub lower: OddFormIdeal,
    pub upper: OddFormIdeal,
    pub sandwich_ok: bool,
    pub checks: SandwichChecks,
    pub mode: LevelMode,
}

/// Runs the full sandwich verdict for a closed subgroup H: levels on both
/// sides, generator membership at the star level, congruence membership of
/// every element, and the equivalence of the three reformulations.
pub fn sandwich_check(
    ctx: &HermitianCtx,
    delta: &FormParam,
    h: &GroupSet,
    ambient: &[UMatrix],
    level_ideal: &Ideal,
    k: u32,
) -> Result<LevelReport> {
    let upper = upper_level_of_group(ctx, delta, h)?;
    let lower = lower_level(ctx, delta, h, ambient)?;
    validate_off(ctx, delta, &upper)?;

    let ik = ideal_power(ctx, level_ideal, k);
    let star = off_star(ctx, delta, &upper, &ik)?;
    let star_gens = eu_generators(ctx, delta, &star);

    let eu_in_h = star_gens.iter().all(|g| h.contains(ctx, g));

    let h_in_cu = {
        let keys = h.sorted_keys();
        let dim = h.dim();
        keys.par_chunks(4096)
            .map(|chunk| {
                chunk.iter().all(|&kk| {
                    let g = crate::packed::Gf2Mat::from_key(dim, kk);
                    matches!(packed_cu_and_nu(ctx, delta, &upper, &g), Ok((true, _)))
                })
            })
            .reduce(|| true, |a, b| a && b)
    };

    let lower_in_upper = off_subset(&lower, &upper);

    // the three sandwich statements
    let s_elementary = orbit_contained(
        ctx,
        &star_gens,
        ambient,
        h,
        crate::subgroup::DEFAULT_BUDGET,
    )?;
    let s_star_in_lower = off_subset(&star, &lower);
    let s_colon = off_subset(&upper, &off_colon(ctx, delta, &lower, &ik)?);
    let remark_equivalence = s_elementary == s_star_in_lower && s_star_in_lower == s_colon;

    let checks = SandwichChecks {
        eu_in_h,
        h_in_cu,
        lower_in_upper,
        remark_equivalence,
    };
    Ok(LevelReport {
        sandwich_ok: checks.all(),
        lower,
        upper,
        checks,
        mode: LevelMode::Exact,
    })
}

/// U(H) is invariant under conjugating H by elementary matrices. When the
/// conjugated generators already force the maximal level and the base level
/// is maximal too, the conjugated set is never materialised.
pub fn conjugation_invariance_check(
    ctx: &HermitianCtx,
    delta: &FormParam,
    h: &GroupSet,
    taus: &[UMatrix],
) -> Result<bool> {
    let base = upper_level_of_group(ctx, delta, h)?;
    let base_maximal = is_maximal_level(ctx, delta, &base);
    for tau in taus {
        let tp = crate::packed::Gf2Mat::pack(ctx, tau)?;
        let tinv = tp.inv().ok_or(Error::NotInvertible)?;
        if base_maximal {
            let mut acc = Harvest {
                y: BTreeSet::new(),
                z: BTreeSet::new(),
            };
            for g in h.gens() {
                let c = tinv.mul(g).mul(&tp);
                harvest_one(ctx, delta, &c.unpack(ctx), &mut acc);
            }
            let from_gens = assemble_upper(ctx, delta, acc)?;
            if is_maximal_level(ctx, delta, &from_gens) {
                continue;
            }
        }
        let conj = h.conjugated(&tp)?;
        let u = upper_level_of_group(ctx, delta, &conj)?;
        if u != base {
            return Ok(false);
        }
    }
    Ok(true)
}

/// U(H) is the smallest odd form ideal whose full congruence subgroup
/// contains H: checked against every odd form ideal of the context.
pub fn minimality_check(ctx: &HermitianCtx, delta: &FormParam, h: &GroupSet) -> Result<bool> {
    let upper = upper_level_of_group(ctx, delta, h)?;
    let offs = crate::formideal::enumerate_offs(ctx, delta)?;
    let keys = h.sorted_keys();
    let dim = h.dim();
    for p in offs {
        if off_subset(&upper, &p) {
            continue;
        }
        // a level that does not dominate U(H) must reject some element
        let all_cu = keys.par_chunks(4096).all(|chunk| {
            chunk.iter().all(|&kk| {
                let g = crate::packed::Gf2Mat::from_key(dim, kk);
                let m = g.unpack(ctx);
                cu_conditions(ctx, delta, &p, &m)
                    && match g.inv() {
                        Some(gi) => crate::subgroup::nu_conditions(ctx, &p, &m, &gi.unpack(ctx)),
                        None => false,
                    }
            })
        });
        if all_cu {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formideal::{full_off, zero_off};
    use crate::heisenberg::delta_max;
    use crate::ring::contexts::*;
    use crate::subgroup::{closure, normal_closure, DEFAULT_BUDGET};
    use crate::unitary::UMatrix;

    #[test]
    fn exponent_rules() {
        assert_eq!(k_exponent(3, 1, ExponentMode::Single).unwrap(), 12);
        assert_eq!(k_exponent(4, 1, ExponentMode::Single).unwrap(), 10);
        assert_eq!(k_exponent(7, 1, ExponentMode::Single).unwrap(), 10);
        assert_eq!(k_exponent(3, 1, ExponentMode::Chain).unwrap(), 0);
        assert_eq!(k_exponent(3, 2, ExponentMode::Chain).unwrap(), 12);
        assert_eq!(k_exponent(3, 3, ExponentMode::Chain).unwrap(), 156);
        assert_eq!(k_exponent(4, 1, ExponentMode::Chain).unwrap(), 0);
        assert_eq!(k_exponent(4, 2, ExponentMode::Chain).unwrap(), 10);
        assert_eq!(k_exponent(4, 3, ExponentMode::Chain).unwrap(), 110);
        assert!(k_exponent(2, 1, ExponentMode::Single).is_err());
        assert!(k_exponent(3, 0, ExponentMode::Chain).is_err());
    }

    #[test]
    fn upper_level_of_identity_is_zero() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let u = upper_level(&ctx, &dmax, &[UMatrix::identity(&ctx)]).unwrap();
        assert_eq!(u, zero_off(&ctx));
    }

    #[test]
    fn upper_level_of_generators_is_full() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let gens = eu_generators(&ctx, &dmax, &full);
        let u = upper_level(&ctx, &dmax, &gens).unwrap();
        assert_eq!(u, full);
    }

    #[test]
    fn upper_level_is_monotone_in_the_element_list() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let gens = eu_generators(&ctx, &dmax, &full);
        let mut rng = crate::rng::seed_rng(31, "upper monotone", 0);
        let mut elems = vec![UMatrix::identity(&ctx)];
        let mut prev = upper_level(&ctx, &dmax, &elems).unwrap();
        for _ in 0..6 {
            elems.push(crate::rng::random_word(&ctx, &gens, 3, &mut rng));
            let next = upper_level(&ctx, &dmax, &elems).unwrap();
            assert!(off_subset(&prev, &next), "upper level grows with the element set");
            prev = next;
        }
    }

    #[test]
    fn upper_level_rejects_non_unitary_input() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        assert_eq!(
            upper_level(&ctx, &dmax, &[UMatrix::zero(&ctx)]).err(),
            Some(Error::NotInvertible)
        );
        let not_unitary =
            crate::unitary::t_extra(&ctx, &dmax, 1, crate::heisenberg::HeisElem::new(ctx.zero(), ctx.one()))
                .unwrap();
        assert_eq!(
            upper_level(&ctx, &crate::heisenberg::delta_min(&ctx), &[not_unitary]).err(),
            Some(Error::NotUnitary)
        );
    }

    #[test]
    fn upper_level_respects_proper_omega_bound() {
        // with the minimal form parameter the Q-columns of unitary matrices
        // are exact, so every single-element upper level has trivial omega
        let ctx = f2(3);
        let dmin = crate::heisenberg::delta_min(&ctx);
        let full_min = full_off(&ctx, &dmin);
        let gens = eu_generators(&ctx, &dmin, &full_min);
        let mut rng = crate::rng::seed_rng(21, "upper dmin", 0);
        for _ in 0..10 {
            let h = crate::rng::random_word(&ctx, &gens, 5, &mut rng);
            let u = upper_level(&ctx, &dmin, &[h]).unwrap();
            assert_eq!(u.omega.len(), 1, "omega stays at the zero element");
            validate_off(&ctx, &dmin, &u).unwrap();
        }
    }

    #[test]
    fn lower_level_of_trivial_group_is_zero() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let ambient = eu_generators(&ctx, &dmax, &full);
        let h = GroupSet::trivial(&ctx);
        let l = lower_level(&ctx, &dmax, &h, &ambient).unwrap();
        assert_eq!(l, zero_off(&ctx));
    }

    #[test]
    fn levels_of_full_elementary_group() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let ambient = eu_generators(&ctx, &dmax, &full);
        let h = closure(&ctx, &ambient, DEFAULT_BUDGET).unwrap();
        let u = upper_level_of_group(&ctx, &dmax, &h).unwrap();
        assert_eq!(u, full);
        let l = lower_level(&ctx, &dmax, &h, &ambient).unwrap();
        assert_eq!(l, full);
        assert!(off_subset(&l, &u));
    }

    #[test]
    fn sandwich_on_trivial_group() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let ambient = eu_generators(&ctx, &dmax, &full);
        let h = GroupSet::trivial(&ctx);
        let rep = sandwich_check(&ctx, &dmax, &h, &ambient, &Ideal::zero(&ctx), 12).unwrap();
        assert!(rep.sandwich_ok, "{:?}", rep.checks);
        assert_eq!(rep.lower, zero_off(&ctx));
        assert_eq!(rep.upper, zero_off(&ctx));
    }

    #[test]
    fn minimality_of_trivial_and_small() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        assert!(minimality_check(&ctx, &dmax, &GroupSet::trivial(&ctx)).unwrap());
    }

    #[test]
    fn conjugation_invariance_small() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let full = full_off(&ctx, &dmax);
        let ambient = eu_generators(&ctx, &dmax, &full);
        let seed = t_short(&ctx, 1, 2, ctx.one()).unwrap();
        let h = normal_closure(&ctx, &[seed], &ambient, DEFAULT_BUDGET).unwrap();
        let taus = vec![
            UMatrix::identity(&ctx),
            t_short(&ctx, 2, 3, ctx.one()).unwrap(),
        ];
        assert!(conjugation_invariance_check(&ctx, &dmax, &h, &taus).unwrap());
    }
}
