//! Instance verification of the computational identities behind the
//! sandwich theorems: the commutator arrow calculus with its constructive
//! conjugate decomposition, the two transvection-extraction lemmas, the
//! big first step of the rank-3 theorem, and the spreading lemma.

use serde_json::json;

use crate::error::{Error, Result};
use crate::formideal::{ideal_closure, omega_min, OddFormIdeal};
use crate::heisenberg::{hcirc, hplus, twist_to, FormParam, HeisElem, Twist};
use crate::report::{matrix_value, Finding};
use crate::ring::{HermitianCtx, RingElement};
use crate::subgroup::{eu_generators, orbit_contained, GroupSet};
use crate::unitary::{
    eps, form_q, minv, polarity, t_esd, t_extra, t_short, theta_hb, UMatrix, Vector,
};

/// A pair (a, b) travelling through the commutator arrow calculus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowState {
    pub a: UMatrix,
    pub b: UMatrix,
}

impl ArrowState {
    pub fn new(a: UMatrix, b: UMatrix) -> ArrowState {
        ArrowState { a, b }
    }
}

/// One arrow step: (a, b) -> ([a^{-1}, g], [g, b]).
pub fn arrow_step(ctx: &HermitianCtx, s: &ArrowState, g: &UMatrix) -> Result<ArrowState> {
    let a_inv = minv(ctx, &s.a)?;
    let g_inv = minv(ctx, g)?;
    let b_inv = minv(ctx, &s.b)?;
    let a2 = a_inv.mul(ctx, g).mul(ctx, &s.a).mul(ctx, &g_inv);
    let b2 = g.mul(ctx, &s.b).mul(ctx, &g_inv).mul(ctx, &b_inv);
    Ok(ArrowState { a: a2, b: b2 })
}

pub fn arrow_chain(ctx: &HermitianCtx, s0: &ArrowState, gs: &[UMatrix]) -> Result<ArrowState> {
    let mut s = s0.clone();
    for g in gs {
        s = arrow_step(ctx, &s, g)?;
    }
    Ok(s)
}

/// A word in the decomposition letters: letter 0 is the initial `a`, letter
/// k >= 1 is the k-th arrow conjugator; exponents are +-1.
pub type Word = Vec<(usize, i8)>;

fn word_inverse(w: &Word) -> Word {
    w.iter().rev().map(|&(l, e)| (l, -e)).collect()
}

#[derive(Clone, Debug)]
pub struct DecompFactor {
    pub conjugator: UMatrix,
    pub word: Word,
    pub exponent: i8,
}

/// `a_{n+1} b_{n+1}` written as a product of 2^n conjugates of the initial
/// `a_1 b_1` and its inverse, with conjugators in the subgroup generated by
/// a_1 and the arrow conjugators.
#[derive(Clone, Debug)]
pub struct ConjugateDecomposition {
    pub base: UMatrix,
    pub factors: Vec<DecompFactor>,
    /// letter 0, then the chain conjugators in order
    pub letters: Vec<UMatrix>,
}

impl ConjugateDecomposition {
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn reconstruct(&self, ctx: &HermitianCtx) -> Result<UMatrix> {
        let base_inv = minv(ctx, &self.base)?;
        let mut acc = UMatrix::identity(ctx);
        for f in &self.factors {
            let core = if f.exponent == 1 { &self.base } else { &base_inv };
            let c_inv = minv(ctx, &f.conjugator)?;
            acc = acc.mul(ctx, &f.conjugator.mul(ctx, core).mul(ctx, &c_inv));
        }
        Ok(acc)
    }

    /// Re-evaluates each conjugator word over the letters and compares with
    /// the stored matrix.
    pub fn words_consistent(&self, ctx: &HermitianCtx) -> Result<bool> {
        let inverses: Vec<UMatrix> = self
            .letters
            .iter()
            .map(|m| minv(ctx, m))
            .collect::<Result<_>>()?;
        for f in &self.factors {
            let mut acc = UMatrix::identity(ctx);
            for &(l, e) in &f.word {
                let m = if e == 1 { &self.letters[l] } else { &inverses[l] };
                acc = acc.mul(ctx, m);
            }
            if acc != f.conjugator {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Packs the letter subgroup and verifies conjugator membership; only
    /// available in the two-element ring mode.
    pub fn conjugators_in_letter_subgroup(
        &self,
        ctx: &HermitianCtx,
        budget: usize,
    ) -> Result<bool> {
        let sub = crate::subgroup::closure(ctx, &self.letters, budget)?;
        Ok(self.factors.iter().all(|f| sub.contains(ctx, &f.conjugator)))
    }
}

/// Constructive decomposition along an arrow chain. Each step turns
/// `a b` into `(a^{-1} g (a b) ...)`: concretely
/// `a2 b2 = conj(a1^{-1} g1, a1 b1) * conj(a1^{-1}, (a1 b1)^{-1})`,
/// doubling the factor list per step.
pub fn lemredux_decompose(
    ctx: &HermitianCtx,
    s0: &ArrowState,
    gs: &[UMatrix],
) -> Result<ConjugateDecomposition> {
    let mut letters = vec![s0.a.clone()];
    letters.extend(gs.iter().cloned());

    let base = s0.a.mul(ctx, &s0.b);
    let mut factors = vec![DecompFactor {
        conjugator: UMatrix::identity(ctx),
        word: Vec::new(),
        exponent: 1,
    }];

    let mut state = s0.clone();
    let mut a_word: Word = vec![(0, 1)];
    for (k, g) in gs.iter().enumerate() {
        let a_inv = minv(ctx, &state.a)?;
        let h1 = a_inv.mul(ctx, g);
        let h1_word: Word = {
            let mut w = word_inverse(&a_word);
            w.push((k + 1, 1));
            w
        };
        let h2 = a_inv;
        let h2_word = word_inverse(&a_word);

        let mut next: Vec<DecompFactor> = Vec::with_capacity(factors.len() * 2);
        for f in &factors {
            let mut w = h1_word.clone();
            w.extend(f.word.iter().copied());
            next.push(DecompFactor {
                conjugator: h1.mul(ctx, &f.conjugator),
                word: w,
                exponent: f.exponent,
            });
        }
        for f in factors.iter().rev() {
            let mut w = h2_word.clone();
            w.extend(f.word.iter().copied());
            next.push(DecompFactor {
                conjugator: h2.mul(ctx, &f.conjugator),
                word: w,
                exponent: -f.exponent,
            });
        }
        factors = next;

        // a_{k+1} = [a_k^{-1}, g_k]
        let mut w = word_inverse(&a_word);
        w.push((k + 1, 1));
        w.extend(a_word.iter().copied());
        w.push((k + 1, -1));
        a_word = w;
        state = arrow_step(ctx, &state, g)?;
    }
    Ok(ConjugateDecomposition {
        base,
        factors,
        letters,
    })
}

/// Which of the transvection-extraction displays to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemSub2Case {
    /// rank 3, first family: target T_{-s, sign*r}
    N3CaseI,
    /// rank 3, second family: target T_{-r,-t}
    N3CaseII,
    /// rank >= 4, first family: target T_{-s,u} (or T_{-s,v} when v given)
    N4CaseI,
    /// rank >= 4, second family: target T_{v,u}
    N4CaseII,
}

#[derive(Clone, Debug)]
pub struct LemSub2Params {
    pub r: i32,
    pub s: i32,
    pub t: i32,
    pub u: Option<i32>,
    pub v: Option<i32>,
    /// target column sign for the rank-3 first family: +1 or -1
    pub sign: i32,
    pub a: Vec<RingElement>,
}

fn check_hb_index(ctx: &HermitianCtx, i: i32) -> Result<()> {
    if i == 0 || i.abs() > ctx.n() as i32 {
        return Err(Error::InvalidIndices);
    }
    Ok(())
}

fn distinct_axes(ixs: &[i32]) -> bool {
    for (p, &a) in ixs.iter().enumerate() {
        for &b in &ixs[p + 1..] {
            if a == b || a == -b {
                return false;
            }
        }
    }
    true
}

struct TauParts {
    tau: UMatrix,
    factors_level_ok: bool,
}

/// tau_1 of the extraction lemmas; also checks each factor argument lies in
/// the level (I, Omega).
fn build_tau1(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    sigma: &UMatrix,
    r: i32,
    s: i32,
    t: i32,
    a1: RingElement,
) -> Result<TauParts> {
    let lp = |e: i32| ctx.lambda_power(e as i64);
    let m3 = |a, b, c| ctx.mul(ctx.mul(a, b), c);
    let x1 = m3(sigma.get(s, s), ctx.bar(sigma.get(s, r)), ctx.bar(a1));
    let x2 = ctx.neg(m3(sigma.get(s, r), ctx.bar(sigma.get(s, r)), ctx.bar(a1)));
    let x3 = ctx.neg(ctx.mul(
        lp((eps(t) - eps(s)) / 2)?,
        m3(sigma.get(s, -t), ctx.bar(sigma.get(s, r)), a1),
    ));
    let y = ctx.sub(
        ctx.mul(
            lp((eps(t) - eps(r)) / 2)?,
            m3(sigma.get(s, -t), ctx.bar(sigma.get(s, s)), a1),
        ),
        ctx.mul(
            lp((-eps(t) - eps(r)) / 2)?,
            m3(sigma.get(s, s), ctx.bar(sigma.get(s, -t)), ctx.bar(a1)),
        ),
    );
    let long_arg = HeisElem::new(ctx.zero(), y);
    let factors_level_ok = p.ideal.contains(x1)
        && p.ideal.contains(x2)
        && p.ideal.contains(x3)
        && p.omega_contains_signed(ctx, long_arg, Twist::from_sign(-eps(r)));
    let tau = t_short(ctx, r, t, x1)?
        .mul(ctx, &t_short(ctx, s, t, x2)?)
        .mul(ctx, &t_short(ctx, r, -s, x3)?)
        .mul(ctx, &t_extra(ctx, delta, r, long_arg)?);
    Ok(TauParts {
        tau,
        factors_level_ok,
    })
}

fn build_tau2(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    sigma: &UMatrix,
    r: i32,
    s: i32,
    t: i32,
    a1: RingElement,
) -> Result<TauParts> {
    let lp = |e: i32| ctx.lambda_power(e as i64);
    let m3 = |a, b, c| ctx.mul(ctx.mul(a, b), c);
    let x1 = m3(sigma.get(r, s), ctx.bar(sigma.get(r, r)), a1);
    let x2 = ctx.neg(m3(sigma.get(r, r), ctx.bar(sigma.get(r, r)), a1));
    let x3 = ctx.neg(ctx.mul(
        lp((eps(t) - eps(s)) / 2)?,
        m3(sigma.get(r, -t), ctx.bar(sigma.get(r, r)), ctx.bar(a1)),
    ));
    let y = ctx.sub(
        ctx.mul(
            lp((eps(t) - eps(r)) / 2)?,
            m3(sigma.get(r, -t), ctx.bar(sigma.get(r, s)), ctx.bar(a1)),
        ),
        ctx.mul(
            lp((-eps(t) - eps(r)) / 2)?,
            m3(sigma.get(r, s), ctx.bar(sigma.get(r, -t)), a1),
        ),
    );
    let long_arg = HeisElem::new(ctx.zero(), y);
    let factors_level_ok = p.ideal.contains(x1)
        && p.ideal.contains(x2)
        && p.ideal.contains(x3)
        && p.omega_contains_signed(ctx, long_arg, Twist::from_sign(-eps(r)));
    let tau = t_short(ctx, r, t, x1)?
        .mul(ctx, &t_short(ctx, s, t, x2)?)
        .mul(ctx, &t_short(ctx, r, -s, x3)?)
        .mul(ctx, &t_extra(ctx, delta, r, long_arg)?);
    Ok(TauParts {
        tau,
        factors_level_ok,
    })
}

/// Row/column identities for xi = sigma tau^{-1} sigma^{-1}: the products
/// fix row `fixed` of sigma and column `-fixed` of sigma^{-1}, so xi has
/// identity row `fixed` and identity column `-fixed`.
fn xi_identities(
    ctx: &HermitianCtx,
    sigma: &UMatrix,
    sigma_inv: &UMatrix,
    tau_inv: &UMatrix,
    xi: &UMatrix,
    fixed: i32,
) -> bool {
    let st = sigma.mul(ctx, tau_inv);
    if st.row(fixed) != sigma.row(fixed) {
        return false;
    }
    let ts = tau_inv.mul(ctx, sigma_inv);
    if ts.col(-fixed) != sigma_inv.col(-fixed) {
        return false;
    }
    let id = UMatrix::identity(ctx);
    xi.row(fixed) == id.row(fixed) && xi.col(-fixed) == id.col(-fixed)
}

/// Verifies one transvection-extraction display: tau and xi are built from
/// sigma, the level membership of the tau factors is checked, the row and
/// column identities of xi hold, and the arrow chain lands exactly on the
/// claimed transvection target paired with the identity.
pub fn verify_lemsub2_arrows(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    sigma: &UMatrix,
    case: LemSub2Case,
    params: &LemSub2Params,
) -> Result<bool> {
    let (r, s, t) = (params.r, params.s, params.t);
    for i in [r, s, t] {
        check_hb_index(ctx, i)?;
    }
    if r == s || r == -s || t == r || t == -r || t == s || t == -s {
        return Err(Error::InvalidIndices);
    }
    let lp = |e: i32| ctx.lambda_power(e as i64);
    let sigma_inv = minv(ctx, sigma)?;
    let prod = |vals: &[RingElement]| ctx.product(vals);

    match case {
        LemSub2Case::N3CaseI | LemSub2Case::N4CaseI => {
            if params.a.len() != 4 {
                return Err(Error::BadArguments("first family needs a1..a4"));
            }
            let (a1, a2, a3, a4) = (params.a[0], params.a[1], params.a[2], params.a[3]);
            let parts = build_tau1(ctx, delta, p, sigma, r, s, t, a1)?;
            if !parts.factors_level_ok {
                return Ok(false);
            }
            let tau_inv = minv(ctx, &parts.tau)?;
            let xi = sigma.mul(ctx, &tau_inv).mul(ctx, &sigma_inv);
            if !xi_identities(ctx, sigma, &sigma_inv, &tau_inv, &xi, s) {
                return Ok(false);
            }
            let coeff = prod(&[
                sigma.get(s, -t),
                ctx.bar(sigma.get(s, r)),
                a1,
                a2,
                a3,
                a4,
            ]);
            let (g3_col, target_col) = match case {
                LemSub2Case::N3CaseI => {
                    if params.sign != 1 && params.sign != -1 {
                        return Err(Error::BadArguments("rank-3 first family needs sign +-1"));
                    }
                    (params.sign * r, params.sign * r)
                }
                _ => {
                    let u = params.u.ok_or(Error::BadArguments("rank-4 family needs u"))?;
                    check_hb_index(ctx, u)?;
                    match params.v {
                        None => {
                            // u != +-s, +-t
                            if u == s || u == -s || u == t || u == -t {
                                return Err(Error::InvalidIndices);
                            }
                            (u, u)
                        }
                        Some(v) => {
                            check_hb_index(ctx, v)?;
                            if !distinct_axes(&[u, r]) || !distinct_axes(&[u, s]) || !distinct_axes(&[u, t]) {
                                return Err(Error::InvalidIndices);
                            }
                            if !distinct_axes(&[v, s]) || !distinct_axes(&[v, u]) {
                                return Err(Error::InvalidIndices);
                            }
                            (v, v)
                        }
                    }
                }
            };
            let lam = ctx.neg(ctx.mul(lp((eps(s) - eps(t)) / 2)?, a4));
            let gs: Vec<UMatrix> = match (case, params.v) {
                (LemSub2Case::N4CaseI, Some(_)) => {
                    let u = params.u.unwrap();
                    vec![
                        t_short(ctx, -s, u, a2)?,
                        t_short(ctx, -s, r, a3)?,
                        t_short(ctx, u, g3_col, lam)?,
                    ]
                }
                (LemSub2Case::N4CaseI, None) => vec![
                    t_short(ctx, -s, t, a2)?,
                    t_short(ctx, -s, r, a3)?,
                    t_short(ctx, t, g3_col, lam)?,
                ],
                _ => vec![
                    t_short(ctx, -s, t, a2)?,
                    t_short(ctx, -s, r, a3)?,
                    t_short(ctx, t, g3_col, lam)?,
                ],
            };
            let end = arrow_chain(ctx, &ArrowState::new(parts.tau.clone(), xi), &gs)?;
            let target = t_short(ctx, -s, target_col, coeff)?;
            Ok(end.a == target && end.b.is_identity(ctx))
        }
        LemSub2Case::N3CaseII => {
            if params.a.len() != 5 {
                return Err(Error::BadArguments("rank-3 second family needs a1..a5"));
            }
            let (a1, a2, a3, a4, a5) =
                (params.a[0], params.a[1], params.a[2], params.a[3], params.a[4]);
            let parts = build_tau2(ctx, delta, p, sigma, r, s, t, a1)?;
            if !parts.factors_level_ok {
                return Ok(false);
            }
            let tau_inv = minv(ctx, &parts.tau)?;
            let xi = sigma.mul(ctx, &tau_inv).mul(ctx, &sigma_inv);
            if !xi_identities(ctx, sigma, &sigma_inv, &tau_inv, &xi, r) {
                return Ok(false);
            }
            let gs = vec![
                t_short(ctx, s, r, a2)?,
                t_short(ctx, t, r, a3)?,
                t_short(ctx, r, -t, a4)?,
                t_short(ctx, -r, s, a5)?,
            ];
            let end = arrow_chain(ctx, &ArrowState::new(parts.tau.clone(), xi), &gs)?;
            let coeff = prod(&[sigma.get(r, s), ctx.bar(sigma.get(r, r)), a1, a2, a3, a4, a5]);
            let target = t_short(ctx, -r, -t, coeff)?;
            Ok(end.a == target && end.b.is_identity(ctx))
        }
        LemSub2Case::N4CaseII => {
            if params.a.len() != 4 {
                return Err(Error::BadArguments("rank-4 second family needs a1..a4"));
            }
            let (a1, a2, a3, a4) = (params.a[0], params.a[1], params.a[2], params.a[3]);
            let u = params.u.ok_or(Error::BadArguments("rank-4 family needs u"))?;
            let v = params.v.ok_or(Error::BadArguments("rank-4 second family needs v"))?;
            check_hb_index(ctx, u)?;
            check_hb_index(ctx, v)?;
            if !distinct_axes(&[u, r]) || !distinct_axes(&[u, s]) || !distinct_axes(&[u, t]) {
                return Err(Error::InvalidIndices);
            }
            if v == r || v == s || v == -s || v == -t || v == u || v == -u {
                return Err(Error::InvalidIndices);
            }
            let parts = build_tau2(ctx, delta, p, sigma, r, s, t, a1)?;
            if !parts.factors_level_ok {
                return Ok(false);
            }
            let tau_inv = minv(ctx, &parts.tau)?;
            let xi = sigma.mul(ctx, &tau_inv).mul(ctx, &sigma_inv);
            if !xi_identities(ctx, sigma, &sigma_inv, &tau_inv, &xi, r) {
                return Ok(false);
            }
            let gs = vec![
                t_short(ctx, s, r, a2)?,
                t_short(ctx, t, u, a3)?,
                t_short(ctx, v, s, ctx.neg(a4))?,
            ];
            let end = arrow_chain(ctx, &ArrowState::new(parts.tau.clone(), xi), &gs)?;
            let coeff = prod(&[sigma.get(r, s), ctx.bar(sigma.get(r, r)), a1, a2, a3, a4]);
            let target = t_short(ctx, v, u, coeff)?;
            Ok(end.a == target && end.b.is_identity(ctx))
        }
    }
}

/// Which exact reading of the congruence-lemma display matches the honest
/// matrix entry. The two sections of the source derivation print opposite
/// signs on the leading term; both are evaluated and recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SignProbe {
    pub minus_exact: bool,
    pub plus_exact: bool,
}

#[derive(Clone, Debug)]
pub struct Lemsub3Outcome {
    pub congruence_ok: bool,
    pub probe: SignProbe,
}

/// The commutator congruences tau_tt = 1 and tau_tr = bar(sigma_rs) bar(a0)
/// modulo the auxiliary ideal J, together with the entry-level sign probe.
pub fn verify_lemsub3_congruences(
    ctx: &HermitianCtx,
    sigma: &UMatrix,
    r: i32,
    s: i32,
    t: i32,
    a0: RingElement,
) -> Result<Lemsub3Outcome> {
    for i in [r, s, t] {
        check_hb_index(ctx, i)?;
    }
    if r == s || r == -s || t == r || t == -r || t == s || t == -s {
        return Err(Error::InvalidIndices);
    }
    let sigma_inv = minv(ctx, sigma)?;
    let b = ctx.neg(ctx.mul(ctx.bar(sigma.get(r, s)), ctx.bar(a0)));
    let tcandidate = t_short(ctx, t, r, b)?;
    let t_inv = t_short(ctx, t, r, ctx.neg(b))?;
    // tau = [sigma^{-1}, T_tr(b)]
    let tau = sigma_inv
        .mul(ctx, &tcandidate)
        .mul(ctx, sigma)
        .mul(ctx, &t_inv);

    let m3 = |a, b, c| ctx.mul(ctx.mul(a, b), c);
    let j = ideal_closure(
        ctx,
        &[
            m3(a0, sigma.get(r, s), ctx.bar(sigma.get(r, r))),
            m3(a0, sigma.get(r, s), ctx.bar(sigma.get(r, t))),
            m3(a0, sigma.get(r, s), ctx.bar(sigma.get(r, -t))),
        ],
    );

    let tau_tt = tau.get(t, t);
    let tau_tr = tau.get(t, r);
    let want_tr = ctx.mul(ctx.bar(sigma.get(r, s)), ctx.bar(a0));
    let congruence_ok = j.contains(ctx.sub(tau_tt, ctx.one()))
        && j.contains(ctx.sub(tau_tr, want_tr))
        && j.contains(ctx.sub(
            ctx.mul(tau_tt, ctx.bar(tau_tr)),
            ctx.mul(sigma.get(r, s), a0),
        ));

    // entry-level displays for tau_tr, first term with either sign
    let lam = ctx.lambda_power(-eps(t) as i64)?;
    let lead = ctx.mul(
        sigma_inv.get(t, t),
        m3(ctx.bar(sigma.get(r, s)), ctx.bar(a0), sigma.get(r, r)),
    );
    let mid = ctx.mul(
        ctx.mul(lam, m3(ctx.bar(sigma.get(r, -t)), sigma.get(r, s), a0)),
        sigma.get(-t, r),
    );
    let tail = ctx.mul(tau_tt, want_tr);
    let minus_reading = ctx.add(ctx.sub(mid, lead), tail);
    let plus_reading = ctx.add(ctx.add(lead, mid), tail);
    Ok(Lemsub3Outcome {
        congruence_ok,
        probe: SignProbe {
            minus_exact: tau_tr == minus_reading,
            plus_exact: tau_tr == plus_reading,
        },
    })
}

/// Expands the sign probe over every valid index triple for a sampled
/// matrix and folds the verdicts; used for the deterministic probe report.
pub fn sign_probe_sweep(
    ctx: &HermitianCtx,
    sigmas: &[UMatrix],
    a_pool: &[RingElement],
) -> Result<(SignProbe, u64)> {
    let hb = theta_hb(ctx.n());
    let mut minus_all = true;
    let mut plus_all = true;
    let mut cases = 0u64;
    for sigma in sigmas {
        for &r in &hb {
            for &s in &hb {
                if !distinct_axes(&[r, s]) {
                    continue;
                }
                for &t in &hb {
                    if !distinct_axes(&[t, r]) || !distinct_axes(&[t, s]) {
                        continue;
                    }
                    for &a0 in a_pool {
                        let out = verify_lemsub3_congruences(ctx, sigma, r, s, t, a0)?;
                        if !out.congruence_ok {
                            return Err(Error::PreconditionViolated(
                                "congruence part of the extraction lemma failed",
                            ));
                        }
                        minus_all &= out.probe.minus_exact;
                        plus_all &= out.probe.plus_exact;
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok((
        SignProbe {
            minus_exact: minus_all,
            plus_exact: plus_all,
        },
        cases,
    ))
}

/// The long first step of the rank-3 theorem: builds u from a column pair
/// of sigma^{-1}, conjugates the ESD transvection, forms zeta, runs the
/// arrow step and checks the displayed factorization together with the
/// final quadratic reduction witness.
pub fn verify_thm1_step1(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    sigma: &UMatrix,
    r: i32,
    s: i32,
    t: i32,
    b: RingElement,
    c: RingElement,
) -> Result<bool> {
    let n = ctx.n() as i32;
    if !(1..=n).contains(&r) || !(1..=n).contains(&s) || r == s {
        return Err(Error::InvalidIndices);
    }
    check_hb_index(ctx, t)?;
    if t == r || t == -r || t == s || t == -s {
        return Err(Error::InvalidIndices);
    }
    if !p.ideal.contains(b) || !p.ideal.contains(c) {
        return Err(Error::PreconditionViolated("b and c must lie in the ideal"));
    }
    let lp = |e: i32| ctx.lambda_power(e as i64);
    let sigma_inv = minv(ctx, sigma)?;

    // u' = e_{-r} sigma'_{-s,-s} - e_{-s} sigma'_{-s,-r}; the inverse
    // entries equal the bar entries of sigma for positive r, s
    let mut u_prime = Vector::zero(ctx);
    u_prime.set(-r, sigma_inv.get(-s, -s));
    u_prime.set(-s, ctx.neg(sigma_inv.get(-s, -r)));
    let mut u_prime_bar = Vector::zero(ctx);
    u_prime_bar.set(-r, ctx.bar(sigma.get(s, s)));
    u_prime_bar.set(-s, ctx.neg(ctx.bar(sigma.get(r, s))));
    if u_prime != u_prime_bar {
        return Ok(false);
    }

    let u = sigma_inv.mat_vec(ctx, &u_prime).scale(ctx, b);
    if u.get(-s) != ctx.zero() {
        return Ok(false);
    }
    for i in theta_hb(ctx.n()) {
        if !p.ideal.contains(u.get(i)) {
            return Ok(false);
        }
    }
    if !omega_min(ctx, delta, &p.ideal).contains(&form_q(ctx, &u)) {
        return Ok(false);
    }

    let t_u = t_esd(ctx, p, -s, &u, ctx.zero())?;
    let t_u_neg = t_esd(ctx, p, -s, &u.neg(ctx), ctx.zero())?;
    if minv(ctx, &t_u)? != t_u_neg {
        return Ok(false);
    }

    // xi = conj of T_{*,-s}(-u) by sigma, against the closed form
    // e - u' b (sigma_{*s})~ + sigma_{*s} bar(lambda) (u' b)~
    let xi = sigma.mul(ctx, &t_u_neg).mul(ctx, &sigma_inv);
    let upb = u_prime.scale(ctx, b);
    let mut xi_closed = UMatrix::identity(ctx);
    xi_closed.add_outer(ctx, &upb, ctx.neg(ctx.one()), &polarity(ctx, &sigma.col(s)));
    xi_closed.add_outer(ctx, &sigma.col(s), ctx.lambda_inv(), &polarity(ctx, &upb));
    if xi != xi_closed {
        return Ok(false);
    }

    // tau = T_tr(-sigma_ts sigma_ss bar b) T_ts(sigma_ts sigma_rs bar b)
    let m3 = |a, b2, c2| ctx.mul(ctx.mul(a, b2), c2);
    let tau = t_short(
        ctx,
        t,
        r,
        ctx.neg(m3(sigma.get(t, s), sigma.get(s, s), ctx.bar(b))),
    )?
    .mul(
        ctx,
        &t_short(ctx, t, s, m3(sigma.get(t, s), sigma.get(r, s), ctx.bar(b)))?,
    );
    let zeta = xi.mul(ctx, &tau);
    let id = UMatrix::identity(ctx);
    if zeta.row(t) != id.row(t) || zeta.col(-t) != id.col(-t) {
        return Ok(false);
    }

    // the zeta_{*r} column display
    let mut col = Vector::basis(ctx, r);
    {
        let mut v = sigma.col(s);
        let et_sts = Vector::basis(ctx, t).scale(ctx, sigma.get(t, s));
        v = v.sub(ctx, &et_sts);
        col = col.add(ctx, &v.scale(ctx, ctx.mul(sigma.get(s, s), ctx.bar(b))));
        let lam_t = lp((eps(t) + 1) / 2)?;
        let common = m3(sigma.get(t, s), sigma.get(s, s), ctx.bar(b));
        let coeff_s = ctx.sub(
            m3(
                ctx.bar(sigma.get(r, s)),
                ctx.bar(sigma.get(-r, s)),
                ctx.mul(b, ctx.lambda()),
            ),
            ctx.mul(
                ctx.mul(common, m3(ctx.bar(sigma.get(r, s)), ctx.bar(sigma.get(-t, s)), b)),
                lam_t,
            ),
        );
        col = col.add(ctx, &Vector::basis(ctx, -s).scale(ctx, coeff_s));
        let coeff_r = ctx.add(
            ctx.neg(m3(
                ctx.bar(sigma.get(s, s)),
                ctx.bar(sigma.get(-r, s)),
                ctx.mul(b, ctx.lambda()),
            )),
            ctx.mul(
                ctx.mul(common, m3(ctx.bar(sigma.get(s, s)), ctx.bar(sigma.get(-t, s)), b)),
                lam_t,
            ),
        );
        col = col.add(ctx, &Vector::basis(ctx, -r).scale(ctx, coeff_r));
    }
    if zeta.col(r) != col {
        return Ok(false);
    }

    // arrow step with T_rt(-c)
    let g = t_short(ctx, r, t, ctx.neg(c))?;
    let end = arrow_step(ctx, &ArrowState::new(t_u.clone(), zeta.clone()), &g)?;
    let (phi, psi) = (end.a, end.b);

    // phi display: T_s(0, -u_t bar(u_{-r}) c + bar(u_t bar(u_{-r}) c) bar(lambda))
    //              T_{s,-r}(bar(lambda) bar(u_t) bar(c)) T_{st}(-bar(u_{-r}) c)
    let w = m3(u.get(t), ctx.bar(u.get(-r)), c);
    let phi_display = t_extra(
        ctx,
        delta,
        s,
        HeisElem::new(
            ctx.zero(),
            ctx.add(ctx.neg(w), ctx.mul(ctx.bar(w), ctx.lambda_inv())),
        ),
    )?
    .mul(
        ctx,
        &t_short(
            ctx,
            s,
            -r,
            m3(ctx.lambda_inv(), ctx.bar(u.get(t)), ctx.bar(c)),
        )?,
    )
    .mul(ctx, &t_short(ctx, s, t, ctx.neg(ctx.mul(ctx.bar(u.get(-r)), c)))?);
    if phi != phi_display {
        return Ok(false);
    }

    // the displayed factorization of phi psi
    let k = Twist::from_sign(eps(t));
    let mut factors: Vec<UMatrix> = vec![phi_display.clone()];
    // replace the trailing T_{st} factor: phi ends with T_{st}(-bar(u_{-r})c)
    // and the psi product contributes T_{st}(zeta_{sr} c); Eq-style merge
    factors.pop();
    let f1 = t_extra(
        ctx,
        delta,
        s,
        HeisElem::new(
            ctx.zero(),
            ctx.add(ctx.neg(w), ctx.mul(ctx.bar(w), ctx.lambda_inv())),
        ),
    )?;
    let f2 = t_short(
        ctx,
        s,
        -r,
        m3(ctx.lambda_inv(), ctx.bar(u.get(t)), ctx.bar(c)),
    )?;
    let f3 = t_short(
        ctx,
        s,
        t,
        ctx.mul(ctx.sub(zeta.get(s, r), ctx.bar(u.get(-r))), c),
    )?;
    factors.extend([f1, f2, f3]);
    for i in theta_hb(ctx.n()) {
        if i == s || i == t || i == -t {
            continue;
        }
        let d = if i == r { ctx.one() } else { ctx.zero() };
        factors.push(t_short(ctx, i, t, ctx.mul(ctx.sub(zeta.get(i, r), d), c))?);
    }
    let wlong = ctx.mul(zeta.get(-t, r), c);
    factors.push(t_extra(
        ctx,
        delta,
        -t,
        HeisElem::new(
            ctx.zero(),
            ctx.sub(wlong, ctx.mul(lp(eps(t))?, ctx.bar(wlong))),
        ),
    )?);
    let zc = zeta.col(r).sub(ctx, &Vector::basis(ctx, r)).scale(ctx, c);
    let q_arg = hplus(
        ctx,
        twist_to(ctx, form_q(ctx, &zc), k),
        HeisElem::new(
            ctx.zero(),
            ctx.mul(ctx.mul(lp((eps(t) - 1) / 2)?, ctx.bar(c)), ctx.mul(zeta.get(-r, r), c)),
        ),
        k,
    );
    factors.push(t_extra(ctx, delta, -t, q_arg)?);
    let product = UMatrix::product(ctx, &factors[..]);
    if phi.mul(ctx, &psi) != product {
        return Ok(false);
    }

    // reduction witness: q_arg = (Q(sigma_{*s}) o sigma_ss bar(b) c)^{eps(t)}
    //                            + (0, y - bar(y) lambda^{eps(t)})
    let scale = m3(sigma.get(s, s), ctx.bar(b), c);
    let q_scaled = twist_to(ctx, hcirc(ctx, form_q(ctx, &sigma.col(s)), scale), k);
    let jy = ideal_closure(
        ctx,
        &[
            m3(sigma.get(-r, s), ctx.bar(b), c),
            m3(sigma.get(t, s), ctx.bar(b), c),
        ],
    );
    let lam_t = lp(eps(t))?;
    let witness = jy.iter().any(|y| {
        let corr = HeisElem::new(ctx.zero(), ctx.sub(y, ctx.mul(ctx.bar(y), lam_t)));
        hplus(ctx, q_scaled, corr, k) == q_arg
    });
    Ok(witness)
}

/// Spreading: if all T_{r,+-s}(x a) with a in I^m lie in H, then every
/// T_{ij}(x a) with a in I^{m+3} does. H must be closed and normalised by
/// the relative elementary generators (checked on the stored generators).
pub fn verify_spreading(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    h: &GroupSet,
    x: RingElement,
    r: i32,
    s: i32,
    m: u32,
) -> Result<bool> {
    check_hb_index(ctx, r)?;
    check_hb_index(ctx, s)?;
    if r == s || r == -s {
        return Err(Error::InvalidIndices);
    }
    let level_gens = eu_generators(ctx, delta, p);
    for g in h.gens() {
        let gm = g.unpack(ctx);
        if !orbit_contained(ctx, &[gm], &level_gens, h, crate::subgroup::DEFAULT_BUDGET)? {
            return Err(Error::NotClosed);
        }
    }
    let im = crate::formideal::ideal_power(ctx, &p.ideal, m);
    let hyp = im.iter().all(|a| {
        let xa = ctx.mul(x, a);
        [s, -s].iter().all(|&col| {
            t_short(ctx, r, col, xa)
                .map(|tm| h.contains(ctx, &tm))
                .unwrap_or(false)
        })
    });
    if !hyp {
        return Ok(true);
    }
    let im3 = crate::formideal::ideal_power(ctx, &p.ideal, m + 3);
    for i in theta_hb(ctx.n()) {
        for j in theta_hb(ctx.n()) {
            if i == j || i == -j {
                continue;
            }
            for a in im3.iter() {
                let tm = t_short(ctx, i, j, ctx.mul(x, a))?;
                if !h.contains(ctx, &tm) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A reproduction bundle for a failed verifier case.
pub fn proof_finding(
    ctx: &HermitianCtx,
    lemma: &str,
    params: serde_json::Value,
    sigma: &UMatrix,
) -> Finding {
    Finding::fail(lemma, json!({ "params": params, "sigma": matrix_value(ctx, sigma) }))
}

#[derive(Clone, Copy, Debug)]
pub enum ProofcheckMode {
    /// Every index tuple and every ideal-value vector, over a small seeded
    /// pool of unitary matrices.
    Exhaustive,
    /// A fixed number of uniformly drawn cases per lemma.
    Sampled { count: u64 },
}

/// Sweeps all proofcheck verifiers and aggregates findings. The sign probe
/// is always reported as one informational finding so the documented
/// discrepancy between the two display readings stays visible.
pub fn run_proofcheck(
    ctx: &HermitianCtx,
    delta: &FormParam,
    p: &OddFormIdeal,
    mode: ProofcheckMode,
    seed: u64,
) -> crate::report::SuiteOutcome {
    use rand::Rng;

    let mut out = crate::report::SuiteOutcome::default();
    let full = crate::formideal::full_off(ctx, delta);
    let gens = eu_generators(ctx, delta, &full);
    let mut rng = crate::rng::seed_rng(seed, "proofcheck.sigmas", 0);
    let mut sigmas = vec![UMatrix::identity(ctx)];
    let pool_size = match mode {
        ProofcheckMode::Exhaustive => 3,
        ProofcheckMode::Sampled { .. } => 6,
    };
    for _ in 0..pool_size {
        sigmas.push(crate::rng::random_word(ctx, &gens, 6, &mut rng));
    }
    let hb = theta_hb(ctx.n());
    let ivals: Vec<RingElement> = p.ideal.iter().collect();
    let n4 = ctx.n() >= 4;

    let record = |out: &mut crate::report::SuiteOutcome,
                      id: &str,
                      params: serde_json::Value,
                      sigma: &UMatrix,
                      res: Result<bool>| {
        out.cases += 1;
        match res {
            Ok(true) => {}
            Ok(false) => out.findings.push(proof_finding(ctx, id, params, sigma)),
            Err(e) => out.findings.push(Finding::fail(
                id,
                json!({"error": e.to_string(), "params": params}),
            )),
        }
    };

    let index_triples: Vec<(i32, i32, i32)> = {
        let mut v = Vec::new();
        for &r in &hb {
            for &s in &hb {
                if r == s || r == -s {
                    continue;
                }
                for &t in &hb {
                    if t == r || t == -r || t == s || t == -s {
                        continue;
                    }
                    v.push((r, s, t));
                }
            }
        }
        v
    };

    match mode {
        ProofcheckMode::Exhaustive => {
            // extraction families
            for sigma in &sigmas {
                for &(r, s, t) in &index_triples {
                    for combo in value_vectors(&ivals, 4) {
                        for sign in [1, -1] {
                            let params = LemSub2Params {
                                r,
                                s,
                                t,
                                u: None,
                                v: None,
                                sign,
                                a: combo.clone(),
                            };
                            let res = verify_lemsub2_arrows(
                                ctx,
                                delta,
                                p,
                                sigma,
                                LemSub2Case::N3CaseI,
                                &params,
                            );
                            record(
                                &mut out,
                                "proofcheck.lemsub2.first",
                                json!({"r": r, "s": s, "t": t, "sign": sign}),
                                sigma,
                                res,
                            );
                        }
                        if n4 {
                            for &u in &hb {
                                if u == s || u == -s || u == t || u == -t {
                                    continue;
                                }
                                let params = LemSub2Params {
                                    r,
                                    s,
                                    t,
                                    u: Some(u),
                                    v: None,
                                    sign: 1,
                                    a: combo.clone(),
                                };
                                let res = verify_lemsub2_arrows(
                                    ctx,
                                    delta,
                                    p,
                                    sigma,
                                    LemSub2Case::N4CaseI,
                                    &params,
                                );
                                record(
                                    &mut out,
                                    "proofcheck.lemsub2.first_n4",
                                    json!({"r": r, "s": s, "t": t, "u": u}),
                                    sigma,
                                    res,
                                );
                            }
                        }
                    }
                    for combo in value_vectors(&ivals, 5) {
                        let params = LemSub2Params {
                            r,
                            s,
                            t,
                            u: None,
                            v: None,
                            sign: 1,
                            a: combo,
                        };
                        let res = verify_lemsub2_arrows(
                            ctx,
                            delta,
                            p,
                            sigma,
                            LemSub2Case::N3CaseII,
                            &params,
                        );
                        record(
                            &mut out,
                            "proofcheck.lemsub2.second",
                            json!({"r": r, "s": s, "t": t}),
                            sigma,
                            res,
                        );
                    }
                }
            }
            // the long first step: r, s positive
            let n = ctx.n() as i32;
            for sigma in &sigmas {
                for r in 1..=n {
                    for s in 1..=n {
                        if r == s {
                            continue;
                        }
                        for &t in &hb {
                            if t == r || t == -r || t == s || t == -s {
                                continue;
                            }
                            for &b in &ivals {
                                for &c in &ivals {
                                    let res =
                                        verify_thm1_step1(ctx, delta, p, sigma, r, s, t, b, c);
                                    record(
                                        &mut out,
                                        "proofcheck.thm1.step1",
                                        json!({
                                            "r": r, "s": s, "t": t,
                                            "b": ctx.format_elem(b), "c": ctx.format_elem(c)
                                        }),
                                        sigma,
                                        res,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        ProofcheckMode::Sampled { count } => {
            let mut rng = crate::rng::seed_rng(seed, "proofcheck.sampled", 1);
            for _ in 0..count {
                let sigma = &sigmas[rng.gen_range(0..sigmas.len())];
                let (r, s, t) = index_triples[rng.gen_range(0..index_triples.len())];
                let rand_ival =
                    |rng: &mut rand_chacha::ChaCha8Rng| ivals[rng.gen_range(0..ivals.len())];
                match rng.gen_range(0..3u8) {
                    0 => {
                        let a: Vec<RingElement> = (0..4).map(|_| rand_ival(&mut rng)).collect();
                        let sign = if rng.gen() { 1 } else { -1 };
                        let params = LemSub2Params {
                            r,
                            s,
                            t,
                            u: None,
                            v: None,
                            sign,
                            a,
                        };
                        let res = verify_lemsub2_arrows(
                            ctx,
                            delta,
                            p,
                            sigma,
                            LemSub2Case::N3CaseI,
                            &params,
                        );
                        record(
                            &mut out,
                            "proofcheck.lemsub2.first",
                            json!({"r": r, "s": s, "t": t, "sign": sign}),
                            sigma,
                            res,
                        );
                    }
                    1 => {
                        let a: Vec<RingElement> = (0..5).map(|_| rand_ival(&mut rng)).collect();
                        let params = LemSub2Params {
                            r,
                            s,
                            t,
                            u: None,
                            v: None,
                            sign: 1,
                            a,
                        };
                        let res = verify_lemsub2_arrows(
                            ctx,
                            delta,
                            p,
                            sigma,
                            LemSub2Case::N3CaseII,
                            &params,
                        );
                        record(
                            &mut out,
                            "proofcheck.lemsub2.second",
                            json!({"r": r, "s": s, "t": t}),
                            sigma,
                            res,
                        );
                    }
                    _ => {
                        let (r, s) = (r.abs(), s.abs());
                        if r == s {
                            continue;
                        }
                        let (b, c) = (rand_ival(&mut rng), rand_ival(&mut rng));
                        let res = verify_thm1_step1(ctx, delta, p, sigma, r, s, t, b, c);
                        record(
                            &mut out,
                            "proofcheck.thm1.step1",
                            json!({
                                "r": r, "s": s, "t": t,
                                "b": ctx.format_elem(b), "c": ctx.format_elem(c)
                            }),
                            sigma,
                            res,
                        );
                    }
                }
            }
        }
    }

    // congruence lemma with its sign probe, aggregated deterministically
    let probe_pool: Vec<RingElement> = p.ideal.iter().collect();
    match sign_probe_sweep(ctx, &sigmas, &probe_pool) {
        Ok((probe, cases)) => {
            out.cases += cases;
            out.findings.push(Finding::info(
                "proofcheck.lemsub3.sign_probe",
                json!({
                    "cases": cases,
                    "minus_exact": probe.minus_exact,
                    "plus_exact": probe.plus_exact,
                }),
            ));
        }
        Err(e) => {
            out.cases += 1;
            out.findings
                .push(Finding::fail("proofcheck.lemsub3", json!({"error": e.to_string()})));
        }
    }

    // conjugate decompositions along random chains, up to four steps
    let mut rng = crate::rng::seed_rng(seed, "proofcheck.lemredux", 2);
    for steps in 0..=4usize {
        let a = crate::rng::random_word(ctx, &gens, 3, &mut rng);
        let b = crate::rng::random_word(ctx, &gens, 3, &mut rng);
        let gsv: Vec<UMatrix> = (0..steps)
            .map(|_| crate::rng::random_word(ctx, &gens, 2, &mut rng))
            .collect();
        let s0 = ArrowState::new(a, b);
        let res = (|| {
            let d = lemredux_decompose(ctx, &s0, &gsv)?;
            if d.factor_count() != 1 << steps {
                return Ok(false);
            }
            let end = arrow_chain(ctx, &s0, &gsv)?;
            if d.reconstruct(ctx)? != end.a.mul(ctx, &end.b) {
                return Ok(false);
            }
            d.words_consistent(ctx)
        })();
        let id = UMatrix::identity(ctx);
        record(
            &mut out,
            "proofcheck.lemredux",
            json!({"steps": steps}),
            &id,
            res,
        );
    }

    out.sort();
    out
}

fn value_vectors(pool: &[RingElement], len: usize) -> Vec<Vec<RingElement>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for v in &out {
            for &x in pool {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formideal::full_off;
    use crate::heisenberg::delta_max;
    use crate::ring::contexts::*;
    use crate::rng::{random_unitary, seed_rng};
    use crate::subgroup::{closure, normal_closure, DEFAULT_BUDGET};

    #[test]
    fn arrow_step_degenerate() {
        let ctx = f2(3);
        let id = UMatrix::identity(&ctx);
        let dmax = delta_max(&ctx);
        let mut rng = seed_rng(2, "arrow", 0);
        let a = random_unitary(&ctx, &dmax, 3, &mut rng);
        let b = random_unitary(&ctx, &dmax, 3, &mut rng);
        let s = arrow_step(&ctx, &ArrowState::new(a.clone(), b.clone()), &id).unwrap();
        assert!(s.a.is_identity(&ctx) && s.b.is_identity(&ctx));
        let s = arrow_step(&ctx, &ArrowState::new(id.clone(), b.clone()), &a).unwrap();
        assert!(s.a.is_identity(&ctx));
        // direct commutator cross-check
        let s = arrow_step(&ctx, &ArrowState::new(a.clone(), b.clone()), &b).unwrap();
        let ai = minv(&ctx, &a).unwrap();
        let bi = minv(&ctx, &b).unwrap();
        assert_eq!(s.a, ai.mul(&ctx, &b).mul(&ctx, &a).mul(&ctx, &bi));
    }

    #[test]
    fn lemredux_counts_and_reconstruction() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let mut rng = seed_rng(4, "lemredux", 0);
        for steps in 0..=4 {
            let a = random_unitary(&ctx, &dmax, 3, &mut rng);
            let b = random_unitary(&ctx, &dmax, 3, &mut rng);
            let gs: Vec<UMatrix> = (0..steps)
                .map(|_| random_unitary(&ctx, &dmax, 2, &mut rng))
                .collect();
            let s0 = ArrowState::new(a, b);
            let d = lemredux_decompose(&ctx, &s0, &gs).unwrap();
            assert_eq!(d.factor_count(), 1 << steps);
            let end = arrow_chain(&ctx, &s0, &gs).unwrap();
            assert_eq!(d.reconstruct(&ctx).unwrap(), end.a.mul(&ctx, &end.b));
            assert!(d.words_consistent(&ctx).unwrap());
            assert!(d.conjugators_in_letter_subgroup(&ctx, DEFAULT_BUDGET).unwrap());
        }
    }

    #[test]
    fn lemsub2_identity_sigma() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let id = UMatrix::identity(&ctx);
        let params = LemSub2Params {
            r: 1,
            s: 2,
            t: 3,
            u: None,
            v: None,
            sign: 1,
            a: vec![ctx.one(); 4],
        };
        assert!(verify_lemsub2_arrows(&ctx, &dmax, &p, &id, LemSub2Case::N3CaseI, &params).unwrap());
        let params5 = LemSub2Params {
            a: vec![ctx.one(); 5],
            ..params.clone()
        };
        assert!(
            verify_lemsub2_arrows(&ctx, &dmax, &p, &id, LemSub2Case::N3CaseII, &params5).unwrap()
        );
    }

    #[test]
    fn lemsub2_random_sigma_f2() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let mut rng = seed_rng(6, "lemsub2", 0);
        for _ in 0..6 {
            let sigma = random_unitary(&ctx, &dmax, 6, &mut rng);
            for sign in [1, -1] {
                let params = LemSub2Params {
                    r: 1,
                    s: 2,
                    t: -3,
                    u: None,
                    v: None,
                    sign,
                    a: vec![ctx.one(); 4],
                };
                assert!(verify_lemsub2_arrows(
                    &ctx,
                    &dmax,
                    &p,
                    &sigma,
                    LemSub2Case::N3CaseI,
                    &params
                )
                .unwrap());
            }
            let params = LemSub2Params {
                r: 2,
                s: 3,
                t: 1,
                u: None,
                v: None,
                sign: 1,
                a: vec![ctx.one(); 5],
            };
            assert!(verify_lemsub2_arrows(
                &ctx,
                &dmax,
                &p,
                &sigma,
                LemSub2Case::N3CaseII,
                &params
            )
            .unwrap());
        }
    }

    #[test]
    fn lemsub2_rank4_cases() {
        let ctx = f2(4);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let mut rng = seed_rng(8, "lemsub2 n4", 0);
        let sigma = random_unitary(&ctx, &dmax, 6, &mut rng);
        let base = LemSub2Params {
            r: 1,
            s: 2,
            t: 3,
            u: Some(4),
            v: None,
            sign: 1,
            a: vec![ctx.one(); 4],
        };
        assert!(
            verify_lemsub2_arrows(&ctx, &dmax, &p, &sigma, LemSub2Case::N4CaseI, &base).unwrap()
        );
        let with_v = LemSub2Params {
            v: Some(-3),
            ..base.clone()
        };
        assert!(
            verify_lemsub2_arrows(&ctx, &dmax, &p, &sigma, LemSub2Case::N4CaseI, &with_v).unwrap()
        );
        let case2 = LemSub2Params {
            u: Some(4),
            v: Some(3),
            ..base
        };
        assert!(
            verify_lemsub2_arrows(&ctx, &dmax, &p, &sigma, LemSub2Case::N4CaseII, &case2).unwrap()
        );
    }

    #[test]
    fn lemsub3_identity_and_probe() {
        let ctx = z4(3);
        let id = UMatrix::identity(&ctx);
        let out =
            verify_lemsub3_congruences(&ctx, &id, 1, 2, 3, ctx.parse_elem("1").unwrap()).unwrap();
        assert!(out.congruence_ok);
        assert!(out.probe.minus_exact);
    }

    #[test]
    fn lemsub3_sign_probe_discriminates_over_z4() {
        let ctx = z4(3);
        let dmax = delta_max(&ctx);
        let mut rng = seed_rng(9, "lemsub3", 0);
        let sigmas: Vec<UMatrix> = (0..8)
            .map(|_| random_unitary(&ctx, &dmax, 6, &mut rng))
            .collect();
        let pool: Vec<RingElement> = ctx.elements().collect();
        let (probe, cases) = sign_probe_sweep(&ctx, &sigmas, &pool).unwrap();
        assert!(cases > 0);
        assert!(probe.minus_exact, "the minus reading is the valid display");
        assert!(
            !probe.plus_exact,
            "the plus reading must fail on some rank-3 instance over Z4"
        );
    }

    #[test]
    fn thm1_step1_identity_and_random_f2() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let id = UMatrix::identity(&ctx);
        assert!(
            verify_thm1_step1(&ctx, &dmax, &p, &id, 1, 2, 3, ctx.one(), ctx.one()).unwrap()
        );
        let mut rng = seed_rng(10, "thm1", 0);
        for _ in 0..10 {
            let sigma = random_unitary(&ctx, &dmax, 6, &mut rng);
            for (r, s, t) in [(1, 2, 3), (1, 2, -3), (2, 3, 1), (3, 1, -2)] {
                assert!(
                    verify_thm1_step1(&ctx, &dmax, &p, &sigma, r, s, t, ctx.one(), ctx.one())
                        .unwrap(),
                    "step 1 failed for ({r},{s},{t})"
                );
            }
        }
    }

    #[test]
    fn spreading_on_closures() {
        let ctx = f2(3);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let gens = eu_generators(&ctx, &dmax, &p);
        let full = closure(&ctx, &gens, DEFAULT_BUDGET).unwrap();
        // everything is a member, trivially true
        assert!(verify_spreading(&ctx, &dmax, &p, &full, ctx.one(), 1, 2, 1).unwrap());
        // x = 0 is vacuous over the trivial group
        let h = normal_closure(
            &ctx,
            &[t_short(&ctx, 1, 2, ctx.one()).unwrap()],
            &gens,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(verify_spreading(&ctx, &dmax, &p, &h, ctx.zero(), 1, 2, 2).unwrap());
        assert!(verify_spreading(&ctx, &dmax, &p, &h, ctx.one(), 1, 2, 1).unwrap());
    }
}
