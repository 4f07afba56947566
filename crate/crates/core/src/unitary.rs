//! The module M = R^{2n+1} with its lambda-Hermitian form B and quadratic
//! map Q, the polarity map, membership tests for the odd-dimensional
//! unitary group, and the transvection constructors (short, extra short,
//! long and ESD).
//!
//! Coordinates are indexed by Theta = {1..n, 0, -n..-1} in the order
//! 1 < ... < n < 0 < -n < ... < -1; all matrices are dense row-major
//! arrays in that position order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formideal::OddFormIdeal;
use crate::heisenberg::{
    hplus, hsub, hzero, twist_to, FormParam, HeisElem, Twist,
};
use crate::ring::{HermitianCtx, RingElement};
use crate::rng::seed_rng;

/// Sign map on the hyperbolic indices.
#[inline]
pub fn eps(i: i32) -> i32 {
    debug_assert!(i != 0);
    if i > 0 {
        1
    } else {
        -1
    }
}

/// All of Theta in canonical order.
pub fn theta(n: usize) -> Vec<i32> {
    let n = n as i32;
    (1..=n).chain([0]).chain(-n..=-1).collect()
}

/// The hyperbolic indices Theta \ {0} in canonical order.
pub fn theta_hb(n: usize) -> Vec<i32> {
    let n = n as i32;
    (1..=n).chain(-n..=-1).collect()
}

/// Position of a Theta index in the basis (e_1,...,e_n,e_0,e_{-n},...,e_{-1}).
#[inline]
pub fn theta_pos(n: usize, i: i32) -> usize {
    if i > 0 {
        (i - 1) as usize
    } else if i == 0 {
        n
    } else {
        (2 * n as i32 + 1 + i) as usize
    }
}

/// A column (or, contextually, row) vector of length 2n+1 in Theta order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vector {
    n: usize,
    c: Vec<RingElement>,
}

impl Vector {
    pub fn zero(ctx: &HermitianCtx) -> Vector {
        Vector {
            n: ctx.n(),
            c: vec![ctx.zero(); ctx.dim()],
        }
    }

    pub fn basis(ctx: &HermitianCtx, i: i32) -> Vector {
        let mut v = Vector::zero(ctx);
        v.set(i, ctx.one());
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: i32) -> RingElement {
        self.c[theta_pos(self.n, i)]
    }

    #[inline]
    pub fn set(&mut self, i: i32, x: RingElement) {
        self.c[theta_pos(self.n, i)] = x;
    }

    pub fn coords(&self) -> &[RingElement] {
        &self.c
    }

    pub fn add(&self, ctx: &HermitianCtx, other: &Vector) -> Vector {
        Vector {
            n: self.n,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(&a, &b)| ctx.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, ctx: &HermitianCtx, other: &Vector) -> Vector {
        Vector {
            n: self.n,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(&a, &b)| ctx.sub(a, b))
                .collect(),
        }
    }

    /// Right scalar multiple u x.
    pub fn scale(&self, ctx: &HermitianCtx, x: RingElement) -> Vector {
        Vector {
            n: self.n,
            c: self.c.iter().map(|&a| ctx.mul(a, x)).collect(),
        }
    }

    pub fn neg(&self, ctx: &HermitianCtx) -> Vector {
        Vector {
            n: self.n,
            c: self.c.iter().map(|&a| ctx.neg(a)).collect(),
        }
    }

    pub fn is_zero(&self, ctx: &HermitianCtx) -> bool {
        self.c.iter().all(|&a| a == ctx.zero())
    }
}

/// A dense (2n+1) x (2n+1) matrix over R, row-major in Theta position order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UMatrix {
    n: usize,
    e: Vec<RingElement>,
}

impl UMatrix {
    pub fn identity(ctx: &HermitianCtx) -> UMatrix {
        let d = ctx.dim();
        let mut e = vec![ctx.zero(); d * d];
        for i in 0..d {
            e[i * d + i] = ctx.one();
        }
        UMatrix { n: ctx.n(), e }
    }

    pub fn zero(ctx: &HermitianCtx) -> UMatrix {
        UMatrix {
            n: ctx.n(),
            e: vec![ctx.zero(); ctx.dim() * ctx.dim()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    #[inline]
    pub fn get(&self, i: i32, j: i32) -> RingElement {
        let d = self.dim();
        self.e[theta_pos(self.n, i) * d + theta_pos(self.n, j)]
    }

    #[inline]
    pub fn set(&mut self, i: i32, j: i32, x: RingElement) {
        let d = self.dim();
        let n = self.n;
        self.e[theta_pos(n, i) * d + theta_pos(n, j)] = x;
    }

    /// Adds x into entry (i, j); transvection builders accumulate terms.
    #[inline]
    pub fn madd(&mut self, ctx: &HermitianCtx, i: i32, j: i32, x: RingElement) {
        let d = self.dim();
        let p = theta_pos(self.n, i) * d + theta_pos(self.n, j);
        self.e[p] = ctx.add(self.e[p], x);
    }

    #[inline]
    pub fn get_pos(&self, r: usize, c: usize) -> RingElement {
        self.e[r * self.dim() + c]
    }

    pub fn entries(&self) -> &[RingElement] {
        &self.e
    }

    pub fn col(&self, j: i32) -> Vector {
        let d = self.dim();
        let jp = theta_pos(self.n, j);
        Vector {
            n: self.n,
            c: (0..d).map(|r| self.e[r * d + jp]).collect(),
        }
    }

    pub fn row(&self, i: i32) -> Vector {
        let d = self.dim();
        let ip = theta_pos(self.n, i);
        Vector {
            n: self.n,
            c: (0..d).map(|c| self.e[ip * d + c]).collect(),
        }
    }

    pub fn mul(&self, ctx: &HermitianCtx, rhs: &UMatrix) -> UMatrix {
        debug_assert_eq!(self.n, rhs.n);
        let d = self.dim();
        let mut out = vec![ctx.zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.e[r * d + k];
                if ctx.is_zero(a) {
                    continue;
                }
                for c in 0..d {
                    let p = r * d + c;
                    out[p] = ctx.add(out[p], ctx.mul(a, rhs.e[k * d + c]));
                }
            }
        }
        UMatrix { n: self.n, e: out }
    }

    /// Product of a list, left to right; identity on empty input.
    pub fn product(ctx: &HermitianCtx, ms: &[UMatrix]) -> UMatrix {
        ms.iter()
            .fold(UMatrix::identity(ctx), |acc, m| acc.mul(ctx, m))
    }

    pub fn mat_vec(&self, ctx: &HermitianCtx, v: &Vector) -> Vector {
        let d = self.dim();
        let mut out = vec![ctx.zero(); d];
        for r in 0..d {
            let mut acc = ctx.zero();
            for k in 0..d {
                acc = ctx.add(acc, ctx.mul(self.e[r * d + k], v.c[k]));
            }
            out[r] = acc;
        }
        Vector { n: self.n, c: out }
    }

    pub fn vec_mat(ctx: &HermitianCtx, row: &Vector, m: &UMatrix) -> Vector {
        let d = m.dim();
        let mut out = vec![ctx.zero(); d];
        for c in 0..d {
            let mut acc = ctx.zero();
            for k in 0..d {
                acc = ctx.add(acc, ctx.mul(row.c[k], m.e[k * d + c]));
            }
            out[c] = acc;
        }
        Vector { n: m.n, c: out }
    }

    /// Adds the outer product col * row, optionally scaled in the middle:
    /// self += col * scale * row.
    pub fn add_outer(
        &mut self,
        ctx: &HermitianCtx,
        col: &Vector,
        scale: RingElement,
        row: &Vector,
    ) {
        let d = self.dim();
        for r in 0..d {
            let a = ctx.mul(col.c[r], scale);
            if ctx.is_zero(a) {
                continue;
            }
            for c in 0..d {
                let p = r * d + c;
                self.e[p] = ctx.add(self.e[p], ctx.mul(a, row.c[c]));
            }
        }
    }

    pub fn is_identity(&self, ctx: &HermitianCtx) -> bool {
        *self == UMatrix::identity(ctx)
    }

    pub fn conjugate_by(&self, ctx: &HermitianCtx, g: &UMatrix, g_inv: &UMatrix) -> UMatrix {
        g.mul(ctx, self).mul(ctx, g_inv)
    }
}

/// Exact inverse over the finite commutative ring. Tries unit-pivot
/// Gauss-Jordan first (complete for fields and local rings) and falls back
/// to the adjugate with a division-free determinant.
pub fn minv(ctx: &HermitianCtx, m: &UMatrix) -> Result<UMatrix> {
    if let Some(inv) = gauss_jordan_inv(ctx, m) {
        return Ok(inv);
    }
    adjugate_inv(ctx, m)
}

fn gauss_jordan_inv(ctx: &HermitianCtx, m: &UMatrix) -> Option<UMatrix> {
    let d = m.dim();
    let mut a: Vec<RingElement> = m.e.clone();
    let mut b: Vec<RingElement> = UMatrix::identity(ctx).e;
    for col in 0..d {
        let piv = (col..d).find(|&r| ctx.is_unit(a[r * d + col]))?;
        if piv != col {
            for c in 0..d {
                a.swap(piv * d + c, col * d + c);
                b.swap(piv * d + c, col * d + c);
            }
        }
        let inv = ctx.inv(a[col * d + col]).expect("pivot is a unit");
        for c in 0..d {
            a[col * d + c] = ctx.mul(inv, a[col * d + c]);
            b[col * d + c] = ctx.mul(inv, b[col * d + c]);
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r * d + col];
            if ctx.is_zero(f) {
                continue;
            }
            for c in 0..d {
                a[r * d + c] = ctx.sub(a[r * d + c], ctx.mul(f, a[col * d + c]));
                b[r * d + c] = ctx.sub(b[r * d + c], ctx.mul(f, b[col * d + c]));
            }
        }
    }
    Some(UMatrix { n: m.n, e: b })
}

/// Division-free determinant of the square submatrix formed by `rows` and
/// all columns in `cols`, via Laplace expansion memoised over column masks.
fn det_masked(ctx: &HermitianCtx, m: &UMatrix, rows: &[usize], cols_mask: u16) -> RingElement {
    let d = m.dim();
    let k = rows.len();
    debug_assert_eq!(cols_mask.count_ones() as usize, k);
    // dp over submasks of cols_mask, expanding row by row
    let mut dp = vec![None::<RingElement>; 1 << d];
    dp[0] = Some(ctx.one());
    let mut order: Vec<u16> = (0..=cols_mask)
        .filter(|s| s & cols_mask == *s)
        .collect();
    order.sort_by_key(|s| s.count_ones());
    for &mask in &order {
        let r = mask.count_ones() as usize;
        if r == 0 || r > k {
            continue;
        }
        let row = rows[r - 1];
        let mut acc = ctx.zero();
        let mut sign_pos = true;
        let mut mm = mask;
        while mm != 0 {
            let c = mm.trailing_zeros() as usize;
            mm &= mm - 1;
            let sub = dp[(mask & !(1 << c)) as usize].expect("submask computed");
            let term = ctx.mul(m.e[row * d + c], sub);
            acc = if sign_pos {
                ctx.add(acc, term)
            } else {
                ctx.sub(acc, term)
            };
            sign_pos = !sign_pos;
        }
        // expansion along the last row of the block uses sign (-1)^{(r-1)+idx},
        // folded into the alternating accumulation above up to a global sign
        if (r - 1) % 2 == 1 {
            acc = ctx.neg(acc);
        }
        dp[mask as usize] = Some(acc);
    }
    dp[cols_mask as usize].expect("full mask computed")
}

pub fn det(ctx: &HermitianCtx, m: &UMatrix) -> RingElement {
    let d = m.dim();
    let rows: Vec<usize> = (0..d).collect();
    det_masked(ctx, m, &rows, ((1u32 << d) - 1) as u16)
}

fn adjugate_inv(ctx: &HermitianCtx, m: &UMatrix) -> Result<UMatrix> {
    let d = m.dim();
    let dv = det(ctx, m);
    let dinv = ctx.inv(dv).ok_or(Error::NotInvertible)?;
    let mut out = vec![ctx.zero(); d * d];
    let all_mask = ((1u32 << d) - 1) as u16;
    for i in 0..d {
        let rows: Vec<usize> = (0..d).filter(|&r| r != i).collect();
        for j in 0..d {
            let cofactor = det_masked(ctx, m, &rows, all_mask & !(1 << j));
            let v = if (i + j) % 2 == 0 {
                cofactor
            } else {
                ctx.neg(cofactor)
            };
            // adjugate transposes the cofactor matrix
            out[j * d + i] = ctx.mul(v, dinv);
        }
    }
    Ok(UMatrix { n: m.n, e: out })
}

/// The lambda-Hermitian form B(u, v).
pub fn form_b(ctx: &HermitianCtx, u: &Vector, v: &Vector) -> RingElement {
    let n = ctx.n() as i32;
    let mut acc = ctx.zero();
    for i in 1..=n {
        acc = ctx.add(acc, ctx.mul(ctx.bar(u.get(i)), v.get(-i)));
    }
    acc = ctx.add(acc, ctx.mul(ctx.mul(ctx.bar(u.get(0)), ctx.mu()), v.get(0)));
    for i in -n..=-1 {
        acc = ctx.add(
            acc,
            ctx.mul(ctx.mul(ctx.bar(u.get(i)), ctx.lambda()), v.get(-i)),
        );
    }
    acc
}

/// The quadratic map Q(u) = (u_0, sum over i>0 of bar(u_i) u_{-i}).
pub fn form_q(ctx: &HermitianCtx, u: &Vector) -> HeisElem {
    let n = ctx.n() as i32;
    let mut acc = ctx.zero();
    for i in 1..=n {
        acc = ctx.add(acc, ctx.mul(ctx.bar(u.get(i)), u.get(-i)));
    }
    HeisElem::new(u.get(0), acc)
}

/// The polarity map u -> u~; returns row-vector data in Theta order.
pub fn polarity(ctx: &HermitianCtx, u: &Vector) -> Vector {
    let n = ctx.n() as i32;
    let mut out = Vector::zero(ctx);
    for j in 1..=n {
        out.set(j, ctx.mul(ctx.bar(u.get(-j)), ctx.lambda()));
    }
    out.set(0, ctx.mul(ctx.bar(u.get(0)), ctx.mu()));
    for j in -n..=-1 {
        out.set(j, ctx.bar(u.get(-j)));
    }
    out
}

/// Short root transvection T_ij(x), i != +-j.
pub fn t_short(ctx: &HermitianCtx, i: i32, j: i32, x: RingElement) -> Result<UMatrix> {
    let n = ctx.n() as i32;
    if i == 0 || j == 0 || i == j || i == -j || i.abs() > n || j.abs() > n {
        return Err(Error::BadIndices(i, j));
    }
    let mut m = UMatrix::identity(ctx);
    m.madd(ctx, i, j, x);
    let l1 = ctx.lambda_power(((eps(j) - 1) / 2) as i64)?;
    let l2 = ctx.lambda_power(((1 - eps(i)) / 2) as i64)?;
    let dual = ctx.mul(ctx.mul(l1, ctx.bar(x)), l2);
    m.madd(ctx, -j, -i, ctx.neg(dual));
    Ok(m)
}

/// Extra short root transvection T_i(x, y); (x, y) must lie in the twisted
/// parameter Delta^{-eps(i)}.
pub fn t_extra(ctx: &HermitianCtx, delta: &FormParam, i: i32, a: HeisElem) -> Result<UMatrix> {
    let n = ctx.n() as i32;
    if i == 0 || i.abs() > n {
        return Err(Error::BadIndices(i, i));
    }
    debug_assert_eq!(delta.twist(), Twist::Pos);
    if !delta.contains_signed(ctx, a, Twist::from_sign(-eps(i))) {
        return Err(Error::NotInParameter);
    }
    let mut m = UMatrix::identity(ctx);
    m.madd(ctx, 0, -i, a.x);
    let l = ctx.lambda_power((-(1 + eps(i)) / 2) as i64)?;
    m.madd(
        ctx,
        i,
        0,
        ctx.neg(ctx.mul(ctx.mul(l, ctx.bar(a.x)), ctx.mu())),
    );
    m.madd(ctx, i, -i, a.y);
    Ok(m)
}

/// Long root transvection T_i(0, y) = e + y e^{i,-i}.
pub fn t_long(ctx: &HermitianCtx, delta: &FormParam, i: i32, y: RingElement) -> Result<UMatrix> {
    t_extra(ctx, delta, i, HeisElem::new(ctx.zero(), y))
}

/// ESD transvection T_{*j}(u, x): u supported away from j with entries in
/// the ideal of `p`, and Q(u)^{eps(j)} + (0, x) in Omega^{eps(j)}.
pub fn t_esd(
    ctx: &HermitianCtx,
    p: &OddFormIdeal,
    j: i32,
    u: &Vector,
    x: RingElement,
) -> Result<UMatrix> {
    let n = ctx.n() as i32;
    if j == 0 || j.abs() > n {
        return Err(Error::BadIndices(j, j));
    }
    if u.get(j) != ctx.zero() {
        return Err(Error::PreconditionViolated("esd requires u_j = 0"));
    }
    for i in theta_hb(ctx.n()) {
        if !p.ideal.contains(u.get(i)) {
            return Err(Error::PreconditionViolated(
                "esd requires hyperbolic entries of u in the ideal",
            ));
        }
    }
    let k = Twist::from_sign(eps(j));
    let q = twist_to(ctx, form_q(ctx, u), k);
    let arg = hplus(ctx, q, HeisElem::new(ctx.zero(), x), k);
    if !p.omega_contains_signed(ctx, arg, k) {
        return Err(Error::PreconditionViolated(
            "esd requires Q(u) + (0,x) in the twisted omega",
        ));
    }
    let mut m = UMatrix::identity(ctx);
    // + u e_j^t: column j gets u
    let ej = Vector::basis(ctx, j);
    m.add_outer(ctx, u, ctx.one(), &ej);
    // - e_{-j} lambda^{(eps(j)-1)/2} u~: row -j gets the scaled polarity
    let l = ctx.lambda_power(((eps(j) - 1) / 2) as i64)?;
    let emj = Vector::basis(ctx, -j);
    let tu = polarity(ctx, u);
    m.add_outer(ctx, &emj, ctx.neg(l), &tu);
    m.madd(ctx, -j, j, x);
    Ok(m)
}

/// The product form of the ESD transvection: short factors in Theta order
/// followed by the long corrective factor. Equal to [`t_esd`] on its whole
/// domain; kept separate so tests can compare the two routes.
pub fn esd_factorization(
    ctx: &HermitianCtx,
    delta: &FormParam,
    j: i32,
    u: &Vector,
    x: RingElement,
) -> Result<UMatrix> {
    let k = Twist::from_sign(eps(j));
    let mut acc = UMatrix::identity(ctx);
    for i in theta_hb(ctx.n()) {
        if i == j || i == -j {
            continue;
        }
        acc = acc.mul(ctx, &t_short(ctx, i, j, u.get(i))?);
    }
    let q = twist_to(ctx, form_q(ctx, u), k);
    let mut arg = hplus(ctx, q, HeisElem::new(ctx.zero(), x), k);
    let lam = ctx.lambda_power(eps(j) as i64)?;
    let tail = ctx.sub(u.get(-j), ctx.mul(lam, ctx.bar(u.get(-j))));
    arg = hplus(ctx, arg, HeisElem::new(ctx.zero(), tail), k);
    acc = acc.mul(ctx, &t_extra(ctx, delta, -j, arg)?);
    Ok(acc)
}

/// How the quadratic condition of the definitional membership test is
/// quantified: exhaustively when the module is small enough, else by
/// seeded sampling.
#[derive(Clone, Copy, Debug)]
pub struct QSampling {
    pub samples: u64,
    pub seed: u64,
}

impl Default for QSampling {
    fn default() -> Self {
        QSampling {
            samples: 4096,
            seed: 0,
        }
    }
}

const EXHAUSTIVE_VECTOR_LIMIT: u128 = 1 << 21;

fn module_size(ctx: &HermitianCtx) -> u128 {
    (ctx.size() as u128).pow(ctx.dim() as u32)
}

fn random_vector(ctx: &HermitianCtx, rng: &mut ChaCha8Rng) -> Vector {
    let mut v = Vector::zero(ctx);
    for i in theta(ctx.n()) {
        let idx = rng.gen_range(0..ctx.size());
        v.set(i, ctx.elem_from_index(idx).expect("index in range"));
    }
    v
}

fn vectors_exhaustive(ctx: &HermitianCtx) -> impl Iterator<Item = Vector> + '_ {
    let d = ctx.dim();
    let size = ctx.size();
    let total = (size as u128).pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut v = Vector::zero(ctx);
        for p in 0..d {
            let e = ctx.elem_from_index((idx % size as u128) as usize).unwrap();
            idx /= size as u128;
            let i = theta(ctx.n())[p];
            v.set(i, e);
        }
        v
    })
}

/// Definitional membership: exact B-preservation on all basis pairs plus
/// the Q-congruence over the whole module (or a seeded sample of it).
pub fn is_unitary_def(
    ctx: &HermitianCtx,
    delta: &FormParam,
    m: &UMatrix,
    sampling: QSampling,
) -> Result<bool> {
    minv(ctx, m)?;
    let idx = theta(ctx.n());
    for &i in &idx {
        let ei = Vector::basis(ctx, i);
        let ci = m.col(i);
        for &j in &idx {
            let ej = Vector::basis(ctx, j);
            let cj = m.col(j);
            if form_b(ctx, &ci, &cj) != form_b(ctx, &ei, &ej) {
                return Ok(false);
            }
        }
    }
    let q_ok = |u: &Vector| {
        let d = hsub(ctx, form_q(ctx, &m.mat_vec(ctx, u)), form_q(ctx, u), Twist::Pos);
        delta.contains(d)
    };
    if module_size(ctx) <= EXHAUSTIVE_VECTOR_LIMIT {
        Ok(vectors_exhaustive(ctx).all(|u| q_ok(&u)))
    } else {
        let mut rng = seed_rng(sampling.seed, "is_unitary_def", 0);
        Ok((0..sampling.samples).all(|_| q_ok(&random_vector(ctx, &mut rng))))
    }
}

/// Finite membership criterion: entry identities between the inverse and
/// the bar-transpose, plus the Q-column congruences.
pub fn is_unitary_l36(ctx: &HermitianCtx, delta: &FormParam, m: &UMatrix) -> Result<bool> {
    let inv = minv(ctx, m)?;
    Ok(l36_conditions(ctx, delta, m, &inv))
}

pub(crate) fn l36_conditions(
    ctx: &HermitianCtx,
    delta: &FormParam,
    m: &UMatrix,
    inv: &UMatrix,
) -> bool {
    let hb = theta_hb(ctx.n());
    let lp = |e: i32| ctx.lambda_power(e as i64).expect("epsilon exponent");
    for &i in &hb {
        for &j in &hb {
            let lhs = inv.get(i, j);
            let rhs = ctx.mul(
                ctx.mul(lp(-(eps(i) + 1) / 2), ctx.bar(m.get(-j, -i))),
                lp((eps(j) + 1) / 2),
            );
            if lhs != rhs {
                return false;
            }
        }
    }
    for &j in &hb {
        let lhs = ctx.mul(ctx.mu(), inv.get(0, j));
        let rhs = ctx.mul(ctx.bar(m.get(-j, 0)), lp((eps(j) + 1) / 2));
        if lhs != rhs {
            return false;
        }
    }
    for &i in &hb {
        let lhs = inv.get(i, 0);
        let rhs = ctx.mul(
            ctx.mul(lp(-(eps(i) + 1) / 2), ctx.bar(m.get(0, -i))),
            ctx.mu(),
        );
        if lhs != rhs {
            return false;
        }
    }
    if ctx.mul(ctx.mu(), inv.get(0, 0)) != ctx.mul(ctx.bar(m.get(0, 0)), ctx.mu()) {
        return false;
    }
    for &j in &theta(ctx.n()) {
        let target = if j == 0 {
            HeisElem::new(ctx.one(), ctx.zero())
        } else {
            hzero(ctx)
        };
        let d = hsub(ctx, form_q(ctx, &m.col(j)), target, Twist::Pos);
        if !delta.contains(d) {
            return false;
        }
    }
    true
}

/// Checks the closed form for conjugating an ESD transvection T_{*j}(u) by
/// a unitary matrix against the honest triple product.
pub fn conjugate_esd_formula_check(
    ctx: &HermitianCtx,
    p: &OddFormIdeal,
    s: &UMatrix,
    j: i32,
    u: &Vector,
) -> Result<bool> {
    let t = t_esd(ctx, p, j, u, ctx.zero())?;
    let s_inv = minv(ctx, s)?;
    let lhs = s.mul(ctx, &t).mul(ctx, &s_inv);

    let su = s.mat_vec(ctx, u);
    let mut rhs = UMatrix::identity(ctx);
    let l1 = ctx.lambda_power(((-eps(j) - 1) / 2) as i64)?;
    rhs.add_outer(ctx, &su, l1, &polarity(ctx, &s.col(-j)));
    let l2 = ctx.lambda_power(((eps(j) - 1) / 2) as i64)?;
    rhs.add_outer(ctx, &s.col(-j), ctx.neg(l2), &polarity(ctx, &su));
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formideal::{full_off, zero_off, Ideal};
    use crate::heisenberg::{delta_max, delta_min, hminus, trace};
    use crate::ring::contexts::*;

    fn el(ctx: &HermitianCtx, s: &str) -> RingElement {
        ctx.parse_elem(s).unwrap()
    }

    #[test]
    fn theta_layout() {
        assert_eq!(theta(3), [1, 2, 3, 0, -3, -2, -1]);
        assert_eq!(theta_hb(3), [1, 2, 3, -3, -2, -1]);
        assert_eq!(theta_pos(3, 1), 0);
        assert_eq!(theta_pos(3, 0), 3);
        assert_eq!(theta_pos(3, -3), 4);
        assert_eq!(theta_pos(3, -1), 6);
        assert_eq!(theta(4).len(), 9);
    }

    #[test]
    fn form_values() {
        let f2 = f2(3);
        let e1 = Vector::basis(&f2, 1);
        let em1 = Vector::basis(&f2, -1);
        let e0 = Vector::basis(&f2, 0);
        assert_eq!(form_b(&f2, &e1, &em1), f2.one());
        assert_eq!(form_b(&f2, &e0, &e0), f2.mu());
        assert_eq!(form_q(&f2, &e0), HeisElem::new(f2.one(), f2.zero()));
        let v = e1.add(&f2, &em1);
        assert_eq!(form_q(&f2, &v), HeisElem::new(f2.zero(), f2.one()));
    }

    #[test]
    fn form_identities_exhaustive_f2() {
        let ctx = f2(3);
        let dmin = delta_min(&ctx);
        let all: Vec<Vector> = vectors_exhaustive(&ctx).collect();
        for u in &all {
            assert_eq!(trace(&ctx, form_q(&ctx, u), Twist::Pos), form_b(&ctx, u, u));
            for v in &all {
                // hermitian symmetry
                assert_eq!(
                    form_b(&ctx, u, v),
                    ctx.mul(ctx.bar(form_b(&ctx, v, u)), ctx.lambda())
                );
                // Q(u+v) = Q(u) + Q(v) + (0, B(u,v)) mod delta_min
                let lhs = form_q(&ctx, &u.add(&ctx, v));
                let rhs = hplus(
                    &ctx,
                    hplus(&ctx, form_q(&ctx, u), form_q(&ctx, v), Twist::Pos),
                    HeisElem::new(ctx.zero(), form_b(&ctx, u, v)),
                    Twist::Pos,
                );
                assert!(dmin.contains(hsub(&ctx, lhs, rhs, Twist::Pos)));
                // polarity pairing: B(u, v) = u~ . v
                let prod = polarity(&ctx, u)
                    .coords()
                    .iter()
                    .zip(v.coords())
                    .fold(ctx.zero(), |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)));
                assert_eq!(prod, form_b(&ctx, u, v));
            }
        }
    }

    #[test]
    fn scaling_laws_sampled() {
        for ctx in [z4(3), g3(3), z4_lambda3(3)] {
            let mut rng = seed_rng(7, "unitary scaling", 0);
            for _ in 0..200 {
                let u = random_vector(&ctx, &mut rng);
                let v = random_vector(&ctx, &mut rng);
                let x = ctx.elem_from_index(rng.gen_range(0..ctx.size())).unwrap();
                let y = ctx.elem_from_index(rng.gen_range(0..ctx.size())).unwrap();
                assert_eq!(
                    form_b(&ctx, &u.scale(&ctx, x), &v.scale(&ctx, y)),
                    ctx.mul(ctx.mul(ctx.bar(x), form_b(&ctx, &u, &v)), y)
                );
                assert_eq!(
                    form_q(&ctx, &u.scale(&ctx, x)),
                    crate::heisenberg::hcirc(&ctx, form_q(&ctx, &u), x)
                );
                // involutary linearity of polarity
                assert_eq!(
                    polarity(&ctx, &u.add(&ctx, &v)),
                    polarity(&ctx, &u).add(&ctx, &polarity(&ctx, &v))
                );
                assert_eq!(
                    polarity(&ctx, &u.scale(&ctx, x)),
                    polarity(&ctx, &u).scale(&ctx, ctx.zero()).add(&ctx, &{
                        let mut w = polarity(&ctx, &u);
                        w = Vector {
                            n: w.n,
                            c: w.c.iter().map(|&a| ctx.mul(ctx.bar(x), a)).collect(),
                        };
                        w
                    })
                );
            }
        }
    }

    #[test]
    fn polarity_basis_example() {
        let f2 = f2(3);
        let p = polarity(&f2, &Vector::basis(&f2, 1));
        for i in theta(3) {
            let expect = if i == -1 { f2.one() } else { f2.zero() };
            assert_eq!(p.get(i), expect);
        }
    }

    #[test]
    fn short_transvection_shapes() {
        let z4 = z4(3);
        assert!(t_short(&z4, 1, 2, z4.zero()).unwrap().is_identity(&z4));
        let t = t_short(&z4, 1, 2, z4.one()).unwrap();
        assert_eq!(t.get(1, 2), z4.one());
        assert_eq!(t.get(-2, -1), el(&z4, "3"));
        let t = t_short(&z4, 1, -2, el(&z4, "3")).unwrap();
        assert_eq!(t.get(1, -2), el(&z4, "3"));
        // -lambda^{-1} * bar(3) with lambda = 1
        assert_eq!(t.get(2, -1), el(&z4, "1"));
        assert!(t_short(&z4, 1, 1, z4.one()).is_err());
        assert!(t_short(&z4, 1, -1, z4.one()).is_err());
        // lambda = 3 variant picks up the symmetry factor
        let zl = z4_lambda3(3);
        let t = t_short(&zl, 1, -2, el(&zl, "1")).unwrap();
        assert_eq!(t.get(2, -1), ctx_neg_lambda_inv(&zl));
    }

    fn ctx_neg_lambda_inv(ctx: &HermitianCtx) -> RingElement {
        ctx.neg(ctx.lambda_inv())
    }

    #[test]
    fn extra_transvection_membership_gate() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let dmin = delta_min(&f2);
        let a = HeisElem::new(f2.zero(), f2.one());
        let t = t_extra(&f2, &dmax, 1, a).unwrap();
        assert_eq!(t.get(1, -1), f2.one());
        assert_eq!(t_extra(&f2, &dmin, 1, a).err(), Some(Error::NotInParameter));
        assert!(t_extra(&f2, &dmax, 1, hzero(&f2)).unwrap().is_identity(&f2));
    }

    #[test]
    fn inverse_roundtrips() {
        let z4 = z4(3);
        let id = UMatrix::identity(&z4);
        assert_eq!(minv(&z4, &id).unwrap(), id);
        let t = t_short(&z4, 1, 2, el(&z4, "3")).unwrap();
        assert_eq!(minv(&z4, &t).unwrap(), t_short(&z4, 1, 2, el(&z4, "1")).unwrap());
        // random products of transvections invert exactly
        let dmax = delta_max(&z4);
        let mut rng = seed_rng(11, "minv", 0);
        for _ in 0..25 {
            let m = random_product(&z4, &dmax, 5, &mut rng);
            let inv = minv(&z4, &m).unwrap();
            assert!(m.mul(&z4, &inv).is_identity(&z4));
            assert!(inv.mul(&z4, &m).is_identity(&z4));
        }
        let g3 = g3(3);
        let dmax3 = delta_max(&g3);
        for _ in 0..10 {
            let m = random_product(&g3, &dmax3, 4, &mut rng);
            let inv = minv(&g3, &m).unwrap();
            assert!(m.mul(&g3, &inv).is_identity(&g3));
        }
        // singular matrix
        assert_eq!(minv(&z4, &UMatrix::zero(&z4)).err(), Some(Error::NotInvertible));
    }

    #[test]
    fn determinant_against_gauss() {
        let z4 = z4(3);
        let dmax = delta_max(&z4);
        let mut rng = seed_rng(5, "det", 0);
        for _ in 0..10 {
            let m = random_product(&z4, &dmax, 4, &mut rng);
            // transvection products are unimodular up to units; check both
            // inversion routes agree
            let a = adjugate_inv(&z4, &m).unwrap();
            let g = gauss_jordan_inv(&z4, &m).unwrap();
            assert_eq!(a, g);
        }
    }

    // independent oracle: naive Laplace expansion along the first row
    fn det_naive(ctx: &HermitianCtx, rows: &[Vec<RingElement>]) -> RingElement {
        let d = rows.len();
        if d == 1 {
            return rows[0][0];
        }
        let mut acc = ctx.zero();
        for c in 0..d {
            let minor: Vec<Vec<RingElement>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != c)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let term = ctx.mul(rows[0][c], det_naive(ctx, &minor));
            acc = if c % 2 == 0 {
                ctx.add(acc, term)
            } else {
                ctx.sub(acc, term)
            };
        }
        acc
    }

    #[test]
    fn determinant_against_naive_laplace() {
        for ctx in [z4(3), g3(3)] {
            let mut rng = seed_rng(13, "det naive", 0);
            assert_eq!(det(&ctx, &UMatrix::identity(&ctx)), ctx.one());
            for _ in 0..6 {
                // arbitrary (not necessarily invertible) matrices
                let d = ctx.dim();
                let mut m = UMatrix::zero(&ctx);
                let mut rows = vec![vec![ctx.zero(); d]; d];
                for r in 0..d {
                    for c in 0..d {
                        let e = ctx.elem_from_index(rng.gen_range(0..ctx.size())).unwrap();
                        rows[r][c] = e;
                        let (i, j) = (theta(ctx.n())[r], theta(ctx.n())[c]);
                        m.set(i, j, e);
                    }
                }
                assert_eq!(det(&ctx, &m), det_naive(&ctx, &rows));
            }
        }
    }

    pub(super) fn random_product(
        ctx: &HermitianCtx,
        delta: &FormParam,
        len: usize,
        rng: &mut ChaCha8Rng,
    ) -> UMatrix {
        let gens = crate::subgroup::eu_generators(ctx, delta, &full_off(ctx, delta));
        let mut m = UMatrix::identity(ctx);
        for _ in 0..len {
            m = m.mul(ctx, &gens[rng.gen_range(0..gens.len())]);
        }
        m
    }

    #[test]
    fn membership_predicates_examples() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let dmin = delta_min(&f2);
        let id = UMatrix::identity(&f2);
        assert!(is_unitary_def(&f2, &dmax, &id, QSampling::default()).unwrap());
        assert!(is_unitary_l36(&f2, &dmax, &id).unwrap());

        let long = t_extra(&f2, &dmax, 1, HeisElem::new(f2.zero(), f2.one())).unwrap();
        assert!(is_unitary_def(&f2, &dmax, &long, QSampling::default()).unwrap());
        assert!(is_unitary_l36(&f2, &dmax, &long).unwrap());
        assert!(!is_unitary_def(&f2, &dmin, &long, QSampling::default()).unwrap());
        assert!(!is_unitary_l36(&f2, &dmin, &long).unwrap());
    }

    #[test]
    fn esd_matches_short_transvection() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let p = full_off(&f2, &dmax);
        let u = Vector::basis(&f2, 2);
        let t = t_esd(&f2, &p, 1, &u, f2.zero()).unwrap();
        assert_eq!(t, t_short(&f2, 2, 1, f2.one()).unwrap());
        assert!(t_esd(&f2, &p, 1, &Vector::zero(&f2), f2.zero())
            .unwrap()
            .is_identity(&f2));
        // u_j must vanish
        assert!(t_esd(&f2, &p, 2, &u, f2.zero()).is_err());
        // level gate: zero ideal rejects nonzero u
        let z = zero_off(&f2);
        assert!(t_esd(&f2, &z, 1, &u, f2.zero()).is_err());
        let _ = Ideal::zero(&f2);
    }

    #[test]
    fn esd_factorization_rank4() {
        let ctx = f2(4);
        let dmax = delta_max(&ctx);
        let p = full_off(&ctx, &dmax);
        let mut rng = seed_rng(19, "esd n4", 0);
        let mut checked = 0;
        for _ in 0..200 {
            let j = theta_hb(4)[rng.gen_range(0..8)];
            let mut u = Vector::zero(&ctx);
            for i in theta(4) {
                u.set(i, ctx.elem_from_index(rng.gen_range(0..2)).unwrap());
            }
            u.set(j, ctx.zero());
            let x = ctx.elem_from_index(rng.gen_range(0..2)).unwrap();
            let direct = match t_esd(&ctx, &p, j, &u, x) {
                Ok(t) => t,
                Err(_) => continue,
            };
            assert_eq!(direct, esd_factorization(&ctx, &dmax, j, &u, x).unwrap());
            assert!(is_unitary_l36(&ctx, &dmax, &direct).unwrap());
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn esd_inverse_is_negated_vector() {
        let f2 = f2(3);
        let dmax = delta_max(&f2);
        let p = full_off(&f2, &dmax);
        for j in theta_hb(3) {
            for u in vectors_exhaustive(&f2) {
                let mut u = u;
                u.set(j, f2.zero());
                if t_esd(&f2, &p, j, &u, f2.zero()).is_err() {
                    continue;
                }
                let t = t_esd(&f2, &p, j, &u, f2.zero()).unwrap();
                let tinv = minv(&f2, &t).unwrap();
                assert_eq!(tinv, t_esd(&f2, &p, j, &u.neg(&f2), f2.zero()).unwrap());
            }
        }
    }

    #[test]
    fn conjugate_esd_closed_form_z4() {
        let z4 = z4(3);
        let dmax = delta_max(&z4);
        let p = full_off(&z4, &dmax);
        let mut rng = seed_rng(17, "esd conj z4", 0);
        let mut checked = 0;
        for _ in 0..40 {
            let sigma = random_product(&z4, &dmax, 4, &mut rng);
            let j = theta_hb(3)[rng.gen_range(0..6)];
            let mut u = Vector::zero(&z4);
            for i in theta(3) {
                u.set(i, z4.elem_from_index(rng.gen_range(0..4)).unwrap());
            }
            u.set(j, z4.zero());
            if t_esd(&z4, &p, j, &u, z4.zero()).is_err() {
                continue;
            }
            assert!(conjugate_esd_formula_check(&z4, &p, &sigma, j, &u).unwrap());
            checked += 1;
        }
        assert!(checked > 5);
    }

    #[test]
    fn q_columns_of_transvections_land_in_omega_min() {
        // spot-check that constructors emit unitary matrices over all stock contexts
        for ctx in [f2(3), z4(3), g3(3), z4_lambda3(3)] {
            let dmax = delta_max(&ctx);
            let mut rng = seed_rng(3, "ctor unitary", 0);
            for _ in 0..10 {
                let m = random_product(&ctx, &dmax, 3, &mut rng);
                assert!(is_unitary_l36(&ctx, &dmax, &m).unwrap());
            }
        }
    }

    #[test]
    fn hminus_vs_inverse_transvection() {
        // T_i(a)^{-1} = T_i(hminus(a)) in the twisted structure
        let z4 = z4(3);
        let dmax = delta_max(&z4);
        for i in theta_hb(3) {
            let k = Twist::from_sign(-eps(i));
            let tw = twist_param(&z4, &dmax);
            let pool: Vec<HeisElem> = if k == Twist::Pos {
                dmax.iter().collect()
            } else {
                tw.iter().collect()
            };
            for a in pool {
                let t = t_extra(&z4, &dmax, i, a).unwrap();
                let ti = minv(&z4, &t).unwrap();
                assert_eq!(ti, t_extra(&z4, &dmax, i, hminus(&z4, a, k)).unwrap());
            }
        }
    }

    use crate::heisenberg::twist_param;
}
