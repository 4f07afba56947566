//! Bit-packed matrices over the two-element ring: the whole matrix lives in
//! one u128 (49 bits at n = 3, 81 bits at n = 4), row-major, one bit per
//! entry. This is the hot representation behind the subgroup closure engine.

use crate::error::{Error, Result};
use crate::ring::HermitianCtx;
use crate::unitary::UMatrix;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Gf2Mat {
    dim: u8,
    bits: u128,
}

impl Gf2Mat {
    pub fn identity(dim: usize) -> Gf2Mat {
        debug_assert!(dim * dim <= 128);
        let mut bits = 0u128;
        for i in 0..dim {
            bits |= 1u128 << (i * dim + i);
        }
        Gf2Mat {
            dim: dim as u8,
            bits,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// The packed key; rows concatenated little-endian.
    pub fn key(&self) -> u128 {
        self.bits
    }

    pub fn from_key(dim: usize, bits: u128) -> Gf2Mat {
        Gf2Mat {
            dim: dim as u8,
            bits,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> u16 {
        let d = self.dim as usize;
        ((self.bits >> (i * d)) & ((1u128 << d) - 1)) as u16
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        let d = self.dim as usize;
        (self.bits >> (r * d + c)) & 1 == 1
    }

    pub fn mul(&self, rhs: &Gf2Mat) -> Gf2Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim as usize;
        let mut rows = [0u16; 16];
        for k in 0..d {
            rows[k] = rhs.row(k);
        }
        let mut bits = 0u128;
        for i in 0..d {
            let mut a = self.row(i);
            let mut acc = 0u16;
            while a != 0 {
                let k = a.trailing_zeros() as usize;
                a &= a - 1;
                acc ^= rows[k];
            }
            bits |= (acc as u128) << (i * d);
        }
        Gf2Mat {
            dim: self.dim,
            bits,
        }
    }

    /// Gauss-Jordan inverse; None when singular.
    pub fn inv(&self) -> Option<Gf2Mat> {
        let d = self.dim as usize;
        // each row holds [A | I] in the low 2d bits
        let mut rows = [0u32; 16];
        for i in 0..d {
            rows[i] = self.row(i) as u32 | (1u32 << (d + i));
        }
        for col in 0..d {
            let piv = (col..d).find(|&r| rows[r] >> col & 1 == 1)?;
            rows.swap(piv, col);
            for r in 0..d {
                if r != col && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[col];
                }
            }
        }
        let mut bits = 0u128;
        for i in 0..d {
            bits |= ((rows[i] >> d) as u128 & ((1u128 << d) - 1)) << (i * d);
        }
        Some(Gf2Mat {
            dim: self.dim,
            bits,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Gf2Mat::identity(self.dim as usize)
    }

    /// Packs a dense matrix; the context must be the two-element ring, where
    /// element indices coincide with the residues 0 and 1.
    pub fn pack(ctx: &HermitianCtx, m: &UMatrix) -> Result<Gf2Mat> {
        if ctx.size() != 2 {
            return Err(Error::UnsupportedRing);
        }
        let d = ctx.dim();
        let mut bits = 0u128;
        for r in 0..d {
            for c in 0..d {
                if m.get_pos(r, c) == ctx.one() {
                    bits |= 1u128 << (r * d + c);
                }
            }
        }
        Ok(Gf2Mat {
            dim: d as u8,
            bits,
        })
    }

    pub fn unpack(&self, ctx: &HermitianCtx) -> UMatrix {
        debug_assert_eq!(ctx.dim(), self.dim as usize);
        let d = self.dim as usize;
        let mut m = UMatrix::zero(ctx);
        for r in 0..d {
            for c in 0..d {
                if self.get(r, c) {
                    let i = crate::unitary::theta(ctx.n())[r];
                    let j = crate::unitary::theta(ctx.n())[c];
                    m.set(i, j, ctx.one());
                }
            }
        }
        m
    }
}
