//! Exact half-integer bookkeeping and the angular-momentum operators of one
//! irreducible representation.
//!
//! Basis ordering is `m = l, l-1, ..., -l`, so index 0 is the highest weight
//! and the spin-1/2 matrices come out as the familiar Pauli matrices over two.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMat, ComplexVec};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Both values differ by an integer.
    pub fn same_parity(self, other: HalfInt) -> bool {
        (self.twice - other.twice) % 2 == 0
    }

    pub fn abs(self) -> HalfInt {
        HalfInt::from_twice(self.twice.abs())
    }

    /// `self - other` when that difference is an integer.
    pub fn int_diff(self, other: HalfInt) -> Option<i32> {
        let d = self.twice - other.twice;
        (d % 2 == 0).then_some(d / 2)
    }

    /// Dimension `2l + 1` of the representation labelled by `self`.
    pub fn dim(self) -> usize {
        debug_assert!(self.twice >= 0);
        (self.twice + 1) as usize
    }

    /// Projections `m = l, l-1, ..., -l`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + ExactSizeIterator {
        let l = self.twice;
        (0..(l + 1).max(0)).map(move |k| HalfInt::from_twice(l - 2 * k))
    }

    /// Position of `m` in the descending basis of `self`.
    pub fn index_of(self, m: HalfInt) -> Option<usize> {
        if m.twice.abs() > self.twice || !self.same_parity(m) {
            return None;
        }
        Some(((self.twice - m.twice) / 2) as usize)
    }

    pub(crate) fn check_ell(self) -> Result<()> {
        if self.twice < 0 {
            return Err(Error::qn(format!("l = {self} is negative")));
        }
        Ok(())
    }

    pub(crate) fn check_projection(self, m: HalfInt) -> Result<()> {
        self.check_ell()?;
        match self.index_of(m) {
            Some(_) => Ok(()),
            None => Err(Error::ell_mismatch("projection", self, m)),
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"2"` and decimal forms such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidHalfInt(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(HalfInt::from_int(num)),
                "2" => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt::from_int(n));
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * x;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > 1e9 {
            return Err(bad());
        }
        Ok(HalfInt::from_twice(twice.round() as i32))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

/// A state of angular momentum `l`, amplitudes ordered `m = l, ..., -l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    ell: HalfInt,
    amplitudes: ComplexVec,
    raw: bool,
}

impl Ket {
    /// Normalizes `amplitudes`.
    pub fn normalized(ell: HalfInt, amplitudes: ComplexVec) -> Result<Ket> {
        Self::check_len(ell, &amplitudes)?;
        Ok(Ket {
            ell,
            amplitudes: amplitudes.normalized()?,
            raw: false,
        })
    }

    /// Keeps `amplitudes` as given.
    pub fn raw(ell: HalfInt, amplitudes: ComplexVec) -> Result<Ket> {
        Self::check_len(ell, &amplitudes)?;
        Ok(Ket {
            ell,
            amplitudes,
            raw: true,
        })
    }

    fn check_len(ell: HalfInt, amplitudes: &ComplexVec) -> Result<()> {
        ell.check_ell()?;
        if amplitudes.len() != ell.dim() {
            return Err(Error::DimensionMismatch {
                expected: ell.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(())
    }

    /// `|l, m>`.
    pub fn basis(ell: HalfInt, m: HalfInt) -> Result<Ket> {
        ell.check_projection(m)?;
        let i = ell.index_of(m).expect("checked");
        Ok(Ket {
            ell,
            amplitudes: ComplexVec::basis(ell.dim(), i),
            raw: false,
        })
    }

    pub fn ell(&self) -> HalfInt {
        self.ell
    }

    pub fn is_raw(&self) -> bool {
        self.raw
    }

    pub fn amplitudes(&self) -> &ComplexVec {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVec {
        self.amplitudes
    }

    pub fn amplitude(&self, m: HalfInt) -> Option<Complex64> {
        self.ell.index_of(m).map(|i| self.amplitudes[i])
    }

    /// `(m, amplitude)` pairs in basis order.
    pub fn components(&self) -> impl Iterator<Item = (HalfInt, Complex64)> + '_ {
        self.ell.projections().zip(self.amplitudes.iter().copied())
    }

    pub fn with_fixed_phase(&self) -> Ket {
        Ket {
            ell: self.ell,
            amplitudes: self.amplitudes.with_fixed_phase(),
            raw: self.raw,
        }
    }

    /// `|<self|other>|`; both kets must share `l`.
    pub fn fidelity(&self, other: &Ket) -> f64 {
        assert_eq!(self.ell, other.ell, "fidelity between different l");
        self.amplitudes.fidelity(&other.amplitudes)
    }
}

/// A dense operator on the `2l+1` dimensional irrep.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    ell: HalfInt,
    mat: ComplexMat,
}

impl OperatorMatrix {
    pub fn new(ell: HalfInt, mat: ComplexMat) -> Result<Self> {
        ell.check_ell()?;
        if mat.rows() != ell.dim() || mat.cols() != ell.dim() {
            return Err(Error::DimensionMismatch {
                expected: ell.dim(),
                found: mat.rows(),
            });
        }
        Ok(OperatorMatrix { ell, mat })
    }

    pub fn ell(&self) -> HalfInt {
        self.ell
    }

    pub fn mat(&self) -> &ComplexMat {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMat {
        self.mat
    }

    pub fn apply(&self, ket: &Ket) -> Result<ComplexVec> {
        if ket.ell() != self.ell {
            return Err(Error::DimensionMismatch {
                expected: self.ell.dim(),
                found: ket.ell().dim(),
            });
        }
        self.mat.matvec(ket.amplitudes())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &OperatorMatrix, b: Complex64) -> OperatorMatrix {
        assert_eq!(self.ell, other.ell);
        OperatorMatrix {
            ell: self.ell,
            mat: &self.mat.scale(a) + &other.mat.scale(b),
        }
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.ell, other.ell);
        OperatorMatrix {
            ell: self.ell,
            mat: self.mat.matmul(&other.mat).expect("same dimension"),
        }
    }
}

fn ladder(ell: HalfInt, raising: bool) -> OperatorMatrix {
    let n = ell.dim();
    let l = ell.value();
    let mut mat = ComplexMat::zeros(n, n);
    for (j, m) in ell.projections().enumerate() {
        let m = m.value();
        if raising && j > 0 {
            // <l, m+1| L+ |l, m> = sqrt((l - m)(l + m + 1))
            mat[(j - 1, j)] = Complex64::new(((l - m) * (l + m + 1.0)).sqrt(), 0.0);
        }
        if !raising && j + 1 < n {
            // <l, m-1| L- |l, m> = sqrt((l + m)(l - m + 1))
            mat[(j + 1, j)] = Complex64::new(((l + m) * (l - m + 1.0)).sqrt(), 0.0);
        }
    }
    OperatorMatrix { ell, mat }
}

/// `L_z = diag(l, l-1, ..., -l)`.
pub fn op_lz(ell: HalfInt) -> OperatorMatrix {
    let n = ell.dim();
    let mut mat = ComplexMat::zeros(n, n);
    for (i, m) in ell.projections().enumerate() {
        mat[(i, i)] = Complex64::new(m.value(), 0.0);
    }
    OperatorMatrix { ell, mat }
}

pub fn op_lplus(ell: HalfInt) -> OperatorMatrix {
    ladder(ell, true)
}

pub fn op_lminus(ell: HalfInt) -> OperatorMatrix {
    ladder(ell, false)
}

/// `L_x = (L_+ + L_-) / 2`.
pub fn op_lx(ell: HalfInt) -> OperatorMatrix {
    let half = Complex64::new(0.5, 0.0);
    op_lplus(ell).combine(half, &op_lminus(ell), half)
}

/// `L_y = (L_+ - L_-) / 2i`.
pub fn op_ly(ell: HalfInt) -> OperatorMatrix {
    let c = Complex64::new(0.0, -0.5);
    op_lplus(ell).combine(c, &op_lminus(ell), -c)
}

/// `cx * L_x + cy * L_y`.
pub fn op_linear(ell: HalfInt, cx: Complex64, cy: Complex64) -> OperatorMatrix {
    op_lx(ell).combine(cx, &op_ly(ell), cy)
}

/// The non-hermitian `L_x - i alpha L_y` whose eigenstates are intelligent.
pub fn shifted_op(ell: HalfInt, alpha: f64) -> OperatorMatrix {
    op_linear(ell, Complex64::new(1.0, 0.0), Complex64::new(0.0, -alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &ComplexMat, b: &ComplexMat) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), h(3));
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), h(3));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), h(-1));
        assert_eq!("2".parse::<HalfInt>().unwrap(), h(4));
        assert_eq!("4/2".parse::<HalfInt>().unwrap(), h(4));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.25".parse::<HalfInt>().is_err());
        assert!("x".parse::<HalfInt>().is_err());
        assert_eq!(h(5).to_string(), "5/2");
        assert_eq!(h(-3).to_string(), "-3/2");
        assert_eq!(h(6).to_string(), "3");
    }

    #[test]
    fn projections_descend() {
        let ms: Vec<_> = h(3).projections().map(|m| m.twice()).collect();
        assert_eq!(ms, vec![3, 1, -1, -3]);
        assert_eq!(h(0).projections().count(), 1);
        assert_eq!(h(3).index_of(h(-1)), Some(2));
        assert_eq!(h(3).index_of(h(0)), None);
        assert_eq!(h(3).index_of(h(5)), None);
    }

    #[test]
    fn lz_examples() {
        let lz = op_lz(h(1));
        assert_eq!(lz.mat()[(0, 0)], c(0.5, 0.0));
        assert_eq!(lz.mat()[(1, 1)], c(-0.5, 0.0));
        assert_eq!(op_lz(h(0)).mat(), &ComplexMat::zeros(1, 1));
        let lz1 = op_lz(h(2));
        let diag: Vec<f64> = (0..3).map(|i| lz1.mat()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let lx = op_lx(h(1));
        let ly = op_ly(h(1));
        let px = ComplexMat::new(2, 2, vec![c(0., 0.), c(0.5, 0.), c(0.5, 0.), c(0., 0.)]).unwrap();
        let py = ComplexMat::new(2, 2, vec![c(0., 0.), c(0., -0.5), c(0., 0.5), c(0., 0.)]).unwrap();
        assert!(max_diff(lx.mat(), &px) < 1e-16);
        assert!(max_diff(ly.mat(), &py) < 1e-16);
    }

    #[test]
    fn shifted_op_spin_half_entries() {
        let alpha = 0.37;
        let m = shifted_op(h(1), alpha);
        assert!((m.mat()[(0, 1)] - c((1.0 - alpha) / 2.0, 0.0)).norm() < 1e-16);
        assert!((m.mat()[(1, 0)] - c((1.0 + alpha) / 2.0, 0.0)).norm() < 1e-16);
        let m = shifted_op(h(1), 0.6);
        assert!((m.mat()[(0, 1)].re - 0.2).abs() < 1e-15);
        assert!((m.mat()[(1, 0)].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn shifted_op_limits() {
        for twice in 0..8 {
            let l = h(twice);
            assert!(max_diff(shifted_op(l, 0.0).mat(), op_lx(l).mat()) < 1e-15);
            assert!(max_diff(shifted_op(l, 1.0).mat(), op_lminus(l).mat()) < 1e-14);
            assert!(max_diff(shifted_op(l, -1.0).mat(), op_lplus(l).mat()) < 1e-14);
        }
    }

    #[test]
    fn shifted_op_is_nilpotent_at_unit_alpha() {
        for twice in 1..=16 {
            let l = h(twice);
            for alpha in [1.0, -1.0] {
                let p = shifted_op(l, alpha).mat().pow(twice as u32 + 1).unwrap();
                assert!(p.max_abs() <= 1e-10, "l={l} alpha={alpha}: {}", p.max_abs());
            }
        }
    }

    #[test]
    fn ladder_entries_are_real_nonnegative() {
        for twice in 0..12 {
            for op in [op_lplus(h(twice)), op_lminus(h(twice))] {
                let m = op.mat();
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        assert!(m[(i, j)].im == 0.0 && m[(i, j)].re >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn algebra_and_casimir_up_to_l25() {
        for twice in 0..=50 {
            let l = h(twice);
            let lz = op_lz(l);
            let lp = op_lplus(l);
            let lm = op_lminus(l);
            let c1 = lz.mat().commutator(lp.mat()).unwrap();
            assert!(max_diff(&c1, lp.mat()) <= 1e-13, "[Lz,L+] at l={l}");
            let c2 = lz.mat().commutator(lm.mat()).unwrap();
            assert!(max_diff(&c2, &lm.mat().scale(c(-1.0, 0.0))) <= 1e-13, "[Lz,L-] at l={l}");
            // entries of L+L- reach l(l+1), where one ulp already exceeds 1e-13
            let c3 = lp.mat().commutator(lm.mat()).unwrap();
            let scale = lp.mat().matmul(lm.mat()).unwrap().max_abs().max(1.0);
            assert!(max_diff(&c3, &lz.mat().scale(c(2.0, 0.0))) <= 1e-13 * scale, "[L+,L-] at l={l}");

            let lx = op_lx(l);
            let ly = op_ly(l);
            let cas = &(&lx.matmul(&lx).into_mat() + &ly.matmul(&ly).into_mat())
                + &lz.matmul(&lz).into_mat();
            let lv = l.value();
            let expect = ComplexMat::identity(l.dim()).scale(c(lv * (lv + 1.0), 0.0));
            assert!(max_diff(&cas, &expect) <= 1e-12 * (1.0 + lv * lv), "casimir at l={l}");

            for op in [&lx, &ly, &lz] {
                assert!(max_diff(op.mat(), &op.mat().adjoint()) <= 1e-14);
            }
        }
    }

    #[test]
    fn ket_validation() {
        assert!(Ket::normalized(h(1), ComplexVec::zeros(3)).is_err());
        assert!(Ket::normalized(h(1), ComplexVec::zeros(2)).is_err());
        let k = Ket::normalized(h(1), ComplexVec::from_real(&[3.0, 4.0])).unwrap();
        assert!(k.amplitudes().is_normalized());
        assert!(!k.is_raw());
        assert_eq!(k.amplitude(h(-1)).unwrap(), c(0.8, 0.0));
        assert!(Ket::basis(h(2), h(1)).is_err());
        assert!(Ket::raw(h(-2), ComplexVec::zeros(0)).is_err());
    }

    proptest! {
        #[test]
        fn halfint_parse_roundtrip(twice in -400i32..400) {
            let x = h(twice);
            prop_assert_eq!(x.to_string().parse::<HalfInt>().unwrap(), x);
            prop_assert_eq!(format!("{}", x.value()).parse::<HalfInt>().unwrap(), x);
        }

        #[test]
        fn lx_ly_combine_into_ladders(twice in 0i32..30) {
            let l = h(twice);
            let lp = op_linear(l, c(1.0, 0.0), c(0.0, 1.0));
            prop_assert!(max_diff(lp.mat(), op_lplus(l).mat()) < 1e-13);
        }
    }
}
