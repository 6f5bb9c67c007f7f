//! Reduced Wigner d-functions, stretched Clebsch-Gordan coefficients and the
//! factorial arithmetic behind them.
//!
//! All factorial ratios are carried as [`SignedLogMagnitude`] so that
//! `l` in the low hundreds neither overflows nor underflows. The sign
//! convention of `d` is the one of `exp(-i beta L_y)` built from
//! [`crate::repcore::op_ly`]; the tests pin it against the matrix exponential.

use std::ops::{Div, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexVec;
use crate::repcore::{op_lminus, HalfInt};

/// Largest `n` stored in the shared table.
pub const LOG_FACT_MAX: usize = 1024;

/// Largest `l` accepted by the factorial-based routines (`4l + 1 <= LOG_FACT_MAX`).
pub const MAX_TWICE_ELL: i32 = ((LOG_FACT_MAX - 1) / 2) as i32;

/// `ln(n!)` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct LogFactTable {
    values: Vec<f64>,
}

impl LogFactTable {
    pub fn new(n_max: usize) -> Self {
        let mut values = Vec::with_capacity(n_max + 1);
        let mut acc = 0.0f64;
        values.push(0.0);
        for n in 1..=n_max {
            acc += (n as f64).ln();
            values.push(acc);
        }
        LogFactTable { values }
    }

    /// Process-wide table, built on first use.
    pub fn global() -> &'static LogFactTable {
        static TABLE: OnceLock<LogFactTable> = OnceLock::new();
        TABLE.get_or_init(|| LogFactTable::new(LOG_FACT_MAX))
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `ln(n!)`. Panics when `n` is negative or beyond the table.
    pub fn ln_fact(&self, n: i64) -> f64 {
        assert!(n >= 0, "factorial of negative argument {n}");
        self.values[n as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn lnf(n: i64) -> f64 {
    LogFactTable::global().ln_fact(n)
}

/// A real number stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogMagnitude {
    sign: i8,
    log_abs: f64,
}

impl SignedLogMagnitude {
    pub const ZERO: SignedLogMagnitude = SignedLogMagnitude {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLogMagnitude = SignedLogMagnitude {
        sign: 1,
        log_abs: 0.0,
    };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            SignedLogMagnitude {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLogMagnitude {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    /// `exp(log_abs)` with a positive sign.
    pub fn from_log(log_abs: f64) -> Self {
        SignedLogMagnitude { sign: 1, log_abs }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_abs(self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn powi(self, n: u32) -> Self {
        match (self.sign, n) {
            (_, 0) => Self::ONE,
            (0, _) => Self::ZERO,
            (s, n) => SignedLogMagnitude {
                sign: if s < 0 && n % 2 == 1 { -1 } else { 1 },
                log_abs: self.log_abs * f64::from(n),
            },
        }
    }

    pub fn neg_if(self, flip: bool) -> Self {
        if flip {
            SignedLogMagnitude {
                sign: -self.sign,
                log_abs: self.log_abs,
            }
        } else {
            self
        }
    }
}

impl Mul for SignedLogMagnitude {
    type Output = SignedLogMagnitude;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        SignedLogMagnitude {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs + rhs.log_abs,
        }
    }
}

impl Div for SignedLogMagnitude {
    type Output = SignedLogMagnitude;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division by zero");
        if self.sign == 0 {
            return Self::ZERO;
        }
        SignedLogMagnitude {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs - rhs.log_abs,
        }
    }
}

fn check_ell_range(ell: HalfInt) -> Result<()> {
    if ell.twice() < 0 || ell.twice() > MAX_TWICE_ELL {
        return Err(Error::qn(format!("l = {ell} outside 0..={}", MAX_TWICE_ELL as f64 / 2.0)));
    }
    Ok(())
}

/// `(l + m, l - m)` as integers, once `m` has been validated against `l`.
fn plus_minus(ell: HalfInt, m: HalfInt) -> (i64, i64) {
    (
        i64::from((ell.twice() + m.twice()) / 2),
        i64::from((ell.twice() - m.twice()) / 2),
    )
}

/// `d^l_{m, mp}(beta) = <l, m| exp(-i beta L_y) |l, mp>`.
pub fn little_d(ell: HalfInt, m: HalfInt, mp: HalfInt, beta: f64) -> Result<f64> {
    check_ell_range(ell)?;
    ell.check_projection(m)?;
    ell.check_projection(mp)?;
    if !beta.is_finite() {
        return Err(Error::NonFinite(format!("beta = {beta}")));
    }
    let (a, b) = plus_minus(ell, m); // bra
    let (c, d) = plus_minus(ell, mp); // ket
    let half = beta / 2.0;
    let cos = SignedLogMagnitude::from_f64(half.cos());
    let sin = SignedLogMagnitude::from_f64(half.sin());
    let prefactor = 0.5 * (lnf(a) + lnf(b) + lnf(c) + lnf(d));

    let s_min = (c - a).max(0);
    let s_max = c.min(b);
    let mut total = 0.0;
    for s in s_min..=s_max {
        let denom = lnf(c - s) + lnf(s) + lnf(a - c + s) + lnf(b - s);
        let mag = SignedLogMagnitude::from_log(prefactor - denom)
            * cos.powi((c + b - 2 * s) as u32)
            * sin.powi((a - c + 2 * s) as u32);
        total += mag.neg_if((a - c + s).rem_euclid(2) == 1).to_f64();
    }
    Ok(total)
}

/// The full `(2l+1) x (2l+1)` matrix `d^l(beta)` in the descending basis.
pub fn d_matrix(ell: HalfInt, beta: f64) -> Result<Vec<Vec<f64>>> {
    ell.projections()
        .map(|m| {
            ell.projections()
                .map(|mp| little_d(ell, m, mp, beta))
                .collect()
        })
        .collect()
}

/// Checks `d^l_{m,l}(-beta) = (-1)^(m - l) d^l_{m,l}(beta)` within `1e-12`.
pub fn little_d_symmetries_check(ell: HalfInt, m: HalfInt, beta: f64) -> Result<bool> {
    let lhs = little_d(ell, m, ell, -beta)?;
    let rhs = little_d(ell, m, ell, beta)?;
    let flip = m.int_diff(ell).expect("validated parity").rem_euclid(2) == 1;
    let rhs = if flip { -rhs } else { rhs };
    Ok((lhs - rhs).abs() <= 1e-12)
}

fn check_pair(ell_a: HalfInt, m_a: HalfInt, ell_b: HalfInt, m_b: HalfInt) -> Result<()> {
    check_ell_range(ell_a)?;
    check_ell_range(ell_b)?;
    check_ell_range(ell_a + ell_b)?;
    ell_a.check_projection(m_a)?;
    ell_b.check_projection(m_b)?;
    Ok(())
}

/// `<lA mA; lB mB | l, mA + mB>` for the stretched coupling `l = lA + lB`.
pub fn stretched_cg(ell_a: HalfInt, m_a: HalfInt, ell_b: HalfInt, m_b: HalfInt) -> Result<f64> {
    check_pair(ell_a, m_a, ell_b, m_b)?;
    let ell = ell_a + ell_b;
    let m = m_a + m_b;
    let (ap, am) = plus_minus(ell_a, m_a);
    let (bp, bm) = plus_minus(ell_b, m_b);
    let (p, q) = plus_minus(ell, m);
    let log = 0.5
        * (lnf(i64::from(ell_a.twice())) + lnf(i64::from(ell_b.twice())) - lnf(i64::from(ell.twice()))
            + lnf(p)
            + lnf(q)
            - lnf(ap)
            - lnf(am)
            - lnf(bp)
            - lnf(bm));
    Ok(log.exp())
}

/// One entry of a coupling table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgEntry {
    pub m_a: HalfInt,
    pub m_b: HalfInt,
    pub value: f64,
}

/// All stretched coefficients `<lA mA; lB mB | lA+lB, M>`, grouped by `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CgTable {
    pub ell_a: HalfInt,
    pub ell_b: HalfInt,
    /// One row per `M`, from `M = l` down to `-l`.
    pub rows: Vec<(HalfInt, Vec<CgEntry>)>,
}

impl CgTable {
    pub fn get(&self, m_a: HalfInt, m_b: HalfInt) -> Option<f64> {
        let m = m_a + m_b;
        let (_, row) = self.rows.iter().find(|(mm, _)| *mm == m)?;
        row.iter()
            .find(|e| e.m_a == m_a && e.m_b == m_b)
            .map(|e| e.value)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CgEntry> {
        self.rows.iter().flat_map(|(_, r)| r.iter())
    }
}

/// Builds the stretched column by lowering `|lA,lA>|lB,lB>` with the collective
/// `L_-`, normalizing after every step.
pub fn cg_lowering_oracle(ell_a: HalfInt, ell_b: HalfInt) -> Result<CgTable> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    let (da, db) = (ell_a.dim(), ell_b.dim());
    let lm_a = op_lminus(ell_a).into_mat();
    let lm_b = op_lminus(ell_b).into_mat();

    let apply_lowering = |v: &ComplexVec| -> ComplexVec {
        let mut out = ComplexVec::zeros(da * db);
        for ia in 0..da {
            for ib in 0..db {
                let amp = v[ia * db + ib];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if ia + 1 < da {
                    out[(ia + 1) * db + ib] += lm_a[(ia + 1, ia)] * amp;
                }
                if ib + 1 < db {
                    out[ia * db + ib + 1] += lm_b[(ib + 1, ib)] * amp;
                }
            }
        }
        out
    };

    let ell = ell_a + ell_b;
    let mut v = ComplexVec::basis(da * db, 0);
    let mut rows = Vec::with_capacity(ell.dim());
    for (step, m) in ell.projections().enumerate() {
        if step > 0 {
            v = apply_lowering(&v).normalized()?;
        }
        let mut row = Vec::new();
        for (ia, m_a) in ell_a.projections().enumerate() {
            for (ib, m_b) in ell_b.projections().enumerate() {
                if m_a + m_b == m {
                    row.push(CgEntry {
                        m_a,
                        m_b,
                        value: v[ia * db + ib].re,
                    });
                }
            }
        }
        rows.push((m, row));
    }
    Ok(CgTable { ell_a, ell_b, rows })
}

/// `C(n, k)` exactly, zero outside `0 <= k <= n`; `None` on overflow.
pub fn binomial_exact(n: i64, k: i64) -> Option<i128> {
    if k < 0 || n < 0 || k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(i128::from(n - i))? / i128::from(i + 1);
    }
    Some(acc)
}

/// Left side `sum_n (-1)^n C(2lA, l-m-n) C(2lB, n)` in exact integers.
pub fn binomial_sum_exact(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt) -> Result<Option<i128>> {
    let ell = ell_a + ell_b;
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    ell.check_projection(m)?;
    let (_, lm) = plus_minus(ell, m);
    let mut acc: i128 = 0;
    for n in 0..=i64::from(ell_b.twice()) {
        let term = match (
            binomial_exact(i64::from(ell_a.twice()), lm - n),
            binomial_exact(i64::from(ell_b.twice()), n),
        ) {
            (Some(x), Some(y)) => x.checked_mul(y),
            _ => None,
        };
        let Some(term) = term else { return Ok(None) };
        let next = if n % 2 == 0 {
            acc.checked_add(term)
        } else {
            acc.checked_sub(term)
        };
        let Some(next) = next else { return Ok(None) };
        acc = next;
    }
    Ok(Some(acc))
}

/// Right side `2^l sqrt((2lB)!(2lA)! / ((l+m)!(l-m)!)) d^l_{lB-lA, m}(pi/2)`.
pub fn binomial_sum_rhs(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt) -> Result<f64> {
    let ell = ell_a + ell_b;
    check_ell_range(ell)?;
    ell.check_projection(m)?;
    let (p, q) = plus_minus(ell, m);
    let d = little_d(ell, ell_b - ell_a, m, std::f64::consts::FRAC_PI_2)?;
    let log = ell.value() * std::f64::consts::LN_2
        + 0.5 * (lnf(i64::from(ell_b.twice())) + lnf(i64::from(ell_a.twice())) - lnf(p) - lnf(q));
    Ok((SignedLogMagnitude::from_log(log) * SignedLogMagnitude::from_f64(d)).to_f64())
}

/// Checks the alternating binomial sum against its d-function closed form,
/// within `1e-10` relative (absolute when both sides are below one).
pub fn binomial_sum_identity_check(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt) -> Result<bool> {
    let lhs = binomial_sum_exact(ell_a, ell_b, m)?
        .ok_or_else(|| Error::qn(format!("exact binomial sum overflows for lA={ell_a}, lB={ell_b}")))?
        as f64;
    let rhs = binomial_sum_rhs(ell_a, ell_b, m)?;
    Ok((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0))
}
