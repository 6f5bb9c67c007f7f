//! Intelligent states of `L_x - i alpha L_y` built by coupling two coherent
//! states, together with the independent routes used to cross-check them.
//!
//! A state is labelled by `(lA, lB, beta, branch)`. On the Y branch
//! `alpha = -cos beta` and the A (B) block is the coherent state rotated by
//! `+beta` (`-beta`) about y. On the X branch `alpha = -1/cos beta`, the
//! rotations are about x, and every amplitude picks up `(-i)^(l - m)`.
//!
//! The X-branch eigenproblem is posed for the rescaled operator
//! `-cos(beta) L_x - i L_y`, which stays finite at `beta = pi/2`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_rank, null_space_vector, ComplexMat, ComplexVec, DEFAULT_PIVOT_TOL};
use crate::repcore::{op_linear, op_lminus, op_lplus, op_lx, op_ly, op_lz, HalfInt, Ket, OperatorMatrix};
use crate::wigner::{little_d, stretched_cg, SignedLogMagnitude, LogFactTable};

/// Largest `2l` accepted by [`poly_oracle`].
pub const POLY_MAX_TWICE_ELL: i32 = 100;
/// Largest `2l` accepted by the dense product-space routines.
pub const TENSOR_MAX_TWICE_ELL: i32 = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `|alpha| < 1`, real `mu`, rotations about y.
    Y,
    /// `|alpha| >= 1`, imaginary `mu`, rotations about x.
    X,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Y => "y",
            Branch::X => "x",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" => Ok(Branch::Y),
            "x" => Ok(Branch::X),
            other => Err(Error::qn(format!("unknown branch {other:?}, expected y or x"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Which closed form supplies the `kappa` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaRoute {
    Closed,
    Sum,
}

/// Everything needed to build one intelligent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntelligentSpec {
    ell_a: HalfInt,
    ell_b: HalfInt,
    beta: f64,
    branch: Branch,
}

impl IntelligentSpec {
    /// `beta` is reduced into `[0, 2 pi)`.
    pub fn new(ell_a: HalfInt, ell_b: HalfInt, beta: f64, branch: Branch) -> Result<Self> {
        ell_a.check_ell()?;
        ell_b.check_ell()?;
        if !beta.is_finite() {
            return Err(Error::NonFinite(format!("beta = {beta}")));
        }
        let beta = beta.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU
        let beta = if beta >= TAU { 0.0 } else { beta };
        Ok(IntelligentSpec {
            ell_a,
            ell_b,
            beta,
            branch,
        })
    }

    /// `alpha = -1` and `alpha = 1` give the endpoint states `beta = 0` and `beta = pi`.
    pub fn from_alpha(ell_a: HalfInt, ell_b: HalfInt, alpha: f64) -> Result<Self> {
        let (beta, branch) = if alpha == -1.0 {
            (0.0, Branch::Y)
        } else if alpha == 1.0 {
            (PI, Branch::Y)
        } else {
            beta_of_alpha(alpha)?
        };
        Self::new(ell_a, ell_b, beta, branch)
    }

    pub fn ell_a(&self) -> HalfInt {
        self.ell_a
    }

    pub fn ell_b(&self) -> HalfInt {
        self.ell_b
    }

    pub fn ell(&self) -> HalfInt {
        self.ell_a + self.ell_b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `-cos beta` or `-1/cos beta`; very large near `beta = pi/2` on the X branch.
    pub fn alpha(&self) -> f64 {
        match self.branch {
            Branch::Y => -self.beta.cos(),
            Branch::X => -1.0 / self.beta.cos(),
        }
    }

    /// `m = +l` at `beta = 0`, `m = -l` at `beta = pi`.
    pub fn endpoint(&self) -> Option<HalfInt> {
        if self.beta == 0.0 {
            Some(self.ell())
        } else if self.beta == PI {
            Some(-self.ell())
        } else {
            None
        }
    }

    /// `(lA - lB) sin beta`, the common factor of both branch eigenvalues.
    fn split_sin(&self) -> f64 {
        (self.ell_a.value() - self.ell_b.value()) * self.beta.sin()
    }

    /// Coefficients `(cx, cy)` of the operator `cx L_x + cy L_y` this state diagonalizes.
    pub fn eigen_coefficients(&self) -> (Complex64, Complex64) {
        match self.branch {
            Branch::Y => (re(1.0), Complex64::new(0.0, self.beta.cos())),
            Branch::X => (re(-self.beta.cos()), -I),
        }
    }

    /// `L_x - i alpha L_y` on the Y branch, `-cos(beta) L_x - i L_y` on the X branch.
    pub fn eigen_operator(&self) -> OperatorMatrix {
        let (cx, cy) = self.eigen_coefficients();
        op_linear(self.ell(), cx, cy)
    }

    /// Eigenvalue of [`Self::eigen_operator`].
    pub fn eigenvalue(&self) -> Complex64 {
        match self.branch {
            Branch::Y => re(self.split_sin()),
            Branch::X => Complex64::new(0.0, self.split_sin()),
        }
    }

    /// Eigenvalue of `L_x - i alpha L_y` itself; `None` where `alpha` is infinite.
    pub fn shifted_eigenvalue(&self) -> Option<Complex64> {
        match self.branch {
            Branch::Y => Some(re(self.split_sin())),
            Branch::X => {
                let c = self.beta.cos();
                (c != 0.0).then(|| Complex64::new(0.0, -self.split_sin() / c))
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite(format!("alpha = {alpha}")));
    }
    if alpha.abs() == 1.0 {
        return Err(Error::DegenerateAlpha(alpha));
    }
    Ok(())
}

/// `sqrt(1 - alpha^2)`, taken as `i sqrt(alpha^2 - 1)` when `|alpha| > 1`.
pub fn sqrt_one_minus_alpha_sq(alpha: f64) -> Complex64 {
    if alpha.abs() <= 1.0 {
        re((1.0 - alpha * alpha).sqrt())
    } else {
        Complex64::new(0.0, (alpha * alpha - 1.0).sqrt())
    }
}

/// `mu = (1 + alpha) / sqrt(1 - alpha^2)`.
pub fn mu_of_alpha(alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    Ok(re(1.0 + alpha) / sqrt_one_minus_alpha_sq(alpha))
}

/// `beta = 2 atan |mu|` in `(0, pi)` and the branch selected by `|alpha|`.
pub fn beta_of_alpha(alpha: f64) -> Result<(f64, Branch)> {
    let mu = mu_of_alpha(alpha)?;
    let branch = if alpha.abs() < 1.0 { Branch::Y } else { Branch::X };
    Ok((2.0 * mu.norm().atan2(1.0), branch))
}

pub fn alpha_of_beta(beta: f64, branch: Branch) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::NonFinite(format!("beta = {beta}")));
    }
    let b = beta.rem_euclid(TAU);
    if b == 0.0 || b == PI || b >= TAU {
        return Err(Error::DegenerateBeta(beta));
    }
    match branch {
        Branch::Y => Ok(-b.cos()),
        Branch::X => {
            let c = b.cos();
            if c.abs() < f64::EPSILON {
                return Err(Error::DegenerateBeta(beta));
            }
            Ok(-1.0 / c)
        }
    }
}

/// `(|+> + sign mu |->) / sqrt(1 + |mu|^2)`.
pub fn spin_half_state(sign: Sign, alpha: f64) -> Result<Ket> {
    let mu = mu_of_alpha(alpha)?;
    let amps = ComplexVec::new(vec![re(1.0), mu * sign.value()]);
    Ket::normalized(HalfInt::HALF, amps)
}

/// `sign * sqrt(1 - alpha^2) / 2`, the eigenvalue belonging to [`spin_half_state`].
pub fn spin_half_eigenvalue(sign: Sign, alpha: f64) -> Complex64 {
    sqrt_one_minus_alpha_sq(alpha) * (0.5 * sign.value())
}

fn check_coupling(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt) -> Result<HalfInt> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    let ell = ell_a + ell_b;
    ell.check_projection(m)?;
    Ok(ell)
}

/// Projection of the coupled coherent pair onto `|l, m>` by the Clebsch-Gordan sum.
pub fn kappa_sum(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt, beta: f64) -> Result<f64> {
    check_coupling(ell_a, ell_b, m)?;
    let mut total = 0.0;
    for m_a in ell_a.projections() {
        let m_b = m - m_a;
        if m_b.abs() > ell_b {
            continue;
        }
        total += stretched_cg(ell_a, m_a, ell_b, m_b)?
            * little_d(ell_a, m_a, ell_a, beta)?
            * little_d(ell_b, m_b, ell_b, -beta)?;
    }
    Ok(total)
}

/// The same projection reduced to a single d-function of `beta`.
pub fn kappa_closed(ell_a: HalfInt, ell_b: HalfInt, m: HalfInt, beta: f64) -> Result<f64> {
    let ell = check_coupling(ell_a, ell_b, m)?;
    let t = LogFactTable::global();
    let p = i64::from((ell.twice() + m.twice()) / 2);
    let q = i64::from((ell.twice() - m.twice()) / 2);
    let log = ell.value() * std::f64::consts::LN_2
        + 0.5
            * (t.ln_fact(i64::from(ell_b.twice()))
                + t.ln_fact(i64::from(ell_a.twice()))
                + t.ln_fact(p)
                + t.ln_fact(q))
        - t.ln_fact(i64::from(ell.twice()));
    let value = SignedLogMagnitude::from_log(log)
        * SignedLogMagnitude::from_f64(little_d(ell, ell_b - ell_a, m, PI / 2.0)?)
        * SignedLogMagnitude::from_f64(little_d(ell, m, ell, beta)?);
    Ok(value.to_f64())
}

/// `kappa` for every `m = l, ..., -l`.
pub fn kappa_column(ell_a: HalfInt, ell_b: HalfInt, beta: f64, route: KappaRoute) -> Result<Vec<f64>> {
    (ell_a + ell_b)
        .projections()
        .map(|m| match route {
            KappaRoute::Closed => kappa_closed(ell_a, ell_b, m, beta),
            KappaRoute::Sum => kappa_sum(ell_a, ell_b, m, beta),
        })
        .collect()
}

/// Reflection used when comparing `kappa^{l,m}` with `kappa^{l,-m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mirror {
    /// `beta -> -beta`.
    NegBeta,
    /// `beta -> pi - beta`.
    PiMinusBeta,
}

/// `max_m | |kappa^{l,m}(beta)|^2 - |kappa^{l,-m}(beta')|^2 |` with `beta'` from `mirror`.
pub fn kappa_symmetry_residual(ell_a: HalfInt, ell_b: HalfInt, beta: f64, mirror: Mirror) -> Result<f64> {
    let other = match mirror {
        Mirror::NegBeta => -beta,
        Mirror::PiMinusBeta => PI - beta,
    };
    let ell = ell_a + ell_b;
    let mut worst = 0.0f64;
    for m in ell.projections() {
        let a = kappa_closed(ell_a, ell_b, m, beta)?;
        let b = kappa_closed(ell_a, ell_b, -m, other)?;
        worst = worst.max((a * a - b * b).abs());
    }
    Ok(worst)
}

/// `(-i)^k`.
fn minus_i_pow(k: i32) -> Complex64 {
    match k.rem_euclid(4) {
        0 => re(1.0),
        1 => -I,
        2 => re(-1.0),
        _ => I,
    }
}

/// Amplitudes of the normalized state, before phase fixing.
fn assemble(spec: &IntelligentSpec, kappa: &[f64]) -> Result<Ket> {
    let ell = spec.ell();
    let amps: ComplexVec = ell
        .projections()
        .zip(kappa)
        .map(|(m, &k)| match spec.branch {
            Branch::Y => re(k),
            Branch::X => minus_i_pow(ell.int_diff(m).expect("same parity")) * k,
        })
        .collect();
    Ok(Ket::normalized(ell, amps)?.with_fixed_phase())
}

/// The normalized intelligent state, amplitudes from the closed-form `kappa`.
pub fn intelligent_state(spec: &IntelligentSpec) -> Result<Ket> {
    intelligent_state_via(spec, KappaRoute::Closed)
}

pub fn intelligent_state_via(spec: &IntelligentSpec, route: KappaRoute) -> Result<Ket> {
    if let Some(m) = spec.endpoint() {
        return Ket::basis(spec.ell(), m);
    }
    let kappa = kappa_column(spec.ell_a, spec.ell_b, spec.beta, route)?;
    assemble(spec, &kappa)
}

/// Loosest pivot tolerance [`null_space_state`] falls back to.
pub const NULL_SPACE_MAX_TOL: f64 = 1e-7;

/// The eigenvector of [`IntelligentSpec::eigen_operator`] found by a null-space solve.
///
/// Close to the coherent limit the operator is nearly defective and rounding can
/// lift the last pivot just above [`DEFAULT_PIVOT_TOL`]; the tolerance is then
/// raised tenfold at a time up to [`NULL_SPACE_MAX_TOL`].
pub fn null_space_state(spec: &IntelligentSpec) -> Result<Ket> {
    let op = spec.eigen_operator();
    let mut tol = DEFAULT_PIVOT_TOL;
    loop {
        match null_space_vector(op.mat(), spec.eigenvalue(), tol) {
            Ok(v) => return Ok(Ket::normalized(spec.ell(), v)?.with_fixed_phase()),
            Err(Error::NullSpaceDimension { dimension: 0 }) if tol < NULL_SPACE_MAX_TOL => {
                tol *= 10.0;
                log::debug!("null space of {spec:?} needs pivot tolerance {tol:e}");
            }
            Err(e) => return Err(e),
        }
    }
}

/// `|| (O - lambda) psi ||` for the operator and eigenvalue of `spec`.
pub fn eigen_residual(spec: &IntelligentSpec, ket: &Ket) -> Result<f64> {
    let applied = spec.eigen_operator().apply(ket)?;
    Ok((&applied - &ket.amplitudes().scale(spec.eigenvalue())).norm())
}

/// A homogeneous polynomial of degree `2l` in `xi, eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyState {
    ell: HalfInt,
    /// Entry `x` multiplies `xi^x eta^(2l - x)`.
    coefficients: Vec<Complex64>,
}

impl PolyState {
    pub fn ell(&self) -> HalfInt {
        self.ell
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Maps `xi^(l+m) eta^(l-m)` to `sqrt((l+m)! (l-m)!) |l, m>` and normalizes.
    pub fn to_ket(&self) -> Result<Ket> {
        let n = self.degree();
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        let amps: ComplexVec = (0..=n)
            .rev()
            .map(|x| self.coefficients[x] * (fact(x) * fact(n - x)).sqrt())
            .collect();
        Ok(Ket::normalized(self.ell, amps)?.with_fixed_phase())
    }
}

/// Rotated spin-1/2 seeds `(A factor, B factor)` as `(coefficient of xi, coefficient of eta)`.
fn seed_pair(beta: f64, branch: Branch) -> ([Complex64; 2], [Complex64; 2]) {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    match branch {
        Branch::Y => ([re(c), re(s)], [re(c), re(-s)]),
        Branch::X => ([re(c), Complex64::new(0.0, -s)], [re(c), Complex64::new(0.0, s)]),
    }
}

/// Expands `(xi c + eta s)^(2lA) (xi c - eta s)^(2lB)` (x-rotated seeds on the X branch).
pub fn poly_state(ell_a: HalfInt, ell_b: HalfInt, beta: f64, branch: Branch) -> Result<PolyState> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    let ell = ell_a + ell_b;
    if ell.twice() > POLY_MAX_TWICE_ELL {
        return Err(Error::DimensionTooLarge {
            twice_ell: ell.twice(),
            max: POLY_MAX_TWICE_ELL,
        });
    }
    let (a, b) = seed_pair(beta, branch);
    // eta-power indexed while multiplying, reversed at the end
    let mut by_eta = vec![re(1.0)];
    let factors = std::iter::repeat_n(a, ell_a.twice() as usize)
        .chain(std::iter::repeat_n(b, ell_b.twice() as usize));
    for [cx, ce] in factors {
        let mut next = vec![re(0.0); by_eta.len() + 1];
        for (k, &p) in by_eta.iter().enumerate() {
            next[k] += p * cx;
            next[k + 1] += p * ce;
        }
        by_eta = next;
    }
    by_eta.reverse();
    Ok(PolyState {
        ell,
        coefficients: by_eta,
    })
}

/// The intelligent state from the polynomial expansion; no Wigner or CG machinery.
pub fn poly_oracle(ell_a: HalfInt, ell_b: HalfInt, beta: f64, branch: Branch) -> Result<Ket> {
    poly_state(ell_a, ell_b, beta, branch)?.to_ket()
}

/// `2l` spin-1/2 kets whose tensor product is the uncoupled state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<Ket>,
}

impl ProductState {
    pub fn new(factors: Vec<Ket>) -> Result<Self> {
        for f in &factors {
            if f.ell() != HalfInt::HALF {
                return Err(Error::qn(format!("product factor has l = {}, expected 1/2", f.ell())));
            }
            if !f.amplitudes().is_normalized() {
                return Err(Error::qn("product factor is not normalized"));
            }
        }
        Ok(ProductState { factors })
    }

    pub fn factors(&self) -> &[Ket] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Amplitudes over `2^n` basis states; factor `0` is the most significant bit,
    /// and a set bit means `|->`.
    pub fn to_vector(&self) -> ComplexVec {
        let mut v = vec![re(1.0)];
        for f in &self.factors {
            let (up, down) = (f.amplitudes()[0], f.amplitudes()[1]);
            v = v.iter().flat_map(|&x| [x * up, x * down]).collect();
        }
        ComplexVec::new(v)
    }

    /// Applies `sum_i O_i`, with `O` a 2x2 matrix acting on each factor.
    pub fn apply_collective(&self, v: &ComplexVec, op: &ComplexMat) -> ComplexVec {
        let n = self.factors.len();
        let mut out = ComplexVec::zeros(v.len());
        for site in 0..n {
            let bit = 1usize << (n - 1 - site);
            for x in 0..v.len() {
                let b = usize::from(x & bit != 0);
                let flipped = x ^ bit;
                // out[row] += O[row, col] v[col]
                out[x] += op[(b, b)] * v[x];
                out[flipped] += op[(1 - b, b)] * v[x];
            }
        }
        out
    }

    /// Overlaps with the normalized Dicke states, ordered `m = l, ..., -l`.
    pub fn dicke_amplitudes(&self) -> ComplexVec {
        let n = self.factors.len();
        let v = self.to_vector();
        let mut sums = vec![re(0.0); n + 1];
        for (x, &amp) in v.iter().enumerate() {
            sums[x.count_ones() as usize] += amp;
        }
        let mut binom = 1.0f64;
        sums.iter()
            .enumerate()
            .map(|(k, &s)| {
                if k > 0 {
                    binom = binom * (n + 1 - k) as f64 / k as f64;
                }
                s / binom.sqrt()
            })
            .collect()
    }
}

fn check_tensor_size(ell: HalfInt) -> Result<()> {
    if ell.twice() > TENSOR_MAX_TWICE_ELL {
        return Err(Error::DimensionTooLarge {
            twice_ell: ell.twice(),
            max: TENSOR_MAX_TWICE_ELL,
        });
    }
    Ok(())
}

/// `2lA` copies of the `+beta` seed followed by `2lB` copies of the `-beta` seed.
pub fn product_state(ell_a: HalfInt, ell_b: HalfInt, beta: f64, branch: Branch) -> Result<ProductState> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    let (a, b) = seed_pair(beta, branch);
    let make = |s: [Complex64; 2]| Ket::normalized(HalfInt::HALF, ComplexVec::new(s.to_vec()));
    let (ka, kb) = (make(a)?, make(b)?);
    let mut factors = vec![ka; ell_a.twice() as usize];
    factors.extend(std::iter::repeat_n(kb, ell_b.twice() as usize));
    ProductState::new(factors)
}

/// The intelligent state by brute force: product of `2l` rotated spin-1/2 kets,
/// checked to be an eigenvector with additive eigenvalue, then projected onto
/// the symmetric subspace.
pub fn tensor_oracle(ell_a: HalfInt, ell_b: HalfInt, beta: f64, branch: Branch) -> Result<Ket> {
    let ell = ell_a + ell_b;
    check_tensor_size(ell)?;
    let product = product_state(ell_a, ell_b, beta, branch)?;

    let spec = IntelligentSpec::new(ell_a, ell_b, beta, branch)?;
    let (cx, cy) = spec.eigen_coefficients();
    let site_op = op_linear(HalfInt::HALF, cx, cy).into_mat();
    let half_a = IntelligentSpec::new(HalfInt::HALF, HalfInt::ZERO, beta, branch)?.eigenvalue();
    let half_b = IntelligentSpec::new(HalfInt::ZERO, HalfInt::HALF, beta, branch)?.eigenvalue();
    let lambda = half_a * ell_a.twice() as f64 + half_b * ell_b.twice() as f64;

    let v = product.to_vector();
    let residual = (&product.apply_collective(&v, &site_op) - &v.scale(lambda)).norm();
    let tolerance = 1e-12 * (1.0 + ell.twice() as f64);
    if residual > tolerance {
        return Err(Error::ResidualTooLarge { residual, tolerance });
    }
    Ok(Ket::normalized(ell, product.dicke_amplitudes())?.with_fixed_phase())
}

/// Operators `X (x) 1` and `1 (x) X` on the `(2lA+1)(2lB+1)` product space.
fn embed(ell_a: HalfInt, ell_b: HalfInt, op: fn(HalfInt) -> OperatorMatrix) -> (ComplexMat, ComplexMat) {
    let ia = ComplexMat::identity(ell_a.dim());
    let ib = ComplexMat::identity(ell_b.dim());
    (op(ell_a).mat().kron(&ib), ia.kron(op(ell_b).mat()))
}

/// Checks that `K_i = L_{i,A} - L_{i,B}` close with `L_z` on su(2) within `1e-12`.
pub fn k_algebra_check(ell_a: HalfInt, ell_b: HalfInt) -> Result<bool> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    check_tensor_size(ell_a + ell_b)?;
    let (xa, xb) = embed(ell_a, ell_b, op_lx);
    let (ya, yb) = embed(ell_a, ell_b, op_ly);
    let (za, zb) = embed(ell_a, ell_b, op_lz);
    let kx = &xa - &xb;
    let ky = &ya - &yb;
    let lz = &za + &zb;
    let close = |lhs: ComplexMat, rhs: &ComplexMat| (&lhs - &rhs.scale(I)).max_abs() <= 1e-12;
    Ok(close(kx.commutator(&ky)?, &lz)
        && close(lz.commutator(&kx)?, &ky)
        && close(ky.commutator(&lz)?, &kx))
}

/// Couples coherent states of `lA + j` and `lB + j` and projects onto total
/// angular momentum `l = lA + lB` (not the stretched sector `l + 2j`).
///
/// The `|l, l>` vector of that sector is the null vector of `J_- J_+` in the
/// `M = l` block; the rest of the sector follows by lowering.
pub fn shifted_pair_state(ell_a: HalfInt, ell_b: HalfInt, j: HalfInt, beta: f64, branch: Branch) -> Result<Ket> {
    ell_a.check_ell()?;
    ell_b.check_ell()?;
    j.check_ell()?;
    let ell = ell_a + ell_b;
    let (la, lb) = (ell_a + j, ell_b + j);
    check_tensor_size(la + lb)?;

    let column = |l: HalfInt, angle: f64| -> Result<ComplexVec> {
        l.projections()
            .map(|m| {
                let d = little_d(l, m, l, angle)?;
                Ok(match branch {
                    Branch::Y => re(d),
                    Branch::X => minus_i_pow(l.int_diff(m).expect("same parity")) * d,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(ComplexVec::new)
    };
    let (va, vb) = (column(la, beta)?, column(lb, -beta)?);
    let (da, db) = (la.dim(), lb.dim());
    let product: ComplexVec = (0..da * db).map(|k| va[k / db] * vb[k % db]).collect();

    let (pa, pb) = embed(la, lb, op_lplus);
    let (ma, mb) = embed(la, lb, op_lminus);
    let jplus = &pa + &pb;
    let jminus = &ma + &mb;

    let block: Vec<usize> = (0..da * db)
        .filter(|&k| {
            let m = la.projections().nth(k / db).unwrap() + lb.projections().nth(k % db).unwrap();
            m == ell
        })
        .collect();
    if block.is_empty() {
        return Err(Error::qn(format!("l = {ell} does not occur in {la} x {lb}")));
    }
    let casimir_part = jminus.matmul(&jplus)?;
    let sub = ComplexMat::from_fn(block.len(), block.len(), |r, c| casimir_part[(block[r], block[c])]);
    let hw = null_space_vector(&sub, re(0.0), DEFAULT_PIVOT_TOL)?;

    let mut sector = ComplexVec::zeros(da * db);
    for (r, &k) in block.iter().enumerate() {
        sector[k] = hw[r];
    }
    let mut amps = Vec::with_capacity(ell.dim());
    for step in 0..ell.dim() {
        if step > 0 {
            sector = jminus.matvec(&sector)?.normalized()?;
        }
        amps.push(sector.inner(&product));
    }
    Ok(Ket::normalized(ell, ComplexVec::new(amps))?.with_fixed_phase())
}

/// All `2l + 1` splits `(lA, lB)` with `lA + lB = l`, from `(l, 0)` to `(0, l)`.
pub fn splits(ell: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    (0..=ell.twice())
        .rev()
        .map(|ta| (HalfInt::from_twice(ta), HalfInt::from_twice(ell.twice() - ta)))
        .collect()
}

/// Numerical rank of the `2l + 1` states of one `l` at a common `beta`.
pub fn completeness_rank(ell: HalfInt, beta: f64, branch: Branch) -> Result<usize> {
    let states = splits(ell)
        .into_iter()
        .map(|(a, b)| intelligent_state(&IntelligentSpec::new(a, b, beta, branch)?).map(Ket::into_amplitudes))
        .collect::<Result<Vec<_>>>()?;
    gram_rank(&states, DEFAULT_PIVOT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repcore::shifted_op;
    use proptest::prelude::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spin_half_residual(sign: Sign, alpha: f64) -> f64 {
        let k = spin_half_state(sign, alpha).unwrap();
        let applied = shifted_op(h(1), alpha).apply(&k).unwrap();
        (&applied - &k.amplitudes().scale(spin_half_eigenvalue(sign, alpha))).norm()
    }

    #[test]
    fn mu_examples() {
        assert!((mu_of_alpha(0.0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((mu_of_alpha(0.6).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        // uniform branch sqrt(1 - a^2) = i sqrt(a^2 - 1)
        assert!((mu_of_alpha(5.0 / 3.0).unwrap() - c(0.0, -2.0)).norm() < 1e-15);
        assert!(spin_half_residual(Sign::Plus, 5.0 / 3.0) < 1e-15);
        assert_eq!(mu_of_alpha(1.0), Err(Error::DegenerateAlpha(1.0)));
        assert_eq!(mu_of_alpha(-1.0), Err(Error::DegenerateAlpha(-1.0)));
        assert!(mu_of_alpha(f64::NAN).is_err());
    }

    #[test]
    fn beta_examples() {
        let (b, br) = beta_of_alpha(0.0).unwrap();
        assert!((b - PI / 2.0).abs() < 1e-15);
        assert_eq!(br, Branch::Y);
        let (b, br) = beta_of_alpha(0.6).unwrap();
        assert!((b - 2.0 * 2f64.atan()).abs() < 1e-15);
        assert_eq!(br, Branch::Y);
        assert_eq!(beta_of_alpha(-2.0).unwrap().1, Branch::X);
        assert!(matches!(alpha_of_beta(0.0, Branch::Y), Err(Error::DegenerateBeta(_))));
        assert!(matches!(alpha_of_beta(PI, Branch::Y), Err(Error::DegenerateBeta(_))));
        assert!(matches!(alpha_of_beta(PI / 2.0, Branch::X), Err(Error::DegenerateBeta(_))));
    }

    #[test]
    fn endpoint_orientation() {
        // beta -> 0 sends alpha to -1, beta -> pi sends it to +1
        assert!((alpha_of_beta(1e-6, Branch::Y).unwrap() + 1.0).abs() < 1e-11);
        assert!((alpha_of_beta(PI - 1e-6, Branch::Y).unwrap() - 1.0).abs() < 1e-11);
        assert!((alpha_of_beta(1e-6, Branch::X).unwrap() + 1.0).abs() < 1e-11);
        // mu -> 0 at alpha -> -1 is |+>, the state reached at beta = 0
        let k = spin_half_state(Sign::Plus, -1.0 + 1e-12).unwrap();
        assert!((k.amplitudes()[0].norm() - 1.0).abs() < 1e-5);
        let s = IntelligentSpec::from_alpha(h(2), h(0), -1.0).unwrap();
        assert_eq!(s.endpoint(), Some(h(2)));
        let s = IntelligentSpec::from_alpha(h(2), h(0), 1.0).unwrap();
        assert_eq!(s.endpoint(), Some(h(-2)));
    }

    #[test]
    fn spin_half_examples() {
        let r2 = 0.5f64.sqrt();
        let k = spin_half_state(Sign::Plus, 0.0).unwrap();
        assert!(k.amplitudes().max_abs_diff(&ComplexVec::from_real(&[r2, r2])) < 1e-15);
        let k = spin_half_state(Sign::Minus, 0.0).unwrap();
        assert!(k.amplitudes().max_abs_diff(&ComplexVec::from_real(&[r2, -r2])) < 1e-15);
        let k = spin_half_state(Sign::Plus, 0.6).unwrap();
        let r5 = 5f64.sqrt();
        assert!(k.amplitudes().max_abs_diff(&ComplexVec::from_real(&[1.0 / r5, 2.0 / r5])) < 1e-15);
        assert!((spin_half_eigenvalue(Sign::Plus, 0.6) - c(0.4, 0.0)).norm() < 1e-15);
        assert!(spin_half_residual(Sign::Plus, 0.6) <= 1e-14);
    }

    #[test]
    fn spin_half_matches_rotations() {
        for k in 1..40 {
            let beta = PI * k as f64 / 40.0;
            let alpha = alpha_of_beta(beta, Branch::Y).unwrap();
            let s = intelligent_state(&IntelligentSpec::new(h(1), h(0), beta, Branch::Y).unwrap()).unwrap();
            assert!(s.fidelity(&spin_half_state(Sign::Plus, alpha).unwrap()) > 1.0 - 1e-13);
            if (beta - PI / 2.0).abs() > 1e-9 {
                let alpha = alpha_of_beta(beta, Branch::X).unwrap();
                let x = intelligent_state(&IntelligentSpec::new(h(1), h(0), beta, Branch::X).unwrap()).unwrap();
                // alpha > 1 labels the +beta seed as the plus state, alpha < -1 as the minus state
                let sign = if alpha > 0.0 { Sign::Plus } else { Sign::Minus };
                assert!(x.fidelity(&spin_half_state(sign, alpha).unwrap()) > 1.0 - 1e-13);
            }
        }
    }

    #[test]
    fn kappa_examples() {
        for m in h(4).projections() {
            let expect = if m == h(4) { 1.0 } else { 0.0 };
            assert!((kappa_sum(h(2), h(2), m, 0.0).unwrap() - expect).abs() < 1e-15);
        }
        for m in h(3).projections() {
            let d = little_d(h(3), m, h(3), 0.9).unwrap();
            assert!((kappa_sum(h(3), h(0), m, 0.9).unwrap() - d).abs() < 1e-14);
        }
        // lA = lB = 1: odd l - m vanish, even ones do not
        assert!(kappa_sum(h(2), h(2), h(0), 1.3).unwrap().abs() > 1e-3);
        assert!(kappa_sum(h(2), h(2), h(2), 1.3).unwrap().abs() < 1e-15);
        assert!(kappa_sum(h(2), h(2), h(-2), 1.3).unwrap().abs() < 1e-15);
        assert!(kappa_sum(h(1), h(1), h(1), 1.3).is_err());
    }

    #[test]
    fn kappa_closed_examples() {
        for beta in [0.0, 0.4, 2.0, 3.1] {
            assert!((kappa_closed(h(1), h(0), h(1), beta).unwrap() - (beta / 2.0).cos()).abs() < 1e-15);
            assert!((kappa_closed(h(0), h(1), h(-1), beta).unwrap() + (beta / 2.0).sin()).abs() < 1e-15);
        }
        let a = kappa_closed(h(1), h(1), h(0), PI / 2.0).unwrap();
        let b = kappa_sum(h(1), h(1), h(0), PI / 2.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn kappa_routes_agree() {
        for total in 0..=16 {
            for ta in 0..=total {
                let (la, lb) = (h(ta), h(total - ta));
                for beta in [0.2, 1.0, 1.9, 2.8, 4.0] {
                    for m in (la + lb).projections() {
                        let a = kappa_closed(la, lb, m, beta).unwrap();
                        let b = kappa_sum(la, lb, m, beta).unwrap();
                        assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0), "lA={la} lB={lb} m={m} beta={beta}");
                    }
                }
            }
        }
    }

    #[test]
    fn parity_vanishing() {
        for twice in 0..=8 {
            let l = h(twice);
            for beta in [0.3, 1.4, 2.2] {
                for m in (l + l).projections() {
                    if (l + l).int_diff(m).unwrap() % 2 == 1 {
                        assert!(kappa_closed(l, l, m, beta).unwrap().abs() < 1e-14);
                        assert!(kappa_sum(l, l, m, beta).unwrap().abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn kappa_mirror_symmetry() {
        for total in 0..=10 {
            for ta in 0..=total {
                for beta in [0.3, 1.2, 2.5] {
                    let r = kappa_symmetry_residual(h(ta), h(total - ta), beta, Mirror::PiMinusBeta).unwrap();
                    assert!(r <= 1e-12);
                }
            }
        }
        // the beta -> -beta reflection only relabels signs, so it cannot swap m and -m
        let r = kappa_symmetry_residual(h(1), h(0), 0.5, Mirror::NegBeta).unwrap();
        assert!((r - 0.25f64.cos().powi(2) + 0.25f64.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn state_examples() {
        let s = IntelligentSpec::from_alpha(h(1), h(0), 0.0).unwrap();
        let k = intelligent_state(&s).unwrap();
        let r2 = 0.5f64.sqrt();
        assert!(k.amplitudes().max_abs_diff(&ComplexVec::from_real(&[r2, r2])) < 1e-15);
        let s = IntelligentSpec::new(h(3), h(2), PI, Branch::Y).unwrap();
        assert_eq!(intelligent_state(&s).unwrap(), Ket::basis(h(5), h(-5)).unwrap());
        let s = IntelligentSpec::new(h(3), h(2), 0.0, Branch::X).unwrap();
        assert_eq!(intelligent_state(&s).unwrap(), Ket::basis(h(5), h(5)).unwrap());
        let s = IntelligentSpec::new(h(3), h(2), PI / 2.0, Branch::Y).unwrap();
        let k = intelligent_state(&s).unwrap();
        assert!(k.fidelity(&poly_oracle(h(3), h(2), PI / 2.0, Branch::Y).unwrap()) > 1.0 - 1e-12);
    }

    #[test]
    fn poly_examples() {
        for beta in [0.3, 2.0] {
            let k = poly_oracle(h(1), h(0), beta, Branch::Y).unwrap();
            let expect = ComplexVec::from_real(&[(beta / 2.0).cos(), (beta / 2.0).sin()]);
            assert!(k.amplitudes().max_abs_diff(&expect) < 1e-15);
        }
        let p = poly_state(h(1), h(1), PI / 2.0, Branch::Y).unwrap();
        // (xi + eta)(xi - eta) / 2
        let coefs: Vec<f64> = p.coefficients().iter().map(|z| z.re).collect();
        assert!((coefs[0] + 0.5).abs() < 1e-15 && coefs[1].abs() < 1e-15 && (coefs[2] - 0.5).abs() < 1e-15);
        let r2 = 0.5f64.sqrt();
        let k = p.to_ket().unwrap();
        assert!(k.amplitudes().max_abs_diff(&ComplexVec::from_real(&[r2, 0.0, -r2])) < 1e-15);
        assert!(poly_state(h(60), h(41), 1.0, Branch::Y).is_err());
    }

    #[test]
    fn tensor_examples() {
        let alpha = 0.3;
        let (beta, branch) = beta_of_alpha(alpha).unwrap();
        let k = tensor_oracle(h(1), h(0), beta, branch).unwrap();
        assert!(k.fidelity(&spin_half_state(Sign::Plus, alpha).unwrap()) > 1.0 - 1e-14);
        let t = tensor_oracle(h(1), h(1), PI / 2.0, Branch::Y).unwrap();
        assert!(t.fidelity(&poly_oracle(h(1), h(1), PI / 2.0, Branch::Y).unwrap()) > 1.0 - 1e-14);
        let t = tensor_oracle(h(3), h(2), 1.1, Branch::Y).unwrap();
        let s = intelligent_state(&IntelligentSpec::new(h(3), h(2), 1.1, Branch::Y).unwrap()).unwrap();
        assert!(t.fidelity(&s) > 1.0 - 1e-12);
        assert!(matches!(tensor_oracle(h(7), h(6), 1.0, Branch::Y), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn collective_operator_on_two_sites() {
        let p = product_state(h(1), h(1), 0.7, Branch::Y).unwrap();
        let v = p.to_vector();
        let lz = op_lz(h(1)).into_mat();
        let w = p.apply_collective(&v, &lz);
        // |++> has weight 1, |--> weight -1, the rest 0
        assert!((w[0] - v[0]).norm() < 1e-15);
        assert!((w[3] + v[3]).norm() < 1e-15);
        assert!(w[1].norm() < 1e-15 && w[2].norm() < 1e-15);
    }

    #[test]
    fn k_algebra_examples() {
        assert!(k_algebra_check(h(1), h(1)).unwrap());
        assert!(k_algebra_check(h(1), h(0)).unwrap());
        assert!(k_algebra_check(h(2), h(1)).unwrap());
        assert!(k_algebra_check(h(4), h(3)).unwrap());
        assert!(k_algebra_check(h(7), h(7)).is_err());
    }

    #[test]
    fn null_space_matches_construction() {
        for (ta, tb) in [(1, 0), (1, 1), (3, 2), (0, 4), (5, 3)] {
            for branch in [Branch::Y, Branch::X] {
                for beta in [0.4, 1.3, 2.7] {
                    let s = IntelligentSpec::new(h(ta), h(tb), beta, branch).unwrap();
                    let a = intelligent_state(&s).unwrap();
                    let b = null_space_state(&s).unwrap();
                    assert!(a.fidelity(&b) > 1.0 - 1e-10, "{s:?}");
                    assert!(eigen_residual(&s, &a).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn null_space_near_coherent_limit() {
        // the default pivot tolerance alone reports a full-rank shift here
        for (ta, k) in [(19, 1), (20, 1), (20, 2)] {
            for branch in [Branch::Y, Branch::X] {
                let s = IntelligentSpec::new(h(ta), h(0), PI * k as f64 / 26.0, branch).unwrap();
                let b = null_space_state(&s).unwrap();
                assert!(b.fidelity(&intelligent_state(&s).unwrap()) > 1.0 - 1e-10);
                assert!(eigen_residual(&s, &b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn x_branch_finite_at_quarter_turn() {
        let s = IntelligentSpec::new(h(3), h(1), PI / 2.0, Branch::X).unwrap();
        assert!(s.shifted_eigenvalue().is_none() || s.alpha().abs() > 1e15);
        let k = intelligent_state(&s).unwrap();
        assert!(eigen_residual(&s, &k).unwrap() < 1e-13);
    }

    #[test]
    fn shifted_pair_gives_no_new_state() {
        for (ta, tb) in [(1, 0), (1, 1), (2, 1), (3, 1), (2, 2), (4, 0)] {
            for branch in [Branch::Y, Branch::X] {
                let beta = 1.1;
                let s = intelligent_state(&IntelligentSpec::new(h(ta), h(tb), beta, branch).unwrap()).unwrap();
                let p = shifted_pair_state(h(ta), h(tb), h(1), beta, branch).unwrap();
                assert!(s.fidelity(&p) > 1.0 - 1e-10, "lA={ta}/2 lB={tb}/2 {branch}");
            }
        }
    }

    #[test]
    fn completeness_examples() {
        assert_eq!(completeness_rank(h(4), PI / 3.0, Branch::Y).unwrap(), 5);
        assert_eq!(splits(h(3)).len(), 4);
        assert_eq!(splits(h(3))[0], (h(3), h(0)));
    }

    #[test]
    fn branch_parse() {
        assert_eq!("Y".parse::<Branch>().unwrap(), Branch::Y);
        assert_eq!("x".parse::<Branch>().unwrap(), Branch::X);
        assert!("z".parse::<Branch>().is_err());
        assert_eq!(Branch::X.to_string(), "x");
    }

    proptest! {
        #[test]
        fn alpha_round_trip(alpha in -0.999f64..0.999) {
            let (beta, branch) = beta_of_alpha(alpha).unwrap();
            prop_assert!(beta > 0.0 && beta < PI);
            prop_assert!((alpha_of_beta(beta, branch).unwrap() - alpha).abs() < 1e-12);
        }

        #[test]
        fn alpha_round_trip_x(alpha in 1.001f64..50.0, neg in any::<bool>()) {
            let alpha = if neg { -alpha } else { alpha };
            let (beta, branch) = beta_of_alpha(alpha).unwrap();
            prop_assert_eq!(branch, Branch::X);
            let back = alpha_of_beta(beta, branch).unwrap();
            prop_assert!((back - alpha).abs() <= 1e-12 * alpha.abs().max(1.0) * alpha.abs());
        }

        #[test]
        fn spin_half_eigen(alpha in -20.0f64..20.0, plus in any::<bool>()) {
            prop_assume!((alpha.abs() - 1.0).abs() > 1e-3);
            let sign = if plus { Sign::Plus } else { Sign::Minus };
            prop_assert!(spin_half_residual(sign, alpha) <= 1e-13 * (1.0 + alpha.abs()));
        }

        #[test]
        fn eigen_residual_small(ta in 0i32..9, tb in 0i32..9, beta in 0.01f64..3.13, x in any::<bool>()) {
            let branch = if x { Branch::X } else { Branch::Y };
            let s = IntelligentSpec::new(h(ta), h(tb), beta, branch).unwrap();
            let k = intelligent_state(&s).unwrap();
            prop_assert!(eigen_residual(&s, &k).unwrap() <= 1e-10);
        }

        #[test]
        fn poly_matches_closed(ta in 0i32..13, tb in 0i32..13, beta in 0.01f64..3.13, x in any::<bool>()) {
            let branch = if x { Branch::X } else { Branch::Y };
            let s = IntelligentSpec::new(h(ta), h(tb), beta, branch).unwrap();
            let a = intelligent_state(&s).unwrap();
            let b = poly_oracle(h(ta), h(tb), beta, branch).unwrap();
            prop_assert!(a.fidelity(&b) >= 1.0 - 1e-10);
        }
    }
}
