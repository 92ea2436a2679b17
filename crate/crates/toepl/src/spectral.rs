//! Transfer matrices, cocycles, trace maps and finite-scale spectral diagnostics
//! for Jacobi operators with off-diagonal `f` and diagonal `g` read from a word.

use std::collections::HashMap;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{count_copies, PatternKind};
use crate::words::{CodingSpec, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Mat2 {
        let d = self.det();
        let m = &self.0;
        Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d)
    }

    /// Operator 2-norm: the largest singular value.
    pub fn norm(&self) -> f64 {
        let m = &self.0;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let (a, b, c, d) = (m[0][0] / scale, m[0][1] / scale, m[1][0] / scale, m[1][1] / scale);
        let s = (a * a + b * b + c * c + d * d) / 2.0;
        let det = a * d - b * c;
        let disc = ((s - det) * (s + det)).max(0.0).sqrt();
        scale * (s + disc).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let (m, n) = (&self.0, &o.0);
        Mat2::new(m[0][0] - n[0][0], m[0][1] - n[0][1], m[1][0] - n[1][0], m[1][1] - n[1][1])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

pub fn vec_norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

// ---------------------------------------------------------------------------
// extended range floats

/// `(mant, exp)` with `x = mant * 2^exp`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

fn ldexp(m: f64, e: i64) -> f64 {
    if e > 1100 {
        return m * f64::INFINITY;
    }
    if e < -1100 {
        return 0.0 * m;
    }
    // split to avoid overflow of the intermediate power
    let h = e / 2;
    m * 2f64.powi(h as i32) * 2f64.powi((e - h) as i32)
}

/// Real number with an unbounded binary exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XF {
    pub mant: f64,
    pub exp2: i64,
}

impl XF {
    pub const ZERO: XF = XF { mant: 0.0, exp2: 0 };

    pub fn new(x: f64) -> Self {
        let (m, e) = frexp(x);
        XF { mant: m, exp2: e }
    }

    fn from_parts(m: f64, e: i64) -> Self {
        let (mm, ee) = frexp(m);
        if mm == 0.0 {
            return XF::ZERO;
        }
        XF {
            mant: mm,
            exp2: e + ee,
        }
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp2)
    }

    pub fn abs(self) -> Self {
        XF {
            mant: self.mant.abs(),
            exp2: self.exp2,
        }
    }

    pub fn mul(self, o: XF) -> XF {
        XF::from_parts(self.mant * o.mant, self.exp2 + o.exp2)
    }

    pub fn add(self, o: XF) -> XF {
        if self.mant == 0.0 {
            return o;
        }
        if o.mant == 0.0 {
            return self;
        }
        let (big, small) = if self.exp2 >= o.exp2 { (self, o) } else { (o, self) };
        let d = big.exp2 - small.exp2;
        XF::from_parts(big.mant + ldexp(small.mant, -d), big.exp2)
    }

    pub fn sub(self, o: XF) -> XF {
        self.add(XF {
            mant: -o.mant,
            exp2: o.exp2,
        })
    }

    /// `|self| > x` for an ordinary float `x > 0`.
    pub fn abs_gt(self, x: f64) -> bool {
        let (m, e) = frexp(x);
        let a = self.mant.abs();
        if a == 0.0 {
            return false;
        }
        if self.exp2 != e {
            return self.exp2 > e;
        }
        a > m
    }

    /// `self / o` as an ordinary float.
    pub fn ratio(self, o: XF) -> f64 {
        if o.mant == 0.0 {
            return if self.mant == 0.0 { 0.0 } else { f64::INFINITY };
        }
        ldexp(self.mant / o.mant, self.exp2 - o.exp2)
    }

    pub fn max_abs(self, o: XF) -> XF {
        let (a, b) = (self.abs(), o.abs());
        if a.mant == 0.0 {
            return b;
        }
        if b.mant == 0.0 {
            return a;
        }
        if a.exp2 != b.exp2 {
            if a.exp2 > b.exp2 {
                a
            } else {
                b
            }
        } else if a.mant >= b.mant {
            a
        } else {
            b
        }
    }

    pub fn ln(self) -> f64 {
        self.mant.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }
}

/// Matrix with a common binary exponent, `value = m * 2^exp2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat {
    pub m: Mat2,
    pub exp2: i64,
}

impl ScaledMat {
    pub fn new(m: Mat2) -> Self {
        ScaledMat { m, exp2: 0 }.normalized()
    }

    fn normalized(self) -> Self {
        let (_, e) = frexp(self.m.max_abs());
        if self.m.max_abs() == 0.0 || e == 0 {
            return self;
        }
        ScaledMat {
            m: self.m.scale(ldexp(1.0, -e)),
            exp2: self.exp2 + e,
        }
    }

    pub fn mul(&self, o: &ScaledMat) -> ScaledMat {
        ScaledMat {
            m: self.m * o.m,
            exp2: self.exp2 + o.exp2,
        }
        .normalized()
    }

    pub fn pow(&self, mut n: u64) -> ScaledMat {
        let mut base = *self;
        let mut acc = ScaledMat::new(Mat2::IDENTITY);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn trace(&self) -> XF {
        XF::from_parts(self.m.trace(), self.exp2)
    }

    pub fn ln_norm(&self) -> f64 {
        self.m.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    pub fn to_mat(&self) -> Mat2 {
        self.m.scale(ldexp(1.0, self.exp2))
    }
}

// ---------------------------------------------------------------------------
// potentials and word sources

/// A map from windows `w[-J..=J]` to reals.
#[derive(Clone, Debug, PartialEq)]
pub enum PotFn {
    Const(f64),
    /// Depends on the centre letter only.
    Letter(Vec<f64>),
    /// Keyed by the full window of length `2J + 1`.
    Window(HashMap<Word, f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub radius: usize,
    pub f: PotFn,
    pub g: PotFn,
}

impl PotentialSpec {
    pub fn new(radius: usize, f: PotFn, g: PotFn) -> Result<Self> {
        let nonzero = match &f {
            PotFn::Const(c) => *c != 0.0,
            PotFn::Letter(t) => t.iter().all(|&x| x != 0.0),
            PotFn::Window(m) => m.values().all(|&x| x != 0.0),
        };
        if !nonzero {
            return Err(Error::Potential("f must never vanish".into()));
        }
        for p in [&f, &g] {
            if let PotFn::Window(m) = p {
                if m.keys().any(|k| k.len() != 2 * radius + 1) {
                    return Err(Error::Potential(format!(
                        "window keys must have length {}",
                        2 * radius + 1
                    )));
                }
            }
        }
        Ok(PotentialSpec { radius, f, g })
    }

    /// `f = 1`, `g(x) = table[x]`.
    pub fn schrodinger(g: Vec<f64>) -> Self {
        PotentialSpec {
            radius: 0,
            f: PotFn::Const(1.0),
            g: PotFn::Letter(g),
        }
    }

    pub fn free() -> Self {
        PotentialSpec {
            radius: 0,
            f: PotFn::Const(1.0),
            g: PotFn::Const(0.0),
        }
    }

    pub fn jacobi_letters(f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        PotentialSpec::new(0, PotFn::Letter(f), PotFn::Letter(g))
    }

    pub fn f_is_const(&self) -> bool {
        matches!(self.f, PotFn::Const(_))
    }

    /// Each step `m` of the cocycle reads the letters `w[m + a ..= m + b]`.
    pub fn step_window(&self) -> (i64, i64) {
        let j = self.radius as i64;
        let span = |p: &PotFn| match p {
            PotFn::Const(_) => None,
            PotFn::Letter(_) => Some((0i64, 0i64)),
            PotFn::Window(_) => Some((-j, j)),
        };
        // g at offset 1, f at offsets 1 and 2
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        if let Some((a, b)) = span(&self.g) {
            lo = lo.min(1 + a);
            hi = hi.max(1 + b);
        }
        if let Some((a, b)) = span(&self.f) {
            lo = lo.min(1 + a);
            hi = hi.max(2 + b);
        }
        if lo > hi {
            (1, 1)
        } else {
            (lo, hi)
        }
    }

    /// Step window as in the general bound: `a = 1 - J`, `b = 2 + J`, or `1 + J` for constant `f`.
    pub fn nominal_window(&self) -> (i64, i64) {
        let j = self.radius as i64;
        (1 - j, if self.f_is_const() { 1 + j } else { 2 + j })
    }

    fn eval(&self, p: &PotFn, src: &WordSource, m: i64) -> Result<f64> {
        match p {
            PotFn::Const(c) => Ok(*c),
            PotFn::Letter(t) => {
                let l = src.letter(m)?;
                t.get(l as usize).copied().ok_or_else(|| {
                    Error::Potential(format!("no table entry for letter id {l}"))
                })
            }
            PotFn::Window(map) => {
                let j = self.radius as i64;
                let w: Word = (m - j..=m + j).map(|x| src.letter(x)).collect::<Result<_>>()?;
                map.get(&w)
                    .copied()
                    .ok_or_else(|| Error::Potential(format!("no table entry for window {w:?}")))
            }
        }
    }
}

/// Two-sided word access.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordSource {
    /// Finite window; position `x` is `word[x + origin]`.
    Window { word: Word, origin: i64 },
    /// `period` repeated in both directions; position 0 is `period[0]`.
    Periodic { period: Word },
}

impl WordSource {
    pub fn letter(&self, x: i64) -> Result<Letter> {
        match self {
            WordSource::Window { word, origin } => {
                let i = x + origin;
                if i < 0 || i as usize >= word.len() {
                    return Err(Error::Depth {
                        needed: x.unsigned_abs() as usize,
                        available: (*origin).min(word.len() as i64 - 1 - origin).max(0) as usize,
                    });
                }
                Ok(word[i as usize])
            }
            WordSource::Periodic { period } => {
                Ok(period[x.rem_euclid(period.len() as i64) as usize])
            }
        }
    }

    pub fn centered(word: Word, radius: usize) -> Self {
        WordSource::Window {
            word,
            origin: radius as i64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferContext {
    pub source: WordSource,
    pub potential: PotentialSpec,
    pub energy: f64,
}

impl TransferContext {
    pub fn new(source: WordSource, potential: PotentialSpec, energy: f64) -> Self {
        TransferContext {
            source,
            potential,
            energy,
        }
    }

    fn f(&self, m: i64) -> Result<f64> {
        let v = self.potential.eval(&self.potential.f, &self.source, m)?;
        if v == 0.0 {
            return Err(Error::Potential(format!("f vanishes at shift {m}")));
        }
        Ok(v)
    }

    fn g(&self, m: i64) -> Result<f64> {
        self.potential.eval(&self.potential.g, &self.source, m)
    }

    /// `T(S^m w)`.
    pub fn step(&self, m: i64) -> Result<Mat2> {
        let (f1, f2, g1) = (self.f(m + 1)?, self.f(m + 2)?, self.g(m + 1)?);
        Ok(Mat2::new((self.energy - g1) / f2, -f1 / f2, 1.0, 0.0))
    }

    /// Determinant one variant of `T(S^m w)`.
    pub fn step_modified(&self, m: i64) -> Result<Mat2> {
        let (f2, g1) = (self.f(m + 2)?, self.g(m + 1)?);
        Ok(Mat2::new((self.energy - g1) / f2, -1.0 / f2, f2, 0.0))
    }

    fn step_kind(&self, m: i64, modified: bool) -> Result<Mat2> {
        if modified {
            self.step_modified(m)
        } else {
            self.step(m)
        }
    }

    /// Step indices of `A(j, S^s w)` in multiplication order, with whether each factor is inverted.
    fn factors(s: i64, j: i64) -> impl Iterator<Item = (i64, bool)> {
        let fwd = (s..s + j.max(0)).map(|m| (m, false));
        let bwd = (s + j.min(0)..s).rev().map(|m| (m, true));
        fwd.chain(bwd)
    }

    fn factor(&self, m: i64, inverse: bool, modified: bool) -> Result<Mat2> {
        let t = self.step_kind(m, modified)?;
        Ok(if inverse { t.inverse() } else { t })
    }

    /// `A(j, S^s w)`; negative `j` gives `T(S^{s+j} w)^-1 ... T(S^{s-1} w)^-1`.
    pub fn cocycle_from(&self, s: i64, j: i64, modified: bool) -> Result<Mat2> {
        let mut a = Mat2::IDENTITY;
        for (m, inv) in Self::factors(s, j) {
            a = self.factor(m, inv, modified)? * a;
        }
        Ok(a)
    }

    /// `A(j, S^s w)` in scaled form, renormalized every 64 steps.
    pub fn cocycle_scaled_kind(&self, s: i64, j: i64, modified: bool) -> Result<ScaledMat> {
        let mut acc = ScaledMat::new(Mat2::IDENTITY);
        let mut block = Mat2::IDENTITY;
        for (count, (m, inv)) in Self::factors(s, j).enumerate() {
            block = self.factor(m, inv, modified)? * block;
            if count % 64 == 63 {
                acc = ScaledMat::new(block).mul(&acc);
                block = Mat2::IDENTITY;
            }
        }
        Ok(ScaledMat::new(block).mul(&acc))
    }

    /// `A(j, S^s w)` with the modified steps, kept in scaled form.
    pub fn cocycle_scaled(&self, s: i64, j: i64) -> Result<ScaledMat> {
        self.cocycle_scaled_kind(s, j, true)
    }

    /// `ln ||A(j, S^s w)||`.
    pub fn ln_norm_from(&self, s: i64, j: i64, modified: bool) -> Result<f64> {
        Ok(self.cocycle_scaled_kind(s, j, modified)?.ln_norm())
    }
}

pub fn elementary_transfer(ctx: &TransferContext, j: i64) -> Result<Mat2> {
    ctx.step(j)
}

pub fn elementary_modified(ctx: &TransferContext, j: i64) -> Result<Mat2> {
    ctx.step_modified(j)
}

/// `A(j, w)`: identity for `j = 0`, `T(S^{j-1} w)...T(w)` for `j > 0`,
/// `T(S^j w)^-1 ... T(S^-1 w)^-1` for `j < 0`.
pub fn cocycle_product(ctx: &TransferContext, j: i64) -> Result<Mat2> {
    ctx.cocycle_from(0, j, false)
}

pub fn modified_cocycle_product(ctx: &TransferContext, j: i64) -> Result<Mat2> {
    ctx.cocycle_from(0, j, true)
}

/// `Phi(j) = A(j, w) Phi(0)` with `Phi(j) = (phi(j+1), phi(j))`.
pub fn solve_eigen_iteration(ctx: &TransferContext, phi0: [f64; 2], j: i64) -> Result<[f64; 2]> {
    Ok(cocycle_product(ctx, j)?.apply(phi0))
}

/// `(phi(j+1), phi(j))` from the three-term recurrence
/// `f(S^k w) phi(k-1) + g(S^k w) phi(k) + f(S^{k+1} w) phi(k+1) = E phi(k)`.
pub fn recurrence_solution(ctx: &TransferContext, phi0: [f64; 2], j: i64) -> Result<[f64; 2]> {
    let (mut hi, mut lo) = (phi0[0], phi0[1]);
    if j >= 0 {
        // (hi, lo) = (phi(k+1), phi(k)); step to k+1
        for k in 1..=j {
            let next = ((ctx.energy - ctx.g(k)?) * hi - ctx.f(k)? * lo) / ctx.f(k + 1)?;
            lo = hi;
            hi = next;
        }
    } else {
        for k in (j + 1..=0).rev() {
            // phi(k-1) = ((E - g(k)) phi(k) - f(k+1) phi(k+1)) / f(k)
            let prev = ((ctx.energy - ctx.g(k)?) * lo - ctx.f(k + 1)? * hi) / ctx.f(k)?;
            hi = lo;
            lo = prev;
        }
    }
    Ok([hi, lo])
}

// ---------------------------------------------------------------------------
// periodic approximants and the trace map

/// One period `p^k a_{k+1}` of the level-`k` periodic approximant.
pub fn approximant_period(spec: &CodingSpec, k: i64, budget: u64) -> Result<Word> {
    let mut w = spec.block(k, budget)?;
    w.push(spec.a_at((k + 1) as usize)?);
    Ok(w)
}

fn letter_matrices(spec_letters: usize, pot: &PotentialSpec, e: f64) -> Option<Vec<Mat2>> {
    let c = match pot.f {
        PotFn::Const(c) => c,
        _ => return None,
    };
    if pot.radius != 0 && matches!(pot.g, PotFn::Window(_)) {
        return None;
    }
    let gval = |l: usize| -> Option<f64> {
        match &pot.g {
            PotFn::Const(v) => Some(*v),
            PotFn::Letter(t) => t.get(l).copied(),
            PotFn::Window(_) => None,
        }
    };
    (0..spec_letters)
        .map(|l| gval(l).map(|g| Mat2::new((e - g) / c, -1.0 / c, c, 0.0)))
        .collect()
}

/// Traces `tau_{-1} ..= tau_kmax` of the modified cocycle over one period of the
/// approximants, by the block recursion `M(p^{k+1}) = M(p^k) (T_a M(p^k))^{n-1}`.
/// Needs constant `f` and a centre-letter `g`.
pub fn trace_sequence(spec: &CodingSpec, pot: &PotentialSpec, e: f64, k_max: i64) -> Result<Vec<XF>> {
    let mats = letter_matrices(spec.alphabet.len(), pot, e).ok_or_else(|| {
        Error::Potential("the block recursion needs constant f and a letter-table g".into())
    })?;
    let mut out = Vec::with_capacity((k_max + 2) as usize);
    let mut block = ScaledMat::new(Mat2::IDENTITY);
    for k in -1..=k_max {
        if k >= 0 {
            let ku = k as usize;
            let t = ScaledMat::new(mats[spec.a_at(ku)? as usize]);
            let n = spec.n_at(ku)?;
            block = block.mul(&t.mul(&block).pow(n - 1));
        }
        let next = ScaledMat::new(mats[spec.a_at((k + 1) as usize)? as usize]);
        out.push(next.mul(&block).trace());
    }
    Ok(out)
}

/// Trace of the modified cocycle over one period of an arbitrary periodic word.
pub fn period_trace(period: &[Letter], pot: &PotentialSpec, e: f64) -> Result<XF> {
    let ctx = TransferContext::new(
        WordSource::Periodic {
            period: period.to_vec(),
        },
        pot.clone(),
        e,
    );
    let mut acc = ScaledMat::new(Mat2::IDENTITY);
    for m in 0..period.len() as i64 {
        acc = ScaledMat::new(ctx.step_modified(m)?).mul(&acc);
    }
    Ok(acc.trace())
}

/// `tau_{E,k}`: fast block recursion when the potential allows it, direct product otherwise.
pub fn periodic_trace(spec: &CodingSpec, pot: &PotentialSpec, e: f64, k: i64) -> Result<XF> {
    if letter_matrices(spec.alphabet.len(), pot, e).is_some() {
        Ok(*trace_sequence(spec, pot, e, k)?.last().unwrap())
    } else {
        period_trace(&approximant_period(spec, k, crate::words::default_budget())?, pot, e)
    }
}

/// Relative residual of `tau_{k+1} = tau_k (tau_{k-1}^2 - 2) - 2`.
pub fn trace_map_residual(taus: &[XF], k: usize) -> f64 {
    // taus[i] = tau_{i-1}
    let (prev, cur, next) = (taus[k], taus[k + 1], taus[k + 2]);
    let two = XF::new(2.0);
    let pred = cur.mul(prev.mul(prev).sub(two)).sub(two);
    let denom = XF::new(1.0).max_abs(next).max_abs(pred);
    next.sub(pred).abs().ratio(denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn bisect(h: &(dyn Fn(f64) -> f64 + Sync), mut a: f64, mut b: f64, tol: f64) -> f64 {
    // h(a) <= 0 < h(b) or the reverse; returns a point of the boundary
    let inside_a = h(a) <= 0.0;
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        if (h(mid) <= 0.0) == inside_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `{E : h(E) <= 0}` on `[lo, hi]`, from a grid with bisection at sign changes.
pub fn sublevel_intervals(
    h: &(dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<Interval>> {
    if grid_n < 2 || !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Arg(
            "spectrum scan needs grid_n >= 2, lo < hi and tol > 0".into(),
        ));
    }
    let step = (hi - lo) / (grid_n - 1) as f64;
    let xs: Vec<f64> = (0..grid_n).map(|i| lo + step * i as f64).collect();
    let inside: Vec<bool> = xs.par_iter().map(|&x| h(x) <= 0.0).collect();
    let edges: Vec<(usize, f64)> = (0..grid_n - 1)
        .into_par_iter()
        .filter(|&i| inside[i] != inside[i + 1])
        .map(|i| (i, bisect(h, xs[i], xs[i + 1], tol)))
        .collect();
    let mut out = Vec::new();
    let mut start = if inside[0] { Some(lo) } else { None };
    for (i, x) in edges {
        if inside[i] {
            out.push(Interval {
                lo: start.take().unwrap(),
                hi: x,
            });
        } else {
            start = Some(x);
        }
    }
    if let Some(s) = start {
        out.push(Interval { lo: s, hi });
    }
    Ok(out)
}

pub fn measure(intervals: &[Interval]) -> f64 {
    intervals.iter().map(|i| i.hi - i.lo).sum()
}

/// `{E : |tau_{E,k}| <= 2}` for the level-`k` approximant.
pub fn spectrum_approx(
    spec: &CodingSpec,
    pot: &PotentialSpec,
    k: i64,
    range: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<Vec<Interval>> {
    // surface errors (depth, potential) before the parallel scan
    periodic_trace(spec, pot, range.0, k)?;
    let h = |e: f64| -> f64 {
        match periodic_trace(spec, pot, e, k) {
            Ok(t) if t.abs_gt(2.0) => 1.0,
            Ok(t) => t.to_f64().abs() - 2.0,
            Err(_) => f64::NAN,
        }
    };
    sublevel_intervals(&h, range.0, range.1, grid_n, tol)
}

/// Same for an explicit periodic word.
pub fn spectrum_of_period(
    period: &[Letter],
    pot: &PotentialSpec,
    range: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<Vec<Interval>> {
    period_trace(period, pot, range.0)?;
    let h = |e: f64| -> f64 {
        match period_trace(period, pot, e) {
            Ok(t) if t.abs_gt(2.0) => 1.0,
            Ok(t) => t.to_f64().abs() - 2.0,
            Err(_) => f64::NAN,
        }
    };
    sublevel_intervals(&h, range.0, range.1, grid_n, tol)
}

/// Energies `E` violating: `|tau_j| > 2` and `|tau_{j+1}| > 2` imply `|tau_k| > 2` for `j <= k <= j + span`.
pub fn nesting_violations(
    spec: &CodingSpec,
    pot: &PotentialSpec,
    energies: &[f64],
    j_max: i64,
    span: i64,
) -> Result<Vec<(f64, i64, i64)>> {
    trace_sequence(spec, pot, 0.0, 0)?;
    let found: Vec<(f64, i64, i64)> = energies
        .par_iter()
        .flat_map_iter(|&e| {
            let taus = trace_sequence(spec, pot, e, j_max + span).expect("checked above");
            let big = |k: i64| taus[(k + 1) as usize].abs_gt(2.0);
            let mut bad = Vec::new();
            for j in 0..=j_max {
                if big(j) && big(j + 1) {
                    if let Some(k) = (j..=j + span).find(|&k| !big(k)) {
                        bad.push((e, j, k));
                    }
                }
            }
            bad
        })
        .collect();
    Ok(found)
}

// ---------------------------------------------------------------------------
// Gordon-type repetitions

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GordonReport {
    pub l: usize,
    pub kind: &'static str,
    /// `Tr M` for the repeated-block matrix `M`.
    pub trace: f64,
    /// `||M^2 - (Tr M) M + I|| / max(1, ||M||^2)`.
    pub cayley_hamilton_residual: f64,
    /// `||M^2 - A(2l, .)|| / max(1, ||M||^2)`.
    pub doubling_residual: f64,
    pub norm_b: f64,
    /// `S^{2w}` with `S` the largest step norm and `w` the step window width.
    pub norm_b_bound: f64,
    /// `max ||Phi_j|| / ||Phi_0||` over the three probe positions.
    pub max_norm_ratio: f64,
    /// `1 / (2 ||B||)`.
    pub lower_bound: f64,
    pub bound_ok: bool,
}

fn blocks_equal(src: &WordSource, x: i64, y: i64, l: usize) -> Result<bool> {
    for i in 0..l as i64 {
        if src.letter(x + i)? != src.letter(y + i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks the repetition pattern of `kind` at `l` around the origin.
pub fn pattern_present(src: &WordSource, l: usize, kind: PatternKind) -> Result<bool> {
    let li = l as i64;
    Ok(match kind {
        PatternKind::Left3 => {
            blocks_equal(src, -2 * li + 1, -li + 1, l)? && blocks_equal(src, -li + 1, 1, l)?
        }
        PatternKind::Right3 => {
            blocks_equal(src, -li + 1, 1, l)? && blocks_equal(src, 1, li + 1, l)?
        }
        PatternKind::Left2 => blocks_equal(src, -2 * li + 1, -li + 1, l)?,
        PatternKind::Right2 => blocks_equal(src, 1, li + 1, l)?,
    })
}

fn ln_vec(m: &ScaledMat, v: [f64; 2]) -> f64 {
    vec_norm(m.m.apply(v)).ln() + m.exp2 as f64 * std::f64::consts::LN_2
}

/// `||a - b|| / max(1, ||a||)`, for matrices in scaled form.
fn scaled_rel_diff(a: &ScaledMat, b: &ScaledMat) -> f64 {
    let e = a.exp2.max(b.exp2);
    let am = a.m.scale(ldexp(1.0, a.exp2 - e));
    let bm = b.m.scale(ldexp(1.0, b.exp2 - e));
    am.sub(&bm).norm() / am.norm().max(ldexp(1.0, -e))
}

/// Verifies the three-block lower bound for solutions of the modified cocycle.
///
/// With `M` the matrix of a repeated block and `N` that of the neighbouring block,
/// `B = M N^-1` only depends on the last `w` steps of each, so it is formed from those.
pub fn gordon_verify(
    ctx: &TransferContext,
    l: usize,
    kind: PatternKind,
    phi0: Option<[f64; 2]>,
) -> Result<GordonReport> {
    if !matches!(kind, PatternKind::Left3 | PatternKind::Right3) {
        return Err(Error::Pattern("the bound needs a three-block pattern".into()));
    }
    let present = pattern_present(&ctx.source, l, kind).map_err(|e| match e {
        Error::Depth { .. } => Error::Pattern(format!("window too short for l = {l}")),
        e => e,
    })?;
    if !present {
        return Err(Error::Pattern(format!("no {} pattern at l = {l}", kind.name())));
    }
    let (a, b) = ctx.potential.nominal_window();
    let w = b - a;
    let li = l as i64;
    if w > li {
        return Err(Error::Pattern(format!(
            "l = {l} is shorter than the step window width {w}"
        )));
    }
    let phi0 = phi0.unwrap_or([1.0, 0.0]);
    if vec_norm(phi0) == 0.0 {
        return Err(Error::Arg("Phi_0 must be nonzero".into()));
    }
    let t0 = 1 - a;
    // start shifts of M, of its second copy, and of N; probe positions
    let (s_m, s_m2, s_n, double_start, probes) = match kind {
        PatternKind::Left3 => (t0 - li, t0 - 2 * li, t0, t0 - 2 * li, [-2 * li, -li, li]),
        _ => (t0, t0 - li, t0 + li, t0 - li, [2 * li, li, -li]),
    };
    let m = ctx.cocycle_scaled(s_m, li)?;
    if m != ctx.cocycle_scaled(s_m2, li)? {
        return Err(Error::Verification(format!(
            "repeated blocks at l = {l} give different matrices"
        )));
    }
    let mm = m.mul(&m);
    let tr = m.trace();
    // M^2 - Tr(M) M + I at the common scale 2^{2e}
    let e2 = mm.exp2;
    let unit = ldexp(1.0, -e2);
    let trm = m.m.scale(tr.mant * ldexp(1.0, tr.exp2 + m.exp2 - e2));
    let ch_mat = mm.m.sub(&trm).sub(&Mat2::IDENTITY.scale(-unit));
    let cayley_hamilton_residual = ch_mat.norm() / mm.m.norm().max(unit);
    let doubling_residual = scaled_rel_diff(&mm, &ctx.cocycle_scaled(double_start, 2 * li)?);

    let x = ctx.cocycle_from(s_m + li - w, w, true)?;
    let x2 = ctx.cocycle_from(s_n + li - w, w, true)?;
    let bmat = x * x2.inverse();
    let norm_b = bmat.norm();
    let mut s_max = 1.0f64;
    for s in (s_m + li - w..s_m + li).chain(s_n + li - w..s_n + li) {
        s_max = s_max.max(ctx.step_modified(s)?.norm());
    }
    let norm_b_bound = s_max.powi(2 * w as i32);

    let ln0 = vec_norm(phi0).ln();
    let mut ln_max = f64::NEG_INFINITY;
    for j in probes {
        ln_max = ln_max.max(ln_vec(&ctx.cocycle_scaled(t0, j)?, phi0));
    }
    let lower_bound = 1.0 / (2.0 * norm_b);
    let ln_ratio = ln_max - ln0;
    Ok(GordonReport {
        l,
        kind: kind.name(),
        trace: tr.to_f64(),
        cayley_hamilton_residual,
        doubling_residual,
        norm_b,
        norm_b_bound,
        max_norm_ratio: ln_ratio.exp(),
        lower_bound,
        bound_ok: ln_ratio >= lower_bound.ln() - 1e-12 && norm_b <= norm_b_bound * (1.0 + 1e-9),
    })
}

/// Three-block patterns at the origin of `src` whose length is in `lengths`.
pub fn gordon_patterns(src: &WordSource, lengths: &[usize]) -> Result<Vec<(usize, PatternKind)>> {
    let mut out = Vec::new();
    for &l in lengths {
        for kind in [PatternKind::Left3, PatternKind::Right3] {
            if pattern_present(src, l, kind)? {
                out.push((l, kind));
            }
        }
    }
    Ok(out)
}

/// `p^k e p^k` around the origin as a word source.
pub fn leading_source(spec: &CodingSpec, e: Letter, radius: u64) -> Result<WordSource> {
    Ok(WordSource::centered(
        crate::words::leading_window(spec, e, radius)?,
        radius as usize,
    ))
}
// ---------------------------------------------------------------------------
// Lyapunov averages and (PQ)

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// `(j, (1/j) ln ||A(+-j, w)||)` for `j = stride, 2 stride, ..., j_max` (modified cocycle).
pub fn lyapunov_sequence(
    ctx: &TransferContext,
    j_max: u64,
    direction: Direction,
    stride: u64,
) -> Result<Vec<(u64, f64)>> {
    if stride == 0 {
        return Err(Error::Arg("stride must be positive".into()));
    }
    let mut acc = ScaledMat::new(Mat2::IDENTITY);
    let mut block = Mat2::IDENTITY;
    let mut out = Vec::new();
    for j in 1..=j_max {
        let ji = j as i64;
        let t = match direction {
            Direction::Forward => ctx.step_modified(ji - 1)?,
            Direction::Backward => ctx.step_modified(-ji)?.inverse(),
        };
        block = t * block;
        let report = j % stride == 0 || j == j_max;
        if j % 64 == 0 || report {
            acc = ScaledMat::new(block).mul(&acc);
            block = Mat2::IDENTITY;
        }
        if report {
            out.push((j, acc.ln_norm() / j as f64));
        }
    }
    Ok(out)
}

/// `(j, (j / L) D(w[..j], w[..L]))` with `D` the disjoint copy count.
pub fn pq_diagnostic(word: &[Letter], js: &[usize], l: usize) -> Result<Vec<(usize, BigRational)>> {
    if l == 0 || l > word.len() {
        return Err(Error::Depth {
            needed: l,
            available: word.len(),
        });
    }
    js.iter()
        .map(|&j| {
            if j == 0 || j > l {
                return Err(Error::Arg(format!("j = {j} must lie in 1..={l}")));
            }
            let d = count_copies(&word[..j], &word[..l])?.disjoint;
            Ok((
                j,
                BigRational::new(BigInt::from(j as u64 * d), BigInt::from(l as u64)),
            ))
        })
        .collect()
}
