//! Closed-form invariants of simple Toeplitz subshifts and the asymptotic verdicts.
//!
//! Notation: `P1 = |p^{k-1}|`, `P2 = |p^{k-2}|`, `A_k = {a_j : j >= k}`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{set_contains, set_letters, CodingSpec, LetterSet, TailLetters};

/// The alphabets `A_0 ⊇ A_1 ⊇ ...` and their stable value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetFiltration {
    /// `sets[k] = A_k` for `k <= stabilization`.
    pub sets: Vec<LetterSet>,
    pub eventual: LetterSet,
    pub stabilization: usize,
}

impl AlphabetFiltration {
    pub fn at(&self, k: usize) -> LetterSet {
        self.sets.get(k).copied().unwrap_or(self.eventual)
    }
}

pub fn filtration(spec: &CodingSpec) -> Result<AlphabetFiltration> {
    let eventual = spec.eventual_alphabet()?;
    let mut sets = Vec::new();
    let mut k = 0;
    loop {
        let s = spec.alphabet_from(k);
        sets.push(s);
        if s == eventual {
            break;
        }
        k += 1;
    }
    Ok(AlphabetFiltration {
        sets,
        eventual,
        stabilization: k,
    })
}

fn card(s: LetterSet) -> i64 {
    s.count_ones() as i64
}

/// Block lengths `|p^k|` for `k = -1..`, cached.
pub struct Lengths<'a> {
    spec: &'a CodingSpec,
    /// `cache[k+1] = |p^k|`
    cache: Vec<BigInt>,
}

impl<'a> Lengths<'a> {
    pub fn new(spec: &'a CodingSpec) -> Self {
        Lengths {
            spec,
            cache: vec![BigInt::zero()],
        }
    }

    pub fn get(&mut self, k: i64) -> Result<BigInt> {
        debug_assert!(k >= -1);
        while self.cache.len() as i64 <= k + 1 {
            let j = self.cache.len() - 1;
            let n = self.spec.n_at(j)?;
            let last = self.cache.last().unwrap();
            self.cache.push((last + 1u32) * n - 1u32);
        }
        Ok(self.cache[(k + 1) as usize].clone())
    }

    /// Smallest `k >= 0` with `l <= |p^k| + 1 + shift`.
    fn level_containing(&mut self, l: &BigInt, shift: i64) -> Result<i64> {
        let mut k = 0;
        loop {
            if *l <= self.get(k)? + 1 + shift {
                return Ok(k);
            }
            k += 1;
        }
    }
}

/// `A_k` with the convention that, without a tail, only explicit entries count.
fn alpha(spec: &CodingSpec, k: usize) -> Result<LetterSet> {
    if !spec.has_depth(k) {
        return Err(Error::Depth {
            needed: k,
            available: spec.a.len().saturating_sub(1),
        });
    }
    Ok(spec.alphabet_from(k))
}

fn chi(s: LetterSet, l: u8) -> i64 {
    set_contains(s, l) as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaValue {
    pub value: BigInt,
    /// Level `k` whose range contains `L`.
    pub k: i64,
    pub branch: &'static str,
}

/// `p(L)` by the closed formulas.
pub fn complexity_formula(spec: &CodingSpec, l: &BigInt) -> Result<FormulaValue> {
    if l.is_negative() {
        return Err(Error::Arg("L must be non-negative".into()));
    }
    let mut len = Lengths::new(spec);
    let p0 = len.get(0)?;
    let a0 = card(alpha(spec, 0)?);
    if *l <= p0 {
        return Ok(FormulaValue {
            value: (a0 - 1) * l + 1,
            k: 0,
            branch: "initial",
        });
    }
    if *l == &p0 + 1 {
        let a1 = alpha(spec, 1)?;
        return Ok(FormulaValue {
            value: (a0 - 1) * l + chi(a1, spec.a_at(0)?),
            k: 0,
            branch: "initial-seam",
        });
    }
    let k = len.level_containing(l, 0)?;
    let pk = len.get(k)?;
    let p1 = len.get(k - 1)?;
    let p2 = len.get(k - 2)?;
    let ku = k as usize;
    let a_km1 = alpha(spec, ku - 1)?;
    let a_k = alpha(spec, ku)?;
    let a_kp1 = alpha(spec, ku + 1)?;
    let prev = spec.a_at(ku - 1)?;
    let cur = spec.a_at(ku)?;
    let nk = spec.n_at(ku)?;
    if nk == 2 {
        let base = (card(a_kp1) - 1) * l + (card(a_km1) - card(a_kp1)) * (&p1 + 1);
        let (x, branch) = if *l <= &pk - &p2 {
            (l - &p1 + &p2, "double-rise")
        } else {
            (&p1 + 1, "double-flat")
        };
        Ok(FormulaValue {
            value: base + chi(a_k, prev) * x,
            k,
            branch,
        })
    } else {
        let head = (&p1 + 1) + (card(a_k) - 1) * l;
        let (y, branch) = if *l <= BigInt::from(2) * &p1 - &p2 + 1 {
            (chi(a_k, prev) * (l - BigInt::from(2) * &p1 + &p2 - 1), "multi-rise")
        } else if *l <= &pk - &p1 {
            (BigInt::zero(), "multi-flat")
        } else {
            (
                -(1 - chi(a_kp1, cur)) * (l - &pk + &p1),
                "multi-fall",
            )
        };
        Ok(FormulaValue {
            value: head + y,
            k,
            branch,
        })
    }
}

pub fn complexity_formula_u64(spec: &CodingSpec, l: u64) -> Result<u64> {
    complexity_formula(spec, &BigInt::from(l))?
        .value
        .to_u64()
        .ok_or_else(|| Error::Range("value does not fit 64 bits".into()))
}

/// `s(L) = p(L+1) - p(L)` by the closed formulas.
pub fn growth_formula(spec: &CodingSpec, l: &BigInt) -> Result<FormulaValue> {
    if l.is_negative() {
        return Err(Error::Arg("L must be non-negative".into()));
    }
    let mut len = Lengths::new(spec);
    let p0 = len.get(0)?;
    if *l < p0 {
        return Ok(FormulaValue {
            value: BigInt::from(card(alpha(spec, 0)?) - 1),
            k: 0,
            branch: "initial",
        });
    }
    if *l == p0 {
        return Ok(FormulaValue {
            value: BigInt::from(card(alpha(spec, 1)?) - 1),
            k: 0,
            branch: "initial-seam",
        });
    }
    // k >= 1 with P1 + 1 <= L <= |p^k|
    let k = len.level_containing(l, -1)?;
    let pk = len.get(k)?;
    let p1 = len.get(k - 1)?;
    let p2 = len.get(k - 2)?;
    let ku = k as usize;
    let a_k = alpha(spec, ku)?;
    let a_kp1 = alpha(spec, ku + 1)?;
    let d = if *l < &pk - &p1 {
        0
    } else {
        card(a_k) - card(a_kp1)
    };
    let e = if *l <= BigInt::from(2) * &p1 - &p2 {
        chi(a_k, spec.a_at(ku - 1)?)
    } else {
        0
    };
    Ok(FormulaValue {
        value: BigInt::from(card(a_k) - 1 - d + e),
        k,
        branch: "growth",
    })
}

/// Alternative form of `p(L)` valid once `A_{k-1} = A_ev`.
pub fn complexity_stable_form(spec: &CodingSpec, l: &BigInt) -> Result<Option<BigInt>> {
    let f = filtration(spec)?;
    let mut len = Lengths::new(spec);
    if *l <= len.get(0)? + 1 {
        return Ok(None);
    }
    let k = len.level_containing(l, 0)?;
    if ((k - 1) as usize) < f.stabilization {
        return Ok(None);
    }
    let p1 = len.get(k - 1)?;
    let p2 = len.get(k - 2)?;
    let ev = card(f.eventual);
    Ok(Some(if *l <= BigInt::from(2) * &p1 - &p2 + 1 {
        ev * l - &p1 + &p2
    } else {
        (ev - 1) * l + &p1 + 1
    }))
}

/// Maximum of `p(L)/L` over the level-`k` range, once `A_{k-1} = A_ev`, and where it is attained.
pub fn quotient_max(spec: &CodingSpec, k: i64) -> Result<(BigRational, BigInt)> {
    let f = filtration(spec)?;
    if k < 1 || ((k - 1) as usize) < f.stabilization {
        return Err(Error::Range(format!(
            "quotient bound needs k >= 1 and A_(k-1) = A_ev (stable from {})",
            f.stabilization
        )));
    }
    let mut len = Lengths::new(spec);
    let at = BigInt::from(2) * len.get(k - 1)? - len.get(k - 2)? + 1;
    let n = BigInt::from(spec.n_at((k - 1) as usize)?);
    let ev = BigInt::from(card(f.eventual));
    let value = BigRational::from_integer(ev) - BigRational::new(&n - 1, BigInt::from(2) * &n - 1);
    Ok((value, at))
}

/// Palindrome complexity `P(L)` by the closed formula.
pub fn palindrome_formula(spec: &CodingSpec, l: &BigInt) -> Result<FormulaValue> {
    if l.is_negative() {
        return Err(Error::Arg("L must be non-negative".into()));
    }
    let mut len = Lengths::new(spec);
    let two = BigInt::from(2);
    let parity = |x: &BigInt| -> i64 { if x.is_odd_big() { 1 } else { 0 } };
    let p0 = len.get(0)?;
    if *l <= p0 {
        return Ok(FormulaValue {
            value: BigInt::from((card(alpha(spec, 0)?) - 1) * parity(l) + 1),
            k: 0,
            branch: "initial",
        });
    }
    let k = len.level_containing(l, -1)?;
    let pk = len.get(k)?;
    let p1 = len.get(k - 1)?;
    let p2 = len.get(k - 2)?;
    let ku = k as usize;
    let a_k = alpha(spec, ku)?;
    let a_kp1 = alpha(spec, ku + 1)?;
    let r = l % (&p1 + 1);
    let rt = l % (&p2 + 1);
    let mut v = (card(a_k) - 1) * parity(l);
    v += parity(&(&p1 + 1 - &r));
    let tail_term = if *l < &pk - &p1 {
        1
    } else {
        chi(a_kp1, spec.a_at(ku)?)
    };
    v += parity(&r) * tail_term;
    let mut branch = "single";
    if set_contains(a_k, spec.a_at(ku - 1)?) && *l <= &two * &p1 - &p2 {
        v += parity(&rt) + parity(&(&p2 + 1 - &rt)) - parity(l);
        branch = "double";
    }
    Ok(FormulaValue {
        value: BigInt::from(v),
        k,
        branch,
    })
}

trait OddBig {
    fn is_odd_big(&self) -> bool;
}

impl OddBig for BigInt {
    fn is_odd_big(&self) -> bool {
        num_integer::Integer::is_odd(self)
    }
}

// ---------------------------------------------------------------------------
// occurrence profile

/// `l(k) = min{j > k : {a_{k+1}, ..., a_j} = A_{k+1}}`.
pub fn ell(spec: &CodingSpec, k: usize) -> Result<usize> {
    let target = alpha(spec, k + 1)?;
    let mut seen: LetterSet = 0;
    let mut j = k;
    loop {
        j += 1;
        seen |= 1 << spec.a_at(j)?;
        if seen == target {
            return Ok(j);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OccurrenceProfile {
    /// `ell[k]` for `k = 0..ell.len()`.
    pub ell: Vec<usize>,
    /// `m_0 = 0 < m_1 < ...`
    pub m: Vec<usize>,
}

/// `m_0 ..= m_{i_max}` and `l` up to `l(m_{i_max})`.
pub fn occurrence_profile(spec: &CodingSpec, i_max: usize) -> Result<OccurrenceProfile> {
    let mut m = vec![0usize];
    while m.len() <= i_max {
        let mi = *m.last().unwrap();
        let li = ell(spec, mi)?;
        let target = alpha(spec, mi + 1)?;
        let mut seen: LetterSet = 0;
        let mut j = li;
        loop {
            seen |= 1 << spec.a_at(j)?;
            if seen == target {
                break;
            }
            j -= 1;
        }
        m.push(j);
    }
    let top = ell(spec, *m.last().unwrap())?;
    let ell_vals = (0..=top.max(*m.last().unwrap()))
        .map(|k| ell(spec, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(OccurrenceProfile { ell: ell_vals, m })
}

/// Covered `L` range `[lo, hi]` of the repetitivity formula for index `i >= 1`.
pub fn repetitivity_range(spec: &CodingSpec, i: usize) -> Result<(BigInt, BigInt)> {
    if i == 0 {
        return Err(Error::Range("the repetitivity formula starts at i = 1".into()));
    }
    let prof = occurrence_profile(spec, i + 1)?;
    let mut len = Lengths::new(spec);
    let (mi, mn) = (prof.m[i] as i64, prof.m[i + 1] as i64);
    Ok((
        len.get(mi)? - len.get(mi - 1)? + 1,
        len.get(mn)? - len.get(mn - 1)?,
    ))
}

/// `R(L)` by the closed formula, for `L` in some covered range.
pub fn repetitivity_formula(spec: &CodingSpec, l: &BigInt) -> Result<FormulaValue> {
    let mut len = Lengths::new(spec);
    let mut i = 1usize;
    loop {
        let prof = occurrence_profile(spec, i + 1)?;
        let (mi, mn) = (prof.m[i] as i64, prof.m[i + 1] as i64);
        let lo = len.get(mi)? - len.get(mi - 1)? + 1;
        let hi = len.get(mn)? - len.get(mn - 1)?;
        if *l < lo {
            return Err(Error::Range(format!(
                "L = {l} is below the covered range (starts at {lo}); use the oracle"
            )));
        }
        if *l <= hi {
            let lm = ell(spec, prof.m[i])? as i64;
            let base = BigInt::from(2) * len.get(lm - 1)? + 1;
            let pm = len.get(mi)?;
            return Ok(if *l <= &pm + 1 {
                FormulaValue {
                    value: base - pm + len.get(mi - 1)? + l,
                    k: mi,
                    branch: "lower",
                }
            } else {
                FormulaValue {
                    value: base + l,
                    k: mi,
                    branch: "upper",
                }
            });
        }
        i += 1;
    }
}

// ---------------------------------------------------------------------------
// verdicts

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessRow {
    pub i: usize,
    pub m_i: usize,
    /// Upper index bound of the product (exclusive).
    pub until: usize,
    pub product: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub condition: String,
    pub verdict: bool,
    pub rule: String,
    pub witness: Vec<WitnessRow>,
}

fn product_n(spec: &CodingSpec, from: usize, until: usize) -> Result<BigUint> {
    let mut p = BigUint::one();
    for j in from..until {
        p *= spec.n_at(j)?;
    }
    Ok(p)
}

enum TailKind {
    Periodic,
    /// Separator letters outside the base, counted once each.
    Growing { outside: usize },
}

fn tail_kind(spec: &CodingSpec) -> Result<TailKind> {
    let t = spec.tail.as_ref().ok_or_else(|| {
        Error::Undecidable("asymptotic verdicts need a spec with a tail".into())
    })?;
    Ok(match &t.letters {
        TailLetters::Periodic(_) => TailKind::Periodic,
        TailLetters::Growing { base, seps } => {
            let mut outside: Vec<u8> = seps.iter().copied().filter(|s| !base.contains(s)).collect();
            outside.sort_unstable();
            outside.dedup();
            TailKind::Growing {
                outside: outside.len(),
            }
        }
    })
}

/// Rows `(i, m_i, l(m_i - 1), prod_{j=m_i+1}^{l(m_i-1)-1} n_j)` for `1 <= i <= rows`.
pub fn boshernitzan_products(spec: &CodingSpec, rows: usize) -> Result<Vec<WitnessRow>> {
    let prof = occurrence_profile(spec, rows)?;
    (1..=rows)
        .map(|i| {
            let mi = prof.m[i];
            let until = ell(spec, mi - 1)?;
            Ok(WitnessRow {
                i,
                m_i: mi,
                until,
                product: product_n(spec, mi + 1, until)?.to_string(),
            })
        })
        .collect()
}

/// Rows `(i, m_i, l(m_i), prod_{j=m_i+1}^{l(m_i)-1} n_j)`.
pub fn repetitivity_products(spec: &CodingSpec, rows: usize) -> Result<Vec<WitnessRow>> {
    let prof = occurrence_profile(spec, rows)?;
    (1..=rows)
        .map(|i| {
            let mi = prof.m[i];
            let until = ell(spec, mi)?;
            Ok(WitnessRow {
                i,
                m_i: mi,
                until,
                product: product_n(spec, mi + 1, until)?.to_string(),
            })
        })
        .collect()
}

fn witness_rows(spec: &CodingSpec) -> usize {
    let t = spec.tail.as_ref().expect("tail checked");
    let period = match &t.letters {
        TailLetters::Periodic(p) => p.len(),
        TailLetters::Growing { .. } => 4,
    };
    (2 * period * t.period_n.len()).clamp(6, 12)
}

pub fn boshernitzan_verdict(spec: &CodingSpec) -> Result<Verdict> {
    let kind = tail_kind(spec)?;
    let ev = card(spec.eventual_alphabet()?);
    let witness = boshernitzan_products(spec, witness_rows(spec))?;
    let (verdict, rule) = if ev <= 2 {
        (true, "two recurrent letters")
    } else {
        match kind {
            TailKind::Periodic => (true, "eventually periodic coding: products bounded"),
            TailKind::Growing { outside } if outside >= 2 => (
                false,
                "growing tail with two separators outside the base: products unbounded",
            ),
            TailKind::Growing { outside: 1 } if ev == 3 => {
                (true, "three recurrent letters with bounded n_k")
            }
            TailKind::Growing { .. } => {
                return Err(Error::Undecidable(
                    "growing tail outside the decided cases".into(),
                ))
            }
        }
    };
    Ok(Verdict {
        condition: "boshernitzan".into(),
        verdict,
        rule: rule.into(),
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepetitivityClass {
    pub alpha: String,
    pub alpha_repetitive: bool,
    pub linearly_repetitive: bool,
    pub rule: String,
    pub witness: Vec<WitnessRow>,
}

pub fn repetitivity_class(spec: &CodingSpec, alpha: &BigRational) -> Result<RepetitivityClass> {
    if *alpha < BigRational::one() {
        return Err(Error::Arg("alpha must be >= 1".into()));
    }
    let kind = tail_kind(spec)?;
    let witness = repetitivity_products(spec, witness_rows(spec))?;
    let is_one = alpha.is_one();
    let (alpha_rep, linear, rule) = match kind {
        TailKind::Periodic => (
            is_one,
            true,
            "eventually periodic coding: products bounded, limsup is 0 for alpha > 1",
        ),
        TailKind::Growing { outside } if outside >= 1 => (
            false,
            false,
            "separator outside the base: l(m_i) - m_i is unbounded but sublinear",
        ),
        TailKind::Growing { .. } => {
            return Err(Error::Undecidable(
                "growing tail whose separators lie in the base".into(),
            ))
        }
    };
    Ok(RepetitivityClass {
        alpha: alpha.to_string(),
        alpha_repetitive: alpha_rep,
        linearly_repetitive: linear,
        rule: rule.into(),
        witness,
    })
}

/// Letters of `A_k`, for display.
pub fn alphabet_letters(spec: &CodingSpec, k: usize) -> Result<Vec<u8>> {
    Ok(set_letters(alpha(spec, k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::bundled;

    fn spec(name: &str) -> CodingSpec {
        bundled(name).unwrap().coding().unwrap()
    }

    fn p(s: &CodingSpec, l: i64) -> i64 {
        complexity_formula(s, &BigInt::from(l)).unwrap().value.to_i64().unwrap()
    }

    #[test]
    fn grigorchuk_values() {
        let g = spec("grigorchuk");
        assert_eq!((1..=4).map(|l| p(&g, l)).collect::<Vec<_>>(), vec![4, 6, 8, 10]);
        assert_eq!(p(&g, 0), 1);
        for k in 2..8i64 {
            let tk = 1i64 << k;
            for l in tk + 1..=2 * tk {
                let want = if l <= 2 * tk - tk / 2 {
                    3 * l - tk + tk / 2
                } else {
                    2 * l + tk
                };
                assert_eq!(p(&g, l), want, "k={k} L={l}");
            }
        }
    }

    #[test]
    fn nonb_values() {
        let s = spec("nonb");
        assert_eq!(p(&s, 2), 7);
        for k in 1..7i64 {
            let tk = 1i64 << k;
            for l in tk + 1..=2 * tk {
                let want = if l <= 2 * tk - tk / 2 {
                    4 * l - tk + tk / 2
                } else {
                    3 * l + tk
                };
                assert_eq!(p(&s, l), want, "k={k} L={l}");
            }
        }
    }

    #[test]
    fn growth_telescopes() {
        for name in ["pd", "grigorchuk", "gen_grigorchuk", "nonb"] {
            let s = spec(name);
            for l in 0..300i64 {
                let g = growth_formula(&s, &BigInt::from(l)).unwrap().value;
                assert_eq!(g, BigInt::from(p(&s, l + 1) - p(&s, l)), "{name} L={l}");
            }
        }
    }

    #[test]
    fn pd_palindromes() {
        let s = spec("pd");
        let v: Vec<i64> = (0..4)
            .map(|l| palindrome_formula(&s, &BigInt::from(l)).unwrap().value.to_i64().unwrap())
            .collect();
        assert_eq!(v, vec![1, 2, 1, 3]);
    }

    #[test]
    fn grigorchuk_profile() {
        let g = spec("grigorchuk");
        let prof = occurrence_profile(&g, 6).unwrap();
        assert!(prof.ell.iter().enumerate().all(|(k, &l)| l == k + 3));
        assert_eq!(prof.m, (0..=6).collect::<Vec<_>>());
        assert_eq!(
            repetitivity_formula(&g, &BigInt::from(5)).unwrap().value,
            BigInt::from(64)
        );
    }

    #[test]
    fn nonb_profile() {
        let s = spec("nonb");
        let prof = occurrence_profile(&s, 5).unwrap();
        for i in 1..=5 {
            assert_eq!(prof.m[i], (i + 1) * (i + 1) - 2);
        }
        for l in 2..7usize {
            for k in (l * l - 2)..((l + 1) * (l + 1) - 2) {
                assert_eq!(prof.ell.get(k).copied().unwrap_or_else(|| ell(&s, k).unwrap()), (l + 2) * (l + 2) - 2);
            }
        }
    }

    #[test]
    fn stable_form_agrees() {
        for name in ["pd", "grigorchuk", "gen_grigorchuk", "nonb"] {
            let s = spec(name);
            for l in 0..600i64 {
                let l = BigInt::from(l);
                if let Some(v) = complexity_stable_form(&s, &l).unwrap() {
                    assert_eq!(v, complexity_formula(&s, &l).unwrap().value, "{name} L={l}");
                }
            }
        }
    }

    #[test]
    fn verdicts() {
        assert!(!boshernitzan_verdict(&spec("nonb")).unwrap().verdict);
        assert!(boshernitzan_verdict(&spec("pd")).unwrap().verdict);
        assert!(boshernitzan_verdict(&spec("grigorchuk")).unwrap().verdict);
        let one = BigRational::one();
        assert!(repetitivity_class(&spec("grigorchuk"), &one).unwrap().linearly_repetitive);
        assert!(!repetitivity_class(&spec("nonb"), &one).unwrap().alpha_repetitive);
    }
}
