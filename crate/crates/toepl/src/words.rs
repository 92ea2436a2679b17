//! Simple Toeplitz words, leading words, Sturmian blocks and rotation words.
//!
//! Letters are interned as ids `0..|A|`; a [`Word`] is a plain id vector.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Letter = u8;
pub type Word = Vec<Letter>;

/// Letter sets are stored as bitmasks, so alphabets are capped at 64 letters.
pub const MAX_LETTERS: usize = 64;

const DEFAULT_BUDGET: u64 = 256 * 1024 * 1024;

/// Upper bound on the number of letters any single materialized word may have.
///
/// Reads `TOEPL_BUDGET_BYTES`; one letter occupies one byte.
pub fn default_budget() -> u64 {
    std::env::var("TOEPL_BUDGET_BYTES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

fn check_budget(len: &BigUint, budget: u64) -> Result<u64> {
    match len.to_u64() {
        Some(l) if l <= budget => Ok(l),
        _ => Err(Error::Budget {
            needed: len.to_string(),
            budget,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::Spec("alphabet needs at least 2 letters".into()));
        }
        if names.len() > MAX_LETTERS {
            return Err(Error::Spec(format!(
                "alphabet has {} letters, at most {MAX_LETTERS} are supported",
                names.len()
            )));
        }
        let distinct: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        if distinct.len() != names.len() {
            return Err(Error::Spec("alphabet letters must be distinct".into()));
        }
        if names.iter().any(|n| n.is_empty()) {
            return Err(Error::Spec("alphabet letters must be non-empty".into()));
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: Letter) -> &str {
        &self.names[id as usize]
    }

    pub fn id(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| i as Letter)
    }

    /// Renders a word. Single-character letter names are concatenated,
    /// longer names are separated by spaces.
    pub fn render(&self, w: &[Letter]) -> String {
        let short = self.names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&l| self.name(l)).collect();
        if short {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let short = self.names.iter().all(|n| n.chars().count() == 1);
        let tokens: Vec<String> = if short && !s.contains(char::is_whitespace) {
            s.chars().map(|c| c.to_string()).collect()
        } else {
            s.split_whitespace().map(str::to_string).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.id(t)
                    .ok_or_else(|| Error::Arg(format!("unknown letter {t:?}")))
            })
            .collect()
    }
}

/// Letter set as a bitmask over letter ids.
pub type LetterSet = u64;

pub fn set_of(letters: impl IntoIterator<Item = Letter>) -> LetterSet {
    letters.into_iter().fold(0, |m, l| m | (1u64 << l))
}

pub fn set_letters(s: LetterSet) -> Vec<Letter> {
    (0..64u8).filter(|&l| s >> l & 1 == 1).collect()
}

pub fn set_contains(s: LetterSet, l: Letter) -> bool {
    s >> l & 1 == 1
}

/// Continuation rule for the coding sequences beyond the explicit entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailLetters {
    /// `a_k = period[(k - preperiod) mod len]`.
    Periodic(Vec<Letter>),
    /// Blocks `base^1 sep_0 base^2 sep_1 base^3 sep_0 ...` starting at the preperiod.
    Growing { base: Vec<Letter>, seps: Vec<Letter> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub preperiod: usize,
    pub letters: TailLetters,
    /// `n_k = period_n[(k - preperiod) mod len]`.
    pub period_n: Vec<u64>,
    pub period_r: Option<Vec<u64>>,
}

impl Tail {
    fn letter(&self, t: usize) -> Letter {
        match &self.letters {
            TailLetters::Periodic(p) => p[t % p.len()],
            TailLetters::Growing { base, seps } => {
                let b = base.len();
                let mut t = t;
                let mut l = 1usize;
                loop {
                    let block = l * b + 1;
                    if t < block {
                        return if t < l * b {
                            base[t % b]
                        } else {
                            seps[(l - 1) % seps.len()]
                        };
                    }
                    t -= block;
                    l += 1;
                }
            }
        }
    }

    /// Letters that occur infinitely often.
    pub fn recurrent(&self) -> LetterSet {
        match &self.letters {
            TailLetters::Periodic(p) => set_of(p.iter().copied()),
            TailLetters::Growing { base, seps } => {
                set_of(base.iter().chain(seps.iter()).copied())
            }
        }
    }
}

/// The coding sequences `(a_k)`, `(n_k)`, `(r_k)` of a simple Toeplitz subshift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingSpec {
    pub alphabet: Alphabet,
    pub a: Vec<Letter>,
    pub n: Vec<u64>,
    pub r: Option<Vec<u64>>,
    pub tail: Option<Tail>,
}

impl CodingSpec {
    pub fn new(
        alphabet: Alphabet,
        a: Vec<Letter>,
        n: Vec<u64>,
        r: Option<Vec<u64>>,
        tail: Option<Tail>,
    ) -> Result<Self> {
        let spec = CodingSpec {
            alphabet,
            a,
            n,
            r,
            tail,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let nl = self.alphabet.len();
        if self.a.len() != self.n.len() {
            return Err(Error::Spec(format!(
                "a has {} entries but n has {}",
                self.a.len(),
                self.n.len()
            )));
        }
        if self.a.is_empty() && self.tail.is_none() {
            return Err(Error::Spec("a must contain at least a_0".into()));
        }
        for (k, &l) in self.a.iter().enumerate() {
            if l as usize >= nl {
                return Err(Error::Spec(format!("a[{k}] is not an alphabet letter")));
            }
        }
        for (k, &n) in self.n.iter().enumerate() {
            if n < 2 {
                return Err(Error::Spec(format!("n[{k}] = {n}: n_k >= 2 required")));
            }
        }
        if let Some(t) = &self.tail {
            if self.a.len() < t.preperiod {
                return Err(Error::Spec(format!(
                    "tail.preperiod = {} but only {} explicit entries",
                    t.preperiod,
                    self.a.len()
                )));
            }
            if t.period_n.is_empty() || t.period_n.iter().any(|&n| n < 2) {
                return Err(Error::Spec(
                    "tail.period_n must be non-empty with n_k >= 2 required".into(),
                ));
            }
            match &t.letters {
                TailLetters::Periodic(p) => {
                    if p.is_empty() {
                        return Err(Error::Spec("tail.period_a must be non-empty".into()));
                    }
                    if p.iter().any(|&l| l as usize >= nl) {
                        return Err(Error::Spec("tail.period_a has an unknown letter".into()));
                    }
                }
                TailLetters::Growing { base, seps } => {
                    if base.len() < 2 || seps.is_empty() {
                        return Err(Error::Spec(
                            "growing tail needs a base of >= 2 letters and >= 1 separator".into(),
                        ));
                    }
                    if base.iter().chain(seps).any(|&l| l as usize >= nl) {
                        return Err(Error::Spec("growing tail has an unknown letter".into()));
                    }
                }
            }
            if let Some(pr) = &t.period_r {
                if pr.len() != t.period_n.len() && t.period_n.len() != 1 {
                    return Err(Error::Spec(
                        "tail.period_r must have the same length as tail.period_n".into(),
                    ));
                }
            }
        }
        if let Some(r) = &self.r {
            for (k, &rk) in r.iter().enumerate() {
                let nk = self.n_at(k)?;
                if rk >= nk {
                    return Err(Error::Spec(format!(
                        "r[{k}] = {rk}: 0 <= r_k < n_k required (n_k = {nk})"
                    )));
                }
            }
        }
        // explicit entries must agree with the tail, and consecutive letters differ
        if let Some(t) = &self.tail {
            for k in t.preperiod..self.a.len() {
                if self.a[k] != t.letter(k - t.preperiod) {
                    return Err(Error::Spec(format!(
                        "a[{k}] disagrees with the tail continuation"
                    )));
                }
                if self.n[k] != t.period_n[(k - t.preperiod) % t.period_n.len()] {
                    return Err(Error::Spec(format!(
                        "n[{k}] disagrees with the tail continuation"
                    )));
                }
            }
        }
        let check_upto = match &self.tail {
            None => self.a.len(),
            Some(t) => {
                let cycle = match &t.letters {
                    TailLetters::Periodic(p) => p.len(),
                    TailLetters::Growing { base, seps } => {
                        // enough blocks to see every separator after both base ends
                        (base.len() + 1) * (2 * seps.len() + 2) * (2 * seps.len() + 3)
                    }
                };
                self.a.len().max(t.preperiod) + 2 * cycle + 2
            }
        };
        for k in 0..check_upto.saturating_sub(1) {
            if self.a_at(k)? == self.a_at(k + 1)? {
                return Err(Error::Spec(format!(
                    "a_{k} = a_{} : consecutive letters must differ",
                    k + 1
                )));
            }
        }
        if let Some(t) = &self.tail {
            if let Some(pr) = &t.period_r {
                for (i, &rk) in pr.iter().enumerate() {
                    let nk = t.period_n[i % t.period_n.len()];
                    if rk >= nk {
                        return Err(Error::Spec(format!(
                            "tail.period_r[{i}] = {rk}: 0 <= r_k < n_k required"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest explicit level when there is no tail; `None` means unbounded.
    pub fn depth(&self) -> Option<usize> {
        match self.tail {
            Some(_) => None,
            None => Some(self.a.len() - 1),
        }
    }

    fn depth_err(&self, k: usize) -> Error {
        Error::Depth {
            needed: k,
            available: self.a.len().saturating_sub(1),
        }
    }

    pub fn has_depth(&self, k: usize) -> bool {
        self.tail.is_some() || k < self.a.len()
    }

    pub fn a_at(&self, k: usize) -> Result<Letter> {
        if k < self.a.len() {
            return Ok(self.a[k]);
        }
        match &self.tail {
            Some(t) => Ok(t.letter(k - t.preperiod)),
            None => Err(self.depth_err(k)),
        }
    }

    pub fn n_at(&self, k: usize) -> Result<u64> {
        if k < self.n.len() {
            return Ok(self.n[k]);
        }
        match &self.tail {
            Some(t) => Ok(t.period_n[(k - t.preperiod) % t.period_n.len()]),
            None => Err(self.depth_err(k)),
        }
    }

    /// `r_k` when known: explicit entry, else the tail's `period_r`.
    pub fn r_at(&self, k: usize) -> Option<u64> {
        if let Some(r) = &self.r {
            if k < r.len() {
                return Some(r[k]);
            }
        }
        let t = self.tail.as_ref()?;
        let pr = t.period_r.as_ref()?;
        let start = t.preperiod.max(self.r.as_ref().map_or(0, Vec::len));
        if k < start {
            return None;
        }
        Some(pr[(k - t.preperiod) % pr.len()])
    }

    pub fn has_r(&self) -> bool {
        self.r.is_some() || self.tail.as_ref().is_some_and(|t| t.period_r.is_some())
    }

    /// Same spec with a different `(r_k)`; tail `period_r` is replaced as well.
    pub fn with_r(&self, r: Vec<u64>, period_r: Option<Vec<u64>>) -> Result<Self> {
        let mut tail = self.tail.clone();
        if let Some(t) = tail.as_mut() {
            t.period_r = period_r;
        }
        CodingSpec::new(self.alphabet.clone(), self.a.clone(), self.n.clone(), Some(r), tail)
    }

    /// The eventual alphabet; needs a tail.
    pub fn eventual_alphabet(&self) -> Result<LetterSet> {
        match &self.tail {
            Some(t) => Ok(t.recurrent()),
            None => Err(Error::Undecidable(
                "the eventual alphabet of a finite spec without tail cannot be certified".into(),
            )),
        }
    }

    /// `A_k = {a_j : j >= k}`. Without a tail only the explicit entries are used.
    pub fn alphabet_from(&self, k: usize) -> LetterSet {
        let mut s: LetterSet = 0;
        for j in k..self.a.len() {
            s |= 1 << self.a[j];
        }
        if let Some(t) = &self.tail {
            s |= t.recurrent();
            // preperiod letters after k that are not recurrent
            for j in k.max(self.a.len())..t.preperiod {
                s |= 1 << self.a_at(j).unwrap_or(0);
            }
        }
        s
    }

    /// `|p^k|` for `k >= -1`.
    pub fn block_len(&self, k: i64) -> Result<BigUint> {
        let mut prod = BigUint::one();
        for j in 0..=k {
            prod *= self.n_at(j as usize)?;
        }
        Ok(prod - 1u32)
    }

    /// `|p^k|` as a machine integer, if it fits.
    pub fn block_len_u64(&self, k: i64) -> Result<Option<u64>> {
        let mut prod: u64 = 1;
        for j in 0..=k {
            match prod.checked_mul(self.n_at(j as usize)?) {
                Some(p) => prod = p,
                None => return Ok(None),
            }
        }
        Ok(Some(prod - 1))
    }

    /// Materializes `p^k`.
    pub fn block(&self, k: i64, budget: u64) -> Result<Word> {
        check_budget(&self.block_len(k)?, budget)?;
        let mut p: Word = Vec::new();
        for j in 0..=k {
            let j = j as usize;
            let n = self.n_at(j)? as usize;
            let a = self.a_at(j)?;
            let mut next = Vec::with_capacity((p.len() + 1) * n - 1);
            for _ in 0..n - 1 {
                next.extend_from_slice(&p);
                next.push(a);
            }
            next.extend_from_slice(&p);
            p = next;
        }
        Ok(p)
    }

    /// Letter at position `i >= 1` of the one-sided limit `p^inf = lim p^k`.
    pub fn p_inf(&self, i: u64) -> Result<Letter> {
        debug_assert!(i >= 1);
        let mut x = i;
        let mut k = 0usize;
        loop {
            let n = self.n_at(k)?;
            if !x.is_multiple_of(n) {
                return self.a_at(k);
            }
            x /= n;
            k += 1;
        }
    }

    /// Prefix `p^inf(1..=len)`.
    pub fn p_inf_prefix(&self, len: u64, budget: u64) -> Result<Word> {
        check_budget(&BigUint::from(len), budget)?;
        (1..=len).map(|i| self.p_inf(i)).collect()
    }

    /// First `j >= k` at which `r_j` leaves the extreme value (0, or `n_j - 1`).
    /// `Ok(None)` means `r` stays extreme forever.
    fn extreme_run_end(&self, k: usize, zero: bool) -> Result<Option<usize>> {
        let is_extreme = |j: usize, rj: u64| -> Result<bool> {
            Ok(if zero { rj == 0 } else { rj + 1 == self.n_at(j)? })
        };
        let explicit = self.r.as_ref().map_or(0, Vec::len);
        let mut j = k;
        while j < explicit {
            if !is_extreme(j, self.r.as_ref().unwrap()[j])? {
                return Ok(Some(j));
            }
            j += 1;
        }
        let Some(t) = &self.tail else {
            return Err(self.depth_err(j));
        };
        let Some(pr) = &t.period_r else {
            return Err(Error::Depth {
                needed: j,
                available: explicit.saturating_sub(1),
            });
        };
        let cycle = pr.len().max(t.period_n.len());
        let stop = j.max(t.preperiod) + cycle;
        while j < stop {
            let rj = self.r_at(j).expect("r known inside the periodic part");
            if !is_extreme(j, rj)? {
                return Ok(Some(j));
            }
            j += 1;
        }
        Ok(None)
    }

    /// Letter at position `x` of the Toeplitz word selected by `(r_k)`;
    /// `None` is the single limit hole of an extended word.
    pub fn toeplitz_letter(&self, x: i64) -> Result<Option<Letter>> {
        if !self.has_r() {
            return Err(Error::Spec("this operation needs the sequence r".into()));
        }
        let mut x = x as i128;
        let mut k = 0usize;
        loop {
            if x == 0 || x == -1 {
                let zero = x == 0;
                match self.extreme_run_end(k, zero)? {
                    None => return Ok(None),
                    Some(j) => return self.a_at(j).map(Some),
                }
            }
            let n = self.n_at(k)? as i128;
            let r = self.r_at(k).ok_or(Error::Depth {
                needed: k,
                available: k.saturating_sub(1),
            })? as i128;
            if Integer::mod_floor(&x, &n) != r {
                return self.a_at(k).map(Some);
            }
            x = Integer::div_floor(&(x - r), &n);
            k += 1;
        }
    }

    /// Whether the word defined by `(r_k)` has a limit hole.
    pub fn is_extended(&self) -> Result<bool> {
        if !self.has_r() {
            return Err(Error::Spec("this operation needs the sequence r".into()));
        }
        // once the periodic part of r is reached, checking one start level suffices
        let limit = self.r.as_ref().map_or(0, Vec::len).max(
            self.tail.as_ref().map_or(0, |t| t.preperiod),
        );
        for zero in [true, false] {
            if self.extreme_run_end(limit, zero)?.is_none() {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl fmt::Display for CodingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a = {}, n = {:?}",
            self.alphabet.render(&self.a),
            self.n
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub k: i64,
    pub word: Word,
}

/// `p^-1, p^0, ..., p^k_max`.
pub fn build_blocks(spec: &CodingSpec, k_max: i64, budget: u64) -> Result<Vec<Block>> {
    if k_max >= 0 && !spec.has_depth(k_max as usize) {
        return Err(spec.depth_err(k_max as usize));
    }
    check_budget(&spec.block_len(k_max)?, budget)?;
    let mut out = vec![Block {
        k: -1,
        word: Vec::new(),
    }];
    for k in 0..=k_max {
        let prev = &out.last().unwrap().word;
        let n = spec.n_at(k as usize)? as usize;
        let a = spec.a_at(k as usize)?;
        let mut w = Vec::with_capacity((prev.len() + 1) * n - 1);
        for _ in 0..n - 1 {
            w.extend_from_slice(prev);
            w.push(a);
        }
        w.extend_from_slice(prev);
        out.push(Block { k, word: w });
    }
    Ok(out)
}

/// Period word of the level-`k` partial word: `p^k` followed by one hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoleFillingState {
    pub k: usize,
    pub period_word: Vec<Option<Letter>>,
    pub period_length: BigUint,
    pub undetermined_residue: BigUint,
}

impl HoleFillingState {
    /// Letter at `x` of the partial word, `None` on the undetermined class.
    pub fn letter_at(&self, x: &BigInt) -> Option<Letter> {
        let p = BigInt::from(self.period_length.clone());
        let shifted: BigInt = x - BigInt::from(self.undetermined_residue.clone()) - 1;
        let idx = shifted.mod_floor(&p);
        self.period_word[idx.to_usize().unwrap()]
    }
}

/// `(r_0 + sum_{j=1..k} r_j n_0...n_{j-1}) mod (|p^k| + 1)`.
pub fn hole_residue(spec: &CodingSpec, k: usize) -> Result<BigUint> {
    if !spec.has_r() {
        return Err(Error::Spec("hole filling needs the sequence r".into()));
    }
    let mut res = BigUint::zero();
    let mut scale = BigUint::one();
    for j in 0..=k {
        let r = spec.r_at(j).ok_or(Error::Depth {
            needed: j,
            available: j.saturating_sub(1),
        })?;
        res += &scale * r;
        scale *= spec.n_at(j)?;
    }
    Ok(res % scale)
}

pub fn hole_fill(spec: &CodingSpec, k: usize, budget: u64) -> Result<HoleFillingState> {
    let residue = hole_residue(spec, k)?;
    let p = spec.block(k as i64, budget)?;
    let mut period_word: Vec<Option<Letter>> = p.into_iter().map(Some).collect();
    period_word.push(None);
    Ok(HoleFillingState {
        k,
        period_length: BigUint::from(period_word.len()),
        period_word,
        undetermined_residue: residue,
    })
}

/// `omega|[lo, hi]` of the Toeplitz word defined by the spec's `(r_k)`.
pub fn toeplitz_window(
    spec: &CodingSpec,
    fill: Option<Letter>,
    lo: i64,
    hi: i64,
) -> Result<Word> {
    if lo > hi {
        return Err(Error::Arg(format!("empty window [{lo}, {hi}]")));
    }
    check_budget(&BigUint::from((hi - lo + 1) as u64), default_budget())?;
    if let Some(f) = fill {
        if let Ok(ev) = spec.eventual_alphabet() {
            if !set_contains(ev, f) {
                return Err(Error::Spec(format!(
                    "fill letter {} is not in the eventual alphabet",
                    spec.alphabet.name(f)
                )));
            }
        }
    }
    (lo..=hi)
        .map(|x| match spec.toeplitz_letter(x)? {
            Some(l) => Ok(l),
            None => fill.ok_or(Error::ExtendedWord(x)),
        })
        .collect()
}

/// `(p^k e p^k)` restricted to `[-R, R]`, with `e` at index `R` of the result.
pub fn leading_window(spec: &CodingSpec, e: Letter, radius: u64) -> Result<Word> {
    let ev = spec.eventual_alphabet()?;
    if !set_contains(ev, e) {
        return Err(Error::Spec(format!(
            "leading words are defined only for recurrent letters; {} is not recurrent",
            spec.alphabet.name(e)
        )));
    }
    check_budget(&BigUint::from(2 * radius + 1), default_budget())?;
    let right: Word = (1..=radius).map(|i| spec.p_inf(i)).collect::<Result<_>>()?;
    let mut w: Word = right.iter().rev().copied().collect();
    w.push(e);
    w.extend_from_slice(&right);
    Ok(w)
}

/// Aperiodicity verdict with the recurrent letters as certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AperiodicityVerdict {
    pub aperiodic: bool,
    pub recurrent: Vec<Letter>,
}

pub fn is_aperiodic(spec: &CodingSpec) -> Result<AperiodicityVerdict> {
    let ev = spec.eventual_alphabet()?;
    let recurrent = set_letters(ev);
    Ok(AperiodicityVerdict {
        aperiodic: recurrent.len() >= 2,
        recurrent,
    })
}

// ---------------------------------------------------------------------------
// Sturmian words

pub const STURM_A: Letter = 0;
pub const STURM_B: Letter = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SturmianTail {
    pub preperiod: usize,
    pub period: Vec<u64>,
}

/// Continued fraction coefficients `n_1, n_2, ...` of `alpha = [0; n_1, n_2, ...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SturmianSpec {
    pub cf: Vec<u64>,
    pub tail: Option<SturmianTail>,
}

impl SturmianSpec {
    pub fn new(cf: Vec<u64>, tail: Option<SturmianTail>) -> Result<Self> {
        if cf.contains(&0) {
            return Err(Error::Spec("continued fraction coefficients must be >= 1".into()));
        }
        if let Some(t) = &tail {
            if t.period.is_empty() || t.period.contains(&0) {
                return Err(Error::Spec(
                    "sturmian tail period must be non-empty with entries >= 1".into(),
                ));
            }
            if cf.len() < t.preperiod {
                return Err(Error::Spec("sturmian tail preperiod exceeds cf".into()));
            }
            for (i, &c) in cf.iter().enumerate().skip(t.preperiod) {
                if c != t.period[(i - t.preperiod) % t.period.len()] {
                    return Err(Error::Spec(format!("cf[{i}] disagrees with the tail")));
                }
            }
        }
        if cf.is_empty() && tail.is_none() {
            return Err(Error::Spec("continued fraction is empty".into()));
        }
        Ok(SturmianSpec { cf, tail })
    }

    /// Golden mean rotation, all coefficients 1.
    pub fn fibonacci() -> Self {
        SturmianSpec {
            cf: vec![1],
            tail: Some(SturmianTail {
                preperiod: 0,
                period: vec![1],
            }),
        }
    }

    pub fn alphabet() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    /// `n_k` for `k >= 1`.
    pub fn n_at(&self, k: usize) -> Result<u64> {
        debug_assert!(k >= 1);
        let i = k - 1;
        if i < self.cf.len() {
            return Ok(self.cf[i]);
        }
        match &self.tail {
            Some(t) => Ok(t.period[(i - t.preperiod) % t.period.len()]),
            None => Err(Error::Depth {
                needed: k,
                available: self.cf.len(),
            }),
        }
    }

    pub fn is_irrational(&self) -> bool {
        self.tail.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SturmianBlocks {
    /// `s_0 ..= s_kmax`.
    pub s: Vec<Word>,
    /// `p[k]` is `s_k` without its last two letters, present for `k >= 2`.
    pub p: Vec<Option<Word>>,
}

pub fn sturmian_blocks(sspec: &SturmianSpec, k_max: usize, budget: u64) -> Result<SturmianBlocks> {
    let mut s: Vec<Word> = vec![vec![STURM_B]];
    if k_max >= 1 {
        let n1 = sspec.n_at(1)? as usize;
        let mut s1 = vec![STURM_B; n1 - 1];
        s1.push(STURM_A);
        s.push(s1);
    }
    for k in 1..k_max {
        let n = sspec.n_at(k + 1)? as usize;
        let len = s[k].len() as u64 * n as u64 + s[k - 1].len() as u64;
        check_budget(&BigUint::from(len), budget)?;
        let mut next = Vec::with_capacity(len as usize);
        for _ in 0..n {
            next.extend_from_slice(&s[k]);
        }
        next.extend_from_slice(&s[k - 1]);
        s.push(next);
    }
    let p = s
        .iter()
        .enumerate()
        .map(|(k, w)| (k >= 2).then(|| w[..w.len() - 2].to_vec()))
        .collect();
    Ok(SturmianBlocks { s, p })
}

/// Consecutive convergents `h_m / q_m` of `[0; n_1, n_2, ...]`.
struct Convergents<'a> {
    spec: &'a SturmianSpec,
    h: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl<'a> Convergents<'a> {
    fn new(spec: &'a SturmianSpec) -> Self {
        // index 0 is [0] = 0/1, index -1 is 1/0 (stored at position 0 of a shifted list)
        Convergents {
            spec,
            h: vec![BigInt::one(), BigInt::zero()],
            q: vec![BigInt::zero(), BigInt::one()],
        }
    }

    /// Convergent number `m >= 0` as `(h, q)`.
    fn get(&mut self, m: usize) -> Result<(BigInt, BigInt)> {
        while self.h.len() < m + 2 {
            let k = self.h.len() - 1; // next coefficient n_k
            let n = BigInt::from(self.spec.n_at(k)?);
            let len = self.h.len();
            let h = &n * &self.h[len - 1] + &self.h[len - 2];
            let q = &n * &self.q[len - 1] + &self.q[len - 2];
            self.h.push(h);
            self.q.push(q);
        }
        Ok((self.h[m + 1].clone(), self.q[m + 1].clone()))
    }
}

fn floor_ratio(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

fn ceil_ratio(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

/// Letters `j = 1..=len` of the rotation coding: `b` iff `{x0 + j alpha} in [0, 1 - alpha)`.
///
/// All comparisons are exact: `floor(x0 + t alpha)` is pinned between two consecutive
/// convergents that bracket `alpha`.
pub fn rotation_word(sspec: &SturmianSpec, x0: &BigRational, len: u64) -> Result<Word> {
    if !sspec.is_irrational() {
        return Err(Error::Spec(
            "rotation words need an irrational alpha (give the continued fraction a tail)".into(),
        ));
    }
    if x0.is_negative() || *x0 >= BigRational::one() {
        return Err(Error::Arg("x0 must lie in [0, 1)".into()));
    }
    check_budget(&BigUint::from(len), default_budget())?;
    let count = len as usize + 2;
    // floors[t] = floor(x0 + t alpha) for t = 0..=len+1
    let mut floors: Vec<Option<BigInt>> = vec![None; count];
    floors[0] = Some(BigInt::zero());
    let mut conv = Convergents::new(sspec);
    let mut m = 1usize;
    let mut pending: Vec<usize> = (1..count).collect();
    while !pending.is_empty() {
        let (h0, q0) = conv.get(m - 1)?;
        let (h1, q1) = conv.get(m)?;
        let c0 = BigRational::new(h0, q0);
        let c1 = BigRational::new(h1, q1);
        let (lo, hi) = if c0 < c1 { (c0, c1) } else { (c1, c0) };
        pending.retain(|&t| {
            let tt = BigRational::from_integer(BigInt::from(t));
            let vlo = x0 + &tt * &lo;
            let vhi = x0 + &tt * &hi;
            let f = floor_ratio(&vlo);
            if f == ceil_ratio(&vhi) - 1 {
                floors[t] = Some(f);
                false
            } else {
                true
            }
        });
        m += 1;
        if m > 10_000 {
            return Err(Error::Depth {
                needed: m,
                available: 10_000,
            });
        }
    }
    let floors: Vec<BigInt> = floors.into_iter().map(Option::unwrap).collect();
    Ok((1..=len as usize)
        .map(|j| {
            if floors[j + 1] == floors[j] {
                STURM_B
            } else {
                STURM_A
            }
        })
        .collect())
}

/// Checks reversal symmetry.
pub fn is_palindrome(w: &[Letter]) -> bool {
    w.iter().eq(w.iter().rev())
}
