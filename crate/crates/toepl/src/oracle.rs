//! Brute-force language oracle.
//!
//! The language at length `L <= |p^k| + 1` is the set of subwords of the
//! representative texts `p^k e p^k`, `e in A_{k+1}`. All counts here are
//! read off a generalized suffix automaton over these texts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::words::{
    default_budget, set_letters, sturmian_blocks, CodingSpec, Letter, SturmianSpec, Word,
};

const NONE: u32 = u32::MAX;

/// Generalized suffix automaton.
#[derive(Clone, Debug)]
pub struct Sam {
    sigma: usize,
    len: Vec<u32>,
    link: Vec<u32>,
    next: Vec<u32>,
}

impl Sam {
    fn new(sigma: usize) -> Self {
        Sam {
            sigma,
            len: vec![0],
            link: vec![NONE],
            next: vec![NONE; sigma],
        }
    }

    fn add_state(&mut self, len: u32) -> u32 {
        self.len.push(len);
        self.link.push(NONE);
        self.next.extend(std::iter::repeat_n(NONE, self.sigma));
        (self.len.len() - 1) as u32
    }

    fn go(&self, s: u32, c: Letter) -> u32 {
        self.next[s as usize * self.sigma + c as usize]
    }

    fn set(&mut self, s: u32, c: Letter, t: u32) {
        self.next[s as usize * self.sigma + c as usize] = t;
    }

    fn clone_state(&mut self, q: u32, len: u32) -> u32 {
        let cl = self.add_state(len);
        let (src, dst) = (q as usize * self.sigma, cl as usize * self.sigma);
        for i in 0..self.sigma {
            self.next[dst + i] = self.next[src + i];
        }
        self.link[cl as usize] = self.link[q as usize];
        cl
    }

    fn extend(&mut self, last: u32, c: Letter) -> u32 {
        let q = self.go(last, c);
        if q != NONE {
            if self.len[q as usize] == self.len[last as usize] + 1 {
                return q;
            }
            let cl = self.clone_state(q, self.len[last as usize] + 1);
            self.link[q as usize] = cl;
            let mut p = last;
            while p != NONE && self.go(p, c) == q {
                self.set(p, c, cl);
                p = self.link[p as usize];
            }
            return cl;
        }
        let cur = self.add_state(self.len[last as usize] + 1);
        let mut p = last;
        while p != NONE && self.go(p, c) == NONE {
            self.set(p, c, cur);
            p = self.link[p as usize];
        }
        if p == NONE {
            self.link[cur as usize] = 0;
        } else {
            let q = self.go(p, c);
            if self.len[p as usize] + 1 == self.len[q as usize] {
                self.link[cur as usize] = q;
            } else {
                let cl = self.clone_state(q, self.len[p as usize] + 1);
                while p != NONE && self.go(p, c) == q {
                    self.set(p, c, cl);
                    p = self.link[p as usize];
                }
                self.link[q as usize] = cl;
                self.link[cur as usize] = cl;
            }
        }
        cur
    }

    pub fn num_states(&self) -> usize {
        self.len.len()
    }
}

/// Distinct palindromic subwords of `t` as `(length, end index)` pairs.
fn eertree_palindromes(t: &[Letter], sigma: usize) -> Vec<(u32, u32)> {
    // node 0: length -1 root, node 1: empty root
    let mut len: Vec<i64> = vec![-1, 0];
    let mut link: Vec<usize> = vec![0, 0];
    let mut next: Vec<u32> = vec![NONE; 2 * sigma];
    let mut out = Vec::new();
    let mut last = 1usize;
    for (i, &c) in t.iter().enumerate() {
        let fits = |v: usize, len: &Vec<i64>| {
            let j = i as i64 - len[v] - 1;
            j >= 0 && t[j as usize] == c
        };
        let mut v = last;
        while !fits(v, &len) {
            v = link[v];
        }
        let existing = next[v * sigma + c as usize];
        if existing != NONE {
            last = existing as usize;
            continue;
        }
        let node = len.len();
        len.push(len[v] + 2);
        next.extend(std::iter::repeat_n(NONE, sigma));
        let l = if len[node] == 1 {
            1
        } else {
            let mut u = link[v];
            while !fits(u, &len) {
                u = link[u];
            }
            next[u * sigma + c as usize] as usize
        };
        link.push(l);
        next[v * sigma + c as usize] = node as u32;
        last = node;
        out.push((len[node] as u32, i as u32));
    }
    out
}

/// Subword statistics of a finite family of texts up to `max_valid_l`.
#[derive(Clone, Debug)]
pub struct LanguageIndex {
    pub max_valid_l: usize,
    /// Block level of the representative texts, when built from a coding spec.
    pub level: Option<i64>,
    pub texts: Vec<Word>,
    pub sigma: usize,
    sam: Sam,
    /// State reached after reading each prefix of each text.
    prefix_state: Vec<Vec<u32>>,
    /// `counts[L]` = number of distinct words of length `L`, for `L <= max_valid_l`.
    counts: Vec<u64>,
    pal_counts: Vec<u64>,
}

impl LanguageIndex {
    /// Index over arbitrary texts; the caller vouches that every language word
    /// of length `<= max_valid_l` occurs in some text.
    pub fn from_texts(texts: Vec<Word>, sigma: usize, max_valid_l: usize) -> Result<Self> {
        if texts.iter().all(|t| t.len() < max_valid_l) {
            return Err(Error::Range(format!(
                "texts are shorter than max_valid_L = {max_valid_l}"
            )));
        }
        let mut sam = Sam::new(sigma);
        let mut prefix_state = Vec::with_capacity(texts.len());
        for t in &texts {
            let mut last = 0u32;
            for &c in t {
                last = sam.extend(last, c);
            }
        }
        for t in &texts {
            let mut cur = 0u32;
            let ps: Vec<u32> = t
                .iter()
                .map(|&c| {
                    cur = sam.go(cur, c);
                    cur
                })
                .collect();
            prefix_state.push(ps);
        }
        let mut diff = vec![0i64; max_valid_l + 2];
        for v in 1..sam.num_states() {
            let lo = sam.len[sam.link[v] as usize] as usize + 1;
            let hi = sam.len[v] as usize;
            if lo > max_valid_l {
                continue;
            }
            diff[lo] += 1;
            diff[hi.min(max_valid_l) + 1] -= 1;
        }
        let mut counts = vec![1u64; max_valid_l + 1];
        let mut acc = 0i64;
        for l in 1..=max_valid_l {
            acc += diff[l];
            counts[l] = acc as u64;
        }
        let mut idx = LanguageIndex {
            max_valid_l,
            level: None,
            texts,
            sigma,
            sam,
            prefix_state,
            counts,
            pal_counts: Vec::new(),
        };
        idx.pal_counts = idx.palindrome_table();
        Ok(idx)
    }

    /// Counts distinct palindromes per length, deduplicated through automaton states.
    fn palindrome_table(&self) -> Vec<u64> {
        let n = self.sam.num_states();
        // queries grouped by the prefix state that ends them
        let mut queries: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (ti, t) in self.texts.iter().enumerate() {
            for (plen, end) in eertree_palindromes(t, self.sigma) {
                if plen as usize > self.max_valid_l {
                    continue;
                }
                queries[self.prefix_state[ti][end as usize] as usize].push(plen);
            }
        }
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        for v in 1..n {
            children[self.sam.link[v] as usize].push(v as u32);
        }
        let mut found: HashSet<(u32, u32)> = HashSet::new();
        // iterative DFS keeping the root path; lengths along it strictly increase
        let mut path: Vec<u32> = Vec::new();
        let mut stack: Vec<(u32, bool)> = vec![(0, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                path.pop();
                continue;
            }
            path.push(v);
            stack.push((v, true));
            for &q in &queries[v as usize] {
                // first state on the path with len >= q
                let pos = path.partition_point(|&s| (self.sam.len[s as usize]) < q);
                found.insert((path[pos], q));
            }
            for &c in &children[v as usize] {
                stack.push((c, false));
            }
        }
        let mut table = vec![0u64; self.max_valid_l + 1];
        table[0] = 1;
        for (_, l) in found {
            table[l as usize] += 1;
        }
        table
    }

    fn check_len(&self, l: usize) -> Result<()> {
        if l > self.max_valid_l {
            return Err(Error::Range(format!(
                "length {l} exceeds max_valid_L = {}",
                self.max_valid_l
            )));
        }
        Ok(())
    }

    pub fn complexity(&self, l: usize) -> Result<u64> {
        self.check_len(l)?;
        Ok(self.counts[l])
    }

    pub fn growth(&self, l: usize) -> Result<i64> {
        self.check_len(l + 1)?;
        Ok(self.counts[l + 1] as i64 - self.counts[l] as i64)
    }

    pub fn palindromes(&self, l: usize) -> Result<u64> {
        self.check_len(l)?;
        Ok(self.pal_counts[l])
    }

    /// Automaton state of each length-`l` window, indexed by start position.
    pub fn window_ids(&self, l: usize) -> Result<Vec<Vec<u32>>> {
        self.check_len(l)?;
        Ok(self
            .texts
            .iter()
            .map(|t| {
                if l == 0 {
                    return vec![0; t.len() + 1];
                }
                let mut out = Vec::with_capacity(t.len().saturating_sub(l - 1));
                let mut cur = 0u32;
                let mut m = 0usize;
                for &c in t {
                    cur = self.sam.go(cur, c);
                    m += 1;
                    if m > l {
                        m = l;
                        while self.sam.len[self.sam.link[cur as usize] as usize] as usize >= l {
                            cur = self.sam.link[cur as usize];
                        }
                    }
                    if m == l {
                        out.push(cur);
                    }
                }
                out
            })
            .collect())
    }

    /// All words of length `l`, sorted lexicographically, with their state ids.
    pub fn words_with_ids(&self, l: usize) -> Result<Vec<(Word, u32)>> {
        let ids = self.window_ids(l)?;
        let mut seen: HashMap<u32, (usize, usize)> = HashMap::new();
        for (ti, row) in ids.iter().enumerate() {
            for (s, &id) in row.iter().enumerate() {
                seen.entry(id).or_insert((ti, s));
            }
        }
        let mut out: Vec<(Word, u32)> = seen
            .into_iter()
            .map(|(id, (ti, s))| (self.texts[ti][s..s + l].to_vec(), id))
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn words(&self, l: usize) -> Result<Vec<Word>> {
        Ok(self.words_with_ids(l)?.into_iter().map(|(w, _)| w).collect())
    }

    fn state_of(&self, w: &[Letter]) -> Option<u32> {
        let mut cur = 0u32;
        for &c in w {
            if c as usize >= self.sigma {
                return None;
            }
            cur = self.sam.go(cur, c);
            if cur == NONE {
                return None;
            }
        }
        Some(cur)
    }

    pub fn contains(&self, w: &[Letter]) -> Result<bool> {
        self.check_len(w.len())?;
        Ok(self.state_of(w).is_some())
    }

    /// Letters `c` with `wc` in the language.
    pub fn right_extensions(&self, w: &[Letter]) -> Result<Vec<Letter>> {
        self.check_len(w.len() + 1)?;
        let s = self
            .state_of(w)
            .ok_or_else(|| Error::Arg("word is not in the language".into()))?;
        Ok((0..self.sigma as Letter)
            .filter(|&c| self.sam.go(s, c) != NONE)
            .collect())
    }

    /// Words of length `l` with at least two right extensions.
    pub fn right_special_words(&self, l: usize) -> Result<Vec<(Word, Vec<Letter>)>> {
        self.check_len(l + 1)?;
        let mut out = Vec::new();
        for w in self.words(l)? {
            let ext = self.right_extensions(&w)?;
            if ext.len() >= 2 {
                out.push((w, ext));
            }
        }
        Ok(out)
    }

    /// Minimal `R >= l` such that every word of length `R` contains every word of
    /// length `l`, if that `R` is at most `max_valid_l`.
    pub fn repetitivity(&self, l: usize) -> Result<Option<usize>> {
        self.check_len(l)?;
        if l == 0 {
            return Ok(Some(0));
        }
        let ids = self.window_ids(l)?;
        let total = self.counts[l] as usize;
        // need[t] = prefix maximum of g over starts 0..=t, per text
        let mut need: Vec<Vec<u64>> = Vec::with_capacity(ids.len());
        for row in &ids {
            let mut g = vec![u64::MAX; row.len()];
            let mut next_occ: HashMap<u32, usize> = HashMap::new();
            let mut order: BTreeMap<usize, u32> = BTreeMap::new();
            for s in (0..row.len()).rev() {
                let id = row[s];
                if let Some(old) = next_occ.insert(id, s) {
                    order.remove(&old);
                }
                order.insert(s, id);
                if next_occ.len() == total {
                    let far = *order.keys().next_back().unwrap();
                    g[s] = (far - s + l) as u64;
                }
            }
            let mut pm = u64::MIN;
            let prefix: Vec<u64> = g
                .iter()
                .map(|&v| {
                    pm = pm.max(v);
                    pm
                })
                .collect();
            need.push(prefix);
        }
        for r in l..=self.max_valid_l {
            let ok = self.texts.iter().zip(&need).all(|(t, pm)| {
                if t.len() < r {
                    return true;
                }
                pm[t.len() - r] <= r as u64
            });
            if ok {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }
}

/// Smallest `k >= -1` with `|p^k| + 1 >= l_max`.
fn level_for(spec: &CodingSpec, l_max: usize) -> Result<i64> {
    let mut k = -1i64;
    loop {
        match spec.block_len_u64(k)? {
            Some(len) if len + 1 >= l_max as u64 => return Ok(k),
            None => return Ok(k),
            _ => k += 1,
        }
    }
}

/// Representative texts `p^k e p^k` for `e in A_{k+1}`.
pub fn representative_texts(spec: &CodingSpec, k: i64, budget: u64) -> Result<Vec<Word>> {
    let p = spec.block(k, budget)?;
    let total = (2 * p.len() as u64 + 1) * set_letters(spec.alphabet_from((k + 1) as usize)).len() as u64;
    if total > budget {
        return Err(Error::Budget {
            needed: total.to_string(),
            budget,
        });
    }
    if !spec.has_depth((k + 1) as usize) {
        return Err(Error::Depth {
            needed: (k + 1) as usize,
            available: spec.a.len().saturating_sub(1),
        });
    }
    Ok(set_letters(spec.alphabet_from((k + 1) as usize))
        .into_iter()
        .map(|e| {
            let mut t = p.clone();
            t.push(e);
            t.extend_from_slice(&p);
            t
        })
        .collect())
}

/// Language index valid up to length `|p^k| + 1 >= l_max`.
pub fn collect_language(spec: &CodingSpec, l_max: usize) -> Result<LanguageIndex> {
    collect_language_at(spec, level_for(spec, l_max)?)
}

/// Language index built from the level-`k` texts.
pub fn collect_language_at(spec: &CodingSpec, k: i64) -> Result<LanguageIndex> {
    let texts = representative_texts(spec, k, default_budget())?;
    let max_valid = spec
        .block_len_u64(k)?
        .ok_or_else(|| Error::Budget {
            needed: spec.block_len(k).map(|b| b.to_string()).unwrap_or_default(),
            budget: default_budget(),
        })? as usize
        + 1;
    let mut idx = LanguageIndex::from_texts(texts, spec.alphabet.len(), max_valid)?;
    idx.level = Some(k);
    Ok(idx)
}

/// `R(l)` by brute force, raising the text level until the answer fits.
pub fn repetitivity_oracle(spec: &CodingSpec, l: usize) -> Result<usize> {
    let budget = default_budget();
    let mut k = level_for(spec, l)?;
    loop {
        let idx = collect_language_at(spec, k).map_err(|e| match e {
            Error::Budget { .. } | Error::Depth { .. } => Error::BoundExceeded {
                lower_bound: spec
                    .block_len_u64(k - 1)
                    .ok()
                    .flatten()
                    .map_or(u64::MAX, |v| v + 1),
            },
            e => e,
        })?;
        if let Some(r) = idx.repetitivity(l)? {
            return Ok(r);
        }
        let tl: u64 = idx.texts.iter().map(|t| t.len() as u64).sum();
        if tl.saturating_mul(3) > budget {
            return Err(Error::BoundExceeded {
                lower_bound: idx.max_valid_l as u64,
            });
        }
        k += 1;
    }
}

/// Language index of a Sturmian subshift, valid up to `l_max`.
pub fn collect_sturmian_language(sspec: &SturmianSpec, l_max: usize) -> Result<LanguageIndex> {
    let mut k = 1usize;
    loop {
        let b = sturmian_blocks(sspec, k, default_budget())?;
        if b.s[k].len() >= l_max.max(1) {
            break;
        }
        k += 1;
    }
    let b = sturmian_blocks(sspec, k + 3, default_budget())?;
    let text = b.s[k + 3].clone();
    LanguageIndex::from_texts(vec![text], 2, l_max)
}

/// Distinct length-`l` windows of the given texts, by direct hashing.
pub fn naive_words(texts: &[Word], l: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for t in texts {
        if l == 0 {
            out.insert(Vec::new());
            continue;
        }
        for w in t.windows(l) {
            out.insert(w.to_vec());
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CopyCount {
    pub overlapping: u64,
    pub disjoint: u64,
}

/// Occurrences of `u` in `v`; the disjoint count is the greedy earliest-match count.
pub fn count_copies(u: &[Letter], v: &[Letter]) -> Result<CopyCount> {
    if u.is_empty() {
        return Err(Error::Arg("pattern must be non-empty".into()));
    }
    let mut overlapping = 0;
    let mut disjoint = 0;
    let mut free_from = 0usize;
    if u.len() <= v.len() {
        for s in 0..=v.len() - u.len() {
            if &v[s..s + u.len()] == u {
                overlapping += 1;
                if s >= free_from {
                    disjoint += 1;
                    free_from = s + u.len();
                }
            }
        }
    }
    Ok(CopyCount {
        overlapping,
        disjoint,
    })
}

/// Overlapping count of `u` in `p^inf(1..=l)`, divided by `l`.
pub fn frequency_estimate(spec: &CodingSpec, u: &[Letter], l: u64) -> Result<BigRational> {
    if l == 0 {
        return Err(Error::Arg("prefix length must be positive".into()));
    }
    let prefix = spec.p_inf_prefix(l, default_budget())?;
    let c = if u.is_empty() {
        l + 1
    } else {
        count_copies(u, &prefix)?.overlapping
    };
    Ok(BigRational::new(BigInt::from(c), BigInt::from(l)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    /// `w[-2l+1,-l] = w[-l+1,0] = w[1,l]`
    Left3,
    /// `w[-l+1,0] = w[1,l] = w[l+1,2l]`
    Right3,
    /// `w[-2l+1,-l] = w[-l+1,0]`
    Left2,
    /// `w[1,l] = w[l+1,2l]`
    Right2,
}

impl PatternKind {
    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Left3 => "LEFT3",
            PatternKind::Right3 => "RIGHT3",
            PatternKind::Left2 => "LEFT2",
            PatternKind::Right2 => "RIGHT2",
        }
    }
}

/// Repetition patterns adjacent to the origin. Position `x` of the word sits at
/// index `x + origin_offset` of `window`.
pub fn power_scan(window: &[Letter], origin_offset: usize) -> Vec<(usize, PatternKind)> {
    // block [x, x+l) as a slice, if inside the window
    let block = |x: i64, l: usize| -> Option<&[Letter]> {
        let s = usize::try_from(x + origin_offset as i64).ok()?;
        window.get(s..s + l)
    };
    let mut out = Vec::new();
    let max_l = window.len() / 2 + 1;
    for l in 1..=max_l {
        let li = l as i64;
        let left2 = block(-2 * li + 1, l);
        let left1 = block(-li + 1, l);
        let right1 = block(1, l);
        let right2 = block(li + 1, l);
        if let (Some(a), Some(b), Some(c)) = (left2, left1, right1) {
            if a == b && b == c {
                out.push((l, PatternKind::Left3));
            }
        }
        if let (Some(a), Some(b), Some(c)) = (left1, right1, right2) {
            if a == b && b == c {
                out.push((l, PatternKind::Right3));
            }
        }
        if let (Some(a), Some(b)) = (left2, left1) {
            if a == b {
                out.push((l, PatternKind::Left2));
            }
        }
        if let (Some(a), Some(b)) = (right1, right2) {
            if a == b {
                out.push((l, PatternKind::Right2));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::bundled;

    #[test]
    fn sam_counts_match_naive() {
        let texts = vec![vec![0u8, 1, 0, 0, 0, 1, 0, 1, 1], vec![1, 1, 0, 2, 0]];
        let idx = LanguageIndex::from_texts(texts.clone(), 3, 5).unwrap();
        for l in 0..=5 {
            let naive = naive_words(&texts, l);
            assert_eq!(idx.complexity(l).unwrap(), naive.len() as u64, "L={l}");
            assert_eq!(idx.words(l).unwrap(), naive.iter().cloned().collect::<Vec<_>>());
            let pals = naive.iter().filter(|w| crate::words::is_palindrome(w)).count();
            assert_eq!(idx.palindromes(l).unwrap(), pals as u64, "L={l}");
        }
    }

    #[test]
    fn grigorchuk_small_counts() {
        let g = bundled("grigorchuk").unwrap().coding().unwrap();
        let idx = collect_language(&g, 4).unwrap();
        assert_eq!(idx.complexity(1).unwrap(), 4);
        assert_eq!(idx.complexity(2).unwrap(), 6);
        assert_eq!(idx.complexity(4).unwrap(), 10);
        assert_eq!(idx.complexity(0).unwrap(), 1);
        let rs = idx.right_special_words(1).unwrap();
        assert_eq!(rs, vec![(vec![0], vec![1, 2, 3])]);
    }

    #[test]
    fn period_doubling_words() {
        let pd = bundled("pd").unwrap().coding().unwrap();
        let idx = collect_language(&pd, 2).unwrap();
        assert_eq!(idx.words(2).unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert!(idx.complexity(idx.max_valid_l + 1).is_err());
        let idx = collect_language(&pd, 4).unwrap();
        assert_eq!(idx.palindromes(2).unwrap(), 1);
        assert_eq!(idx.palindromes(3).unwrap(), 3);
    }

    #[test]
    fn copies() {
        assert_eq!(
            count_copies(&[0, 0], &[0, 0, 0, 0]).unwrap(),
            CopyCount {
                overlapping: 3,
                disjoint: 2
            }
        );
        assert!(count_copies(&[], &[0]).is_err());
        let u = [1u8, 0, 1];
        assert_eq!(count_copies(&u, &u).unwrap().disjoint, 1);
    }

    #[test]
    fn scan_periodic() {
        let w: Word = (0..20).map(|i| (i % 2) as u8).collect();
        let hits = power_scan(&w, 10);
        assert!(hits.contains(&(2, PatternKind::Left3)));
        assert!(hits.contains(&(2, PatternKind::Right3)));
    }

    #[test]
    fn grigorchuk_r5() {
        let g = bundled("grigorchuk").unwrap().coding().unwrap();
        assert_eq!(repetitivity_oracle(&g, 5).unwrap(), 64);
    }
}
