#![allow(dead_code)]

use rand::Rng;
use toepl::words::{Alphabet, CodingSpec, Letter, Tail, TailLetters};

pub fn bundled_coding(name: &str) -> CodingSpec {
    toepl::spec_io::bundled(name).unwrap().coding().unwrap()
}

/// A letter different from each of `avoid`, if there is one.
fn pick_letter(rng: &mut impl Rng, sigma: usize, avoid: &[Letter]) -> Option<Letter> {
    let free: Vec<Letter> = (0..sigma as Letter).filter(|l| !avoid.contains(l)).collect();
    (!free.is_empty()).then(|| free[rng.gen_range(0..free.len())])
}

/// Random spec with an eventually periodic tail: `|A| <= max_letters`, `n_k <= max_n`.
pub fn random_tailed_spec(rng: &mut impl Rng, max_letters: usize, max_n: u64) -> CodingSpec {
    let sigma = rng.gen_range(2..=max_letters);
    let names: Vec<String> = (0..sigma).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let alphabet = Alphabet::new(names).unwrap();
    loop {
        let plen = rng.gen_range(2..=4usize);
        let mut period: Vec<Letter> = Vec::new();
        for i in 0..plen {
            let mut avoid = vec![];
            if i > 0 {
                avoid.push(period[i - 1]);
            }
            if i == plen - 1 {
                avoid.push(period[0]);
            }
            match pick_letter(rng, sigma, &avoid) {
                Some(l) => period.push(l),
                None => break,
            }
        }
        if period.len() != plen || period[plen - 1] == period[0] {
            continue;
        }
        let pre = rng.gen_range(0..=2usize);
        let mut a: Vec<Letter> = Vec::new();
        for k in 0..pre {
            let mut avoid = vec![];
            if k > 0 {
                avoid.push(a[k - 1]);
            }
            if k == pre - 1 {
                avoid.push(period[0]);
            }
            match pick_letter(rng, sigma, &avoid) {
                Some(l) => a.push(l),
                None => break,
            }
        }
        if a.len() != pre {
            continue;
        }
        let period_n: Vec<u64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=max_n)).collect();
        let n: Vec<u64> = (0..pre).map(|_| rng.gen_range(2..=max_n)).collect();
        let tail = Tail {
            preperiod: pre,
            letters: TailLetters::Periodic(period),
            period_r: Some(vec![0; period_n.len()]),
            period_n,
        };
        if let Ok(s) = CodingSpec::new(alphabet.clone(), a, n, Some(vec![0; pre]), Some(tail)) {
            return s;
        }
    }
}
