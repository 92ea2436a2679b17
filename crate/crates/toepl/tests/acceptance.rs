//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bundled_coding, random_tailed_spec};
use toepl::closed_forms::{
    boshernitzan_verdict, complexity_formula, complexity_formula_u64,
    palindrome_formula, repetitivity_class, repetitivity_formula, repetitivity_range,
};
use toepl::debruijn::build_graph;
use toepl::oracle::{
    collect_language, collect_sturmian_language, naive_words, power_scan, repetitivity_oracle,
};
use toepl::spectral::{
    gordon_patterns, gordon_verify, leading_source, lyapunov_sequence, measure, pq_diagnostic,
    nesting_violations, spectrum_approx, trace_map_residual, trace_sequence, Direction, Mat2,
    PotentialSpec, TransferContext,
};
use toepl::words::{
    default_budget, is_palindrome, rotation_word, sturmian_blocks, toeplitz_window, CodingSpec,
    SturmianSpec, SturmianTail,
};

type Outcome = Result<String, Box<dyn std::error::Error>>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+).into());
        }
    };
}

const SEED: u64 = 0x70e9_1172;

fn bigint(x: &BigInt) -> u64 {
    x.to_u64().expect("fits in u64")
}

/// Bundled coding specs plus five random tailed specs (|A| <= 4, n_k <= 5).
fn spec_set() -> Vec<(String, CodingSpec)> {
    let mut out: Vec<(String, CodingSpec)> = ["pd", "grigorchuk", "nonb", "gen_grigorchuk"]
        .iter()
        .map(|n| (n.to_string(), bundled_coding(n)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..5 {
        out.push((format!("random{i}"), random_tailed_spec(&mut rng, 4, 5)));
    }
    out
}

fn c1_complexity() -> Outcome {
    let t = Instant::now();
    let mut checked = 0usize;
    for (name, s) in spec_set() {
        let lmax = s.block_len_u64(5)?.expect("small") as usize + 1;
        let idx = collect_language(&s, lmax)?;
        for l in 0..=lmax {
            let f = complexity_formula_u64(&s, l as u64)?;
            let o = idx.complexity(l)?;
            ensure!(f == o, "{name}: p({l}) formula {f} vs oracle {o}");
            checked += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("{checked} values on 9 specs, {secs:.1} s"))
}

fn c2_reference_values() -> Outcome {
    let g = bundled_coding("grigorchuk");
    let idx = collect_language(&g, 5)?;
    for (l, want) in [(1u64, 4u64), (2, 6), (3, 8), (4, 10)] {
        let f = complexity_formula_u64(&g, l)?;
        let o = idx.complexity(l as usize)?;
        ensure!(f == want && o == want, "p({l}): formula {f}, oracle {o}, want {want}");
    }
    // k = 2 branch: 2^k < L <= 2^{k+1}, L <= 3*2^{k-1} gives 3L - 2^{k-1}, else 2L + 2^k
    let idx = collect_language(&g, 9)?;
    for l in 5u64..=8 {
        let want = if l <= 6 { 3 * l - 2 } else { 2 * l + 4 };
        let f = complexity_formula(&g, &BigInt::from(l))?;
        ensure!(f.k == 2, "L = {l} falls in branch k = {}", f.k);
        ensure!(bigint(&f.value) == want, "p({l}) = {} want {want}", f.value);
        ensure!(idx.complexity(l as usize)? == want, "oracle p({l})");
    }
    let nb = bundled_coding("nonb");
    let f = complexity_formula_u64(&nb, 2)?;
    let o = collect_language(&nb, 3)?.complexity(2)?;
    ensure!(f == 7 && o == 7, "non-(B) p(2): formula {f}, oracle {o}");
    Ok("Grigorchuk p(1..4) = 4,6,8,10; p(5..8) = 13,16,18,20; non-(B) p(2) = 7".into())
}

fn c3_palindromes() -> Outcome {
    let mut checked = 0;
    for (name, s) in spec_set() {
        let lmax = s.block_len_u64(5)?.expect("small") as usize + 1;
        let idx = collect_language(&s, lmax)?;
        for l in 0..=lmax {
            let f = bigint(&palindrome_formula(&s, &BigInt::from(l))?.value);
            let o = idx.palindromes(l)?;
            ensure!(f == o, "{name}: P({l}) formula {f} vs oracle {o}");
            checked += 1;
        }
    }
    let pd = bundled_coding("pd");
    let v: Vec<u64> = (0..4)
        .map(|l| palindrome_formula(&pd, &BigInt::from(l)).map(|f| bigint(&f.value)))
        .collect::<Result<_, _>>()?;
    ensure!(v == [1, 2, 1, 3], "period doubling P(0..3) = {v:?}");
    Ok(format!("{checked} values; period doubling P(0..3) = (1,2,1,3)"))
}

fn c4_repetitivity() -> Outcome {
    let mut checked = 0;
    for name in ["pd", "grigorchuk"] {
        let s = bundled_coding(name);
        let mut i = 1;
        loop {
            let (lo, hi) = repetitivity_range(&s, i)?;
            if bigint(&lo) > 130 {
                break;
            }
            for l in bigint(&lo)..=bigint(&hi).min(130) {
                let f = bigint(&repetitivity_formula(&s, &BigInt::from(l))?.value);
                let o = repetitivity_oracle(&s, l as usize)? as u64;
                ensure!(f == o, "{name}: R({l}) formula {f} vs oracle {o}");
                checked += 1;
            }
            i += 1;
        }
    }
    let g = bundled_coding("grigorchuk");
    let f = bigint(&repetitivity_formula(&g, &BigInt::from(5))?.value);
    let o = repetitivity_oracle(&g, 5)?;
    ensure!(f == 64 && o == 64, "Grigorchuk R(5): formula {f}, oracle {o}");
    Ok(format!("{checked} covered values up to L = 130; Grigorchuk R(5) = 64"))
}

fn c5_debruijn() -> Outcome {
    let mut graphs = 0;
    for (name, s) in spec_set() {
        let idx = collect_language(&s, 34)?;
        for l in 0..=32usize {
            let g = build_graph(&idx, l)?;
            let st = g.stats();
            let pl = complexity_formula_u64(&s, l as u64)? as usize;
            let pl1 = complexity_formula_u64(&s, l as u64 + 1)? as usize;
            ensure!(st.vertices == pl, "{name} L={l}: |V| = {} vs p(L) = {pl}", st.vertices);
            ensure!(st.edges == pl1, "{name} L={l}: |E| = {} vs p(L+1) = {pl1}", st.edges);
            let branch: BTreeSet<_> = st.branch_vertices.iter().map(|&v| g.vertices[v].clone()).collect();
            let special: BTreeSet<_> = idx.right_special_words(l)?.into_iter().map(|(w, _)| w).collect();
            ensure!(branch == special, "{name} L={l}: branch vertices differ from right-special words");
            ensure!(g.reversal_is_isomorphism(), "{name} L={l}: reversal is not an isomorphism");
            ensure!(st.arcs_reversal_closed(), "{name} L={l}: arc words not closed under reversal");
            let pal = bigint(&palindrome_formula(&s, &BigInt::from(l))?.value) as usize;
            ensure!(
                st.even_arcs() == pal,
                "{name} L={l}: even self-reverse arcs {} vs P(L) = {pal}",
                st.even_arcs()
            );
            graphs += 1;
        }
    }
    Ok(format!("{graphs} graphs, L <= 32"))
}

fn grigorchuk_with_r(r: Vec<u64>, period_r: Vec<u64>) -> Result<CodingSpec, toepl::Error> {
    bundled_coding("grigorchuk").with_r(r, Some(period_r))
}

fn c6_r_independence() -> Outcome {
    let zero = grigorchuk_with_r(vec![0], vec![0])?;
    let alt = grigorchuk_with_r(vec![0, 1], vec![1, 0])?;
    let lmax = zero.block_len_u64(4)?.unwrap() as usize + 1;
    // fill letter for the extended word of r = 0
    let w0 = toeplitz_window(&zero, Some(1), -20_000, 20_000)?;
    let w1 = toeplitz_window(&alt, None, -20_000, 20_000)?;
    let idx = collect_language(&zero, lmax)?;
    for l in 0..=lmax {
        let a = naive_words(std::slice::from_ref(&w0), l);
        let b = naive_words(std::slice::from_ref(&w1), l);
        let lang: BTreeSet<_> = idx.words(l)?.into_iter().collect();
        ensure!(a == b, "L={l}: r = 0 and alternating r give different words");
        ensure!(a == lang, "L={l}: window words differ from the language");
    }
    Ok(format!("subword sets agree for L <= {lmax}"))
}

fn c7_verdicts() -> Outcome {
    let nb = bundled_coding("nonb");
    let v = boshernitzan_verdict(&nb)?;
    ensure!(!v.verdict, "non-(B) verdict is true");
    ensure!(!v.witness.is_empty(), "no witness rows");
    for row in &v.witness {
        let prod: BigInt = row.product.parse()?;
        let bound = BigInt::from(2).pow(2 * row.i as u32 + 2);
        ensure!(prod >= bound, "row i={}: product {} < 2^(2i+2)", row.i, row.product);
    }
    for name in ["pd", "grigorchuk"] {
        let s = bundled_coding(name);
        ensure!(boshernitzan_verdict(&s)?.verdict, "{name}: (B) verdict false");
        ensure!(
            repetitivity_class(&s, &BigRational::one())?.linearly_repetitive,
            "{name}: not linearly repetitive"
        );
    }
    for (p, q) in [(1, 1), (3, 2), (2, 1)] {
        let alpha = BigRational::new(BigInt::from(p), BigInt::from(q));
        let c = repetitivity_class(&nb, &alpha)?;
        ensure!(!c.alpha_repetitive, "non-(B) is {alpha}-repetitive");
    }
    Ok(format!("non-(B) false with {} witness rows; pd, grigorchuk (B) and linear", v.witness.len()))
}

fn pd_potential() -> PotentialSpec {
    PotentialSpec::schrodinger(vec![0.0, 1.0])
}

fn c8_trace_map() -> Outcome {
    let pd = bundled_coding("pd");
    let pot = pd_potential();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let e = rng.gen_range(-5.0..5.0);
        let taus = trace_sequence(&pd, &pot, e, 12)?;
        for k in 1..=11 {
            let r = trace_map_residual(&taus, k);
            ensure!(r <= 1e-9, "E={e}: residual {r:e} at k={k}");
            worst = worst.max(r);
        }
    }
    let grid: Vec<f64> = (0..10_000).map(|i| -5.0 + 10.0 * i as f64 / 9_999.0).collect();
    let bad = nesting_violations(&pd, &pot, &grid, 10, 10)?;
    ensure!(bad.is_empty(), "nesting fails at (E, j, k) = {:?}", &bad[..bad.len().min(3)]);
    Ok(format!("max residual {worst:.1e} over 100 E; nesting holds on 10^4 grid points"))
}

fn gordon_on(spec: &CodingSpec, rng: &mut ChaCha8Rng, g_table: Vec<f64>) -> Result<(usize, f64), Box<dyn std::error::Error>> {
    let lengths: Vec<usize> = (0..=8i64)
        .map(|k| spec.block_len_u64(k - 1).map(|v| v.unwrap() as usize + 1))
        .collect::<Result<_, _>>()?;
    let radius = 2 * lengths[8] as u64 + 10;
    let mut runs = 0;
    let mut worst_ch = 0.0f64;
    for e in toepl::words::set_letters(spec.eventual_alphabet()?) {
        let src = leading_source(spec, e, radius)?;
        let found = gordon_patterns(&src, &lengths)?;
        for (l, kind) in found {
            for _ in 0..50 {
                let energy = rng.gen_range(-4.0..4.0);
                let phi0 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let ctx = TransferContext::new(src.clone(), PotentialSpec::schrodinger(g_table.clone()), energy);
                let rep = gordon_verify(&ctx, l, kind, Some(phi0))?;
                ensure!(rep.bound_ok, "e={e} l={l} {}: bound fails: {rep:?}", kind.name());
                ensure!(rep.cayley_hamilton_residual <= 1e-9, "e={e} l={l}: CH residual {:e}", rep.cayley_hamilton_residual);
                worst_ch = worst_ch.max(rep.cayley_hamilton_residual);
                runs += 1;
            }
        }
    }
    Ok((runs, worst_ch))
}

fn c9_gordon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let (pd_runs, pd_ch) = gordon_on(&bundled_coding("pd"), &mut rng, vec![0.0, 1.0])?;
    let (g_runs, g_ch) = gordon_on(&bundled_coding("grigorchuk"), &mut rng, vec![0.0, 1.0, -0.5, 0.7])?;
    ensure!(pd_runs > 0 && g_runs > 0, "no cube patterns found ({pd_runs}, {g_runs})");
    let alt = grigorchuk_with_r(vec![0, 1], vec![1, 0])?;
    let p6 = alt.block_len_u64(6)?.unwrap() as i64;
    let w = toeplitz_window(&alt, None, -2 * p6 - 2, 2 * p6 + 2)?;
    let squares: Vec<_> = power_scan(&w, (2 * p6 + 2) as usize)
        .into_iter()
        .filter(|&(l, _)| l as i64 <= p6)
        .collect();
    ensure!(squares.is_empty(), "alternating word has origin squares {squares:?}");
    Ok(format!(
        "{pd_runs} pd and {g_runs} Grigorchuk runs, max CH residual {:.1e}; alternating word square-free up to {p6}",
        pd_ch.max(g_ch)
    ))
}

fn c10_pq() -> Outcome {
    let eighth = BigRational::new(BigInt::from(1), BigInt::from(8));
    let mut min_t: Option<BigRational> = None;
    for name in ["pd", "grigorchuk", "gen_grigorchuk", "nonb"] {
        let s = bundled_coding(name);
        let p3 = s.block_len_u64(3)?.unwrap() as usize;
        let p6 = s.block_len_u64(6)?.unwrap();
        let word = s.p_inf_prefix(p6, default_budget())?;
        let js: Vec<usize> = (1..=p3).collect();
        for (j, v) in pq_diagnostic(&word, &js, p6 as usize)? {
            ensure!(v >= eighth, "{name}: j={j} value {v} < 1/8");
            if min_t.as_ref().is_none_or(|m| v < *m) {
                min_t = Some(v);
            }
        }
    }
    let twelfth = BigRational::new(BigInt::from(1), BigInt::from(12));
    let fib = SturmianSpec::fibonacci();
    let b = sturmian_blocks(&fib, 9, default_budget())?;
    let js: Vec<usize> = (1..=b.s[4].len()).collect();
    let mut min_s: Option<BigRational> = None;
    for (j, v) in pq_diagnostic(&b.s[9], &js, b.s[9].len())? {
        ensure!(v >= twelfth, "Fibonacci: j={j} value {v} < 1/12");
        if min_s.as_ref().is_none_or(|m| v < *m) {
            min_s = Some(v);
        }
    }
    Ok(format!(
        "Toeplitz minimum {} >= 1/8, Fibonacci minimum {} >= 1/12",
        min_t.unwrap(),
        min_s.unwrap()
    ))
}

fn c11_sturmian() -> Outcome {
    let specs = [
        SturmianSpec::fibonacci(),
        SturmianSpec::new(vec![2], Some(SturmianTail { preperiod: 0, period: vec![2] }))?,
        SturmianSpec::new(vec![1, 3, 2], Some(SturmianTail { preperiod: 1, period: vec![3, 2] }))?,
    ];
    for (i, s) in specs.iter().enumerate() {
        let b = sturmian_blocks(s, 11, default_budget())?;
        let n8 = b.s[8].len() as u64;
        let rot = rotation_word(s, &BigRational::from_integer(BigInt::from(0)), n8)?;
        ensure!(rot == b.s[8], "spec {i}: rotation prefix differs from s_8");
        if i == 0 {
            let idx = collect_sturmian_language(s, 201)?;
            for l in 0..=200 {
                ensure!(idx.complexity(l)? == l as u64 + 1, "p({l}) != {}", l + 1);
            }
        }
        for k in 2..=10 {
            let p = b.p[k].as_ref().unwrap();
            ensure!(is_palindrome(p), "spec {i}: p^({k}) not a palindrome");
            let p1 = b.p[k + 1].as_ref().unwrap();
            let lhs: Vec<u8> = b.s[k].iter().chain(p1).copied().collect();
            let rhs: Vec<u8> = b.s[k + 1].iter().chain(p).copied().collect();
            ensure!(lhs == rhs, "spec {i}: s_k p^(k+1) != s_(k+1) p^(k) at k={k}");
        }
    }
    Ok("3 rotation numbers; Fibonacci p(L) = L+1 for L <= 200".into())
}

fn random_jacobi(rng: &mut ChaCha8Rng, letters: usize) -> PotentialSpec {
    let f = (0..letters).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.3) { -1.0 } else { 1.0 }).collect();
    let g = (0..letters).map(|_| rng.gen_range(-1.5..1.5)).collect();
    PotentialSpec::jacobi_letters(f, g).unwrap()
}

fn rel(a: &Mat2, b: &Mat2, scale: f64) -> f64 {
    a.sub(b).norm() / scale.max(1.0)
}

/// Energy at the centre of the widest level-8 band of period doubling.
fn pd_band_centre() -> Result<f64, toepl::Error> {
    let iv = spectrum_approx(&bundled_coding("pd"), &pd_potential(), 8, (-3.5, 3.5), 20_001, 1e-12)?;
    let widest = iv
        .iter()
        .max_by(|a, b| (a.hi - a.lo).total_cmp(&(b.hi - b.lo)))
        .expect("bands");
    Ok(0.5 * (widest.lo + widest.hi))
}

fn c12_cocycles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let pd = bundled_coding("pd");
    let g = bundled_coding("grigorchuk");
    let mut worst_det = 0.0f64;
    let mut worst_comp = 0.0f64;
    for trial in 0..40 {
        let spec = if trial % 2 == 0 { &pd } else { &g };
        let src = leading_source(spec, toepl::words::set_letters(spec.eventual_alphabet()?)[0], 500)?;
        let pot = random_jacobi(&mut rng, spec.alphabet.len());
        let ctx = TransferContext::new(src, pot, rng.gen_range(-3.0..3.0));
        for m in -50..50 {
            let d = (ctx.step_modified(m)?.det() - 1.0).abs();
            ensure!(d <= 1e-14, "det(T~) - 1 = {d:e}");
            worst_det = worst_det.max(d);
        }
        for _ in 0..5 {
            let s = rng.gen_range(-200i64..=200);
            let t = rng.gen_range(-200i64..=200);
            let whole = ctx.cocycle_from(0, s, true)?;
            let first = ctx.cocycle_from(0, t, true)?;
            let rest = ctx.cocycle_from(t, s - t, true)?;
            let r = rel(&whole, &(rest * first), rest.norm() * first.norm());
            ensure!(r <= 1e-9, "composition s={s} t={t}: {r:e}");
            worst_comp = worst_comp.max(r);
            let j = s.abs();
            let back = ctx.cocycle_from(0, -j, true)?;
            let fwd = ctx.cocycle_from(-j, j, true)?;
            let (n1, n2) = (back.norm(), fwd.norm());
            ensure!((n1 - n2).abs() <= 1e-9 * n1.max(1.0), "inverse norm j={j}: {n1} vs {n2}");
            let r = rel(&(back * fwd), &Mat2::IDENTITY, n1 * n2);
            ensure!(r <= 1e-9, "A(-j) A(j, S^-j) deviates from Id by {r:e} at j={j}");
        }
    }
    // cocycle path against the three-term recurrence over 10^4 steps
    let e = pd_band_centre()?;
    let mut worst_sol = 0.0f64;
    for letter in [0u8, 1] {
        let src = leading_source(&pd, letter, 10_005)?;
        let ctx = TransferContext::new(src, pd_potential(), e);
        let phi0 = [0.3, -0.8];
        let mut a = Mat2::IDENTITY;
        let (mut hi, mut lo) = (phi0[0], phi0[1]);
        for j in 1..=10_000i64 {
            a = ctx.step(j - 1)? * a;
            let next = (e - [0.0, 1.0][src_letter(&ctx, j)?]) * hi - lo;
            lo = hi;
            hi = next;
            let c = a.apply(phi0);
            let err = (c[0] - hi).hypot(c[1] - lo) / hi.hypot(lo).max(1e-300);
            worst_sol = worst_sol.max(err);
        }
        ensure!(worst_sol <= 1e-10, "letter {letter}: relative deviation {worst_sol:e}");
    }
    Ok(format!(
        "det dev {worst_det:.1e}, composition {worst_comp:.1e}, solutions {worst_sol:.1e} (E = {e:.6})"
    ))
}

fn src_letter(ctx: &TransferContext, j: i64) -> Result<usize, toepl::Error> {
    Ok(ctx.source.letter(j)? as usize)
}

fn c13_finite_scale() -> Outcome {
    let pd = bundled_coding("pd");
    let pot = pd_potential();
    let mut measures = Vec::new();
    for k in 4..=10 {
        let iv = spectrum_approx(&pd, &pot, k, (-3.5, 3.5), 200_001, 1e-12)?;
        measures.push(measure(&iv));
    }
    for w in measures.windows(2) {
        ensure!(w[1] < w[0], "measure not decreasing: {measures:?}");
    }
    let e = pd_band_centre()?;
    let mut gaps = Vec::new();
    for letter in [0u8, 1] {
        let src = leading_source(&pd, letter, 100_005)?;
        let ctx = TransferContext::new(src, pot.clone(), e);
        let fwd = lyapunov_sequence(&ctx, 100_000, Direction::Forward, 100_000)?;
        let bwd = lyapunov_sequence(&ctx, 100_000, Direction::Backward, 100_000)?;
        let gap = (fwd[0].1 - bwd[0].1).abs();
        ensure!(gap <= 0.05, "letter {letter}: forward {} backward {}", fwd[0].1, bwd[0].1);
        gaps.push(gap);
    }
    Ok(format!(
        "measures k=4..10 {:?}; Lyapunov gaps {:?} at j = 10^5, E = {e:.6}",
        measures.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>(),
        gaps
    ))
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "complexity formula equals oracle", c1_complexity),
        (2, "reference complexity values", c2_reference_values),
        (3, "palindrome formula equals oracle", c3_palindromes),
        (4, "repetitivity formula equals oracle", c4_repetitivity),
        (5, "de Bruijn graph structure", c5_debruijn),
        (6, "independence of r", c6_r_independence),
        (7, "Boshernitzan and repetitivity verdicts", c7_verdicts),
        (8, "trace map and nesting", c8_trace_map),
        (9, "Gordon bound and alternating word", c9_gordon),
        (10, "positivity of quasiweights", c10_pq),
        (11, "Sturmian words", c11_sturmian),
        (12, "cocycle identities", c12_cocycles),
        (13, "finite-scale substitutes", c13_finite_scale),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}").into())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2}: {name}: {detail} [{secs:.1} s]"),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {n:>2}: {name}: {e} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
