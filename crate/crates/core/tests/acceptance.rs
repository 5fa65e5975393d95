//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;

use wvpa::hankel::{block_rank, build_block, stabilized_block, word_hankel_rank_growth};
use wvpa::linalg::Matrix;
use wvpa::nested_words::{enumerate_all, enumerate_well_matched, Alphabet, TaggedWord};
use wvpa::synthesis::{synthesize, verify_equivalence, SynthesisOptions, SynthesisReport};
use wvpa::wvpa::random_wvpa;
use wvpa::{Error, FunctionOracle};

struct Outcome {
    pass: bool,
    detail: String,
}

fn unary() -> Alphabet {
    Alphabet::new(["a"]).unwrap()
}

fn words(sigma: &Alphabet, texts: &[&str]) -> Vec<TaggedWord> {
    texts.iter().map(|t| sigma.parse_word(t).unwrap()).collect()
}

fn pair_count_block() -> Outcome {
    let sigma = unary();
    let labels = words(&sigma, &["eps", "a", "<a a>", "a a", "<a a a>", "<a <a a> a>"]);
    let expected = Matrix::from_rows(&[
        [0.0, 0.0, 1.0, 0.0, 1.0, 2.0],
        [0.0, 0.0, 1.0, 0.0, 1.0, 2.0],
        [1.0, 1.0, 2.0, 1.0, 2.0, 3.0],
        [0.0, 0.0, 1.0, 0.0, 1.0, 2.0],
        [1.0, 1.0, 2.0, 1.0, 2.0, 3.0],
        [2.0, 2.0, 3.0, 2.0, 3.0, 4.0],
    ])
    .unwrap();
    let b = build_block(&FunctionOracle::ParenCount, &labels, &labels).unwrap();
    let exact = b.entries() == &expected;
    let rank = block_rank(&b, 1e-9);
    Outcome { pass: exact && rank == 2, detail: format!("entries exact={exact}, rank={rank}") }
}

fn paren_synthesis() -> (Outcome, Option<SynthesisReport>) {
    let sigma = unary();
    let opts = SynthesisOptions { verify_len: 10, ..Default::default() };
    let rep = match synthesize(&FunctionOracle::ParenCount, &sigma, &opts) {
        Ok(r) => r,
        Err(e) => return (Outcome { pass: false, detail: format!("synthesis failed: {e}") }, None),
    };
    let up_to_six = verify_equivalence(&rep.automaton, &FunctionOracle::ParenCount, &sigma, 6).unwrap();
    let (states, gamma) = (rep.automaton.states(), rep.automaton.gamma());
    let err = rep.roundtrip.max_abs_error.max(up_to_six.max_abs_error);
    let pass = states == 2 && gamma == 2 && up_to_six.words_checked == 89 && err < 1e-6;
    let detail = format!(
        "states={states}, gamma={gamma}, max abs error {err:.2e} over {} words of length <= 10 ({} of length <= 6)",
        rep.roundtrip.words_checked, up_to_six.words_checked
    );
    (Outcome { pass, detail }, Some(rep))
}

fn rank_bound() -> Outcome {
    let sigma = unary();
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let n = 1 + (seed % 3) as usize;
        let gamma = 1 + (seed % 2) as usize;
        let f = FunctionOracle::automaton(random_wvpa(n, &sigma, gamma, seed).unwrap());
        let s = stabilized_block(&f, &sigma, 2, 8, 1e-7).unwrap();
        if s.rank > n * n {
            failures.push(format!("seed {seed}: rank {} > {}", s.rank, n * n));
        }
    }
    Outcome { pass: failures.is_empty(), detail: format!("50 automata, failures: {failures:?}") }
}

fn resynthesis() -> (Outcome, Vec<SynthesisReport>) {
    let sigma = unary();
    let mut passed = 0;
    let mut diagnostics = Vec::new();
    let mut silent = Vec::new();
    let mut reports = Vec::new();
    for seed in 100..120u64 {
        let gamma = 1 + (seed % 2) as usize;
        let f = FunctionOracle::automaton(random_wvpa(2, &sigma, gamma, seed).unwrap());
        match synthesize(&f, &sigma, &SynthesisOptions::default()) {
            Ok(rep) if rep.roundtrip.max_rel_error < 1e-6 => {
                passed += 1;
                reports.push(rep);
            }
            Ok(rep) => silent.push(format!("seed {seed}: relative error {:.2e}", rep.roundtrip.max_rel_error)),
            Err(e @ (Error::NoNonzeroBasis(_) | Error::NotInSpan { .. })) => diagnostics.push(format!("seed {seed}: {e}")),
            Err(e) => silent.push(format!("seed {seed}: unexpected error {e}")),
        }
    }
    let pass = passed >= 18 && silent.is_empty();
    let detail = format!("{passed}/20 passed; diagnostics {diagnostics:?}; unflagged failures {silent:?}");
    (Outcome { pass, detail }, reports)
}

fn dyck_contrast() -> Outcome {
    let sigma = unary();
    let f = FunctionOracle::DyckOne;
    let nested: Vec<usize> = (0..=6)
        .map(|len| {
            let labels = enumerate_well_matched(&sigma, len);
            block_rank(&build_block(&f, &labels, &labels).unwrap(), 1e-9)
        })
        .collect();
    let growth = word_hankel_rank_growth(&f, &sigma, &[2, 4, 6], 1e-9);
    let increasing = growth.windows(2).all(|w| w[1].1 > w[0].1);
    let large = growth.iter().all(|&(len, rank)| rank > len / 2);
    let pass = nested.iter().all(|&r| r == 1) && increasing && large;
    Outcome { pass, detail: format!("nested ranks {nested:?}, word ranks {growth:?}") }
}

fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

fn semantics() -> Outcome {
    let sigma = unary();
    let ws = enumerate_well_matched(&sigma, 6);
    let a_letter = sigma.letter("a").unwrap();
    let mut hom: f64 = 0.0;
    let mut nest: f64 = 0.0;
    let mut identity = true;
    for seed in 0..5u64 {
        let a = random_wvpa(2 + (seed % 2) as usize, &sigma, 2, seed).unwrap();
        identity &= a.word_matrix(&[]).unwrap() == Matrix::identity(a.states());
        let mats: Vec<Matrix> = ws.iter().map(|w| a.word_matrix(w.letters()).unwrap()).collect();
        for (u, mu) in ws.iter().zip(&mats) {
            for (v, mv) in ws.iter().zip(&mats) {
                let muv = a.word_matrix(u.concat(v).letters()).unwrap();
                hom = hom.max(rel_diff(&(mu * mv), &muv));
            }
            let wrapped = a.word_matrix(u.wrap(a_letter, a_letter).letters()).unwrap();
            nest = nest.max(rel_diff(&a.nest(a_letter, a_letter, mu), &wrapped));
        }
    }
    let pass = identity && hom < 1e-9 && nest < 1e-9;
    Outcome { pass, detail: format!("M_eps = I: {identity}, homomorphism {hom:.2e}, nesting {nest:.2e}") }
}

fn identities(reports: &[&SynthesisReport]) -> Outcome {
    let worst = reports.iter().fold((0.0f64, 0.0f64), |(l1, l2), r| (l1.max(r.identities.value), l2.max(r.identities.nesting)));
    let pass = !reports.is_empty() && worst.0 < 1e-8 && worst.1 < 1e-8;
    Outcome {
        pass,
        detail: format!("{} automata, value residual {:.2e}, nesting residual {:.2e}", reports.len(), worst.0, worst.1),
    }
}

fn enumeration() -> Outcome {
    let sigma = unary();
    let count = |ws: &[TaggedWord]| (0..=6).map(|l| ws.iter().filter(|w| w.len() == l).count()).collect::<Vec<_>>();
    let direct = count(&enumerate_well_matched(&sigma, 6));
    let filtered: Vec<TaggedWord> = enumerate_all(&sigma, 6).into_iter().filter(TaggedWord::is_well_matched).collect();
    let brute = count(&filtered);
    let pass = direct == [1, 1, 2, 4, 9, 21, 51] && brute == direct;
    Outcome { pass, detail: format!("counts {direct:?}, brute force {brute:?}") }
}

fn main() -> ExitCode {
    let (c2, paren) = paren_synthesis();
    let (c4, random) = resynthesis();
    let mut for_identities: Vec<&SynthesisReport> = paren.iter().collect();
    for_identities.extend(&random);
    let outcomes = [
        ("pair-count Hankel block and rank", pair_count_block()),
        ("paren_count synthesis round trip", c2),
        ("rank bound for random automata", rank_bound()),
        ("re-synthesis of random automata", c4),
        ("Dyck contrast", dyck_contrast()),
        ("evaluation semantics", semantics()),
        ("value and nesting identities on synthesized automata", identities(&for_identities)),
        ("enumeration counts", enumeration()),
    ];
    let mut all = true;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        all &= o.pass;
        println!("criterion {}: {} - {name} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
