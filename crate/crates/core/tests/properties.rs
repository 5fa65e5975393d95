use proptest::prelude::*;

use wvpa::hankel::{block_rank, build_block};
use wvpa::linalg::{numerical_rank, svd, Matrix};
use wvpa::nested_words::{
    decode, encode, enumerate_all, enumerate_well_matched, validate, Alphabet, BaseLetter, NestedWord, TaggedLetter,
    TaggedWord,
};
use wvpa::wvpa::{random_wvpa, Wvpa};
use wvpa::FunctionOracle;

fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

/// Well-matched words over `{a, b}`: unmatched returns become internals and
/// open calls are closed at the end.
fn well_matched(max_ops: usize) -> impl Strategy<Value = TaggedWord> {
    prop::collection::vec((0u8..3, 0usize..2), 0..max_ops).prop_map(|ops| {
        let mut depth = 0usize;
        let mut letters = Vec::new();
        for (kind, b) in ops {
            let base = BaseLetter(b);
            letters.push(match kind {
                1 => {
                    depth += 1;
                    TaggedLetter::call(base)
                }
                2 if depth > 0 => {
                    depth -= 1;
                    TaggedLetter::ret(base)
                }
                _ => TaggedLetter::internal(base),
            });
        }
        letters.extend((0..depth).map(|_| TaggedLetter::ret(BaseLetter(0))));
        TaggedWord::new(letters)
    })
}

fn matrix(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |d| Matrix::from_row_major(r, c, d).unwrap())
    })
}

fn automaton() -> impl Strategy<Value = Wvpa> {
    (1usize..=3, 1usize..=2, any::<u64>()).prop_map(|(n, g, seed)| random_wvpa(n, &ab(), g, seed).unwrap())
}

proptest! {
    #[test]
    fn decode_then_encode(w in well_matched(12)) {
        let nw = decode(&w).unwrap();
        prop_assert!(validate(&nw).is_empty());
        prop_assert_eq!(encode(&nw).unwrap(), w);
    }

    #[test]
    fn encode_then_decode(w in well_matched(12)) {
        let nw: NestedWord = decode(&w).unwrap();
        let again = decode(&encode(&nw).unwrap()).unwrap();
        prop_assert_eq!(again, nw);
    }

    #[test]
    fn text_syntax_round_trip(w in well_matched(12)) {
        let sigma = ab();
        prop_assert_eq!(sigma.parse_word(&sigma.format_word(&w)).unwrap(), w);
    }

    #[test]
    fn svd_reconstructs(m in matrix(7)) {
        prop_assume!(!m.is_zero());
        let s = svd(&m).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&m) < 1e-10 * (1.0 + m.max_abs()));
        prop_assert!(s.sigma.windows(2).all(|p| p[0] >= p[1]) && s.sigma.iter().all(|&x| x >= 0.0));
        let utu = &s.u.transpose() * &s.u;
        prop_assert!(utu.max_abs_diff(&Matrix::identity(utu.rows())) < 1e-10);
    }

    #[test]
    fn rank_of_product_bounded(a in matrix(5), b in matrix(5)) {
        let b = Matrix::from_fn(a.cols(), b.cols(), |i, j| b[(i % b.rows(), j)]);
        let p = &a * &b;
        prop_assert!(numerical_rank(&p, 1e-9) <= numerical_rank(&a, 1e-9).min(numerical_rank(&b, 1e-9)));
    }

    #[test]
    fn behavior_is_a_homomorphism(a in automaton(), u in well_matched(8), v in well_matched(8)) {
        let mu = a.word_matrix(u.letters()).unwrap();
        let mv = a.word_matrix(v.letters()).unwrap();
        let muv = a.word_matrix(u.concat(&v).letters()).unwrap();
        prop_assert!((&mu * &mv).max_abs_diff(&muv) <= 1e-9 * muv.max_abs().max(1.0));
    }

    #[test]
    fn nesting_rule(a in automaton(), u in well_matched(8), c in 0usize..2, r in 0usize..2) {
        let (c, r) = (BaseLetter(c), BaseLetter(r));
        let inner = a.word_matrix(u.letters()).unwrap();
        let outer = a.word_matrix(u.wrap(c, r).letters()).unwrap();
        prop_assert!(a.nest(c, r, &inner).max_abs_diff(&outer) <= 1e-12 * outer.max_abs().max(1.0));
    }

    #[test]
    fn automaton_json_round_trip(a in automaton()) {
        prop_assert_eq!(Wvpa::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn nested_rank_at_most_states_squared(n in 1usize..=3, seed in any::<u64>()) {
        let sigma = Alphabet::new(["a"]).unwrap();
        let f = FunctionOracle::automaton(random_wvpa(n, &sigma, 2, seed).unwrap());
        let labels = enumerate_well_matched(&sigma, 5);
        let b = build_block(&f, &labels, &labels).unwrap();
        prop_assert!(block_rank(&b, 1e-7) <= n * n);
    }
}

#[test]
fn enumeration_is_shortlex_and_complete() {
    let sigma = ab();
    let ws = enumerate_well_matched(&sigma, 6);
    assert!(ws.windows(2).all(|p| p[0] < p[1]));
    let brute: Vec<TaggedWord> = enumerate_all(&sigma, 6).into_iter().filter(TaggedWord::is_well_matched).collect();
    assert_eq!(ws, brute);
}

#[test]
fn counts_follow_the_recurrence() {
    for k in 1..=3usize {
        let symbols: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
        let sigma = Alphabet::new(symbols).unwrap();
        let mut m = vec![1usize];
        for len in 1..=6usize {
            let nested: usize = (0..len.saturating_sub(1)).map(|i| m[i] * m[len - 2 - i]).sum();
            m.push(k * m[len - 1] + k * k * nested);
        }
        let ws = enumerate_well_matched(&sigma, 6);
        let counts: Vec<usize> = (0..=6).map(|l| ws.iter().filter(|w| w.len() == l).count()).collect();
        assert_eq!(counts, m, "k = {k}");
    }
}
