use distill_core::pq::{StructuredOperator, Symbol, Word, DEFAULT_DENSE_BUDGET};
use distill_core::protocol::{k_threshold, success_probability};
use distill_core::rational::{int, pow, ratio};
use distill_core::tensor::random::{random_hermitian, random_vector};
use distill_core::tensor::{Bipartition, Party, RegisterLayout};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn symbol() -> impl Strategy<Value = Symbol> {
    prop_oneof![Just(Symbol::P), Just(Symbol::Q), Just(Symbol::R), Just(Symbol::S)]
}

fn structured(width: usize) -> impl Strategy<Value = Vec<(Vec<Symbol>, i64, i64)>> {
    prop::collection::vec((prop::collection::vec(symbol(), width), -9i64..10, 1i64..7), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symbolic_transpose_matches_dense(terms in structured(2), d in 2usize..4) {
        let op = StructuredOperator::from_terms(
            d,
            terms.into_iter().map(|(w, p, q)| (Word(w), ratio(p, q))),
        ).unwrap();
        let dense = op.to_dense(DEFAULT_DENSE_BUDGET).unwrap().partial_transpose(Party::Alice);
        let symbolic = op.pt_substitute().to_dense(DEFAULT_DENSE_BUDGET).unwrap();
        prop_assert!(dense.max_abs_diff(&symbolic).unwrap() < 1e-12);
    }

    #[test]
    fn symbolic_trace_matches_dense(terms in structured(2), d in 2usize..4) {
        let op = StructuredOperator::from_terms(
            d,
            terms.into_iter().map(|(w, p, q)| (Word(w), ratio(p, q))),
        ).unwrap();
        let exact = distill_core::rational::to_f64(&op.trace());
        let dense = op.to_dense(DEFAULT_DENSE_BUDGET).unwrap().trace().re;
        prop_assert!((exact - dense).abs() < 1e-9 * (1.0 + exact.abs()));
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let op = random_hermitian(&mut rng, RegisterLayout::numbered(4, d));
        let twice = op.partial_transpose(Party::Alice).partial_transpose(Party::Alice);
        prop_assert!(op.max_abs_diff(&twice).unwrap() < 1e-14);
        let bob = op.partial_transpose(Party::Bob);
        let full = op.partial_transpose(Party::Alice).partial_transpose(Party::Bob);
        prop_assert!(full.max_abs_diff(&bob.partial_transpose(Party::Alice)).unwrap() < 1e-14);
    }

    #[test]
    fn schmidt_values_square_to_norm(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let layout = RegisterLayout::numbered(4, d);
        let v = random_vector(&mut rng, layout.clone());
        let values = v.schmidt_values(&Bipartition::by_party(&layout)).unwrap();
        let total: f64 = values.iter().map(|s| s * s).sum();
        prop_assert!((total - v.norm().powi(2)).abs() < 1e-10);
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn success_probability_is_a_probability(alpha in 0.0f64..50.0, eps in 0.0f64..10.0, d in 3usize..8) {
        let p = success_probability(alpha, d, eps);
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn k_threshold_is_minimal(num in 1i64..40, den in 1i64..40, d in 3usize..7) {
        let eps = ratio(num, den);
        let k = k_threshold(d, &eps, &int(3)).unwrap();
        let dr = int(d as i64);
        let beta = (&dr + int(1) + &eps) / (&dr - int(1));
        let growth = int(1) + &eps / (&dr + int(1));
        prop_assert!(&beta * pow(&growth, k) > int(3));
        if k > 0 {
            prop_assert!(&beta * pow(&growth, k - 1) <= int(3));
        }
    }
}
