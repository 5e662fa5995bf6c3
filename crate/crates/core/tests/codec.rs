use std::collections::HashSet;

use hstrl::envs::{Environment, Passenger, Taxi, TaxiState};
use hstrl::{DomainSpec, EncodedState, FactoredState};
use proptest::prelude::*;

// Direct evaluation of L = R_1 + sum_{i>=2} R_i * prod_{j<i} card_j.
fn oracle_encode(cards: &[usize], digits: &[usize]) -> u64 {
    let mut l = 0u64;
    let mut w = 1u64;
    for (d, c) in digits.iter().zip(cards) {
        l += *d as u64 * w;
        w *= *c as u64;
    }
    l
}

fn all_digits(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|p| {
                (1..=c).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}

#[test]
fn taxi_domain_is_exhaustively_bijective() {
    let env = Taxi::new(1, 0.0).unwrap();
    let dom = Environment::<f64>::domain(&env).clone();
    assert_eq!(dom.cardinalities(), &[25, 5, 4]);
    let mut image = HashSet::new();
    for cell in 0..25 {
        for p in 0..5 {
            for d in 0..4 {
                let s = TaxiState {
                    taxi: (cell % 5, cell / 5),
                    passenger: if p == 4 { Passenger::InTaxi } else { Passenger::At(p) },
                    destination: d,
                };
                let l = Environment::<f64>::encode(&env, &s);
                assert_eq!(Environment::<f64>::decode(&env, l).unwrap(), s);
                assert!(image.insert(l));
            }
        }
    }
    assert_eq!(image.len(), 500);
    assert_eq!(dom.size(), 500);
}

#[test]
fn univariate_is_identity() {
    let dom = DomainSpec::univariate(60).unwrap();
    for i in 1..=60 {
        let l = dom.encode(&FactoredState::new(vec![i])).unwrap();
        assert_eq!(l, EncodedState(i as u64));
    }
}

#[test]
fn rejects_bad_input() {
    assert!(DomainSpec::new(vec![]).is_err());
    assert!(DomainSpec::new(vec![3, 0]).is_err());
    assert!(DomainSpec::new(vec![usize::MAX, usize::MAX]).is_err());
    let dom = DomainSpec::new(vec![3, 4]).unwrap();
    assert!(dom.encode(&FactoredState::new(vec![0, 1])).is_err());
    assert!(dom.encode(&FactoredState::new(vec![4, 1])).is_err());
    assert!(dom.encode(&FactoredState::new(vec![1])).is_err());
    assert!(dom.decode(EncodedState(dom.min_encoded().0 - 1)).is_err());
    assert!(dom.decode(EncodedState(dom.max_encoded().0 + 1)).is_err());
}

fn cards() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=7, 1..=5)
}

proptest! {
    #[test]
    fn round_trip_and_injective(cards in cards()) {
        let dom = DomainSpec::new(cards.clone()).unwrap();
        let mut image = HashSet::new();
        for digits in all_digits(&cards) {
            let x = FactoredState::new(digits.clone());
            let l = dom.encode(&x).unwrap();
            prop_assert_eq!(l.0, oracle_encode(&cards, &digits));
            prop_assert_eq!(dom.decode(l).unwrap(), x);
            prop_assert!(image.insert(l));
        }
        let product: u64 = cards.iter().map(|&c| c as u64).product();
        prop_assert_eq!(image.len() as u64, product);
        prop_assert_eq!(dom.size(), product);
        // the image is contiguous
        prop_assert_eq!(dom.max_encoded().0 - dom.min_encoded().0 + 1, product);
        prop_assert_eq!(dom.iter().count() as u64, product);
    }
}
