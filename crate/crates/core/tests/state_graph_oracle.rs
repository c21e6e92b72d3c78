use std::collections::HashMap;

use inmaca_core::{enumerate_state_graph, evolve, Dynamics, FuzzyState, MacaRule, RuleVector};
use proptest::prelude::*;

/// Crisp successor read bit by bit from the Wolfram numbers, null boundary.
fn successor(numbers: &[u8], state: u32) -> u32 {
    let n = numbers.len() as i32;
    let bit = |i: i32| if (0..n).contains(&i) { (state >> i) & 1 } else { 0 };
    let mut next = 0;
    for (i, &rule) in numbers.iter().enumerate() {
        let i = i as i32;
        let hood = (bit(i - 1) << 2) | (bit(i) << 1) | bit(i + 1);
        next |= (((rule >> hood) & 1) as u32) << i;
    }
    next
}

fn cycle_from(numbers: &[u8], mut s: u32) -> Vec<u32> {
    let mut seen = HashMap::new();
    while !seen.contains_key(&s) {
        seen.insert(s, ());
        s = successor(numbers, s);
    }
    let mut cyc = vec![s];
    let mut c = successor(numbers, s);
    while c != s {
        cyc.push(c);
        c = successor(numbers, c);
    }
    cyc.sort();
    cyc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_match_brute_force(idx in prop::collection::vec(0usize..16, 1..=8)) {
        let numbers: Vec<u8> = idx.iter().map(|&i| MacaRule::from_index(i).number()).collect();
        let rv = RuleVector::from_numbers(&numbers).unwrap();
        let g = enumerate_state_graph(&rv).unwrap();
        let n = numbers.len();
        let mut sig_basin = HashMap::new();
        let mut basin_cycle = HashMap::new();
        for s in 0..(1u32 << n) {
            prop_assert_eq!(g.successor[s as usize], successor(&numbers, s));
            let b = g.basin_of[s as usize];
            let cyc = cycle_from(&numbers, s);
            prop_assert_eq!(basin_cycle.entry(b).or_insert_with(|| cyc.clone()), &cyc);
            let bits: Vec<bool> = (0..n).map(|i| (s >> i) & 1 == 1).collect();
            let sig = evolve(&rv, &FuzzyState::from_bits(&bits), &Dynamics::default()).unwrap();
            prop_assert_eq!(sig.cycle_len(), cyc.len());
            prop_assert_eq!(*sig_basin.entry(sig).or_insert(b), b);
        }
        prop_assert_eq!(sig_basin.len(), g.attractors.len());
    }
}
