//! Randomized automata properties checked against exhaustive enumeration:
//! the regex pipeline preserves the language at every stage, the ambiguity
//! check agrees with direct path counting, and minimization is canonical.

mod common;

use proptest::prelude::*;

use common::{all_strings, count_accepting_paths, random_regex, regex_matches, rng};
use regccrf::automata::{
    ast_to_nfa, check_unambiguous, determinize, minimize_dfa, parse_regex, Alphabet, Nfa,
};

fn abc() -> Alphabet {
    Alphabet::new(["a", "b", "c"]).unwrap()
}

#[test]
fn pipeline_preserves_language_on_random_regexes() {
    let alphabet = abc();
    let mut rng = rng(101);
    for case in 0..120 {
        let ast = random_regex(&mut rng, &alphabet, 3);
        let nfa = match ast_to_nfa(&ast, &alphabet) {
            Ok(nfa) => nfa,
            Err(e) => panic!("case {case}: {e}"),
        };
        let dfa = determinize(&nfa, 100_000).expect("small DFA");
        let minimal = minimize_dfa(&dfa);
        let trimmed = nfa.trim();
        for len in 0..=5 {
            for string in all_strings(alphabet.len(), len) {
                let names: Vec<&str> = string.iter().map(|&i| alphabet.symbol(i)).collect();
                let expected = regex_matches(&ast, &names);
                for (stage, m) in [
                    ("nfa", &nfa),
                    ("trim", &trimmed),
                    ("dfa", &dfa),
                    ("min", &minimal),
                ] {
                    assert_eq!(
                        m.accepts(&string),
                        expected,
                        "case {case} stage {stage}: `{ast}` vs {names:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn rendered_regexes_reparse_to_the_same_language() {
    let alphabet = abc();
    let mut rng = rng(102);
    for _ in 0..200 {
        let ast = random_regex(&mut rng, &alphabet, 3);
        let rendered = ast.to_string();
        let reparsed = parse_regex(&rendered, &alphabet)
            .unwrap_or_else(|e| panic!("`{rendered}` does not reparse: {e}"));
        for len in 0..=4 {
            for string in all_strings(alphabet.len(), len) {
                let names: Vec<&str> = string.iter().map(|&i| alphabet.symbol(i)).collect();
                assert_eq!(
                    regex_matches(&ast, &names),
                    regex_matches(&reparsed, &names),
                    "`{rendered}` changed meaning on {names:?}"
                );
            }
        }
    }
}

/// Shortest number of symbols that takes the product construction to a
/// string with at least two accepting paths, if one exists within `max_len`.
fn shortest_ambiguous_len(nfa: &Nfa, max_len: usize) -> Option<usize> {
    (0..=max_len).find(|&len| {
        all_strings(nfa.alphabet().len(), len)
            .iter()
            .any(|s| count_accepting_paths(nfa, s) >= 2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn ambiguity_check_agrees_with_path_counting(
        num_states in 1usize..=5,
        raw_edges in proptest::collection::vec((0usize..5, 0usize..2, 0usize..5), 0..=8),
        acc_mask in 0u32..32,
    ) {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let edges = raw_edges
            .into_iter()
            .map(|(f, s, t)| regccrf::automata::Edge {
                from: f % num_states,
                symbol: s,
                to: t % num_states,
            })
            .collect();
        let accepting = (0..num_states).filter(|q| acc_mask & (1 << q) != 0);
        let nfa = Nfa::new(alphabet, num_states, accepting, edges).unwrap();

        match check_unambiguous(&nfa) {
            Ok(()) => {
                prop_assert_eq!(shortest_ambiguous_len(&nfa, 6), None);
            }
            Err(witness) => {
                let string = nfa.alphabet().encode(&witness.string).unwrap();
                prop_assert!(count_accepting_paths(&nfa, &string) >= 2,
                    "witness `{}` does not have two paths", witness);
                prop_assert_ne!(&witness.path_a, &witness.path_b);
                // Each reported path must be a real accepting run.
                for path in [&witness.path_a, &witness.path_b] {
                    let mut state = 0usize;
                    for (step, &(from, ref label, to)) in path.iter().enumerate() {
                        prop_assert_eq!(from, state, "step {} starts off-path", step);
                        let symbol = nfa.alphabet().index_of(label).unwrap();
                        prop_assert!(
                            nfa.transitions(from, symbol).iter().any(|e| e.to == to));
                        state = to;
                    }
                    prop_assert!(nfa.is_accepting(state));
                }
                // The witness is as short as exhaustive search can certify.
                if let Some(shortest) = shortest_ambiguous_len(&nfa, witness.string.len()) {
                    prop_assert_eq!(shortest, witness.string.len());
                }
            }
        }
    }

    #[test]
    fn determinization_output_is_deterministic_and_equivalent(
        num_states in 1usize..=5,
        raw_edges in proptest::collection::vec((0usize..5, 0usize..2, 0usize..5), 0..=8),
        acc_mask in 0u32..32,
    ) {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let edges = raw_edges
            .into_iter()
            .map(|(f, s, t)| regccrf::automata::Edge {
                from: f % num_states,
                symbol: s,
                to: t % num_states,
            })
            .collect();
        let accepting = (0..num_states).filter(|q| acc_mask & (1 << q) != 0);
        let nfa = Nfa::new(alphabet, num_states, accepting, edges).unwrap();
        let dfa = determinize(&nfa, 100_000).unwrap();
        prop_assert!(dfa.is_deterministic());
        prop_assert!(check_unambiguous(&dfa).is_ok());
        let minimal = minimize_dfa(&dfa);
        prop_assert!(minimal.num_states() <= dfa.trim().num_states().max(1));
        // Minimization is idempotent and canonical.
        prop_assert_eq!(&minimize_dfa(&minimal), &minimal);
        for len in 0..=6 {
            for string in all_strings(2, len) {
                let expected = nfa.accepts(&string);
                prop_assert_eq!(dfa.accepts(&string), expected);
                prop_assert_eq!(minimal.accepts(&string), expected);
            }
        }
    }
}

#[test]
fn equivalent_regexes_share_a_minimal_dfa() {
    let alphabet = abc();
    let pairs = [
        ("(ab)*", "()|ab(ab)*"),
        ("a|b|c", "c|b|a"),
        ("(a|b)(a|b)", "aa|ab|ba|bb"),
        ("a*", "()|a|aa*a|aa"),
    ];
    for (lhs, rhs) in pairs {
        let compile = |src| {
            minimize_dfa(
                &determinize(
                    &ast_to_nfa(&parse_regex(src, &alphabet).unwrap(), &alphabet).unwrap(),
                    100_000,
                )
                .unwrap(),
            )
        };
        assert_eq!(compile(lhs), compile(rhs), "{lhs} vs {rhs}");
    }
}
