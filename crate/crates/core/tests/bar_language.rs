//! M̄ accepts more than the substitution image: it may read one gap of `D`
//! before simulating the first letter.

use omega_cfl::bar::{bar_as_substitution_expr, bar_language_expr, BarMachine};
use omega_cfl::kleene::Verdict;
use omega_cfl::verify::{ones_expr, oracle_bound};
use omega_cfl::words::{sym, Lasso};

#[test]
fn leading_gap_words_separate_the_descriptions() {
    let e = ones_expr().unwrap();
    let bm = BarMachine::build(&e.to_bpda().unwrap(), &sym("A")).unwrap();
    let image = bar_as_substitution_expr(&e, &sym("A")).unwrap();
    let language = bar_language_expr(&e, &sym("A")).unwrap();
    for text in ["(A1)^w", "(1A001)^w", "(1A111)^w", "0A01(1A)^w"] {
        let w = Lasso::parse(text).unwrap();
        assert!(bm.bpda.accepts_lasso(&w).unwrap(), "{text}");
        assert_eq!(image.lasso_oracle(&w, oracle_bound(&w)).unwrap(), Verdict::No, "{text}");
        assert_eq!(language.lasso_oracle(&w, oracle_bound(&w)).unwrap(), Verdict::Yes, "{text}");
    }
}

#[test]
fn image_words_are_accepted() {
    let e = ones_expr().unwrap();
    let bm = BarMachine::build(&e.to_bpda().unwrap(), &sym("A")).unwrap();
    let image = bar_as_substitution_expr(&e, &sym("A")).unwrap();
    for (text, want) in [("(1A1)^w", true), ("0A1(1A)^w", true), ("(0A)^w", false), ("(A)^w", false)] {
        let w = Lasso::parse(text).unwrap();
        let expected = if want { Verdict::Yes } else { Verdict::No };
        assert_eq!(image.lasso_oracle(&w, oracle_bound(&w)).unwrap(), expected, "{text}");
        assert_eq!(bm.bpda.accepts_lasso(&w).unwrap(), want, "{text}");
    }
}
