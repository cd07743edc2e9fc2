use proptest::prelude::*;
use prospect_llm::{parse_choice, ParsedChoice};

proptest! {
    #[test]
    fn answers_starting_with_a_letter_parse(
        letter in prop::sample::select(vec!["A", "B"]),
        deco in prop::sample::select(vec!["", "**", "(", "Answer: ", "My choice: ", " "]),
        tail in "[ .,:;!)*\n][ a-zA-Z0-9.,:;'\n]{0,80}",
    ) {
        let close = match deco { "**" => "**", "(" => ")", _ => "" };
        let raw = format!("{deco}{letter}{close}{tail}");
        let want = if letter == "A" { ParsedChoice::A } else { ParsedChoice::B };
        prop_assert_eq!(parse_choice(&raw), want);
    }

    #[test]
    fn invalid_keeps_raw(raw in "[a-z .,]{0,60}") {
        prop_assert_eq!(parse_choice(&raw), ParsedChoice::Invalid(raw.clone()));
    }
}
