use proptest::prelude::*;
use tcmc::potentials::{parse_spec, print_config, PotentialError};

fn coeffs() -> impl Strategy<Value = String> {
    prop::collection::vec(-5.0..5.0f64, 1..4)
        .prop_map(|c| c.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" "))
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![0.1..4.0f64, -4.0..-0.1f64]
}

fn settings_block(uv: bool) -> impl Strategy<Value = String> {
    (-2.0..-0.1f64, 0.1..2.0f64, 1usize..40, 3usize..40, 4usize..30, nonzero(), 1usize..6).prop_map(
        move |(a, b, nu, nv, trunc, lambda, sub)| {
            let nu = if uv { 2 * nu + 1 } else { nu + 2 };
            format!("interval = {a:?} {b:?}\ngrid = {nu} {nv}\ntruncation = {trunc}\nlambda = {lambda:?}\nsubsteps = {sub}\n")
        },
    )
}

fn pair_text() -> impl Strategy<Value = String> {
    (coeffs(), coeffs(), coeffs(), coeffs(), nonzero(), settings_block(false), prop::option::of(coeffs())).prop_map(
        |(a, b, g, d, h, s, extra)| {
            let extra = extra.map(|c| format!("term.y.11.-2 = {c}\n")).unwrap_or_default();
            format!("[pair]\nalpha = {a}\nbeta = {b}\ngamma = {g}\ndelta = {d}\nH = {h:?}\n{extra}{s}")
        },
    )
}

fn cauchy_text() -> impl Strategy<Value = String> {
    (coeffs(), coeffs(), prop::collection::vec(-2.0..2.0f64, 1..3), nonzero(), settings_block(true)).prop_map(
        |(s, t, th, h, block)| {
            let theta: String = th.iter().map(|x| format!(" {x:?}")).collect();
            format!("[cauchy]\ns = {s}\nt = {t}\ntheta = 0{theta}\nH = {h:?}\n{block}")
        },
    )
}

fn singular_text() -> impl Strategy<Value = String> {
    (coeffs(), coeffs(), coeffs(), coeffs(), nonzero(), settings_block(true)).prop_map(|(b, g1, gm1, gm3, h, s)| {
        format!("[singular]\nbeta1 = {b}\ngamma1 = {g1}\ngamma_m1 = {gm1}\ngamma_m3 = {gm3}\nH = {h:?}\n{s}")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_configs_parse_back(text in prop_oneof![pair_text(), cauchy_text(), singular_text()]) {
        // data rejected by validation are fine; accepted data must round-trip
        if let Ok(parsed) = parse_spec(&text) {
            let printed = print_config(&parsed.spec, &parsed.settings);
            let again = parse_spec(&printed).expect("printed config parses");
            prop_assert_eq!(&again.spec, &parsed.spec);
            prop_assert_eq!(&again.settings, &parsed.settings);
            prop_assert_eq!(print_config(&again.spec, &again.settings), printed);
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[\\[\\]a-z_=. 0-9\n-]{0,120}") {
        let _ = parse_spec(&text);
    }
}

#[test]
fn generated_configs_are_mostly_accepted() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strategy = prop_oneof![pair_text(), cauchy_text(), singular_text()];
    let accepted = (0..200)
        .filter(|_| parse_spec(&strategy.new_tree(&mut runner).unwrap().current()).is_ok())
        .count();
    assert!(accepted >= 50, "only {accepted} of 200 accepted");
}

#[test]
fn empty_config_is_a_parse_error() {
    assert!(matches!(parse_spec(""), Err(PotentialError::Parse { .. })));
}
