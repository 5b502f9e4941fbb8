mod support;

use genplan_core::{parse_domain, parse_task, render_domain, render_task};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::fuzz::{random_domain, random_task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fuzzed_structures_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = random_domain(&mut rng, 5);
        let text = render_domain(&domain);
        let reparsed = parse_domain(&text).unwrap();
        prop_assert_eq!(&reparsed, &domain);
        // Rendering is a fixed point after one round.
        prop_assert_eq!(render_domain(&reparsed), text);

        let task = random_task(&mut rng, &domain, 8);
        let text = render_task(&task);
        prop_assert_eq!(parse_task(&text, &domain).unwrap(), task);
    }
}

#[test]
fn mixed_case_source_normalizes() {
    let domain = parse_domain(
        "(DEFINE (DOMAIN Delivery) (:REQUIREMENTS :STRIPS :TYPING) (:TYPES Loc)
           (:PREDICATES (isHomeBase ?L - Loc)))",
    )
    .unwrap();
    assert_eq!(domain.name, "delivery");
    assert_eq!(domain.predicates[0].name, "ishomebase");
    assert_eq!(parse_domain(&render_domain(&domain)).unwrap(), domain);
}

#[test]
fn untyped_slot_before_typed_one() {
    let domain = parse_domain(
        "(define (domain s) (:requirements :strips :typing) (:types location man)
           (:predicates (at ?m - object ?l - location) (here ?l - location ?x)))",
    )
    .unwrap();
    assert_eq!(domain.predicates[0].params[0].ty, None);
    assert_eq!(domain.predicates[1].params[1].ty, None);
    let text = render_domain(&domain);
    assert!(text.contains("(at ?m - object ?l - location)"), "{text}");
    assert_eq!(parse_domain(&text).unwrap(), domain);
}
