use laf_core::{check_wf, parse_term, print_term, Rhs};
use laf_domain_api::{gen_term, TermGenConfig};
use proptest::prelude::*;

const GOLDEN: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../fixtures/golden/gen_seed0.laf"
);

#[test]
fn seed_zero_is_pinned() {
    let t = gen_term(&TermGenConfig::default());
    let printed = print_term(&t);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(GOLDEN, &printed).unwrap();
    }
    let want = std::fs::read_to_string(GOLDEN).expect("golden file");
    assert_eq!(printed, want);
}

#[test]
fn same_seed_same_term() {
    for seed in 0..20 {
        let cfg = TermGenConfig {
            seed,
            ..TermGenConfig::default()
        };
        assert_eq!(gen_term(&cfg), gen_term(&cfg));
    }
}

#[test]
fn thousand_seeds_are_well_formed_and_round_trip() {
    let mut loops = 0;
    for seed in 0..1000 {
        let cfg = TermGenConfig {
            seed,
            op_weights: laf_domain_api::OpWeights {
                bitvec: if seed % 3 == 0 { 2 } else { 0 },
                ..Default::default()
            },
            ..TermGenConfig::default()
        };
        let t = gen_term(&cfg);
        assert!(check_wf(&t).is_ok(), "seed {seed}: {:?}", check_wf(&t));
        assert!(t.ctx.deep_len() <= cfg.max_defs, "seed {seed} too large");
        let back = parse_term(&print_term(&t)).unwrap();
        assert_eq!(back, t, "seed {seed}");
        t.ctx.walk(&mut |d| {
            if let Rhs::Mu(_) = d.rhs {
                loops += 1;
            }
        });
    }
    assert!(loops > 150, "generator rarely emits loops ({loops})");
}

#[test]
fn loop_free_config_has_no_loops() {
    for seed in 0..200 {
        let t = gen_term(&TermGenConfig {
            seed,
            ..TermGenConfig::loop_free()
        });
        t.ctx.walk(&mut |d| assert!(!matches!(d.rhs, Rhs::Mu(_))));
    }
}

proptest! {
    #[test]
    fn round_trip_any_seed(seed in any::<u64>(), max_defs in 1usize..30) {
        let t = gen_term(&TermGenConfig { seed, max_defs, ..TermGenConfig::default() });
        prop_assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
    }
}
