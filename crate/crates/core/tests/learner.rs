use std::path::PathBuf;

use indlearn::automata::{Alphabet, Dfa, Word};
use indlearn::learner::{learn, LearnOutcome, LearnerConfig, Learner, RsStrategy};
use indlearn::teachers::{check_invariant, Baseline, RmcTeacher, SeparationTeacher, TeacherError};
use indlearn::transducer::RmcModel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn equidist() -> RmcModel {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/equidist");
    RmcModel::new(
        indlearn::format::load_dfa(&dir.join("s0.aut")).unwrap(),
        indlearn::format::load_dfa(&dir.join("sb.aut")).unwrap(),
        indlearn::format::load_transducer(&dir.join("step.trd")).unwrap(),
    )
    .unwrap()
}

fn checked() -> LearnerConfig {
    LearnerConfig {
        self_check: true,
        ..LearnerConfig::default()
    }
}

fn random_dfa(rng: &mut StdRng, n: usize) -> Dfa {
    let sigma = Alphabet::new(["a", "b"]).unwrap();
    let accepting: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let delta: Vec<usize> = (0..2 * n).map(|_| rng.gen_range(0..n)).collect();
    Dfa::from_table(sigma, 0, accepting, delta).unwrap()
}

/// Number of Myhill-Nerode classes, by comparing the residual of every
/// reachable state on all words up to length `n`.
fn brute_force_index(d: &Dfa) -> usize {
    let n = d.state_count();
    let probes = Word::all_up_to(d.alphabet().len(), n);
    let mut reach = std::collections::BTreeSet::new();
    for u in Word::all_up_to(d.alphabet().len(), n) {
        reach.insert(d.run(&u));
    }
    let mut sigs = std::collections::BTreeSet::new();
    for q in reach {
        let sig: Vec<bool> = probes
            .iter()
            .map(|s| d.is_accepting(d.run_from(q, s)))
            .collect();
        sigs.insert(sig);
    }
    sigs.len()
}

#[test]
fn equidist_invariant_for_every_strategy() {
    for rs in [RsStrategy::Small, RsStrategy::Short, RsStrategy::Off] {
        let mut t = RmcTeacher::new(equidist());
        let config = LearnerConfig {
            rs_strategy: rs,
            ..checked()
        };
        let (outcome, stats) = learn(&mut t, config);
        let LearnOutcome::Success(h) = outcome else {
            panic!("{rs:?}: {outcome:?}");
        };
        assert_eq!(check_invariant(t.model(), &h).unwrap(), None);
        assert!(stats.sat_calls >= 1);
        assert_eq!(stats.model_checks, stats.sat_calls - stats.unsat_cores);
    }
}

#[test]
fn singleton_class_recovers_the_language() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(2..=6);
        let target = random_dfa(&mut rng, n);
        let index = brute_force_index(&target);
        let mut t = SeparationTeacher::new(target.clone(), target.complement()).unwrap();
        let (outcome, stats) = learn(&mut t, checked());
        let LearnOutcome::Success(h) = outcome else {
            panic!("{outcome:?}");
        };
        assert!(h.equivalent(&target).unwrap());
        assert!(stats.unsat_cores as usize <= index.saturating_sub(1));
    }
}

#[test]
fn overlapping_samples_are_rejected() {
    let sigma = Alphabet::new(["a", "b"]).unwrap();
    let a = Dfa::from_words(sigma.clone(), [&sigma.parse_word("a").unwrap()]).unwrap();
    let err = SeparationTeacher::new(a.clone(), a).err().unwrap();
    assert_eq!(err, TeacherError::Unsafe(sigma.parse_word("a").unwrap()));
}

#[test]
fn strict_baseline_on_equidist() {
    // reachable configurations keep both tokens equally far from the ends,
    // which is not regular: the strict baseline can only time out
    let mut t = Baseline::strict(RmcTeacher::new(equidist()));
    let config = LearnerConfig {
        timeout: Some(std::time::Duration::from_secs(2)),
        ..checked()
    };
    let mut learner = Learner::new(&mut t, config);
    let outcome = learner.run();
    match outcome {
        LearnOutcome::Success(h) => assert_eq!(check_invariant(&equidist(), &h).unwrap(), None),
        LearnOutcome::Timeout => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn refinement_budget_is_respected() {
    let mut t = RmcTeacher::new(equidist());
    let config = LearnerConfig {
        max_refinements: 0,
        ..checked()
    };
    let (outcome, _) = learn(&mut t, config);
    assert_eq!(outcome, LearnOutcome::Timeout);
}
