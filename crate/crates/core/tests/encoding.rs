use std::path::PathBuf;

use indlearn::automata::{Alphabet, Dfa, Word};
use indlearn::encoding::{prefixes_from_core, Encoder, FamilyCounts, TableSolution};
use indlearn::sat::CoreShrink;
use indlearn::table::{ObservationTable, TriBool};
use indlearn::teachers::{CachedTeacher, RmcTeacher, SeparationTeacher, Teacher};
use indlearn::transducer::RmcModel;
use proptest::prelude::*;

fn equidist() -> RmcModel {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/equidist");
    RmcModel::new(
        indlearn::format::load_dfa(&dir.join("s0.aut")).unwrap(),
        indlearn::format::load_dfa(&dir.join("sb.aut")).unwrap(),
        indlearn::format::load_transducer(&dir.join("step.trd")).unwrap(),
    )
    .unwrap()
}

fn w(sigma: &Alphabet, s: &str) -> Word {
    sigma.parse_word(s).unwrap()
}

fn table_for(t: &mut dyn Teacher, prefixes: &[Word], suffixes: &[Word]) -> ObservationTable {
    let mut oracle = CachedTeacher::new(t);
    let mut table = ObservationTable::new(oracle.alphabet().clone());
    table.extend_and_fill(prefixes, suffixes, &mut oracle).unwrap();
    table
}

/// Clause counts recomputed from the family definitions over a whole table.
fn expected_counts(table: &ObservationTable) -> FamilyCounts {
    let p: Vec<Word> = table.prefixes().cloned().collect();
    let s = table.suffixes();
    let k = table.alphabet().len();
    let n = p.len();
    let mut c = FamilyCounts {
        basis_eps: 1,
        basis_pa: n - 1,
        reach: n - 1,
        det: n * k * n * (n - 1) / 2,
        succ: n * k * n,
        clos: n * k,
        ind: table.pairs().len(),
        ..FamilyCounts::default()
    };
    for (i, x) in p.iter().enumerate() {
        if !x.is_empty() {
            c.sharp += i;
        }
    }
    for q in &p {
        for a in table.alphabet().letters() {
            let qa = q.push(a);
            for r in &p {
                if *r == qa {
                    continue;
                }
                for suffix in s {
                    let u = table.cell_value(&qa.concat(suffix)).unwrap();
                    let v = table.cell_value(&r.concat(suffix)).unwrap();
                    c.cong += match (u.as_bool(), v.as_bool()) {
                        (Some(x), Some(y)) => usize::from(x != y),
                        (None, None) => 2,
                        _ => 1,
                    };
                }
            }
        }
    }
    c
}

#[test]
fn worked_table_counts() {
    let mut t = RmcTeacher::new(equidist());
    let sigma = t.alphabet().clone();
    let table = table_for(
        &mut t,
        &[w(&sigma, "o"), w(&sigma, "x")],
        &[w(&sigma, "x"), w(&sigma, "ox")],
    );
    let mut enc = Encoder::new(CoreShrink::OnePass);
    enc.sync(&table).unwrap();
    assert_eq!(enc.counts(), expected_counts(&table));
    assert_eq!(enc.counts().total(), enc.clause_count());
    match enc.solve(&table, None).unwrap().unwrap() {
        TableSolution::Sat(h) => {
            enc.check_solution(&table, &h).unwrap();
            assert!(enc.extends(h.model()));
        }
        TableSolution::Unsat(core) => panic!("{core:?}"),
    }
}

#[test]
fn complete_trivial_table_is_sat_with_single_state() {
    let sigma = Alphabet::new(["a", "b"]).unwrap();
    let all = Dfa::universal(sigma.clone());
    let mut t = SeparationTeacher::new(all.clone(), all.complement()).unwrap();
    let table = table_for(&mut t, &[], &[]);
    let mut enc = Encoder::new(CoreShrink::OnePass);
    enc.sync(&table).unwrap();
    let TableSolution::Sat(h) = enc.solve(&table, None).unwrap().unwrap() else {
        panic!("expected a model");
    };
    assert_eq!(h.basis(), &[Word::empty()]);
    assert!(h.dfa().equivalent(&all).unwrap());
}

#[test]
fn single_selector_core() {
    // ε and a differ on ε, so ε needs a successor on a that is not ε
    let sigma = Alphabet::new(["a"]).unwrap();
    let l = Dfa::new(sigma.clone(), 2, 0, [1], [(0, 0, 1), (1, 0, 1)]).unwrap();
    let mut t = SeparationTeacher::new(l.clone(), l.complement()).unwrap();
    let table = table_for(&mut t, &[], &[]);
    let mut enc = Encoder::new(CoreShrink::Fixpoint);
    enc.sync(&table).unwrap();
    let TableSolution::Unsat(core) = enc.solve(&table, None).unwrap().unwrap() else {
        panic!("expected a core");
    };
    assert_eq!(core, vec![(Word::empty(), 0)]);
    assert_eq!(prefixes_from_core(&core, &table), vec![w(&sigma, "a")]);
}

fn random_dfa(n: usize, acc: &[bool], delta: &[usize]) -> Dfa {
    let sigma = Alphabet::new(["a", "b"]).unwrap();
    Dfa::from_table(sigma, 0, acc[..n].to_vec(), delta[..2 * n].iter().map(|d| d % n).collect()).unwrap()
}

fn words(raw: &[Vec<u8>]) -> Vec<Word> {
    raw.iter().map(|v| Word::from_letters(v.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Growing a table step by step emits the same clauses (closedness
    /// aside) as encoding the final table at once, and both agree on
    /// satisfiability.
    #[test]
    fn incremental_matches_one_shot(
        n in 1usize..5,
        acc in proptest::collection::vec(any::<bool>(), 5),
        delta in proptest::collection::vec(0usize..5, 10),
        steps in proptest::collection::vec(
            (proptest::collection::vec(proptest::collection::vec(0u8..2, 0..4), 0..2),
             proptest::collection::vec(proptest::collection::vec(0u8..2, 1..4), 0..2)),
            1..4),
    ) {
        let target = random_dfa(n, &acc, &delta);
        let mut t = SeparationTeacher::new(target.clone(), target.complement()).unwrap();
        let mut oracle = CachedTeacher::new(&mut t);
        let mut table = ObservationTable::new(target.alphabet().clone());
        let mut inc = Encoder::new(CoreShrink::OnePass);
        table.extend_and_fill([], [], &mut oracle).unwrap();
        inc.sync(&table).unwrap();
        for (ps, ss) in &steps {
            table.extend_and_fill(&words(ps), &words(ss), &mut oracle).unwrap();
            inc.sync(&table).unwrap();
        }
        let mut fresh = Encoder::new(CoreShrink::OnePass);
        fresh.sync(&table).unwrap();
        let (a, b) = (inc.counts(), fresh.counts());
        prop_assert_eq!(b, expected_counts(&table));
        prop_assert_eq!((a.cong, a.det, a.succ, a.sharp, a.reach, a.basis_pa), (b.cong, b.det, b.succ, b.sharp, b.reach, b.basis_pa));
        let x = inc.solve(&table, None).unwrap().unwrap();
        let y = fresh.solve(&table, None).unwrap().unwrap();
        prop_assert_eq!(matches!(x, TableSolution::Sat(_)), matches!(y, TableSolution::Sat(_)));
        if let TableSolution::Sat(h) = &x {
            inc.check_solution(&table, h).unwrap();
            for p in h.basis() {
                prop_assert_eq!(h.accepts(p), table.cell_value(p).unwrap() == TriBool::One);
            }
        }
    }

    /// A shrunk core never names more frontier words than the raw one.
    #[test]
    fn shrinking_only_removes(
        n in 2usize..6,
        acc in proptest::collection::vec(any::<bool>(), 6),
        delta in proptest::collection::vec(0usize..6, 12),
        ss in proptest::collection::vec(proptest::collection::vec(0u8..2, 1..4), 0..3),
    ) {
        let target = random_dfa(n, &acc, &delta);
        let mut t = SeparationTeacher::new(target.clone(), target.complement()).unwrap();
        let table = table_for(&mut t, &[], &words(&ss));
        let mut cores = Vec::new();
        for shrink in [CoreShrink::Off, CoreShrink::OnePass, CoreShrink::Fixpoint] {
            let mut enc = Encoder::new(shrink);
            enc.sync(&table).unwrap();
            match enc.solve(&table, None).unwrap().unwrap() {
                TableSolution::Unsat(core) => cores.push(prefixes_from_core(&core, &table)),
                TableSolution::Sat(_) => return Ok(()),
            }
        }
        for c in &cores {
            prop_assert!(!c.is_empty());
        }
        prop_assert!(cores[1].iter().all(|p| cores[0].contains(p)));
        prop_assert!(cores[2].iter().all(|p| cores[0].contains(p)));
    }
}
