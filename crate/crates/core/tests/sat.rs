use indlearn::sat::{CoreShrink, Lit, SatOutcome, Solver, Var};
use proptest::prelude::*;

type Clause = Vec<(usize, bool)>;

fn satisfiable(n: usize, clauses: &[Clause], fixed: &[(usize, bool)]) -> bool {
    (0u32..1 << n).any(|bits| {
        let val = |v: usize| bits >> v & 1 == 1;
        fixed.iter().all(|&(v, s)| val(v) == s) && clauses.iter().all(|c| c.iter().any(|&(v, s)| val(v) == s))
    })
}

fn clause_strategy(n: usize) -> impl Strategy<Value = Clause> {
    proptest::collection::vec((0..n, any::<bool>()), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_truth_table(
        batches in proptest::collection::vec(proptest::collection::vec(clause_strategy(10), 0..25), 1..4),
        assumed in proptest::collection::vec((0usize..10, any::<bool>()), 0..5),
    ) {
        let n = 10;
        let mut solver = Solver::new();
        let vars: Vec<Var> = (0..n).map(|_| solver.new_var()).collect();
        let lit = |(v, s): (usize, bool)| vars[v].lit(s);
        let mut added: Vec<Clause> = Vec::new();
        for batch in batches {
            for c in batch {
                let lits: Vec<Lit> = c.iter().map(|&x| lit(x)).collect();
                solver.add_clause(&lits);
                added.push(c);
            }
            let assumptions: Vec<Lit> = assumed.iter().map(|&x| lit(x)).collect();
            let expected = satisfiable(n, &added, &assumed);
            match solver.solve(&assumptions) {
                SatOutcome::Sat(m) => {
                    prop_assert!(expected);
                    for c in &added {
                        prop_assert!(c.iter().any(|&x| m.lit(lit(x))));
                    }
                    for &a in &assumptions {
                        prop_assert!(m.lit(a));
                    }
                }
                SatOutcome::Unsat(core) => {
                    prop_assert!(!expected);
                    prop_assert!(core.iter().all(|l| assumptions.contains(l)));
                    let fixed: Vec<(usize, bool)> = core
                        .iter()
                        .map(|l| (vars.iter().position(|v| *v == l.var()).unwrap(), l.is_positive()))
                        .collect();
                    prop_assert!(!satisfiable(n, &added, &fixed));
                    for mode in [CoreShrink::OnePass, CoreShrink::Fixpoint] {
                        let small = solver.shrink_core(&core, mode).unwrap();
                        prop_assert!(small.iter().all(|l| core.contains(l)));
                        let fixed: Vec<(usize, bool)> = small
                            .iter()
                            .map(|l| (vars.iter().position(|v| *v == l.var()).unwrap(), l.is_positive()))
                            .collect();
                        prop_assert!(!satisfiable(n, &added, &fixed));
                        // minimal: dropping any literal makes it satisfiable
                        for i in 0..fixed.len() {
                            let mut rest = fixed.clone();
                            rest.remove(i);
                            prop_assert!(satisfiable(n, &added, &rest));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn selector_guarded_cores_replay() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(3);
    let mut unsat = 0;
    for _ in 0..50 {
        let mut solver = Solver::new();
        let vars: Vec<Var> = (0..8).map(|_| solver.new_var()).collect();
        let sels: Vec<Var> = (0..30).map(|_| solver.new_var()).collect();
        for s in &sels {
            let mut c = vec![s.neg()];
            for _ in 0..rng.gen_range(1..=2) {
                c.push(vars[rng.gen_range(0..8)].lit(rng.gen()));
            }
            solver.add_clause(&c);
        }
        let assumptions: Vec<Lit> = sels.iter().map(|s| s.pos()).collect();
        if let SatOutcome::Unsat(core) = solver.solve(&assumptions) {
            let core = solver.shrink_core(&core, CoreShrink::OnePass).unwrap();
            assert!(!solver.solve(&core).is_sat());
            unsat += 1;
        }
    }
    assert!(unsat > 10);
}
