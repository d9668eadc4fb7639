//! Acceptance gate: one test (and one pass/fail line) per criterion. The
//! suites themselves live in `qctlii::suites` and are also reachable via
//! `qctlii selftest`.

fn run(index: usize) {
    let (name, suite) = qctlii::suites::criteria().remove(index);
    match suite() {
        Ok(stats) => println!("criterion {} ({name}): pass - {stats}", index + 1),
        Err(msg) => {
            println!("criterion {} ({name}): FAIL - {msg}", index + 1);
            panic!("criterion {} ({name}) failed: {msg}", index + 1);
        }
    }
}

#[test]
fn criterion_1_structure_semantics_differential() {
    run(0);
}

#[test]
fn criterion_2_structural_translation() {
    run(1);
}

#[test]
fn criterion_3_quantifier_free_unfolding_invariance() {
    run(2);
}

#[test]
fn criterion_4_curated_tree_semantics_cases() {
    run(3);
}

#[test]
fn criterion_5_automata_law_suites() {
    run(4);
}

#[test]
fn criterion_6_parity_solver_vs_brute_force() {
    run(5);
}

#[test]
fn criterion_7_ltl_pipeline() {
    run(6);
}

#[test]
fn criterion_8_hierarchy_gate() {
    run(7);
}
