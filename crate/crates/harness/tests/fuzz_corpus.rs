//! Replays the checked-in fuzz corpus through the fuzz targets' checks.

use std::path::PathBuf;

#[path = "../../../fuzz/src/lib.rs"]
mod checks;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let bytes = std::fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn replay(target: &str, check: fn(&[u8]), parses: impl Fn(&str) -> bool) {
    let mut accepted = 0;
    for (path, bytes) in seeds(target) {
        check(&bytes);
        if std::str::from_utf8(&bytes).is_ok_and(&parses) {
            accepted += 1;
        }
        eprintln!("{target}: {} ok", path.display());
    }
    assert!(accepted > 0, "every {target} seed is rejected");
}

#[test]
fn config_dump_corpus() {
    let dist = fpp_core::random_field::EdgeDistribution::new(&[("0", 0.5), ("1", 0.25), ("2.5", 0.25)]).unwrap();
    replay("config_dump", checks::config_dump, |t| fpp_core::random_field::Configuration::parse_dump(t, &dist).is_ok());
}

#[test]
fn vertex_list_corpus() {
    replay("vertex_list", checks::vertex_list, |t| fpp_core::lattice::parse_vertex_list(t).is_ok());
}

#[test]
fn experiment_spec_corpus() {
    replay("experiment_spec", checks::experiment_spec, |t| fpp_harness::ExperimentSpec::parse(t).is_ok());
}

#[test]
fn record_line_corpus() {
    replay("record_line", checks::record_line, |t| fpp_harness::Record::from_line(t).is_ok());
}

mod mutations {
    use super::*;
    use proptest::prelude::*;

    fn mutate(mut bytes: Vec<u8>, edits: &[(u8, usize, u8)]) -> Vec<u8> {
        for &(op, at, b) in edits {
            let i = if bytes.is_empty() { 0 } else { at % (bytes.len() + 1) };
            match op % 3 {
                0 => bytes.insert(i, b),
                1 if i < bytes.len() => {
                    bytes.remove(i);
                }
                _ if i < bytes.len() => bytes[i] = b,
                _ => bytes.push(b),
            }
        }
        bytes
    }

    fn run(target: &str, check: fn(&[u8])) -> impl Fn(usize, Vec<(u8, usize, u8)>) {
        let all = seeds(target);
        move |pick, edits| {
            let (_, seed) = &all[pick % all.len()];
            check(&mutate(seed.clone(), &edits));
        }
    }

    fn edits() -> impl Strategy<Value = Vec<(u8, usize, u8)>> {
        // bias replacement bytes towards the parsers' alphabets
        let byte = prop_oneof![any::<u8>(), prop::sample::select(b"0123456789 -.,:\n\"{}HVeE".to_vec())];
        prop::collection::vec((any::<u8>(), any::<usize>(), byte), 1..6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn config_dump(pick in any::<usize>(), e in edits()) { run("config_dump", checks::config_dump)(pick, e) }

        #[test]
        fn vertex_list(pick in any::<usize>(), e in edits()) { run("vertex_list", checks::vertex_list)(pick, e) }

        #[test]
        fn experiment_spec(pick in any::<usize>(), e in edits()) { run("experiment_spec", checks::experiment_spec)(pick, e) }

        #[test]
        fn record_line(pick in any::<usize>(), e in edits()) { run("record_line", checks::record_line)(pick, e) }
    }
}
