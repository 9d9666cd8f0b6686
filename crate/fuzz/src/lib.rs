//! Properties checked on every fuzz input. Shared with the corpus replay
//! test in the main workspace.

use fpp_core::lattice::{parse_vertex_list, write_vertex_list};
use fpp_core::random_field::{Configuration, EdgeDistribution};
use fpp_harness::{ExperimentSpec, Record};

pub fn config_dump(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let dist = EdgeDistribution::new(&[("0", 0.5), ("1", 0.25), ("2.5", 0.25)]).expect("valid law");
    if let Ok(c) = Configuration::parse_dump(text, &dist) {
        let dump = c.dump();
        let again = Configuration::parse_dump(&dump, &dist).expect("dump parses");
        assert_eq!(again.dump(), dump);
    }
}

pub fn vertex_list(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(vs) = parse_vertex_list(text) {
        let again = parse_vertex_list(&write_vertex_list(&vs)).expect("written list parses");
        assert_eq!(again, vs);
    }
}

pub fn experiment_spec(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::parse(text) {
        let _ = spec.validate();
        let again = ExperimentSpec::parse(&spec.canonical()).expect("canonical form parses");
        assert_eq!(again.canonical(), spec.canonical());
        assert_eq!(again.hash(), spec.hash());
    }
}

pub fn record_line(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Record::from_line(text) {
        let _ = (r.ln_count(), r.ln_count_lower());
        let line = r.to_line();
        assert!(!line.contains('\n'));
        let again = Record::from_line(&line).expect("serialized record parses");
        assert_eq!(again.to_line(), line);
    }
}
