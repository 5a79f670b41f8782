//! The job files under `data/corpus` are generated from the builders in
//! `supertorsion::corpus`; run the ignored test to rewrite them.

use std::path::PathBuf;

use supertorsion::corpus::{corpus, Job};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus")
}

#[test]
#[ignore = "rewrites data/corpus"]
fn regenerate() {
    let dir = corpus_dir();
    std::fs::create_dir_all(&dir).unwrap();
    for (name, job) in corpus() {
        std::fs::write(dir.join(format!("{name}.json")), job.to_json() + "\n").unwrap();
    }
}

#[test]
fn files_match_builders() {
    let dir = corpus_dir();
    for (name, job) in corpus() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let on_disk = Job::from_json(&text).unwrap();
        assert_eq!(on_disk, job, "{name}");
        assert!(on_disk.provenance.is_some(), "{name} has no provenance note");
    }
}
