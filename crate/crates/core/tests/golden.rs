use limitgen::combinatorics::symmetric_chain_decomposition;

#[test]
fn chain_decompositions_match_the_golden_files() {
    for n in 1..=6 {
        let path = format!("{}/tests/golden/scd-{n}.jsonl", env!("CARGO_MANIFEST_DIR"));
        let golden = std::fs::read_to_string(&path).unwrap();
        let expected: Vec<Vec<u64>> = golden.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(symmetric_chain_decomposition(n).unwrap(), expected, "n = {n}");
    }
}
