// shared by several integration targets
#![allow(dead_code)]

/// Reads `n value` pairs from a fixture file, skipping `#` comments.
pub fn load_pairs(path: &str) -> Vec<(u64, i64)> {
    let text = std::fs::read_to_string(path).expect("fixture readable");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace();
            let n = it.next().unwrap().parse().unwrap();
            let v = it.next().unwrap().parse().unwrap();
            (n, v)
        })
        .collect()
}

pub const G_FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/a215947_first64.txt"
);
