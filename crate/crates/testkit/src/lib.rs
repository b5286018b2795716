//! Test support for privarch: brute-force oracles, seeded random
//! architectures and fixture access.

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

/// Directory holding the shared `.pvd` and `.req` fixtures.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures"))
}

pub fn fixture(name: &str) -> String {
    let path = fixture_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub const FIXTURES: [&str; 4] = ["scenario1.pvd", "option2.pvd", "option3.pvd", "links-only.pvd"];
