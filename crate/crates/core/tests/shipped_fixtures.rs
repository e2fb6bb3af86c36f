//! The JSON files under `fixtures/` load and agree with the compiled-in
//! fixtures of the same name.

use std::path::PathBuf;

use cathaul::fixtures::FixtureFile;

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn shipped_files_match_builtins() {
    for name in FixtureFile::builtin_names() {
        let path = fixtures_dir().join(format!("{name}.json"));
        let loaded = FixtureFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(loaded, FixtureFile::builtin(name).unwrap(), "{name}");
    }
}

#[test]
fn shipped_testbed_builds_every_object() {
    let f = FixtureFile::load(fixtures_dir().join("su2_testbed.json")).unwrap();
    let conn = f.connection().unwrap();
    assert_eq!(conn.group().dim(), 3);
    f.shift().unwrap();
    f.decoration().unwrap();
    f.gauge().unwrap();
    let p = f.start_point().unwrap();
    assert_eq!(p.x, f.path().unwrap().start());
    assert_eq!(f.battery(42).unwrap().len(), 20);
}

#[test]
fn missing_files_are_fixture_errors() {
    let err = FixtureFile::load(fixtures_dir().join("does_not_exist.json")).unwrap_err();
    assert!(matches!(err, cathaul::Error::Fixture(_)));
}
