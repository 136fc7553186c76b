use scri::run::*;
use scri::Error;

#[test]
fn default_config_round_trips_through_toml() {
    let cfg = RunConfig::default();
    let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg, back);
    let commented = RunConfig::from_toml(&default_config_toml()).unwrap();
    assert_eq!(cfg, commented);
}

#[test]
fn partial_tables_keep_the_other_defaults() {
    let cfg = RunConfig::from_toml("[solve]\nmass = 0.0\n[solve.source]\namplitude = 2.0\n").unwrap();
    assert_eq!(cfg.solve.mass, 0.0);
    assert_eq!(cfg.solve.source.amplitude, 2.0);
    assert_eq!(cfg.solve.source.t0, RunConfig::default().solve.source.t0);
}

#[test]
fn bad_configs_are_rejected() {
    for text in ["unknown = 1", "[solve]\nmass = -1.0", "[solve.grid]\ncourant = 1.5", "[tail]\nrho_min = 0.0"] {
        assert!(matches!(RunConfig::from_toml(text), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn resonance_strings() {
    let e0 = parse_e0(&["0,-1,0".into(), "0.5,-2,1".into()]).unwrap();
    assert_eq!(e0.len(), 2);
    assert!(parse_e0(&["0,-1".into()]).is_err());
    assert!(parse_e0(&["a,b,c".into()]).is_err());
}

#[test]
fn index_property_suite_passes_on_a_small_sample() {
    assert!(index_property_suite(20, 7).unwrap().passed());
}

#[test]
fn geometry_and_indexset_commands_write_their_outputs() {
    let root = std::env::temp_dir().join(format!("scri-run-{}", std::process::id()));
    let cfg = RunConfig { output_dir: root.clone(), ..RunConfig::default() };
    let g = cmd_geometry_check(&cfg).unwrap();
    assert!(g.passed);
    assert!(g.dir.join("geometry_report.json").is_file());
    assert!(g.dir.join("config.toml").is_file());
    let i = cmd_indexset(&cfg).unwrap();
    let csv = std::fs::read_to_string(i.dir.join("e_tot.csv")).unwrap();
    assert!(csv.starts_with("set,re,im,k") && csv.contains("E_scri"));
    std::fs::remove_dir_all(&root).ok();
}
