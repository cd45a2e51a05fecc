use std::path::Path;
use std::process::{Command, Output};

use iontrap_cli::config::BA_EXAMPLE;
use iontrap_cli::csvout::{fmt_num, parse_tables};
use proptest::prelude::*;

fn iontrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iontrap")).args(args).output().expect("spawning iontrap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn equilibrium_of_three_ions() {
    let o = iontrap(&["equilibrium", "--preset", "ba_example", "--n-ions", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tables = parse_tables(&stdout(&o)).unwrap();
    assert_eq!(tables.len(), 1);
    let t = &tables[0];
    assert_eq!(t[0], ["index", "u_dimensionless", "z_meters", "local_spacing_dimensionless"]);
    assert_eq!(t.len(), 4);
    assert_eq!(t[2][0], "2");
    assert_eq!(t[2][1].parse::<f64>().unwrap(), 0.0);
    let u3: f64 = t[3][1].parse().unwrap();
    assert!((u3 - 1.25f64.cbrt()).abs() < 1e-11);
}

#[test]
fn decohere_summary_has_convention_stamp() {
    let o = iontrap(&["decohere", "--preset", "ba_example", "--n-ions", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tables = parse_tables(&stdout(&o)).unwrap();
    assert_eq!(tables.len(), 2);
    assert_eq!(tables[0][0], ["i", "tau_i_seconds"]);
    assert_eq!(tables[0].len(), 51);
    let summary = &tables[1];
    assert_eq!(
        summary[0],
        ["tau_vib", "tau_rad", "t_d", "mode", "Qsq_convention", "tau_s", "tau_vib_over_tau_s", "tau_vib_over_tau_rad"]
    );
    assert_eq!(summary[1][3], "discrete-sum");
    assert_eq!(summary[1][4], "Q^2=1*hbar/(tau_s*k0^5)");
    let tau_rad: f64 = summary[1][1].parse().unwrap();
    assert!((tau_rad - 2.0).abs() < 1e-12);

    let o = iontrap(&["decohere", "--preset", "ba_example", "--mode", "closed-form"]);
    let tables = parse_tables(&stdout(&o)).unwrap();
    assert_eq!(tables[0].len(), 1);
    assert_eq!(tables[1][1][3], "closed-form");
}

#[test]
fn repeated_runs_are_identical() {
    for cmd in ["scales", "equilibrium", "continuum", "sums", "decohere", "scaling"] {
        let args = [cmd, "--preset", "ba_example", "--n-ions", "40"];
        let a = iontrap(&args);
        let b = iontrap(&args);
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scales.csv");
    let o = iontrap(&["scales", "--preset", "ba_example", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, iontrap(&["scales", "--preset", "ba_example"]).stdout);
    assert!(!written.contains(&b'\r'));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BA_EXAMPLE.replace("n_ions = 1000", "n_ions = 7"));
    let o = iontrap(&["equilibrium", "--config", &cfg]);
    assert_eq!(parse_tables(&stdout(&o)).unwrap()[0].len(), 8);
    let o = iontrap(&["equilibrium", "--config", &cfg, "--n-ions", "4"]);
    assert_eq!(parse_tables(&stdout(&o)).unwrap()[0].len(), 5);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();

    let cfg = write_config(dir.path(), "");
    let o = iontrap(&["scales", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[species]"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), &BA_EXAMPLE.replace("mass_amu = 137.33", "mass_amu = -137.33"));
    let o = iontrap(&["scales", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mass_amu"));

    let cfg = write_config(dir.path(), &format!("{BA_EXAMPLE}colour = blue\n"));
    let o = iontrap(&["scales", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));

    let cfg = write_config(dir.path(), "[species]\nname = Ba+\nmass_amu 137\n");
    let o = iontrap(&["scales", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    assert_eq!(iontrap(&["scales"]).status.code(), Some(1));
    assert_eq!(iontrap(&["teleport", "--preset", "ba_example"]).status.code(), Some(1));
    assert_eq!(iontrap(&["scales", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(iontrap(&["scales", "--preset", "ba_example", "--n-ions", "zero"]).status.code(), Some(1));
    assert_eq!(iontrap(&["adiabatic", "--preset", "ba_example", "--dt", "0.5"]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let o = iontrap(&["scaling", "--preset", "ba_example", "--policy", "fixed-spacing", "--s0-target", "1e-12"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = iontrap(&["equilibrium", "--preset", "ba_example", "--n-ions", "500"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn io_errors_exit_three() {
    let o = iontrap(&["scales", "--config", "/nonexistent/run.ini"]);
    assert_eq!(o.status.code(), Some(3));
    let o = iontrap(&["scales", "--preset", "ba_example", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    let o = iontrap(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decohere"));
}

#[test]
fn adiabatic_warns_outside_weak_slow_regime() {
    let o = iontrap(&["adiabatic", "--preset", "ba_example", "--eps", "0.3", "--t-end", "20", "--dt", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("not weak"));
    let t = &parse_tables(&stdout(&o)).unwrap()[0];
    assert_eq!(t[0], ["omega0_t", "re_overlap", "cos_phi", "abs_error"]);
}

#[test]
fn emitted_numbers_reparse_exactly() {
    for cmd in ["scales", "continuum", "sums", "scaling"] {
        let o = iontrap(&[cmd, "--preset", "ba_example", "--n-ions", "30"]);
        for table in parse_tables(&stdout(&o)).unwrap() {
            for row in &table[1..] {
                for cell in row {
                    if let Ok(v) = cell.parse::<f64>() {
                        if cell.contains('e') {
                            assert_eq!(&fmt_num(v), cell, "{cmd}");
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn number_format_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let s = fmt_num(x);
        let y: f64 = s.parse().unwrap();
        prop_assert_eq!(fmt_num(y), s.clone());
        if x != 0.0 {
            prop_assert!(((y - x) / x).abs() <= 5e-12);
        }
        prop_assert_eq!(s.split('e').next().unwrap().trim_start_matches('-').len(), 13);
    }
}
