//! End-to-end contract tests for the `transvect` binary: exit codes, output
//! files, and byte-level determinism of re-runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use transvect_cli::off::{format_off, parse_off};
use transvect_core::Mesh;

fn transvect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transvect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_tetra(path: &Path, offset: [f64; 3]) {
    let vertices = vec![
        [0.0 + offset[0], 0.0 + offset[1], 0.0 + offset[2]],
        [1.0 + offset[0], 0.0 + offset[1], 0.0 + offset[2]],
        [0.0 + offset[0], 1.0 + offset[1], 0.0 + offset[2]],
        [0.0 + offset[0], 0.0 + offset[1], 1.0 + offset[2]],
    ];
    let faces = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mesh = Mesh::new(vertices, faces).unwrap();
    fs::write(path, format_off(&mesh)).unwrap();
}

/// Config that keeps registrations tiny: one control point, few iterations.
fn write_fast_config(path: &Path) {
    fs::write(
        path,
        "sigma = 5\ncontrol_point_spacing = 100\nmax_iterations = 40\nconvergence_tol = 1e-9\n",
    )
    .unwrap();
}

#[test]
fn register_writes_outputs_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let template = dir.path().join("t.off");
    let target = dir.path().join("s.off");
    let cfg = dir.path().join("exp.cfg");
    write_tetra(&template, [0.0; 3]);
    write_tetra(&target, [0.3, -0.2, 0.1]);
    write_fast_config(&cfg);

    let out1 = dir.path().join("run1");
    let run1 = transvect(&[
        "register",
        "--template",
        template.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert!(run1.status.success(), "stderr: {}", stderr_of(&run1));
    assert_eq!(run1.status.code(), Some(0));

    for file in ["result.json", "momenta.csv", "deformed.off", "delta.csv"] {
        assert!(out1.join(file).is_file(), "missing {file}");
    }
    // deformed.off parses back and keeps the vertex count
    let deformed = parse_off(&fs::read_to_string(out1.join("deformed.off")).unwrap()).unwrap();
    assert_eq!(deformed.vertex_count(), 4);
    // momenta.csv carries the control-point schema
    let momenta = fs::read_to_string(out1.join("momenta.csv")).unwrap();
    assert!(momenta.starts_with("index,x,y,z,mx,my,mz\n"));
    // result.json is valid JSON with the registration fields
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("result.json")).unwrap()).unwrap();
    assert!(json["total"].is_number());
    assert!(json["converged"].is_boolean());

    let out2 = dir.path().join("run2");
    let run2 = transvect(&[
        "register",
        "--template",
        template.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(run2.status.success());
    for file in ["result.json", "momenta.csv", "deformed.off", "delta.csv"] {
        assert_eq!(
            fs::read(out1.join(file)).unwrap(),
            fs::read(out2.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
    // stdout is part of the contract too
    assert_eq!(run1.stdout, run2.stdout);
}

#[test]
fn unknown_flag_is_a_usage_error_naming_the_flag() {
    let out = transvect(&["register", "--bogus-flag", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("--bogus-flag"), "stderr: {}", stderr_of(&out));
}

#[test]
fn missing_required_flag_is_a_usage_error_naming_the_flag() {
    let out = transvect(&["register"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("--template"), "stderr: {err}");
}

#[test]
fn invalid_flag_value_is_a_usage_error_naming_the_flag() {
    let out = transvect(&["shoot", "--shape", "x.off", "--momenta", "m.csv", "--t-end", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("--t-end"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = transvect(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let help = transvect(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("register"));
    let version = transvect(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn missing_input_file_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = transvect(&[
        "register",
        "--template",
        dir.path().join("absent.off").to_str().unwrap(),
        "--target",
        dir.path().join("absent2.off").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error"), "stderr: {}", stderr_of(&out));
}

#[test]
fn malformed_mesh_reports_its_line_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.off");
    fs::write(&bad, "OFF\n2 0 0\n0 0 0\n1 1 oops\n").unwrap();
    let good = dir.path().join("good.off");
    write_tetra(&good, [0.0; 3]);
    let out = transvect(&[
        "strain",
        "--reference",
        bad.to_str().unwrap(),
        "--first",
        good.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("line 4"), "stderr: {}", stderr_of(&out));
}

#[test]
fn malformed_config_reports_its_line_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.off");
    write_tetra(&t, [0.0; 3]);
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "sigma = 1\nsigmaa = 2\n").unwrap();
    let out = transvect(&[
        "register",
        "--template",
        t.to_str().unwrap(),
        "--target",
        t.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("sigmaa"), "stderr: {err}");
}

#[test]
fn shoot_replays_a_registration_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let template = dir.path().join("t.off");
    let target = dir.path().join("s.off");
    let cfg = dir.path().join("exp.cfg");
    write_tetra(&template, [0.0; 3]);
    write_tetra(&target, [0.25, 0.15, -0.1]);
    write_fast_config(&cfg);

    let reg_out = dir.path().join("reg");
    let reg = transvect(&[
        "register",
        "--template",
        template.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        reg_out.to_str().unwrap(),
    ]);
    assert!(reg.status.success(), "stderr: {}", stderr_of(&reg));

    let shoot_out = dir.path().join("shot");
    let shoot = transvect(&[
        "shoot",
        "--shape",
        template.to_str().unwrap(),
        "--momenta",
        reg_out.join("momenta.csv").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        shoot_out.to_str().unwrap(),
    ]);
    assert!(shoot.status.success(), "stderr: {}", stderr_of(&shoot));

    // shooting the registered momenta reproduces the registration's deformed
    // mesh exactly: same integrator, same inputs, same bytes
    assert_eq!(
        fs::read(reg_out.join("deformed.off")).unwrap(),
        fs::read(shoot_out.join("deformed.off")).unwrap()
    );
}

#[test]
fn midpoint_symmetry_and_pole_ladder_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.off");
    let b = dir.path().join("b.off");
    let c = dir.path().join("c.off");
    let cfg = dir.path().join("exp.cfg");
    write_tetra(&a, [0.0; 3]);
    write_tetra(&b, [0.3, 0.0, 0.0]);
    write_tetra(&c, [0.3, 0.2, 0.0]);
    write_fast_config(&cfg);

    let mid_out = dir.path().join("mid");
    let mid = transvect(&[
        "midpoint",
        "--base",
        a.to_str().unwrap(),
        "--other",
        b.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        mid_out.to_str().unwrap(),
    ]);
    assert!(mid.status.success(), "stderr: {}", stderr_of(&mid));
    assert!(mid_out.join("midpoint.off").is_file());
    assert!(mid_out.join("registration.json").is_file());

    let sym_out = dir.path().join("sym");
    let sym = transvect(&[
        "symmetry",
        "--center",
        a.to_str().unwrap(),
        "--subject",
        b.to_str().unwrap(),
        "--variant",
        "without_residual",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        sym_out.to_str().unwrap(),
    ]);
    assert!(sym.status.success(), "stderr: {}", stderr_of(&sym));
    assert!(sym_out.join("reflected.off").is_file());

    let ladder_out = dir.path().join("ladder");
    let ladder = transvect(&[
        "pole-ladder",
        "--template",
        a.to_str().unwrap(),
        "--subject",
        b.to_str().unwrap(),
        "--followup",
        c.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        ladder_out.to_str().unwrap(),
    ]);
    assert!(ladder.status.success(), "stderr: {}", stderr_of(&ladder));
    assert!(ladder_out.join("transported.off").is_file());
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ladder_out.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["n_rungs"], 1);
    assert!(trace["rungs"].as_array().unwrap().len() == 1);
}

#[test]
fn strain_compares_two_deformations() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("r.off");
    write_tetra(&reference, [0.0; 3]);
    // uniform scaling: strain map is analytic (1 - s^2 everywhere)
    let scaled: Vec<[f64; 3]> = parse_off(&fs::read_to_string(&reference).unwrap())
        .unwrap()
        .vertices()
        .iter()
        .map(|v| [v[0] * 1.1, v[1] * 1.1, v[2] * 1.1])
        .collect();
    let mesh = parse_off(&fs::read_to_string(&reference).unwrap())
        .unwrap()
        .with_vertices(scaled)
        .unwrap();
    let first = dir.path().join("f.off");
    fs::write(&first, format_off(&mesh)).unwrap();

    let out_dir = dir.path().join("out");
    let out = transvect(&[
        "strain",
        "--reference",
        reference.to_str().unwrap(),
        "--first",
        first.to_str().unwrap(),
        "--second",
        reference.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let strain_csv = fs::read_to_string(out_dir.join("strain_first.csv")).unwrap();
    assert!(strain_csv.starts_with("index,value\n"));
    // 1 - 1.1^2 = -0.21 at every vertex
    for line in strain_csv.lines().skip(1) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((value - (1.0 - 1.1f64.powi(2))).abs() < 1e-10, "strain {value}");
    }
    // reference vs itself has zero strain, so the comparison equals the
    // Euclidean norm of the first map
    let cmp: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("comparison.json")).unwrap())
            .unwrap();
    let ase = cmp["area_strain_error"].as_f64().unwrap();
    let expected = (4.0f64).sqrt() * 0.21;
    assert!((ase - expected).abs() < 1e-9, "ase {ase} vs {expected}");
}

#[test]
fn synth_is_deterministic_and_errors_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    // tiny but real: 42-vertex template, one weight, both variants, capped
    // iterations keep the suite fast while exercising every code path
    fs::write(
        &cfg,
        "sigma = 0.4\ncontrol_point_spacing = 0.9\nalpha_squared = 1\nmax_iterations = 25\nseed = 9\n",
    )
    .unwrap();

    let pop1 = dir.path().join("pop1");
    let pop2 = dir.path().join("pop2");
    for pop in [&pop1, &pop2] {
        let out = transvect(&[
            "synth",
            "--subjects",
            "2",
            "--subdivisions",
            "1",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            pop.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    }
    // same seed, same bytes, for every generated file
    for entry in fs::read_dir(&pop1).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(pop1.join(&name)).unwrap(),
            fs::read(pop2.join(&name)).unwrap(),
            "{name:?} differs between identical synth runs"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(pop1.join("population.json")).unwrap()).unwrap();
    assert_eq!(manifest["subjects"].as_array().unwrap().len(), 2);

    let report1 = dir.path().join("report1");
    let report2 = dir.path().join("report2");
    for report in [&report1, &report2] {
        let out = transvect(&[
            "errors",
            "--population",
            pop1.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    }
    let csv1 = fs::read(report1.join("errors.csv")).unwrap();
    let csv2 = fs::read(report2.join("errors.csv")).unwrap();
    assert_eq!(csv1, csv2, "errors.csv differs between identical runs");
    assert_eq!(
        fs::read(report1.join("summary.json")).unwrap(),
        fs::read(report2.join("summary.json")).unwrap()
    );

    // schema: header plus one row per subject x weight x variant x error kind
    let text = String::from_utf8(csv1).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "subject_id,alpha_squared,variant,error_type,value,converged"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 1 * 2 * 7);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert!(fields[0] == "0" || fields[0] == "1");
        assert_eq!(fields[1], "1");
        assert!(fields[2] == "with_residual" || fields[2] == "without_residual");
        let value: f64 = fields[4].parse().unwrap();
        assert!(value.is_finite());
        assert!(fields[5] == "true" || fields[5] == "false");
    }
}
