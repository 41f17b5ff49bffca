use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcckp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcckp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_files_and_run_from_them() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&dcckp(
        &[
            "gen-instance",
            "--n",
            "15",
            "--class",
            "bsc",
            "--regime",
            "V2",
            "--seed",
            "4",
            "--out",
            "inst.txt",
        ],
        d,
    ));
    ok(&dcckp(
        &[
            "gen-schedule",
            "--r",
            "200",
            "--t",
            "40",
            "--nu",
            "5",
            "--seed",
            "2",
            "--out",
            "sched.txt",
        ],
        d,
    ));
    let inst = fs::read_to_string(d.join("inst.txt")).unwrap();
    assert_eq!(inst.lines().next(), Some("15"));
    assert_eq!(inst.lines().count(), 16);
    let sched = fs::read_to_string(d.join("sched.txt")).unwrap();
    assert_eq!(sched.lines().count(), 6);

    let out = dcckp(
        &[
            "run",
            "--instance-file",
            "inst.txt",
            "--schedule-file",
            "sched.txt",
            "--formulation",
            "obj2,obj3",
            "--algorithm",
            "gsemo,moead_te",
            "--repeats",
            "2",
            "--out",
            "res.csv",
            "--json",
            "res.json",
            "--plot",
            "plot.csv",
        ],
        d,
    );
    ok(&out);
    let csv = fs::read_to_string(d.join("res.csv")).unwrap();
    // 4 cells x 2 repeats x 5 levels x 5 changes, plus 4 x 5 summaries.
    assert_eq!(csv.lines().count(), 1 + 200 + 20);
    assert!(csv.starts_with("run_id,algorithm,formulation,instance_class,n,regime,r,t,nu,alpha,change_index,p_star,e_i,E,seed_schedule,seed_algorithm"));
    let plot = fs::read_to_string(d.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 20);
    assert!(fs::read_to_string(d.join("res.json"))
        .unwrap()
        .contains("\"records\""));

    ok(&dcckp(&["plot-export", "res.csv", "--out", "plot2.csv"], d));
    let plot2 = fs::read_to_string(d.join("plot2.csv")).unwrap();
    for (a, b) in plot.lines().zip(plot2.lines()).skip(1) {
        let fa: Vec<&str> = a.split(',').collect();
        let fb: Vec<&str> = b.split(',').collect();
        assert_eq!(fa[..3], fb[..3]);
        let (ma, mb): (f64, f64) = (fa[3].parse().unwrap(), fb[3].parse().unwrap());
        assert!((ma - mb).abs() <= 1e-8, "{a} vs {b}");
    }

    let out = dcckp(&["summarize", "res.csv"], d);
    ok(&out);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 20
    );
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec![
            "run",
            "--n",
            "20",
            "--t",
            "50",
            "--nu",
            "4",
            "--r",
            "100",
            "--algorithm",
            "moead_pbi",
            "--repeats",
            "3",
            "--out",
            out,
        ]
    };
    ok(&dcckp(&args("a.csv"), d));
    ok(&dcckp(&args("b.csv"), d));
    assert_eq!(
        fs::read(d.join("a.csv")).unwrap(),
        fs::read(d.join("b.csv")).unwrap()
    );
}

#[test]
fn config_file_round_trip_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&dcckp(
        &[
            "run",
            "--n",
            "12",
            "--t",
            "30",
            "--nu",
            "3",
            "--r",
            "60",
            "--save-config",
            "cfg.txt",
        ],
        d,
    ));
    let text = fs::read_to_string(d.join("cfg.txt")).unwrap();
    assert!(text.contains("n=12\n"));
    ok(&dcckp(
        &[
            "run",
            "--config",
            "cfg.txt",
            "--repeats",
            "2",
            "--out",
            "r.csv",
        ],
        d,
    ));
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 5 * 3 + 5);
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.txt"), "n=10\nbogus=1\n").unwrap();
    for args in [
        vec!["run", "--config", "bad.txt"],
        vec!["run", "--t", "10", "--nu", "5", "--budget", "49"],
        vec!["run", "--algorithm", "nsga2"],
        vec!["run", "--instance-file", "missing.txt"],
        vec!["summarize", "missing.csv"],
        vec!["gen-instance", "--n", "0"],
    ] {
        let out = dcckp(&args, d);
        assert!(!out.status.success(), "{args:?} succeeded");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("error"), "{args:?}: {err}");
    }
    let out = dcckp(&["run", "--config", "bad.txt"], d);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}
