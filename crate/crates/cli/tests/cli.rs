use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lpsgd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpsgd"))
        .args(args)
        .current_dir(dir)
        .env_remove("LPSGD_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SYNTHETIC: &str = "\
[experiment]
kind = synthetic-powernorm
seeds = 1, 2

[problem]
L = 3
p = 0.2
d = 40

[optimizer]
eta = 0.0348
steps = 300

[noise]
gradient = uniform:0.1
update = uniform:0.1
";

fn write_config(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn synthetic_run_writes_one_csv_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "syn.txt", SYNTHETIC);
    let out = lpsgd(
        dir.path(),
        &["--config", "syn.txt", "--out", "runs", "run-synthetic"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    for seed in [1, 2] {
        let csv =
            fs::read_to_string(dir.path().join(format!("runs/synthetic_seed{seed}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("k,loss,min_loss,dist_to_opt,norm_r,norm_s,bound_stoch"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 301);
        assert!(csv.lines().last().unwrap().starts_with("# summary: {"));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "syn.txt", SYNTHETIC);
    for out in ["a", "b"] {
        assert!(lpsgd(
            dir.path(),
            &["--config", "syn.txt", "--out", out, "run-synthetic"]
        )
        .status
        .success());
    }
    for seed in [1, 2] {
        let name = format!("synthetic_seed{seed}.csv");
        assert_eq!(
            fs::read(dir.path().join("a").join(&name)).unwrap(),
            fs::read(dir.path().join("b").join(&name)).unwrap()
        );
    }
}

#[test]
fn seed_flag_replaces_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "syn.txt", SYNTHETIC);
    let out = lpsgd(
        dir.path(),
        &[
            "--config",
            "syn.txt",
            "--seed",
            "9",
            "--out",
            "o",
            "run-synthetic",
        ],
    );
    assert!(out.status.success());
    let names: Vec<_> = fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("synthetic_seed9.csv")]);
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "syn.txt",
        &SYNTHETIC.replace("seeds = 1, 2", "seeds = 1, 2\nout = from_config"),
    );
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_lpsgd"));
        cmd.current_dir(dir.path()).env_remove("LPSGD_OUT");
        if let Some(e) = env {
            cmd.env("LPSGD_OUT", e);
        }
        cmd.args(["--config", "syn.txt", "--seed", "1"]);
        if let Some(f) = flag {
            cmd.args(["--out", f]);
        }
        assert!(cmd.arg("run-synthetic").output().unwrap().status.success());
    };
    run(None, None);
    assert!(dir.path().join("from_config/synthetic_seed1.csv").exists());
    run(Some("from_env"), None);
    assert!(dir.path().join("from_env/synthetic_seed1.csv").exists());
    run(Some("ignored"), Some("from_flag"));
    assert!(dir.path().join("from_flag/synthetic_seed1.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn bound_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a single iterate is the start point, far above the limiting bound
    let short = SYNTHETIC.replace(
        "steps = 300",
        "steps = 1\nstart_distance = 10\nball_radius = 10",
    );
    write_config(dir.path(), "short.txt", &short);
    let out = lpsgd(
        dir.path(),
        &["--config", "short.txt", "--out", "o", "run-synthetic"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("VIOLATES"), "{}", stdout(&out));
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = lpsgd(dir.path(), &["--config", "absent.txt", "run-synthetic"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: "));

    write_config(
        dir.path(),
        "bad.txt",
        "[experiment]\nkind = synthetic-powernorm\n[problem]\np = 1.5\n",
    );
    assert_eq!(
        lpsgd(dir.path(), &["--config", "bad.txt", "run-synthetic"])
            .status
            .code(),
        Some(2)
    );

    write_config(dir.path(), "syn.txt", SYNTHETIC);
    assert_eq!(
        lpsgd(dir.path(), &["--config", "syn.txt", "run-logreg"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(lpsgd(dir.path(), &["run-synthetic"]).status.code(), Some(2));
}

#[test]
fn bounds_flag_invalid_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "in.txt",
        "[bounds]\np = 0.2\nL = 3\neta = 0.343\nc = 1\nR = 1.2\nS = 0.1\nd = 40\nsigma_r_sq = 0.01\nsigma_s_sq = 0.01\n",
    );
    let out = lpsgd(dir.path(), &["bounds", "in.txt"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("[deterministic]"));
    assert!(text.contains("valid = false"));
    assert!(text.contains("deterministic = unavailable"));
    assert!(text.contains("[stochastic]\nbound = "));
    assert!(!text.contains("[finite_k]"));
}

#[test]
fn bounds_reads_config_flag() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "in.txt",
        "[bounds]\np = 1\nL = 1\neta = 0.5\nc = 2\nK = 4\n",
    );
    let out = lpsgd(dir.path(), &["--config", "in.txt", "bounds"]);
    let text = stdout(&out);
    assert!(text.contains("gamma = 0.25\n"), "{text}");
    assert!(text.contains("[finite_k]\nbound = 0.75\n"), "{text}");
}

#[test]
fn verify_lemma1_in_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpsgd(
        dir.path(),
        &[
            "verify-lemma1",
            "--dim",
            "1",
            "--count",
            "10",
            "--resolution",
            "200",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("instances 10 (d = 1), upper bound holds 10"));
    let low = lpsgd(dir.path(), &["verify-lemma1", "--resolution", "10"]);
    assert_eq!(low.status.code(), Some(2));
}

#[test]
fn fit_holder_from_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("distance,excess\n");
    for i in 0..10 {
        let dist = 0.1 * f64::from(i + 1);
        csv.push_str(&format!("{dist},{}\n", 0.85 * dist.powf(1.6)));
    }
    fs::write(dir.path().join("samples.csv"), csv).unwrap();
    let out = lpsgd(dir.path(), &["fit-holder", "--samples", "samples.csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("p =") - 1.6).abs() < 1e-9);
    assert!((value("L =") - 0.85).abs() < 1e-9);
    assert!(text.contains("mode = least-squares"));

    let major = lpsgd(
        dir.path(),
        &[
            "fit-holder",
            "--samples",
            "samples.csv",
            "--mode",
            "majorizing",
        ],
    );
    assert!(stdout(&major).contains("mode = majorizing"));

    fs::write(dir.path().join("junk.csv"), "1,2\nx,y\n").unwrap();
    assert_eq!(
        lpsgd(dir.path(), &["fit-holder", "--samples", "junk.csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn estimate_noise_matches_uniform_variance() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "syn.txt", SYNTHETIC);
    let out = lpsgd(dir.path(), &["--config", "syn.txt", "estimate-noise"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let field = |section: &str, key: &str| -> f64 {
        let body = text.split(&format!("[{section}]")).nth(1).unwrap();
        let line = body.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    let closed = field("closed_form", "d_sigma_r_sq");
    assert!((closed - 40.0 * 0.01 / 3.0).abs() < 1e-12);
    assert!((field("noise", "d_sigma_r_sq") - closed).abs() < 0.15 * closed);
    assert!((field("noise", "d_sigma_s_sq") - closed).abs() < 0.15 * closed);
}

#[test]
fn logreg_on_blobs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "lr.txt",
        "[experiment]\nkind = logreg\nseeds = 1\n\n[optimizer]\neta = 0.05\nsteps = 200\nprobe_steps = 100\n\n\
         [data]\nblob_classes = 3\nblob_per_class = 40\nblob_dim = 10\n\n[logreg]\nmodes = a, d\nreference_steps = 5000\n",
    );
    let out = lpsgd(
        dir.path(),
        &["--config", "lr.txt", "--out", "lr", "run-logreg"],
    );
    assert!(
        matches!(out.status.code(), Some(0 | 1)),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "logreg_mode_a_seed1.csv",
        "logreg_mode_d_seed1.csv",
        "holder.txt",
        "logreg_summary.txt",
    ] {
        assert!(dir.path().join("lr").join(name).exists(), "{name}");
    }
    assert!(!dir.path().join("lr/logreg_mode_b_seed1.csv").exists());
}
