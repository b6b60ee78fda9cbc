//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p jumpvex-cli --test acceptance`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use jumpvex::analysis::{check_convexity, default_convexity_tolerance, lcp_scan, LcpVerdict};
use jumpvex::mc::{price_mc, MCConfig};
use jumpvex::model::{
    counterexample_model, truncate_model, CoefficientSpec, JumpSizeSpec, MeasureSpec, TruncationOptions, ZFunction,
};
use jumpvex::pide::{default_grid, solve_bermudan, solve_pide, step_doubling, SchemeConfig};
use jumpvex::{Model, Payoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const BIN: &str = env!("CARGO_BIN_EXE_jumpvex");

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(name: &str) -> Model {
    Model::from_json(&fs::read_to_string(models_dir().join(name)).unwrap()).unwrap()
}

fn jumpvex(args: &[&str], threads: Option<usize>) -> Result<i32, String> {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("JUMPVEX_THREADS", n.to_string());
    }
    let out = cmd.output().map_err(|e| format!("spawn: {e}"))?;
    let code = out.status.code().unwrap_or(-1);
    if code != 0 && code != 2 {
        return Err(format!(
            "jumpvex {} exited {code}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(code)
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn num(v: &Value, pointer: &str) -> Result<f64, String> {
    v.pointer(pointer)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("missing {pointer}"))
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bs_call(x: f64, k: f64, sigma: f64, t: f64) -> f64 {
    let n = Normal::standard();
    let sd = sigma * t.sqrt();
    let d1 = ((x / k).ln() + 0.5 * sd * sd) / sd;
    x * n.cdf(d1) - k * n.cdf(d1 - sd)
}

fn merton_call(x: f64, k: f64, sigma: f64, c: f64, lambda: f64, t: f64) -> f64 {
    let mean = lambda * t;
    let mut weight = (-mean).exp();
    let mut total = 0.0;
    for n in 0..200 {
        if n > 0 {
            weight *= mean / n as f64;
        }
        total += weight * bs_call(x * (1.0 + c).powi(n) * (-lambda * c * t).exp(), k, sigma, t);
    }
    total
}

fn truncated_density(dir: &Path, n: u32) -> Result<PathBuf, String> {
    let out = dir.join(format!("density_n{n}.json"));
    let density = models_dir().join("density.json");
    jumpvex(
        &[
            "truncate",
            "--model",
            density.to_str().unwrap(),
            "--n",
            &n.to_string(),
            "--x-grid",
            "geom:0.01,200,400",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    )?;
    Ok(out)
}

fn criterion_1(dir: &Path) -> Outcome {
    let truncated = truncated_density(dir, 4)?;
    let mut lines = Vec::new();
    // the counterexample only moves on its bump, so it starts there
    for (name, path, x0) in [
        ("diffusion", models_dir().join("diffusion.json"), 1.0),
        ("merton", models_dir().join("merton.json"), 1.0),
        ("counterexample", models_dir().join("counterexample.json"), 0.6),
        ("time_modulated", models_dir().join("time_modulated.json"), 1.0),
        ("truncated density", truncated, 1.0),
    ] {
        let out = dir.join(format!("c1_{}", name.replace(' ', "_")));
        let x0_arg = x0.to_string();
        let start = Instant::now();
        jumpvex(
            &[
                "price",
                "--model",
                path.to_str().unwrap(),
                "--payoff",
                "linear:a=1,b=0",
                "--x0",
                &x0_arg,
                "--T",
                "1",
                "--method",
                "mc",
                "--out-dir",
                out.to_str().unwrap(),
            ],
            None,
        )?;
        let elapsed = start.elapsed();
        let est = read_json(&out.join("price.json"))?;
        let (mean, se) = (num(&est, "/mean")?, num(&est, "/stderr")?);
        let floors = num(&est, "/floor_events")?;
        check(num(&est, "/n_paths")? == 1e5, "n_paths is not 1e5")?;
        check(se > 0.0, format!("{name}: degenerate estimate"))?;
        check(
            (mean - x0).abs() <= 3.0 * se,
            format!("{name}: mean {mean} vs {x0} with stderr {se}"),
        )?;
        check(floors == 0.0, format!("{name}: {floors} floor events"))?;
        check(elapsed < Duration::from_secs(10), format!("{name}: {elapsed:?}"))?;
        lines.push(format!(
            "{name} {:+.1}se {:.1}s",
            (mean - x0) / se,
            elapsed.as_secs_f64()
        ));
    }
    Ok(lines.join(", "))
}

fn criterion_2(dir: &Path) -> Outcome {
    let out = dir.join("c2");
    let start = Instant::now();
    jumpvex(&["counterexample", "--out-dir", out.to_str().unwrap()], None)?;
    let elapsed = start.elapsed();
    let r = read_json(&out.join("counterexample.json"))?;
    let (left, probe, right) = (num(&r, "/fd/u_left")?, num(&r, "/fd/u_probe")?, num(&r, "/fd/u_right")?);
    let tol = num(&r, "/fd/tolerance")?;
    check((left - 0.5).abs() <= 1e-9, format!("u(0.5) = {left}"))?;
    check(right.abs() <= 1e-9, format!("u(1.0) = {right}"))?;
    check(
        probe - 0.4 > 10.0 * tol,
        format!("fd gap {} vs tolerance {tol}", probe - 0.4),
    )?;
    let (mc_gap, mc_tol) = (num(&r, "/mc/check/gap")?, num(&r, "/mc/check/tolerance")?);
    let se = num(&r, "/mc/estimates/1/stderr")?;
    check(
        mc_gap > 3.0 * se && mc_gap > mc_tol,
        format!("mc gap {mc_gap} vs 3 se {}", 3.0 * se),
    )?;
    check(r.pointer("/is_convex") == Some(&Value::Bool(false)), "reported convex")?;
    let wx = num(&r, "/witness/x")?;
    check((0.5..=1.0).contains(&wx), format!("witness x = {wx}"))?;
    check(elapsed < Duration::from_secs(30), format!("{elapsed:?}"))?;
    Ok(format!(
        "u(0.6) fd {probe:.6} (gap {:.4} vs tol {tol:.1e}), mc gap {mc_gap:.4} vs 3se {:.1e}, {:.1}s",
        probe - 0.4,
        3.0 * se,
        elapsed.as_secs_f64()
    ))
}

fn random_zeta(rng: &mut ChaCha8Rng) -> ZFunction<f64> {
    match rng.random_range(0..3) {
        0 => ZFunction::Affine {
            a: rng.random_range(0.0..0.3),
            b: rng.random_range(0.0..0.5),
        },
        1 => ZFunction::Power {
            c: rng.random_range(0.05..0.6),
            p: rng.random_range(0.5..2.0),
        },
        _ => ZFunction::Saturating {
            c: rng.random_range(0.05..0.6),
            rate: rng.random_range(0.5..5.0),
        },
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let config = SchemeConfig::default();
    let payoffs = [
        Payoff::Call { strike: 1.0 },
        Payoff::Put { strike: 1.0 },
        Payoff::piecewise(vec![(0.8, 0.2), (1.0, 0.0), (1.3, 0.3)]).unwrap(),
    ];
    let mut worst = f64::INFINITY;
    for k in 0..10 {
        let model = Model::new(
            format!("random {k}"),
            CoefficientSpec::Proportional {
                c: rng.random_range(0.05..0.4),
            },
            JumpSizeSpec::RelativeOfZ {
                zeta: random_zeta(&mut rng),
            },
            CoefficientSpec::Constant {
                value: rng.random_range(0.2..3.0),
            },
            MeasureSpec::LebesgueUnit,
            -0.5,
        )
        .map_err(|e| e.to_string())?;
        for payoff in &payoffs {
            let grid = default_grid(&model, payoff, 1.0, 1.0, &config).map_err(|e| e.to_string())?;
            let surface = solve_pide(&model, payoff, &grid, &config).map_err(|e| e.to_string())?;
            let tol = default_convexity_tolerance(&surface);
            let report = check_convexity(&surface, tol);
            check(report.is_convex, format!("{} / {payoff}: {report}", model.label))?;
            worst = worst.min(report.min_second_difference / tol);
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(300), format!("{elapsed:?}"))?;
    Ok(format!(
        "30 surfaces convex, worst min D2 = {worst:.3} x tolerance, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_4() -> Outcome {
    let config = SchemeConfig::default();
    let payoff = Payoff::Call { strike: 1.0 };
    let mut prices = Vec::new();
    for lambda in [0.0, 0.5, 1.0, 2.0] {
        let model = Model::relative_jump(format!("lambda={lambda}"), 0.2, 0.1, lambda);
        let grid = default_grid(&model, &payoff, 1.0, 1.0, &config).map_err(|e| e.to_string())?;
        let (_, sd) = step_doubling(&model, &payoff, &grid, &config, 1.0).map_err(|e| e.to_string())?;
        prices.push((lambda, sd.coarse, 2.0 * sd.error));
    }
    for w in prices.windows(2) {
        let gap = w[1].1 - w[0].1;
        let tol = w[0].2.max(w[1].2);
        check(
            gap > tol,
            format!(
                "lambda {} -> {}: gap {gap:.3e} vs fd tolerance {tol:.3e}",
                w[0].0, w[1].0
            ),
        )?;
    }
    let bs = bs_call(1.0, 1.0, 0.2, 1.0);
    check(
        (prices[0].1 - bs).abs() < 2e-4,
        format!("lambda=0 price {} vs Black-Scholes {bs}", prices[0].1),
    )?;
    let list: Vec<String> = prices.iter().map(|p| format!("{:.6}", p.1)).collect();
    Ok(format!("prices [{}], Black-Scholes {bs:.6}", list.join(", ")))
}

fn criterion_5(dir: &Path) -> Outcome {
    let truncated = truncated_density(dir, 4)?;
    let mut lines = Vec::new();
    for (name, path) in [
        ("merton", models_dir().join("merton.json")),
        ("counterexample", models_dir().join("counterexample.json")),
        ("time_modulated", models_dir().join("time_modulated.json")),
        ("truncated density", truncated),
    ] {
        let model = Model::from_json(&fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
        let zero = dir.join(format!("c5_{}_nojump.json", name.replace(' ', "_")));
        fs::write(&zero, model.without_jumps().to_json()).map_err(|e| e.to_string())?;
        let out = dir.join(format!("c5_{}", name.replace(' ', "_")));
        jumpvex(
            &[
                "compare",
                "--model-hi",
                path.to_str().unwrap(),
                "--model-lo",
                zero.to_str().unwrap(),
                "--payoff",
                "call:K=1",
                "--T",
                "1",
                "--x0",
                "1",
                "--out-dir",
                out.to_str().unwrap(),
            ],
            None,
        )?;
        let r = read_json(&out.join("comparison.json"))?;
        let (viol, tol) = (num(&r, "/max_violation")?, num(&r, "/tolerance")?);
        check(
            r.pointer("/dominated") == Some(&Value::Bool(true)),
            format!("{name}: not dominated"),
        )?;
        check(viol <= tol, format!("{name}: violation {viol} > {tol}"))?;
        lines.push(format!("{name} {viol:.1e}<={tol:.1e}"));
    }
    Ok(lines.join(", "))
}

fn criterion_6() -> Outcome {
    let model = load("merton.json");
    let payoff = Payoff::Call { strike: 1.0 };
    let config = SchemeConfig::default();
    let grid = default_grid(&model, &payoff, 1.0, 1.0, &config).map_err(|e| e.to_string())?;
    let (_, sd) = step_doubling(&model, &payoff, &grid, &config, 1.0).map_err(|e| e.to_string())?;
    let mc = price_mc(&model, &payoff, 1.0, 0.0, 1.0, &MCConfig::default()).map_err(|e| e.to_string())?;
    let series = merton_call(1.0, 1.0, 0.2, 0.1, 1.0, 1.0);
    let tol = (3.0 * mc.stderr).max(2.0 * sd.error);
    check(
        (sd.coarse - mc.mean).abs() <= tol,
        format!("fd {} vs mc {} (tol {tol})", sd.coarse, mc.mean),
    )?;
    check(
        (sd.coarse - series).abs() <= tol,
        format!("fd {} vs series {series} (tol {tol})", sd.coarse),
    )?;
    check(
        (mc.mean - series).abs() <= tol,
        format!("mc {} vs series {series} (tol {tol})", mc.mean),
    )?;
    Ok(format!(
        "fd {:.6}, mc {:.6} ± {:.1e}, series {series:.6}, tolerance {tol:.1e}",
        sd.coarse, mc.mean, mc.stderr
    ))
}

fn criterion_7() -> Outcome {
    let model = load("density.json");
    let payoff = Payoff::Call { strike: 1.0 };
    let config = SchemeConfig::default();
    let xs: Vec<f64> = (0..400).map(|k| 0.01 * (2e4f64).powf(k as f64 / 399.0)).collect();
    let mut prices = Vec::new();
    for n in [2u32, 4, 8, 16] {
        let truncated = truncate_model(&model, n, &xs, &TruncationOptions::default()).map_err(|e| e.to_string())?;
        let nf = n as f64;
        for k in 0..=32 {
            let z = (nf * nf).powf(k as f64 / 32.0) / nf;
            let phis: Vec<f64> = xs.iter().map(|&x| truncated.phi.eval(x, 0.0, z)).collect();
            for (&x, &pn) in xs.iter().zip(&phis) {
                let phi = model.phi.eval(x, 0.0, z);
                // labels that coincide with table nodes differ from them by a few ulp
                let ulps = 1e-14;
                check(
                    pn >= 0.0 && pn <= phi * (1.0 + ulps),
                    format!("n={n}: phi_n({x},{z}) = {pn} vs phi {phi}"),
                )?;
                check(
                    pn == 0.0 || phi / pn >= 1.0 - ulps,
                    format!("n={n}: ratio {} below 1 at ({x},{z})", phi / pn),
                )?;
            }
            for w in 1..xs.len() - 1 {
                let left = (phis[w] - phis[w - 1]) / (xs[w] - xs[w - 1]);
                let right = (phis[w + 1] - phis[w]) / (xs[w + 1] - xs[w]);
                check(
                    right >= left - 1e-12 * left.abs().max(1.0),
                    format!("n={n}: phi_n not convex at x={}", xs[w]),
                )?;
            }
        }
        let grid = default_grid(&truncated, &payoff, 1.0, 1.0, &config).map_err(|e| e.to_string())?;
        let price = solve_pide(&truncated, &payoff, &grid, &config)
            .map_err(|e| e.to_string())?
            .price_at(1.0);
        prices.push(price);
    }
    let diffs: Vec<f64> = prices.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    check(
        diffs.windows(2).all(|d| d[1] < d[0]),
        format!("differences {diffs:?} not decreasing"),
    )?;
    let p: Vec<String> = prices.iter().map(|v| format!("{v:.6}")).collect();
    let d: Vec<String> = diffs.iter().map(|v| format!("{v:.1e}")).collect();
    Ok(format!("prices [{}], differences [{}]", p.join(", "), d.join(", ")))
}

fn criterion_8() -> Outcome {
    let xs: Vec<f64> = (1..=40).map(|k| 0.1 * k as f64).collect();
    let ts = [0.0, 0.5, 1.0];
    let widths = [0.05, 0.1, 0.2];
    let mut names = Vec::new();
    for model in [
        load("diffusion.json"),
        load("merton.json"),
        load("time_modulated.json"),
        Model::relative_jump("negative jumps", 0.1, -0.3, 2.0),
    ] {
        let report = lcp_scan(&model, &xs, &ts, &widths).map_err(|e| e.to_string())?;
        check(
            report.verdict == LcpVerdict::NoViolationFound,
            format!("{}: {report}", model.label),
        )?;
        names.push(model.label.clone());
    }
    let report = lcp_scan(&counterexample_model(), &xs, &ts, &widths).map_err(|e| e.to_string())?;
    check(
        report.verdict == LcpVerdict::Violated,
        "counterexample: no violation found",
    )?;
    let w = report.witness.as_ref().map(|p| p.x0).unwrap_or(f64::NAN);
    Ok(format!(
        "{} linear-jump models clean, counterexample violated at x0={w}",
        names.len()
    ))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let model = load("diffusion.json");
    let payoff = Payoff::Put { strike: 1.0 };
    let config = SchemeConfig::default();
    let grid = default_grid(&model, &payoff, 1.0, 1.0, &config).map_err(|e| e.to_string())?;
    let european = solve_pide(&model, &payoff, &grid, &config).map_err(|e| e.to_string())?;
    let n_t = grid.n_t();
    let mut previous = european.final_slice();
    let mut at_x0 = vec![european.price_at(1.0)];
    for count in [3usize, 6, 12] {
        let dates: Vec<f64> = (0..count).map(|k| k as f64 / count as f64).collect();
        let surface = solve_bermudan(&model, &payoff, &grid, &config, &dates).map_err(|e| e.to_string())?;
        let values = surface.final_slice();
        for (i, &x) in grid.x_nodes.iter().enumerate() {
            check(values[i] >= previous[i], format!("{count} dates: decrease at x={x}"))?;
            check(
                values[i] >= european.value(i, n_t - 1),
                format!("{count} dates: below European at x={x}"),
            )?;
            check(
                values[i] >= payoff.value(x),
                format!("{count} dates: below payoff at x={x}"),
            )?;
        }
        at_x0.push(surface.price_at(1.0));
        previous = values;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), format!("{elapsed:?}"))?;
    let v: Vec<String> = at_x0.iter().map(|p| format!("{p:.7}")).collect();
    Ok(format!(
        "european, 3, 6, 12 dates at x0=1: [{}], {:.1}s",
        v.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn criterion_10(dir: &Path) -> Outcome {
    let truncated = truncated_density(dir, 2)?;
    let merton = models_dir().join("merton.json");
    let diffusion = models_dir().join("diffusion.json");
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "price-mc",
            [
                "price",
                "--model",
                merton.to_str().unwrap(),
                "--payoff",
                "call:K=1",
                "--x0",
                "1",
                "--T",
                "1",
                "--method",
                "mc",
                "--paths",
                "20000",
            ]
            .map(String::from)
            .to_vec(),
        ),
        (
            "price-fd",
            [
                "price",
                "--model",
                truncated.to_str().unwrap(),
                "--payoff",
                "put:K=1",
                "--x0",
                "1",
                "--T",
                "1",
                "--method",
                "fd",
            ]
            .map(String::from)
            .to_vec(),
        ),
        (
            "counterexample",
            ["counterexample", "--paths", "20000"].map(String::from).to_vec(),
        ),
        (
            "bermudan",
            [
                "bermudan",
                "--model",
                diffusion.to_str().unwrap(),
                "--payoff",
                "put:K=1",
                "--T",
                "1",
                "--dates",
                "0,0.25,0.5,0.75",
            ]
            .map(String::from)
            .to_vec(),
        ),
    ];
    let mut compared = 0;
    for (name, args) in runs {
        let base = dir.join(format!("c10_{name}"));
        let mut full = args.clone();
        full.extend(["--out-dir".to_string(), base.to_str().unwrap().to_string()]);
        let argv: Vec<&str> = full.iter().map(String::as_str).collect();
        jumpvex(&argv, Some(1))?;
        let manifest = base.join("manifest.json");
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in [1usize, 2, 8] {
            let out = dir.join(format!("c10_{name}_t{threads}"));
            jumpvex(
                &[
                    "--replay",
                    manifest.to_str().unwrap(),
                    "--out-dir",
                    out.to_str().unwrap(),
                ],
                Some(threads),
            )?;
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .map(|entry| {
                    let path = entry.unwrap().path();
                    (
                        path.file_name().unwrap().to_string_lossy().into_owned(),
                        fs::read(&path).unwrap(),
                    )
                })
                .collect();
            files.sort();
            check(!files.is_empty(), format!("{name}: replay wrote nothing"))?;
            match &reference {
                None => reference = Some(files),
                Some(r) => {
                    check(r == &files, format!("{name}: outputs differ at {threads} threads"))?;
                    compared += files.len();
                }
            }
        }
        // the replayed outputs must also match the original run
        for (file, bytes) in reference.unwrap() {
            let original = fs::read(base.join(&file)).map_err(|e| e.to_string())?;
            check(
                original == bytes,
                format!("{name}: {file} differs from the original run"),
            )?;
        }
    }
    Ok(format!(
        "4 manifests replayed under 1, 2 and 8 threads, {compared} file comparisons identical"
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let criteria: Vec<Criterion> = vec![
        ("martingale identity", Box::new(|| criterion_1(dir))),
        ("counterexample reproduction", Box::new(|| criterion_2(dir))),
        ("convexity preservation", Box::new(criterion_3)),
        ("monotonicity in lambda", Box::new(criterion_4)),
        ("Black-Scholes lower bound", Box::new(|| criterion_5(dir))),
        ("FD-MC cross-validation", Box::new(criterion_6)),
        ("truncation convergence", Box::new(criterion_7)),
        ("LCP probe consistency", Box::new(criterion_8)),
        ("Bermudan ladder", Box::new(criterion_9)),
        ("determinism", Box::new(|| criterion_10(dir))),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
