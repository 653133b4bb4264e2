//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use stabledrift::asymptotics::{ks_critical_value, ks_two_sample, time_change_check};
use stabledrift::config::RawConfig;
use stabledrift::kernel::{make_kernel, KernelFamily, MOMENT_TOLERANCE};
use stabledrift::rng::stream_rng;
use stabledrift::stable::{empirical_cf, sample_stable, stable_cf, StableParams};
use stabledrift::study::{self, StudyConfig};
use stabledrift::{Result, TimeGrid};

type Verdict = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Verdict);

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn study(name: &str) -> Result<StudyConfig> {
    StudyConfig::from_raw(&RawConfig::from_file(&config_dir().join(name))?, None)
}

fn sampler_correctness() -> Verdict {
    let mut worst = 0.0_f64;
    for (i, &alpha) in [1.2, 1.5, 1.8, 2.0].iter().enumerate() {
        for (j, &beta) in [-0.5, 0.0, 0.5].iter().enumerate() {
            let p = StableParams::standard(alpha, beta)?;
            let mut rng = stream_rng(11, (3 * i + j) as u64);
            let draws: Vec<f64> = (0..100_000).map(|_| sample_stable(&p, &mut rng)).collect::<Result<_>>()?;
            for &u in &[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
                worst = worst.max((empirical_cf(&draws, u)? - stable_cf(&p, u)).norm());
            }
        }
    }
    let p = StableParams::standard(2.0, 0.0)?;
    let mut rng = stream_rng(12, 0);
    let stable: Vec<f64> = (0..100_000).map(|_| sample_stable(&p, &mut rng)).collect::<Result<_>>()?;
    let mut rng = stream_rng(12, 1);
    let normal: Vec<f64> = (0..100_000)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            std::f64::consts::SQRT_2 * z
        })
        .collect();
    let ks = ks_two_sample(&stable, &normal)?;
    let crit = ks_critical_value(100_000, 100_000, 0.01);
    Ok((worst < 0.02 && ks < crit, format!("max CF error {worst:.4} < 0.02; alpha=2 KS {ks:.4} < {crit:.4}")))
}

fn time_change() -> Verdict {
    let grid = TimeGrid::new(1.0, 2000)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for family in [KernelFamily::Uniform, KernelFamily::Epanechnikov] {
        let kernel = make_kernel(0, family)?;
        for (s, &alpha) in [1.3, 1.7].iter().enumerate() {
            let r = time_change_check(&kernel, 0.1, 0.5, grid, alpha, 0.0, 10_000, 20 + s as u64, 0.01)?;
            ok &= r.pass;
            parts.push(format!("{family} a={alpha}: {:.4}", r.statistic));
        }
    }
    let crit = ks_critical_value(10_000, 10_000, 0.01);
    Ok((ok, format!("{} (critical {crit:.4})", parts.join(", "))))
}

fn gronwall() -> Verdict {
    let r = study::run_gronwall_study(&study("gronwall.cfg")?)?;
    let row = &r.rows[0];
    Ok((
        r.passed(),
        format!("{} violations in {} replicates, worst excess {:.3e}", row.violations, row.n_reps, row.worst_excess),
    ))
}

fn consistency() -> Verdict {
    let r = study::run_consistency_study(&study("consistency.cfg")?)?;
    let means: Vec<String> = r.rows.iter().map(|row| format!("{:.4}", row.mean_abs_error)).collect();
    Ok((r.passed(), format!("mean sup errors {}", means.join(" > "))))
}

fn drift_rates() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["drift_rate_k0.cfg", "drift_rate_k1.cfg", "drift_rate_k0_a18.cfg"] {
        let cfg = study(name)?;
        let r = study::run_rate_study(&cfg)?;
        ok &= r.slope_within_tolerance();
        parts.push(format!("k={} a={}: slope {:.3} vs {:.3}", cfg.k, cfg.alpha, r.slope, r.target));
    }
    Ok((ok, format!("{} (tolerance 0.15)", parts.join(", "))))
}

fn limit_law() -> Verdict {
    let r = study::run_dist_check(&study("limit_law.cfg")?)?;
    let ks: Vec<String> = r.rows.iter().map(|row| format!("eps={}: {:.4}", row.eps, row.ks_statistic)).collect();
    Ok((r.passed(), format!("{}; decreasing {}, last < 0.05 required", ks.join(", "), r.decreasing())))
}

fn multiplier_rate() -> Verdict {
    let r = study::run_rate_study(&study("multiplier_rate.cfg")?)?;
    let rates: Vec<String> =
        r.rows.iter().map(|row| format!("{}", row.event_failure_rate.unwrap_or(f64::NAN))).collect();
    Ok((
        r.passed(),
        format!(
            "slope {:.3} vs {:.3} (tolerance 0.2); P(A^c) {} vanishing {}",
            r.slope,
            r.target,
            rates.join(" "),
            r.event_failures_vanish()
        ),
    ))
}

fn kernel_certification() -> Verdict {
    let mut cases = vec![(KernelFamily::Uniform, 0), (KernelFamily::Uniform, 1)];
    cases.extend([(KernelFamily::Epanechnikov, 0), (KernelFamily::Epanechnikov, 1)]);
    cases.extend((0..=6).map(|k| (KernelFamily::Polynomial, k)));
    let mut worst = 0.0_f64;
    for &(family, k) in &cases {
        let g = make_kernel(k, family)?;
        worst = worst.max((g.moment(0) - 1.0).abs());
        for j in 1..=k {
            worst = worst.max(g.moment(j).abs());
        }
    }
    let min2 = make_kernel(2, KernelFamily::Polynomial)?.min_value();
    Ok((
        worst <= MOMENT_TOLERANCE && min2 < 0.0,
        format!("{} kernels, worst moment defect {worst:.1e}; order-2 min G = {min2}", cases.len()),
    ))
}

fn run_cli(threads: &str, args: &[&str], out: &Path) -> Result<Vec<u8>> {
    let status = Command::new(env!("CARGO_BIN_EXE_stabledrift"))
        .env("STABLEDRIFT_THREADS", threads)
        .args(args)
        .arg("--out")
        .arg(out)
        .status()?;
    if status.code() == Some(1) || status.code().is_none() {
        return Err(stabledrift::Error::Config(format!("cli exited with {status}")));
    }
    Ok(std::fs::read(out)?)
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("stabledrift-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let studies: [(&str, &str); 3] = [
        ("rate-study", "drift_rate_k0.cfg"),
        ("rate-study", "multiplier_rate.cfg"),
        ("consistency", "consistency.cfg"),
    ];
    let mut ok = true;
    for (cmd, cfg) in studies {
        let path = config_dir().join(cfg);
        let args = [cmd, "--config", path.to_str().unwrap(), "--seed", "5"];
        let outputs: Vec<Vec<u8>> = ["1", "2", "4"]
            .iter()
            .map(|t| run_cli(t, &args, &dir.join(format!("{cfg}.{t}.csv"))))
            .collect::<Result<_>>()?;
        ok &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((ok, "rate and consistency CSVs under 1, 2 and 4 threads".into()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("stable sampler", sampler_correctness),
        ("time-change representation", time_change),
        ("deviation bound", gronwall),
        ("consistency", consistency),
        ("drift rate", drift_rates),
        ("limit law", limit_law),
        ("multiplier rate", multiplier_rate),
        ("kernel certification", kernel_certification),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {verdict} [{:.1}s] {detail}", i + 1, start.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
