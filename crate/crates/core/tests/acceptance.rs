//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use qfextreme::experiments::emit::to_csv;
use qfextreme::experiments::verify::verify_constants;
use qfextreme::experiments::{
    diagnose_sweep, diverging_sup_distance, run, wimp_sup, ExperimentConfig, SourceSelection, SpectrumSpec, Theorem,
};
use qfextreme::limits::normalization_fixed_field;
use qfextreme::tail::hyperspherical_identity_check;
use qfextreme::{substream, ExtremalMode, FieldKind, LimitLaw, Source, Spectrum};

const WORKERS: usize = 8;
const M: usize = 5000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn sp(v: &[f64]) -> Spectrum {
    Spectrum::new(v.to_vec()).unwrap()
}

fn config(spectrum: &[f64], n: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::fixed_rank(sp(spectrum), n, M, seed);
    cfg.workers = WORKERS;
    cfg
}

fn hyperspherical() -> Outcome {
    let mut stream = substream(0xacc1, 0);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let k = 2 + i % 4;
        let values: Vec<f64> = (0..k).map(|_| 0.1 + 9.9 * stream.next_f64()).collect();
        match hyperspherical_identity_check(&sp(&values)) {
            Ok((num, closed)) => worst = worst.max((num / closed - 1.0).abs()),
            Err(e) => return outcome(false, format!("spectrum {values:?}: {e}")),
        }
    }
    outcome(
        worst < 1e-6,
        format!("max |quadrature/closed - 1| = {worst:.2e} over 20 spectra (< 1e-6)"),
    )
}

fn constants() -> Outcome {
    let report = verify_constants();
    let picked: Vec<_> = report
        .items
        .iter()
        .filter(|i| {
            ["c_m", "c*", "gamma_", "rank-one"]
                .iter()
                .any(|p| i.name.starts_with(p))
        })
        .collect();
    let failed: Vec<&str> = picked.iter().filter(|i| !i.passed).map(|i| i.name.as_str()).collect();
    outcome(
        failed.is_empty() && picked.len() >= 11,
        format!("{} constant checks at 1e-12, failing: {failed:?}", picked.len()),
    )
}

fn coupling() -> Outcome {
    let mut a = config(&[1.0], 2000, 0xacc3);
    a.source = SourceSelection::Both;
    let mut b = config(&[1.0, 1.0, -1.0], 2000, 0xacc4);
    b.source = SourceSelection::Both;
    b.mode = ExtremalMode::MaxAbs;
    let da = run(&a).unwrap().ks_two_sample.unwrap();
    let db = run(&b).unwrap().ks_two_sample.unwrap();
    outcome(
        da < 0.04 && db < 0.04,
        format!("two-sample KS (1) = {da:.4}, (1,1,-1) max_abs = {db:.4} (< 0.04)"),
    )
}

fn gumbel_suite() -> Outcome {
    let r = run(&config(&[1.0, 1.0], 2000, 0xacc5)).unwrap();
    let s = r.source(Source::Haar).unwrap();
    let exact = s.ks_vs_exact.unwrap_or(1.0);
    outcome(
        exact < 0.04 && s.ks_vs_limit < 0.10,
        format!(
            "KS vs exact = {exact:.4} (< 0.04), vs Gumbel = {:.4} (< 0.10)",
            s.ks_vs_limit
        ),
    )
}

fn weibull_suite() -> Outcome {
    let r = run(&config(&[-1.0, -1.0], 2000, 0xacc6)).unwrap();
    let s = r.source(Source::Haar).unwrap();
    let law_ok = r.normalization.law == LimitLaw::Weibull { shape: 1.0 };
    outcome(
        law_ok && s.ks_vs_limit < 0.05,
        format!(
            "law {:?}, KS vs Weibull(1) = {:.4} (< 0.05)",
            r.normalization.law, s.ks_vs_limit
        ),
    )
}

fn gue_rank_one() -> Outcome {
    let n = 1000;
    let mut cfg = config(&[1.0], n, 0xacc7);
    cfg.field = FieldKind::Complex;
    cfg.theorem = Theorem::RankOne;
    let norm = normalization_fixed_field(&sp(&[1.0]), n as u64, ExtremalMode::MaxSigned, FieldKind::Complex).unwrap();
    let centering = (norm.scale - 1.0).abs() < 1e-15 && (norm.shift + (n as f64).ln()).abs() < 1e-12;
    let r = run(&cfg).unwrap();
    let d = r.source(Source::Haar).unwrap().ks_vs_limit;
    outcome(
        centering && d < 0.08,
        format!("normalization S - log N: {centering}, KS vs Gumbel = {d:.4} (< 0.08)"),
    )
}

fn diverging() -> Outcome {
    let mut cfg = config(&[1.0], 4000, 0xacc8);
    cfg.theorem = Theorem::DivergingRank;
    cfg.source = SourceSelection::Gaussian;
    cfg.spectrum = SpectrumSpec::Diverging {
        alpha: 0.3,
        epsilon: 0.0,
    };
    let r = run(&cfg).unwrap();
    let d = r.source(Source::Gaussian).unwrap().ks_vs_limit;
    let sups: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| diverging_sup_distance(n, 0.3).unwrap())
        .collect();
    let monotone = sups.windows(2).all(|w| w[1] < w[0]);
    outcome(
        d < 0.10 && monotone,
        format!(
            "k_N = {}, KS vs Gumbel = {d:.4} (< 0.10); sup-distance {:.4} {:.4} {:.4} {:.4} decreasing: {monotone}",
            r.rank, sups[0], sups[1], sups[2], sups[3]
        ),
    )
}

fn wimp() -> Outcome {
    let (a, b, c) = (
        wimp_sup(25.0).unwrap().0,
        wimp_sup(100.0).unwrap().0,
        wimp_sup(400.0).unwrap().0,
    );
    outcome(
        c < b && b < a && c < 0.15,
        format!("sup rel error n=25 {a:.4e}, n=100 {b:.4e}, n=400 {c:.4e}"),
    )
}

fn diagnostics() -> Outcome {
    let rows = diagnose_sweep(
        &[(1000, 5), (2000, 10), (4000, 20)],
        200,
        0xacc9,
        WORKERS,
        FieldKind::Real,
    )
    .unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for row in &rows {
        ok &= row.eps_ok() && row.l_ok();
        parts.push(format!(
            "({}, {}) eps {:.3}/{:.3} L {:.4}/{:.4}",
            row.n, row.k, row.median_eps, row.eps_bound, row.median_l, row.l_bound
        ));
    }
    outcome(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let mut cfg = config(&[1.0, 0.5, -0.25], 500, 0xacca);
    cfg.replicas = 400;
    cfg.source = SourceSelection::Both;
    cfg.mode = ExtremalMode::MaxAbs;
    cfg.diagnostics = true;
    let texts: Vec<String> = [1, 3, 8, 8]
        .iter()
        .map(|&w| {
            cfg.workers = w;
            to_csv(&run(&cfg).unwrap())
        })
        .collect();
    let same = texts.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "CSV for workers 1, 3, 8, 8 byte-identical: {same} ({} bytes)",
            texts[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("hyperspherical identity", hyperspherical),
        ("closed-form constants", constants),
        ("Haar/Gaussian coupling", coupling),
        ("fixed-rank Gumbel", gumbel_suite),
        ("Weibull minimum", weibull_suite),
        ("complex rank one", gue_rank_one),
        ("diverging rank", diverging),
        ("Wimp estimate", wimp),
        ("coupling diagnostics", diagnostics),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!o.passed);
        println!(
            "{tag} {:>2} {name}: {} [{:.1}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
