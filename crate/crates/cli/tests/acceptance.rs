//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::Command;

use spraylab_cli::checks::CheckRecord;
use spraylab_cli::report::VerificationReport;
use spraylab_cli::{suite_models, verify_models, Overrides, RANDOM_RANDERS};

struct Criterion {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn select<'a>(report: &'a VerificationReport, pred: impl Fn(&str) -> bool) -> Vec<&'a CheckRecord> {
    report.checks.iter().filter(|c| pred(&c.id)).collect()
}

fn suffix(id: &str) -> &str {
    id.rsplit(':').next().unwrap_or(id)
}

fn model_of(id: &str) -> &str {
    id.split(':').next().unwrap_or(id)
}

/// All selected checks pass, and at least `min` were selected.
fn judge(id: u32, title: &'static str, checks: &[&CheckRecord], min: usize) -> Criterion {
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} ({:e} > {:e})", c.id, c.max_residual, c.tolerance))
        .collect();
    let worst = checks
        .iter()
        .filter(|c| c.tolerance > 0.0 && c.pass && !c.id.ends_with("rk4-order"))
        .map(|c| c.max_residual / c.tolerance)
        .fold(0.0f64, f64::max);
    let pass = checks.len() >= min && failing.is_empty();
    let detail = if checks.len() < min {
        format!("only {} checks, expected at least {min}", checks.len())
    } else if !failing.is_empty() {
        format!("failing: {}", failing.join(", "))
    } else {
        format!(
            "{} checks, worst residual/tolerance {worst:.1e}",
            checks.len()
        )
    };
    Criterion {
        id,
        title,
        pass,
        detail,
    }
}

fn families_covered(checks: &[&CheckRecord]) -> usize {
    let mut models: Vec<&str> = checks.iter().map(|c| model_of(&c.id)).collect();
    models.sort();
    models.dedup();
    let kinds = [
        "flat",
        "sphere",
        "randers",
        "fourth-root",
        "custom-finsler",
        "custom-spray",
        "riemannian",
    ];
    kinds
        .iter()
        .filter(|k| models.iter().any(|m| m.contains(*k)))
        .count()
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spraylab"))
        .args(args)
        .output()
        .expect("spraylab runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn cli_contract() -> Criterion {
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/fixtures/corrupted-volume-sign.json"
    );
    let (code_a, report_a) = run_cli(&["verify", "--suite", "paper-identities"]);
    let (code_b, report_b) = run_cli(&["verify", "--suite", "paper-identities"]);
    let (code_bad, report_bad) = run_cli(&["verify", "--config", fixture]);
    let flagged = serde_json::from_str::<serde_json::Value>(&report_bad)
        .ok()
        .and_then(|v| {
            v["checks"].as_array().map(|cs| {
                cs.iter().any(|c| {
                    c["id"]
                        .as_str()
                        .is_some_and(|id| id.ends_with(":s-volume-change"))
                        && c["pass"] == false
                })
            })
        })
        .unwrap_or(false);
    let deterministic = report_a == report_b && !report_a.is_empty();
    let pass = code_a == 0 && code_b == 0 && code_bad == 1 && flagged && deterministic;
    Criterion {
        id: 12,
        title: "CLI contract",
        pass,
        detail: format!(
            "suite exit {code_a}/{code_b}, fixture exit {code_bad}, volume law flagged: {flagged}, identical reports: {deterministic}"
        ),
    }
}

fn main() {
    let models = suite_models("paper-identities", 42).expect("suite builds");
    let report = verify_models(models, Overrides::default(), true).expect("suite runs");
    let mut out = Vec::new();

    let ad = select(&report, |id| suffix(id).starts_with("ad-fd-"));
    let mut c1 = judge(1, "AD jets agree with finite differences", &ad, 20);
    if families_covered(&ad) < 7 {
        c1.pass = false;
        c1.detail = format!("model kinds covered: {}", families_covered(&ad));
    }
    out.push(c1);

    out.push(judge(
        2,
        "homogeneity of G, S, Ric, PRic",
        &select(&report, |id| suffix(id).starts_with("homogeneity-")),
        40,
    ));
    out.push(judge(
        3,
        "curvature contraction",
        &select(&report, |id| suffix(id) == "curvature-contraction"),
        10,
    ));

    let sphere = select(&report, |id| {
        (id.starts_with("sphere-2d:") || id.starts_with("sphere-3d:"))
            && suffix(id).starts_with("sphere-")
    });
    out.push(judge(
        4,
        "sphere benchmark in dimensions 2 and 3",
        &sphere,
        6,
    ));

    out.push(judge(
        5,
        "PRic routes agree",
        &select(&report, |id| suffix(id) == "pric-routes"),
        10,
    ));
    out.push(judge(
        6,
        "projective invariance of PRic",
        &select(&report, |id| suffix(id) == "pric-projective-invariance"),
        10,
    ));
    out.push(judge(
        7,
        "volume-change laws",
        &select(&report, |id| {
            matches!(suffix(id), "s-volume-change" | "pric-volume-change")
        }),
        20,
    ));

    let random_randers = select(&report, |id| {
        id.starts_with("random-randers-") && suffix(id).starts_with("randers-")
    });
    let mut models: Vec<&str> = random_randers.iter().map(|c| model_of(&c.id)).collect();
    models.dedup();
    let mut c8 = judge(
        8,
        "Randers chain on random non-closed models",
        &random_randers,
        5 * RANDOM_RANDERS,
    );
    if models.len() < 5 {
        c8.pass = false;
        c8.detail = format!("only {} random Randers models", models.len());
    }
    out.push(c8);

    out.push(judge(
        9,
        "flatness condition equivalence and witnesses",
        &select(&report, |id| {
            matches!(
                suffix(id),
                "gauge-equivalence"
                    | "witness-flatness"
                    | "witness-rescaled-pric"
                    | "ricci-flat-exact-s"
            )
        }),
        15,
    ));

    let fourth = select(&report, |id| {
        id.starts_with("fourth-root-") && suffix(id).starts_with("fourth-root-")
    });
    let has_product = fourth
        .iter()
        .any(|c| c.id.ends_with("fourth-root-product-tensor"));
    let mut c10 = judge(10, "fourth-root metric with flat factors", &fourth, 9);
    if !has_product {
        c10.pass = false;
        c10.detail = "product tensor check missing".into();
    }
    out.push(c10);

    out.push(judge(
        11,
        "Riccati identity, blow-up and RK4 order",
        &select(&report, |id| {
            matches!(
                suffix(id),
                "riccati-identity" | "rk4-order" | "riccati-blowup[-1]" | "riccati-blowup[-0.5]"
            )
        }),
        10,
    ));

    out.push(cli_contract());

    let mut all = true;
    for c in &out {
        all &= c.pass;
        println!(
            "{} criterion {:>2}: {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
