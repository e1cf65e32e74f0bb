//! Acceptance checks. Prints one line per criterion and exits non-zero if
//! any criterion fails. Set `RAINRULE_CORPUS_DIR` to a directory of
//! Cricsheet JSON files to run the data-dependent check.

mod support;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rainrule::ball_log::{load_corpus, load_sources, trajectory, MatchFormat, MatchRecord};
use rainrule::dl_reference::{fit_dl_curve, fit_dl_family, resource_table, ResourceTable};
use rainrule::run_curves::{fit_poly, wicket_curve, CurvePoint, Degree, PolyFit, WicketCurve};
use rainrule::score_stats::{
    build_histogram, default_bin_width, fit_normal, normal_curve, totals, Histogram,
};
use rainrule::target_engine::{
    area_full, area_interrupted, ratio_excluding, resource_ratio, revise_target, Gap,
    InterruptionScenario,
};
use rainrule::fixtures;
use support::{adaptive_simpson, quad_interrupted, synthetic_corpus};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn real_corpus() -> Option<Vec<MatchRecord>> {
    let dir = PathBuf::from(std::env::var_os("RAINRULE_CORPUS_DIR")?);
    let cutoff = NaiveDate::from_ymd_opt(2016, 12, 31).unwrap();
    match load_corpus(&dir, None) {
        Ok(c) => Some(c.until(cutoff).matches),
        Err(e) => {
            eprintln!("RAINRULE_CORPUS_DIR unreadable: {e}");
            None
        }
    }
}

fn worked_example() -> Verdict {
    let fit = PolyFit::cubic(-0.0031, 1.0298, 0.0);
    let s = InterruptionScenario::new(120, 180, 300, 275, 100, 2).unwrap();
    let start = Instant::now();
    let r = revise_target(&fit, &s).unwrap();
    let elapsed = start.elapsed();
    check(
        (0.745..=0.750).contains(&r.ratio)
            && r.revised_total == 230
            && elapsed < Duration::from_millis(1),
        format!("ratio {:.6}, revised total {}, {elapsed:?}", r.ratio, r.revised_total),
    )
}

fn quadrature_equivalence() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let start = Instant::now();
    let (mut worst, mut worst_plain) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let coef = (
            rng.random_range(-0.01..0.01),
            rng.random_range(-2.0..2.0),
            rng.random_range(-5.0..5.0),
        );
        let total: u32 = rng.random_range(1..=300);
        let n = rng.random_range(0..=total);
        let m = rng.random_range(n..=total);
        let fit = PolyFit::cubic(coef.0, coef.1, coef.2);
        let t = f64::from(total);
        let f_abs = move |x: f64| (((coef.0 * x + coef.1) * x + coef.2) * x).abs();
        let magnitude = coef.0.abs() * t.powi(4) + coef.1.abs() * t.powi(3) + coef.2.abs() * t * t;
        let mass = adaptive_simpson(&f_abs, 0.0, t, 1e-12 * magnitude);
        for (closed, oracle) in [
            (area_full(&fit, total), quad_interrupted(coef, 0.0, 0.0, t)),
            (
                area_interrupted(&fit, n, m, total).unwrap(),
                quad_interrupted(coef, f64::from(n), f64::from(m), t),
            ),
        ] {
            let err = (closed - oracle).abs();
            worst = worst.max(err / mass.max(oracle.abs()).max(1e-300));
            if oracle.abs() > 1e-3 * mass {
                worst_plain = worst_plain.max(err / oracle.abs());
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("worst relative error {worst:.2e} ({worst_plain:.2e} without cancellation), {elapsed:?}"),
    )
}

fn identities() -> Verdict {
    let mut rng = StdRng::seed_from_u64(12);
    let mut worst = 0.0f64;
    let mut exact = true;
    for _ in 0..500 {
        // Positive on [0, 300], as any scoring curve is.
        let fit = PolyFit::cubic(
            rng.random_range(-1e-5..1e-5),
            rng.random_range(0.0..0.01),
            rng.random_range(0.1..2.0),
        );
        let total: u32 = rng.random_range(1..=300);
        let n = rng.random_range(0..=total);
        let full = area_full(&fit, total);
        let same = area_interrupted(&fit, n, n, total).unwrap();
        worst = worst.max((same - full).abs() / full.abs().max(1.0));
        let s = InterruptionScenario::new(n, n, total, 200, 50, 0).unwrap();
        exact &= resource_ratio(&fit, &s).unwrap() == 1.0;
        exact &= ratio_excluding(&fit, &[Gap { from: 0, to: total }], total).unwrap() == 0.0;
        exact &= fit.eval(0.0) == 0.0;
    }
    // Polynomials fitted from data also pass through the origin.
    for (seed, format) in [(1, MatchFormat::Odi), (2, MatchFormat::T20i), (3, MatchFormat::Ipl)] {
        let corpus = synthetic_corpus(seed, format, 150);
        for w in 0..10 {
            if let Ok(c) = wicket_curve(&corpus, format, 1, w, 10) {
                for degree in [Degree::Quadratic, Degree::Cubic] {
                    if let Ok(f) = fit_poly(&c, degree, true) {
                        exact &= f.eval(0.0) == 0.0;
                    }
                }
            }
        }
    }
    check(
        exact && worst <= 1e-12,
        format!("worst area_interrupted(n,n,N) vs area_full {worst:.2e}"),
    )
}

fn planted_curve(format: MatchFormat, a: f64, b: f64, c: f64) -> WicketCurve {
    let points = (1..=format.scheduled_balls())
        .map(|ball| {
            let x = f64::from(ball);
            CurvePoint {
                ball,
                mean_score: ((a * x + b) * x + c) * x,
                n_contributing: 1 + (ball as usize * 31) % 40,
            }
        })
        .collect();
    WicketCurve {
        wickets: 0,
        points,
        format,
        innings_index: 1,
    }
}

fn planted_histogram(xi: f64, sigma: f64, amp: f64) -> Histogram {
    let width = 10.0;
    let lowest = ((xi - 4.0 * sigma) / width).floor() * width;
    let bins = ((8.0 * sigma) / width).ceil() as usize + 2;
    let counts = (0..bins)
        .map(|i| normal_curve(lowest + (i as f64 + 0.5) * width, xi, sigma, amp))
        .collect();
    Histogram::from_counts(lowest, width, counts).unwrap()
}

fn fit_recovery() -> Verdict {
    let mut rng = StdRng::seed_from_u64(99);
    let start = Instant::now();
    let (mut poly, mut normal, mut dl) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..60 {
        let format = MatchFormat::ALL[i % 3];
        let (a, b, c) = (
            rng.random_range(-1e-4..1e-4),
            rng.random_range(-0.01..0.01),
            rng.random_range(0.2..2.0),
        );
        let f = fit_poly(&planted_curve(format, a, b, c), Degree::Cubic, true).unwrap();
        for (got, want) in [(f.a, a), (f.b, b), (f.c, c)] {
            poly = poly.max((got - want).abs() / want.abs());
        }

        let (xi, sigma, amp) = (
            rng.random_range(120.0..300.0),
            rng.random_range(15.0..60.0),
            rng.random_range(100.0..5000.0),
        );
        let n = fit_normal(&planted_histogram(xi, sigma, amp)).unwrap();
        normal = normal.max((n.xi - xi).abs()).max((n.sigma - sigma).abs()).max((n.amplitude - amp).abs());

        let (z0, decay) = (rng.random_range(30.0..350.0), rng.random_range(0.01..0.3));
        let overs = format.max_overs();
        let pts: Vec<_> = (0..=overs)
            .map(|u| (f64::from(u), z0 * -(-decay * f64::from(u)).exp_m1(), 20))
            .collect();
        let d = fit_dl_curve(0, &pts).unwrap();
        dl = dl.max((d.z0 - z0).abs()).max((d.decay - decay).abs());
    }
    let elapsed = start.elapsed();
    check(
        poly <= 1e-9 && normal <= 1e-6 && dl <= 1e-4 && elapsed < Duration::from_secs(10),
        format!("poly rel {poly:.1e}, normal abs {normal:.1e}, exponential abs {dl:.1e}, {elapsed:?}"),
    )
}

fn table1(corpus: Option<&[MatchRecord]>) -> Verdict {
    let Some(corpus) = corpus else {
        return Verdict::Skip("no corpus (set RAINRULE_CORPUS_DIR)".into());
    };
    let mut xi = std::collections::HashMap::new();
    for format in MatchFormat::ALL {
        for innings in 1..=2u8 {
            let fit = totals(corpus, format, innings)
                .and_then(|t| build_histogram(&t, default_bin_width(format)))
                .and_then(|h| fit_normal(&h));
            match fit {
                Ok(f) => {
                    xi.insert((format, innings), f.xi);
                }
                Err(e) => return Verdict::Fail(format!("{format} innings {innings}: {e}")),
            }
        }
    }
    let odi = xi[&(MatchFormat::Odi, 1)];
    let ipl = xi[&(MatchFormat::Ipl, 1)];
    let ordered = MatchFormat::ALL
        .iter()
        .all(|&f| xi[&(f, 1)] > xi[&(f, 2)]);
    check(
        (odi - 272.538).abs() <= 15.0 && (ipl - 161.785).abs() <= 10.0 && ordered,
        format!(
            "ODI xi {odi:.1} / {:.1}, T20I {:.1} / {:.1}, IPL {ipl:.1} / {:.1}",
            xi[&(MatchFormat::Odi, 2)],
            xi[&(MatchFormat::T20i, 1)],
            xi[&(MatchFormat::T20i, 2)],
            xi[&(MatchFormat::Ipl, 2)]
        ),
    )
}

fn conservation(real: Option<&[MatchRecord]>) -> Verdict {
    let mut sets = vec![load_sources(fixtures::match_files(), None).matches];
    for (seed, format) in [(4, MatchFormat::Odi), (5, MatchFormat::T20i), (6, MatchFormat::Ipl)] {
        sets.push(synthetic_corpus(seed, format, 100));
    }
    if let Some(r) = real {
        sets.push(r.to_vec());
    }
    let mut innings = 0;
    let mut ok = true;
    for set in &sets {
        for m in set {
            for inn in &m.innings {
                let oracle: u32 = inn.deliveries.iter().map(|d| d.batter_runs + d.extras_runs).sum();
                ok &= trajectory(inn, m.format).total == oracle;
                innings += 1;
            }
        }
        for format in MatchFormat::ALL {
            for i in 1..=2 {
                if let Ok(t) = totals(set, format, i) {
                    let h = build_histogram(&t, default_bin_width(format)).unwrap();
                    ok &= h.counts.iter().sum::<f64>() == t.len() as f64;
                }
            }
        }
    }
    check(ok, format!("{innings} innings checked"))
}

fn table_is_monotone(t: &ResourceTable) -> bool {
    (0..=t.max_overs).all(|u| {
        (0..=10).all(|w| {
            let v = t.percentage(u, w).unwrap();
            (w == 0 || v <= t.percentage(u, w - 1).unwrap())
                && (u == 0 || v >= t.percentage(u - 1, w).unwrap())
        })
    })
}

fn dl_monotonicity(real: Option<&[MatchRecord]>) -> Verdict {
    let mut tables = 0;
    let mut ok = true;
    let mut sources: Vec<Vec<MatchRecord>> = (0..5u64)
        .flat_map(|seed| {
            MatchFormat::ALL
                .into_iter()
                .map(move |f| synthetic_corpus(100 + seed, f, 200))
        })
        .collect();
    if let Some(r) = real {
        sources.push(r.to_vec());
    }
    for corpus in &sources {
        for format in MatchFormat::ALL {
            let Ok(family) = fit_dl_family(corpus, format, 10) else {
                continue;
            };
            if let Ok(t) = resource_table(&family.curves, format.max_overs()) {
                ok &= table_is_monotone(&t);
                tables += 1;
            }
        }
    }
    check(ok && tables > 0, format!("{tables} fitted tables scanned"))
}

fn main() -> ExitCode {
    let real = real_corpus();
    let real = real.as_deref();
    let criteria: [(&str, Verdict); 7] = [
        ("worked example", worked_example()),
        ("quadrature equivalence", quadrature_equivalence()),
        ("identities", identities()),
        ("fit recovery", fit_recovery()),
        ("innings-total structure", table1(real)),
        ("parser conservation", conservation(real)),
        ("resource table monotonicity", dl_monotonicity(real)),
    ];
    let mut failed = 0;
    for (name, verdict) in criteria {
        match verdict {
            Verdict::Pass(d) => println!("PASS {name}: {d}"),
            Verdict::Skip(d) => println!("SKIP {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
