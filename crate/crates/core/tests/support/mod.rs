//! Test-only oracles and synthetic data.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rainrule::ball_log::{DeliveryEvent, ExtrasKind, InningsRecord, MatchFormat, MatchRecord};

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40)
}

/// `∫ f` over `[0, N]` minus `[n, m]`, by quadrature on the integrand.
pub fn quad_interrupted(coef: (f64, f64, f64), n: f64, m: f64, total: f64) -> f64 {
    let (a, b, c) = coef;
    let f = move |x: f64| a * x * x * x + b * x * x + c * x;
    let scale = total.powi(4) * (a.abs() + b.abs() + c.abs()).max(1e-300);
    let tol = 1e-14 * scale;
    adaptive_simpson(&f, 0.0, n, tol) + adaptive_simpson(&f, m, total, tol)
}

fn delivery(over: u32, ball: u32, bat: u32, extras: u32, kind: ExtrasKind, wicket: bool) -> DeliveryEvent {
    DeliveryEvent::new(over, ball, bat, extras, kind, wicket).unwrap()
}

/// One simulated innings. Scoring accelerates and wickets grow likelier
/// late in the innings; stops at the ball limit, ten wickets, or `chase`.
pub fn simulate_innings(rng: &mut StdRng, format: MatchFormat, index: u8, chase: Option<u32>) -> InningsRecord {
    let balls = format.scheduled_balls();
    let mut out = Vec::new();
    let (mut legal, mut wickets, mut runs) = (0u32, 0u32, 0u32);
    let mut over = 0;
    let mut in_over = 0;
    while legal < balls && wickets < 10 && chase.is_none_or(|t| runs < t) {
        in_over += 1;
        let phase = f64::from(legal) / f64::from(balls);
        if rng.random_bool(0.025) {
            let kind = if rng.random_bool(0.7) { ExtrasKind::Wide } else { ExtrasKind::NoBall };
            let extras = 1 + u32::from(rng.random_bool(0.1)) * 4;
            out.push(delivery(over, in_over, 0, extras, kind, false));
            runs += extras;
            continue;
        }
        let wicket = rng.random_bool(0.02 + 0.03 * phase);
        let bat = if wicket {
            0
        } else {
            let u: f64 = rng.random();
            let boundary = 0.08 + 0.12 * phase;
            if u < boundary * 0.3 {
                6
            } else if u < boundary {
                4
            } else if u < boundary + 0.35 {
                1
            } else if u < boundary + 0.45 {
                2
            } else {
                0
            }
        };
        let (extras, kind) = if !wicket && bat == 0 && rng.random_bool(0.05) {
            (1, ExtrasKind::LegBye)
        } else {
            (0, ExtrasKind::None)
        };
        out.push(delivery(over, in_over, bat, extras, kind, wicket));
        runs += bat + extras;
        wickets += u32::from(wicket);
        legal += 1;
        if legal % 6 == 0 {
            over += 1;
            in_over = 0;
        }
    }
    InningsRecord::new(index, if index == 1 { "Home" } else { "Away" }, out).unwrap()
}

pub fn synthetic_corpus(seed: u64, format: MatchFormat, n_matches: usize) -> Vec<MatchRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n_matches)
        .map(|i| {
            let first = simulate_innings(&mut rng, format, 1, None);
            let target = first.total_runs() + 1;
            let second = simulate_innings(&mut rng, format, 2, Some(target));
            MatchRecord {
                match_id: format!("{}_{i:05}", format.slug()),
                format,
                date: None,
                teams: vec!["Home".into(), "Away".into()],
                venue: None,
                innings: vec![first, second],
                reduced: false,
            }
        })
        .collect()
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
