//! Target revision by area ratio.
//!
//! The fitted scoring curve `f(x) = a x^3 + b x^2 + c x` is integrated in
//! closed form over the balls actually available to the chasing side and
//! over the full innings. The ratio of the two areas scales the runs the
//! chase still needs.

use serde::{Deserialize, Serialize};

use crate::ball_log::MAX_WICKETS;
use crate::error::{Error, Result};
use crate::run_curves::PolyFit;

/// `∫₀ᴺ f(x) dx = N²(N(3aN + 4b) + 6c) / 12`.
///
/// Evaluated as `(3aN⁴ + 4bN³ + 6cN²) / 12`, the same operation order as
/// [`area_excluding`], so an interruption that loses no balls reproduces
/// this value bit for bit.
pub fn area_full(fit: &PolyFit, total_balls: u32) -> f64 {
    power_sum_area(fit, total_balls, &[])
}

fn power_sum_area(fit: &PolyFit, total_balls: u32, gaps: &[Gap]) -> f64 {
    let power_sum = |p: u32| -> f64 {
        let lost: i128 = gaps
            .iter()
            .map(|g| i128::from(g.to).pow(p) - i128::from(g.from).pow(p))
            .sum();
        (i128::from(total_balls).pow(p) - lost) as f64
    };
    (3.0 * fit.a * power_sum(4) + 4.0 * fit.b * power_sum(3) + 6.0 * fit.c * power_sum(2)) / 12.0
}

/// Balls lost to one stoppage: play halts after ball `from` and resumes at
/// ball index `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub from: u32,
    pub to: u32,
}

fn validate_gaps(gaps: &[Gap], total_balls: u32) -> Result<()> {
    if total_balls == 0 {
        return Err(Error::scenario("N", "scheduled balls must be positive"));
    }
    let mut floor = 0;
    for g in gaps {
        if g.from < floor {
            return Err(Error::scenario(
                "n",
                format!("stoppage at {} precedes ball {floor}", g.from),
            ));
        }
        if g.to < g.from {
            return Err(Error::scenario(
                "m",
                format!("restart {} before stoppage {}", g.to, g.from),
            ));
        }
        if g.to > total_balls {
            return Err(Error::scenario(
                "m",
                format!("restart {} beyond scheduled balls {total_balls}", g.to),
            ));
        }
        floor = g.to;
    }
    Ok(())
}

/// Area under `f` over `[0, N]` minus every lost interval.
///
/// With one gap `(n, m)` this is
/// `[3a(n⁴+N⁴−m⁴) + 4b(n³+N³−m³) + 6c(n²+N²−m²)] / 12`; the power sums are
/// formed in exact integer arithmetic.
pub fn area_excluding(fit: &PolyFit, gaps: &[Gap], total_balls: u32) -> Result<f64> {
    validate_gaps(gaps, total_balls)?;
    Ok(power_sum_area(fit, total_balls, gaps))
}

pub fn area_interrupted(fit: &PolyFit, n: u32, m: u32, total_balls: u32) -> Result<f64> {
    area_excluding(fit, &[Gap { from: n, to: m }], total_balls)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterruptionScenario {
    /// Balls bowled before the stoppage.
    pub n: u32,
    /// Ball index at which play resumes.
    pub m: u32,
    /// Scheduled balls in the innings.
    pub total_balls: u32,
    pub target_score: u32,
    pub current_score: u32,
    pub wickets_at_stoppage: u32,
    /// Further stoppages after `m`, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub later_gaps: Vec<Gap>,
}

impl InterruptionScenario {
    pub fn new(
        n: u32,
        m: u32,
        total_balls: u32,
        target_score: u32,
        current_score: u32,
        wickets_at_stoppage: u32,
    ) -> Result<Self> {
        let s = InterruptionScenario {
            n,
            m,
            total_balls,
            target_score,
            current_score,
            wickets_at_stoppage,
            later_gaps: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn gaps(&self) -> Vec<Gap> {
        std::iter::once(Gap {
            from: self.n,
            to: self.m,
        })
        .chain(self.later_gaps.iter().copied())
        .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_score == 0 {
            return Err(Error::scenario("target_score", "must be positive"));
        }
        if self.current_score >= self.target_score {
            return Err(Error::scenario(
                "current_score",
                format!(
                    "{} already reaches target {}",
                    self.current_score, self.target_score
                ),
            ));
        }
        if self.wickets_at_stoppage > MAX_WICKETS {
            return Err(Error::scenario(
                "wickets",
                format!("{} > {MAX_WICKETS}", self.wickets_at_stoppage),
            ));
        }
        validate_gaps(&self.gaps(), self.total_balls)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevisedTarget {
    pub ratio: f64,
    /// `ratio * (target - current)`.
    pub runs_remaining: f64,
    /// `floor(current + runs_remaining)`.
    pub revised_total: i64,
}

impl RevisedTarget {
    /// One more than the revised total.
    pub fn to_win(&self) -> i64 {
        self.revised_total + 1
    }
}

pub fn ratio_excluding(fit: &PolyFit, gaps: &[Gap], total_balls: u32) -> Result<f64> {
    let full = area_full(fit, total_balls);
    if !(full > 0.0) {
        return Err(Error::DegenerateCurve(format!(
            "full-innings area {full} is not positive"
        )));
    }
    Ok(area_excluding(fit, gaps, total_balls)? / full)
}

pub fn resource_ratio(fit: &PolyFit, scenario: &InterruptionScenario) -> Result<f64> {
    scenario.validate()?;
    ratio_excluding(fit, &scenario.gaps(), scenario.total_balls)
}

pub fn revise_target(fit: &PolyFit, scenario: &InterruptionScenario) -> Result<RevisedTarget> {
    let ratio = resource_ratio(fit, scenario)?;
    let needed = f64::from(scenario.target_score - scenario.current_score);
    let runs_remaining = ratio * needed;
    let revised_total = (f64::from(scenario.current_score) + runs_remaining).floor() as i64;
    Ok(RevisedTarget {
        ratio,
        runs_remaining,
        revised_total,
    })
}
