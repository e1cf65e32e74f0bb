//! The `rainrule` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ball_log::{load_corpus, load_sources, write_ball_log, Corpus, MatchFormat};
use crate::dl_reference::{fit_dl_family, resource_table, ResourceTable};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::run_curves::{curve_csv, fit_poly, wicket_curve, Degree, PolyFitSummary};
use crate::score_stats::{
    build_histogram, default_bin_width, fit_normal, histogram_csv, totals, NormalFitSummary,
};
use crate::target_engine::{revise_target, Gap, InterruptionScenario, RevisedTarget};

#[derive(Debug, Parser)]
#[command(name = "rainrule", version, about = "Fit scoring curves from ball-by-ball data and revise targets for interrupted limited-overs matches")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Directory of Cricsheet JSON or CSV ball-log files
    #[arg(long, global = true, env = "RAINRULE_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    /// Use the bundled fixture matches instead of --data-dir
    #[arg(long, global = true)]
    pub fixture: bool,
    /// Restrict to one format: odi, t20i or ipl
    #[arg(long, global = true)]
    pub format: Option<MatchFormat>,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub innings: u8,
    /// Histogram bin width in runs [default: 20 for ODI, 10 otherwise]
    #[arg(long, global = true)]
    pub bin_width: Option<f64>,
    /// Minimum innings behind each averaged point
    #[arg(long, global = true, default_value_t = crate::run_curves::DEFAULT_MIN_SUPPORT)]
    pub min_support: usize,
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub degree: u8,
    /// Only matches whose first day is on or before this date (YYYY-MM-DD)
    #[arg(long, global = true)]
    pub until: Option<NaiveDate>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

impl clap::builder::ValueParserFactory for MatchFormat {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<MatchFormat>())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the corpus and report match counts
    Ingest {
        /// Also write every delivery to this CSV ball log
        #[arg(long)]
        ball_log: Option<PathBuf>,
    },
    /// Histograms of innings totals with fitted normal curves
    Stats,
    /// Wicket-conditioned scoring curves, polynomial fits and the exponential baseline
    Curves {
        /// Fit with unit weights instead of per-point innings counts
        #[arg(long)]
        unweighted: bool,
    },
    /// Revise a target from a scenario file and curve fits
    Target {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Area-ratio target alongside the exponential baseline's resources
    Compare {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        fits: Option<PathBuf>,
        #[arg(long)]
        dl_table: Option<PathBuf>,
    },
}

/// Scenario input file.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format: Option<MatchFormat>,
    pub innings: Option<u8>,
    pub wickets: u32,
    pub n: u32,
    pub m: u32,
    #[serde(rename = "N")]
    pub total_balls: Option<u32>,
    pub target_score: u32,
    pub current_score: u32,
    #[serde(default)]
    pub later_interruptions: Vec<(u32, u32)>,
}

impl ScenarioFile {
    pub fn scenario(&self) -> Result<InterruptionScenario> {
        let total_balls = match (self.total_balls, self.format) {
            (Some(n), _) => n,
            (None, Some(f)) => f.scheduled_balls(),
            (None, None) => return Err(Error::scenario("N", "missing, and no format to infer it from")),
        };
        let s = InterruptionScenario {
            n: self.n,
            m: self.m,
            total_balls,
            target_score: self.target_score,
            current_score: self.current_score,
            wickets_at_stoppage: self.wickets,
            later_gaps: self
                .later_interruptions
                .iter()
                .map(|&(from, to)| Gap { from, to })
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetOutput {
    pub ratio: f64,
    pub runs_remaining: f64,
    pub revised_total: i64,
    pub to_win: i64,
}

impl From<RevisedTarget> for TargetOutput {
    fn from(r: RevisedTarget) -> Self {
        TargetOutput {
            ratio: r.ratio,
            runs_remaining: r.runs_remaining,
            revised_total: r.revised_total,
            to_win: r.to_win(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlComparison {
    pub wickets: u32,
    pub overs_remaining_at_stoppage: u32,
    pub overs_remaining_at_restart: u32,
    pub resource_at_stoppage: f64,
    pub resource_at_restart: f64,
    pub resource_lost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub area_ratio: TargetOutput,
    pub dl: Option<DlComparison>,
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Ingest { ball_log } => cmd_ingest(cfg, ball_log.as_deref()),
        Command::Stats => cmd_stats(cfg),
        Command::Curves { unweighted } => cmd_curves(cfg, !unweighted),
        Command::Target { scenario, fits } => {
            let (scenario, fits) = scenario_inputs(cfg, scenario.as_deref(), fits.as_deref())?;
            let out = cmd_target(&scenario, &fits)?;
            println!("{}", to_json(&out));
            Ok(())
        }
        Command::Compare {
            scenario,
            fits,
            dl_table,
        } => {
            let (scenario, fits) = scenario_inputs(cfg, scenario.as_deref(), fits.as_deref())?;
            let table = match dl_table {
                Some(path) => Some(ResourceTable::from_csv(&read_text(path)?)?),
                None => {
                    eprintln!("warning: no --dl-table given; exponential baseline omitted");
                    None
                }
            };
            let out = cmd_compare(&scenario, &fits, table.as_ref())?;
            println!("{}", to_json(&out));
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn load(cfg: &RunConfig) -> Result<Corpus> {
    let mut corpus = if cfg.fixture {
        load_sources(fixtures::match_files(), cfg.format)
    } else {
        let dir = cfg.data_dir.as_deref().ok_or_else(|| {
            Error::EmptySelection("no --data-dir (or RAINRULE_DATA_DIR) and no --fixture".into())
        })?;
        load_corpus(dir, cfg.format)?
    };
    if let Some(day) = cfg.until {
        corpus = corpus.until(day);
    }
    for d in &corpus.diagnostics {
        eprintln!("diagnostic: {}: {}", d.source, d.message);
    }
    if corpus.matches.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no matches loaded ({} files failed)",
            corpus.diagnostics.len()
        )));
    }
    Ok(corpus)
}

fn formats(cfg: &RunConfig) -> Vec<MatchFormat> {
    match cfg.format {
        Some(f) => vec![f],
        None => MatchFormat::ALL.to_vec(),
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

pub fn cmd_ingest(cfg: &RunConfig, ball_log: Option<&Path>) -> Result<()> {
    let corpus = load(cfg)?;
    for f in MatchFormat::ALL {
        println!("{:<5} {}", f.name(), corpus.count(f));
    }
    println!("diagnostics {}", corpus.diagnostics.len());
    println!("dropped_deliveries {}", corpus.dropped_deliveries);
    if let Some(path) = ball_log {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_ball_log(&corpus.matches, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<()> {
    let corpus = load(cfg)?;
    let out = prepare_out(cfg)?;
    let mut table = String::from("format,innings,xi,sigma,amplitude,n_samples\n");
    let mut fitted = 0;
    println!("{:<5} {:>7} {:>10} {:>10} {:>10} {:>6}", "fmt", "innings", "xi", "sigma", "A", "n");
    for format in formats(cfg) {
        for innings in 1..=2u8 {
            let width = cfg.bin_width.unwrap_or_else(|| default_bin_width(format));
            let stem = format!("{}_inn{innings}", format.slug());
            let cell = totals(&corpus.matches, format, innings)
                .and_then(|t| build_histogram(&t, width))
                .and_then(|h| fit_normal(&h).map(|f| (h, f)));
            match cell {
                Ok((hist, fit)) => {
                    fitted += 1;
                    write_file(&out.join(format!("hist_{stem}.csv")), &histogram_csv(&hist, Some(&fit)))?;
                    let summary = NormalFitSummary::new(&hist, &fit);
                    write_file(&out.join(format!("normal_{stem}.json")), &to_json(&summary))?;
                    let _ = writeln!(
                        table,
                        "{},{innings},{},{},{},{}",
                        format.name(),
                        fit.xi,
                        fit.sigma,
                        fit.amplitude,
                        hist.n_samples
                    );
                    println!(
                        "{:<5} {:>7} {:>10.3} {:>10.4} {:>10.3} {:>6}",
                        format.name(),
                        innings,
                        fit.xi,
                        fit.sigma,
                        fit.amplitude,
                        hist.n_samples
                    );
                }
                Err(e) => {
                    eprintln!("warning: {} innings {innings}: {e}", format.name());
                    println!("{:<5} {:>7} {:>10} {:>10} {:>10} {:>6}", format.name(), innings, "-", "-", "-", "-");
                }
            }
        }
    }
    write_file(&out.join("normal_table.csv"), &table)?;
    if fitted == 0 {
        return Err(Error::InsufficientData("no (format, innings) cell could be fitted".into()));
    }
    Ok(())
}

pub fn cmd_curves(cfg: &RunConfig, weighted: bool) -> Result<()> {
    let corpus = load(cfg)?;
    let out = prepare_out(cfg)?;
    let degree = Degree::try_from(cfg.degree)?;
    let innings = cfg.innings;
    let mut fitted = 0;
    for format in formats(cfg) {
        if corpus.count(format) == 0 {
            continue;
        }
        let mut summaries = Vec::new();
        for w in 0..10 {
            let stem = format!("{}_inn{innings}_w{w}", format.slug());
            let result = wicket_curve(&corpus.matches, format, innings, w, cfg.min_support)
                .and_then(|c| fit_poly(&c, degree, weighted).map(|f| (c, f)));
            match result {
                Ok((curve, fit)) => {
                    fitted += 1;
                    write_file(&out.join(format!("curve_{stem}.csv")), &curve_csv(&curve, Some(&fit)))?;
                    let summary = PolyFitSummary::new(&curve, &fit);
                    write_file(&out.join(format!("fit_{stem}.json")), &to_json(&summary))?;
                    summaries.push(summary);
                }
                Err(e) => eprintln!("warning: {} innings {innings}, {w} wickets: {e}", format.name()),
            }
        }
        if !summaries.is_empty() {
            let path = out.join(format!("fits_{}_inn{innings}.json", format.slug()));
            write_file(&path, &to_json(&summaries))?;
            println!("{}: {} curve fits -> {}", format.name(), summaries.len(), path.display());
        }

        match fit_dl_family(&corpus.matches, format, cfg.min_support) {
            Ok(family) => {
                for d in &family.diagnostics {
                    eprintln!("warning: {} exponential baseline: {d}", format.name());
                }
                write_file(&out.join(format!("dl_family_{}.json", format.slug())), &to_json(&family))?;
                match resource_table(&family.curves, format.max_overs()) {
                    Ok(table) => {
                        let path = out.join(format!("dl_table_{}.csv", format.slug()));
                        write_file(&path, &table.to_csv())?;
                        println!("{}: resource table -> {}", format.name(), path.display());
                    }
                    Err(e) => eprintln!("warning: {} resource table: {e}", format.name()),
                }
            }
            Err(e) => eprintln!("warning: {} exponential baseline: {e}", format.name()),
        }
    }
    if fitted == 0 {
        return Err(Error::EmptyCurve("no wicket curve could be fitted".into()));
    }
    Ok(())
}

fn scenario_inputs(
    cfg: &RunConfig,
    scenario: Option<&Path>,
    fits: Option<&Path>,
) -> Result<(ScenarioFile, Vec<PolyFitSummary>)> {
    let scenario_text = match (scenario, cfg.fixture) {
        (Some(p), _) => read_text(p)?,
        (None, true) => fixtures::WORKED_SCENARIO.to_string(),
        (None, false) => return Err(Error::scenario("scenario", "--scenario is required")),
    };
    let fits_text = match (fits, cfg.fixture) {
        (Some(p), _) => read_text(p)?,
        (None, true) => fixtures::WORKED_FITS.to_string(),
        (None, false) => return Err(Error::DegenerateCurve("--fits is required".into())),
    };
    let scenario: ScenarioFile = serde_json::from_str(&scenario_text)
        .map_err(|e| Error::scenario("scenario", e.to_string()))?;
    Ok((scenario, parse_fits(&fits_text)?))
}

/// A fits file holds one summary object or an array of them.
pub fn parse_fits(text: &str) -> Result<Vec<PolyFitSummary>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<PolyFitSummary>),
        One(PolyFitSummary),
    }
    let parsed: OneOrMany = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: Some(e.column()),
        message: format!("fits file: {e}"),
    })?;
    Ok(match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(s) => vec![s],
    })
}

fn select_fit<'a>(scenario: &ScenarioFile, fits: &'a [PolyFitSummary]) -> Result<&'a PolyFitSummary> {
    fits.iter()
        .find(|f| f.wickets == scenario.wickets && scenario.format.is_none_or(|fmt| fmt == f.format))
        .ok_or_else(|| {
            Error::DegenerateCurve(format!(
                "no fit for {} wickets{}",
                scenario.wickets,
                scenario.format.map(|f| format!(" in {f}")).unwrap_or_default()
            ))
        })
}

pub fn cmd_target(scenario: &ScenarioFile, fits: &[PolyFitSummary]) -> Result<TargetOutput> {
    let s = scenario.scenario()?;
    let fit = select_fit(scenario, fits)?;
    let revised = revise_target(&fit.fit(), &s)?;
    if revised.ratio <= 0.0 {
        println!("{}", to_json(&TargetOutput::from(revised)));
        return Err(Error::scenario("m", "no balls remain: nothing to chase"));
    }
    Ok(revised.into())
}

pub fn cmd_compare(
    scenario: &ScenarioFile,
    fits: &[PolyFitSummary],
    table: Option<&ResourceTable>,
) -> Result<CompareOutput> {
    let area_ratio = cmd_target(scenario, fits)?;
    let s = scenario.scenario()?;
    let dl = match table {
        Some(t) => {
            let at_stop = (s.total_balls - s.n) / 6;
            let at_restart = (s.total_balls - s.m) / 6;
            let w = s.wickets_at_stoppage;
            match (t.percentage(at_stop, w), t.percentage(at_restart, w)) {
                (Some(p1), Some(p2)) => Some(DlComparison {
                    wickets: w,
                    overs_remaining_at_stoppage: at_stop,
                    overs_remaining_at_restart: at_restart,
                    resource_at_stoppage: p1,
                    resource_at_restart: p2,
                    resource_lost: p1 - p2,
                }),
                _ => {
                    eprintln!(
                        "warning: resource table covers {} overs; scenario needs {at_stop}",
                        t.max_overs
                    );
                    None
                }
            }
        }
        None => None,
    };
    Ok(CompareOutput { area_ratio, dl })
}
