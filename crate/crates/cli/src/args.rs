use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pronscore::evaluation::Direction;
use pronscore::{CalibrationConfig, PartialBand, WordAggregation};

#[derive(Debug, Parser)]
#[command(
    name = "pronscore",
    version,
    about = "Calibrated mispronunciation scoring on CTC logits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force-align a target transcript and print the alignment as JSON.
    Align {
        #[arg(long)]
        logits: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Score one attempt and print per-character and per-word verdicts.
    Score {
        #[arg(long)]
        logits: PathBuf,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        calibration: CalibrationArgs,
    },
    /// Precision, recall and F1 over a JSON-lines manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Report one level only; both by default.
        #[arg(long, value_parser = parse_level)]
        level: Option<pronscore::evaluation::Level>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        calibration: CalibrationArgs,
    },
    /// Evaluate a manifest at several temperatures.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long = "T-list", value_delimiter = ',', required = true)]
        temperatures: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        calibration: CalibrationArgs,
    },
    /// One-sided one-sample proportion z-test.
    Ztest {
        #[arg(long)]
        detected: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p0: f64,
        #[arg(long, value_parser = parse_direction)]
        direction: Direction,
    },
    /// Manifest preparation.
    #[command(subcommand)]
    Prep(PrepCommand),
    /// Run the HTTP scoring service.
    Serve(ServeArgs),
    /// Re-run the reference examples and shipped fixtures.
    Selfcheck,
}

#[derive(Debug, Subcommand)]
pub enum PrepCommand {
    /// Keep utterances inside a duration window.
    Filter {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        min_dur: f64,
        #[arg(long, default_value_t = 25.0)]
        max_dur: f64,
        /// Keep entries marked as overlapping speech.
        #[arg(long)]
        keep_overlap: bool,
        /// Output manifest; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Speaker-disjoint train/dev split.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.82)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        dev_out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    File,
    Remote,
}

#[derive(Debug, Args)]
pub struct CalibrationArgs {
    /// Temperature; 0 disables calibration.
    #[arg(long = "T", visible_alias = "temperature", default_value_t = 10.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Partial-credit band as `lo,hi`, or `none`.
    #[arg(long, default_value = "0.5,0.75", value_parser = parse_band)]
    pub partial: Band,
    #[arg(long, value_enum, default_value_t = WordAgg::Min)]
    pub word_agg: WordAgg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band(pub Option<PartialBand>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WordAgg {
    Min,
    Mean,
}

impl CalibrationArgs {
    pub fn config(&self) -> CalibrationConfig {
        CalibrationConfig {
            temperature: self.temperature,
            k: self.k,
            theta: self.theta,
            partial: self.partial.0,
        }
    }

    pub fn aggregation(&self) -> WordAggregation {
        match self.word_agg {
            WordAgg::Min => WordAggregation::Min,
            WordAgg::Mean => WordAggregation::Mean,
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PRONSCORE_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[arg(long, env = "PRONSCORE_BACKEND", value_enum, default_value_t = BackendKind::File)]
    pub backend: BackendKind,
    /// Directory of `<id>.ctcl` files for the file backend.
    #[arg(long, env = "PRONSCORE_LOGITS_DIR", default_value = "fixtures")]
    pub logits_dir: PathBuf,
    #[arg(long, env = "PRONSCORE_REMOTE_URL")]
    pub remote_url: Option<String>,
    /// Remote backend timeout in seconds.
    #[arg(long, env = "PRONSCORE_REMOTE_TIMEOUT", default_value_t = 10.0)]
    pub remote_timeout: f64,
    /// Vocabulary JSON `{"labels": [...], "blank_index": n}`; built-in Swedish alphabet when omitted.
    #[arg(long, env = "PRONSCORE_VOCAB")]
    pub vocab: Option<PathBuf>,
    /// Phrase list JSON; the built-in practice set when omitted.
    #[arg(long, env = "PRONSCORE_PHRASES")]
    pub phrases: Option<PathBuf>,
    #[arg(long = "T", env = "PRONSCORE_T", default_value_t = 10.0)]
    pub temperature: f64,
    #[arg(long, env = "PRONSCORE_K", default_value_t = 3)]
    pub k: usize,
    #[arg(long, env = "PRONSCORE_THETA", default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, env = "PRONSCORE_PARTIAL", default_value = "0.5,0.75", value_parser = parse_band)]
    pub partial: Band,
}

fn parse_band(s: &str) -> Result<Band, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Band(None));
    }
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi or none")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Band(Some(PartialBand { lo, hi })))
}

fn parse_level(s: &str) -> Result<pronscore::evaluation::Level, String> {
    s.parse()
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
}
