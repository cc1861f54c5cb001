use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use pronscore::ctcl::CtclContainer;
use pronscore::dataprep::{
    filter_manifest, read_manifest, speaker_split, write_manifest, ManifestEntry,
};
use pronscore::evaluation::{evaluate_corpus, proportion_ztest, sweep_temperature, MetricReport};
use pronscore::{demo, forced_align_text, score_transcript_with, CalibrationConfig, Vocabulary};
use pronscore_service::{default_phrases, load_phrases, Backend, ServiceConfig};
use serde::Serialize;

use crate::args::{BackendKind, Cli, Command, Format, PrepCommand, ServeArgs};
use crate::{corpus, selfcheck};

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Align { logits, target } => {
            let c =
                CtclContainer::read_file(&logits).with_context(|| logits.display().to_string())?;
            print_json(&forced_align_text(&c.logits, &target, &c.vocab)?)?;
        }
        Command::Score {
            logits,
            target,
            calibration,
        } => {
            let c =
                CtclContainer::read_file(&logits).with_context(|| logits.display().to_string())?;
            let scored = score_transcript_with(
                &c.logits,
                &target,
                &c.vocab,
                &calibration.config(),
                calibration.aggregation(),
            )?;
            print_json(&scored)?;
        }
        Command::Eval {
            manifest,
            level,
            format,
            calibration,
        } => {
            let items = corpus::load(&manifest)?;
            let config = calibration.config();
            let report = evaluate_corpus(&items, &config, calibration.aggregation())?;
            let reports: Vec<&MetricReport> = match level {
                Some(l) => vec![report.level(l)],
                None => vec![&report.character, &report.word],
            };
            match (format, level) {
                (Format::Json, Some(_)) => print_json(reports[0])?,
                (Format::Json, None) => print_json(&report)?,
                (Format::Table, _) => print!("{}", metric_table(config.temperature, &reports)),
                (Format::Csv, _) => print!(
                    "level,T,precision,recall,f1\n{}",
                    metric_csv(config.temperature, &reports)
                ),
            }
        }
        Command::Sweep {
            manifest,
            temperatures,
            format,
            calibration,
        } => {
            let items = corpus::load(&manifest)?;
            let points = sweep_temperature(
                &items,
                &temperatures,
                &calibration.config(),
                calibration.aggregation(),
            )?;
            match format {
                Format::Json => print_json(&points)?,
                Format::Table => points.iter().for_each(|p| {
                    print!("{}", metric_table(p.temperature, &[&p.character, &p.word]))
                }),
                Format::Csv => {
                    println!("level,T,precision,recall,f1");
                    points.iter().for_each(|p| {
                        print!("{}", metric_csv(p.temperature, &[&p.character, &p.word]))
                    });
                }
            }
        }
        Command::Ztest {
            detected,
            n,
            p0,
            direction,
        } => {
            print_json(&proportion_ztest(detected, n, p0, direction)?)?;
        }
        Command::Prep(cmd) => prep(cmd)?,
        Command::Serve(args) => serve(args)?,
        Command::Selfcheck => {
            let report = selfcheck::run();
            for check in &report.checks {
                eprintln!(
                    "{} {}: {}",
                    if check.pass { "ok  " } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            print_json(&report)?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn metric_table(temperature: f64, reports: &[&MetricReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{:<10} T={:<6} precision {:>6.1}%  recall {:>6.1}%  F1 {:>6.1}%  (TR {} FA {} FR {} TA {})\n",
            r.level,
            temperature,
            100.0 * r.precision,
            100.0 * r.recall,
            100.0 * r.f1,
            r.counts.true_rejections,
            r.counts.false_acceptances,
            r.counts.false_rejections,
            r.counts.true_acceptances,
        ));
    }
    s
}

fn metric_csv(temperature: f64, reports: &[&MetricReport]) -> String {
    reports
        .iter()
        .map(|r| {
            format!(
                "{},{},{:.6},{:.6},{:.6}\n",
                r.level, temperature, r.precision, r.recall, r.f1
            )
        })
        .collect()
}

fn prep(cmd: PrepCommand) -> Result<()> {
    match cmd {
        PrepCommand::Filter {
            manifest,
            min_dur,
            max_dur,
            keep_overlap,
            output,
        } => {
            let entries = read_manifest(&manifest)?;
            let kept = filter_manifest(&entries, min_dur, max_dur, !keep_overlap)?;
            eprintln!("kept {} of {} utterances", kept.len(), entries.len());
            match output {
                Some(path) => write_to(&path, &kept)?,
                None => write_manifest(io::stdout().lock(), &kept)?,
            }
        }
        PrepCommand::Split {
            manifest,
            train_fraction,
            seed,
            train_out,
            dev_out,
        } => {
            let entries = read_manifest(&manifest)?;
            let (train, dev) = speaker_split(&entries, train_fraction, seed)?;
            write_to(&train_out, &train)?;
            write_to(&dev_out, &dev)?;
            print_json(&serde_json::json!({
                "train": summary(&train),
                "dev": summary(&dev),
            }))?;
        }
    }
    Ok(())
}

fn summary(entries: &[ManifestEntry]) -> serde_json::Value {
    let speakers: std::collections::BTreeSet<_> = entries
        .iter()
        .filter_map(|e| e.speaker_id.as_deref())
        .collect();
    serde_json::json!({"utterances": entries.len(), "speakers": speakers.len()})
}

fn write_to(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_manifest(&mut out, entries)?;
    out.flush()?;
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let vocab = match &args.vocab {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
            serde_json::from_str::<Vocabulary>(&text).with_context(|| path.display().to_string())?
        }
        None => demo::vocabulary(),
    };
    let backend = match args.backend {
        BackendKind::File => Backend::File {
            dir: args.logits_dir.clone(),
        },
        BackendKind::Remote => {
            let Some(url) = args.remote_url.clone() else {
                bail!("--remote-url is required with --backend remote");
            };
            if !(args.remote_timeout > 0.0 && args.remote_timeout.is_finite()) {
                bail!("--remote-timeout must be positive");
            }
            Backend::Remote {
                url,
                timeout: Duration::from_secs_f64(args.remote_timeout),
            }
        }
    };
    let phrases = match &args.phrases {
        Some(path) => load_phrases(path)?,
        None => default_phrases(),
    };
    let config = ServiceConfig {
        defaults: CalibrationConfig {
            temperature: args.temperature,
            k: args.k,
            theta: args.theta,
            partial: args.partial.0,
        },
        vocab,
        backend,
        phrases,
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(pronscore_service::serve(config, args.listen))?;
    Ok(())
}
