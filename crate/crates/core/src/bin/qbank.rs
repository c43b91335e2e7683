use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use qbank::bow::Vocabulary;
use qbank::harness::{self, emit_report, ProfileChoice, ReportFormat};
use qbank::metrics::{calibrate_profiles, Objective, ThresholdProfile};
use qbank::model::content_id;
use qbank::providers::{store_embeddings, EmbeddingProvider, Translator};
use qbank::service::config::{build_translator, ProviderSpec, ServiceConfig, ENV_DATA_DIR};
use qbank::service::{http, BankStore};
use qbank::simeng::pairwise_scores;
use qbank::sts::{distribution, parse_dataset, Format, GroupBy, StsDataset};
use qbank::{Lang, OrdinalScore, Question};

#[derive(Parser)]
#[command(name = "qbank", version, about = "Redundant survey-question detection")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bank directory (overrides the config file).
    #[arg(long, global = true, env = ENV_DATA_DIR)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an STS file and register its questions in the bank.
    Ingest {
        dataset: PathBuf,
        #[arg(long)]
        provider: Option<String>,
        /// Only validate and summarize.
        #[arg(long)]
        dry_run: bool,
    },
    /// Build a bag-of-words vocabulary from a dataset.
    BuildVocab {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "vocab.txt")]
        out: PathBuf,
        /// Translator for Korean text (`fixture`, `fixture:<tsv>`, URL).
        #[arg(long, default_value = "fixture")]
        translator: String,
    },
    /// Embed every question of a dataset into an EMB1 store.
    Embed {
        #[arg(long)]
        provider: String,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "embeddings.emb1")]
        out: PathBuf,
    },
    /// Fit per-domain cutoffs on a dataset.
    Calibrate {
        #[arg(long, default_value = "youden-j")]
        objective: Objective,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        provider: String,
        #[arg(long)]
        translator: Option<String>,
        /// Write the selected profile here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a provider on a dataset.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// `bow` builds a vocabulary from the dataset itself.
        #[arg(long)]
        provider: String,
        #[arg(long)]
        translator: Option<String>,
        /// Fixed profile JSON; otherwise cutoffs are calibrated in-sample.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "youden-j")]
        objective: Objective,
        /// Only cross-lingual pairs.
        #[arg(long)]
        cross_lingual: bool,
        /// `.json` or `.csv`; stdout JSON when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        addr: Option<String>,
        #[arg(long)]
        provider: Option<String>,
    },
    /// Find the bank questions most similar to a text.
    Query {
        #[arg(long)]
        text: String,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
        #[arg(long, default_value = "en")]
        lang: Lang,
        #[arg(long)]
        provider: Option<String>,
        /// Ask a running server instead of opening the bank directly.
        #[arg(long)]
        server: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

fn translator(spec: Option<&str>, provider: &str) -> qbank::Result<Option<Arc<dyn Translator>>> {
    match spec {
        Some(s) => build_translator(s).map(Some),
        None if provider.starts_with("bow") => build_translator("fixture").map(Some),
        None => Ok(None),
    }
}

/// Like [`ProviderSpec::build`], but a bare `bow` builds its vocabulary from
/// `dataset`.
fn provider_for(
    spec: &str,
    config: &ServiceConfig,
    dataset: Option<&StsDataset>,
    tr: Option<&dyn Translator>,
) -> qbank::Result<Arc<dyn EmbeddingProvider>> {
    match (spec, dataset) {
        ("bow" | "bow:auto", Some(ds)) => Ok(Arc::new(harness::bow_provider_for(ds, tr)?)),
        _ => spec.parse::<ProviderSpec>()?.build(config),
    }
}

fn open_bank(config: &ServiceConfig, provider: Option<&str>) -> qbank::Result<BankStore> {
    let spec = provider.unwrap_or(&config.provider);
    let p = provider_for(spec, config, None, None)?;
    Ok(BankStore::open(&config.data_dir, p, ThresholdProfile::fixed(config.global_cutoff))?
        .with_latency_budget(config.latency_budget()))
}

fn load(path: &Path) -> qbank::Result<StsDataset> {
    parse_dataset(path, Format::from_path(path))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> qbank::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(qbank::Error::Config(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> qbank::Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn run(cli: Cli) -> qbank::Result<()> {
    let mut config = ServiceConfig::load(cli.config.as_deref())?;
    if let Some(d) = cli.data_dir {
        config.data_dir = d;
    }
    match cli.command {
        Command::Ingest { dataset, provider, dry_run } => {
            let ds = load(&dataset)?;
            let dist = distribution(&ds, GroupBy::NONE);
            let all = dist.all();
            let pct: BTreeMap<u8, f64> = OrdinalScore::ALL.iter().map(|&s| (s.get(), all.percent_rounded(s))).collect();
            eprintln!("{} pairs, {} questions, score % {pct:?}", ds.len(), ds.questions().len());
            if dry_run {
                return Ok(());
            }
            let bank = open_bank(&config, provider.as_deref())?;
            let questions: Vec<Question> = ds.questions().into_iter().cloned().collect();
            let out = bank.register_batch(questions)?;
            let created = out.iter().filter(|r| r.created).count();
            eprintln!("registered {created} new questions; bank size {}", bank.health().bank_size);
        }
        Command::BuildVocab { dataset, out, translator } => {
            let ds = load(&dataset)?;
            let tr = build_translator(&translator)?;
            let vocab: Vocabulary = qbank::bow::build_vocabulary(&harness::english_corpus(&ds, Some(tr.as_ref()))?)?;
            vocab.save(&out)?;
            eprintln!("{} terms, version {}", vocab.dim(), vocab.version());
        }
        Command::Embed { provider, dataset, out } => {
            let ds = load(&dataset)?;
            let p = provider_for(&provider, &config, Some(&ds), None)?;
            let mut map = BTreeMap::new();
            for lang in Lang::ALL {
                let texts: Vec<&str> = ds.questions().iter().filter(|q| q.lang == lang).map(|q| q.text.as_str()).collect();
                if texts.is_empty() {
                    continue;
                }
                for (t, e) in texts.iter().zip(p.embed(&texts, lang)?) {
                    map.insert(content_id(t, lang), e);
                }
            }
            store_embeddings(&out, &map)?;
            eprintln!("{} vectors of dim {} from {}", map.len(), p.descriptor().dim, p.descriptor().provider_id);
        }
        Command::Calibrate { objective, dataset, provider, translator: tspec, out } => {
            let ds = load(&dataset)?;
            let tr = translator(tspec.as_deref(), &provider)?;
            let p = provider_for(&provider, &config, Some(&ds), tr.as_deref())?;
            let texts: Vec<_> = ds.pairs().iter().map(|q| (q.a.text.as_str(), q.a.lang, q.b.text.as_str(), q.b.lang)).collect();
            let scores = pairwise_scores(&texts, p.as_ref(), tr.as_deref())?;
            let samples: Vec<_> = ds.pairs().iter().zip(&scores).map(|(q, s)| (q.domain(), s.get(), q.label())).collect();
            let cal = calibrate_profiles(&samples, objective, &ds.content_hash())?;
            for w in &cal.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(out) = out {
                cal.profile().save(&out)?;
            }
            print_json(&cal)?;
        }
        Command::Evaluate { dataset, provider, translator: tspec, profile, objective, cross_lingual, out } => {
            let ds = load(&dataset)?;
            let tr = translator(tspec.as_deref(), &provider)?;
            let p = provider_for(&provider, &config, Some(&ds), tr.as_deref())?;
            let choice = match profile {
                Some(path) => ProfileChoice::Fixed(ThresholdProfile::load(&path)?),
                None => ProfileChoice::Auto(objective),
            };
            let report = if cross_lingual {
                harness::cross_lingual_evaluate(&ds, p.as_ref(), tr.as_deref(), &choice)?
            } else {
                harness::evaluate(&ds, p.as_ref(), tr.as_deref(), &choice)?
            };
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match out {
                Some(path) => emit_report(&report, ReportFormat::from_path(&path), &path)?,
                None => emit(&report.to_json()?)?,
            }
        }
        Command::Serve { addr, provider } => {
            let bank = Arc::new(open_bank(&config, provider.as_deref())?);
            let r = bank.recovery();
            if !r.is_clean() {
                eprintln!("recovered bank: kept {}, dropped {} questions / {} vectors", r.kept, r.dropped_questions, r.dropped_embeddings);
            }
            let addr = addr.unwrap_or_else(|| config.addr.clone());
            let rt = tokio::runtime::Runtime::new().map_err(|e| qbank::Error::Config(e.to_string()))?;
            rt.block_on(http::serve(bank, &addr, config.default_k))?;
        }
        Command::Query { text, k, lang, provider, server } => {
            let k = k.unwrap_or(config.default_k as i64);
            match server {
                Some(url) => {
                    let req = http::SimilarRequest { text, lang, k: Some(k), provider: None };
                    let resp: serde_json::Value = ureq::post(&format!("{}/v1/similar", url.trim_end_matches('/')))
                        .config()
                        .http_status_as_error(false)
                        .build()
                        .send_json(&req)
                        .and_then(|mut r| r.body_mut().read_json())
                        .map_err(|e| qbank::Error::ProviderUnreachable(e.to_string()))?;
                    print_json(&resp)?;
                }
                None => print_json(&open_bank(&config, provider.as_deref())?.query_similar(&text, lang, k)?)?,
            }
        }
    }
    Ok(())
}
