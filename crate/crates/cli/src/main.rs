//! `emosv`: command-line front end for the emotion-robust speaker
//! verification toolkit.
//!
//! On failure the first stderr line is a single JSON object
//! `{"error":"<kind>","message":"<detail>"}` and the process exits with
//! status 1; usage errors exit with status 2.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use emosv_core::augment::{plan_copy_paste, render_copy_paste, CorpusIndex, CpScheme};
use emosv_core::checkpoint::Checkpoint;
use emosv_core::config::ToolkitConfig;
use emosv_core::dsp::{mean_normalize, normalize_rms, rms_energy, LogMel};
use emosv_core::encoder::Embedding;
use emosv_core::eval::{attach_scores, build_trials, read_scores, read_trials, report_grid, write_scores, write_trials, Report};
use emosv_core::experiment::{embed_all, evaluate, score_trials, test_items};
use emosv_core::io::{write_atomic, write_wav};
use emosv_core::manifest::{Manifest, ManifestRow, Split};
use emosv_core::masking::{partition_zones, random_mask_plan, select_mask_centers, Dominance};
use emosv_core::synth::{synth_corpus, write_corpus};
use emosv_core::trainer::{train, Masking, Objective, PairScheme, TrainData};

#[derive(Parser, Debug)]
#[command(name = "emosv", version, about = "Emotion-robust speaker verification toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every random choice made by the subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract mean-normalized log-mel features for every manifest row.
    Features(ManifestArgs),
    /// Report energy zones and mask plans per utterance.
    MaskReport(MaskReportArgs),
    /// Render CopyPaste utterances from a manifest.
    Augment(AugmentArgs),
    /// Generate the synthetic emotional corpus.
    Synth,
    /// Train an encoder; writes per-epoch checkpoints and a loss log.
    Train(TrainArgs),
    /// Embed utterances with a trained checkpoint.
    Embed(EmbedArgs),
    /// Build the trial list of a test split.
    Trials(TrialsArgs),
    /// Cosine-score a trial list.
    Score(ScoreArgs),
    /// Report EERs per emotion bucket plus the merged EER.
    Eval(EvalArgs),
    /// Train and evaluate every configured ablation row.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Restrict to one split (train or test).
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Args, Debug)]
struct MaskReportArgs {
    #[command(flatten)]
    input: ManifestArgs,
    /// Masking strategy used for the reported plan (em or rm).
    #[arg(long, default_value = "em")]
    masking: Masking,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[command(flatten)]
    input: ManifestArgs,
    /// S-CP, D-CP or S+D-CP.
    #[arg(long)]
    scheme: CpScheme,
    /// Number of CopyPaste utterances to render (default: one per row).
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainOverrides {
    #[arg(long)]
    epochs: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    /// none, S-CP, D-CP or S+D-CP.
    #[arg(long)]
    scheme: Option<PairScheme>,
    /// aam or erl.
    #[arg(long, value_parser = parse_objective)]
    objective: Option<Objective>,
    /// none, em or rm.
    #[arg(long)]
    masking: Option<Masking>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Continue from this checkpoint.
    #[arg(long, conflicts_with = "init")]
    resume: Option<PathBuf>,
    /// Fine-tune: start a fresh run of the configuration from this checkpoint's parameters.
    #[arg(long)]
    init: Option<PathBuf>,
    #[command(flatten)]
    overrides: TrainOverrides,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    input: ManifestArgs,
}

#[derive(Args, Debug)]
struct TrialsArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Per-bucket cap; 0 keeps every pair.
    #[arg(long)]
    max_per_bucket: Option<usize>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    trials: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Trial list with labels and buckets.
    #[arg(long)]
    trials: PathBuf,
    /// Score files to pool (one or more).
    #[arg(long, required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct AblateArgs {
    /// Corpus manifest; the synthetic corpus is generated when absent.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Run only the named rows (comma-separated).
    #[arg(long, value_delimiter = ',')]
    rows: Vec<String>,
    /// Fine-tune every row from this checkpoint's parameters.
    #[arg(long)]
    init: Option<PathBuf>,
    #[command(flatten)]
    overrides: TrainOverrides,
}

fn parse_objective(s: &str) -> std::result::Result<Objective, String> {
    match s.to_ascii_lowercase().as_str() {
        "aam" => Ok(Objective::Aam),
        "erl" => Ok(Objective::Erl),
        other => Err(format!("unknown objective {other:?}; allowed: aam, erl")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<emosv_core::Error>())
                .map_or("runtime", emosv_core::Error::kind);
            let line = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{line}");
            eprintln!("emosv: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(common: &Common) -> Result<ToolkitConfig> {
    let mut cfg = match &common.config {
        Some(p) => ToolkitConfig::load(p)?,
        None => ToolkitConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.train.seed = seed;
        cfg.train.encoder.init_seed = seed;
        cfg.synth.seed = seed;
        cfg.trials.seed = seed;
    }
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ToolkitConfig, o: &TrainOverrides) -> Result<()> {
    let t = &mut cfg.train;
    macro_rules! set {
        ($src:expr, $dst:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    set!(o.epochs, t.epochs);
    set!(o.batch_size, t.batch_size);
    set!(o.lr, t.learning_rate);
    set!(o.weight_decay, t.weight_decay);
    set!(o.scheme, t.scheme);
    set!(o.objective, t.objective);
    set!(o.masking, t.masking);
    set!(o.alpha, t.erl.alpha);
    set!(o.margin, t.margin);
    set!(o.scale, t.scale);
    cfg.validate()?;
    Ok(())
}

fn rows_for(m: &Manifest, split: Option<Split>) -> Vec<&ManifestRow> {
    m.rows.iter().filter(|r| split.is_none_or(|s| r.split == s)).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> Result<()> {
    let common = cli.common;
    let out = common.out_dir.clone();
    match cli.command {
        Command::Features(a) => cmd_features(&load_config(&common)?, &a, &out),
        Command::MaskReport(a) => cmd_mask_report(&load_config(&common)?, &a, &out),
        Command::Augment(a) => cmd_augment(&load_config(&common)?, &a, &out),
        Command::Synth => cmd_synth(&load_config(&common)?, &out),
        Command::Train(a) => {
            let mut cfg = load_config(&common)?;
            apply_overrides(&mut cfg, &a.overrides)?;
            cmd_train(&cfg, &a, &out)
        }
        Command::Embed(a) => cmd_embed(&a, &out),
        Command::Trials(a) => {
            let mut cfg = load_config(&common)?;
            if let Some(n) = a.max_per_bucket {
                cfg.trials.max_per_bucket = n;
            }
            cmd_trials(&cfg, &a, &out)
        }
        Command::Score(a) => cmd_score(&a, &out),
        Command::Eval(a) => cmd_eval(&a, &out),
        Command::Ablate(a) => {
            let mut cfg = load_config(&common)?;
            apply_overrides(&mut cfg, &a.overrides)?;
            cmd_ablate(&cfg, &a, &out)
        }
    }
}

fn write_matrix(path: &Path, m: &ndarray::Array2<f64>) -> Result<()> {
    let mut text = format!("# {} {}\n", m.nrows(), m.ncols());
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn cmd_features(cfg: &ToolkitConfig, a: &ManifestArgs, out: &Path) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    let logmel = LogMel::new(cfg.features.clone())?;
    let rows = rows_for(&m, a.split);
    for r in &rows {
        let wave = emosv_core::io::read_wav(m.resolve(r)).with_context(|| format!("reading {}", r.utterance_id))?;
        let feats = mean_normalize(&logmel.extract(&wave)?);
        write_matrix(&out.join("features").join(format!("{}.txt", r.utterance_id)), feats.values())?;
    }
    println!("wrote {} feature files to {}", rows.len(), out.join("features").display());
    Ok(())
}

fn cmd_mask_report(cfg: &ToolkitConfig, a: &MaskReportArgs, out: &Path) -> Result<()> {
    let m = Manifest::load(&a.input.manifest)?;
    let spec = cfg.features.frame_spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let path = out.join("mask_report.jsonl");
    let mut w = create(&path)?;
    let mut counts = HashMap::new();
    for r in rows_for(&m, a.input.split) {
        let wave = emosv_core::io::read_wav(m.resolve(r))?;
        let energy = normalize_rms(&rms_energy(&wave, spec)?);
        let zones = partition_zones(&energy, cfg.train.zones);
        let plan = match a.masking {
            Masking::Rm => random_mask_plan(energy.len(), cfg.train.mask, &mut rng),
            _ => select_mask_centers(&zones, cfg.train.mask, &mut rng),
        };
        *counts.entry(format!("{:?}", zones.dominant)).or_insert(0usize) += 1;
        let rec = serde_json::json!({
            "utterance_id": r.utterance_id,
            "emotion": r.emotion.name(),
            "n_frames": zones.n_frames,
            "high": zones.high.len(),
            "low": zones.low.len(),
            "noise": zones.noise.len(),
            "dominant": match zones.dominant {
                Dominance::Intense => "intense",
                Dominance::Subdued => "subdued",
                Dominance::None => "none",
            },
            "centers": plan.centers,
            "masked_frames": plan.masked_frames().into_iter().collect::<Vec<_>>(),
        });
        writeln!(w, "{rec}")?;
    }
    w.flush()?;
    println!("dominant zones: {counts:?}; report at {}", path.display());
    Ok(())
}

fn cmd_augment(cfg: &ToolkitConfig, a: &AugmentArgs, out: &Path) -> Result<()> {
    let m = Manifest::load(&a.input.manifest)?;
    let split = a.input.split.unwrap_or(Split::Train);
    let index = CorpusIndex::new(m.utterances(split)?)?;
    if index.is_empty() {
        bail!(emosv_core::Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let n = a.count.unwrap_or(index.len());
    let mut csv = String::from("utterance_id,audio_path,speaker,emotions,kind,source_a,a_start,source_b,b_start,a_first\n");
    for k in 0..n {
        let x = k % index.len();
        let (partner, kind) = index.choose_partner(x, a.scheme, &mut rng)?;
        let (ux, up) = (index.get(x), index.get(partner));
        let plan = plan_copy_paste(ux, up, kind, &cfg.train.copy_paste, &mut rng)?;
        let utt = render_copy_paste(ux, up, &plan);
        let rel = format!("wav/cp{k:05}.wav");
        write_wav(out.join(&rel), &utt.audio)?;
        csv.push_str(&format!(
            "cp{k:05},{rel},{},{},{kind},{},{},{},{},{}\n",
            utt.speaker, utt.emotions, ux.id, plan.a.start, up.id, plan.b.start, plan.a_first
        ));
    }
    write_atomic(&out.join("augment.csv"), csv.as_bytes())?;
    println!("wrote {n} {} utterances to {}", a.scheme, out.display());
    Ok(())
}

fn cmd_synth(cfg: &ToolkitConfig, out: &Path) -> Result<()> {
    let corpus = synth_corpus(&cfg.synth)?;
    let m = write_corpus(&corpus, out)?;
    println!(
        "wrote {} utterances ({} train / {} test speakers) and {}",
        m.rows.len(),
        m.speakers(Split::Train).len(),
        m.speakers(Split::Test).len(),
        out.join("manifest.csv").display()
    );
    Ok(())
}

fn train_data(cfg: &ToolkitConfig, m: &Manifest) -> Result<TrainData> {
    Ok(TrainData::new(m.utterances(Split::Train)?, &cfg.features)?)
}

/// Loads a checkpoint whose feature settings match `cfg`.
fn load_matching(path: &Path, cfg: &ToolkitConfig) -> Result<Checkpoint> {
    let ck = Checkpoint::load(path)?;
    if ck.features != cfg.features {
        bail!(emosv_core::Error::Config(
            "checkpoint feature settings differ from the configuration".into()
        ));
    }
    Ok(ck)
}

fn cmd_train(cfg: &ToolkitConfig, a: &TrainArgs, out: &Path) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    let data = train_data(cfg, &m)?;
    let (train_cfg, start) = match &a.resume {
        Some(p) => {
            let ck = load_matching(p, cfg)?;
            let epochs = a.overrides.epochs.unwrap_or(ck.config.epochs);
            (emosv_core::trainer::TrainConfig { epochs, ..ck.config }, Some(ck.state))
        }
        None => match &a.init {
            Some(p) => {
                let ck = load_matching(p, cfg)?;
                (cfg.train.clone(), Some(ck.state.restart(&data, &cfg.train)?))
            }
            None => (cfg.train.clone(), None),
        },
    };
    std::fs::create_dir_all(out)?;
    let log_path = out.join("losses.jsonl");
    let mut log = if start.is_some() {
        BufWriter::new(std::fs::OpenOptions::new().create(true).append(true).open(&log_path)?)
    } else {
        create(&log_path)?
    };
    let (state, _) = train(&data, &train_cfg, start, |state, entry| {
        writeln!(log, "{}", entry.to_json()).map_err(emosv_core::Error::Io)?;
        log.flush().map_err(emosv_core::Error::Io)?;
        let ck = Checkpoint {
            config: train_cfg.clone(),
            features: cfg.features.clone(),
            state: state.clone(),
        };
        ck.save(out.join(format!("checkpoint-{:04}.ckpt", state.epoch)))?;
        ck.save(out.join("last.ckpt"))?;
        eprintln!("epoch {} step {} loss {:.6}", entry.epoch, entry.step, entry.total);
        Ok(())
    })?;
    let ck = Checkpoint {
        config: train_cfg.clone(),
        features: cfg.features.clone(),
        state,
    };
    ck.save(out.join("last.ckpt"))?;
    println!(
        "trained {} epochs; checkpoint {}",
        ck.state.epoch,
        out.join("last.ckpt").display()
    );
    Ok(())
}

fn cmd_embed(a: &EmbedArgs, out: &Path) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let m = Manifest::load(&a.input.manifest)?;
    let logmel = LogMel::new(ck.features.clone())?;
    let split = a.input.split.unwrap_or(Split::Test);
    let utts = m.utterances(split)?;
    let embs = embed_all(&ck.state.encoder, &logmel, &utts)?;
    let path = out.join("embeddings.txt");
    let mut text = String::new();
    for (u, e) in utts.iter().zip(&embs) {
        let cells: Vec<String> = e.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&format!("{} {}\n", u.id, cells.join(" ")));
    }
    write_atomic(&path, text.as_bytes())?;
    println!("wrote {} embeddings to {}", utts.len(), path.display());
    Ok(())
}

fn read_embeddings(path: &Path) -> Result<Vec<(String, Embedding)>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        let Some(id) = it.next() else { continue };
        let values = it
            .map(|w| w.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| emosv_core::Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        out.push((id.to_string(), Embedding::from(values)));
    }
    Ok(out)
}

fn cmd_trials(cfg: &ToolkitConfig, a: &TrialsArgs, out: &Path) -> Result<()> {
    let m = Manifest::parse(&std::fs::read_to_string(&a.manifest)?, ".")?;
    let items: Vec<_> = m
        .split(Split::Test)
        .into_iter()
        .map(|r| emosv_core::eval::TestItem {
            id: r.utterance_id.clone(),
            speaker: r.speaker,
            emotion: r.emotion,
        })
        .collect();
    let set = build_trials(&items, cfg.trials);
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let path = out.join("trials.txt");
    let mut buf = Vec::new();
    write_trials(&mut buf, set.merged())?;
    write_atomic(&path, &buf)?;
    println!("wrote {} trials to {}", set.len(), path.display());
    Ok(())
}

fn load_trials(path: &Path) -> Result<Vec<emosv_core::eval::Trial>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(read_trials(BufReader::new(f))?)
}

fn cmd_score(a: &ScoreArgs, out: &Path) -> Result<()> {
    let embs = read_embeddings(&a.embeddings)?;
    let map: HashMap<&str, &Embedding> = embs.iter().map(|(id, e)| (id.as_str(), e)).collect();
    let trials = load_trials(&a.trials)?;
    let scored = score_trials(&trials, &map)?;
    let path = out.join("scores.txt");
    let mut buf = Vec::new();
    write_scores(&mut buf, &scored)?;
    write_atomic(&path, &buf)?;
    println!("wrote {} scores to {}", scored.len(), path.display());
    Ok(())
}

fn write_report(report: &Report, out: &Path, stem: &str) -> Result<()> {
    write_atomic(&out.join(format!("{stem}.txt")), report.to_string().as_bytes())?;
    write_atomic(&out.join(format!("{stem}.jsonl")), report.to_jsonl().as_bytes())?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &Path) -> Result<()> {
    let trials = load_trials(&a.trials)?;
    let mut scores = Vec::new();
    for p in &a.scores {
        let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
        scores.extend(read_scores(BufReader::new(f))?);
    }
    let scored = attach_scores(&trials, &scores)?;
    let report = report_grid(&scored);
    write_report(&report, out, "report")?;
    print!("{report}");
    print!("{}", report.to_jsonl());
    Ok(())
}

fn cmd_ablate(cfg: &ToolkitConfig, a: &AblateArgs, out: &Path) -> Result<()> {
    let m = match &a.manifest {
        Some(p) => Manifest::load(p)?,
        None => write_corpus(&synth_corpus(&cfg.synth)?, &out.join("corpus"))?,
    };
    let rows: Vec<_> = if a.rows.is_empty() {
        cfg.ablate.clone()
    } else {
        a.rows
            .iter()
            .map(|name| {
                cfg.ablate
                    .iter()
                    .find(|r| &r.name == name)
                    .cloned()
                    .ok_or_else(|| emosv_core::Error::Config(format!("no ablation row named {name:?}")))
            })
            .collect::<std::result::Result<_, _>>()?
    };
    let data = train_data(cfg, &m)?;
    let test = m.utterances(Split::Test)?;
    test_items(&test)?;
    let init = a.init.as_deref().map(|p| load_matching(p, cfg)).transpose()?;
    let mut jsonl = String::new();
    let mut table = String::new();
    for row in &rows {
        let train_cfg = row.apply(&cfg.train);
        let start = init
            .as_ref()
            .map(|ck| ck.state.clone().restart(&data, &train_cfg))
            .transpose()?;
        let (state, _) = train(&data, &train_cfg, start, |_, _| Ok(()))?;
        let (report, _) = evaluate(&state.encoder, data.bank.logmel(), &test, cfg.trials)?;
        write_report(&report, &out.join("rows"), &row.name)?;
        let cells: Vec<String> = report
            .rows
            .iter()
            .map(|r| r.eer.map_or("-".into(), |e| format!("{:.2}", 100.0 * e.eer)))
            .collect();
        table.push_str(&format!(
            "{:<16}{}\n",
            row.name,
            cells.iter().map(|c| format!("{c:>8}")).collect::<String>()
        ));
        jsonl.push_str(
            &serde_json::json!({
                "row": row.name,
                "scheme": row.scheme.to_string(),
                "objective": format!("{:?}", row.objective).to_lowercase(),
                "masking": row.masking.to_string(),
                "eer": report
                    .rows
                    .iter()
                    .map(|r| (r.label.clone(), serde_json::json!(r.eer.map(|e| e.eer))))
                    .collect::<serde_json::Map<_, _>>(),
            })
            .to_string(),
        );
        jsonl.push('\n');
        eprintln!("{} done", row.name);
    }
    let header = format!(
        "{:<16}{}\n",
        "row",
        emosv_core::eval::GRID_ORDER
            .iter()
            .map(|b| b.to_string())
            .chain(std::iter::once(emosv_core::eval::MERGED_LABEL.to_string()))
            .map(|l| format!("{l:>8}"))
            .collect::<String>()
    );
    let text = format!("EER (%) per emotion bucket; Merged pools all scores\n{header}{table}");
    write_atomic(&out.join("ablation.txt"), text.as_bytes())?;
    write_atomic(&out.join("ablation.jsonl"), jsonl.as_bytes())?;
    print!("{text}");
    Ok(())
}
