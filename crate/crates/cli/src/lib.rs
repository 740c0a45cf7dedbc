//! Command implementations behind the `reda` binary.
//!
//! Each command writes its human-readable output to the supplied writer so
//! it can be driven from tests as well as from `main`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reda_core::augment::DEFAULT_SEED;
use reda_core::eval::{run_quality_suite, QualityConfig};
use reda_core::ngram::{train_with, MAX_ORDER};
use reda_core::record::{read_tsv, write_tsv};
use reda_core::{
    augment_dataset, gen_pseudo_dict, load_synonyms, rng_for, AugmentConfig, EditKind, Lexicon, Mode, NGramModel,
    Program, SynonymDict, TextCodec, TextPairRecord, TrainOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] reda_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 for usage errors, 2 for data and format errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
        }
    }
}

fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "reda", version, about = "Random-edit text augmentation with n-gram selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the 4-gram language model on a corpus (one text per line).
    TrainLm(TrainLmArgs),
    /// Print the log probability of texts under a trained model.
    Score(ScoreArgs),
    /// Augment a TSV dataset of text pairs.
    Augment(AugmentArgs),
    /// Run the restoration experiments and double-swap quality metrics.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    /// Treat lines as space-separated tokens instead of segmenting them.
    #[arg(long)]
    pub pretokenized: bool,
    /// Word list (one per line) for greedy longest-match segmentation.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

impl SegmentArgs {
    fn codec(&self, extra_words: impl IntoIterator<Item = String>) -> CliResult<TextCodec> {
        if self.pretokenized {
            return Ok(TextCodec::whitespace());
        }
        let mut lexicon = match &self.lexicon {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(io_err(p))?;
                Lexicon::from_lines(text.lines())
            }
            None => Lexicon::new(),
        };
        for w in extra_words {
            lexicon.insert(w);
        }
        Ok(TextCodec::dict_greedy(lexicon))
    }
}

#[derive(Debug, Args)]
pub struct TrainLmArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop n-grams seen fewer than this many times.
    #[arg(long)]
    pub min_count: Option<u64>,
    #[command(flatten)]
    pub segment: SegmentArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Text to score; may be repeated. Reads stdin lines when absent.
    #[arg(long)]
    pub text: Vec<String>,
    /// Use greedy longest-match tiling instead of the best tiling.
    #[arg(long)]
    pub greedy: bool,
    #[command(flatten)]
    pub segment: SegmentArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Reda,
    Ng,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Reda => Mode::Reda,
            ModeArg::Ng => Mode::Ng,
            ModeArg::Both => Mode::Both,
        }
    }
}

/// A fixed seed, or `random` for a fresh one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("random") {
            return Ok(SeedArg::Random);
        }
        s.parse().map(SeedArg::Fixed).map_err(|e| format!("seed must be an integer or `random`: {e}"))
    }
}

impl std::fmt::Display for SeedArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedArg::Fixed(s) => write!(f, "{s}"),
            SeedArg::Random => f.write_str("random"),
        }
    }
}

impl SeedArg {
    fn resolve(self, log: &mut dyn Write) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Random => {
                let s = rand::random();
                let _ = writeln!(log, "seed: {s}");
                s
            }
        }
    }
}

/// Per-operation output counts: `small`, `large`, or a list like
/// `SR=2,RS=2,RI=1,RD=1,RM=1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputsArg(pub BTreeMap<EditKind, usize>);

impl FromStr for OutputsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "small" => return Ok(OutputsArg(AugmentConfig::small_set_outputs())),
            "large" => return Ok(OutputsArg(AugmentConfig::large_set_outputs())),
            _ => {}
        }
        let mut map: BTreeMap<EditKind, usize> = EditKind::ALL.into_iter().map(|k| (k, 0)).collect();
        for part in s.split(',') {
            let (op, n) = part
                .split_once('=')
                .ok_or_else(|| format!("expected OP=COUNT, got {part:?}"))?;
            let op: EditKind = op.trim().parse().map_err(|e: reda_core::Error| e.to_string())?;
            let n: usize = n.trim().parse().map_err(|e| format!("{part:?}: {e}"))?;
            map.insert(op, n);
        }
        Ok(OutputsArg(map))
    }
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output TSV. In `both` mode two files are written, with `.reda` and
    /// `.ng` inserted before the extension.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "reda")]
    pub mode: ModeArg,
    /// JSON synonym dictionary (word -> array of synonyms).
    #[arg(long)]
    pub synonyms: PathBuf,
    /// Model directory; required for `ng` and `both`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub sr_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub rs_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub ri_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rd_rate: f64,
    /// Number of sub-operations RM combines (2-4).
    #[arg(long, default_value_t = 2)]
    pub rm_subops: usize,
    /// `small`, `large`, or `SR=2,RS=2,RI=1,RD=1,RM=1`.
    #[arg(long, default_value = "small")]
    pub outputs: OutputsArg,
    #[arg(long, default_value_t = 20)]
    pub pool_size: usize,
    #[arg(long, default_value_t = SeedArg::Fixed(DEFAULT_SEED), value_parser = SeedArg::from_str)]
    pub seed: SeedArg,
    /// Skip the first line of the input.
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub segment: SegmentArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Natural texts, one per line.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
    pub edits: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Load the pseudo synonym dictionary instead of generating it.
    #[arg(long)]
    pub pseudo_dict: Option<PathBuf>,
    /// Highest-frequency rank (1-based) of the pseudo dictionary band.
    #[arg(long, default_value_t = 1000)]
    pub pd_rank_min: usize,
    #[arg(long, default_value_t = 10_000)]
    pub pd_rank_max: usize,
    /// Number of pseudo dictionary headwords.
    #[arg(long, default_value_t = 3855)]
    pub pd_size: usize,
    /// Write the generated pseudo dictionary here.
    #[arg(long)]
    pub save_pseudo_dict: Option<PathBuf>,
    /// Write the report as TSV here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Pool size for the double-swap overlap measurement.
    #[arg(long, default_value_t = 20)]
    pub pool_size: usize,
    #[arg(long, default_value_t = SeedArg::Fixed(DEFAULT_SEED), value_parser = SeedArg::from_str)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub segment: SegmentArgs,
}

pub fn run(cli: Cli, out: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::TrainLm(a) => cmd_train_lm(&a, out),
        Command::Score(a) => cmd_score(&a, &mut io::stdin().lock(), out),
        Command::Augment(a) => cmd_augment(&a, out, log),
        Command::Eval(a) => cmd_eval(&a, out, log),
    }
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(io_err(path))
}

fn write_out(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> CliResult {
    out.write_fmt(text).map_err(io_err("<stdout>"))
}

pub fn cmd_train_lm(args: &TrainLmArgs, out: &mut dyn Write) -> CliResult {
    let codec = args.segment.codec(std::iter::empty())?;
    let lines = read_lines(&args.corpus)?;
    let opts = TrainOptions {
        min_count: args.min_count,
    };
    let model = train_with(&lines, &codec.mode, &opts)?;
    model.save(&args.out)?;
    write_out(out, format_args!("order\ttypes\ttokens\n"))?;
    for order in 1..=MAX_ORDER {
        write_out(out, format_args!("{order}\t{}\t{}\n", model.types(order), model.total(order)))?;
    }
    Ok(())
}

pub fn cmd_score(args: &ScoreArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let model = NGramModel::load(&args.model)?;
    let codec = args.segment.codec(std::iter::empty())?;
    let texts: Vec<String> = if args.text.is_empty() {
        input.lines().collect::<Result<_, _>>().map_err(io_err("<stdin>"))?
    } else {
        args.text.clone()
    };
    for text in texts {
        let s = codec.tokenize(&text);
        let lp = if args.greedy {
            model.log_prob_greedy(&s)
        } else {
            model.log_prob(&s)
        };
        write_out(out, format_args!("{text}\t{lp:?}\n"))?;
    }
    Ok(())
}

/// `out.tsv` -> `out.<tag>.tsv`
pub fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn write_dataset(path: &Path, originals: &[TextPairRecord], augmented: &[TextPairRecord]) -> CliResult {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_tsv(&mut w, originals).map_err(io_err(path))?;
    write_tsv(&mut w, augmented).map_err(io_err(path))
}

pub fn cmd_augment(args: &AugmentArgs, out: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let mode = Mode::from(args.mode);
    if mode.runs_ng() && args.model.is_none() {
        return Err(CliError::Usage(format!("--mode {mode} requires --model")));
    }
    let cfg = AugmentConfig {
        sr_rate: args.sr_rate,
        rs_rate: args.rs_rate,
        ri_rate: args.ri_rate,
        rd_rate: args.rd_rate,
        rm_subops: args.rm_subops,
        outputs_per_op: args.outputs.0.clone(),
        pool_size: args.pool_size,
        mode,
        seed: args.seed.resolve(log),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let dict: SynonymDict = load_synonyms(&args.synonyms)?;
    let model = args.model.as_ref().map(NGramModel::load).transpose()?;
    let codec = args.segment.codec(dict.words().map(str::to_owned).collect::<Vec<_>>())?;
    let file = fs::File::open(&args.input).map_err(io_err(&args.input))?;
    let records = read_tsv(BufReader::new(file), args.header)?;

    let result = augment_dataset(&records, &cfg, &codec, &dict, model.as_ref())?;
    write_out(out, format_args!("input pairs\t{}\n", records.len()))?;
    let targets: Vec<(Program, PathBuf)> = match mode {
        Mode::Reda => vec![(Program::Reda, args.output.clone())],
        Mode::Ng => vec![(Program::Ng, args.output.clone())],
        Mode::Both => vec![
            (Program::Reda, tagged_path(&args.output, "reda")),
            (Program::Ng, tagged_path(&args.output, "ng")),
        ],
    };
    for (program, path) in targets {
        let augmented = result.get(program);
        write_dataset(&path, &records, augmented)?;
        write_out(
            out,
            format_args!(
                "{program} output pairs\t{}\t({} new)\t{}\n",
                records.len() + augmented.len(),
                augmented.len(),
                path.display()
            ),
        )?;
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let model = NGramModel::load(&args.model)?;
    let codec = args.segment.codec(std::iter::empty())?;
    let corpus: Vec<_> = read_lines(&args.corpus)?
        .iter()
        .map(|l| codec.tokenize(l))
        .filter(|s| !s.is_empty())
        .collect();
    if args.samples > corpus.len() {
        return Err(reda_core::Error::Evaluation(format!(
            "--samples {} exceeds the {} texts in the corpus",
            args.samples,
            corpus.len()
        ))
        .into());
    }
    let seed = args.seed.resolve(log);
    let pdict = match &args.pseudo_dict {
        Some(p) => load_synonyms(p)?,
        None => gen_pseudo_dict(&model, args.pd_rank_min, args.pd_rank_max, args.pd_size, &mut rng_for(seed, 1))?,
    };
    if let Some(p) = &args.save_pseudo_dict {
        pdict.save(p)?;
    }
    let cfg = QualityConfig {
        sample_size: args.samples,
        repeats: args.repeats,
        edits: args.edits.clone(),
        pool_size: args.pool_size,
    };
    let report = run_quality_suite(&corpus, &model, &pdict, &cfg, &mut rng_for(seed, 0))?;
    write_out(out, format_args!("{}", report.to_table()))?;
    if let Some(p) = &args.report {
        fs::write(p, report.to_tsv()).map_err(io_err(p))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_arg_forms() {
        assert_eq!("small".parse::<OutputsArg>().unwrap().0, AugmentConfig::small_set_outputs());
        let o: OutputsArg = "SR=3,rm=0".parse().unwrap();
        assert_eq!(o.0[&EditKind::Sr], 3);
        assert_eq!(o.0[&EditKind::Rs], 0);
        assert!("SR".parse::<OutputsArg>().is_err());
        assert!("XX=1".parse::<OutputsArg>().is_err());
    }

    #[test]
    fn seed_arg() {
        assert_eq!("42".parse::<SeedArg>().unwrap(), SeedArg::Fixed(42));
        assert_eq!("random".parse::<SeedArg>().unwrap(), SeedArg::Random);
        assert!("x".parse::<SeedArg>().is_err());
    }

    #[test]
    fn tagged_paths() {
        assert_eq!(tagged_path(Path::new("d/out.tsv"), "ng"), PathBuf::from("d/out.ng.tsv"));
        assert_eq!(tagged_path(Path::new("out"), "reda"), PathBuf::from("out.reda"));
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["reda", "eval", "--model", "m", "--corpus", "c", "--edits", "1,3"]).unwrap();
        match cli.command {
            Command::Eval(a) => assert_eq!(a.edits, vec![1, 3]),
            _ => panic!("wrong command"),
        }
    }
}
