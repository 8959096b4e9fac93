use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use wseg::eval::{
    affix_score, format_affix_table, mds, mds_csv, mds_svg, name_id_score, parse_judge_file,
    parse_matrix_csv, parse_spans_tsv, JudgedCorpus,
};
use wseg::lexicon::{Lexicon, LexiconConfig};
use wseg::morphology::{load_affix_rules, load_seen_derived};
use wseg::names::{GivenPosition, NameModel, NameShape};
use wseg::params::ModelParams;
use wseg::segmenter::{
    baseline, Baseline, Components, ModelConfig, OutputFormat, Segmentation, SegmentationModel,
};
use wseg::translit::TransliterationModel;
use wseg::wfst::Cost;
use wseg::{cache, Error};

#[derive(Parser)]
#[command(
    name = "wseg",
    version,
    about = "Weighted finite-state Chinese word segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a segmentation model and write it to a cache file.
    Compile {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Segment text, one sentence per line.
    Segment {
        /// Compiled model cache; replaces the lexicon and component flags.
        #[arg(long, conflicts_with_all = ["lexicon", "fallback"])]
        model: Option<PathBuf>,
        #[command(flatten)]
        build: OptionalModelArgs,
        #[command(flatten)]
        io: TextIo,
    },
    /// Segment with a greedy or anti-greedy dictionary baseline.
    Baseline {
        #[command(flatten)]
        lexicon: LexiconArgs,
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        io: TextIo,
    },
    /// Train the personal-name model and print its costs.
    NameTrain {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        radicals: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train the transliteration model and print its hanzi probabilities.
    TranslitTrain {
        #[arg(long)]
        names: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pairwise similarity matrix of judge files, as CSV.
    EvalJudges {
        /// Judge files; each id is the file stem.
        #[arg(required = true)]
        judges: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Name identification precision and recall.
    EvalNames {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-affix precision and recall table.
    EvalAffixes {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classical MDS of a similarity (or distance) matrix.
    Mds {
        matrix: PathBuf,
        /// Matrix already holds distances.
        #[arg(long)]
        distances: bool,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LexiconArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    fallback: PathBuf,
    /// key=value constants overriding the defaults.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct ComponentArgs {
    #[arg(long)]
    affixes: Option<PathBuf>,
    #[arg(long, requires = "affixes")]
    seen_derived: Option<PathBuf>,
    #[arg(long, requires_all = ["radicals", "params"])]
    name_tables: Option<PathBuf>,
    #[arg(long, requires = "name_tables")]
    radicals: Option<PathBuf>,
    #[arg(long, requires = "params")]
    translit_names: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[command(flatten)]
    components: ComponentArgs,
}

#[derive(Args)]
struct OptionalModelArgs {
    #[arg(long, required_unless_present = "model")]
    lexicon: Option<PathBuf>,
    #[arg(long, required_unless_present = "model")]
    fallback: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[command(flatten)]
    components: ComponentArgs,
}

#[derive(Args)]
struct TextIo {
    /// Input text, `-` for standard input.
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Tagged,
    Tsv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Plain => OutputFormat::Plain,
            Format::Tagged => OutputFormat::Tagged,
            Format::Tsv => OutputFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    /// Longest match.
    Gr,
    /// Shortest match.
    Ag,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wseg: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> wseg::Result<()> {
    check_outputs(&command)?;
    match command {
        Command::Compile { model, output } => {
            let m = build_model(
                &model.lexicon.lexicon,
                &model.lexicon.fallback,
                model.lexicon.params.as_deref(),
                &model.components,
            )?;
            cache::save(&m, &output)
        }
        Command::Segment { model, build, io } => {
            let m = match model {
                Some(path) => cache::load(&path)?,
                None => build_model(
                    build.lexicon.as_deref().expect("required by clap"),
                    build.fallback.as_deref().expect("required by clap"),
                    build.params.as_deref(),
                    &build.components,
                )?,
            };
            process_lines(&io, |line| m.segment(line))
        }
        Command::Baseline { lexicon, algo, io } => {
            let params = load_params(lexicon.params.as_deref())?;
            let lex = Lexicon::load(&lexicon.lexicon, &lexicon.fallback, lexicon_config(&params))?;
            let algo = match algo {
                Algo::Gr => Baseline::Greedy,
                Algo::Ag => Baseline::AntiGreedy,
            };
            process_lines(&io, |line| Ok(baseline(&lex, line, algo)))
        }
        Command::NameTrain {
            tables,
            radicals,
            params,
            output,
        } => {
            let model = NameModel::load(&tables, &radicals, &ModelParams::load(&params)?)?;
            emit(output.as_deref(), &name_report(&model))
        }
        Command::TranslitTrain {
            names,
            params,
            output,
        } => {
            let model = TransliterationModel::load(&names, require_p_tn(&params)?)?;
            let mut out = String::new();
            for (h, p) in &model.p_char {
                out.push_str(&format!(
                    "{h}\t{p:.6}\t{:.6}\n",
                    Cost::from_probability(*p).value()
                ));
            }
            emit(output.as_deref(), &out)
        }
        Command::EvalJudges { judges, output } => {
            let mut loaded = Vec::new();
            for path in &judges {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                let repeats = loaded.iter().filter(|(_, _, s)| *s == stem).count();
                let id = if repeats == 0 {
                    stem.clone()
                } else {
                    format!("{stem}#{}", repeats + 1)
                };
                let words = parse_judge_file(&read_input(path)?, &path.display().to_string())?;
                loaded.push((id, words, stem));
            }
            let judges: Vec<(String, Vec<Vec<String>>)> = loaded
                .into_iter()
                .map(|(id, words, _)| (id, words))
                .collect();
            let matrix = JudgedCorpus::from_judges(&judges)?.similarity_matrix()?;
            emit(output.as_deref(), &matrix.to_csv())
        }
        Command::EvalNames {
            system,
            gold,
            output,
        } => {
            let (p, r) = name_id_score(&load_spans(&system)?, &load_spans(&gold)?)?;
            emit(
                output.as_deref(),
                &format!("precision\t{:.2}%\nrecall\t{:.2}%\n", p * 100.0, r * 100.0),
            )
        }
        Command::EvalAffixes {
            system,
            gold,
            output,
        } => {
            let scores = affix_score(&load_spans(&system)?, &load_spans(&gold)?)?;
            emit(output.as_deref(), &format_affix_table(&scores))
        }
        Command::Mds {
            matrix,
            distances,
            dims,
            csv,
            svg,
        } => {
            let (ids, values) =
                parse_matrix_csv(&read_input(&matrix)?, &matrix.display().to_string())?;
            let d = if distances {
                values
            } else {
                values
                    .iter()
                    .map(|r| r.iter().map(|s| 1.0 - s).collect())
                    .collect()
            };
            let emb = mds(&d, dims)?;
            if emb.truncated {
                eprintln!("wseg: fewer than {dims} positive eigenvalues; extra axes are zero");
            }
            if let Some(path) = &svg {
                write_file(path, &mds_svg(&ids, &emb))?;
            }
            match &csv {
                Some(path) => write_file(path, &mds_csv(&ids, &emb)),
                None if svg.is_none() => emit(None, &mds_csv(&ids, &emb)),
                None => Ok(()),
            }
        }
    }
}

/// Fails before any work when an output file cannot be created.
fn check_outputs(command: &Command) -> wseg::Result<()> {
    let outputs: Vec<&Path> = match command {
        Command::Compile { output, .. } => vec![output],
        Command::Segment { io, .. } | Command::Baseline { io, .. } => {
            io.output.iter().map(|p| p.as_path()).collect()
        }
        Command::NameTrain { output, .. }
        | Command::TranslitTrain { output, .. }
        | Command::EvalJudges { output, .. }
        | Command::EvalNames { output, .. }
        | Command::EvalAffixes { output, .. } => output.iter().map(|p| p.as_path()).collect(),
        Command::Mds { csv, svg, .. } => csv.iter().chain(svg).map(|p| p.as_path()).collect(),
    };
    for path in outputs {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        if !dir.is_dir() {
            return Err(Error::io(
                path,
                io::Error::new(io::ErrorKind::NotFound, "output directory does not exist"),
            ));
        }
    }
    Ok(())
}

fn load_params(path: Option<&Path>) -> wseg::Result<ModelParams> {
    path.map_or_else(|| Ok(ModelParams::default()), ModelParams::load)
}

fn lexicon_config(params: &ModelParams) -> LexiconConfig {
    LexiconConfig {
        large_cost: Cost::new(params.large_cost),
        fallback_cost: Cost::new(params.fallback_cost),
    }
}

fn require_p_tn(path: &Path) -> wseg::Result<f64> {
    ModelParams::load(path)?
        .p_tn
        .ok_or_else(|| Error::Validation(format!("{}: parameter p_TN is required", path.display())))
}

fn build_model(
    lexicon: &Path,
    fallback: &Path,
    params: Option<&Path>,
    c: &ComponentArgs,
) -> wseg::Result<SegmentationModel> {
    let p = load_params(params)?;
    let lex = Lexicon::load(lexicon, fallback, lexicon_config(&p))?;
    let mut components = Components::default();
    let mut config = ModelConfig::dictionary_only();
    if let Some(path) = &c.affixes {
        components.affix_rules = load_affix_rules(path)?;
        config.morphology = true;
    }
    if let Some(path) = &c.seen_derived {
        components.seen_derived = load_seen_derived(path)?;
    }
    if let (Some(tables), Some(radicals)) = (&c.name_tables, &c.radicals) {
        components.names = Some(NameModel::load(tables, radicals, &p)?);
        config.names = true;
    }
    if let Some(path) = &c.translit_names {
        let p_tn = p.p_tn.ok_or_else(|| {
            Error::Validation("parameter p_TN is required for transliteration".into())
        })?;
        components.translit = Some(TransliterationModel::load(path, p_tn)?);
        config.translit = true;
    }
    SegmentationModel::build(lex, &components, config)
}

/// Segments every line in parallel and writes results in input order.
fn process_lines<F>(io: &TextIo, segment: F) -> wseg::Result<()>
where
    F: Fn(&str) -> wseg::Result<Segmentation> + Sync,
{
    let text = read_input(&io.input)?;
    let source = io.input.display().to_string();
    let lines: Vec<&str> = text.lines().collect();
    let results: Vec<String> = lines
        .par_iter()
        .enumerate()
        .map(|(i, line)| {
            segment(line)
                .map(|s| s.format(io.format.into()))
                .map_err(|e| Error::Validation(format!("{source}:{}: {e}", i + 1)))
        })
        .collect::<wseg::Result<_>>()?;
    let sep = match io.format {
        Format::Tsv => "\n\n",
        _ => "\n",
    };
    let mut out = results.join(sep);
    if !results.is_empty() {
        out.push('\n');
    }
    emit(io.output.as_deref(), &out)
}

fn name_report(m: &NameModel) -> String {
    let mut out = String::new();
    let mut line = |kind: &str, key: &str, p: f64| {
        out.push_str(&format!(
            "{kind}\t{key}\t{:.6}\n",
            Cost::from_probability(p).value()
        ));
    };
    line("name_in_text", "-", m.p_name_in_text);
    for shape in NameShape::ALL {
        if let Some(&p) = m.type_prior.get(&shape) {
            line("prior", &shape.to_string(), p);
        }
    }
    for (h, &p) in &m.family_single {
        line("fam1", &h.to_string(), p);
    }
    for ((a, b), &p) in &m.family_double {
        line("fam2", &format!("{a}{b}"), p);
    }
    for pos in GivenPosition::ALL {
        let tag = position_tag(pos);
        for (h, &p) in m.given.get(&pos).into_iter().flatten() {
            line(tag, &h.to_string(), p);
        }
        if let Some(table) = m.unseen_given.get(&pos) {
            for cls in table.classes().keys() {
                if let Some(p) = table.unseen_probability(cls).filter(|&p| p > 0.0) {
                    line(&format!("{tag}.unseen"), cls, p);
                }
            }
        }
    }
    for ((a, b), &p) in &m.bigram_override {
        line("givP", &format!("{a}{b}"), p);
    }
    out
}

fn position_tag(pos: GivenPosition) -> &'static str {
    match pos {
        GivenPosition::First => "giv1",
        GivenPosition::Second => "giv2",
        GivenPosition::Single => "givS",
    }
}

fn load_spans(path: &Path) -> wseg::Result<Vec<wseg::eval::Span>> {
    parse_spans_tsv(&read_input(path)?, &path.display().to_string())
}

fn read_input(path: &Path) -> wseg::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .lock()
            .read_to_string(&mut s)
            .map_err(|e| Error::io("<stdin>", e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> wseg::Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> wseg::Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
