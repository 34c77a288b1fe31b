use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mlrank::chains::ChainModel;
use mlrank::evaluation::{write_auc_csv, write_metrics_csv, write_roc_csv, write_selection_csv};
use mlrank::{
    classification_metrics, load_csv, make_artdata, predict_chain, rank, ranking_roc, select_features, write_csv, CsvOptions,
    FeatureRanking, InteractionForm, Method, MultiLabelDataset, RankerConfig, Scenario, ScenarioSpec, SelectionConfig,
};

#[derive(Parser)]
#[command(name = "mlrank", version, about = "Feature ranking for multi-label classification")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "MLRANK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    Simulate(SimulateArgs),
    /// Rank the features of a dataset.
    Rank(RankArgs),
    /// Choose a ranking prefix on a validation split and fit the final chain.
    Select(SelectArgs),
    /// Score rankings against a relevant set, or a chain on test data.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV: feature columns followed by 0/1 label columns.
    #[arg(long)]
    data: PathBuf,
    /// Number of label columns.
    #[arg(long = "labels", value_name = "K")]
    label_count: usize,
    /// Labels are the leading columns.
    #[arg(long)]
    labels_first: bool,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<MultiLabelDataset> {
        let opts = CsvOptions {
            label_count: self.label_count,
            has_header: !self.no_header,
            labels_first: self.labels_first,
        };
        load_csv(&self.data, &opts).with_context(|| format!("reading {}", self.data.display()))
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// artdata1, artdata2, artdata3 or artdata4.
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for data.csv and relevant.txt.
    #[arg(long)]
    out: PathBuf,
    /// Override the number of rows.
    #[arg(long)]
    n: Option<usize>,
    /// Override the number of features.
    #[arg(long)]
    p: Option<usize>,
    /// Override the number of labels.
    #[arg(long = "labels", value_name = "K")]
    label_count: Option<usize>,
    /// Gibbs sweeps per row.
    #[arg(long)]
    sweeps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InteractionArg {
    PerTerm,
    Joint,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// One of the ranking method names, e.g. ising+score or br-chi2.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Equal-frequency bins for the chi2 and IG baselines.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// l1 penalty as a fraction of the smallest all-zero penalty.
    #[arg(long, default_value_t = 1e-4)]
    lambda_factor: f64,
    /// Drop label-powerset classes seen fewer times than this.
    #[arg(long, default_value_t = 0)]
    lp_min_count: usize,
    /// Use raw feature values in the Ising methods.
    #[arg(long)]
    no_standardize: bool,
    /// How interaction terms are scored in ising-inter+score.
    #[arg(long, value_enum, default_value_t = InteractionArg::PerTerm)]
    interaction: InteractionArg,
    /// Ranking CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Ranking CSV produced by `rank`.
    #[arg(long)]
    ranking: PathBuf,
    /// Largest prefix tried, as a fraction of the feature count.
    #[arg(long, default_value_t = 0.2)]
    budget_frac: f64,
    /// Share of rows held out for validation.
    #[arg(long, default_value_t = 0.3)]
    val_frac: f64,
    /// Seed for the validation split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for selection.csv, subset.txt and model.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ranking,
    Classify,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Ranking CSVs, one per run.
    #[arg(long, num_args = 1.., required_if_eq("mode", "ranking"))]
    ranking: Vec<PathBuf>,
    /// Relevant features, 1-based, one per line.
    #[arg(long, required_if_eq("mode", "ranking"))]
    relevant: Option<PathBuf>,
    /// Chain model written by `select`.
    #[arg(long, required_if_eq("mode", "classify"))]
    model: Option<PathBuf>,
    /// Test dataset CSV.
    #[arg(long, required_if_eq("mode", "classify"))]
    data: Option<PathBuf>,
    /// Number of label columns.
    #[arg(long = "labels", value_name = "K", required_if_eq("mode", "classify"))]
    label_count: Option<usize>,
    /// Labels are the leading columns.
    #[arg(long)]
    labels_first: bool,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: mlrank::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: mlrank::Error| e.to_string())
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec = ScenarioSpec::new(args.scenario, args.seed);
    spec.n = args.n.unwrap_or(spec.n);
    spec.p = args.p.unwrap_or(spec.p);
    spec.n_labels = args.label_count.unwrap_or(spec.n_labels);
    spec.gibbs_sweeps = args.sweeps.unwrap_or(spec.gibbs_sweeps);
    fs::create_dir_all(&args.out)?;
    let (ds, relevant) = make_artdata(&spec)?;
    write_csv(&ds, args.out.join("data.csv"))?;
    let lines: String = relevant.iter().map(|j| format!("{}\n", j + 1)).collect();
    fs::write(args.out.join("relevant.txt"), lines)?;
    println!(
        "{}: {} rows, {} features, {} labels -> {}",
        spec.scenario,
        ds.n_rows(),
        ds.n_features(),
        ds.n_labels(),
        args.out.display()
    );
    Ok(())
}

fn rank_cmd(args: &RankArgs) -> Result<()> {
    require_file(&args.data.data)?;
    let ds = args.data.load()?;
    let mut cfg = RankerConfig::new(args.method);
    cfg.bins = args.bins;
    cfg.lambda_factor = args.lambda_factor;
    cfg.lp_min_count = args.lp_min_count;
    cfg.standardize = !args.no_standardize;
    cfg.interaction_form = match args.interaction {
        InteractionArg::PerTerm => InteractionForm::PerTerm,
        InteractionArg::Joint => InteractionForm::Joint,
    };
    let ranking = rank(&ds, &cfg)?;
    ranking.write_csv(ds.feature_names(), &args.out)?;
    let top: Vec<String> = ranking.top(5).iter().map(|&j| ds.feature_names()[j].clone()).collect();
    println!("{}: ranked {} features, top: {}", args.method, ranking.len(), top.join(", "));
    Ok(())
}

fn select_cmd(args: &SelectArgs) -> Result<()> {
    require_file(&args.data.data)?;
    require_file(&args.ranking)?;
    let ds = args.data.load()?;
    let ranking = FeatureRanking::read_csv(&args.ranking, Method::IsingScore)
        .with_context(|| format!("reading {}", args.ranking.display()))?;
    let cfg = SelectionConfig {
        budget_frac: args.budget_frac,
        val_frac: args.val_frac,
        seed: args.seed,
        ..SelectionConfig::default()
    };
    fs::create_dir_all(&args.out)?;
    let result = select_features(&ds, &ranking, &cfg)?;
    write_selection_csv(&result, create(&args.out.join("selection.csv"))?)?;
    let lines: String = result.chosen_subset.iter().map(|j| format!("{}\n", j + 1)).collect();
    fs::write(args.out.join("subset.txt"), lines)?;
    result.model.save(args.out.join("model.json"))?;
    println!(
        "chose {} of at most {} features (validation subset accuracy {})",
        result.chosen_size(),
        result.budget,
        result.prefix_scores[result.chosen_size() - 1]
    );
    Ok(())
}

fn read_relevant(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let j: usize = line
            .parse()
            .ok()
            .filter(|&j| j >= 1)
            .with_context(|| format!("{}:{}: expected a 1-based feature index, found {line:?}", path.display(), i + 1))?;
        out.push(j - 1);
    }
    Ok(out)
}

fn run_name(path: &Path, index: usize) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| (index + 1).to_string())
}

fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    match args.mode {
        Mode::Ranking => {
            let relevant_path = args.relevant.as_deref().expect("required by clap");
            require_file(relevant_path)?;
            for path in &args.ranking {
                require_file(path)?;
            }
            let relevant = read_relevant(relevant_path)?;
            let mut curves = Vec::with_capacity(args.ranking.len());
            for (i, path) in args.ranking.iter().enumerate() {
                let ranking =
                    FeatureRanking::read_csv(path, Method::IsingScore).with_context(|| format!("reading {}", path.display()))?;
                curves.push((run_name(path, i), ranking_roc(&ranking, &relevant)?));
            }
            fs::create_dir_all(&args.out)?;
            write_roc_csv(&curves, create(&args.out.join("roc.csv"))?)?;
            write_auc_csv(&curves, create(&args.out.join("auc.csv"))?)?;
            let mean = curves.iter().map(|c| c.1.auc).sum::<f64>() / curves.len() as f64;
            println!("mean AUC over {} ranking(s): {mean}", curves.len());
        }
        Mode::Classify => {
            let model_path = args.model.as_deref().expect("required by clap");
            let data_path = args.data.as_deref().expect("required by clap");
            require_file(model_path)?;
            require_file(data_path)?;
            let model = ChainModel::load(model_path).with_context(|| format!("reading {}", model_path.display()))?;
            let opts = CsvOptions {
                label_count: args.label_count.expect("required by clap"),
                has_header: !args.no_header,
                labels_first: args.labels_first,
            };
            let ds = load_csv(data_path, &opts).with_context(|| format!("reading {}", data_path.display()))?;
            let pred = predict_chain(&model, ds.features())?;
            let report = classification_metrics(ds.labels(), &pred)?;
            fs::create_dir_all(&args.out)?;
            write_metrics_csv(&report, create(&args.out.join("metrics.csv"))?)?;
            println!(
                "subset accuracy {}, hamming {}, jaccard {}",
                report.subset_accuracy, report.hamming, report.jaccard
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Rank(args) => rank_cmd(args),
        Command::Select(args) => select_cmd(args),
        Command::Evaluate(args) => evaluate_cmd(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
