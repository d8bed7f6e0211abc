use std::collections::HashMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polarnet::annotate::{LabelKind, LabelStore, StanceLabel, StanceNames, Topic};
use polarnet::crosstopic::{
    alignment_matrix, grouping_from_partition, grouping_from_stances, jaccard_matrix, joint_stance_table,
    topic_hypergraph, GroupingSource, NmiNormalization,
};
use polarnet::graph::{load_network, network_stats, Interaction, TimeWindow, TopicNetwork};
use polarnet::groups::{
    content_groups, detect_structural_groups, group_composition, read_partition, write_partition, write_sidecar,
    DetectOptions,
};
use polarnet::ingest::{
    filter_corpus, firehose_outages_2025, sample_corpus, ActionType, ActivityAccumulator, EventCorpus, FilterOptions,
    PostRecord, SamplingMode, StatsOptions,
};
use polarnet::metrics::{metric_report, pairwise_aei, structural_report, GroupedGraphView, MetricOptions};
use polarnet::pipeline::{
    build_networks, expand_inputs, fmt_count, fmt_index, load_manifests, make_provider, read_event_files, read_jsonl,
    render_report, run_pipeline, save_networks, topic_index, write_content_groups, write_fixture, write_json,
    Annotator, Corpus, PipelineConfig, Stage, StanceInputs, FIXTURE_SEED,
};

const DEFAULT_WINDOW: &str = "2024-12:2025-05";

/// Polarization measurement over interaction-event dumps.
#[derive(Parser)]
#[command(name = "polarnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated subset of ingest,annotate,graph,groups,metrics,crosstopic,report.
        #[arg(long)]
        stages: Option<String>,
        /// Overrides the configured work directory.
        #[arg(long)]
        workdir: Option<PathBuf>,
    },
    /// Render the report bundle of a finished run into a directory.
    Report {
        #[arg(long, conflicts_with = "run_dir", required_unless_present = "run_dir")]
        config: Option<PathBuf>,
        #[arg(long)]
        run_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic event fixture with its ground truth and config.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = FIXTURE_SEED)]
        seed: u64,
    },
    /// Event dumps: activity statistics, corpus filtering and sampling.
    #[command(subcommand)]
    Ingest(IngestCmd),
    /// Theme, topic and stance labels from an annotation provider.
    #[command(subcommand)]
    Annotate(AnnotateCmd),
    /// Topic interaction networks.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Structural and stance-based groups.
    #[command(subcommand)]
    Groups(GroupsCmd),
    /// Polarization indices per topic.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Overlap, hypergraph, issue alignment and joint stance tables across topics.
    Crosstopic(CrosstopicCmd),
}

#[derive(Subcommand)]
enum IngestCmd {
    /// Daily activity statistics.
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Inclusive collection window, `YYYY-MM-DD:YYYY-MM-DD`.
        #[arg(long)]
        window: Option<TimeWindow>,
        #[arg(long, value_enum, default_value_t = DowntimeArg::None)]
        downtime: DowntimeArg,
    },
    /// Extract the post corpus and interaction records, keeping eligible posts.
    Filter {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_reposts: u64,
        #[arg(long, default_value_t = 5)]
        min_chars: usize,
        #[arg(long, default_value = "en")]
        lang: String,
    },
    /// Sample the posts of a corpus directory.
    Sample {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.03)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        /// Allocate the sample across creation days proportionally.
        #[arg(long)]
        stratified: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DowntimeArg {
    None,
    Firehose2025,
}

#[derive(Args)]
struct ProviderArgs {
    /// `mock` or an endpoint URL.
    #[arg(long, env = "POLARNET_PROVIDER_URL", default_value = "mock")]
    provider: String,
    #[arg(long, default_value_t = 8)]
    in_flight: usize,
    #[arg(long, default_value_t = 3)]
    max_attempts: usize,
    #[arg(long, default_value_t = 30)]
    timeout_secs: u64,
}

#[derive(Subcommand)]
enum AnnotateCmd {
    /// Theme label per post.
    Themes {
        /// Corpus directory.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Topic label per political post.
    Topics {
        #[arg(long)]
        input: PathBuf,
        /// Theme labels; defaults to `<out>/themes.jsonl`.
        #[arg(long)]
        themes: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stance label per topic participant.
    Stances {
        #[arg(long)]
        input: PathBuf,
        /// Topic labels; defaults to `<out>/topics.jsonl`.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        topics: String,
        #[arg(long, default_value = DEFAULT_WINDOW)]
        window: TimeWindow,
        #[arg(long, default_value_t = 10)]
        sample: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NetworkArgs {
    /// Network root written by `graph build`.
    #[arg(long)]
    networks: PathBuf,
    #[arg(long, default_value = DEFAULT_WINDOW)]
    window: TimeWindow,
}

impl NetworkArgs {
    fn load(&self, topic: Topic) -> Result<TopicNetwork> {
        Ok(load_network(&self.networks, topic, &self.window, Interaction::Reposts)?)
    }
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Build topic networks from a corpus and its topic labels.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Topic label file.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "all")]
        topics: String,
        /// Layers to write: `all` or a comma-separated list of reposts, likes, follows, blocks.
        #[arg(long, default_value = "reposts")]
        tau: String,
        #[arg(long, default_value = DEFAULT_WINDOW)]
        window: TimeWindow,
        #[arg(long)]
        include_isolated: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Node and edge counts of stored networks.
    Stats {
        #[arg(long)]
        networks: PathBuf,
        #[arg(long, default_value = "all")]
        topics: String,
        #[arg(long, default_value = "reposts")]
        tau: String,
        #[arg(long, default_value = DEFAULT_WINDOW)]
        window: TimeWindow,
    },
}

#[derive(Subcommand)]
enum GroupsCmd {
    /// Detect structural groups in a topic's repost network.
    Structural {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long)]
        topic: Topic,
        #[arg(long, default_value_t = 5)]
        max_groups: usize,
        #[arg(long, default_value_t = 15)]
        runs: usize,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        simple_graph: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Group a topic's network users by stance label.
    Content {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long)]
        topic: Topic,
        #[arg(long)]
        stances: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stance composition of each structural group.
    Composition {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long)]
        topic: Topic,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        stances: PathBuf,
        #[arg(long)]
        simple_graph: bool,
        /// Writes JSON here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MetricsCmd {
    /// Stance and structural polarization per topic.
    Report {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long, default_value = "all")]
        topics: String,
        #[arg(long)]
        stances: PathBuf,
        /// Directory of `<topic>.tsv` partitions from `groups structural`.
        #[arg(long)]
        partitions: Option<PathBuf>,
        #[arg(long)]
        include_neutral: bool,
        #[arg(long)]
        three_group_simpson: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CrosstopicCmd {
    #[arg(value_enum)]
    what: CrossWhat,
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value = "all")]
    topics: String,
    #[arg(long, value_enum, default_value_t = GroupingArg::Content)]
    grouping: GroupingArg,
    /// Stance labels, for content alignment and joint tables.
    #[arg(long)]
    stances: Option<PathBuf>,
    /// Partition directory, for structural alignment.
    #[arg(long)]
    partitions: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    /// Keep pairs with overlap equal to the threshold.
    #[arg(long)]
    inclusive: bool,
    #[arg(long, value_enum, default_value_t = NmiArg::Arithmetic)]
    nmi: NmiArg,
    /// Drop neutral users from content alignment and keep only the two camps.
    #[arg(long)]
    exclude_neutral: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrossWhat {
    Overlap,
    Hypergraph,
    Alignment,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupingArg {
    Content,
    Structural,
}

#[derive(Clone, Copy, ValueEnum)]
enum NmiArg {
    Arithmetic,
    Geometric,
    Min,
    Max,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<polarnet::Error>() {
                Some(polarnet::Error::Config(_)) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, stages, workdir } => run(&config, stages.as_deref(), workdir),
        Command::Report { config, run_dir, out } => report(config, run_dir, &out),
        Command::Fixture { out, seed } => {
            write_fixture(&out, seed)?;
            println!("wrote fixture (seed {seed}) to {}", out.display());
            Ok(())
        }
        Command::Ingest(c) => ingest(c),
        Command::Annotate(c) => annotate(c),
        Command::Graph(c) => graph(c),
        Command::Groups(c) => groups(c),
        Command::Metrics(c) => metrics(c),
        Command::Crosstopic(c) => crosstopic(c),
    }
}

fn parse_topics(s: &str) -> Result<Vec<Topic>> {
    if s == "all" {
        return Ok(Topic::PARENTS.to_vec());
    }
    s.split(',').map(|t| Ok(Topic::parse(t.trim())?)).collect()
}

fn parse_layers(s: &str) -> Result<Vec<Interaction>> {
    if s == "all" {
        return Ok(Interaction::ALL.to_vec());
    }
    s.split(',').map(|t| Ok(t.trim().parse::<Interaction>()?)).collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn load_stances(path: &Path) -> Result<Vec<StanceLabel>> {
    Ok(LabelStore::load(path, LabelKind::Stance)?.stances())
}

fn input_files(patterns: &[String]) -> Result<Vec<PathBuf>> {
    Ok(expand_inputs(Path::new("."), patterns)?)
}

// ------------------------------------------------------------ pipeline

fn run(config: &Path, stages: Option<&str>, workdir: Option<PathBuf>) -> Result<()> {
    let mut config = PipelineConfig::load(config)?;
    if let Some(w) = workdir {
        config.set_workdir(w);
    }
    let stages = stages.map(Stage::parse_list).transpose()?;
    let manifests = run_pipeline(&config, stages.as_deref())?;
    for m in &manifests {
        let status = if m.cached { "cached" } else { "ran" };
        println!("{:<11} {:<7} {:>8} ms  {} outputs", m.stage.as_str(), status, m.wall_time_ms, m.outputs.len());
    }
    println!("run directory: {}", config.run_dir().display());
    Ok(())
}

fn report(config: Option<PathBuf>, run_dir: Option<PathBuf>, out: &Path) -> Result<()> {
    let run_dir = match (config, run_dir) {
        (_, Some(d)) => d,
        (Some(c), None) => PipelineConfig::load(&c)?.run_dir(),
        (None, None) => unreachable!("clap requires one of --config and --run-dir"),
    };
    let manifests = load_manifests(&run_dir)?;
    if manifests.is_empty() {
        bail!(polarnet::Error::MissingArtifact {
            upstream: "ingest".into(),
            message: format!("no stage manifests under {}", run_dir.display()),
        });
    }
    for m in &manifests {
        m.verify_outputs(&run_dir)?;
    }
    let bundle = render_report(&run_dir, &manifests)?;
    bundle.write_to(out)?;
    println!("wrote {} report files to {}", bundle.files.len(), out.display());
    Ok(())
}

// -------------------------------------------------------------- ingest

fn ingest(cmd: IngestCmd) -> Result<()> {
    match cmd {
        IngestCmd::Stats { input, out, window, downtime } => {
            let load = read_event_files(&input_files(&input)?)?;
            let mut acc = ActivityAccumulator::new();
            for ev in &load.events {
                acc.push(ev);
            }
            let options = StatsOptions {
                window: window.map(|w| (w.first_day(), w.last_day())),
                downtime: match downtime {
                    DowntimeArg::None => Vec::new(),
                    DowntimeArg::Firehose2025 => firehose_outages_2025(),
                },
            };
            let stats = acc.finish(&options);
            create_dir(&out)?;
            write_json(&out.join("activity.json"), &stats)?;
            let daily = out.join("daily.csv");
            stats.write_daily_csv(File::create(&daily).with_context(|| daily.display().to_string())?)?;
            println!("{} events, {} malformed lines", load.events.len(), load.malformed);
            println!(
                "{:<9} {:>16} {:>14} {:>18} {:>16}",
                "action", "daily actions", "daily authors", "total actions", "total authors"
            );
            for a in ActionType::ALL {
                let s = stats.get(a);
                println!(
                    "{:<9} {:>16} {:>14} {:>18} {:>16}",
                    a.as_str(),
                    fmt_count(s.daily_average_actions.round() as u64),
                    fmt_count(s.daily_average_authors.round() as u64),
                    fmt_count(s.total_actions),
                    fmt_count(s.total_author_days)
                );
            }
            Ok(())
        }
        IngestCmd::Filter { input, out, min_reposts, min_chars, lang } => {
            let load = read_event_files(&input_files(&input)?)?;
            let corpus = EventCorpus::from_events(&load.events);
            let options = FilterOptions { min_reposts, min_chars, lang };
            let posts = filter_corpus(&corpus.posts, &options);
            println!("{} of {} posts kept", posts.len(), corpus.posts.len());
            Corpus {
                posts,
                reposts: corpus.reposts,
                likes: corpus.likes,
                follows: corpus.follows,
                blocks: corpus.blocks,
            }
            .save(&out)?;
            Ok(())
        }
        IngestCmd::Sample { corpus, out, fraction, seed, stratified } => {
            let mut c = Corpus::load(&corpus)?;
            let mode = if stratified { SamplingMode::StratifiedByDay } else { SamplingMode::Uniform };
            let n = c.posts.len();
            c.posts = sample_corpus(&c.posts, fraction, seed, mode)?;
            println!("sampled {} of {n} posts", c.posts.len());
            c.save(&out)?;
            Ok(())
        }
    }
}

// ------------------------------------------------------------ annotate

fn annotate(cmd: AnnotateCmd) -> Result<()> {
    let report_failures = |a: &Annotator, out: &Path| -> Result<()> {
        if !a.failures.is_empty() {
            eprintln!("{} items skipped; see {}", a.failures.len(), out.join("failures.json").display());
        }
        write_json(&out.join("failures.json"), &a.failures)?;
        Ok(())
    };
    match cmd {
        AnnotateCmd::Themes { input, provider: p, out } => {
            let posts: Vec<PostRecord> = read_jsonl(&input.join("posts.jsonl"))?;
            let provider = make_provider(&p.provider, Duration::from_secs(p.timeout_secs))?;
            let mut a = Annotator::new(provider.as_ref(), p.max_attempts, p.in_flight);
            let themes = a.themes(&posts)?;
            create_dir(&out)?;
            themes.save(&out.join("themes.jsonl"))?;
            println!("{} theme labels", themes.len());
            report_failures(&a, &out)
        }
        AnnotateCmd::Topics { input, themes, provider: p, out } => {
            let posts: Vec<PostRecord> = read_jsonl(&input.join("posts.jsonl"))?;
            let themes = themes.unwrap_or_else(|| out.join("themes.jsonl"));
            let theme_labels = LabelStore::load(&themes, LabelKind::Theme)?.themes();
            let provider = make_provider(&p.provider, Duration::from_secs(p.timeout_secs))?;
            let mut a = Annotator::new(provider.as_ref(), p.max_attempts, p.in_flight);
            let topics = a.topics(&posts, &theme_labels)?;
            create_dir(&out)?;
            topics.save(&out.join("topics.jsonl"))?;
            println!("{} topic labels", topics.len());
            report_failures(&a, &out)
        }
        AnnotateCmd::Stances { input, labels, topics, window, sample, seed, provider: p, out } => {
            let corpus = Corpus::load(&input)?;
            let topic_of = topic_index(&labels.unwrap_or_else(|| out.join("topics.jsonl")))?;
            let topics = parse_topics(&topics)?;
            let provider = make_provider(&p.provider, Duration::from_secs(p.timeout_secs))?;
            let mut a = Annotator::new(provider.as_ref(), p.max_attempts, p.in_flight);
            let inputs = StanceInputs {
                posts: &corpus.posts,
                reposts: &corpus.reposts,
                topic_of: &topic_of,
                topics: &topics,
                window,
                sample,
                seed,
            };
            let stances = a.stances(&inputs, StanceNames::defaults)?;
            create_dir(&out)?;
            stances.save(&out.join("stances.jsonl"))?;
            println!("{} stance labels", stances.len());
            report_failures(&a, &out)
        }
    }
}

// --------------------------------------------------------------- graph

fn graph(cmd: GraphCmd) -> Result<()> {
    match cmd {
        GraphCmd::Build { corpus, labels, topics, tau, window, include_isolated, out } => {
            let corpus = Corpus::load(&corpus)?;
            let topic_of: HashMap<String, Topic> = topic_index(&labels)?;
            let topics = parse_topics(&topics)?;
            let layers = parse_layers(&tau)?;
            let bundles = build_networks(&corpus, &topic_of, &topics, window, include_isolated);
            create_dir(&out)?;
            if layers.len() == Interaction::ALL.len() {
                let summaries = save_networks(&out, &bundles)?;
                write_json(&out.join("summary.json"), &summaries)?;
            } else {
                for (_, b) in &bundles {
                    for &tau in &layers {
                        polarnet::graph::save_network(&out, b.layer(tau))?;
                    }
                }
            }
            for (dangling, b) in &bundles {
                for &tau in &layers {
                    let s = network_stats(b.layer(tau));
                    println!(
                        "{:<17} {:<8} {:>8} nodes {:>9} edges  avg degree {:.2}  ({dangling} dangling)",
                        b.topic.slug(),
                        tau.as_str(),
                        s.nodes,
                        s.edges,
                        s.average_degree
                    );
                }
            }
            Ok(())
        }
        GraphCmd::Stats { networks, topics, tau, window } => {
            println!("{:<17} {:<8} {:>10} {:>12} {:>10}", "topic", "layer", "|V|", "|E|", "<k>");
            for topic in parse_topics(&topics)? {
                for t in parse_layers(&tau)? {
                    let g = load_network(&networks, topic, &window, t)?;
                    let s = network_stats(&g);
                    println!(
                        "{:<17} {:<8} {:>10} {:>12} {:>10.2}",
                        topic.slug(),
                        t.as_str(),
                        fmt_count(s.nodes),
                        fmt_count(s.edges),
                        s.average_degree
                    );
                }
            }
            Ok(())
        }
    }
}

// -------------------------------------------------------------- groups

fn groups(cmd: GroupsCmd) -> Result<()> {
    match cmd {
        GroupsCmd::Structural { net, topic, max_groups, runs, iters, seed, simple_graph, out } => {
            let g = net.load(topic)?;
            let opts = DetectOptions { max_groups, runs, iters, seed, simple_graph };
            let found = detect_structural_groups(&g, &opts)?;
            create_dir(&out)?;
            write_partition(&out.join(format!("{}.tsv", topic.slug())), &g, &found.partition)?;
            write_sidecar(&out.join(format!("{}.json", topic.slug())), &found)?;
            println!(
                "{}: {} groups, description length {:.2} (single block {:.2})",
                topic.slug(),
                found.partition.blocks,
                found.partition.dl,
                found.single_block_dl
            );
            Ok(())
        }
        GroupsCmd::Content { net, topic, stances, out } => {
            let g = net.load(topic)?;
            let s = content_groups(&load_stances(&stances)?, &g)?;
            create_dir(&out)?;
            write_content_groups(&out.join(format!("{}.tsv", topic.slug())), &g, &s)?;
            println!("{}: {:.1}% of {} users labelled", topic.slug(), 100.0 * s.coverage, g.node_count());
            Ok(())
        }
        GroupsCmd::Composition { net, topic, partition, stances, simple_graph, out } => {
            let g = net.load(topic)?;
            let p = read_partition(&partition, &g, simple_graph)?;
            let s = content_groups(&load_stances(&stances)?, &g)?;
            let comp = group_composition(&p, &s)?;
            match out {
                Some(path) => write_json(&path, &comp)?,
                None => println!("{}", serde_json::to_string_pretty(&comp)?),
            }
            Ok(())
        }
    }
}

// ------------------------------------------------------------- metrics

fn metrics(cmd: MetricsCmd) -> Result<()> {
    let MetricsCmd::Report { net, topics, stances, partitions, include_neutral, three_group_simpson, out } = cmd;
    let stances = load_stances(&stances)?;
    let opts = MetricOptions { include_neutral, three_group_simpson };
    let mut stance_rows = Vec::new();
    let mut structural_rows = Vec::new();
    println!(
        "{:<17} {:>5} {:>5} {:>5} {:>7} {:>7} {:>6} {:>6} {:>6}  dominant",
        "topic", "%A", "%N", "%B", "simpson", "assort", "aei", "col A", "col B"
    );
    for topic in parse_topics(&topics)? {
        let g = net.load(topic)?;
        let s = content_groups(&stances, &g)?;
        let names = StanceNames::defaults(topic);
        match metric_report(&g, &s, &names, &opts) {
            Ok(r) => {
                println!(
                    "{:<17} {:>5} {:>5} {:>5} {:>7} {:>7} {:>6} {:>6} {:>6}  {}",
                    topic.slug(),
                    fmt_index(Some(r.fraction_a)),
                    fmt_index(Some(r.fraction_neutral)),
                    fmt_index(Some(r.fraction_b)),
                    fmt_index(r.simpson),
                    fmt_index(r.assortativity),
                    fmt_index(r.aei),
                    fmt_index(r.coleman_a),
                    fmt_index(r.coleman_b),
                    r.dominant_stance
                );
                stance_rows.push(r);
            }
            Err(polarnet::Error::Precondition(m)) => println!("{:<17} skipped: {m}", topic.slug()),
            Err(e) => return Err(e.into()),
        }
        if let Some(dir) = &partitions {
            let path = dir.join(format!("{}.tsv", topic.slug()));
            if path.exists() {
                let p = read_partition(&path, &g, false)?;
                let r = structural_report(&g, &p, &s, &names)?;
                println!(
                    "{:<17} {} groups, AEI mean {} max {} min {}",
                    "",
                    r.groups,
                    fmt_index(r.mean_aei),
                    fmt_index(r.max_aei),
                    fmt_index(r.min_aei)
                );
                if let Some(out) = &out {
                    create_dir(out)?;
                    let pairs = pairwise_aei(&GroupedGraphView::from_partition(&g, &p)?)?;
                    fs::write(out.join(format!("pairwise_{}.csv", topic.slug())), pairs.to_csv())?;
                }
                structural_rows.push(r);
            }
        }
    }
    if let Some(out) = out {
        create_dir(&out)?;
        write_json(&out.join("stance.json"), &stance_rows)?;
        write_json(&out.join("structural.json"), &structural_rows)?;
    }
    Ok(())
}

// ---------------------------------------------------------- crosstopic

fn crosstopic(c: CrosstopicCmd) -> Result<()> {
    let topics = parse_topics(&c.topics)?;
    create_dir(&c.out)?;
    let need_stances = || -> Result<Vec<StanceLabel>> {
        match &c.stances {
            Some(p) => load_stances(p),
            None => bail!(polarnet::Error::Config("--stances is required here".into())),
        }
    };
    if let CrossWhat::Joint = c.what {
        let stances = need_stances()?;
        let mut tables = Vec::new();
        for (i, &x) in topics.iter().enumerate() {
            for &y in &topics[i + 1..] {
                if let Some(t) = joint_stance_table(&stances, x, &stances, y)? {
                    let name = format!("{}__{}.csv", x.slug(), y.slug());
                    fs::write(c.out.join(&name), t.to_csv(&StanceNames::defaults(x), &StanceNames::defaults(y)))?;
                    println!("{name}: {} users", t.users);
                    tables.push(t);
                }
            }
        }
        write_json(&c.out.join("joint.json"), &tables)?;
        return Ok(());
    }

    let nets: Vec<TopicNetwork> = topics
        .iter()
        .map(|&t| c.net.load(t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|g| g.node_count() > 0)
        .collect();
    if nets.len() < 2 {
        bail!(polarnet::Error::Precondition("need at least two non-empty topic networks".into()));
    }
    let labels: Vec<String> = nets.iter().map(|g| g.topic.slug().to_string()).collect();
    match c.what {
        CrossWhat::Overlap | CrossWhat::Hypergraph => {
            let m = jaccard_matrix(&nets.iter().collect::<Vec<_>>())?;
            fs::write(c.out.join("overlap.csv"), m.to_csv())?;
            if let CrossWhat::Hypergraph = c.what {
                let h = topic_hypergraph(&m, c.threshold, !c.inclusive)?;
                write_json(&c.out.join("hypergraph.json"), &h)?;
                for e in h.named_hyperedges() {
                    println!("{{{}}}", e.join(", "));
                }
            } else {
                print!("{}", m.to_csv());
            }
        }
        CrossWhat::Alignment => {
            let norm = match c.nmi {
                NmiArg::Arithmetic => NmiNormalization::Arithmetic,
                NmiArg::Geometric => NmiNormalization::Geometric,
                NmiArg::Min => NmiNormalization::Min,
                NmiArg::Max => NmiNormalization::Max,
            };
            let (source, groupings) = match c.grouping {
                GroupingArg::Content => {
                    let stances = need_stances()?;
                    let gs = nets
                        .iter()
                        .map(|g| Ok(grouping_from_stances(g, &content_groups(&stances, g)?, !c.exclude_neutral)))
                        .collect::<Result<Vec<_>>>()?;
                    (GroupingSource::Content, gs)
                }
                GroupingArg::Structural => {
                    let Some(dir) = &c.partitions else {
                        bail!(polarnet::Error::Config("--partitions is required for structural alignment".into()));
                    };
                    let gs = nets
                        .iter()
                        .map(|g| {
                            let p = read_partition(&dir.join(format!("{}.tsv", g.topic.slug())), g, false)?;
                            Ok(grouping_from_partition(g, &p))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (GroupingSource::Structural, gs)
                }
            };
            let m = alignment_matrix(labels, &groupings, source, norm)?;
            fs::write(c.out.join("alignment.csv"), m.to_csv())?;
            print!("{}", m.to_csv());
        }
        CrossWhat::Joint => unreachable!("handled above"),
    }
    Ok(())
}
