use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hsp_bench::output::{self, write_plot};
use hsp_bench::table_io;
use hsp_bench::{aggregate, compare_sets, paired_sign_test, Algorithm, Bench, BenchConfig};

#[derive(Parser)]
#[command(name = "hsp-bench", version, about = "Benchmarks for hybrid stochastic planning on the routing domain")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// First scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u32>,
    /// Episode set, 1-based.
    #[arg(long)]
    set: Option<usize>,
    /// Comma-separated algorithms, e.g. `hsp-0.75,uct1,rhc`.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    /// Output directory (or file, for single-artifact commands).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    table_dir: Option<PathBuf>,
    /// Fail instead of building a missing value table.
    #[arg(long)]
    no_preprocess: bool,
    /// Skip wall-clock timing so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn config(&self) -> Result<BenchConfig> {
        let mut cfg = match &self.config {
            Some(p) => BenchConfig::load(p)?,
            None => BenchConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.episodes {
            cfg.episodes = v;
        }
        if let Some(v) = self.set {
            cfg.set = v;
        }
        if let Some(v) = &self.algo {
            cfg.algorithms = v.clone();
        }
        if let Some(v) = self.scale {
            cfg.scale = v;
        }
        if let Some(v) = &self.table_dir {
            cfg.output.table_dir = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.output.dir = v.clone();
        }
        if self.no_preprocess {
            cfg.output.auto_preprocess = false;
        }
        if self.no_timing {
            cfg.output.timing = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build (or verify) the Move value table.
    Preprocess(Common),
    /// Write the scenario of one episode as JSON.
    Scenario {
        #[command(flatten)]
        common: Common,
        /// Episode index within the set.
        #[arg(long, default_value_t = 0)]
        episode: u32,
    },
    /// Run every configured algorithm on the selected set.
    Run(Common),
    /// Relative cost change per algorithm between two episode CSVs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one episode with one algorithm and write its step log (JSONL).
    Episode {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        episode: u32,
    },
}

fn bench(cfg: BenchConfig) -> Result<Bench> {
    let (model, table, path) = table_io::load_or_build(&cfg.output.table_dir, &cfg.dreamr, &cfg.table, cfg.output.auto_preprocess)?;
    eprintln!("value table: {}", path.display());
    Ok(Bench::new(cfg, model, table))
}

fn run(cfg: BenchConfig) -> Result<()> {
    let algos = cfg.algorithm_list()?;
    let set_no = cfg.set;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let logs = cfg.output.step_logs;
    let bench = bench(cfg)?;
    let runs = bench.run_set(set_no, &algos)?;
    let rows: Vec<_> = runs.iter().map(|r| r.row.clone()).collect();

    let csv = dir.join(format!("episodes_set{set_no}.csv"));
    output::save_rows(&csv, &rows)?;
    let report = aggregate(&rows);
    fs::write(dir.join(format!("report_set{set_no}.json")), serde_json::to_string_pretty(&report)? + "\n")?;
    let (cost, switches) = output::report_plots(&report);
    write_plot(File::create(dir.join(format!("cost_set{set_no}.dat")))?, &cost)?;
    write_plot(File::create(dir.join(format!("switches_set{set_no}.dat")))?, &switches)?;
    if logs {
        let log_dir = dir.join(format!("logs_set{set_no}"));
        fs::create_dir_all(&log_dir)?;
        for r in &runs {
            let f = File::create(log_dir.join(format!("{}_{:04}.jsonl", r.row.algorithm, r.row.episode)))?;
            output::write_step_log(f, &r.row, &r.log)?;
        }
    }

    print!("{}", report.table());
    // Paired sign tests of each HSP variant against every baseline.
    for h in algos.iter().filter(|a| matches!(a, Algorithm::Hsp { .. })) {
        for b in algos.iter().filter(|a| !matches!(a, Algorithm::Hsp { .. })) {
            let t = paired_sign_test(&rows, &h.name(), &b.name())?;
            println!(
                "{} < {}: {} wins, {} losses, {} ties, p = {:.3e}",
                h.name(),
                b.name(),
                t.wins,
                t.losses,
                t.ties,
                t.p_value
            );
        }
    }
    eprintln!("wrote {}", csv.display());
    Ok(())
}

fn compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<()> {
    let ra = output::load_rows(a).with_context(|| format!("reading {}", a.display()))?;
    let rb = output::load_rows(b).with_context(|| format!("reading {}", b.display()))?;
    let rows = compare_sets(&ra, &rb)?;
    println!("{:<10} {:>10} {:>10} {:>10}", "algorithm", "mean a", "mean b", "decrease");
    for c in &rows {
        println!(
            "{:<10} {:>10.2} {:>10.2} {:>9.2}%",
            c.algorithm,
            c.mean_a,
            c.mean_b,
            100.0 * c.relative_decrease
        );
    }
    if let Some(out) = out {
        write_plot(File::create(out)?, &output::comparison_plot(&rows))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Preprocess(c) => {
            let cfg = c.config()?;
            let bench = bench(cfg)?;
            let t = bench.table();
            println!("K = {}, {} grid points, φ = {}", t.horizon, t.num_points(), t.phi);
        }
        Cmd::Scenario { common, episode } => {
            let cfg = common.config()?;
            let Some(out) = common.out.clone() else {
                bail!("--out <file.json> is required");
            };
            let sc = hsp_core::dreamr::generate_scenario(&cfg.scenario_config(cfg.active_set()), &cfg.dreamr, cfg.seed + episode as u64);
            output::save_scenario(&out, &sc)?;
        }
        Cmd::Run(c) => run(c.config()?)?,
        Cmd::Compare { a, b, out } => compare(&a, &b, out.as_deref())?,
        Cmd::Episode { common, episode } => {
            let mut cfg = common.config()?;
            let algos = cfg.algorithm_list()?;
            let [algo] = algos.as_slice() else {
                bail!("--algo must name exactly one algorithm");
            };
            let Some(out) = common.out.clone() else {
                bail!("--out <file.jsonl> is required");
            };
            cfg.output.step_logs = true;
            let set_no = cfg.set;
            let bench = bench(cfg)?;
            let set = &bench.cfg.sets[set_no - 1];
            let r = bench.run_one(set_no, set, &bench.arrival(set), algo, episode)?;
            output::write_step_log(File::create(&out)?, &r.row, &r.log)?;
            println!("{}", serde_json::to_string(&r.row)?);
        }
    }
    Ok(())
}
