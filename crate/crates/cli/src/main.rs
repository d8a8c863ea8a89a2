use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ftlabels::codec::{decode_store, encode_store};
use ftlabels::decoder::{query, Answer};
use ftlabels::graph::{EdgeId, Graph, Vertex};
use ftlabels::harness::{self, generate_graph, Profile, SuiteOptions};
use ftlabels::labels::{build_labels, size_report, ELabel, LabelStore, SchemeParams};
use ftlabels::oracle::{compile, decode_oracle, encode_oracle, extend_elabel, fast_query};
use ftlabels::tz::tz_build;
use ftlabels::{rational, Error};

#[derive(Parser)]
#[command(name = "ftlabels", about = "Fault-tolerant approximate distance labels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, default_value_t = 2)]
    f: usize,
    #[arg(long, default_value_t = 2)]
    s_nc: u64,
    #[arg(long, default_value_t = 100)]
    s_ed: u64,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

impl SchemeArgs {
    fn params(&self) -> SchemeParams {
        SchemeParams { f: self.f, s_nc: self.s_nc, s_ed: self.s_ed, d: self.d, ..SchemeParams::default() }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded random graph.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[arg(long, default_value_t = 20)]
        max_m: usize,
        #[arg(long, default_value_t = 8)]
        max_len: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the label store for a graph.
    Build {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Decode a distance estimate from labels alone.
    Query {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_delimiter = ',')]
        failures: Vec<EdgeId>,
        p: Vertex,
        q: Vertex,
    },
    /// Compile an oracle for a failure set.
    Compile {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_delimiter = ',')]
        failures: Vec<EdgeId>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer a query against a compiled oracle.
    Fastquery {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Failure set the caller believes is installed; checked against the oracle.
        #[arg(long, value_delimiter = ',')]
        failures: Option<Vec<EdgeId>>,
        p: Vertex,
        q: Vertex,
    },
    /// Run the validation suite and print a JSON report.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        graphs: usize,
        #[arg(long, default_value_t = 1000)]
        euler: usize,
        #[arg(long, default_value_t = 200)]
        dp: usize,
        #[arg(long, default_value_t = 20)]
        tz_graphs: usize,
        #[arg(long, default_value_t = 50)]
        pack: usize,
        #[arg(long, default_value_t = 3)]
        determinism: usize,
        /// Inject a corrupted label; the suite must then fail.
        #[arg(long)]
        corrupt: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label sizes and query times on seeded graphs.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        graphs: usize,
    },
}

enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGraph(_)
            | Error::InvalidArgument(_)
            | Error::UnknownEdge(_)
            | Error::Parse { .. }
            | Error::Version { .. }
            | Error::Stale(_) => Failure::Usage(e.to_string()),
            _ => Failure::Assertion(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, data).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let text = String::from_utf8(read(path)?).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Graph::from_text(&text)?)
}

fn load_store(path: &Path) -> Result<LabelStore, Failure> {
    Ok(decode_store(&read(path)?)?)
}

fn show(a: Answer, s: u64) -> String {
    match a {
        Answer::Unreachable => "UNREACHABLE".into(),
        Answer::Estimate(d) => format!("{d} (scaled {})", rational::show(&a.scaled(s).unwrap())),
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Gen { seed, max_n, max_m, max_len, out } => {
            let text = generate_graph(seed, max_n, max_m, max_len).to_text();
            match out {
                Some(p) => write(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Cmd::Build { graph, out, scheme } => {
            let g = load_graph(&graph)?;
            let (store, bundles) = build_labels(&g, &scheme.params())?;
            write(&out, &encode_store(&store))?;
            println!("{}", serde_json::to_string_pretty(&size_report(&store, &bundles)).unwrap());
        }
        Cmd::Query { labels, failures, p, q } => {
            let store = load_store(&labels)?;
            let fl = failures.iter().map(|&e| store.elabel(e).map(|l| l.as_ref())).collect::<Result<Vec<&ELabel>, _>>()?;
            let a = query(&store.header, store.vlabel(p)?, store.vlabel(q)?, &fl)?;
            println!("{}", show(a, store.header.stretch()));
        }
        Cmd::Compile { graph, labels, failures, k, out } => {
            let g = load_graph(&graph)?;
            let store = load_store(&labels)?;
            let tz = tz_build(&g, k)?;
            let ext = failures.iter().map(|&e| extend_elabel(&g, &store, &tz, e)).collect::<Result<Vec<_>, _>>()?;
            let d = compile(&store.header, &ext)?;
            write(&out, &encode_oracle(&d))?;
            println!("compiled {} failed edges, {} endpoints, {} table entries", d.failed.len(), d.endpoints.len(), d.table.len());
        }
        Cmd::Fastquery { graph, oracle, k, failures, p, q } => {
            let g = load_graph(&graph)?;
            let d = decode_oracle(&read(&oracle)?)?;
            let tz = tz_build(&g, k)?;
            let n = g.n();
            if p as usize >= n || q as usize >= n {
                return Err(Failure::Usage(format!("vertex out of range 0..{n}")));
            }
            let failed = failures.unwrap_or_else(|| d.failed.clone());
            let a = fast_query(&d, &failed, &tz.labels[p as usize], &tz.labels[q as usize])?;
            match a {
                Answer::Unreachable => println!("UNREACHABLE"),
                Answer::Estimate(x) => println!("{x}"),
            }
        }
        Cmd::Validate { seed, graphs, euler, dp, tz_graphs, pack, determinism, corrupt, out } => {
            let opts = SuiteOptions { seed, graphs, euler, dp, tz_graphs, pack, determinism, corrupt, ..SuiteOptions::default() };
            let report = harness::validate_suite(&Profile::default(), &opts);
            let json = serde_json::to_string_pretty(&report).unwrap();
            match out {
                Some(p) => write(&p, json.as_bytes())?,
                None => println!("{json}"),
            }
            for c in &report.checks {
                eprintln!("[{}] {:>2} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
            }
            if !report.pass {
                return Err(Failure::Assertion("validation failed".into()));
            }
        }
        Cmd::Bench { seed, graphs } => bench(seed, graphs)?,
    }
    Ok(())
}

fn bench(seed: u64, graphs: usize) -> Result<(), Failure> {
    let profile = Profile::default();
    println!(
        "{:>6} {:>3} {:>3} {:>9} {:>10} {:>10} {:>10} {:>8} {:>10}",
        "seed", "n", "m", "build_ms", "vlabel_max", "elabel_max", "nontrivial", "queries", "us/query"
    );
    for s in seed..seed + graphs as u64 {
        let inst = harness::instance(s, &profile);
        let t = Instant::now();
        let (store, bundles) = build_labels(&inst.graph, &profile.scheme())?;
        let build = t.elapsed();
        let sz = size_report(&store, &bundles);
        let t = Instant::now();
        let mut count = 0usize;
        for fs in &inst.failures {
            let fl = fs.iter().map(|&e| store.elabel(e).map(|l| l.as_ref())).collect::<Result<Vec<_>, _>>()?;
            for &(p, q) in &inst.pairs {
                query(&store.header, store.vlabel(p)?, store.vlabel(q)?, &fl)?;
                count += 1;
            }
        }
        let per = t.elapsed().as_secs_f64() * 1e6 / count.max(1) as f64;
        println!(
            "{:>6} {:>3} {:>3} {:>9} {:>10} {:>10} {:>10} {:>8} {:>10.1}",
            s,
            inst.graph.n(),
            inst.graph.m(),
            build.as_millis(),
            sz.vlabel_bytes_max,
            sz.elabel_bytes_max,
            sz.nontrivial_elabels,
            count,
            per
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
