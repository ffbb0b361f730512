use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kemeny_core::centrality::{Analyzer, PairAnalysis, PairSet};
use kemeny_core::display::{format_f64, normalize, Histogram, Normalization, DEFAULT_BINS};
use kemeny_core::linkpred::{self, Measure, ScoreTable, SortDirection, DEFAULT_ALPHA_C};
use kemeny_core::onepath::{unit_path_mu, OnePathSpec};
use kemeny_core::oracle::{self, DENSE_THRESHOLD};
use kemeny_core::sensitivity::{self, Family};
use kemeny_core::solver::{BackendChoice, BackendKind, SolverOptions};
use kemeny_core::{generators, load_graph, Error, GraphFormat, WeightedGraph};
use serde_json::{json, Value};

mod output;

use output::{Cell, Sink, Table};

#[derive(Parser, Debug)]
#[command(
    name = "kemeny",
    version,
    about = "Kemeny's constant and edge centralities of weighted graphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Graph file (edge list or Matrix Market); node ids are 1-based.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<GraphFormat>,
    /// Output file (a directory for `linkpred --measure all`); stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    output_format: OutputFormat,
    /// Display transform added next to the raw score column.
    #[arg(long, global = true, value_parser = parse_normalization, default_value = "none")]
    normalize: Normalization,
    #[arg(long, global = true, default_value_t = DEFAULT_BINS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    /// Write a histogram of the displayed scores to this CSV file.
    #[arg(long, global = true)]
    histogram: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DENSE_THRESHOLD)]
    dense_threshold: usize,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// GTH-style pivots in the banded factorization.
    #[arg(long, global = true)]
    gth: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kemeny's constant.
    Kemeny {
        #[arg(long, value_enum, default_value_t = Route::Auto)]
        route: Route,
    },
    /// Centrality of every edge.
    Edges {
        /// Shifts for the regularized measures (repeatable).
        #[arg(long = "r", value_parser = parse_positive)]
        r: Vec<f64>,
    },
    /// `mu_bar` for every node pair.
    Pairs {
        /// Only pairs that are not edges.
        #[arg(long)]
        non_edges: bool,
    },
    /// Rank non-edges as candidate links.
    Linkpred {
        /// kd | jaccard | aa | ra | cnc | all
        #[arg(long, default_value = "kd")]
        measure: String,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ALPHA_C)]
        alpha_c: f64,
        #[arg(long, value_enum, default_value_t = Direction::Likely)]
        direction: Direction,
    },
    /// Global sensitivity of the input graph or of graph families.
    Sensitivity {
        /// Comma-separated families: star, path, cycle.
        #[arg(long, value_delimiter = ',')]
        family: Vec<String>,
        /// Sizes as START:STOP:STEP (inclusive).
        #[arg(long = "n")]
        n: Option<String>,
    },
    /// Compare the unit-path closed form with the general pipeline.
    OnepathCheck {
        #[arg(long = "n", default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Solve `S x = e_p - e_q` for one pair.
    Solve {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Route {
    Auto,
    Banded,
    Dense,
    Eigen,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    /// Most likely new link first (low `mu_bar`).
    Likely,
    /// Largest effect on Kemeny's constant first (high `mu_bar`).
    Important,
}

fn parse_format(s: &str) -> Result<GraphFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
    let nums = nums.map_err(|e| format!("bad range '{s}': {e}"))?;
    let (start, stop, step) = match nums[..] {
        [single] => (single, single, 1),
        [start, stop] => (start, stop, 1),
        [start, stop, step] => (start, stop, step),
        _ => return Err(format!("bad range '{s}', expected START:STOP:STEP")),
    };
    if step == 0 || start > stop {
        return Err(format!("empty range '{s}'"));
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::NonPositiveWeight { .. }
            | Error::DuplicateEdge { .. }
            | Error::Disconnected { .. }
            | Error::Io(_) => 2,
            Error::NumericalBreakdown { .. } | Error::Singular(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

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
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs)
        .build()
        .expect("thread pool");
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Kemeny { route } => cmd_kemeny(g, *route),
        Command::Edges { r } => cmd_edges(g, r),
        Command::Pairs { non_edges } => cmd_pairs(g, *non_edges),
        Command::Linkpred {
            measure,
            top,
            alpha_c,
            direction,
        } => cmd_linkpred(g, measure, *top, *alpha_c, *direction),
        Command::Sensitivity { family, n } => cmd_sensitivity(g, family, n.as_deref()),
        Command::OnepathCheck { n, tol } => cmd_onepath_check(g, *n, *tol),
        Command::Solve { p, q } => cmd_solve(g, *p, *q),
    }
}

fn options(g: &Global) -> SolverOptions {
    SolverOptions {
        backend: BackendChoice::Auto,
        gth: g.gth,
        compensated: false,
        dense_threshold: g.dense_threshold,
    }
}

fn read_graph(g: &Global) -> Outcome<WeightedGraph> {
    let path = g
        .input
        .as_deref()
        .ok_or_else(|| usage("this command needs --input PATH"))?;
    let format = g.format.unwrap_or_else(|| guess_format(path));
    let file = File::open(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(load_graph(BufReader::new(file), format)?)
}

fn guess_format(path: &Path) -> GraphFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => GraphFormat::MatrixMarket,
        _ => GraphFormat::EdgeList,
    }
}

fn analyzer(g: &Global) -> Outcome<Analyzer> {
    let graph = read_graph(g)?;
    Ok(Analyzer::new(&graph, options(g))?)
}

fn route_name(kind: BackendKind) -> &'static str {
    match kind {
        BackendKind::Banded => "banded",
        BackendKind::Dense => "dense",
    }
}

fn cmd_kemeny(g: &Global, route: Route) -> Outcome<()> {
    let graph = read_graph(g)?;
    let n = graph.node_count();
    let check_dense = || -> Outcome<()> {
        if n > g.dense_threshold {
            return Err(Error::TooLargeForDense {
                n,
                threshold: g.dense_threshold,
            }
            .into());
        }
        Ok(())
    };
    let (kappa, used) = match route {
        Route::Auto | Route::Banded => {
            let mut opts = options(g);
            if route == Route::Banded {
                opts.backend = BackendChoice::Banded;
            }
            let an = Analyzer::new(&graph, opts)?;
            (an.kemeny(), route_name(an.context().backend_kind()))
        }
        Route::Dense => {
            check_dense()?;
            (oracle::kemeny_via_s(&graph)?, "dense")
        }
        Route::Eigen => {
            check_dense()?;
            (oracle::kemeny_via_eigs(&graph)?, "eigen")
        }
    };
    let mut sink = Sink::open(g.out.as_deref())?;
    match g.output_format {
        OutputFormat::Csv => writeln!(sink, "kappa,route,n\n{},{used},{n}", format_f64(kappa))?,
        OutputFormat::Json => {
            output::write_json(&mut sink, &json!({ "kappa": kappa, "route": used, "n": n }))?
        }
    }
    Ok(sink.finish()?)
}

/// Appends the display column and writes the optional histogram.
fn with_display(g: &Global, table: &mut Table, raw: &[f64], label: &str) -> Outcome<()> {
    let shown = normalize(raw, g.normalize);
    if g.normalize != Normalization::None {
        table.push_column(
            &format!("{label}_display"),
            shown.iter().map(|&x| Cell::from(x)),
        );
    }
    if let Some(path) = &g.histogram {
        let h = Histogram::new(&shown, g.bins as usize)?;
        let mut sink = Sink::open(Some(path))?;
        h.write_csv(&mut sink)?;
        sink.finish()?;
    }
    Ok(())
}

fn ids(pairs: &[PairAnalysis]) -> Table {
    let mut t = Table::default();
    t.push_column("p", pairs.iter().map(|pa| Cell::from(pa.p + 1)));
    t.push_column("q", pairs.iter().map(|pa| Cell::from(pa.q + 1)));
    t
}

fn cmd_edges(g: &Global, shifts: &[f64]) -> Outcome<()> {
    let an = analyzer(g)?;
    let edges = an.batch_edges()?;
    let mut t = ids(&edges);
    t.push_column("weight", edges.iter().map(|pa| Cell::from(pa.a)));
    t.push_column("alpha", edges.iter().map(|pa| Cell::from(pa.alpha)));
    t.push_column("beta", edges.iter().map(|pa| Cell::from(pa.beta)));
    t.push_column("mu", edges.iter().map(|pa| Cell::from(pa.mu())));
    t.push_column("mu_bar", edges.iter().map(|pa| Cell::from(pa.mu_bar())));
    let mut removal = Vec::with_capacity(edges.len());
    for pa in &edges {
        removal.push(output::extended(pa.removal_measure()?));
    }
    t.push_column("c", removal);
    t.push_column("bridge", edges.iter().map(|pa| Cell::from(pa.is_bridge)));
    for &r in shifts {
        let mut mu_r = Vec::with_capacity(edges.len());
        let mut c_r = Vec::with_capacity(edges.len());
        for pa in &edges {
            let reg = an.regularized(pa.p, pa.q, r)?;
            mu_r.push(Cell::from(reg.mu_r));
            c_r.push(reg.c_r.map_or(Cell::Null, Cell::from));
        }
        t.push_column(&format!("mu_r[{r}]"), mu_r);
        t.push_column(&format!("c_r[{r}]"), c_r);
    }
    let raw: Vec<f64> = edges.iter().map(PairAnalysis::mu).collect();
    with_display(g, &mut t, &raw, "mu")?;
    let mut sink = Sink::open(g.out.as_deref())?;
    t.write(&mut sink, g.output_format == OutputFormat::Json)?;
    Ok(sink.finish()?)
}

fn cmd_pairs(g: &Global, non_edges: bool) -> Outcome<()> {
    let an = analyzer(g)?;
    let set = if non_edges {
        PairSet::NonEdges
    } else {
        PairSet::All
    };
    let pairs = an.analyze_pairs(&an.pairs(set))?;
    let mut t = ids(&pairs);
    t.push_column("edge", pairs.iter().map(|pa| Cell::from(pa.is_edge())));
    t.push_column("alpha", pairs.iter().map(|pa| Cell::from(pa.alpha)));
    t.push_column("mu_bar", pairs.iter().map(|pa| Cell::from(pa.mu_bar())));
    let raw: Vec<f64> = pairs.iter().map(PairAnalysis::mu_bar).collect();
    with_display(g, &mut t, &raw, "mu_bar")?;
    let mut sink = Sink::open(g.out.as_deref())?;
    t.write(&mut sink, g.output_format == OutputFormat::Json)?;
    Ok(sink.finish()?)
}

fn ranked_table(g: &Global, table: &ScoreTable, top: Option<usize>) -> Outcome<(Table, bool)> {
    let (entries, truncated) = match top {
        Some(k) => table.top_k(k)?,
        None => (table.ranked(), false),
    };
    let mut t = Table::default();
    t.push_column("rank", (1..=entries.len()).map(Cell::from));
    t.push_column("p", entries.iter().map(|e| Cell::from(e.p + 1)));
    t.push_column("q", entries.iter().map(|e| Cell::from(e.q + 1)));
    t.push_column(table.measure, entries.iter().map(|e| Cell::from(e.score)));
    let raw: Vec<f64> = entries.iter().map(|e| e.score).collect();
    with_display(g, &mut t, &raw, table.measure)?;
    Ok((t, truncated))
}

fn direction_label(d: SortDirection) -> &'static str {
    match d {
        SortDirection::Ascending => "ascending",
        SortDirection::Descending => "descending",
    }
}

fn cmd_linkpred(
    g: &Global,
    measure: &str,
    top: Option<usize>,
    alpha_c: f64,
    direction: Direction,
) -> Outcome<()> {
    if top == Some(0) {
        return Err(usage("--top must be at least 1"));
    }
    let measures: Vec<Measure> = if measure == "all" {
        Measure::all(alpha_c).to_vec()
    } else {
        vec![Measure::parse(measure, alpha_c)?]
    };
    if measures.contains(&Measure::Mu) {
        return Err(usage("mu is defined on edges only; use `edges`"));
    }
    let an = analyzer(g)?;
    let mut tables = Vec::new();
    for &m in &measures {
        let mut t = linkpred::score_non_edges(&an, m)?;
        if m == Measure::KemenyDerivative && direction == Direction::Important {
            t = t.with_direction(SortDirection::Descending);
        }
        tables.push(t);
    }
    let json = g.output_format == OutputFormat::Json;
    let orientation = match direction {
        Direction::Likely => "likely",
        Direction::Important => "important",
    };
    if tables.len() == 1 {
        let (t, truncated) = ranked_table(g, &tables[0], top)?;
        if truncated {
            eprintln!(
                "note: --top exceeds the {} candidate pairs",
                tables[0].len()
            );
        }
        let mut sink = Sink::open(g.out.as_deref())?;
        if !json {
            writeln!(
                sink,
                "# measure {} order {} ({orientation})",
                tables[0].measure,
                direction_label(tables[0].direction)
            )?;
        }
        t.write(&mut sink, json)?;
        return Ok(sink.finish()?);
    }

    let corr = linkpred::correlation_matrix(&tables)?;
    let ext = if json { "json" } else { "csv" };
    let dir = g.out.as_deref();
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut combined = Vec::new();
    for table in &tables {
        let (t, truncated) = ranked_table(g, table, top)?;
        if truncated {
            eprintln!("note: --top exceeds the {} candidate pairs", table.len());
        }
        match dir {
            Some(dir) => {
                let mut sink = Sink::open(Some(&dir.join(format!("{}.{ext}", table.measure))))?;
                t.write(&mut sink, json)?;
                sink.finish()?;
            }
            None => combined.push((table, t)),
        }
    }
    let mut sink = match dir {
        Some(dir) => Sink::open(Some(&dir.join(format!("correlation.{ext}"))))?,
        None => Sink::open(None)?,
    };
    if json {
        let tables_json: Vec<Value> = combined
            .iter()
            .map(|(table, t)| {
                json!({
                    "measure": table.measure,
                    "direction": direction_label(table.direction),
                    "rows": t.to_json(),
                })
            })
            .collect();
        let ids: Vec<&str> = tables.iter().map(|t| t.measure).collect();
        let matrix: Vec<Vec<Value>> = corr
            .iter()
            .map(|row| row.iter().map(|&x| output::number(x)).collect())
            .collect();
        let mut doc = json!({ "measures": ids, "correlation": matrix });
        if !tables_json.is_empty() {
            doc["tables"] = Value::from(tables_json);
        }
        output::write_json(&mut sink, &doc)?;
    } else {
        for (table, t) in &combined {
            writeln!(
                sink,
                "# measure {} order {}",
                table.measure,
                direction_label(table.direction)
            )?;
            t.write(&mut sink, false)?;
            writeln!(sink)?;
        }
        if !combined.is_empty() {
            writeln!(sink, "# correlation")?;
        }
        linkpred::write_correlation_csv(&tables, &corr, &mut sink)?;
    }
    Ok(sink.finish()?)
}

fn cmd_sensitivity(g: &Global, families: &[String], ns: Option<&str>) -> Outcome<()> {
    let json = g.output_format == OutputFormat::Json;
    let mut sink;
    if families.is_empty() {
        let an = analyzer(g)?;
        let r = sensitivity::global_sensitivity(&an)?;
        sink = Sink::open(g.out.as_deref())?;
        if json {
            output::write_json(&mut sink, &serde_json::to_value(r).expect("serializable"))?;
        } else {
            writeln!(sink, "n,trace,total,zeta,zeta_pair_mean")?;
            let cells = [r.trace, r.total, r.zeta_formula, r.zeta_pair_mean].map(format_f64);
            writeln!(sink, "{},{}", r.n, cells.join(","))?;
        }
        return Ok(sink.finish()?);
    }
    let ns = ns.ok_or_else(|| usage("--family needs --n START:STOP:STEP"))?;
    let ns = parse_range(ns).map_err(usage)?;
    let mut points = Vec::new();
    for name in families {
        let family: Family = name.parse()?;
        points.extend(sensitivity::sensitivity_curve(family, &ns, options(g))?);
    }
    sink = Sink::open(g.out.as_deref())?;
    if json {
        output::write_json(
            &mut sink,
            &serde_json::to_value(&points).expect("serializable"),
        )?;
    } else {
        sensitivity::write_curve_csv(&points, &mut sink)?;
    }
    Ok(sink.finish()?)
}

fn cmd_onepath_check(g: &Global, n: usize, tol: f64) -> Outcome<()> {
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let an = Analyzer::new(&generators::path(n), options(g))?;
    let spec = OnePathSpec::unit_path(n)?;
    let chain = spec.mu_all();
    let mut worst: f64 = 0.0;
    let mut worst_chain: f64 = 0.0;
    for pa in an.batch_edges()? {
        let closed = unit_path_mu(n, pa.q);
        worst = worst.max((pa.mu() - closed).abs() / closed);
        worst_chain = worst_chain.max((chain[pa.p] - closed).abs() / closed);
    }
    let mut sink = Sink::open(g.out.as_deref())?;
    if g.output_format == OutputFormat::Json {
        output::write_json(
            &mut sink,
            &json!({ "n": n, "max_rel_deviation": worst, "chain_max_rel_deviation": worst_chain, "tolerance": tol }),
        )?;
    } else {
        writeln!(
            sink,
            "n,max_rel_deviation,chain_max_rel_deviation,tolerance"
        )?;
        let cells = [worst, worst_chain, tol].map(format_f64);
        writeln!(sink, "{n},{}", cells.join(","))?;
    }
    sink.finish()?;
    if worst.max(worst_chain) > tol {
        return Err(Failure {
            code: 3,
            message: format!("deviation {:e} exceeds {tol:e}", worst.max(worst_chain)),
        });
    }
    Ok(())
}

fn cmd_solve(g: &Global, p: usize, q: usize) -> Outcome<()> {
    let an = analyzer(g)?;
    let n = an.graph().node_count();
    for id in [p, q] {
        if id == 0 || id > n {
            return Err(Error::NodeOutOfRange { id, n }.into());
        }
    }
    let x = an.context().solve_pair(p - 1, q - 1)?;
    let pa = an.analyze_pair(p - 1, q - 1)?;
    let mut t = Table::default();
    t.push_column("node", (1..=n).map(Cell::from));
    t.push_column("x", x.iter().map(|&v| Cell::from(v)));
    let mut sink = Sink::open(g.out.as_deref())?;
    if g.output_format == OutputFormat::Json {
        output::write_json(
            &mut sink,
            &json!({ "p": p, "q": q, "alpha": pa.alpha, "beta": pa.beta, "x": x }),
        )?;
    } else {
        writeln!(
            sink,
            "# alpha {} beta {}",
            format_f64(pa.alpha),
            format_f64(pa.beta)
        )?;
        t.write(&mut sink, false)?;
    }
    Ok(sink.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_range("5").unwrap(), vec![5]);
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("1:2:0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
