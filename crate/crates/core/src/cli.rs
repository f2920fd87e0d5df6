//! The `dunion` command-line front end.
//!
//! Graphs travel as graph JSON, so commands compose over pipes: any
//! `--graph` left out or given as `-` is read from standard input. Exit
//! status is 0 on success, 1 when a check finds its property false, and 2
//! on unusable input.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{analyze, isomorphic};
use crate::digraph::{
    cayley_zn, complete_with_loops, de_bruijn, directed_cycle, random_regular, Digraph,
};
use crate::factorization::{cycle_factorization, factor_from_matrices, trivial, Factorization};
use crate::formats::{
    copy_labels_for, de_bruijn_labels, digraph_to_csv, export_dot, factorization_from_json,
    factorization_to_json, graph_from_json, graph_to_json, matrix_from_csv, matrix_to_csv,
};
use crate::matrix::{is_unitary, rho_reg_zk, DenseMatrix, UNITARY_TOL};
use crate::symbolic::{
    iterated_line_digraph, partition_from_factorization, state_split, ArcPartition, SplitMode,
};
use crate::transforms::{
    diagonal_union_depth, diagonal_union_depth_matrix, unitary_weighting, TransformError,
};

/// Entries at or below this magnitude are omitted from matrix CSV output.
const CSV_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "dunion",
    version,
    about = "Compose, split and analyze digraphs by diagonal union"
)]
struct Cli {
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a named digraph family.
    Gen(GenArgs),
    /// Split a regular digraph into cycle factors (or keep it whole).
    Factorize {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FactorMethod::Cycle)]
        method: FactorMethod,
    },
    /// Diagonal union of a factorization.
    Dunion(DunionArgs),
    /// Iterated line digraph.
    Linedigraph {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// In- or out-split along an arc partition.
    Split(SplitArgs),
    /// Unitary weighting of a cycle factorization's diagonal union.
    Unitary(UnitaryArgs),
    /// Topology metrics.
    Analyze {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        /// Properties that must hold; exit 1 otherwise.
        #[arg(long, value_enum, value_delimiter = ',')]
        assert: Vec<Property>,
    },
    /// Decide isomorphism and print the lexicographically least witness.
    Iso {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        other: PathBuf,
    },
    /// DOT or adjacency CSV.
    Export(ExportArgs),
    /// Write the worked example inputs into a directory.
    Fixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// de Bruijn digraph B(base, dim).
    Debruijn {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        dim: usize,
    },
    /// Complete digraph with a loop at every vertex.
    Complete {
        #[arg(long)]
        n: usize,
    },
    /// Cayley digraph of Z_n.
    Cayley {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        set: Vec<i64>,
    },
    /// Directed cycle.
    Cycle {
        #[arg(long)]
        n: usize,
    },
    /// Random k-regular digraph, a union of k random permutations.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FactorMethod {
    Cycle,
    Trivial,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum UnionMethod {
    /// Combinatorial construction from the arc rule.
    Arcs,
    /// Dense matrix formula; limited to small orders.
    Matrix,
}

#[derive(Args, Debug)]
struct DunionArgs {
    /// Must equal the factorization's base when given.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    factors: PathBuf,
    #[arg(long, value_enum, default_value_t = UnionMethod::Arcs)]
    method: UnionMethod,
    /// Factor order, e.g. `1,0`.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Also write the adjacency matrix (or the unitary weighting, with
    /// `--coupling`) as CSV.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
    /// `fourier` or a CSV file holding a k×k unitary.
    #[arg(long)]
    coupling: Option<String>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Partition JSON.
    #[arg(long, conflicts_with = "factors")]
    partition: Option<PathBuf>,
    /// Derive the partition from a factorization instead.
    #[arg(long)]
    factors: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::In)]
    mode: ModeArg,
    /// Renumber vertices class-major when every vertex has the same class count.
    #[arg(long)]
    class_major: bool,
    /// Write the partition used as JSON.
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    In,
    Out,
}

impl From<ModeArg> for SplitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::In => SplitMode::In,
            ModeArg::Out => SplitMode::Out,
        }
    }
}

#[derive(Args, Debug)]
struct UnitaryArgs {
    #[arg(long)]
    factors: PathBuf,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value = "fourier")]
    coupling: String,
    /// Print a unitarity verdict instead of the matrix; exit 1 if it fails.
    #[arg(long)]
    check: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Property {
    StronglyConnected,
    Regular,
    NoCutVertices,
    NoBridges,
    LineDigraph,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
    format: ExportFormat,
    #[arg(long, value_enum, default_value_t = LabelKind::None)]
    labels: LabelKind,
    /// Copies per level, for `--labels copies`.
    #[arg(long)]
    copies: Option<usize>,
    /// Order of the base digraph, for `--labels copies`.
    #[arg(long)]
    base_order: Option<usize>,
    /// Alphabet size, for `--labels debruijn`.
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExportFormat {
    Dot,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LabelKind {
    None,
    Copies,
    Debruijn,
}

/// Why a command stopped.
enum Failure {
    /// A check ran and its property does not hold; the output was written.
    CheckFailed(String),
    /// Input was missing or malformed.
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out_path: Option<PathBuf>,
    output: String,
}

impl Io<'_> {
    fn read_source(&mut self, path: Option<&Path>) -> Result<String, Failure> {
        match path {
            Some(p) if p != Path::new("-") => {
                fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
            }
            _ => {
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::Input(format!("standard input: {e}")))?;
                Ok(s)
            }
        }
    }

    fn graph(&mut self, path: Option<&Path>) -> Result<Digraph, Failure> {
        let text = self.read_source(path)?;
        Ok(graph_from_json(&text)?)
    }

    fn factorization(&mut self, path: &Path) -> Result<Factorization, Failure> {
        let text = self.read_source(Some(path))?;
        Ok(factorization_from_json(&text)?)
    }

    fn emit(&mut self, text: &str) {
        self.output.push_str(text);
        if !text.ends_with('\n') {
            self.output.push('\n');
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let mut io = Io {
        stdin,
        out_path: cli.out.clone(),
        output: String::new(),
    };
    let result = dispatch(cli.command, &mut io);
    let (code, message) = match result {
        Ok(()) => (0, None),
        Err(Failure::CheckFailed(m)) => (1, Some(m)),
        Err(Failure::Input(m)) => (2, Some(m)),
    };
    if code != 2 {
        let written = match &io.out_path {
            Some(p) => fs::write(p, &io.output).map_err(|e| format!("{}: {e}", p.display())),
            None => stdout
                .write_all(io.output.as_bytes())
                .map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    }
    if let Some(m) = message {
        let prefix = if code == 1 { "check failed" } else { "error" };
        let _ = writeln!(stderr, "{prefix}: {m}");
    }
    code
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<(), Failure> {
    match command {
        Command::Gen(args) => {
            let d = match args.family {
                Family::Debruijn { base, dim } => de_bruijn(base, dim)?,
                Family::Complete { n } => complete_with_loops(n)?,
                Family::Cayley { n, set } => cayley_zn(n, &set)?,
                Family::Cycle { n } => directed_cycle(n)?,
                Family::Random { n, degree, seed } => random_regular(n, degree, seed)?,
            };
            io.emit(&graph_to_json(&d));
        }
        Command::Factorize { graph, method } => {
            let d = io.graph(graph.as_deref())?;
            let f = match method {
                FactorMethod::Cycle => cycle_factorization(&d)?,
                FactorMethod::Trivial => trivial(&d),
            };
            io.emit(&factorization_to_json(&f));
        }
        Command::Dunion(args) => dunion(args, io)?,
        Command::Linedigraph { graph, times } => {
            let d = io.graph(graph.as_deref())?;
            io.emit(&graph_to_json(&iterated_line_digraph(&d, times)?));
        }
        Command::Split(args) => split(args, io)?,
        Command::Unitary(args) => unitary(args, io)?,
        Command::Analyze {
            graph,
            format,
            assert,
        } => {
            let d = io.graph(graph.as_deref())?;
            let report = analyze(&d);
            match format {
                ReportFormat::Json => io.emit(&serde_json::to_string(&report)?),
                ReportFormat::Text => io.emit(&report.to_string()),
            }
            let failed: Vec<String> = assert
                .iter()
                .filter(|p| match p {
                    Property::StronglyConnected => !report.strongly_connected,
                    Property::Regular => report.regular_degree.is_none(),
                    Property::NoCutVertices => !report.articulation_points.is_empty(),
                    Property::NoBridges => !report.bridges.is_empty(),
                    Property::LineDigraph => !report.is_line_digraph,
                })
                .map(|p| p.to_possible_value().unwrap().get_name().to_string())
                .collect();
            if !failed.is_empty() {
                return Err(Failure::CheckFailed(format!(
                    "does not hold: {}",
                    failed.join(", ")
                )));
            }
        }
        Command::Iso { graph, other } => {
            let a = io.graph(graph.as_deref())?;
            let b = io.graph(Some(&other))?;
            match isomorphic(&a, &b)? {
                Some(map) => {
                    io.emit(&json!({"isomorphic": true, "map": map.as_slice()}).to_string())
                }
                None => {
                    io.emit(&json!({"isomorphic": false}).to_string());
                    return Err(Failure::CheckFailed("digraphs are not isomorphic".into()));
                }
            }
        }
        Command::Export(args) => export(args, io)?,
        Command::Fixtures { dir } => fixtures(&dir, io)?,
    }
    Ok(())
}

fn load_coupling(io: &mut Io<'_>, source: &str, k: usize) -> Result<DenseMatrix, Failure> {
    if source == "fourier" {
        Ok(DenseMatrix::fourier(k))
    } else {
        let text = io.read_source(Some(Path::new(source)))?;
        Ok(matrix_from_csv(&text, k, k)?)
    }
}

fn dunion(args: DunionArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let mut f = io.factorization(&args.factors)?;
    if let Some(path) = &args.graph {
        let d = io.graph(Some(path))?;
        if &d != f.base() {
            return Err(Failure::Input(
                "--graph differs from the factorization's base".into(),
            ));
        }
    }
    if let Some(order) = &args.order {
        f = f.reordered(order)?;
    }
    let digraph = match args.method {
        UnionMethod::Arcs => diagonal_union_depth(&f, args.depth)?.digraph,
        UnionMethod::Matrix => {
            let m = diagonal_union_depth_matrix(&f, args.depth)?;
            Digraph::from_matrix(&m, 0.5)?
        }
    };
    if let Some(path) = &args.matrix_out {
        let csv = match &args.coupling {
            Some(source) => {
                let c = load_coupling(io, source, f.len())?;
                matrix_to_csv(&unitary_weighting(&f, args.depth, &c)?, CSV_TOL)
            }
            None => digraph_to_csv(&digraph),
        };
        write_file(path, &csv)?;
    } else if args.coupling.is_some() {
        return Err(Failure::Input("--coupling needs --matrix-out".into()));
    }
    io.emit(&graph_to_json(&digraph));
    Ok(())
}

fn split(args: SplitArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let (d, partition) = match (&args.partition, &args.factors) {
        (Some(p), _) => {
            let d = io.graph(args.graph.as_deref())?;
            let text = io.read_source(Some(p))?;
            let partition: ArcPartition = serde_json::from_str(&text)?;
            (d, partition)
        }
        (None, Some(fpath)) => {
            let f = io.factorization(fpath)?;
            let partition = partition_from_factorization(&f, args.mode.into())?;
            (f.base().clone(), partition)
        }
        (None, None) => {
            return Err(Failure::Input(
                "split needs --partition or --factors".into(),
            ))
        }
    };
    let result = state_split(&d, &partition)?;
    if let Some(path) = &args.partition_out {
        write_file(path, &serde_json::to_string(&partition)?)?;
    }
    let out = if args.class_major {
        result
            .class_major_digraph()
            .ok_or_else(|| Failure::Input("class counts differ between vertices".into()))?
    } else {
        result.digraph
    };
    io.emit(&graph_to_json(&out));
    Ok(())
}

fn unitary(args: UnitaryArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let f = io.factorization(&args.factors)?;
    let c = load_coupling(io, &args.coupling, f.len())?;
    if !args.check {
        let u = unitary_weighting(&f, args.depth, &c)?;
        io.emit(&matrix_to_csv(&u, CSV_TOL));
        return Ok(());
    }
    let verdict = match unitary_weighting(&f, args.depth, &c) {
        Ok(u) => {
            let check = is_unitary(&u, UNITARY_TOL);
            let support = diagonal_union_depth(&f, args.depth)?.digraph;
            let support_ok = Digraph::from_matrix(&u, crate::matrix::SUPPORT_TOL)? == support;
            Ok((check.unitary && support_ok, check.residual, support_ok))
        }
        Err(TransformError::CouplingNotUnitary { residual }) => Ok((false, residual, false)),
        Err(TransformError::DenseSupportViolated { .. }) => {
            Ok((false, is_unitary(&c, UNITARY_TOL).residual, false))
        }
        Err(e) => Err(e),
    }?;
    let (ok, residual, support) = verdict;
    io.emit(&json!({"unitary": ok, "residual": residual, "support_matches": support}).to_string());
    if ok {
        Ok(())
    } else {
        Err(Failure::CheckFailed(
            "weighting is not a unitary supported on the union".into(),
        ))
    }
}

fn export(args: ExportArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let d = io.graph(args.graph.as_deref())?;
    match args.format {
        ExportFormat::Csv => io.emit(&digraph_to_csv(&d)),
        ExportFormat::Dot => {
            let labels = match args.labels {
                LabelKind::None => None,
                LabelKind::Copies => {
                    let (Some(k), Some(n)) = (args.copies, args.base_order) else {
                        return Err(Failure::Input(
                            "--labels copies needs --copies and --base-order".into(),
                        ));
                    };
                    let depth = copy_depth(d.order(), k, n).ok_or_else(|| {
                        Failure::Input(format!("order {} is not {k}^d·{n}", d.order()))
                    })?;
                    Some(copy_labels_for(k, n, depth))
                }
                LabelKind::Debruijn => {
                    let b = args.alphabet;
                    let m = copy_depth(d.order(), b, 1).ok_or_else(|| {
                        Failure::Input(format!("order {} is not a power of {b}", d.order()))
                    })?;
                    Some(de_bruijn_labels(b, m))
                }
            };
            io.emit(&export_dot(&d, labels.as_deref()));
        }
    }
    Ok(())
}

/// The `d` with `order = k^d·n`, if any.
fn copy_depth(order: usize, k: usize, n: usize) -> Option<usize> {
    if n == 0 || !order.is_multiple_of(n) {
        return None;
    }
    let mut q = order / n;
    let mut d = 0;
    while q > 1 {
        if k < 2 || !q.is_multiple_of(k) {
            return None;
        }
        q /= k;
        d += 1;
    }
    (q == 1).then_some(d)
}

fn fixtures(dir: &Path, io: &mut Io<'_>) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let k2 = complete_with_loops(2)?;
    let sigma_x = rho_reg_zk(2, 1)?.to_dense();
    let ex2 = factor_from_matrices(&k2, &[DenseMatrix::identity(2), sigma_x.clone()])?;
    let cay = cayley_zn(4, &[1, 2, 3])?;
    let r = |l| rho_reg_zk(4, l).map(|p| p.to_dense());
    let ex3 = factor_from_matrices(&cay, &[r(1)?.add(&r(3)?)?, r(2)?])?;

    let files: Vec<(&str, String)> = vec![
        ("sigma_x.csv", matrix_to_csv(&sigma_x, CSV_TOL)),
        (
            "identity2.csv",
            matrix_to_csv(&DenseMatrix::identity(2), CSV_TOL),
        ),
        ("k2plus.json", graph_to_json(&k2)),
        ("k2plus_factors.json", factorization_to_json(&ex2)),
        ("debruijn22.json", graph_to_json(&de_bruijn(2, 2)?)),
        ("debruijn23.json", graph_to_json(&de_bruijn(2, 3)?)),
        ("cayley4.json", graph_to_json(&cay)),
        ("cayley4_factors.json", factorization_to_json(&ex3)),
    ];
    for (name, text) in &files {
        let mut text = text.clone();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        write_file(&dir.join(name), &text)?;
        io.emit(&dir.join(name).display().to_string());
    }
    Ok(())
}
