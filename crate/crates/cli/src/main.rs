mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bmt_core::field::Rationals;
use bmt_core::field::{PRIME_A, PRIME_B};
use bmt_core::groebner::GroebnerOptions;
use bmt_core::mle::{newton_fit, stationarity_residual, NewtonOptions, SampleCovariance};
use bmt_core::model::{design_a, p_var_names, path_b};
use bmt_core::rmld::{
    certify_run, rmld_formula, star_origin_check, CertificationReport, CertifyOptions, FieldChoice, SliceRun,
};
use bmt_core::toric::{lattice_member, p_ring, tfp_kernel_check, tree_binomials, TfpGluing, TfpOptions};
use bmt_core::tree::{enumerate_topologies, star_tree, RootedTree};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{compute, CliError};
use crate::io::{csv_table, read_covariance, read_tree, LabelledMatrix};

#[derive(Parser)]
#[command(name = "bmt-rmld", version, about = "Reciprocal ML-degrees of Brownian motion tree models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for random data; a second run uses seed+1.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Prime for certification runs (repeatable). Defaults to 2147483647 and 2147483629.
    #[arg(long = "prime", global = true)]
    primes: Vec<u64>,
    /// Also certify over the rationals.
    #[arg(long, global = true)]
    rational: bool,
    /// Gradient tolerance for `fit`.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 100)]
    max_iter: usize,
    /// Cap on S-pairs reduced per Groebner basis.
    #[arg(long, global = true, env = "BMT_RMLD_MAX_PAIRS", default_value_t = bmt_core::groebner::DEFAULT_MAX_PAIRS)]
    max_pairs: usize,
    /// Largest tree (leaves including the root leaf 0) that is certified.
    #[arg(long, global = true, default_value_t = 7)]
    leaf_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Leave out elapsed times so output is reproducible byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Formula value of the reciprocal ML-degree.
    Rmld { tree: String },
    /// Certify the formula by counting solutions of the likelihood slice.
    Certify { tree: String },
    /// Print the design matrix A_T and the path matrix B_T.
    Matrices { tree: String },
    /// Quartet binomials generating the toric ideal in p-coordinates.
    Ideal { tree: String },
    /// Reciprocal MLE for a sample covariance given as CSV.
    Fit { tree: String, covariance: PathBuf },
    /// Glue the star S_m onto leaf `leaf` of the tree and check the toric fiber product.
    CheckTfp {
        tree: String,
        #[arg(long)]
        leaf: usize,
        #[arg(long)]
        star: usize,
    },
    /// Formula against certified degree for every topology up to a leaf count.
    Enumerate {
        /// Leaves counted including the root leaf 0.
        #[arg(long)]
        max_leaves: usize,
    },
    /// Whether the star-tree variety meets the kernel of A only at the origin.
    StarOrigin { n: usize },
}

/// Printed output plus whether a verification failed.
struct Outcome {
    body: String,
    mismatch: bool,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl Global {
    fn certify_options(&self) -> Result<CertifyOptions, CliError> {
        if let Some(&p) = self.primes.iter().find(|&&p| p >= 1 << 32 || !is_prime(p)) {
            return Err(CliError::Usage(format!("--prime {p} is not a prime below 2^32")));
        }
        let mut fields: Vec<FieldChoice> = if self.primes.is_empty() {
            vec![FieldChoice::Prime(PRIME_A), FieldChoice::Prime(PRIME_B)]
        } else {
            self.primes.iter().map(|&p| FieldChoice::Prime(p)).collect()
        };
        if self.rational {
            fields.push(FieldChoice::Rational);
        }
        Ok(CertifyOptions { leaf_cap: self.leaf_cap, fields, groebner: self.groebner(), ..CertifyOptions::default() })
    }

    fn groebner(&self) -> GroebnerOptions {
        GroebnerOptions { max_pairs: self.max_pairs }
    }

    fn envelope(&self, command: &str, mut body: Value, start: Instant) -> Value {
        body["command"] = json!(command);
        body["seed"] = json!(self.seed);
        if !self.no_timing {
            body["elapsed_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
        }
        body
    }
}

fn tree_json(t: &RootedTree) -> Value {
    let parent: Vec<Option<usize>> = (0..t.num_vertices()).map(|v| t.parent(v)).collect();
    let labels: Vec<String> =
        (0..t.num_vertices()).map(|v| if t.is_leaf(v) { v.to_string() } else { format!("v{v}") }).collect();
    json!({ "newick": t.to_newick(), "n": t.n(), "parent": parent, "labels": labels })
}

fn field_json(f: FieldChoice) -> Value {
    match f {
        FieldChoice::Prime(p) => json!(p),
        FieldChoice::Rational => json!("QQ"),
    }
}

fn field_text(f: FieldChoice) -> String {
    match f {
        FieldChoice::Prime(p) => p.to_string(),
        FieldChoice::Rational => "QQ".into(),
    }
}

/// Runs in the order of the core certifier, each timed.
fn certify_timed(t: &RootedTree, g: &Global) -> Result<(CertificationReport, Vec<f64>), CliError> {
    let opts = g.certify_options()?;
    let mut runs = Vec::new();
    let mut times = Vec::new();
    for &field in &opts.fields {
        for s in 0..opts.seed_count {
            let start = Instant::now();
            runs.push(certify_run(t, field, g.seed.wrapping_add(s), &opts).map_err(compute)?);
            times.push(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok((CertificationReport::from_runs(t, runs), times))
}

fn run_json(r: &SliceRun, ms: Option<f64>) -> Value {
    let mut v = json!({
        "field": field_json(r.field),
        "seed": r.seed,
        "degree": r.degree,
        "resamples": r.resamples,
        "pairs_reduced": r.pairs_reduced,
    });
    if let Some(ms) = ms {
        v["elapsed_ms"] = json!(ms);
    }
    v
}

fn render(
    g: &Global,
    command: &str,
    json_body: Value,
    start: Instant,
    csv: impl FnOnce() -> String,
    text: impl FnOnce() -> String,
) -> String {
    match g.format {
        Format::Json => {
            let v = g.envelope(command, json_body, start);
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
        Format::Csv => csv(),
        Format::Text => text(),
    }
}

fn cmd_rmld(g: &Global, tree: &str) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let d = rmld_formula(&t).to_string();
    let body = render(
        g,
        "rmld",
        json!({ "tree": tree_json(&t), "rmld": d }),
        start,
        || csv_table(&["newick", "rmld"], &[vec![t.to_newick(), d.clone()]]),
        || format!("{d}\n"),
    );
    Ok(Outcome { body, mismatch: false })
}

fn cmd_certify(g: &Global, tree: &str) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let (rep, times) = certify_timed(&t, g)?;
    let runs: Vec<Value> =
        rep.runs.iter().zip(&times).map(|(r, &ms)| run_json(r, (!g.no_timing).then_some(ms))).collect();
    let body = render(
        g,
        "certify",
        json!({
            "tree": tree_json(&t),
            "formula": rep.formula_value.to_string(),
            "certified": rep.certified_degree,
            "agree": rep.agree,
            "match": rep.matches,
            "runs": runs,
        }),
        start,
        || {
            let rows: Vec<Vec<String>> = rep
                .runs
                .iter()
                .map(|r| {
                    vec![
                        rep.newick.clone(),
                        field_text(r.field),
                        r.seed.to_string(),
                        r.degree.to_string(),
                        rep.formula_value.to_string(),
                        r.resamples.to_string(),
                    ]
                })
                .collect();
            csv_table(&["newick", "field", "seed", "degree", "formula", "resamples"], &rows)
        },
        || {
            format!(
                "{}\nformula {}\ncertified {}\nagree={} match={}\n",
                rep.newick, rep.formula_value, rep.certified_degree, rep.agree, rep.matches
            )
        },
    );
    Ok(Outcome { body, mismatch: !rep.matches })
}

fn cmd_matrices(g: &Global, tree: &str) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let a = LabelledMatrix::from_integer("A_T", &design_a(&t));
    let b = LabelledMatrix::from_integer("B_T", &path_b(&t));
    let body = render(
        g,
        "matrices",
        json!({ "tree": tree_json(&t), "A_T": a, "B_T": b }),
        start,
        || format!("{}\n{}", a.to_csv(), b.to_csv()),
        || format!("{}\n{}", a.to_text(), b.to_text()),
    );
    Ok(Outcome { body, mismatch: false })
}

fn cmd_ideal(g: &Global, tree: &str) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let ring = p_ring(Rationals, t.n()).map_err(compute)?;
    let a = design_a(&t);
    let bs = tree_binomials(&t);
    let mut texts = Vec::with_capacity(bs.len());
    let mut all_in = true;
    for b in &bs {
        all_in &= lattice_member(b, &a).map_err(compute)?;
        texts.push(b.to_text(&ring));
    }
    let body = render(
        g,
        "ideal",
        json!({
            "tree": tree_json(&t),
            "variables": p_var_names(t.n()),
            "binomials": texts,
            "lattice_members": all_in,
        }),
        start,
        || csv_table(&["binomial"], &texts.iter().map(|s| vec![s.clone()]).collect::<Vec<_>>()),
        || texts.iter().map(|s| format!("{s}\n")).collect(),
    );
    Ok(Outcome { body, mismatch: !all_in })
}

fn cmd_fit(g: &Global, tree: &str, cov: &std::path::Path) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let s = read_covariance(cov)?;
    if s.len() != t.n() {
        return Err(CliError::Usage(format!(
            "covariance is {0}x{0} but the tree has {1} non-root leaves",
            s.len(),
            t.n()
        )));
    }
    let s = SampleCovariance::new(s).map_err(|e| CliError::Parse(format!("covariance: {e}")))?;
    let opts = NewtonOptions { tol: g.tol, max_iter: g.max_iter };
    let fit = newton_fit(&t, &s, &opts).map_err(compute)?;
    let res = stationarity_residual(&t, &fit, &s).map_err(compute)?;
    let body = render(
        g,
        "fit",
        json!({
            "tree": tree_json(&t),
            "t": fit.t,
            "sigma": fit.sigma,
            "objective": fit.objective,
            "residual": fit.residual,
            "residual_design_form": res.design_form,
            "iterations": fit.iterations,
            "converged": fit.converged,
        }),
        start,
        || {
            let rows: Vec<Vec<String>> =
                fit.t.iter().enumerate().map(|(k, x)| vec![(k + 1).to_string(), format!("{x:e}")]).collect();
            csv_table(&["vertex", "t"], &rows)
        },
        || {
            let mut out = String::new();
            for (k, x) in fit.t.iter().enumerate() {
                out.push_str(&format!("t{} = {x}\n", k + 1));
            }
            out.push_str(&format!(
                "objective {}\nresidual {:e}\niterations {}\nconverged {}\n",
                fit.objective, fit.residual, fit.iterations, fit.converged
            ));
            out
        },
    );
    if !fit.converged {
        print!("{body}");
        return Err(CliError::Compute(format!(
            "Newton did not converge: residual {:e} after {} iterations",
            fit.residual, fit.iterations
        )));
    }
    Ok(Outcome { body, mismatch: false })
}

fn cmd_check_tfp(g: &Global, tree: &str, leaf: usize, m: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t = read_tree(tree)?;
    let gl = TfpGluing::new(&t, leaf, m).map_err(|e| CliError::Usage(e.to_string()))?;
    let rep =
        tfp_kernel_check(&gl, &TfpOptions { ideal_leaf_cap: g.leaf_cap, groebner: g.groebner() }).map_err(compute)?;
    let degrees = if gl.glued().num_leaves() <= g.leaf_cap {
        let d = |x: &RootedTree| certify_timed(x, g).map(|(r, _)| r.certified_degree);
        Some((d(gl.t_prime())?, d(gl.star())?, d(gl.glued())?))
    } else {
        None
    };
    let multiplicative = degrees.map(|(a, b, c)| a * b == c);
    let mismatch = !rep.passed() || multiplicative == Some(false);
    let body = render(
        g,
        "check-tfp",
        json!({
            "tree": tree_json(&t),
            "leaf": leaf,
            "star": m,
            "glued": tree_json(gl.glued()),
            "kernel_rank_psi": rep.kernel_rank_psi,
            "kernel_rank_B": rep.kernel_rank_b,
            "equal": rep.equal,
            "ideal_equal": rep.ideal_equal,
            "certified_t_prime": degrees.map(|d| d.0),
            "certified_star": degrees.map(|d| d.1),
            "certified_glued": degrees.map(|d| d.2),
            "multiplicative": multiplicative,
        }),
        start,
        || {
            let opt = |x: Option<String>| x.unwrap_or_default();
            csv_table(
                &[
                    "glued",
                    "kernel_rank_psi",
                    "kernel_rank_B",
                    "equal",
                    "ideal_equal",
                    "certified_t_prime",
                    "certified_star",
                    "certified_glued",
                    "multiplicative",
                ],
                &[vec![
                    rep.glued_newick.clone(),
                    rep.kernel_rank_psi.to_string(),
                    rep.kernel_rank_b.to_string(),
                    rep.equal.to_string(),
                    opt(rep.ideal_equal.map(|x| x.to_string())),
                    opt(degrees.map(|d| d.0.to_string())),
                    opt(degrees.map(|d| d.1.to_string())),
                    opt(degrees.map(|d| d.2.to_string())),
                    opt(multiplicative.map(|x| x.to_string())),
                ]],
            )
        },
        || {
            let mut out = format!(
                "{}\nkernel ranks {} {}\nequal={} ideal_equal={}\n",
                rep.glued_newick,
                rep.kernel_rank_psi,
                rep.kernel_rank_b,
                rep.equal,
                rep.ideal_equal.map_or("skipped".to_string(), |x| x.to_string())
            );
            if let Some((a, b, c)) = degrees {
                out.push_str(&format!("{a} x {b} = {} vs {c}\n", a * b));
            }
            out
        },
    );
    Ok(Outcome { body, mismatch })
}

fn cmd_enumerate(g: &Global, max_leaves: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    if max_leaves > g.leaf_cap {
        return Err(CliError::Usage(format!("--max-leaves {max_leaves} exceeds --leaf-cap {}", g.leaf_cap)));
    }
    g.certify_options()?;
    let trees: Vec<RootedTree> = (2..max_leaves).flat_map(enumerate_topologies).collect();
    let reports: Vec<CertificationReport> =
        trees.par_iter().map(|t| certify_timed(t, g).map(|r| r.0)).collect::<Result<_, _>>()?;
    let mismatches = reports.iter().filter(|r| !r.matches).count();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.newick.clone(),
                r.formula_value.to_string(),
                r.certified_degree.to_string(),
                r.agree.to_string(),
                r.matches.to_string(),
            ]
        })
        .collect();
    let body = render(
        g,
        "enumerate",
        json!({
            "max_leaves": max_leaves,
            "count": reports.len(),
            "mismatches": mismatches,
            "rows": reports.iter().map(|r| json!({
                "newick": r.newick,
                "formula": r.formula_value.to_string(),
                "certified": r.certified_degree,
                "agree": r.agree,
                "match": r.matches,
            })).collect::<Vec<_>>(),
        }),
        start,
        || csv_table(&["newick", "formula", "certified", "agree", "match"], &rows),
        || rows.iter().map(|r| r.join("\t") + "\n").collect(),
    );
    Ok(Outcome { body, mismatch: mismatches > 0 })
}

fn cmd_star_origin(g: &Global, n: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ok = star_origin_check(n, &g.groebner()).map_err(|e| match e {
        bmt_core::error::RmldError::OutOfRange { .. } => CliError::Usage(e.to_string()),
        e => compute(e),
    })?;
    let t = star_tree(n).expect("n checked");
    let body = render(
        g,
        "star-origin",
        json!({ "tree": tree_json(&t), "n": n, "origin_only": ok }),
        start,
        || csv_table(&["n", "origin_only"], &[vec![n.to_string(), ok.to_string()]]),
        || format!("{ok}\n"),
    );
    Ok(Outcome { body, mismatch: !ok })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Rmld { tree } => cmd_rmld(g, tree),
        Command::Certify { tree } => cmd_certify(g, tree),
        Command::Matrices { tree } => cmd_matrices(g, tree),
        Command::Ideal { tree } => cmd_ideal(g, tree),
        Command::Fit { tree, covariance } => cmd_fit(g, tree, covariance),
        Command::CheckTfp { tree, leaf, star } => cmd_check_tfp(g, tree, *leaf, *star),
        Command::Enumerate { max_leaves } => cmd_enumerate(g, *max_leaves),
        Command::StarOrigin { n } => cmd_star_origin(g, *n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.body);
            if out.mismatch {
                eprintln!("verification mismatch");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("bmt-rmld: {e}");
            e.exit_code()
        }
    }
}
