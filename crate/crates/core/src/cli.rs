//! The `hankel-lab` command-line front end.
//!
//! Exit codes: 0 on success, 1 for domain and contract errors (and failed
//! `reproduce` rows), 2 for parse errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::hankel::{build_block, operator_norm, spectral_norm, NormEstimate};
use crate::minimal::{build_recipe, classify, classify_auto, MinimalityVerdict, RecipeExpr, DEFAULT_TOL};
use crate::nehari::{
    c2_lower_value, cd_lower, cex_h2_closed_form, cex_ratios, cex_truncation, dual_bound,
    pair_product_lower, psi_projection, psi_sup_estimate, quadratic_family, search_c2, BoundReport, PsiSeries,
};
use crate::quadrature::{hp_norm, hq_norm_basic, plower_rhs, QuadratureSpec, DEFAULT_SAMPLES};
use crate::symbol::Symbol;

pub const THREADS_ENV: &str = "HANKEL_LAB_THREADS";
pub const DEFAULT_PSI_TRUNC: usize = 10_000;
pub const DEFAULT_PSI_GRID: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "hankel-lab", version, about = "Small Hankel operators with polynomial symbols on the d-torus")]
pub struct Cli {
    /// Emit one flat JSON object per line instead of a table
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H² norm, operator norm and a grid estimate of the sup norm
    Norm {
        file: PathBuf,
        /// Grid points per dimension for the sup estimate
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Decide whether the Hankel operator has minimal norm
    CheckMinimal {
        /// Symbol file (omit when --recipe is given)
        file: Option<PathBuf>,
        /// Recipe s-expression file
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Norms of the homogeneous blocks H_{φ,k}
    Blocks {
        file: PathBuf,
        /// Also print each block matrix
        #[arg(long)]
        dump: bool,
    },
    /// H^p norm by tensor grid (default) or Monte Carlo (--seed/--samples)
    HpNorm {
        file: PathBuf,
        /// Exponent p ≥ 1, or `inf`
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Dual-pairing lower bound |⟨f,φ⟩| / (‖H_φ‖ ‖f‖_{H¹})
    NehariBound {
        f: PathBuf,
        phi: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Optimize the two-variable dual bound over f = z₁²+c z₁z₂+z₂²
    NehariSearch {
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        c_min: f64,
        #[arg(long, default_value_t = 2.0)]
        c_max: f64,
    },
    /// Truncated counterexample: norms, minimality and diverging ratios
    Cex {
        #[arg(long, default_value_t = 3)]
        trunc: usize,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        kmax: usize,
    },
    /// Grid sup-norm estimate of the Nehari solution for z₁+z₂
    Psi {
        #[arg(long, default_value_t = DEFAULT_PSI_TRUNC)]
        trunc: usize,
        #[arg(long, default_value_t = DEFAULT_PSI_GRID)]
        grid: usize,
    },
    /// Recompute every published quantity and compare
    Reproduce,
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        _ => 1,
    }
}

/// Parse arguments (including the program name) and run.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let mut out = Output::new(cli.json);
    let result = match &cli.command {
        Command::Norm { file, grid } => cmd_norm(&mut out, file, *grid),
        Command::CheckMinimal { file, recipe, tol } => {
            cmd_check_minimal(&mut out, file.as_deref(), recipe.as_deref(), *tol)
        }
        Command::Blocks { file, dump } => cmd_blocks(&mut out, file, *dump),
        Command::HpNorm { file, p, grid, seed, samples } => {
            cmd_hp_norm(&mut out, file, *p, *grid, *seed, *samples)
        }
        Command::NehariBound { f, phi, grid } => cmd_nehari_bound(&mut out, f, phi, *grid),
        Command::NehariSearch { a, c_min, c_max } => cmd_nehari_search(&mut out, *a, *c_min, *c_max),
        Command::Cex { trunc, q, kmax } => cmd_cex(&mut out, *trunc, *q, *kmax),
        Command::Psi { trunc, grid } => cmd_psi(&mut out, *trunc, *grid),
        Command::Reproduce => cmd_reproduce(&mut out),
    };
    match result {
        Ok(code) => Outcome { code, stdout: out.finish(), stderr: out.errors },
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: out.finish(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum Cell {
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

struct Row {
    quantity: String,
    value: Cell,
    method: String,
    error_bound: Option<f64>,
}

/// Collects header settings, result rows and free-form blocks, then renders
/// them either as an aligned table or as JSON lines.
struct Output {
    json: bool,
    header: Vec<(String, String)>,
    rows: Vec<Row>,
    extra: Vec<String>,
    json_lines: Vec<Value>,
    errors: String,
}

impl Output {
    fn new(json: bool) -> Self {
        Output {
            json,
            header: Vec::new(),
            rows: Vec::new(),
            extra: Vec::new(),
            json_lines: Vec::new(),
            errors: String::new(),
        }
    }

    fn setting(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    fn estimate(&mut self, quantity: &str, e: &NormEstimate) {
        self.rows.push(Row {
            quantity: quantity.to_string(),
            value: Cell::Num(e.value),
            method: e.method.to_string(),
            error_bound: Some(e.error_bound),
        });
    }

    fn number(&mut self, quantity: &str, value: f64, method: &str) {
        self.rows.push(Row {
            quantity: quantity.to_string(),
            value: Cell::Num(value),
            method: method.to_string(),
            error_bound: None,
        });
    }

    fn text(&mut self, quantity: &str, value: impl ToString, method: &str) {
        self.rows.push(Row {
            quantity: quantity.to_string(),
            value: Cell::Text(value.to_string()),
            method: method.to_string(),
            error_bound: None,
        });
    }

    fn verdict(&mut self, v: &MinimalityVerdict, path: &str) {
        self.text("status", v.status, path);
        self.number("gap", v.gap, path);
        self.number("h2_norm", v.h2_norm, "closed-form");
        self.number("tolerance", v.tolerance, "setting");
        self.text("boundary", v.boundary, path);
        if let Some(blocks) = &v.block_norms {
            for (k, n) in blocks {
                self.number(&format!("block_norm_k{k}"), *n, "spectral-exact");
            }
        }
        for (i, note) in v.notes.iter().enumerate() {
            self.text(&format!("note_{i}"), note, "");
        }
    }

    fn bound(&mut self, prefix: &str, r: &BoundReport) {
        self.number(&format!("{prefix}bound"), r.bound_value, &r.method.to_string());
        if let Some(w) = &r.witness {
            self.number(&format!("{prefix}ratio"), w.ratio(), &r.method.to_string());
            self.number(&format!("{prefix}pairing_abs"), w.pairing.norm(), "closed-form");
            self.estimate(&format!("{prefix}operator_norm"), &w.operator_norm);
            self.estimate(&format!("{prefix}h1_norm_f"), &w.h1_norm);
        }
    }

    fn block(&mut self, text: String) {
        self.extra.push(text);
    }

    fn finish(&mut self) -> String {
        let mut s = String::new();
        if self.json {
            if !self.header.is_empty() {
                let mut m = Map::new();
                m.insert("kind".into(), json!("settings"));
                for (k, v) in &self.header {
                    m.insert(k.clone(), json!(v));
                }
                let _ = writeln!(s, "{}", Value::Object(m));
            }
            for r in &self.rows {
                let _ = writeln!(
                    s,
                    "{}",
                    json!({
                        "quantity": r.quantity,
                        "value": r.value,
                        "method": r.method,
                        "error_bound": r.error_bound,
                    })
                );
            }
            for v in &self.json_lines {
                let _ = writeln!(s, "{v}");
            }
            for e in &self.extra {
                let _ = writeln!(s, "{}", json!({ "kind": "dump", "text": e }));
            }
            return s;
        }
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        if !self.rows.is_empty() {
            let cells: Vec<[String; 4]> = self
                .rows
                .iter()
                .map(|r| {
                    [
                        r.quantity.clone(),
                        r.value.to_string(),
                        r.method.clone(),
                        r.error_bound.map_or("-".to_string(), |e| format!("{e:e}")),
                    ]
                })
                .collect();
            let titles = ["quantity", "value", "method", "error bound"];
            let widths: Vec<usize> = (0..4)
                .map(|i| {
                    cells
                        .iter()
                        .map(|c| c[i].chars().count())
                        .chain([titles[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |c: &[String]| {
                c.iter()
                    .zip(&widths)
                    .map(|(x, w)| format!("{x:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let t: Vec<String> = titles.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", line(&t));
            for c in &cells {
                let _ = writeln!(s, "{}", line(c));
            }
        }
        for e in &self.extra {
            s.push_str(e);
        }
        s
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))
}

fn read_symbol(path: &Path) -> Result<Symbol> {
    Symbol::parse_text(&read_file(path)?)
}

fn grid_spec(dim: usize, grid: Option<usize>) -> QuadratureSpec {
    match grid {
        Some(n) => QuadratureSpec::tensor(n),
        None => QuadratureSpec::default_for(dim),
    }
}

fn describe_spec(out: &mut Output, spec: &QuadratureSpec) {
    match spec.method {
        crate::quadrature::QuadratureMethod::TensorUniform => {
            out.setting("grid", spec.points_per_dimension);
        }
        crate::quadrature::QuadratureMethod::MonteCarlo => {
            out.setting("seed", spec.seed);
            out.setting("samples", spec.samples);
        }
    }
}

fn cmd_norm(out: &mut Output, file: &Path, grid: Option<usize>) -> Result<i32> {
    let s = read_symbol(file)?;
    let spec = grid_spec(s.dim(), grid);
    out.setting("command", "norm");
    out.setting("dim", s.dim());
    describe_spec(out, &spec);
    out.estimate("h2_norm", &NormEstimate::closed_form(s.h2_norm()));
    out.estimate("operator_norm", &operator_norm(&s));
    if s.is_zero() {
        out.estimate("sup_norm_estimate", &NormEstimate::closed_form(0.0));
    } else {
        out.estimate("sup_norm_estimate", &hp_norm(&s, f64::INFINITY, &spec)?);
    }
    Ok(0)
}

fn cmd_check_minimal(
    out: &mut Output,
    file: Option<&Path>,
    recipe: Option<&Path>,
    tol: f64,
) -> Result<i32> {
    out.setting("command", "check-minimal");
    out.setting("tol", format!("{tol:e}"));
    let (s, certified) = match (file, recipe) {
        (_, Some(r)) => {
            let expr = RecipeExpr::parse(&read_file(r)?)?;
            (build_recipe(&expr)?, true)
        }
        (Some(f), None) => (read_symbol(f)?, false),
        (None, None) => return Err(Error::domain("give a symbol file or --recipe")),
    };
    let path = if s.is_homogeneous().is_some() { "homogeneous-blocks" } else { "full-matrix" };
    out.setting("path", path);
    let mut v = classify_auto(&s, tol)?;
    if certified {
        v.notes.push("certificate: built by the separate-variable recipe".to_string());
    }
    out.verdict(&v, path);
    Ok(0)
}

fn cmd_blocks(out: &mut Output, file: &Path, dump: bool) -> Result<i32> {
    let s = read_symbol(file)?;
    let m = s
        .is_homogeneous()
        .ok_or_else(|| Error::contract("blocks needs a homogeneous symbol"))?;
    out.setting("command", "blocks");
    out.setting("degree", m);
    for k in 0..=m {
        let b = build_block(&s, k)?;
        let e = spectral_norm(&b);
        out.estimate(&format!("block_norm_k{k}"), &e);
        if dump {
            out.block(format!("# block k = {k}\n{}", b.to_dump()));
        }
    }
    out.estimate("h2_norm", &NormEstimate::closed_form(s.h2_norm()));
    Ok(0)
}

fn cmd_hp_norm(
    out: &mut Output,
    file: &Path,
    p: f64,
    grid: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
) -> Result<i32> {
    let s = read_symbol(file)?;
    let spec = if seed.is_some() || samples.is_some() {
        QuadratureSpec::monte_carlo(seed.unwrap_or(0), samples.unwrap_or(DEFAULT_SAMPLES))
    } else {
        grid_spec(s.dim(), grid)
    };
    out.setting("command", "hp-norm");
    out.setting("p", p);
    describe_spec(out, &spec);
    let e = hp_norm(&s, p, &spec)?;
    out.estimate("hp_norm", &e);
    out.estimate("h2_norm_parseval", &NormEstimate::closed_form(s.h2_norm()));
    Ok(0)
}

fn cmd_nehari_bound(out: &mut Output, f: &Path, phi: &Path, grid: Option<usize>) -> Result<i32> {
    let f = read_symbol(f)?;
    let phi = read_symbol(phi)?;
    let spec = grid_spec(f.dim(), grid);
    out.setting("command", "nehari-bound");
    describe_spec(out, &spec);
    let r = dual_bound(&f, &phi, &spec)?;
    out.bound("", &r);
    Ok(0)
}

fn cmd_nehari_search(out: &mut Output, a: f64, c_min: f64, c_max: f64) -> Result<i32> {
    out.setting("command", "nehari-search");
    out.setting("a", a);
    out.setting("c_range", format!("[{c_min}, {c_max}]"));
    out.setting("scan", format!("{} points, golden section to 1e-6", crate::nehari::SEARCH_GRID));
    let (c, r) = search_c2(a, (c_min, c_max))?;
    out.number("best_c", c, "search");
    out.bound("", &r);
    Ok(0)
}

fn cmd_cex(out: &mut Output, trunc: usize, q: f64, kmax: usize) -> Result<i32> {
    out.setting("command", "cex");
    out.setting("trunc", trunc);
    out.setting("q", q);
    out.setting("kmax", kmax);
    let s = cex_truncation(trunc)?;
    out.setting("dim", s.dim());
    out.estimate("h2_norm", &NormEstimate::closed_form(s.h2_norm()));
    out.number("h2_norm_formula", cex_h2_closed_form(trunc), "closed-form");
    if trunc <= 3 {
        let v = classify(&s, DEFAULT_TOL)?;
        out.text("status", v.status, "full-matrix");
        out.number("gap", v.gap, "full-matrix");
    }
    let ratios = cex_ratios(kmax, q)?;
    for k in [1, 10, 50, 100, 200, 500, 1000].into_iter().filter(|&k| k <= kmax) {
        out.number(&format!("ratio_k{k}"), ratios[k - 1], "closed-form");
    }
    if let Some(k) = ratios.iter().position(|&r| r > 1e3) {
        out.number("first_k_ratio_over_1e3", (k + 1) as f64, "scan");
    }
    Ok(0)
}

fn cmd_psi(out: &mut Output, trunc: usize, grid: usize) -> Result<i32> {
    out.setting("command", "psi");
    out.setting("trunc", trunc);
    out.setting("grid", grid);
    let e = psi_sup_estimate(trunc, grid)?;
    out.estimate("psi_sup_estimate", &e);
    out.number("pi_over_2", PI / 2.0, "closed-form");
    out.text("projection", psi_projection(&PsiSeries::new(trunc)?), "exact");
    Ok(0)
}

/// How a reproduced value is compared with the published one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    Within(f64),
    AtLeast,
    AtMost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproRow {
    pub name: &'static str,
    pub computed: f64,
    pub published: f64,
    pub check: Check,
}

impl ReproRow {
    pub fn diff(&self) -> f64 {
        (self.computed - self.published).abs()
    }

    pub fn pass(&self) -> bool {
        match self.check {
            Check::Within(tol) => self.diff() <= tol,
            Check::AtLeast => self.computed >= self.published,
            Check::AtMost => self.computed <= self.published,
        }
    }
}

/// Every published quantity, recomputed.
pub fn reproduce_rows() -> Result<Vec<ReproRow>> {
    let mut rows = Vec::new();
    let mut push = |name, computed, published, check| {
        rows.push(ReproRow { name, computed, published, check })
    };

    let a = 0.3;
    push("M_phi2_1_norm(a=0.3)", spectral_norm(&build_block(&quadratic_family(a), 1)?).value, 1.0 + a, Check::Within(1e-10));
    let b: f64 = 0.4;
    let phi3 = Symbol::from_real(2, &[(&[3, 0], 1.0), (&[2, 1], b), (&[1, 2], b), (&[0, 3], 1.0)])?;
    let n = spectral_norm(&build_block(&phi3, 1)?).value;
    push("M_phi3_1_gram_norm(b=0.4)", n * n, 1.0 + 2.0 * b + 3.0 * b * b, Check::Within(1e-10));
    push("a_threshold", threshold(quadratic_family, 0.0, 1.0)?, 0.5, Check::Within(1e-8));
    push(
        "b_threshold",
        threshold(
            |b| {
                Symbol::from_real(2, &[(&[3, 0], 1.0), (&[2, 1], b), (&[1, 2], b), (&[0, 3], 1.0)])
                    .expect("fixed family")
            },
            0.0,
            1.0,
        )?,
        2f64.sqrt() - 1.0,
        Check::Within(1e-8),
    );

    for d in 1..=3usize {
        let phi_d = pair_product(d)?;
        let name = ["phi_d_norm(d=1)", "phi_d_norm(d=2)", "phi_d_norm(d=3)"][d - 1];
        push(name, operator_norm(&phi_d).value, 2f64.powf(d as f64 / 2.0), Check::Within(1e-9));
    }

    let f = quadratic_family(1.0);
    let phi = quadratic_family(0.5);
    let r = dual_bound(&f, &phi, &QuadratureSpec::default_for(2))?;
    let w = r.witness.as_ref().expect("dual bound has a witness");
    push("pairing_f_phi", w.pairing.re, 2.5, Check::Within(0.0));
    push("opnorm_phi(a=1/2)", w.operator_norm.value, 1.5, Check::Within(1e-10));
    push("H1_f", w.h1_norm.value, 1.0 / 3.0 + 2.0 * 3f64.sqrt() / PI, Check::Within(1e-6));
    push("C2_lower", r.bound_value, c2_lower_value(), Check::Within(1e-5));
    push("C2_lower_formula", cd_lower(2)?.bound_value, 1.160_638_557_304_431_8, Check::Within(1e-12));
    push("pair_product_lower(d=2)", pair_product_lower(2)?.bound_value, PI / (2.0 * 2f64.sqrt()), Check::Within(1e-12));
    push("witness_lower_over_pair_product(d=20)", cd_lower(20)?.bound_value / pair_product_lower(20)?.bound_value, 1.0, Check::AtLeast);

    for (name, q) in [("inverse_hq_1_plus_z(q=1)", 1.0), ("inverse_hq_1_plus_z(q=1.5)", 1.5)] {
        push(name, 1.0 / hq_norm_basic(q)?.value, plower_rhs(q)?, Check::AtLeast);
    }
    push("inverse_hq_1_plus_z(q=2)", 1.0 / hq_norm_basic(2.0)?.value, 1.0, Check::Within(1e-10));

    let s10 = cex_truncation(10)?;
    push("cex_h2(K=10)", s10.h2_norm(), cex_h2_closed_form(10), Check::Within(1e-12));
    push("cex_h2_limit", cex_h2_closed_form(1_000_000), 1.0, Check::Within(1e-6));
    push("cex_gap(K=2)", classify(&cex_truncation(2)?, DEFAULT_TOL)?.gap, 1e-9, Check::AtMost);
    push("cex_ratio(k=200,q=1)", cex_ratios(200, 1.0)?[199], 1e3, Check::AtLeast);

    let (c, sr) = search_c2(0.5, (0.0, 2.0))?;
    push("search_best_c(a=1/2)", c, 0.85, Check::Within(0.05));
    push("search_bound(a=1/2)", sr.bound_value, c2_lower_value() - 1e-9, Check::AtLeast);

    let lin = Symbol::from_real(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)])?;
    let proj = psi_projection(&PsiSeries::new(DEFAULT_PSI_TRUNC)?);
    push("psi_projection_error", proj.checked_add(&lin.scale((-1.0).into()))?.h2_norm(), 0.0, Check::Within(0.0));
    push("psi_sup", psi_sup_estimate(DEFAULT_PSI_TRUNC, DEFAULT_PSI_GRID)?.value, PI / 2.0, Check::Within(2e-3));
    Ok(rows)
}

/// `Π_{j=1..d} (z_{2j−1} + z_{2j})` in `2d` variables.
pub fn pair_product(d: usize) -> Result<Symbol> {
    let dim = 2 * d;
    let mut acc = Symbol::monomial(crate::MultiIndex::zeros(dim), 1.0.into())?;
    for j in 0..d {
        let pair = Symbol::variable(dim, 2 * j).checked_add(&Symbol::variable(dim, 2 * j + 1))?;
        acc = acc.checked_mul(&pair)?;
    }
    Ok(acc)
}

/// Bisection for the parameter where a family stops being minimal, assuming
/// minimal at `lo` and not minimal at `hi`.
fn threshold(family: impl Fn(f64) -> Symbol, mut lo: f64, mut hi: f64) -> Result<f64> {
    // the raw gap, not the tolerance-smoothed status, locates the crossing
    let gap = |x: f64| -> Result<f64> {
        let s = family(x);
        Ok(operator_norm(&s).value - s.h2_norm())
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 1e-13 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn cmd_reproduce(out: &mut Output) -> Result<i32> {
    out.setting("command", "reproduce");
    out.setting("tol", format!("{DEFAULT_TOL:e}"));
    out.setting("grid", 256);
    out.setting("psi_trunc", DEFAULT_PSI_TRUNC);
    out.setting("psi_grid", DEFAULT_PSI_GRID);
    let rows = reproduce_rows()?;
    let failures: Vec<&str> = rows.iter().filter(|r| !r.pass()).map(|r| r.name).collect();
    if out.json {
        for r in &rows {
            out.json_lines.push(json!({
                "name": r.name,
                "computed": r.computed,
                "published": r.published,
                "abs_diff": r.diff(),
                "check": check_label(r.check),
                "pass": r.pass(),
            }));
        }
    } else {
        let mut s = String::new();
        let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(4);
        let _ = writeln!(s, "{:<w$}  {:>22}  {:>22}  {:>10}  {:<14}  status", "name", "computed", "published", "abs diff", "check");
        for r in &rows {
            let _ = writeln!(
                s,
                "{:<w$}  {:>22}  {:>22}  {:>10.3e}  {:<14}  {}",
                r.name,
                r.computed + 0.0,
                r.published,
                r.diff(),
                check_label(r.check),
                if r.pass() { "ok" } else { "FAIL" }
            );
        }
        out.block(s);
    }
    if failures.is_empty() {
        Ok(0)
    } else {
        out.errors = format!("reproduce: {} row(s) out of tolerance: {}\n", failures.len(), failures.join(", "));
        Ok(1)
    }
}

fn check_label(c: Check) -> String {
    match c {
        Check::Within(t) => format!("|diff| <= {t:e}"),
        Check::AtLeast => ">= published".to_string(),
        Check::AtMost => "<= published".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::build_matrix;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn pair_product_shape() {
        let p = pair_product(2).unwrap();
        assert_eq!(p.dim(), 4);
        assert_eq!(p.len(), 4);
        assert_eq!(p.is_homogeneous(), Some(2));
    }

    #[test]
    fn threshold_bisection_finds_half() {
        let t = threshold(quadratic_family, 0.0, 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-8, "{t}");
    }

    #[test]
    fn usage_errors_exit_two() {
        let o = execute(["hankel-lab", "frobnicate"]);
        assert_eq!(o.code, 2);
        let o = execute(["hankel-lab", "--help"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("reproduce"));
    }

    #[test]
    fn missing_file_is_domain_error() {
        let o = execute(["hankel-lab", "norm", "/nonexistent/file.sym"]);
        assert_eq!(o.code, 1);
        assert!(o.stderr.contains("cannot read"));
    }

    #[test]
    fn search_runs_without_files() {
        let o = execute(["hankel-lab", "nehari-search"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("best_c"));
        let o = execute(["hankel-lab", "nehari-search", "--a", "0.7"]);
        assert_eq!(o.code, 1);
    }

    #[test]
    fn build_matrix_used_for_nonhomogeneous_blocks_error() {
        let dir = std::env::temp_dir().join(format!("hankel-lab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("mixed.sym");
        std::fs::write(&p, "dim 1\n1 0 : 0\n1 0 : 1\n").unwrap();
        let o = execute(["hankel-lab", "blocks", p.to_str().unwrap()]);
        assert_eq!(o.code, 1);
        assert_eq!(build_matrix(&read_symbol(&p).unwrap()).nrows(), 2);
    }
}
