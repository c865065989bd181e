use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gtnl::facet_file::{builtin_facets, builtin_mismatches, load_facets, FacetFileError};
use gtnl::scan::{fmt_sig9, run_scan, ScanError, ScanSpec};
use gtnl::{core_exit_code, facet_exit_code, scan_exit_code, EXIT_VALIDATION};
use gtnl_core::bellineq::{closed_form_b, svetlichny_single_coherence, Branch, FacetInequality, SVETLICHNY_ID};
use gtnl_core::entangle::{cgm_family, cgm_xstate};
use gtnl_core::measure::BellOutcome;
use gtnl_core::optimize::{maximize_facet, violation_intervals, violation_threshold, OptimizerConfig};
use gtnl_core::protocol::{apply_filters, smp_prepare, FilterParams, SmpWiring};
use gtnl_core::qlin::{trace_distance, DensityMatrix};
use gtnl_core::revelation::{filtered_facet_sup, filtered_locality_check, ClassifyOptions};
use gtnl_core::states::{extract_x_params, make_rho4_closed_form, rho4_denominator, Family, StateFamilyParams};
use gtnl_core::tol::DEGENERATE_DENOMINATOR;

#[derive(Parser)]
#[command(
    name = "gtnl",
    version,
    about = "Hidden genuine tripartite nonlocality in a three-state swapping protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Svetlichny maxima and concurrences of the families.
    StateInfo {
        /// rho1..rho4; all four when omitted.
        #[arg(long)]
        family: Option<Family>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the preparation stage and compare with the closed-form final state.
    Smp {
        #[command(flatten)]
        params: ParamArgs,
        /// Bell outcomes of the three parties.
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = ["psi-".to_string(), "psi-".to_string(), "psi-".to_string()])]
        outcomes: Vec<String>,
    },
    /// Maximize one facet over projective settings.
    Maximize {
        #[arg(long)]
        family: Family,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        facet: FacetArgs,
        /// Local filter strengths applied first, as e1,e2,e3.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        filter: Option<Vec<f64>>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Locate where a facet starts to be violated along one parameter.
    Threshold {
        #[arg(long)]
        family: Family,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        facet: FacetArgs,
        /// Parameter to sweep: theta1, p1, p2, theta3 or p3.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 1e-4)]
        width: f64,
        /// Use the supremum over local filters.
        #[arg(long)]
        filtered: bool,
        /// Report violating runs on an N-point grid instead of bisecting.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Run a parameter sweep described by a TOML file.
    Scan {
        config: PathBuf,
        /// Also write the JSON-lines mirror.
        #[arg(long)]
        jsonl: bool,
    },
    /// Check locality of the initial states under all local filters.
    Filters {
        /// rho1..rho3; all three when omitted.
        #[arg(long)]
        family: Option<Family>,
        #[command(flatten)]
        params: ParamArgs,
        /// Facet file; built-in facets when omitted. Svetlichny is always checked.
        #[arg(long)]
        facets: Option<PathBuf>,
        /// ε-grid points per axis.
        #[arg(long, default_value_t = 11)]
        eps_grid: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.1)]
    theta1: f64,
    #[arg(long, default_value_t = 0.3)]
    p1: f64,
    #[arg(long, default_value_t = 0.5)]
    p2: f64,
    #[arg(long, default_value_t = 0.144)]
    theta3: f64,
    #[arg(long, default_value_t = 0.6)]
    p3: f64,
}

impl ParamArgs {
    fn array(self) -> [f64; 5] {
        [self.theta1, self.p1, self.p2, self.theta3, self.p3]
    }

    fn build(self) -> Result<StateFamilyParams, Failure> {
        let [a, b, c, d, e] = self.array();
        Ok(StateFamilyParams::new(a, b, c, d, e)?)
    }
}

#[derive(Args)]
struct FacetArgs {
    /// Facet id (3 and 185 are built in).
    #[arg(long, default_value_t = SVETLICHNY_ID)]
    facet: u32,
    /// JSON facet file to look the id up in.
    #[arg(long)]
    facets: Option<PathBuf>,
}

impl FacetArgs {
    fn resolve(&self) -> Result<FacetInequality, Failure> {
        let facets = load_facet_set(self.facets.as_ref())?;
        facets
            .into_iter()
            .find(|f| f.id() == self.facet)
            .ok_or_else(|| Failure::Usage(format!("facet {} not found", self.facet)))
    }
}

#[derive(Args)]
struct OptArgs {
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl OptArgs {
    fn config(&self) -> Result<OptimizerConfig, Failure> {
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            starts: self.starts.unwrap_or(d.starts),
            seed: self.seed.unwrap_or(d.seed),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Core(gtnl_core::Error),
    Facets(FacetFileError),
    Scan(ScanError),
    Usage(String),
}

impl From<gtnl_core::Error> for Failure {
    fn from(e: gtnl_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<FacetFileError> for Failure {
    fn from(e: FacetFileError) -> Self {
        Failure::Facets(e)
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        Failure::Scan(e)
    }
}

impl Failure {
    fn report(&self) -> (String, i32) {
        match self {
            Failure::Core(e) => (e.to_string(), core_exit_code(e)),
            Failure::Facets(e) => (e.to_string(), facet_exit_code(e)),
            Failure::Scan(e) => (e.to_string(), scan_exit_code(e)),
            Failure::Usage(m) => (m.clone(), EXIT_VALIDATION),
        }
    }
}

fn load_facet_set(path: Option<&PathBuf>) -> Result<Vec<FacetInequality>, Failure> {
    let facets = match path {
        Some(p) => load_facets(p)?,
        None => builtin_facets(),
    };
    for id in builtin_mismatches(&facets) {
        eprintln!("warning: facet {id} differs from the built-in facet with that id (sign or normalization convention?)");
    }
    Ok(facets)
}

fn g(x: f64) -> String {
    fmt_sig9(x)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::SineBranch => "sine",
        Branch::DiagonalBranch => "diagonal",
    }
}

/// Facet maximum: closed form for Svetlichny on single-coherence X states,
/// the optimizer otherwise.
fn facet_max(rho: &DensityMatrix, f: &FacetInequality, cfg: &OptimizerConfig) -> Result<f64, Failure> {
    if f.is_svetlichny() {
        if let Some(b) = extract_x_params(rho).ok().as_ref().and_then(svetlichny_single_coherence) {
            return Ok(b.value);
        }
    }
    Ok(maximize_facet(rho, f, cfg)?.value)
}

fn state_info(family: Option<Family>, params: ParamArgs) -> Result<(), Failure> {
    let p = params.build()?;
    let families = family.map_or(Family::ALL.to_vec(), |f| vec![f]);
    println!("family\tB\tbranch\tsine\tdiagonal\tviolates\tcgm\tcgm_state");
    for f in families {
        let b = closed_form_b(f, &p)?;
        let cgm = cgm_family(f, &p)?;
        let state = f.build(&p)?;
        let cgm_state = extract_x_params(&state).map_or(f64::NAN, |x| cgm_xstate(&x));
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f.name(),
            g(b.value),
            branch_name(b.branch),
            g(b.sine),
            g(b.diagonal),
            b.violates(),
            g(cgm),
            g(cgm_state)
        );
    }
    Ok(())
}

fn smp(params: ParamArgs, outcomes: &[String]) -> Result<(), Failure> {
    let p = params.build()?;
    let o: Vec<BellOutcome> = outcomes.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let outcomes = [o[0], o[1], o[2]];
    let states: Vec<DensityMatrix> = Family::INITIAL.iter().map(|f| f.build(&p)).collect::<Result<_, _>>()?;
    let (rho4, probability) = smp_prepare(&states[0], &states[1], &states[2], outcomes, &SmpWiring::standard())?;
    println!("probability {}", g(probability));
    println!("final state (rows |000> .. |111>, entries re+im·i):");
    let m = rho4.matrix();
    for r in 0..8 {
        let row: Vec<String> = (0..8).map(|c| format!("{:+.6}{:+.6}i", m[(r, c)].re, m[(r, c)].im)).collect();
        println!("  {}", row.join(" "));
    }
    let closed_applies = outcomes == [BellOutcome::PsiMinus; 3] && rho4_denominator(p.theta1, p.theta3, p.p3) > DEGENERATE_DENOMINATOR;
    if closed_applies {
        let closed = make_rho4_closed_form(p.theta1, p.theta3, p.p3)?;
        println!("closed-form trace distance {}", g(trace_distance(&rho4, &closed)?));
    } else {
        println!("closed-form trace distance n/a");
    }
    Ok(())
}

fn maximize(family: Family, params: ParamArgs, facet: &FacetArgs, filter: Option<Vec<f64>>, opt: &OptArgs) -> Result<(), Failure> {
    let p = params.build()?;
    let f = facet.resolve()?;
    let cfg = opt.config()?;
    let mut rho = family.build(&p)?;
    if let Some(e) = filter {
        let (filtered, prob) = apply_filters(&rho, &FilterParams::new(e[0], e[1], e[2])?)?;
        println!("filter success probability {}", g(prob));
        rho = filtered;
    }
    let r = maximize_facet(&rho, &f, &cfg)?;
    println!("facet {} bound {}", f.id(), g(f.bound()));
    println!("value {}", g(r.value));
    println!("violated {}", r.violated);
    println!("starts converged {}/{}", r.starts_converged, cfg.starts);
    let names = [
        "theta_a0", "phi_a0", "theta_a1", "phi_a1", "theta_b0", "phi_b0", "theta_b1", "phi_b1", "theta_c0", "phi_c0", "theta_c1", "phi_c1",
    ];
    for (n, a) in names.iter().zip(r.setting.angles()) {
        println!("  {n} {}", g(*a));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn threshold(
    family: Family,
    params: ParamArgs,
    facet: &FacetArgs,
    sweep: &str,
    (lo, hi, width): (f64, f64, f64),
    filtered: bool,
    grid: Option<usize>,
    opt: &OptArgs,
) -> Result<(), Failure> {
    let k = gtnl::scan::PARAMETERS
        .iter()
        .position(|n| *n == sweep)
        .ok_or_else(|| Failure::Usage(format!("unknown sweep parameter {sweep}")))?;
    let f = facet.resolve()?;
    let opts = ClassifyOptions {
        optimizer: opt.config()?,
        ..ClassifyOptions::default()
    };
    let base = params.array();
    let value = |t: f64| -> gtnl_core::Result<f64> {
        let mut a = base;
        a[k] = t;
        let p = StateFamilyParams::new(a[0], a[1], a[2], a[3], a[4])?;
        let rho = family.build(&p)?;
        if filtered {
            Ok(filtered_facet_sup(&rho, &f, &opts)?.map_or(f64::NEG_INFINITY, |(_, v)| v))
        } else {
            facet_max(&rho, &f, &opts.optimizer).map_err(|e| match e {
                Failure::Core(c) => c,
                _ => unreachable!("facet_max only fails with core errors"),
            })
        }
    };
    if let Some(n) = grid {
        if n < 2 {
            return Err(Failure::Usage("--grid needs at least 2 points".into()));
        }
        let pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let runs = violation_intervals(value, f.bound(), &pts)?;
        println!("violating runs of facet {} along {sweep}:", f.id());
        for (a, b) in runs {
            println!("  [{}, {}]", g(a), g(b));
        }
        return Ok(());
    }
    let th = violation_threshold(value, f.bound(), lo, hi, width)?;
    println!("threshold {} in [{}, {}]", g(th.value), g(th.lo), g(th.hi));
    println!("violating {}", if th.violating_above { "above" } else { "below" });
    for w in &th.warnings {
        eprintln!("warning: non-monotone value {} at {sweep} = {}", g(w.value), g(w.t));
    }
    Ok(())
}

fn filters(family: Option<Family>, params: ParamArgs, facets: Option<&PathBuf>, eps_grid: usize, opt: &OptArgs) -> Result<(), Failure> {
    let p = params.build()?;
    if eps_grid < 2 {
        return Err(Failure::Usage("--eps-grid needs at least 2 points".into()));
    }
    let facets = load_facet_set(facets)?;
    let opts = ClassifyOptions {
        optimizer: opt.config()?,
        filter_check: true,
        filter_grid: eps_grid,
        ..ClassifyOptions::default()
    };
    let families = family.map_or(Family::INITIAL.to_vec(), |f| vec![f]);
    println!("family\tlocal\tworst_facet\tvalue\teps1\teps2\teps3");
    for fam in families {
        let c = filtered_locality_check(fam, &p, &facets, &opts)?;
        let e = c.filter.eps;
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fam.name(),
            c.local,
            c.worst.id,
            g(c.worst.value),
            g(e[0]),
            g(e[1]),
            g(e[2])
        );
    }
    Ok(())
}

fn scan(config: &Path, jsonl: bool) -> Result<(), Failure> {
    let mut spec = ScanSpec::load(config)?;
    spec.jsonl |= jsonl;
    let s = run_scan(&spec)?;
    println!("points {}", s.points);
    for (v, n) in &s.verdicts {
        println!("  {v} {n}");
    }
    println!("facet set {}", s.facet_set);
    if s.partial_coverage {
        println!("note: partial NS2 coverage; NS2 verdicts cover only the listed facets");
    }
    println!("revelation intervals:");
    for line in &s.lines {
        let fixed: Vec<String> = line.fixed.iter().map(|(k, v)| format!("{k}={}", g(*v))).collect();
        let ivs: Vec<String> = line.intervals.iter().map(|i| format!("[{}, {}]", g(i.lo), g(i.hi))).collect();
        println!("  {} ({}): {}", line.parameter, fixed.join(", "), ivs.join(" "));
    }
    for o in &s.outputs {
        println!("wrote {}", o.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::StateInfo { family, params } => state_info(family, params),
        Command::Smp { params, outcomes } => smp(params, &outcomes),
        Command::Maximize {
            family,
            params,
            facet,
            filter,
            opt,
        } => maximize(family, params, &facet, filter, &opt),
        Command::Threshold {
            family,
            params,
            facet,
            sweep,
            lo,
            hi,
            width,
            filtered,
            grid,
            opt,
        } => threshold(family, params, &facet, &sweep, (lo, hi, width), filtered, grid, &opt),
        Command::Scan { config, jsonl } => scan(&config, jsonl),
        Command::Filters {
            family,
            params,
            facets,
            eps_grid,
            opt,
        } => filters(family, params, facets.as_ref(), eps_grid, &opt),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (msg, code) = f.report();
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
