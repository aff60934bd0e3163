use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use varprop_core::bench::{run_bench, time_grid, BenchConfig, BenchRecord};
use varprop_core::models::graphene::convention_check;
use varprop_core::models::{
    graphene_sweep, hubbard_sweep, log_grid, open_linear_grid, GrapheneSweep, HubbardSweep, HubbardSweepConfig,
    PmConvention,
};
use varprop_core::ode::OdeSolverConfig;
use varprop_core::Method;

use crate::cli::{BenchArgs, Cli, Command, GrapheneArgs, HubbardArgs, PlotArgs};
use crate::config::{pick, pick_list, pick_opt, pick_switch, ConfigFile};
use crate::plot::{render_svg, series_from_table};
use crate::table::{
    check_output_path, num, write_atomic, Table, BENCH_HEADER, GRAPHENE_HEADER, HUBBARD_AGGREGATE_HEADER,
    HUBBARD_HEADER,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BenchEvolution(a) => bench_evolution(a, cli.threads),
        Command::Graphene(a) => graphene(a, cli.threads),
        Command::Hubbard(a) => hubbard(a, cli.threads),
        Command::Plot(a) => plot(a),
    }
}

fn load(path: &Option<PathBuf>, keys: &[&str]) -> Result<ConfigFile> {
    let file = ConfigFile::load(path.as_deref())?;
    file.check_keys(keys)?;
    Ok(file)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        b = b.num_threads(n);
    }
    Ok(b.build().context("starting worker threads")?.install(f))
}

fn ode_config(file: &ConfigFile, rel: Option<f64>, abs: Option<f64>) -> Result<OdeSolverConfig> {
    let d = OdeSolverConfig::default();
    Ok(OdeSolverConfig {
        rel_tol: pick(rel, file, "rel-tol", d.rel_tol)?,
        abs_tol: pick(abs, file, "abs-tol", d.abs_tol)?,
        ..d
    })
}

fn check_outputs(paths: &[Option<&Path>]) -> Result<()> {
    for p in paths.iter().flatten() {
        check_output_path(p)?;
    }
    Ok(())
}

fn emit(table: &Table, out: &Path, svg: Option<&Path>, log_y: bool) -> Result<()> {
    write_atomic(out, &table.to_bytes()?)?;
    println!("wrote {}", out.display());
    if let Some(svg) = svg {
        let (mut style, series) = series_from_table(table)?;
        style.log_y |= log_y;
        write_atomic(svg, render_svg(&style, &series).as_bytes())?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

const BENCH_KEYS: &[&str] = &[
    "dims", "samples", "seed", "methods", "reference", "tmax", "points", "rel-tol", "abs-tol", "kpm-convention", "out",
    "svg", "threads",
];

fn bench_evolution(a: BenchArgs, threads: Option<usize>) -> Result<()> {
    let file = load(&a.config, BENCH_KEYS)?;
    let Some(seed) = pick_opt(a.seed, &file, "seed")? else {
        bail!("a seed is required (--seed or `seed = …` in the config file)");
    };
    let d = BenchConfig::default();
    let tmax = pick(a.tmax, &file, "tmax", 2.0)?;
    let points = pick(a.points, &file, "points", 100)?;
    let cfg = BenchConfig {
        dims: pick_list(a.dims, &file, "dims", d.dims)?,
        samples: pick(a.samples, &file, "samples", d.samples)?,
        seed,
        methods: pick_list(a.methods, &file, "methods", d.methods)?,
        reference: pick(a.reference, &file, "reference", Method::Exact)?,
        t_grid: time_grid(tmax, points),
        ode: ode_config(&file, a.rel_tol, a.abs_tol)?,
        kpm: pick(a.kpm_convention, &file, "kpm-convention", d.kpm)?,
    };
    cfg.validate()?;
    let out = pick(a.out, &file, "out", PathBuf::from("bench.csv"))?;
    let svg = pick_opt(a.svg, &file, "svg")?;
    check_outputs(&[Some(&out), svg.as_deref()])?;
    let threads = pick_opt(threads, &file, "threads")?;

    let records = in_pool(threads, || run_bench(&cfg))??;
    let table = bench_table(&cfg, &records);
    emit(&table, &out, svg.as_deref(), false)
}

pub fn bench_table(cfg: &BenchConfig, records: &[BenchRecord]) -> Table {
    let mut t = Table::new(&BENCH_HEADER);
    t.meta("seed", cfg.seed).meta("reference", cfg.reference).meta("kpm_convention", cfg.kpm.tag());
    for r in records {
        t.push(vec![r.method.tag().into(), r.dim.to_string(), num(r.t_norm), num(r.l2_mean), num(r.l2_std), r.n.to_string()]);
    }
    t
}

const GRAPHENE_KEYS: &[&str] = &["gamma", "pmax", "points", "convention", "axis", "out", "svg", "threads"];

fn graphene(a: GrapheneArgs, threads: Option<usize>) -> Result<()> {
    let file = load(&a.config, GRAPHENE_KEYS)?;
    let gamma = pick(a.gamma, &file, "gamma", 1.0)?;
    let pmax = pick(a.pmax, &file, "pmax", 2.0)?;
    let points = pick(a.points, &file, "points", 200)?;
    let convention = pick(a.convention, &file, "convention", PmConvention::default())?;
    let axis = pick(a.axis, &file, "axis", Default::default())?;
    if !(pmax > 0.0 && pmax.is_finite()) || points == 0 {
        bail!("pmax must be positive and points at least 1");
    }
    let out = pick(a.out, &file, "out", PathBuf::from("graphene.csv"))?;
    let svg = pick_opt(a.svg, &file, "svg")?;
    check_outputs(&[Some(&out), svg.as_deref()])?;
    let _ = pick_opt(threads, &file, "threads")?;

    let grid = open_linear_grid(pmax * gamma, points);
    let sweep = graphene_sweep(gamma, &grid, convention, axis)?;
    // Off-axis probe: which p± reading reproduces the exact doublet.
    let mut best = None;
    for conv in [PmConvention::AsPrinted, PmConvention::Complex] {
        let c = convention_check(gamma, 0.1 * gamma, 7, conv)?;
        println!(
            "convention {}: off-axis hermiticity defect {:.3e}, max relative mismatch {:.3e}",
            conv.tag(),
            c.hermiticity_defect,
            c.max_relative_mismatch
        );
        if best.as_ref().is_none_or(|b: &(PmConvention, f64)| c.max_relative_mismatch < b.1) {
            best = Some((conv, c.max_relative_mismatch));
        }
    }
    let best = best.expect("two conventions probed").0;
    println!("convention tracking the exact spectrum: {}", best.tag());
    if !sweep.skipped.is_empty() {
        println!("skipped {} momenta with a vanishing exact level", sweep.skipped.len());
    }
    let mut table = graphene_table(&sweep);
    table.meta("best_convention", best.tag());
    emit(&table, &out, svg.as_deref(), true)
}

pub fn graphene_table(sweep: &GrapheneSweep) -> Table {
    let mut t = Table::new(&GRAPHENE_HEADER);
    t.meta("gamma", num(sweep.gamma)).meta("axis", sweep.axis.tag());
    for r in &sweep.rows {
        t.push(vec![num(r.p), num(r.delta_std), num(r.delta_var), sweep.convention.tag().into()]);
    }
    t
}

const HUBBARD_KEYS: &[&str] = &[
    "sites", "interaction", "boundary", "tmin", "tmax", "points", "coeffs", "allow-large", "rel-tol", "abs-tol", "out",
    "aggregate-out", "svg", "threads",
];

fn hubbard(a: HubbardArgs, threads: Option<usize>) -> Result<()> {
    let file = load(&a.config, HUBBARD_KEYS)?;
    let d = HubbardSweepConfig::default();
    let tmin = pick(a.tmin, &file, "tmin", 0.01)?;
    let tmax = pick(a.tmax, &file, "tmax", 0.5)?;
    let points = pick(a.points, &file, "points", 50)?;
    if !(tmin > 0.0 && tmax >= tmin && tmax.is_finite()) || points == 0 {
        bail!("need 0 < tmin ≤ tmax and at least one point");
    }
    let cfg = HubbardSweepConfig {
        n_sites: pick(a.sites, &file, "sites", d.n_sites)?,
        interaction: pick(a.interaction, &file, "interaction", d.interaction)?,
        boundary: pick(a.boundary, &file, "boundary", d.boundary)?,
        t_over_u: log_grid(tmin, tmax, points),
        coefficients: pick(a.coeffs, &file, "coeffs", d.coefficients)?,
        allow_large: pick_switch(a.allow_large, &file, "allow-large")?,
        ode: ode_config(&file, a.rel_tol, a.abs_tol)?,
    };
    cfg.validate()?;
    let out = pick(a.out, &file, "out", PathBuf::from("hubbard.csv"))?;
    let aggregate = match pick_opt(a.aggregate_out, &file, "aggregate-out")? {
        Some(p) => p,
        None => aggregate_path(&out),
    };
    let svg = pick_opt(a.svg, &file, "svg")?;
    check_outputs(&[Some(&out), Some(&aggregate), svg.as_deref()])?;
    let threads = pick_opt(threads, &file, "threads")?;

    let sweep = in_pool(threads, || hubbard_sweep(&cfg))??;
    let (levels, agg) = hubbard_tables(&sweep);
    let flagged = sweep.points.iter().filter(|p| p.flagged).count();
    if let Some(p) = sweep.points.first() {
        println!("non-zero levels: {}, first half: {}", p.levels.len(), p.levels.len() / 2);
    }
    if flagged > 0 {
        println!("{flagged} point(s) flagged: some matched state has singly-occupied weight <= 0.5");
    }
    emit(&levels, &out, None, false)?;
    emit(&agg, &aggregate, svg.as_deref(), false)
}

fn aggregate_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("hubbard");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_aggregate.{ext}"),
        None => format!("{stem}_aggregate"),
    };
    out.with_file_name(name)
}

pub fn hubbard_tables(sweep: &HubbardSweep) -> (Table, Table) {
    let cfg = &sweep.config;
    let mut levels = Table::new(&HUBBARD_HEADER);
    let mut agg = Table::new(&HUBBARD_AGGREGATE_HEADER);
    for t in [&mut levels, &mut agg] {
        t.meta("sites", cfg.n_sites)
            .meta("interaction", num(cfg.interaction))
            .meta("boundary", cfg.boundary.tag())
            .meta("coeffs", cfg.coefficients.tag());
    }
    for p in &sweep.points {
        for l in &p.levels {
            levels.push(vec![
                num(p.t_over_u),
                l.level_index.to_string(),
                num(l.e_exact),
                num(l.e_std),
                num(l.e_var),
                num(l.err_std),
                num(l.err_var),
            ]);
        }
        agg.push(vec![
            num(p.t_over_u),
            num(p.first_half_std),
            num(p.first_half_var),
            num(p.upper_half_std),
            num(p.upper_half_var),
            p.levels.len().to_string(),
            num(p.min_weight),
            p.flagged.to_string(),
            num(p.c1.im),
            num(p.c2.re),
        ]);
    }
    (levels, agg)
}

const PLOT_KEYS: &[&str] = &["input", "output", "log-x", "log-y", "linear", "title"];

fn plot(a: PlotArgs) -> Result<()> {
    let file = load(&a.config, PLOT_KEYS)?;
    let Some(input) = pick_opt(a.input, &file, "input")? else { bail!("--input is required") };
    let Some(output) = pick_opt(a.output, &file, "output")? else { bail!("--output is required") };
    check_output_path(&output)?;
    let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let table = Table::parse(&text).with_context(|| format!("in {}", input.display()))?;
    let (mut style, series) = series_from_table(&table)?;
    if pick_switch(a.linear, &file, "linear")? {
        style.log_x = false;
        style.log_y = false;
    }
    style.log_x |= pick_switch(a.log_x, &file, "log-x")?;
    style.log_y |= pick_switch(a.log_y, &file, "log-y")?;
    if let Some(title) = pick_opt(a.title, &file, "title")? {
        style.title = title;
    }
    write_atomic(&output, render_svg(&style, &series).as_bytes())?;
    println!("wrote {}", output.display());
    Ok(())
}
