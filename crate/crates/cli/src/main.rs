//! `tamegeo`: command line access to the tamegeo library.
//!
//! Results go to stdout as JSON, diagnostics to stderr. Exit status is 0 on
//! success, 2 for invalid input and 3 when a numerical procedure fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tamegeo::cones::{conic_exponent, nearest_point_multifunction, tangent_cone};
use tamegeo::exponents::{
    envelope_table, fit_envelope, loj_function_samples, one_dim_gradient_exponent, phi_profile,
    separation_samples, subgradient_exponent, PhiProfile, SubgradientExponentOptions, DEFAULT_BINS,
};
use tamegeo::io::Document;
use tamegeo::multifunctions::{
    default_radii, delta, delta_sup, domain, kuratowski_liminf, kuratowski_limsup, pre_image,
    pre_image_point, section, PreImageMode,
};
use tamegeo::subgradients::{clarke_subgradient, critical_set_sample, min_norm_point};
use tamegeo::{
    hausdorff, kuratowski_dist, BoxDomain, ConeConfig, ErrorClass, ExprFn, MultifunctionGraph,
    PhiConfig, PiecewiseFn, Point, PointCloud, Profile, ScalarField, SubgradientConfig,
};

use output::{csv_float, to_json};

#[derive(Debug)]
enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<tamegeo::Error> for CliError {
    fn from(e: tamegeo::Error) -> Self {
        match e.class() {
            ErrorClass::Input => CliError::Input(e.to_string()),
            ErrorClass::Numeric => CliError::Numeric(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Parser)]
#[command(
    name = "tamegeo",
    version,
    about = "Numerical tame geometry on sampled sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Sampling {
    /// Grid step used when an implicit set has to be sampled.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Seed for the sampling grid offset.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SubgradArgs {
    /// Comma-separated decreasing radii for gradient sampling.
    #[arg(long, value_name = "LIST")]
    gradient_radii: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seam_margin: Option<f64>,
    #[arg(long)]
    hull_tol: Option<f64>,
}

#[derive(Args, Clone)]
struct ConeArgs {
    #[arg(long, default_value_t = 0.5)]
    t0: f64,
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
    #[arg(long, default_value_t = 16)]
    steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PreMode {
    Strong,
    Lower,
    Upper,
    Weak,
    Point,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimMode {
    Sup,
    Inf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpMode {
    Loj,
    Sep,
    Subgrad,
    Conic,
    Onedim,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an implicit set into a point cloud.
    Sample {
        set: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Hausdorff distance between two sets.
    Hausdorff {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Kuratowski distance between two closed sets.
    Kuratowski {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Section F(x) of a multifunction graph.
    Section {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Domain of a multifunction graph.
    Domain {
        graph: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Pre-image of F(a), or of a point y with `--mode point`.
    Preimage {
        graph: PathBuf,
        #[arg(long, value_enum)]
        mode: PreMode,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Kuratowski upper or lower limit of F(x) as x -> a.
    Klim {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum)]
        mode: LimMode,
        /// Outer radius of the default annulus schedule.
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        /// Explicit comma-separated decreasing radii.
        #[arg(long, value_name = "LIST")]
        radii: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// d(y, F(x)), or with `--sup` the largest distance from G(x') to F(x).
    Delta {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "sup")]
        y: Option<String>,
        #[arg(long, requires = "at2")]
        sup: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        at2: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Tangent cone of a set at a point.
    Cone {
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        cone: ConeArgs,
        /// Write per-step diagnostics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Exponent of the approximation of a set by its tangent cone at 0.
    ConicExponent {
        set: PathBuf,
        #[arg(long, value_name = "LIST")]
        radii: String,
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Graph of the nearest-point multifunction of a set.
    Nearest {
        set: PathBuf,
        /// Point cloud (or implicit set) of query points.
        #[arg(long)]
        xs: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Clarke subgradient of a piecewise function at a point.
    Subgradient {
        function: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        subgrad: SubgradArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grid points where 0 lies in the Clarke subgradient.
    CriticalSet {
        function: PathBuf,
        /// Half-width of a cube around the origin, or lo,hi pairs per axis.
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        grid_step: f64,
        #[command(flatten)]
        subgrad: SubgradArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate a power-law exponent.
    Exponent {
        #[arg(long, value_enum)]
        mode: ExpMode,
        /// Input documents: one function or set, two sets for `sep`.
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Cube half-width (or lo,hi pairs); a radius for `sep`.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        /// Radii for `conic`.
        #[arg(long, value_name = "LIST")]
        radii: Option<String>,
        /// t range for `onedim`.
        #[arg(long, value_name = "MIN,MAX")]
        t_window: Option<String>,
        /// Fit the subgradient exponent even if 0 is not critical.
        #[arg(long)]
        allow_noncritical: bool,
        #[command(flatten)]
        cone: ConeArgs,
        #[command(flatten)]
        subgrad: SubgradArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the envelope table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Profile t -> min{h(x) : |f(x)| = t} over a ball.
    PhiProfile {
        function: PathBuf,
        #[arg(long)]
        ball: f64,
        /// Comma-separated increasing levels.
        #[arg(long, value_name = "LIST")]
        t: String,
        #[arg(long)]
        grid_step: f64,
        #[arg(long)]
        level_tol: f64,
        #[command(flatten)]
        subgrad: SubgradArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| input_err(format!("invalid number {t:?} in {what}")))
        })
        .collect()
}

fn parse_point(s: &str) -> CliResult<Point> {
    let v = parse_list(s, "point")?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err(input_err(format!("point {s:?} has non-finite coordinates")));
    }
    Ok(Point(v))
}

fn parse_window(s: &str, dim: usize, center: &[f64]) -> CliResult<BoxDomain> {
    let v = parse_list(s, "window")?;
    if v.len() == 1 {
        if !(v[0] > 0.0) {
            return Err(input_err("window half-width must be positive"));
        }
        return Ok(BoxDomain::cube(center, v[0]));
    }
    if v.len() != 2 * dim {
        return Err(input_err(format!(
            "window needs one half-width or {} bounds, got {}",
            2 * dim,
            v.len()
        )));
    }
    let b = BoxDomain::new(v.chunks(2).map(|c| (c[0], c[1])).collect());
    b.validate()?;
    Ok(b)
}

fn read_document(path: &Path) -> CliResult<Document> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn load_set(path: &Path, sampling: &Sampling) -> CliResult<PointCloud> {
    let doc = read_document(path)?;
    let set = doc.as_set().ok_or_else(|| {
        input_err(format!(
            "{}: expected a set, found {}",
            path.display(),
            doc.kind()
        ))
    })?;
    Ok(set.to_cloud(sampling.grid_step, sampling.seed)?)
}

fn load_graph(path: &Path, sampling: &Sampling) -> CliResult<MultifunctionGraph> {
    match read_document(path)? {
        Document::MultifunctionGraph(g) => Ok(g.build(sampling.grid_step, Some(sampling.seed))?),
        other => Err(input_err(format!(
            "{}: expected a multifunction_graph, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn load_piecewise(path: &Path) -> CliResult<PiecewiseFn> {
    match read_document(path)? {
        Document::PiecewiseFunction(f) => Ok(f),
        Document::Expression(e) => Ok(PiecewiseFn::smooth(e.to_fn()?, None, f64::MAX)?),
        other => Err(input_err(format!(
            "{}: expected a piecewise_function, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn subgrad_config(args: &SubgradArgs, m: usize, seed: u64) -> CliResult<SubgradientConfig> {
    let mut cfg = SubgradientConfig::for_arity(m);
    if let Some(r) = &args.gradient_radii {
        cfg.radius_schedule = parse_list(r, "radii")?;
    }
    if let Some(s) = args.samples {
        cfg.samples_per_radius = s;
    }
    if let Some(s) = args.seam_margin {
        cfg.seam_margin = s;
    }
    if let Some(h) = args.hull_tol {
        cfg.hull_tol = h;
    }
    cfg.seed = seed;
    cfg.validate(m)?;
    Ok(cfg)
}

fn cone_config(args: &ConeArgs) -> ConeConfig {
    ConeConfig {
        t0: args.t0,
        gamma: args.gamma,
        steps: args.steps,
    }
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))
}

fn write_envelope_csv(path: &Path, samples: &[(f64, f64)], bins: usize) -> CliResult<()> {
    let rows = envelope_table(samples, bins)?;
    write_csv(
        path,
        "log_u,log_v,bin,is_min",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                csv_float(r.log_u),
                csv_float(r.log_v),
                r.bin,
                r.is_min
            )
        }),
    )
}

fn cloud_json(c: PointCloud) -> String {
    to_json(&Document::PointCloud(c))
}

fn distance_json(value: f64, a: &PointCloud, b: &PointCloud) -> String {
    #[derive(Serialize)]
    struct Distance {
        value: f64,
        resolution_bound: f64,
    }
    to_json(&Distance {
        value,
        resolution_bound: a.resolution() + b.resolution(),
    })
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Sample { set, sampling } => {
            let step = sampling
                .grid_step
                .ok_or_else(|| input_err("sample needs --grid-step"))?;
            let doc = read_document(&set)?;
            match doc {
                Document::ImplicitSet(spec) => {
                    Ok(cloud_json(tamegeo::sample(&spec, step, sampling.seed)?))
                }
                other => Err(input_err(format!(
                    "{}: expected an implicit_set, found {}",
                    set.display(),
                    other.kind()
                ))),
            }
        }
        Command::Hausdorff { a, b, sampling } => {
            let (ca, cb) = (load_set(&a, &sampling)?, load_set(&b, &sampling)?);
            Ok(distance_json(hausdorff(&ca, &cb)?, &ca, &cb))
        }
        Command::Kuratowski { a, b, sampling } => {
            let (ca, cb) = (load_set(&a, &sampling)?, load_set(&b, &sampling)?);
            Ok(distance_json(kuratowski_dist(&ca, &cb)?, &ca, &cb))
        }
        Command::Section {
            graph,
            at,
            sampling,
        } => {
            let f = load_graph(&graph, &sampling)?;
            Ok(cloud_json(section(&f, &parse_point(&at)?)?))
        }
        Command::Domain { graph, sampling } => {
            Ok(cloud_json(domain(&load_graph(&graph, &sampling)?)))
        }
        Command::Preimage {
            graph,
            mode,
            at,
            sampling,
        } => {
            let f = load_graph(&graph, &sampling)?;
            let p = parse_point(&at)?;
            let out = match mode {
                PreMode::Point => pre_image_point(&f, &p)?,
                PreMode::Strong => pre_image(&f, &p, PreImageMode::Strong)?,
                PreMode::Lower => pre_image(&f, &p, PreImageMode::Lower)?,
                PreMode::Upper => pre_image(&f, &p, PreImageMode::Upper)?,
                PreMode::Weak => pre_image(&f, &p, PreImageMode::Weak)?,
            };
            Ok(cloud_json(out))
        }
        Command::Klim {
            graph,
            at,
            mode,
            r0,
            radii,
            sampling,
        } => {
            let f = load_graph(&graph, &sampling)?;
            let a = parse_point(&at)?;
            let radii = match radii {
                Some(r) => parse_list(&r, "radii")?,
                None => default_radii(r0),
            };
            let lim = match mode {
                LimMode::Sup => kuratowski_limsup(&f, &a, &radii)?,
                LimMode::Inf => kuratowski_liminf(&f, &a, &radii)?,
            };
            if lim.truncated {
                eprintln!("warning: values near the base point reach the sampling window; the limit is truncated");
            }
            Ok(to_json(&json!({
                "points": Document::PointCloud(lim.points),
                "truncated": lim.truncated,
                "nonempty_annuli": lim.nonempty_annuli,
                "tolerance": lim.tolerance,
            })))
        }
        Command::Delta {
            graph,
            at,
            y,
            sup,
            at2,
            sampling,
        } => {
            let f = load_graph(&graph, &sampling)?;
            let x = parse_point(&at)?;
            let value = match (y, sup) {
                (Some(y), None) => delta(&f, &x, &parse_point(&y)?)?,
                (None, Some(g)) => {
                    let g = load_graph(&g, &sampling)?;
                    let x2 = parse_point(at2.as_deref().unwrap_or_default())?;
                    delta_sup(&f, &g, &x, &x2)?
                }
                _ => return Err(input_err("delta needs either --y or --sup with --at2")),
            };
            Ok(to_json(&json!({ "value": value })))
        }
        Command::Cone {
            set,
            at,
            cone,
            csv,
            sampling,
        } => {
            let e = load_set(&set, &sampling)?;
            let tc = tangent_cone(&e, &parse_point(&at)?, &cone_config(&cone))?;
            if let Some(path) = csv {
                write_csv(
                    &path,
                    "step,t,samples,resolution_limited,drift",
                    tc.steps.iter().enumerate().map(|(k, s)| {
                        format!(
                            "{k},{},{},{},{}",
                            csv_float(s.t),
                            s.samples,
                            s.resolution_limited,
                            s.drift.map(csv_float).unwrap_or_default()
                        )
                    }),
                )?;
            }
            Ok(to_json(&tc))
        }
        Command::ConicExponent {
            set,
            radii,
            cone,
            csv,
            sampling,
        } => {
            let e = load_set(&set, &sampling)?;
            let fit = conic_exponent(&e, &parse_list(&radii, "radii")?, &cone_config(&cone))?;
            if let Some(path) = csv {
                write_csv(
                    &path,
                    "log_r,log_dist",
                    fit.envelope
                        .iter()
                        .map(|(r, d)| format!("{},{}", csv_float(*r), csv_float(*d))),
                )?;
            }
            Ok(to_json(&fit))
        }
        Command::Nearest { set, xs, sampling } => {
            let m = load_set(&set, &sampling)?;
            let xs = load_set(&xs, &sampling)?;
            let g = nearest_point_multifunction(&m, xs.points())?;
            Ok(to_json(&json!({
                "kind": "multifunction_graph",
                "m": g.m(),
                "n": g.n(),
                "slab": g.slab(),
                "graph": Document::PointCloud(g.graph().clone()),
            })))
        }
        Command::Subgradient {
            function,
            at,
            subgrad,
            seed,
        } => {
            let f = load_piecewise(&function)?;
            let cfg = subgrad_config(&subgrad, f.arity(), seed)?;
            let p = clarke_subgradient(&f, &parse_point(&at)?, &cfg)?;
            let (q, h) = min_norm_point(&p, cfg.hull_tol * cfg.hull_tol)?;
            Ok(to_json(&json!({
                "vertices": p.vertices(),
                "min_norm_point": q,
                "h": h,
            })))
        }
        Command::CriticalSet {
            function,
            window,
            grid_step,
            subgrad,
            seed,
        } => {
            let f = load_piecewise(&function)?;
            let cfg = subgrad_config(&subgrad, f.arity(), seed)?;
            let w = parse_window(&window, f.arity(), &vec![0.0; f.arity()])?;
            Ok(cloud_json(critical_set_sample(&f, &w, grid_step, &cfg)?))
        }
        Command::Exponent {
            mode,
            inputs,
            at,
            window,
            grid_step,
            bins,
            radii,
            t_window,
            allow_noncritical,
            cone,
            subgrad,
            seed,
            csv,
        } => {
            let sampling = Sampling { grid_step, seed };
            let need = |o: Option<String>, flag: &str| {
                o.ok_or_else(|| input_err(format!("this mode needs --{flag}")))
            };
            let expect_inputs = |n: usize| {
                if inputs.len() == n {
                    Ok(())
                } else {
                    Err(input_err(format!("this mode takes {n} input file(s)")))
                }
            };
            match mode {
                ExpMode::Loj => {
                    expect_inputs(1)?;
                    let f: Box<dyn ScalarField> = match read_document(&inputs[0])? {
                        Document::Expression(e) => Box::new(e.to_fn()?),
                        Document::PiecewiseFunction(p) => Box::new(p),
                        other => {
                            return Err(input_err(format!(
                                "expected a function, found {}",
                                other.kind()
                            )))
                        }
                    };
                    let a = match at {
                        Some(s) => parse_point(&s)?,
                        None => Point::origin(f.arity()),
                    };
                    let w = parse_window(&need(window, "window")?, f.arity(), &a.0)?;
                    let step = grid_step.ok_or_else(|| input_err("this mode needs --grid-step"))?;
                    let samples = loj_function_samples(f.as_ref(), &a, &w, step)?;
                    let fit = fit_envelope(&samples, bins)?;
                    if let Some(p) = csv {
                        write_envelope_csv(&p, &samples, bins)?;
                    }
                    Ok(to_json(&fit))
                }
                ExpMode::Sep => {
                    expect_inputs(2)?;
                    let x = load_set(&inputs[0], &sampling)?;
                    let y = load_set(&inputs[1], &sampling)?;
                    let a = match at {
                        Some(s) => parse_point(&s)?,
                        None => Point::origin(x.dim()),
                    };
                    let r = parse_list(&need(window, "window")?, "window")?;
                    let samples = separation_samples(&x, &y, &a, r[0])?;
                    let fit = fit_envelope(&samples, bins)?;
                    if let Some(p) = csv {
                        write_envelope_csv(&p, &samples, bins)?;
                    }
                    Ok(to_json(&fit))
                }
                ExpMode::Subgrad => {
                    expect_inputs(1)?;
                    let f = load_piecewise(&inputs[0])?;
                    let cfg = subgrad_config(&subgrad, f.arity(), seed)?;
                    let w =
                        parse_window(&need(window, "window")?, f.arity(), &vec![0.0; f.arity()])?;
                    let step = grid_step.ok_or_else(|| input_err("this mode needs --grid-step"))?;
                    let opts = SubgradientExponentOptions {
                        bins,
                        require_critical_origin: !allow_noncritical,
                    };
                    let r = subgradient_exponent(&f, &w, step, &cfg, &opts)?;
                    if let Some(p) = csv {
                        write_envelope_csv(&p, &r.samples, bins)?;
                    }
                    if !r.theta_in_open_unit_interval {
                        eprintln!(
                            "warning: fitted exponent {} lies outside (0, 1)",
                            r.fit.exponent
                        );
                    }
                    let mut v = serde_json::to_value(&r.fit).expect("fit serializes");
                    if let Value::Object(o) = &mut v {
                        o.insert("h_at_origin".into(), json!(r.h_at_origin));
                        o.insert(
                            "theta_in_open_unit_interval".into(),
                            json!(r.theta_in_open_unit_interval),
                        );
                        o.insert(
                            "critical_nonzero_samples".into(),
                            json!(r.critical_nonzero_samples),
                        );
                    }
                    Ok(to_json(&v))
                }
                ExpMode::Conic => {
                    expect_inputs(1)?;
                    let e = load_set(&inputs[0], &sampling)?;
                    let fit = conic_exponent(
                        &e,
                        &parse_list(&need(radii, "radii")?, "radii")?,
                        &cone_config(&cone),
                    )?;
                    if let Some(p) = csv {
                        write_csv(
                            &p,
                            "log_u,log_v,bin,is_min",
                            fit.envelope.iter().enumerate().map(|(i, (u, v))| {
                                format!("{},{},{i},true", csv_float(*u), csv_float(*v))
                            }),
                        )?;
                    }
                    Ok(to_json(&fit))
                }
                ExpMode::Onedim => {
                    expect_inputs(1)?;
                    let tw = parse_list(&need(t_window, "t-window")?, "t-window")?;
                    if tw.len() != 2 {
                        return Err(input_err("--t-window takes MIN,MAX"));
                    }
                    let profile = load_profile(&inputs[0])?;
                    let r = one_dim_gradient_exponent(&profile, (tw[0], tw[1]), bins)?;
                    if let Some(p) = csv {
                        write_envelope_csv(&p, &r.samples, bins)?;
                    }
                    let mut v = serde_json::to_value(&r.fit).expect("fit serializes");
                    if let Value::Object(o) = &mut v {
                        o.insert("alpha".into(), json!(r.alpha));
                        o.insert("theta".into(), json!(r.theta));
                        o.insert("theta_direct".into(), json!(r.theta_direct));
                    }
                    Ok(to_json(&v))
                }
            }
        }
        Command::PhiProfile {
            function,
            ball,
            t,
            grid_step,
            level_tol,
            subgrad,
            seed,
            csv,
        } => {
            let f = load_piecewise(&function)?;
            let cfg = subgrad_config(&subgrad, f.arity(), seed)?;
            let prof = phi_profile(
                &f,
                ball,
                &parse_list(&t, "t")?,
                &cfg,
                &PhiConfig {
                    grid_step,
                    level_tol,
                },
            )?;
            for p in &prof.points {
                if let Some(e) = &p.error {
                    eprintln!("warning: {e}");
                }
            }
            if let Some(path) = csv {
                write_csv(
                    &path,
                    "t,phi",
                    prof.points.iter().map(|p| {
                        format!(
                            "{},{}",
                            csv_float(p.t),
                            p.phi.map(csv_float).unwrap_or_default()
                        )
                    }),
                )?;
            }
            let mut v = serde_json::to_value(&prof).expect("profile serializes");
            if let Value::Object(o) = &mut v {
                o.insert("vanishing".into(), json!(prof.vanishing()));
            }
            Ok(to_json(&v))
        }
    }
}

/// A one-variable expression or the JSON written by `phi-profile`.
fn load_profile(path: &Path) -> CliResult<Profile> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(p) = serde_json::from_str::<PhiProfile>(&text) {
        return Ok(Profile::Sampled(p.samples()));
    }
    match serde_json::from_str::<Document>(&text)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))?
    {
        Document::Expression(e) => {
            let f: ExprFn = e.to_fn()?;
            Ok(Profile::Formula(f))
        }
        other => Err(input_err(format!(
            "{}: expected an expression or a phi profile, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("TAMEGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        input_err(format!(
            "TAMEGEO_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| input_err(format!("cannot configure threads: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
