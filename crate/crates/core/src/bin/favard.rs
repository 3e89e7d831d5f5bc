use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use favard::construction::{
    box_family_to_json, build_box_family, build_four_corner, build_random_four_corner,
    build_segment_family, family_from_json, segment_family_to_json, Family, GrowthPreset,
    ScheduleParams,
};
use favard::diagnostics::{closeness_fraction, nestedness_check, oscillation_tail, secant_report};
use favard::duality::{
    audit_pairs, dual_area, enumerate_k_pairs, pair_sum_lower_bound, predicted_k_pairs,
    restricted_angle_integral, EXHAUSTIVE_SEGMENT_BUDGET,
};
use favard::kernel::Point;
use favard::projection::{favard_estimate, GraphProjector, IfsProjector, ProjectionSource};
use favard::report::{grid_base_points, run_report, EpsPolicy, GrowthSource, RunConfig};
use favard::svg::{render_construction, render_dual_pair, DEFAULT_PRIMITIVE_BUDGET};
use favard::{Error, Result};

#[derive(Parser)]
#[command(
    name = "favard",
    version,
    about = "Cantor-graph constructions and their Favard length"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Growth preset (linear, sqrt, log) or a file of growth values.
    #[arg(long, default_value = "linear")]
    growth: String,
    /// Construction level n (largest level for `report`).
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long = "c-sep", default_value_t = 4)]
    c_sep: u64,
    #[arg(long = "c-reach", default_value_t = favard::duality::DEFAULT_REACH)]
    c_reach: u64,
    /// `scale` for eps = 4^-m_n, or comma-separated values.
    #[arg(long, default_value = "scale")]
    eps: String,
    #[arg(long, default_value_t = favard::projection::DEFAULT_NODES)]
    nodes: usize,
    #[arg(long = "max-segments", default_value_t = favard::report::DEFAULT_MAX_SEGMENTS)]
    max_segments: u128,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (directory for `report`); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Graph,
    FourCorner,
    RandomFourCorner,
    Point,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Segments,
    Boxes,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureKind {
    Construction,
    DualPair,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family and write it as JSON.
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "graph")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "segments")]
        shape: Shape,
    },
    /// Favard length of the eps-neighborhood, as a CSV row.
    Favard {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "graph")]
        kind: Kind,
        /// Family JSON to measure instead of building one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Dual area, restricted angle integral and the pair-sum bound.
    Dual {
        #[command(flatten)]
        common: Common,
    },
    /// Pair counts per class level against the predicted counts.
    Pairs {
        #[command(flatten)]
        common: Common,
    },
    /// Closeness, oscillation, nestedness and secant probes as JSON.
    Diagnose {
        #[command(flatten)]
        common: Common,
    },
    /// SVG figure of a construction level or of one dual pair.
    Figure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "construction")]
        kind: FigureKind,
        /// Segment indices for the dual-pair view.
        #[arg(long, num_args = 2, default_values_t = [0usize, 1])]
        pair: Vec<usize>,
    },
    /// Full run writing CSV tables and JSON diagnostics to a directory.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn growth_source(&self) -> GrowthSource {
        match self.growth.parse::<GrowthPreset>() {
            Ok(p) => GrowthSource::Preset(p),
            Err(_) => GrowthSource::File(PathBuf::from(&self.growth)),
        }
    }

    fn eps_policy(&self) -> Result<EpsPolicy> {
        if self.eps == "scale" {
            return Ok(EpsPolicy::Scale);
        }
        self.eps
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad eps value {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(EpsPolicy::Explicit)
    }

    fn config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            growth: self.growth_source(),
            levels: self.levels,
            c_sep: self.c_sep,
            c_reach: self.c_reach,
            eps: self.eps_policy()?,
            nodes: self.nodes,
            max_segments: self.max_segments,
            seed: self.seed,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            ..RunConfig::default()
        };
        if self.levels == 0 {
            return Ok(cfg);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn schedule(&self) -> Result<ScheduleParams> {
        let mut cfg = self.config()?;
        cfg.levels = cfg.levels.max(1);
        cfg.schedule()
    }

    fn eps_at(&self, p: Option<&ScheduleParams>, n: usize) -> Result<f64> {
        match (self.eps_policy()?, p) {
            (EpsPolicy::Scale, Some(p)) => Ok(p.cell_width(n).to_f64()),
            (EpsPolicy::Scale, None) => Ok(0.25f64.powi(n as i32)),
            (EpsPolicy::Explicit(v), _) => Ok(*v.last().expect("non-empty")),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct FavardOut {
    family_id: String,
    n: usize,
    eps: f64,
    method: &'static str,
    nodes: usize,
    value: f64,
    error_bound: f64,
}

fn favard_row<S: ProjectionSource + ?Sized>(
    id: String,
    n: usize,
    src: &S,
    eps: f64,
    nodes: usize,
) -> Result<FavardOut> {
    let e = favard_estimate(src, eps, nodes)?;
    Ok(FavardOut {
        family_id: id,
        n,
        eps,
        method: e.method.name(),
        nodes,
        value: e.value,
        error_bound: e.error_bound,
    })
}

fn favard_cmd(c: &Common, kind: Kind, input: Option<&PathBuf>) -> Result<String> {
    let row = if let Some(path) = input {
        let family = family_from_json(&fs::read_to_string(path)?)?;
        match family {
            Family::Segments(f) => {
                let eps = c.eps_at(Some(f.params()), f.level())?;
                favard_row(format!("file-{}", f.level()), f.level(), &f, eps, c.nodes)?
            }
            Family::Boxes(f) => {
                let eps = c.eps_at(f.params(), f.level())?;
                favard_row(
                    format!("file-{}", f.kind().name()),
                    f.level(),
                    &f,
                    eps,
                    c.nodes,
                )?
            }
        }
    } else {
        let n = c.levels;
        match kind {
            Kind::Graph => {
                let p = c.schedule()?;
                let eps = c.eps_at(Some(&p), n)?;
                let id = c.config()?.family_id();
                favard_row(id, n, &GraphProjector::new(&p, n)?, eps, c.nodes)?
            }
            Kind::FourCorner => {
                let src = IfsProjector::new(favard::construction::IfsParams::four_corner(n));
                favard_row("four-corner".into(), n, &src, c.eps_at(None, n)?, c.nodes)?
            }
            Kind::RandomFourCorner => {
                let fam = build_random_four_corner(n, c.seed, c.max_segments)?;
                let id = format!("random-four-corner-s{}", c.seed);
                favard_row(id, n, &fam, c.eps_at(None, n)?, c.nodes)?
            }
            Kind::Point => {
                let eps = c.eps_at(None, n)?;
                favard_row("point".into(), 0, &Point::new(0.0, 0.0), eps, c.nodes)?
            }
        }
    };
    csv_text(&[row])
}

fn construct_cmd(c: &Common, kind: Kind, shape: Shape) -> Result<String> {
    let n = c.levels;
    let mut text = match (kind, shape) {
        (Kind::Graph, Shape::Segments) => {
            segment_family_to_json(&build_segment_family(n, &c.schedule()?, c.max_segments)?)?
        }
        (Kind::Graph, Shape::Boxes) => {
            box_family_to_json(&build_box_family(n, &c.schedule()?, c.max_segments)?)?
        }
        (Kind::FourCorner, _) => box_family_to_json(&build_four_corner(n, c.max_segments)?)?,
        (Kind::RandomFourCorner, _) => {
            box_family_to_json(&build_random_four_corner(n, c.seed, c.max_segments)?)?
        }
        (Kind::Point, _) => {
            return Err(Error::InvalidArgument(
                "a single point has no family form".into(),
            ))
        }
    };
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct DualOut {
    n: usize,
    nodes: usize,
    dual_area: f64,
    restricted_integral: f64,
    ratio: f64,
    pair_sum_unordered: f64,
    pair_sum_ordered: f64,
    lower_bound: f64,
    analytic: f64,
}

fn dual_cmd(c: &Common) -> Result<String> {
    let p = c.schedule()?;
    let n = c.levels;
    let proj = GraphProjector::new(&p, n)?;
    let dual = dual_area(&proj, c.nodes)?;
    let restricted = restricted_angle_integral(&proj, c.nodes)?;
    let fam = build_segment_family(n, &p, c.max_segments)?;
    let b = pair_sum_lower_bound(&fam, c.c_reach, c.nodes)?;
    csv_text(&[DualOut {
        n,
        nodes: c.nodes,
        dual_area: dual,
        restricted_integral: restricted,
        ratio: dual / restricted,
        pair_sum_unordered: b.sum_unordered,
        pair_sum_ordered: b.sum_ordered,
        lower_bound: b.lower_bound,
        analytic: b.analytic,
    }])
}

#[derive(Serialize)]
struct PairOut {
    n: usize,
    k: usize,
    count: u128,
    predicted: f64,
    area_sum: Option<f64>,
    max_normalized_area: Option<f64>,
}

fn pairs_cmd(c: &Common) -> Result<String> {
    let p = c.schedule()?;
    let n = c.levels;
    let fam = build_segment_family(n, &p, c.max_segments)?;
    let counts = enumerate_k_pairs(&fam, c.c_reach)?;
    let audit = if fam.len() <= EXHAUSTIVE_SEGMENT_BUDGET {
        Some(audit_pairs(&fam, c.c_reach)?)
    } else {
        None
    };
    let rows: Vec<PairOut> = counts
        .iter()
        .enumerate()
        .map(|(k, &count)| PairOut {
            n,
            k,
            count,
            predicted: predicted_k_pairs(&p, n, k),
            area_sum: audit.as_ref().map(|a| a.area_sums[k]),
            max_normalized_area: audit.as_ref().map(|a| a.max_normalized_area[k]),
        })
        .collect();
    csv_text(&rows)
}

fn diagnose_cmd(c: &Common) -> Result<String> {
    let p = c.schedule()?;
    let n = c.levels;
    let grid = p.scale(n) + 2;
    let closeness = (1..=n)
        .map(|k| closeness_fraction(&p, k, grid))
        .collect::<Result<Vec<_>>>()?;
    let tails = (0..=n)
        .map(|k| oscillation_tail(k, &p))
        .collect::<Result<Vec<_>>>()?;
    let nested = (0..n)
        .map(|k| nestedness_check(k, &p, c.max_segments))
        .collect::<Result<Vec<_>>>()?;
    let mut secants = Vec::new();
    if n >= 2 {
        for x0 in grid_base_points(&p, 1, 8)? {
            secants.push(secant_report(x0, 1..=n - 1, n, &p, c.max_segments)?);
        }
    }
    let doc = serde_json::json!({
        "closeness": closeness,
        "oscillation": tails,
        "nested": nested,
        "secants": secants,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn figure_cmd(c: &Common, kind: FigureKind, pair: &[usize]) -> Result<String> {
    let p = c.schedule()?;
    match kind {
        FigureKind::Construction => {
            let fam = build_box_family(c.levels, &p, c.max_segments)?;
            render_construction(&fam, DEFAULT_PRIMITIVE_BUDGET)
        }
        FigureKind::DualPair => {
            let fam = build_segment_family(c.levels, &p, c.max_segments)?;
            let seg = |i: usize| {
                fam.segments().get(i).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!("segment {i} out of {}", fam.len()))
                })
            };
            render_dual_pair(&seg(pair[0])?, &seg(pair[1])?)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Construct {
            common,
            kind,
            shape,
        } => common.emit(&construct_cmd(&common, kind, shape)?),
        Command::Favard {
            common,
            kind,
            input,
        } => common.emit(&favard_cmd(&common, kind, input.as_ref())?),
        Command::Dual { common } => common.emit(&dual_cmd(&common)?),
        Command::Pairs { common } => common.emit(&pairs_cmd(&common)?),
        Command::Diagnose { common } => common.emit(&diagnose_cmd(&common)?),
        Command::Figure { common, kind, pair } => common.emit(&figure_cmd(&common, kind, &pair)?),
        Command::Report { common } => {
            let cfg = common.config()?;
            let bundle = run_report(&cfg)?;
            eprintln!(
                "wrote {} levels to {}",
                bundle.favard.len(),
                cfg.out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
