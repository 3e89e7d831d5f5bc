//! End-to-end runs: schedule, families, estimates and probes written as CSV
//! tables and a JSON diagnostics bundle.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::construction::{
    build_segment_family, nestedness_check, GrowthPreset, GrowthSequence, ScheduleParams,
    DEFAULT_SEPARATION,
};
use crate::diagnostics::{
    closeness_fraction, is_close, oscillation_tail, secant_probe, ClosenessReport, OscillationTail,
};
use crate::duality::{
    audit_pairs, dual_area, enumerate_k_pairs, pair_sum_lower_bound, predicted_k_pairs,
    restricted_angle_integral, PairRoute, DEFAULT_REACH, EXHAUSTIVE_SEGMENT_BUDGET,
};
use crate::error::{Error, Result};
use crate::kernel::Dyadic;
use crate::projection::{favard_estimate, GraphProjector, DEFAULT_NODES};

pub const DEFAULT_MAX_SEGMENTS: u128 = 1 << 20;
pub const DEFAULT_SCALE_BUDGET: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthSource {
    Preset(GrowthPreset),
    File(PathBuf),
}

impl GrowthSource {
    pub fn label(&self) -> String {
        match self {
            GrowthSource::Preset(p) => p.name().to_string(),
            GrowthSource::File(_) => "custom".to_string(),
        }
    }

    pub fn sequence(&self, levels: usize) -> Result<GrowthSequence> {
        match self {
            GrowthSource::Preset(p) => p.sequence(levels),
            GrowthSource::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
                let g = GrowthSequence::parse_text(&text)?;
                if g.len() < levels {
                    return Err(Error::config(format!(
                        "growth file has {} values, {levels} levels requested",
                        g.len()
                    )));
                }
                GrowthSequence::new(g.values()[..levels].to_vec())
            }
        }
    }
}

/// Neighborhood radius per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsPolicy {
    /// `eps = 4^{-m_n}` at level `n`.
    Scale,
    /// One value for every level, or one per level.
    Explicit(Vec<f64>),
}

impl EpsPolicy {
    pub fn eps(&self, p: &ScheduleParams, n: usize) -> Result<f64> {
        match self {
            EpsPolicy::Scale => Ok(p.cell_width(n).to_f64()),
            EpsPolicy::Explicit(v) if v.len() == 1 => Ok(v[0]),
            EpsPolicy::Explicit(v) => v
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::config(format!("no eps given for level {n}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub growth: GrowthSource,
    pub levels: usize,
    pub c_sep: u64,
    pub c_reach: u64,
    pub eps: EpsPolicy,
    pub nodes: usize,
    pub max_segments: u128,
    pub scale_budget: u32,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            growth: GrowthSource::Preset(GrowthPreset::Linear),
            levels: 4,
            c_sep: DEFAULT_SEPARATION,
            c_reach: DEFAULT_REACH,
            eps: EpsPolicy::Scale,
            nodes: DEFAULT_NODES,
            max_segments: DEFAULT_MAX_SEGMENTS,
            scale_budget: DEFAULT_SCALE_BUDGET,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::config("levels must be positive"));
        }
        if self.c_sep < 2 || self.c_reach == 0 {
            return Err(Error::config(
                "c_sep must be at least 2 and c_reach positive",
            ));
        }
        if self.nodes < 2 || self.max_segments == 0 || self.scale_budget == 0 {
            return Err(Error::config("nodes and budgets must be positive"));
        }
        if let EpsPolicy::Explicit(v) = &self.eps {
            if v.is_empty() || v.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return Err(Error::config("eps values must be finite and non-negative"));
            }
            if v.len() != 1 && v.len() != self.levels {
                return Err(Error::config(format!(
                    "{} eps values for {} levels",
                    v.len(),
                    self.levels
                )));
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<ScheduleParams> {
        let g = self.growth.sequence(self.levels)?;
        ScheduleParams::from_growth(&g, self.c_sep, self.scale_budget)
    }

    pub fn family_id(&self) -> String {
        format!("graph-{}-c{}", self.growth.label(), self.c_sep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavardRow {
    pub family_id: String,
    pub n: usize,
    pub eps: f64,
    pub method: String,
    pub nodes: usize,
    pub value: f64,
    pub error_bound: f64,
    /// `Σ_{k<n} a_k`.
    pub increment_sum: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub n: usize,
    pub nodes: usize,
    pub dual_area: f64,
    pub restricted_integral: f64,
    pub ratio: f64,
    pub route: String,
    pub pair_sum_unordered: f64,
    pub pair_sum_ordered: f64,
    pub lower_bound: f64,
    pub analytic: f64,
    /// `dual_area · pair_sum_ordered`, at least `1/4`.
    pub cs_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub n: usize,
    pub k: usize,
    pub count: u128,
    pub predicted: f64,
    pub ratio: f64,
    pub interacting: Option<u64>,
    pub area_sum: Option<f64>,
    pub max_normalized_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantSummary {
    pub n: usize,
    pub deep_level: usize,
    pub points: usize,
    /// Close base points without an admissible secant pair.
    pub unresolved: usize,
    pub min_angle: f64,
    pub max_angle: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsBundle {
    pub closeness: Vec<ClosenessReport>,
    pub oscillation: Vec<OscillationTail>,
    /// `(n, E_{n+1} ⊆ E_n)` for the levels within budget.
    pub nested: Vec<(usize, bool)>,
    pub secants: Vec<SecantSummary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub favard: Vec<FavardRow>,
    pub duality: Vec<DualityRow>,
    pub pairs: Vec<PairRow>,
    pub diagnostics: DiagnosticsBundle,
    /// Largest over smallest normalized statistic.
    pub normalized_spread: Option<f64>,
}

/// Runs every stage and writes `favard.csv`, `duality.csv`, `pairs.csv`,
/// `diagnostics.json` and `summary.json` to `cfg.out`. When a stage fails
/// the tables hold the rows completed before it.
pub fn run_report(cfg: &RunConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let p = cfg.schedule()?;
    let mut bundle = ReportBundle::default();
    let outcome = fill(cfg, &p, &mut bundle);
    write_bundle(&cfg.out, cfg, &bundle)?;
    outcome.map(|_| bundle)
}

fn fill(cfg: &RunConfig, p: &ScheduleParams, b: &mut ReportBundle) -> Result<()> {
    favard_stage(cfg, p, b)?;
    pair_count_stage(cfg, p, b)?;
    duality_stage(cfg, p, b)?;
    b.diagnostics = diagnostics_stage(cfg, p)?;
    Ok(())
}

fn favard_stage(cfg: &RunConfig, p: &ScheduleParams, b: &mut ReportBundle) -> Result<()> {
    for n in 1..=cfg.levels {
        let eps = cfg.eps.eps(p, n)?;
        let est = favard_estimate(&GraphProjector::new(p, n)?, eps, cfg.nodes)?;
        let sum = p.increment_sum(n - 1);
        b.favard.push(FavardRow {
            family_id: cfg.family_id(),
            n,
            eps,
            method: est.method.name().to_string(),
            nodes: est.nodes,
            value: est.value,
            error_bound: est.error_bound,
            increment_sum: sum,
            normalized: est.value * sum,
        });
    }
    let positive: Vec<f64> = b
        .favard
        .iter()
        .map(|r| r.normalized)
        .filter(|v| *v > 0.0)
        .collect();
    if !positive.is_empty() {
        let max = positive.iter().cloned().fold(f64::MIN, f64::max);
        let min = positive.iter().cloned().fold(f64::MAX, f64::min);
        b.normalized_spread = Some(max / min);
    }
    Ok(())
}

fn pair_count_stage(cfg: &RunConfig, p: &ScheduleParams, b: &mut ReportBundle) -> Result<()> {
    for n in 1..=cfg.levels {
        let fam = build_segment_family(n, p, cfg.max_segments)?;
        let counts = enumerate_k_pairs(&fam, cfg.c_reach)?;
        let audit = if fam.len() <= EXHAUSTIVE_SEGMENT_BUDGET {
            Some(audit_pairs(&fam, cfg.c_reach)?)
        } else {
            None
        };
        for (k, &count) in counts.iter().enumerate() {
            let predicted = predicted_k_pairs(p, n, k);
            b.pairs.push(PairRow {
                n,
                k,
                count,
                predicted,
                ratio: count as f64 / predicted,
                interacting: audit.as_ref().map(|a| a.interacting[k]),
                area_sum: audit.as_ref().map(|a| a.area_sums[k]),
                max_normalized_area: audit.as_ref().map(|a| a.max_normalized_area[k]),
            });
        }
    }
    Ok(())
}

fn duality_stage(cfg: &RunConfig, p: &ScheduleParams, b: &mut ReportBundle) -> Result<()> {
    for n in 1..=cfg.levels {
        let proj = GraphProjector::new(p, n)?;
        let dual = dual_area(&proj, cfg.nodes)?;
        let restricted = restricted_angle_integral(&proj, cfg.nodes)?;
        let fam = build_segment_family(n, p, cfg.max_segments)?;
        let bound = pair_sum_lower_bound(&fam, cfg.c_reach, cfg.nodes)?;
        b.duality.push(DualityRow {
            n,
            nodes: cfg.nodes,
            dual_area: dual,
            restricted_integral: restricted,
            ratio: dual / restricted,
            route: match bound.route {
                PairRoute::Exhaustive => "exhaustive",
                PairRoute::SliceQuadrature => "slice-quadrature",
            }
            .to_string(),
            pair_sum_unordered: bound.sum_unordered,
            pair_sum_ordered: bound.sum_ordered,
            lower_bound: bound.lower_bound,
            analytic: bound.analytic,
            cs_product: dual * bound.sum_ordered,
        });
    }
    Ok(())
}

/// Up to 50 evenly spread interior points `j·4^{-m_n}`.
pub fn grid_base_points(p: &ScheduleParams, n: usize, count: usize) -> Result<Vec<Dyadic>> {
    let m = 2 * p.scale(n);
    let cells = 1i128 << m;
    let mut js: Vec<i128> = (1..=count as i128)
        .map(|k| k * cells / (count as i128 + 1))
        .collect();
    js.retain(|&j| j > 0 && j < cells);
    js.dedup();
    js.into_iter().map(|j| Ok(Dyadic::new(j, m)?)).collect()
}

fn diagnostics_stage(cfg: &RunConfig, p: &ScheduleParams) -> Result<DiagnosticsBundle> {
    let mut d = DiagnosticsBundle::default();
    let grid = p.scale(cfg.levels) + 2;
    if grid <= 30 {
        for n in 1..=cfg.levels {
            d.closeness.push(closeness_fraction(p, n, grid)?);
        }
    }
    for n in 0..=cfg.levels {
        d.oscillation.push(oscillation_tail(n, p)?);
    }
    for n in 0..cfg.levels {
        let boxes = 2u128 << (2 * p.scale(n + 1));
        if boxes <= cfg.max_segments {
            d.nested
                .push((n, nestedness_check(n, p, cfg.max_segments)?));
        }
    }
    for n in 1..cfg.levels {
        let deep = (n + 3).min(cfg.levels);
        let reach = 4u128.saturating_pow(p.scale(deep) - p.scale(n));
        if 2 * reach > cfg.max_segments {
            continue;
        }
        let mut angles = Vec::new();
        let mut unresolved = 0;
        for x0 in grid_base_points(p, n, 50)? {
            if is_close(x0, n, p)? {
                match secant_probe(x0, n, deep, p, cfg.max_segments)? {
                    Some(r) => angles.push(r.angle),
                    None => unresolved += 1,
                }
            }
        }
        if angles.is_empty() && unresolved == 0 {
            continue;
        }
        d.secants.push(SecantSummary {
            n,
            deep_level: deep,
            points: angles.len(),
            unresolved,
            min_angle: angles.iter().cloned().fold(f64::NAN, f64::min),
            max_angle: angles.iter().cloned().fold(f64::NAN, f64::max),
        });
    }
    Ok(d)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    /// The run configuration without the output directory.
    config: serde_json::Value,
    family_id: String,
    levels_completed: usize,
    normalized_spread: Option<f64>,
}

fn write_bundle(dir: &Path, cfg: &RunConfig, b: &ReportBundle) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join("favard.csv"),
        &b.favard,
        &[
            "family_id",
            "n",
            "eps",
            "method",
            "nodes",
            "value",
            "error_bound",
            "increment_sum",
            "normalized",
        ],
    )?;
    write_csv(
        &dir.join("duality.csv"),
        &b.duality,
        &[
            "n",
            "nodes",
            "dual_area",
            "restricted_integral",
            "ratio",
            "route",
            "pair_sum_unordered",
            "pair_sum_ordered",
            "lower_bound",
            "analytic",
            "cs_product",
        ],
    )?;
    write_csv(
        &dir.join("pairs.csv"),
        &b.pairs,
        &[
            "n",
            "k",
            "count",
            "predicted",
            "ratio",
            "interacting",
            "area_sum",
            "max_normalized_area",
        ],
    )?;
    fs::write(
        dir.join("diagnostics.json"),
        serde_json::to_string_pretty(&b.diagnostics)? + "\n",
    )?;
    let mut config = serde_json::to_value(cfg)?;
    if let Some(obj) = config.as_object_mut() {
        obj.remove("out");
    }
    let summary = Summary {
        config,
        family_id: cfg.family_id(),
        levels_completed: b.favard.len(),
        normalized_spread: b.normalized_spread,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(())
}
