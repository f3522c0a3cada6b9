//! Report rendering. Every command wraps its payload in the same versioned
//! envelope; field order is fixed by struct declaration order and floats
//! print in shortest round-trip form, so a rerun of the same scenario
//! produces byte-identical output. Nothing time- or host-dependent is ever
//! written.

use serde::Serialize;

use bergman::carleson::{ApexSample, BoundednessCertificate, CompactnessProbe};
use bergman::geometry::HalfPlanePoint;
use bergman::weights::{TentRatio, WeightCertificate, WeightedEstimateTable, ZetaSample};

use crate::scenario::Validated;

pub const SCHEMA: &str = "bergman-report/v1";

#[derive(Serialize)]
pub struct Report<'a, P: Serialize> {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: &'a str,
    pub scenario: ScenarioEcho,
    pub payload: P,
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Tool { name: "bergman", version: env!("CARGO_PKG_VERSION") }
    }
}

/// The scenario as actually used, with every default resolved. Reports are
/// self-describing: rerunning the echoed settings reproduces the payload.
#[derive(Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub u: String,
    pub phi: String,
    pub omega: Option<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub split: Option<u32>,
    pub s: Option<f64>,
    pub lattice_refinement: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    pub window: [f64; 4],
    pub tail_decay: Option<f64>,
    pub poles: Vec<[f64; 3]>,
    pub collection: CollectionEcho,
    pub escape_steps: u32,
    pub corpus_apexes: Vec<[f64; 2]>,
    pub probe_heights: Vec<f64>,
}

#[derive(Serialize)]
pub struct CollectionEcho {
    pub min_level: i32,
    pub max_level: i32,
    pub window: [f64; 2],
}

impl ScenarioEcho {
    pub fn from_validated(v: &Validated) -> Self {
        let t = &v.spec.truncation;
        ScenarioEcho {
            name: v.name.clone(),
            u: v.u.canonical(),
            phi: v.phi.canonical(),
            omega: v.omega.as_ref().map(|w| w.canonical()),
            p: v.p,
            q: v.q,
            alpha: v.weight.alpha(),
            gamma: v.gamma,
            split: v.split,
            s: v.s,
            lattice_refinement: v.lattice_refinement,
            rel_tol: v.spec.rel_tol,
            abs_tol: v.spec.abs_tol,
            max_cells: v.spec.max_cells,
            window: [t.xs.left(), t.xs.right(), t.ys.left(), t.ys.right()],
            tail_decay: v.tail_decay,
            poles: v.poles.iter().map(|p| [p.x, p.y, p.radius]).collect(),
            collection: CollectionEcho {
                min_level: v.collection_min_level,
                max_level: v.collection_max_level,
                window: v.collection_window,
            },
            escape_steps: v.escape_steps,
            corpus_apexes: v.corpus_apexes.iter().map(|a| [a.x, a.y]).collect(),
            probe_heights: v.probe_heights.clone(),
        }
    }
}

fn point(p: HalfPlanePoint<f64>) -> [f64; 2] {
    [p.x, p.y]
}

#[derive(Serialize)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub error_bound: f64,
    pub converged: bool,
}

impl From<&ApexSample<f64>> for SamplePoint {
    fn from(s: &ApexSample<f64>) -> Self {
        SamplePoint {
            x: s.apex.x,
            y: s.apex.y,
            value: s.value,
            error_bound: s.error_bound,
            converged: s.converged,
        }
    }
}

impl From<&ZetaSample<f64>> for SamplePoint {
    fn from(s: &ZetaSample<f64>) -> Self {
        SamplePoint {
            x: s.zeta.x,
            y: s.zeta.y,
            value: s.value,
            error_bound: s.error_bound,
            converged: s.converged,
        }
    }
}

#[derive(Serialize)]
pub struct CertificateDto {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub lattice_level: u32,
    pub base_sup: f64,
    pub refined_sup: f64,
    pub base_argmax: [f64; 2],
    pub refined_argmax: [f64; 2],
    pub relative_change: f64,
    pub all_converged: bool,
    pub verdict: &'static str,
    pub base_samples: Vec<SamplePoint>,
    pub refined_samples: Vec<SamplePoint>,
}

impl From<&BoundednessCertificate<f64>> for CertificateDto {
    fn from(c: &BoundednessCertificate<f64>) -> Self {
        CertificateDto {
            p: c.p,
            q: c.q,
            alpha: c.alpha,
            lattice_level: c.lattice_level,
            base_sup: c.base_sup,
            refined_sup: c.refined_sup,
            base_argmax: point(c.base_argmax),
            refined_argmax: point(c.refined_argmax),
            relative_change: c.relative_change,
            all_converged: c.all_converged,
            verdict: c.verdict.label(),
            base_samples: c.base_samples.iter().map(Into::into).collect(),
            refined_samples: c.refined_samples.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct WeightCertificateDto {
    pub q: f64,
    pub s: f64,
    pub alpha: f64,
    pub lattice_level: u32,
    pub base_sup: f64,
    pub refined_sup: f64,
    pub base_argmax: [f64; 2],
    pub refined_argmax: [f64; 2],
    pub relative_change: f64,
    pub divergent: bool,
    pub all_converged: bool,
    pub verdict: &'static str,
    pub base_samples: Vec<SamplePoint>,
    pub refined_samples: Vec<SamplePoint>,
}

impl From<&WeightCertificate<f64>> for WeightCertificateDto {
    fn from(c: &WeightCertificate<f64>) -> Self {
        WeightCertificateDto {
            q: c.q,
            s: c.s,
            alpha: c.alpha,
            lattice_level: c.lattice_level,
            base_sup: c.base_sup,
            refined_sup: c.refined_sup,
            base_argmax: point(c.base_argmax),
            refined_argmax: point(c.refined_argmax),
            relative_change: c.relative_change,
            divergent: c.divergent,
            all_converged: c.all_converged,
            verdict: c.verdict.label(),
            base_samples: c.base_samples.iter().map(Into::into).collect(),
            refined_samples: c.refined_samples.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct CheckBoundedPayload {
    pub certificate: CertificateDto,
}

#[derive(Serialize)]
pub struct RouteProfileDto {
    pub route: &'static str,
    pub apexes: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub vanishes: bool,
}

#[derive(Serialize)]
pub struct VanishingProbeDto {
    pub steps: u32,
    pub global_max: f64,
    pub all_vanish: bool,
    pub all_converged: bool,
    pub profiles: Vec<RouteProfileDto>,
}

impl VanishingProbeDto {
    pub fn new(probe: &CompactnessProbe<f64>, steps: u32) -> Self {
        VanishingProbeDto {
            steps,
            global_max: probe.global_max,
            all_vanish: probe.all_vanish,
            all_converged: probe.all_converged,
            profiles: probe
                .profiles
                .iter()
                .map(|p| RouteProfileDto {
                    route: p.route.label(),
                    apexes: p.apexes.iter().map(|&a| point(a)).collect(),
                    values: p.values.clone(),
                    fitted_slope: p.fitted_slope,
                    vanishes: p.vanishes,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct CheckCompactPayload {
    pub certificate: CertificateDto,
    pub probe: VanishingProbeDto,
    /// Bounded and every escape route's testing values die out. Necessary
    /// evidence for compactness, not a proof.
    pub compact_candidate: bool,
}

#[derive(Serialize)]
pub struct SplitEntry {
    pub split: u32,
    pub value: f64,
}

#[derive(Serialize)]
pub struct SparseBoundPayload {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub split_used: u32,
    pub apex: [f64; 2],
    /// `‖W f‖_{q,α}^q` for the kernel test function at `apex`.
    pub operator_side: f64,
    /// Sparse form at the chosen split over the box collection.
    pub sparse_value: f64,
    /// `operator_side / sparse_value`; absent when the form vanishes.
    pub ratio: Option<f64>,
    pub boxes: usize,
    pub lower_bound_only: bool,
    pub per_split: Vec<SplitEntry>,
}

#[derive(Serialize)]
pub struct TentRatioDto {
    pub y: f64,
    pub weighted_mass: f64,
    pub tent_mass: f64,
    pub ratio: f64,
    pub converged: bool,
}

impl From<&TentRatio<f64>> for TentRatioDto {
    fn from(t: &TentRatio<f64>) -> Self {
        TentRatioDto {
            y: t.y,
            weighted_mass: t.weighted_mass,
            tent_mass: t.tent_mass,
            ratio: t.ratio,
            converged: t.converged,
        }
    }
}

#[derive(Serialize)]
pub struct WeightClassPayload {
    pub certificate: WeightCertificateDto,
    /// `ω`-mass of tents over the origin against their reference measure,
    /// along the scenario's probe heights.
    pub tent_ratios: Vec<TentRatioDto>,
    /// Operator certificate when the scenario also fixes `p` and `q`.
    pub boundedness: Option<CertificateDto>,
}

#[derive(Serialize)]
pub struct EstimateRowDto {
    pub apex: [f64; 2],
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub converged: bool,
}

#[derive(Serialize)]
pub struct WeightedEstimatePayload {
    pub class_certificate: WeightCertificateDto,
    pub class_constant: f64,
    pub rows: Vec<EstimateRowDto>,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub all_converged: bool,
}

impl WeightedEstimatePayload {
    pub fn new(table: &WeightedEstimateTable<f64>) -> Self {
        WeightedEstimatePayload {
            class_certificate: (&table.class_certificate).into(),
            class_constant: table.class_constant,
            rows: table
                .rows
                .iter()
                .map(|r| EstimateRowDto {
                    apex: point(r.apex),
                    lhs: r.lhs,
                    rhs: r.rhs,
                    ratio: r.ratio,
                    converged: r.converged,
                })
                .collect(),
            max_ratio: table.max_ratio,
            min_ratio: table.min_ratio,
            all_converged: table.all_converged,
        }
    }
}

/// Envelope + payload as pretty JSON with a trailing newline.
pub fn render_json<P: Serialize>(command: &str, scenario: &Validated, payload: P) -> String {
    let report = Report {
        schema: SCHEMA,
        tool: Tool::current(),
        command,
        scenario: ScenarioEcho::from_validated(scenario),
        payload,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serialization");
    text.push('\n');
    text
}

/// Shortest round-trip decimal form; what the CSV tables use for floats.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// RFC-4180 CSV with a header row.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("csv header");
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row).expect("csv row");
    }
    let bytes = w.into_inner().expect("csv flush");
    String::from_utf8(bytes).expect("csv utf8")
}
