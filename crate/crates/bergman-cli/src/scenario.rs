//! Scenario files: TOML schema, parsing, and validation. Everything is
//! checked before any quadrature runs; the validated form carries parsed
//! symbols and fully resolved numeric settings.

use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;

use bergman::geometry::{HalfPlanePoint, Interval, Rect};
use bergman::quadrature::{QuadratureSpec, TailModel, WeightParameter};
use bergman::symbols::{PoleMask, SymbolExpression, WeightExpression};

/// Everything that can make a scenario unusable. Rendered to stderr; the
/// process exits with the validation failure code.
#[derive(Debug)]
pub struct ScenarioError {
    pub message: String,
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ScenarioError {}

fn fail<T>(message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { message: message.into() })
}

/// On-disk scenario schema. Unknown keys are rejected so typos surface as
/// validation errors instead of silently falling back to defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub symbols: SymbolsSection,
    #[serde(default)]
    pub exponents: ExponentsSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub tail: TailSection,
    #[serde(default)]
    pub poles: Vec<PoleSection>,
    #[serde(default)]
    pub collection: CollectionSection,
    #[serde(default)]
    pub escape: EscapeSection,
    #[serde(default)]
    pub corpus: CorpusSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolsSection {
    pub u: String,
    pub phi: String,
    #[serde(default)]
    pub omega: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsSection {
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub split: Option<u32>,
    #[serde(default)]
    pub s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(default)]
    pub refinement: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub max_cells: Option<usize>,
    /// `[x_left, x_right, y_bottom, y_top]`.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSection {
    #[serde(default)]
    pub decay: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSection {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSection {
    #[serde(default)]
    pub min_level: Option<i32>,
    #[serde(default)]
    pub max_level: Option<i32>,
    /// `[left, right]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeSection {
    #[serde(default)]
    pub steps: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Apexes `[x, y]` for test-function corpora.
    #[serde(default)]
    pub apexes: Option<Vec<[f64; 2]>>,
    /// Apex heights for tent-mass probes.
    #[serde(default)]
    pub heights: Option<Vec<f64>>,
}

/// A scenario that parsed, validated, and resolved all defaults. Holds the
/// parsed symbols and every numeric setting a command might need.
#[derive(Debug)]
pub struct Validated {
    pub name: String,
    pub u: SymbolExpression<f64>,
    pub phi: SymbolExpression<f64>,
    pub omega: Option<WeightExpression<f64>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub weight: WeightParameter<f64>,
    pub gamma: f64,
    pub split: Option<u32>,
    pub s: Option<f64>,
    pub lattice_refinement: u32,
    pub spec: QuadratureSpec<f64>,
    pub tail_decay: Option<f64>,
    pub masks: Vec<PoleMask<f64>>,
    pub poles: Vec<PoleSection>,
    pub collection_min_level: i32,
    pub collection_max_level: i32,
    pub collection_window: [f64; 2],
    pub escape_steps: u32,
    pub corpus_apexes: Vec<HalfPlanePoint<f64>>,
    pub probe_heights: Vec<f64>,
}

impl Validated {
    /// Exponent pair for commands that need both; errors when absent.
    pub fn exponent_pair(&self) -> Result<(f64, f64), ScenarioError> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => fail("scenario needs [exponents] p and q for this command"),
        }
    }

    pub fn omega_required(&self) -> Result<&WeightExpression<f64>, ScenarioError> {
        match &self.omega {
            Some(w) => Ok(w),
            None => fail("scenario needs [symbols] omega for this command"),
        }
    }
}

pub fn load(path: &Path) -> Result<Validated, ScenarioError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format!("cannot read scenario {}: {e}", path.display())),
    };
    let file: ScenarioFile = match toml::from_str(&text) {
        Ok(f) => f,
        Err(e) => return fail(format!("scenario {} is not valid TOML: {e}", path.display())),
    };
    validate(file)
}

const CR_TOLERANCE: f64 = 1e-3;

pub fn validate(file: ScenarioFile) -> Result<Validated, ScenarioError> {
    if file.name.trim().is_empty() {
        return fail("scenario name must be non-empty");
    }

    // Symbols: parse errors carry byte offsets; the self-map and finiteness
    // probes honor declared pole masks.
    let masks: Vec<PoleMask<f64>> = file
        .poles
        .iter()
        .map(|p| {
            if !(p.radius > 0.0 && p.radius.is_finite()) {
                return fail(format!("pole at ({}, {}) needs a positive radius", p.x, p.y));
            }
            Ok(PoleMask { center: Complex::new(p.x, p.y), radius: p.radius })
        })
        .collect::<Result<_, _>>()?;

    let u = match SymbolExpression::<f64>::parse(&file.symbols.u) {
        Ok(u) => u,
        Err(e) => return fail(format!("symbol u: {e}")),
    };
    let phi = match SymbolExpression::<f64>::parse(&file.symbols.phi) {
        Ok(p) => p,
        Err(e) => return fail(format!("symbol phi: {e}")),
    };
    let omega = match &file.symbols.omega {
        Some(src) => match WeightExpression::<f64>::parse(src) {
            Ok(w) => Some(w),
            Err(e) => return fail(format!("weight omega: {e}")),
        },
        None => None,
    };
    if let Err(e) = u.verify_holomorphic_masked(CR_TOLERANCE, &masks) {
        return fail(format!("symbol u: {e}"));
    }
    if let Err(e) = phi.verify_holomorphic_masked(CR_TOLERANCE, &masks) {
        return fail(format!("symbol phi: {e}"));
    }
    if let Err(e) = phi.verify_self_map(&masks) {
        return fail(format!("symbol phi: {e}"));
    }

    // Exponents.
    let alpha = file.exponents.alpha.unwrap_or(0.0);
    if !(alpha > -1.0 && alpha.is_finite()) {
        return fail(format!("alpha = {alpha} must satisfy alpha > -1"));
    }
    let weight = WeightParameter::new(alpha);
    if let (Some(p), Some(q)) = (file.exponents.p, file.exponents.q) {
        if !(1.0 <= p && p <= q && q.is_finite()) {
            return fail(format!("exponents p = {p}, q = {q} must satisfy 1 <= p <= q"));
        }
    }
    if let Some(p) = file.exponents.p {
        if !(p >= 1.0 && p.is_finite()) {
            return fail(format!("exponent p = {p} must satisfy p >= 1"));
        }
    }
    if let Some(q) = file.exponents.q {
        if !(q >= 1.0 && q.is_finite()) {
            return fail(format!("exponent q = {q} must satisfy q >= 1"));
        }
    }
    let gamma = file.exponents.gamma.unwrap_or(1.0);
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return fail(format!("gamma = {gamma} must satisfy gamma >= 1"));
    }
    if let Some(split) = file.exponents.split {
        if split < 1 {
            return fail("split must be a positive integer");
        }
    }
    if let Some(s) = file.exponents.s {
        let q = match file.exponents.q {
            Some(q) if q > 1.0 => q,
            _ => return fail("split order s needs [exponents] q > 1"),
        };
        let qc = q / (q - 1.0);
        if !(1.0 < s && s < qc) {
            return fail(format!("split order s = {s} must satisfy 1 < s < q' = {qc}"));
        }
    }

    // Quadrature.
    let mut spec = QuadratureSpec::<f64>::default();
    if let Some(rel) = file.quadrature.rel_tol {
        if !(rel > 0.0 && rel < 1.0) {
            return fail(format!("rel_tol = {rel} must lie in (0, 1)"));
        }
        spec.rel_tol = rel;
    }
    if let Some(abs) = file.quadrature.abs_tol {
        if !(abs >= 0.0 && abs.is_finite()) {
            return fail(format!("abs_tol = {abs} must be finite and nonnegative"));
        }
        spec.abs_tol = abs;
    }
    if let Some(cells) = file.quadrature.max_cells {
        if cells < 1 {
            return fail("max_cells must be at least 1");
        }
        spec.max_cells = cells;
    }
    if let Some([x0, x1, y0, y1]) = file.quadrature.window {
        if !(x0 < x1 && 0.0 <= y0 && y0 < y1 && x0.is_finite() && y1.is_finite()) {
            return fail(format!(
                "window [{x0}, {x1}] x [{y0}, {y1}] must satisfy x0 < x1 and 0 <= y0 < y1"
            ));
        }
        spec.truncation =
            Rect::new(Interval::from_endpoints(x0, x1), Interval::from_endpoints(y0, y1));
    }
    if let Some(decay) = file.tail.decay {
        if !(decay > 0.0 && decay.is_finite()) {
            return fail(format!("tail decay = {decay} must be positive"));
        }
        spec = spec.with_tail(TailModel::PowerLaw { decay });
    }

    // Box collection.
    let min_level = file.collection.min_level.unwrap_or(-8);
    let max_level = file.collection.max_level.unwrap_or(6);
    if min_level > max_level {
        return fail(format!("collection levels {min_level}..{max_level} are empty"));
    }
    let cwindow = file.collection.window.unwrap_or([-64.0, 64.0]);
    if !(cwindow[0] < cwindow[1]) {
        return fail(format!("collection window [{}, {}] is empty", cwindow[0], cwindow[1]));
    }

    let escape_steps = file.escape.steps.unwrap_or(8);
    if escape_steps < 2 {
        return fail("escape steps must be at least 2");
    }

    let corpus_apexes = match &file.corpus.apexes {
        Some(list) if list.is_empty() => return fail("corpus apexes must be non-empty when given"),
        Some(list) => list
            .iter()
            .map(|&[x, y]| {
                if !(y > 0.0 && y.is_finite() && x.is_finite()) {
                    return fail(format!("corpus apex ({x}, {y}) must lie in the half-plane"));
                }
                Ok(HalfPlanePoint::new(x, y))
            })
            .collect::<Result<_, _>>()?,
        None => vec![
            HalfPlanePoint::new(0.0, 1.0),
            HalfPlanePoint::new(0.0, 0.25),
            HalfPlanePoint::new(2.0, 1.0),
            HalfPlanePoint::new(-1.0, 4.0),
        ],
    };
    let probe_heights = match &file.corpus.heights {
        Some(list) if list.is_empty() => return fail("probe heights must be non-empty when given"),
        Some(list) => {
            for &y in list {
                if !(y > 0.0 && y.is_finite()) {
                    return fail(format!("probe height {y} must be positive"));
                }
            }
            list.clone()
        }
        None => vec![0.4, 0.2, 0.1, 0.05],
    };

    Ok(Validated {
        name: file.name,
        u,
        phi,
        omega,
        p: file.exponents.p,
        q: file.exponents.q,
        weight,
        gamma,
        split: file.exponents.split,
        s: file.exponents.s,
        lattice_refinement: file.lattice.refinement.unwrap_or(0),
        spec,
        tail_decay: file.tail.decay,
        masks,
        poles: file.poles,
        collection_min_level: min_level,
        collection_max_level: max_level,
        collection_window: cwindow,
        escape_steps,
        corpus_apexes,
        probe_heights,
    })
}
