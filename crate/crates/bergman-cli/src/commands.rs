//! One function per subcommand: run the library against a validated
//! scenario, decide conclusiveness, and shape the results into a JSON
//! report plus a CSV table.

use std::error::Error;

use num_complex::Complex;

use bergman::carleson::{
    boundedness_certificate, testing_condition_value, vanishing_probe, weighted_norm_power,
    ApexLattice, TestFunction, Verdict,
};
use bergman::geometry::{HalfPlanePoint, Interval, Rect, TruncatedBoxCollection};
use bergman::quadrature::{integrate_rect, QuadratureSpec, WeightParameter};
use bergman::sparse::{
    sparse_form, sparse_form_infimum, unweighted_sparse_form, SparseFormParams,
};
use bergman::symbols::SymbolExpression;
use bergman::weights::{
    b_class_constant, not_carleson_probe, weighted_estimate_check, BWeightParams, ClassVerdict,
};

use crate::report::{
    num, render_csv, render_json, CheckBoundedPayload, CheckCompactPayload, SamplePoint,
    SparseBoundPayload, SplitEntry, VanishingProbeDto, WeightClassPayload,
    WeightedEstimatePayload,
};
use crate::scenario::Validated;

/// What a command hands back to `main`: both renderings plus whether the
/// numerics failed to reach a verdict (exit code 2).
pub struct Outcome {
    pub json: String,
    pub csv: String,
    pub inconclusive: bool,
}

pub type CommandError = Box<dyn Error + Send + Sync>;
type CommandResult = Result<Outcome, CommandError>;

fn simple_error(message: String) -> CommandError {
    Box::new(crate::scenario::ScenarioError { message })
}

const SWEEP_HEADER: [&str; 6] = ["sweep", "x", "y", "value", "error_bound", "converged"];

fn sweep_rows(base: &[SamplePoint], refined: &[SamplePoint]) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(base.len() + refined.len());
    for (tag, set) in [("base", base), ("refined", refined)] {
        for s in set {
            rows.push(vec![
                tag.to_string(),
                num(s.x),
                num(s.y),
                num(s.value),
                num(s.error_bound),
                s.converged.to_string(),
            ]);
        }
    }
    rows
}

pub fn check_bounded(v: &Validated) -> CommandResult {
    let (p, q) = v.exponent_pair()?;
    let lattice = ApexLattice::with_refinement(v.lattice_refinement);
    let cert = boundedness_certificate(&v.u, &v.phi, p, q, v.weight, &lattice, &v.masks, &v.spec)?;
    let inconclusive = cert.verdict == Verdict::Inconclusive;
    let payload = CheckBoundedPayload { certificate: (&cert).into() };
    let csv = render_csv(
        &SWEEP_HEADER,
        &sweep_rows(&payload.certificate.base_samples, &payload.certificate.refined_samples),
    );
    let json = render_json("check-bounded", v, payload);
    Ok(Outcome { json, csv, inconclusive })
}

pub fn check_compact(v: &Validated) -> CommandResult {
    let (p, q) = v.exponent_pair()?;
    let lattice = ApexLattice::with_refinement(v.lattice_refinement);
    let cert = boundedness_certificate(&v.u, &v.phi, p, q, v.weight, &lattice, &v.masks, &v.spec)?;
    let probe =
        vanishing_probe(&v.u, &v.phi, p, q, v.weight, &v.masks, &v.spec, v.escape_steps)?;
    let inconclusive = cert.verdict == Verdict::Inconclusive || !probe.all_converged;
    let compact_candidate = cert.verdict == Verdict::Bounded && probe.all_vanish;

    let mut rows = Vec::new();
    for profile in &probe.profiles {
        for (i, (apex, value)) in profile.apexes.iter().zip(&profile.values).enumerate() {
            rows.push(vec![
                profile.route.label().to_string(),
                (i + 1).to_string(),
                num(apex.x),
                num(apex.y),
                num(*value),
            ]);
        }
    }
    let csv = render_csv(&["route", "step", "x", "y", "value"], &rows);

    let payload = CheckCompactPayload {
        certificate: (&cert).into(),
        probe: VanishingProbeDto::new(&probe, v.escape_steps),
        compact_candidate,
    };
    let json = render_json("check-compact", v, payload);
    Ok(Outcome { json, csv, inconclusive })
}

pub fn sparse_bound(v: &Validated) -> CommandResult {
    let (p, q) = v.exponent_pair()?;
    let apex = v.corpus_apexes[0];
    let f = TestFunction::new(apex, p, v.weight);
    let feval = move |z: Complex<f64>| f.eval(z);
    let collection = TruncatedBoxCollection::new(
        v.collection_min_level,
        v.collection_max_level,
        v.collection_window[0],
        v.collection_window[1],
    );

    let operator = weighted_norm_power(&v.u, &v.phi, &feval, q, v.weight, &v.masks, &v.spec)?;

    let (per_split, split_used, scan_lower_only) = match v.split {
        Some(n) => {
            if f64::from(n) > p {
                return Err(simple_error(format!(
                    "split {n} is not admissible for p = {p}: the form needs N <= p"
                )));
            }
            let params = SparseFormParams::new(n, v.gamma, p, q);
            let one = sparse_form(
                &feval, &v.u, &v.phi, &params, v.weight, &collection, &v.masks, &v.spec, false,
            )?;
            (vec![(n, one.value)], n, one.lower_bound_only)
        }
        None => {
            let scan = sparse_form_infimum(
                &feval, &v.u, &v.phi, v.gamma, p, q, v.weight, &collection, &v.masks, &v.spec,
            )?;
            (scan.per_split, scan.best_split, scan.lower_bound_only)
        }
    };

    // Second pass at the chosen split keeps the per-box rows for the table.
    let params = SparseFormParams::new(split_used, v.gamma, p, q);
    let detailed = sparse_form(
        &feval, &v.u, &v.phi, &params, v.weight, &collection, &v.masks, &v.spec, true,
    )?;
    let ratio =
        if detailed.value > 0.0 { Some(operator.value / detailed.value) } else { None };
    let inconclusive = detailed.lower_bound_only || scan_lower_only || !operator.converged;

    let rows: Vec<Vec<String>> = detailed
        .rows
        .as_deref()
        .unwrap_or(&[])
        .iter()
        .map(|r| {
            vec![
                r.grid.to_string(),
                r.level.to_string(),
                num(r.left),
                num(r.mu_term),
                num(r.measure_term),
                num(r.avg1),
                num(r.avg2),
                num(r.summand),
            ]
        })
        .collect();
    let csv = render_csv(
        &["grid", "level", "left", "mu_term", "measure_term", "avg1", "avg2", "summand"],
        &rows,
    );

    let payload = SparseBoundPayload {
        p,
        q,
        gamma: v.gamma,
        split_used,
        apex: [apex.x, apex.y],
        operator_side: operator.value,
        sparse_value: detailed.value,
        ratio,
        boxes: detailed.boxes,
        lower_bound_only: detailed.lower_bound_only || scan_lower_only,
        per_split: per_split.iter().map(|&(s, val)| SplitEntry { split: s, value: val }).collect(),
    };
    let json = render_json("sparse-bound", v, payload);
    Ok(Outcome { json, csv, inconclusive })
}

fn weight_params(v: &Validated) -> Result<BWeightParams<f64>, CommandError> {
    let q = match v.q {
        Some(q) if q > 1.0 => q,
        Some(q) => {
            return Err(simple_error(format!("weight-class analysis needs q > 1 (got q = {q})")))
        }
        None => return Err(simple_error("scenario needs [exponents] q for this command".into())),
    };
    let omega = v.omega_required()?.clone();
    let mut params = BWeightParams::new(v.u.clone(), v.phi.clone(), omega, q, v.weight);
    if let Some(s) = v.s {
        params = params.with_split(s);
    }
    Ok(params)
}

pub fn weight_class(v: &Validated) -> CommandResult {
    let params = weight_params(v)?;
    let lattice = ApexLattice::with_refinement(v.lattice_refinement);
    let cert = b_class_constant(&params, &lattice, &v.masks, &v.spec)?;
    let tents = not_carleson_probe(params.omega(), v.weight, &v.probe_heights, &v.spec)?;
    let boundedness = match v.p {
        Some(p) => Some(boundedness_certificate(
            &v.u,
            &v.phi,
            p,
            params.q(),
            v.weight,
            &lattice,
            &v.masks,
            &v.spec,
        )?),
        None => None,
    };

    let inconclusive = cert.verdict == ClassVerdict::Inconclusive
        || boundedness.as_ref().is_some_and(|b| b.verdict == Verdict::Inconclusive);

    let payload = WeightClassPayload {
        certificate: (&cert).into(),
        tent_ratios: tents.iter().map(Into::into).collect(),
        boundedness: boundedness.as_ref().map(Into::into),
    };
    let csv = render_csv(
        &SWEEP_HEADER,
        &sweep_rows(&payload.certificate.base_samples, &payload.certificate.refined_samples),
    );
    let json = render_json("weight-class", v, payload);
    Ok(Outcome { json, csv, inconclusive })
}

pub fn weighted_estimate(v: &Validated) -> CommandResult {
    let params = weight_params(v)?;
    let lattice = ApexLattice::with_refinement(v.lattice_refinement);
    let table = weighted_estimate_check(&params, &v.corpus_apexes, &lattice, &v.masks, &v.spec)?;
    let inconclusive =
        table.class_certificate.verdict == ClassVerdict::Inconclusive || !table.all_converged;
    let payload = WeightedEstimatePayload::new(&table);

    let rows: Vec<Vec<String>> = payload
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.apex[0]),
                num(r.apex[1]),
                num(r.lhs),
                num(r.rhs),
                r.ratio.map(num).unwrap_or_default(),
                r.converged.to_string(),
            ]
        })
        .collect();
    let csv = render_csv(&["x", "y", "lhs", "rhs", "ratio", "converged"], &rows);
    let json = render_json("weighted-estimate", v, payload);
    Ok(Outcome { json, csv, inconclusive })
}

/// Built-in oracle checks against closed forms. Prints one line per check;
/// the exit status says whether they all held.
pub fn selftest() -> i32 {
    let checks: [(&str, fn() -> Result<(), String>); 6] = [
        ("box measure matches quadrature", selftest_box_measure),
        ("children carry half the box mass", selftest_children_mass),
        ("kernel norm matches closed form", selftest_kernel_norm),
        ("testing value matches closed form", selftest_testing_value),
        ("weighted form at gamma 1 equals unweighted form", selftest_gamma_one),
        ("expressions round-trip through their canonical form", selftest_round_trip),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("[PASS] {name}"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    if failures == 0 {
        println!("selftest: all {} checks passed", checks.len());
        0
    } else {
        println!("selftest: {failures} of {} checks failed", checks.len());
        1
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol * want.abs().max(1e-300) {
        Ok(())
    } else {
        Err(format!("got {got}, want {want} (rel tol {tol})"))
    }
}

fn selftest_box_measure() -> Result<(), String> {
    let weight = WeightParameter::new(0.0);
    let rect = Rect::new(Interval::new(0.0, 1.0), Interval::new(0.0, 1.0));
    let est = integrate_rect(&|_| 1.0, weight, &rect, &QuadratureSpec::default())
        .map_err(|e| e.to_string())?;
    rel_close(est.value, weight.box_measure_of_side(1.0), 1e-9)
}

fn selftest_children_mass() -> Result<(), String> {
    for alpha in [-0.5, 0.0, 1.0] {
        let weight = WeightParameter::new(alpha);
        let children = 2.0 * weight.box_measure_of_side(0.5);
        let want = weight.box_measure_of_side(1.0) / 2.0f64.powf(alpha + 1.0);
        rel_close(children, want, 1e-12).map_err(|e| format!("alpha {alpha}: {e}"))?;
    }
    Ok(())
}

fn selftest_kernel_norm() -> Result<(), String> {
    let weight = WeightParameter::new(0.0);
    let one = SymbolExpression::parse("1").map_err(|e| e.to_string())?;
    let ident = SymbolExpression::parse("z").map_err(|e| e.to_string())?;
    let f = TestFunction::new(HalfPlanePoint::new(0.0, 1.0), 2.0, weight);
    let feval = move |z: Complex<f64>| f.eval(z);
    let est = weighted_norm_power(&one, &ident, &feval, 2.0, weight, &[], &QuadratureSpec::default())
        .map_err(|e| e.to_string())?;
    rel_close(est.value, f.norm_power(), 1e-3)
}

fn selftest_testing_value() -> Result<(), String> {
    let weight = WeightParameter::new(0.0);
    let one = SymbolExpression::parse("1").map_err(|e| e.to_string())?;
    let shift = SymbolExpression::parse("z + i").map_err(|e| e.to_string())?;
    let est = testing_condition_value(
        &one,
        &shift,
        HalfPlanePoint::new(0.0, 1.0),
        2.0,
        2.0,
        weight,
        &[],
        &QuadratureSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    // u = 1, φ = z + i at apex i: y_a^2 / (4 (1 + y_a)^2) = 1/16.
    rel_close(est.value, 1.0 / 16.0, 1e-2)
}

fn selftest_gamma_one() -> Result<(), String> {
    let weight = WeightParameter::new(0.0);
    let one = SymbolExpression::parse("1").map_err(|e| e.to_string())?;
    let ident = SymbolExpression::parse("z").map_err(|e| e.to_string())?;
    let f = TestFunction::new(HalfPlanePoint::new(0.0, 1.0), 2.0, weight);
    let feval = move |z: Complex<f64>| f.eval(z);
    let collection = TruncatedBoxCollection::new(-2, 2, -2.0, 2.0);
    let spec = QuadratureSpec { rel_tol: 1e-4, ..QuadratureSpec::default() };
    let params = SparseFormParams::new(1, 1.0, 2.0, 2.0);
    let weighted =
        sparse_form(&feval, &one, &ident, &params, weight, &collection, &[], &spec, false)
            .map_err(|e| e.to_string())?;
    let unweighted = unweighted_sparse_form(&feval, 1, 2.0, weight, &collection, &spec, false)
        .map_err(|e| e.to_string())?;
    if weighted.value == unweighted.value {
        Ok(())
    } else {
        Err(format!("{} != {}", weighted.value, unweighted.value))
    }
}

fn selftest_round_trip() -> Result<(), String> {
    for source in ["(z - 1) / (z + 2*i)", "0.5 * z^2 + i", "1 / (z + i)^2"] {
        let parsed = SymbolExpression::<f64>::parse(source).map_err(|e| e.to_string())?;
        let again =
            SymbolExpression::<f64>::parse(&parsed.canonical()).map_err(|e| e.to_string())?;
        if parsed.canonical() != again.canonical() {
            return Err(format!("{source:?} drifted to {:?}", again.canonical()));
        }
    }
    Ok(())
}
