//! Acceptance gate: eleven numbered checks, one [PASS]/[FAIL] line each,
//! with tolerances and runtime budgets pinned in code. Exit code 0 only
//! when every check holds.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bergman::carleson::{
    boundedness_certificate, default_check_points, reproducing_check, testing_condition_value,
    vanishing_probe, ApexLattice, EscapeRoute, Verdict,
};
use bergman::geometry::{
    cover_interval, CarlesonBox, Dyadic, GridInterval, HalfPlanePoint, Interval, Rect, Shift,
    TruncatedBoxCollection,
};
use bergman::quadrature::{integrate_rect, QuadratureSpec, WeightParameter};
use bergman::sparse::{
    compactness_profile, default_corpus, escaping_sequence, operator_vs_sparse, sparse_form,
    unweighted_sparse_form, ExhaustingFamily, SparseFormParams,
};
use bergman::symbols::{SymbolExpression, WeightExpression};
use bergman::weights::{b_class_constant, b_class_value, not_carleson_probe, BWeightParams, ClassVerdict};
use bergman::TestFunction;

const PI: f64 = std::f64::consts::PI;

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: &[(u32, &str, f64, Criterion)] = &[
        (1, "closed-form box masses", 1.0, criterion_1),
        (2, "strict-descendant mass fraction", 5.0, criterion_2),
        (3, "three-grid interval cover", 1.0, criterion_3),
        (4, "test-function norm invariance", 30.0, criterion_4),
        (5, "vertical-shift testing values", 60.0, criterion_5),
        (6, "disk-weight class membership", 120.0, criterion_6),
        (7, "bounded/compact discrimination", 120.0, criterion_7),
        (8, "sparse domination stability", 600.0, criterion_8),
        (9, "reproducing-kernel constancy", 60.0, criterion_9),
        (10, "escaping-sequence tail decay", 300.0, criterion_10),
        (11, "byte-identical reports", 600.0, criterion_11),
    ];

    let mut failed = 0usize;
    for &(n, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) if secs <= budget => {
                println!("[PASS] criterion {n}: {title} — {detail} ({secs:.2}s)");
            }
            Ok(detail) => {
                failed += 1;
                println!(
                    "[FAIL] criterion {n}: {title} — exceeded {budget}s budget \
                     ({secs:.2}s; result was otherwise good: {detail})"
                );
            }
            Err(reason) => {
                failed += 1;
                println!("[FAIL] criterion {n}: {title} — {reason} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    std::process::exit(if failed > 0 { 1 } else { 0 });
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn sym(src: &str) -> SymbolExpression<f64> {
    SymbolExpression::parse(src).expect("fixture symbol must parse")
}

/// Box masses `(2^α/π)·ℓ^{α+2}`: closed form against quadrature at
/// rel 1e-6 over the α × ℓ grid.
fn criterion_1() -> Result<String, String> {
    let spec = QuadratureSpec::default();
    let mut combos = 0;
    for alpha in [-0.5, 0.0, 1.0, 2.5] {
        let weight = WeightParameter::new(alpha);
        for side in [0.25f64, 1.0, 8.0] {
            let boxed = CarlesonBox::new(Interval::new(-side / 2.0, side));
            let want = f64::exp2(alpha) / PI * side.powf(alpha + 2.0);
            let closed = weight.box_measure(&boxed);
            if rel_err(closed, want) > 1e-12 {
                return Err(format!(
                    "closed form off at alpha={alpha}, side={side}: got {closed}, want {want}"
                ));
            }
            let est = integrate_rect(&|_| 1.0, weight, &boxed.rect(), &spec)
                .map_err(|e| e.to_string())?;
            if !est.converged {
                return Err(format!("quadrature did not converge at alpha={alpha}, side={side}"));
            }
            if rel_err(est.value, want) > 1e-6 {
                return Err(format!(
                    "quadrature off at alpha={alpha}, side={side}: got {}, want {want}",
                    est.value
                ));
            }
            combos += 1;
        }
    }
    Ok(format!("{combos} (alpha, side) combinations within 1e-6"))
}

/// The union of a box's strict descendants is its bottom half-strip and
/// carries exactly `1/2^{α+1}` of the mass — closed form to 1e-12 and
/// quadrature to 1e-6 on random grid boxes.
fn criterion_2() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let spec = QuadratureSpec::default();
    let mut boxes = 0;
    for alpha in [-0.5, 0.0, 1.0, 2.5] {
        let weight = WeightParameter::new(alpha);
        for _ in 0..3 {
            let shift = Shift::ALL[rng.gen_range(0..3usize)];
            let cell = GridInterval::new(shift, rng.gen_range(-3..=3), rng.gen_range(-20..=20));
            let boxed = cell.to_box::<f64>();
            let strip = Rect::new(boxed.base, Interval::new(0.0, boxed.side() / 2.0));
            let want = weight.box_measure(&boxed) / f64::exp2(alpha + 1.0);
            let closed = weight.rect_measure(&strip);
            if rel_err(closed, want) > 1e-12 {
                return Err(format!(
                    "closed form off at alpha={alpha}, cell {cell:?}: got {closed}, want {want}"
                ));
            }
            let est =
                integrate_rect(&|_| 1.0, weight, &strip, &spec).map_err(|e| e.to_string())?;
            if !est.converged || rel_err(est.value, want) > 1e-6 {
                return Err(format!(
                    "quadrature off at alpha={alpha}, cell {cell:?}: got {}, want {want}",
                    est.value
                ));
            }
            boxes += 1;
        }
    }
    Ok(format!("{boxes} random boxes match the half-mass split"))
}

/// Three-grid cover of 10⁴ random intervals: containment exact, ratio ≤ 3
/// (≤ 6 when escalated), escalations ≤ 0.1%.
fn criterion_3() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let total = 10_000;
    let mut escalated = 0u32;
    for _ in 0..total {
        let left: f64 = rng.gen_range(-1e4..1e4);
        let length = f64::exp2(rng.gen_range(-12.0..12.0)) * rng.gen_range(1.0..2.0);
        let cover = cover_interval(left, length);
        let a3 = Dyadic::from_f64(left).times(3);
        let b3 = a3.add(Dyadic::from_f64(length).times(3));
        if !cover.cell.contains_interval_times3(a3, b3) {
            return Err(format!("cover misses [{left}, {left} + {length})"));
        }
        let bound = if cover.escalated {
            escalated += 1;
            6.0
        } else {
            3.0
        };
        if cover.ratio > bound {
            return Err(format!("ratio {} above {bound} for length {length}", cover.ratio));
        }
    }
    if escalated > total / 1000 {
        return Err(format!("{escalated} escalations out of {total}"));
    }
    Ok(format!("{total} intervals covered, {escalated} escalations"))
}

/// `‖f_{a,t}‖^t_{t,0} = 1/4` to rel 1e-3 for nine (a, t) combinations, with
/// apex-invariance spread below 1e-3.
fn criterion_4() -> Result<String, String> {
    use bergman::carleson::test_function_norm;
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in [(0.0, 1.0), (2.0, 0.25), (-1.0, 4.0)] {
        for t in [1.0, 2.0, 4.0] {
            let tf = TestFunction::new(HalfPlanePoint::new(x, y), t, weight);
            let est = test_function_norm(&tf, &spec).map_err(|e| e.to_string())?;
            if !est.converged {
                return Err(format!("norm quadrature did not converge at ({x}, {y}), t={t}"));
            }
            if rel_err(est.value, 0.25) > 1e-3 {
                return Err(format!("norm power {} at ({x}, {y}), t={t}; want 0.25", est.value));
            }
            lo = lo.min(est.value);
            hi = hi.max(est.value);
        }
    }
    let spread = (hi - lo) / 0.25;
    if spread >= 1e-3 {
        return Err(format!("apex spread {spread} ≥ 1e-3"));
    }
    Ok(format!("9 combinations at 1/4, spread {spread:.2e}"))
}

/// Vertical shift u=1, φ=z+i at p=q=2, α=0: testing integral matches
/// y²/(4(1+y)²) to 1% at four heights; lattice sup in [0.24, 0.26] with a
/// bounded verdict.
fn criterion_5() -> Result<String, String> {
    let u = sym("1");
    let phi = sym("z + i");
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    for y in [0.25, 1.0, 4.0, 100.0] {
        let apex = HalfPlanePoint::new(0.0, y);
        let est = testing_condition_value(&u, &phi, apex, 2.0, 2.0, weight, &[], &spec)
            .map_err(|e| e.to_string())?;
        let want = y * y / (4.0 * (1.0 + y) * (1.0 + y));
        if !est.converged || rel_err(est.value, want) > 1e-2 {
            return Err(format!("testing value {} at y={y}, want {want}", est.value));
        }
    }
    let lattice = ApexLattice::with_refinement(0);
    let cert = boundedness_certificate(&u, &phi, 2.0, 2.0, weight, &lattice, &[], &spec)
        .map_err(|e| e.to_string())?;
    for (name, sup) in [("base", cert.base_sup), ("refined", cert.refined_sup)] {
        if !(0.24..=0.26).contains(&sup) {
            return Err(format!("{name} sup {sup} outside [0.24, 0.26]"));
        }
    }
    if cert.verdict != Verdict::Bounded {
        return Err(format!("verdict {:?}, want Bounded", cert.verdict));
    }
    Ok(format!(
        "closed forms at 4 heights; sup {:.4} → {:.4}, bounded",
        cert.base_sup, cert.refined_sup
    ))
}

/// Compactly supported disk weight at q=1.5, s=2.5: class constant finite
/// and stable under refinement, value at ζ=i inside [1/9, 1/4], tent ratio
/// doubling as the apex height halves.
fn criterion_6() -> Result<String, String> {
    let u = sym("1");
    let phi = sym("z + i");
    let omega = WeightExpression::parse("indisk(z) / abs(z)").map_err(|e| e.to_string())?;
    let weight = WeightParameter::new(0.0);
    // The weight is supported on the unit half-disk: a window that hugs the
    // support keeps the class integrals exact and the sampler dense.
    let spec = QuadratureSpec::default().with_tols(1e-3, 1e-14).with_truncation(Rect::new(
        Interval::new(-1.0, 2.0),
        Interval::new(0.0, 1.0),
    ));
    let params = BWeightParams::new(u, phi, omega.clone(), 1.5, weight).with_split(2.5);

    let cert = b_class_constant(&params, &ApexLattice::with_refinement(0), &[], &spec)
        .map_err(|e| e.to_string())?;
    if cert.verdict != ClassVerdict::InClass {
        return Err(format!("class verdict {:?}, want InClass", cert.verdict));
    }
    if !cert.refined_sup.is_finite() || cert.relative_change.abs() >= 0.05 {
        return Err(format!(
            "sup {} with relative change {} not stable",
            cert.refined_sup, cert.relative_change
        ));
    }

    let at_i = b_class_value(&params, HalfPlanePoint::new(0.0, 1.0), &[], &spec)
        .map_err(|e| e.to_string())?;
    if !at_i.converged || !(1.0 / 9.0..=0.25).contains(&at_i.value) {
        return Err(format!("class value {} at ζ=i outside [1/9, 1/4]", at_i.value));
    }

    let ratios = not_carleson_probe(&omega, weight, &[0.4, 0.2, 0.1, 0.05], &spec)
        .map_err(|e| e.to_string())?;
    for pair in ratios.windows(2) {
        let quotient = pair[1].ratio / pair[0].ratio;
        if !pair[1].converged || (quotient - 2.0).abs() > 0.1 {
            return Err(format!(
                "tent ratio quotient {quotient} between y={} and y={}",
                pair[0].y, pair[1].y
            ));
        }
    }
    Ok(format!(
        "sup {:.4} stable ({:+.2e}), value at i {:.4}, tent ratios double",
        cert.refined_sup, cert.relative_change, at_i.value
    ))
}

/// The shift is bounded but not compact (testing values stall near 1/4 at
/// infinity); the identity with q > p is unbounded.
fn criterion_7() -> Result<String, String> {
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    let lattice = ApexLattice::with_refinement(0);
    let u = sym("1");

    let shift = sym("z + i");
    let cert = boundedness_certificate(&u, &shift, 2.0, 2.0, weight, &lattice, &[], &spec)
        .map_err(|e| e.to_string())?;
    if cert.verdict != Verdict::Bounded {
        return Err(format!("shift verdict {:?}, want Bounded", cert.verdict));
    }
    let probe = vanishing_probe(&u, &shift, 2.0, 2.0, weight, &[], &spec, 8)
        .map_err(|e| e.to_string())?;
    let infinity = probe
        .profiles
        .iter()
        .find(|p| p.route == EscapeRoute::Infinity)
        .ok_or("no infinity route in probe")?;
    let stall = *infinity.values.last().unwrap();
    if infinity.vanishes || !(0.24..=0.26).contains(&stall) {
        return Err(format!("infinity route value {stall}, want a stall near 1/4"));
    }

    let identity = sym("z");
    let cert = boundedness_certificate(&u, &identity, 2.0, 4.0, weight, &lattice, &[], &spec)
        .map_err(|e| e.to_string())?;
    if cert.verdict != Verdict::Unbounded {
        return Err(format!("identity p=2→q=4 verdict {:?}, want Unbounded", cert.verdict));
    }
    Ok(format!(
        "shift bounded, infinity stalls at {stall:.4}; exponent upgrade unbounded (sup ×{:.1})",
        1.0 + cert.relative_change
    ))
}

/// Operator norm power against the sparse form over the 12-function corpus:
/// every ratio finite, the corpus max drifting < 10% when the collection
/// doubles; the γ=1 weighted form is bitwise the unweighted form on
/// identity symbols.
fn criterion_8() -> Result<String, String> {
    let u = sym("1");
    let phi = sym("z + i");
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    let params = SparseFormParams::new(1, 1.0, 2.0, 2.0);
    let corpus = default_corpus(2.0, weight);
    // Per-level contributions decay geometrically away from each bump's
    // scale in both directions — but slowly upward (≈0.56 per level, the
    // kernels only decay like |z|⁻²), so the ceiling needs several octaves
    // above the highest apex scale (2²) before the doubling drift settles
    // under the bound; the floor is cheaper at ≈0.5 per level below 2⁻².
    let collection = TruncatedBoxCollection::new(-6, 8, -8.0, 8.0);

    let base = operator_vs_sparse(&corpus, &u, &phi, &params, weight, &collection, &[], &spec)
        .map_err(|e| e.to_string())?;
    let doubled =
        operator_vs_sparse(&corpus, &u, &phi, &params, weight, &collection.doubled(), &[], &spec)
            .map_err(|e| e.to_string())?;
    for table in [&base, &doubled] {
        if !table.all_converged {
            return Err("a corpus quadrature failed to converge".into());
        }
        for row in &table.rows {
            match row.ratio {
                Some(r) if r.is_finite() && r > 0.0 => {}
                _ => return Err(format!("ratio missing or degenerate for {}", row.label)),
            }
        }
    }
    let (m_base, m_doubled) = match (base.max_ratio, doubled.max_ratio) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err("corpus max ratio missing".into()),
    };
    let drift = (m_doubled / m_base - 1.0).abs();
    if drift >= 0.10 {
        return Err(format!("max ratio drifts {drift:.3} ({m_base} → {m_doubled})"));
    }

    // γ = 1 never evaluates the pullback, so on identity symbols the
    // weighted and unweighted sums must agree bit for bit, row by row.
    let f = TestFunction::new(HalfPlanePoint::new(0.0, 1.0), 2.0, weight);
    let id_u = sym("1");
    let id_phi = sym("z");
    let weighted = sparse_form(
        &|z| f.eval(z),
        &id_u,
        &id_phi,
        &params,
        weight,
        &collection,
        &[],
        &spec,
        true,
    )
    .map_err(|e| e.to_string())?;
    let plain = unweighted_sparse_form(&|z| f.eval(z), 1, 2.0, weight, &collection, &spec, true)
        .map_err(|e| e.to_string())?;
    if weighted.value.to_bits() != plain.value.to_bits() {
        return Err(format!("totals differ: {} vs {}", weighted.value, plain.value));
    }
    let (wrows, prows) = (weighted.rows.unwrap(), plain.rows.unwrap());
    if wrows.len() != prows.len() {
        return Err("row counts differ".into());
    }
    for (a, b) in wrows.iter().zip(&prows) {
        if a.summand.to_bits() != b.summand.to_bits() {
            return Err(format!(
                "summand differs on grid {} level {} left {}",
                a.grid, a.level, a.left
            ));
        }
    }
    Ok(format!(
        "corpus max ratio {m_base:.4} → {m_doubled:.4} (drift {:.2}%); γ=1 bitwise over {} boxes",
        drift * 100.0,
        wrows.len()
    ))
}

/// Reproducing-kernel ratios at ten points: dispersion below 10× the
/// quadrature tolerance for α ∈ {0, 1}, and the α=0 constant within 2% of 1.
fn criterion_9() -> Result<String, String> {
    let spec = QuadratureSpec::default();
    let bound = 10.0 * spec.rel_tol;
    let mut detail = String::new();
    for alpha in [0.0, 1.0] {
        let weight = WeightParameter::new(alpha);
        let f = TestFunction::new(HalfPlanePoint::new(0.0, 1.0), 2.0, weight);
        let check = reproducing_check(&f, &default_check_points::<f64>(), weight, &spec)
            .map_err(|e| e.to_string())?;
        if !check.all_converged {
            return Err(format!("reproducing quadrature did not converge at alpha={alpha}"));
        }
        if check.dispersion >= bound {
            return Err(format!(
                "dispersion {} at alpha={alpha}, bound {bound}",
                check.dispersion
            ));
        }
        if alpha == 0.0 {
            let c = check.constant_estimate;
            if rel_err(c.re, 1.0) > 0.02 || c.im.abs() > 1e-3 {
                return Err(format!("constant estimate {c} not within 2% of 1"));
            }
        }
        detail.push_str(&format!("α={alpha}: dispersion {:.1e}; ", check.dispersion));
    }
    Ok(format!("{detail}constant within 2%"))
}

/// Tail functional of the escaping family f_m = f_{i/m, q}: monotone in the
/// exhaustion index and below 1e-3 of its first value by n=8 for the shift;
/// not so for the identity.
fn criterion_10() -> Result<String, String> {
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    let params = SparseFormParams::new(1, 1.5, 2.0, 2.0);
    let family = ExhaustingFamily::new(8);
    let collection = TruncatedBoxCollection::new(-6, 4, -8.0, 8.0);
    let sequence = escaping_sequence(2.0, weight, 12);
    let u = sym("1");

    let shift = compactness_profile(
        &sequence,
        &u,
        &sym("z + i"),
        &params,
        weight,
        &family,
        &collection,
        &[],
        &spec,
    )
    .map_err(|e| e.to_string())?;
    if !shift.all_converged {
        return Err("a shift tail quadrature failed to converge".into());
    }
    for pair in shift.tails.windows(2) {
        if pair[1] > pair[0] {
            return Err(format!("shift tail increases: {} → {}", pair[0], pair[1]));
        }
    }
    let first = shift.tails[0];
    let last = *shift.tails.last().unwrap();
    if !(first > 0.0) {
        return Err("shift tail starts at zero; nothing to decay".into());
    }
    if last > 1e-3 * first {
        return Err(format!("shift tail {last} at n=8 above 1e-3 × {first}"));
    }

    let identity = compactness_profile(
        &sequence,
        &u,
        &sym("z"),
        &params,
        weight,
        &family,
        &collection,
        &[],
        &spec,
    )
    .map_err(|e| e.to_string())?;
    let id_first = identity.tails[0];
    let id_last = *identity.tails.last().unwrap();
    if id_last <= 1e-3 * id_first {
        return Err(format!(
            "identity tail {id_last} fell below 1e-3 × {id_first}; expected it to persist"
        ));
    }
    Ok(format!(
        "shift tail {first:.3e} → {last:.1e}; identity persists at {:.2}%",
        100.0 * id_last / id_first
    ))
}

fn asset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

fn capture(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!(
            "`bergman {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

/// Every bundled scenario, run twice through the binary, produces
/// byte-identical JSON — including single- versus eight-thread runs.
fn criterion_11() -> Result<String, String> {
    let runs: &[(&str, &str)] = &[
        ("check-compact", "shift.toml"),
        ("check-bounded", "identity-upgrade.toml"),
        ("weighted-estimate", "disk-weight.toml"),
        ("weight-class", "borderline.toml"),
        ("weight-class", "exp-weight.toml"),
    ];
    for &(command, scenario) in runs {
        let path = asset(scenario);
        let path = path.to_str().ok_or("asset path not UTF-8")?;
        let first = capture(&[command, "--scenario", path])?;
        let second = capture(&[command, "--scenario", path])?;
        if first != second {
            return Err(format!("{command} on {scenario} differs between runs"));
        }
    }
    let path = asset("shift.toml");
    let path = path.to_str().ok_or("asset path not UTF-8")?;
    let single = capture(&["check-compact", "--scenario", path, "--threads", "1"])?;
    let eight = capture(&["check-compact", "--scenario", path, "--threads", "8"])?;
    if single != eight {
        return Err("thread count changed the report bytes".into());
    }
    Ok(format!("{} scenarios byte-stable, threads 1 ≡ 8", runs.len()))
}
