//! Sparse forms over truncated dyadic box collections: positive sums of
//! pullback mass, box measure, and γ-averages that dominate `‖W_{u,φ}f‖^q`,
//! the maximal operators behind that domination, and the tail functional
//! whose decay separates compact operators from merely bounded ones.

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::accum::CompensatedSum;
use crate::carleson::{pullback_measure, weighted_norm_power, TestFunction};
use crate::geometry::{GridInterval, HalfPlanePoint, Rect, Shift, TruncatedBoxCollection};
use crate::quadrature::{
    integrate_rect, IntegralEstimate, QuadratureError, QuadratureSpec, WeightParameter,
};
use crate::real::{of, Real};
use crate::symbols::{masked, PoleMask, SymbolExpression};

/// Everything that can go wrong when assembling a sparse sum.
#[derive(Debug, Error)]
pub enum SparseError {
    #[error(
        "no admissible split: need N >= 1, N < p < q < p + N (got p = {p}, q = {q})"
    )]
    EmptyExponentWindow { p: f64, q: f64 },
    #[error(
        "split N = {n} is not admissible: need N >= 1, N < p < q < p + N (got p = {p}, q = {q})"
    )]
    InadmissibleSplit { n: u32, p: f64, q: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Exponent data for the weighted sparse form: the integer split `N` of
/// `q = N + (q−N)`, the average order `γ`, and the space exponents.
#[derive(Clone, Copy, Debug)]
pub struct SparseFormParams<T: Real> {
    n: u32,
    gamma: T,
    p: T,
    q: T,
}

impl<T: Real> SparseFormParams<T> {
    /// Boundedness form: requires `1 ≤ N ≤ p ≤ q` and `γ ≥ 1`.
    pub fn new(n: u32, gamma: T, p: T, q: T) -> Self {
        assert!(n >= 1, "split must be a positive integer");
        assert!(gamma >= T::one(), "average order must satisfy gamma >= 1");
        assert!(T::one() <= p && p <= q, "exponents must satisfy 1 <= p <= q");
        assert!(of::<T>(n as f64) <= p, "split must satisfy N <= p");
        SparseFormParams { n, gamma, p, q }
    }

    /// Compactness form (p = q): either `1 ≤ N < q` with `1 < γ < q/(q−N)`,
    /// or `N = q` with `γ > 1`.
    pub fn for_compactness(n: u32, gamma: T, q: T) -> Self {
        assert!(n >= 1, "split must be a positive integer");
        assert!(gamma > T::one(), "compactness form needs gamma > 1");
        let nt = of::<T>(n as f64);
        assert!(nt <= q, "split must satisfy N <= q");
        if nt < q {
            assert!(
                gamma < q / (q - nt),
                "compactness form needs gamma < q/(q-N) when N < q"
            );
        }
        SparseFormParams { n, gamma, p: q, q }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// Conjugate order `γ'` with `1/γ + 1/γ' = 1` (infinite at `γ = 1`).
    pub fn gamma_conjugate(&self) -> T {
        if self.gamma == T::one() {
            T::infinity()
        } else {
            self.gamma / (self.gamma - T::one())
        }
    }

    /// `1/γ' = 1 − 1/γ`: the exponent on the pullback mass. Zero at `γ = 1`,
    /// where the mass factor drops out of the form entirely.
    pub fn mu_exponent(&self) -> T {
        T::one() - self.gamma.recip()
    }

    /// Whether these exponents qualify for the compactness tail functional.
    pub fn compactness_admissible(&self) -> bool {
        let nt = of::<T>(self.n as f64);
        self.p == self.q
            && self.gamma > T::one()
            && nt <= self.q
            && (nt == self.q || self.gamma < self.q / (self.q - nt))
    }
}

/// The integer splits usable in the fractional (p < q) sparse form:
/// `{N ∈ ℕ : N ≥ 1, N < p < q < p + N}`.
#[derive(Clone, Debug)]
pub struct ExponentWindow<T: Real> {
    p: T,
    q: T,
    admissible: Vec<u32>,
}

impl<T: Real> ExponentWindow<T> {
    pub fn new(p: T, q: T) -> Self {
        assert!(T::one() <= p && p <= q, "exponents must satisfy 1 <= p <= q");
        let ceiling = q.ceil().to_f64().unwrap_or(0.0).max(1.0) as u32 + 1;
        let admissible = (1..=ceiling)
            .filter(|&n| {
                let nt = of::<T>(n as f64);
                nt < p && p < q && q < p + nt
            })
            .collect();
        ExponentWindow { p, q, admissible }
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn admissible(&self) -> &[u32] {
        &self.admissible
    }

    pub fn is_empty(&self) -> bool {
        self.admissible.is_empty()
    }
}

/// Compact exhaustion `K_n = [−n, n] × [1/n, n]` of the upper half-plane,
/// indexed `1..=max_index`. Strictly increasing; the union is everything.
#[derive(Clone, Copy, Debug)]
pub struct ExhaustingFamily {
    max_index: u32,
}

impl ExhaustingFamily {
    pub fn new(max_index: u32) -> Self {
        assert!(max_index >= 1, "family needs at least one set");
        ExhaustingFamily { max_index }
    }

    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    /// Corners of `K_n` as `((x_lo, x_hi), (y_lo, y_hi))`.
    pub fn corners(&self, n: u32) -> ((f64, f64), (f64, f64)) {
        assert!(1 <= n && n <= self.max_index, "index out of range");
        let nf = n as f64;
        ((-nf, nf), (1.0 / nf, nf))
    }

    /// Whether the upper half of a cell's Carleson box misses `K_n`
    /// entirely. The upper half is `[left, right) × [ℓ/2, ℓ)`; `K_n` is
    /// closed, so touching its edge counts as meeting it.
    pub fn upper_box_misses(&self, n: u32, cell: GridInterval) -> bool {
        let ((x_lo, x_hi), (y_lo, y_hi)) = self.corners(n);
        let left = cell.left_f64();
        let side = cell.length_f64();
        let meets_x = left <= x_hi && left + side > x_lo;
        let meets_y = side / 2.0 <= y_hi && side > y_lo;
        !(meets_x && meets_y)
    }
}

/// The collection the sparse sums default to when a scenario does not pick
/// one: levels `2^{-8}..2^6`, spatial window `[-64, 64]`, all three grids.
pub fn default_collection() -> TruncatedBoxCollection {
    TruncatedBoxCollection::new(-8, 6, -64.0, 64.0)
}

/// `⟨g⟩_{E,γ} = ((1/A_α(E)) ∫_E g^γ dA_α)^{1/γ}` for nonnegative `g`. The
/// error bound is propagated through the normalization and the root.
pub fn gamma_average<T: Real>(
    g: &(dyn Fn(Complex<T>) -> T + Sync),
    region: &Rect<T>,
    gamma: T,
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(gamma >= T::one(), "average order must satisfy gamma >= 1");
    let area = weight.rect_measure(region);
    assert!(area > T::zero(), "region must have positive measure");
    let power = integrate_rect(&|z| g(z).powf(gamma), weight, region, spec)?;
    let base = (power.value / area).max(T::zero());
    let root = gamma.recip();
    let value = base.powf(root);
    let error_bound = (base + power.error_bound / area).powf(root) - value;
    Ok(IntegralEstimate { value, error_bound, ..power })
}

/// One box's contribution to a sparse sum, in the dump column order.
#[derive(Clone, Copy, Debug)]
pub struct SummandRow<T: Real> {
    pub grid: u8,
    pub level: i32,
    pub left: T,
    /// Pullback-mass factor `μ(Q)^{1/γ'}` (1 when the exponent is zero).
    pub mu_term: T,
    /// Box-measure factor `A_α(Q)^e` for the form's exponent `e`.
    pub measure_term: T,
    /// Plain average `⟨|f|^N⟩_Q`.
    pub avg1: T,
    /// `γ`-average `⟨|f|^{q−N}⟩_{Q,γ}`.
    pub avg2: T,
    pub summand: T,
}

/// A truncated sparse sum. When any constituent quadrature failed to
/// converge the sum is only a lower bound and is flagged as such.
#[derive(Clone, Debug)]
pub struct SparseFormValue<T: Real> {
    pub value: T,
    pub boxes: usize,
    pub lower_bound_only: bool,
    pub rows: Option<Vec<SummandRow<T>>>,
}

/// Evaluates every cell in parallel, then reduces in enumeration order so
/// the total is independent of the thread count.
fn evaluate_cells<T: Real>(
    cells: &[GridInterval],
    per_box: &(dyn Fn(GridInterval) -> Result<(SummandRow<T>, bool), SparseError> + Sync),
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    let evaluated: Vec<(SummandRow<T>, bool)> =
        cells.par_iter().map(|&c| per_box(c)).collect::<Result<_, _>>()?;
    let mut sum = CompensatedSum::new();
    let mut all_converged = true;
    for (row, converged) in &evaluated {
        sum.add(row.summand);
        all_converged &= *converged;
    }
    Ok(SparseFormValue {
        value: sum.total(),
        boxes: cells.len(),
        lower_bound_only: !all_converged,
        rows: want_rows.then(|| evaluated.into_iter().map(|(r, _)| r).collect()),
    })
}

/// The two averages every form variant needs: `⟨|f|^N⟩_Q` plainly and
/// `⟨|f|^{q−N}⟩_{Q,γ}`. A zero second exponent short-circuits to 1.
#[allow(clippy::type_complexity)]
fn box_averages<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    n: u32,
    q: T,
    gamma: T,
    rect: &Rect<T>,
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<((T, bool), (T, bool)), QuadratureError> {
    let first = gamma_average(&|z| f(z).norm().powi(n as i32), rect, T::one(), weight, spec)?;
    let residual = q - of::<T>(n as f64);
    let second = if residual == T::zero() {
        (T::one(), true)
    } else {
        let est = gamma_average(&|z| f(z).norm().powf(residual), rect, gamma, weight, spec)?;
        (est.value, est.converged)
    };
    Ok(((first.value, first.converged), second))
}

/// Weighted sparse sum over an explicit cell list:
/// `Σ μ(Q)^{1/γ'} A_α(Q)^{q/(pγ)} ⟨|f|^N⟩_Q ⟨|f|^{q−N}⟩_{Q,γ}`.
///
/// At `γ = 1` the mass exponent vanishes and the pullback is never even
/// evaluated, which makes the γ=1 specialization agree with
/// [`unweighted_sparse_form`] term by term, bit for bit.
#[allow(clippy::too_many_arguments)]
pub fn sparse_form_over_cells<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    params: &SparseFormParams<T>,
    weight: WeightParameter<T>,
    cells: &[GridInterval],
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    let mu_exp = params.mu_exponent();
    let measure_exp = params.q / (params.p * params.gamma);
    let per_box = move |cell: GridInterval| -> Result<(SummandRow<T>, bool), SparseError> {
        let boxed = cell.to_box::<T>();
        let rect = boxed.rect();
        let area = weight.box_measure(&boxed);
        let (mu_term, mu_converged) = if mu_exp == T::zero() {
            (T::one(), true)
        } else {
            let mu = pullback_measure(&rect, u, phi, params.q, weight, masks, spec)?;
            (mu.value.max(T::zero()).powf(mu_exp), mu.converged)
        };
        let measure_term = area.powf(measure_exp);
        // A zero mass factor kills the summand; the averages are only worth
        // computing when the row itself is wanted.
        let ((avg1, c1), (avg2, c2)) = if mu_term == T::zero() && !want_rows {
            ((T::zero(), true), (T::zero(), true))
        } else {
            box_averages(f, params.n, params.q, params.gamma, &rect, weight, spec)?
        };
        let summand = mu_term * measure_term * avg1 * avg2;
        let row = SummandRow {
            grid: cell.shift.number(),
            level: cell.level,
            left: of::<T>(cell.left_f64()),
            mu_term,
            measure_term,
            avg1,
            avg2,
            summand,
        };
        Ok((row, mu_converged && c1 && c2))
    };
    evaluate_cells(cells, &per_box, want_rows)
}

/// [`sparse_form_over_cells`] over all three grids of a collection.
#[allow(clippy::too_many_arguments)]
pub fn sparse_form<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    params: &SparseFormParams<T>,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    let cells = collection.enumerate_all();
    sparse_form_over_cells(f, u, phi, params, weight, &cells, masks, spec, want_rows)
}

/// Symbol-free sum `Σ A_α(Q) ⟨|f|^N⟩_Q ⟨|f|^{q−N}⟩_Q` (the p = q form).
pub fn unweighted_sparse_form_over_cells<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    n: u32,
    q: T,
    weight: WeightParameter<T>,
    cells: &[GridInterval],
    spec: &QuadratureSpec<T>,
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    assert!(n >= 1 && of::<T>(n as f64) <= q, "split must satisfy 1 <= N <= q");
    let measure_exp = q / (q * T::one());
    let per_box = move |cell: GridInterval| -> Result<(SummandRow<T>, bool), SparseError> {
        let boxed = cell.to_box::<T>();
        let rect = boxed.rect();
        let area = weight.box_measure(&boxed);
        let mu_term = T::one();
        let measure_term = area.powf(measure_exp);
        let ((avg1, c1), (avg2, c2)) = box_averages(f, n, q, T::one(), &rect, weight, spec)?;
        let summand = mu_term * measure_term * avg1 * avg2;
        let row = SummandRow {
            grid: cell.shift.number(),
            level: cell.level,
            left: of::<T>(cell.left_f64()),
            mu_term,
            measure_term,
            avg1,
            avg2,
            summand,
        };
        Ok((row, c1 && c2))
    };
    evaluate_cells(cells, &per_box, want_rows)
}

/// [`unweighted_sparse_form_over_cells`] over a whole collection.
pub fn unweighted_sparse_form<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    n: u32,
    q: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    let cells = collection.enumerate_all();
    unweighted_sparse_form_over_cells(f, n, q, weight, &cells, spec, want_rows)
}

/// Fractional (p < q) sum `Σ A_α(Q)^{q/p} ⟨|f|^N⟩_Q ⟨|f|^{q−N}⟩_Q`,
/// admissible only for splits in the [`ExponentWindow`].
#[allow(clippy::too_many_arguments)]
pub fn fractional_sparse_form<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    n: u32,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
    want_rows: bool,
) -> Result<SparseFormValue<T>, SparseError> {
    let window = ExponentWindow::new(p, q);
    if window.is_empty() {
        return Err(SparseError::EmptyExponentWindow {
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !window.admissible().contains(&n) {
        return Err(SparseError::InadmissibleSplit {
            n,
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    let measure_exp = q / p;
    let cells = collection.enumerate_all();
    let per_box = move |cell: GridInterval| -> Result<(SummandRow<T>, bool), SparseError> {
        let boxed = cell.to_box::<T>();
        let rect = boxed.rect();
        let area = weight.box_measure(&boxed);
        let measure_term = area.powf(measure_exp);
        let ((avg1, c1), (avg2, c2)) = box_averages(f, n, q, T::one(), &rect, weight, spec)?;
        let summand = T::one() * measure_term * avg1 * avg2;
        let row = SummandRow {
            grid: cell.shift.number(),
            level: cell.level,
            left: of::<T>(cell.left_f64()),
            mu_term: T::one(),
            measure_term,
            avg1,
            avg2,
            summand,
        };
        Ok((row, c1 && c2))
    };
    evaluate_cells(&cells, &per_box, want_rows)
}

/// Per-split values of a sparse sum and the minimizing split.
#[derive(Clone, Debug)]
pub struct SplitScan<T: Real> {
    pub per_split: Vec<(u32, T)>,
    pub best_split: u32,
    pub best_value: T,
    pub lower_bound_only: bool,
}

fn scan_splits<T: Real>(
    splits: impl Iterator<Item = u32>,
    mut eval: impl FnMut(u32) -> Result<SparseFormValue<T>, SparseError>,
) -> Result<SplitScan<T>, SparseError> {
    let mut per_split = Vec::new();
    let mut lower_bound_only = false;
    for n in splits {
        let v = eval(n)?;
        lower_bound_only |= v.lower_bound_only;
        per_split.push((n, v.value));
    }
    assert!(!per_split.is_empty(), "split scan needs at least one admissible split");
    let (best_split, best_value) = per_split
        .iter()
        .copied()
        .fold(per_split[0], |best, cand| if cand.1 < best.1 { cand } else { best });
    Ok(SplitScan { per_split, best_split, best_value, lower_bound_only })
}

/// Minimizes the weighted form over all splits `1 ≤ N ≤ ⌊p⌋`.
#[allow(clippy::too_many_arguments)]
pub fn sparse_form_infimum<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    gamma: T,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<SplitScan<T>, SparseError> {
    let cells = collection.enumerate_all();
    let top = p.floor().to_f64().unwrap_or(1.0).max(1.0) as u32;
    scan_splits(1..=top, |n| {
        let params = SparseFormParams::new(n, gamma, p, q);
        sparse_form_over_cells(f, u, phi, &params, weight, &cells, masks, spec, false)
    })
}

/// Minimizes the symbol-free form over `1 ≤ N ≤ ⌊q⌋`.
pub fn unweighted_infimum<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    q: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
) -> Result<SplitScan<T>, SparseError> {
    let cells = collection.enumerate_all();
    let top = q.floor().to_f64().unwrap_or(1.0).max(1.0) as u32;
    scan_splits(1..=top, |n| {
        unweighted_sparse_form_over_cells(f, n, q, weight, &cells, spec, false)
    })
}

/// Minimizes the fractional form over the admissible split window.
pub fn fractional_infimum<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    p: T,
    q: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
) -> Result<SplitScan<T>, SparseError> {
    let window = ExponentWindow::new(p, q);
    if window.is_empty() {
        return Err(SparseError::EmptyExponentWindow {
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    scan_splits(window.admissible().iter().copied(), |n| {
        fractional_sparse_form(f, n, p, q, weight, collection, spec, false)
    })
}

/// Both sides of the kernel-domination inequality at one kernel apex `ζ`:
/// the integral of `|f|^{q−N}/|ζ̄−z|^{α+2}` against the pullback mass, and
/// the sparse sum `Σ_{Q∋ζ} μ(Q)^{1/γ'} A_α(Q)^{q/(pγ)−1} ⟨|f|^{q−N}⟩_{Q,γ}`.
#[derive(Clone, Copy, Debug)]
pub struct KernelDomination<T: Real> {
    pub lhs: T,
    pub rhs: T,
    /// `lhs/rhs`; absent when the right side vanishes.
    pub ratio: Option<T>,
    pub boxes: usize,
    pub all_converged: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn kernel_domination_check<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    p: T,
    q: T,
    n: u32,
    gamma: T,
    zeta: HalfPlanePoint<T>,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<KernelDomination<T>, SparseError> {
    let params = SparseFormParams::new(n, gamma, p, q);
    let residual = q - of::<T>(n as f64);
    let a2 = weight.alpha() + of::<T>(2.0);
    let conj_zeta = Complex::new(zeta.x, -zeta.y);
    // Left side: the kernel integral against the pullback, written in the
    // source variable so one quadrature over the truncation covers it.
    let integrand = move |w: Complex<T>| {
        if masked(masks, w) {
            return T::zero();
        }
        let z = phi.eval(w);
        let kernel = (conj_zeta - z).norm().powf(-a2);
        let head = if residual == T::zero() { T::one() } else { f(z).norm().powf(residual) };
        u.eval(w).norm().powf(q) * head * kernel
    };
    let lhs = integrate_rect(&integrand, weight, &spec.truncation, spec)?;

    let mu_exp = params.mu_exponent();
    let measure_exp = q / (p * params.gamma()) - T::one();
    let mut cells = Vec::new();
    for shift in Shift::ALL {
        cells.extend(collection.cells_over_point(
            shift,
            zeta.x.to_f64().expect("finite coordinate"),
            zeta.y.to_f64().expect("finite coordinate"),
        ));
    }
    let terms: Vec<(T, bool)> = cells
        .par_iter()
        .map(|cell| -> Result<(T, bool), SparseError> {
            let boxed = cell.to_box::<T>();
            let rect = boxed.rect();
            let area = weight.box_measure(&boxed);
            let (mu_term, mu_converged) = if mu_exp == T::zero() {
                (T::one(), true)
            } else {
                let mu = pullback_measure(&rect, u, phi, q, weight, masks, spec)?;
                (mu.value.max(T::zero()).powf(mu_exp), mu.converged)
            };
            let (avg, avg_converged) = if residual == T::zero() {
                (T::one(), true)
            } else {
                let est = gamma_average(
                    &|z| f(z).norm().powf(residual),
                    &rect,
                    params.gamma(),
                    weight,
                    spec,
                )?;
                (est.value, est.converged)
            };
            Ok((mu_term * area.powf(measure_exp) * avg, mu_converged && avg_converged))
        })
        .collect::<Result<_, _>>()?;
    let mut sum = CompensatedSum::new();
    let mut all_converged = lhs.converged;
    for (term, converged) in &terms {
        sum.add(*term);
        all_converged &= *converged;
    }
    let rhs = sum.total();
    Ok(KernelDomination {
        lhs: lhs.value,
        rhs,
        ratio: (rhs > T::zero()).then(|| lhs.value / rhs),
        boxes: cells.len(),
        all_converged,
    })
}

/// A maximal-operator sample: the best average among enumerated boxes
/// containing the probe point.
#[derive(Clone, Copy, Debug)]
pub struct MaximalValue<T: Real> {
    pub value: T,
    pub boxes: usize,
    pub all_converged: bool,
}

/// `max_{Q ∋ z} ⟨g⟩_{Q,γ}` over one grid's enumerated boxes.
pub fn dyadic_maximal<T: Real>(
    g: &(dyn Fn(Complex<T>) -> T + Sync),
    shift: Shift,
    z: HalfPlanePoint<T>,
    gamma: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
) -> Result<MaximalValue<T>, SparseError> {
    maximal_over_boxes(g, shift, z, gamma, T::zero(), weight, collection, spec)
}

/// Fractional variant: `max_{Q ∋ z} A_α(Q)^{order/2} ⟨g⟩_Q` with plain
/// averages and `order ∈ (0, 2)`.
pub fn fractional_maximal<T: Real>(
    g: &(dyn Fn(Complex<T>) -> T + Sync),
    shift: Shift,
    z: HalfPlanePoint<T>,
    order: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
) -> Result<MaximalValue<T>, SparseError> {
    assert!(
        T::zero() < order && order < of::<T>(2.0),
        "fractional order must lie in (0, 2)"
    );
    maximal_over_boxes(g, shift, z, T::one(), order, weight, collection, spec)
}

#[allow(clippy::too_many_arguments)]
fn maximal_over_boxes<T: Real>(
    g: &(dyn Fn(Complex<T>) -> T + Sync),
    shift: Shift,
    z: HalfPlanePoint<T>,
    gamma: T,
    order: T,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    spec: &QuadratureSpec<T>,
) -> Result<MaximalValue<T>, SparseError> {
    let cells = collection.cells_over_point(
        shift,
        z.x.to_f64().expect("finite coordinate"),
        z.y.to_f64().expect("finite coordinate"),
    );
    assert!(!cells.is_empty(), "probe point must lie under some enumerated box");
    let mut value = T::zero();
    let mut all_converged = true;
    for cell in &cells {
        let boxed = cell.to_box::<T>();
        let avg = gamma_average(g, &boxed.rect(), gamma, weight, spec)?;
        let scale = if order == T::zero() {
            T::one()
        } else {
            weight.box_measure(&boxed).powf(order / of::<T>(2.0))
        };
        value = value.max(scale * avg.value);
        all_converged &= avg.converged;
    }
    Ok(MaximalValue { value, boxes: cells.len(), all_converged })
}

/// A labeled function for corpus scans.
pub struct CorpusEntry<T: Real> {
    pub label: String,
    pub f: Box<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>,
}

impl<T: Real> CorpusEntry<T> {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        CorpusEntry { label: label.into(), f: Box::new(f) }
    }
}

fn apex_label(x: f64, y: f64) -> String {
    if x == 0.0 {
        format!("f[{y}i]")
    } else {
        format!("f[{x}{}{}i]", if y >= 0.0 { "+" } else { "-" }, y.abs())
    }
}

/// The default 12-function corpus: nine kernel test functions on a 3×3 apex
/// grid plus three fixed linear combinations.
pub fn default_corpus<T: Real>(p: T, weight: WeightParameter<T>) -> Vec<CorpusEntry<T>> {
    let tf = |x: f64, y: f64| TestFunction::new(HalfPlanePoint::new(of::<T>(x), of::<T>(y)), p, weight);
    let mut corpus: Vec<CorpusEntry<T>> = Vec::new();
    for &x in &[-2.0, 0.0, 3.0] {
        for &y in &[0.25, 1.0, 4.0] {
            let f = tf(x, y);
            corpus.push(CorpusEntry::new(apex_label(x, y), move |z| f.eval(z)));
        }
    }
    let (a, b) = (tf(0.0, 1.0), tf(2.0, 0.25));
    corpus.push(CorpusEntry::new("f[1i] + f[2+0.25i]", move |z| a.eval(z) + b.eval(z)));
    let (c, d) = (tf(0.0, 1.0), tf(-1.0, 4.0));
    let two = of::<T>(2.0);
    corpus.push(CorpusEntry::new("f[1i] - 2 f[-1+4i]", move |z| c.eval(z) - d.eval(z).scale(two)));
    let (e, g) = (tf(3.0, 1.0), tf(-3.0, 0.5));
    let half = of::<T>(0.5);
    corpus.push(CorpusEntry::new(
        "0.5 f[3+1i] + 0.5 f[-3+0.5i]",
        move |z| (e.eval(z) + g.eval(z)).scale(half),
    ));
    corpus
}

/// `f_m = f_{i/m, t}` for `m = 1..=count`: unit-norm bumps concentrating at
/// the boundary point 0, vanishing uniformly on compact sets.
pub fn escaping_sequence<T: Real>(
    t: T,
    weight: WeightParameter<T>,
    count: u32,
) -> Vec<CorpusEntry<T>> {
    (1..=count)
        .map(|m| {
            let apex = HalfPlanePoint::new(T::zero(), of::<T>(1.0 / m as f64));
            let f = TestFunction::new(apex, t, weight);
            CorpusEntry::new(format!("f[i/{m}]"), move |z| f.eval(z))
        })
        .collect()
}

/// One corpus row of the operator-versus-sparse comparison.
#[derive(Clone, Debug)]
pub struct OperatorSparseRow<T: Real> {
    pub label: String,
    /// `‖u · (f∘φ)‖_{q,α}^q` over the truncation (plus declared tail).
    pub operator_side: T,
    pub sparse_side: T,
    /// `operator_side / sparse_side`; absent when the sparse side vanishes.
    pub ratio: Option<T>,
    pub all_converged: bool,
}

/// Corpus table with the empirical domination constant — the largest ratio.
#[derive(Clone, Debug)]
pub struct OperatorSparseTable<T: Real> {
    pub rows: Vec<OperatorSparseRow<T>>,
    pub max_ratio: Option<T>,
    pub min_ratio: Option<T>,
    pub all_converged: bool,
}

/// Compares `‖W_{u,φ}f‖^q` against the sparse form on every corpus entry.
#[allow(clippy::too_many_arguments)]
pub fn operator_vs_sparse<T: Real>(
    corpus: &[CorpusEntry<T>],
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    params: &SparseFormParams<T>,
    weight: WeightParameter<T>,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<OperatorSparseTable<T>, SparseError> {
    let cells = collection.enumerate_all();
    let mut rows = Vec::with_capacity(corpus.len());
    let mut all_converged = true;
    for entry in corpus {
        let f = |z: Complex<T>| (entry.f)(z);
        let lhs = weighted_norm_power(u, phi, &f, params.q(), weight, masks, spec)?;
        let rhs =
            sparse_form_over_cells(&f, u, phi, params, weight, &cells, masks, spec, false)?;
        let converged = lhs.converged && !rhs.lower_bound_only;
        all_converged &= converged;
        rows.push(OperatorSparseRow {
            label: entry.label.clone(),
            operator_side: lhs.value,
            sparse_side: rhs.value,
            ratio: (rhs.value > T::zero()).then(|| lhs.value / rhs.value),
            all_converged: converged,
        });
    }
    let ratios: Vec<T> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(None, |acc: Option<T>, r| {
        Some(acc.map_or(r, |a| a.max(r)))
    });
    let min_ratio = ratios.iter().copied().fold(None, |acc: Option<T>, r| {
        Some(acc.map_or(r, |a| a.min(r)))
    });
    Ok(OperatorSparseTable { rows, max_ratio, min_ratio, all_converged })
}

/// The tail profile `n ↦ sup_m Σ_{Q: Q^up ∩ K_n = ∅} μ(Q)^{1/γ'}
/// A_α(Q)^{1/γ} ⟨|f_m|^N⟩_Q ⟨|f_m|^{q−N}⟩_{Q,γ}`, for a finite escaping
/// family `f_m`. A compact operator drives the profile to zero; the sup over
/// finitely many `m` makes the reported value an under-approximation.
#[derive(Clone, Debug)]
pub struct CompactnessProfile<T: Real> {
    pub indices: Vec<u32>,
    /// `sup_m` tail at each index.
    pub tails: Vec<T>,
    /// Per-function tails, `by_function[m][i]` for index `indices[i]`.
    pub by_function: Vec<Vec<T>>,
    pub labels: Vec<String>,
    pub boxes: usize,
    pub all_converged: bool,
}

/// Computes the whole tail profile over `n = 1..=family.max_index()`.
///
/// The per-box work (pullback mass and averages) does not depend on `n`, so
/// it is evaluated once into a matrix and each index only re-filters it.
#[allow(clippy::too_many_arguments)]
pub fn compactness_profile<T: Real>(
    sequence: &[CorpusEntry<T>],
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    params: &SparseFormParams<T>,
    weight: WeightParameter<T>,
    family: &ExhaustingFamily,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<CompactnessProfile<T>, SparseError> {
    assert!(
        params.compactness_admissible(),
        "tail functional needs p = q and either N < q with gamma < q/(q-N), or N = q, gamma > 1"
    );
    assert!(!sequence.is_empty(), "tail functional needs at least one function");
    let cells = collection.enumerate_all();
    let mu_exp = params.mu_exponent();
    let inv_gamma = params.gamma().recip();
    // Mass factor μ(Q)^{1/γ'} A_α(Q)^{1/γ} per box.
    let mass: Vec<(T, bool)> = cells
        .par_iter()
        .map(|cell| -> Result<(T, bool), SparseError> {
            let boxed = cell.to_box::<T>();
            let area = weight.box_measure(&boxed);
            let mu = pullback_measure(&boxed.rect(), u, phi, params.q(), weight, masks, spec)?;
            Ok((mu.value.max(T::zero()).powf(mu_exp) * area.powf(inv_gamma), mu.converged))
        })
        .collect::<Result<_, _>>()?;
    // Average products per (box, function); zero-mass boxes contribute
    // nothing for any n and are skipped outright.
    let m_count = sequence.len();
    let products: Vec<(T, bool)> = (0..cells.len() * m_count)
        .into_par_iter()
        .map(|job| -> Result<(T, bool), SparseError> {
            let (ci, mi) = (job / m_count, job % m_count);
            if mass[ci].0 == T::zero() {
                return Ok((T::zero(), true));
            }
            let rect = cells[ci].to_box::<T>().rect();
            let f = |z: Complex<T>| (sequence[mi].f)(z);
            let ((avg1, c1), (avg2, c2)) =
                box_averages(&f, params.n(), params.q(), params.gamma(), &rect, weight, spec)?;
            Ok((avg1 * avg2, c1 && c2))
        })
        .collect::<Result<_, _>>()?;
    let all_converged = mass.iter().all(|m| m.1) && products.iter().all(|p| p.1);

    let indices: Vec<u32> = (1..=family.max_index()).collect();
    let mut by_function = vec![Vec::with_capacity(indices.len()); m_count];
    let mut tails = Vec::with_capacity(indices.len());
    for &n in &indices {
        let mut sup = T::zero();
        for (mi, per_function) in by_function.iter_mut().enumerate() {
            let mut sum = CompensatedSum::new();
            for (ci, cell) in cells.iter().enumerate() {
                if family.upper_box_misses(n, *cell) {
                    sum.add(mass[ci].0 * products[ci * m_count + mi].0);
                }
            }
            let tail = sum.total();
            per_function.push(tail);
            sup = sup.max(tail);
        }
        tails.push(sup);
    }
    Ok(CompactnessProfile {
        indices,
        tails,
        by_function,
        labels: sequence.iter().map(|e| e.label.clone()).collect(),
        boxes: cells.len(),
        all_converged,
    })
}

/// The tail value at a single exhaustion index (with its convergence flag).
#[allow(clippy::too_many_arguments)]
pub fn compactness_tail<T: Real>(
    sequence: &[CorpusEntry<T>],
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    params: &SparseFormParams<T>,
    weight: WeightParameter<T>,
    family: &ExhaustingFamily,
    n: u32,
    collection: &TruncatedBoxCollection,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<(T, bool), SparseError> {
    assert!(1 <= n && n <= family.max_index(), "index out of range");
    let profile =
        compactness_profile(sequence, u, phi, params, weight, family, collection, masks, spec)?;
    Ok((profile.tails[(n - 1) as usize], profile.all_converged))
}
