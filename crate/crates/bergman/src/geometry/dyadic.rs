//! Exact arithmetic for shifted dyadic grids.
//!
//! Grid cells have endpoints of the form `2^j (m + t)` with `t ∈ {0, ±1/3}`,
//! so every endpoint times three is an exact dyadic rational. All nesting,
//! membership, and cover decisions happen on [`Dyadic`] values (integer
//! mantissa times a power of two); floating point only enters when a cell is
//! converted for quadrature.
//!
//! The shift of the thirds grids alternates sign with the scale parity
//! (effective shift `±1/3` at odd/even levels). A scale-independent shift
//! would break the nesting axiom: child boundaries at the next finer scale
//! would not align with parent boundaries. The alternating choice restores
//! exact two-children nesting while keeping the combined boundary lattice at
//! scale `2^j` equal to `(2^j/3)·ℤ`, which is what the three-grid cover
//! argument needs.

use std::cmp::Ordering;

/// Exact dyadic rational `mantissa · 2^exponent`.
///
/// Normalized so the mantissa is odd (or the value is zero with exponent 0).
/// Supports the coordinate window used at desk scale (roughly `|exponent|`
/// up to a few hundred with 53-bit mantissas); arithmetic panics on i128
/// overflow rather than silently losing exactness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: i128,
    exponent: i32,
}

fn shifted(m: i128, k: u32) -> i128 {
    assert!(
        k < 127 && (m.unsigned_abs().leading_zeros() as i64) > k as i64,
        "dyadic coordinate exceeds the supported exponent window"
    );
    m << k
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { mantissa: 0, exponent: 0 };

    pub fn new(mantissa: i128, exponent: i32) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.normalize();
        d
    }

    /// Exact conversion; every finite f64 is a dyadic rational.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "grid coordinates must be finite");
        if x == 0.0 {
            return Self::ZERO;
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i128 } else { -1i128 };
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let fraction = (bits & 0x000f_ffff_ffff_ffff) as i128;
        let (mantissa, exponent) = if biased == 0 {
            (fraction, -1074) // subnormal
        } else {
            (fraction | (1i128 << 52), biased - 1075)
        };
        Self::new(sign * mantissa, exponent)
    }

    pub fn pow2(exponent: i32) -> Self {
        Dyadic { mantissa: 1, exponent }
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 * (self.exponent as f64).exp2()
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros();
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i32;
        }
    }

    /// Both mantissas brought to the smaller exponent.
    fn aligned(self, other: Self) -> (i128, i128, i32) {
        if self.mantissa == 0 {
            return (0, other.mantissa, other.exponent);
        }
        if other.mantissa == 0 {
            return (self.mantissa, 0, self.exponent);
        }
        match self.exponent.cmp(&other.exponent) {
            Ordering::Equal => (self.mantissa, other.mantissa, self.exponent),
            Ordering::Greater => {
                let k = (self.exponent - other.exponent) as u32;
                (shifted(self.mantissa, k), other.mantissa, other.exponent)
            }
            Ordering::Less => {
                let k = (other.exponent - self.exponent) as u32;
                (self.mantissa, shifted(other.mantissa, k), self.exponent)
            }
        }
    }

    pub fn add(self, other: Self) -> Self {
        let (a, b, e) = self.aligned(other);
        Self::new(a.checked_add(b).expect("dyadic mantissa overflow"), e)
    }

    pub fn sub(self, other: Self) -> Self {
        let (a, b, e) = self.aligned(other);
        Self::new(a.checked_sub(b).expect("dyadic mantissa overflow"), e)
    }

    pub fn times(self, k: i128) -> Self {
        Self::new(self.mantissa.checked_mul(k).expect("dyadic mantissa overflow"), self.exponent)
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        if self.mantissa == 0 {
            return Self::ZERO;
        }
        Dyadic { mantissa: self.mantissa, exponent: self.exponent + k }
    }

    /// floor(self / 2^j) as integer.
    pub fn floor_div_pow2(self, j: i32) -> i128 {
        if self.mantissa == 0 {
            return 0;
        }
        let shift = self.exponent - j;
        if shift >= 0 {
            shifted(self.mantissa, shift as u32)
        } else {
            let k = (-shift) as u32;
            if k >= 127 {
                // |self| ≪ 2^j: the quotient is 0 or −1 by sign.
                return if self.mantissa >= 0 { 0 } else { -1 };
            }
            self.mantissa.div_euclid(1i128 << k)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mantissa.signum(), other.mantissa.signum()) {
            (a, b) if a != b => a.cmp(&b),
            (0, 0) => Ordering::Equal,
            _ => {
                let (a, b, _) = self.aligned(*other);
                a.cmp(&b)
            }
        }
    }
}

/// Grid identity: the unshifted grid and the two thirds-shifted grids.
///
/// The declaration order is the tie-break order for covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shift {
    /// t = 0.
    Zero,
    /// t = +1/3 (alternating sign by scale parity).
    Plus,
    /// t = −1/3 (alternating sign by scale parity).
    Minus,
}

impl Shift {
    pub const ALL: [Shift; 3] = [Shift::Zero, Shift::Plus, Shift::Minus];

    /// 1-based grid number in tie-break order.
    pub fn number(self) -> u8 {
        match self {
            Shift::Zero => 1,
            Shift::Plus => 2,
            Shift::Minus => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Shift::Zero => "0",
            Shift::Plus => "+1/3",
            Shift::Minus => "-1/3",
        }
    }

    /// Numerator of the effective shift (in thirds) at a given level.
    fn effective_numerator(self, level: i32) -> i128 {
        let parity = if level.rem_euclid(2) == 1 { 1 } else { -1 };
        match self {
            Shift::Zero => 0,
            Shift::Plus => parity,
            Shift::Minus => -parity,
        }
    }
}

/// Cell `[2^level (index + t_level), 2^level (index + 1 + t_level))` of one
/// shifted grid. `level` is the log2 side length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridInterval {
    pub shift: Shift,
    pub level: i32,
    pub index: i64,
}

impl GridInterval {
    pub fn new(shift: Shift, level: i32, index: i64) -> Self {
        GridInterval { shift, level, index }
    }

    /// Left endpoint multiplied by 3 (exact).
    pub fn left_times3(self) -> Dyadic {
        let eff = self.shift.effective_numerator(self.level);
        Dyadic::new(3 * self.index as i128 + eff, self.level)
    }

    /// Right endpoint multiplied by 3 (exact).
    pub fn right_times3(self) -> Dyadic {
        let eff = self.shift.effective_numerator(self.level);
        Dyadic::new(3 * self.index as i128 + eff + 3, self.level)
    }

    /// Side length 2^level (exact).
    pub fn length(self) -> Dyadic {
        Dyadic::pow2(self.level)
    }

    pub fn left_f64(self) -> f64 {
        self.left_times3().to_f64() / 3.0
    }

    pub fn length_f64(self) -> f64 {
        (self.level as f64).exp2()
    }

    /// Membership of a point given as three times its value.
    pub fn contains_times3(self, p3: Dyadic) -> bool {
        self.left_times3() <= p3 && p3 < self.right_times3()
    }

    /// Containment of a half-open interval given by three times its endpoints.
    pub fn contains_interval_times3(self, a3: Dyadic, b3: Dyadic) -> bool {
        self.left_times3() <= a3 && b3 <= self.right_times3()
    }

    /// The two children at the next finer scale (exact partition of self).
    pub fn children(self) -> [GridInterval; 2] {
        let eff = self.shift.effective_numerator(self.level) as i64;
        let base = 2 * self.index + eff;
        [
            GridInterval::new(self.shift, self.level - 1, base),
            GridInterval::new(self.shift, self.level - 1, base + 1),
        ]
    }

    pub fn parent(self) -> GridInterval {
        let eff_up = self.shift.effective_numerator(self.level + 1) as i64;
        GridInterval::new(self.shift, self.level + 1, (self.index - eff_up).div_euclid(2))
    }

    /// Nested-or-disjoint comparison (same grid only).
    pub fn relation(self, other: GridInterval) -> CellRelation {
        assert_eq!(self.shift, other.shift, "nesting is a within-grid relation");
        let (al, ar) = (self.left_times3(), self.right_times3());
        let (bl, br) = (other.left_times3(), other.right_times3());
        if ar <= bl || br <= al {
            CellRelation::Disjoint
        } else if bl <= al && ar <= br {
            CellRelation::Inside
        } else if al <= bl && br <= ar {
            CellRelation::Contains
        } else {
            CellRelation::Overlap
        }
    }
}

/// Outcome of comparing two cells of one grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRelation {
    Disjoint,
    /// self ⊆ other.
    Inside,
    /// other ⊆ self.
    Contains,
    /// Partial overlap: never happens for a genuine dyadic grid.
    Overlap,
}

/// Cell of `shift` at `level` containing the point `p3` (= 3 × point).
pub fn cell_containing_times3(shift: Shift, level: i32, p3: Dyadic) -> GridInterval {
    let eff = shift.effective_numerator(level);
    // index = floor((p3 − eff·2^level) / (3·2^level))
    let d = p3.sub(Dyadic::new(eff, level));
    let q = d.floor_div_pow2(level);
    let index = q.div_euclid(3);
    let index = i64::try_from(index).expect("grid index exceeds i64");
    GridInterval::new(shift, level, index)
}

/// Result of covering an interval by a cell of one of the three grids.
#[derive(Clone, Copy, Debug)]
pub struct Cover {
    pub cell: GridInterval,
    /// Cell length divided by interval length.
    pub ratio: f64,
    /// True when the first admissible scale failed and one scale up was used.
    /// Never observed (the first scale always admits a cover); kept as a
    /// defensive diagnostic.
    pub escalated: bool,
}

/// Smallest-scale cell of one of the three grids containing `[a, a+len)`.
///
/// Guarantees cell length ≤ 3·len (≤ 6·len had an escalation occurred). If
/// the interval is itself a grid cell, that cell is returned (ratio 1).
/// Among admissible grids at the chosen scale, the smallest grid number
/// wins.
pub fn cover_interval(left: f64, length: f64) -> Cover {
    assert!(length > 0.0 && length.is_finite() && left.is_finite());
    let a = Dyadic::from_f64(left);
    let len = Dyadic::from_f64(length);
    let a3 = a.times(3);
    let b3 = a3.add(len.times(3));

    // Fast path: the interval is exactly a cell of one of the grids.
    if let Some(level) = exact_level(len) {
        for shift in Shift::ALL {
            let cell = cell_containing_times3(shift, level, a3);
            if cell.left_times3() == a3 {
                return Cover { cell, ratio: 1.0, escalated: false };
            }
        }
    }

    // Smallest scale 2^j with 2^j > 3·len/2. Since 3·len is never a power of
    // two, this is the unique j with 2^j < 3·len < 2^(j+1), and the cover
    // ratio 2^j/len stays ≤ 3.
    let three_len = len.times(3);
    let mut j = length.log2().ceil() as i32 + 2;
    while Dyadic::pow2(j + 1) <= three_len {
        j += 1;
    }
    while Dyadic::pow2(j) > three_len {
        j -= 1;
    }
    debug_assert!(Dyadic::pow2(j) < three_len && three_len < Dyadic::pow2(j + 1));

    let first = j;
    for scale in first..=first + 3 {
        for shift in Shift::ALL {
            let cell = cell_containing_times3(shift, scale, a3);
            if cell.contains_interval_times3(a3, b3) {
                return Cover {
                    cell,
                    ratio: cell.length_f64() / length,
                    escalated: scale > first,
                };
            }
        }
    }
    unreachable!("three-grid cover must succeed within one escalation");
}

/// Some(level) when the dyadic value is exactly 2^level.
fn exact_level(len: Dyadic) -> Option<i32> {
    (len.mantissa == 1).then_some(len.exponent)
}

/// Inclusive level window and half-open spatial window for box collections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedBoxCollection {
    pub min_level: i32,
    pub max_level: i32,
    pub window_left: f64,
    pub window_right: f64,
}

impl TruncatedBoxCollection {
    pub fn new(min_level: i32, max_level: i32, window_left: f64, window_right: f64) -> Self {
        assert!(min_level <= max_level, "empty level window");
        assert!(window_left < window_right, "empty spatial window");
        TruncatedBoxCollection { min_level, max_level, window_left, window_right }
    }

    /// Window doubled in every direction: one extra level on each side and a
    /// twice-as-wide spatial window.
    pub fn doubled(&self) -> Self {
        TruncatedBoxCollection {
            min_level: self.min_level - 1,
            max_level: self.max_level + 1,
            window_left: 2.0 * self.window_left,
            window_right: 2.0 * self.window_right,
        }
    }

    /// Cells of one grid meeting the window, level descending then left
    /// ascending (the canonical enumeration order).
    pub fn enumerate(&self, shift: Shift) -> Vec<GridInterval> {
        let w0 = Dyadic::from_f64(self.window_left).times(3);
        let w1 = Dyadic::from_f64(self.window_right).times(3);
        let mut cells = Vec::new();
        for level in (self.min_level..=self.max_level).rev() {
            let mut cell = cell_containing_times3(shift, level, w0);
            // Cell containing w0 meets [w0, w1); march right while left < w1.
            while cell.left_times3() < w1 {
                cells.push(cell);
                cell = GridInterval::new(shift, level, cell.index + 1);
            }
        }
        cells
    }

    /// All three grids in tie-break order.
    pub fn enumerate_all(&self) -> Vec<GridInterval> {
        Shift::ALL.iter().flat_map(|&s| self.enumerate(s)).collect()
    }

    /// Cells of one grid in the collection whose Carleson box contains the
    /// point `(x, y)`: one cell per level with `2^level > y`.
    pub fn cells_over_point(&self, shift: Shift, x: f64, y: f64) -> Vec<GridInterval> {
        assert!(y > 0.0);
        let x3 = Dyadic::from_f64(x).times(3);
        let y_d = Dyadic::from_f64(y);
        let w0 = Dyadic::from_f64(self.window_left).times(3);
        let w1 = Dyadic::from_f64(self.window_right).times(3);
        let mut cells = Vec::new();
        for level in (self.min_level..=self.max_level).rev() {
            if Dyadic::pow2(level) <= y_d {
                break;
            }
            let cell = cell_containing_times3(shift, level, x3);
            if cell.left_times3() < w1 && w0 < cell.right_times3() {
                cells.push(cell);
            }
        }
        cells
    }
}
