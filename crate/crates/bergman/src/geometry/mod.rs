//! Geometry of the upper half-plane: intervals, boxes, tents, Whitney
//! rectangles, and three shifted dyadic grids with exact coordinates.

pub mod dyadic;
mod shapes;

pub use dyadic::{
    cell_containing_times3, cover_interval, CellRelation, Cover, Dyadic, GridInterval, Shift,
    TruncatedBoxCollection,
};
pub use shapes::{
    clip_to_half_plane, dilate, enclosing_interval, tent, whitney_decompose, CarlesonBox,
    HalfPlanePoint, Interval, Rect, WhitneyRectangle,
};

use crate::real::Real;

impl GridInterval {
    /// Floating view of the cell (exact for the unshifted grid; one rounding
    /// per endpoint for the thirds grids).
    pub fn to_interval<T: Real>(self) -> Interval<T> {
        let left = T::of(self.left_f64());
        let length = T::of(self.length_f64());
        Interval::new(left, length)
    }

    /// Carleson box over this cell.
    pub fn to_box<T: Real>(self) -> CarlesonBox<T> {
        CarlesonBox::new(self.to_interval())
    }
}
