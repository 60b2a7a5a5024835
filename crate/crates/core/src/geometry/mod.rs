//! Geometric kernel: boxes, run-length encoded masks and the overlap
//! primitives every metric is built on.

mod bbox;
mod bins;
mod mask;

pub use bbox::{box_iou, BBox};
pub use bins::{center_distance_bin, CenterDistanceBin};
pub use mask::{barycenter, boundary_pixels, box_fill_mask, mask_iou, mask_to_box, BinaryMask};
