use std::ffi::c_char;

use vista_eval::geometry::{box_fill_mask, mask_iou, mask_to_box, BinaryMask};

use crate::error::{guard, VistaStatus};
use crate::metrics::VistaBox;
use crate::{get, put, put_handle, put_string, slice, text};

/// Run-length encoded binary mask.
pub struct VistaMask(pub(crate) BinaryMask);

/// Build a mask from a row-major `height * width` byte raster; any
/// non-zero byte is foreground.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_from_raster(
    height: u32,
    width: u32,
    data: *const u8,
    out: *mut *mut VistaMask,
) -> VistaStatus {
    guard(|| {
        let raw = slice(data, height as usize * width as usize, "data")?;
        let bits: Vec<bool> = raw.iter().map(|&b| b != 0).collect();
        put_handle(out, VistaMask(BinaryMask::from_raster(height, width, &bits)?))
    })
}

/// Parse column-major run lengths separated by spaces or commas.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_from_counts(
    height: u32,
    width: u32,
    counts: *const c_char,
    out: *mut *mut VistaMask,
) -> VistaStatus {
    guard(|| {
        let counts = text(counts, "counts")?;
        put_handle(out, VistaMask(BinaryMask::from_counts_str(height, width, counts)?))
    })
}

/// Rasterize a box into a `height * width` mask.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_from_box(
    bbox: VistaBox,
    height: u32,
    width: u32,
    out: *mut *mut VistaMask,
) -> VistaStatus {
    guard(|| put_handle(out, VistaMask(box_fill_mask(&bbox.into(), height, width))))
}

/// Space separated run lengths of `mask`.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_counts(mask: *const VistaMask, out: *mut *mut c_char) -> VistaStatus {
    guard(|| put_string(out, get(mask, "mask")?.0.counts_string()))
}

/// Write the mask as a row-major raster of 0/1 bytes into `buf`, which
/// must hold `height * width` bytes.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_to_raster(mask: *const VistaMask, buf: *mut u8, len: usize) -> VistaStatus {
    guard(|| {
        let m = &get(mask, "mask")?.0;
        let raster = m.to_raster();
        if len != raster.len() {
            return Err(crate::error::Failure::new(
                VistaStatus::InvalidArgument,
                format!("buffer holds {len} bytes, mask has {}", raster.len()),
            ));
        }
        if buf.is_null() && len > 0 {
            return Err(crate::error::Failure::null("buf"));
        }
        for (i, v) in raster.into_iter().enumerate() {
            buf.add(i).write(u8::from(v));
        }
        Ok(())
    })
}

/// Mask height and width.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_size(mask: *const VistaMask, height: *mut u32, width: *mut u32) -> VistaStatus {
    guard(|| {
        let m = &get(mask, "mask")?.0;
        put(height, m.height(), "height")?;
        put(width, m.width(), "width")
    })
}

/// Number of foreground pixels; 0 for a null mask.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_area(mask: *const VistaMask) -> u64 {
    mask.as_ref().map_or(0, |m| m.0.area())
}

/// Intersection over union of two equally sized masks.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_iou(a: *const VistaMask, b: *const VistaMask, out: *mut f64) -> VistaStatus {
    guard(|| put(out, mask_iou(&get(a, "a")?.0, &get(b, "b")?.0)?, "out"))
}

/// Tight bounding box of the foreground.
#[no_mangle]
pub unsafe extern "C" fn vista_mask_to_box(mask: *const VistaMask, out: *mut VistaBox) -> VistaStatus {
    guard(|| put(out, mask_to_box(&get(mask, "mask")?.0)?.into(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn vista_mask_free(mask: *mut VistaMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}
