use vista_eval::geometry::{box_iou, BBox};
use vista_eval::metrics::{auc, delta_sigma, gsr, nps, paired_t_test};

use crate::error::{guard, VistaStatus};
use crate::{put, slice};

/// Axis-aligned box `[x, y, w, h]` in pixels.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VistaBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<VistaBox> for BBox {
    fn from(b: VistaBox) -> Self {
        BBox::new(b.x, b.y, b.w, b.h)
    }
}

impl From<BBox> for VistaBox {
    fn from(b: BBox) -> Self {
        VistaBox {
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
        }
    }
}

/// Weighted view means and their signed difference (FPV minus TPV).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VistaDelta {
    pub delta: f64,
    pub fpv_mean: f64,
    pub tpv_mean: f64,
}

/// Paired two-tailed t-test result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VistaTTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
    pub mean_diff: f64,
    pub n: usize,
}

/// Area under the success curve (mean overlap, 0..100).
#[no_mangle]
pub unsafe extern "C" fn vista_auc(overlaps: *const f64, len: usize, out: *mut f64) -> VistaStatus {
    guard(|| put(out, auc(slice(overlaps, len, "overlaps")?)?, "out"))
}

/// Normalized precision score from normalized center distances (0..100).
/// Pass infinity for frames without a prediction.
#[no_mangle]
pub unsafe extern "C" fn vista_nps(distances: *const f64, len: usize, out: *mut f64) -> VistaStatus {
    guard(|| put(out, nps(slice(distances, len, "distances")?)?, "out"))
}

/// Generalized success robustness (0..100).
#[no_mangle]
pub unsafe extern "C" fn vista_gsr(overlaps: *const f64, len: usize, out: *mut f64) -> VistaStatus {
    guard(|| put(out, gsr(slice(overlaps, len, "overlaps")?)?, "out"))
}

/// Weighted viewpoint bias over `len` pairs of per-view scores.
#[no_mangle]
pub unsafe extern "C" fn vista_delta_sigma(
    fpv: *const f64,
    tpv: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut VistaDelta,
) -> VistaStatus {
    guard(|| {
        let f = slice(fpv, len, "fpv")?;
        let t = slice(tpv, len, "tpv")?;
        let w = slice(weights, len, "weights")?;
        let triples: Vec<_> = (0..len).map(|i| (f[i], t[i], w[i])).collect();
        let d = delta_sigma(&triples)?;
        put(
            out,
            VistaDelta {
                delta: d.delta,
                fpv_mean: d.fpv_mean,
                tpv_mean: d.tpv_mean,
            },
            "out",
        )
    })
}

/// Paired t-test on `a[i] - b[i]`.
#[no_mangle]
pub unsafe extern "C" fn vista_paired_t_test(
    a: *const f64,
    b: *const f64,
    len: usize,
    out: *mut VistaTTest,
) -> VistaStatus {
    guard(|| {
        let r = paired_t_test(slice(a, len, "a")?, slice(b, len, "b")?)?;
        put(
            out,
            VistaTTest {
                t: r.t,
                p: r.p,
                df: r.df,
                mean_diff: r.mean_diff,
                n: r.n,
            },
            "out",
        )
    })
}

/// Intersection over union of two boxes. Degenerate pairs give 0.
#[no_mangle]
pub extern "C" fn vista_box_iou(a: VistaBox, b: VistaBox) -> f64 {
    box_iou(&a.into(), &b.into())
}
