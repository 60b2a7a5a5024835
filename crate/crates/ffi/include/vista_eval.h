#ifndef VISTA_EVAL_H
#define VISTA_EVAL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bit for the first-person view in [`VistaEvalOptions::views`].
#define VISTA_VIEW_FPV 1

// Bit for the third-person view in [`VistaEvalOptions::views`].
#define VISTA_VIEW_TPV 2

typedef enum VistaProtocol {
  VISTA_PROTOCOL_LONG = 0,
  VISTA_PROTOCOL_SHORT = 1,
} VistaProtocol;

typedef enum VistaRepr {
  VISTA_REPR_BOX = 0,
  VISTA_REPR_MASK = 1,
} VistaRepr;

// Result code of every fallible call.
typedef enum VistaStatus {
  VISTA_STATUS_OK = 0,
  VISTA_STATUS_NULL_POINTER = 1,
  VISTA_STATUS_INVALID_ARGUMENT = 2,
  VISTA_STATUS_INVALID_UTF8 = 3,
  VISTA_STATUS_IO = 4,
  VISTA_STATUS_PARSE = 5,
  VISTA_STATUS_CONSTRAINT = 6,
  VISTA_STATUS_RLE = 7,
  VISTA_STATUS_DIMENSION_MISMATCH = 8,
  VISTA_STATUS_EMPTY = 9,
  VISTA_STATUS_TRACKER = 10,
  VISTA_STATUS_UNAVAILABLE = 11,
  VISTA_STATUS_PANIC = 12,
} VistaStatus;

typedef enum VistaMetric {
  VISTA_METRIC_AUC = 0,
  VISTA_METRIC_NPS = 1,
  VISTA_METRIC_GSR = 2,
  VISTA_METRIC_J = 3,
  VISTA_METRIC_F = 4,
  VISTA_METRIC_JF = 5,
} VistaMetric;

// A validated dataset manifest.
typedef struct VistaManifest VistaManifest;

// Run-length encoded binary mask.
typedef struct VistaMask VistaMask;

// An evaluation report with one or more trackers.
typedef struct VistaReport VistaReport;

// Options for [`vista_evaluate`]. Start from [`vista_eval_options_default`].
typedef struct VistaEvalOptions {
  // `replay:DIR`, `cmd:COMMAND` or `scripted:KIND`. Required.
  const char *driver;
  // Tracker label; the driver string when null.
  const char *label;
  enum VistaProtocol protocol;
  enum VistaRepr repr;
  // Bitwise OR of `VISTA_VIEW_FPV` and `VISTA_VIEW_TPV`.
  uint32_t views;
  // Worker threads; 0 is treated as 1.
  size_t jobs;
  size_t min_run_len;
  bool with_vos;
  bool with_pixels;
  // Per-frame reply timeout for subprocess trackers.
  double timeout_secs;
} VistaEvalOptions;

// Weighted view means and their signed difference (FPV minus TPV).
typedef struct VistaDelta {
  double delta;
  double fpv_mean;
  double tpv_mean;
} VistaDelta;

// Axis-aligned box `[x, y, w, h]` in pixels.
typedef struct VistaBox {
  double x;
  double y;
  double w;
  double h;
} VistaBox;

// Paired two-tailed t-test result.
typedef struct VistaTTest {
  double t;
  double p;
  double df;
  double mean_diff;
  size_t n;
} VistaTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *vista_version(void);

// Release a string returned by this library. Null is ignored.
void vista_string_free(char *s);

// Message of the most recent failure on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *vista_last_error(void);

struct VistaEvalOptions vista_eval_options_default(void);

// Load and validate a manifest.
enum VistaStatus vista_manifest_load(const char *path, struct VistaManifest **out);

// Number of pairs; 0 for a null manifest.
size_t vista_manifest_pair_count(const struct VistaManifest *manifest);

void vista_manifest_free(struct VistaManifest *manifest);

// Evaluate one tracker over the manifest.
enum VistaStatus vista_evaluate(const struct VistaManifest *manifest,
                                const struct VistaEvalOptions *options,
                                struct VistaReport **out);

// Load a `report.json`, verifying its summaries against its scores.
enum VistaStatus vista_report_load(const char *path, struct VistaReport **out);

// Serialize the report as pretty-printed JSON.
enum VistaStatus vista_report_to_json(const struct VistaReport *report, char **out);

// Write the run directory under `root`. When `out_dir` is not null it
// receives the directory path.
enum VistaStatus vista_report_write(const struct VistaReport *report,
                                    const char *root,
                                    char **out_dir);

// Number of trackers; 0 for a null report.
size_t vista_report_tracker_count(const struct VistaReport *report);

// Viewpoint bias of one tracker for `metric`.
enum VistaStatus vista_report_delta(const struct VistaReport *report,
                                    size_t tracker,
                                    enum VistaMetric metric,
                                    bool weighted,
                                    struct VistaDelta *out);

void vista_report_free(struct VistaReport *report);

// Build a mask from a row-major `height * width` byte raster; any
// non-zero byte is foreground.
enum VistaStatus vista_mask_from_raster(uint32_t height,
                                        uint32_t width,
                                        const uint8_t *data,
                                        struct VistaMask **out);

// Parse column-major run lengths separated by spaces or commas.
enum VistaStatus vista_mask_from_counts(uint32_t height,
                                        uint32_t width,
                                        const char *counts,
                                        struct VistaMask **out);

// Rasterize a box into a `height * width` mask.
enum VistaStatus vista_mask_from_box(struct VistaBox bbox,
                                     uint32_t height,
                                     uint32_t width,
                                     struct VistaMask **out);

// Space separated run lengths of `mask`.
enum VistaStatus vista_mask_counts(const struct VistaMask *mask, char **out);

// Write the mask as a row-major raster of 0/1 bytes into `buf`, which
// must hold `height * width` bytes.
enum VistaStatus vista_mask_to_raster(const struct VistaMask *mask, uint8_t *buf, size_t len);

// Mask height and width.
enum VistaStatus vista_mask_size(const struct VistaMask *mask, uint32_t *height, uint32_t *width);

// Number of foreground pixels; 0 for a null mask.
uint64_t vista_mask_area(const struct VistaMask *mask);

// Intersection over union of two equally sized masks.
enum VistaStatus vista_mask_iou(const struct VistaMask *a, const struct VistaMask *b, double *out);

// Tight bounding box of the foreground.
enum VistaStatus vista_mask_to_box(const struct VistaMask *mask, struct VistaBox *out);

void vista_mask_free(struct VistaMask *mask);

// Area under the success curve (mean overlap, 0..100).
enum VistaStatus vista_auc(const double *overlaps, size_t len, double *out);

// Normalized precision score from normalized center distances (0..100).
// Pass infinity for frames without a prediction.
enum VistaStatus vista_nps(const double *distances, size_t len, double *out);

// Generalized success robustness (0..100).
enum VistaStatus vista_gsr(const double *overlaps, size_t len, double *out);

// Weighted viewpoint bias over `len` pairs of per-view scores.
enum VistaStatus vista_delta_sigma(const double *fpv,
                                   const double *tpv,
                                   const double *weights,
                                   size_t len,
                                   struct VistaDelta *out);

// Paired t-test on `a[i] - b[i]`.
enum VistaStatus vista_paired_t_test(const double *a,
                                     const double *b,
                                     size_t len,
                                     struct VistaTTest *out);

// Intersection over union of two boxes. Degenerate pairs give 0.
double vista_box_iou(struct VistaBox a, struct VistaBox b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VISTA_EVAL_H */
