#ifndef PDML_H
#define PDML_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PdmlStatus {
  PDML_STATUS_OK = 0,
  PDML_STATUS_NULL_POINTER = 1,
  PDML_STATUS_INVALID_ARGUMENT = 2,
  PDML_STATUS_CONFIG = 3,
  PDML_STATUS_NUMERIC = 4,
  PDML_STATUS_INPUT = 5,
  PDML_STATUS_EMPTY_DATASET = 6,
  PDML_STATUS_SCHEDULE = 7,
  PDML_STATUS_PARSE = 8,
  PDML_STATUS_VERSION = 9,
  PDML_STATUS_AXIS_MISMATCH = 10,
  PDML_STATUS_IO = 11,
  PDML_STATUS_PANIC = 12,
} PdmlStatus;

typedef enum PdmlDetectorKind {
  // Multi-tap maximum-likelihood post-fit residual.
  PDML_DETECTOR_KIND_PDML = 0,
  // Two-tap symmetric difference.
  PDML_DETECTOR_KIND_SD = 1,
} PdmlDetectorKind;

typedef enum PdmlHypothesis {
  PDML_HYPOTHESIS_CLEAN = 0,
  PDML_HYPOTHESIS_MULTIPATH = 1,
  PDML_HYPOTHESIS_SPOOFING = 2,
  PDML_HYPOTHESIS_JAMMING = 3,
} PdmlHypothesis;

// Opaque distortion detector.
typedef struct PdmlDetector PdmlDetector;

// Opaque decision-region map.
typedef struct PdmlRegions PdmlRegions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a detector. `taps` is the ML tap count (odd, at least 3); the SD
// detector ignores it and uses the default 0.5-chip spacing.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum PdmlStatus pdml_detector_new(enum PdmlDetectorKind kind,
                                  size_t taps,
                                  struct PdmlDetector **out);

// # Safety
// `det` must be null or a handle from [`pdml_detector_new`] not yet freed.
void pdml_detector_free(struct PdmlDetector *det);

// Number of correlator taps the detector expects, or 0 for a null handle.
//
// # Safety
// `det` must be null or a live detector handle.
size_t pdml_detector_tap_count(const struct PdmlDetector *det);

// Copies the tap offsets in chips into `out[0..len]`.
//
// # Safety
// `det` must be a live handle and `out` must point to `len` writable doubles.
enum PdmlStatus pdml_detector_offsets(const struct PdmlDetector *det, double *out, size_t len);

// Computes the distortion of one tap vector given as separate in-phase and
// quadrature arrays of `len` values. `noise_var` is the per-component noise
// variance of the taps after gain control.
//
// # Safety
// `det` must be a live handle; `re` and `im` must each point to `len`
// readable doubles; `out` must point to one writable double.
enum PdmlStatus pdml_distortion(const struct PdmlDetector *det,
                                const double *re,
                                const double *im,
                                size_t len,
                                double noise_var,
                                double *out);

// Loads a region file written by `pdml design`.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` must point to
// writable storage for one handle.
enum PdmlStatus pdml_regions_load(const char *path, struct PdmlRegions **out);

// # Safety
// `regions` must be null or a handle from [`pdml_regions_load`] not yet freed.
void pdml_regions_free(struct PdmlRegions *regions);

// Classifies one (power, distortion) measurement.
//
// # Safety
// `regions` must be a live handle and `out` must point to writable storage.
enum PdmlStatus pdml_classify(const struct PdmlRegions *regions,
                              double power_db,
                              double distortion,
                              enum PdmlHypothesis *out);

// Message for the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *pdml_last_error_message(void);

// Static name of a status code.
const char *pdml_status_name(enum PdmlStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDML_H */
