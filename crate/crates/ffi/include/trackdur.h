/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef TRACKDUR_H
#define TRACKDUR_H

#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum TdStatus {
  TD_STATUS_OK = 0,
  // A required pointer argument was null.
  TD_STATUS_NULL_ARGUMENT = 1,
  // An argument or input violated a precondition.
  TD_STATUS_INVALID_ARGUMENT = 2,
  // Malformed CSV, JSON or text encoding.
  TD_STATUS_PARSE_ERROR = 3,
  // A file could not be read or written.
  TD_STATUS_IO_ERROR = 4,
  // The configuration was rejected.
  TD_STATUS_CONFIG_ERROR = 5,
  // The requested item does not exist, e.g. an unscored class.
  TD_STATUS_NOT_FOUND = 6,
  // A bug inside the library; the call had no effect.
  TD_STATUS_INTERNAL = 7,
} TdStatus;

// Result of an evaluation.
typedef struct TdReport TdReport;

// Parsed tracks or detections.
typedef struct TdSequence TdSequence;

// Headline numbers of one class or of the class average.
typedef struct TdMetrics {
  double hota;
  double deta;
  double assa;
  double loca;
  double ap;
  double avg_track_dur_seconds;
} TdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or null. The
// pointer stays valid until the next trackdur call on the same thread.
const char *td_last_error(void);

// Library version as a static NUL-terminated string.
const char *td_version(void);

// Release a string returned by this library. Null is ignored.
void td_string_free(char *s);

// Read a track CSV file. Rows must carry track ids.
enum TdStatus td_sequence_read_csv(const char *path, double native_fps, struct TdSequence **out);

// Parse track CSV text held in memory.
enum TdStatus td_sequence_parse_csv(const char *text, double native_fps, struct TdSequence **out);

// Render a sequence as track CSV; free the result with `td_string_free`.
enum TdStatus td_sequence_to_csv(const struct TdSequence *seq, char **out);

// Number of frames in the sequence; 0 for null.
size_t td_sequence_frame_count(const struct TdSequence *seq);

// Number of boxes in the sequence; 0 for null.
size_t td_sequence_detection_count(const struct TdSequence *seq);

// Release a sequence. Null is ignored.
void td_sequence_free(struct TdSequence *seq);

// Score `pred` against `gt`.
//
// `config_json` may be null for defaults; otherwise it holds the same JSON
// accepted by the command-line `--config` file. When `eval_fps` is positive
// it overrides the config's evaluation rate and frames are taken every
// `native_fps / eval_fps` steps.
enum TdStatus td_evaluate(const struct TdSequence *gt,
                          const struct TdSequence *pred,
                          const char *config_json,
                          double eval_fps,
                          struct TdReport **out);

// Class-averaged metrics. `NotFound` when the window held no ground truth.
enum TdStatus td_report_average(const struct TdReport *report, struct TdMetrics *out);

// Metrics of one class. `NotFound` when the class was not scored.
enum TdStatus td_report_class(const struct TdReport *report,
                              uint32_t class_id,
                              struct TdMetrics *out);

// Number of frames the report was scored on; 0 for null.
size_t td_report_window_frames(const struct TdReport *report);

// Full report as JSON; free the result with `td_string_free`.
enum TdStatus td_report_json(const struct TdReport *report, char **out);

// Release a report. Null is ignored.
void td_report_free(struct TdReport *report);

// Minimum-cost assignment of a row-major `rows x cols` matrix.
//
// Writes the assigned column of each row to `row_to_col` (length `rows`),
// or `SIZE_MAX` for rows left out when `rows > cols`.
enum TdStatus td_hungarian(const double *cost, size_t rows, size_t cols, size_t *row_to_col);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACKDUR_H */
