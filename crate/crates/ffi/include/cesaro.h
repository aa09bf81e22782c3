#ifndef CESARO_H
#define CESARO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes.
 */
typedef enum CesStatus {
  CES_STATUS_OK = 0,
  CES_STATUS_NULL_POINTER = 1,
  CES_STATUS_INVALID_UTF8 = 2,
  CES_STATUS_UNKNOWN_KEY = 3,
  CES_STATUS_INVALID_ARGUMENT = 4,
  CES_STATUS_SINGULAR = 5,
  CES_STATUS_OUT_OF_SCOPE = 6,
  CES_STATUS_PANIC = 99,
} CesStatus;

/*
 Membership of a point in a predicted spectrum.
 */
typedef enum CesMembership {
  CES_MEMBERSHIP_INSIDE = 0,
  CES_MEMBERSHIP_BOUNDARY_IN = 1,
  CES_MEMBERSHIP_BOUNDARY_OUT = 2,
  CES_MEMBERSHIP_OUTSIDE = 3,
} CesMembership;

/*
 Classification handle.
 */
typedef struct CesClassification CesClassification;

/*
 Weight family handle.
 */
typedef struct CesFamily CesFamily;

/*
 Lower-triangular matrix handle.
 */
typedef struct CesMatrix CesMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy of the last error message on this thread, or NULL if none.
 Free with `ces_string_free`.
 */
char *ces_last_error(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library, freed once.
 */
void ces_string_free(char *s);

/*
 Gallery family by key. `params` is NULL or `"k=v;k=v"`.

 # Safety
 Strings must be NUL-terminated; `out` must be writable.
 */
enum CesStatus ces_family_gallery(const char *key, const char *params, struct CesFamily **out);

/*
 Family from a JSON definition.

 # Safety
 `json` must be NUL-terminated; `out` must be writable.
 */
enum CesStatus ces_family_from_json(const char *json, struct CesFamily **out);

/*
 # Safety
 `f` must be NULL or a live family handle.
 */
void ces_family_free(struct CesFamily *f);

/*
 ln a_n(i).

 # Safety
 `f` must be a live handle, `out` writable.
 */
enum CesStatus ces_family_log_a(const struct CesFamily *f, uint64_t n, uint64_t i, double *out);

/*
 Classify a family at the given budget.

 # Safety
 `f` must be a live handle, `out` writable.
 */
enum CesStatus ces_classify(const struct CesFamily *f,
                            uint64_t i_max,
                            uint64_t n_max,
                            uint64_t m_max,
                            struct CesClassification **out);

/*
 # Safety
 `c` must be NULL or a live classification handle.
 */
void ces_classification_free(struct CesClassification *c);

/*
 Classification report as JSON. Free with `ces_string_free`.

 # Safety
 `c` must be a live handle, `out` writable.
 */
enum CesStatus ces_classification_json(const struct CesClassification *c, char **out);

/*
 1 when no equivalence is violated and no declared verdict contradicted.

 # Safety
 `c` must be a live handle, `out` writable.
 */
enum CesStatus ces_classification_consistent(const struct CesClassification *c, int32_t *out);

/*
 Membership of `re + i im` in the spectrum predicted by `c`.

 # Safety
 `c` must be a live handle, `out` writable.
 */
enum CesStatus ces_spectrum_member(const struct CesClassification *c,
                                   double re,
                                   double im,
                                   enum CesMembership *out);

/*
 N x N section of (C - mu I)^-1.

 # Safety
 `out` must be writable.
 */
enum CesStatus ces_resolvent(double re, double im, uintptr_t n, struct CesMatrix **out);

/*
 # Safety
 `m` must be NULL or a live matrix handle.
 */
void ces_matrix_free(struct CesMatrix *m);

/*
 # Safety
 `m` must be a live handle, `out` writable.
 */
enum CesStatus ces_matrix_dim(const struct CesMatrix *m, uintptr_t *out);

/*
 Entry (i, j), 1-based; zero above the diagonal.

 # Safety
 `m` must be a live handle, `re` and `im` writable.
 */
enum CesStatus ces_matrix_get(const struct CesMatrix *m,
                              uintptr_t i,
                              uintptr_t j,
                              double *re,
                              double *im);

/*
 max |((C - mu I) R - I)_ij| for a resolvent handle.

 # Safety
 `m` must be a live handle from `ces_resolvent`, `out` writable.
 */
enum CesStatus ces_resolvent_residual(const struct CesMatrix *m, double *out);

/*
 Runs the exact identity suite at size N; `passed` gets 1 if all hold.

 # Safety
 `passed` must be writable.
 */
enum CesStatus ces_verify_identities(uintptr_t n, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CESARO_H */
