#ifndef DSAHT_DSAHT_H
#define DSAHT_DSAHT_H

/*
 * C interface to the dsaht library.
 *
 * Objects are opaque handles released with their *_destroy function. Every
 * fallible call returns a dsaht_status; on failure a description is available
 * from dsaht_last_error_message() on the calling thread. Strings returned
 * through char** out-parameters are owned by the caller and must be released
 * with dsaht_string_free(). JSON outputs use 17 significant digits.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DSAHT_BUILDING)
#    define DSAHT_API __declspec(dllexport)
#  else
#    define DSAHT_API __declspec(dllimport)
#  endif
#else
#  define DSAHT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsaht_status {
    DSAHT_OK = 0,
    DSAHT_INVALID_ARGUMENT = 1,
    DSAHT_DIMENSION_MISMATCH = 2,
    DSAHT_NOT_STOCHASTIC = 3,
    DSAHT_NEGATIVE_ENTRY = 4,
    DSAHT_ZERO_PROBABILITY_OBSERVATION = 5,
    DSAHT_ZERO_PROBABILITY_INPUT = 6,
    DSAHT_BUDGET_EXCEEDED = 7,
    DSAHT_INCOMPLETE_POLICY = 8,
    DSAHT_NOT_CONVERGED = 9,
    DSAHT_NEGATIVE_INFORMATION = 10,
    DSAHT_INTERNAL = 99
} dsaht_status;

typedef enum dsaht_log_base { DSAHT_BITS = 0, DSAHT_NATS = 1 } dsaht_log_base;

typedef struct dsaht_spec {
    int x1_size;
    int x2_size;
    int z_size;
    int m1;
    int m2;
    dsaht_log_base log_base;
} dsaht_spec;

typedef struct dsaht_caps {
    uint64_t max_nodes;
    uint64_t max_strategies;
    uint64_t max_histories;
    uint64_t max_policies;
} dsaht_caps;

typedef struct dsaht_fixed_point_options {
    int resolution;   /* grid resolution k >= 2 */
    int average;      /* 0: discounted value iteration, 1: relative value iteration */
    double beta;      /* discount factor, discounted mode only */
    double tol;
    int max_iter;
} dsaht_fixed_point_options;

typedef struct dsaht_problem dsaht_problem;
typedef struct dsaht_policy dsaht_policy;

DSAHT_API const char* dsaht_version(void);
DSAHT_API const char* dsaht_status_string(dsaht_status status);
DSAHT_API const char* dsaht_last_error_message(void);
DSAHT_API void dsaht_string_free(char* s);

DSAHT_API void dsaht_caps_default(dsaht_caps* caps);
DSAHT_API void dsaht_fixed_point_options_default(dsaht_fixed_point_options* options);

/* Channel table q has x1_size * x2_size * z_size entries, row-major by (x1, x2, z). */
DSAHT_API dsaht_status dsaht_problem_create(const dsaht_spec* spec, const double* q, size_t len,
                                            dsaht_problem** out);
/* generator: "uniform", "identity-pair", "xor-bsc(p)" or "random(seed)". */
DSAHT_API dsaht_status dsaht_problem_create_generated(const dsaht_spec* spec, const char* generator,
                                                      dsaht_problem** out);
DSAHT_API void dsaht_problem_destroy(dsaht_problem* problem);
/* Spec, validated channel rows and "stochastic": true. */
DSAHT_API dsaht_status dsaht_problem_describe(const dsaht_problem* problem, char** json);

/* objective: "error_probability", "joint_entropy_drift", "conditional_entropy_drift_user1",
 * "conditional_entropy_drift_user2" or "ejs". report (optional) receives node counts and the
 * root value; with exact != 0 the error-probability value is recomputed in rational arithmetic. */
DSAHT_API dsaht_status dsaht_solve_dp(const dsaht_problem* problem, int horizon, const char* objective,
                                      const dsaht_caps* caps, int exact, dsaht_policy** out, char** report);
/* e1 has m1 entries and e2 has m2 entries. */
DSAHT_API dsaht_status dsaht_policy_constant(const dsaht_problem* problem, int horizon, const int* e1,
                                             const int* e2, dsaht_policy** out);
DSAHT_API dsaht_status dsaht_policy_seeded(const dsaht_problem* problem, int horizon, uint64_t seed,
                                           dsaht_policy** out);
DSAHT_API dsaht_status dsaht_policy_from_json(const char* json, dsaht_policy** out);
DSAHT_API dsaht_status dsaht_policy_to_json(const dsaht_policy* policy, char** json);
DSAHT_API dsaht_status dsaht_policy_horizon(const dsaht_policy* policy, int* horizon);
DSAHT_API dsaht_status dsaht_policy_root_value(const dsaht_policy* policy, double* value);
DSAHT_API void dsaht_policy_destroy(dsaht_policy* policy);

DSAHT_API dsaht_status dsaht_policy_evaluate(const dsaht_problem* problem, const dsaht_policy* policy,
                                             double* error_probability);
DSAHT_API dsaht_status dsaht_simulate(const dsaht_problem* problem, const dsaht_policy* policy, uint64_t trials,
                                      uint64_t seed, double* estimate, double* half_width);
/* JSON forms of the two calls above; the report also carries the exact value. */
DSAHT_API dsaht_status dsaht_policy_evaluate_report(const dsaht_problem* problem, const dsaht_policy* policy,
                                                    char** json);
DSAHT_API dsaht_status dsaht_simulate_report(const dsaht_problem* problem, const dsaht_policy* policy,
                                             uint64_t trials, uint64_t seed, char** json);

/* Minimum error probability over all deterministic feedback encoders. */
DSAHT_API dsaht_status dsaht_oracle_unstructured(const dsaht_problem* problem, int horizon, int rational,
                                                 uint64_t max_strategies, char** json);

/* Instantaneous costs at the uniform belief for every joint action, plus the
 * telescoping check of each cost kind on the given policy. */
DSAHT_API dsaht_status dsaht_costs_report(const dsaht_problem* problem, const dsaht_policy* policy, char** json);

/* Returns DSAHT_NOT_CONVERGED with json still filled when max_iter is reached. */
DSAHT_API dsaht_status dsaht_fixed_point(const dsaht_problem* problem, const char* cost,
                                         const dsaht_fixed_point_options* options, char** json);

/* lambda points at three weights. With oracle != 0 the full-history values are
 * reported alongside. */
DSAHT_API dsaht_status dsaht_capacity_eval(const dsaht_problem* problem, const dsaht_policy* policy, int n,
                                           const double* lambda, int oracle, const dsaht_caps* caps, char** json);
DSAHT_API dsaht_status dsaht_capacity_search(const dsaht_problem* problem, int n, const double* lambda,
                                             const dsaht_caps* caps, char** json);
/* lambdas holds count consecutive weight triples. csv may be NULL. */
DSAHT_API dsaht_status dsaht_lambda_sweep(const dsaht_problem* problem, int n, const double* lambdas, size_t count,
                                          const dsaht_caps* caps, char** json, char** csv);

/* Belief-update, factorization, stage-function and kernel checks; *passed is
 * set to 1 when every check is within tolerance. */
DSAHT_API dsaht_status dsaht_check_invariants(const dsaht_problem* problem, int horizon, const dsaht_caps* caps,
                                              uint64_t seed, char** json, int* passed);

#ifdef __cplusplus
}
#endif

#endif
