#ifndef POWERPLAN_POWERPLAN_H
#define POWERPLAN_POWERPLAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef POWERPLAN_BUILDING_LIBRARY
#    define PP_API __declspec(dllexport)
#  else
#    define PP_API __declspec(dllimport)
#  endif
#else
#  define PP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pp_status {
    PP_OK = 0,
    PP_ERR_INVALID_ARGUMENT = 1, /* null pointer or malformed call */
    PP_ERR_DOMAIN = 2,
    PP_ERR_PRECONDITION = 3,
    PP_ERR_NUMERIC = 4,
    PP_ERR_CONFIG = 5,
    PP_ERR_INTERNAL = 6
} pp_status;

typedef struct pp_config pp_config;
typedef struct pp_report pp_report;

typedef enum pp_command {
    PP_CMD_ALLOCATE = 0,
    PP_CMD_MSE = 1,
    PP_CMD_TWO_EXP = 2,
    PP_CMD_SURROGATE = 3,
    PP_CMD_SIMULATE = 4,
    PP_CMD_VALIDATE = 5
} pp_command;

typedef struct pp_run_options {
    pp_command command;
    const char* variant; /* "tol"/"conf"/"exp", "fig1".."fig6"/"custom", or NULL */
    double gamma;
    int has_gamma;
    double delta;
    int has_delta;
    uint64_t seed;
    int has_seed;
    int fast;
    int want_svg;
    int round;
} pp_run_options;

PP_API const char* pp_version(void);

/* Message of the last failed call on this thread; "" after a success. */
PP_API const char* pp_last_error(void);

PP_API void pp_run_options_init(pp_run_options* options);

PP_API pp_status pp_config_parse(const char* text, size_t length, pp_config** out);
PP_API void pp_config_free(pp_config* config);
/* Number of schema problems recorded by the last failed pp_config_parse on
   this thread, and each problem in turn. */
PP_API size_t pp_config_problem_count(void);
PP_API const char* pp_config_problem(size_t index);

/* Runs the preflight checks used by pp_run without computing anything. */
PP_API pp_status pp_config_validate(const pp_config* config, const pp_run_options* options);

/* config may be NULL for the preset simulations. */
PP_API pp_status pp_run(const pp_config* config, const pp_run_options* options, pp_report** out);

/* Borrowed strings, valid until pp_report_free. */
PP_API const char* pp_report_csv(const pp_report* report);
PP_API const char* pp_report_svg(const pp_report* report);
PP_API size_t pp_report_metadata_count(const pp_report* report);
PP_API const char* pp_report_metadata_key(const pp_report* report, size_t index);
PP_API const char* pp_report_metadata_value(const pp_report* report, size_t index);
PP_API void pp_report_free(pp_report* report);

/* Direct numeric entry points. */
PP_API pp_status pp_type2_error(double sigma, double n, double delta_gap, double alpha, double* out);

/* n_out and beta_out hold `count` values each; max_beta_out may be NULL. */
PP_API pp_status pp_power_optimal_allocation(const double* sigma, const double* delta_gap, size_t count,
                                             double budget, double alpha, double* n_out, double* beta_out,
                                             double* max_beta_out);

PP_API pp_status pp_kappa(int epsilon, double c, double* out);

typedef enum pp_objective { PP_OBJ_TOL = 0, PP_OBJ_CONF = 1, PP_OBJ_EXP = 2 } pp_objective;

/* Surrogate-S pipeline on pilot deviations. level is gamma (TOL) or delta
   (CONF) and is ignored for EXP. c_out, k_out and n_out hold `count` values;
   objective_out receives delta^R, gamma^R or g^R. */
PP_API pp_status pp_solve_surrogate(const double* pilot_s, const int* epsilon, const double* delta_gap, size_t count,
                                    double budget, double alpha, pp_objective objective, double level, double* c_out,
                                    double* k_out, double* n_out, double* objective_out);

#ifdef __cplusplus
}
#endif

#endif
