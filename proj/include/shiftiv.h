#ifndef SHIFTIV_H
#define SHIFTIV_H

/* C interface to the shift-effect estimation library. All state lives in an
 * opaque session; strings returned from a session stay valid until the next
 * call on that session or until it is freed. Functions never throw. */

#if defined(_WIN32)
#define SHIFTIV_API __declspec(dllexport)
#else
#define SHIFTIV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct shiftiv_session shiftiv_session;

SHIFTIV_API shiftiv_session* shiftiv_session_new(void);
SHIFTIV_API void shiftiv_session_free(shiftiv_session* session);

/* Library version string, e.g. "0.1.0". */
SHIFTIV_API const char* shiftiv_version(void);

/* Fully resolved default configuration as a JSON object, or NULL on error. */
SHIFTIV_API const char* shiftiv_default_config(shiftiv_session* session);

/* Runs the subcommand described by config_json (a flat config object, or a
 * manifest wrapping one under a "config" key). out_dir, when non-NULL and
 * nonempty, overrides the configured output directory. Returns 0 on success;
 * otherwise 2 (config error), 3 (data error), 4 (estimation error), or
 * 5 (internal error), with details from shiftiv_last_error. */
SHIFTIV_API int shiftiv_run(shiftiv_session* session, const char* config_json,
                            const char* out_dir);

/* Message for the most recent failed call on this session; empty if the most
 * recent call succeeded. */
SHIFTIV_API const char* shiftiv_last_error(const shiftiv_session* session);

#ifdef __cplusplus
}
#endif

#endif /* SHIFTIV_H */
