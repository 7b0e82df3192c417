#include "shiftiv.h"

#include <new>
#include <string>

#include "json.hpp"
#include "shiftiv/common.hpp"
#include "shiftiv/config.hpp"
#include "shiftiv/runner.hpp"

struct shiftiv_session {
  std::string last_error;
  std::string buffer;
};

extern "C" {

shiftiv_session* shiftiv_session_new(void) {
  return new (std::nothrow) shiftiv_session();
}

void shiftiv_session_free(shiftiv_session* session) { delete session; }

const char* shiftiv_version(void) { return shiftiv::kVersion; }

const char* shiftiv_default_config(shiftiv_session* session) {
  if (!session) return nullptr;
  try {
    session->buffer = shiftiv::config_to_json(shiftiv::RunConfig{}).dump(2);
    session->last_error.clear();
    return session->buffer.c_str();
  } catch (const std::exception& e) {
    session->last_error = std::string("Internal: ") + e.what();
    return nullptr;
  }
}

int shiftiv_run(shiftiv_session* session, const char* config_json,
                const char* out_dir) {
  if (!session) return static_cast<int>(shiftiv::ErrClass::Internal);
  session->last_error.clear();
  try {
    if (!config_json) {
      throw shiftiv::Error(shiftiv::ErrKind::BadConfig,
                           shiftiv::ErrClass::Config, "config JSON is null");
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw shiftiv::Error(shiftiv::ErrKind::BadConfig,
                           shiftiv::ErrClass::Config,
                           std::string("cannot parse config JSON: ") +
                               e.what());
    }
    if (j.is_object() && j.contains("config") && j["config"].is_object()) {
      j = j["config"];
    }
    shiftiv::RunConfig config = shiftiv::config_from_json(j);
    if (out_dir && *out_dir) config.out = out_dir;
    shiftiv::run(config);
    return 0;
  } catch (const shiftiv::Error& e) {
    session->last_error = e.what();
    return e.exit_code();
  } catch (const std::exception& e) {
    session->last_error = std::string("Internal: ") + e.what();
    return static_cast<int>(shiftiv::ErrClass::Internal);
  } catch (...) {
    session->last_error = "Internal: unknown error";
    return static_cast<int>(shiftiv::ErrClass::Internal);
  }
}

const char* shiftiv_last_error(const shiftiv_session* session) {
  return session ? session->last_error.c_str() : "";
}

}  // extern "C"
