#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace shiftiv {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy. Every failure carries a kind (what went wrong) and a
// class (whose fault it is), which maps onto process exit codes:
// config -> 2, data -> 3, estimation -> 4, internal -> 5.
enum class ErrKind {
  MissingColumn,
  NonNumericCell,
  NonBinaryTreatment,
  TooFewRows,
  DegenerateDesign,
  ZeroResidualVariance,
  DegenerateIntervention,
  WeakInstrument,
  RankDeficientDesign,
  ZeroVarianceColumn,
  BadFoldCount,
  BadArgument,
  BadConfig,
  IoError,
};

enum class ErrClass { Config = 2, Data = 3, Estimation = 4, Internal = 5 };

inline const char* kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::MissingColumn: return "MissingColumn";
    case ErrKind::NonNumericCell: return "NonNumericCell";
    case ErrKind::NonBinaryTreatment: return "NonBinaryTreatment";
    case ErrKind::TooFewRows: return "TooFewRows";
    case ErrKind::DegenerateDesign: return "DegenerateDesign";
    case ErrKind::ZeroResidualVariance: return "ZeroResidualVariance";
    case ErrKind::DegenerateIntervention: return "DegenerateIntervention";
    case ErrKind::WeakInstrument: return "WeakInstrument";
    case ErrKind::RankDeficientDesign: return "RankDeficientDesign";
    case ErrKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrKind::BadFoldCount: return "BadFoldCount";
    case ErrKind::BadArgument: return "BadArgument";
    case ErrKind::BadConfig: return "BadConfig";
    case ErrKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, ErrClass cls, const std::string& detail)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + detail),
        kind_(kind),
        cls_(cls) {}

  ErrKind kind() const { return kind_; }
  ErrClass cls() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

 private:
  ErrKind kind_;
  ErrClass cls_;
};

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

inline bool is_finite(double v) { return std::isfinite(v); }

}  // namespace shiftiv
