#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qkd {

/// Protocol stage at which a session gave up.
enum class AbortStage { Sift, Select, Estimate, Check, Reconcile, Verify, Privacy };

std::string_view abort_stage_name(AbortStage s);

/// An expected protocol outcome ("they abort the protocol"), not a caller
/// bug. run_session catches these and turns them into an Abort result;
/// standalone use of a stage function surfaces them directly.
class AbortError : public std::runtime_error {
  public:
    AbortError(AbortStage stage, std::string reason)
        : std::runtime_error(std::string(abort_stage_name(stage)) + ": " + reason),
          stage_(stage),
          reason_(std::move(reason)) {}

    AbortStage stage() const { return stage_; }
    const std::string& reason() const { return reason_; }

  private:
    AbortStage stage_;
    std::string reason_;
};

inline std::string_view abort_stage_name(AbortStage s) {
    switch (s) {
        case AbortStage::Sift: return "sift";
        case AbortStage::Select: return "select";
        case AbortStage::Estimate: return "estimate";
        case AbortStage::Check: return "check";
        case AbortStage::Reconcile: return "reconcile";
        case AbortStage::Verify: return "verify";
        case AbortStage::Privacy: return "privacy";
    }
    return "?";
}

}  // namespace qkd
