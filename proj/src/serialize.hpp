#pragma once

#include <optional>
#include <string>

#include "trainer.hpp"
#include "verify.hpp"

namespace ffattn {

struct Checkpoint {
  ModelParams params;
  std::optional<AdamState> adam;
};

// Checkpoint document: D, pooling mode, every tensor as nested arrays of
// decimal reals under its own name, plus the optimizer state so a run can
// be resumed deterministically. All reals round-trip exactly.
std::string checkpoint_to_json(const ModelParams& params, const AdamState* adam = nullptr);
Checkpoint checkpoint_from_json(const std::string& text);

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);

// Full run summary with the resolved config for provenance.
std::string run_result_to_json(const RunResult& result);

std::string gradcheck_report_to_json(const GradCheckReport& report);

const char* pooling_name(Pooling pooling);
Pooling pooling_from_name(const std::string& name);
TaskKind task_from_name(const std::string& name);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace ffattn
