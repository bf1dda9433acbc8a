#pragma once

#include <memory>
#include <string>

#include "evopipe/coevo.hpp"

namespace evopipe {

inline constexpr const char* kCheckpointMagic = "EVOPIPE-CKPT";
inline constexpr const char* kPipelineMagic = "EVOPIPE-PIPELINE";
inline constexpr int kFormatVersion = 1;

// Versioned JSON container with the full evolution state; resuming from it
// reproduces an uninterrupted run exactly.
void save_checkpoint(const CoevoConfig& cfg, const CoevoSnapshot& snap, const std::string& path);

struct LoadedCheckpoint {
  CoevoConfig config;
  CoevoSnapshot snapshot;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// The trained artifact: kernel bank parameters plus the decision tree and
// the environment it was trained on.
struct PipelineArtifact {
  int kernel_count = 2;
  int kernel_size = 5;
  std::vector<double> vision_params;
  std::unique_ptr<TreeNode> tree;
  double fitness = 0.0;
  int generation = -1;
  EnvConfig env;
};

void save_pipeline(const PipelineArtifact& artifact, const std::string& path);
PipelineArtifact load_pipeline(const std::string& path);

}  // namespace evopipe
