#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "sparrow/core.hpp"

namespace sparrow {

/// Examples where one stump carries a known edge and everything else is
/// noise. Feature `feature` is 0 or 1 with equal probability, the label
/// agrees with "x <= 0.5 -> +1" with probability (1 + edge) / 2, and the
/// other features are uniform on [0, 1).
struct PlantedStump {
  std::size_t dimension = 8;
  std::size_t feature = 3;
  double edge = 0.3;
};

LabeledExample planted_example(const PlantedStump& task, std::mt19937_64& rng);
std::vector<LabeledExample> planted_examples(const PlantedStump& task,
                                             std::size_t count,
                                             std::uint64_t seed);
/// Streams `count` planted examples into a binary store.
void write_planted_dataset(const std::filesystem::path& path,
                           const PlantedStump& task, std::size_t count,
                           std::uint64_t seed);

/// Uniform features on [0, 1); the label is the sign of a fixed additive
/// function of the first features plus Gaussian noise. Learnable by small
/// trees well below an exponential loss of 0.8.
struct AdditiveTask {
  std::size_t dimension = 8;
  double noise = 0.1;
};

LabeledExample additive_example(const AdditiveTask& task, std::mt19937_64& rng);
std::vector<LabeledExample> additive_examples(const AdditiveTask& task,
                                              std::size_t count,
                                              std::uint64_t seed);

/// Imbalanced task (roughly 1 positive in 7): positives sit in a corner of
/// the first two features, with a weaker third feature and label noise.
struct ImbalancedTask {
  std::size_t dimension = 10;
  double label_noise = 0.03;
};

std::vector<LabeledExample> imbalanced_examples(const ImbalancedTask& task,
                                                std::size_t count,
                                                std::uint64_t seed);

}  // namespace sparrow
