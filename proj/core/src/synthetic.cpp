#include "sparrow/synthetic.hpp"

#include "sparrow/dataset.hpp"

namespace sparrow {

LabeledExample planted_example(const PlantedStump& task, std::mt19937_64& rng) {
  if (task.feature >= task.dimension) {
    throw InvalidInput("planted_example: feature out of range");
  }
  if (!(task.edge >= -1.0 && task.edge <= 1.0)) {
    throw InvalidInput("planted_example: edge must lie in [-1, 1]");
  }
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution agree((1.0 + task.edge) / 2.0);
  LabeledExample ex;
  ex.features.resize(task.dimension);
  for (auto& v : ex.features) v = unit(rng);
  const bool left = coin(rng);
  ex.features[task.feature] = left ? 0.0f : 1.0f;
  const bool positive = agree(rng) == left;
  ex.label = positive ? Label::Positive : Label::Negative;
  return ex;
}

std::vector<LabeledExample> planted_examples(const PlantedStump& task,
                                             std::size_t count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(planted_example(task, rng));
  return out;
}

void write_planted_dataset(const std::filesystem::path& path,
                           const PlantedStump& task, std::size_t count,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DatasetWriter writer(path, task.dimension);
  for (std::size_t i = 0; i < count; ++i) writer.add(planted_example(task, rng));
  writer.flush();
}

LabeledExample additive_example(const AdditiveTask& task, std::mt19937_64& rng) {
  if (task.dimension < 3) throw InvalidInput("additive_example: dimension < 3");
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<double> noise(0.0, task.noise);
  LabeledExample ex;
  ex.features.resize(task.dimension);
  for (auto& v : ex.features) v = unit(rng);
  const double s = 2.0 * (ex.features[0] - 0.5) + 1.5 * (ex.features[1] - 0.5) -
                   1.0 * (ex.features[2] - 0.5) + noise(rng);
  ex.label = s > 0.0 ? Label::Positive : Label::Negative;
  return ex;
}

std::vector<LabeledExample> additive_examples(const AdditiveTask& task,
                                              std::size_t count,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(additive_example(task, rng));
  return out;
}

std::vector<LabeledExample> imbalanced_examples(const ImbalancedTask& task,
                                                std::size_t count,
                                                std::uint64_t seed) {
  if (task.dimension < 3) throw InvalidInput("imbalanced_examples: dimension < 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::bernoulli_distribution flip(task.label_noise);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LabeledExample ex;
    ex.features.resize(task.dimension);
    for (auto& v : ex.features) v = unit(rng);
    const double s = 2.0 * (ex.features[0] - 0.6) + 2.0 * (ex.features[1] - 0.6) +
                     0.5 * (ex.features[2] - 0.5) + noise(rng);
    bool positive = s > 0.5;
    if (flip(rng)) positive = !positive;
    ex.label = positive ? Label::Positive : Label::Negative;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace sparrow
