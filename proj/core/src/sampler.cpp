#include "sparrow/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "sparrow/scanner.hpp"

namespace sparrow {

int select_stratum(const StratifiedStore& store, Rng& rng) {
  const std::vector<int> strata = store.nonempty_strata();
  if (strata.empty()) throw EmptyStore("select_stratum: store is empty");
  std::vector<double> weights;
  weights.reserve(strata.size());
  for (int k : strata) weights.push_back(std::max(store.stratum_weight(k), 0.0));
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    // Only possible through float drift on nearly empty strata.
    std::uniform_int_distribution<std::size_t> pick(0, strata.size() - 1);
    return strata[pick(rng)];
  }
  std::uniform_real_distribution<double> unit(0.0, total);
  const double target = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    acc += weights[i];
    if (target < acc && weights[i] > 0.0) return strata[i];
  }
  for (std::size_t i = strata.size(); i-- > 0;) {
    if (weights[i] > 0.0) return strata[i];
  }
  return strata.back();
}

double acceptance_probability(double weight) {
  return weight / std::ldexp(1.0, stratum_index(weight) + 1);
}

double acceptance_probability(double weight, int stratum) {
  return std::min(1.0, weight / std::ldexp(1.0, stratum + 1));
}

StratifiedSampler::StratifiedSampler(StratifiedStore& store, std::uint64_t seed)
    : store_(store), rng_(seed), features_(store.dimension()) {}

bool StratifiedSampler::step_into(const Ensemble& snapshot,
                                  std::vector<std::byte>& accepted) {
  if (store_.empty()) throw EmptyStore("sample_step: store is empty");
  if (!current_ || store_.stratum_size(*current_) == 0) {
    current_ = select_stratum(store_, rng_);
  }
  store_.pop_front(*current_, record_);
  const RecordRef rec(record_, store_.dimension());
  rec.read_features(features_);
  const double w = refresh_weight(rec.weight(), rec.version(), rec.label(),
                                  features_, snapshot);
  set_stamp(record_, w, snapshot.version());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool accept = unit(rng_) < acceptance_probability(w, *current_);
  ++steps_;
  if (accept) {
    accepted.assign(record_.begin(), record_.end());
    set_stamp(accepted, 1.0, snapshot.version());
    ++accepted_;
    current_.reset();
  }
  store_.push_back(record_);
  return accept;
}

std::optional<StampedExample> StratifiedSampler::step(const Ensemble& snapshot) {
  std::vector<std::byte> accepted;
  if (!step_into(snapshot, accepted)) return std::nullopt;
  return decode_record(accepted, store_.dimension());
}

SampleSet StratifiedSampler::assemble(const Ensemble& snapshot, std::size_t n) {
  if (n == 0) throw InvalidInput("assemble_sample: n must be positive");
  if (store_.size() < n) {
    throw InsufficientData("assemble_sample: store holds " +
                           std::to_string(store_.size()) + " records, need " +
                           std::to_string(n));
  }
  SampleSet sample;
  sample.records = RecordBuffer(store_.dimension());
  sample.records.reserve(n);
  sample.version = snapshot.version();
  sample.target_size = n;
  std::vector<std::byte> accepted;
  while (sample.records.size() < n) {
    if (step_into(snapshot, accepted)) sample.records.push_back_encoded(accepted);
  }
  return sample;
}

SystematicSampler::SystematicSampler(double theta, double offset)
    : theta_(theta), next_(offset) {
  if (!(theta > 0.0)) throw InvalidInput("mv_sample: theta must be positive");
  if (!(offset >= 0.0 && offset < theta)) {
    throw InvalidInput("mv_sample: offset must lie in [0, theta)");
  }
}

bool SystematicSampler::offer(double weight) {
  if (!(weight > 0.0)) throw InvalidInput("mv_sample: weights must be positive");
  const double before = cumulative_;
  cumulative_ += std::min(weight, theta_);
  if (before <= next_ && next_ < cumulative_) {
    next_ += theta_;
    ++accepted_;
    return true;
  }
  return false;
}

std::vector<std::size_t> mv_sample(std::span<const double> weights,
                                   double theta, double offset) {
  SystematicSampler sampler(theta, offset);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (sampler.offer(weights[i])) out.push_back(i);
  }
  return out;
}

SampleSet initial_sample(const DatasetFile& data, std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidInput("initial_sample: n must be positive");
  if (data.size() < n) {
    throw InsufficientData("initial_sample: dataset holds " +
                           std::to_string(data.size()) + " records, need " +
                           std::to_string(n));
  }
  const double theta = static_cast<double>(data.size()) / static_cast<double>(n);
  std::uniform_real_distribution<double> offset(0.0, theta);
  SystematicSampler sampler(theta, offset(rng));

  SampleSet sample;
  sample.records = RecordBuffer(data.dimension());
  sample.records.reserve(n);
  sample.target_size = n;
  sample.version = 0;
  std::vector<std::byte> scratch;
  data.for_each([&](const RecordRef& rec) {
    if (sample.records.size() >= n) return;
    if (!sampler.offer(1.0)) return;
    scratch.assign(rec.bytes().begin(), rec.bytes().end());
    set_stamp(scratch, 1.0, 0);
    sample.records.push_back_encoded(scratch);
  });
  return sample;
}

}  // namespace sparrow
