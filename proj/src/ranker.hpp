#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domain.hpp"

namespace courserec {

// Fully connected layer. Weights are row-major, one row per output unit;
// column 0 of each row is the bias.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;

  double& at(std::size_t out, std::size_t col) { return weights[out * (inputs + 1) + col]; }
  double at(std::size_t out, std::size_t col) const { return weights[out * (inputs + 1) + col]; }

  bool operator==(const DenseLayer&) const = default;
};

// tanh hidden layers feeding one logistic output unit.
class MlpModel {
 public:
  MlpModel() = default;
  // Zero weights.
  explicit MlpModel(std::vector<std::size_t> layer_sizes);

  // Weights uniform in [-init_range, init_range] from a seeded generator.
  static MlpModel random(std::vector<std::size_t> layer_sizes, std::uint64_t seed,
                         double init_range);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
  std::size_t weight_count() const;

  bool operator==(const MlpModel&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
};

double forward(const MlpModel& model, std::span<const double> x);

// dE/dw for E = (y - t)^2 / 2, laid out like the model's layers.
std::vector<std::vector<double>> backprop(const MlpModel& model, std::span<const double> x,
                                          double target);

double squared_error(const MlpModel& model, std::span<const double> x, double target);

// Largest relative deviation between backprop and central differences
// (step 1e-5) over every weight. The denominator is floored at
// kGradientFloor so weights with vanishing gradient compare absolutely.
inline constexpr double kGradientFloor = 1e-4;
double gradient_check(const MlpModel& model, std::span<const double> x, double target);

struct TrainConfig {
  std::vector<std::size_t> hidden{32};
  int epochs = 400;
  double learning_rate = 0.2;
  std::uint64_t seed = 1;
  double init_range = 0.5;

  bool operator==(const TrainConfig&) const = default;
};

// "32-16" -> {32, 16}
std::vector<std::size_t> parse_hidden(std::string_view spec);
std::string format_hidden(std::span<const std::size_t> hidden);

struct Sample {
  InputVector x{};
  double target = 0.0;
  int rank = 3;

  auto operator<=>(const Sample&) const = default;
};

// (5 - rank) / 4
double rank_target(int rank);
// clamp(round(5 - 4y), 1, 5)
int rank_from_score(double y);

std::vector<Sample> encode_survey(std::span<const SurveyRecord> records, const Catalog& catalog);

// The network a given config starts from.
MlpModel initial_model(const TrainConfig& cfg);

// Online backpropagation. Samples are put in a canonical order first, so the
// seeded per-epoch shuffle is the only order dependence.
MlpModel train(std::span<const Sample> samples, const TrainConfig& cfg);
MlpModel train(std::span<const SurveyRecord> records, const TrainConfig& cfg,
               const Catalog& catalog);

RankedCourse predict_rank(const MlpModel& model, const UserProfile& profile, const Course& course,
                          const Catalog& catalog);

struct EvalReport {
  double rms_error = 0.0;
  double tolerance1_accuracy = 0.0;
  std::size_t n_test = 0;

  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate(const MlpModel& model, std::span<const Sample> test);
EvalReport evaluate(const MlpModel& model, std::span<const SurveyRecord> test,
                    const Catalog& catalog);

struct SweepResult {
  TrainConfig config;
  EvalReport report;
};

std::vector<SweepResult> config_sweep(std::span<const SurveyRecord> train_set,
                                      std::span<const SurveyRecord> test_set,
                                      std::span<const TrainConfig> configs, const Catalog& catalog);

std::string save_mlp_model(const MlpModel& model);
MlpModel load_mlp_model(std::string_view text);
MlpModel load_mlp_model_file(const std::filesystem::path& path);

}  // namespace courserec
