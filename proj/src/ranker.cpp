#include "ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace courserec {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw Error(ErrorKind::Validation, "network needs at least two layers");
  if (sizes.back() != 1) throw Error(ErrorKind::Validation, "network must have one output unit");
  for (auto s : sizes)
    if (s == 0) throw Error(ErrorKind::Validation, "layer sizes must be positive");
}

// Per-layer activations (activations[0] is the input) and deltas.
struct Workspace {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> deltas;
};

double run_forward(const MlpModel& model, std::span<const double> x, Workspace& ws) {
  const auto& layers = model.layers();
  if (x.size() != model.input_size())
    throw Error(ErrorKind::Validation, "input has " + std::to_string(x.size()) +
                                           " components, network expects " +
                                           std::to_string(model.input_size()));
  ws.activations.resize(layers.size() + 1);
  ws.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto& in = ws.activations[l];
    auto& out = ws.activations[l + 1];
    out.resize(layer.outputs);
    const bool last = l + 1 == layers.size();
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      const double* row = &layer.weights[j * (layer.inputs + 1)];
      double z = row[0];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += row[i + 1] * in[i];
      out[j] = last ? logistic(z) : std::tanh(z);
    }
  }
  return ws.activations.back()[0];
}

// Computes deltas for every layer; returns y.
double run_backward(const MlpModel& model, std::span<const double> x, double target,
                    Workspace& ws) {
  const auto& layers = model.layers();
  double y = run_forward(model, x, ws);
  ws.deltas.resize(layers.size());
  ws.deltas.back().assign(1, (y - target) * y * (1.0 - y));
  for (std::size_t l = layers.size() - 1; l > 0; --l) {
    const auto& layer = layers[l];
    const auto& a = ws.activations[l];
    auto& prev = ws.deltas[l - 1];
    prev.assign(layer.inputs, 0.0);
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      const double dj = ws.deltas[l][j];
      const double* row = &layer.weights[j * (layer.inputs + 1)];
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += row[i + 1] * dj;
    }
    for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] *= 1.0 - a[i] * a[i];
  }
  return y;
}

}  // namespace

// --- model --------------------------------------------------------------------

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes_[l];
    layer.outputs = sizes_[l + 1];
    layer.weights.assign(layer.outputs * (layer.inputs + 1), 0.0);
    layers_.push_back(std::move(layer));
  }
}

MlpModel MlpModel::random(std::vector<std::size_t> layer_sizes, std::uint64_t seed,
                          double init_range) {
  MlpModel m(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (auto& layer : m.layers_)
    for (auto& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * init_range;
  return m;
}

std::size_t MlpModel::weight_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size();
  return n;
}

double forward(const MlpModel& model, std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "input is not finite");
  Workspace ws;
  return run_forward(model, x, ws);
}

std::vector<std::vector<double>> backprop(const MlpModel& model, std::span<const double> x,
                                          double target) {
  Workspace ws;
  run_backward(model, x, target, ws);
  std::vector<std::vector<double>> grads;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& layer = model.layers()[l];
    std::vector<double> g(layer.weights.size());
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      double dj = ws.deltas[l][j];
      g[j * (layer.inputs + 1)] = dj;
      for (std::size_t i = 0; i < layer.inputs; ++i)
        g[j * (layer.inputs + 1) + i + 1] = dj * ws.activations[l][i];
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double squared_error(const MlpModel& model, std::span<const double> x, double target) {
  double e = forward(model, x) - target;
  return 0.5 * e * e;
}

double gradient_check(const MlpModel& model, std::span<const double> x, double target) {
  constexpr double h = 1e-5;
  auto analytic = backprop(model, x, target);
  MlpModel probe = model;
  double worst = 0.0;
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto& weights = probe.layers()[l].weights;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double saved = weights[k];
      weights[k] = saved + h;
      double plus = squared_error(probe, x, target);
      weights[k] = saved - h;
      double minus = squared_error(probe, x, target);
      weights[k] = saved;
      double numeric = (plus - minus) / (2 * h);
      double a = analytic[l][k];
      double diff = std::abs(a - numeric);
      if (diff == 0.0) continue;
      double scale = std::max({std::abs(a), std::abs(numeric), kGradientFloor});
      worst = std::max(worst, diff / scale);
    }
  }
  return worst;
}

// --- configs and samples ------------------------------------------------------

std::vector<std::size_t> parse_hidden(std::string_view spec) {
  std::vector<std::size_t> out;
  for (const auto& part : split(trim(spec), '-')) {
    long v = 0;
    try {
      v = parse_long(trim(part));
    } catch (const Error&) {
      throw Error(ErrorKind::Validation, "bad hidden layer spec '" + std::string(spec) + "'",
                  "hidden");
    }
    if (v < 1)
      throw Error(ErrorKind::Validation, "hidden layer sizes must be positive", "hidden");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string format_hidden(std::span<const std::size_t> hidden) {
  std::string out;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) out.push_back('-');
    out += std::to_string(hidden[i]);
  }
  return out;
}

double rank_target(int rank) {
  if (rank < 1 || rank > 5) throw Error(ErrorKind::Validation, "rank must be 1..5", "rank");
  return (5.0 - rank) / 4.0;
}

int rank_from_score(double y) {
  long r = std::lround(5.0 - 4.0 * y);
  return static_cast<int>(std::clamp(r, 1L, 5L));
}

std::vector<Sample> encode_survey(std::span<const SurveyRecord> records, const Catalog& catalog) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate(records[i], catalog);
      Sample s;
      s.x = input_vector(records[i].profile, records[i].course_keywords, catalog);
      s.rank = records[i].rank;
      s.target = rank_target(s.rank);
      out.push_back(s);
    } catch (const Error& e) {
      throw Error(ErrorKind::Encoding,
                  "survey record " + std::to_string(i + 1) + " cannot be encoded: " + e.what(),
                  e.field());
    }
  }
  return out;
}

MlpModel initial_model(const TrainConfig& cfg) {
  std::vector<std::size_t> sizes{kInputSize};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  return MlpModel::random(std::move(sizes), cfg.seed, cfg.init_range);
}

MlpModel train(std::span<const Sample> samples, const TrainConfig& cfg) {
  if (samples.empty()) throw Error(ErrorKind::Training, "training set is empty");
  if (cfg.epochs < 1) throw Error(ErrorKind::Validation, "epochs must be at least 1", "epochs");
  if (!(cfg.learning_rate >= 0.0))
    throw Error(ErrorKind::Validation, "learning rate must be non-negative", "learning_rate");
  if (cfg.hidden.empty())
    throw Error(ErrorKind::Validation, "at least one hidden layer is required", "hidden");

  std::vector<Sample> data(samples.begin(), samples.end());
  std::sort(data.begin(), data.end());

  MlpModel model = initial_model(cfg);
  // The shuffle stream is independent of the initialisation stream.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Workspace ws;
  auto& layers = model.layers();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t idx : order) {
      const Sample& s = data[idx];
      run_backward(model, s.x, s.target, ws);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        const auto& a = ws.activations[l];
        for (std::size_t j = 0; j < layer.outputs; ++j) {
          const double step = cfg.learning_rate * ws.deltas[l][j];
          double* row = &layer.weights[j * (layer.inputs + 1)];
          row[0] -= step;
          for (std::size_t k = 0; k < layer.inputs; ++k) row[k + 1] -= step * a[k];
        }
      }
    }
  }
  return model;
}

MlpModel train(std::span<const SurveyRecord> records, const TrainConfig& cfg,
               const Catalog& catalog) {
  auto samples = encode_survey(records, catalog);
  return train(samples, cfg);
}

RankedCourse predict_rank(const MlpModel& model, const UserProfile& profile, const Course& course,
                          const Catalog& catalog) {
  auto x = input_vector(profile, course.keywords, catalog);
  RankedCourse r;
  r.course_id = course.course_id;
  r.score = forward(model, x);
  r.predicted_rank = rank_from_score(r.score);
  return r;
}

EvalReport evaluate(const MlpModel& model, std::span<const Sample> test) {
  if (test.empty()) throw Error(ErrorKind::Validation, "test set is empty");
  double sse = 0.0;
  std::size_t hits = 0;
  for (const auto& s : test) {
    double y = forward(model, s.x);
    sse += (y - s.target) * (y - s.target);
    if (std::abs(rank_from_score(y) - s.rank) <= 1) ++hits;
  }
  EvalReport r;
  r.n_test = test.size();
  r.rms_error = std::sqrt(sse / static_cast<double>(test.size()));
  r.tolerance1_accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
  return r;
}

EvalReport evaluate(const MlpModel& model, std::span<const SurveyRecord> test,
                    const Catalog& catalog) {
  auto samples = encode_survey(test, catalog);
  return evaluate(model, samples);
}

std::vector<SweepResult> config_sweep(std::span<const SurveyRecord> train_set,
                                      std::span<const SurveyRecord> test_set,
                                      std::span<const TrainConfig> configs,
                                      const Catalog& catalog) {
  if (configs.size() < 2) throw Error(ErrorKind::Validation, "a sweep needs at least two configs");
  auto train_samples = encode_survey(train_set, catalog);
  auto test_samples = encode_survey(test_set, catalog);
  std::vector<SweepResult> out;
  for (const auto& cfg : configs) {
    auto model = train(train_samples, cfg);
    out.push_back({cfg, evaluate(model, test_samples)});
  }
  return out;
}

// --- checkpoint ---------------------------------------------------------------

namespace {
constexpr std::string_view kMlpMagic = "courserec-mlp 1";
}

std::string save_mlp_model(const MlpModel& model) {
  std::ostringstream out;
  out << kMlpMagic << '\n' << "layers";
  for (auto s : model.layer_sizes()) out << ' ' << s;
  out << '\n' << "activations tanh logistic\n";
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& layer = model.layers()[l];
    out << "layer " << l << ' ' << layer.outputs << ' ' << layer.inputs + 1 << '\n';
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      out << 'w';
      for (std::size_t c = 0; c <= layer.inputs; ++c) out << ' ' << format_double(layer.at(j, c));
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

MlpModel load_mlp_model(std::string_view text) {
  auto lines = split(text, '\n');
  std::size_t pos = 0;
  auto next = [&](std::string_view head) {
    while (pos < lines.size() && trim(lines[pos]).empty()) ++pos;
    if (pos >= lines.size())
      throw Error(ErrorKind::Format, "model file truncated, expected '" + std::string(head) + "'");
    auto f = split(trim(lines[pos]), ' ');
    ++pos;
    if (f[0] != head)
      throw Error(ErrorKind::Format, "model file line " + std::to_string(pos) + ": expected '" +
                                         std::string(head) + "'");
    return f;
  };
  if (lines.empty() || trim(lines[0]) != kMlpMagic)
    throw Error(ErrorKind::Format, "not a ranker model file");
  pos = 1;
  auto sizes_line = next("layers");
  std::vector<std::size_t> sizes;
  for (std::size_t i = 1; i < sizes_line.size(); ++i)
    sizes.push_back(static_cast<std::size_t>(parse_long(sizes_line[i])));
  auto act = next("activations");
  if (act.size() != 3 || act[1] != "tanh" || act[2] != "logistic")
    throw Error(ErrorKind::Format, "unsupported activations");
  MlpModel m(sizes);
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    auto& layer = m.layers()[l];
    auto head = next("layer");
    if (head.size() != 4 || parse_long(head[1]) != static_cast<long>(l) ||
        parse_long(head[2]) != static_cast<long>(layer.outputs) ||
        parse_long(head[3]) != static_cast<long>(layer.inputs + 1))
      throw Error(ErrorKind::Format, "layer " + std::to_string(l) + " header mismatch");
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      auto row = next("w");
      if (row.size() != layer.inputs + 2)
        throw Error(ErrorKind::Format, "layer " + std::to_string(l) + " row width mismatch");
      for (std::size_t c = 0; c <= layer.inputs; ++c) {
        double v = parse_double(row[c + 1]);
        if (!std::isfinite(v)) throw Error(ErrorKind::Format, "non-finite weight");
        layer.at(j, c) = v;
      }
    }
  }
  next("end");
  return m;
}

MlpModel load_mlp_model_file(const std::filesystem::path& path) {
  return load_mlp_model(read_file(path));
}

}  // namespace courserec
