#include "gsda/victim.hpp"

#include "gsda/ingestion.hpp"
#include "gsda/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gsda {
namespace {

constexpr double kMaxTilt = 0.35;  // radians


struct ForwardCache {
  Mat z1, h1, z2;          // n x h
  Vec pooled;              // h
  std::vector<int> arg;    // argmax point per channel
  Vec logits;
};

ForwardCache run_forward(const ToyClassifier& m, const Points& p) {
  ForwardCache c;
  c.z1 = (p * m.w1.transpose()).rowwise() + m.b1.transpose();
  c.h1 = c.z1.cwiseMax(0.0);
  c.z2 = (c.h1 * m.w2.transpose()).rowwise() + m.b2.transpose();
  const auto h = m.hidden();
  c.pooled.resize(h);
  c.arg.resize(h);
  for (int ch = 0; ch < h; ++ch) {
    // relu then max; strict '>' keeps the lowest index on ties.
    double best = std::max(c.z2(0, ch), 0.0);
    int arg = 0;
    for (Eigen::Index i = 1; i < c.z2.rows(); ++i) {
      const double v = std::max(c.z2(i, ch), 0.0);
      if (v > best) {
        best = v;
        arg = static_cast<int>(i);
      }
    }
    c.pooled(ch) = best;
    c.arg[ch] = arg;
  }
  c.logits = m.w3 * c.pooled + m.b3;
  return c;
}

// Gradient of the pre-pool activations restricted to the argmax rows.
struct SparseRows {
  std::vector<int> rows;  // distinct point indices
  Mat dz2;                // rows.size() x h
};

SparseRows pool_backward(const ForwardCache& c, const Vec& dpooled) {
  SparseRows s;
  std::vector<int> slot(c.z2.rows(), -1);
  for (int a : c.arg)
    if (slot[a] < 0) {
      slot[a] = static_cast<int>(s.rows.size());
      s.rows.push_back(a);
    }
  s.dz2 = Mat::Zero(static_cast<Eigen::Index>(s.rows.size()), c.z2.cols());
  for (Eigen::Index ch = 0; ch < c.z2.cols(); ++ch) {
    const int a = c.arg[ch];
    if (c.z2(a, ch) > 0.0) s.dz2(slot[a], ch) += dpooled(ch);
  }
  return s;
}

double log_sum_exp(const Vec& v) {
  const double mx = v.maxCoeff();
  return mx + std::log((v.array() - mx).exp().sum());
}

std::vector<double> to_vector(const Mat& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Mat from_vector(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  const auto v = j.at(name).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw std::runtime_error(std::string("checkpoint field '") + name + "' has the wrong size");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = v[i * cols + c];
  return m;
}

}  // namespace

ToyClassifier ToyClassifier::zeros(int hidden, int classes) {
  if (hidden < 1 || classes < 2) throw std::invalid_argument("classifier needs hidden >= 1 and classes >= 2");
  return {Mat::Zero(hidden, 3), Vec::Zero(hidden), Mat::Zero(hidden, hidden),
          Vec::Zero(hidden),    Mat::Zero(classes, hidden), Vec::Zero(classes)};
}

ToyClassifier ToyClassifier::random(int hidden, int classes, std::uint64_t seed) {
  ToyClassifier m = zeros(hidden, classes);
  auto rng = SeedTree(seed).child("init").engine();
  auto fill = [&](Mat& w) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(w.cols())));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  };
  fill(m.w1);
  fill(m.w2);
  fill(m.w3);
  return m;
}

Vec forward(const ToyClassifier& model, const Points& points) { return run_forward(model, points).logits; }

int predict(const ToyClassifier& model, const Points& points) {
  Eigen::Index arg = 0;
  forward(model, points).maxCoeff(&arg);
  return static_cast<int>(arg);
}

Vec log_softmax(const Vec& logits) { return logits.array() - log_sum_exp(logits); }

Vec softmax(const Vec& logits) { return log_softmax(logits).array().exp(); }

LossGrad loss_grad_points(const ToyClassifier& model, const Points& points, const ClassLoss& loss) {
  if (loss.label < 0 || loss.label >= model.classes()) throw std::invalid_argument("class label out of range");
  const auto c = run_forward(model, points);
  const Vec logp = log_softmax(c.logits);
  const Vec p = logp.array().exp();

  LossGrad out;
  out.logits = c.logits;
  Vec dlogits = p;
  if (loss.targeted) {
    out.loss = -logp(loss.label);
    dlogits(loss.label) -= 1.0;
  } else {
    out.loss = logp(loss.label);
    dlogits = -dlogits;
    dlogits(loss.label) += 1.0;
  }

  const Vec dpooled = model.w3.transpose() * dlogits;
  const SparseRows s = pool_backward(c, dpooled);
  Mat dz1 = s.dz2 * model.w2;
  for (Eigen::Index r = 0; r < dz1.rows(); ++r)
    for (Eigen::Index ch = 0; ch < dz1.cols(); ++ch)
      if (!(c.z1(s.rows[r], ch) > 0.0)) dz1(r, ch) = 0.0;
  const Mat dp = dz1 * model.w1;  // rows x 3

  out.grad = Points::Zero(points.rows(), 3);
  for (std::size_t r = 0; r < s.rows.size(); ++r) out.grad.row(s.rows[r]) = dp.row(static_cast<Eigen::Index>(r));
  return out;
}

// ---------------------------------------------------------------------------

std::string_view shape_name(ShapeClass s) {
  switch (s) {
    case ShapeClass::sphere: return "sphere";
    case ShapeClass::cube: return "cube";
    case ShapeClass::cylinder: return "cylinder";
    case ShapeClass::torus: return "torus";
    case ShapeClass::cone: return "cone";
    case ShapeClass::plane: return "plane";
  }
  return "unknown";
}

Points sample_shape(ShapeClass shape, Eigen::Index n, std::mt19937_64& rng, double jitter) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  Points p(n, 3);

  switch (shape) {
    case ShapeClass::sphere:
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::RowVector3d v(normal(rng), normal(rng), normal(rng));
        p.row(i) = v.normalized();
      }
      break;
    case ShapeClass::cube:
      for (Eigen::Index i = 0; i < n; ++i) {
        const int face = std::min(5, static_cast<int>(unit(rng) * 6.0));
        const double a = 2.0 * unit(rng) - 1.0, b = 2.0 * unit(rng) - 1.0;
        const double s = (face & 1) ? 1.0 : -1.0;
        const int axis = face / 2;
        Eigen::RowVector3d v;
        v(axis) = s;
        v((axis + 1) % 3) = a;
        v((axis + 2) % 3) = b;
        p.row(i) = v;
      }
      break;
    case ShapeClass::cylinder: {
      const double height = 1.0 + unit(rng);  // full height, radius 1
      const double side = two_pi * height, caps = 2.0 * std::numbers::pi;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = two_pi * unit(rng);
        if (unit(rng) * (side + caps) < side) {
          p.row(i) << std::cos(t), std::sin(t), height * (unit(rng) - 0.5);
        } else {
          const double r = std::sqrt(unit(rng));
          p.row(i) << r * std::cos(t), r * std::sin(t), (unit(rng) < 0.5 ? -0.5 : 0.5) * height;
        }
      }
      break;
    }
    case ShapeClass::torus: {
      const double tube = 0.25 + 0.2 * unit(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        double theta, phi;
        do {  // area element is proportional to (1 + tube cos theta)
          theta = two_pi * unit(rng);
          phi = two_pi * unit(rng);
        } while (unit(rng) * (1.0 + tube) > 1.0 + tube * std::cos(theta));
        const double ring = 1.0 + tube * std::cos(theta);
        p.row(i) << ring * std::cos(phi), ring * std::sin(phi), tube * std::sin(theta);
      }
      break;
    }
    case ShapeClass::cone: {
      const double height = 1.0 + unit(rng);
      const double lateral = std::numbers::pi * std::hypot(1.0, height), base = std::numbers::pi;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = two_pi * unit(rng);
        const double r = std::sqrt(unit(rng));
        if (unit(rng) * (lateral + base) < lateral) {
          p.row(i) << r * std::cos(t), r * std::sin(t), height * (1.0 - r);
        } else {
          p.row(i) << r * std::cos(t), r * std::sin(t), 0.0;
        }
      }
      break;
    }
    case ShapeClass::plane: {
      const double aspect = 0.5 + 0.5 * unit(rng);
      for (Eigen::Index i = 0; i < n; ++i) p.row(i) << 2.0 * unit(rng) - 1.0, aspect * (2.0 * unit(rng) - 1.0), 0.0;
      break;
    }
  }
  if (jitter > 0.0) {
    std::normal_distribution<double> noise(0.0, jitter);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) p(i, c) += noise(rng);
  }
  return p;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Matrix3d random_orientation(std::mt19937_64& rng, double max_tilt) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double yaw = 2.0 * std::numbers::pi * unit(rng);
  const double tilt = max_tilt * unit(rng);
  const double tilt_axis = 2.0 * std::numbers::pi * unit(rng);
  const Eigen::Vector3d axis(std::cos(tilt_axis), std::sin(tilt_axis), 0.0);
  return (Eigen::AngleAxisd(tilt, axis) * Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())).toRotationMatrix();
}

Dataset gen_synthetic(int per_class, Eigen::Index n, std::uint64_t seed, double jitter) {
  if (per_class < 0) throw std::invalid_argument("per_class must be non-negative");
  if (jitter < 0.0 || jitter > 0.01) throw std::invalid_argument("jitter must lie in [0, 0.01]");
  const SeedTree root = SeedTree(seed).child("synthetic");
  Dataset out;
  out.reserve(static_cast<std::size_t>(per_class) * kShapeClassCount);
  for (int s = 0; s < per_class * kShapeClassCount; ++s) {
    auto rng = root.child(static_cast<std::uint64_t>(s)).engine();
    const int label = s % kShapeClassCount;
    Points p = sample_shape(static_cast<ShapeClass>(label), n, rng, jitter);
    const Eigen::Matrix3d rot = random_orientation(rng, kMaxTilt);
    const double scale = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    p = (scale * (p * rot.transpose())).eval();
    out.push_back({normalize_unit_ball(p), label});
  }
  return out;
}

// ---------------------------------------------------------------------------

double accuracy(const ToyClassifier& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  int correct = 0;
  for (const auto& s : data) correct += predict(model, s.points) == s.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void train_epochs(ToyClassifier& model, const Dataset& train_set, const TrainConfig& cfg, TrainReport* report) {
  if (train_set.empty()) return;
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  auto rng = SeedTree(cfg.seed).child("shuffle").engine();
  ToyClassifier velocity = ToyClassifier::zeros(model.hidden(), model.classes());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      ToyClassifier grad = ToyClassifier::zeros(model.hidden(), model.classes());
      for (std::size_t b = start; b < stop; ++b) {
        const auto& sample = train_set[order[b]];
        if (sample.label < 0 || sample.label >= model.classes()) throw std::invalid_argument("training label out of range");
        const auto c = run_forward(model, sample.points);
        const Vec logp = log_softmax(c.logits);
        epoch_loss -= logp(sample.label);
        Vec dlogits = logp.array().exp();
        dlogits(sample.label) -= 1.0;

        grad.w3 += dlogits * c.pooled.transpose();
        grad.b3 += dlogits;
        const Vec dpooled = model.w3.transpose() * dlogits;
        const SparseRows s = pool_backward(c, dpooled);
        Mat h1_rows(static_cast<Eigen::Index>(s.rows.size()), model.hidden());
        Mat z1_rows(h1_rows.rows(), model.hidden());
        Points p_rows(h1_rows.rows(), 3);
        for (std::size_t r = 0; r < s.rows.size(); ++r) {
          h1_rows.row(r) = c.h1.row(s.rows[r]);
          z1_rows.row(r) = c.z1.row(s.rows[r]);
          p_rows.row(r) = sample.points.row(s.rows[r]);
        }
        grad.w2 += s.dz2.transpose() * h1_rows;
        grad.b2 += s.dz2.colwise().sum().transpose();
        Mat dz1 = s.dz2 * model.w2;
        dz1 = (z1_rows.array() > 0.0).select(dz1, 0.0);
        grad.w1 += dz1.transpose() * p_rows;
        grad.b1 += dz1.colwise().sum().transpose();
      }
      const double scale = cfg.lr / static_cast<double>(stop - start);
      auto step = [&](Mat& w, Mat& v, const Mat& g) {
        v = cfg.momentum * v - scale * g;
        w += v;
      };
      auto step_v = [&](Vec& w, Vec& v, const Vec& g) {
        v = cfg.momentum * v - scale * g;
        w += v;
      };
      step(model.w1, velocity.w1, grad.w1);
      step_v(model.b1, velocity.b1, grad.b1);
      step(model.w2, velocity.w2, grad.w2);
      step_v(model.b2, velocity.b2, grad.b2);
      step(model.w3, velocity.w3, grad.w3);
      step_v(model.b3, velocity.b3, grad.b3);
    }
    if (report) report->epoch_loss.push_back(epoch_loss / static_cast<double>(train_set.size()));
  }
}

ToyClassifier train(const Dataset& train_set, const Dataset& holdout, const TrainConfig& cfg, TrainReport* report) {
  ToyClassifier model = ToyClassifier::random(cfg.hidden, kShapeClassCount, cfg.seed);
  train_epochs(model, train_set, cfg, report);
  if (report) {
    report->train_accuracy = accuracy(model, train_set);
    report->holdout_accuracy = accuracy(model, holdout);
  }
  return model;
}

// ---------------------------------------------------------------------------

std::string save_model_json(const ToyClassifier& m) {
  nlohmann::json j;
  j["format"] = "gsda-toy-classifier";
  j["version"] = 1;
  j["hidden"] = m.hidden();
  j["classes"] = m.classes();
  j["w1"] = to_vector(m.w1);
  j["b1"] = to_vector(m.b1);
  j["w2"] = to_vector(m.w2);
  j["b2"] = to_vector(m.b2);
  j["w3"] = to_vector(m.w3);
  j["b3"] = to_vector(m.b3);
  return j.dump();
}

ToyClassifier load_model_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "gsda-toy-classifier") throw std::runtime_error("not a toy classifier checkpoint");
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported checkpoint version");
  const int h = j.at("hidden").get<int>();
  const int c = j.at("classes").get<int>();
  ToyClassifier m = ToyClassifier::zeros(h, c);
  m.w1 = from_vector(j, h, 3, "w1");
  m.b1 = from_vector(j, h, 1, "b1");
  m.w2 = from_vector(j, h, h, "w2");
  m.b2 = from_vector(j, h, 1, "b2");
  m.w3 = from_vector(j, c, h, "w3");
  m.b3 = from_vector(j, c, 1, "b3");
  return m;
}

void save_model(const std::filesystem::path& path, const ToyClassifier& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << save_model_json(model) << '\n';
}

ToyClassifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_json(ss.str());
}

}  // namespace gsda
