#include "fairx/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fairx {

// ---------------------------------------------------------------------------
// MabInstance
// ---------------------------------------------------------------------------

MabInstance::MabInstance(std::vector<double> means, RewardNoise noise)
    : means_(std::move(means)), noise_(noise) {
  if (means_.empty()) throw std::invalid_argument("MabInstance: no arms");
  const auto [mn, mx] = std::minmax_element(means_.begin(), means_.end());
  switch (noise_.kind) {
    case RewardNoise::Kind::Bernoulli:
      if (*mn < 0.0 || *mx > 1.0)
        throw std::invalid_argument("MabInstance: Bernoulli means must lie in [0,1]");
      reward_range_ = {0.0, 1.0};
      break;
    case RewardNoise::Kind::Gaussian:
      if (!(noise_.sigma > 0.0))
        throw std::invalid_argument("MabInstance: Gaussian sigma must be > 0");
      reward_range_ = {*mn - 3.0 * noise_.sigma, *mx + 3.0 * noise_.sigma};
      break;
    case RewardNoise::Kind::BoundedUniform:
      if (!(noise_.halfwidth >= 0.0))
        throw std::invalid_argument("MabInstance: uniform halfwidth must be >= 0");
      reward_range_ = {*mn - noise_.halfwidth, *mx + noise_.halfwidth};
      break;
  }
}

double MabInstance::pull(int arm, Rng& rng) const {
  if (arm < 0 || arm >= num_arms()) throw std::out_of_range("MabInstance: arm out of range");
  const double mean = means_[arm];
  switch (noise_.kind) {
    case RewardNoise::Kind::Bernoulli:
      return draw_uniform(rng) < mean ? 1.0 : 0.0;
    case RewardNoise::Kind::Gaussian:
      return mean + noise_.sigma * draw_normal(rng);
    case RewardNoise::Kind::BoundedUniform:
      return mean + noise_.halfwidth * (2.0 * draw_uniform(rng) - 1.0);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// MultilabelDataset
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace

MultilabelDataset MultilabelDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return parse(in, path);
}

MultilabelDataset MultilabelDataset::parse(std::istream& in, const std::string& origin) {
  struct Row {
    std::vector<int> labels;
    std::vector<std::pair<int, double>> feats;
  };
  std::vector<Row> rows;
  int min_label = std::numeric_limits<int>::max(), max_label = -1;
  int min_feat = std::numeric_limits<int>::max(), max_feat = -1;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    Row row;
    bool first = true;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (first && colon == std::string::npos) {
        // comma-separated label list
        std::stringstream ss(tok);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
          if (piece.empty()) continue;
          try {
            const int lab = std::stoi(piece);
            row.labels.push_back(lab);
            min_label = std::min(min_label, lab);
            max_label = std::max(max_label, lab);
          } catch (const std::exception&) {
            parse_fail(origin, lineno, "bad label '" + piece + "'");
          }
        }
        first = false;
        continue;
      }
      first = false;
      if (colon == std::string::npos) parse_fail(origin, lineno, "expected feature idx:val, got '" + tok + "'");
      try {
        const int idx = std::stoi(tok.substr(0, colon));
        const double val = std::stod(tok.substr(colon + 1));
        row.feats.emplace_back(idx, val);
        min_feat = std::min(min_feat, idx);
        max_feat = std::max(max_feat, idx);
      } catch (const std::exception&) {
        parse_fail(origin, lineno, "bad feature token '" + tok + "'");
      }
    }
    if (!row.labels.empty() || !row.feats.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(origin + ": empty dataset");
  if (max_label < 0) throw std::runtime_error(origin + ": no labels anywhere in dataset");
  if (max_feat < 0) throw std::runtime_error(origin + ": no features anywhere in dataset");

  const int label_base = min_label;
  const int feat_base = min_feat;
  const int num_arms = max_label - label_base + 1;
  const int num_feats = max_feat - feat_base + 1;

  MultilabelDataset ds;
  ds.features = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), num_feats);
  ds.labels = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), num_arms);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int lab : rows[i].labels) ds.labels(static_cast<int>(i), lab - label_base) = 1.0;
    for (const auto& [idx, val] : rows[i].feats)
      ds.features(static_cast<int>(i), idx - feat_base) = val;
  }
  return ds;
}

std::vector<double> MultilabelDataset::label_means() const {
  std::vector<double> out(num_arms());
  for (int a = 0; a < num_arms(); ++a) out[a] = labels.col(a).mean();
  return out;
}

MultilabelDataset MultilabelDataset::subset(const std::vector<int>& rows) const {
  if (rows.empty()) throw std::invalid_argument("subset: empty row selection");
  MultilabelDataset out;
  out.features = Eigen::MatrixXd(static_cast<int>(rows.size()), num_features());
  out.labels = Eigen::MatrixXd(static_cast<int>(rows.size()), num_arms());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<int>(i)) = features.row(rows[i]);
    out.labels.row(static_cast<int>(i)) = labels.row(rows[i]);
  }
  return out;
}

DatasetMabEnv::DatasetMabEnv(std::shared_ptr<const MultilabelDataset> data,
                             std::vector<int> rows)
    : data_(std::move(data)), rows_(std::move(rows)) {
  if (!data_ || data_->num_rows() == 0) throw std::invalid_argument("DatasetMabEnv: empty data");
  for (int r : rows_)
    if (r < 0 || r >= data_->num_rows())
      throw std::out_of_range("DatasetMabEnv: row index out of range");
}

std::optional<Eigen::MatrixXd> DatasetMabEnv::begin_round(Rng& rng) {
  if (rows_.empty())
    current_row_ = static_cast<int>(rng() % static_cast<std::uint64_t>(data_->num_rows()));
  else
    current_row_ = rows_[rng() % rows_.size()];
  return std::nullopt;
}

double DatasetMabEnv::pull(int arm, Rng&) {
  if (current_row_ < 0) throw std::logic_error("DatasetMabEnv: pull before begin_round");
  if (arm < 0 || arm >= num_arms()) throw std::out_of_range("DatasetMabEnv: arm out of range");
  return data_->labels(current_row_, arm);
}

std::unique_ptr<BanditEnv> DatasetMabEnv::clone() const {
  return std::make_unique<DatasetMabEnv>(*this);
}

// ---------------------------------------------------------------------------
// random Fourier features
// ---------------------------------------------------------------------------

RandomFourierFeatures RandomFourierFeatures::draw(int feature_dim, int raw_dim, double sigma,
                                                  Rng& rng) {
  if (feature_dim < 1 || raw_dim < 1)
    throw std::invalid_argument("RandomFourierFeatures: bad dimensions");
  if (!(sigma > 0.0)) throw std::invalid_argument("RandomFourierFeatures: sigma must be > 0");
  RandomFourierFeatures f;
  f.sigma = sigma;
  f.omega = Eigen::MatrixXd(feature_dim, raw_dim);
  const double scale = 1.0 / sigma;
  for (int i = 0; i < feature_dim; ++i)
    for (int j = 0; j < raw_dim; ++j) f.omega(i, j) = scale * draw_normal(rng);
  f.phase = Eigen::VectorXd(feature_dim);
  for (int i = 0; i < feature_dim; ++i)
    f.phase(i) = 2.0 * std::numbers::pi * draw_uniform(rng);
  return f;
}

Eigen::VectorXd RandomFourierFeatures::transform(const Eigen::VectorXd& raw) const {
  if (raw.size() != omega.cols())
    throw std::invalid_argument("RandomFourierFeatures: raw dimension mismatch");
  Eigen::VectorXd z = omega * raw + phase;
  const double amp = std::sqrt(2.0 / static_cast<double>(feature_dim()));
  return amp * z.array().cos();
}

double median_raw_distance(const MultilabelDataset& data, int num_samples, Rng& rng) {
  const int n = data.num_rows();
  const int k = data.num_arms();
  const int m = std::min<long>(num_samples, static_cast<long>(n) * k);
  if (m < 2) throw std::invalid_argument("median_raw_distance: need at least two samples");

  std::vector<int> rows(m), arms(m);
  for (int i = 0; i < m; ++i) {
    rows[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    arms[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  }
  std::vector<double> norms2(m);
  for (int i = 0; i < m; ++i) norms2[i] = data.features.row(rows[i]).squaredNorm();

  // raw vectors are feature blocks at the arm's slot, so the distance is
  // ||f_i - f_j|| when arms agree and sqrt(||f_i||^2 + ||f_j||^2) otherwise
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double d2;
      if (arms[i] == arms[j])
        d2 = (data.features.row(rows[i]) - data.features.row(rows[j])).squaredNorm();
      else
        d2 = norms2[i] + norms2[j];
      dists.push_back(std::sqrt(d2));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  return dists[mid];
}

// ---------------------------------------------------------------------------
// RffContextModel
// ---------------------------------------------------------------------------

namespace {
// One context cache is allowed up to ~256 MiB.
constexpr std::size_t kMaxCachedDoubles = 32u * 1024u * 1024u;
}  // namespace

RffContextModel::RffContextModel(std::shared_ptr<const MultilabelDataset> data, int rff_dim,
                                 double rff_sigma, Rng& rng)
    : data_(std::move(data)), rff_dim_(rff_dim) {
  if (!data_ || data_->num_rows() == 0) throw std::invalid_argument("RffContextModel: empty data");
  if (rff_dim < 1) throw std::invalid_argument("RffContextModel: rff_dim must be >= 1");
  const int f = data_->num_features();
  const int k = data_->num_arms();
  double sigma = rff_sigma;
  if (!(sigma > 0.0)) sigma = median_raw_distance(*data_, 500, rng);
  if (!(sigma > 0.0)) sigma = 1.0;  // all-identical rows
  rff_ = RandomFourierFeatures::draw(rff_dim, f * k, sigma, rng);

  double max_norm = 0.0;
  const std::size_t total =
      static_cast<std::size_t>(data_->num_rows()) * static_cast<std::size_t>(k) *
      static_cast<std::size_t>(rff_dim);
  const bool cache = total <= kMaxCachedDoubles;
  if (cache) cache_.reserve(data_->num_rows());
  for (int r = 0; r < data_->num_rows(); ++r) {
    Eigen::MatrixXd ctx = raw_contexts_for_row(r);
    for (int a = 0; a < k; ++a) max_norm = std::max(max_norm, ctx.row(a).norm());
    if (cache) cache_.push_back(std::move(ctx));
  }
  norm_scale_ = max_norm > 0.0 ? 1.0 / max_norm : 1.0;
  for (auto& ctx : cache_) ctx *= norm_scale_;
}

Eigen::MatrixXd RffContextModel::raw_contexts_for_row(int row) const {
  const int k = data_->num_arms();
  const int f = data_->num_features();
  const double amp = std::sqrt(2.0 / static_cast<double>(rff_dim_));
  Eigen::MatrixXd out(k, rff_dim_);
  const Eigen::VectorXd feat = data_->features.row(row).transpose();
  for (int a = 0; a < k; ++a) {
    // flatten(outer(feat, onehot(a))) places feat_i at raw index i*k + a
    Eigen::VectorXd z = rff_.phase;
    for (int i = 0; i < f; ++i)
      if (feat(i) != 0.0) z.noalias() += feat(i) * rff_.omega.col(i * k + a);
    out.row(a) = (amp * z.array().cos()).transpose();
  }
  return out;
}

Eigen::MatrixXd RffContextModel::contexts_for_row(int row) const {
  if (row < 0 || row >= data_->num_rows())
    throw std::out_of_range("RffContextModel: row out of range");
  if (!cache_.empty()) return cache_[row];
  return norm_scale_ * raw_contexts_for_row(row);
}

Eigen::VectorXd RffContextModel::least_squares_fit(const std::vector<int>& rows,
                                                   double ridge) const {
  const int d = rff_dim_;
  Eigen::MatrixXd gram = ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  auto accumulate = [&](int r) {
    const Eigen::MatrixXd ctx = contexts_for_row(r);
    gram.noalias() += ctx.transpose() * ctx;
    rhs.noalias() += ctx.transpose() * data_->labels.row(r).transpose();
  };
  if (rows.empty())
    for (int r = 0; r < data_->num_rows(); ++r) accumulate(r);
  else
    for (int r : rows) accumulate(r);
  return gram.ldlt().solve(rhs);
}

// ---------------------------------------------------------------------------
// DatasetLinearEnv
// ---------------------------------------------------------------------------

DatasetLinearEnv::DatasetLinearEnv(std::shared_ptr<const RffContextModel> model,
                                   std::vector<int> rows, RewardModel reward_model,
                                   double wellspec_noise_sigma)
    : model_(std::move(model)),
      rows_(std::move(rows)),
      reward_model_(reward_model),
      noise_sigma_(wellspec_noise_sigma) {
  if (!model_) throw std::invalid_argument("DatasetLinearEnv: null model");
  for (int r : rows_)
    if (r < 0 || r >= model_->data().num_rows())
      throw std::out_of_range("DatasetLinearEnv: row index out of range");
  // the well-specified reward model comes from the full-information fit
  if (reward_model_ == RewardModel::WellSpecified) theta_ls_ = model_->least_squares_fit();
}

std::optional<Eigen::MatrixXd> DatasetLinearEnv::begin_round(Rng& rng) {
  if (rows_.empty())
    current_row_ =
        static_cast<int>(rng() % static_cast<std::uint64_t>(model_->data().num_rows()));
  else
    current_row_ = rows_[rng() % rows_.size()];
  current_contexts_ = model_->contexts_for_row(current_row_);
  return current_contexts_;
}

double DatasetLinearEnv::pull(int arm, Rng& rng) {
  if (current_row_ < 0) throw std::logic_error("DatasetLinearEnv: pull before begin_round");
  if (arm < 0 || arm >= num_arms()) throw std::out_of_range("DatasetLinearEnv: arm out of range");
  if (reward_model_ == RewardModel::LabelBits) return model_->data().labels(current_row_, arm);
  return theta_ls_.dot(current_contexts_.row(arm)) + noise_sigma_ * draw_normal(rng);
}

std::unique_ptr<BanditEnv> DatasetLinearEnv::clone() const {
  return std::make_unique<DatasetLinearEnv>(*this);
}

// ---------------------------------------------------------------------------
// SyntheticLinearEnv
// ---------------------------------------------------------------------------

SyntheticLinearEnv::SyntheticLinearEnv(Eigen::VectorXd theta_star, int num_arms,
                                       double noise_sigma)
    : theta_star_(std::move(theta_star)), num_arms_(num_arms), noise_sigma_(noise_sigma) {
  if (theta_star_.size() == 0) throw std::invalid_argument("SyntheticLinearEnv: empty theta");
  if (num_arms_ < 1) throw std::invalid_argument("SyntheticLinearEnv: need at least one arm");
  if (!(noise_sigma_ >= 0.0)) throw std::invalid_argument("SyntheticLinearEnv: bad noise sigma");
  const double n = theta_star_.norm();
  if (n > 1.0) theta_star_ /= n;  // the model assumes ||theta*|| <= 1
}

std::optional<Eigen::MatrixXd> SyntheticLinearEnv::begin_round(Rng& rng) {
  const int d = dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  current_contexts_ = Eigen::MatrixXd(num_arms_, d);
  for (int a = 0; a < num_arms_; ++a) {
    for (int j = 0; j < d; ++j) current_contexts_(a, j) = scale * draw_normal(rng);
    const double n = current_contexts_.row(a).norm();
    if (n > 1.0) current_contexts_.row(a) /= n;
  }
  return current_contexts_;
}

double SyntheticLinearEnv::pull(int arm, Rng& rng) {
  if (current_contexts_.rows() == 0)
    throw std::logic_error("SyntheticLinearEnv: pull before begin_round");
  if (arm < 0 || arm >= num_arms_)
    throw std::out_of_range("SyntheticLinearEnv: arm out of range");
  return theta_star_.dot(current_contexts_.row(arm)) + noise_sigma_ * draw_normal(rng);
}

std::unique_ptr<BanditEnv> SyntheticLinearEnv::clone() const {
  return std::make_unique<SyntheticLinearEnv>(*this);
}

// ---------------------------------------------------------------------------
// ReplayLog
// ---------------------------------------------------------------------------

ReplayLog ReplayLog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay log: " + path);
  return parse(in, path);
}

ReplayLog ReplayLog::parse(std::istream& in, const std::string& origin) {
  ReplayLog log;
  std::string line;
  int lineno = 0;

  // header: K d uniform
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    int uniform = -1;
    if (!(hs >> log.num_arms >> log.dim >> uniform))
      parse_fail(origin, lineno, "header must be 'K d uniform'");
    std::string extra;
    if (hs >> extra) parse_fail(origin, lineno, "header must be 'K d uniform'");
    if (log.num_arms < 1) parse_fail(origin, lineno, "header K must be >= 1");
    if (log.dim < 0) parse_fail(origin, lineno, "header d must be >= 0");
    if (uniform != 0 && uniform != 1) parse_fail(origin, lineno, "uniform flag must be 0 or 1");
    log.uniform_logging = uniform == 1;
    break;
  }
  if (log.num_arms == 0) throw std::runtime_error(origin + ": missing header line");

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream es(line);
    ReplayEvent ev;
    int k = 0, d = 0;
    if (!(es >> ev.timestamp >> ev.logged_arm >> ev.reward >> k >> d))
      parse_fail(origin, lineno, "event must start with 'timestamp arm reward k d'");
    if (k != log.num_arms)
      parse_fail(origin, lineno, "event k=" + std::to_string(k) + " disagrees with header K=" +
                                     std::to_string(log.num_arms));
    if (d != log.dim)
      parse_fail(origin, lineno, "event d=" + std::to_string(d) + " disagrees with header d=" +
                                     std::to_string(log.dim));
    if (ev.logged_arm < 0 || ev.logged_arm >= log.num_arms)
      parse_fail(origin, lineno,
                 "logged arm " + std::to_string(ev.logged_arm) + " out of range for header K=" +
                     std::to_string(log.num_arms));
    if (!std::isfinite(ev.reward)) parse_fail(origin, lineno, "non-finite reward");
    if (d > 0) {
      Eigen::MatrixXd ctx(k, d);
      for (int a = 0; a < k; ++a)
        for (int j = 0; j < d; ++j) {
          double v;
          if (!(es >> v)) parse_fail(origin, lineno, "expected k*d context values");
          ctx(a, j) = v;
        }
      ev.contexts = std::move(ctx);
    }
    std::string extra;
    if (es >> extra) parse_fail(origin, lineno, "trailing tokens after event");
    log.events.push_back(std::move(ev));
  }
  return log;
}

void ReplayLog::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write replay log: " + path);
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << num_arms << " " << dim << " " << (uniform_logging ? 1 : 0) << "\n";
  for (const auto& ev : events) {
    out << fmt(ev.timestamp) << "\t" << ev.logged_arm << "\t" << fmt(ev.reward) << "\t"
        << num_arms << "\t" << dim;
    if (ev.contexts) {
      for (int a = 0; a < num_arms; ++a)
        for (int j = 0; j < dim; ++j) out << "\t" << fmt((*ev.contexts)(a, j));
    }
    out << "\n";
  }
}

ReplayStepResult replay_step(const ReplayLog& log, std::size_t cursor, const Policy& pi,
                             Rng& rng) {
  if (cursor >= log.events.size()) throw std::out_of_range("replay_step: log exhausted");
  if (pi.num_arms() != log.num_arms)
    throw std::invalid_argument("replay_step: policy arm count mismatch");
  ReplayStepResult res;
  res.sampled_arm = pi.sample(rng);
  const ReplayEvent& ev = log.events[cursor];
  if (res.sampled_arm == ev.logged_arm) {
    res.matched = true;
    res.reward = ev.reward;
  }
  return res;
}

// ---------------------------------------------------------------------------
// lower-bound fixtures
// ---------------------------------------------------------------------------

std::vector<LowerBoundFixture> lowerbound_fixtures(long horizon) {
  if (horizon < 1) throw std::invalid_argument("lowerbound_fixtures: horizon must be >= 1");
  const double theta = 1.0 / std::sqrt(static_cast<double>(horizon));
  const double lip = std::sqrt(static_cast<double>(horizon));
  const RewardNoise noise = RewardNoise::gaussian(std::sqrt(0.5));

  std::vector<LowerBoundFixture> out;
  // Pair A: identity merit whose minimum merit shrinks with the horizon.
  const MeritFunction ident = MeritFunction::identity({theta, 2.0 * theta});
  {
    MabInstance inst({theta, 2.0 * theta}, noise);
    Policy pi = fair_policy(ident, inst.means());
    out.push_back({"min-merit-a", std::move(inst), ident, std::move(pi)});
  }
  {
    MabInstance inst({2.0 * theta, 2.0 * theta}, noise);
    Policy pi = fair_policy(ident, inst.means());
    out.push_back({"min-merit-b", std::move(inst), ident, std::move(pi)});
  }
  // Pair B: piecewise-linear merit whose slope grows with the horizon.
  const MeritFunction pwl = MeritFunction::piecewise_linear(lip, {-1.0, 1.0});
  {
    MabInstance inst({theta, 0.0}, noise);
    Policy pi = fair_policy(pwl, inst.means());
    out.push_back({"steep-slope-a", std::move(inst), pwl, std::move(pi)});
  }
  {
    MabInstance inst({0.0, 0.0}, noise);
    Policy pi = fair_policy(pwl, inst.means());
    out.push_back({"steep-slope-b", std::move(inst), pwl, std::move(pi)});
  }
  return out;
}

}  // namespace fairx
