#include "heurgen/calibration/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <regex>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"
#include "heurgen/core/structure.hpp"

namespace heurgen::calibration {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ParsedRanges parse_ranges(std::string_view completion, const core::StructureCode& structure) {
  std::string code = text::first_fenced_block(completion).value_or(std::string(completion));
  static const std::regex head(R"(pms_dict\s*(?::[^=\n]*)?=\s*(?:dict\s*\(\s*)?\{)");
  std::smatch m;
  if (!std::regex_search(code, m, head)) throw Error(ErrorCode::kNoDictFound, "no `pms_dict = {...}` in the completion");
  std::size_t open = static_cast<std::size_t>(m.position(0) + m.length(0)) - 1;
  int depth = 0;
  std::size_t close = open;
  for (; close < code.size(); ++close) {
    if (code[close] == '{') ++depth;
    if (code[close] == '}' && --depth == 0) break;
  }
  const std::string body = code.substr(open + 1, close - open - 1);

  static const std::string num = R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";
  static const std::regex item(R"((["'])(\w+)\1\s*:\s*[\(\[]\s*()" + num + R"()\s*,\s*()" + num + R"()\s*,?\s*[\)\]])");
  ParsedRanges out;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), item); it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[2];
    double lo = std::stod((*it)[3]);
    double hi = std::stod((*it)[4]);
    if (name == core::kMaxTimeName) {
      out.warnings.push_back("MAX_TIME is frozen; range dropped");
      continue;
    }
    const auto* hp = structure.find_hyper(name);
    if (!hp) {
      out.warnings.push_back(fmt::format("{} is not a hyperparameter of the structure; dropped", name));
      continue;
    }
    if (std::any_of(out.ranges.begin(), out.ranges.end(), [&](const auto& r) { return r.name == name; })) {
      out.warnings.push_back(fmt::format("{} listed twice; first range kept", name));
      continue;
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo == hi) {
      out.warnings.push_back(fmt::format("{} has an empty range; dropped", name));
      continue;
    }
    if (lo > hi) {
      std::swap(lo, hi);
      out.warnings.push_back(fmt::format("{} range was reversed; swapped", name));
    }
    out.ranges.push_back({name, lo, hi, hp->is_integer});
  }
  if (out.ranges.empty()) throw Error(ErrorCode::kEmptyAfterFiltering, "no usable hyperparameter ranges");
  return out;
}

int default_lambda(int dimension) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

namespace {

/// Portable standard normal draws (Box-Muller over 53-bit uniforms).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool cached_ = false;
};

}  // namespace

CmaResult cmaes_minimize(const Objective& f, const VectorXd& x0, const CmaOptions& o) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw Error(ErrorCode::kDimensionMismatch, "dimension must be at least 1");
  const bool bounded = o.lower.size() > 0 || o.upper.size() > 0;
  if (bounded && (o.lower.size() != n || o.upper.size() != n))
    throw Error(ErrorCode::kDimensionMismatch, fmt::format("bounds have sizes {}/{} for dimension {}", o.lower.size(), o.upper.size(), n));
  if (!(o.sigma0 > 0)) throw Error(ErrorCode::kInvalidArgument, "sigma0 must be positive");
  const int lambda = o.lambda > 0 ? o.lambda : default_lambda(n);
  if (o.max_evals < lambda)
    throw Error(ErrorCode::kInvalidArgument, fmt::format("max_evals {} is below the population size {}", o.max_evals, lambda));

  const int mu = lambda / 2;
  VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();
  const double N = n;
  const double cc = (4 + mueff / N) / (N + 4 + 2 * mueff / N);
  const double cs = (mueff + 2) / (N + mueff + 5);
  const double c1 = 2 / ((N + 1.3) * (N + 1.3) + mueff);
  const double cmu = std::min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((N + 2) * (N + 2) + mueff));
  const double damps = 1 + 2 * std::max(0.0, std::sqrt((mueff - 1) / (N + 1)) - 1) + cs;
  const double chi_n = std::sqrt(N) * (1 - 1 / (4 * N) + 1 / (21 * N * N));

  auto clamp = [&](VectorXd x) {
    if (bounded) x = x.cwiseMax(o.lower).cwiseMin(o.upper);
    return x;
  };

  VectorXd mean = clamp(x0);
  double sigma = o.sigma0;
  MatrixXd C = MatrixXd::Identity(n, n);
  MatrixXd B = MatrixXd::Identity(n, n);
  VectorXd D = VectorXd::Ones(n);
  MatrixXd inv_sqrt_c = MatrixXd::Identity(n, n);
  VectorXd pc = VectorXd::Zero(n);
  VectorXd ps = VectorXd::Zero(n);
  Gaussian gauss(o.seed);

  CmaResult result;
  result.best_x = mean;
  result.best_f = std::numeric_limits<double>::infinity();

  std::vector<VectorXd> xs(static_cast<std::size_t>(lambda));
  std::vector<double> fs(static_cast<std::size_t>(lambda));
  std::vector<int> order(static_cast<std::size_t>(lambda));

  while (result.evals + lambda <= o.max_evals) {
    for (int k = 0; k < lambda; ++k) {
      VectorXd z(n);
      for (int i = 0; i < n; ++i) z[i] = gauss();
      xs[k] = clamp(mean + sigma * (B * D.asDiagonal() * z));
      double v = f(xs[k]);
      ++result.evals;
      if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
      fs[k] = v;
      if (v < result.best_f) {
        result.best_f = v;
        result.best_x = xs[k];
      }
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    ++result.generations;

    const VectorXd old_mean = mean;
    mean.setZero();
    for (int i = 0; i < mu; ++i) mean += weights[i] * xs[order[i]];
    const VectorXd step = (mean - old_mean) / sigma;
    ps = (1 - cs) * ps + std::sqrt(cs * (2 - cs) * mueff) * (inv_sqrt_c * step);
    const double gen_evals = static_cast<double>(result.generations) * lambda;
    const bool hsig =
        ps.norm() / std::sqrt(1 - std::pow(1 - cs, 2 * gen_evals / lambda)) / chi_n < 1.4 + 2 / (N + 1);
    pc = (1 - cc) * pc + (hsig ? std::sqrt(cc * (2 - cc) * mueff) : 0.0) * step;
    MatrixXd art(n, mu);
    for (int i = 0; i < mu; ++i) art.col(i) = (xs[order[i]] - old_mean) / sigma;
    C = (1 - c1 - cmu) * C + c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2 - cc)) * C) +
        cmu * art * weights.asDiagonal() * art.transpose();
    sigma *= std::exp((cs / damps) * (ps.norm() / chi_n - 1));
    sigma = std::min(sigma, 1e12);

    C = (C + C.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0 || !eig.eigenvalues().allFinite()) {
      C.setIdentity();
      B.setIdentity();
      D.setOnes();
      pc.setZero();
      ps.setZero();
      inv_sqrt_c.setIdentity();
    } else {
      B = eig.eigenvectors();
      D = eig.eigenvalues().cwiseSqrt();
      inv_sqrt_c = B * D.cwiseInverse().asDiagonal() * B.transpose();
    }
    if (sigma * D.maxCoeff() < 1e-15 || !std::isfinite(sigma)) break;
  }
  return result;
}

std::vector<core::HyperParam> decode(const VectorXd& unit, const std::vector<RangeSpec>& ranges) {
  std::vector<core::HyperParam> out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    double u = std::clamp(unit[static_cast<Eigen::Index>(i)], 0.0, 1.0);
    double v = r.low + u * (r.high - r.low);
    if (r.is_integer) {
      const double lo = std::ceil(r.low);
      const double hi = std::floor(r.high);
      v = lo <= hi ? std::clamp(std::round(v), lo, hi) : std::round((r.low + r.high) / 2);
    } else {
      v = std::clamp(v, r.low, r.high);
    }
    out.push_back({r.name, core::hyper_literal(v, r.is_integer), v, r.is_integer});
  }
  return out;
}

nlohmann::json to_json(const CalibrationResult& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : r.best_params) params[p.name] = p.value;
  return {{"dim", r.best_params.size()},
          {"evals_used", r.evals_used},
          {"pre_quality", r.pre_quality},
          {"post_quality", r.post_quality},
          {"improved", r.improved},
          {"best_params", params}};
}

CalibrationResult calibrate(const core::StructureCode& structure, double incumbent_quality,
                            const std::vector<RangeSpec>& ranges_in, const QualityFn& search_quality,
                            const QualityFn& confirm_quality, const CalibrationOptions& options) {
  CalibrationResult result;
  result.structure = structure;
  result.pre_quality = incumbent_quality;
  result.post_quality = incumbent_quality;

  std::vector<RangeSpec> ranges;
  for (const auto& r : ranges_in) {
    if (r.name == core::kMaxTimeName || !structure.find_hyper(r.name) || !(r.low < r.high)) continue;
    ranges.push_back(r);
  }
  const int dim = static_cast<int>(ranges.size());
  if (dim == 0 || options.max_evals <= 0) return result;

  VectorXd x0(dim);
  for (int i = 0; i < dim; ++i) {
    const auto& r = ranges[static_cast<std::size_t>(i)];
    x0[i] = std::clamp((structure.find_hyper(r.name)->value - r.low) / (r.high - r.low), 0.0, 1.0);
  }

  std::map<std::string, double> cache;
  auto key_of = [](const std::vector<core::HyperParam>& ps) {
    std::string k;
    for (const auto& p : ps) k += p.literal + ";";
    return k;
  };
  const auto incumbent_key = key_of(decode(x0, ranges));
  std::optional<std::vector<core::HyperParam>> best;
  double best_q = -std::numeric_limits<double>::infinity();

  auto objective = [&](const VectorXd& x) {
    auto params = decode(x, ranges);
    auto key = key_of(params);
    auto it = cache.find(key);
    double q;
    if (it != cache.end()) {
      q = it->second;
    } else {
      ++result.evals_used;
      auto value = search_quality(core::with_hyper_values(structure, params));
      q = value && std::isfinite(*value) ? *value : -std::numeric_limits<double>::infinity();
      cache.emplace(key, q);
    }
    if (q > best_q && key != incumbent_key) {
      best_q = q;
      best = params;
    }
    return -q;
  };

  CmaOptions cma;
  cma.sigma0 = options.sigma0;
  cma.seed = options.seed;
  cma.lower = VectorXd::Zero(dim);
  cma.upper = VectorXd::Ones(dim);
  cma.max_evals = std::max<std::int64_t>(options.max_evals, default_lambda(dim));
  cmaes_minimize(objective, x0, cma);

  if (!best) return result;
  result.best_params = *best;
  auto candidate = core::with_hyper_values(structure, *best);
  auto confirmed = confirm_quality(candidate);
  ++result.evals_used;
  if (confirmed && std::isfinite(*confirmed) && *confirmed > incumbent_quality) {
    result.structure = std::move(candidate);
    result.improved = true;
    result.post_quality = *confirmed;
  }
  return result;
}

}  // namespace heurgen::calibration
