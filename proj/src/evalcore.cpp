#include "compasskit/evalcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace compasskit {

void BudgetSchedule::validate() const {
  if (levels.empty()) throw ValidationError("budget schedule has no levels");
  if (levels.front() == 0) throw ValidationError("budget levels must be positive");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw ValidationError("budget levels must be strictly increasing");
  if (!(z > 0.0) || !std::isfinite(z)) throw ValidationError("confidence z must be > 0");
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Feasible:
      return "feasible";
    case Classification::Infeasible:
      return "infeasible";
    case Classification::Uncertain:
      return "uncertain";
  }
  return "?";
}

const char* to_string(OracleFamily f) {
  switch (f) {
    case OracleFamily::RagLike:
      return "rag-like";
    case OracleFamily::CascadeLike:
      return "cascade-like";
    case OracleFamily::CustomTable:
      return "custom-table";
  }
  return "?";
}

OracleFamily oracle_family_from_string(const std::string& s) {
  if (s == "rag-like" || s == "rag_like") return OracleFamily::RagLike;
  if (s == "cascade-like" || s == "cascade_like") return OracleFamily::CascadeLike;
  if (s == "custom-table" || s == "custom_table") return OracleFamily::CustomTable;
  throw ValidationError("unknown oracle family '" + s + "'");
}

AccuracyOracle AccuracyOracle::parametric(const ConfigSpace& space, OracleFamily family,
                                          Coefficients coeffs) {
  if (family == OracleFamily::CustomTable)
    throw ValidationError("custom-table oracle needs a table");
  if (coeffs.axes.size() > space.dims())
    throw ValidationError("oracle has more axis effects than parameters");
  coeffs.axes.resize(space.dims());
  for (std::size_t i = 0; i < space.dims(); ++i) {
    const auto& ax = coeffs.axes[i];
    if (!ax.category_offsets.empty() &&
        ax.category_offsets.size() != space.params()[i].cardinality())
      throw ValidationError("oracle offsets for '" + space.params()[i].name +
                            "' must list one value per category");
    if (ax.curvature < 0) throw ValidationError("oracle curvature must be >= 0");
  }
  for (const auto& in : coeffs.interactions)
    if (in.a >= space.dims() || in.b >= space.dims())
      throw ValidationError("oracle interaction references unknown axis");
  if (family == OracleFamily::RagLike && !coeffs.bumps.empty())
    throw ValidationError("bumps are only allowed for the cascade-like family");
  for (const auto& b : coeffs.bumps) {
    if (b.axis >= space.dims()) throw ValidationError("oracle bump references unknown axis");
    if (!(b.width > 0)) throw ValidationError("oracle bump width must be > 0");
  }
  AccuracyOracle o(space, family);
  o.coeffs_ = std::move(coeffs);
  return o;
}

AccuracyOracle AccuracyOracle::table(
    const ConfigSpace& space, const std::vector<std::pair<Configuration, double>>& rows) {
  AccuracyOracle o(space, OracleFamily::CustomTable);
  o.table_.assign(space.lattice_size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [c, p] : rows) {
    if (!space.contains(c))
      throw ValidationError("accuracy table row " + to_string(c) + " is not in the space");
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("accuracy table value out of [0,1] for " + to_string(c));
    o.table_[space.rank(c)] = p;
  }
  return o;
}

AccuracyOracle AccuracyOracle::with_margin(TauMargin m) const {
  if (!(m.tau > 0 && m.tau < 1) || !(m.margin >= 0))
    throw ValidationError("invalid tau margin");
  AccuracyOracle o = *this;
  o.margin_ = m;
  return o;
}

namespace {

double saturating(double x, double k) {
  if (k <= 0) return x;
  return (1.0 - std::exp(-k * x)) / (1.0 - std::exp(-k));
}

}  // namespace

double AccuracyOracle::raw_accuracy(const Configuration& c) const {
  if (family_ == OracleFamily::CustomTable) {
    double p = table_.at(space_.rank(c));
    if (std::isnan(p))
      throw ValidationError("accuracy table has no entry for " + to_string(c));
    return p;
  }
  const auto x = normalize(space_, c).coords;
  double p = coeffs_.base;
  for (std::size_t i = 0; i < coeffs_.axes.size(); ++i) {
    const auto& ax = coeffs_.axes[i];
    if (!ax.category_offsets.empty())
      p += ax.category_offsets[c.idx[i]];
    else
      p += ax.gain * saturating(x[i], ax.curvature);
  }
  for (const auto& in : coeffs_.interactions) p += in.coeff * x[in.a] * x[in.b];
  for (const auto& b : coeffs_.bumps) {
    double u = (x[b.axis] - b.center) / b.width;
    p += b.height * std::exp(-u * u);
  }
  return std::clamp(p, 0.0, 1.0);
}

double AccuracyOracle::true_accuracy(const Configuration& c) const {
  double p = raw_accuracy(c);
  if (margin_) {
    // Order-preserving map opening a gap of +-margin around tau:
    // [0, tau) -> [0, tau - margin), [tau, 1] -> [tau + margin, 1].
    const double tau = margin_->tau;
    const double lo = std::max(tau - margin_->margin, 0.0);
    const double hi = std::min(tau + margin_->margin, 1.0);
    if (p < tau)
      p = lo * (p / tau);
    else
      p = hi + (p - tau) * (1.0 - hi) / (1.0 - tau);
  }
  return p;
}

uint32_t sample_trials(const AccuracyOracle& oracle, const Configuration& c, uint32_t n,
                       Rng& rng) {
  const double p = oracle.true_accuracy(c);
  uint32_t s = 0;
  for (uint32_t i = 0; i < n; ++i)
    if (uniform01(rng) < p) ++s;
  return s;
}

std::pair<double, double> wilson_interval(uint32_t successes, uint32_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  if (!(z > 0)) throw std::invalid_argument("wilson_interval: z must be > 0");
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  double lo = successes == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
  double hi = successes == trials ? 1.0 : std::clamp(center + half, p, 1.0);
  return {lo, hi};
}

uint64_t eval_stream_seed(uint64_t seed, const ConfigSpace& space, const Configuration& c) {
  return derive_seed(seed, "eval", {space.rank(c)});
}

EvalRecord progressive_evaluate(const AccuracyOracle& oracle, const Configuration& c,
                                const BudgetSchedule& schedule, double tau, Rng& rng) {
  EvalRecord rec;
  rec.config = c;
  for (std::size_t level = 0; level < schedule.levels.size(); ++level) {
    const uint32_t target = schedule.levels[level];
    rec.successes += sample_trials(oracle, c, target - rec.trials, rng);
    rec.trials = target;
    rec.stop_level = level;
    std::tie(rec.ci_lo, rec.ci_hi) = wilson_interval(rec.successes, rec.trials, schedule.z);
    if (rec.ci_lo > tau) {
      rec.classification = Classification::Feasible;
      break;
    }
    if (rec.ci_hi < tau) {
      rec.classification = Classification::Infeasible;
      break;
    }
  }
  rec.acc_hat = static_cast<double>(rec.successes) / rec.trials;
  rec.samples_spent = rec.trials;
  switch (rec.classification) {
    case Classification::Feasible:
      rec.feasible = true;
      break;
    case Classification::Infeasible:
      rec.feasible = false;
      break;
    case Classification::Uncertain:
      rec.feasible = rec.acc_hat >= tau;
      break;
  }
  return rec;
}

}  // namespace compasskit
