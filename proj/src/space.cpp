#include "compasskit/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "compasskit/log.hpp"
#include "compasskit/seeding.hpp"

namespace compasskit {

const char* to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::Categorical:
      return "categorical";
    case ParamKind::Ordinal:
      return "ordinal";
    case ParamKind::ContinuousGrid:
      return "continuous";
  }
  return "?";
}

ParamKind param_kind_from_string(const std::string& s) {
  if (s == "categorical") return ParamKind::Categorical;
  if (s == "ordinal" || s == "ordinal-discrete" || s == "discrete")
    return ParamKind::Ordinal;
  if (s == "continuous" || s == "continuous-grid") return ParamKind::ContinuousGrid;
  throw ValidationError("unknown parameter kind '" + s + "'");
}

std::string to_string(const Configuration& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.idx.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(c.idx[i]);
  }
  return out + ")";
}

bool Exclusion::matches(const Configuration& c) const {
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i] && *idx[i] != c.idx[i]) return false;
  return true;
}

ConfigSpace::ConfigSpace(std::vector<ParameterSpec> params,
                         std::vector<Exclusion> exclusions)
    : params_(std::move(params)), exclusions_(std::move(exclusions)) {
  strides_.assign(params_.size(), 1);
  lattice_size_ = 1;
  for (std::size_t i = params_.size(); i-- > 0;) {
    strides_[i] = lattice_size_;
    lattice_size_ *= params_[i].cardinality();
  }
  if (exclusions_.empty()) {
    size_ = lattice_size_;
  } else {
    size_ = 0;
    for (std::size_t r = 0; r < lattice_size_; ++r)
      if (!is_excluded(unrank(r))) ++size_;
  }
}

bool ConfigSpace::is_excluded(const Configuration& c) const {
  return std::any_of(exclusions_.begin(), exclusions_.end(),
                     [&](const Exclusion& e) { return e.matches(c); });
}

bool ConfigSpace::contains(const Configuration& c) const {
  if (c.idx.size() != params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (c.idx[i] >= params_[i].cardinality()) return false;
  return !is_excluded(c);
}

std::size_t ConfigSpace::rank(const Configuration& c) const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) r += c.idx[i] * strides_[i];
  return r;
}

Configuration ConfigSpace::unrank(std::size_t r) const {
  Configuration c;
  c.idx.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    c.idx[i] = static_cast<uint32_t>(r / strides_[i]);
    r %= strides_[i];
  }
  return c;
}

std::optional<std::size_t> ConfigSpace::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

namespace {

double parse_number(const std::string& param, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v))
    throw ValidationError("parameter '" + param + "': value '" + text +
                          "' is not a number");
  return v;
}

}  // namespace

ConfigSpace validate_space(const RawSpace& raw) {
  if (raw.params.empty()) throw ValidationError("space has no parameters");
  std::vector<ParameterSpec> params;
  std::set<std::string> names;
  for (const auto& rp : raw.params) {
    if (rp.name.empty()) throw ValidationError("parameter with empty name");
    if (!names.insert(rp.name).second)
      throw ValidationError("duplicate parameter name '" + rp.name + "'");
    if (rp.values.empty())
      throw ValidationError("parameter '" + rp.name + "' has an empty value list");
    ParameterSpec ps;
    ps.name = rp.name;
    ps.kind = param_kind_from_string(rp.kind);
    ps.labels = rp.values;
    std::set<std::string> seen;
    for (const auto& v : rp.values)
      if (!seen.insert(v).second)
        throw ValidationError("parameter '" + rp.name + "' repeats value '" + v + "'");
    if (!ps.is_categorical()) {
      for (const auto& v : rp.values) ps.numbers.push_back(parse_number(rp.name, v));
      for (std::size_t i = 1; i < ps.numbers.size(); ++i)
        if (!(ps.numbers[i] > ps.numbers[i - 1]))
          throw ValidationError("parameter '" + rp.name +
                                "' has non-increasing values");
    }
    params.push_back(std::move(ps));
  }

  std::vector<Exclusion> exclusions;
  for (const auto& ex : raw.exclude) {
    Exclusion e;
    e.idx.assign(params.size(), std::nullopt);
    if (ex.empty()) throw ValidationError("empty exclusion entry");
    for (const auto& [name, value] : ex) {
      auto it = std::find_if(params.begin(), params.end(),
                             [&](const ParameterSpec& p) { return p.name == name; });
      if (it == params.end())
        throw ValidationError("exclusion names unknown parameter '" + name + "'");
      auto vit = std::find(it->labels.begin(), it->labels.end(), value);
      if (vit == it->labels.end()) {
        // Numeric axes accept any spelling of the same number.
        if (!it->is_categorical()) {
          double x = parse_number(name, value);
          auto nit = std::find(it->numbers.begin(), it->numbers.end(), x);
          if (nit != it->numbers.end())
            vit = it->labels.begin() + (nit - it->numbers.begin());
        }
        if (vit == it->labels.end())
          throw ValidationError("exclusion value '" + value + "' not in parameter '" +
                                name + "'");
      }
      e.idx[static_cast<std::size_t>(it - params.begin())] =
          static_cast<uint32_t>(vit - it->labels.begin());
    }
    exclusions.push_back(std::move(e));
  }

  ConfigSpace space(std::move(params), std::move(exclusions));
  if (space.size() == 0) throw ValidationError("exclusions remove every configuration");
  if (raw.declared_size && *raw.declared_size != space.size()) {
    std::ostringstream msg;
    msg << "declared size " << *raw.declared_size << " but space has " << space.size()
        << " configurations (lattice " << space.lattice_size() << ")";
    throw ValidationError(msg.str());
  }
  return space;
}

NormalizedPoint normalize(const ConfigSpace& space, const Configuration& c) {
  NormalizedPoint p;
  p.coords.reserve(space.dims());
  for (std::size_t i = 0; i < space.dims(); ++i)
    p.coords.push_back(axis_coord(c.idx[i], space.params()[i].cardinality()));
  return p;
}

double axis_delta(const ConfigSpace& space, std::size_t axis, const Configuration& a,
                  const Configuration& b) {
  const auto& p = space.params()[axis];
  if (p.is_categorical()) return a.idx[axis] == b.idx[axis] ? 0.0 : 1.0;
  return axis_coord(b.idx[axis], p.cardinality()) - axis_coord(a.idx[axis], p.cardinality());
}

double distance(const ConfigSpace& space, const Configuration& a, const Configuration& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < space.dims(); ++i) {
    double d = axis_delta(space, i, a, b);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<Configuration> neighbors(const ConfigSpace& space, const Configuration& c) {
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < space.dims(); ++i) {
    const auto& p = space.params()[i];
    const uint32_t m = static_cast<uint32_t>(p.cardinality());
    auto push = [&](uint32_t v) {
      Configuration n = c;
      n.idx[i] = v;
      if (!space.is_excluded(n)) out.push_back(std::move(n));
    };
    if (p.is_categorical()) {
      for (uint32_t v = 0; v < m; ++v)
        if (v != c.idx[i]) push(v);
    } else {
      if (c.idx[i] > 0) push(c.idx[i] - 1);
      if (c.idx[i] + 1 < m) push(c.idx[i] + 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Configuration> enumerate(const ConfigSpace& space) {
  std::vector<Configuration> out;
  out.reserve(space.size());
  for_each_config(space, [&](const Configuration& c) { out.push_back(c); });
  return out;
}

std::vector<std::vector<double>> lhs_unit_points(std::size_t dims, std::size_t n,
                                                 uint64_t seed) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
  Rng rng = make_rng(seed);
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t j = 0; j < n; ++j) perm[j] = j;
    for (std::size_t j = n; j > 1; --j) {
      auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(j));
      std::swap(perm[j - 1], perm[std::min(k, j - 1)]);
    }
    for (std::size_t j = 0; j < n; ++j)
      pts[j][d] = (static_cast<double>(perm[j]) + uniform01(rng)) / static_cast<double>(n);
  }
  return pts;
}

std::vector<Configuration> lhs_sample(const ConfigSpace& space, std::size_t n_init,
                                      uint64_t seed) {
  if (n_init == 0) throw ValidationError("lhs_sample requires n_init >= 1");
  if (n_init > space.size()) {
    log_warn("n_init " + std::to_string(n_init) + " exceeds |C| = " +
             std::to_string(space.size()) + "; clamping");
    n_init = space.size();
  }
  auto pts = lhs_unit_points(space.dims(), n_init, seed);
  std::vector<Configuration> out;
  std::set<Configuration> seen;
  for (const auto& u : pts) {
    Configuration c;
    c.idx.resize(space.dims());
    for (std::size_t i = 0; i < space.dims(); ++i) {
      const auto& p = space.params()[i];
      const auto m = p.cardinality();
      std::size_t k;
      if (p.is_categorical())
        k = std::min(static_cast<std::size_t>(u[i] * static_cast<double>(m)), m - 1);
      else
        k = static_cast<std::size_t>(std::lround(u[i] * static_cast<double>(m - 1)));
      c.idx[i] = static_cast<uint32_t>(k);
    }
    if (space.is_excluded(c)) continue;
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

double seeding_probability(double feasible_fraction, std::size_t n_init) {
  return 1.0 - std::pow(1.0 - feasible_fraction, static_cast<double>(n_init));
}

}  // namespace compasskit
