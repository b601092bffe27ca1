#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace compasskit {

/// Raised for malformed scenario input (bad space, oracle, schedule, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamKind { Categorical, Ordinal, ContinuousGrid };

const char* to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& s);

/// One tunable axis of a workflow. Categorical parameters carry labels only;
/// ordinal and continuous-grid parameters carry strictly increasing numbers
/// (labels are their printed form).
struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::Categorical;
  std::vector<std::string> labels;
  std::vector<double> numbers;  // empty for categorical

  std::size_t cardinality() const { return labels.size(); }
  bool is_categorical() const { return kind == ParamKind::Categorical; }
};

/// A point of the lattice: one value index per parameter, in space order.
struct Configuration {
  std::vector<uint32_t> idx;

  auto operator<=>(const Configuration&) const = default;
  bool operator==(const Configuration&) const = default;
};

std::string to_string(const Configuration& c);

/// A partial assignment; unspecified parameters act as wildcards. A full
/// assignment excludes exactly one configuration.
struct Exclusion {
  std::vector<std::optional<uint32_t>> idx;
  bool matches(const Configuration& c) const;
};

/// Raw, unvalidated parameter description as read from a scenario file.
struct RawParameter {
  std::string name;
  std::string kind;
  std::vector<std::string> values;
};

struct RawSpace {
  std::vector<RawParameter> params;
  // Each exclusion maps parameter name -> value label.
  std::vector<std::map<std::string, std::string>> exclude;
  std::optional<std::size_t> declared_size;
};

struct NormalizedPoint {
  std::vector<double> coords;
};

/// The product lattice P1 x ... x Pn minus any excluded assignments.
class ConfigSpace {
 public:
  ConfigSpace() = default;
  ConfigSpace(std::vector<ParameterSpec> params,
              std::vector<Exclusion> exclusions = {});

  const std::vector<ParameterSpec>& params() const { return params_; }
  std::size_t dims() const { return params_.size(); }
  const std::vector<Exclusion>& exclusions() const { return exclusions_; }

  /// Product of cardinalities, ignoring exclusions.
  std::size_t lattice_size() const { return lattice_size_; }
  /// Number of admissible configurations (|C|).
  std::size_t size() const { return size_; }

  bool contains(const Configuration& c) const;
  bool is_excluded(const Configuration& c) const;

  /// Mixed-radix rank in lexicographic order (first parameter most
  /// significant). Defined for every lattice point, excluded or not.
  std::size_t rank(const Configuration& c) const;
  Configuration unrank(std::size_t r) const;

  std::optional<std::size_t> param_index(const std::string& name) const;
  std::string label(const Configuration& c, std::size_t axis) const {
    return params_[axis].labels[c.idx[axis]];
  }

 private:
  std::vector<ParameterSpec> params_;
  std::vector<Exclusion> exclusions_;
  std::vector<std::size_t> strides_;
  std::size_t lattice_size_ = 1;
  std::size_t size_ = 1;
};

ConfigSpace validate_space(const RawSpace& raw);

NormalizedPoint normalize(const ConfigSpace& space, const Configuration& c);

/// Coordinate of value index `i` on an axis with `m` values.
inline double axis_coord(std::size_t i, std::size_t m) {
  return m <= 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
}

/// Per-axis difference used by distance and gradient estimation. Ordinal and
/// continuous axes give the signed normalized difference b - a; categorical
/// axes give 0 when equal and 1 otherwise.
double axis_delta(const ConfigSpace& space, std::size_t axis,
                  const Configuration& a, const Configuration& b);

double distance(const ConfigSpace& space, const Configuration& a,
                const Configuration& b);

/// Configurations adjacent to `c` (differ in exactly one parameter; ordinal
/// steps of one, any other category). Excluded points are skipped. Sorted.
std::vector<Configuration> neighbors(const ConfigSpace& space,
                                     const Configuration& c);

/// All admissible configurations in lexicographic index order.
std::vector<Configuration> enumerate(const ConfigSpace& space);

/// Calls `fn` for each admissible configuration in lexicographic order.
template <class Fn>
void for_each_config(const ConfigSpace& space, Fn&& fn) {
  for (std::size_t r = 0; r < space.lattice_size(); ++r) {
    Configuration c = space.unrank(r);
    if (!space.is_excluded(c)) fn(c);
  }
}

/// Stratified points in [0,1)^dims: on every axis each of the n strata
/// [j/n, (j+1)/n) holds exactly one point.
std::vector<std::vector<double>> lhs_unit_points(std::size_t dims,
                                                 std::size_t n, uint64_t seed);

/// Latin Hypercube seeding snapped to the lattice. Numeric axes snap to the
/// nearest grid value, categorical axes take floor(u * m). Duplicates and
/// excluded points are dropped. n_init > |C| is clamped with a warning.
std::vector<Configuration> lhs_sample(const ConfigSpace& space,
                                      std::size_t n_init, uint64_t seed);

/// Lower bound on the probability that n_init seeds hit a feasible region
/// occupying fraction f of the space.
double seeding_probability(double feasible_fraction, std::size_t n_init);

}  // namespace compasskit
