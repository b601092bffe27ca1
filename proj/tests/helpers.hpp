#pragma once

#include <string>
#include <vector>

#include "compasskit/planner.hpp"
#include "compasskit/space.hpp"

namespace testutil {

using namespace compasskit;

inline ParameterSpec ordinal(const std::string& name, std::vector<double> values) {
  ParameterSpec p;
  p.name = name;
  p.kind = ParamKind::Ordinal;
  for (double v : values) p.labels.push_back(std::to_string(v));
  p.numbers = std::move(values);
  return p;
}

inline ParameterSpec ordinal_n(const std::string& name, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(i + 1));
  return ordinal(name, v);
}

inline ParameterSpec categorical(const std::string& name, std::size_t n) {
  ParameterSpec p;
  p.name = name;
  p.kind = ParamKind::Categorical;
  for (std::size_t i = 0; i < n; ++i) p.labels.push_back(name + std::to_string(i));
  return p;
}

inline Configuration cfg(std::vector<uint32_t> idx) { return Configuration{std::move(idx)}; }

// One-axis space with n ordinal values; handy for planner/simulator tests.
inline ConfigSpace line_space(std::size_t n) { return ConfigSpace({ordinal_n("x", n)}); }

inline ParetoEntry entry(uint32_t i, double acc, double mean, double p95) {
  ParetoEntry e;
  e.config = cfg({i});
  e.accuracy = acc;
  e.profile.mean_ms = mean;
  e.profile.p95_ms = p95;
  e.profile.samples = 1000;
  return e;
}

// The 120/300/500 ladder used across planner and controller tests.
inline std::vector<ParetoEntry> ladder3() {
  return {entry(0, 0.76, 120, 200), entry(1, 0.82, 300, 450), entry(2, 0.86, 500, 700)};
}

}  // namespace testutil
