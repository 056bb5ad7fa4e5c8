#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"

namespace dplab {

struct TimeGrid {
  double T = 1.0;
  int n = 1;
  double dt = 1.0;

  double t(int i) const { return i == n ? T : i * dt; }
  // Index k of the step (t_k, t_{k+1}] that contains time s in (0,T].
  int step_of(double s) const;
};

TimeGrid make_grid(double T, int n);

struct BrownianPath {
  std::vector<double> W;   // n+1 levels, W[0] = 0
  std::vector<double> dW;  // n increments
  std::vector<double> M;   // running max
  std::vector<double> m;   // running min
};

// Lévy measure atom: mark z with rate λ.
struct Atom {
  double z = 0.0;
  double rate = 0.0;
};
using LevySpec = std::vector<Atom>;

struct JumpEvent {
  double t = 0.0;  // full precision
  int atom = 0;
  double z = 0.0;
  int step = 0;  // integration step holding t
};

struct JumpField {
  std::vector<JumpEvent> events;
  LevySpec levy;
};

struct PathBundle {
  TimeGrid grid;
  BrownianPath brownian;
  JumpField jumps;
  std::uint64_t seed = 0;
};

struct Extrema {
  std::vector<double> max, min;          // over j <= i
  std::vector<double> fwd_max, fwd_min;  // over j >= i
};

void validate_levy(const LevySpec& levy);

BrownianPath brownian_from_increments(std::vector<double> dW);
BrownianPath brownian_from_levels(std::vector<double> W);
BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);
JumpField sample_jumps(const TimeGrid& grid, const LevySpec& levy, std::uint64_t seed);
Extrema running_extrema(const BrownianPath& path);

PathBundle make_bundle(const TimeGrid& grid, const LevySpec& levy, std::uint64_t seed);

// Resample any event that sits exactly on the default time tau.
void separate_from_default(JumpField& jumps, const TimeGrid& grid, double tau, std::uint64_t seed);

// Brownian-bridge sub-stepping; coarse levels are kept bit-exactly.
PathBundle refine(const PathBundle& bundle, int factor, std::uint64_t seed);
PathBundle subsample(const PathBundle& bundle, int factor);

void write_csv(std::ostream& os, const PathBundle& bundle);
nlohmann::json to_json(const PathBundle& bundle);
PathBundle bundle_from_json(const nlohmann::json& j);

}  // namespace dplab
