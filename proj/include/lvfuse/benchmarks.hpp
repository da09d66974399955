#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "lvfuse/dataset.hpp"

namespace lvfuse::benchmarks {

/// Source labels shared by both families, ground source first.
inline constexpr std::array<std::string_view, 4> kSources{"ground", "p1", "p2", "p3"};

std::size_t source_index(std::string_view source);

struct SourceCounts {
  std::array<std::size_t, 4> train;
  std::array<std::size_t, 4> test;
};

/// y = (x + x_shift - a)(x + x_shift - b) + y_shift
struct ParabolaParams {
  double a = 1.0;
  double b = 2.0;
  double x_shift = 0.0;
  double y_shift = 0.0;
};

ParabolaParams parabola_params(std::string_view source);
double parabola_value(std::string_view source, double x);

enum class TrainingDesign { grid, uniform };

struct ParabolaOptions {
  SourceCounts counts{{3, 10, 10, 10}, {30, 30, 30, 30}};
  TrainingDesign design = TrainingDesign::grid;
  double lower = -10.0;
  double upper = 10.0;
};

/// Training x on an even grid over [lower, upper] per source (or seeded
/// uniform), test x seeded uniform.
std::pair<MultiSourceDataset, MultiSourceDataset> generate_parabola(std::uint64_t seed,
                                                                    const ParabolaOptions& options = {});

struct AckleyParams {
  double a = 20.0;
  double b = 0.2;
  double c = 2.0;
};

/// Ground: -a exp(-b sqrt((x^2 + y^2) / 2)) - exp((cos cx + cos cy) / 2) + a + e
/// p1:     -a exp(-b sqrt((x^2 + y^2) / 2)) + 10
/// p2:      exp((cos cx + cos cy) / 2) + 5
/// p3:      (1/4)(-a exp(...)) - (3/4) exp(...) + a + e
double ackley_value(std::string_view source, double x, double y, const AckleyParams& params = {});

struct AckleyOptions {
  SourceCounts counts{{20, 50, 50, 50}, {100, 100, 100, 100}};
  AckleyParams params{};
  double lower = -5.0;
  double upper = 5.0;
};

std::pair<MultiSourceDataset, MultiSourceDataset> generate_ackley(std::uint64_t seed,
                                                                  const AckleyOptions& options = {});

VariableSchema parabola_schema();
VariableSchema ackley_schema();

}  // namespace lvfuse::benchmarks
