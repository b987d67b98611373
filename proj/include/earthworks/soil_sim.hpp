#pragma once

#include <span>
#include <vector>

#include "earthworks/gridmap.hpp"

namespace earthworks::soil {

// Elevation change of one cell. For removals `delta` is the depth taken
// off (positive).
struct CellChange {
  std::size_t index = 0;
  double delta = 0.0;
};

struct DepositSpec {
  Vec2 center;
  double heading = 0.0;  // psi, shovel body x axis
  double volume = 0.0;
  double sigma_x = 0.2;  // half the shovel edge length
  double sigma_y = 0.6;  // half the shovel width
  int slices = 4;
  double span = 1.2;  // slice means are spread over this length along body y
};

inline constexpr double kMinDepositVolume = 1e-4;

// Lowers elevation by each depth. Returns the removed volume.
double apply_scoop(grid::LayeredGrid& grid, std::span<const CellChange> removed);

// Unnormalized mixture h(x) = V/N sum_i N(x; mu_i, Sigma) sampled at cell
// centers within a few sigma of the shovel. Cells with receiving[i] == 0
// are left out when `receiving` is nonempty.
std::vector<CellChange> deposit_field(const grid::GridSpec& spec, const DepositSpec& d,
                                      std::span<const std::uint8_t> receiving = {});

struct DepositResult {
  double volume = 0.0;  // sum h * cell area after renormalization
  double raw_volume = 0.0;
  std::vector<CellChange> added;
  bool skipped = false;  // below kMinDepositVolume
};

// Adds the renormalized field so that sum h * cell area == V.
DepositResult deposit(grid::LayeredGrid& grid, const DepositSpec& d,
                      std::span<const std::uint8_t> receiving = {});

// Signed changes, e.g. a grading pass. Returns the net added volume.
double apply_changes(grid::LayeredGrid& grid, std::span<const CellChange> changes);

}  // namespace earthworks::soil
