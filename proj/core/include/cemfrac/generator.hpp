#pragma once

#include <array>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "cemfrac/mesh.hpp"

namespace cemfrac {

/// Zero-width through-notch on a grid plane. The plane is normal to
/// `normal_axis` at `position`; the notch runs along `length_axis` over
/// [from, to] (one end on the box boundary, the other is the tip) and through
/// the full extent of the remaining axis.
struct NotchSpec {
  int normal_axis = 1;
  double position = 0.0;
  int length_axis = 0;
  double from = 0.0;
  double to = 0.0;
};

/// SixTets: Kuhn split of every cell along its main diagonal. BodyCentered:
/// one extra node per cell centre; each interior face joins the two centres
/// in 4 tets, each boundary or notch face forms a pyramid split into 2 tets.
/// Fewer preferred directions than the Kuhn split.
enum class CellDecomposition { SixTets, Hex, BodyCentered };

struct GeneratorSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  std::array<int, 3> cells{1, 1, 1};
  CellDecomposition decomposition = CellDecomposition::SixTets;
  std::optional<NotchSpec> notch;
  /// Interior node perturbation as a fraction of the cell size, drawn from a
  /// hash of (seed, node, axis). Boundary nodes move only within their face
  /// and notch nodes only within the notch plane. Breaks the grid-aligned
  /// crack paths of a structured mesh.
  double jitter = 0.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError: non-positive sizes or counts, notch off the grid or
  /// outside the box, notch not reaching the boundary, jitter outside [0, 0.25).
  void validate() const;
};

/// Structured box of positively oriented tets (or one hex per cell). Grid
/// nodes are numbered x fastest, then y, then z. Notch nodes (on the plane,
/// within the notch, excluding the tip line) are duplicated and appended;
/// elements on the positive side of the plane use the copies. Cell centres of
/// the body-centred split come last, in cell order.
Mesh generate_notched_box(const GeneratorSpec& spec);

/// Number of grid nodes the notch duplicates.
std::size_t notch_duplicate_count(const GeneratorSpec& spec);

void to_json(nlohmann::json& j, const GeneratorSpec& spec);
/// Throws ConfigError naming the offending field.
GeneratorSpec generator_spec_from_json(const nlohmann::json& j, const std::string& path = "mesh.generator");

}  // namespace cemfrac
