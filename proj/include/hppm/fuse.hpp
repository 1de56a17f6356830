#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hppm/geom.hpp"
#include "hppm/part_template.hpp"

namespace hppm {

/// Hop distance, inside one part's local mesh, from each overlap vertex to the
/// nearest non-overlap vertex of that part.
struct TopologyDistances {
    static constexpr int kUnreachable = std::numeric_limits<int>::max();
    static constexpr int kNotOverlap = 0;

    int part_id = 0;
    std::vector<int> by_local;  // 0 for non-overlap vertices

    /// Distance for a global vertex id of this part.
    int at(const PartTemplate& part, int global_id) const;
};

TopologyDistances topology_distances(const PartTemplate& part);
std::vector<TopologyDistances> topology_distances(const HppmTemplateSet& set);

struct VertexProvenance {
    int part_a = -1;
    int part_b = -1;  // -1 when copied from a single part
    double weight_a = 1.0;
    double weight_b = 0.0;
};

/// Fused mesh indexed by whole-body template ids. `vertices` row i holds
/// template vertex `template_ids[i]`; faces use the same compact indices.
struct FusedMesh {
    std::vector<int> template_ids;
    Points3 vertices;
    std::vector<Face> faces;
    std::vector<VertexProvenance> provenance;
    std::vector<std::string> warnings;

    Mesh mesh() const { return Mesh{vertices, faces}; }
    /// Compact row of a template id, or -1.
    int row_of(int template_id) const;
};

/// Decoded world-space vertices for every part, in template-set order.
struct FusionInput {
    std::span<const Points3> part_vertices;
    const std::vector<bool>& visible;
};

/// Gradual part connecting. Vertices covered by one visible part are copied;
/// vertices shared by two visible parts are blended as
/// (a d_b + b d_a) / (d_a + d_b) where d_x is the owning part's topology
/// distance. Faces are the body faces whose three vertices were emitted.
FusedMesh gradual_connect(const HppmTemplateSet& set, std::span<const TopologyDistances> distances,
                          const FusionInput& input);
FusedMesh gradual_connect(const HppmTemplateSet& set, const FusionInput& input);

struct OverlapGap {
    int template_id = 0;
    int part_a = 0;
    int part_b = 0;
    double gap = 0.0;  // meters
};

/// Distance between the two copies of every shared vertex of visible adjacent parts.
std::vector<OverlapGap> overlap_residual(const HppmTemplateSet& set, const FusionInput& input);

}  // namespace hppm
