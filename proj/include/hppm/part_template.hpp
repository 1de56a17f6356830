#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hppm/geom.hpp"

namespace hppm {

/// Per-vertex skinning influence, N x B, rows sum to one.
struct BlendWeights {
    Eigen::MatrixXd weights;

    int vertex_count() const { return static_cast<int>(weights.rows()); }
    int bone_count() const { return static_cast<int>(weights.cols()); }
    void validate() const;
};

/// Raw skinning segment -> final part.
struct MergeMap {
    std::vector<int> segment_to_part;
    std::vector<std::string> part_names;
    std::vector<std::string> segment_names;  // optional, informational

    int part_count() const { return static_cast<int>(part_names.size()); }
    int segment_count() const { return static_cast<int>(segment_to_part.size()); }
    void validate() const;
    /// FNV-1a over the mapping and part names, as 16 hex digits.
    std::string hash() const;

    static MergeMap identity(int segments);
};

MergeMap load_merge_map(const std::filesystem::path& path);
void save_merge_map(const MergeMap& map, const std::filesystem::path& path);

using VertexMask = std::vector<bool>;

struct PartTemplate {
    int part_id = 0;
    std::string name;
    std::vector<int> global_ids;  // sorted, after dilation
    std::vector<int> core_ids;    // sorted, before dilation
    std::vector<Face> local_faces;
    Points3 template_vertices;
    std::map<int, std::vector<int>> overlap;  // neighbor part -> shared global ids

    int vertex_count() const { return static_cast<int>(global_ids.size()); }
    /// Local index of a global vertex id, or -1.
    int local_index(int global_id) const;
    /// Sorted global ids that are shared with any neighbor.
    std::vector<int> overlap_ids() const;
    Mesh local_mesh() const;
};

struct HppmTemplateSet {
    std::vector<PartTemplate> parts;
    std::vector<std::pair<int, int>> neighbors;  // (p, q) with p < q
    int dilation = 0;
    std::string merge_map_hash;
    Mesh body;  // whole-body template the parts were cut from

    int part_count() const { return static_cast<int>(parts.size()); }
    const PartTemplate& part(int id) const;
    bool adjacent(int p, int q) const;
    void validate() const;
};

/// Argmax over bones per vertex; ties go to the lowest bone index.
std::vector<int> raw_segment(const BlendWeights& w);

/// Throws DataError if a label is outside the map's domain.
std::vector<int> merge_segments(const std::vector<int>& labels, const MergeMap& map);

/// Vertices within graph distance `steps` of the mask.
VertexMask dilate_mask(const AdjacencyGraph& adj, const VertexMask& mask, int steps);

/// Builds a part from an explicit vertex selection. Local faces are the body
/// faces with all three corners inside `global_ids`. Overlaps are left empty.
PartTemplate make_part_template(const Mesh& body, int part_id, std::string name,
                                std::vector<int> global_ids, std::vector<int> core_ids);

/// Fills overlaps and the neighbor graph from pairwise id intersections.
void link_overlaps(HppmTemplateSet& set);

inline constexpr int kDefaultDilation = 5;

HppmTemplateSet build_templates(const Mesh& body, const BlendWeights& w, const MergeMap& map,
                                int steps = kDefaultDilation);

/// Sorted intersection of the two parts' vertex ids. Throws for p == q or bad ids.
std::vector<int> overlap_region(const HppmTemplateSet& set, int p, int q);

}  // namespace hppm
