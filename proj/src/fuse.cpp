#include "hppm/fuse.hpp"

#include <algorithm>

#include "hppm/error.hpp"

namespace hppm {

int TopologyDistances::at(const PartTemplate& part, int global_id) const
{
    const int local = part.local_index(global_id);
    if (local < 0)
        throw DataError("vertex " + std::to_string(global_id) + " is not in part " + part.name);
    return by_local[local];
}

TopologyDistances topology_distances(const PartTemplate& part)
{
    TopologyDistances out;
    out.part_id = part.part_id;
    const int n = part.vertex_count();
    std::vector<bool> in_overlap(n, false);
    for (int g : part.overlap_ids())
        in_overlap[part.local_index(g)] = true;

    std::vector<int> sources;
    for (int i = 0; i < n; ++i) {
        if (!in_overlap[i])
            sources.push_back(i);
    }
    const AdjacencyGraph adj = build_adjacency(n, part.local_faces);
    const std::vector<int> hops = bfs_distances(adj, sources);
    out.by_local.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!in_overlap[i])
            out.by_local[i] = TopologyDistances::kNotOverlap;
        else
            out.by_local[i] = hops[i] < 0 ? TopologyDistances::kUnreachable : hops[i];
    }
    return out;
}

std::vector<TopologyDistances> topology_distances(const HppmTemplateSet& set)
{
    std::vector<TopologyDistances> out;
    out.reserve(set.parts.size());
    for (const auto& part : set.parts)
        out.push_back(topology_distances(part));
    return out;
}

int FusedMesh::row_of(int template_id) const
{
    const auto it = std::lower_bound(template_ids.begin(), template_ids.end(), template_id);
    if (it == template_ids.end() || *it != template_id)
        return -1;
    return static_cast<int>(it - template_ids.begin());
}

namespace {

void check_input(const HppmTemplateSet& set, const FusionInput& input)
{
    if (static_cast<int>(input.part_vertices.size()) != set.part_count() ||
        static_cast<int>(input.visible.size()) != set.part_count())
        throw DataError("fusion input must cover every part");
    bool any = false;
    for (int p = 0; p < set.part_count(); ++p) {
        if (input.part_vertices[p].rows() != set.parts[p].vertex_count())
            throw DataError("decoded vertex count of part " + set.parts[p].name + " does not match its template");
        any = any || input.visible[p];
    }
    if (!any)
        throw DataError("fusion needs at least one visible part");
}

}  // namespace

FusedMesh gradual_connect(const HppmTemplateSet& set, std::span<const TopologyDistances> distances,
                          const FusionInput& input)
{
    check_input(set, input);
    if (static_cast<int>(distances.size()) != set.part_count())
        throw DataError("topology distances must cover every part");
    const int n = set.body.vertex_count();

    // Up to two visible owners per template vertex, with their local rows.
    struct Cover {
        int part[2] = {-1, -1};
        int local[2] = {-1, -1};
        int count = 0;
    };
    std::vector<Cover> cover(n);
    for (int p = 0; p < set.part_count(); ++p) {
        if (!input.visible[p])
            continue;
        const auto& ids = set.parts[p].global_ids;
        for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
            Cover& c = cover[ids[i]];
            if (c.count == 2)
                throw DataError("template vertex " + std::to_string(ids[i]) +
                                " is covered by more than two visible parts");
            c.part[c.count] = p;
            c.local[c.count] = i;
            ++c.count;
        }
    }

    FusedMesh out;
    std::vector<int> row(n, -1);
    for (int v = 0; v < n; ++v) {
        if (cover[v].count > 0) {
            row[v] = static_cast<int>(out.template_ids.size());
            out.template_ids.push_back(v);
        }
    }
    out.vertices.resize(static_cast<Eigen::Index>(out.template_ids.size()), 3);
    out.provenance.resize(out.template_ids.size());
    int sentinel_pairs = 0;
    for (int v = 0; v < n; ++v) {
        const Cover& c = cover[v];
        if (c.count == 0)
            continue;
        const int r = row[v];
        VertexProvenance& prov = out.provenance[r];
        const auto a = input.part_vertices[c.part[0]].row(c.local[0]);
        if (c.count == 1) {
            out.vertices.row(r) = a;
            prov.part_a = c.part[0];
            continue;
        }
        const auto b = input.part_vertices[c.part[1]].row(c.local[1]);
        const int da = distances[c.part[0]].by_local[c.local[0]];
        const int db = distances[c.part[1]].by_local[c.local[1]];
        double wa = 0.5, wb = 0.5;
        if (da == TopologyDistances::kUnreachable && db == TopologyDistances::kUnreachable) {
            ++sentinel_pairs;
        } else if (da == TopologyDistances::kUnreachable) {
            wa = 0.0;
            wb = 1.0;
        } else if (db == TopologyDistances::kUnreachable) {
            wa = 1.0;
            wb = 0.0;
        } else if (da + db > 0) {
            const double sum = static_cast<double>(da) + static_cast<double>(db);
            wa = static_cast<double>(db) / sum;
            wb = static_cast<double>(da) / sum;
        }
        // a + wb (b - a) == (a db + b da) / (da + db); this form returns a
        // bitwise when both copies agree.
        out.vertices.row(r) = a + wb * (b - a);
        prov = {c.part[0], c.part[1], wa, wb};
    }
    if (sentinel_pairs > 0)
        out.warnings.push_back(std::to_string(sentinel_pairs) +
                               " shared vertices had no reachable non-overlap vertex in either part; averaged 0.5/0.5");

    for (const Face& f : set.body.faces) {
        if (row[f[0]] >= 0 && row[f[1]] >= 0 && row[f[2]] >= 0)
            out.faces.push_back({row[f[0]], row[f[1]], row[f[2]]});
    }
    return out;
}

FusedMesh gradual_connect(const HppmTemplateSet& set, const FusionInput& input)
{
    const auto distances = topology_distances(set);
    return gradual_connect(set, distances, input);
}

std::vector<OverlapGap> overlap_residual(const HppmTemplateSet& set, const FusionInput& input)
{
    if (static_cast<int>(input.part_vertices.size()) != set.part_count() ||
        static_cast<int>(input.visible.size()) != set.part_count())
        throw DataError("overlap_residual input must cover every part");
    std::vector<OverlapGap> out;
    for (const auto& [p, q] : set.neighbors) {
        if (!input.visible[p] || !input.visible[q])
            continue;
        const auto& a = set.parts[p];
        const auto& b = set.parts[q];
        for (int g : a.overlap.at(q)) {
            const double gap = (input.part_vertices[p].row(a.local_index(g)) -
                                input.part_vertices[q].row(b.local_index(g)))
                                   .norm();
            out.push_back({g, p, q, gap});
        }
    }
    return out;
}

}  // namespace hppm
