#include "hppm/part_template.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hppm/error.hpp"

namespace hppm {

void BlendWeights::validate() const
{
    if (bone_count() < 1)
        throw DataError("blend weights need at least one bone");
    if (!weights.allFinite())
        throw DataError("blend weights contain non-finite values");
    for (int i = 0; i < vertex_count(); ++i) {
        if ((weights.row(i).array() < 0.0).any())
            throw DataError("negative blend weight at vertex " + std::to_string(i));
        if (std::abs(weights.row(i).sum() - 1.0) > 1e-6)
            throw DataError("blend weights of vertex " + std::to_string(i) + " do not sum to 1");
    }
}

void MergeMap::validate() const
{
    if (part_names.empty())
        throw DataError("merge map has no parts");
    std::vector<int> used(part_names.size(), 0);
    for (std::size_t s = 0; s < segment_to_part.size(); ++s) {
        const int p = segment_to_part[s];
        if (p < 0 || p >= part_count())
            throw DataError("merge map sends segment " + std::to_string(s) + " to invalid part " +
                            std::to_string(p));
        used[p] = 1;
    }
    for (int p = 0; p < part_count(); ++p) {
        if (!used[p])
            throw DataError("merge map leaves part '" + part_names[p] + "' without segments");
    }
    if (!segment_names.empty() && segment_names.size() != segment_to_part.size())
        throw DataError("merge map segment_names length does not match segment_to_part");
}

std::string MergeMap::hash() const
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (int p : segment_to_part)
        mix(std::to_string(p) + ",");
    for (const auto& n : part_names)
        mix(n + ";");
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

MergeMap MergeMap::identity(int segments)
{
    MergeMap m;
    for (int s = 0; s < segments; ++s) {
        m.segment_to_part.push_back(s);
        m.part_names.push_back("part_" + std::to_string(s));
    }
    return m;
}

MergeMap load_merge_map(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open merge map " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        MergeMap m;
        m.part_names = j.at("part_names").get<std::vector<std::string>>();
        m.segment_to_part = j.at("segment_to_part").get<std::vector<int>>();
        if (j.contains("segment_names"))
            m.segment_names = j.at("segment_names").get<std::vector<std::string>>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed merge map " + path.string() + ": " + e.what());
    }
}

void save_merge_map(const MergeMap& map, const std::filesystem::path& path)
{
    nlohmann::ordered_json j;
    j["part_names"] = map.part_names;
    j["segment_to_part"] = map.segment_to_part;
    if (!map.segment_names.empty())
        j["segment_names"] = map.segment_names;
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

int PartTemplate::local_index(int global_id) const
{
    const auto it = std::lower_bound(global_ids.begin(), global_ids.end(), global_id);
    if (it == global_ids.end() || *it != global_id)
        return -1;
    return static_cast<int>(it - global_ids.begin());
}

std::vector<int> PartTemplate::overlap_ids() const
{
    std::vector<int> ids;
    for (const auto& [q, shared] : overlap)
        ids.insert(ids.end(), shared.begin(), shared.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

Mesh PartTemplate::local_mesh() const
{
    return Mesh{template_vertices, local_faces};
}

const PartTemplate& HppmTemplateSet::part(int id) const
{
    if (id < 0 || id >= part_count())
        throw DataError("invalid part id " + std::to_string(id));
    return parts[id];
}

bool HppmTemplateSet::adjacent(int p, int q) const
{
    const auto key = std::minmax(p, q);
    return std::binary_search(neighbors.begin(), neighbors.end(), std::pair<int, int>(key.first, key.second));
}

void HppmTemplateSet::validate() const
{
    const int n = body.vertex_count();
    std::vector<int> owner(n, -1);
    for (const auto& part : parts) {
        if (!std::is_sorted(part.global_ids.begin(), part.global_ids.end()) ||
            !std::is_sorted(part.core_ids.begin(), part.core_ids.end()))
            throw DataError("part " + part.name + " has unsorted vertex ids");
        for (int v : part.core_ids) {
            if (v < 0 || v >= n)
                throw DataError("part " + part.name + " references vertex out of range");
            if (owner[v] >= 0)
                throw DataError("vertex " + std::to_string(v) + " is in the core of two parts");
            owner[v] = part.part_id;
            if (part.local_index(v) < 0)
                throw DataError("core vertex missing from global ids in part " + part.name);
        }
        if (part.template_vertices.rows() != part.vertex_count())
            throw DataError("part " + part.name + " template vertex count mismatch");
        for (const auto& [q, shared] : part.overlap) {
            for (int v : shared) {
                if (part.local_index(v) < 0 || parts.at(q).local_index(v) < 0)
                    throw DataError("overlap vertex not shared by both parts");
            }
        }
    }
    for (int v = 0; v < n; ++v) {
        if (owner[v] < 0)
            throw DataError("vertex " + std::to_string(v) + " belongs to no part core");
    }
}

std::vector<int> raw_segment(const BlendWeights& w)
{
    std::vector<int> labels(w.vertex_count());
    for (int i = 0; i < w.vertex_count(); ++i) {
        int best = 0;
        for (int j = 1; j < w.bone_count(); ++j) {
            if (w.weights(i, j) > w.weights(i, best))
                best = j;
        }
        labels[i] = best;
    }
    return labels;
}

std::vector<int> merge_segments(const std::vector<int>& labels, const MergeMap& map)
{
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int s = labels[i];
        if (s < 0 || s >= map.segment_count())
            throw DataError("segment " + std::to_string(s) + " is not in the merge map");
        out[i] = map.segment_to_part[s];
    }
    return out;
}

VertexMask dilate_mask(const AdjacencyGraph& adj, const VertexMask& mask, int steps)
{
    if (steps < 0)
        throw DataError("dilation steps must be >= 0");
    if (static_cast<int>(mask.size()) != adj.vertex_count())
        throw DataError("mask size does not match graph");
    VertexMask out = mask;
    std::vector<int> frontier;
    for (int v = 0; v < adj.vertex_count(); ++v) {
        if (mask[v])
            frontier.push_back(v);
    }
    for (int s = 0; s < steps && !frontier.empty(); ++s) {
        std::vector<int> next;
        for (int v : frontier) {
            for (int w : adj.neighbors[v]) {
                if (!out[w]) {
                    out[w] = true;
                    next.push_back(w);
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

PartTemplate make_part_template(const Mesh& body, int part_id, std::string name,
                                std::vector<int> global_ids, std::vector<int> core_ids)
{
    std::sort(global_ids.begin(), global_ids.end());
    std::sort(core_ids.begin(), core_ids.end());
    PartTemplate t;
    t.part_id = part_id;
    t.name = std::move(name);
    t.global_ids = std::move(global_ids);
    t.core_ids = std::move(core_ids);
    t.template_vertices.resize(t.vertex_count(), 3);
    std::vector<int> local(body.vertex_count(), -1);
    for (int i = 0; i < t.vertex_count(); ++i) {
        const int g = t.global_ids[i];
        if (g < 0 || g >= body.vertex_count())
            throw DataError("part vertex id out of range");
        local[g] = i;
        t.template_vertices.row(i) = body.vertices.row(g);
    }
    for (const Face& f : body.faces) {
        const int a = local[f[0]], b = local[f[1]], c = local[f[2]];
        if (a >= 0 && b >= 0 && c >= 0)
            t.local_faces.push_back({a, b, c});
    }
    return t;
}

void link_overlaps(HppmTemplateSet& set)
{
    set.neighbors.clear();
    for (auto& part : set.parts)
        part.overlap.clear();
    for (int p = 0; p < set.part_count(); ++p) {
        for (int q = p + 1; q < set.part_count(); ++q) {
            const auto& a = set.parts[p].global_ids;
            const auto& b = set.parts[q].global_ids;
            std::vector<int> shared;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
            if (shared.empty())
                continue;
            set.parts[p].overlap[q] = shared;
            set.parts[q].overlap[p] = std::move(shared);
            set.neighbors.emplace_back(p, q);
        }
    }
}

HppmTemplateSet build_templates(const Mesh& body, const BlendWeights& w, const MergeMap& map, int steps)
{
    body.validate();
    w.validate();
    map.validate();
    if (w.vertex_count() != body.vertex_count())
        throw DataError("blend weights have " + std::to_string(w.vertex_count()) +
                        " rows but the body has " + std::to_string(body.vertex_count()) + " vertices");
    if (w.bone_count() != map.segment_count())
        throw DataError("merge map covers " + std::to_string(map.segment_count()) +
                        " segments but blend weights have " + std::to_string(w.bone_count()) + " bones");

    const std::vector<int> labels = merge_segments(raw_segment(w), map);
    const AdjacencyGraph adj = build_adjacency(body);

    HppmTemplateSet set;
    set.dilation = steps;
    set.merge_map_hash = map.hash();
    set.body = body;
    for (int p = 0; p < map.part_count(); ++p) {
        VertexMask core(body.vertex_count(), false);
        std::vector<int> core_ids;
        for (int v = 0; v < body.vertex_count(); ++v) {
            if (labels[v] == p) {
                core[v] = true;
                core_ids.push_back(v);
            }
        }
        if (core_ids.empty())
            throw DataError("part '" + map.part_names[p] + "' is empty after merging");
        const VertexMask dilated = dilate_mask(adj, core, steps);
        std::vector<int> ids;
        for (int v = 0; v < body.vertex_count(); ++v) {
            if (dilated[v])
                ids.push_back(v);
        }
        set.parts.push_back(make_part_template(body, p, map.part_names[p], std::move(ids), std::move(core_ids)));
    }
    link_overlaps(set);
    return set;
}

std::vector<int> overlap_region(const HppmTemplateSet& set, int p, int q)
{
    if (p == q)
        throw DataError("overlap_region needs two distinct parts");
    const auto& a = set.part(p);
    const auto& b = set.part(q);
    std::vector<int> shared;
    std::set_intersection(a.global_ids.begin(), a.global_ids.end(), b.global_ids.begin(),
                          b.global_ids.end(), std::back_inserter(shared));
    return shared;
}

}  // namespace hppm
