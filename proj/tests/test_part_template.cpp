#include <doctest.h>

#include <algorithm>
#include <set>

#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"
#include "hppm/part_template.hpp"
#include "support.hpp"

using namespace hppm;
using namespace hppm::test;

namespace {

BlendWeights rows(std::initializer_list<std::vector<double>> r)
{
    BlendWeights w;
    w.weights.resize(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    int i = 0;
    for (const auto& row : r) {
        for (std::size_t j = 0; j < row.size(); ++j)
            w.weights(i, static_cast<Eigen::Index>(j)) = row[j];
        ++i;
    }
    return w;
}

// 2 x cols grid of vertices, two triangles per cell. Vertex (r, c) has id c * 2 + r.
Mesh strip(int cols)
{
    Mesh m;
    m.vertices.resize(2 * cols, 3);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < 2; ++r)
            m.vertices.row(c * 2 + r) << c, r, 0;
    for (int c = 0; c + 1 < cols; ++c) {
        const int a = c * 2, b = c * 2 + 1, d = c * 2 + 2, e = c * 2 + 3;
        m.faces.push_back({a, d, b});
        m.faces.push_back({b, d, e});
    }
    return m;
}

BlendWeights one_hot(const std::vector<int>& labels, int bones)
{
    BlendWeights w;
    w.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), bones);
    for (std::size_t i = 0; i < labels.size(); ++i)
        w.weights(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return w;
}

MergeMap two_part_map()
{
    MergeMap m = MergeMap::identity(2);
    m.part_names = {"left", "right"};
    return m;
}

std::vector<int> mask_ids(const VertexMask& m)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i])
            out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace

TEST_CASE("raw_segment examples")
{
    CHECK(raw_segment(rows({{0.1, 0.7, 0.2}})) == std::vector<int>{1});
    CHECK(raw_segment(rows({{0.5, 0.5, 0.0}})) == std::vector<int>{0});
    CHECK(raw_segment(rows({{0.0, 0.5, 0.5}})) == std::vector<int>{1});
}

TEST_CASE("raw_segment matches a linear scan on 500 random rows")
{
    Rng rng(21);
    BlendWeights w;
    w.weights.resize(500, 23);
    for (int i = 0; i < 500; ++i) {
        for (int j = 0; j < 23; ++j)
            // Coarse values so ties actually happen.
            w.weights(i, j) = std::floor(uniform(rng, 0, 6));
        if (w.weights.row(i).sum() == 0.0)
            w.weights(i, 0) = 1.0;
        w.weights.row(i) /= w.weights.row(i).sum();
    }
    const auto labels = raw_segment(w);
    for (int i = 0; i < 500; ++i) {
        int best = 0;
        for (int j = 1; j < 23; ++j)
            if (w.weights(i, j) > w.weights(i, best))
                best = j;
        CHECK(labels[i] == best);
    }
}

TEST_CASE("raw_segment is invariant to rescaling a row")
{
    Rng rng(22);
    BlendWeights w;
    w.weights = Eigen::MatrixXd::Random(100, 8).cwiseAbs();
    for (int i = 0; i < 100; ++i)
        w.weights.row(i) /= w.weights.row(i).sum();
    const auto before = raw_segment(w);
    for (int i = 0; i < 100; ++i) {
        w.weights.row(i) *= uniform(rng, 0.01, 100);
        w.weights.row(i) /= w.weights.row(i).sum();
    }
    CHECK(raw_segment(w) == before);
}

TEST_CASE("blend weight validation")
{
    CHECK_THROWS_AS(rows({{0.5, 0.4}}).validate(), DataError);
    CHECK_THROWS_AS(rows({{1.5, -0.5}}).validate(), DataError);
    CHECK_NOTHROW(rows({{0.5, 0.5}}).validate());
}

TEST_CASE("merge_segments examples")
{
    MergeMap m;
    m.segment_to_part = {0, 0, 1};
    m.part_names = {"a", "b"};
    CHECK(merge_segments({0, 1, 2}, m) == std::vector<int>{0, 0, 1});
    CHECK(merge_segments({2, 1, 0, 2}, MergeMap::identity(3)) == std::vector<int>{2, 1, 0, 2});
    CHECK_THROWS_AS(merge_segments({3}, m), DataError);
    m.segment_to_part = {0, 0, 0};
    CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("default merge map leaves no empty part on the synthetic body")
{
    const auto& body = default_body();
    const MergeMap map = default_merge_map(body.spec());
    CHECK(map.part_count() == kPartCount);
    CHECK(map.segment_count() == 23);
    const auto labels = merge_segments(raw_segment(body.weights()), map);
    std::vector<int> counts(kPartCount, 0);
    for (int l : labels)
        ++counts[l];
    for (int p = 0; p < kPartCount; ++p) {
        CAPTURE(p);
        CHECK(counts[p] > 0);
        CHECK(map.part_names[p] == kPartNames[p]);
    }
}

TEST_CASE("merge map hash depends on content")
{
    MergeMap a = MergeMap::identity(3);
    MergeMap b = a;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.segment_to_part = {0, 2, 1};
    CHECK(a.hash() != b.hash());
}

TEST_CASE("dilate_mask on a path graph")
{
    AdjacencyGraph path;
    path.neighbors = {{1}, {0, 2}, {1, 3}, {2, 4}, {3}};
    const VertexMask seed{true, false, false, false, false};
    CHECK(dilate_mask(path, seed, 0) == seed);
    CHECK(mask_ids(dilate_mask(path, seed, 2)) == std::vector<int>{0, 1, 2});
    CHECK(mask_ids(dilate_mask(path, seed, 4)) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(dilate_mask(path, seed, -1), DataError);
}

TEST_CASE("dilate_mask equals bfs distance threshold and is monotone")
{
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        const Mesh m = random_mesh(rng, 60, 50);
        const auto adj = build_adjacency(m);
        VertexMask mask(60, false);
        std::vector<int> sources;
        for (int i = 0; i < 60; ++i)
            if (uniform(rng, 0, 1) < 0.1) {
                mask[i] = true;
                sources.push_back(i);
            }
        const auto dist = bfs_distances(adj, sources);
        VertexMask prev = mask;
        for (int n = 0; n <= 6; ++n) {
            const VertexMask d = dilate_mask(adj, mask, n);
            for (int i = 0; i < 60; ++i) {
                CHECK(d[i] == (dist[i] >= 0 && dist[i] <= n));
                if (prev[i])
                    CHECK(d[i]);
            }
            prev = d;
        }
        // Diameter-sized dilation covers exactly the reachable component.
        const VertexMask all = dilate_mask(adj, mask, 60);
        for (int i = 0; i < 60; ++i)
            CHECK(all[i] == (dist[i] >= 0));
    }
}

TEST_CASE("build_templates with no dilation is a plain partition")
{
    const Mesh m = strip(10);
    std::vector<int> labels(20);
    for (int v = 0; v < 20; ++v)
        labels[v] = v / 2 < 5 ? 0 : 1;
    const auto set = build_templates(m, one_hot(labels, 2), two_part_map(), 0);
    CHECK(set.neighbors.empty());
    CHECK(set.parts[0].overlap.empty());
    CHECK(overlap_region(set, 0, 1).empty());
    CHECK(set.parts[0].global_ids == set.parts[0].core_ids);
}

TEST_CASE("two-part strip overlap matches a bfs oracle")
{
    const Mesh m = strip(10);
    std::vector<int> labels(20);
    for (int v = 0; v < 20; ++v)
        labels[v] = v / 2 < 5 ? 0 : 1;
    for (int n = 1; n <= 3; ++n) {
        CAPTURE(n);
        const auto set = build_templates(m, one_hot(labels, 2), two_part_map(), n);
        const auto adj = build_adjacency(m);
        std::vector<int> core0, core1;
        for (int v = 0; v < 20; ++v)
            (labels[v] == 0 ? core0 : core1).push_back(v);
        const auto d0 = bfs_distances(adj, core0), d1 = bfs_distances(adj, core1);
        std::vector<int> oracle;
        for (int v = 0; v < 20; ++v)
            if (d0[v] <= n && d1[v] <= n)
                oracle.push_back(v);
        CHECK(overlap_region(set, 0, 1) == oracle);
        CHECK(set.parts[0].overlap.at(1) == oracle);
        CHECK(set.neighbors == std::vector<std::pair<int, int>>{{0, 1}});
    }
    // With one step the overlap is the two boundary columns.
    const auto set = build_templates(m, one_hot(labels, 2), two_part_map(), 1);
    CHECK(overlap_region(set, 0, 1) == std::vector<int>{8, 9, 10, 11});
}

TEST_CASE("empty part after merging is an error")
{
    const Mesh m = strip(3);
    MergeMap map = MergeMap::identity(3);
    map.part_names = {"a", "b", "c"};
    CHECK_THROWS_AS(build_templates(m, one_hot({0, 0, 1, 1, 0, 1}, 3), map, 1), DataError);
}

TEST_CASE("default templates satisfy the structural invariants")
{
    const auto& set = default_templates();
    const Mesh& body = set.body;
    CHECK(set.dilation == kDefaultDilation);
    CHECK(set.part_count() == kPartCount);
    CHECK_NOTHROW(set.validate());

    std::vector<int> owner(body.vertex_count(), 0);
    int core_total = 0;
    for (const auto& part : set.parts) {
        core_total += static_cast<int>(part.core_ids.size());
        for (int v : part.core_ids)
            ++owner[v];
        CHECK(std::includes(part.global_ids.begin(), part.global_ids.end(), part.core_ids.begin(),
                            part.core_ids.end()));
        CHECK(part.template_vertices.rows() == part.vertex_count());
    }
    CHECK(core_total == body.vertex_count());
    CHECK(std::all_of(owner.begin(), owner.end(), [](int c) { return c == 1; }));

    std::set<Face> body_faces;
    for (Face f : body.faces) {
        std::sort(f.begin(), f.end());
        body_faces.insert(f);
    }
    for (const auto& part : set.parts) {
        for (const Face& lf : part.local_faces) {
            Face g{part.global_ids[lf[0]], part.global_ids[lf[1]], part.global_ids[lf[2]]};
            std::sort(g.begin(), g.end());
            CHECK(body_faces.count(g) == 1);
        }
        for (int i = 0; i < part.vertex_count(); ++i)
            CHECK(part.template_vertices.row(i) == body.vertices.row(part.global_ids[i]));
    }

    for (int p = 0; p < set.part_count(); ++p) {
        for (int q = 0; q < set.part_count(); ++q) {
            if (p == q) {
                CHECK_THROWS_AS(overlap_region(set, p, q), DataError);
                continue;
            }
            const auto pq = overlap_region(set, p, q);
            CHECK(pq == overlap_region(set, q, p));
            std::vector<int> oracle;
            const auto& a = set.parts[p].global_ids;
            const auto& b = set.parts[q].global_ids;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(oracle));
            CHECK(pq == oracle);
            CHECK(set.adjacent(p, q) == !oracle.empty());
            CHECK(set.adjacent(p, q) == set.adjacent(q, p));
        }
    }
    CHECK_THROWS_AS(overlap_region(set, 0, kPartCount), DataError);
}

TEST_CASE("random part selections: overlap equals set intersection")
{
    Rng rng(24);
    const Mesh m = random_mesh(rng, 40, 60);
    for (int t = 0; t < 20; ++t) {
        HppmTemplateSet set;
        set.body = m;
        for (int p = 0; p < 3; ++p) {
            std::vector<int> ids;
            for (int v = 0; v < 40; ++v)
                if (uniform(rng, 0, 1) < 0.4)
                    ids.push_back(v);
            set.parts.push_back(make_part_template(m, p, "p" + std::to_string(p), ids, {}));
        }
        link_overlaps(set);
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                std::vector<int> oracle;
                for (int v : set.parts[p].global_ids)
                    if (std::binary_search(set.parts[q].global_ids.begin(), set.parts[q].global_ids.end(), v))
                        oracle.push_back(v);
                CHECK(overlap_region(set, p, q) == oracle);
            }
    }
}

TEST_CASE("merge map file round trip")
{
    const auto dir = fresh_dir("merge_map");
    const MergeMap map = default_merge_map(default_body().spec());
    save_merge_map(map, dir / "m.json");
    const MergeMap back = load_merge_map(dir / "m.json");
    CHECK(back.segment_to_part == map.segment_to_part);
    CHECK(back.part_names == map.part_names);
    CHECK(back.hash() == map.hash());
    CHECK_THROWS_AS(load_merge_map(dir / "missing.json"), ConfigError);
}
