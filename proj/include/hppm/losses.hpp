#pragma once

#include <vector>

#include "hppm/geom.hpp"
#include "hppm/part_template.hpp"
#include "hppm/shape_model.hpp"

namespace hppm {

using Visibility = std::vector<bool>;

struct LossWeights {
    double vertex = 2.5;
    double joint3d = 1250.0;
    double joint2d = 2500.0;
    double shape = 100.0;
    double rotation = 200.0;
    double translation = 500.0;
    double overlap = 100.0;
    double depth = 1.0;

    void validate() const;
};

struct LossBreakdown {
    double vertex = 0.0;
    double joint3d = 0.0;
    double joint2d = 0.0;
    double shape = 0.0;
    double rotation = 0.0;
    double translation = 0.0;
    double overlap = 0.0;
    double depth = 0.0;
    double divide = 0.0;  // weighted sum of the six supervised terms
    double fusion = 0.0;  // weighted overlap + depth terms
    double total = 0.0;
};

/// One part's prediction or ground truth: world vertices, regressed joints,
/// and the parameters that produced them.
struct PartSample {
    Points3 vertices;
    Points3 joints;
    PartState state;
};

/// Sum over visible parts of per-vertex l2 distances (meters).
double loss_vertex(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const Visibility& vis);
double loss_joint3d(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const Visibility& vis);
/// Same as loss_joint3d after pinhole projection (pixels).
double loss_joint2d(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const CameraIntrinsics& cam,
                    const Visibility& vis);

struct ParamLosses {
    double shape = 0.0;
    double rotation = 0.0;  // on 6D representations
    double translation = 0.0;
};
ParamLosses loss_params(const std::vector<PartState>& pred, const std::vector<PartState>& gt, const Visibility& vis);

enum class OverlapMean {
    PerVertex,      // midpoint of the two copies of each shared vertex (default)
    RegionCentroid, // one centroid over both copies of the whole shared region
};

double loss_overlap(const std::vector<Points3>& parts, const HppmTemplateSet& set, const Visibility& vis,
                    OverlapMean mean = OverlapMean::PerVertex);

/// Sum of |z - mean z| over every vertex of every visible part.
double loss_depth_consistency(const std::vector<Points3>& parts, const Visibility& vis);

struct LossInputs {
    const std::vector<PartSample>& pred;
    const std::vector<PartSample>& gt;
    const HppmTemplateSet& templates;
    CameraIntrinsics camera;
    Visibility visible;
    OverlapMean overlap_mean = OverlapMean::PerVertex;
};

LossBreakdown total_loss(const LossInputs& in, const LossWeights& weights = {});

}  // namespace hppm
