#include "hppm/body_parts.hpp"

#include <string>

#include "hppm/error.hpp"

namespace hppm {

std::vector<int> part_joints(int part_id)
{
    using namespace joint;
    switch (part_id) {
    case 0: return {Pelvis, RightHip, LeftHip, Torso};
    case 1: return {LeftHip, LeftKnee};
    case 2: return {RightHip, RightKnee};
    case 3: return {LeftKnee, LeftAnkle};
    case 4: return {RightKnee, RightAnkle};
    case 5: return {Torso, Neck, LeftShoulder, RightShoulder};
    case 6: return {LeftAnkle};
    case 7: return {RightAnkle};
    case 8: return {Neck, Nose, Head};
    case 9: return {LeftShoulder, LeftElbow};
    case 10: return {RightShoulder, RightElbow};
    case 11: return {LeftElbow, LeftWrist};
    case 12: return {RightElbow, RightWrist};
    case 13: return {LeftWrist};
    case 14: return {RightWrist};
    default: throw DataError("invalid part id " + std::to_string(part_id));
    }
}

std::vector<std::vector<int>> joint_owners()
{
    std::vector<std::vector<int>> owners(kJointCount);
    for (int p = 0; p < kPartCount; ++p) {
        for (int j : part_joints(p))
            owners[j].push_back(p);
    }
    return owners;
}

int part_index(std::string_view name)
{
    for (int p = 0; p < kPartCount; ++p) {
        if (kPartNames[p] == name)
            return p;
    }
    throw DataError("unknown part name '" + std::string(name) + "'");
}

int joint_index(std::string_view name)
{
    for (int j = 0; j < kJointCount; ++j) {
        if (kJointNames[j] == name)
            return j;
    }
    throw DataError("unknown joint name '" + std::string(name) + "'");
}

}  // namespace hppm
