#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace hppm {

inline constexpr int kPartCount = 15;
inline constexpr int kJointCount = 17;

/// Part names in model order.
inline constexpr std::array<std::string_view, kPartCount> kPartNames = {
    "Abdomen",        "Left Thigh",      "Right Thigh",  "Left Calf",     "Right Calf",
    "Chest",          "Left Foot",       "Right Foot",   "Head",          "Left Upper Arm",
    "Right Upper Arm", "Left Forearm",   "Right Forearm", "Left Hand",    "Right Hand",
};

/// Evaluation joint set (17 joints).
inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Pelvis",        "Right Hip",   "Right Knee",  "Right Ankle",    "Left Hip",   "Left Knee",
    "Left Ankle",    "Torso",       "Neck",        "Nose",           "Head",       "Left Shoulder",
    "Left Elbow",    "Left Wrist",  "Right Shoulder", "Right Elbow", "Right Wrist",
};

namespace joint {
inline constexpr int Pelvis = 0, RightHip = 1, RightKnee = 2, RightAnkle = 3, LeftHip = 4,
                     LeftKnee = 5, LeftAnkle = 6, Torso = 7, Neck = 8, Nose = 9, Head = 10,
                     LeftShoulder = 11, LeftElbow = 12, LeftWrist = 13, RightShoulder = 14,
                     RightElbow = 15, RightWrist = 16;
}

/// Joints regressed by each part, indices into kJointNames.
/// Feet own the ankle on their own side.
std::vector<int> part_joints(int part_id);

/// For every joint, the parts whose regressor produces it.
std::vector<std::vector<int>> joint_owners();

int part_index(std::string_view name);
int joint_index(std::string_view name);

}  // namespace hppm
