#include "mosaic/volume.hpp"

#include <cmath>

namespace mosaic {

const OrganTable& btcv_organ_table() {
    static const OrganTable table = {
        {0, "background"},
        {1, "spleen"},
        {2, "right kidney"},
        {3, "left kidney"},
        {4, "gallbladder"},
        {5, "esophagus"},
        {6, "liver"},
        {7, "stomach"},
        {8, "aorta"},
        {9, "inferior vena cava"},
        {10, "portal vein"},
        {11, "pancreas"},
        {12, "right adrenal gland"},
        {13, "left adrenal gland"},
    };
    return table;
}

const std::string& organ_name(const OrganTable& table, int id) {
    auto it = table.find(id);
    if (it == table.end()) throw UnknownOrgan("unknown organ id " + std::to_string(id));
    return it->second;
}

std::string orientation_code(const Affine4& affine) {
    // Dominant world direction of each voxel axis.
    static const char* pos = "RAS";
    static const char* neg = "LPI";
    std::string code;
    for (int axis = 0; axis < 3; ++axis) {
        Eigen::Vector3d dir = affine.block<3, 1>(0, axis);
        int dom = 0;
        dir.cwiseAbs().maxCoeff(&dom);
        code += (dir[dom] >= 0 ? pos : neg)[dom];
    }
    return code;
}

}  // namespace mosaic
