#pragma once

#include <string>
#include <utility>

#include "hiref/dataset.hpp"

namespace hiref {

enum class Family { Checkerboard, MafMoonsRings, HalfmoonScurve };

Family family_from_name(const std::string& name);
const char* family_name(Family f);

/// Optional rigid transform applied to the generated target set.
struct PointTransform {
    double rotation = 0.0;  // radians
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
};

struct SyntheticSpec {
    Family family = Family::Checkerboard;
    Index n = 0;
    std::uint64_t seed = 0;
    PointTransform transform;
};

/// Seeded source/target pair for one synthetic benchmark family.
/// Checkerboard: uniform squares on the two center lattices. MAF moons to
/// rings: warped Gaussian crescent onto noisy concentric rings. Half-moon to
/// S-curve: the standard parametric shapes, the S-curve projected to 2-D by
/// dropping its flat axis.
std::pair<Dataset, Dataset> generate(const SyntheticSpec& spec);

}  // namespace hiref
