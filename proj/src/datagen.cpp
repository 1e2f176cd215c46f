#include "hiref/datagen.hpp"

#include <cmath>

#include "hiref/errors.hpp"
#include "hiref/rng.hpp"

namespace hiref {

namespace {

constexpr double kPi = 3.14159265358979323846;

RowMat checkerboard_points(Index n, Rng& rng, bool source) {
    static const double src_centers[5][2] = {{0, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    static const double tgt_centers[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    RowMat pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double* c = source ? src_centers[rng.next_below(5)] : tgt_centers[rng.next_below(4)];
        pts(i, 0) = c[0] + rng.next_uniform(-0.5, 0.5);
        pts(i, 1) = c[1] + rng.next_uniform(-0.5, 0.5);
    }
    return pts;
}

RowMat maf_moons_points(Index n, Rng& rng) {
    RowMat pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double x1 = rng.next_normal();
        const double x2 = rng.next_normal();
        pts(i, 0) = 0.5 * (x1 + x2 * x2) - 5.0;
        pts(i, 1) = x2;
    }
    return pts;
}

RowMat rings_points(Index n, Rng& rng) {
    static const double radii[4] = {0.25, 0.55, 0.9, 1.2};
    const double sigma = 0.08;
    RowMat pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double r = 3.0 * radii[rng.next_below(4)];
        const double theta = rng.next_uniform(0.0, 2.0 * kPi);
        pts(i, 0) = r * std::cos(theta) + sigma * rng.next_normal();
        pts(i, 1) = r * std::sin(theta) + sigma * rng.next_normal();
    }
    return pts;
}

RowMat halfmoon_points(Index n, Rng& rng) {
    const double sigma = 0.05;
    const Index n_outer = (n + 1) / 2;
    RowMat pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double t = rng.next_uniform(0.0, kPi);
        if (i < n_outer) {
            pts(i, 0) = std::cos(t);
            pts(i, 1) = std::sin(t);
        } else {
            pts(i, 0) = 1.0 - std::cos(t);
            pts(i, 1) = 0.5 - std::sin(t);
        }
        pts(i, 0) += sigma * rng.next_normal();
        pts(i, 1) += sigma * rng.next_normal();
    }
    return pts;
}

RowMat scurve_points(Index n, Rng& rng) {
    // 3-D S-curve with the flat (extruded) axis dropped.
    const double sigma = 0.05;
    RowMat pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double t = 1.5 * kPi * (rng.next_uniform() - 0.5) * 2.0;
        pts(i, 0) = std::sin(t) + sigma * rng.next_normal();
        pts(i, 1) = (t >= 0.0 ? 1.0 : -1.0) * (std::cos(t) - 1.0) + sigma * rng.next_normal();
    }
    return pts;
}

void apply_transform(RowMat& pts, const PointTransform& tf) {
    const double c = std::cos(tf.rotation), s = std::sin(tf.rotation);
    for (Index i = 0; i < pts.rows(); ++i) {
        const double x = tf.scale * pts(i, 0), y = tf.scale * pts(i, 1);
        pts(i, 0) = c * x - s * y + tf.tx;
        pts(i, 1) = s * x + c * y + tf.ty;
    }
}

}  // namespace

Family family_from_name(const std::string& name) {
    if (name == "checkerboard") return Family::Checkerboard;
    if (name == "maf_moons_rings") return Family::MafMoonsRings;
    if (name == "halfmoon_scurve") return Family::HalfmoonScurve;
    throw SpecError("unknown dataset family '" + name + "'");
}

const char* family_name(Family f) {
    switch (f) {
        case Family::Checkerboard: return "checkerboard";
        case Family::MafMoonsRings: return "maf_moons_rings";
        case Family::HalfmoonScurve: return "halfmoon_scurve";
    }
    return "?";
}

std::pair<Dataset, Dataset> generate(const SyntheticSpec& spec) {
    if (spec.n < 1) throw SpecError("n must be >= 1");
    Rng rng_src(mix_seed(spec.seed, 0x73726301ULL));
    Rng rng_tgt(mix_seed(spec.seed, 0x74677402ULL));
    RowMat src, tgt;
    switch (spec.family) {
        case Family::Checkerboard:
            src = checkerboard_points(spec.n, rng_src, true);
            tgt = checkerboard_points(spec.n, rng_tgt, false);
            break;
        case Family::MafMoonsRings:
            src = maf_moons_points(spec.n, rng_src);
            tgt = rings_points(spec.n, rng_tgt);
            break;
        case Family::HalfmoonScurve:
            src = halfmoon_points(spec.n, rng_src);
            tgt = scurve_points(spec.n, rng_tgt);
            break;
    }
    apply_transform(tgt, spec.transform);
    return {Dataset(std::move(src)), Dataset(std::move(tgt))};
}

}  // namespace hiref
