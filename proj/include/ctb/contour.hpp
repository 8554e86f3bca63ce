#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "ctb/types.hpp"

namespace ctb {

struct Polyline {
    std::vector<std::pair<double, double>> pts;
};

using GridMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Marching-squares zero-level extraction of f sampled on the tensor grid
/// xs x ys (f is xs.size() rows by ys.size() cols). Cells touching an invalid
/// node (mask 0 or non-finite value) are skipped. Segments are chained into
/// polylines through exact edge identifiers, so no coordinate snapping is needed.
inline std::vector<Polyline> zero_contours(const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           const Eigen::MatrixXd& f,
                                           const GridMask* valid = nullptr) {
    const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
    auto ok = [&](int i, int j) {
        if (!std::isfinite(f(i, j))) return false;
        return !valid || (*valid)(i, j) != 0;
    };
    auto neg = [&](int i, int j) { return f(i, j) < 0.0; };

    // edge ids: horizontal (between (i,j)-(i+1,j)) even, vertical odd
    auto hedge = [&](int i, int j) { return static_cast<long>(i * ny + j) * 2; };
    auto vedge = [&](int i, int j) { return static_cast<long>(i * ny + j) * 2 + 1; };
    std::map<long, std::pair<double, double>> points;
    auto cross_h = [&](int i, int j) {
        const double t = f(i, j) / (f(i, j) - f(i + 1, j));
        points[hedge(i, j)] = {xs[i] + t * (xs[i + 1] - xs[i]), ys[j]};
        return hedge(i, j);
    };
    auto cross_v = [&](int i, int j) {
        const double t = f(i, j) / (f(i, j) - f(i, j + 1));
        points[vedge(i, j)] = {xs[i], ys[j] + t * (ys[j + 1] - ys[j])};
        return vedge(i, j);
    };

    std::vector<std::pair<long, long>> segments;
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
            if (!ok(i, j) || !ok(i + 1, j) || !ok(i, j + 1) || !ok(i + 1, j + 1)) continue;
            std::vector<long> cut;
            if (neg(i, j) != neg(i + 1, j)) cut.push_back(cross_h(i, j));
            if (neg(i, j + 1) != neg(i + 1, j + 1)) cut.push_back(cross_h(i, j + 1));
            if (neg(i, j) != neg(i, j + 1)) cut.push_back(cross_v(i, j));
            if (neg(i + 1, j) != neg(i + 1, j + 1)) cut.push_back(cross_v(i + 1, j));
            if (cut.size() == 2) {
                segments.emplace_back(cut[0], cut[1]);
            } else if (cut.size() == 4) {
                // saddle cell: resolve the pairing with the centre sample
                const double centre =
                    0.25 * (f(i, j) + f(i + 1, j) + f(i, j + 1) + f(i + 1, j + 1));
                const bool c_neg = centre < 0.0;
                if (neg(i, j) == c_neg) {
                    segments.emplace_back(cut[0], cut[3]);
                    segments.emplace_back(cut[1], cut[2]);
                } else {
                    segments.emplace_back(cut[0], cut[2]);
                    segments.emplace_back(cut[1], cut[3]);
                }
            }
        }

    // chain segments through shared edge ids
    std::multimap<long, std::size_t> at_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        at_edge.emplace(segments[s].first, s);
        at_edge.emplace(segments[s].second, s);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<Polyline> out;
    auto walk = [&](std::size_t s0) {
        std::vector<long> chain{segments[s0].first, segments[s0].second};
        used[s0] = true;
        for (int dir = 0; dir < 2; ++dir) {
            while (true) {
                const long tip = dir == 0 ? chain.back() : chain.front();
                std::size_t next = segments.size();
                auto [lo, hi] = at_edge.equal_range(tip);
                for (auto it = lo; it != hi; ++it)
                    if (!used[it->second]) next = it->second;
                if (next == segments.size()) break;
                used[next] = true;
                const long other =
                    segments[next].first == tip ? segments[next].second : segments[next].first;
                if (dir == 0)
                    chain.push_back(other);
                else
                    chain.insert(chain.begin(), other);
            }
        }
        Polyline pl;
        pl.pts.reserve(chain.size());
        for (long e : chain) pl.pts.push_back(points.at(e));
        out.push_back(std::move(pl));
    };
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (!used[s]) walk(s);
    return out;
}

}  // namespace ctb
