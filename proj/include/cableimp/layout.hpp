#pragma once

// Global unknown numbering: (conductor, contour, harmonic n) -> row.
// Per conductor: inner-contour harmonics -N..N first (hollow only), then
// outer-contour harmonics -N..N.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace cableimp {

struct HarmonicLayout {
    struct Row {
        int conductor;
        bool inner;
        int n;
        double radius;
        cplx center;
    };
    std::vector<Row> rows;
    std::vector<int> offset;  // first row of each conductor
    std::vector<int> order;   // N_p per conductor
    std::vector<bool> hollow;

    int size() const { return int(rows.size()); }
    int conductors() const { return int(order.size()); }

    int index(int p, bool inner, int n) const {
        const int N = order.at(p);
        if (n < -N || n > N || (inner && !hollow[p])) throw std::out_of_range("layout index");
        const int base = offset[p] + ((hollow[p] && !inner) ? (2 * N + 1) : 0);
        return base + n + N;
    }

    int max_order() const {
        int m = 0;
        for (int n : order) m = std::max(m, n);
        return m;
    }
};

inline HarmonicLayout make_layout(const CableSystem& sys) {
    HarmonicLayout L;
    for (std::size_t p = 0; p < sys.size(); ++p) {
        const auto& c = sys.conductors[p];
        const int N = c.order;
        L.offset.push_back(L.size());
        L.order.push_back(N);
        L.hollow.push_back(c.hollow());
        if (c.hollow())
            for (int n = -N; n <= N; ++n) L.rows.push_back({int(p), true, n, c.inner_radius, c.center()});
        for (int n = -N; n <= N; ++n) L.rows.push_back({int(p), false, n, c.outer_radius, c.center()});
    }
    return L;
}

}  // namespace cableimp
