#include "inslab/theorylab/fixtures.hpp"

#include "inslab/planning/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inslab::theorylab {

TwoBitMdp make_two_bit_mdp(double p_high) {
    using planning::Grid;
    using planning::GridDim;
    using planning::SparseRow;
    using planning::TabularMDP;

    Grid grid({GridDim{-0.5, 1.5, 2}, GridDim{-0.5, 1.5, 2}});  // centers 0, 1
    const int n_cells = grid.size();                            // 4
    const int offset = n_cells;

    TabularMDP mdp(2 * n_cells, 2, 1.0);
    mdp.set_next_offset(offset);
    for (int c = 0; c < n_cells; ++c) mdp.set_terminal(offset + c, true);

    const auto cell = [&](int b1, int b2) {
        return static_cast<std::int32_t>(offset + grid.from_coords({b1, b2}));
    };
    for (int s = 0; s < n_cells; ++s) {
        // Action 0: perfectly correlated bits; action 1: independent fair bits.
        SparseRow a0;
        a0.idx = {cell(0, 0), cell(1, 1)};
        a0.prob = {1.0 - p_high, p_high};
        mdp.set_row(s, 0, a0);
        SparseRow a1;
        a1.idx = {cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1)};
        a1.prob = {0.25, 0.25, 0.25, 0.25};
        mdp.set_row(s, 1, a1);
    }

    std::vector<double> match(static_cast<std::size_t>(2 * n_cells), 0.0);
    std::vector<double> s1(static_cast<std::size_t>(2 * n_cells), 0.0);
    for (int c = 0; c < n_cells; ++c) {
        const auto coords = grid.coords(c);
        match[static_cast<std::size_t>(offset + c)] = coords[0] == coords[1] ? 1.0 : 0.0;
        s1[static_cast<std::size_t>(offset + c)] = grid.center_of(0, coords[0]);
    }

    TwoBitMdp out{grid,
                  planning::with_next_state_reward(mdp, match),
                  planning::laggedize(planning::with_next_state_reward(mdp, match), grid),
                  0,
                  match,
                  s1};
    return out;
}

namespace {

// Comonotone coupling of two discrete distributions: glue mass walking both
// CDFs in cell order.
std::vector<std::vector<double>> comonotone_joint(const std::vector<double>& m1,
                                                  const std::vector<double>& m2) {
    std::vector<std::vector<double>> joint(m1.size(), std::vector<double>(m2.size(), 0.0));
    std::size_t i = 0, j = 0;
    double r1 = m1.empty() ? 0.0 : m1[0];
    double r2 = m2.empty() ? 0.0 : m2[0];
    while (i < m1.size() && j < m2.size()) {
        const double take = std::min(r1, r2);
        joint[i][j] += take;
        r1 -= take;
        r2 -= take;
        if (r1 <= 1e-15) {
            ++i;
            if (i < m1.size()) r1 = m1[i];
        }
        if (r2 <= 1e-15) {
            ++j;
            if (j < m2.size()) r2 = m2[j];
        }
    }
    return joint;
}

// Discrete kernel on a 1-D cell line: mass [0.2, 0.6, 0.2] centered at the
// current cell shifted by `drift`, reflected at the edges.
std::vector<double> shifted_kernel(int n, int cell, int drift) {
    std::vector<double> m(static_cast<std::size_t>(n), 0.0);
    const auto put = [&](int c, double p) {
        c = std::clamp(c, 0, n - 1);
        m[static_cast<std::size_t>(c)] += p;
    };
    put(cell + drift - 1, 0.2);
    put(cell + drift, 0.6);
    put(cell + drift + 1, 0.2);
    return m;
}

}  // namespace

FactoredMdp make_factored_mdp(int cells_per_dim, double lambda, double gamma) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("make_factored_mdp: lambda outside [0,1]");
    using planning::Grid;
    using planning::GridDim;
    using planning::SparseRow;
    using planning::TabularMDP;

    Grid grid({GridDim{-2.0, 2.0, cells_per_dim}, GridDim{-2.0, 2.0, cells_per_dim}});
    TabularMDP mdp(grid.size(), 2, gamma);

    for (int s = 0; s < grid.size(); ++s) {
        const auto coords = grid.coords(s);
        // Dim 0 marginal depends on (own cell, action); dim 1 only on its own cell.
        for (int a = 0; a < 2; ++a) {
            const auto m1 = shifted_kernel(cells_per_dim, coords[0], a == 0 ? -1 : 1);
            const auto m2 = shifted_kernel(cells_per_dim, coords[1], 0);
            const auto como = comonotone_joint(m1, m2);
            SparseRow row;
            for (int c1 = 0; c1 < cells_per_dim; ++c1)
                for (int c2 = 0; c2 < cells_per_dim; ++c2) {
                    const double p = (1.0 - lambda) * m1[static_cast<std::size_t>(c1)] *
                                         m2[static_cast<std::size_t>(c2)] +
                                     lambda * como[static_cast<std::size_t>(c1)]
                                              [static_cast<std::size_t>(c2)];
                    if (p <= 0.0) continue;
                    row.idx.push_back(static_cast<std::int32_t>(grid.from_coords({c1, c2})));
                    row.prob.push_back(p);
                }
            mdp.set_row(s, a, std::move(row));
        }
    }
    return FactoredMdp{std::move(grid), std::move(mdp), lambda};
}

std::vector<double> factored_separable_reward(const FactoredMdp& f) {
    std::vector<double> r(static_cast<std::size_t>(f.mdp.n_states()), 0.0);
    for (int s = 0; s < f.mdp.n_states(); ++s) {
        const auto coords = f.grid.coords(s);
        const double s1 = f.grid.center_of(0, coords[0]);
        const double s2 = f.grid.center_of(1, coords[1]);
        r[static_cast<std::size_t>(s)] = s1 * s1 + s2;
    }
    return r;
}

std::vector<double> factored_cross_reward(const FactoredMdp& f) {
    std::vector<double> r(static_cast<std::size_t>(f.mdp.n_states()), 0.0);
    for (int s = 0; s < f.mdp.n_states(); ++s) {
        const auto coords = f.grid.coords(s);
        r[static_cast<std::size_t>(s)] =
            f.grid.center_of(0, coords[0]) * f.grid.center_of(1, coords[1]);
    }
    return r;
}

}  // namespace inslab::theorylab
