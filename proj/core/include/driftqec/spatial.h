#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/rational.hpp>

namespace driftqec::spatial {

using Rational = boost::rational<std::int64_t>;

/// Physical qubits of one distance-d surface code tile: 2d^2 - 1.
std::int64_t tile_qubits(int d);

/// 2x2 unit tile, one logical tile plus three routing tiles: 8d^2 - 4.
std::int64_t unit_tile_qubits(int d);

/// Unit tile whose routing tiles are kept at distance d + delta:
/// 3 (2 (d + delta)^2 - 1) + (2d^2 - 1).
std::int64_t deformation_unit_tile_qubits(int d, int delta);

/// Same count through the expanded polynomial 8d^2 + 12 d delta + 6 delta^2 - 4.
std::int64_t deformation_unit_tile_qubits_expanded(int d, int delta);

/// Break-even number of reloqation tiles per logical qubit,
/// M / N = 3 delta (2d + delta) / (4d^2 - 2).
Rational reloqation_ratio(int d, int delta);

/// (N + M) unit(d) == N deform(d, delta), evaluated exactly with M = N * ratio.
bool break_even_holds(int d, int delta, const Rational &ratio);

struct CrossoverRow {
    int d = 0;
    int delta = 0;
    Rational ratio;
    std::int64_t max_m = 0;  // floor(n_qubits * ratio)
    bool efficient = false;  // ratio <= 1
};

std::vector<CrossoverRow> crossover_report(int delta, const std::vector<int> &d_range, std::int64_t n_qubits);

/// `d,delta,ratio,max_M,efficient`
void write_crossover_csv(std::ostream &out, const std::vector<CrossoverRow> &rows);

}  // namespace driftqec::spatial
